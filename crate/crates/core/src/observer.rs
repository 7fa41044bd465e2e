//! The adversary's view of a plant: determinization over the observable
//! events, where a subset state is marked only if *every* plant state in it
//! is marked.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::automaton::{Alphabet, Automaton, EventId, StateId};
use crate::error::AutomatonError;

/// A set of plant states, kept in ascending order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EstimateLabel(Arc<[StateId]>);

impl EstimateLabel {
    pub fn new(states: impl IntoIterator<Item = StateId>) -> Self {
        let set: BTreeSet<StateId> = states.into_iter().collect();
        Self(set.into_iter().collect())
    }

    pub(crate) fn from_sorted(states: Vec<StateId>) -> Self {
        debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
        Self(states.into())
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn is_subset(&self, other: &EstimateLabel) -> bool {
        self.0.iter().all(|q| other.contains(*q))
    }

    /// Every member is in `secrets`.
    pub fn within(&self, secrets: &BTreeSet<StateId>) -> bool {
        self.0.iter().all(|q| secrets.contains(q))
    }

    pub fn to_set(&self) -> BTreeSet<StateId> {
        self.0.iter().copied().collect()
    }
}

impl fmt::Debug for EstimateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", q.0)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for EstimateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Deterministic automaton whose states are estimate labels.
///
/// Its alphabet is the observable sub-alphabet of the plant it was built
/// from; states are numbered in discovery order with the initial state 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observer {
    alphabet: Alphabet,
    labels: Vec<EstimateLabel>,
    table: Vec<Option<u32>>,
    marked: Vec<bool>,
}

impl Observer {
    /// Build an observer from explicit parts. `transitions` are
    /// `(source, event, target)` indices into `labels`; state 0 is initial.
    pub fn from_parts(
        alphabet: Alphabet,
        labels: Vec<EstimateLabel>,
        transitions: &[(usize, EventId, usize)],
        marked: Vec<bool>,
    ) -> Result<Self, AutomatonError> {
        let k = alphabet.len();
        let n = labels.len();
        let mut table = vec![None; n * k];
        for &(s, e, d) in transitions {
            if s >= n || d >= n {
                return Err(AutomatonError::UnknownState(StateId(s.max(d) as u32)));
            }
            if e.index() >= k {
                return Err(AutomatonError::UnknownEventId(e.0));
            }
            let slot = &mut table[s * k + e.index()];
            if slot.is_some_and(|x| x as usize != d) {
                return Err(AutomatonError::Nondeterministic {
                    state: StateId(s as u32),
                    event: alphabet.get(e).name.clone(),
                });
            }
            *slot = Some(d as u32);
        }
        let mut marked = marked;
        marked.resize(n, false);
        Ok(Self { alphabet, labels, table, marked })
    }

    pub fn null(alphabet: Alphabet) -> Self {
        Self { alphabet, labels: Vec::new(), table: Vec::new(), marked: Vec::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn is_null(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    /// Index of the initial state, `None` for the null observer.
    pub fn initial(&self) -> Option<usize> {
        (!self.labels.is_empty()).then_some(0)
    }

    pub fn label(&self, state: usize) -> &EstimateLabel {
        &self.labels[state]
    }

    pub fn labels(&self) -> &[EstimateLabel] {
        &self.labels
    }

    pub fn is_marked(&self, state: usize) -> bool {
        self.marked[state]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.marked.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i)
    }

    pub fn successor(&self, state: usize, e: EventId) -> Option<usize> {
        self.table[state * self.alphabet.len() + e.index()].map(|x| x as usize)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, EventId, usize)> + '_ {
        let k = self.alphabet.len();
        self.table
            .iter()
            .enumerate()
            .filter_map(move |(i, t)| t.map(|d| (i / k, EventId((i % k) as u16), d as usize)))
    }

    /// Estimate reached after an observed word, if the word is in the
    /// observer's language.
    pub fn run(&self, word: &[EventId]) -> Option<usize> {
        word.iter().try_fold(self.initial()?, |s, &e| self.successor(s, e))
    }

    /// The same observer with every state labelled `{q}`; the plant must be
    /// fully observable for this to be meaningful.
    pub fn lift(g: &Automaton) -> Observer {
        let g = g.accessible();
        let Some(q0) = g.initial() else {
            return Observer::null(g.alphabet().clone());
        };
        let mut order = vec![q0];
        order.extend(g.states().iter().copied().filter(|&q| q != q0));
        let index: HashMap<StateId, usize> = order.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let transitions: Vec<_> = g.transitions().map(|(s, e, d)| (index[&s], e, index[&d])).collect();
        let labels = order.iter().map(|q| EstimateLabel::new([*q])).collect();
        let marked = order.iter().map(|q| g.is_marked(*q)).collect();
        Observer::from_parts(g.alphabet().clone(), labels, &transitions, marked)
            .expect("lifted automaton is deterministic")
    }
}

/// Subset construction over the adversary-observable events of `g`.
///
/// Unobservable events are replaced by the empty string; the successor of
/// estimate `A` on `σ` is the union of ε-reaches of the `σ`-successors of
/// its members, and no transition is created when that union is empty.
pub fn observe(g: &Automaton) -> Observer {
    let obs_alphabet = g.alphabet().observable_subset();
    let Some(q0) = g.initial() else {
        return Observer::null(obs_alphabet);
    };
    let plant_ids = g.alphabet().embed(&obs_alphabet).expect("subset of own alphabet");
    let observable = g.alphabet().observable_mask();

    // Dense adjacency over the plant's states.
    let states: Vec<StateId> = g.states().iter().copied().collect();
    let dense: HashMap<StateId, usize> = states.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let k = g.alphabet().len();
    let mut succ = vec![None; states.len() * k];
    let mut silent: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (s, e, d) in g.transitions() {
        let (si, di) = (dense[&s], dense[&d]);
        succ[si * k + e.index()] = Some(di);
        if !observable[e.index()] {
            silent[si].push(di);
        }
    }

    let mut mark = vec![false; states.len()];
    let mut closure = |seeds: &mut Vec<usize>| -> Vec<usize> {
        let mut out = Vec::new();
        for &s in seeds.iter() {
            if !mark[s] {
                mark[s] = true;
                out.push(s);
            }
        }
        let mut i = 0;
        while i < out.len() {
            for &d in &silent[out[i]] {
                if !mark[d] {
                    mark[d] = true;
                    out.push(d);
                }
            }
            i += 1;
        }
        for &s in &out {
            mark[s] = false;
        }
        out.sort_unstable();
        seeds.clear();
        out
    };

    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut transitions = Vec::new();
    let mut queue = VecDeque::new();

    let init = closure(&mut vec![dense[&q0]]);
    index.insert(init.clone(), 0);
    sets.push(init);
    queue.push_back(0);
    let mut seeds = Vec::new();
    while let Some(i) = queue.pop_front() {
        for (oe, &pe) in plant_ids.iter().enumerate() {
            seeds.extend(sets[i].iter().filter_map(|&s| succ[s * k + pe.index()]));
            if seeds.is_empty() {
                continue;
            }
            let target = closure(&mut seeds);
            let next = match index.get(&target) {
                Some(&j) => j,
                None => {
                    let j = sets.len();
                    index.insert(target.clone(), j);
                    sets.push(target);
                    queue.push_back(j);
                    j
                }
            };
            transitions.push((i, EventId(oe as u16), next));
        }
    }

    let labels: Vec<EstimateLabel> = sets
        .iter()
        .map(|set| EstimateLabel::from_sorted(set.iter().map(|&i| states[i]).collect()))
        .collect();
    let marked = labels.iter().map(|l| l.within(g.marked())).collect();
    Observer::from_parts(obs_alphabet, labels, &transitions, marked).expect("subset construction is deterministic")
}

/// Whether every estimate of `sub` is contained in the estimate `h`
/// reaches on the same observed word, over all words of `L(sub)`.
pub fn is_subobserver(sub: &Observer, h: &Observer) -> Result<bool, AutomatonError> {
    if sub.alphabet() != h.alphabet() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let Some(s0) = sub.initial() else {
        return Ok(true);
    };
    let Some(h0) = h.initial() else {
        return Ok(false);
    };
    let mut seen = BTreeSet::from([(s0, h0)]);
    let mut stack = vec![(s0, h0)];
    while let Some((x, y)) = stack.pop() {
        if !sub.label(x).is_subset(h.label(y)) {
            return Ok(false);
        }
        for e in sub.alphabet().ids() {
            let Some(dx) = sub.successor(x, e) else { continue };
            let Some(dy) = h.successor(y, e) else {
                return Ok(false);
            };
            if seen.insert((dx, dy)) {
                stack.push((dx, dy));
            }
        }
    }
    Ok(true)
}
