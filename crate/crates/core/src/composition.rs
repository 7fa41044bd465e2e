//! Parallel composition of a plant with its observer.
//!
//! A product state `q/A` pairs a plant state with an adversary estimate.
//! Estimates are stored per *cell*: the states of one observer state share
//! a cell, and a cell's label is the estimate they all carry. Two cells may
//! end up with equal labels after refinement splits an estimate, so state
//! identity is the index, not the payload.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::automaton::{Alphabet, Automaton, EventId, StateId};
use crate::error::{AutomatonError, ProductError};
use crate::observer::{observe, EstimateLabel, Observer};

/// Payload of a product state: plant state over adversary estimate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub plant: StateId,
    pub estimate: EstimateLabel,
}

impl ProductState {
    pub fn new(plant: u32, estimate: impl IntoIterator<Item = u32>) -> Self {
        Self { plant: StateId(plant), estimate: EstimateLabel::new(estimate.into_iter().map(StateId)) }
    }
}

impl fmt::Debug for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{:?}", self.plant.0, self.estimate)
    }
}

/// `G || H` for a plant `G` and an observer `H` of it (or a refinement of
/// such a composition).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductAutomaton {
    alphabet: Alphabet,
    secrets: Arc<BTreeSet<StateId>>,
    plant: Vec<StateId>,
    cell: Vec<u32>,
    labels: Vec<EstimateLabel>,
    table: Vec<Option<u32>>,
    initial: Option<u32>,
    marked: Vec<bool>,
}

/// Raw parts of a product automaton, as produced by parsers and by the
/// refinement routines.
#[derive(Clone, Debug, Default)]
pub struct ProductParts {
    /// `(plant state, cell index)` per state.
    pub states: Vec<(StateId, usize)>,
    /// Estimate label of each cell.
    pub labels: Vec<EstimateLabel>,
    pub transitions: Vec<(usize, EventId, usize)>,
    pub initial: Option<usize>,
    pub marked: Vec<bool>,
}

/// Payload-level view used for fixture assertions: sets of states,
/// transitions and marked states, ignoring indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub states: BTreeSet<ProductState>,
    pub transitions: BTreeSet<(ProductState, EventId, ProductState)>,
    pub marked: BTreeSet<ProductState>,
}

impl ProductAutomaton {
    pub fn null(alphabet: Alphabet, secrets: BTreeSet<StateId>) -> Self {
        Self {
            alphabet,
            secrets: Arc::new(secrets),
            plant: Vec::new(),
            cell: Vec::new(),
            labels: Vec::new(),
            table: Vec::new(),
            initial: None,
            marked: Vec::new(),
        }
    }

    pub fn from_parts(
        alphabet: Alphabet,
        secrets: BTreeSet<StateId>,
        parts: ProductParts,
    ) -> Result<Self, ProductError> {
        let n = parts.states.len();
        let k = alphabet.len();
        if parts.initial.is_none() && n > 0 {
            return Err(ProductError::MissingInitial);
        }
        if let Some(i) = parts.initial {
            if i >= n {
                return Err(ProductError::UnknownState(i));
            }
        }
        if let Some(&(_, c)) = parts.states.iter().find(|(_, c)| *c >= parts.labels.len()) {
            return Err(ProductError::UnknownCell(c));
        }
        let mut table = vec![None; n * k];
        for &(s, e, d) in &parts.transitions {
            if s >= n || d >= n {
                return Err(ProductError::UnknownState(s.max(d)));
            }
            if e.index() >= k {
                return Err(AutomatonError::UnknownEventId(e.0).into());
            }
            let slot = &mut table[s * k + e.index()];
            if slot.is_some_and(|x| x as usize != d) {
                return Err(ProductError::Nondeterministic(s, alphabet.get(e).name.clone()));
            }
            *slot = Some(d as u32);
        }
        let mut marked = parts.marked;
        marked.resize(n, false);
        Ok(Self {
            alphabet,
            secrets: Arc::new(secrets),
            plant: parts.states.iter().map(|(q, _)| *q).collect(),
            cell: parts.states.iter().map(|(_, c)| *c as u32).collect(),
            labels: parts.labels,
            table,
            initial: parts.initial.map(|i| i as u32),
            marked,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// The plant's secret (marked) states.
    pub fn secrets(&self) -> &BTreeSet<StateId> {
        &self.secrets
    }

    pub fn num_states(&self) -> usize {
        self.plant.len()
    }

    pub fn num_cells(&self) -> usize {
        self.labels.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.table.iter().filter(|t| t.is_some()).count()
    }

    pub fn is_null(&self) -> bool {
        self.initial.is_none()
    }

    pub fn initial(&self) -> Option<usize> {
        self.initial.map(|i| i as usize)
    }

    pub fn plant_state(&self, i: usize) -> StateId {
        self.plant[i]
    }

    pub fn cell(&self, i: usize) -> usize {
        self.cell[i] as usize
    }

    pub fn cell_label(&self, c: usize) -> &EstimateLabel {
        &self.labels[c]
    }

    pub fn estimate(&self, i: usize) -> &EstimateLabel {
        &self.labels[self.cell[i] as usize]
    }

    pub fn state(&self, i: usize) -> ProductState {
        ProductState { plant: self.plant[i], estimate: self.estimate(i).clone() }
    }

    pub fn is_marked(&self, i: usize) -> bool {
        self.marked[i]
    }

    pub fn has_marked(&self) -> bool {
        self.marked.iter().any(|m| *m)
    }

    pub fn marked_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.marked.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i)
    }

    pub fn successor(&self, i: usize, e: EventId) -> Option<usize> {
        self.table[i * self.alphabet.len() + e.index()].map(|d| d as usize)
    }

    pub fn outgoing(&self, i: usize) -> impl Iterator<Item = (EventId, usize)> + '_ {
        let k = self.alphabet.len();
        self.table[i * k..(i + 1) * k]
            .iter()
            .enumerate()
            .filter_map(|(e, d)| d.map(|d| (EventId(e as u16), d as usize)))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, EventId, usize)> + '_ {
        (0..self.num_states()).flat_map(move |i| self.outgoing(i).map(move |(e, d)| (i, e, d)))
    }

    pub fn run(&self, word: &[EventId]) -> Option<usize> {
        word.iter().try_fold(self.initial()?, |s, &e| self.successor(s, e))
    }

    /// First index whose payload equals `state`.
    pub fn find(&self, state: &ProductState) -> Option<usize> {
        (0..self.num_states()).find(|&i| self.plant[i] == state.plant && self.estimate(i) == &state.estimate)
    }

    /// Re-mark: a state is marked iff its plant state and every member of
    /// its estimate are secret.
    pub fn remark(&mut self) {
        for i in 0..self.plant.len() {
            let c = self.cell[i] as usize;
            self.marked[i] = self.secrets.contains(&self.plant[i]) && self.labels[c].within(&self.secrets);
        }
    }

    pub fn remarked(mut self) -> Self {
        self.remark();
        self
    }

    pub fn clear_marking(&mut self) {
        self.marked.iter_mut().for_each(|m| *m = false);
    }

    /// Overwrite the label of one cell. Intended for tooling and negative
    /// tests; the result need not be a valid composition.
    pub fn relabel_cell(&mut self, c: usize, label: EstimateLabel) {
        self.labels[c] = label;
    }

    pub(crate) fn table(&self) -> &[Option<u32>] {
        &self.table
    }

    /// The states `order` of `self`, renumbered in that order; `index` maps
    /// old indices to new ones (`u32::MAX` for dropped states) and `cell`
    /// gives each new state's cell in `labels`.
    pub(crate) fn renumbered(&self, order: &[usize], index: &[u32], cell: Vec<u32>, labels: Vec<EstimateLabel>) -> Self {
        let k = self.alphabet.len();
        let mut table = Vec::with_capacity(order.len() * k);
        for &x in order {
            table.extend(self.table[x * k..(x + 1) * k].iter().map(|d| d.map(|d| index[d as usize]).filter(|&d| d != u32::MAX)));
        }
        Self {
            alphabet: self.alphabet.clone(),
            secrets: self.secrets.clone(),
            plant: order.iter().map(|&x| self.plant[x]).collect(),
            cell,
            labels,
            table,
            initial: (!order.is_empty()).then_some(0),
            marked: order.iter().map(|&x| self.marked[x]).collect(),
        }
    }

    pub(crate) fn shared_secrets(&self) -> Arc<BTreeSet<StateId>> {
        self.secrets.clone()
    }

    pub(crate) fn with_shared_secrets(alphabet: Alphabet, secrets: Arc<BTreeSet<StateId>>, parts: ProductParts) -> Self {
        let mut p = Self::from_parts(alphabet, BTreeSet::new(), parts).expect("internally built product is valid");
        p.secrets = secrets;
        p
    }

    /// The effective plant: one plant state per product state (ids are the
    /// product indices), secret iff the underlying plant state is secret.
    pub fn to_plant(&self) -> Automaton {
        let Some(q0) = self.initial else {
            return Automaton::null(self.alphabet.clone());
        };
        let mut g = Automaton::new(self.alphabet.clone(), (0..self.plant.len() as u32).map(StateId), StateId(q0))
            .expect("initial in range");
        for (s, e, d) in self.transitions() {
            g.add_transition(StateId(s as u32), e, StateId(d as u32)).expect("product is deterministic");
        }
        for (i, q) in self.plant.iter().enumerate() {
            if self.secrets.contains(q) {
                g.mark(StateId(i as u32)).expect("in range");
            }
        }
        g
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        let states = (0..self.num_states()).map(|i| self.state(i)).collect();
        let transitions = self.transitions().map(|(s, e, d)| (self.state(s), e, self.state(d))).collect();
        let marked = self.marked_states().map(|i| self.state(i)).collect();
        CanonicalForm { states, transitions, marked }
    }
}

/// Parallel composition `G || H`, restricted to its accessible part.
///
/// Events shared with the observer move both components; plant-only events
/// move the plant alone. A state is marked iff both components are marked.
pub fn parallel_compose(g: &Automaton, h: &Observer) -> Result<ProductAutomaton, AutomatonError> {
    let Some(h_in_g) = g.alphabet().embed(h.alphabet()) else {
        return Err(AutomatonError::AlphabetContainment);
    };
    let secrets = g.marked().clone();
    let (Some(q0), Some(h0)) = (g.initial(), h.initial()) else {
        return Ok(ProductAutomaton::null(g.alphabet().clone(), secrets));
    };
    let mut g_to_h: Vec<Option<EventId>> = vec![None; g.alphabet().len()];
    for (he, ge) in h_in_g.iter().enumerate() {
        g_to_h[ge.index()] = Some(EventId(he as u16));
    }

    let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut cell_of: HashMap<usize, usize> = HashMap::new();
    let mut parts = ProductParts::default();
    let mut queue = VecDeque::new();
    let mut intern = |q: StateId, a: usize, parts: &mut ProductParts, queue: &mut VecDeque<(StateId, usize)>| {
        *index.entry((q, a)).or_insert_with(|| {
            let c = *cell_of.entry(a).or_insert_with(|| {
                parts.labels.push(h.label(a).clone());
                parts.labels.len() - 1
            });
            parts.states.push((q, c));
            parts.marked.push(g.is_marked(q) && h.is_marked(a));
            queue.push_back((q, a));
            parts.states.len() - 1
        })
    };
    let start = intern(q0, h0, &mut parts, &mut queue);
    parts.initial = Some(start);
    let mut src = 0;
    while let Some((q, a)) = queue.pop_front() {
        for (e, q2) in g.outgoing(q) {
            let a2 = match g_to_h[e.index()] {
                Some(he) => match h.successor(a, he) {
                    Some(a2) => a2,
                    None => continue,
                },
                None => a,
            };
            let dst = intern(q2, a2, &mut parts, &mut queue);
            parts.transitions.push((src, e, dst));
        }
        src += 1;
    }
    Ok(ProductAutomaton::from_parts(g.alphabet().clone(), secrets, parts).expect("composition is well formed"))
}

/// `G || T(G)`.
pub fn compose_with_observer(g: &Automaton) -> ProductAutomaton {
    parallel_compose(g, &observe(g)).expect("observer alphabet is a subset of the plant's")
}

/// Product equality up to state indices: the two automata, run in lockstep
/// from their initial states, always sit in states with the same payload,
/// marking and set of defined events.
///
/// For products whose payloads are pairwise distinct this is exactly
/// equality of payload sets, payload-level transitions and marked payloads.
pub fn canonically_equal(a: &ProductAutomaton, b: &ProductAutomaton) -> bool {
    if a.alphabet() != b.alphabet() {
        return false;
    }
    let (a0, b0) = match (a.initial(), b.initial()) {
        (None, None) => return true,
        (Some(x), Some(y)) => (x, y),
        _ => return false,
    };
    let mut seen = BTreeSet::from([(a0, b0)]);
    let mut stack = vec![(a0, b0)];
    while let Some((x, y)) = stack.pop() {
        if a.plant_state(x) != b.plant_state(y) || a.estimate(x) != b.estimate(y) || a.is_marked(x) != b.is_marked(y) {
            return false;
        }
        for e in a.alphabet().ids() {
            match (a.successor(x, e), b.successor(y, e)) {
                (None, None) => {}
                (Some(dx), Some(dy)) => {
                    if seen.insert((dx, dy)) {
                        stack.push((dx, dy));
                    }
                }
                _ => return false,
            }
        }
    }
    true
}

/// Bounded check that every `q/A` of `m` within `depth` steps of the
/// initial state is reached by some word `s` with `δ_G(s) = q`, that
/// `q ∈ A`, and that every plant state reached by a word with the same
/// projection lies in `A`. Words up to `depth`.
///
/// Pairs of words are explored as tuples `(x, p, |s|, |t|)` where `x` is the
/// state of `m` after `s` and `p` the state of `g` after `t`, so the cost is
/// polynomial in `depth`.
pub fn check_state_consistency(m: &ProductAutomaton, g: &Automaton, depth: usize) -> bool {
    if m.is_null() != g.is_null() {
        return false;
    }
    let (Some(x0), Some(q0)) = (m.initial(), g.initial()) else {
        return true;
    };
    if m.alphabet() != g.alphabet() {
        return false;
    }
    let observable = g.alphabet().observable_mask();

    // Single words: m and g must agree on the plant state.
    let mut seen: BTreeSet<(usize, StateId)> = BTreeSet::from([(x0, q0)]);
    let mut frontier = vec![(x0, q0)];
    for _ in 0..=depth {
        let mut next = Vec::new();
        for (x, q) in frontier {
            if m.plant_state(x) != q || !m.estimate(x).contains(q) {
                return false;
            }
            for (e, q2) in g.outgoing(q) {
                let Some(x2) = m.successor(x, e) else { return false };
                if seen.insert((x2, q2)) {
                    next.push((x2, q2));
                }
            }
            if m.outgoing(x).any(|(e, _)| g.successor(q, e).is_none()) {
                return false;
            }
        }
        frontier = next;
    }

    // Pairs of words with equal projections.
    let bound = depth + 1;
    let key = |x: usize, p: StateId, i: usize, j: usize| ((x * g.num_states() + p.index()) * bound + i) * bound + j;
    let mut visited: HashSet<usize> = HashSet::from([key(x0, q0, 0, 0)]);
    let mut queue = VecDeque::from([(x0, q0, 0usize, 0usize)]);
    while let Some((x, p, i, j)) = queue.pop_front() {
        if !m.estimate(x).contains(p) {
            return false;
        }
        let mut push = |x: usize, p: StateId, i: usize, j: usize| {
            if visited.insert(key(x, p, i, j)) {
                queue.push_back((x, p, i, j));
            }
        };
        if i < depth {
            for (e, x2) in m.outgoing(x) {
                if !observable[e.index()] {
                    push(x2, p, i + 1, j);
                }
            }
        }
        if j < depth {
            for (e, p2) in g.outgoing(p) {
                if !observable[e.index()] {
                    push(x, p2, i, j + 1);
                }
            }
        }
        if i < depth && j < depth {
            for (e, x2) in m.outgoing(x) {
                if observable[e.index()] {
                    if let Some(p2) = g.successor(p, e) {
                        push(x2, p2, i + 1, j + 1);
                    }
                }
            }
        }
    }
    true
}

/// Whether the observer of the composition (taken as a plant) partitions
/// its states: every product state lies in exactly one estimate.
pub fn check_spa(g: &Automaton, m: &ProductAutomaton) -> bool {
    if g.alphabet() != m.alphabet() {
        return false;
    }
    let h = observe(&m.to_plant());
    let mut owner = vec![0usize; m.num_states()];
    for label in h.labels() {
        for q in label.states() {
            owner[q.index()] += 1;
        }
    }
    owner.iter().all(|c| *c == 1)
}
