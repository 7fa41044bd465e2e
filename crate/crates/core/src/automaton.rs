//! Deterministic automata with partial transition functions.
//!
//! States are opaque integer ids; the alphabet carries the controllability
//! and adversary-observability flags of every event.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::AutomatonError;

/// Opaque state identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of an event within its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(pub u16);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A sequence of events; the empty word is `Vec::new()`.
pub type Word = Vec<EventId>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub name: String,
    pub controllable: bool,
    /// Observable by the adversary.
    pub observable: bool,
}

impl Event {
    pub fn new(name: impl Into<String>, controllable: bool, observable: bool) -> Self {
        Self { name: name.into(), controllable, observable }
    }
}

/// Event set sorted by name. Event ids are positions in that order, so two
/// alphabets with the same events always assign the same ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Alphabet {
    events: Vec<Event>,
}

impl Alphabet {
    pub fn new(mut events: Vec<Event>) -> Result<Self, AutomatonError> {
        events.sort_by(|a, b| a.name.cmp(&b.name));
        for pair in events.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(AutomatonError::DuplicateEvent(pair[0].name.clone()));
            }
        }
        if let Some(bad) = events.iter().find(|e| !valid_token(&e.name)) {
            return Err(AutomatonError::InvalidName(bad.name.clone()));
        }
        if events.len() > u16::MAX as usize {
            return Err(AutomatonError::AlphabetTooLarge(events.len()));
        }
        Ok(Self { events })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn get(&self, id: EventId) -> &Event {
        &self.events[id.index()]
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.events
            .binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
            .map(|i| EventId(i as u16))
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.events.len()).map(|i| EventId(i as u16))
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventId, &Event)> {
        self.events.iter().enumerate().map(|(i, e)| (EventId(i as u16), e))
    }

    pub fn is_controllable(&self, id: EventId) -> bool {
        self.events[id.index()].controllable
    }

    pub fn is_observable(&self, id: EventId) -> bool {
        self.events[id.index()].observable
    }

    /// Mask of adversary-observable events, indexed by event id.
    pub fn observable_mask(&self) -> Vec<bool> {
        self.events.iter().map(|e| e.observable).collect()
    }

    /// The sub-alphabet of adversary-observable events (ids are renumbered).
    pub fn observable_subset(&self) -> Alphabet {
        Alphabet { events: self.events.iter().filter(|e| e.observable).cloned().collect() }
    }

    /// Look up every event of `other` in `self` by name.
    pub fn embed(&self, other: &Alphabet) -> Option<Vec<EventId>> {
        other.events.iter().map(|e| self.id(&e.name)).collect()
    }
}

/// Names usable in the text format: nonempty, no whitespace and none of the
/// reserved separators.
pub(crate) fn valid_token(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '|' | ',' | '#' | '@'))
}

/// Erase the events of `word` that are not observable.
pub fn project(word: &[EventId], observable: &[bool]) -> Word {
    word.iter().copied().filter(|e| observable[e.index()]).collect()
}

/// A deterministic finite automaton with a partial transition function.
///
/// The null automaton (no states, no initial state) is a legal value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Alphabet,
    states: BTreeSet<StateId>,
    delta: BTreeMap<(StateId, EventId), StateId>,
    initial: Option<StateId>,
    marked: BTreeSet<StateId>,
}

impl Automaton {
    pub fn null(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            states: BTreeSet::new(),
            delta: BTreeMap::new(),
            initial: None,
            marked: BTreeSet::new(),
        }
    }

    /// An automaton with the given states, no transitions and nothing marked.
    pub fn new(
        alphabet: Alphabet,
        states: impl IntoIterator<Item = StateId>,
        initial: StateId,
    ) -> Result<Self, AutomatonError> {
        let states: BTreeSet<StateId> = states.into_iter().collect();
        if !states.contains(&initial) {
            return Err(AutomatonError::UnknownState(initial));
        }
        Ok(Self {
            alphabet,
            states,
            delta: BTreeMap::new(),
            initial: Some(initial),
            marked: BTreeSet::new(),
        })
    }

    /// Convenience constructor from raw ids; used heavily by fixtures.
    pub fn from_parts(
        alphabet: Alphabet,
        states: impl IntoIterator<Item = u32>,
        initial: u32,
        transitions: &[(u32, &str, u32)],
        marked: impl IntoIterator<Item = u32>,
    ) -> Result<Self, AutomatonError> {
        let mut g = Self::new(alphabet, states.into_iter().map(StateId), StateId(initial))?;
        for &(src, event, dst) in transitions {
            let e = g
                .alphabet
                .id(event)
                .ok_or_else(|| AutomatonError::UnknownEvent(event.to_string()))?;
            g.add_transition(StateId(src), e, StateId(dst))?;
        }
        for q in marked {
            g.mark(StateId(q))?;
        }
        Ok(g)
    }

    pub fn add_state(&mut self, q: StateId) {
        self.states.insert(q);
        if self.initial.is_none() {
            self.initial = Some(q);
        }
    }

    pub fn add_transition(
        &mut self,
        src: StateId,
        event: EventId,
        dst: StateId,
    ) -> Result<(), AutomatonError> {
        for q in [src, dst] {
            if !self.states.contains(&q) {
                return Err(AutomatonError::UnknownState(q));
            }
        }
        if event.index() >= self.alphabet.len() {
            return Err(AutomatonError::UnknownEventId(event.0));
        }
        match self.delta.get(&(src, event)) {
            Some(&existing) if existing != dst => Err(AutomatonError::Nondeterministic {
                state: src,
                event: self.alphabet.get(event).name.clone(),
            }),
            _ => {
                self.delta.insert((src, event), dst);
                Ok(())
            }
        }
    }

    pub fn mark(&mut self, q: StateId) -> Result<(), AutomatonError> {
        if !self.states.contains(&q) {
            return Err(AutomatonError::UnknownState(q));
        }
        self.marked.insert(q);
        Ok(())
    }

    pub fn set_marked(&mut self, marked: impl IntoIterator<Item = StateId>) -> Result<(), AutomatonError> {
        self.marked.clear();
        for q in marked {
            self.mark(q)?;
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    pub fn marked(&self) -> &BTreeSet<StateId> {
        &self.marked
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked.contains(&q)
    }

    pub fn is_null(&self) -> bool {
        self.initial.is_none()
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.states.contains(&q)
    }

    pub fn successor(&self, q: StateId, e: EventId) -> Option<StateId> {
        self.delta.get(&(q, e)).copied()
    }

    /// Outgoing transitions of `q` in event order.
    pub fn outgoing(&self, q: StateId) -> impl Iterator<Item = (EventId, StateId)> + '_ {
        self.delta
            .range((q, EventId(0))..=(q, EventId(u16::MAX)))
            .map(|(&(_, e), &dst)| (e, dst))
    }

    /// All transitions, sorted by (source, event).
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.delta.iter().map(|(&(s, e), &d)| (s, e, d))
    }

    /// Extended transition function; `None` when undefined.
    pub fn run(&self, word: &[EventId]) -> Option<StateId> {
        word.iter().try_fold(self.initial?, |q, &e| self.successor(q, e))
    }

    pub fn accepts(&self, word: &[EventId]) -> bool {
        self.run(word).is_some()
    }

    /// Restriction to the states reachable from the initial state.
    pub fn accessible(&self) -> Automaton {
        let Some(q0) = self.initial else {
            return self.clone();
        };
        let mut seen = BTreeSet::from([q0]);
        let mut queue = VecDeque::from([q0]);
        while let Some(q) = queue.pop_front() {
            for (_, dst) in self.outgoing(q) {
                if seen.insert(dst) {
                    queue.push_back(dst);
                }
            }
        }
        self.restrict(&seen)
    }

    /// Keep only `keep` (which must contain the initial state, unless empty)
    /// and the transitions between kept states.
    pub fn restrict(&self, keep: &BTreeSet<StateId>) -> Automaton {
        let initial = self.initial.filter(|q| keep.contains(q));
        if initial.is_none() {
            return Automaton::null(self.alphabet.clone());
        }
        Automaton {
            alphabet: self.alphabet.clone(),
            states: self.states.intersection(keep).copied().collect(),
            delta: self
                .delta
                .iter()
                .filter(|((s, _), d)| keep.contains(s) && keep.contains(d))
                .map(|(k, v)| (*k, *v))
                .collect(),
            initial,
            marked: self.marked.intersection(keep).copied().collect(),
        }
    }

    /// Delete states (and their transitions), then take the accessible part.
    pub fn delete_states(&self, doomed: &BTreeSet<StateId>) -> Automaton {
        let keep = self.states.difference(doomed).copied().collect();
        self.restrict(&keep).accessible()
    }

    /// States reachable from `q` through events that are not observable.
    pub fn epsilon_reach(&self, q: StateId, observable: &[bool]) -> Result<BTreeSet<StateId>, AutomatonError> {
        if !self.states.contains(&q) {
            return Err(AutomatonError::UnknownState(q));
        }
        let mut reach = BTreeSet::from([q]);
        let mut stack = vec![q];
        while let Some(x) = stack.pop() {
            for (e, dst) in self.outgoing(x) {
                if !observable[e.index()] && reach.insert(dst) {
                    stack.push(dst);
                }
            }
        }
        Ok(reach)
    }

    /// Every word of length at most `max_len` in the generated language,
    /// in shortlex order.
    pub fn bounded_language(&self, max_len: usize) -> Vec<Word> {
        let Some(q0) = self.initial else {
            return Vec::new();
        };
        let mut out = vec![Vec::new()];
        let mut frontier = vec![(Vec::new(), q0)];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (word, q) in &frontier {
                for (e, dst) in self.outgoing(*q) {
                    let mut w = word.clone();
                    w.push(e);
                    next.push((w, dst));
                }
            }
            out.extend(next.iter().map(|(w, _)| w.clone()));
            frontier = next;
        }
        out
    }
}

/// Two words are equiresponse-equivalent when they drive the automaton to
/// the same state or are both outside its language.
pub fn equiresponse_equivalent(g: &Automaton, s: &[EventId], t: &[EventId]) -> bool {
    g.run(s) == g.run(t)
}

fn check_alphabets(a: &Alphabet, b: &Alphabet) -> Result<(), AutomatonError> {
    if a == b {
        Ok(())
    } else {
        Err(AutomatonError::AlphabetMismatch)
    }
}

/// Whether `sub` agrees with `g` on the response to every word of `L(sub)`.
///
/// Runs the two automata in lockstep from their initial states; the
/// relation holds iff every reachable pair consists of equal states.
pub fn is_subautomaton(sub: &Automaton, g: &Automaton) -> Result<bool, AutomatonError> {
    check_alphabets(sub.alphabet(), g.alphabet())?;
    let Some(s0) = sub.initial() else {
        return Ok(true);
    };
    let Some(g0) = g.initial() else {
        return Ok(false);
    };
    let mut seen = BTreeSet::from([(s0, g0)]);
    let mut stack = vec![(s0, g0)];
    while let Some((x, y)) = stack.pop() {
        if x != y {
            return Ok(false);
        }
        for (e, dx) in sub.outgoing(x) {
            let Some(dy) = g.successor(y, e) else {
                return Ok(false);
            };
            if seen.insert((dx, dy)) {
                stack.push((dx, dy));
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ids(g: &Automaton, names: &[&str]) -> Word {
        names.iter().map(|n| g.alphabet().id(n).unwrap()).collect()
    }

    fn set(v: &[u32]) -> BTreeSet<StateId> {
        v.iter().copied().map(StateId).collect()
    }

    #[test]
    fn accessible_keeps_reachable_part() {
        let f1 = fixtures::f1();
        assert_eq!(f1.accessible(), f1);

        let mut extra = f1.clone();
        extra.add_state(StateId(3));
        assert_eq!(extra.accessible(), f1);

        let u = f1.alphabet().id("u").unwrap();
        let mut cut = Automaton::new(f1.alphabet().clone(), [0, 1, 2].map(StateId), StateId(0)).unwrap();
        cut.add_transition(StateId(0), u, StateId(1)).unwrap();
        assert_eq!(cut.accessible().states(), &set(&[0, 1]));
    }

    #[test]
    fn projection_examples() {
        let f1 = fixtures::f1();
        let obs = f1.alphabet().observable_mask();
        assert_eq!(project(&ids(&f1, &["u", "a", "u"]), &obs), ids(&f1, &["a"]));
        assert_eq!(project(&[], &obs), Vec::<EventId>::new());
        let all = vec![true; f1.alphabet().len()];
        assert_eq!(project(&ids(&f1, &["a", "u"]), &all), ids(&f1, &["a", "u"]));
    }

    #[test]
    fn epsilon_reach_examples() {
        let f1 = fixtures::f1();
        let obs = f1.alphabet().observable_mask();
        assert_eq!(f1.epsilon_reach(StateId(0), &obs).unwrap(), set(&[0, 1]));
        assert_eq!(f1.epsilon_reach(StateId(2), &obs).unwrap(), set(&[2]));
        let without_1 = f1.delete_states(&set(&[1]));
        let sub = without_1.epsilon_reach(StateId(0), &obs).unwrap();
        assert_eq!(sub, set(&[0]));
        assert!(sub.is_subset(&f1.epsilon_reach(StateId(0), &obs).unwrap()));
        assert!(matches!(
            f1.epsilon_reach(StateId(7), &obs),
            Err(AutomatonError::UnknownState(StateId(7)))
        ));
    }

    #[test]
    fn subautomaton_examples() {
        let f1 = fixtures::f1();
        let without_2 = f1.delete_states(&set(&[2]));
        assert!(is_subautomaton(&without_2, &f1).unwrap());
        assert!(is_subautomaton(&f1, &f1).unwrap());

        let mut relabeled = Automaton::new(f1.alphabet().clone(), [StateId(9)], StateId(9)).unwrap();
        relabeled.mark(StateId(9)).unwrap();
        assert!(!is_subautomaton(&relabeled, &f1).unwrap());

        assert!(is_subautomaton(&Automaton::null(f1.alphabet().clone()), &f1).unwrap());
        let other = fixtures::f2();
        assert!(matches!(is_subautomaton(&other, &f1), Err(AutomatonError::AlphabetMismatch)));
    }

    #[test]
    fn equiresponse_examples() {
        let f1 = fixtures::f1();
        assert!(equiresponse_equivalent(&f1, &ids(&f1, &["a"]), &ids(&f1, &["u", "a"])));
        assert!(equiresponse_equivalent(&f1, &[], &[]));
        assert!(!equiresponse_equivalent(&f1, &ids(&f1, &["a", "a"]), &ids(&f1, &["a"])));
    }

    #[test]
    fn bounded_language_examples() {
        let f1 = fixtures::f1();
        assert_eq!(f1.bounded_language(1), vec![vec![], ids(&f1, &["a"]), ids(&f1, &["u"])]);
        assert_eq!(f1.bounded_language(0), vec![Vec::<EventId>::new()]);
        let f2 = fixtures::f2();
        assert_eq!(
            f2.bounded_language(2),
            vec![vec![], ids(&f2, &["c"]), ids(&f2, &["c", "u"])]
        );
    }

    #[test]
    fn nondeterminism_rejected() {
        let f1 = fixtures::f1();
        let mut g = f1.clone();
        let a = g.alphabet().id("a").unwrap();
        assert!(matches!(
            g.add_transition(StateId(0), a, StateId(1)),
            Err(AutomatonError::Nondeterministic { .. })
        ));
        assert!(g.add_transition(StateId(0), a, StateId(2)).is_ok());
    }

    #[test]
    fn duplicate_event_rejected() {
        let err = Alphabet::new(vec![Event::new("a", true, true), Event::new("a", false, true)]);
        assert!(matches!(err, Err(AutomatonError::DuplicateEvent(_))));
    }
}
