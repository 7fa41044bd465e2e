//! Brute-force reference implementations and random generators.
//!
//! Nothing here uses the refinement or synthesis code; everything is built
//! from `observe`, `parallel_compose` and plain automaton operations, so
//! these routines can serve as ground truth for them.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{project, Alphabet, Automaton, Event, EventId, StateId};
use crate::composition::{parallel_compose, ProductAutomaton, ProductParts};
use crate::error::{AutomatonError, OracleError, ProductError};
use crate::observer::{observe, EstimateLabel};
use crate::refine::DeltaSet;
use crate::synthesis::Supervisor;

/// Upper bound on the subsets [`brute_force_supervisors`] will enumerate.
pub const MAX_BRUTE_FORCE_EDGES: usize = 12;

/// Largest product [`brute_force_supervisors`] accepts.
pub const MAX_BRUTE_FORCE_STATES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub states: RangeInclusive<usize>,
    pub events: RangeInclusive<usize>,
    /// Expected fraction of defined `(state, event)` pairs.
    pub density: f64,
    pub p_controllable: f64,
    pub p_observable: f64,
    pub p_marked: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            states: 1..=8,
            events: 1..=4,
            density: 0.4,
            p_controllable: 0.5,
            p_observable: 0.5,
            p_marked: 0.3,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let probabilities =
            [("density", self.density), ("p_controllable", self.p_controllable), ("p_observable", self.p_observable), ("p_marked", self.p_marked)];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(OracleError::InvalidConfig(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        if self.states.is_empty() || *self.states.start() == 0 {
            return Err(OracleError::InvalidConfig(format!("state range {:?} is empty", self.states)));
        }
        if self.events.is_empty() {
            return Err(OracleError::InvalidConfig(format!("event range {:?} is empty", self.events)));
        }
        if *self.events.end() > 26 * 26 {
            return Err(OracleError::InvalidConfig(format!("at most {} events", 26 * 26)));
        }
        Ok(())
    }
}

/// `a`, `b`, ..., `z`, `aa`, `ab`, ...
fn event_name(i: usize) -> String {
    let letter = |k: usize| char::from(b'a' + k as u8);
    if i < 26 {
        letter(i).to_string()
    } else {
        format!("{}{}", letter(i / 26 - 1), letter(i % 26))
    }
}

/// A random accessible automaton with initial state 0. The same config
/// always yields the same automaton.
pub fn random_automaton(cfg: &GeneratorConfig) -> Result<Automaton, OracleError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = rng.random_range(cfg.states.clone());
    let k = rng.random_range(cfg.events.clone());
    let events = (0..k)
        .map(|i| Event::new(event_name(i), rng.random_bool(cfg.p_controllable), rng.random_bool(cfg.p_observable)))
        .collect();
    let alphabet = Alphabet::new(events)?;
    let mut g = Automaton::new(alphabet, (0..n as u32).map(StateId), StateId(0))?;
    for q in 0..n as u32 {
        for e in 0..k as u16 {
            if rng.random_bool(cfg.density) {
                let d = rng.random_range(0..n as u32);
                g.add_transition(StateId(q), EventId(e), StateId(d))?;
            }
        }
    }
    let marked: Vec<StateId> = (0..n as u32).filter(|_| rng.random_bool(cfg.p_marked)).map(StateId).collect();
    g.set_marked(marked)?;
    Ok(g.accessible())
}

/// Delete a random set of non-initial states and transitions, each with a
/// deletion probability itself drawn at random, and keep the accessible
/// part.
pub fn random_subautomaton(g: &Automaton, seed: u64) -> Automaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_state = rng.random_range(0.0..0.6);
    let p_transition = rng.random_range(0.0..0.4);
    delete_at_random(g, p_state, p_transition, &mut rng)
}

/// As [`random_subautomaton`] with fixed deletion probabilities.
pub fn random_subautomaton_with(g: &Automaton, p_state: f64, p_transition: f64, seed: u64) -> Automaton {
    delete_at_random(g, p_state, p_transition, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn delete_at_random(g: &Automaton, p_state: f64, p_transition: f64, rng: &mut ChaCha8Rng) -> Automaton {
    let Some(q0) = g.initial() else { return g.clone() };
    let keep: BTreeSet<StateId> = g.states().iter().copied().filter(|&q| q == q0 || !rng.random_bool(p_state)).collect();
    let mut out = Automaton::new(g.alphabet().clone(), keep.iter().copied(), q0).expect("initial kept");
    for (s, e, d) in g.transitions() {
        if keep.contains(&s) && keep.contains(&d) && !rng.random_bool(p_transition) {
            out.add_transition(s, e, d).expect("deterministic");
        }
    }
    out.set_marked(g.marked().iter().copied().filter(|q| keep.contains(q))).expect("kept states");
    out.accessible()
}

/// A random subset of the states of `m`, each drawn with a random
/// probability.
pub fn random_delta(m: &ProductAutomaton, seed: u64) -> DeltaSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(0.0..0.5);
    (0..m.num_states()).filter(|_| rng.random_bool(p)).collect()
}

/// Refinement by full recomputation: take the effective plant of `m`,
/// delete the uncontrollable closure of `delta`, and compose the result
/// with its freshly computed observer.
///
/// States are marked iff their plant state is secret and their estimate
/// holds only secret states.
pub fn naive_refine(m: &ProductAutomaton, delta: &DeltaSet) -> Result<ProductAutomaton, ProductError> {
    if let Some(i) = delta.iter().find(|&i| i >= m.num_states()) {
        return Err(ProductError::UnknownState(i));
    }
    let effective = m.to_plant();
    let mut doomed: BTreeSet<StateId> = delta.iter().map(|i| StateId(i as u32)).collect();
    loop {
        let before = doomed.len();
        for (s, e, d) in effective.transitions() {
            if !effective.alphabet().is_controllable(e) && doomed.contains(&d) {
                doomed.insert(s);
            }
        }
        if doomed.len() == before {
            break;
        }
    }
    if effective.initial().is_some_and(|q0| doomed.contains(&q0)) {
        return Ok(ProductAutomaton::null(m.alphabet().clone(), m.secrets().clone()));
    }
    let remaining = effective.delete_states(&doomed);
    let over_nodes = parallel_compose(&remaining, &observe(&remaining))?;

    // Node ids are indices of `m`; map them back to plant states.
    let plant_of = |node: StateId| m.plant_state(node.index());
    let mut cells: HashMap<EstimateLabel, usize> = HashMap::new();
    let mut parts = ProductParts { initial: over_nodes.initial(), ..Default::default() };
    for x in 0..over_nodes.num_states() {
        let c = *cells.entry(over_nodes.estimate(x).clone()).or_insert_with(|| {
            parts.labels.push(EstimateLabel::new(over_nodes.estimate(x).states().iter().map(|&y| plant_of(y))));
            parts.labels.len() - 1
        });
        let q = plant_of(over_nodes.plant_state(x));
        parts.states.push((q, c));
        parts.marked.push(m.secrets().contains(&q) && parts.labels[c].within(m.secrets()));
    }
    parts.transitions = over_nodes.transitions().collect();
    ProductAutomaton::from_parts(m.alphabet().clone(), m.secrets().clone(), parts)
}

/// Result of [`brute_force_supervisors`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceResult {
    /// Number of edge subsets whose closed loop was opaque.
    pub opaque_subsets: usize,
    /// Opaque closed loops whose language no other opaque closed loop
    /// strictly contains, one per distinct language.
    pub maxima: Vec<Automaton>,
}

/// Enumerate every subset of the controllable transitions of `G || T(G)`,
/// keep all uncontrollable ones, and collect the opaque accessible closed
/// loops that are maximal under language inclusion.
pub fn brute_force_supervisors(g: &Automaton, max_controllable_edges: usize) -> Result<BruteForceResult, OracleError> {
    let m = parallel_compose(g, &observe(g))?;
    if m.num_states() > MAX_BRUTE_FORCE_STATES {
        return Err(OracleError::TooManyStates { states: m.num_states(), limit: MAX_BRUTE_FORCE_STATES });
    }
    let all: Vec<(usize, EventId, usize)> = m.transitions().collect();
    let controllable: Vec<usize> =
        (0..all.len()).filter(|&i| m.alphabet().is_controllable(all[i].1)).collect();
    let limit = max_controllable_edges.min(MAX_BRUTE_FORCE_EDGES);
    if controllable.len() > limit {
        return Err(OracleError::TooLarge { edges: controllable.len(), limit });
    }
    let Some(q0) = m.initial() else {
        return Ok(BruteForceResult { opaque_subsets: 0, maxima: Vec::new() });
    };
    let mut opaque: Vec<Automaton> = Vec::new();
    for mask in 0u32..(1 << controllable.len()) {
        let mut enabled = vec![true; all.len()];
        for (bit, &i) in controllable.iter().enumerate() {
            enabled[i] = mask & (1 << bit) != 0;
        }
        let mut loop_ = Automaton::new(m.alphabet().clone(), (0..m.num_states() as u32).map(StateId), StateId(q0 as u32))?;
        for (i, &(s, e, d)) in all.iter().enumerate() {
            if enabled[i] {
                loop_.add_transition(StateId(s as u32), e, StateId(d as u32))?;
            }
        }
        let secret = (0..m.num_states()).filter(|&i| m.secrets().contains(&m.plant_state(i)));
        loop_.set_marked(secret.map(|i| StateId(i as u32)).collect::<Vec<_>>())?;
        let loop_ = loop_.accessible();
        if observe(&loop_).marked_states().next().is_none() {
            opaque.push(loop_);
        }
    }
    let opaque_subsets = opaque.len();
    let mut maxima: Vec<Automaton> = Vec::new();
    for (i, a) in opaque.iter().enumerate() {
        let mut dominated = false;
        for (j, b) in opaque.iter().enumerate() {
            if i != j && language_included(a, b)? && (!language_included(b, a)? || j < i) {
                dominated = true;
                break;
            }
        }
        if !dominated {
            maxima.push(a.clone());
        }
    }
    Ok(BruteForceResult { opaque_subsets, maxima })
}

/// `L(a) ⊆ L(b)`, by a synchronized walk from the initial states.
pub fn language_included(a: &Automaton, b: &Automaton) -> Result<bool, AutomatonError> {
    if a.alphabet() != b.alphabet() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let Some(p0) = a.initial() else { return Ok(true) };
    let Some(q0) = b.initial() else { return Ok(false) };
    let mut seen = BTreeSet::from([(p0, q0)]);
    let mut queue = VecDeque::from([(p0, q0)]);
    while let Some((p, q)) = queue.pop_front() {
        for (e, p2) in a.outgoing(p) {
            let Some(q2) = b.successor(q, e) else { return Ok(false) };
            if seen.insert((p2, q2)) {
                queue.push_back((p2, q2));
            }
        }
    }
    Ok(true)
}

pub fn language_equal(a: &Automaton, b: &Automaton) -> Result<bool, AutomatonError> {
    Ok(language_included(a, b)? && language_included(b, a)?)
}

/// Comparison of three partitions of the words of `L(g)` up to a length
/// bound: `ρ` (kept in `g_sub` or removed), `match` (same state of `g` and
/// same observer state), and the equiresponse relation of `G || T(G)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub words: usize,
    pub match_classes: usize,
    pub product_classes: usize,
    /// Every `match` class lies inside one `ρ` class.
    pub match_refines_rho: bool,
    /// `match` and the product's equiresponse relation coincide.
    pub match_equals_product: bool,
}

pub fn relation_check(g: &Automaton, g_sub: &Automaton, depth: usize) -> Result<RelationReport, OracleError> {
    let h = observe(g);
    let m = parallel_compose(g, &h)?;
    let observable = g.alphabet().observable_mask();
    let to_h: Vec<Option<EventId>> = g.alphabet().iter().map(|(_, e)| h.alphabet().id(&e.name)).collect();
    let words = g.bounded_language(depth);
    let mut rho: HashMap<(StateId, usize), BTreeSet<bool>> = HashMap::new();
    let mut to_product: HashMap<(StateId, usize), BTreeSet<usize>> = HashMap::new();
    let mut from_product: HashMap<usize, BTreeSet<(StateId, usize)>> = HashMap::new();
    for w in &words {
        let key = (
            g.run(w).expect("word in language"),
            h.run(&project(w, &observable).iter().map(|e| to_h[e.index()].expect("observable")).collect::<Vec<_>>())
                .expect("projection observed"),
        );
        let x = m.run(w).expect("product language equals plant language");
        rho.entry(key).or_default().insert(g_sub.accepts(w));
        to_product.entry(key).or_default().insert(x);
        from_product.entry(x).or_default().insert(key);
    }
    Ok(RelationReport {
        words: words.len(),
        match_classes: to_product.len(),
        product_classes: from_product.len(),
        match_refines_rho: rho.values().all(|v| v.len() == 1),
        match_equals_product: to_product.values().all(|v| v.len() == 1) && from_product.values().all(|v| v.len() == 1),
    })
}

/// Outcome of [`reenable_check`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalMaximality {
    /// Disabled plant transitions that were tried.
    pub checked: usize,
    /// Those whose re-enabling kept the closed loop opaque, as
    /// `(closed-loop state, event)`.
    pub violations: Vec<(usize, EventId)>,
}

/// For each closed-loop state and each controllable event the plant allows
/// there but the supervisor disables, enable it once, let the plant run
/// only uncontrollable events afterwards, and test whether the enlarged
/// closed loop is still opaque.
pub fn reenable_check(s: &Supervisor, g: &Automaton) -> Result<LocalMaximality, OracleError> {
    let r = s.realization();
    if r.alphabet() != g.alphabet() {
        return Err(AutomatonError::AlphabetMismatch.into());
    }
    let (Some(x0), Some(q0)) = (r.initial(), g.initial()) else {
        return Ok(LocalMaximality::default());
    };
    let mut index: HashMap<(usize, StateId), usize> = HashMap::from([((x0, q0), 0)]);
    let mut pairs = vec![(x0, q0)];
    let mut edges = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (x, q) = pairs[head];
        for (e, q2) in g.outgoing(q) {
            let Some(x2) = r.successor(x, e) else { continue };
            let d = *index.entry((x2, q2)).or_insert_with(|| {
                pairs.push((x2, q2));
                pairs.len() - 1
            });
            edges.push((head, e, d));
        }
        head += 1;
    }

    let mut report = LocalMaximality::default();
    for (i, &(x, q)) in pairs.iter().enumerate() {
        for (e, q2) in g.outgoing(q) {
            if !g.alphabet().is_controllable(e) || r.successor(x, e).is_some() {
                continue;
            }
            report.checked += 1;
            let tail = uncontrollable_reach(g, q2);
            let offset = pairs.len();
            let n = offset + tail.len();
            let mut ext = Automaton::new(g.alphabet().clone(), (0..n as u32).map(StateId), StateId(0))?;
            for &(a, ev, b) in &edges {
                ext.add_transition(StateId(a as u32), ev, StateId(b as u32))?;
            }
            ext.add_transition(StateId(i as u32), e, StateId(offset as u32))?;
            let tail_index: BTreeMap<StateId, usize> = tail.iter().enumerate().map(|(j, &p)| (p, offset + j)).collect();
            for (&p, &j) in &tail_index {
                for (ev, p2) in g.outgoing(p) {
                    if !g.alphabet().is_controllable(ev) {
                        ext.add_transition(StateId(j as u32), ev, StateId(tail_index[&p2] as u32))?;
                    }
                }
            }
            let marked = pairs
                .iter()
                .enumerate()
                .filter(|(_, (_, p))| g.is_marked(*p))
                .map(|(j, _)| j)
                .chain(tail_index.iter().filter(|(p, _)| g.is_marked(**p)).map(|(_, &j)| j));
            ext.set_marked(marked.map(|j| StateId(j as u32)).collect::<Vec<_>>())?;
            if observe(&ext).marked_states().next().is_none() {
                report.violations.push((i, e));
            }
        }
    }
    Ok(report)
}

/// States of `g` reachable from `q` by uncontrollable events, `q` first.
fn uncontrollable_reach(g: &Automaton, q: StateId) -> Vec<StateId> {
    let mut seen = vec![q];
    let mut queue = VecDeque::from([q]);
    while let Some(x) = queue.pop_front() {
        for (e, d) in g.outgoing(x) {
            if !g.alphabet().is_controllable(e) && !seen.contains(&d) {
                seen.push(d);
                queue.push_back(d);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{canonically_equal, compose_with_observer, ProductState};
    use crate::fixtures;

    #[test]
    fn generator_is_deterministic() {
        let cfg = GeneratorConfig::default().with_seed(42);
        assert_eq!(random_automaton(&cfg).unwrap(), random_automaton(&cfg).unwrap());
    }

    #[test]
    fn degenerate_config() {
        let cfg = GeneratorConfig { states: 1..=1, density: 0.0, ..Default::default() };
        let g = random_automaton(&cfg).unwrap();
        assert_eq!(g.num_states(), 1);
        assert_eq!(g.num_transitions(), 0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = GeneratorConfig { density: 1.5, ..Default::default() };
        assert!(matches!(random_automaton(&cfg), Err(OracleError::InvalidConfig(_))));
        let cfg = GeneratorConfig { states: 0..=0, ..Default::default() };
        assert!(random_automaton(&cfg).is_err());
    }

    #[test]
    fn subautomaton_extremes() {
        let g = fixtures::worked_example();
        assert_eq!(random_subautomaton_with(&g, 0.0, 0.0, 1), g);
        let single = random_subautomaton_with(&g, 1.0, 0.0, 1);
        assert_eq!(single.num_states(), 1);
    }

    #[test]
    fn naive_refine_examples() {
        let f1 = fixtures::f1();
        let m = compose_with_observer(&f1);
        let delta: DeltaSet = [m.find(&ProductState::new(2, [2])).unwrap()].into_iter().collect();
        let out = naive_refine(&m, &delta).unwrap();
        assert_eq!(out.num_states(), 2);
        assert!(!out.has_marked());

        assert!(canonically_equal(&naive_refine(&m, &DeltaSet::default()).unwrap(), &m));

        let f4 = fixtures::f4();
        let m = compose_with_observer(&f4);
        let delta: DeltaSet = [m.find(&ProductState::new(3, [1, 3])).unwrap()].into_iter().collect();
        let out = naive_refine(&m, &delta).unwrap();
        assert!(out.find(&ProductState::new(1, [1])).is_some());
    }

    #[test]
    fn brute_force_examples() {
        let f1 = fixtures::f1();
        let u = f1.alphabet().id("u").unwrap();
        let r = brute_force_supervisors(&f1, 12).unwrap();
        assert_eq!(r.maxima.len(), 1);
        assert_eq!(r.maxima[0].bounded_language(4), vec![vec![], vec![u]]);

        let mut opaque = fixtures::f4();
        opaque.set_marked([StateId(3)]).unwrap();
        let r = brute_force_supervisors(&opaque, 12).unwrap();
        assert_eq!(r.maxima.len(), 1);
        assert!(language_equal(&r.maxima[0], &opaque).unwrap());

        assert!(brute_force_supervisors(&fixtures::unenforceable(), 12).unwrap().maxima.is_empty());
    }

    #[test]
    fn relation_examples() {
        let f1 = fixtures::f1();
        let sub = f1.delete_states(&BTreeSet::from([StateId(2)]));
        let r = relation_check(&f1, &sub, 3).unwrap();
        assert!(r.match_refines_rho && r.match_equals_product);

        let r = relation_check(&f1, &f1, 3).unwrap();
        assert!(r.match_refines_rho);

        let f4 = fixtures::f4();
        let sub = f4.delete_states(&BTreeSet::from([StateId(3)]));
        assert!(relation_check(&f4, &sub, 3).unwrap().match_refines_rho);
    }
}
