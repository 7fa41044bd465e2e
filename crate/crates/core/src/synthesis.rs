//! Opacity verification and supervisor synthesis.

use std::collections::{BTreeSet, HashMap};

use crate::automaton::{Automaton, EventId, StateId};
use crate::composition::{compose_with_observer, ProductAutomaton};
use crate::error::{AutomatonError, ProductError};
use crate::observer::observe;
use crate::refine::{
    reachable, relabel, relabel_is_exact, resplit, restrict, surviving_labels, Predecessors, RefineReport,
};

/// Current-state opacity with the marked states as secrets: no observation
/// of `g` leaves the adversary certain that the plant is in a secret state.
pub fn verify_current_state_opacity(g: &Automaton) -> bool {
    observe(g).marked_states().next().is_none()
}

/// Enabled events at one supervisor state, indexed by event id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlPattern {
    enabled: Vec<bool>,
}

impl ControlPattern {
    pub fn is_enabled(&self, e: EventId) -> bool {
        self.enabled[e.index()]
    }

    pub fn enabled(&self) -> impl Iterator<Item = EventId> + '_ {
        self.enabled.iter().enumerate().filter(|(_, x)| **x).map(|(e, _)| EventId(e as u16))
    }

    pub fn disabled(&self) -> impl Iterator<Item = EventId> + '_ {
        self.enabled.iter().enumerate().filter(|(_, x)| !**x).map(|(e, _)| EventId(e as u16))
    }
}

/// A state-feedback supervisor realized as a refined plant/observer product
/// with no marked states. The null supervisor means none exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Supervisor {
    realization: ProductAutomaton,
}

impl Supervisor {
    fn new(mut realization: ProductAutomaton) -> Self {
        realization.clear_marking();
        Self { realization }
    }

    pub fn realization(&self) -> &ProductAutomaton {
        &self.realization
    }

    pub fn into_realization(self) -> ProductAutomaton {
        self.realization
    }

    pub fn is_null(&self) -> bool {
        self.realization.is_null()
    }

    /// An event is enabled at `x` if the realization defines it there.
    /// Uncontrollable events are always enabled, vacuously so when the plant
    /// itself does not define them.
    pub fn control_pattern(&self, x: usize) -> Result<ControlPattern, ProductError> {
        let m = &self.realization;
        if x >= m.num_states() {
            return Err(ProductError::UnknownState(x));
        }
        let enabled = m.alphabet().ids().map(|e| !m.alphabet().is_controllable(e) || m.successor(x, e).is_some()).collect();
        Ok(ControlPattern { enabled })
    }

    /// `S/G`: the accessible synchronous product of the realization with
    /// the plant. Its states are numbered in breadth-first order and marked
    /// where the plant is.
    pub fn closed_loop(&self, g: &Automaton) -> Result<Automaton, AutomatonError> {
        let m = &self.realization;
        if m.alphabet() != g.alphabet() {
            return Err(AutomatonError::AlphabetMismatch);
        }
        let (Some(x0), Some(q0)) = (m.initial(), g.initial()) else {
            return Ok(Automaton::null(g.alphabet().clone()));
        };
        let mut index: HashMap<(usize, StateId), u32> = HashMap::from([((x0, q0), 0)]);
        let mut order = vec![(x0, q0)];
        let mut edges = Vec::new();
        let mut head = 0;
        while head < order.len() {
            let (x, q) = order[head];
            for (e, x2) in m.outgoing(x) {
                let Some(q2) = g.successor(q, e) else { continue };
                let next = order.len() as u32;
                let d = *index.entry((x2, q2)).or_insert_with(|| {
                    order.push((x2, q2));
                    next
                });
                edges.push((StateId(head as u32), e, StateId(d)));
            }
            head += 1;
        }
        let mut out = Automaton::new(g.alphabet().clone(), (0..order.len() as u32).map(StateId), StateId(0))?;
        for (s, e, d) in edges {
            out.add_transition(s, e, d)?;
        }
        out.set_marked(order.iter().enumerate().filter(|(_, (_, q))| g.is_marked(*q)).map(|(i, _)| StateId(i as u32)))?;
        Ok(out)
    }
}

/// Refine away marked states and re-mark until none remain.
pub fn synthesize(g: &Automaton) -> Supervisor {
    synthesize_with_trace(g).0
}

/// As [`synthesize`], also returning one report per refinement.
///
/// Removals are tracked against the states of the initial product: a
/// marked state takes every copy of its origin with it, and each round
/// re-derives the product of what is left. Splitting therefore never
/// outgrows the initial product and the loop ends after at most one round
/// per initial state.
pub fn synthesize_with_trace(g: &Automaton) -> (Supervisor, Vec<RefineReport>) {
    let m0 = compose_with_observer(g);
    let Some(q0) = m0.initial() else {
        return (Supervisor::new(m0), Vec::new());
    };
    let n = m0.num_states();
    let preds = Predecessors::new(&m0);
    let mut removed = vec![false; n];
    let mut current = m0.clone();
    let mut origin: Vec<usize> = (0..n).collect();
    let mut trace = Vec::new();
    while current.has_marked() {
        let mut fresh: Vec<usize> = Vec::new();
        for x in current.marked_states() {
            if !removed[origin[x]] {
                removed[origin[x]] = true;
                fresh.push(origin[x]);
            }
        }
        let mut head = 0;
        while head < fresh.len() {
            for &(p, e) in preds.of(fresh[head]) {
                if !m0.alphabet().is_controllable(e) && !removed[p as usize] {
                    removed[p as usize] = true;
                    fresh.push(p as usize);
                }
            }
            head += 1;
        }
        let mut report = RefineReport {
            removed: (0..current.num_states()).filter(|&x| removed[origin[x]]).map(|x| current.state(x)).collect(),
            ..Default::default()
        };
        if removed[q0] {
            report.inaccessible = current.num_states();
            trace.push(report);
            return (Supervisor::new(ProductAutomaton::null(m0.alphabet().clone(), m0.secrets().clone())), trace);
        }
        let alive: Vec<bool> = removed.iter().map(|r| !r).collect();
        let reach = reachable(&m0, &alive);
        let (next, next_origin, resplit) = restrict(&m0, &reach, &surviving_labels(&m0, &reach));
        report.inaccessible = (0..current.num_states()).filter(|&x| !reach[origin[x]]).count();
        report.resplit = resplit;
        let mut after: HashMap<usize, Vec<usize>> = HashMap::new();
        for (y, &o) in next_origin.iter().enumerate() {
            after.entry(o).or_default().push(next.cell(y));
        }
        let mut relabeled = BTreeSet::new();
        for x in 0..current.num_states() {
            for &c in after.get(&origin[x]).into_iter().flatten() {
                if next.cell_label(c) != current.estimate(x) {
                    relabeled.insert((current.estimate(x).clone(), next.cell_label(c).clone()));
                }
            }
        }
        report.relabeled = relabeled.into_iter().collect();
        trace.push(report);
        current = next.remarked();
        origin = next_origin;
    }
    (Supervisor::new(current), trace)
}

/// Same result as [`synthesize`], computed in one pass over the initial
/// product.
///
/// Every estimate keeps a count of its accessible non-secret members; when
/// it drops to zero the remaining members are queued for removal. Removals
/// propagate to uncontrollable predecessors and to states that lose their
/// last path from the initial state. Once nothing is queued, the remaining
/// estimates are checked for exactness. If some must split, the split
/// product is checked for marked states and their origins are queued in
/// turn.
pub fn synthesize_fast(g: &Automaton) -> Supervisor {
    let m = compose_with_observer(g);
    let null = || Supervisor::new(ProductAutomaton::null(m.alphabet().clone(), m.secrets().clone()));
    let Some(mut pruner) = Pruner::new(&m) else { return null() };
    loop {
        if !pruner.run() {
            return null();
        }
        if relabel_is_exact(&m, &pruner.alive) {
            let labels = surviving_labels(&m, &pruner.alive);
            return Supervisor::new(relabel(&m, &pruner.alive, &labels).0);
        }
        let (split, origin) = resplit(&m, &pruner.alive);
        let split = split.remarked();
        if !split.has_marked() {
            return Supervisor::new(split);
        }
        pruner.work.extend(split.marked_states().map(|x| origin[x]));
    }
}

/// Incremental removal over a fixed product.
struct Pruner<'a> {
    m: &'a ProductAutomaton,
    q0: usize,
    preds: Predecessors,
    secret: Vec<bool>,
    members: Vec<Vec<u32>>,
    open: Vec<u32>,
    exposed: Vec<bool>,
    alive: Vec<bool>,
    work: Vec<usize>,
    in_region: Vec<bool>,
    seen: Vec<bool>,
}

impl<'a> Pruner<'a> {
    fn new(m: &'a ProductAutomaton) -> Option<Self> {
        let q0 = m.initial()?;
        let n = m.num_states();
        let secret: Vec<bool> = (0..n).map(|i| m.secrets().contains(&m.plant_state(i))).collect();
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); m.num_cells()];
        let mut open = vec![0u32; m.num_cells()];
        let alive = reachable(m, &vec![true; n]);
        for i in (0..n).filter(|&i| alive[i]) {
            members[m.cell(i)].push(i as u32);
            if !secret[i] {
                open[m.cell(i)] += 1;
            }
        }
        let mut exposed = vec![false; m.num_cells()];
        let mut work = Vec::new();
        for c in 0..m.num_cells() {
            if open[c] == 0 && !members[c].is_empty() {
                exposed[c] = true;
                work.extend(members[c].iter().map(|&i| i as usize));
            }
        }
        Some(Self {
            m,
            q0,
            preds: Predecessors::new(m),
            secret,
            members,
            open,
            exposed,
            alive,
            work,
            in_region: vec![false; n],
            seen: vec![false; n],
        })
    }

    /// Drain the queue; false if the initial state goes.
    fn run(&mut self) -> bool {
        let m = self.m;
        while !self.work.is_empty() {
            // Remove the queued states and everything forced into them.
            let mut dead = Vec::new();
            for i in self.work.drain(..) {
                if self.alive[i] {
                    self.alive[i] = false;
                    dead.push(i);
                }
            }
            let mut head = 0;
            while head < dead.len() {
                for &(p, e) in self.preds.of(dead[head]) {
                    let p = p as usize;
                    if self.alive[p] && !m.alphabet().is_controllable(e) {
                        self.alive[p] = false;
                        dead.push(p);
                    }
                }
                head += 1;
            }
            if !self.alive[self.q0] {
                return false;
            }

            // Only descendants of removed states can lose reachability.
            let mut region = Vec::new();
            for &x in &dead {
                for (_, d) in m.outgoing(x) {
                    if self.alive[d] && !self.in_region[d] {
                        self.in_region[d] = true;
                        region.push(d);
                    }
                }
            }
            let mut head = 0;
            while head < region.len() {
                for (_, d) in m.outgoing(region[head]) {
                    if self.alive[d] && !self.in_region[d] {
                        self.in_region[d] = true;
                        region.push(d);
                    }
                }
                head += 1;
            }
            let mut stack: Vec<usize> = region
                .iter()
                .copied()
                .filter(|&r| {
                    r == self.q0
                        || self.preds.of(r).iter().any(|&(p, _)| self.alive[p as usize] && !self.in_region[p as usize])
                })
                .collect();
            for &r in &stack {
                self.seen[r] = true;
            }
            while let Some(x) = stack.pop() {
                for (_, d) in m.outgoing(x) {
                    if self.in_region[d] && !self.seen[d] {
                        self.seen[d] = true;
                        stack.push(d);
                    }
                }
            }
            for &r in &region {
                if !self.seen[r] {
                    self.alive[r] = false;
                    dead.push(r);
                }
                self.in_region[r] = false;
                self.seen[r] = false;
            }

            let mut touched = Vec::new();
            for &x in &dead {
                if !self.secret[x] {
                    let c = m.cell(x);
                    self.open[c] -= 1;
                    touched.push(c);
                }
            }
            for c in touched {
                if self.open[c] == 0 && !self.exposed[c] {
                    self.exposed[c] = true;
                    self.work.extend(self.members[c].iter().map(|&i| i as usize).filter(|&i| self.alive[i]));
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{canonically_equal, ProductState};
    use crate::fixtures;

    fn ps(q: u32, a: &[u32]) -> ProductState {
        ProductState::new(q, a.iter().copied())
    }

    #[test]
    fn opacity_examples() {
        let f1 = fixtures::f1();
        assert!(!verify_current_state_opacity(&f1));
        let mut clear = f1.clone();
        clear.set_marked([]).unwrap();
        assert!(verify_current_state_opacity(&clear));

        let f4 = fixtures::f4();
        assert!(!verify_current_state_opacity(&f4));
        let mut f4b = f4.clone();
        f4b.set_marked([StateId(3)]).unwrap();
        assert!(verify_current_state_opacity(&f4b));
    }

    #[test]
    fn f1_supervisor() {
        let f1 = fixtures::f1();
        let s = synthesize(&f1);
        let form = s.realization().canonical_form();
        assert_eq!(form.states.into_iter().collect::<Vec<_>>(), vec![ps(0, &[0, 1]), ps(1, &[0, 1])]);
        let a = f1.alphabet().id("a").unwrap();
        let u = f1.alphabet().id("u").unwrap();
        for x in 0..2 {
            let p = s.control_pattern(x).unwrap();
            assert!(!p.is_enabled(a));
            assert!(p.is_enabled(u));
        }
        assert!(s.control_pattern(2).is_err());
        let cl = s.closed_loop(&f1).unwrap();
        assert_eq!(cl.bounded_language(3), vec![vec![], vec![u]]);
        assert!(verify_current_state_opacity(&cl));
    }

    #[test]
    fn f2_supervisor_disables_c() {
        let f2 = fixtures::f2();
        let s = synthesize(&f2);
        let x = s.realization().find(&ps(0, &[0])).unwrap();
        let p = s.control_pattern(x).unwrap();
        assert!(!p.is_enabled(f2.alphabet().id("c").unwrap()));
        assert!(p.is_enabled(f2.alphabet().id("u").unwrap()));
    }

    #[test]
    fn unenforceable_gives_null() {
        let g = fixtures::unenforceable();
        assert!(synthesize(&g).is_null());
        assert!(synthesize_fast(&g).is_null());
        assert!(synthesize(&g).closed_loop(&g).unwrap().is_null());
    }

    #[test]
    fn opaque_plant_is_left_alone() {
        let mut g = fixtures::f4();
        g.set_marked([StateId(3)]).unwrap();
        let s = synthesize(&g);
        for x in 0..s.realization().num_states() {
            let q = s.realization().plant_state(x);
            assert!(s.control_pattern(x).unwrap().disabled().all(|e| g.successor(q, e).is_none()));
        }
        let cl = s.closed_loop(&g).unwrap();
        assert_eq!(cl.bounded_language(8), g.bounded_language(8));
    }

    #[test]
    fn fast_matches_reference_on_fixtures() {
        for g in [fixtures::f1(), fixtures::f2(), fixtures::f4(), fixtures::worked_example(), fixtures::secret_loop()] {
            let a = synthesize(&g);
            let b = synthesize_fast(&g);
            assert!(canonically_equal(a.realization(), b.realization()));
        }
    }
}
