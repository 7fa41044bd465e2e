//! Refinement of `G || H` after some of its states are made inaccessible,
//! without recomputing the observer from scratch.
//!
//! The removal set is first closed under uncontrollable predecessors. The
//! states that become inaccessible are then dropped from the estimate of
//! their cell, and survivors are relabelled with the shrunken estimate.
//!
//! Relabelling alone is exact only while every observation that used to
//! reach a cell still sees all of the cell's survivors. When a removed state
//! sat on some but not all of the paths into a later cell, observations
//! that avoided it and observations that went through it now lead to
//! different estimates, and the cell has to split. [`refine`] checks this in
//! linear time and falls back to re-deriving the estimates over the
//! surviving states only when needed.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::automaton::{EventId, StateId};
use crate::composition::{ProductAutomaton, ProductParts, ProductState};
use crate::error::ProductError;
use crate::observer::EstimateLabel;

/// Product states slated for removal, by index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaSet(BTreeSet<usize>);

impl DeltaSet {
    pub fn new(states: impl IntoIterator<Item = usize>) -> Self {
        Self(states.into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_set(self) -> BTreeSet<usize> {
        self.0
    }

    fn validate(&self, m: &ProductAutomaton) -> Result<(), ProductError> {
        match self.0.iter().find(|&&i| i >= m.num_states()) {
            Some(&i) => Err(ProductError::UnknownState(i)),
            None => Ok(()),
        }
    }
}

impl FromIterator<usize> for DeltaSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::new(iter)
    }
}

/// What a refinement did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineReport {
    /// The uncontrollable closure of the input delta.
    pub removed: Vec<ProductState>,
    /// States that became inaccessible, closure included.
    pub inaccessible: usize,
    /// Estimates that shrank, before and after.
    pub relabeled: Vec<(EstimateLabel, EstimateLabel)>,
    /// Whether estimates had to be re-derived because relabelling was not
    /// exact.
    pub resplit: bool,
}

/// Incoming edges per state, built once per call.
pub(crate) struct Predecessors {
    offsets: Vec<u32>,
    edges: Vec<(u32, EventId)>,
}

impl Predecessors {
    pub(crate) fn new(m: &ProductAutomaton) -> Self {
        let n = m.num_states();
        let k = m.alphabet().len();
        let mut counts = vec![0u32; n + 1];
        for d in m.table().iter().flatten() {
            counts[*d as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut edges = vec![(0u32, EventId(0)); counts[n] as usize];
        for (slot, d) in m.table().iter().enumerate() {
            if let Some(d) = d {
                let pos = &mut fill[*d as usize];
                edges[*pos as usize] = ((slot / k) as u32, EventId((slot % k) as u16));
                *pos += 1;
            }
        }
        Self { offsets: counts, edges }
    }

    pub(crate) fn of(&self, i: usize) -> &[(u32, EventId)] {
        &self.edges[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

fn closure_mask(m: &ProductAutomaton, preds: &Predecessors, delta: &DeltaSet) -> Vec<bool> {
    let mut removed = vec![false; m.num_states()];
    let mut work: Vec<usize> = delta.iter().collect();
    for &i in &work {
        removed[i] = true;
    }
    while let Some(i) = work.pop() {
        for &(p, e) in preds.of(i) {
            if !m.alphabet().is_controllable(e) && !removed[p as usize] {
                removed[p as usize] = true;
                work.push(p as usize);
            }
        }
    }
    removed
}

/// The least superset of `delta` that contains every state with an
/// uncontrollable transition into it.
pub fn uncontrollable_closure(m: &ProductAutomaton, delta: &DeltaSet) -> Result<DeltaSet, ProductError> {
    delta.validate(m)?;
    let preds = Predecessors::new(m);
    let removed = closure_mask(m, &preds, delta);
    Ok(removed.iter().enumerate().filter(|(_, r)| **r).map(|(i, _)| i).collect())
}

/// States reachable from the initial state through states for which
/// `alive` holds.
pub(crate) fn reachable(m: &ProductAutomaton, alive: &[bool]) -> Vec<bool> {
    let mut reach = vec![false; m.num_states()];
    let Some(q0) = m.initial() else { return reach };
    if !alive[q0] {
        return reach;
    }
    reach[q0] = true;
    let mut stack = vec![q0];
    while let Some(i) = stack.pop() {
        for (_, d) in m.outgoing(i) {
            if alive[d] && !reach[d] {
                reach[d] = true;
                stack.push(d);
            }
        }
    }
    reach
}

/// Make `delta` (and its uncontrollable closure) inaccessible and return the
/// composition of the restricted plant with its updated observer.
///
/// Marking of surviving states is carried over unchanged. If the closure
/// reaches the initial state the result is the null product.
pub fn refine(m: &ProductAutomaton, delta: &DeltaSet) -> Result<ProductAutomaton, ProductError> {
    refine_with_report(m, delta).map(|(p, _)| p)
}

pub fn refine_with_report(
    m: &ProductAutomaton,
    delta: &DeltaSet,
) -> Result<(ProductAutomaton, RefineReport), ProductError> {
    delta.validate(m)?;
    let Some(q0) = m.initial() else {
        return Ok((m.clone(), RefineReport::default()));
    };
    let preds = Predecessors::new(m);
    let removed = closure_mask(m, &preds, delta);
    let mut report = RefineReport {
        removed: (0..m.num_states()).filter(|&i| removed[i]).map(|i| m.state(i)).collect(),
        ..Default::default()
    };
    if removed[q0] {
        report.inaccessible = m.num_states();
        return Ok((ProductAutomaton::null(m.alphabet().clone(), m.secrets().clone()), report));
    }
    let alive: Vec<bool> = removed.iter().map(|r| !r).collect();
    let reach = reachable(m, &alive);
    report.inaccessible = reach.iter().filter(|r| !**r).count();

    // Each estimate keeps the plant states of its accessible members.
    let labels = surviving_labels(m, &reach);
    for (c, label) in labels.iter().enumerate() {
        if let Some(label) = label {
            if label != m.cell_label(c) {
                report.relabeled.push((m.cell_label(c).clone(), label.clone()));
            }
        }
    }

    let (out, _, resplit) = restrict(m, &reach, &labels);
    report.resplit = resplit;
    Ok((out, report))
}

/// The composition of the states in `alive` with their own observer, and
/// for each of its states the state of `m` it comes from. The flag tells
/// whether estimates had to be re-derived.
pub(crate) fn restrict(
    m: &ProductAutomaton,
    alive: &[bool],
    labels: &[Option<EstimateLabel>],
) -> (ProductAutomaton, Vec<usize>, bool) {
    if relabel_is_exact(m, alive) {
        let (out, origin) = relabel(m, alive, labels);
        (out, origin, false)
    } else {
        let (out, origin) = resplit(m, alive);
        (out, origin, true)
    }
}

/// Members in `alive` of each cell, stored flat.
struct CellMembers {
    offsets: Vec<u32>,
    items: Vec<u32>,
    /// Whether every member of the cell is alive.
    whole: Vec<bool>,
}

impl CellMembers {
    fn new(m: &ProductAutomaton, alive: &[bool]) -> Self {
        let cells = m.num_cells();
        let mut offsets = vec![0u32; cells + 1];
        let mut total = vec![0u32; cells];
        for i in 0..m.num_states() {
            total[m.cell(i)] += 1;
            if alive[i] {
                offsets[m.cell(i) + 1] += 1;
            }
        }
        for c in 0..cells {
            offsets[c + 1] += offsets[c];
        }
        let whole = (0..cells).map(|c| offsets[c + 1] - offsets[c] == total[c]).collect();
        let mut fill = offsets.clone();
        let mut items = vec![0u32; offsets[cells] as usize];
        for i in (0..m.num_states()).filter(|&i| alive[i]) {
            let pos = &mut fill[m.cell(i)];
            items[*pos as usize] = i as u32;
            *pos += 1;
        }
        Self { offsets, items, whole }
    }

    fn of(&self, c: usize) -> &[u32] {
        &self.items[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }
}

/// Per cell, the plant states of its members in `alive`; `None` for cells
/// with no such member.
pub(crate) fn surviving_labels(m: &ProductAutomaton, alive: &[bool]) -> Vec<Option<EstimateLabel>> {
    let members = CellMembers::new(m, alive);
    (0..m.num_cells())
        .map(|c| {
            let of = members.of(c);
            if of.is_empty() {
                None
            } else if members.whole[c] {
                Some(m.cell_label(c).clone())
            } else {
                let mut states: Vec<StateId> = of.iter().map(|&i| m.plant_state(i as usize)).collect();
                states.sort_unstable();
                states.dedup();
                Some(EstimateLabel::from_sorted(states))
            }
        })
        .collect()
}

/// Whether grouping the surviving states by their old cell still yields an
/// observer of the surviving states: the initial cell is exactly the
/// ε-closure of the initial state, and for every cell and observable event
/// the ε-closed successor set is exactly one cell's survivors.
pub(crate) fn relabel_is_exact(m: &ProductAutomaton, alive: &[bool]) -> bool {
    let Some(q0) = m.initial() else { return true };
    let observable = m.alphabet().observable_mask();
    let (seen, hidden): (Vec<EventId>, Vec<EventId>) = m.alphabet().ids().partition(|e| observable[e.index()]);
    let members = CellMembers::new(m, alive);
    let mut stamp = vec![0u32; m.num_states()];
    let mut generation = 0u32;
    let mut buffer = Vec::new();

    // Closes `buffer` under unobservable moves within cell `c`; false if the
    // closure leaves the cell or misses one of its survivors.
    let mut closes_to = |buffer: &mut Vec<usize>, c: usize, generation: u32| -> bool {
        let mut count = 0;
        let mut i = 0;
        while i < buffer.len() {
            let x = buffer[i];
            i += 1;
            if stamp[x] == generation {
                continue;
            }
            stamp[x] = generation;
            if m.cell(x) != c {
                return false;
            }
            count += 1;
            for &e in &hidden {
                if let Some(d) = m.successor(x, e) {
                    if alive[d] && stamp[d] != generation {
                        buffer.push(d);
                    }
                }
            }
        }
        count == members.of(c).len()
    };

    generation += 1;
    buffer.push(q0);
    if !closes_to(&mut buffer, m.cell(q0), generation) {
        return false;
    }
    for c in 0..m.num_cells() {
        if members.of(c).is_empty() {
            continue;
        }
        for &e in &seen {
            buffer.clear();
            buffer.extend(members.of(c).iter().filter_map(|&x| m.successor(x as usize, e)).filter(|&d| alive[d]));
            let Some(&first) = buffer.first() else { continue };
            generation += 1;
            if !closes_to(&mut buffer, m.cell(first), generation) {
                return false;
            }
        }
    }
    true
}

/// Keep the states in `alive`, renumbered breadth-first from the initial
/// state, with new cell labels.
pub(crate) fn relabel(
    m: &ProductAutomaton,
    alive: &[bool],
    labels: &[Option<EstimateLabel>],
) -> (ProductAutomaton, Vec<usize>) {
    let q0 = m.initial().expect("non-null");
    let mut index = vec![u32::MAX; m.num_states()];
    let mut cell_index = vec![u32::MAX; m.num_cells()];
    let mut new_labels = Vec::new();
    let mut cell = Vec::new();
    let mut order = vec![q0];
    index[q0] = 0;
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        let c = m.cell(x);
        if cell_index[c] == u32::MAX {
            cell_index[c] = new_labels.len() as u32;
            new_labels.push(labels[c].clone().expect("cell has a survivor"));
        }
        cell.push(cell_index[c]);
        for (_, d) in m.outgoing(x) {
            if alive[d] && index[d] == u32::MAX {
                index[d] = order.len() as u32;
                order.push(d);
            }
        }
    }
    (m.renumbered(&order, &index, cell, new_labels), order)
}

/// Re-derive estimates over the states in `alive` by a subset construction
/// whose ε-closures never leave a cell. Each new cell is a set of old
/// product states; states reached under different new cells are split.
pub(crate) fn resplit(m: &ProductAutomaton, alive: &[bool]) -> (ProductAutomaton, Vec<usize>) {
    let q0 = m.initial().expect("non-null");
    let k = m.alphabet().len();
    let observable = m.alphabet().observable_mask();
    let mut stamp = vec![false; m.num_states()];
    let mut close = |seeds: Vec<usize>| -> Vec<usize> {
        let mut out = Vec::with_capacity(seeds.len());
        for s in seeds {
            if !stamp[s] {
                stamp[s] = true;
                out.push(s);
            }
        }
        let mut i = 0;
        while i < out.len() {
            for (e, d) in m.outgoing(out[i]) {
                if !observable[e.index()] && alive[d] && !stamp[d] {
                    stamp[d] = true;
                    out.push(d);
                }
            }
            i += 1;
        }
        for &s in &out {
            stamp[s] = false;
        }
        out.sort_unstable();
        out
    };

    let mut set_index: HashMap<Vec<usize>, u32> = HashMap::new();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut set_succ: Vec<Option<u32>> = Vec::new();
    let init = close(vec![q0]);
    set_index.insert(init.clone(), 0);
    sets.push(init);
    let mut s = 0;
    while s < sets.len() {
        set_succ.extend(std::iter::repeat_n(None, k));
        for e in m.alphabet().ids().filter(|e| observable[e.index()]) {
            let seeds: Vec<usize> = sets[s].iter().filter_map(|&x| m.successor(x, e)).filter(|&d| alive[d]).collect();
            if seeds.is_empty() {
                continue;
            }
            let target = close(seeds);
            let t = match set_index.get(&target) {
                Some(&t) => t,
                None => {
                    let t = sets.len() as u32;
                    set_index.insert(target.clone(), t);
                    sets.push(target);
                    t
                }
            };
            set_succ[s * k + e.index()] = Some(t);
        }
        s += 1;
    }

    let mut index: HashMap<(usize, u32), usize> = HashMap::new();
    let mut cell_index: HashMap<u32, usize> = HashMap::new();
    let mut parts = ProductParts { initial: Some(0), ..Default::default() };
    let mut origin = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |x: usize, set: u32, parts: &mut ProductParts, queue: &mut VecDeque<(usize, u32)>| -> usize {
        *index.entry((x, set)).or_insert_with(|| {
            let c = *cell_index.entry(set).or_insert_with(|| {
                let plants = sets[set as usize].iter().map(|&y| m.plant_state(y));
                parts.labels.push(EstimateLabel::new(plants));
                parts.labels.len() - 1
            });
            parts.states.push((m.plant_state(x), c));
            parts.marked.push(m.is_marked(x));
            origin.push(x);
            queue.push_back((x, set));
            parts.states.len() - 1
        })
    };
    intern(q0, 0, &mut parts, &mut queue);
    let mut src = 0;
    while let Some((x, set)) = queue.pop_front() {
        for (e, d) in m.outgoing(x) {
            if !alive[d] {
                continue;
            }
            let next_set = if observable[e.index()] {
                set_succ[set as usize * k + e.index()].expect("successor set exists")
            } else {
                set
            };
            let dst = intern(d, next_set, &mut parts, &mut queue);
            parts.transitions.push((src, e, dst));
        }
        src += 1;
    }
    drop(intern);
    (ProductAutomaton::with_shared_secrets(m.alphabet().clone(), m.shared_secrets(), parts), origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Alphabet, Automaton, Event};
    use crate::composition::{canonically_equal, compose_with_observer, ProductState};
    use crate::fixtures;

    fn ps(q: u32, a: &[u32]) -> ProductState {
        ProductState::new(q, a.iter().copied())
    }

    fn delta_of(m: &ProductAutomaton, states: &[ProductState]) -> DeltaSet {
        states.iter().map(|s| m.find(s).unwrap()).collect()
    }

    #[test]
    fn closure_examples() {
        let m2 = compose_with_observer(&fixtures::f2());
        let closure = uncontrollable_closure(&m2, &delta_of(&m2, &[ps(2, &[2])])).unwrap();
        assert_eq!(closure, delta_of(&m2, &[ps(2, &[2]), ps(1, &[1])]));

        assert!(uncontrollable_closure(&m2, &DeltaSet::default()).unwrap().is_empty());

        let m1 = compose_with_observer(&fixtures::f1());
        let d = delta_of(&m1, &[ps(2, &[2])]);
        assert_eq!(uncontrollable_closure(&m1, &d).unwrap(), d);

        assert_eq!(uncontrollable_closure(&m1, &DeltaSet::new([9])), Err(ProductError::UnknownState(9)));
    }

    #[test]
    fn f1_refine() {
        let f1 = fixtures::f1();
        let m = compose_with_observer(&f1);
        let out = refine(&m, &delta_of(&m, &[ps(2, &[2])])).unwrap();
        let form = out.canonical_form();
        let u = f1.alphabet().id("u").unwrap();
        assert_eq!(form.states, BTreeSet::from([ps(0, &[0, 1]), ps(1, &[0, 1])]));
        assert_eq!(form.transitions, BTreeSet::from([(ps(0, &[0, 1]), u, ps(1, &[0, 1]))]));
        assert!(form.marked.is_empty());
    }

    #[test]
    fn f4_refine_shrinks_estimate() {
        let m = compose_with_observer(&fixtures::f4());
        let (out, report) = refine_with_report(&m, &delta_of(&m, &[ps(3, &[1, 3])])).unwrap();
        assert!(out.find(&ps(1, &[1])).is_some());
        assert!(out.find(&ps(1, &[1, 3])).is_none());
        assert_eq!(report.relabeled, vec![(EstimateLabel::new([StateId(1), StateId(3)]), EstimateLabel::new([StateId(1)]))]);
        assert!(!report.resplit);
    }

    #[test]
    fn empty_delta_is_identity() {
        for g in [fixtures::f1(), fixtures::f4(), fixtures::worked_example()] {
            let m = compose_with_observer(&g);
            let out = refine(&m, &DeltaSet::default()).unwrap();
            assert!(canonically_equal(&out, &m));
            assert_eq!(out, m);
        }
    }

    #[test]
    fn removing_initial_gives_null() {
        let m = compose_with_observer(&fixtures::unenforceable());
        let out = refine(&m, &DeltaSet::new([1])).unwrap();
        assert!(out.is_null());
    }

    /// `4/{3,4}` stays reachable through `b u c` after `5/{1,5}` goes, but
    /// the observation `a c` now only reaches state 3: the `{3,4}` cell
    /// must split.
    #[test]
    fn partial_path_removal_splits_estimate() {
        let alphabet = Alphabet::new(vec![
            Event::new("a", true, true),
            Event::new("b", true, true),
            Event::new("c", true, true),
            Event::new("u", true, false),
        ])
        .unwrap();
        let g = Automaton::from_parts(
            alphabet,
            0..7,
            0,
            &[(0, "a", 1), (0, "b", 2), (1, "c", 3), (2, "c", 3), (1, "u", 5), (5, "c", 4), (2, "u", 6), (6, "c", 4)],
            [3],
        )
        .unwrap();
        let m = compose_with_observer(&g);
        let (out, report) = refine_with_report(&m, &delta_of(&m, &[ps(5, &[1, 5])])).unwrap();
        assert!(report.resplit);
        assert!(out.find(&ps(3, &[3])).is_some());
        assert!(out.find(&ps(3, &[3, 4])).is_some());
        assert!(out.find(&ps(1, &[1])).is_some());
    }
}

