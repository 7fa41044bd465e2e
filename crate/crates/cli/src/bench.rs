//! Timing of incremental refinement against full recomputation on a family
//! of generated plants.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subobs::oracle::naive_refine;
use subobs::{compose_with_observer, refine, synthesize, Alphabet, Automaton, DeltaSet, Event, ProductAutomaton, StateId};

/// One row of the benchmark table; times are medians over the trials.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub plant_states: usize,
    pub product_states: usize,
    pub refine: Duration,
    pub naive: Duration,
    pub synthesize: Duration,
}

const GADGET: usize = 6;

/// A ring of six-state gadgets. Unobservable moves stay inside a gadget and
/// observable ones lead into the next, so estimates never span more than one
/// gadget and the product grows linearly with the plant. The last state of
/// each gadget is a dead end entered by the controllable unobservable `w`.
/// Edges, secrets and which gadget states are hit are drawn from `seed`.
pub fn family_plant(states: usize, seed: u64) -> Automaton {
    let gadgets = (states / GADGET).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = Alphabet::new(vec![
        Event::new("a", true, true),
        Event::new("b", false, true),
        Event::new("c", true, true),
        Event::new("u", false, false),
        Event::new("v", true, false),
        Event::new("w", true, false),
    ])
    .expect("distinct event names");
    let n = (gadgets * GADGET) as u32;
    let mut g = Automaton::new(alphabet.clone(), (0..n).map(StateId), StateId(0)).expect("initial state exists");
    let id = |name: &str| alphabet.id(name).expect("event exists");
    for k in 0..gadgets {
        let base = k * GADGET;
        let next = ((k + 1) % gadgets) * GADGET;
        g.add_transition(StateId(base as u32), id("a"), StateId(next as u32)).expect("fresh edge");
        let dead_end = base + GADGET - 1;
        for _ in 0..2 {
            let i = rng.random_range(0..GADGET - 1);
            g.add_transition(StateId((base + i) as u32), id("w"), StateId(dead_end as u32)).ok();
        }
        for i in 0..GADGET - 1 {
            for e in ["u", "v"] {
                if i + 2 < GADGET && rng.random_bool(0.5) {
                    let j = rng.random_range(i + 1..GADGET - 1);
                    g.add_transition(StateId((base + i) as u32), id(e), StateId((base + j) as u32)).expect("fresh edge");
                }
            }
            for e in ["a", "b", "c"] {
                let q = StateId((base + i) as u32);
                if g.successor(q, id(e)).is_none() && rng.random_bool(0.5) {
                    let j = rng.random_range(0..GADGET - 1);
                    g.add_transition(q, id(e), StateId((next + j) as u32)).expect("fresh edge");
                }
            }
        }
    }
    let secrets: Vec<StateId> = (1..n).filter(|_| rng.random_bool(0.15)).map(StateId).collect();
    g.set_marked(secrets).expect("known states");
    g.accessible()
}

/// Every other dead-end product state; only controllable transitions enter
/// them and nothing leaves, so the removal shrinks estimates without cutting
/// any path.
pub fn family_delta(m: &ProductAutomaton) -> DeltaSet {
    let mut forced = vec![false; m.num_states()];
    let mut leaves = vec![true; m.num_states()];
    for (s, e, d) in m.transitions() {
        leaves[s] = false;
        if !m.alphabet().is_controllable(e) {
            forced[d] = true;
        }
    }
    forced[m.initial().expect("non-null")] = true;
    (0..m.num_states()).filter(|&i| leaves[i] && !forced[i]).step_by(2).collect()
}

/// Plant sizes from `min` to `max` in `steps` geometric steps.
pub fn sizes(min: usize, max: usize, steps: usize) -> Vec<usize> {
    if steps <= 1 || min >= max {
        return vec![min.max(1)];
    }
    let ratio = (max as f64 / min.max(1) as f64).powf(1.0 / (steps - 1) as f64);
    let mut out: Vec<usize> = (0..steps).map(|i| (min.max(1) as f64 * ratio.powi(i as i32)).round() as usize).collect();
    out.dedup();
    out
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn time<T>(f: impl FnOnce() -> T) -> Duration {
    let start = Instant::now();
    std::hint::black_box(f());
    start.elapsed()
}

pub fn run(sizes: &[usize], trials: usize, seed: u64) -> Vec<BenchRow> {
    let trials = trials.max(1);
    sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let g = family_plant(n, seed.wrapping_add(i as u64));
            let m = compose_with_observer(&g);
            let delta = family_delta(&m);
            let refine_times = (0..trials).map(|_| time(|| refine(&m, &delta).expect("valid delta"))).collect();
            let naive_times = (0..trials).map(|_| time(|| naive_refine(&m, &delta).expect("valid delta"))).collect();
            let synth_times = (0..trials).map(|_| time(|| synthesize(&g))).collect();
            BenchRow {
                plant_states: g.num_states(),
                product_states: m.num_states(),
                refine: median(refine_times),
                naive: median(naive_times),
                synthesize: median(synth_times),
            }
        })
        .collect()
}

/// Coefficient of determination of the least-squares line through `points`.
pub fn r_squared(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

pub fn csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("plant_states,product_states,refine_s,naive_s,synthesize_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6}\n",
            r.plant_states,
            r.product_states,
            r.refine.as_secs_f64(),
            r.naive.as_secs_f64(),
            r.synthesize.as_secs_f64()
        ));
    }
    out
}
