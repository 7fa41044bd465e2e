//! Differential runs of refinement and synthesis against the oracles.

use rayon::prelude::*;

use subobs::oracle::{naive_refine, random_automaton, random_delta, GeneratorConfig};
use subobs::{
    canonically_equal, compose_with_observer, refine, synthesize, synthesize_fast, verify_current_state_opacity,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub seed: u64,
    pub what: &'static str,
}

/// Check one generated plant; `cfg.seed` selects it.
pub fn check(cfg: &GeneratorConfig) -> Vec<Mismatch> {
    let seed = cfg.seed;
    let mut out = Vec::new();
    let g = match random_automaton(cfg) {
        Ok(g) => g,
        Err(_) => return vec![Mismatch { seed, what: "generator rejected the config" }],
    };
    let m = compose_with_observer(&g);
    let delta = random_delta(&m, seed);
    let agree = match (refine(&m, &delta), naive_refine(&m, &delta)) {
        (Ok(fast), Ok(slow)) => canonically_equal(&fast.remarked(), &slow),
        _ => false,
    };
    if !agree {
        out.push(Mismatch { seed, what: "refine differs from recomputation" });
    }
    let s = synthesize(&g);
    if !canonically_equal(s.realization(), synthesize_fast(&g).realization()) {
        out.push(Mismatch { seed, what: "fast synthesis differs from reference" });
    }
    if !s.is_null() && !s.closed_loop(&g).is_ok_and(|cl| verify_current_state_opacity(&cl)) {
        out.push(Mismatch { seed, what: "closed loop is not opaque" });
    }
    out
}

/// Runs `seed, seed + 1, ...`; results are in seed order regardless of
/// scheduling.
pub fn run(runs: u64, seed: u64, cfg: &GeneratorConfig) -> Vec<Mismatch> {
    (0..runs)
        .into_par_iter()
        .map(|i| check(&cfg.clone().with_seed(seed.wrapping_add(i))))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
