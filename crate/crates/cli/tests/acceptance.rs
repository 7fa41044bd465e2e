//! End-to-end acceptance checks, one PASS/FAIL line each.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use subobs::oracle::{
    brute_force_supervisors, language_equal, naive_refine, random_automaton, random_delta, random_subautomaton,
    reenable_check, relation_check, GeneratorConfig, MAX_BRUTE_FORCE_EDGES,
};
use subobs::{
    canonically_equal, check_state_consistency, compose_with_observer, fixtures, is_subobserver, observe, parse_desa,
    refine, serialize_plant, synthesize, synthesize_fast, synthesize_with_trace, verify_current_state_opacity,
    Automaton, DesaDocument, EstimateLabel, ProductState, StateId, StateNames,
};
use subobs_cli::bench;

const RUNS: u64 = 1000;
const RELATION_RUNS: u64 = 200;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn plant(seed: u64) -> Automaton {
    random_automaton(&GeneratorConfig::default().with_seed(seed)).expect("default config is valid")
}

fn label(states: &[u32]) -> EstimateLabel {
    EstimateLabel::new(states.iter().copied().map(StateId))
}

/// Outcome of one criterion: a verdict and a short detail line.
struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn worked_example() -> Outcome {
    let g = fixtures::worked_example();
    let (s, trace) = synthesize_with_trace(&g);
    if trace.len() != 2 {
        return outcome(false, format!("{} iterations", trace.len()));
    }
    let first: BTreeSet<_> = trace[0].removed.iter().cloned().collect();
    let second: BTreeSet<_> = trace[1].removed.iter().cloned().collect();
    let want_first = BTreeSet::from([ProductState::new(10, [10]), ProductState::new(9, [6, 9])]);
    let want_second = BTreeSet::from([ProductState::new(6, [6])]);
    let shrunk = trace[0].relabeled.contains(&(label(&[6, 9]), label(&[6])));
    let text = std::fs::read_to_string(fixture("worked_example_supervisor.desa")).expect("fixture exists");
    let Ok(DesaDocument::Product { product: expected, .. }) = parse_desa(&text) else {
        return outcome(false, "expected realization does not parse");
    };
    let final_ok = !s.realization().has_marked() && canonically_equal(s.realization(), &expected);
    outcome(
        first == want_first && second == want_second && shrunk && final_ok,
        format!(
            "removed {:?} then {:?}; {{6,9}} -> {{6}}: {shrunk}; final realization matches: {final_ok}",
            first, second
        ),
    )
}

fn state_splitting() -> Outcome {
    let g = fixtures::secret_loop();
    let m = compose_with_observer(&g);
    let estimates_of_8: BTreeSet<_> =
        (0..m.num_states()).filter(|&i| m.plant_state(i) == StateId(8)).map(|i| m.estimate(i).clone()).collect();
    let h = observe(&g);
    let marked: Vec<_> = h.marked_states().map(|x| h.label(x).clone()).collect();
    let s = synthesize(&g);
    let Ok(cl) = s.closed_loop(&g) else {
        return outcome(false, "no closed loop");
    };
    let a = g.alphabet().id("a").expect("event a");
    let visits = cl
        .bounded_language(12)
        .iter()
        .filter(|w| g.run(w) == Some(StateId(8)))
        .map(|w| w.iter().filter(|&&e| e == a).count())
        .max()
        .unwrap_or(0);
    outcome(
        estimates_of_8.len() > 1 && marked == vec![label(&[8, 9])] && visits == 3,
        format!("state 8 under {} estimates; marked {marked:?}; a-visits to 8: {visits}", estimates_of_8.len()),
    )
}

fn subobservers() -> Outcome {
    let failures = (0..RUNS)
        .filter(|&seed| {
            let g = plant(seed);
            let sub = random_subautomaton(&g, seed ^ 0xa5a5);
            !is_subobserver(&observe(&sub), &observe(&g)).unwrap_or(false)
        })
        .count();
    outcome(failures == 0, format!("{failures}/{RUNS} failures"))
}

fn refine_differential() -> Outcome {
    let failures = (0..RUNS)
        .filter(|&seed| {
            let m = compose_with_observer(&plant(seed.wrapping_add(10_000)));
            let delta = random_delta(&m, seed);
            match (refine(&m, &delta), naive_refine(&m, &delta)) {
                (Ok(fast), Ok(slow)) => !canonically_equal(&fast.remarked(), &slow),
                _ => true,
            }
        })
        .count();
    outcome(failures == 0, format!("{failures}/{RUNS} mismatches"))
}

fn synthesis_correctness() -> Outcome {
    let mut not_opaque = 0;
    let mut brute_checked = 0;
    let mut brute_failed = 0;
    let mut reenabled = 0;
    let mut reenable_failed = 0;
    for seed in 0..RUNS {
        let g = plant(seed.wrapping_add(20_000));
        let s = synthesize(&g);
        let closed = s.closed_loop(&g);
        if !s.is_null() && !closed.as_ref().is_ok_and(verify_current_state_opacity) {
            not_opaque += 1;
        }
        if let Ok(brute) = brute_force_supervisors(&g, MAX_BRUTE_FORCE_EDGES) {
            brute_checked += 1;
            let agrees = match (&closed, brute.maxima.as_slice()) {
                (_, []) => s.is_null(),
                (Ok(cl), [best]) => !s.is_null() && language_equal(cl, best).unwrap_or(false),
                _ => false,
            };
            if !agrees {
                brute_failed += 1;
            }
        }
        match reenable_check(&s, &g) {
            Ok(r) => {
                reenabled += r.checked;
                reenable_failed += r.violations.len();
            }
            Err(_) => reenable_failed += 1,
        }
    }
    outcome(
        not_opaque == 0 && brute_failed == 0 && reenable_failed == 0,
        format!(
            "(a) {not_opaque}/{RUNS} non-opaque; (b) {brute_failed}/{brute_checked} differ from brute force; \
             (c) {reenable_failed}/{reenabled} re-enablements keep opacity"
        ),
    )
}

fn fast_equals_reference() -> Outcome {
    let named = [fixtures::worked_example(), fixtures::secret_loop(), fixtures::unenforceable()];
    let named_ok = named.iter().all(|g| canonically_equal(synthesize(g).realization(), synthesize_fast(g).realization()));
    let failures = (0..RUNS)
        .filter(|&seed| {
            let g = plant(seed.wrapping_add(30_000));
            !canonically_equal(synthesize(&g).realization(), synthesize_fast(&g).realization())
        })
        .count();
    outcome(named_ok && failures == 0, format!("fixtures agree: {named_ok}; {failures}/{RUNS} random mismatches"))
}

fn relations() -> Outcome {
    let mut reach = 0;
    let mut consistency = 0;
    let mut matching = 0;
    for seed in 0..RELATION_RUNS {
        let g = plant(seed.wrapping_add(40_000));
        let sub = random_subautomaton(&g, seed);
        let observable = g.alphabet().observable_mask();
        let reach_ok = sub.states().iter().all(|&q| match (sub.epsilon_reach(q, &observable), g.epsilon_reach(q, &observable)) {
            (Ok(small), Ok(big)) => small.is_subset(&big),
            _ => false,
        });
        if !reach_ok {
            reach += 1;
        }
        let m = compose_with_observer(&g);
        if !check_state_consistency(&m, &g, 2 * m.num_states()) {
            consistency += 1;
        }
        if !relation_check(&g, &sub, 6).is_ok_and(|r| r.match_equals_product) {
            matching += 1;
        }
    }
    outcome(
        reach + consistency + matching == 0,
        format!("failures out of {RELATION_RUNS}: epsilon-reach {reach}, consistency {consistency}, match {matching}"),
    )
}

fn complexity() -> Outcome {
    let rows = bench::run(&bench::sizes(50, 5000, 8), 5, 0);
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.product_states as f64, r.refine.as_secs_f64())).collect();
    let r2 = bench::r_squared(&points);
    let last = rows.last().expect("at least one size");
    let speedup = last.naive.as_secs_f64() / last.refine.as_secs_f64().max(1e-9);
    outcome(
        r2 >= 0.9 && speedup >= 5.0,
        format!(
            "products {}..{}; R^2 = {r2:.3}; naive/refine = {speedup:.1}x",
            rows[0].product_states, last.product_states
        ),
    )
}

fn round_trip_and_determinism() -> Outcome {
    let mut broken = 0;
    for seed in 0..RUNS {
        let g = plant(seed.wrapping_add(50_000));
        let text = serialize_plant(&g, &StateNames::default());
        match parse_desa(&text) {
            Ok(DesaDocument::Plant { automaton, names }) if automaton == g && serialize_plant(&automaton, &names) == text => {}
            _ => broken += 1,
        }
    }
    let worked = fixture("worked_example.desa");
    let secret_loop = fixture("secret_loop.desa");
    let invocations: Vec<Vec<String>> = vec![
        vec!["synthesize".into(), worked.display().to_string()],
        vec!["synthesize".into(), "--fast".into(), secret_loop.display().to_string()],
        vec!["compose".into(), secret_loop.display().to_string()],
        vec!["observe".into(), worked.display().to_string()],
        vec!["gen-random".into(), "--seed".into(), "7".into(), "--states".into(), "8".into()],
        vec!["fuzz".into(), "--runs".into(), "200".into()],
    ];
    let mut unstable = 0;
    for args in &invocations {
        let runs: Vec<_> = (0..3)
            .map(|_| Command::new(env!("CARGO_BIN_EXE_subobs")).args(args).output().expect("binary runs"))
            .map(|o| (o.status.code(), o.stdout))
            .collect();
        if runs.iter().any(|r| r != &runs[0]) || runs[0].1.is_empty() {
            unstable += 1;
        }
    }
    outcome(
        broken == 0 && unstable == 0,
        format!("{broken}/{RUNS} plants fail to round-trip; {unstable}/{} commands vary", invocations.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 9] = [
        (1, "worked example", Duration::from_secs(1), worked_example),
        (2, "state splitting", Duration::from_secs(1), state_splitting),
        (3, "subautomata give subobservers", Duration::from_secs(60), subobservers),
        (4, "refine equals recomputation", Duration::from_secs(120), refine_differential),
        (5, "synthesized supervisors are opaque and maximal", Duration::from_secs(300), synthesis_correctness),
        (6, "fast synthesis equals reference", Duration::from_secs(120), fast_equals_reference),
        (7, "bounded relation suites", Duration::from_secs(60), relations),
        (8, "refinement scales linearly", Duration::from_secs(300), complexity),
        (9, "round-trip and determinism", Duration::from_secs(30), round_trip_and_determinism),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let ok = result.ok && elapsed <= limit;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n} {}: {name}: {} ({:.2?} of {:?})",
            if ok { "PASS" } else { "FAIL" },
            result.detail,
            elapsed,
            limit
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
