//! Small hand-built plants used by tests, the CLI examples and the Python
//! smoke test.

use crate::automaton::{Alphabet, Automaton, Event};

fn alphabet(events: &[(&str, bool, bool)]) -> Alphabet {
    Alphabet::new(events.iter().map(|&(n, c, o)| Event::new(n, c, o)).collect()).expect("fixture alphabet")
}

/// `0 -u-> 1`, `0 -a-> 2`, `1 -a-> 2`; `u` uncontrollable and unobservable,
/// `a` controllable and observable; state 2 secret.
pub fn f1() -> Automaton {
    Automaton::from_parts(
        alphabet(&[("a", true, true), ("u", false, false)]),
        0..3,
        0,
        &[(0, "u", 1), (0, "a", 2), (1, "a", 2)],
        [2],
    )
    .expect("fixture")
}

/// `0 -c-> 1 -u-> 2`, both observable, `u` uncontrollable; state 2 secret.
pub fn f2() -> Automaton {
    Automaton::from_parts(
        alphabet(&[("c", true, true), ("u", false, true)]),
        0..3,
        0,
        &[(0, "c", 1), (1, "u", 2)],
        [2],
    )
    .expect("fixture")
}

/// `0 -a-> 1`, `0 -u-> 2`, `2 -a-> 3` with `u` unobservable and
/// uncontrollable; states 1 and 3 secret.
pub fn f4() -> Automaton {
    Automaton::from_parts(
        alphabet(&[("a", true, true), ("u", false, false)]),
        0..4,
        0,
        &[(0, "a", 1), (0, "u", 2), (2, "a", 3)],
        [1, 3],
    )
    .expect("fixture")
}

/// Two-refinement example: secrets 6 and 10, `beta` uncontrollable,
/// `alpha` and `gamma` unobservable.
///
/// The first composition has the single all-secret estimate `{10}`; removing
/// it drags `9/{6,9}` along through `beta`, which leaves `{6}` exposed for
/// the second round.
pub fn worked_example() -> Automaton {
    Automaton::from_parts(
        alphabet(&[
            ("alpha", true, false),
            ("beta", false, true),
            ("gamma", true, false),
            ("lambda", true, true),
            ("mu", true, true),
        ]),
        0..11,
        0,
        &[
            (0, "alpha", 1),
            (0, "mu", 3),
            (1, "lambda", 2),
            (2, "beta", 5),
            (5, "mu", 7),
            (3, "alpha", 4),
            (3, "lambda", 6),
            (4, "gamma", 8),
            (8, "lambda", 9),
            (9, "beta", 10),
        ],
        [6, 10],
    )
    .expect("fixture")
}

/// Secrets 8 and 9 revisited through an observable `a` loop, shadowed by a
/// non-secret chain of three `a` steps. Only `a` is observable.
pub fn secret_loop() -> Automaton {
    Automaton::from_parts(
        alphabet(&[("a", true, true), ("u", true, false), ("v", true, false), ("w", false, false)]),
        [0, 1, 2, 3, 4, 8, 9],
        0,
        &[
            (0, "u", 8),
            (0, "v", 1),
            (8, "a", 8),
            (8, "w", 9),
            (9, "w", 8),
            (1, "a", 2),
            (2, "a", 3),
            (3, "a", 4),
        ],
        [8, 9],
    )
    .expect("fixture")
}

/// `0 -u-> 1` with `u` uncontrollable and observable, state 1 secret: no
/// supervisor can hide it.
pub fn unenforceable() -> Automaton {
    Automaton::from_parts(alphabet(&[("u", false, true)]), 0..2, 0, &[(0, "u", 1)], [1]).expect("fixture")
}
