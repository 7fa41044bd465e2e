//! Command-line front end for `subobs`.

pub mod bench;
pub mod fuzz;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};

use subobs::desa::{product_state_names, resolve_states, split_state_list};
use subobs::oracle::{random_automaton, GeneratorConfig};
use subobs::{
    check_spa, check_state_consistency, compose_with_observer, is_subautomaton, is_subobserver, observe, parse_desa,
    refine, serialize_plant, serialize_product, synthesize, synthesize_fast, verify_current_state_opacity, Automaton,
    DesaDocument, ProductAutomaton, StateId, StateNames,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NO_SUPERVISOR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "subobs", version, about = "Opacity-enforcing supervisor synthesis for discrete-event systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the adversary observer of a plant.
    Observe {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compose a plant with its own observer.
    Compose {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Make product states inaccessible and update the estimates.
    Refine {
        input: PathBuf,
        /// Comma-separated product state names, e.g. `2|2,1|0,1`.
        #[arg(long, required = true)]
        delta: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Synthesize the maximally permissive opacity-enforcing supervisor.
    Synthesize {
        input: PathBuf,
        /// Use the single-pass algorithm.
        #[arg(long)]
        fast: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the closed-loop plant here.
        #[arg(long)]
        closed_loop: Option<PathBuf>,
    },
    /// Exit 0 if the plant (or a supervisor's closed loop) is current-state opaque.
    VerifyOpacity { input: PathBuf },
    /// Check a structural relation or property.
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// Generate a random plant.
    GenRandom {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        states: usize,
        #[arg(long)]
        min_states: Option<usize>,
        #[arg(long, default_value_t = 3)]
        events: usize,
        #[arg(long)]
        min_events: Option<usize>,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
        #[arg(long, default_value_t = 0.5)]
        p_controllable: f64,
        #[arg(long, default_value_t = 0.5)]
        p_observable: f64,
        #[arg(long, default_value_t = 0.3)]
        p_marked: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Differential test of refinement and synthesis against the oracles.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        states: usize,
        #[arg(long, default_value_t = 4)]
        events: usize,
    },
    /// Time refinement against recomputation; CSV on stdout.
    Bench {
        #[arg(long, default_value_t = 50)]
        min_states: usize,
        #[arg(long, default_value_t = 5000)]
        max_states: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Is A a subautomaton of B?
    Subautomaton { a: PathBuf, b: PathBuf },
    /// Is the observer of A a subobserver of the observer of B?
    Subobserver { a: PathBuf, b: PathBuf },
    /// Does the plant's composition with its observer partition its states?
    Spa { input: PathBuf },
    /// Are the composition's estimates consistent with the plant's words?
    Consistency {
        input: PathBuf,
        /// Word length bound; defaults to twice the product size.
        #[arg(long)]
        depth: Option<usize>,
    },
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn read(path: &Path) -> anyhow::Result<DesaDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_desa(&text).with_context(|| format!("{}", path.display()))
}

fn read_plant(path: &Path) -> anyhow::Result<(Automaton, StateNames)> {
    match read(path)? {
        DesaDocument::Plant { automaton, names } => Ok((automaton, names)),
        DesaDocument::Product { .. } => bail!("{}: expected a plant, found a product", path.display()),
    }
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => out.write_all(text.as_bytes()).context("writing output"),
    }
}

fn verdict(ok: bool, yes: &str, no: &str, out: &mut dyn Write) -> anyhow::Result<u8> {
    writeln!(out, "{}", if ok { yes } else { no })?;
    Ok(if ok { EXIT_OK } else { EXIT_FAILS })
}

fn observer_text(g: &Automaton, names: &StateNames) -> String {
    let h = observe(g);
    let mut text = String::new();
    for (i, label) in h.labels().iter().enumerate() {
        let members: Vec<String> = label.states().iter().map(|&q| names.name(q)).collect();
        text.push_str(&format!("# {i}: {{{}}}\n", members.join(",")));
    }
    let Some(h0) = h.initial() else {
        return text + &serialize_plant(&Automaton::null(h.alphabet().clone()), &StateNames::default());
    };
    let mut a = Automaton::new(h.alphabet().clone(), (0..h.num_states() as u32).map(StateId), StateId(h0 as u32))
        .expect("initial in range");
    for (s, e, d) in h.transitions() {
        a.add_transition(StateId(s as u32), e, StateId(d as u32)).expect("observer is deterministic");
    }
    a.set_marked(h.marked_states().map(|i| StateId(i as u32)).collect::<Vec<_>>()).expect("in range");
    text + &serialize_plant(&a, &StateNames::default())
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<u8> {
    match command {
        Command::Observe { input, output } => {
            let (g, names) = read_plant(&input)?;
            emit(&observer_text(&g, &names), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Compose { input, output } => {
            let (g, names) = read_plant(&input)?;
            emit(&serialize_product(&compose_with_observer(&g), &names), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Refine { input, delta, output } => {
            let (m, names): (ProductAutomaton, StateNames) = match read(&input)? {
                DesaDocument::Product { product, names } => (product, names),
                DesaDocument::Plant { automaton, names } => (compose_with_observer(&automaton), names),
            };
            let requested: Vec<String> = delta.iter().flat_map(|d| split_state_list(d)).collect();
            let delta = resolve_states(&m, &names, &requested).map_err(|e| anyhow!(e))?;
            let refined = refine(&m, &delta)?;
            emit(&serialize_product(&refined, &names), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Synthesize { input, fast, output, closed_loop } => {
            let (g, names) = read_plant(&input)?;
            let s = if fast { synthesize_fast(&g) } else { synthesize(&g) };
            emit(&serialize_product(s.realization(), &names), output.as_deref(), out)?;
            if let Some(path) = closed_loop {
                let cl = s.closed_loop(&g)?;
                std::fs::write(&path, serialize_plant(&cl, &StateNames::default()))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if s.is_null() {
                writeln!(err, "no opacity-enforcing supervisor exists")?;
                return Ok(EXIT_NO_SUPERVISOR);
            }
            Ok(EXIT_OK)
        }
        Command::VerifyOpacity { input } => {
            let g = match read(&input)? {
                DesaDocument::Plant { automaton, .. } => automaton,
                DesaDocument::Product { product, .. } => product.to_plant(),
            };
            verdict(verify_current_state_opacity(&g), "opaque", "not opaque", out)
        }
        Command::Check { what } => match what {
            CheckCommand::Subautomaton { a, b } => {
                let (a, _) = read_plant(&a)?;
                let (b, _) = read_plant(&b)?;
                verdict(is_subautomaton(&a, &b)?, "subautomaton", "not a subautomaton", out)
            }
            CheckCommand::Subobserver { a, b } => {
                let (a, _) = read_plant(&a)?;
                let (b, _) = read_plant(&b)?;
                verdict(is_subobserver(&observe(&a), &observe(&b))?, "subobserver", "not a subobserver", out)
            }
            CheckCommand::Spa { input } => {
                let (g, _) = read_plant(&input)?;
                let m = compose_with_observer(&g);
                verdict(check_spa(&g, &m), "state partition", "not a state partition", out)
            }
            CheckCommand::Consistency { input, depth } => {
                let (g, _) = read_plant(&input)?;
                let m = compose_with_observer(&g);
                let depth = depth.unwrap_or(2 * m.num_states());
                verdict(check_state_consistency(&m, &g, depth), "consistent", "inconsistent", out)
            }
        },
        Command::GenRandom {
            seed,
            states,
            min_states,
            events,
            min_events,
            density,
            p_controllable,
            p_observable,
            p_marked,
            output,
        } => {
            let cfg = GeneratorConfig {
                states: min_states.unwrap_or(states)..=states,
                events: min_events.unwrap_or(events)..=events,
                density,
                p_controllable,
                p_observable,
                p_marked,
                seed,
            };
            let g = random_automaton(&cfg)?;
            emit(&serialize_plant(&g, &StateNames::default()), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Fuzz { runs, seed, states, events } => {
            let cfg = GeneratorConfig { states: 1..=states, events: 1..=events, ..Default::default() };
            cfg.validate()?;
            let mismatches = fuzz::run(runs, seed, &cfg);
            for m in &mismatches {
                writeln!(
                    err,
                    "seed {}: {} (replay: subobs gen-random --seed {} --min-states 1 --states {states} --min-events 1 --events {events})",
                    m.seed, m.what, m.seed
                )?;
            }
            writeln!(out, "{runs} runs, {} mismatches", mismatches.len())?;
            Ok(if mismatches.is_empty() { EXIT_OK } else { EXIT_FAILS })
        }
        Command::Bench { min_states, max_states, trials, steps, seed } => {
            let rows = bench::run(&bench::sizes(min_states, max_states, steps), trials, seed);
            out.write_all(bench::csv(&rows).as_bytes())?;
            let points: Vec<(f64, f64)> =
                rows.iter().map(|r| (r.product_states as f64, r.refine.as_secs_f64())).collect();
            writeln!(err, "refine time vs product size: R^2 = {:.4}", bench::r_squared(&points))?;
            if let Some(last) = rows.last() {
                let speedup = last.naive.as_secs_f64() / last.refine.as_secs_f64().max(1e-12);
                writeln!(err, "recomputation / refine at {} product states: {speedup:.1}x", last.product_states)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Names of the states of `m` as they appear in documents, by index.
pub fn state_names(m: &ProductAutomaton) -> Vec<String> {
    product_state_names(m, &StateNames::default())
}
