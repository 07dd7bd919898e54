//! `hvecsp`: solve, translate, check and cross-check constraint networks.
//!
//! Exit codes of `solve` follow the SAT-solver convention: 10 SAT, 20 UNSAT,
//! 0 when the step budget runs out, 1 for bad input, 2 for a broken internal
//! contract (including a failed `--verify`).

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hvecsp_core::csp::{check_network, is_solution};
use hvecsp_core::hve::translate;
use hvecsp_core::pipeline::{
    brute_force_solutions, gen_random_network, solve_with, GenConfig, PipelineError, SolveOptions,
    SolveResult, DEFAULT_ORACLE_CAP,
};
use hvecsp_core::{Assignment, SolveError};
use hvecsp_ingest::{emit_native, parse, Format, IngestError, Model};

const SAT: u8 = 10;
const UNSAT: u8 = 20;
const UNKNOWN: u8 = 0;
const INPUT_ERROR: u8 = 1;
const CONTRACT_FAULT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "hvecsp",
    version,
    about = "Finite-domain constraint solver for n-ary networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a network and print the first solution found.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Print search statistics to stderr.
        #[arg(long)]
        stats: bool,
        /// Check the solution against the original network before printing it.
        #[arg(long)]
        verify: bool,
        /// Give up after this many search nodes.
        #[arg(long, value_name = "N")]
        max_steps: Option<u64>,
        /// Corrupt the solution before verification (for testing the harness).
        #[arg(long, hide = true)]
        fault_inject: bool,
    },
    /// Print the binary encoding of a network.
    Translate {
        #[command(flatten)]
        input: Input,
    },
    /// Report well-formedness violations.
    Check {
        #[command(flatten)]
        input: Input,
    },
    /// Count solutions by enumeration and compare with the solver.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Largest search space the enumeration may walk.
        #[arg(long, value_name = "N", default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: u64,
    },
    /// Write a random network in the native format.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout by default).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Input file, or `-` for stdin.
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Xcsp,
    Native,
}

impl Input {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Xcsp => Format::Xcsp,
            FormatArg::Native => Format::Native,
            FormatArg::Auto => Format::detect(&self.path),
        }
    }

    fn load(&self) -> Result<Model, IngestError> {
        if self.path.as_os_str() == "-" {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|source| IngestError::Io {
                    path: "<stdin>".into(),
                    source,
                })?;
            return parse(&text, self.format());
        }
        let text = std::fs::read_to_string(&self.path).map_err(|source| IngestError::Io {
            path: self.path.display().to_string(),
            source,
        })?;
        parse(&text, self.format())
    }
}

fn print_assignment(
    out: &mut impl Write,
    order: &[hvecsp_core::VarId],
    a: &Assignment,
) -> std::io::Result<()> {
    writeln!(out, "SAT")?;
    for v in order {
        writeln!(out, "{v}={}", a[v])?;
    }
    Ok(())
}

/// Changes one value so that the assignment no longer satisfies the network.
fn corrupt(model: &Model, a: &mut Assignment) {
    if let Some(v) = model.network.vars.first() {
        let old = a[v];
        let other = model.network.doms[v]
            .values()
            .iter()
            .copied()
            .find(|&x| x != old);
        a.insert(v.clone(), other.unwrap_or(old.wrapping_add(1)));
    }
}

fn solve(
    input: &Input,
    stats: bool,
    verify: bool,
    max_steps: Option<u64>,
    fault_inject: bool,
) -> u8 {
    let model = match input.load() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return INPUT_ERROR;
        }
    };
    let start = Instant::now();
    let outcome = match solve_with(
        &model.network,
        &model.registry,
        &SolveOptions {
            step_limit: max_steps,
        },
    ) {
        Ok(o) => o,
        Err(PipelineError::Solve(SolveError::StepLimit(n))) => {
            eprintln!("step limit of {n} nodes reached");
            println!("UNKNOWN");
            return UNKNOWN;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_internal() {
                CONTRACT_FAULT
            } else {
                INPUT_ERROR
            };
        }
    };
    if stats {
        let s = outcome.stats;
        eprintln!(
            "stats: nodes={} revisions={} arcs={} removals={} encoded_vars={} encoded_constraints={} faults={} time_ms={:.3}",
            s.nodes,
            s.revisions,
            s.arcs_processed,
            s.removals,
            outcome.encoded_vars,
            outcome.encoded_csts,
            model.faults.get(),
            start.elapsed().as_secs_f64() * 1e3
        );
    }
    match outcome.result {
        SolveResult::Unsat => {
            println!("UNSAT");
            UNSAT
        }
        SolveResult::Sat(mut a) => {
            if fault_inject {
                corrupt(&model, &mut a);
            }
            if verify && !is_solution(&a, &model.network, &model.registry) {
                eprintln!("error: verification failed, the solver returned a non-solution: {a:?}");
                return CONTRACT_FAULT;
            }
            let mut out = std::io::stdout().lock();
            if print_assignment(&mut out, &model.network.vars, &a).is_err() {
                return INPUT_ERROR;
            }
            SAT
        }
    }
}

fn translate_cmd(input: &Input) -> u8 {
    let model = match input.load() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return INPUT_ERROR;
        }
    };
    let report = check_network(&model.network, &model.registry);
    if !report.is_ok() {
        eprintln!("error: network is not well-formed:\n{report}");
        return INPUT_ERROR;
    }
    let bin = match translate(&model.network, &model.registry) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return CONTRACT_FAULT;
        }
    };
    let mut out = String::from("variables:\n");
    for v in &bin.vars {
        let tag = if v.is_hidden() { "HVar" } else { "OVar" };
        let dom: Vec<String> = bin.doms[v].iter().map(ToString::to_string).collect();
        out.push_str(&format!("  {tag} {v} {{{}}}\n", dom.join(",")));
    }
    out.push_str("constraints:\n");
    for c in &bin.csts {
        out.push_str(&format!("  {c}\n"));
    }
    out.push_str(&format!(
        "{} variables, {} constraints, {} hidden\n",
        bin.vars.len(),
        bin.csts.len(),
        bin.hidden_count()
    ));
    print!("{out}");
    0
}

fn check_cmd(input: &Input) -> u8 {
    match input.load() {
        Ok(model) => {
            let report = check_network(&model.network, &model.registry);
            println!("{report}");
            if report.is_ok() {
                0
            } else {
                1
            }
        }
        Err(IngestError::IllFormed(report)) => {
            println!("{report}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            INPUT_ERROR
        }
    }
}

fn oracle_cmd(input: &Input, cap: u64) -> u8 {
    let model = match input.load() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return INPUT_ERROR;
        }
    };
    let sols = match brute_force_solutions(&model.network, &model.registry, cap) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return INPUT_ERROR;
        }
    };
    println!("solutions: {}", sols.len());
    let answer = match solve_with(&model.network, &model.registry, &SolveOptions::default()) {
        Ok(o) => o.result,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_internal() {
                CONTRACT_FAULT
            } else {
                INPUT_ERROR
            };
        }
    };
    let agree = match &answer {
        SolveResult::Sat(a) => sols.contains(a),
        SolveResult::Unsat => sols.is_empty(),
    };
    println!("solver: {}", if answer.is_sat() { "SAT" } else { "UNSAT" });
    if agree {
        println!("agreement");
        0
    } else {
        println!("disagreement");
        CONTRACT_FAULT
    }
}

fn gen_cmd(seed: u64, output: Option<PathBuf>) -> u8 {
    let (net, reg) = gen_random_network::<i64>(&GenConfig {
        seed,
        ..GenConfig::default()
    });
    let text = match emit_native(&net, &reg) {
        Ok(t) => format!("# generated with seed {seed}\n{t}"),
        Err(e) => {
            eprintln!("error: {e}");
            return CONTRACT_FAULT;
        }
    };
    match output {
        Some(path) => match std::fs::write(&path, text) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                INPUT_ERROR
            }
        },
        None => {
            print!("{text}");
            0
        }
    }
}

fn main() -> ExitCode {
    // usage errors are input errors; clap's own code 2 means a contract fault here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Solve {
            input,
            stats,
            verify,
            max_steps,
            fault_inject,
        } => solve(&input, stats, verify, max_steps, fault_inject),
        Command::Translate { input } => translate_cmd(&input),
        Command::Check { input } => check_cmd(&input),
        Command::Oracle { input, oracle_cap } => oracle_cmd(&input, oracle_cap),
        Command::Gen { seed, output } => gen_cmd(seed, output),
    };
    ExitCode::from(code)
}
