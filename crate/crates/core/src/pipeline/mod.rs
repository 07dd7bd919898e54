//! End-to-end solving of n-ary networks: encode, solve the binary network,
//! read the original variables back. Also hosts the brute-force oracles and
//! the random network generator used to test the whole chain.

mod generator;
mod oracle;

use thiserror::Error;

pub use generator::{gen_random_network, GenConfig};
pub use oracle::{
    brute_force_solutions, brute_force_solutions_bin, OracleError, DEFAULT_ORACLE_CAP,
};

use crate::csp::{check_network, Assignment, Network, Registry, Violation, WellFormedReport};
use crate::hve::{decode_solution, translate, DecodeError, TranslateError};
use crate::solver::{BinResult, SearchStats, SolveError, Solver};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult<V> {
    Sat(Assignment<V>),
    Unsat,
}

impl<V> SolveResult<V> {
    pub fn is_sat(&self) -> bool {
        matches!(self, Self::Sat(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("network is not well-formed:\n{0}")]
    IllFormed(WellFormedReport<Violation>),
    #[error("encoding failed on a well-formed network: {0}")]
    Translate(#[from] TranslateError),
    #[error("binary solver: {0}")]
    Solve(#[from] SolveError),
    #[error("solution read-back failed: {0}")]
    Decode(#[from] DecodeError),
}

impl PipelineError {
    /// True for failures that can only come from a broken contract inside
    /// the pipeline, as opposed to bad input or an exhausted step budget.
    pub fn is_internal(&self) -> bool {
        !matches!(
            self,
            Self::IllFormed(_) | Self::Solve(SolveError::StepLimit(_))
        )
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub step_limit: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Outcome<V> {
    pub result: SolveResult<V>,
    pub stats: SearchStats,
    pub encoded_vars: usize,
    pub encoded_csts: usize,
}

/// Solves a network, rejecting it first if it is not well-formed.
pub fn solve<V: Value>(
    net: &Network<V>,
    reg: &Registry<V>,
) -> Result<SolveResult<V>, PipelineError> {
    solve_with(net, reg, &SolveOptions::default()).map(|o| o.result)
}

pub fn solve_with<V: Value>(
    net: &Network<V>,
    reg: &Registry<V>,
    opts: &SolveOptions,
) -> Result<Outcome<V>, PipelineError> {
    let report = check_network(net, reg);
    if !report.is_ok() {
        return Err(PipelineError::IllFormed(report));
    }
    let bin = translate(net, reg)?;
    let mut solver = Solver::new(&bin, reg)?.with_step_limit(opts.step_limit);
    let result = match solver.solve()? {
        BinResult::Sat(a) => SolveResult::Sat(decode_solution(&a, &net.vars)?),
        BinResult::Unsat => SolveResult::Unsat,
    };
    Ok(Outcome {
        result,
        stats: solver.stats(),
        encoded_vars: bin.vars.len(),
        encoded_csts: bin.csts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::is_solution;
    use crate::fixtures;

    #[test]
    fn running_example() {
        let (net, reg) = fixtures::running_example::<i64>();
        assert_eq!(
            solve(&net, &reg),
            Ok(SolveResult::Sat(fixtures::running_example_solution()))
        );
        let (net, reg) = fixtures::running_example_with_x1_lt_x6::<i64>();
        assert_eq!(solve(&net, &reg), Ok(SolveResult::Unsat));
    }

    #[test]
    fn empty_network() {
        assert_eq!(
            solve(&Network::<i64>::new(), &Registry::new()),
            Ok(SolveResult::Sat(Assignment::new()))
        );
    }

    #[test]
    fn ill_formed_input_is_rejected() {
        let (mut net, reg) = fixtures::running_example::<i64>();
        net.csts.push(net.csts[0].clone());
        let err = solve(&net, &reg).unwrap_err();
        assert!(matches!(err, PipelineError::IllFormed(_)));
        assert!(!err.is_internal());
    }

    #[test]
    fn generated_networks_agree_with_oracle() {
        for seed in 0..200 {
            let cfg = GenConfig {
                seed,
                ..GenConfig::default()
            };
            let (net, reg) = gen_random_network::<i64>(&cfg);
            let oracle = brute_force_solutions(&net, &reg, DEFAULT_ORACLE_CAP).unwrap();
            match solve(&net, &reg).unwrap() {
                SolveResult::Sat(a) => {
                    assert!(is_solution(&a, &net, &reg), "seed {seed}");
                    assert!(!oracle.is_empty(), "seed {seed}");
                }
                SolveResult::Unsat => assert!(oracle.is_empty(), "seed {seed}"),
            }
        }
    }
}
