//! A finite-domain constraint solver for n-ary networks.
//!
//! N-ary networks ([`csp`]) are translated into equivalent binary networks
//! with the hidden variable encoding ([`hve`]), solved by a generic AC3-based
//! binary solver ([`solver`]), and the solution is read back onto the
//! original variables ([`pipeline`]).
//!
//! The modules are generic over the raw value type (any signed primitive
//! integer, see [`Value`]). The aliases at the crate root fix it to `i64`.
//!
//! ```
//! use hvecsp_core::{fixtures, solve, SolveResult};
//!
//! let (net, reg) = fixtures::running_example::<i64>();
//! let SolveResult::Sat(a) = solve(&net, &reg).unwrap() else { panic!() };
//! assert_eq!(a[&"x1".into()], 1);
//! ```

pub mod csp;
pub mod fixtures;
pub mod hve;
pub mod pipeline;
pub mod solver;
mod value;

pub use csp::{
    check_network, eval_constraint, is_solution, BasicConstraint, BasicId, Constraint, EvalError,
    OpId, RegistryError, VarId, Violation,
};
pub use hve::{decode_solution, encode_solution, translate, EncConstraint, EncVar, TranslateError};
pub use pipeline::{solve, solve_with, Outcome, PipelineError, SolveOptions};
pub use solver::{check_bin_network, solve_csp, BinViolation, SearchStats, SolveError};
pub use value::Value;

pub type RawValue = i64;
pub type Domain = csp::Domain<RawValue>;
pub type Table = csp::Table<RawValue>;
pub type Predicate = csp::Predicate<RawValue>;
pub type Interpretation = csp::Interpretation<RawValue>;
pub type Registry = csp::Registry<RawValue>;
pub type Network = csp::Network<RawValue>;
pub type Assignment = csp::Assignment<RawValue>;
pub type WellFormedReport = csp::WellFormedReport<Violation>;
pub type Tuple = hve::Tuple<RawValue>;
pub type EncValue = hve::EncValue<RawValue>;
pub type BinNetwork = hve::BinNetwork<RawValue>;
pub type BinAssignment = hve::BinAssignment<RawValue>;
pub type BinResult = solver::BinResult<RawValue>;
pub type SolveResult = pipeline::SolveResult<RawValue>;
