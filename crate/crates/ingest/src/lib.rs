//! Readers for constraint networks: a subset of the XCSP 2.1 XML format and
//! a line-oriented native text format, plus a printer for the latter.

pub mod expr;
mod native;
mod xcsp;

use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use hvecsp_core::csp::Predicate;
use hvecsp_core::{Network, Registry, WellFormedReport};
use thiserror::Error;

pub use expr::{Expr, ExprError, ExprErrorKind};
pub use native::{emit_native, parse_native, EmitError};
pub use xcsp::{
    lower_to_network, parse_xcsp, Arg, XcspConstraint, XcspDomain, XcspInstance, XcspPredicate,
    XcspRelation, XcspVariable,
};

/// A position in the source text, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DiagKind {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("`{0}` is not an integer")]
    NotAnInteger(String),
    #[error("unresolved {what} `{name}`")]
    Unresolved { what: &'static str, name: String },
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },
    #[error("{what}: expected {expected}, found {found}")]
    Mismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Expr(ExprErrorKind),
    #[error("{0}")]
    Invalid(String),
}

/// A diagnostic with its position in the input.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct Diagnostic {
    pub pos: Pos,
    pub kind: DiagKind,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Diagnostic(#[from] Diagnostic),
    #[error("network is not well-formed:\n{0}")]
    IllFormed(WellFormedReport),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Counts predicate evaluations that faulted (division by zero, overflow)
/// and were therefore treated as false.
#[derive(Clone, Debug, Default)]
pub struct FaultCounter(Arc<AtomicU64>);

impl FaultCounter {
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    fn record(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

/// Builds a predicate that evaluates `expr` on the scope values. Faults
/// make it false and are counted.
pub fn predicate(expr: Expr, faults: &FaultCounter) -> Predicate<i64> {
    let formula = expr.to_string();
    let faults = faults.clone();
    Predicate::new(move |vs: &[i64]| match expr.eval(vs) {
        Ok(expr::Val::Bool(b)) => b,
        Ok(expr::Val::Int(v)) => v != 0,
        Err(_) => {
            faults.record();
            false
        }
    })
    .with_formula(formula)
}

/// A parsed network with its interpretations.
#[derive(Clone, Debug)]
pub struct Model {
    pub network: Network,
    pub registry: Registry,
    pub faults: FaultCounter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Xcsp,
    Native,
}

impl Format {
    /// `.xml` files are XCSP, anything else native.
    pub fn detect(path: &Path) -> Format {
        match path.extension() {
            Some(ext) if ext.eq_ignore_ascii_case("xml") => Format::Xcsp,
            _ => Format::Native,
        }
    }
}

/// Parses text in the given format. XCSP input is lowered and checked for
/// well-formedness, native input is returned as written.
pub fn parse(text: &str, format: Format) -> Result<Model, IngestError> {
    match format {
        Format::Native => Ok(parse_native(text)?),
        Format::Xcsp => lower_to_network(&parse_xcsp(text)?),
    }
}

pub fn load(path: &Path, format: Option<Format>) -> Result<Model, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, format.unwrap_or_else(|| Format::detect(path)))
}
