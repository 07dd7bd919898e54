//! The n-ary network model: variables, domains, constraints, their
//! interpretations, the well-formedness check and the solution predicate.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::value::Value;

macro_rules! symbol {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            /// Panics on an empty name.
            pub fn new(name: impl AsRef<str>) -> Self {
                let name = name.as_ref();
                assert!(!name.is_empty(), concat!(stringify!($name), " must not be empty"));
                Self(Arc::from(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(name: &str) -> Self {
                Self::new(name)
            }
        }

        impl From<String> for $name {
            fn from(name: String) -> Self {
                Self::new(name)
            }
        }
    };
}

symbol!(
    /// Name of an original variable. Ordered lexicographically.
    VarId
);
symbol!(
    /// Name of an n-ary relation, resolved through the [`Registry`] together
    /// with an arity.
    OpId
);
symbol!(
    /// Name of a binary relation, resolved through the [`Registry`].
    BasicId
);

/// A finite domain: strictly ascending values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Domain<V> {
    values: Vec<V>,
}

impl<V: Value> Domain<V> {
    /// Builds a domain from any collection of values, sorting and removing
    /// duplicates.
    pub fn new(values: impl IntoIterator<Item = V>) -> Self {
        let mut values: Vec<V> = values.into_iter().collect();
        values.sort_unstable();
        values.dedup();
        Self { values }
    }

    /// The inclusive interval `lo..=hi`; empty when `lo > hi`.
    pub fn range(lo: V, hi: V) -> Self {
        let mut values = Vec::new();
        let mut v = lo;
        while v <= hi {
            values.push(v);
            if v == hi {
                break;
            }
            v = v + V::one();
        }
        Self { values }
    }

    pub fn empty() -> Self {
        Self { values: Vec::new() }
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, v: V) -> bool {
        self.values.binary_search(&v).is_ok()
    }

    /// True when the values form a contiguous interval with at least two
    /// elements.
    pub fn is_interval(&self) -> bool {
        self.values.len() >= 2
            && self
                .values
                .windows(2)
                .all(|w| w[0].checked_add(&V::one()) == Some(w[1]))
    }
}

impl<V: Value> FromIterator<V> for Domain<V> {
    fn from_iter<I: IntoIterator<Item = V>>(iter: I) -> Self {
        Self::new(iter)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("arity must be positive")]
    ZeroArity,
    #[error("table row {row} has {len} values, expected {arity}")]
    RowLength {
        row: usize,
        len: usize,
        arity: usize,
    },
    #[error("table row {row} duplicates row {first}")]
    DuplicateRow { row: usize, first: usize },
    #[error("table of arity {table} registered under arity {declared}")]
    ArityMismatch { table: usize, declared: usize },
    #[error("`{0}` is already registered")]
    AlreadyRegistered(String),
}

/// An extensional relation: a duplicate-free list of rows of fixed width.
#[derive(Clone, Debug)]
pub struct Table<V> {
    arity: usize,
    rows: Vec<Vec<V>>,
    index: HashSet<Vec<V>>,
}

impl<V: Value> Table<V> {
    pub fn new(arity: usize, rows: Vec<Vec<V>>) -> Result<Self, RegistryError> {
        let mut index = HashSet::with_capacity(rows.len());
        for (row, values) in rows.iter().enumerate() {
            if values.len() != arity {
                return Err(RegistryError::RowLength {
                    row,
                    len: values.len(),
                    arity,
                });
            }
            if !index.insert(values.clone()) {
                let first = rows.iter().position(|r| r == values).unwrap_or(row);
                return Err(RegistryError::DuplicateRow { row, first });
            }
        }
        Ok(Self { arity, rows, index })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rows(&self) -> &[Vec<V>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, values: &[V]) -> bool {
        self.index.contains(values)
    }
}

type PredFn<V> = dyn Fn(&[V]) -> bool + Send + Sync;

/// A total boolean function over value sequences, optionally carrying the
/// textual formula it was built from (positional parameters `X0`, `X1`, ...).
#[derive(Clone)]
pub struct Predicate<V> {
    eval: Arc<PredFn<V>>,
    formula: Option<Arc<str>>,
}

impl<V> Predicate<V> {
    pub fn new(f: impl Fn(&[V]) -> bool + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            formula: None,
        }
    }

    pub fn with_formula(mut self, formula: impl AsRef<str>) -> Self {
        self.formula = Some(Arc::from(formula.as_ref()));
        self
    }

    pub fn formula(&self) -> Option<&str> {
        self.formula.as_deref()
    }

    pub fn call(&self, values: &[V]) -> bool {
        (self.eval)(values)
    }
}

impl<V> fmt::Debug for Predicate<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.formula {
            Some(text) => write!(f, "Predicate({text})"),
            None => f.write_str("Predicate(<closure>)"),
        }
    }
}

/// Semantics of a relation: an explicit table of accepted tuples, or a
/// predicate.
#[derive(Clone, Debug)]
pub enum Interpretation<V> {
    Extension(Arc<Table<V>>),
    Intention(Predicate<V>),
}

impl<V: Value> Interpretation<V> {
    pub fn extension(arity: usize, rows: Vec<Vec<V>>) -> Result<Self, RegistryError> {
        Ok(Self::Extension(Arc::new(Table::new(arity, rows)?)))
    }

    pub fn intention(f: impl Fn(&[V]) -> bool + Send + Sync + 'static) -> Self {
        Self::Intention(Predicate::new(f))
    }

    pub fn holds(&self, values: &[V]) -> bool {
        match self {
            Self::Extension(table) => table.contains(values),
            Self::Intention(pred) => pred.call(values),
        }
    }
}

/// Resolves relation names to their interpretations.
///
/// N-ary relations are keyed by `(op, arity)`; binary relations by their
/// [`BasicId`] alone and are always evaluated on exactly two values.
#[derive(Clone, Debug)]
pub struct Registry<V> {
    ops: BTreeMap<(OpId, usize), Interpretation<V>>,
    basics: BTreeMap<BasicId, Interpretation<V>>,
}

impl<V> Default for Registry<V> {
    fn default() -> Self {
        Self {
            ops: BTreeMap::new(),
            basics: BTreeMap::new(),
        }
    }
}

impl<V: Value> Registry<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_op(
        &mut self,
        op: OpId,
        arity: usize,
        interp: Interpretation<V>,
    ) -> Result<(), RegistryError> {
        if arity == 0 {
            return Err(RegistryError::ZeroArity);
        }
        if let Interpretation::Extension(table) = &interp {
            if table.arity() != arity {
                return Err(RegistryError::ArityMismatch {
                    table: table.arity(),
                    declared: arity,
                });
            }
        }
        if self.ops.contains_key(&(op.clone(), arity)) {
            return Err(RegistryError::AlreadyRegistered(format!("{op}/{arity}")));
        }
        self.ops.insert((op, arity), interp);
        Ok(())
    }

    pub fn register_basic(
        &mut self,
        id: BasicId,
        interp: Interpretation<V>,
    ) -> Result<(), RegistryError> {
        if let Interpretation::Extension(table) = &interp {
            if table.arity() != 2 {
                return Err(RegistryError::ArityMismatch {
                    table: table.arity(),
                    declared: 2,
                });
            }
        }
        if self.basics.contains_key(&id) {
            return Err(RegistryError::AlreadyRegistered(id.to_string()));
        }
        self.basics.insert(id, interp);
        Ok(())
    }

    pub fn op(&self, op: &OpId, arity: usize) -> Option<&Interpretation<V>> {
        // BTreeMap lookups need an owned key; OpId clones are refcount bumps.
        self.ops.get(&(op.clone(), arity))
    }

    pub fn basic(&self, id: &BasicId) -> Option<&Interpretation<V>> {
        self.basics.get(id)
    }

    pub fn ops(&self) -> impl Iterator<Item = (&OpId, usize, &Interpretation<V>)> {
        self.ops
            .iter()
            .map(|((op, arity), interp)| (op, *arity, interp))
    }

    pub fn basics(&self) -> impl Iterator<Item = (&BasicId, &Interpretation<V>)> {
        self.basics.iter()
    }
}

/// A binary constraint between two original variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicConstraint {
    pub id: BasicId,
    pub x: VarId,
    pub y: VarId,
}

/// A constraint of the n-ary network. Ill-formed shapes (wrong arity,
/// repeated variables) are representable; see [`check_network`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    Bin(BasicConstraint),
    Nary {
        op: OpId,
        arity: usize,
        scope: Vec<VarId>,
    },
}

impl Constraint {
    pub fn bin(id: impl Into<BasicId>, x: impl Into<VarId>, y: impl Into<VarId>) -> Self {
        Self::Bin(BasicConstraint {
            id: id.into(),
            x: x.into(),
            y: y.into(),
        })
    }

    /// An n-ary constraint whose arity is the scope length.
    pub fn nary(op: impl Into<OpId>, scope: impl IntoIterator<Item = impl Into<VarId>>) -> Self {
        let scope: Vec<VarId> = scope.into_iter().map(Into::into).collect();
        Self::Nary {
            op: op.into(),
            arity: scope.len(),
            scope,
        }
    }

    /// Variables in scope order.
    pub fn variables(&self) -> impl Iterator<Item = &VarId> + '_ {
        let (pair, rest): (Option<[&VarId; 2]>, &[VarId]) = match self {
            Self::Bin(b) => (Some([&b.x, &b.y]), &[]),
            Self::Nary { scope, .. } => (None, scope),
        };
        pair.into_iter().flatten().chain(rest)
    }
}

/// An n-ary constraint network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network<V> {
    pub vars: Vec<VarId>,
    pub doms: BTreeMap<VarId, Domain<V>>,
    pub csts: Vec<Constraint>,
}

impl<V> Default for Network<V> {
    fn default() -> Self {
        Self {
            vars: Vec::new(),
            doms: BTreeMap::new(),
            csts: Vec::new(),
        }
    }
}

impl<V: Value> Network<V> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable and its domain.
    pub fn add_var(&mut self, name: impl Into<VarId>, dom: Domain<V>) -> VarId {
        let var = name.into();
        self.vars.push(var.clone());
        self.doms.insert(var.clone(), dom);
        var
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.csts.push(c);
    }

    /// Number of total assignments, saturating.
    pub fn search_space(&self) -> u128 {
        self.vars.iter().fold(1u128, |acc, v| {
            let size = self.doms.get(v).map_or(0, Domain::len) as u128;
            acc.saturating_mul(size)
        })
    }
}

/// A partial map from variables to values.
pub type Assignment<V> = BTreeMap<VarId, V>;

/// Outcome of a well-formedness check: an empty violation list means ok.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellFormedReport<T> {
    violations: Vec<T>,
}

impl<T> WellFormedReport<T> {
    pub fn new(violations: Vec<T>) -> Self {
        Self { violations }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[T] {
        &self.violations
    }
}

impl<T: fmt::Display> fmt::Display for WellFormedReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A failed well-formedness clause of an n-ary network.
///
/// Clauses: (a) declared variables, domain keys and constrained variables
/// coincide; (b) no two constraints share a variable set; (c) scopes are
/// repetition-free; (d) `Nary` scopes have the declared arity, which exceeds
/// two; (e) every relation resolves in the registry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateVariable {
        var: VarId,
    },
    MissingDomain {
        var: VarId,
    },
    UndeclaredDomain {
        var: VarId,
    },
    UndeclaredVariable {
        constraint: usize,
        var: VarId,
    },
    UnusedVariable {
        var: VarId,
    },
    NotNormalized {
        first: usize,
        second: usize,
    },
    RepeatedVariable {
        constraint: usize,
        var: VarId,
    },
    BadArity {
        constraint: usize,
        arity: usize,
        scope_len: usize,
    },
    UnresolvedOp {
        constraint: usize,
        op: OpId,
        arity: usize,
    },
    UnresolvedBasic {
        constraint: usize,
        id: BasicId,
    },
}

impl Violation {
    pub fn clause(&self) -> char {
        match self {
            Self::DuplicateVariable { .. }
            | Self::MissingDomain { .. }
            | Self::UndeclaredDomain { .. }
            | Self::UndeclaredVariable { .. }
            | Self::UnusedVariable { .. } => 'a',
            Self::NotNormalized { .. } => 'b',
            Self::RepeatedVariable { .. } => 'c',
            Self::BadArity { .. } => 'd',
            Self::UnresolvedOp { .. } | Self::UnresolvedBasic { .. } => 'e',
        }
    }

    /// Index of the offending constraint, if the violation is about one.
    pub fn constraint(&self) -> Option<usize> {
        match self {
            Self::UndeclaredVariable { constraint, .. }
            | Self::RepeatedVariable { constraint, .. }
            | Self::BadArity { constraint, .. }
            | Self::UnresolvedOp { constraint, .. }
            | Self::UnresolvedBasic { constraint, .. } => Some(*constraint),
            Self::NotNormalized { second, .. } => Some(*second),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) ", self.clause())?;
        match self {
            Self::DuplicateVariable { var } => write!(f, "variable {var} declared twice"),
            Self::MissingDomain { var } => write!(f, "variable {var} has no domain"),
            Self::UndeclaredDomain { var } => write!(f, "domain given for undeclared variable {var}"),
            Self::UndeclaredVariable { constraint, var } => {
                write!(f, "constraint #{constraint} uses undeclared variable {var}")
            }
            Self::UnusedVariable { var } => write!(f, "variable {var} occurs in no constraint"),
            Self::NotNormalized { first, second } => {
                write!(f, "constraints #{first} and #{second} hold over the same variables")
            }
            Self::RepeatedVariable { constraint, var } => {
                write!(f, "constraint #{constraint} repeats variable {var}")
            }
            Self::BadArity { constraint, arity, scope_len } => write!(
                f,
                "constraint #{constraint} declares arity {arity} with {scope_len} variables (n-ary arity must be > 2)"
            ),
            Self::UnresolvedOp { constraint, op, arity } => {
                write!(f, "constraint #{constraint}: relation {op}/{arity} is not registered")
            }
            Self::UnresolvedBasic { constraint, id } => {
                write!(f, "constraint #{constraint}: binary relation {id} is not registered")
            }
        }
    }
}

/// Checks every well-formedness clause and collects all violations.
pub fn check_network<V: Value>(net: &Network<V>, reg: &Registry<V>) -> WellFormedReport<Violation> {
    let mut out = Vec::new();

    let mut declared = BTreeSet::new();
    for var in &net.vars {
        if !declared.insert(var) {
            out.push(Violation::DuplicateVariable { var: var.clone() });
        }
    }
    for var in &net.vars {
        if !net.doms.contains_key(var)
            && !out.contains(&Violation::MissingDomain { var: var.clone() })
        {
            out.push(Violation::MissingDomain { var: var.clone() });
        }
    }
    for var in net.doms.keys() {
        if !declared.contains(var) {
            out.push(Violation::UndeclaredDomain { var: var.clone() });
        }
    }

    let mut used = BTreeSet::new();
    for (i, c) in net.csts.iter().enumerate() {
        for var in c.variables() {
            used.insert(var);
            if !declared.contains(var) {
                out.push(Violation::UndeclaredVariable {
                    constraint: i,
                    var: var.clone(),
                });
            }
        }
    }
    for var in &declared {
        if !used.contains(var) {
            out.push(Violation::UnusedVariable {
                var: (*var).clone(),
            });
        }
    }

    let mut scopes: BTreeMap<BTreeSet<&VarId>, usize> = BTreeMap::new();
    for (i, c) in net.csts.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for var in c.variables() {
            if !seen.insert(var) {
                out.push(Violation::RepeatedVariable {
                    constraint: i,
                    var: var.clone(),
                });
            }
        }
        if let Some(&first) = scopes.get(&seen) {
            out.push(Violation::NotNormalized { first, second: i });
        } else {
            scopes.insert(seen, i);
        }

        match c {
            Constraint::Bin(b) => {
                if reg.basic(&b.id).is_none() {
                    out.push(Violation::UnresolvedBasic {
                        constraint: i,
                        id: b.id.clone(),
                    });
                }
            }
            Constraint::Nary { op, arity, scope } => {
                if scope.len() != *arity || *arity <= 2 {
                    out.push(Violation::BadArity {
                        constraint: i,
                        arity: *arity,
                        scope_len: scope.len(),
                    });
                }
                if reg.op(op, *arity).is_none() {
                    out.push(Violation::UnresolvedOp {
                        constraint: i,
                        op: op.clone(),
                        arity: *arity,
                    });
                }
            }
        }
    }

    WellFormedReport::new(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("relation {op}/{arity} is not registered")]
    UnresolvedOp { op: OpId, arity: usize },
    #[error("binary relation {0} is not registered")]
    UnresolvedBasic(BasicId),
    #[error("variable {0} is unassigned")]
    Unassigned(VarId),
    #[error("relation {op} has arity {arity} but scope has {scope_len} variables")]
    ArityMismatch {
        op: OpId,
        arity: usize,
        scope_len: usize,
    },
}

/// Evaluates a constraint under an assignment covering its scope.
pub fn eval_constraint<V: Value>(
    c: &Constraint,
    reg: &Registry<V>,
    a: &Assignment<V>,
) -> Result<bool, EvalError> {
    let lookup = |v: &VarId| {
        a.get(v)
            .copied()
            .ok_or_else(|| EvalError::Unassigned(v.clone()))
    };
    match c {
        Constraint::Bin(b) => {
            let interp = reg
                .basic(&b.id)
                .ok_or_else(|| EvalError::UnresolvedBasic(b.id.clone()))?;
            Ok(interp.holds(&[lookup(&b.x)?, lookup(&b.y)?]))
        }
        Constraint::Nary { op, arity, scope } => {
            let interp = reg.op(op, *arity).ok_or_else(|| EvalError::UnresolvedOp {
                op: op.clone(),
                arity: *arity,
            })?;
            if scope.len() != *arity {
                return Err(EvalError::ArityMismatch {
                    op: op.clone(),
                    arity: *arity,
                    scope_len: scope.len(),
                });
            }
            let values = scope.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
            Ok(interp.holds(&values))
        }
    }
}

/// Total on the declared variables, in-domain everywhere, and satisfying
/// every constraint.
pub fn is_solution<V: Value>(a: &Assignment<V>, net: &Network<V>, reg: &Registry<V>) -> bool {
    net.vars.iter().all(|v| a.contains_key(v))
        && a.iter()
            .all(|(var, &v)| net.doms.get(var).is_some_and(|d| d.contains(v)))
        && net
            .csts
            .iter()
            .all(|c| eval_constraint(c, reg, a) == Ok(true))
}
