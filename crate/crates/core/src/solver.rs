//! Generic binary CSP solver: AC3 propagation and backtracking search that
//! maintains arc consistency.
//!
//! The solver only relies on two things about a constraint: its pair of
//! variables ([`vars_of`]) and a boolean interpretation on a pair of values
//! ([`interp_binary`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::csp::{BasicId, Interpretation, Registry, VarId, WellFormedReport};
use crate::hve::{BinAssignment, BinNetwork, EncConstraint, EncValue, EncVar};
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("binary relation {0} is not registered")]
    UnresolvedBasic(BasicId),
    #[error("expected a raw value, got a tuple")]
    ExpectedRaw,
    #[error("expected a tuple of arity {arity}")]
    ExpectedTuple { arity: usize },
    #[error("projection index {idx} out of range for arity {arity}")]
    BadIndex { idx: usize, arity: usize },
}

/// Interpretation of a binary-encoding constraint on values of its two
/// variables, in [`vars_of`] order.
pub fn interp_binary<V: Value>(
    c: &EncConstraint,
    vx: &EncValue<V>,
    vy: &EncValue<V>,
    reg: &Registry<V>,
) -> Result<bool, ShapeError> {
    match c {
        EncConstraint::Basic(b) => {
            let interp = reg
                .basic(&b.id)
                .ok_or_else(|| ShapeError::UnresolvedBasic(b.id.clone()))?;
            let x = vx.as_raw().ok_or(ShapeError::ExpectedRaw)?;
            let y = vy.as_raw().ok_or(ShapeError::ExpectedRaw)?;
            Ok(interp.holds(&[x, y]))
        }
        EncConstraint::Proj { arity, idx, .. } => {
            let t = vx
                .as_tuple()
                .filter(|t| t.len() == *arity)
                .ok_or(ShapeError::ExpectedTuple { arity: *arity })?;
            let y = vy.as_raw().ok_or(ShapeError::ExpectedRaw)?;
            let component = t.proj(*idx).map_err(|_| ShapeError::BadIndex {
                idx: *idx,
                arity: *arity,
            })?;
            Ok(component == y)
        }
    }
}

/// The two variables of a constraint. For projections the hidden variable
/// comes first.
pub fn vars_of(c: &EncConstraint) -> (EncVar, EncVar) {
    match c {
        EncConstraint::Basic(b) => (EncVar::Original(b.x.clone()), EncVar::Original(b.y.clone())),
        EncConstraint::Proj {
            op,
            arity,
            scope,
            var,
            ..
        } => (
            EncVar::Hidden {
                op: op.clone(),
                arity: *arity,
                scope: scope.clone(),
            },
            EncVar::Original(var.clone()),
        ),
    }
}

/// A failed well-formedness clause of a binary network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BinViolation {
    DuplicateVariable { var: EncVar },
    MissingDomain { var: EncVar },
    UndeclaredDomain { var: EncVar },
    UndeclaredVariable { constraint: usize, var: EncVar },
    UnusedVariable { var: EncVar },
    NotNormalized { first: usize, second: usize },
    SameVariable { constraint: usize },
    BadProjection { constraint: usize },
    UnresolvedBasic { constraint: usize, id: BasicId },
}

impl fmt::Display for BinViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateVariable { var } => write!(f, "variable {var} declared twice"),
            Self::MissingDomain { var } => write!(f, "variable {var} has no domain"),
            Self::UndeclaredDomain { var } => {
                write!(f, "domain given for undeclared variable {var}")
            }
            Self::UndeclaredVariable { constraint, var } => {
                write!(f, "constraint #{constraint} uses undeclared variable {var}")
            }
            Self::UnusedVariable { var } => write!(f, "variable {var} occurs in no constraint"),
            Self::NotNormalized { first, second } => {
                write!(
                    f,
                    "constraints #{first} and #{second} hold over the same variables"
                )
            }
            Self::SameVariable { constraint } => {
                write!(f, "constraint #{constraint} links a variable to itself")
            }
            Self::BadProjection { constraint } => {
                write!(
                    f,
                    "constraint #{constraint} projects a position that does not hold its variable"
                )
            }
            Self::UnresolvedBasic { constraint, id } => {
                write!(
                    f,
                    "constraint #{constraint}: binary relation {id} is not registered"
                )
            }
        }
    }
}

/// Well-formedness of a binary network: declared variables, domain keys and
/// constrained variables coincide; no two constraints share a variable pair;
/// every constraint links two distinct variables and resolves.
pub fn check_bin_network<V: Value>(
    net: &BinNetwork<V>,
    reg: &Registry<V>,
) -> WellFormedReport<BinViolation> {
    let mut out = Vec::new();
    let mut declared = BTreeSet::new();
    for var in &net.vars {
        if !declared.insert(var) {
            out.push(BinViolation::DuplicateVariable { var: var.clone() });
        }
    }
    for var in &declared {
        if !net.doms.contains_key(*var) {
            out.push(BinViolation::MissingDomain {
                var: (*var).clone(),
            });
        }
    }
    for var in net.doms.keys() {
        if !declared.contains(var) {
            out.push(BinViolation::UndeclaredDomain { var: var.clone() });
        }
    }

    let mut used = BTreeSet::new();
    let mut pairs: BTreeMap<(EncVar, EncVar), usize> = BTreeMap::new();
    for (i, c) in net.csts.iter().enumerate() {
        let (x, y) = vars_of(c);
        for v in [&x, &y] {
            if !declared.contains(v) {
                out.push(BinViolation::UndeclaredVariable {
                    constraint: i,
                    var: v.clone(),
                });
            }
        }
        if x == y {
            out.push(BinViolation::SameVariable { constraint: i });
        }
        match c {
            EncConstraint::Basic(b) => {
                if reg.basic(&b.id).is_none() {
                    out.push(BinViolation::UnresolvedBasic {
                        constraint: i,
                        id: b.id.clone(),
                    });
                }
            }
            EncConstraint::Proj {
                arity,
                scope,
                idx,
                var,
                ..
            } => {
                if scope.len() != *arity || scope.get(*idx) != Some(var) {
                    out.push(BinViolation::BadProjection { constraint: i });
                }
            }
        }
        let key = if x <= y { (x, y) } else { (y, x) };
        match pairs.get(&key) {
            Some(&first) => out.push(BinViolation::NotNormalized { first, second: i }),
            None => {
                used.insert(key.0.clone());
                used.insert(key.1.clone());
                pairs.insert(key, i);
            }
        }
    }
    for var in &declared {
        if !used.contains(*var) {
            out.push(BinViolation::UnusedVariable {
                var: (*var).clone(),
            });
        }
    }
    WellFormedReport::new(out)
}

/// Total on the declared variables, in-domain, and satisfying every
/// constraint.
pub fn is_bin_solution<V: Value>(
    a: &BinAssignment<V>,
    net: &BinNetwork<V>,
    reg: &Registry<V>,
) -> bool {
    net.vars.iter().all(|v| a.contains_key(v))
        && a.iter()
            .all(|(var, val)| net.doms.get(var).is_some_and(|d| d.contains(val)))
        && net.csts.iter().all(|c| {
            let (x, y) = vars_of(c);
            match (a.get(&x), a.get(&y)) {
                (Some(vx), Some(vy)) => interp_binary(c, vx, vy, reg) == Ok(true),
                _ => false,
            }
        })
}

/// Which variable of a constraint an arc revises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    First,
    Second,
}

impl Side {
    fn flip(self) -> Self {
        match self {
            Self::First => Self::Second,
            Self::Second => Self::First,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// A directed arc: revise the `side` variable of constraint `constraint`
/// against the other one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub constraint: usize,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Revision {
    pub changed: bool,
    pub emptied: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub revisions: u64,
    pub arcs_processed: u64,
    pub removals: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("binary network is not well-formed:\n{0}")]
    IllFormed(WellFormedReport<BinViolation>),
    #[error("constraint #{constraint}: {source}")]
    Shape {
        constraint: usize,
        source: ShapeError,
    },
    #[error("search stopped after {0} nodes")]
    StepLimit(u64),
}

enum Check<V> {
    Basic(Interpretation<V>),
    Proj(usize),
}

struct Compiled<V> {
    x: usize,
    y: usize,
    check: Check<V>,
}

/// Working state of propagation: current domains, as ascending indices into
/// the initial domains, and the arc worklist.
pub struct SolverState<V> {
    vars: Vec<EncVar>,
    index: HashMap<EncVar, usize>,
    values: Vec<Vec<EncValue<V>>>,
    csts: Vec<Compiled<V>>,
    incident: Vec<Vec<(usize, Side)>>,
    current: Vec<Vec<u32>>,
    worklist: VecDeque<Arc>,
    queued: Vec<[bool; 2]>,
    stats: SearchStats,
}

impl<V: Value> SolverState<V> {
    /// Compiles a well-formed network. The worklist starts with every arc,
    /// in constraint order, first side before second.
    pub fn new(net: &BinNetwork<V>, reg: &Registry<V>) -> Result<Self, SolveError> {
        let report = check_bin_network(net, reg);
        if !report.is_ok() {
            return Err(SolveError::IllFormed(report));
        }
        let vars = net.vars.clone();
        let index: HashMap<EncVar, usize> = vars
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let values: Vec<Vec<EncValue<V>>> = vars.iter().map(|v| net.doms[v].clone()).collect();

        let mut csts = Vec::with_capacity(net.csts.len());
        let mut incident = vec![Vec::new(); vars.len()];
        for (ci, c) in net.csts.iter().enumerate() {
            let (vx, vy) = vars_of(c);
            let (x, y) = (index[&vx], index[&vy]);
            let shape = |source| SolveError::Shape {
                constraint: ci,
                source,
            };
            let check = match c {
                EncConstraint::Basic(b) => {
                    if values[x]
                        .iter()
                        .chain(&values[y])
                        .any(|v| v.as_raw().is_none())
                    {
                        return Err(shape(ShapeError::ExpectedRaw));
                    }
                    let interp = reg
                        .basic(&b.id)
                        .ok_or_else(|| shape(ShapeError::UnresolvedBasic(b.id.clone())))?;
                    Check::Basic(interp.clone())
                }
                EncConstraint::Proj { arity, idx, .. } => {
                    if values[x]
                        .iter()
                        .any(|v| v.as_tuple().is_none_or(|t| t.len() != *arity))
                    {
                        return Err(shape(ShapeError::ExpectedTuple { arity: *arity }));
                    }
                    if values[y].iter().any(|v| v.as_raw().is_none()) {
                        return Err(shape(ShapeError::ExpectedRaw));
                    }
                    Check::Proj(*idx)
                }
            };
            incident[x].push((ci, Side::First));
            incident[y].push((ci, Side::Second));
            csts.push(Compiled { x, y, check });
        }

        let current = values
            .iter()
            .map(|d| (0..d.len() as u32).collect())
            .collect();
        let mut state = Self {
            vars,
            index,
            values,
            queued: vec![[false; 2]; csts.len()],
            csts,
            incident,
            current,
            worklist: VecDeque::new(),
            stats: SearchStats::default(),
        };
        state.seed_all();
        Ok(state)
    }

    /// Every arc in constraint order, first side then second side.
    pub fn all_arcs(&self) -> Vec<Arc> {
        (0..self.csts.len())
            .flat_map(|constraint| [Side::First, Side::Second].map(|side| Arc { constraint, side }))
            .collect()
    }

    fn seed_all(&mut self) {
        for arc in self.all_arcs() {
            self.push(arc);
        }
    }

    /// Replaces the worklist.
    pub fn set_worklist(&mut self, arcs: impl IntoIterator<Item = Arc>) {
        self.clear_worklist();
        for arc in arcs {
            self.push(arc);
        }
    }

    pub fn worklist(&self) -> impl Iterator<Item = &Arc> {
        self.worklist.iter()
    }

    fn clear_worklist(&mut self) {
        self.worklist.clear();
        self.queued.iter_mut().for_each(|q| *q = [false; 2]);
    }

    fn push(&mut self, arc: Arc) {
        let slot = &mut self.queued[arc.constraint][arc.side.slot()];
        if !*slot {
            *slot = true;
            self.worklist.push_back(arc);
        }
    }

    /// Enqueues every arc that revises a neighbour of `var` against `var`,
    /// except the ones on constraint `skip`.
    fn push_neighbours(&mut self, var: usize, skip: Option<usize>) {
        for k in 0..self.incident[var].len() {
            let (constraint, side) = self.incident[var][k];
            if Some(constraint) != skip {
                self.push(Arc {
                    constraint,
                    side: side.flip(),
                });
            }
        }
    }

    pub fn variables(&self) -> &[EncVar] {
        &self.vars
    }

    /// Current domain of a variable, in initial-domain order.
    pub fn domain(&self, var: &EncVar) -> Option<Vec<EncValue<V>>> {
        let i = *self.index.get(var)?;
        Some(
            self.current[i]
                .iter()
                .map(|&k| self.values[i][k as usize].clone())
                .collect(),
        )
    }

    pub fn domains(&self) -> BTreeMap<EncVar, Vec<EncValue<V>>> {
        self.vars
            .iter()
            .map(|v| (v.clone(), self.domain(v).unwrap_or_default()))
            .collect()
    }

    /// Keeps only the values of `var` accepted by `keep`. Returns false for
    /// an unknown variable. Does not touch the worklist.
    pub fn restrict(&mut self, var: &EncVar, keep: impl Fn(&EncValue<V>) -> bool) -> bool {
        let Some(&i) = self.index.get(var) else {
            return false;
        };
        let values = &self.values[i];
        self.current[i].retain(|&k| keep(&values[k as usize]));
        true
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    fn supported(&self, c: &Compiled<V>, vx: u32, vy: u32) -> bool {
        let a = &self.values[c.x][vx as usize];
        let b = &self.values[c.y][vy as usize];
        match (&c.check, a, b) {
            (Check::Basic(interp), EncValue::Raw(a), EncValue::Raw(b)) => interp.holds(&[*a, *b]),
            (Check::Proj(idx), EncValue::Tuple(t), EncValue::Raw(b)) => t.as_slice()[*idx] == *b,
            _ => false,
        }
    }

    /// Removes every value of the arc's variable that has no support in the
    /// other variable's current domain.
    pub fn revise(&mut self, arc: Arc) -> Revision {
        self.stats.revisions += 1;
        let c = &self.csts[arc.constraint];
        let (target, other) = match arc.side {
            Side::First => (c.x, c.y),
            Side::Second => (c.y, c.x),
        };
        let mut dom = std::mem::take(&mut self.current[target]);
        let before = dom.len();
        let opposite = &self.current[other];
        dom.retain(|&v| {
            opposite.iter().any(|&w| match arc.side {
                Side::First => self.supported(c, v, w),
                Side::Second => self.supported(c, w, v),
            })
        });
        let revision = Revision {
            changed: dom.len() != before,
            emptied: dom.is_empty(),
        };
        self.stats.removals += (before - dom.len()) as u64;
        self.current[target] = dom;
        revision
    }

    /// AC3: processes the worklist to a fixpoint. Returns false as soon as a
    /// domain becomes empty (the worklist is then cleared).
    pub fn propagate(&mut self) -> bool {
        while let Some(arc) = self.worklist.pop_front() {
            self.queued[arc.constraint][arc.side.slot()] = false;
            self.stats.arcs_processed += 1;
            let revision = self.revise(arc);
            if revision.emptied {
                self.clear_worklist();
                return false;
            }
            if revision.changed {
                let c = &self.csts[arc.constraint];
                let target = match arc.side {
                    Side::First => c.x,
                    Side::Second => c.y,
                };
                self.push_neighbours(target, Some(arc.constraint));
            }
        }
        true
    }

    fn assignment(&self) -> BinAssignment<V> {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, v)| {
                (
                    v.clone(),
                    self.values[i][self.current[i][0] as usize].clone(),
                )
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BinResult<V> {
    Sat(BinAssignment<V>),
    Unsat,
}

impl<V> BinResult<V> {
    pub fn is_sat(&self) -> bool {
        matches!(self, Self::Sat(_))
    }
}

/// Backtracking search maintaining arc consistency.
///
/// Branches on the non-singleton variable with the smallest current domain
/// (first declared on ties), trying its values in domain order.
pub struct Solver<V> {
    state: SolverState<V>,
    step_limit: Option<u64>,
}

impl<V: Value> Solver<V> {
    pub fn new(net: &BinNetwork<V>, reg: &Registry<V>) -> Result<Self, SolveError> {
        Ok(Self {
            state: SolverState::new(net, reg)?,
            step_limit: None,
        })
    }

    /// Gives up with [`SolveError::StepLimit`] after this many search nodes.
    pub fn with_step_limit(mut self, nodes: Option<u64>) -> Self {
        self.step_limit = nodes;
        self
    }

    pub fn stats(&self) -> SearchStats {
        self.state.stats()
    }

    pub fn solve(&mut self) -> Result<BinResult<V>, SolveError> {
        if self.state.current.iter().any(Vec::is_empty) || !self.state.propagate() {
            self.state.stats.nodes += 1;
            return Ok(BinResult::Unsat);
        }
        if self.search()? {
            Ok(BinResult::Sat(self.state.assignment()))
        } else {
            Ok(BinResult::Unsat)
        }
    }

    fn search(&mut self) -> Result<bool, SolveError> {
        let st = &mut self.state;
        st.stats.nodes += 1;
        if let Some(limit) = self.step_limit {
            if st.stats.nodes > limit {
                return Err(SolveError::StepLimit(limit));
            }
        }
        let branch = st
            .current
            .iter()
            .enumerate()
            .filter(|(_, d)| d.len() > 1)
            .min_by_key(|&(i, d)| (d.len(), i))
            .map(|(i, _)| i);
        let Some(var) = branch else {
            return Ok(true);
        };

        let snapshot = st.current.clone();
        for &value in &snapshot[var] {
            let st = &mut self.state;
            st.current[var] = vec![value];
            st.clear_worklist();
            st.push_neighbours(var, None);
            if st.propagate() && self.search()? {
                return Ok(true);
            }
            self.state.current.clone_from(&snapshot);
        }
        Ok(false)
    }
}

/// Solves a well-formed binary network.
pub fn solve_csp<V: Value>(
    net: &BinNetwork<V>,
    reg: &Registry<V>,
) -> Result<BinResult<V>, SolveError> {
    let result = Solver::new(net, reg)?.solve()?;
    if let BinResult::Sat(a) = &result {
        debug_assert!(
            is_bin_solution(a, net, reg),
            "solver returned a non-solution"
        );
    }
    Ok(result)
}

/// Original-variable view of a binary assignment, for diagnostics.
pub fn originals<V: Value>(a: &BinAssignment<V>) -> BTreeMap<VarId, V> {
    a.iter()
        .filter_map(|(k, v)| match (k, v) {
            (EncVar::Original(x), EncValue::Raw(v)) => Some((x.clone(), *v)),
            _ => None,
        })
        .collect()
}
