//! Hidden variable encoding of an n-ary network into a binary one.
//!
//! Each n-ary constraint `c` over `(y0, .., yk-1)` becomes a hidden variable
//! whose domain is the list of tuples satisfying `c`, linked to each `yi` by a
//! projection constraint: the `i`-th component of the hidden variable's tuple
//! equals the value of `yi`. Binary constraints are kept as they are.

mod tuple;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use tuple::{Tuple, TupleError};

use crate::csp::{
    Assignment, BasicConstraint, Constraint, Domain, Interpretation, Network, OpId, Registry, VarId,
};
use crate::value::Value;

/// A variable of the binary encoding.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EncVar {
    Original(VarId),
    Hidden {
        op: OpId,
        arity: usize,
        scope: Vec<VarId>,
    },
}

impl EncVar {
    pub fn hidden(op: impl Into<OpId>, scope: impl IntoIterator<Item = impl Into<VarId>>) -> Self {
        let scope: Vec<VarId> = scope.into_iter().map(Into::into).collect();
        Self::Hidden {
            op: op.into(),
            arity: scope.len(),
            scope,
        }
    }

    pub fn is_hidden(&self) -> bool {
        matches!(self, Self::Hidden { .. })
    }
}

impl From<VarId> for EncVar {
    fn from(v: VarId) -> Self {
        Self::Original(v)
    }
}

impl fmt::Display for EncVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Original(v) => write!(f, "{v}"),
            Self::Hidden { op, arity, scope } => {
                write!(f, "h:{op}/{arity}[")?;
                for (i, v) in scope.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Debug for EncVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A value of the binary encoding: a raw value for original variables, a
/// tuple for hidden ones. The tuple's arity is its length.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EncValue<V> {
    Raw(V),
    Tuple(Tuple<V>),
}

impl<V: Copy> EncValue<V> {
    pub fn as_raw(&self) -> Option<V> {
        match self {
            Self::Raw(v) => Some(*v),
            Self::Tuple(_) => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&Tuple<V>> {
        match self {
            Self::Raw(_) => None,
            Self::Tuple(t) => Some(t),
        }
    }
}

impl<V: fmt::Display> fmt::Display for EncValue<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Raw(v) => write!(f, "{v}"),
            Self::Tuple(t) => write!(f, "{t}"),
        }
    }
}

/// A constraint of the binary encoding.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EncConstraint {
    Basic(BasicConstraint),
    /// Component `idx` of the hidden variable `(op, arity, scope)` equals the
    /// value of `var`, which is `scope[idx]`.
    Proj {
        op: OpId,
        arity: usize,
        scope: Vec<VarId>,
        idx: usize,
        var: VarId,
    },
}

impl fmt::Display for EncConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Basic(b) => write!(f, "Basic {}({}, {})", b.id, b.x, b.y),
            Self::Proj {
                op,
                arity,
                scope,
                idx,
                var,
            } => {
                let hidden = EncVar::Hidden {
                    op: op.clone(),
                    arity: *arity,
                    scope: scope.clone(),
                };
                write!(f, "Proj {idx}({hidden}, {var})")
            }
        }
    }
}

/// The binary network handed to the solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinNetwork<V> {
    pub vars: Vec<EncVar>,
    pub doms: BTreeMap<EncVar, Vec<EncValue<V>>>,
    pub csts: Vec<EncConstraint>,
}

impl<V> Default for BinNetwork<V> {
    fn default() -> Self {
        Self {
            vars: Vec::new(),
            doms: BTreeMap::new(),
            csts: Vec::new(),
        }
    }
}

impl<V> BinNetwork<V> {
    pub fn hidden_count(&self) -> usize {
        self.vars.iter().filter(|v| v.is_hidden()).count()
    }
}

pub type BinAssignment<V> = BTreeMap<EncVar, EncValue<V>>;

/// Hidden variables paired with their tuple domains.
pub type HiddenDomains<V> = Vec<(EncVar, Vec<Tuple<V>>)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("variable {0} has no domain")]
    MissingDomain(VarId),
    #[error("relation {op}/{arity} is not registered")]
    UnresolvedOp { op: OpId, arity: usize },
    #[error("relation {op} has arity {arity} but scope has {scope_len} variables")]
    ArityMismatch {
        op: OpId,
        arity: usize,
        scope_len: usize,
    },
    #[error("variable {0} is unassigned")]
    Unassigned(VarId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("no binding for original variable {0}")]
    Missing(VarId),
    #[error("original variable {0} is bound to a tuple")]
    TupleForOriginal(VarId),
}

/// Domain of the hidden variable of `op` over `scope`: the tuples of the
/// scope's domains accepted by the relation.
///
/// Predicates are enumerated over the Cartesian product, leftmost variable
/// slowest. Tables keep their own row order, dropping rows with a component
/// outside its variable's domain.
pub fn expand<V: Value>(
    op: &OpId,
    arity: usize,
    scope: &[VarId],
    doms: &BTreeMap<VarId, Domain<V>>,
    reg: &Registry<V>,
) -> Result<Vec<Tuple<V>>, TranslateError> {
    let interp = reg
        .op(op, arity)
        .ok_or_else(|| TranslateError::UnresolvedOp {
            op: op.clone(),
            arity,
        })?;
    if scope.len() != arity {
        return Err(TranslateError::ArityMismatch {
            op: op.clone(),
            arity,
            scope_len: scope.len(),
        });
    }
    let domains = scope
        .iter()
        .map(|v| {
            doms.get(v)
                .ok_or_else(|| TranslateError::MissingDomain(v.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    match interp {
        Interpretation::Extension(table) => Ok(table
            .rows()
            .iter()
            .filter(|row| row.iter().zip(&domains).all(|(v, d)| d.contains(*v)))
            .map(|row| Tuple::from_list(row.clone()))
            .collect()),
        Interpretation::Intention(pred) => {
            let mut out = Vec::new();
            if domains.iter().any(|d| d.is_empty()) {
                return Ok(out);
            }
            let mut cursor = vec![0usize; arity];
            let mut values: Vec<V> = domains.iter().map(|d| d.values()[0]).collect();
            loop {
                if pred.call(&values) {
                    out.push(Tuple::from_list(values.clone()));
                }
                // odometer, rightmost fastest
                let mut pos = arity;
                loop {
                    if pos == 0 {
                        return Ok(out);
                    }
                    pos -= 1;
                    cursor[pos] += 1;
                    if cursor[pos] < domains[pos].len() {
                        values[pos] = domains[pos].values()[cursor[pos]];
                        break;
                    }
                    cursor[pos] = 0;
                    values[pos] = domains[pos].values()[0];
                }
            }
        }
    }
}

/// Splits the constraint list into binary-encoding constraints and hidden
/// variables with their domains. Binary constraints pass through; each n-ary
/// one yields a hidden variable and one projection per scope position.
pub fn encode_constraints<V: Value>(
    csts: &[Constraint],
    doms: &BTreeMap<VarId, Domain<V>>,
    reg: &Registry<V>,
) -> Result<(Vec<EncConstraint>, HiddenDomains<V>), TranslateError> {
    let mut out = Vec::new();
    let mut hidden = Vec::new();
    for c in csts {
        match c {
            Constraint::Bin(b) => out.push(EncConstraint::Basic(b.clone())),
            Constraint::Nary { op, arity, scope } => {
                let tuples = expand(op, *arity, scope, doms, reg)?;
                hidden.push((
                    EncVar::Hidden {
                        op: op.clone(),
                        arity: *arity,
                        scope: scope.clone(),
                    },
                    tuples,
                ));
                out.extend(
                    scope
                        .iter()
                        .enumerate()
                        .map(|(idx, var)| EncConstraint::Proj {
                            op: op.clone(),
                            arity: *arity,
                            scope: scope.clone(),
                            idx,
                            var: var.clone(),
                        }),
                );
            }
        }
    }
    Ok((out, hidden))
}

/// Adds the hidden variables' domains, as tuple values, to a domain map.
pub fn extend_domains<V>(
    mut raw: BTreeMap<EncVar, Vec<EncValue<V>>>,
    hidden: HiddenDomains<V>,
) -> BTreeMap<EncVar, Vec<EncValue<V>>> {
    for (var, tuples) in hidden {
        raw.insert(var, tuples.into_iter().map(EncValue::Tuple).collect());
    }
    raw
}

/// Encodes an n-ary network. Never fails on a well-formed network.
pub fn translate<V: Value>(
    net: &Network<V>,
    reg: &Registry<V>,
) -> Result<BinNetwork<V>, TranslateError> {
    let (csts, hidden) = encode_constraints(&net.csts, &net.doms, reg)?;
    let raw = net
        .vars
        .iter()
        .filter_map(|v| {
            let dom = net.doms.get(v)?;
            Some((
                EncVar::Original(v.clone()),
                dom.values().iter().copied().map(EncValue::Raw).collect(),
            ))
        })
        .collect();
    let vars = net
        .vars
        .iter()
        .cloned()
        .map(EncVar::Original)
        .chain(hidden.iter().map(|(v, _)| v.clone()))
        .collect();
    Ok(BinNetwork {
        vars,
        doms: extend_domains(raw, hidden),
        csts,
    })
}

/// Maps a total n-ary assignment onto the encoding: original variables keep
/// their values, each hidden variable takes the tuple of its scope's values.
pub fn encode_solution<V: Value>(
    a: &Assignment<V>,
    net: &Network<V>,
) -> Result<BinAssignment<V>, TranslateError> {
    let value = |v: &VarId| {
        a.get(v)
            .copied()
            .ok_or_else(|| TranslateError::Unassigned(v.clone()))
    };
    let mut out = BinAssignment::new();
    for v in &net.vars {
        out.insert(EncVar::Original(v.clone()), EncValue::Raw(value(v)?));
    }
    for c in &net.csts {
        if let Constraint::Nary { op, arity, scope } = c {
            let values = scope.iter().map(value).collect::<Result<Vec<_>, _>>()?;
            out.insert(
                EncVar::Hidden {
                    op: op.clone(),
                    arity: *arity,
                    scope: scope.clone(),
                },
                EncValue::Tuple(Tuple::from_list(values)),
            );
        }
    }
    Ok(out)
}

/// Reads the original variables back out of a binary assignment, dropping
/// hidden bindings.
pub fn decode_solution<V: Value>(
    b: &BinAssignment<V>,
    orig_vars: &[VarId],
) -> Result<Assignment<V>, DecodeError> {
    orig_vars
        .iter()
        .map(|v| match b.get(&EncVar::Original(v.clone())) {
            Some(EncValue::Raw(x)) => Ok((v.clone(), *x)),
            Some(EncValue::Tuple(_)) => Err(DecodeError::TupleForOriginal(v.clone())),
            None => Err(DecodeError::Missing(v.clone())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Interpretation;
    use crate::fixtures;

    fn tuples(rows: &[&[i64]]) -> Vec<Tuple<i64>> {
        rows.iter().map(|r| Tuple::from_list(r.to_vec())).collect()
    }

    fn op_of(c: &Constraint) -> (&OpId, usize, &[VarId]) {
        match c {
            Constraint::Nary { op, arity, scope } => (op, *arity, scope),
            Constraint::Bin(_) => panic!("binary"),
        }
    }

    #[test]
    fn expand_running_example() {
        let (net, reg) = fixtures::running_example::<i64>();
        let expanded: Vec<_> = net.csts[..4]
            .iter()
            .map(|c| {
                let (op, k, scope) = op_of(c);
                expand(op, k, scope, &net.doms, &reg).unwrap()
            })
            .collect();
        assert_eq!(expanded[0], tuples(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]));
        assert_eq!(
            expanded[1],
            tuples(&[
                &[0, 0, 0, 1],
                &[0, 1, 0, 0],
                &[0, 1, 1, 1],
                &[1, 0, 0, 0],
                &[1, 0, 1, 1],
                &[1, 1, 1, 0]
            ])
        );
        assert_eq!(
            expanded[2],
            tuples(&[&[0, 1, 0], &[1, 0, 0], &[1, 1, 0], &[1, 1, 1]])
        );
        assert_eq!(expanded[3], tuples(&[&[0, 0, 0], &[0, 1, 1], &[1, 0, 1]]));
    }

    #[test]
    fn expand_empty_domain_and_missing_domain() {
        let (mut net, reg) = fixtures::running_example::<i64>();
        net.doms.insert("x2".into(), Domain::empty());
        let (op, k, scope) = op_of(&net.csts[0]);
        assert!(expand(op, k, scope, &net.doms, &reg).unwrap().is_empty());
        net.doms.remove(&VarId::new("x2"));
        assert_eq!(
            expand(op, k, scope, &net.doms, &reg),
            Err(TranslateError::MissingDomain("x2".into()))
        );
    }

    #[test]
    fn expand_filters_tables_against_domains() {
        let mut reg = Registry::<i64>::new();
        let rows = vec![vec![0, 1, 0], vec![5, 0, 0], vec![1, 1, 1]];
        reg.register_op("t".into(), 3, Interpretation::extension(3, rows).unwrap())
            .unwrap();
        let doms: BTreeMap<VarId, Domain<i64>> = ["a", "b", "c"]
            .into_iter()
            .map(|v| (VarId::new(v), Domain::range(0, 1)))
            .collect();
        let scope = [VarId::new("a"), VarId::new("b"), VarId::new("c")];
        assert_eq!(
            expand(&"t".into(), 3, &scope, &doms, &reg).unwrap(),
            tuples(&[&[0, 1, 0], &[1, 1, 1]])
        );
    }

    #[test]
    fn encode_running_example() {
        let (net, reg) = fixtures::running_example::<i64>();
        let (csts, hidden) = encode_constraints(&net.csts, &net.doms, &reg).unwrap();
        assert_eq!(csts.len(), 14);
        assert_eq!(hidden.len(), 4);
        assert_eq!(
            csts.iter()
                .filter(|c| matches!(c, EncConstraint::Basic(_)))
                .count(),
            1
        );
        assert_eq!(
            csts[1],
            EncConstraint::Proj {
                op: "c1".into(),
                arity: 3,
                scope: vec!["x1".into(), "x2".into(), "x6".into()],
                idx: 1,
                var: "x2".into()
            }
        );

        let bin = translate(&net, &reg).unwrap();
        assert_eq!(bin.vars.len(), 10);
        assert_eq!(bin.doms.len(), 10);
        assert_eq!(bin.hidden_count(), 4);
        assert_eq!(bin.vars[6], EncVar::hidden("c1", ["x1", "x2", "x6"]));
    }

    #[test]
    fn pure_binary_network_is_wrapped() {
        let mut net = Network::<i64>::new();
        net.add_var("a", Domain::range(0, 2));
        net.add_var("b", Domain::range(1, 2));
        net.add_constraint(Constraint::bin("lt", "a", "b"));
        let mut reg = Registry::new();
        reg.register_basic(
            "lt".into(),
            Interpretation::intention(|v: &[i64]| v[0] < v[1]),
        )
        .unwrap();
        let bin = translate(&net, &reg).unwrap();
        assert_eq!(
            bin.vars,
            vec![EncVar::Original("a".into()), EncVar::Original("b".into())]
        );
        assert_eq!(
            bin.csts,
            vec![EncConstraint::Basic(BasicConstraint {
                id: "lt".into(),
                x: "a".into(),
                y: "b".into()
            })]
        );
        assert_eq!(
            bin.doms[&EncVar::Original("b".into())],
            vec![EncValue::Raw(1), EncValue::Raw(2)]
        );

        let a: Assignment<i64> = [("a".into(), 0), ("b".into(), 2)].into_iter().collect();
        let enc = encode_solution(&a, &net).unwrap();
        assert_eq!(enc.len(), 2);
        assert_eq!(enc[&EncVar::Original("b".into())], EncValue::Raw(2));
    }

    #[test]
    fn translation_fails_on_unknown_variable() {
        let (mut net, reg) = fixtures::running_example::<i64>();
        net.csts
            .push(Constraint::nary("c1", ["x1", "x2", "nowhere"]));
        assert_eq!(
            translate(&net, &reg),
            Err(TranslateError::MissingDomain("nowhere".into()))
        );
    }

    #[test]
    fn extend_domains_identity_and_union() {
        let raw: BTreeMap<EncVar, Vec<EncValue<i64>>> =
            [(EncVar::Original("a".into()), vec![EncValue::Raw(0)])]
                .into_iter()
                .collect();
        assert_eq!(extend_domains(raw.clone(), Vec::new()), raw);
        let h = EncVar::hidden("p", ["a", "b", "c"]);
        let out = extend_domains(raw, vec![(h.clone(), tuples(&[&[0, 0, 0]]))]);
        assert_eq!(out.len(), 2);
        assert_eq!(
            out[&h],
            vec![EncValue::Tuple(Tuple::from_list(vec![0, 0, 0]))]
        );
    }

    #[test]
    fn solution_roundtrip_running_example() {
        let (net, _) = fixtures::running_example::<i64>();
        let sol = fixtures::running_example_solution::<i64>();
        let enc = encode_solution(&sol, &net).unwrap();
        assert_eq!(
            enc[&EncVar::hidden("c1", ["x1", "x2", "x6"])],
            EncValue::Tuple(Tuple::from_list(vec![1, 0, 0]))
        );
        assert_eq!(decode_solution(&enc, &net.vars).unwrap(), sol);
        assert!(decode_solution(&enc, &[]).unwrap().is_empty());

        let mut partial = sol.clone();
        partial.remove(&VarId::new("x4"));
        assert_eq!(
            encode_solution(&partial, &net),
            Err(TranslateError::Unassigned("x4".into()))
        );

        let mut broken = enc.clone();
        broken.insert(
            EncVar::Original("x1".into()),
            EncValue::Tuple(Tuple::from_list(vec![1])),
        );
        assert_eq!(
            decode_solution(&broken, &net.vars),
            Err(DecodeError::TupleForOriginal("x1".into()))
        );
        broken.remove(&EncVar::Original("x1".into()));
        assert_eq!(
            decode_solution(&broken, &net.vars),
            Err(DecodeError::Missing("x1".into()))
        );
    }

    #[test]
    fn enc_var_order() {
        let o = EncVar::Original("zzz".into());
        let h = EncVar::hidden("a", ["a", "b", "c"]);
        assert!(o < h);
        assert!(EncVar::hidden("a", ["a", "b", "c"]) < EncVar::hidden("a", ["a", "b", "d"]));
    }
}
