//! The native line format.
//!
//! ```text
//! # comment
//! var x 0..3            # or an explicit list: var x 0 2 5
//! table t 3 0 0 1;0 1 0;1 0 0
//! con c1 ext t x y z
//! con c2 int eq(add(x,y),z) x y z
//! ```
//!
//! Identifiers in `int` expressions name variables of the constraint's scope.
//! Constraints over two variables become binary constraints, the others
//! n-ary ones. The network is returned as written, without a
//! well-formedness check.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use hvecsp_core::csp::{Constraint, Interpretation};
use hvecsp_core::{Domain, Network, Registry, Table};
use thiserror::Error;

use crate::expr::Expr;
use crate::{predicate, DiagKind, Diagnostic, FaultCounter, Model, Pos};

struct Line<'a> {
    no: u32,
    text: &'a str,
    pos: usize,
}

impl<'a> Line<'a> {
    fn at(&self, offset: usize) -> Pos {
        Pos {
            line: self.no,
            col: self.text[..offset.min(self.text.len())].chars().count() as u32 + 1,
        }
    }

    fn diag(&self, offset: usize, kind: DiagKind) -> Diagnostic {
        Diagnostic {
            pos: self.at(offset),
            kind,
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn token(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some((start, &rest[..len]))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), Diagnostic> {
        let end = self.text.len();
        self.token()
            .ok_or_else(|| self.diag(end, DiagKind::Syntax(format!("expected {what}"))))
    }

    fn rest(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        self.pos = self.text.len();
        (start, &self.text[start..])
    }

    /// An expression token: up to the first whitespace outside parentheses.
    fn expr(&mut self) -> Result<(usize, &'a str), Diagnostic> {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0i32;
        for (i, c) in self.text[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                c if c.is_whitespace() && depth <= 0 => {
                    self.pos = start + i;
                    return Ok((start, &self.text[start..self.pos]));
                }
                _ => {}
            }
        }
        self.pos = self.text.len();
        if start == self.pos {
            return Err(self.diag(start, DiagKind::Syntax("expected an expression".into())));
        }
        Ok((start, &self.text[start..]))
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn int(line: &Line, offset: usize, tok: &str) -> Result<i64, Diagnostic> {
    tok.parse()
        .map_err(|_| line.diag(offset, DiagKind::NotAnInteger(tok.into())))
}

/// Values of a `var` token: an integer or an inclusive range `lo..hi`.
fn values(line: &Line, offset: usize, tok: &str) -> Result<Vec<i64>, Diagnostic> {
    match tok.split_once("..") {
        Some((lo, hi)) => {
            let lo = int(line, offset, lo)?;
            let hi = int(line, offset + tok.find("..").unwrap_or(0) + 2, hi)?;
            Ok(Domain::range(lo, hi).values().to_vec())
        }
        None => Ok(vec![int(line, offset, tok)?]),
    }
}

pub fn parse_native(text: &str) -> Result<Model, Diagnostic> {
    let mut network = Network::new();
    let mut registry = Registry::new();
    let faults = FaultCounter::default();
    let mut tables: HashMap<&str, Arc<Table>> = HashMap::new();
    let mut constraints: HashSet<&str> = HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut line = Line {
            no: i as u32 + 1,
            text: body,
            pos: 0,
        };
        let Some((off, keyword)) = line.token() else {
            continue;
        };
        match keyword {
            "var" => {
                let (noff, name) = line.expect("a variable name")?;
                if !is_identifier(name) {
                    return Err(line.diag(
                        noff,
                        DiagKind::Invalid(format!("`{name}` is not a valid variable name")),
                    ));
                }
                if network.doms.contains_key(&name.into()) {
                    return Err(line.diag(
                        noff,
                        DiagKind::Duplicate {
                            what: "variable",
                            name: name.into(),
                        },
                    ));
                }
                let mut vals = Vec::new();
                while let Some((voff, tok)) = line.token() {
                    vals.extend(values(&line, voff, tok)?);
                }
                network.add_var(name, Domain::new(vals));
            }
            "table" => {
                let (noff, name) = line.expect("a table name")?;
                let (aoff, arity) = line.expect("an arity")?;
                let arity: usize = arity.parse().map_err(|_| {
                    line.diag(
                        aoff,
                        DiagKind::Invalid(format!("`{arity}` is not an arity")),
                    )
                })?;
                let (roff, rest) = line.rest();
                let mut rows = Vec::new();
                let mut at = roff;
                for chunk in rest.split(';') {
                    let mut cells = Line {
                        no: line.no,
                        text: &body[..at + chunk.len()],
                        pos: at,
                    };
                    let mut row = Vec::new();
                    while let Some((coff, tok)) = cells.token() {
                        row.push(int(&line, coff, tok)?);
                    }
                    if !row.is_empty() {
                        rows.push(row);
                    }
                    at += chunk.len() + 1;
                }
                let table = Table::new(arity, rows)
                    .map_err(|e| line.diag(roff, DiagKind::Invalid(e.to_string())))?;
                if tables.insert(name, Arc::new(table)).is_some() {
                    return Err(line.diag(
                        noff,
                        DiagKind::Duplicate {
                            what: "table",
                            name: name.into(),
                        },
                    ));
                }
            }
            "con" => {
                let (noff, name) = line.expect("a constraint name")?;
                if !constraints.insert(name) {
                    return Err(line.diag(
                        noff,
                        DiagKind::Duplicate {
                            what: "constraint",
                            name: name.into(),
                        },
                    ));
                }
                let (koff, kind) = line.expect("`ext` or `int`")?;
                let (interp, scope) = match kind {
                    "ext" => {
                        let (toff, table) = line.expect("a table name")?;
                        let table = tables.get(table).ok_or_else(|| {
                            line.diag(
                                toff,
                                DiagKind::Unresolved {
                                    what: "table",
                                    name: table.into(),
                                },
                            )
                        })?;
                        let scope: Vec<&str> = std::iter::from_fn(|| line.token())
                            .map(|(_, t)| t)
                            .collect();
                        (Interpretation::Extension(table.clone()), scope)
                    }
                    "int" => {
                        let (eoff, text) = line.expr()?;
                        let scope: Vec<&str> = std::iter::from_fn(|| line.token())
                            .map(|(_, t)| t)
                            .collect();
                        let expr =
                            Expr::parse_condition(text, |id| scope.iter().position(|s| *s == id))
                                .map_err(|e| line.diag(eoff + e.offset, DiagKind::Expr(e.kind)))?;
                        (Interpretation::Intention(predicate(expr, &faults)), scope)
                    }
                    other => {
                        return Err(line.diag(
                            koff,
                            DiagKind::Syntax(format!("expected `ext` or `int`, found `{other}`")),
                        ))
                    }
                };
                let registered = if let [x, y] = scope[..] {
                    network.add_constraint(Constraint::bin(name, x, y));
                    registry.register_basic(name.into(), interp)
                } else {
                    network.add_constraint(Constraint::nary(name, scope.iter().copied()));
                    registry.register_op(name.into(), scope.len(), interp)
                };
                registered.map_err(|e| {
                    line.diag(noff, DiagKind::Invalid(format!("constraint `{name}`: {e}")))
                })?;
            }
            other => {
                return Err(line.diag(
                    off,
                    DiagKind::Syntax(format!("unknown directive `{other}`")),
                ))
            }
        }
    }
    Ok(Model {
        network,
        registry,
        faults,
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmitError {
    #[error("variable `{0}` has no domain")]
    MissingDomain(String),
    #[error("`{0}` cannot be written in the native format")]
    BadName(String),
    #[error("constraint `{0}` is not registered")]
    Unresolved(String),
    #[error("constraint `{0}` declares an arity different from its scope length")]
    ArityMismatch(String),
    #[error("constraint `{0}` has a predicate without a printable formula")]
    Opaque(String),
}

/// Prints a network in the native format. Variables come first in declared
/// order, then each constraint in order, preceded by its table if it is
/// extensional. Reparsing the output yields the same network.
pub fn emit_native(net: &Network, reg: &Registry) -> Result<String, EmitError> {
    let mut out = String::new();
    for v in &net.vars {
        if !is_identifier(v.as_str()) {
            return Err(EmitError::BadName(v.to_string()));
        }
        let dom = net
            .doms
            .get(v)
            .ok_or_else(|| EmitError::MissingDomain(v.to_string()))?;
        out.push_str("var ");
        out.push_str(v.as_str());
        match dom.values() {
            [lo, .., hi] if dom.is_interval() => out.push_str(&format!(" {lo}..{hi}")),
            vals => vals.iter().for_each(|x| out.push_str(&format!(" {x}"))),
        }
        out.push('\n');
    }

    for c in &net.csts {
        let (name, interp, scope): (&str, _, Vec<&str>) = match c {
            Constraint::Bin(b) => (
                b.id.as_str(),
                reg.basic(&b.id),
                vec![b.x.as_str(), b.y.as_str()],
            ),
            Constraint::Nary { op, arity, scope } => {
                if *arity != scope.len() {
                    return Err(EmitError::ArityMismatch(op.to_string()));
                }
                (
                    op.as_str(),
                    reg.op(op, *arity),
                    scope.iter().map(|v| v.as_str()).collect(),
                )
            }
        };
        if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == '#') {
            return Err(EmitError::BadName(name.into()));
        }
        let interp = interp.ok_or_else(|| EmitError::Unresolved(name.into()))?;
        match interp {
            Interpretation::Extension(table) => {
                out.push_str(&format!("table {name} {}", table.arity()));
                let rows: Vec<String> = table
                    .rows()
                    .iter()
                    .map(|r| r.iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
                    .collect();
                if !rows.is_empty() {
                    out.push(' ');
                    out.push_str(&rows.join(";"));
                }
                out.push_str(&format!("\ncon {name} ext {name}"));
            }
            Interpretation::Intention(p) => {
                let expr = p
                    .formula()
                    .and_then(|f| Expr::parse_positional(f).ok())
                    .filter(|e| e.max_param().is_none_or(|m| m < scope.len()))
                    .ok_or_else(|| EmitError::Opaque(name.into()))?;
                let text = expr.render(&|i| scope[i].to_string());
                out.push_str(&format!("con {name} int {text}"));
            }
        }
        for v in &scope {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hvecsp_core::csp::check_network;

    #[test]
    fn empty_input() {
        let m = parse_native("").unwrap();
        assert!(m.network.vars.is_empty() && m.network.csts.is_empty());
        let m = parse_native("# nothing\n\n   \n").unwrap();
        assert!(m.network.vars.is_empty());
    }

    #[test]
    fn small_network() {
        let m = parse_native("var a 0..2\nvar b 5 1 3\nvar c\ntable t 3 0 1 5;2 3 1\ncon k ext t a b c\ncon e int lt(a,b) a b").unwrap();
        assert_eq!(m.network.doms[&"a".into()].values(), &[0, 1, 2]);
        assert_eq!(m.network.doms[&"b".into()].values(), &[1, 3, 5]);
        assert!(m.network.doms[&"c".into()].is_empty());
        assert_eq!(m.network.csts[0], Constraint::nary("k", ["a", "b", "c"]));
        assert_eq!(m.network.csts[1], Constraint::bin("e", "a", "b"));
        let t = m.registry.op(&"k".into(), 3).unwrap();
        assert!(t.holds(&[2, 3, 1]) && !t.holds(&[0, 1, 1]));
        assert!(m.registry.basic(&"e".into()).unwrap().holds(&[0, 1]));
    }

    #[test]
    fn expressions_may_contain_spaces() {
        let m = parse_native("var a 0..1\nvar b 0..1\ncon e int ne( a , b ) a b").unwrap();
        let p = m.registry.basic(&"e".into()).unwrap();
        assert!(p.holds(&[0, 1]) && !p.holds(&[1, 1]));
    }

    #[test]
    fn returned_unchecked() {
        let m =
            parse_native("var a 0..1\nvar b 0..1\ncon p int eq(a,b) a b\ncon q int ne(b,a) b a")
                .unwrap();
        let report = check_network(&m.network, &m.registry);
        assert_eq!(report.violations().len(), 1);
        assert_eq!(report.violations()[0].clause(), 'b');
    }

    #[test]
    fn diagnostics() {
        let err = |s: &str| parse_native(s).unwrap_err();
        let d = err("var a 0..1\nvar a 0..1");
        assert_eq!(d.pos, Pos { line: 2, col: 5 });
        assert!(matches!(
            d.kind,
            DiagKind::Duplicate {
                what: "variable",
                ..
            }
        ));
        assert!(matches!(err("var a x").kind, DiagKind::NotAnInteger(_)));
        assert!(matches!(err("frob").kind, DiagKind::Syntax(_)));
        assert!(matches!(
            err("con c ext t a b").kind,
            DiagKind::Unresolved { what: "table", .. }
        ));
        assert!(matches!(err("table t 2 0 1;1").kind, DiagKind::Invalid(_)));
        assert!(matches!(
            err("table t 2 0 1;0 1").kind,
            DiagKind::Invalid(_)
        ));
        let d = err("var a 0..1\ncon c int eq(a,zz) a");
        assert_eq!(d.pos, Pos { line: 2, col: 16 });
        assert!(matches!(d.kind, DiagKind::Expr(_)));
        assert!(matches!(
            err("con c int add(a,a) a").kind,
            DiagKind::Expr(_)
        ));
        assert!(matches!(
            err("con c int lt(a,b) a b\ncon c int lt(a,b) a b").kind,
            DiagKind::Duplicate { .. }
        ));
        assert!(matches!(
            err("table t 3 0 1 0\ncon c ext t a b").kind,
            DiagKind::Invalid(_)
        ));
    }

    #[test]
    fn emit_normal_form() {
        let text = "var a 0 1 2\nvar b 1 3\ntable t 2 0 1;2 3\ncon k ext t a b\n";
        let m = parse_native(text).unwrap();
        assert_eq!(
            emit_native(&m.network, &m.registry).unwrap(),
            "var a 0..2\nvar b 1 3\ntable k 2 0 1;2 3\ncon k ext k a b\n"
        );
    }
}
