//! A subset of XCSP 2.1: integer domains, extensional relations with
//! `supports` or `conflicts` semantics, and predicates written in the
//! functional syntax. Global constraints, soft constraints and the other
//! expression syntaxes are rejected as unsupported.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use hvecsp_core::csp::{check_network, Constraint, Interpretation, Predicate};
use hvecsp_core::{Domain, Network, Registry, Table};
use roxmltree::{Document, Node};

use crate::expr::Expr;
use crate::{predicate, DiagKind, Diagnostic, FaultCounter, IngestError, Model, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XcspDomain {
    pub name: String,
    pub values: Vec<i64>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XcspVariable {
    pub name: String,
    pub domain: String,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    Supports,
    Conflicts,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XcspRelation {
    pub name: String,
    pub arity: usize,
    pub semantics: Semantics,
    pub rows: Vec<Vec<i64>>,
    pub pos: Pos,
}

/// A predicate over its formal parameters, which the expression refers to
/// by position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XcspPredicate {
    pub name: String,
    pub params: Vec<String>,
    pub expr: Expr,
    pub pos: Pos,
}

/// An effective parameter of a predicate constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Var(String),
    Const(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XcspConstraint {
    pub name: String,
    pub arity: usize,
    pub scope: Vec<String>,
    pub reference: String,
    pub args: Vec<Arg>,
    pub pos: Pos,
}

/// A validated instance: every reference resolves and every arity matches.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XcspInstance {
    pub name: Option<String>,
    pub domains: Vec<XcspDomain>,
    pub variables: Vec<XcspVariable>,
    pub relations: Vec<XcspRelation>,
    pub predicates: Vec<XcspPredicate>,
    pub constraints: Vec<XcspConstraint>,
}

struct Ctx<'a> {
    doc: &'a Document<'a>,
}

impl Ctx<'_> {
    fn pos(&self, offset: usize) -> Pos {
        let p = self.doc.text_pos_at(offset);
        Pos {
            line: p.row,
            col: p.col,
        }
    }

    fn diag(&self, node: Node, kind: DiagKind) -> Diagnostic {
        Diagnostic {
            pos: self.pos(node.range().start),
            kind,
        }
    }

    fn attr<'n>(&self, node: Node<'n, '_>, name: &str) -> Result<&'n str, Diagnostic> {
        node.attribute(name).ok_or_else(|| {
            self.diag(
                node,
                DiagKind::Invalid(format!(
                    "<{}> lacks the `{name}` attribute",
                    node.tag_name().name()
                )),
            )
        })
    }

    fn count(&self, node: Node, name: &str) -> Result<Option<usize>, Diagnostic> {
        node.attribute(name)
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| self.diag(node, DiagKind::NotAnInteger(v.into())))
            })
            .transpose()
    }

    fn check_count(&self, node: Node, name: &str, found: usize) -> Result<(), Diagnostic> {
        match self.count(node, name)? {
            Some(expected) if expected != found => Err(self.diag(
                node,
                DiagKind::Mismatch {
                    what: format!("`{name}`"),
                    expected,
                    found,
                },
            )),
            _ => Ok(()),
        }
    }

    fn int(&self, node: Node, tok: &str) -> Result<i64, Diagnostic> {
        tok.parse()
            .map_err(|_| self.diag(node, DiagKind::NotAnInteger(tok.into())))
    }

    fn elements<'n, 'i>(
        &self,
        node: Node<'n, 'i>,
        tag: &str,
    ) -> Result<Vec<Node<'n, 'i>>, Diagnostic> {
        let mut out = Vec::new();
        for child in node.children().filter(Node::is_element) {
            if child.tag_name().name() != tag {
                return Err(self.diag(
                    child,
                    DiagKind::Unsupported(format!("element <{}>", child.tag_name().name())),
                ));
            }
            out.push(child);
        }
        Ok(out)
    }
}

fn unique<'a>(
    seen: &mut HashSet<&'a str>,
    name: &'a str,
    what: &'static str,
) -> Result<(), DiagKind> {
    if seen.insert(name) {
        Ok(())
    } else {
        Err(DiagKind::Duplicate {
            what,
            name: name.into(),
        })
    }
}

pub fn parse_xcsp(text: &str) -> Result<XcspInstance, Diagnostic> {
    let doc = Document::parse(text).map_err(|e| {
        let p = e.pos();
        Diagnostic {
            pos: Pos {
                line: p.row,
                col: p.col,
            },
            kind: DiagKind::Xml(e.to_string()),
        }
    })?;
    let cx = Ctx { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != "instance" {
        return Err(cx.diag(
            root,
            DiagKind::Invalid(format!(
                "expected <instance>, found <{}>",
                root.tag_name().name()
            )),
        ));
    }

    let mut inst = XcspInstance::default();
    let mut names = HashSet::new();
    let mut domain_names = HashSet::new();
    let mut relation_names = HashSet::new();

    for section in root.children().filter(Node::is_element) {
        match section.tag_name().name() {
            "presentation" => {
                if let Some(kind) = section.attribute("type") {
                    if kind != "CSP" {
                        return Err(cx.diag(
                            section,
                            DiagKind::Unsupported(format!("instance type `{kind}`")),
                        ));
                    }
                }
                inst.name = section.attribute("name").map(str::to_string);
            }
            "domains" => {
                let items = cx.elements(section, "domain")?;
                cx.check_count(section, "nbDomains", items.len())?;
                for d in items {
                    let name = cx.attr(d, "name")?;
                    unique(&mut domain_names, name, "domain").map_err(|k| cx.diag(d, k))?;
                    let mut values = Vec::new();
                    for tok in d.text().unwrap_or("").split_whitespace() {
                        match tok.split_once("..") {
                            Some((lo, hi)) => values.extend_from_slice(
                                Domain::range(cx.int(d, lo)?, cx.int(d, hi)?).values(),
                            ),
                            None => values.push(cx.int(d, tok)?),
                        }
                    }
                    let values = Domain::new(values).values().to_vec();
                    cx.check_count(d, "nbValues", values.len())?;
                    inst.domains.push(XcspDomain {
                        name: name.into(),
                        values,
                        pos: cx.pos(d.range().start),
                    });
                }
            }
            "variables" => {
                let items = cx.elements(section, "variable")?;
                cx.check_count(section, "nbVariables", items.len())?;
                for v in items {
                    let name = cx.attr(v, "name")?;
                    unique(&mut names, name, "variable").map_err(|k| cx.diag(v, k))?;
                    let domain = cx.attr(v, "domain")?;
                    if !domain_names.contains(domain) {
                        return Err(cx.diag(
                            v,
                            DiagKind::Unresolved {
                                what: "domain",
                                name: domain.into(),
                            },
                        ));
                    }
                    inst.variables.push(XcspVariable {
                        name: name.into(),
                        domain: domain.into(),
                        pos: cx.pos(v.range().start),
                    });
                }
            }
            "relations" => {
                let items = cx.elements(section, "relation")?;
                cx.check_count(section, "nbRelations", items.len())?;
                for r in items {
                    let name = cx.attr(r, "name")?;
                    unique(&mut relation_names, name, "relation").map_err(|k| cx.diag(r, k))?;
                    let arity = cx.count(r, "arity")?.ok_or_else(|| {
                        cx.diag(r, DiagKind::Invalid("relation lacks `arity`".into()))
                    })?;
                    let semantics = match cx.attr(r, "semantics")? {
                        "supports" => Semantics::Supports,
                        "conflicts" => Semantics::Conflicts,
                        other => {
                            return Err(cx.diag(
                                r,
                                DiagKind::Unsupported(format!("relation semantics `{other}`")),
                            ))
                        }
                    };
                    let mut rows = Vec::new();
                    for row in r.text().unwrap_or("").split('|') {
                        let row: Vec<i64> = row
                            .split_whitespace()
                            .map(|t| cx.int(r, t))
                            .collect::<Result<_, _>>()?;
                        if row.is_empty() {
                            continue;
                        }
                        if row.len() != arity {
                            return Err(cx.diag(
                                r,
                                DiagKind::Mismatch {
                                    what: format!("width of a row of `{name}`"),
                                    expected: arity,
                                    found: row.len(),
                                },
                            ));
                        }
                        rows.push(row);
                    }
                    cx.check_count(r, "nbTuples", rows.len())?;
                    inst.relations.push(XcspRelation {
                        name: name.into(),
                        arity,
                        semantics,
                        rows,
                        pos: cx.pos(r.range().start),
                    });
                }
            }
            "predicates" => {
                let items = cx.elements(section, "predicate")?;
                cx.check_count(section, "nbPredicates", items.len())?;
                for p in items {
                    inst.predicates
                        .push(parse_predicate(&cx, p, &mut relation_names)?);
                }
            }
            "constraints" => {
                let items = cx.elements(section, "constraint")?;
                cx.check_count(section, "nbConstraints", items.len())?;
                let mut seen = HashSet::new();
                for c in items {
                    let parsed = parse_constraint(&cx, c, &inst)?;
                    unique(&mut seen, c.attribute("name").unwrap_or(""), "constraint")
                        .map_err(|k| cx.diag(c, k))?;
                    inst.constraints.push(parsed);
                }
            }
            other => {
                return Err(cx.diag(section, DiagKind::Unsupported(format!("element <{other}>"))))
            }
        }
    }
    Ok(inst)
}

fn parse_predicate<'a>(
    cx: &Ctx,
    p: Node<'a, '_>,
    names: &mut HashSet<&'a str>,
) -> Result<XcspPredicate, Diagnostic> {
    let name = cx.attr(p, "name")?;
    unique(names, name, "relation or predicate").map_err(|k| cx.diag(p, k))?;
    let mut params = Vec::new();
    let mut expr = None;
    for child in p.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "parameters" => {
                let toks: Vec<&str> = child.text().unwrap_or("").split_whitespace().collect();
                for pair in toks.chunks(2) {
                    match pair {
                        ["int", formal] => params.push(formal.to_string()),
                        [ty, _] => {
                            return Err(cx.diag(
                                child,
                                DiagKind::Unsupported(format!("parameter type `{ty}`")),
                            ))
                        }
                        _ => {
                            return Err(cx.diag(
                                child,
                                DiagKind::Syntax("expected `int <name>` pairs".into()),
                            ))
                        }
                    }
                }
            }
            "expression" => {
                let mut forms = child.children().filter(Node::is_element);
                let Some(form) = forms.next() else {
                    return Err(cx.diag(child, DiagKind::Invalid("empty <expression>".into())));
                };
                if form.tag_name().name() != "functional" {
                    return Err(cx.diag(
                        form,
                        DiagKind::Unsupported(format!("<{}> expressions", form.tag_name().name())),
                    ));
                }
                let text_node = form.first_child().filter(Node::is_text);
                let text = form.text().unwrap_or("");
                let start = text_node.map_or(form.range().start, |t| t.range().start);
                let parsed = Expr::parse_condition(text, |id| params.iter().position(|f| f == id))
                    .map_err(|e| Diagnostic {
                        pos: cx.pos(start + e.offset),
                        kind: DiagKind::Expr(e.kind),
                    })?;
                expr = Some(parsed);
            }
            other => {
                return Err(cx.diag(child, DiagKind::Unsupported(format!("element <{other}>"))))
            }
        }
    }
    let expr = expr.ok_or_else(|| {
        cx.diag(
            p,
            DiagKind::Invalid(format!("predicate `{name}` has no expression")),
        )
    })?;
    Ok(XcspPredicate {
        name: name.into(),
        params,
        expr,
        pos: cx.pos(p.range().start),
    })
}

fn parse_constraint(cx: &Ctx, c: Node, inst: &XcspInstance) -> Result<XcspConstraint, Diagnostic> {
    let name = cx.attr(c, "name")?;
    let reference = cx.attr(c, "reference")?;
    let scope: Vec<String> = cx
        .attr(c, "scope")?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let arity = cx.count(c, "arity")?.unwrap_or(scope.len());
    if arity != scope.len() {
        return Err(cx.diag(
            c,
            DiagKind::Mismatch {
                what: format!("scope length of `{name}`"),
                expected: arity,
                found: scope.len(),
            },
        ));
    }
    for v in &scope {
        if !inst.variables.iter().any(|x| &x.name == v) {
            return Err(cx.diag(
                c,
                DiagKind::Unresolved {
                    what: "variable",
                    name: v.clone(),
                },
            ));
        }
    }
    if reference.starts_with("global:") {
        return Err(cx.diag(
            c,
            DiagKind::Unsupported(format!("global constraint `{reference}`")),
        ));
    }

    let mut args = Vec::new();
    if let Some(rel) = inst.relations.iter().find(|r| r.name == reference) {
        if rel.arity != arity {
            return Err(cx.diag(
                c,
                DiagKind::Mismatch {
                    what: format!("arity of `{reference}`"),
                    expected: arity,
                    found: rel.arity,
                },
            ));
        }
    } else if let Some(pred) = inst.predicates.iter().find(|p| p.name == reference) {
        let params = c.children().find(|n| n.has_tag_name("parameters"));
        let text = params.and_then(|p| p.text()).unwrap_or("");
        for tok in text.split_whitespace() {
            args.push(match tok.parse() {
                Ok(v) => Arg::Const(v),
                Err(_) if scope.iter().any(|s| s == tok) => Arg::Var(tok.into()),
                Err(_) => {
                    return Err(cx.diag(
                        c,
                        DiagKind::Unresolved {
                            what: "scope variable",
                            name: tok.into(),
                        },
                    ))
                }
            });
        }
        if args.len() != pred.params.len() {
            return Err(cx.diag(
                c,
                DiagKind::Mismatch {
                    what: format!("parameters of `{reference}`"),
                    expected: pred.params.len(),
                    found: args.len(),
                },
            ));
        }
    } else {
        return Err(cx.diag(
            c,
            DiagKind::Unresolved {
                what: "relation or predicate",
                name: reference.into(),
            },
        ));
    }
    Ok(XcspConstraint {
        name: name.into(),
        arity,
        scope,
        reference: reference.into(),
        args,
        pos: cx.pos(c.range().start),
    })
}

/// Builds the network. Supports relations become tables, conflicts
/// relations and predicates become predicates. The result must be
/// well-formed; non-normalized instances are rejected, not merged.
pub fn lower_to_network(inst: &XcspInstance) -> Result<Model, IngestError> {
    let mut network = Network::new();
    let mut registry = Registry::new();
    let faults = FaultCounter::default();

    let domains: HashMap<&str, &XcspDomain> =
        inst.domains.iter().map(|d| (d.name.as_str(), d)).collect();
    for v in &inst.variables {
        network.add_var(
            v.name.as_str(),
            Domain::new(domains[v.domain.as_str()].values.iter().copied()),
        );
    }

    let mut tables: HashMap<&str, Arc<Table>> = HashMap::new();
    for r in &inst.relations {
        let table = Table::new(r.arity, r.rows.clone()).map_err(|e| Diagnostic {
            pos: r.pos,
            kind: DiagKind::Invalid(format!("relation `{}`: {e}", r.name)),
        })?;
        tables.insert(&r.name, Arc::new(table));
    }

    for c in &inst.constraints {
        let interp = if let Some(r) = inst.relations.iter().find(|r| r.name == c.reference) {
            let table = tables[r.name.as_str()].clone();
            match r.semantics {
                Semantics::Supports => Interpretation::Extension(table),
                Semantics::Conflicts => {
                    Interpretation::Intention(Predicate::new(move |vs: &[i64]| !table.contains(vs)))
                }
            }
        } else {
            let pred = inst
                .predicates
                .iter()
                .find(|p| p.name == c.reference)
                .expect("validated reference");
            let actual: Vec<Expr> = c
                .args
                .iter()
                .map(|a| match a {
                    Arg::Const(v) => Expr::Int(*v),
                    Arg::Var(v) => Expr::Param(
                        c.scope
                            .iter()
                            .position(|s| s == v)
                            .expect("validated argument"),
                    ),
                })
                .collect();
            Interpretation::Intention(predicate(pred.expr.substitute(&actual), &faults))
        };

        let registered = if let [x, y] = &c.scope[..] {
            network.add_constraint(Constraint::bin(c.name.as_str(), x.as_str(), y.as_str()));
            registry.register_basic(c.name.as_str().into(), interp)
        } else {
            network.add_constraint(Constraint::nary(
                c.name.as_str(),
                c.scope.iter().map(String::as_str),
            ));
            registry.register_op(c.name.as_str().into(), c.scope.len(), interp)
        };
        registered.map_err(|e| Diagnostic {
            pos: c.pos,
            kind: DiagKind::Invalid(format!("constraint `{}`: {e}", c.name)),
        })?;
    }

    let report = check_network(&network, &registry);
    if !report.is_ok() {
        return Err(IngestError::IllFormed(report));
    }
    Ok(Model {
        network,
        registry,
        faults,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<instance>
  <presentation name="minimal" format="XCSP 2.1"/>
  <domains nbDomains="1"><domain name="D" nbValues="2">0..1</domain></domains>
  <variables nbVariables="3">
    <variable name="a" domain="D"/><variable name="b" domain="D"/><variable name="c" domain="D"/>
  </variables>
  <relations nbRelations="1">
    <relation name="R" arity="3" nbTuples="1" semantics="supports">0 1 0</relation>
  </relations>
  <constraints nbConstraints="1">
    <constraint name="C" arity="3" scope="a b c" reference="R"/>
  </constraints>
</instance>"#;

    fn err(text: &str) -> Diagnostic {
        parse_xcsp(text).unwrap_err()
    }

    #[test]
    fn minimal_instance() {
        let inst = parse_xcsp(MINIMAL).unwrap();
        assert_eq!(inst.name.as_deref(), Some("minimal"));
        let m = lower_to_network(&inst).unwrap();
        assert_eq!(m.network.vars.len(), 3);
        assert_eq!(m.network.csts, vec![Constraint::nary("C", ["a", "b", "c"])]);
        assert!(matches!(
            m.registry.op(&"C".into(), 3),
            Some(Interpretation::Extension(_))
        ));
    }

    #[test]
    fn row_width_mismatch() {
        let d = err(&MINIMAL
            .replace(">0 1 0<", ">0 1 0|1 1<")
            .replace("nbTuples=\"1\"", "nbTuples=\"2\""));
        assert!(
            matches!(
                d.kind,
                DiagKind::Mismatch {
                    expected: 3,
                    found: 2,
                    ..
                }
            ),
            "{d}"
        );
        assert_eq!(d.pos.line, 9);
    }

    #[test]
    fn diagnostics() {
        assert!(matches!(err("<instance><domains>").kind, DiagKind::Xml(_)));
        assert!(matches!(
            err(&MINIMAL.replace("0..1", "0..x")).kind,
            DiagKind::NotAnInteger(_)
        ));
        assert!(matches!(
            err(&MINIMAL.replace("reference=\"R\"", "reference=\"Q\"")).kind,
            DiagKind::Unresolved { .. }
        ));
        assert!(matches!(
            err(&MINIMAL.replace("scope=\"a b c\"", "scope=\"a b z\"")).kind,
            DiagKind::Unresolved { .. }
        ));
        assert!(matches!(
            err(&MINIMAL.replace("arity=\"3\" scope", "arity=\"2\" scope")).kind,
            DiagKind::Mismatch { .. }
        ));
        assert!(matches!(
            err(&MINIMAL.replace("nbValues=\"2\"", "nbValues=\"3\"")).kind,
            DiagKind::Mismatch { .. }
        ));
        assert!(matches!(
            err(&MINIMAL.replace("\"supports\"", "\"soft\"")).kind,
            DiagKind::Unsupported(_)
        ));
        assert!(matches!(
            err(&MINIMAL.replace("reference=\"R\"", "reference=\"global:allDifferent\"")).kind,
            DiagKind::Unsupported(_)
        ));
        assert!(matches!(
            err(&MINIMAL.replace("<constraints", "<functions/><constraints")).kind,
            DiagKind::Unsupported(_)
        ));
    }
}
