//! Prefix functional expressions such as `eq(add(X0,X1),X2)`.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Neg,
    Abs,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Min,
    Max,
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
    And,
    Or,
    Not,
}

const OPS: [(Op, &str); 18] = [
    (Op::Neg, "neg"),
    (Op::Abs, "abs"),
    (Op::Add, "add"),
    (Op::Sub, "sub"),
    (Op::Mul, "mul"),
    (Op::Div, "div"),
    (Op::Mod, "mod"),
    (Op::Min, "min"),
    (Op::Max, "max"),
    (Op::Eq, "eq"),
    (Op::Ne, "ne"),
    (Op::Ge, "ge"),
    (Op::Gt, "gt"),
    (Op::Le, "le"),
    (Op::Lt, "lt"),
    (Op::And, "and"),
    (Op::Or, "or"),
    (Op::Not, "not"),
];

impl Op {
    pub fn from_name(name: &str) -> Option<Op> {
        OPS.iter().find(|(_, n)| *n == name).map(|(op, _)| *op)
    }

    pub fn name(self) -> &'static str {
        OPS.iter()
            .find(|(op, _)| *op == self)
            .map(|(_, n)| *n)
            .unwrap_or("?")
    }

    pub fn arity(self) -> usize {
        match self {
            Op::Neg | Op::Abs | Op::Not => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ty {
    Int,
    Bool,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ty::Int => "integer",
            Ty::Bool => "boolean",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Val {
    Int(i64),
    Bool(bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum EvalFault {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExprErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported feature: operator `{0}`")]
    Unsupported(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{op}` takes {expected} argument(s), found {found}")]
    Arity {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("type error: {0}")]
    Type(String),
}

/// An expression error at a byte offset of the expression text.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} (at offset {offset})")]
pub struct ExprError {
    pub offset: usize,
    pub kind: ExprErrorKind,
}

/// Expression tree. Parameters are positional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Param(usize),
    Apply(Op, Vec<Expr>),
}

impl Expr {
    /// Parses prefix syntax, resolving identifiers to parameter indices.
    pub fn parse(text: &str, resolve: impl Fn(&str) -> Option<usize>) -> Result<Expr, ExprError> {
        let mut p = Parser {
            text,
            pos: 0,
            resolve: &resolve,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error(ExprErrorKind::Syntax("trailing input".into())));
        }
        Ok(e)
    }

    /// Parses with `X0`, `X1`, ... as positional parameters.
    pub fn parse_positional(text: &str) -> Result<Expr, ExprError> {
        Self::parse(text, |name| {
            name.strip_prefix('X').and_then(|i| i.parse().ok())
        })
    }

    /// Parses and requires a boolean result.
    pub fn parse_condition(
        text: &str,
        resolve: impl Fn(&str) -> Option<usize>,
    ) -> Result<Expr, ExprError> {
        let e = Self::parse(text, resolve)?;
        match e.ty() {
            Ok(Ty::Bool) => Ok(e),
            Ok(Ty::Int) => Err(ExprError {
                offset: 0,
                kind: ExprErrorKind::Type("expression is an integer, expected a condition".into()),
            }),
            Err(msg) => Err(ExprError {
                offset: 0,
                kind: ExprErrorKind::Type(msg),
            }),
        }
    }

    pub fn ty(&self) -> Result<Ty, String> {
        let Expr::Apply(op, args) = self else {
            return Ok(Ty::Int);
        };
        let tys = args.iter().map(Expr::ty).collect::<Result<Vec<_>, _>>()?;
        let expect = |want: Ty| match tys.iter().find(|t| **t != want) {
            Some(t) => Err(format!("`{}` expects {want} arguments, got {t}", op.name())),
            None => Ok(()),
        };
        match op {
            Op::Neg
            | Op::Abs
            | Op::Add
            | Op::Sub
            | Op::Mul
            | Op::Div
            | Op::Mod
            | Op::Min
            | Op::Max => {
                expect(Ty::Int)?;
                Ok(Ty::Int)
            }
            Op::Ge | Op::Gt | Op::Le | Op::Lt => {
                expect(Ty::Int)?;
                Ok(Ty::Bool)
            }
            Op::Eq | Op::Ne => {
                expect(tys[0])?;
                Ok(Ty::Bool)
            }
            Op::And | Op::Or | Op::Not => {
                expect(Ty::Bool)?;
                Ok(Ty::Bool)
            }
        }
    }

    /// Largest parameter index used, if any.
    pub fn max_param(&self) -> Option<usize> {
        match self {
            Expr::Int(_) => None,
            Expr::Param(i) => Some(*i),
            Expr::Apply(_, args) => args.iter().filter_map(Expr::max_param).max(),
        }
    }

    /// Replaces each parameter `i` by `args[i]`.
    pub fn substitute(&self, args: &[Expr]) -> Expr {
        match self {
            Expr::Int(v) => Expr::Int(*v),
            Expr::Param(i) => args[*i].clone(),
            Expr::Apply(op, xs) => {
                Expr::Apply(*op, xs.iter().map(|x| x.substitute(args)).collect())
            }
        }
    }

    /// Checked evaluation. Division and modulo truncate toward zero.
    pub fn eval(&self, params: &[i64]) -> Result<Val, EvalFault> {
        let int = |e: &Expr| match e.eval(params)? {
            Val::Int(v) => Ok(v),
            Val::Bool(b) => Ok(b as i64),
        };
        let boolean = |e: &Expr| match e.eval(params)? {
            Val::Bool(b) => Ok(b),
            Val::Int(v) => Ok(v != 0),
        };
        let (op, args) = match self {
            Expr::Int(v) => return Ok(Val::Int(*v)),
            Expr::Param(i) => return Ok(Val::Int(params[*i])),
            Expr::Apply(op, args) => (*op, args),
        };
        let arith = |f: fn(i64, i64) -> Option<i64>| -> Result<Val, EvalFault> {
            f(int(&args[0])?, int(&args[1])?)
                .map(Val::Int)
                .ok_or(EvalFault::Overflow)
        };
        let cmp = |f: fn(&i64, &i64) -> bool| -> Result<Val, EvalFault> {
            Ok(Val::Bool(f(&int(&args[0])?, &int(&args[1])?)))
        };
        match op {
            Op::Neg => int(&args[0])?
                .checked_neg()
                .map(Val::Int)
                .ok_or(EvalFault::Overflow),
            Op::Abs => int(&args[0])?
                .checked_abs()
                .map(Val::Int)
                .ok_or(EvalFault::Overflow),
            Op::Add => arith(i64::checked_add),
            Op::Sub => arith(i64::checked_sub),
            Op::Mul => arith(i64::checked_mul),
            Op::Div | Op::Mod => {
                let (a, b) = (int(&args[0])?, int(&args[1])?);
                if b == 0 {
                    return Err(EvalFault::DivisionByZero);
                }
                let r = if op == Op::Div {
                    a.checked_div(b)
                } else {
                    a.checked_rem(b)
                };
                r.map(Val::Int).ok_or(EvalFault::Overflow)
            }
            Op::Min => arith(|a, b| Some(a.min(b))),
            Op::Max => arith(|a, b| Some(a.max(b))),
            Op::Eq | Op::Ne => {
                let same = match (args[0].eval(params)?, args[1].eval(params)?) {
                    (Val::Bool(a), Val::Bool(b)) => a == b,
                    (a, b) => int_of(a) == int_of(b),
                };
                Ok(Val::Bool(same == (op == Op::Eq)))
            }
            Op::Ge => cmp(i64::ge),
            Op::Gt => cmp(i64::gt),
            Op::Le => cmp(i64::le),
            Op::Lt => cmp(i64::lt),
            Op::And => Ok(Val::Bool(boolean(&args[0])? && boolean(&args[1])?)),
            Op::Or => Ok(Val::Bool(boolean(&args[0])? || boolean(&args[1])?)),
            Op::Not => Ok(Val::Bool(!boolean(&args[0])?)),
        }
    }

    /// Writes the expression with parameter names supplied by `name`.
    pub fn write_with(&self, out: &mut String, name: &dyn Fn(usize) -> String) {
        match self {
            Expr::Int(v) => out.push_str(&v.to_string()),
            Expr::Param(i) => out.push_str(&name(*i)),
            Expr::Apply(op, args) => {
                out.push_str(op.name());
                out.push('(');
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    a.write_with(out, name);
                }
                out.push(')');
            }
        }
    }

    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut s = String::new();
        self.write_with(&mut s, name);
        s
    }
}

fn int_of(v: Val) -> i64 {
    match v {
        Val::Int(v) => v,
        Val::Bool(b) => b as i64,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|i| format!("X{i}")))
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl Parser<'_> {
    fn error(&self, kind: ExprErrorKind) -> ExprError {
        ExprError {
            offset: self.pos,
            kind,
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += self.peek().map_or(0, char::len_utf8);
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += self.peek().map_or(0, char::len_utf8);
        }
        &self.text[start..self.pos]
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' => {
                self.pos += 1;
                self.take_while(|c| c.is_ascii_digit());
                let lit = &self.text[start..self.pos];
                lit.parse().map(Expr::Int).map_err(|_| ExprError {
                    offset: start,
                    kind: ExprErrorKind::Syntax(format!("bad integer `{lit}`")),
                })
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let name = self
                    .take_while(|c| c.is_alphanumeric() || c == '_')
                    .to_string();
                self.skip_ws();
                if self.peek() != Some('(') {
                    return (self.resolve)(&name).map(Expr::Param).ok_or(ExprError {
                        offset: start,
                        kind: ExprErrorKind::UnknownIdentifier(name),
                    });
                }
                let op = Op::from_name(&name).ok_or(ExprError {
                    offset: start,
                    kind: ExprErrorKind::Unsupported(name.clone()),
                })?;
                self.pos += 1;
                let mut args = vec![self.expr()?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => {
                            self.pos += 1;
                            args.push(self.expr()?);
                        }
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => {
                            return Err(
                                self.error(ExprErrorKind::Syntax("expected `,` or `)`".into()))
                            )
                        }
                    }
                }
                if args.len() != op.arity() {
                    return Err(ExprError {
                        offset: start,
                        kind: ExprErrorKind::Arity {
                            op: op.name(),
                            expected: op.arity(),
                            found: args.len(),
                        },
                    });
                }
                Ok(Expr::Apply(op, args))
            }
            Some(c) => Err(self.error(ExprErrorKind::Syntax(format!("unexpected `{c}`")))),
            None => Err(self.error(ExprErrorKind::Syntax("unexpected end of expression".into()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse_positional(s).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let e = p(" eq( add(X0 , X1) ,X2 )");
        assert_eq!(e.to_string(), "eq(add(X0,X1),X2)");
        assert_eq!(e.ty(), Ok(Ty::Bool));
        assert_eq!(e.max_param(), Some(2));
        assert_eq!(p("neg(-3)").to_string(), "neg(-3)");
    }

    #[test]
    fn evaluation() {
        let e = p("eq(add(X0,X1),X2)");
        assert_eq!(e.eval(&[1, 2, 3]), Ok(Val::Bool(true)));
        assert_eq!(e.eval(&[1, 2, 4]), Ok(Val::Bool(false)));
        assert_eq!(p("div(-7,2)").eval(&[]), Ok(Val::Int(-3)));
        assert_eq!(p("mod(-7,2)").eval(&[]), Ok(Val::Int(-1)));
        assert_eq!(p("max(abs(-4),min(2,9))").eval(&[]), Ok(Val::Int(4)));
        assert_eq!(
            p("and(not(lt(1,0)),or(ge(1,1),gt(0,1)))").eval(&[]),
            Ok(Val::Bool(true))
        );
        assert_eq!(p("ne(le(1,0),eq(0,0))").eval(&[]), Ok(Val::Bool(true)));
    }

    #[test]
    fn faults() {
        assert_eq!(
            p("div(X0,X1)").eval(&[1, 0]),
            Err(EvalFault::DivisionByZero)
        );
        assert_eq!(p("mod(X0,0)").eval(&[1]), Err(EvalFault::DivisionByZero));
        assert_eq!(p("mul(X0,X0)").eval(&[i64::MAX]), Err(EvalFault::Overflow));
        assert_eq!(p("div(X0,-1)").eval(&[i64::MIN]), Err(EvalFault::Overflow));
    }

    #[test]
    fn errors() {
        let err = |s: &str| Expr::parse_positional(s).unwrap_err().kind;
        assert_eq!(err("iff(X0,X1)"), ExprErrorKind::Unsupported("iff".into()));
        assert_eq!(err("eq(Y,1)"), ExprErrorKind::UnknownIdentifier("Y".into()));
        assert!(matches!(
            err("add(1)"),
            ExprErrorKind::Arity {
                expected: 2,
                found: 1,
                ..
            }
        ));
        assert!(matches!(err("add(1,2"), ExprErrorKind::Syntax(_)));
        assert!(matches!(err("1 2"), ExprErrorKind::Syntax(_)));
        assert_eq!(Expr::parse_positional("add(1,").unwrap_err().offset, 6);
        let cond = |s: &str| Expr::parse_condition(s, |_| None).unwrap_err().kind;
        assert!(matches!(cond("add(1,2)"), ExprErrorKind::Type(_)));
        assert!(matches!(cond("and(1,eq(1,1))"), ExprErrorKind::Type(_)));
        assert!(matches!(cond("eq(1,lt(0,1))"), ExprErrorKind::Type(_)));
    }

    #[test]
    fn substitution() {
        let e = p("eq(add(X0,X1),X2)").substitute(&[Expr::Param(2), Expr::Int(5), Expr::Param(0)]);
        assert_eq!(e.to_string(), "eq(add(X2,5),X0)");
    }
}
