//! The six-variable running example used throughout the tests, built by hand.
//!
//! Variables `x1..x6` over `{0, 1}` with
//!
//! ```text
//! c1: x1 + x2 + x6 = 1
//! c2: x1 + x2 - x3 + x4 = 1
//! c3: x4 + x5 - x6 >= 1
//! c4: x2 + x5 - x6 = 0
//! c5: x1 >= x6            (binary)
//! ```
//!
//! Its only solution is `x1=1 x2=0 x3=1 x4=1 x5=0 x6=0`.

use crate::csp::{
    Assignment, Constraint, Domain, Interpretation, Network, Predicate, Registry, VarId,
};
use crate::value::Value;

fn linear<V: Value>(formula: &str, f: fn(&[i64]) -> bool) -> Interpretation<V> {
    Interpretation::Intention(
        Predicate::new(move |vs: &[V]| {
            let ints: Vec<i64> = vs
                .iter()
                .map(|v| v.to_i64().expect("small value"))
                .collect();
            f(&ints)
        })
        .with_formula(formula),
    )
}

pub fn running_example<V: Value>() -> (Network<V>, Registry<V>) {
    let mut net = Network::new();
    for i in 1..=6 {
        net.add_var(format!("x{i}"), Domain::range(V::zero(), V::one()));
    }
    net.add_constraint(Constraint::nary("c1", ["x1", "x2", "x6"]));
    net.add_constraint(Constraint::nary("c2", ["x1", "x2", "x3", "x4"]));
    net.add_constraint(Constraint::nary("c3", ["x4", "x5", "x6"]));
    net.add_constraint(Constraint::nary("c4", ["x2", "x5", "x6"]));
    net.add_constraint(Constraint::bin("c5", "x1", "x6"));

    let mut reg = Registry::new();
    let ops = [
        (
            "c1",
            3,
            linear("eq(add(add(X0,X1),X2),1)", |v| v[0] + v[1] + v[2] == 1),
        ),
        (
            "c2",
            4,
            linear("eq(add(sub(add(X0,X1),X2),X3),1)", |v| {
                v[0] + v[1] - v[2] + v[3] == 1
            }),
        ),
        (
            "c3",
            3,
            linear("ge(sub(add(X0,X1),X2),1)", |v| v[0] + v[1] - v[2] >= 1),
        ),
        (
            "c4",
            3,
            linear("eq(sub(add(X0,X1),X2),0)", |v| v[0] + v[1] - v[2] == 0),
        ),
    ];
    for (name, arity, interp) in ops {
        reg.register_op(name.into(), arity, interp)
            .expect("fresh registry");
    }
    reg.register_basic("c5".into(), linear("ge(X0,X1)", |v| v[0] >= v[1]))
        .expect("fresh registry");
    (net, reg)
}

/// The running example with `c5` strengthened to `x1 >= x6 and x1 < x6`.
/// A separate constraint over `{x1, x6}` would break normalization, so the
/// extra condition is conjoined into `c5`. Unsatisfiable.
pub fn running_example_with_x1_lt_x6<V: Value>() -> (Network<V>, Registry<V>) {
    with_c5(linear("and(ge(X0,X1),lt(X0,X1))", |v| {
        v[0] >= v[1] && v[0] < v[1]
    }))
}

/// The running example with `c5` replaced by `x1 = x6`. Unsatisfiable, but
/// not refuted by the binary relation alone.
pub fn running_example_with_x1_eq_x6<V: Value>() -> (Network<V>, Registry<V>) {
    with_c5(linear("eq(X0,X1)", |v| v[0] == v[1]))
}

fn with_c5<V: Value>(c5: Interpretation<V>) -> (Network<V>, Registry<V>) {
    let (net, full) = running_example::<V>();
    let mut reg = Registry::new();
    for (op, arity, interp) in full.ops() {
        reg.register_op(op.clone(), arity, interp.clone())
            .expect("copy");
    }
    reg.register_basic("c5".into(), c5).expect("fresh");
    (net, reg)
}

pub fn running_example_solution<V: Value>() -> Assignment<V> {
    [
        ("x1", 1),
        ("x2", 0),
        ("x3", 1),
        ("x4", 1),
        ("x5", 0),
        ("x6", 0),
    ]
    .into_iter()
    .map(|(k, v)| (VarId::new(k), V::from_i64(v).expect("small value")))
    .collect()
}
