use std::path::PathBuf;

use hvecsp_core::csp::{Constraint, Interpretation};
use hvecsp_core::hve::translate;
use hvecsp_core::pipeline::{
    brute_force_solutions, gen_random_network, GenConfig, DEFAULT_ORACLE_CAP,
};
use hvecsp_core::{fixtures, solve, Network, Registry, SolveResult};
use hvecsp_ingest::{emit_native, lower_to_network, parse_native, parse_xcsp, Format};
use proptest::prelude::*;

fn instance(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn interp<'a>(c: &Constraint, reg: &'a Registry) -> &'a Interpretation<i64> {
    match c {
        Constraint::Bin(b) => reg.basic(&b.id).unwrap(),
        Constraint::Nary { op, arity, .. } => reg.op(op, *arity).unwrap(),
    }
}

fn scope_tuples(c: &Constraint, net: &Network) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for v in c.variables() {
        out = out
            .into_iter()
            .flat_map(|t| {
                net.doms[v]
                    .values()
                    .iter()
                    .map(move |&x| [t.clone(), vec![x]].concat())
            })
            .collect();
    }
    out
}

/// Same structure, and every constraint agrees with its counterpart on
/// every in-domain tuple.
fn assert_same_model(a: (&Network, &Registry), b: (&Network, &Registry)) {
    assert_eq!(a.0, b.0);
    for c in &a.0.csts {
        let (ia, ib) = (interp(c, a.1), interp(c, b.1));
        if let (Interpretation::Intention(pa), Interpretation::Intention(pb)) = (ia, ib) {
            assert_eq!(pa.formula(), pb.formula());
        }
        for t in scope_tuples(c, a.0) {
            assert_eq!(ia.holds(&t), ib.holds(&t), "{c:?} on {t:?}");
        }
    }
}

#[test]
fn native_running_example_matches_fixture() {
    let m = parse_native(&instance("running_example.csp")).unwrap();
    let (net, reg) = fixtures::running_example::<i64>();
    assert_same_model((&m.network, &m.registry), (&net, &reg));
}

#[test]
fn xcsp_running_example_matches_fixture() {
    let m = lower_to_network(&parse_xcsp(&instance("running_example.xml")).unwrap()).unwrap();
    let (net, reg) = fixtures::running_example::<i64>();
    assert_same_model((&m.network, &m.registry), (&net, &reg));
    assert_eq!(
        solve(&m.network, &m.registry),
        Ok(SolveResult::Sat(fixtures::running_example_solution()))
    );
}

#[test]
fn unsat_variant_file() {
    let m = parse_native(&instance("running_example_unsat.csp")).unwrap();
    assert_eq!(solve(&m.network, &m.registry), Ok(SolveResult::Unsat));
}

#[test]
fn native_round_trip_on_generated_networks() {
    for seed in 0..300 {
        let (net, reg) = gen_random_network::<i64>(&GenConfig {
            seed,
            ..GenConfig::default()
        });
        let text = emit_native(&net, &reg).unwrap();
        let m = parse_native(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_same_model((&net, &reg), (&m.network, &m.registry));
        assert_eq!(
            emit_native(&m.network, &m.registry).unwrap(),
            text,
            "seed {seed}"
        );
    }
}

#[test]
fn native_round_trip_on_files() {
    for name in [
        "running_example.csp",
        "running_example_unsat.csp",
        "duplicate_scope.csp",
    ] {
        let m = parse_native(&instance(name)).unwrap();
        let text = emit_native(&m.network, &m.registry).unwrap();
        let again = parse_native(&text).unwrap();
        assert_same_model((&m.network, &m.registry), (&again.network, &again.registry));
    }
}

fn xcsp_with(relations: &str, predicates: &str, constraints: &str, domain: &str) -> String {
    format!(
        r#"<instance>
  <presentation name="t" format="XCSP 2.1"/>
  <domains nbDomains="1"><domain name="D">{domain}</domain></domains>
  <variables nbVariables="3">
    <variable name="a" domain="D"/><variable name="b" domain="D"/><variable name="c" domain="D"/>
  </variables>
  <relations>{relations}</relations>
  <predicates>{predicates}</predicates>
  <constraints>{constraints}</constraints>
</instance>"#
    )
}

#[test]
fn supports_table_solution_count() {
    let text = xcsp_with(
        r#"<relation name="R" arity="3" semantics="supports">0 1 0</relation>"#,
        "",
        r#"<constraint name="C" arity="3" scope="a b c" reference="R"/>"#,
        "0..1",
    );
    let m = lower_to_network(&parse_xcsp(&text).unwrap()).unwrap();
    let sols = brute_force_solutions(&m.network, &m.registry, DEFAULT_ORACLE_CAP).unwrap();
    // only (0,1,0) among the 8 assignments of the product
    let direct = (0..8)
        .filter(|k: &i64| [k >> 2 & 1, k >> 1 & 1, k & 1] == [0, 1, 0])
        .count();
    assert_eq!(sols.len(), direct);
}

#[test]
fn predicate_sum_is_exact_on_all_triples() {
    let text = xcsp_with(
        "",
        r#"<predicate name="P"><parameters>int X0 int X1 int X2</parameters>
             <expression><functional>eq(add(X0,X1),X2)</functional></expression></predicate>"#,
        r#"<constraint name="C" arity="3" scope="a b c" reference="P"><parameters>a b c</parameters></constraint>"#,
        "0 1 2",
    );
    let m = lower_to_network(&parse_xcsp(&text).unwrap()).unwrap();
    let p = m.registry.op(&"C".into(), 3).unwrap();
    let mut checked = 0;
    for x in 0..3 {
        for y in 0..3 {
            for z in 0..3 {
                assert_eq!(p.holds(&[x, y, z]), x + y == z);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 27);
}

#[test]
fn effective_parameters_reorder_and_bind_constants() {
    let text = xcsp_with(
        "",
        r#"<predicate name="P"><parameters>int X int Y int Z int K</parameters>
             <expression><functional>eq(sub(X,Y),add(Z,K))</functional></expression></predicate>"#,
        r#"<constraint name="C" arity="3" scope="a b c" reference="P"><parameters>c a b 1</parameters></constraint>"#,
        "0..3",
    );
    let m = lower_to_network(&parse_xcsp(&text).unwrap()).unwrap();
    let p = m.registry.op(&"C".into(), 3).unwrap();
    for t in scope_tuples(&m.network.csts[0], &m.network) {
        assert_eq!(p.holds(&t), t[2] - t[0] == t[1] + 1);
    }
}

#[test]
fn binary_predicate_stays_binary() {
    let text = xcsp_with(
        "",
        r#"<predicate name="P"><parameters>int X int Y</parameters>
             <expression><functional>lt(X,Y)</functional></expression></predicate>"#,
        r#"<constraint name="C1" arity="2" scope="a b" reference="P"><parameters>a b</parameters></constraint>
           <constraint name="C2" arity="2" scope="b c" reference="P"><parameters>b c</parameters></constraint>"#,
        "0..2",
    );
    let m = lower_to_network(&parse_xcsp(&text).unwrap()).unwrap();
    assert!(m
        .network
        .csts
        .iter()
        .all(|c| matches!(c, Constraint::Bin(_))));
    let bin = translate(&m.network, &m.registry).unwrap();
    assert_eq!(bin.hidden_count(), 0);
    assert_eq!(bin.csts.len(), 2);
    let SolveResult::Sat(a) = solve(&m.network, &m.registry).unwrap() else {
        panic!()
    };
    assert_eq!([a[&"a".into()], a[&"b".into()], a[&"c".into()]], [0, 1, 2]);
}

#[test]
fn division_by_zero_is_false_and_counted() {
    let text = xcsp_with(
        "",
        r#"<predicate name="P"><parameters>int X int Y int Z</parameters>
             <expression><functional>eq(div(X,Y),Z)</functional></expression></predicate>"#,
        r#"<constraint name="C" arity="3" scope="a b c" reference="P"><parameters>a b c</parameters></constraint>"#,
        "0..1",
    );
    let m = lower_to_network(&parse_xcsp(&text).unwrap()).unwrap();
    let p = m.registry.op(&"C".into(), 3).unwrap();
    assert!(!p.holds(&[0, 0, 0]));
    assert!(p.holds(&[1, 1, 1]));
    assert_eq!(m.faults.get(), 1);
}

#[test]
fn non_normalized_instance_is_rejected() {
    let text = xcsp_with(
        r#"<relation name="R" arity="2" semantics="conflicts">0 0</relation>"#,
        "",
        r#"<constraint name="C1" arity="2" scope="a b" reference="R"/>
           <constraint name="C2" arity="2" scope="b a" reference="R"/>
           <constraint name="C3" arity="2" scope="b c" reference="R"/>"#,
        "0..1",
    );
    let err = lower_to_network(&parse_xcsp(&text).unwrap()).unwrap_err();
    let hvecsp_ingest::IngestError::IllFormed(report) = err else {
        panic!("{err}")
    };
    assert_eq!(report.violations().len(), 1);
    assert_eq!(report.violations()[0].clause(), 'b');
}

#[test]
fn format_detection() {
    assert_eq!(Format::detect("a/b.XML".as_ref()), Format::Xcsp);
    assert_eq!(Format::detect("a/b.csp".as_ref()), Format::Native);
    assert_eq!(Format::detect("noext".as_ref()), Format::Native);
}

proptest! {
    #[test]
    fn supports_and_negated_conflicts_agree(rows in prop::collection::btree_set(prop::collection::vec(0i64..3, 3), 0..27)) {
        let body: Vec<String> = rows.iter().map(|r| format!("{} {} {}", r[0], r[1], r[2])).collect();
        let body = body.join("|");
        let lower = |semantics: &str| {
            let text = xcsp_with(
                &format!(r#"<relation name="R" arity="3" semantics="{semantics}">{body}</relation>"#),
                "",
                r#"<constraint name="C" arity="3" scope="a b c" reference="R"/>"#,
                "0..2",
            );
            lower_to_network(&parse_xcsp(&text).unwrap()).unwrap()
        };
        let (sup, con) = (lower("supports"), lower("conflicts"));
        let (ps, pc) = (sup.registry.op(&"C".into(), 3).unwrap(), con.registry.op(&"C".into(), 3).unwrap());
        for t in scope_tuples(&sup.network.csts[0], &sup.network) {
            prop_assert_eq!(ps.holds(&t), !pc.holds(&t));
            prop_assert_eq!(ps.holds(&t), rows.contains(&t));
        }
    }
}
