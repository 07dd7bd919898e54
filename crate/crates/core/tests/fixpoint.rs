//! AC3 reaches the largest arc-consistent sub-domains whatever the order of
//! its worklist.

use std::collections::BTreeMap;

use hvecsp_core::hve::{translate, BinNetwork, EncValue, EncVar};
use hvecsp_core::pipeline::{gen_random_network, GenConfig};
use hvecsp_core::solver::{interp_binary, vars_of, SolverState};
use hvecsp_core::Registry;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Domains = BTreeMap<EncVar, Vec<EncValue<i64>>>;

fn network(seed: u64) -> (BinNetwork<i64>, Registry) {
    // alternate pure binary networks and images of n-ary ones
    let arity = if seed.is_multiple_of(2) { 2..=2 } else { 2..=4 };
    let cfg = GenConfig {
        seed,
        arity,
        vars: 3..=6,
        constraints: 2..=5,
        unsat_bias: 0.0,
        ..GenConfig::default()
    };
    let (net, reg) = gen_random_network::<i64>(&cfg);
    (translate(&net, &reg).unwrap(), reg)
}

/// Naive closure: sweep every constraint in both directions until nothing
/// changes. None if some domain empties.
fn closure(net: &BinNetwork<i64>, reg: &Registry) -> Option<Domains> {
    let mut doms = net.doms.clone();
    loop {
        let mut changed = false;
        for c in &net.csts {
            let (x, y) = vars_of(c);
            let dy = doms[&y].clone();
            let dx = doms[&x].clone();
            let keep_x: Vec<_> = dx
                .iter()
                .filter(|a| dy.iter().any(|b| interp_binary(c, a, b, reg).unwrap()))
                .cloned()
                .collect();
            let keep_y: Vec<_> = dy
                .iter()
                .filter(|b| keep_x.iter().any(|a| interp_binary(c, a, b, reg).unwrap()))
                .cloned()
                .collect();
            changed |= keep_x.len() != dx.len() || keep_y.len() != dy.len();
            if keep_x.is_empty() || keep_y.is_empty() {
                return None;
            }
            doms.insert(x, keep_x);
            doms.insert(y, keep_y);
        }
        if !changed {
            return Some(doms);
        }
    }
}

#[test]
fn shuffled_worklists_reach_the_same_closure() {
    let mut consistent = 0;
    for seed in 0..100 {
        let (net, reg) = network(seed);
        let expected = closure(&net, &reg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for run in 0..10 {
            let mut state = SolverState::new(&net, &reg).unwrap();
            let mut arcs = state.all_arcs();
            arcs.shuffle(&mut rng);
            state.set_worklist(arcs);
            let ok = state.propagate();
            assert_eq!(ok, expected.is_some(), "seed {seed} run {run}");
            if let Some(want) = &expected {
                assert_eq!(&state.domains(), want, "seed {seed} run {run}");
            }
        }
        consistent += expected.is_some() as usize;
    }
    assert!(consistent > 20, "only {consistent} consistent networks");
}
