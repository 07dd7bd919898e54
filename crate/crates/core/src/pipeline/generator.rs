//! Seeded random generation of small well-formed networks.

use std::collections::{BTreeSet, HashSet};
use std::ops::RangeInclusive;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Constraint, Domain, Interpretation, Network, Predicate, Registry, VarId};
use crate::value::Value;

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub vars: RangeInclusive<usize>,
    pub domain_size: RangeInclusive<usize>,
    pub constraints: RangeInclusive<usize>,
    /// Arity 2 yields binary constraints, anything above n-ary ones.
    pub arity: RangeInclusive<usize>,
    pub extensional_fraction: f64,
    /// Probability that the last constraint is an unsatisfiable equation.
    pub unsat_bias: f64,
    pub values: RangeInclusive<i64>,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            vars: 3..=6,
            domain_size: 1..=4,
            constraints: 1..=5,
            arity: 2..=4,
            extensional_fraction: 0.3,
            unsat_bias: 0.25,
            values: -1..=3,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy)]
enum Rel {
    Eq,
    Ne,
    Le,
    Ge,
}

impl Rel {
    fn name(self) -> &'static str {
        match self {
            Rel::Eq => "eq",
            Rel::Ne => "ne",
            Rel::Le => "le",
            Rel::Ge => "ge",
        }
    }

    fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Ne => lhs != rhs,
            Rel::Le => lhs <= rhs,
            Rel::Ge => lhs >= rhs,
        }
    }
}

fn linear_formula(coefs: &[i64], rel: Rel, rhs: i64) -> String {
    let term = |i: usize, a: i64| {
        if a == 1 {
            format!("X{i}")
        } else {
            format!("mul({a},X{i})")
        }
    };
    let lhs = coefs
        .iter()
        .enumerate()
        .map(|(i, &a)| term(i, a))
        .reduce(|acc, t| format!("add({acc},{t})"))
        .unwrap_or_else(|| "0".into());
    format!("{}({lhs},{rhs})", rel.name())
}

fn linear<V: Value>(coefs: Vec<i64>, rel: Rel, rhs: i64) -> Interpretation<V> {
    let formula = linear_formula(&coefs, rel, rhs);
    Interpretation::Intention(
        Predicate::new(move |vs: &[V]| {
            let lhs: i64 = vs
                .iter()
                .zip(&coefs)
                .map(|(v, a)| a * v.to_i64().unwrap_or(0))
                .sum();
            rel.holds(lhs, rhs)
        })
        .with_formula(formula),
    )
}

/// A random well-formed network with linear predicates and small tables.
/// The same configuration always yields the same network.
pub fn gen_random_network<V: Value>(cfg: &GenConfig) -> (Network<V>, Registry<V>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let to_v = |v: i64| V::from_i64(v).expect("generator values fit the value type");
    let (lo, hi) = (*cfg.values.start(), *cfg.values.end());
    let universe = (hi - lo + 1).max(0) as usize;

    let n = rng.gen_range(cfg.vars.clone());
    let names: Vec<VarId> = (0..n).map(|i| VarId::new(format!("v{i}"))).collect();
    let doms: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            let size = rng.gen_range(cfg.domain_size.clone()).min(universe);
            let mut vals: Vec<i64> = index::sample(&mut rng, universe, size)
                .into_iter()
                .map(|k| lo + k as i64)
                .collect();
            vals.sort_unstable();
            vals
        })
        .collect();

    let m = rng.gen_range(cfg.constraints.clone());
    let tight = rng.gen_bool(cfg.unsat_bias);
    let mut reg = Registry::new();
    let mut csts = Vec::new();
    let mut scopes = BTreeSet::new();
    let mut attempts = 0;
    while csts.len() < m && attempts < 50 * m.max(1) {
        attempts += 1;
        let k = rng.gen_range(cfg.arity.clone()).min(n);
        if k < 2 {
            continue;
        }
        let scope: Vec<usize> = index::sample(&mut rng, n, k).into_vec();
        let mut key = scope.clone();
        key.sort_unstable();
        if !scopes.insert(key) {
            continue;
        }

        let name = format!("c{}", csts.len());
        let last = csts.len() + 1 == m;
        let interp = if tight && last {
            // one below the smallest attainable left-hand side
            let coefs: Vec<i64> = scope
                .iter()
                .map(|_| *[-2, -1, 1, 2].choose(&mut rng).unwrap())
                .collect();
            let min: i64 = scope
                .iter()
                .zip(&coefs)
                .map(|(&v, &a)| doms[v].iter().map(|&d| a * d).min().unwrap_or(0))
                .sum();
            linear(coefs, Rel::Eq, min - 1)
        } else if rng.gen_bool(cfg.extensional_fraction) {
            let outside = hi + 1;
            let product: usize = scope.iter().map(|&v| doms[v].len().max(1)).product();
            let count = rng.gen_range(0..=product.min(6));
            let mut seen = HashSet::new();
            let mut rows = Vec::new();
            for _ in 0..count {
                let row: Vec<V> = scope
                    .iter()
                    .map(|&v| match doms[v].choose(&mut rng) {
                        Some(&d) if !rng.gen_bool(0.1) => to_v(d),
                        _ => to_v(outside),
                    })
                    .collect();
                if seen.insert(row.clone()) {
                    rows.push(row);
                }
            }
            Interpretation::extension(k, rows).expect("rows are deduplicated and of width k")
        } else {
            let coefs: Vec<i64> = scope
                .iter()
                .map(|_| *[-2, -1, 1, 2].choose(&mut rng).unwrap())
                .collect();
            let rel = *[Rel::Eq, Rel::Ne, Rel::Le, Rel::Ge]
                .choose(&mut rng)
                .unwrap();
            let rhs: i64 = scope
                .iter()
                .zip(&coefs)
                .map(|(&v, &a)| a * doms[v].choose(&mut rng).copied().unwrap_or(0))
                .sum();
            linear(coefs, rel, rhs)
        };

        let vars: Vec<VarId> = scope.iter().map(|&v| names[v].clone()).collect();
        if k == 2 {
            reg.register_basic(name.as_str().into(), interp)
                .expect("fresh name");
            csts.push(Constraint::bin(
                name.as_str(),
                vars[0].clone(),
                vars[1].clone(),
            ));
        } else {
            reg.register_op(name.as_str().into(), k, interp)
                .expect("fresh name");
            csts.push(Constraint::Nary {
                op: name.as_str().into(),
                arity: k,
                scope: vars,
            });
        }
    }

    let used: BTreeSet<&VarId> = csts.iter().flat_map(Constraint::variables).collect();
    let mut net = Network::new();
    for (name, dom) in names.iter().zip(&doms) {
        if used.contains(name) {
            net.add_var(name.clone(), Domain::new(dom.iter().map(|&d| to_v(d))));
        }
    }
    net.csts = csts;
    (net, reg)
}
