//! Exhaustive solution enumeration, independent of the encoding and of the
//! propagation-based solver.

use thiserror::Error;

use crate::csp::{is_solution, Assignment, Network, Registry};
use crate::hve::{BinAssignment, BinNetwork, EncValue};
use crate::solver::{interp_binary, vars_of, ShapeError};
use crate::value::Value;

/// Default bound on the work an oracle may do before refusing.
pub const DEFAULT_ORACLE_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space of {size} exceeds the oracle cap of {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("constraint #{constraint}: {source}")]
    Shape {
        constraint: usize,
        source: ShapeError,
    },
}

/// All solutions of an n-ary network, by generate-and-test over the full
/// product of domains. Variables vary in declaration order, the last one
/// fastest. Refuses when the product exceeds `cap`.
pub fn brute_force_solutions<V: Value>(
    net: &Network<V>,
    reg: &Registry<V>,
    cap: u64,
) -> Result<Vec<Assignment<V>>, OracleError> {
    let size = net.search_space();
    if size > cap as u128 {
        return Err(OracleError::CapExceeded { size, cap });
    }
    let mut out = Vec::new();
    if size == 0 {
        return Ok(out);
    }
    let domains: Vec<&[V]> = net.vars.iter().map(|v| net.doms[v].values()).collect();
    let mut cursor = vec![0usize; domains.len()];
    loop {
        let a: Assignment<V> = net
            .vars
            .iter()
            .zip(&cursor)
            .zip(&domains)
            .map(|((v, &i), d)| (v.clone(), d[i]))
            .collect();
        if is_solution(&a, net, reg) {
            out.push(a);
        }
        let mut pos = cursor.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < domains[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

/// All solutions of a binary network.
///
/// Hidden domains make the full product far too large to walk, so this is a
/// chronological enumeration in declaration order that checks each
/// constraint as soon as both of its variables are assigned. It does no
/// propagation. `cap` bounds the number of partial assignments visited.
pub fn brute_force_solutions_bin<V: Value>(
    net: &BinNetwork<V>,
    reg: &Registry<V>,
    cap: u64,
) -> Result<Vec<BinAssignment<V>>, OracleError> {
    let pos = |v| net.vars.iter().position(|x| *x == v);
    // checks[i]: constraints whose later variable is vars[i]
    let mut checks: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); net.vars.len()];
    for (ci, c) in net.csts.iter().enumerate() {
        let (x, y) = vars_of(c);
        let (Some(px), Some(py)) = (pos(x), pos(y)) else {
            // constraint over an undeclared variable: nothing satisfies it
            return Ok(Vec::new());
        };
        if px > py {
            checks[px].push((ci, py, true));
        } else {
            checks[py].push((ci, px, false));
        }
    }
    let empty = Vec::new();
    let domains: Vec<&Vec<EncValue<V>>> = net
        .vars
        .iter()
        .map(|v| net.doms.get(v).unwrap_or(&empty))
        .collect();

    let mut walk = BinWalk {
        net,
        reg,
        cap,
        checks,
        domains,
        chosen: Vec::new(),
        visited: 0,
        out: Vec::new(),
    };
    walk.run()?;
    Ok(walk.out)
}

struct BinWalk<'a, V> {
    net: &'a BinNetwork<V>,
    reg: &'a Registry<V>,
    cap: u64,
    checks: Vec<Vec<(usize, usize, bool)>>,
    domains: Vec<&'a Vec<EncValue<V>>>,
    chosen: Vec<usize>,
    visited: u64,
    out: Vec<BinAssignment<V>>,
}

impl<V: Value> BinWalk<'_, V> {
    fn run(&mut self) -> Result<(), OracleError> {
        let depth = self.chosen.len();
        if depth == self.net.vars.len() {
            self.out.push(
                self.net
                    .vars
                    .iter()
                    .zip(&self.chosen)
                    .zip(&self.domains)
                    .map(|((var, &i), d)| (var.clone(), d[i].clone()))
                    .collect(),
            );
            return Ok(());
        }
        for i in 0..self.domains[depth].len() {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(OracleError::CapExceeded {
                    size: self.visited as u128,
                    cap: self.cap,
                });
            }
            if self.consistent(depth, i)? {
                self.chosen.push(i);
                self.run()?;
                self.chosen.pop();
            }
        }
        Ok(())
    }

    fn consistent(&self, depth: usize, i: usize) -> Result<bool, OracleError> {
        let here = &self.domains[depth][i];
        for &(ci, earlier, here_first) in &self.checks[depth] {
            let there = &self.domains[earlier][self.chosen[earlier]];
            let (vx, vy) = if here_first {
                (here, there)
            } else {
                (there, here)
            };
            let ok = interp_binary(&self.net.csts[ci], vx, vy, self.reg).map_err(|source| {
                OracleError::Shape {
                    constraint: ci,
                    source,
                }
            })?;
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{Constraint, Domain, Interpretation};
    use crate::fixtures;
    use crate::hve::{encode_solution, translate};

    #[test]
    fn running_example_has_one_solution() {
        let (net, reg) = fixtures::running_example::<i64>();
        let sols = brute_force_solutions(&net, &reg, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(sols, vec![fixtures::running_example_solution()]);

        let bin = translate(&net, &reg).unwrap();
        let bin_sols = brute_force_solutions_bin(&bin, &reg, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(bin_sols, vec![encode_solution(&sols[0], &net).unwrap()]);
    }

    #[test]
    fn unsat_variants_have_no_solution() {
        let (net, reg) = fixtures::running_example_with_x1_lt_x6::<i64>();
        assert!(brute_force_solutions(&net, &reg, DEFAULT_ORACLE_CAP)
            .unwrap()
            .is_empty());
        let (net, reg) = fixtures::running_example_with_x1_eq_x6::<i64>();
        assert!(brute_force_solutions(&net, &reg, DEFAULT_ORACLE_CAP)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unconstrained_product() {
        let mut net = Network::<i64>::new();
        net.add_var("a", Domain::range(0, 1));
        net.add_var("b", Domain::range(0, 1));
        let sols = brute_force_solutions(&net, &Registry::new(), 100).unwrap();
        assert_eq!(sols.len(), 4);
        // last variable fastest
        assert_eq!(sols[1][&"b".into()], 1);
        assert_eq!(sols[1][&"a".into()], 0);
    }

    #[test]
    fn empty_table_has_no_solution() {
        let mut net = Network::<i64>::new();
        for v in ["a", "b", "c"] {
            net.add_var(v, Domain::range(0, 1));
        }
        net.add_constraint(Constraint::nary("t", ["a", "b", "c"]));
        let mut reg = Registry::new();
        reg.register_op("t".into(), 3, Interpretation::extension(3, vec![]).unwrap())
            .unwrap();
        assert!(brute_force_solutions(&net, &reg, 100).unwrap().is_empty());
    }

    #[test]
    fn binary_edge_cases() {
        let reg = Registry::<i64>::new();
        assert_eq!(
            brute_force_solutions_bin(&BinNetwork::default(), &reg, 10)
                .unwrap()
                .len(),
            1
        );
        let mut net = Network::<i64>::new();
        net.add_var("a", Domain::empty());
        net.add_var("b", Domain::range(0, 1));
        let bin = translate(&net, &reg).unwrap();
        assert!(brute_force_solutions_bin(&bin, &reg, 10)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let (net, reg) = fixtures::running_example::<i64>();
        assert_eq!(
            brute_force_solutions(&net, &reg, 63),
            Err(OracleError::CapExceeded { size: 64, cap: 63 })
        );
        let bin = translate(&net, &reg).unwrap();
        assert!(matches!(
            brute_force_solutions_bin(&bin, &reg, 5),
            Err(OracleError::CapExceeded { .. })
        ));
    }
}
