//! Instances shared by the benchmarks.

use num_bigint::BigInt;

use lravass::generators::{random_cnf, random_vass, running_example, threesat_to_vass, RandomSpec};
use lravass::iqp::{IqpInstance, Relation};
use lravass::{CostFunction, Domain, Lasso, Vass};

pub fn running_example_with_lasso(j: usize) -> (Vass, CostFunction, Lasso) {
    let (v, c) = running_example();
    let idx = |n: &str| v.transition_index(n).expect("running example names");
    let prefix = [idx("e3"), idx("e4")].repeat(j);
    let cycle = vec![idx("e1"), idx("e2"), idx("e3"), idx("e4")];
    (v, c, Lasso::new(prefix, cycle))
}

pub fn random_model(states: usize, dim: usize, seed: u64) -> (Vass, CostFunction) {
    let spec = RandomSpec { states, transitions: 2 * states, dim, update: (-2, 2), coefficient: (0, 2), domain: Domain::Integer };
    random_vass(&spec, seed).expect("valid parameters")
}

pub fn threesat_instance(vars: usize, clauses: usize, seed: u64) -> (Vass, CostFunction) {
    let phi = random_cnf(vars, clauses, seed).expect("valid parameters");
    let (v, c, _) = threesat_to_vass(&phi).expect("3-CNF input");
    (v, c)
}

/// Σ x_i² − Σ x_i·x_{i+1} = target with x ≥ 0 and Σ x_i ≤ 2n.
pub fn chain_iqp(n: usize, target: i64) -> IqpInstance {
    let mut a = vec![vec![BigInt::from(0); n]; n];
    for i in 0..n {
        a[i][i] = BigInt::from(2);
        if i + 1 < n {
            a[i][i + 1] = BigInt::from(-1);
            a[i + 1][i] = BigInt::from(-1);
        }
    }
    let mut inst = IqpInstance::new(n, true);
    inst.add_quadratic(a, vec![BigInt::from(0); n], BigInt::from(-2 * target), Relation::Eq);
    inst.add_le(vec![BigInt::from(1); n], BigInt::from(2 * n as i64));
    inst
}
