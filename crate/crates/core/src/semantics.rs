//! Exact evaluation of lassos and a bounded brute-force oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{
    gain, sum_from_unchecked, vals, Configuration, CostFunction, CounterVector, Domain, ExtendedValue, Lasso,
    ModelError, Vass,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("counter {counter} becomes negative at position {position}")]
    NegativeCounter { position: usize, counter: usize },
    #[error("counter {0} decreases on every cycle iteration")]
    Decreasing(usize),
    #[error("horizon must be positive")]
    ZeroHorizon,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoVerdict {
    pub value: ExtendedValue,
    /// Cost of one cycle iteration after the prefix (only when the value is finite).
    pub per_iteration_sum: Option<BigInt>,
    pub cycle_length: usize,
}

fn first_negative_entry(z: &CounterVector) -> Option<usize> {
    z.0.iter().position(|x| x.is_negative())
}

/// Under the natural domain: the run stays nonnegative forever. It suffices to check the prefix,
/// one iteration of the cycle, and that the cycle does not decrease any counter.
pub fn check_natural(vass: &Vass, lasso: &Lasso) -> Result<(), SemanticsError> {
    let mut z = CounterVector::zeros(vass.dim());
    let mut position = 0;
    for &t in lasso.prefix.iter().chain(&lasso.cycle) {
        z += &vass.transition(t).update;
        position += 1;
        if let Some(counter) = first_negative_entry(&z) {
            return Err(SemanticsError::NegativeCounter { position, counter });
        }
    }
    let g = gain(vass, &lasso.cycle);
    if let Some(c) = first_negative_entry(&g) {
        return Err(SemanticsError::Decreasing(c));
    }
    Ok(())
}

pub fn lasso_value(vass: &Vass, cost: &CostFunction, lasso: &Lasso) -> Result<LassoVerdict, SemanticsError> {
    lasso.check(vass)?;
    if vass.domain() == Domain::Natural {
        check_natural(vass, lasso)?;
    }
    let gc = gain(vass, &lasso.cycle);
    let vc = vals(vass, cost, &lasso.cycle);
    let dot = gc.dot(&vc);
    let cycle_length = lasso.cycle.len();
    if dot.is_negative() {
        return Ok(LassoVerdict { value: ExtendedValue::NegInfinity, per_iteration_sum: None, cycle_length });
    }
    if dot.is_positive() {
        return Ok(LassoVerdict { value: ExtendedValue::PosInfinity, per_iteration_sum: None, cycle_length });
    }
    let g = gain(vass, &lasso.prefix);
    let s = sum_from_unchecked(vass, cost, &g, &lasso.cycle);
    let value = BigRational::new(s.clone(), BigInt::from(cycle_length));
    Ok(LassoVerdict { value: ExtendedValue::Finite(value), per_iteration_sum: Some(s), cycle_length })
}

/// Running totals Σ_{i<j} f(c_i) along the unrolled lasso, for j = 1, 2, ….
pub struct PrefixSums<'a> {
    vass: &'a Vass,
    cost: &'a CostFunction,
    lasso: &'a Lasso,
    pos: usize,
    config: Configuration,
    total: BigInt,
}

impl<'a> PrefixSums<'a> {
    pub fn new(vass: &'a Vass, cost: &'a CostFunction, lasso: &'a Lasso) -> Result<Self, SemanticsError> {
        lasso.check(vass)?;
        let start = match lasso.prefix.first().or(lasso.cycle.first()) {
            Some(&t) => vass.transition(t).source,
            None => unreachable!("cycle is nonempty"),
        };
        Ok(PrefixSums {
            vass,
            cost,
            lasso,
            pos: 0,
            config: Configuration::new(start, CounterVector::zeros(vass.dim())),
            total: BigInt::zero(),
        })
    }
}

impl Iterator for PrefixSums<'_> {
    type Item = BigInt;

    fn next(&mut self) -> Option<BigInt> {
        self.total += self.cost.eval(self.config.state, &self.config.counters);
        let p = self.lasso.prefix.len();
        let t = if self.pos < p {
            self.lasso.prefix[self.pos]
        } else {
            self.lasso.cycle[(self.pos - p) % self.lasso.cycle.len()]
        };
        let tr = self.vass.transition(t);
        self.config.counters += &tr.update;
        self.config.state = tr.target;
        self.pos += 1;
        Some(self.total.clone())
    }
}

/// The first `horizon` averages (1/(j+1))·Σ_{i≤j} f(c_i) along the unrolled lasso.
pub fn numeric_prefix_averages(
    vass: &Vass,
    cost: &CostFunction,
    lasso: &Lasso,
    horizon: usize,
) -> Result<Vec<BigRational>, SemanticsError> {
    if horizon == 0 {
        return Err(SemanticsError::ZeroHorizon);
    }
    Ok(PrefixSums::new(vass, cost, lasso)?
        .take(horizon)
        .enumerate()
        .map(|(j, s)| BigRational::new(s, BigInt::from(j + 1)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleAnswer {
    Yes { witness: Lasso, value: ExtendedValue },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub answer: OracleAnswer,
    pub max_prefix: usize,
    pub max_cycle: usize,
}

/// For every state s and length j ≤ max_len, the least Σ w(t) over paths of exactly j steps
/// from an initial state to s, with parent pointers for reconstruction.
struct LayeredPaths {
    best: Vec<Vec<Option<BigInt>>>,
    parent: Vec<Vec<Option<usize>>>,
}

impl LayeredPaths {
    fn new(vass: &Vass, w: &[BigInt], max_len: usize) -> Self {
        let n = vass.num_states();
        let mut best = vec![vec![None; n]; max_len + 1];
        let mut parent = vec![vec![None; n]; max_len + 1];
        for &q in vass.initial() {
            best[0][q] = Some(BigInt::zero());
        }
        for j in 0..max_len {
            for (ti, t) in vass.transitions().iter().enumerate() {
                let Some(b) = &best[j][t.source] else { continue };
                let cand = b + &w[ti];
                if best[j + 1][t.target].as_ref().is_none_or(|x| cand < *x) {
                    best[j + 1][t.target] = Some(cand);
                    parent[j + 1][t.target] = Some(ti);
                }
            }
        }
        LayeredPaths { best, parent }
    }

    /// Shortest length among the minimum-weight paths to `s`.
    fn argmin(&self, s: usize) -> Option<(usize, BigInt)> {
        let mut out: Option<(usize, BigInt)> = None;
        for (j, row) in self.best.iter().enumerate() {
            if let Some(b) = &row[s] {
                if out.as_ref().is_none_or(|(_, x)| b < x) {
                    out = Some((j, b.clone()));
                }
            }
        }
        out
    }

    fn path(&self, vass: &Vass, s: usize, len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(len);
        let mut cur = s;
        for j in (1..=len).rev() {
            let t = self.parent[j][cur].expect("layer is populated");
            out.push(t);
            cur = vass.transition(t).source;
        }
        out.reverse();
        out
    }
}

struct CycleSearch<'a> {
    vass: &'a Vass,
    cost: &'a CostFunction,
    dist: Vec<Vec<usize>>,
}

/// All-pairs BFS distances in transitions; `usize::MAX` when unreachable.
fn distances(vass: &Vass) -> Vec<Vec<usize>> {
    let n = vass.num_states();
    (0..n)
        .map(|s| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &t in vass.outgoing(u) {
                    let v = vass.transition(t).target;
                    if d[v] == usize::MAX {
                        d[v] = d[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            d
        })
        .collect()
}

impl CycleSearch<'_> {
    /// Visits closed walks of exactly `len` transitions in lexicographic order of transition
    /// indices; `visit` returns true to stop.
    fn walks(&self, len: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let mut path = Vec::with_capacity(len);
        for t0 in 0..self.vass.num_transitions() {
            let base = self.vass.transition(t0).source;
            path.clear();
            path.push(t0);
            if self.extend(base, len, &mut path, visit) {
                return true;
            }
        }
        false
    }

    fn extend(&self, base: usize, len: usize, path: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let cur = self.vass.transition(*path.last().unwrap()).target;
        let remaining = len - path.len();
        if remaining == 0 {
            return cur == base && visit(path);
        }
        if self.dist[cur][base] > remaining {
            return false;
        }
        for &t in self.vass.outgoing(cur) {
            path.push(t);
            let stop = self.extend(base, len, path, visit);
            path.pop();
            if stop {
                return true;
            }
        }
        false
    }
}

/// Exhaustive search over cycles of length ≤ `max_cycle` (by length, then lexicographically)
/// and prefixes of length ≤ `max_prefix`. For a balanced cycle the prefix only matters through
/// Gain(prefix)·Vals(cycle), which is minimized exactly by a layered shortest-path computation.
/// Never answers NO.
pub fn oracle_regular_average(
    vass: &Vass,
    cost: &CostFunction,
    threshold: &BigRational,
    max_prefix: usize,
    max_cycle: usize,
) -> OracleReport {
    let search = CycleSearch { vass, cost, dist: distances(vass) };
    let reach = LayeredPaths::new(vass, &vec![BigInt::zero(); vass.num_transitions()], max_prefix);
    let mut found: Option<(Lasso, ExtendedValue)> = None;
    for len in 1..=max_cycle {
        let stop = search.walks(len, &mut |cycle| {
            let base = vass.transition(cycle[0]).source;
            let vc = vals(vass, search.cost, cycle);
            let dot = gain(vass, cycle).dot(&vc);
            if dot.is_positive() {
                return false;
            }
            let prefix = if dot.is_negative() {
                let Some((j, _)) = reach.argmin(base) else { return false };
                reach.path(vass, base, j)
            } else {
                let w: Vec<BigInt> = vass.transitions().iter().map(|t| t.update.dot(&vc)).collect();
                let lp = LayeredPaths::new(vass, &w, max_prefix);
                let Some((j, _)) = lp.argmin(base) else { return false };
                lp.path(vass, base, j)
            };
            let lasso = Lasso::new(prefix, cycle.to_vec());
            match lasso_value(vass, search.cost, &lasso) {
                Ok(v) if v.value.le_rational(threshold) => {
                    found = Some((lasso, v.value));
                    true
                }
                _ => false,
            }
        });
        if stop {
            break;
        }
    }
    let answer = match found {
        Some((witness, value)) => OracleAnswer::Yes { witness, value },
        None => OracleAnswer::Unknown,
    };
    OracleReport { answer, max_prefix, max_cycle }
}

/// Visits every closed walk of length 1..=max_len in (length, lexicographic) order.
pub fn for_each_cycle(vass: &Vass, cost: &CostFunction, max_len: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    let search = CycleSearch { vass, cost, dist: distances(vass) };
    for len in 1..=max_len {
        if search.walks(len, visit) {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::running_example;
    use crate::model::Transition;

    fn names(v: &Vass, s: &str) -> Vec<usize> {
        s.split_whitespace().map(|n| v.transition_index(n).unwrap()).collect()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn one_loop(update: i64, coeff: i64, domain: Domain) -> (Vass, CostFunction) {
        let v = Vass::new(
            1,
            vec!["q".into()],
            vec![0],
            vec![Transition { name: "t".into(), source: 0, target: 0, update: CounterVector::from_i64(&[update]) }],
            domain,
        )
        .unwrap();
        let c = CostFunction::uniform(&v, &CounterVector::from_i64(&[coeff])).unwrap();
        (v, c)
    }

    #[test]
    fn running_example_values() {
        let (v, c) = running_example();
        let cyc = names(&v, "e1 e2 e3 e4");
        let r = lasso_value(&v, &c, &Lasso::new(vec![], cyc.clone())).unwrap();
        assert_eq!(r.value, ExtendedValue::Finite(q(3, 2)));
        assert_eq!(r.per_iteration_sum, Some(BigInt::from(6)));
        for j in 0..4 {
            let prefix = names(&v, &"e3 e4 ".repeat(j));
            let r = lasso_value(&v, &c, &Lasso::new(prefix, cyc.clone())).unwrap();
            assert_eq!(r.value, ExtendedValue::Finite(q(6 - 3 * j as i64, 4)));
        }
    }

    #[test]
    fn infinite_classes() {
        let (v, c) = one_loop(-1, 1, Domain::Integer);
        assert_eq!(lasso_value(&v, &c, &Lasso::new(vec![], vec![0])).unwrap().value, ExtendedValue::NegInfinity);
        let (v, c) = one_loop(1, 1, Domain::Integer);
        assert_eq!(lasso_value(&v, &c, &Lasso::new(vec![], vec![0])).unwrap().value, ExtendedValue::PosInfinity);
    }

    #[test]
    fn natural_validity() {
        let (v, c) = one_loop(-1, 1, Domain::Natural);
        assert!(matches!(
            lasso_value(&v, &c, &Lasso::new(vec![], vec![0])),
            Err(SemanticsError::NegativeCounter { position: 1, counter: 0 })
        ));
        let (v, c) = one_loop(0, 1, Domain::Natural);
        assert!(lasso_value(&v, &c, &Lasso::new(vec![], vec![0])).is_ok());
    }

    #[test]
    fn prefix_averages() {
        let (v, c) = running_example();
        let l = Lasso::new(vec![], names(&v, "e1 e2 e3 e4"));
        let avg = numeric_prefix_averages(&v, &c, &l, 400).unwrap();
        let diff = (avg.last().unwrap() - q(3, 2)).abs();
        assert!(diff <= q(25, 100));
        let (v, c) = one_loop(1, 1, Domain::Integer);
        let avg = numeric_prefix_averages(&v, &c, &Lasso::new(vec![], vec![0]), 20).unwrap();
        assert!(avg.windows(2).skip(1).all(|w| w[0] < w[1]));
        let (v, c) = one_loop(3, 0, Domain::Integer);
        let avg = numeric_prefix_averages(&v, &c, &Lasso::new(vec![], vec![0]), 5).unwrap();
        assert!(avg.iter().all(|x| x.is_zero()));
        assert!(numeric_prefix_averages(&v, &c, &Lasso::new(vec![], vec![0]), 0).is_err());
    }

    #[test]
    fn oracle_examples() {
        let (v, c) = running_example();
        let r = oracle_regular_average(&v, &c, &q(3, 2), 0, 4);
        match r.answer {
            OracleAnswer::Yes { witness, value } => {
                assert!(value.le_rational(&q(3, 2)));
                assert_eq!(witness.cycle.len(), 4);
            }
            OracleAnswer::Unknown => panic!("expected a witness"),
        }
        let r = oracle_regular_average(&v, &c, &q(-3, 1), 12, 4);
        assert!(matches!(r.answer, OracleAnswer::Yes { .. }));
        let (v, c) = one_loop(1, 1, Domain::Integer);
        assert_eq!(oracle_regular_average(&v, &c, &q(1000, 1), 8, 8).answer, OracleAnswer::Unknown);
    }
}
