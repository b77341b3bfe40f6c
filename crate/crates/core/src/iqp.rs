//! Bounded exact search for integer quadratic programs.
//!
//! Constraints are `xᵀAx + a·x + d (≤ | =) 0` and `b·x ≤ c`. The search is depth-first over the
//! variables in index order with ascending values, so the first solution found is the
//! lexicographically least one in the box.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadConstraint {
    pub a: Vec<Vec<BigInt>>,
    pub lin: Vec<BigInt>,
    pub d: BigInt,
    pub rel: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub row: Vec<BigInt>,
    pub c: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IqpInstance {
    pub vars: usize,
    pub quadratic: Vec<QuadConstraint>,
    pub linear: Vec<LinearConstraint>,
    /// Per variable: restricted to x ≥ 0.
    pub nonnegative: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IqpError {
    #[error("constraint {0} has the wrong dimension")]
    Dimension(usize),
    #[error("quadratic constraint {0} is not symmetric")]
    NotSymmetric(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    Budget,
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveVerdict {
    Sat(Vec<BigInt>),
    BoundedUnsat(u64),
    Unknown(UnknownReason),
}

impl IqpInstance {
    pub fn new(vars: usize, nonnegative: bool) -> Self {
        IqpInstance { vars, quadratic: Vec::new(), linear: Vec::new(), nonnegative: vec![nonnegative; vars] }
    }

    pub fn add_le(&mut self, row: Vec<BigInt>, c: BigInt) {
        self.linear.push(LinearConstraint { row, c });
    }

    /// `row · x = c` as two inequalities.
    pub fn add_eq(&mut self, row: Vec<BigInt>, c: BigInt) {
        let neg: Vec<BigInt> = row.iter().map(|x| -x).collect();
        self.linear.push(LinearConstraint { row, c: c.clone() });
        self.linear.push(LinearConstraint { row: neg, c: -c });
    }

    pub fn add_quadratic(&mut self, a: Vec<Vec<BigInt>>, lin: Vec<BigInt>, d: BigInt, rel: Relation) {
        self.quadratic.push(QuadConstraint { a, lin, d, rel });
    }

    pub fn validate(&self) -> Result<(), IqpError> {
        let n = self.vars;
        if self.nonnegative.len() != n {
            return Err(IqpError::Dimension(0));
        }
        for (i, q) in self.quadratic.iter().enumerate() {
            if q.a.len() != n || q.a.iter().any(|r| r.len() != n) || q.lin.len() != n {
                return Err(IqpError::Dimension(i));
            }
            for r in 0..n {
                for c in 0..r {
                    if q.a[r][c] != q.a[c][r] {
                        return Err(IqpError::NotSymmetric(i));
                    }
                }
            }
        }
        for (i, l) in self.linear.iter().enumerate() {
            if l.row.len() != n {
                return Err(IqpError::Dimension(self.quadratic.len() + i));
            }
        }
        Ok(())
    }

    /// Exact check of every constraint.
    pub fn satisfied_by(&self, x: &[BigInt]) -> bool {
        if x.len() != self.vars {
            return false;
        }
        if self.nonnegative.iter().zip(x).any(|(nn, v)| *nn && v.sign() == num_bigint::Sign::Minus) {
            return false;
        }
        let lin_ok = self.linear.iter().all(|l| {
            let s: BigInt = l.row.iter().zip(x).map(|(a, b)| a * b).sum();
            s <= l.c
        });
        lin_ok
            && self.quadratic.iter().all(|q| {
                let mut s = q.d.clone();
                for i in 0..x.len() {
                    s += &q.lin[i] * &x[i];
                    for j in 0..x.len() {
                        s += &q.a[i][j] * &x[i] * &x[j];
                    }
                }
                match q.rel {
                    Relation::Le => s <= BigInt::from(0),
                    Relation::Eq => s == BigInt::from(0),
                }
            })
    }
}

struct Overflow;

type R<T> = Result<T, Overflow>;

fn add(a: i128, b: i128) -> R<i128> {
    a.checked_add(b).ok_or(Overflow)
}

fn mul(a: i128, b: i128) -> R<i128> {
    a.checked_mul(b).ok_or(Overflow)
}

fn conv(x: &BigInt) -> R<i128> {
    x.to_i128().ok_or(Overflow)
}

/// Range of a·x for x in [lo, hi].
fn scaled(a: i128, lo: i128, hi: i128) -> R<(i128, i128)> {
    let (p, q) = (mul(a, lo)?, mul(a, hi)?);
    Ok((p.min(q), p.max(q)))
}

/// Range of x·y over two intervals.
fn product(x: (i128, i128), y: (i128, i128)) -> R<(i128, i128)> {
    let c = [mul(x.0, y.0)?, mul(x.0, y.1)?, mul(x.1, y.0)?, mul(x.1, y.1)?];
    Ok((*c.iter().min().unwrap(), *c.iter().max().unwrap()))
}

/// Range of x² over an interval.
fn square(x: (i128, i128)) -> R<(i128, i128)> {
    let hi = mul(x.0, x.0)?.max(mul(x.1, x.1)?);
    let lo = if x.0 <= 0 && x.1 >= 0 { 0 } else { mul(x.0, x.0)?.min(mul(x.1, x.1)?) };
    Ok((lo, hi))
}

struct Quad {
    a: Vec<Vec<i128>>,
    lin: Vec<i128>,
    d: i128,
    rel: Relation,
}

struct Lin {
    row: Vec<i128>,
    c: i128,
}

struct Search<'a> {
    n: usize,
    quad: Vec<Quad>,
    lin: Vec<Lin>,
    lo: Vec<i128>,
    hi: Vec<i128>,
    x: Vec<i128>,
    nodes: u64,
    budget: u64,
    accept: &'a mut dyn FnMut(&[BigInt]) -> bool,
    found: Option<Vec<BigInt>>,
    inst: &'a IqpInstance,
}

enum Stop {
    Found,
    Budget,
    Overflow,
}

impl From<Overflow> for Stop {
    fn from(_: Overflow) -> Self {
        Stop::Overflow
    }
}

impl Search<'_> {
    fn interval(&self, j: usize, depth: usize) -> (i128, i128) {
        if j < depth {
            (self.x[j], self.x[j])
        } else {
            (self.lo[j], self.hi[j])
        }
    }

    /// Bounds for variable `k` implied by the linear rows given x[..k] fixed.
    fn linear_bounds(&self, k: usize) -> R<Option<(i128, i128)>> {
        let (mut lo, mut hi) = (self.lo[k], self.hi[k]);
        for l in &self.lin {
            let mut rest = 0i128;
            for j in 0..self.n {
                if j == k {
                    continue;
                }
                let (a, _) = scaled(l.row[j], self.interval(j, k).0, self.interval(j, k).1)?;
                rest = add(rest, a)?;
            }
            // row[k]·x_k ≤ c − rest
            let slack = l.c.checked_sub(rest).ok_or(Overflow)?;
            let a = l.row[k];
            if a > 0 {
                hi = hi.min(slack.div_euclid(a));
            } else if a < 0 {
                // x_k ≥ ceil(slack / a) with a < 0  ⇔  x_k ≥ ceil(-slack / -a)
                let b = -a;
                let v = -slack;
                lo = lo.max(v.div_euclid(b) + if v.rem_euclid(b) != 0 { 1 } else { 0 });
            } else if slack < 0 {
                return Ok(None);
            }
            if lo > hi {
                return Ok(None);
            }
        }
        Ok(Some((lo, hi)))
    }

    /// False when some quadratic constraint cannot hold given x[..depth] fixed.
    fn quadratic_feasible(&self, depth: usize) -> R<bool> {
        for q in &self.quad {
            let (mut lo, mut hi) = (q.d, q.d);
            for i in 0..self.n {
                let xi = self.interval(i, depth);
                let (a, b) = scaled(q.lin[i], xi.0, xi.1)?;
                lo = add(lo, a)?;
                hi = add(hi, b)?;
                if q.a[i][i] != 0 {
                    let s = square(xi)?;
                    let (a, b) = scaled(q.a[i][i], s.0, s.1)?;
                    lo = add(lo, a)?;
                    hi = add(hi, b)?;
                }
                for j in i + 1..self.n {
                    if q.a[i][j] == 0 {
                        continue;
                    }
                    let p = product(xi, self.interval(j, depth))?;
                    let (a, b) = scaled(mul(2, q.a[i][j])?, p.0, p.1)?;
                    lo = add(lo, a)?;
                    hi = add(hi, b)?;
                }
            }
            let ok = match q.rel {
                Relation::Le => lo <= 0,
                Relation::Eq => lo <= 0 && hi >= 0,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn dfs(&mut self, k: usize) -> Result<(), Stop> {
        if !self.quadratic_feasible(k)? {
            return Ok(());
        }
        if k == self.n {
            let x: Vec<BigInt> = self.x.iter().map(|&v| BigInt::from(v)).collect();
            if self.inst.satisfied_by(&x) && (self.accept)(&x) {
                self.found = Some(x);
                return Err(Stop::Found);
            }
            return Ok(());
        }
        let Some((lo, hi)) = self.linear_bounds(k)? else { return Ok(()) };
        for v in lo..=hi {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Stop::Budget);
            }
            self.x[k] = v;
            self.dfs(k + 1)?;
        }
        self.x[k] = 0;
        Ok(())
    }
}

pub fn solve(inst: &IqpInstance, box_bound: u64, node_budget: u64) -> Result<SolveVerdict, IqpError> {
    solve_filtered(inst, box_bound, node_budget, &mut |_| true)
}

/// Like [`solve`], but solutions rejected by `accept` are skipped and the search continues.
/// `BoundedUnsat` then means no accepted solution exists in the box.
pub fn solve_filtered(
    inst: &IqpInstance,
    box_bound: u64,
    node_budget: u64,
    accept: &mut dyn FnMut(&[BigInt]) -> bool,
) -> Result<SolveVerdict, IqpError> {
    inst.validate()?;
    let b = box_bound as i128;
    let convert = || -> R<(Vec<Quad>, Vec<Lin>)> {
        let quad = inst
            .quadratic
            .iter()
            .map(|q| {
                Ok(Quad {
                    a: q.a.iter().map(|r| r.iter().map(conv).collect::<R<Vec<_>>>()).collect::<R<Vec<_>>>()?,
                    lin: q.lin.iter().map(conv).collect::<R<Vec<_>>>()?,
                    d: conv(&q.d)?,
                    rel: q.rel,
                })
            })
            .collect::<R<Vec<_>>>()?;
        let lin = inst
            .linear
            .iter()
            .map(|l| Ok(Lin { row: l.row.iter().map(conv).collect::<R<Vec<_>>>()?, c: conv(&l.c)? }))
            .collect::<R<Vec<_>>>()?;
        Ok((quad, lin))
    };
    let Ok((quad, lin)) = convert() else { return Ok(SolveVerdict::Unknown(UnknownReason::Overflow)) };
    let lo: Vec<i128> = inst.nonnegative.iter().map(|&nn| if nn { 0 } else { -b }).collect();
    let mut search = Search {
        n: inst.vars,
        quad,
        lin,
        lo,
        hi: vec![b; inst.vars],
        x: vec![0; inst.vars],
        nodes: 0,
        budget: node_budget,
        accept,
        found: None,
        inst,
    };
    Ok(match search.dfs(0) {
        Ok(()) => SolveVerdict::BoundedUnsat(box_bound),
        Err(Stop::Found) => SolveVerdict::Sat(search.found.take().expect("set on success")),
        Err(Stop::Budget) => SolveVerdict::Unknown(UnknownReason::Budget),
        Err(Stop::Overflow) => SolveVerdict::Unknown(UnknownReason::Overflow),
    })
}

/// Solves with boxes `start, 2·start, …` up to `cap`, stopping at the first Sat or Unknown.
pub fn solve_escalating(
    inst: &IqpInstance,
    start: u64,
    cap: u64,
    node_budget: u64,
    accept: &mut dyn FnMut(&[BigInt]) -> bool,
) -> Result<SolveVerdict, IqpError> {
    let mut b = start.max(1);
    loop {
        let v = solve_filtered(inst, b, node_budget, accept)?;
        if !matches!(v, SolveVerdict::BoundedUnsat(_)) || b >= cap {
            return Ok(v);
        }
        b = (b * 2).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| bi(r)).collect()
    }

    #[test]
    fn single_variable() {
        let mut inst = IqpInstance::new(1, false);
        inst.add_quadratic(m(&[&[1]]), bi(&[0]), BigInt::from(-1), Relation::Le);
        inst.add_le(bi(&[-1]), BigInt::from(-1));
        assert_eq!(solve(&inst, 10, 1000).unwrap(), SolveVerdict::Sat(bi(&[1])));
    }

    #[test]
    fn psd_form_has_no_negative_point() {
        let mut inst = IqpInstance::new(2, true);
        inst.add_quadratic(m(&[&[8, -8], &[-8, 8]]), bi(&[0, 0]), BigInt::from(1), Relation::Le);
        assert_eq!(solve(&inst, 10, 1_000_000).unwrap(), SolveVerdict::BoundedUnsat(10));
    }

    #[test]
    fn indefinite_form() {
        let mut inst = IqpInstance::new(2, true);
        inst.add_quadratic(m(&[&[4, -7], &[-7, 4]]), bi(&[0, 0]), BigInt::from(1), Relation::Le);
        inst.add_eq(bi(&[1, -1]), BigInt::from(0));
        inst.add_le(bi(&[-1, 0]), BigInt::from(-1));
        assert_eq!(solve(&inst, 10, 1000).unwrap(), SolveVerdict::Sat(bi(&[1, 1])));
    }

    #[test]
    fn budget_and_filter() {
        let inst = IqpInstance::new(3, true);
        let v = solve_filtered(&inst, 50, 10, &mut |_| false).unwrap();
        assert_eq!(v, SolveVerdict::Unknown(UnknownReason::Budget));
        let mut inst = IqpInstance::new(1, true);
        inst.add_le(bi(&[1]), BigInt::from(5));
        let v = solve_filtered(&inst, 10, 1000, &mut |x| x[0] == BigInt::from(3)).unwrap();
        assert_eq!(v, SolveVerdict::Sat(bi(&[3])));
        let v = solve_filtered(&inst, 10, 1000, &mut |x| x[0] == BigInt::from(7)).unwrap();
        assert_eq!(v, SolveVerdict::BoundedUnsat(10));
    }

    #[test]
    fn equality_quadratic_and_escalation() {
        let mut inst = IqpInstance::new(2, false);
        // x² + y² = 25 with x ≥ 5 needs a box of at least 5
        inst.add_quadratic(m(&[&[1, 0], &[0, 1]]), bi(&[0, 0]), BigInt::from(-25), Relation::Eq);
        inst.add_le(bi(&[-1, 0]), BigInt::from(-5));
        assert_eq!(solve(&inst, 4, 10_000).unwrap(), SolveVerdict::BoundedUnsat(4));
        let v = solve_escalating(&inst, 2, 16, 10_000, &mut |_| true).unwrap();
        assert_eq!(v, SolveVerdict::Sat(bi(&[5, 0])));
    }

    #[test]
    fn overflow_is_reported() {
        let mut inst = IqpInstance::new(1, true);
        let big = BigInt::from(i128::MAX) * 4;
        inst.add_quadratic(m(&[&[1]]), bi(&[0]), big, Relation::Le);
        assert_eq!(solve(&inst, 4, 100).unwrap(), SolveVerdict::Unknown(UnknownReason::Overflow));
    }

    #[test]
    fn dimension_errors() {
        let mut inst = IqpInstance::new(2, true);
        inst.add_le(bi(&[1]), BigInt::from(0));
        assert!(solve(&inst, 4, 100).is_err());
        let mut inst = IqpInstance::new(2, true);
        inst.add_quadratic(m(&[&[1, 2], &[3, 1]]), bi(&[0, 0]), BigInt::from(0), Relation::Le);
        assert_eq!(solve(&inst, 4, 100), Err(IqpError::NotSymmetric(0)));
    }
}
