//! Templates: cycles factorized as α0 β1^n1 α1 … βp^np αp.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::count_transitions;
use crate::linalg::{nullspace, QMatrix};
use crate::model::{gain, sum_from_unchecked, vals, CostFunction, CounterVector, ModelError, Vass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("connector {0} is not chained")]
    Connector(usize),
    #[error("cycle {0} is not a cycle at its anchor")]
    Cycle(usize),
    #[error("expected {expected} multiplicities, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("zero vector has no decomposition")]
    ZeroVector,
}

/// `alphas.len() == betas.len() + 1`. Cycle `i` sits at `anchors[i]`, connector `i` runs from
/// the previous anchor (or `base`) to the next one (or back to `base`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    pub base: usize,
    pub anchors: Vec<usize>,
    pub alphas: Vec<Vec<usize>>,
    pub betas: Vec<Vec<usize>>,
}

fn check_segment(vass: &Vass, path: &[usize], from: usize, to: usize) -> Result<bool, ModelError> {
    Ok(match vass.check_path(path)? {
        None => from == to,
        Some((s, e)) => s == from && e == to,
    })
}

impl Template {
    pub fn new(
        vass: &Vass,
        base: usize,
        anchors: Vec<usize>,
        alphas: Vec<Vec<usize>>,
        betas: Vec<Vec<usize>>,
    ) -> Result<Self, TemplateError> {
        let t = Template { base, anchors, alphas, betas };
        t.validate(vass)?;
        Ok(t)
    }

    /// Template with empty connectors around consecutive cycles that all share one state.
    pub fn from_cycles(vass: &Vass, betas: Vec<Vec<usize>>) -> Result<Self, TemplateError> {
        let base = vass.check_cycle(&betas[0])?;
        let p = betas.len();
        Template::new(vass, base, vec![base; p], vec![Vec::new(); p + 1], betas)
    }

    pub fn p(&self) -> usize {
        self.betas.len()
    }

    pub fn validate(&self, vass: &Vass) -> Result<(), TemplateError> {
        let p = self.betas.len();
        if self.alphas.len() != p + 1 || self.anchors.len() != p {
            return Err(TemplateError::Arity { expected: p + 1, got: self.alphas.len() });
        }
        let stop = |i: usize| if i == 0 || i > p { self.base } else { self.anchors[i - 1] };
        for i in 0..=p {
            if !check_segment(vass, &self.alphas[i], stop(i), stop(i + 1))? {
                return Err(TemplateError::Connector(i));
            }
        }
        for (i, b) in self.betas.iter().enumerate() {
            if !check_segment(vass, b, self.anchors[i], self.anchors[i])? {
                return Err(TemplateError::Cycle(i));
            }
        }
        Ok(())
    }

    /// α0 α1 … αp, the cycle obtained at n = 0.
    pub fn connector_cycle(&self) -> Vec<usize> {
        self.alphas.concat()
    }

    pub fn total_size(&self) -> usize {
        self.alphas.iter().chain(&self.betas).map(|x| x.len()).sum()
    }

    /// Drops cycles whose multiplicity is zero, merging the neighbouring connectors.
    pub fn restrict(&self, keep: &[bool]) -> Template {
        let mut alphas = vec![self.alphas[0].clone()];
        let mut betas = Vec::new();
        let mut anchors = Vec::new();
        for i in 0..self.p() {
            if keep[i] {
                betas.push(self.betas[i].clone());
                anchors.push(self.anchors[i]);
                alphas.push(self.alphas[i + 1].clone());
            } else {
                alphas.last_mut().unwrap().extend_from_slice(&self.alphas[i + 1]);
            }
        }
        Template { base: self.base, anchors, alphas, betas }
    }
}

fn check_arity(tpl: &Template, n: &[u64]) -> Result<(), TemplateError> {
    if n.len() != tpl.p() {
        return Err(TemplateError::Arity { expected: tpl.p(), got: n.len() });
    }
    Ok(())
}

/// α0 β1^n1 α1 … βp^np αp
pub fn instantiate(tpl: &Template, n: &[u64]) -> Result<Vec<usize>, TemplateError> {
    check_arity(tpl, n)?;
    let mut out = tpl.alphas[0].clone();
    for i in 0..tpl.p() {
        for _ in 0..n[i] {
            out.extend_from_slice(&tpl.betas[i]);
        }
        out.extend_from_slice(&tpl.alphas[i + 1]);
    }
    Ok(out)
}

/// 2·Sum_0(Tpl(n)) = nᵀBn + c·n + e
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateCoefficients {
    pub b: Vec<Vec<BigInt>>,
    pub c: Vec<BigInt>,
    pub e: BigInt,
}

impl TemplateCoefficients {
    pub fn eval(&self, n: &[BigInt]) -> BigInt {
        let p = n.len();
        let mut s = self.e.clone();
        for i in 0..p {
            s += &self.c[i] * &n[i];
            for j in 0..p {
                s += &self.b[i][j] * &n[i] * &n[j];
            }
        }
        s
    }
}

/// Summaries of the pieces of a template.
pub(crate) struct Pieces {
    pub ga: Vec<CounterVector>,
    pub va: Vec<CounterVector>,
    pub sa: Vec<BigInt>,
    pub gb: Vec<CounterVector>,
    pub vb: Vec<CounterVector>,
    pub sb: Vec<BigInt>,
}

pub(crate) fn pieces(vass: &Vass, cost: &CostFunction, tpl: &Template) -> Pieces {
    let z = CounterVector::zeros(vass.dim());
    Pieces {
        ga: tpl.alphas.iter().map(|a| gain(vass, a)).collect(),
        va: tpl.alphas.iter().map(|a| vals(vass, cost, a)).collect(),
        sa: tpl.alphas.iter().map(|a| sum_from_unchecked(vass, cost, &z, a)).collect(),
        gb: tpl.betas.iter().map(|b| gain(vass, b)).collect(),
        vb: tpl.betas.iter().map(|b| vals(vass, cost, b)).collect(),
        sb: tpl.betas.iter().map(|b| sum_from_unchecked(vass, cost, &z, b)).collect(),
    }
}

pub fn template_coefficients(vass: &Vass, cost: &CostFunction, tpl: &Template) -> TemplateCoefficients {
    let p = tpl.p();
    let pc = pieces(vass, cost, tpl);
    let k = vass.dim();
    let mut b = vec![vec![BigInt::zero(); p]; p];
    for i in 0..p {
        for j in 0..p {
            let (lo, hi) = (i.min(j), i.max(j));
            b[i][j] = pc.gb[lo].dot(&pc.vb[hi]);
        }
    }
    let two = BigInt::from(2);
    let mut c = vec![BigInt::zero(); p];
    // gain of the connectors strictly before cycle i, vals of connectors from i on
    let mut g_before = CounterVector::zeros(k);
    for i in 0..p {
        g_before += &pc.ga[i];
        let mut v_after = CounterVector::zeros(k);
        for va in &pc.va[i + 1..] {
            v_after += va;
        }
        c[i] = &two * &pc.sb[i] - pc.gb[i].dot(&pc.vb[i]) + &two * g_before.dot(&pc.vb[i])
            + &two * pc.gb[i].dot(&v_after);
    }
    let mut e = BigInt::zero();
    let mut g = CounterVector::zeros(k);
    for i in 0..=p {
        e += &two * (&pc.sa[i] + g.dot(&pc.va[i]));
        g += &pc.ga[i];
    }
    TemplateCoefficients { b, c, e }
}

/// (p+1)×(p+1) matrix with (n,1)ᵀ A (n,1) = 2·Gain(Tpl(n))·Vals(Tpl(n)); the last
/// coordinate stands for the concatenated connectors.
pub fn balance_matrix(vass: &Vass, cost: &CostFunction, tpl: &Template) -> Vec<Vec<BigInt>> {
    let (g, v) = extended_cycle_summaries(vass, cost, tpl);
    pair_matrix(&g, &v)
}

pub(crate) fn extended_cycle_summaries(
    vass: &Vass,
    cost: &CostFunction,
    tpl: &Template,
) -> (Vec<CounterVector>, Vec<CounterVector>) {
    let mut g: Vec<CounterVector> = tpl.betas.iter().map(|b| gain(vass, b)).collect();
    let mut v: Vec<CounterVector> = tpl.betas.iter().map(|b| vals(vass, cost, b)).collect();
    let conn = tpl.connector_cycle();
    g.push(gain(vass, &conn));
    v.push(vals(vass, cost, &conn));
    (g, v)
}

/// M[i][j] = G_i·V_j + G_j·V_i
pub fn pair_matrix(g: &[CounterVector], v: &[CounterVector]) -> Vec<Vec<BigInt>> {
    let n = g.len();
    (0..n).map(|i| (0..n).map(|j| g[i].dot(&v[j]) + g[j].dot(&v[i])).collect()).collect()
}

/// Template whose cycles are β_{p+1}, β_p, …, β_1 where β_{p+1} = α0…αp. The connector
/// entering β_k is α_{k+1}…α_p α_0…α_{k-1}.
pub fn reversed_template(tpl: &Template) -> Template {
    let p = tpl.p();
    let a = &tpl.alphas;
    let seg = |lo: usize, hi: usize| -> Vec<usize> {
        if lo > hi {
            Vec::new()
        } else {
            a[lo..=hi].concat()
        }
    };
    let mut alphas = vec![Vec::new()];
    let mut betas = vec![tpl.connector_cycle()];
    let mut anchors = vec![tpl.base];
    for k in (1..=p).rev() {
        let mut conn = seg(k + 1, p);
        conn.extend(seg(0, k - 1));
        alphas.push(conn);
        betas.push(tpl.betas[k - 1].clone());
        anchors.push(tpl.anchors[k - 1]);
    }
    alphas.push(seg(1, p));
    Template { base: tpl.base, anchors, alphas, betas }
}

/// With β_{p+1} = α0…αp: d[i] = −(G_i·V_{p+1} + G_{p+1}·V_i), h = −G_{p+1}·V_{p+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearData {
    pub d: Vec<BigInt>,
    pub h: BigInt,
}

pub fn linear_data(vass: &Vass, cost: &CostFunction, tpl: &Template) -> LinearData {
    let (g, v) = extended_cycle_summaries(vass, cost, tpl);
    let p = tpl.p();
    let d = (0..p).map(|i| -(g[i].dot(&v[p]) + g[p].dot(&v[i]))).collect();
    LinearData { d, h: -g[p].dot(&v[p]) }
}

/// Trans(n) = constant + Σ n_i · linear[i]
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransMap {
    pub constant: Vec<u64>,
    pub linear: Vec<Vec<u64>>,
}

impl TransMap {
    pub fn apply(&self, n: &[u64]) -> Vec<u64> {
        let mut out = self.constant.clone();
        for (i, col) in self.linear.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(col) {
                *o += n[i] * c;
            }
        }
        out
    }

    pub fn linear_part(&self, n: &[BigInt]) -> Vec<BigInt> {
        let m = self.constant.len();
        let mut out = vec![BigInt::zero(); m];
        for (i, col) in self.linear.iter().enumerate() {
            for t in 0..m {
                out[t] += &n[i] * BigInt::from(col[t]);
            }
        }
        out
    }
}

pub fn trans_map(vass: &Vass, tpl: &Template) -> TransMap {
    let m = vass.num_transitions();
    TransMap {
        constant: count_transitions(m, &tpl.connector_cycle()),
        linear: tpl.betas.iter().map(|b| count_transitions(m, b)).collect(),
    }
}

fn support(n: &[BigInt]) -> Vec<usize> {
    (0..n.len()).filter(|&i| !n[i].is_zero()).collect()
}

/// Scales `x` (rational, nonnegative) to the least integer vector; returns (vector, factor).
fn integer_multiple(x: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let l = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let lr = BigRational::from_integer(l.clone());
    (x.iter().map(|v| (v * &lr).to_integer()).collect(), l)
}

/// A vector with support at most `m` inside supp(n) whose cycle-part transition counts are
/// a positive integer multiple `t` of those of `n`. Returns (n0, t).
fn subvector(tm: &TransMap, n: &[BigInt]) -> (Vec<BigInt>, BigInt) {
    let m = tm.constant.len();
    let mut x: Vec<BigRational> = n.iter().map(|v| BigRational::from_integer(v.clone())).collect();
    loop {
        let supp: Vec<usize> = (0..x.len()).filter(|&i| !x[i].is_zero()).collect();
        if supp.len() <= m {
            break;
        }
        // columns of the support are dependent: pick a kernel vector
        let cols: QMatrix = (0..m)
            .map(|t| supp.iter().map(|&i| BigRational::from_integer(BigInt::from(tm.linear[i][t]))).collect())
            .collect();
        let ker = nullspace(&cols, supp.len());
        let mut v = ker.into_iter().next().expect("more columns than rows");
        if !v.iter().any(|a| a.is_positive()) {
            v.iter_mut().for_each(|a| *a = -a.clone());
        }
        let mut step: Option<BigRational> = None;
        for (a, &i) in supp.iter().enumerate() {
            if v[a].is_positive() {
                let r = &x[i] / &v[a];
                if step.as_ref().is_none_or(|s| r < *s) {
                    step = Some(r);
                }
            }
        }
        let step = step.unwrap();
        for (a, &i) in supp.iter().enumerate() {
            x[i] -= &step * &v[a];
        }
        // exact arithmetic leaves at least one coordinate at zero
    }
    integer_multiple(&x)
}

/// Writes n = Σ r_i z_i with |supp(z_i)| ≤ m and the cycle-part transition counts of each z_i
/// equal to t_i times those of n. Returns (r_i, z_i, t_i).
pub fn decompose_short_vectors(
    vass: &Vass,
    tpl: &Template,
    n: &[BigInt],
) -> Result<Vec<(BigRational, Vec<BigInt>, BigInt)>, TemplateError> {
    if n.len() != tpl.p() {
        return Err(TemplateError::Arity { expected: tpl.p(), got: n.len() });
    }
    if n.iter().all(|x| x.is_zero()) {
        return Err(TemplateError::ZeroVector);
    }
    let tm = trans_map(vass, tpl);
    Ok(decompose_rec(&tm, n))
}

fn decompose_rec(tm: &TransMap, n: &[BigInt]) -> Vec<(BigRational, Vec<BigInt>, BigInt)> {
    let m = tm.constant.len();
    if support(n).len() <= m {
        return vec![(BigRational::one(), n.to_vec(), BigInt::one())];
    }
    let (n0, t0) = subvector(tm, n);
    // largest r = p/q with n - r·n0 >= 0
    let mut r: Option<BigRational> = None;
    for i in 0..n.len() {
        if n0[i].is_positive() {
            let c = BigRational::new(n[i].clone(), n0[i].clone());
            if r.as_ref().is_none_or(|x| c < *x) {
                r = Some(c);
            }
        }
    }
    let r = r.unwrap();
    let (pn, qd) = (r.numer().clone(), r.denom().clone());
    let k: Vec<BigInt> = n.iter().zip(&n0).map(|(a, b)| &qd * a - &pn * b).collect();
    let mut out = Vec::new();
    if k.iter().any(|x| !x.is_zero()) {
        // linear counts of k are (q - p·t0) times those of n
        let factor = &qd - &pn * &t0;
        for (s, y, t) in decompose_rec(tm, &k) {
            out.push((s / BigRational::from_integer(qd.clone()), y, t * &factor));
        }
    }
    out.push((r, n0, t0));
    out
}

/// Linear equality system over n: `rows · (n, 1) = 0` for each row, plus `n_i = 0` for i in `zero`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedSystem {
    pub zero: Vec<usize>,
    /// Each row has p+1 entries; the last multiplies the constant 1.
    pub rows: Vec<Vec<BigInt>>,
}

impl BalancedSystem {
    pub fn satisfied_by(&self, n: &[BigInt]) -> bool {
        let p = n.len();
        if self.zero.iter().any(|&i| !n[i].is_zero()) {
            return false;
        }
        self.rows.iter().all(|r| {
            let s: BigInt = (0..p).map(|j| &r[j] * &n[j]).sum::<BigInt>() + &r[p];
            s.is_zero()
        })
    }
}

/// One system per P ⊆ {1..p} (ordered by |P|, then lexicographically): n_i = 0 on P, and
/// (A·(n,1))_i = 0 for every i outside P together with the connector row p+1.
///
/// Sound for every template; complete (every balanced n satisfies the system with P equal to
/// its zero set) whenever the balance form is copositive, which holds when no cycle of the
/// VASS has a negative Gain·Vals.
pub fn balanced_linear_systems(vass: &Vass, cost: &CostFunction, tpl: &Template) -> Vec<BalancedSystem> {
    let a = balance_matrix(vass, cost, tpl);
    let p = tpl.p();
    let mut masks: Vec<u32> = (0..(1u32 << p)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
        .into_iter()
        .map(|mask| {
            let zero: Vec<usize> = (0..p).filter(|i| mask >> i & 1 == 1).collect();
            let rows = (0..=p).filter(|i| *i == p || mask >> i & 1 == 0).map(|i| a[i].clone()).collect();
            BalancedSystem { zero, rows }
        })
        .collect()
}

#[derive(Clone, Debug)]
enum Seg {
    Conn(Vec<usize>),
    Cyc(Vec<usize>, usize),
}

fn flatten(segs: &[Seg]) -> Vec<usize> {
    segs.iter()
        .flat_map(|s| match s {
            Seg::Conn(p) | Seg::Cyc(p, _) => p.iter().copied(),
        })
        .collect()
}

fn merge_connectors(segs: &mut Vec<Seg>) {
    let mut out: Vec<Seg> = Vec::with_capacity(segs.len());
    for s in segs.drain(..) {
        match (out.last_mut(), s) {
            (Some(Seg::Conn(prev)), Seg::Conn(p)) => prev.extend(p),
            (_, s) => out.push(s),
        }
    }
    *segs = out;
}

/// Cuts simple cycles out of connectors until every connector visits each state at most once.
fn extract_cycles(vass: &Vass, segs: &mut Vec<Seg>) -> bool {
    let mut any = false;
    loop {
        merge_connectors(segs);
        let hit = segs.iter().enumerate().find_map(|(si, s)| match s {
            Seg::Conn(p) => first_repeat(vass, p).map(|r| (si, r)),
            Seg::Cyc(..) => None,
        });
        let Some((si, (a, b))) = hit else { return any };
        let Seg::Conn(path) = &segs[si] else { unreachable!() };
        let anchor = vass.transition(path[a]).source;
        let parts = [
            Seg::Conn(path[..a].to_vec()),
            Seg::Cyc(path[a..b].to_vec(), anchor),
            Seg::Conn(path[b..].to_vec()),
        ];
        segs.splice(si..=si, parts);
        any = true;
    }
}

fn same_cycle(s: &Seg, c: &[usize], a: usize) -> bool {
    matches!(s, Seg::Cyc(x, y) if x == c && *y == a)
}

fn is_empty_conn(s: &Seg) -> bool {
    matches!(s, Seg::Conn(p) if p.is_empty())
}

/// Moves runs of equal cycles next to each other. Of the two ways to join neighbouring runs
/// one never increases Sum_g, and that one is taken.
fn group_runs(vass: &Vass, cost: &CostFunction, g: &CounterVector, segs: &mut Vec<Seg>) {
    'restart: loop {
        for i in 0..segs.len() {
            let Seg::Cyc(c, a) = segs[i].clone() else { continue };
            // first run of this cycle ends at r1_end (inclusive index of its last copy)
            let mut r1_end = i;
            let mut k = i + 1;
            while k < segs.len() && (is_empty_conn(&segs[k]) || same_cycle(&segs[k], &c, a)) {
                if same_cycle(&segs[k], &c, a) {
                    r1_end = k;
                }
                k += 1;
            }
            let Some(j) = (r1_end + 1..segs.len()).find(|&j| same_cycle(&segs[j], &c, a)) else { continue };
            let mut r2_end = j;
            let mut k = j + 1;
            while k < segs.len() && (is_empty_conn(&segs[k]) || same_cycle(&segs[k], &c, a)) {
                if same_cycle(&segs[k], &c, a) {
                    r2_end = k;
                }
                k += 1;
            }
            let r1: Vec<Seg> = segs[i..=r1_end].to_vec();
            let mid: Vec<Seg> = segs[r1_end + 1..j].to_vec();
            let r2: Vec<Seg> = segs[j..=r2_end].to_vec();
            let head = &segs[..i];
            let tail = &segs[r2_end + 1..];
            let opt1: Vec<Seg> = [head, &r1, &r2, &mid, tail].concat();
            let opt2: Vec<Seg> = [head, &mid, &r1, &r2, tail].concat();
            let s1 = sum_from_unchecked(vass, cost, g, &flatten(&opt1));
            let s2 = sum_from_unchecked(vass, cost, g, &flatten(&opt2));
            *segs = if s1 <= s2 { opt1 } else { opt2 };
            continue 'restart;
        }
        return;
    }
}

/// Splits a cycle into a template with simple cycles and connectors that visit each state at
/// most once, keeping the transition multiset and never increasing Sum_g. Returns the template
/// together with the multiplicities that reproduce the rearranged cycle.
pub fn minimal_factorization(
    vass: &Vass,
    cost: &CostFunction,
    cycle: &[usize],
    g: &CounterVector,
) -> Result<(Template, Vec<u64>), TemplateError> {
    let base = vass.check_cycle(cycle)?;
    if g.len() != vass.dim() {
        return Err(ModelError::DimensionMismatch { expected: vass.dim(), got: g.len() }.into());
    }
    let mut segs = vec![Seg::Conn(cycle.to_vec())];
    extract_cycles(vass, &mut segs);
    loop {
        group_runs(vass, cost, g, &mut segs);
        if !extract_cycles(vass, &mut segs) {
            break;
        }
    }
    let mut alphas: Vec<Vec<usize>> = vec![Vec::new()];
    let mut betas: Vec<Vec<usize>> = Vec::new();
    let mut anchors = Vec::new();
    let mut n: Vec<u64> = Vec::new();
    for s in &segs {
        match s {
            Seg::Conn(p) => alphas.last_mut().unwrap().extend_from_slice(p),
            Seg::Cyc(c, a) => {
                let repeat = alphas.last().unwrap().is_empty()
                    && betas.last().is_some_and(|b| b == c)
                    && anchors.last() == Some(a);
                if repeat {
                    *n.last_mut().unwrap() += 1;
                } else {
                    betas.push(c.clone());
                    anchors.push(*a);
                    n.push(1);
                    alphas.push(Vec::new());
                }
            }
        }
    }
    let tpl = Template::new(vass, base, anchors, alphas, betas)?;
    Ok((tpl, n))
}

/// Bounds [a, b) of the first closed subpath: b is the smallest index at which a state repeats.
fn first_repeat(vass: &Vass, path: &[usize]) -> Option<(usize, usize)> {
    let mut seen_at: Vec<Option<usize>> = vec![None; vass.num_states()];
    let &t0 = path.first()?;
    seen_at[vass.transition(t0).source] = Some(0);
    for (i, &t) in path.iter().enumerate() {
        let d = vass.transition(t).target;
        if let Some(a) = seen_at[d] {
            return Some((a, i + 1));
        }
        seen_at[d] = Some(i + 1);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::running_example;
    use crate::model::sum_from;

    fn ae_tpl(order: [&str; 2]) -> (Vass, CostFunction, Template) {
        let (v, c) = running_example();
        let cyc = |n: &str| match n {
            "12" => vec![0, 1],
            _ => vec![2, 3],
        };
        let t = Template::from_cycles(&v, vec![cyc(order[0]), cyc(order[1])]).unwrap();
        (v, c, t)
    }

    fn bi(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn instantiate_unfolds() {
        let (_, _, t) = ae_tpl(["12", "34"]);
        assert_eq!(instantiate(&t, &[1, 1]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(instantiate(&t, &[2, 1]).unwrap(), vec![0, 1, 0, 1, 2, 3]);
        assert_eq!(instantiate(&t, &[0, 0]).unwrap(), Vec::<usize>::new());
        assert!(instantiate(&t, &[1]).is_err());
    }

    #[test]
    fn coefficient_matrices() {
        let (v, c, t1) = ae_tpl(["12", "34"]);
        assert_eq!(template_coefficients(&v, &c, &t1).b, bi(&[&[4, -1], &[-1, 4]]));
        let (_, _, t2) = ae_tpl(["34", "12"]);
        assert_eq!(template_coefficients(&v, &c, &t2).b, bi(&[&[4, -7], &[-7, 4]]));
        let a = balance_matrix(&v, &c, &t1);
        assert_eq!(a, bi(&[&[8, -8, 0], &[-8, 8, 0], &[0, 0, 0]]));
    }

    #[test]
    fn coefficient_identity_small_box() {
        let (v, c, t) = ae_tpl(["34", "12"]);
        let co = template_coefficients(&v, &c, &t);
        for a in 0..4u64 {
            for b in 0..4u64 {
                let path = instantiate(&t, &[a, b]).unwrap();
                let s = sum_from(&v, &c, &CounterVector::zeros(2), &path).unwrap();
                assert_eq!(BigInt::from(2) * s, co.eval(&[BigInt::from(a), BigInt::from(b)]));
            }
        }
    }

    #[test]
    fn reversed_ae() {
        let (v, c, t1) = ae_tpl(["12", "34"]);
        let r = reversed_template(&t1);
        r.validate(&v).unwrap();
        assert_eq!(r.p(), 3);
        assert!(r.betas[0].is_empty());
        let b = template_coefficients(&v, &c, &r).b;
        assert_eq!(b[1][1..].to_vec(), vec![BigInt::from(4), BigInt::from(-7)]);
        assert_eq!(b[2][1..].to_vec(), vec![BigInt::from(-7), BigInt::from(4)]);
    }

    #[test]
    fn linear_data_examples() {
        let (v, c) = running_example();
        let b = v.state_index("B").unwrap();
        let t = Template::new(&v, b, vec![b], vec![vec![0, 1], vec![]], vec![vec![2, 3]]).unwrap();
        let ld = linear_data(&v, &c, &t);
        assert_eq!(ld.d, vec![BigInt::from(8)]);
        assert_eq!(ld.h, BigInt::from(-4));
        let (_, _, t1) = ae_tpl(["12", "34"]);
        let ld = linear_data(&v, &c, &t1);
        assert!(ld.d.iter().all(|x| x.is_zero()) && ld.h.is_zero());
    }

    #[test]
    fn trans_map_counts() {
        let (v, _, t) = ae_tpl(["12", "34"]);
        let tm = trans_map(&v, &t);
        assert_eq!(tm.apply(&[1, 1]), vec![1, 1, 1, 1]);
        assert_eq!(tm.apply(&[3, 0]), vec![3, 3, 0, 0]);
    }

    #[test]
    fn decompose_trivial() {
        let (v, _, t) = ae_tpl(["12", "34"]);
        let n = vec![BigInt::from(3), BigInt::from(5)];
        let d = decompose_short_vectors(&v, &t, &n).unwrap();
        assert_eq!(d, vec![(BigRational::one(), n.clone(), BigInt::one())]);
        assert!(decompose_short_vectors(&v, &t, &[BigInt::zero(), BigInt::zero()]).is_err());
    }

    #[test]
    fn ae_balanced_system_is_equal_multiplicities() {
        let (v, c, t) = ae_tpl(["12", "34"]);
        let sys = balanced_linear_systems(&v, &c, &t);
        assert_eq!(sys.len(), 4);
        assert!(sys[0].zero.is_empty());
        for a in 0..6i64 {
            for b in 0..6i64 {
                let n = [BigInt::from(a), BigInt::from(b)];
                assert_eq!(sys[0].satisfied_by(&n), a == b);
            }
        }
        let full = sys.last().unwrap();
        assert!(full.satisfied_by(&[BigInt::zero(), BigInt::zero()]));
    }

    #[test]
    fn factorization_of_block() {
        let (v, c) = running_example();
        let z = CounterVector::zeros(2);
        let (t, n) = minimal_factorization(&v, &c, &[0, 1, 2, 3], &z).unwrap();
        assert_eq!(n, vec![1, 1]);
        let mut cycles = t.betas.clone();
        cycles.sort();
        assert_eq!(cycles, vec![vec![0, 1], vec![2, 3]]);
        let inst = instantiate(&t, &n).unwrap();
        assert!(sum_from(&v, &c, &z, &inst).unwrap() <= BigInt::from(6));

        let (t, n) = minimal_factorization(&v, &c, &[0, 1], &z).unwrap();
        assert_eq!((t.betas.clone(), n), (vec![vec![0, 1]], vec![1]));
        assert!(t.alphas.iter().all(|a| a.is_empty()));

        let input = [0, 1, 2, 3, 0, 1];
        let (t, n) = minimal_factorization(&v, &c, &input, &z).unwrap();
        let inst = instantiate(&t, &n).unwrap();
        assert_eq!(count_transitions(4, &inst), count_transitions(4, &input));
        assert!(sum_from(&v, &c, &z, &inst).unwrap() <= sum_from(&v, &c, &z, &input).unwrap());
        assert_eq!(t.p(), 2);
    }
}
