//! The regular average-value problem over ℤ.

use std::cell::OnceCell;
use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::integer::{analyze, require_integer, ZAnalysis};
use super::{certify, split_rational, Answer, Budget, DecisionError, Problem, Step};
use crate::graph::{min_mean_cycle, min_weight_path, prefix_to, pump_count, shortest_path, MinPath, WeightedEdge};
use crate::iqp::{solve_escalating, solve_filtered, IqpInstance, Relation, SolveVerdict};
use crate::linalg::copositivity_witness;
use crate::model::{
    gain, sum_from_unchecked, vals, CostFunction, CounterVector, Domain, Lasso, Transition, Vass,
};
use crate::semantics::for_each_cycle;
use crate::templates::{
    balance_matrix, balanced_linear_systems, instantiate, minimal_factorization, template_coefficients, Template,
    TemplateCoefficients,
};

/// Longest cycle the Step-2 witness construction will unfold.
const MAX_WITNESS_LEN: u64 = 5_000_000;

/// A template with multiplicities n1, n2 such that Tpl(t·n1 + n2) is balanced for every t and
/// n1ᵀBn1 < 0, so its per-iteration cost tends to −∞.
#[derive(Debug, Clone)]
struct NegativeTemplate {
    tpl: Template,
    coef: TemplateCoefficients,
    n1: Vec<BigInt>,
    n2: Vec<BigInt>,
    prefix: Vec<usize>,
}

/// Cheapest prefix for a fixed balanced cycle.
#[derive(Debug, Clone)]
enum BestPrefix {
    None,
    Exact { prefix: Vec<usize>, value: BigRational },
    /// Values arbitrarily low by pumping `pump`.
    Pumpable { lead: Vec<usize>, pump: Vec<usize>, pump_weight: BigInt, tail: Vec<usize>, base_sum: BigInt },
}

#[derive(Debug)]
struct Candidate {
    cycle: Vec<usize>,
    step: Step,
    best: OnceCell<BestPrefix>,
}

#[derive(Debug, Clone)]
enum ZeroGain {
    NotApplicable,
    /// Exact least value over all lassos, with a witness; `None` when no cycle is reachable.
    Exact(Option<(BigRational, Lasso)>),
}

/// λ-independent analysis for the regular average-value problem; answers queries for any
/// threshold. Parts are computed on first use.
pub struct AverageAnalyzer<'a> {
    vass: &'a Vass,
    cost: &'a CostFunction,
    budget: Budget,
    z: ZAnalysis,
    templates: OnceCell<Vec<Template>>,
    negative_template: OnceCell<Option<NegativeTemplate>>,
    step3: OnceCell<Vec<Candidate>>,
    zero_gain: OnceCell<ZeroGain>,
    enumeration: OnceCell<Vec<Candidate>>,
}

fn dot_zero(vass: &Vass, cost: &CostFunction, c: &[usize]) -> bool {
    gain(vass, c).dot(&vals(vass, cost, c)).is_zero()
}

impl<'a> AverageAnalyzer<'a> {
    pub fn new(vass: &'a Vass, cost: &'a CostFunction, budget: &Budget) -> Result<Self, DecisionError> {
        require_integer(vass)?;
        Ok(AverageAnalyzer {
            vass,
            cost,
            budget: budget.clone(),
            z: analyze(vass, cost, budget),
            templates: OnceCell::new(),
            negative_template: OnceCell::new(),
            step3: OnceCell::new(),
            zero_gain: OnceCell::new(),
            enumeration: OnceCell::new(),
        })
    }

    pub fn query(&self, lambda: &BigRational) -> Answer {
        let problem = Problem::RegularAverage(lambda.clone());
        let b = &self.budget;
        if let Some(l) = self.z.negative_lasso(self.vass) {
            if let Some(v) = certify(self.vass, self.cost, &l, &problem) {
                return Answer::yes(l, v, Step::Step1, b);
            }
        }
        if self.z.all_positive() {
            return Answer::no("every reachable cycle has positive Gain·Vals, so every value is +inf", Step::Step1, b);
        }
        if let Some(nt) = self.negative_template() {
            if let Some(l) = self.negative_template_witness(nt, lambda) {
                if let Some(v) = certify(self.vass, self.cost, &l, &problem) {
                    return Answer::yes(l, v, Step::Step2, b);
                }
            }
        }
        if let Some(a) = self.first_candidate(self.step3(), lambda, &problem) {
            return a;
        }
        match self.zero_gain() {
            ZeroGain::Exact(Some((mu, l))) => {
                if mu <= lambda {
                    if let Some(v) = certify(self.vass, self.cost, l, &problem) {
                        return Answer::yes(l.clone(), v, Step::ZeroGain, b);
                    }
                } else {
                    return Answer::no(
                        format!("every cycle has zero gain; the least value over all lassos is {}", crate::model::fmt_rational(mu)),
                        Step::ZeroGain,
                        b,
                    );
                }
            }
            ZeroGain::Exact(None) => return Answer::no("no reachable cycle", Step::ZeroGain, b),
            ZeroGain::NotApplicable => {}
        }
        if let Some(a) = self.first_candidate(self.enumeration(), lambda, &problem) {
            return a;
        }
        let mut report = format!(
            "no witness within the budget (templates examined: {}, step-3 cycles: {}, enumerated cycles up to length {}: {})",
            self.templates().len(),
            self.step3().len(),
            b.enumeration_cycle_len,
            self.enumeration().len()
        );
        let neg = self.z.negative_report();
        if !neg.is_empty() {
            report.push_str(&format!("; -inf search open: {neg}"));
        }
        Answer::unknown(report, Step::Enumeration, b)
    }

    fn templates(&self) -> &Vec<Template> {
        self.templates.get_or_init(|| {
            let mut out: Vec<Template> = Vec::new();
            let mut seen: HashSet<Template> = HashSet::new();
            let limit = self.budget.max_templates;
            let zero = CounterVector::zeros(self.vass.dim());
            for found in &self.z.balanced {
                for c in found {
                    if let Ok((t, _)) = minimal_factorization(self.vass, self.cost, c, &zero) {
                        if t.p() > 0 && seen.insert(t.clone()) {
                            out.push(t);
                        }
                    }
                }
            }
            for p in 1..=self.budget.max_template_cycles {
                for d in &self.z.comps {
                    let mut allowed = vec![false; self.vass.num_states()];
                    for &s in &d.comp.states {
                        allowed[s] = true;
                    }
                    let c = d.cycles.len();
                    if c < p {
                        continue;
                    }
                    let mut idx = vec![0usize; p];
                    'seq: loop {
                        let distinct = (0..p).all(|i| (0..i).all(|j| idx[i] != idx[j]));
                        if distinct {
                            if out.len() >= limit {
                                return out;
                            }
                            let betas: Vec<Vec<usize>> = idx.iter().map(|&i| d.cycles[i].clone()).collect();
                            if let Some(t) = self.connect(&betas, &allowed) {
                                if seen.insert(t.clone()) {
                                    out.push(t);
                                }
                            }
                        }
                        let mut k = p;
                        loop {
                            if k == 0 {
                                break 'seq;
                            }
                            k -= 1;
                            idx[k] += 1;
                            if idx[k] < c {
                                break;
                            }
                            idx[k] = 0;
                        }
                    }
                }
            }
            out
        })
    }

    /// Template over the given cycles with shortest connectors between their start states.
    fn connect(&self, betas: &[Vec<usize>], allowed: &[bool]) -> Option<Template> {
        let anchors: Vec<usize> = betas.iter().map(|b| self.vass.transition(b[0]).source).collect();
        let base = anchors[0];
        let p = betas.len();
        let mut alphas = vec![Vec::new()];
        for i in 0..p {
            let to = if i + 1 < p { anchors[i + 1] } else { base };
            alphas.push(shortest_path(self.vass, &[anchors[i]], to, Some(allowed))?);
        }
        Template::new(self.vass, base, anchors, alphas, betas.to_vec()).ok()
    }

    fn negative_template(&self) -> Option<&NegativeTemplate> {
        self.negative_template
            .get_or_init(|| {
                for tpl in self.templates() {
                    if let Some(nt) = self.negative_certificate(tpl) {
                        return Some(nt);
                    }
                }
                None
            })
            .as_ref()
    }

    /// Finds n1, n2 ≥ 0 with n1ᵀBn1 ≤ −1 such that n2 and n1 + n2 solve the same balanced
    /// system S_P.
    fn negative_certificate(&self, tpl: &Template) -> Option<NegativeTemplate> {
        let coef = template_coefficients(self.vass, self.cost, tpl);
        copositivity_witness(&coef.b)?;
        let prefix = prefix_to(self.vass, tpl.base)?;
        let a = balance_matrix(self.vass, self.cost, tpl);
        let p = tpl.p();
        for sys in balanced_linear_systems(self.vass, self.cost, tpl) {
            let mut inst = IqpInstance::new(2 * p, true);
            let mut q = vec![vec![BigInt::zero(); 2 * p]; 2 * p];
            for i in 0..p {
                for j in 0..p {
                    q[i][j] = coef.b[i][j].clone();
                }
            }
            inst.add_quadratic(q, vec![BigInt::zero(); 2 * p], BigInt::from(1), Relation::Le);
            for &i in &sys.zero {
                for off in [0, p] {
                    let mut row = vec![BigInt::zero(); 2 * p];
                    row[off + i] = BigInt::from(1);
                    inst.add_eq(row, BigInt::zero());
                }
            }
            for r in (0..=p).filter(|r| *r == p || !sys.zero.contains(r)) {
                let mut h = vec![BigInt::zero(); 2 * p];
                let mut s = vec![BigInt::zero(); 2 * p];
                for j in 0..p {
                    h[j] = a[r][j].clone();
                    s[p + j] = a[r][j].clone();
                }
                inst.add_eq(h, BigInt::zero());
                inst.add_eq(s, -a[r][p].clone());
            }
            let b = &self.budget;
            if let Ok(SolveVerdict::Sat(x)) = solve_escalating(&inst, b.box_start, b.box_cap, b.node_budget, &mut |_| true) {
                return Some(NegativeTemplate {
                    tpl: tpl.clone(),
                    coef: coef.clone(),
                    n1: x[..p].to_vec(),
                    n2: x[p..].to_vec(),
                    prefix,
                });
            }
        }
        None
    }

    /// Smallest t (found by doubling, then bisection) with Sum_g(Tpl(t·n1 + n2)) ≤ λ·Len.
    fn negative_template_witness(&self, nt: &NegativeTemplate, lambda: &BigRational) -> Option<Lasso> {
        let (lp, lq) = split_rational(lambda);
        let tpl = &nt.tpl;
        let p = tpl.p();
        let g = gain(self.vass, &nt.prefix);
        let conn = tpl.connector_cycle();
        let vconn = vals(self.vass, self.cost, &conn);
        let vb: Vec<CounterVector> = tpl.betas.iter().map(|b| vals(self.vass, self.cost, b)).collect();
        let gv_conn = g.dot(&vconn);
        let gv: Vec<BigInt> = vb.iter().map(|v| g.dot(v)).collect();
        let n_at = |t: &BigInt| -> Vec<BigInt> { (0..p).map(|i| t * &nt.n1[i] + &nt.n2[i]).collect() };
        let f = |t: &BigInt| -> BigInt {
            let n = n_at(t);
            let mut two_sum = nt.coef.eval(&n) + BigInt::from(2) * &gv_conn;
            let mut len = BigInt::from(conn.len());
            for i in 0..p {
                two_sum += BigInt::from(2) * &gv[i] * &n[i];
                len += BigInt::from(tpl.betas[i].len()) * &n[i];
            }
            &lq * two_sum - BigInt::from(2) * &lp * len
        };
        let empty_at_zero = conn.is_empty() && nt.n2.iter().zip(&tpl.betas).all(|(x, b)| x.is_zero() || b.is_empty());
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        if empty_at_zero || f(&hi).is_positive() {
            hi = BigInt::from(1);
            let mut steps = 0;
            while f(&hi).is_positive() {
                lo = hi.clone();
                hi *= 2;
                steps += 1;
                if steps > 64 {
                    return None;
                }
            }
            while &hi - &lo > BigInt::from(1) {
                let mid: BigInt = (&lo + &hi) / 2;
                if f(&mid).is_positive() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let n: Vec<u64> = n_at(&hi).iter().map(|x| x.to_u64()).collect::<Option<_>>()?;
        let len: u64 = conn.len() as u64 + (0..p).map(|i| n[i] * tpl.betas[i].len() as u64).sum::<u64>();
        if len == 0 || len > MAX_WITNESS_LEN {
            return None;
        }
        let cycle = instantiate(tpl, &n).ok()?;
        Some(Lasso::new(nt.prefix.clone(), cycle))
    }

    fn step3(&self) -> &Vec<Candidate> {
        self.step3.get_or_init(|| {
            let mut seen: HashSet<Vec<usize>> = HashSet::new();
            let mut out = Vec::new();
            let mut push = |c: Vec<usize>, out: &mut Vec<Candidate>| {
                if !c.is_empty() && dot_zero(self.vass, self.cost, &c) && seen.insert(c.clone()) {
                    out.push(Candidate { cycle: c, step: Step::Step3, best: OnceCell::new() });
                }
            };
            for found in &self.z.balanced {
                for c in found {
                    push(c.clone(), &mut out);
                }
            }
            for tpl in self.templates() {
                for n in self.balanced_multiplicities(tpl) {
                    if let Ok(c) = instantiate(tpl, &n) {
                        push(c, &mut out);
                    }
                }
            }
            out
        })
    }

    /// Multiplicity vectors in the box solving some S_P, in lexicographic order per system.
    fn balanced_multiplicities(&self, tpl: &Template) -> Vec<Vec<u64>> {
        let p = tpl.p();
        let a = balance_matrix(self.vass, self.cost, tpl);
        let limit = self.budget.solutions_per_template;
        let mut out: Vec<Vec<u64>> = Vec::new();
        for sys in balanced_linear_systems(self.vass, self.cost, tpl) {
            if out.len() >= limit {
                break;
            }
            let mut inst = IqpInstance::new(p, true);
            for &i in &sys.zero {
                let mut row = vec![BigInt::zero(); p];
                row[i] = BigInt::from(1);
                inst.add_eq(row, BigInt::zero());
            }
            for r in (0..=p).filter(|r| *r == p || !sys.zero.contains(r)) {
                inst.add_eq(a[r][..p].to_vec(), -a[r][p].clone());
            }
            // nonempty cycle
            let lens: Vec<BigInt> = tpl.betas.iter().map(|b| -BigInt::from(b.len())).collect();
            inst.add_le(lens, BigInt::from(tpl.connector_cycle().len()) - 1);
            let _ = solve_filtered(&inst, self.budget.box_cap.min(16), self.budget.node_budget, &mut |x| {
                let n: Vec<u64> = x.iter().map(|v| v.to_u64().unwrap_or(0)).collect();
                if !out.contains(&n) {
                    out.push(n);
                }
                out.len() >= limit
            });
        }
        out
    }

    fn enumeration(&self) -> &Vec<Candidate> {
        self.enumeration.get_or_init(|| {
            let mut out = Vec::new();
            for_each_cycle(self.vass, self.cost, self.budget.enumeration_cycle_len, &mut |c| {
                if dot_zero(self.vass, self.cost, c) && prefix_to(self.vass, self.vass.transition(c[0]).source).is_some() {
                    out.push(Candidate { cycle: c.to_vec(), step: Step::Enumeration, best: OnceCell::new() });
                }
                false
            });
            out
        })
    }

    fn best_prefix<'c>(&self, c: &'c Candidate) -> &'c BestPrefix {
        c.best.get_or_init(|| {
            let vc = vals(self.vass, self.cost, &c.cycle);
            let w: Vec<BigInt> = self.vass.transitions().iter().map(|t| t.update.dot(&vc)).collect();
            let base = self.vass.transition(c.cycle[0]).source;
            let s0 = sum_from_unchecked(self.vass, self.cost, &CounterVector::zeros(self.vass.dim()), &c.cycle);
            let len = BigInt::from(c.cycle.len());
            match min_weight_path(self.vass, &w, base) {
                MinPath::Unreachable => BestPrefix::None,
                MinPath::Finite { weight, path } => {
                    BestPrefix::Exact { prefix: path, value: BigRational::new(s0 + weight, len) }
                }
                MinPath::Unbounded { lead, cycle, cycle_weight, tail } => {
                    let ww = |p: &[usize]| p.iter().map(|&t| &w[t]).sum::<BigInt>();
                    let base_sum = s0 + ww(&lead) + ww(&tail);
                    BestPrefix::Pumpable { lead, pump: cycle, pump_weight: cycle_weight, tail, base_sum }
                }
            }
        })
    }

    fn first_candidate(&self, cands: &[Candidate], lambda: &BigRational, problem: &Problem) -> Option<Answer> {
        let (lp, lq) = split_rational(lambda);
        for c in cands {
            let prefix = match self.best_prefix(c) {
                BestPrefix::None => continue,
                BestPrefix::Exact { prefix, value } => {
                    if value > lambda {
                        continue;
                    }
                    prefix.clone()
                }
                BestPrefix::Pumpable { lead, pump, pump_weight, tail, base_sum } => {
                    // q·(base + k·w) ≤ p·|c|
                    let k = pump_count(&(&lq * base_sum), &(&lq * pump_weight), &(&lp * BigInt::from(c.cycle.len())));
                    let k = k.to_u64()?;
                    if k.saturating_mul(pump.len() as u64) > MAX_WITNESS_LEN {
                        continue;
                    }
                    let mut p = lead.clone();
                    for _ in 0..k {
                        p.extend_from_slice(pump);
                    }
                    p.extend_from_slice(tail);
                    p
                }
            };
            let l = Lasso::new(prefix, c.cycle.clone());
            if let Some(v) = certify(self.vass, self.cost, &l, problem) {
                return Some(Answer::yes(l, v, c.step, &self.budget));
            }
        }
        None
    }

    fn zero_gain(&self) -> &ZeroGain {
        self.zero_gain.get_or_init(|| zero_gain_route(self.vass, self.cost, &self.z, self.budget.max_box_configurations))
    }
}

/// When every cycle of every reachable component has zero gain, the counters inside a
/// component are an entry offset plus a potential, so each (component, offset) pair is a finite
/// weighted graph and the least cycle mean is exact.
fn zero_gain_route(vass: &Vass, cost: &CostFunction, z: &ZAnalysis, limit: usize) -> ZeroGain {
    let n = vass.num_states();
    let k = vass.dim();
    let mut pot: Vec<CounterVector> = vec![CounterVector::zeros(k); n];
    let mut comp_of: Vec<Option<usize>> = vec![None; n];
    for (ci, d) in z.comps.iter().enumerate() {
        let root = d.comp.states[0];
        let mut set = vec![false; n];
        for &s in &d.comp.states {
            comp_of[s] = Some(ci);
        }
        set[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &t in vass.outgoing(u) {
                let tr = vass.transition(t);
                if comp_of[tr.target] != Some(ci) || set[tr.target] {
                    continue;
                }
                pot[tr.target] = &pot[u] + &tr.update;
                set[tr.target] = true;
                queue.push_back(tr.target);
            }
        }
        for &t in &d.comp.transitions {
            let tr = vass.transition(t);
            if &pot[tr.source] + &tr.update != pot[tr.target] {
                return ZeroGain::NotApplicable;
            }
        }
    }
    // explore (state, offset)
    type Node = (usize, CounterVector);
    let mut nodes: Vec<(Node, Option<(usize, usize)>)> = Vec::new();
    let mut index: HashMap<Node, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &q in vass.initial() {
        let o = &CounterVector::zeros(k) - &pot[q];
        let node = (q, o);
        if !index.contains_key(&node) {
            index.insert(node.clone(), nodes.len());
            nodes.push((node, None));
            queue.push_back(nodes.len() - 1);
        }
    }
    while let Some(i) = queue.pop_front() {
        let ((u, o), _) = nodes[i].clone();
        for &t in vass.outgoing(u) {
            let tr = vass.transition(t);
            let counters = &(&o + &pot[u]) + &tr.update;
            let node = (tr.target, &counters - &pot[tr.target]);
            if index.contains_key(&node) {
                continue;
            }
            if nodes.len() >= limit {
                return ZeroGain::NotApplicable;
            }
            index.insert(node.clone(), nodes.len());
            nodes.push((node, Some((i, t))));
            queue.push_back(nodes.len() - 1);
        }
    }
    let mut best: Option<(BigRational, Vec<usize>, usize)> = None;
    let mut done: HashSet<(usize, CounterVector)> = HashSet::new();
    for (ni, ((u, o), _)) in nodes.iter().enumerate() {
        let Some(ci) = comp_of[*u] else { continue };
        if !done.insert((ci, o.clone())) {
            continue;
        }
        let d = &z.comps[ci];
        let edges: Vec<WeightedEdge> = d
            .comp
            .transitions
            .iter()
            .map(|&t| {
                let tr = vass.transition(t);
                WeightedEdge { from: tr.source, to: tr.target, weight: cost.eval(tr.source, &(o + &pot[tr.source])) }
            })
            .collect();
        let Some((mu, cyc)) = min_mean_cycle(n, &edges) else { continue };
        if best.as_ref().is_none_or(|(b, _, _)| mu < *b) {
            let cycle: Vec<usize> = cyc.iter().map(|&e| d.comp.transitions[e]).collect();
            best = Some((mu, cycle, ni));
        }
    }
    let Some((mu, cycle, ni)) = best else { return ZeroGain::Exact(None) };
    let start = vass.transition(cycle[0]).source;
    let offset = nodes[ni].0 .1.clone();
    let Some(&target) = index.get(&(start, offset)) else { return ZeroGain::NotApplicable };
    let mut prefix = Vec::new();
    let mut cur = target;
    while let Some((p, t)) = nodes[cur].1 {
        prefix.push(t);
        cur = p;
    }
    prefix.reverse();
    ZeroGain::Exact(Some((mu, Lasso::new(prefix, cycle))))
}

/// Decides whether some regular run has value at most λ.
#[allow(non_snake_case)]
pub fn regular_average_Z(
    vass: &Vass,
    cost: &CostFunction,
    lambda: &BigRational,
    budget: &Budget,
) -> Result<Answer, DecisionError> {
    Ok(AverageAnalyzer::new(vass, cost, budget)?.query(lambda))
}

/// Uniform cost a·z: the one-counter system with updates a·u and constant labels 1 has the
/// same lasso values.
#[allow(non_snake_case)]
pub fn uniform_average_Z(
    vass: &Vass,
    a: &CounterVector,
    lambda: &BigRational,
    budget: &Budget,
) -> Result<Answer, DecisionError> {
    require_integer(vass)?;
    if a.len() != vass.dim() || a.any_negative() {
        return Err(DecisionError::Misuse("the cost vector must be natural with one entry per counter".into()));
    }
    let ts: Vec<Transition> = vass
        .transitions()
        .iter()
        .map(|t| Transition {
            name: t.name.clone(),
            source: t.source,
            target: t.target,
            update: CounterVector(vec![a.dot(&t.update)]),
        })
        .collect();
    let one = Vass::new(1, vass.state_names().to_vec(), vass.initial().to_vec(), ts, Domain::Integer)?;
    let one_cost = CostFunction::uniform(&one, &CounterVector::from_i64(&[1]))?;
    let answer = regular_average_Z(&one, &one_cost, lambda, budget)?;
    let original = CostFunction::uniform(vass, a)?;
    if let Some((w, _)) = answer.witness() {
        return Ok(match certify(vass, &original, w, &Problem::RegularAverage(lambda.clone())) {
            Some(v) => Answer::yes(w.clone(), v, answer.step, budget),
            None => Answer::unknown("witness of the reduced system failed re-verification", answer.step, budget),
        });
    }
    Ok(answer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::running_example;
    use crate::semantics::lasso_value;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn loops(updates: &[i64]) -> (Vass, CostFunction) {
        let ts = updates
            .iter()
            .enumerate()
            .map(|(i, &u)| Transition { name: format!("t{i}"), source: 0, target: 0, update: CounterVector::from_i64(&[u]) })
            .collect();
        let v = Vass::new(1, vec!["q".into()], vec![0], ts, Domain::Integer).unwrap();
        let c = CostFunction::uniform(&v, &CounterVector::from_i64(&[1])).unwrap();
        (v, c)
    }

    #[test]
    fn running_example_any_threshold() {
        let (v, c) = running_example();
        let an = AverageAnalyzer::new(&v, &c, &Budget::default()).unwrap();
        for l in [q(3, 2), q(0, 1), q(-5, 1), q(-100, 1)] {
            let a = an.query(&l);
            let (w, val) = a.witness().expect("YES");
            assert!(val.le_rational(&l));
            assert_eq!(&lasso_value(&v, &c, w).unwrap().value, val);
        }
    }

    #[test]
    fn zero_loop_below_zero_is_no() {
        let (v, c) = loops(&[0]);
        let a = regular_average_Z(&v, &c, &q(-1, 1), &Budget::default()).unwrap();
        assert!(a.is_no(), "{a:?}");
        let a = regular_average_Z(&v, &c, &q(0, 1), &Budget::default()).unwrap();
        assert!(a.is_yes());
    }

    #[test]
    fn uniform_examples() {
        let b = Budget::default();
        let one = CounterVector::from_i64(&[1]);
        let (v, _) = loops(&[-1]);
        assert!(uniform_average_Z(&v, &one, &q(-7, 1), &b).unwrap().is_yes());
        let (v, _) = loops(&[1]);
        assert!(uniform_average_Z(&v, &one, &q(7, 1), &b).unwrap().is_no());
        let (v, _) = loops(&[1, -1]);
        let a = uniform_average_Z(&v, &one, &q(0, 1), &b).unwrap();
        assert!(a.is_yes(), "{a:?}");
    }
}
