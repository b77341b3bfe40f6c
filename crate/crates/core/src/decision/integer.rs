//! Negative and balanced cycles over ℤ.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{certify, Answer, Budget, DecisionError, Problem, Step};
use crate::graph::{euler_path, prefix_to, reachable_components, simple_cycles, support_connected, Component};
use crate::iqp::{solve_escalating, IqpInstance, Relation, SolveVerdict};
use crate::linalg::{clear_denominators, copositivity_witness, positive_kernel_vector, quad_form};
use crate::model::{gain, vals, CostFunction, CounterVector, Domain, Lasso, Vass};
use crate::templates::pair_matrix;

pub(crate) fn require_integer(vass: &Vass) -> Result<(), DecisionError> {
    if vass.domain() != Domain::Integer {
        return Err(DecisionError::Unsupported("this procedure is for VASS over Z".into()));
    }
    Ok(())
}

/// Outcome of a per-component search.
#[derive(Debug, Clone)]
pub(crate) enum Search {
    /// A cycle with the required property.
    Found(Vec<usize>),
    /// Proven that no such cycle exists.
    Absent,
    /// Undecided, with the reason.
    Open(String),
}

pub(crate) struct ComponentData {
    pub comp: Component,
    /// Simple cycles of the component and whether the list is complete.
    pub cycles: Vec<Vec<usize>>,
    pub complete: bool,
    /// M[i][j] = G_i·V_j + G_j·V_i over the simple cycles.
    pub matrix: Vec<Vec<BigInt>>,
    /// The same form over transitions of the component.
    pub transition_matrix: Vec<Vec<BigInt>>,
    pub transition_nonnegative: bool,
}

impl ComponentData {
    fn new(vass: &Vass, cost: &CostFunction, comp: Component, budget: &Budget) -> Self {
        let mut allowed = vec![false; vass.num_transitions()];
        for &t in &comp.transitions {
            allowed[t] = true;
        }
        let (cycles, complete) = simple_cycles(vass, &allowed, budget.max_simple_cycles);
        let g: Vec<CounterVector> = cycles.iter().map(|c| gain(vass, c)).collect();
        let v: Vec<CounterVector> = cycles.iter().map(|c| vals(vass, cost, c)).collect();
        let matrix = pair_matrix(&g, &v);
        let tg: Vec<CounterVector> = comp.transitions.iter().map(|&t| vass.transition(t).update.clone()).collect();
        let tv: Vec<CounterVector> =
            comp.transitions.iter().map(|&t| cost.label(vass.transition(t).source).clone()).collect();
        let transition_matrix = pair_matrix(&tg, &tv);
        let transition_nonnegative = transition_matrix.iter().all(|r| r.iter().all(|x| !x.is_negative()));
        ComponentData { comp, cycles, complete, matrix, transition_matrix, transition_nonnegative }
    }

    fn exact(&self, budget: &Budget) -> bool {
        self.complete && self.cycles.len() <= budget.exact_cycles
    }

    fn dot(&self, i: usize) -> &BigInt {
        &self.matrix[i][i]
    }
}

/// Integer multiplicities of simple cycles → one closed walk through all of them.
fn cycle_from_multiplicities(vass: &Vass, cycles: &[Vec<usize>], mult: &[BigInt]) -> Option<Vec<usize>> {
    let m = vass.num_transitions();
    let mut counts = vec![0u64; m];
    let mut start = None;
    for (c, k) in cycles.iter().zip(mult) {
        if k.is_zero() {
            continue;
        }
        let k = k.to_u64()?;
        start.get_or_insert(vass.transition(c[0]).source);
        for t in c {
            counts[*t] = counts[*t].checked_add(k)?;
        }
    }
    let s = start?;
    if counts.iter().sum::<u64>() > 1_000_000 {
        return None;
    }
    euler_path(vass, &counts, s, s)
}

/// Transition-count IQP inside one component: Euler flow, at least one transition, and
/// `xᵀTx ≤ bound`. Solutions with disconnected support are skipped.
fn flow_search(vass: &Vass, data: &ComponentData, bound: i64, budget: &Budget) -> Search {
    let ts = &data.comp.transitions;
    let m = ts.len();
    let mut inst = IqpInstance::new(m, true);
    for &s in &data.comp.states {
        let row: Vec<BigInt> = ts
            .iter()
            .map(|&t| {
                let tr = vass.transition(t);
                BigInt::from(i64::from(tr.target == s) - i64::from(tr.source == s))
            })
            .collect();
        inst.add_eq(row, BigInt::zero());
    }
    inst.add_le(vec![BigInt::from(-1); m], BigInt::from(-1));
    inst.add_quadratic(data.transition_matrix.clone(), vec![BigInt::zero(); m], BigInt::from(-bound), Relation::Le);
    let mut found = None;
    let verdict = solve_escalating(&inst, budget.box_start, budget.box_cap, budget.node_budget, &mut |x| {
        let mut counts = vec![0u64; vass.num_transitions()];
        for (i, &t) in ts.iter().enumerate() {
            counts[t] = x[i].to_u64().unwrap_or(0);
        }
        if !support_connected(vass, &counts) {
            return false;
        }
        let s = ts.iter().zip(x).find(|(_, v)| !v.is_zero()).map(|(&t, _)| vass.transition(t).source);
        match s.and_then(|s| euler_path(vass, &counts, s, s)) {
            Some(c) => {
                found = Some(c);
                true
            }
            None => false,
        }
    });
    match verdict {
        Ok(SolveVerdict::Sat(_)) => Search::Found(found.expect("set by the filter")),
        Ok(SolveVerdict::BoundedUnsat(b)) => Search::Open(format!("no flow solution with entries up to {b}")),
        Ok(SolveVerdict::Unknown(r)) => Search::Open(format!("flow search stopped: {r:?}")),
        Err(e) => Search::Open(e.to_string()),
    }
}

fn negative_in_component(vass: &Vass, data: &ComponentData, budget: &Budget) -> Search {
    if data.transition_nonnegative {
        return Search::Absent;
    }
    if let Some(i) = (0..data.cycles.len()).find(|&i| data.dot(i).is_negative()) {
        return Search::Found(data.cycles[i].clone());
    }
    if data.exact(budget) {
        let Some(y) = copositivity_witness(&data.matrix) else { return Search::Absent };
        // add a little of every cycle so the support is connected
        let all_ones = vec![BigRational::one(); y.len()];
        let mut eps = BigRational::one();
        for _ in 0..64 {
            let z: Vec<BigRational> = y.iter().zip(&all_ones).map(|(a, b)| a + &eps * b).collect();
            if quad_form(&data.matrix, &z).is_negative() {
                let mult = clear_denominators(&z);
                if let Some(c) = cycle_from_multiplicities(vass, &data.cycles, &mult) {
                    return Search::Found(c);
                }
                break;
            }
            eps /= BigInt::from(2);
        }
    }
    match flow_search(vass, data, -1, budget) {
        Search::Open(r) if data.exact(budget) => Search::Open(format!("certificate found but witness too large; {r}")),
        s => s,
    }
}

/// Balanced simple cycles when the transition-level form is entrywise nonnegative: a balanced
/// cycle then only uses pairwise orthogonal transitions, so some simple cycle is balanced too.
fn compatible_simple_cycles(vass: &Vass, data: &ComponentData, limit: usize, node_limit: usize) -> (Vec<Vec<usize>>, bool) {
    let ts = &data.comp.transitions;
    let pos = |t: usize| ts.binary_search(&t).ok();
    let tm = &data.transition_matrix;
    let mut out = Vec::new();
    let mut nodes = 0usize;
    let n = vass.num_states();
    let mut on_path = vec![false; n];
    for &s in &data.comp.states {
        let mut path: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        on_path[s] = true;
        while let Some(&mut (q, ref mut p)) = stack.last_mut() {
            let outs = vass.outgoing(q);
            if *p >= outs.len() {
                on_path[q] = false;
                stack.pop();
                path.pop();
                continue;
            }
            let t = outs[*p];
            *p += 1;
            let Some(i) = pos(t) else { continue };
            nodes += 1;
            if nodes > node_limit {
                on_path.iter_mut().for_each(|x| *x = false);
                return (out, false);
            }
            if !tm[i][i].is_zero() || path.iter().any(|&u| !tm[i][pos(u).unwrap()].is_zero()) {
                continue;
            }
            let d = vass.transition(t).target;
            if d == s {
                let mut c = path.clone();
                c.push(t);
                out.push(c);
                if out.len() >= limit {
                    on_path.iter_mut().for_each(|x| *x = false);
                    return (out, true);
                }
            } else if d > s && !on_path[d] {
                on_path[d] = true;
                path.push(t);
                stack.push((d, 0));
            }
        }
    }
    (out, true)
}

/// Subsets of simple cycles whose union is connected, by increasing size.
fn connected_subsets(vass: &Vass, cycles: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let c = cycles.len();
    let states: Vec<Vec<bool>> = cycles
        .iter()
        .map(|cy| {
            let mut s = vec![false; vass.num_states()];
            for &t in cy {
                s[vass.transition(t).source] = true;
            }
            s
        })
        .collect();
    let touch = |a: usize, b: usize| (0..vass.num_states()).any(|q| states[a][q] && states[b][q]);
    let mut masks: Vec<u32> = (1..(1u32 << c)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
        .into_iter()
        .filter_map(|m| {
            let members: Vec<usize> = (0..c).filter(|i| m >> i & 1 == 1).collect();
            let mut seen = vec![members[0]];
            let mut frontier = vec![members[0]];
            while let Some(a) = frontier.pop() {
                for &b in &members {
                    if !seen.contains(&b) && touch(a, b) {
                        seen.push(b);
                        frontier.push(b);
                    }
                }
            }
            (seen.len() == members.len()).then_some(members)
        })
        .collect()
}

/// With no negative cycle the simple-cycle form is copositive, and a balanced cycle is a zero of
/// it with connected support. Zeros with support S are exactly the positive kernel vectors of
/// the principal submatrix on S.
fn balanced_by_zero_support(vass: &Vass, data: &ComponentData) -> Search {
    for s in connected_subsets(vass, &data.cycles) {
        let sub: Vec<Vec<BigInt>> = s.iter().map(|&i| s.iter().map(|&j| data.matrix[i][j].clone()).collect()).collect();
        let Some(x) = positive_kernel_vector(&sub) else { continue };
        let ints = clear_denominators(&x);
        let cyc: Vec<Vec<usize>> = s.iter().map(|&i| data.cycles[i].clone()).collect();
        if let Some(c) = cycle_from_multiplicities(vass, &cyc, &ints) {
            return Search::Found(c);
        }
        return Search::Open("balanced combination too large to unfold".into());
    }
    Search::Absent
}

pub(crate) struct ZAnalysis {
    pub comps: Vec<ComponentData>,
    pub negative: Vec<Search>,
    /// Balanced cycles found per component (simple ones first).
    pub balanced: Vec<Vec<Vec<usize>>>,
    /// Per component: every cycle has positive Gain·Vals.
    pub balanced_absent: Vec<bool>,
    pub balanced_reports: Vec<String>,
}

impl ZAnalysis {
    pub fn negative_lasso(&self, vass: &Vass) -> Option<Lasso> {
        self.negative.iter().find_map(|s| match s {
            Search::Found(c) => {
                let prefix = prefix_to(vass, vass.transition(c[0]).source)?;
                Some(Lasso::new(prefix, c.clone()))
            }
            _ => None,
        })
    }

    pub fn negative_absent(&self) -> bool {
        self.negative.iter().all(|s| matches!(s, Search::Absent))
    }

    pub fn negative_report(&self) -> String {
        report(self.negative.iter().zip(&self.comps).filter_map(|(s, d)| match s {
            Search::Open(r) => Some((d, r.as_str())),
            _ => None,
        }))
    }

    pub fn all_positive(&self) -> bool {
        self.negative_absent() && self.balanced_absent.iter().all(|&b| b)
    }
}

fn report<'a>(items: impl Iterator<Item = (&'a ComponentData, &'a str)>) -> String {
    let parts: Vec<String> = items.map(|(d, r)| format!("component at state {}: {r}", d.comp.states[0])).collect();
    parts.join("; ")
}

/// Negative-cycle analysis only.
pub(crate) fn analyze_negative(vass: &Vass, cost: &CostFunction, budget: &Budget) -> (Vec<ComponentData>, Vec<Search>) {
    let comps: Vec<ComponentData> =
        reachable_components(vass).into_iter().map(|c| ComponentData::new(vass, cost, c, budget)).collect();
    let negative = comps.iter().map(|d| negative_in_component(vass, d, budget)).collect();
    (comps, negative)
}

pub(crate) fn analyze(vass: &Vass, cost: &CostFunction, budget: &Budget) -> ZAnalysis {
    let (comps, negative) = analyze_negative(vass, cost, budget);
    let mut balanced = Vec::new();
    let mut balanced_absent = Vec::new();
    let mut balanced_reports = Vec::new();
    for (d, neg) in comps.iter().zip(&negative) {
        let mut found: Vec<Vec<usize>> = (0..d.cycles.len()).filter(|&i| d.dot(i).is_zero()).map(|i| d.cycles[i].clone()).collect();
        let mut absent = false;
        let mut rep = String::new();
        if d.transition_nonnegative {
            let (cs, complete) = compatible_simple_cycles(vass, d, budget.max_simple_cycles, budget.node_budget as usize);
            for c in cs {
                if !found.contains(&c) {
                    found.push(c);
                }
            }
            absent = found.is_empty() && complete;
            if !complete {
                rep = "simple-cycle search stopped at the node limit".into();
            }
        } else if matches!(neg, Search::Absent) && d.exact(budget) {
            if found.is_empty() {
                match balanced_by_zero_support(vass, d) {
                    Search::Found(c) => found.push(c),
                    Search::Absent => absent = true,
                    Search::Open(r) => rep = r,
                }
            }
        } else if found.is_empty() && !matches!(neg, Search::Found(_)) {
            match flow_search(vass, d, 0, budget) {
                Search::Found(c) => found.push(c),
                Search::Absent => absent = true,
                Search::Open(r) => rep = r,
            }
        }
        balanced.push(found);
        balanced_absent.push(absent);
        balanced_reports.push(rep);
    }
    ZAnalysis { comps, negative, balanced, balanced_absent, balanced_reports }
}

/// Whether some reachable cycle has Gain·Vals < 0 (a run of value −∞).
#[allow(non_snake_case)]
pub fn regular_neg_inf_Z(vass: &Vass, cost: &CostFunction, budget: &Budget) -> Result<Answer, DecisionError> {
    require_integer(vass)?;
    let (comps, negative) = analyze_negative(vass, cost, budget);
    let a = ZAnalysis { comps, negative, balanced: vec![], balanced_absent: vec![], balanced_reports: vec![] };
    if let Some(l) = a.negative_lasso(vass) {
        if let Some(v) = certify(vass, cost, &l, &Problem::RegularNegInf) {
            return Ok(Answer::yes(l, v, Step::Step1, budget));
        }
    }
    if a.negative_absent() {
        return Ok(Answer::no("the cycle form is copositive on every reachable component", Step::Step1, budget));
    }
    Ok(Answer::unknown(a.negative_report(), Step::Step1, budget))
}

/// Whether some reachable cycle has Gain·Vals ≤ 0 (a run of finite value or −∞).
#[allow(non_snake_case)]
pub fn regular_finite_value_Z(vass: &Vass, cost: &CostFunction, budget: &Budget) -> Result<Answer, DecisionError> {
    require_integer(vass)?;
    let a = analyze(vass, cost, budget);
    if let Some(l) = a.negative_lasso(vass) {
        if let Some(v) = certify(vass, cost, &l, &Problem::RegularFinite) {
            return Ok(Answer::yes(l, v, Step::Step1, budget));
        }
    }
    for found in &a.balanced {
        for c in found {
            let Some(prefix) = prefix_to(vass, vass.transition(c[0]).source) else { continue };
            let l = Lasso::new(prefix, c.clone());
            if let Some(v) = certify(vass, cost, &l, &Problem::RegularFinite) {
                return Ok(Answer::yes(l, v, Step::FiniteValue, budget));
            }
        }
    }
    if a.all_positive() {
        return Ok(Answer::no("every reachable cycle has positive Gain·Vals", Step::FiniteValue, budget));
    }
    let mut rep = a.negative_report();
    for (d, r) in a.comps.iter().zip(&a.balanced_reports) {
        if !r.is_empty() {
            rep.push_str(&format!("; component at state {}: {r}", d.comp.states[0]));
        }
    }
    Ok(Answer::unknown(rep, Step::FiniteValue, budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExtendedValue;
    use crate::generators::running_example;
    use crate::model::Transition;

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
    fn neg_inf_examples() {
        let b = Budget::default();
        let (v, c) = running_example();
        assert!(regular_neg_inf_Z(&v, &c, &b).unwrap().is_no());
        let (v, c) = loops(&[-1]);
        let a = regular_neg_inf_Z(&v, &c, &b).unwrap();
        assert_eq!(a.witness().unwrap().1, &ExtendedValue::NegInfinity);
        let (v, c) = loops(&[1, -1]);
        assert!(regular_neg_inf_Z(&v, &c, &b).unwrap().is_yes());
    }

    #[test]
    fn finite_examples() {
        let b = Budget::default();
        let (v, c) = running_example();
        let a = regular_finite_value_Z(&v, &c, &b).unwrap();
        let (w, val) = a.witness().unwrap();
        assert!(val.is_finite());
        assert_eq!(w.cycle.len(), 4);
        let (v, c) = loops(&[1]);
        assert!(regular_finite_value_Z(&v, &c, &b).unwrap().is_no());
        let (v, c) = loops(&[1, -1]);
        assert!(regular_finite_value_Z(&v, &c, &b).unwrap().is_yes());
    }

    #[test]
    fn copositivity_certificate_builds_connected_witness() {
        // no simple cycle is negative, but mixing the two loops through the bridge is
        let ts = vec![
            Transition { name: "a".into(), source: 0, target: 0, update: CounterVector::from_i64(&[-1, 0]) },
            Transition { name: "b".into(), source: 1, target: 1, update: CounterVector::from_i64(&[0, -1]) },
            Transition { name: "x".into(), source: 0, target: 1, update: CounterVector::from_i64(&[0, 0]) },
            Transition { name: "y".into(), source: 1, target: 0, update: CounterVector::from_i64(&[0, 0]) },
        ];
        let v = Vass::new(2, vec!["p".into(), "q".into()], vec![0], ts, Domain::Integer).unwrap();
        let c = CostFunction::new(&v, vec![CounterVector::from_i64(&[0, 1]), CounterVector::from_i64(&[1, 0])]).unwrap();
        let a = regular_neg_inf_Z(&v, &c, &Budget::default()).unwrap();
        let (w, val) = a.witness().expect("negative mix exists");
        assert_eq!(val, &ExtendedValue::NegInfinity);
        assert_eq!(crate::semantics::lasso_value(&v, &c, w).unwrap().value, ExtendedValue::NegInfinity);
    }

    #[test]
    fn natural_domain_is_rejected() {
        let (v, c) = loops(&[1]);
        let v = v.with_domain(Domain::Natural);
        assert!(regular_neg_inf_Z(&v, &c, &Budget::default()).is_err());
    }
}
