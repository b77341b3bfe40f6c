//! Procedures for VASS over ℕ.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{certify, Answer, Budget, DecisionError, Problem, Step};
use crate::graph::{min_mean_cycle, reachable_components, WeightedEdge};
use crate::model::{fmt_rational, Configuration, CostFunction, CounterVector, Domain, Lasso, Transition, Vass};
use crate::reach_n::{reachable_set, ReachResult};

fn require_natural(vass: &Vass) -> Result<(), DecisionError> {
    if vass.domain() != Domain::Natural {
        return Err(DecisionError::Misuse("this procedure is for VASS over N".into()));
    }
    Ok(())
}

/// Finite grid of configurations with every counter in 0..=cap.
struct BoxGraph {
    states: usize,
    dim: usize,
    side: usize,
}

impl BoxGraph {
    fn len(&self) -> usize {
        self.states * self.side.pow(self.dim as u32)
    }

    fn index(&self, c: &Configuration) -> Option<usize> {
        let mut i = c.state;
        for x in &c.counters.0 {
            let x = x.to_usize().filter(|&x| x < self.side)?;
            i = i * self.side + x;
        }
        Some(i)
    }

    fn config(&self, mut i: usize) -> Configuration {
        let mut v = vec![BigInt::zero(); self.dim];
        for j in (0..self.dim).rev() {
            v[j] = BigInt::from(i % self.side);
            i /= self.side;
        }
        Configuration::new(i, CounterVector(v))
    }
}

/// Decides whether some run has average cost at most λ under the cost a·z, by searching the
/// configuration graph restricted to counters that a cycle of value at most λ can visit.
#[allow(non_snake_case)]
pub fn uniform_average_N(
    vass: &Vass,
    a: &CounterVector,
    lambda: &BigRational,
    budget: &Budget,
) -> Result<Answer, DecisionError> {
    require_natural(vass)?;
    if a.len() != vass.dim() {
        return Err(DecisionError::Misuse("the cost vector needs one entry per counter".into()));
    }
    if a.0.iter().any(|x| !x.is_positive()) {
        return Err(DecisionError::Unsupported("every cost coefficient must be positive".into()));
    }
    if lambda.is_negative() {
        return Ok(Answer::no("every cost is nonnegative", Step::Structural, budget));
    }
    let cost = CostFunction::uniform(vass, a)?;
    let k = vass.dim() as u32;
    let twice: BigInt = (lambda * BigInt::from(2)).floor().to_integer();
    let len_bound = BigInt::from(3 * vass.num_states()) * (twice + BigInt::from(1)).pow(k);
    let cap = (lambda * &len_bound).floor().to_integer();
    let side: BigInt = &cap + BigInt::from(1);
    let size = BigInt::from(vass.num_states()) * side.pow(k);
    if size > BigInt::from(budget.max_box_configurations) {
        return Ok(Answer::unknown(
            format!("the bounded configuration graph has {size} configurations"),
            Step::Reachability,
            budget,
        ));
    }
    let bx = BoxGraph { states: vass.num_states(), dim: vass.dim(), side: side.to_usize().unwrap_or(usize::MAX) };
    let n = bx.len();
    let mut g: DiGraph<(), usize> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for (i, &node) in nodes.iter().enumerate() {
        let c = bx.config(i);
        for &t in vass.outgoing(c.state) {
            let tr = vass.transition(t);
            let next = Configuration::new(tr.target, &c.counters + &tr.update);
            if next.counters.any_negative() {
                continue;
            }
            if let Some(j) = bx.index(&next) {
                g.add_edge(node, nodes[j], t);
            }
        }
    }
    // per component: (mean, cycle as (config, transition) pairs, members)
    let mut candidates: Vec<(BigRational, Vec<(usize, usize)>, HashSet<usize>)> = Vec::new();
    for scc in tarjan_scc(&g) {
        let members: Vec<usize> = scc.iter().map(|x| x.index()).collect();
        let pos: std::collections::HashMap<usize, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let local = |i: usize| pos.get(&i).copied();
        let mut edges = Vec::new();
        let mut labels = Vec::new();
        for &m in &members {
            let w = cost.eval(bx.config(m).state, &bx.config(m).counters);
            for e in g.edges(nodes[m]) {
                use petgraph::visit::EdgeRef;
                if let Some(to) = local(e.target().index()) {
                    edges.push(WeightedEdge { from: local(m).unwrap(), to, weight: w.clone() });
                    labels.push((m, *e.weight()));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let Some((mu, cyc)) = min_mean_cycle(members.len(), &edges) else { continue };
        if &mu <= lambda {
            let cycle = cyc.iter().map(|&e| labels[e]).collect();
            candidates.push((mu, cycle, members.into_iter().collect()));
        }
    }
    if candidates.is_empty() {
        return Ok(Answer::no(
            format!("no configuration cycle with counters at most {cap} has average at most {}", fmt_rational(lambda)),
            Step::Reachability,
            budget,
        ));
    }
    candidates.sort_by(|x, y| x.0.cmp(&y.0));
    let problem = Problem::RegularAverage(lambda.clone());
    let mut open = 0;
    for (_, cycle, members) in &candidates {
        for &q in vass.initial() {
            let source = Configuration::new(q, CounterVector::zeros(vass.dim()));
            let inside = |c: &Configuration| bx.index(c).is_some_and(|i| members.contains(&i));
            match reachable_set(vass, &source, &inside, budget.reach_budget, None) {
                Ok(ReachResult::Reachable(path)) => {
                    let end = crate::model::simulate(vass, &source, &path)?.configurations.pop().unwrap_or(source);
                    let from = bx.index(&end).expect("inside the box");
                    let Some(walk) = box_path(&g, &nodes, from, cycle[0].0, members) else { continue };
                    let mut prefix = path;
                    prefix.extend(walk);
                    let lasso = Lasso::new(prefix, cycle.iter().map(|&(_, t)| t).collect());
                    if let Some(v) = certify(vass, &cost, &lasso, &problem) {
                        return Ok(Answer::yes(lasso, v, Step::Reachability, budget));
                    }
                    open += 1;
                }
                Ok(ReachResult::NotReachable) => {}
                Ok(ReachResult::Unknown(_)) => open += 1,
                Err(e) => return Err(DecisionError::Misuse(e.to_string())),
            }
        }
    }
    if open == 0 {
        return Ok(Answer::no(
            format!("none of the {} candidate configuration cycles is reachable", candidates.len()),
            Step::Reachability,
            budget,
        ));
    }
    Ok(Answer::unknown(
        format!("reachability of {open} candidate configuration cycles is undecided within the budget"),
        Step::Reachability,
        budget,
    ))
}

/// Shortest walk between two configurations of one component of the box graph.
fn box_path(
    g: &DiGraph<(), usize>,
    nodes: &[NodeIndex],
    from: usize,
    to: usize,
    members: &HashSet<usize>,
) -> Option<Vec<usize>> {
    use petgraph::visit::EdgeRef;
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes.len()];
    let mut seen = vec![false; nodes.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = Vec::new();
            let mut cur = u;
            while let Some((p, t)) = prev[cur] {
                path.push(t);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for e in g.edges(nodes[u]) {
            let v = e.target().index();
            if !seen[v] && members.contains(&v) {
                seen[v] = true;
                prev[v] = Some((u, *e.weight()));
                queue.push_back(v);
            }
        }
    }
    None
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Reduces reachability of (target, 0) from (source, 0) to the average-value problem at λ = 0
/// under the cost "sum of counters".
///
/// A fresh initial state enters `source` while raising an extra counter to 1, so every cycle of
/// the original system costs at least 1 per step. From `target` a fresh final state is entered;
/// it can drop the extra counter and then idle at cost 0 only if all other counters are 0.
#[allow(non_snake_case)]
pub fn reachability_to_average_N(
    vass: &Vass,
    source: usize,
    target: usize,
) -> Result<(Vass, CostFunction, BigRational), DecisionError> {
    require_natural(vass)?;
    let n = vass.num_states();
    if source >= n || target >= n {
        return Err(crate::model::ModelError::UnknownState(source.max(target)).into());
    }
    let k = vass.dim();
    let widen = |u: &CounterVector, extra: i64| {
        let mut v = u.0.clone();
        v.push(BigInt::from(extra));
        CounterVector(v)
    };
    let mut states = vass.state_names().to_vec();
    let qs = n;
    let qf = n + 1;
    states.push(fresh("q_S", &states));
    states.push(fresh("q_F", &states));
    let mut ts: Vec<Transition> = vass
        .transitions()
        .iter()
        .map(|t| Transition { name: t.name.clone(), source: t.source, target: t.target, update: widen(&t.update, 0) })
        .collect();
    let zero = CounterVector::zeros(k);
    for (name, s, d, extra) in [("start", qs, source, 1), ("finish", target, qf, 0), ("idle", qf, qf, 0), ("drain", qf, qf, -1)] {
        let taken: Vec<String> = ts.iter().map(|t| t.name.clone()).collect();
        ts.push(Transition { name: fresh(name, &taken), source: s, target: d, update: widen(&zero, extra) });
    }
    let out = Vass::new(k + 1, states, vec![qs], ts, Domain::Natural)?;
    let ones = CounterVector(vec![BigInt::from(1); k + 1]);
    let cost = CostFunction::uniform(&out, &ones)?;
    Ok((out, cost, BigRational::zero()))
}

/// Phase of a state of the two-copy system built by [`regular_finite_value_N`].
#[derive(Clone, Copy)]
enum Origin {
    Original(usize),
    Skip,
}

/// Decides whether some ℕ-valid lasso has a finite value. For each set I of counters that must
/// return to their value after one iteration, a 2k-counter system keeps a frozen copy of the
/// counters from the start of the cycle and checks reachability of its zero configuration.
#[allow(non_snake_case)]
pub fn regular_finite_value_N(vass: &Vass, cost: &CostFunction, budget: &Budget) -> Result<Answer, DecisionError> {
    require_natural(vass)?;
    if reachable_components(vass).is_empty() {
        return Ok(Answer::no("no cycle is reachable", Step::Structural, budget));
    }
    let k = vass.dim();
    let n = vass.num_states();
    let mut open = Vec::new();
    for mask in 0u64..(1u64 << k) {
        let inv = |j: usize| mask >> j & 1 == 1;
        // states whose labels vanish outside I may occur on the cycle
        let quiet: Vec<bool> = (0..n).map(|q| (0..k).all(|j| inv(j) || cost.label(q).0[j].is_zero())).collect();
        if !quiet.iter().any(|&b| b) {
            continue;
        }
        let (sys, origin) = two_copy_system(vass, &quiet, mask)?;
        let check = sys.num_states() - 1;
        let mut undecided = false;
        for &q in vass.initial() {
            let source = Configuration::new(q, CounterVector::zeros(2 * k));
            let done = |c: &Configuration| c.state == check && c.counters.is_zero();
            match reachable_set(&sys, &source, &done, budget.reach_budget, None) {
                Ok(ReachResult::Reachable(path)) => {
                    let mut prefix = Vec::new();
                    let mut cycle = Vec::new();
                    for &t in &path {
                        let tr = sys.transition(t);
                        if let Origin::Original(o) = origin[t] {
                            if tr.target < n {
                                prefix.push(o);
                            } else {
                                cycle.push(o);
                            }
                        }
                    }
                    let lasso = Lasso::new(prefix, cycle);
                    if let Some(v) = certify(vass, cost, &lasso, &Problem::RegularFinite) {
                        return Ok(Answer::yes(lasso, v, Step::FiniteValue, budget));
                    }
                    undecided = true;
                }
                Ok(ReachResult::NotReachable) => {}
                Ok(ReachResult::Unknown(_)) => undecided = true,
                Err(e) => return Err(DecisionError::Misuse(e.to_string())),
            }
        }
        if undecided {
            open.push(mask);
        }
    }
    if open.is_empty() {
        return Ok(Answer::no(
            "for every set of iteration-invariant counters the check configuration is unreachable",
            Step::FiniteValue,
            budget,
        ));
    }
    Ok(Answer::unknown(
        format!("reachability undecided within the budget for {} counter sets", open.len()),
        Step::FiniteValue,
        budget,
    ))
}

/// States 0..n: prefix phase. Then n·n cycle-phase states (s, c), then the check state.
fn two_copy_system(vass: &Vass, quiet: &[bool], mask: u64) -> Result<(Vass, Vec<Origin>), DecisionError> {
    let n = vass.num_states();
    let k = vass.dim();
    let pair = |s: usize, c: usize| n + s * n + c;
    let check = n + n * n;
    let mut states: Vec<String> = vass.state_names().to_vec();
    for s in 0..n {
        for c in 0..n {
            states.push(format!("{}@{}", vass.state_name(s), vass.state_name(c)));
        }
    }
    states.push("check".into());
    let both = |u: &CounterVector| CounterVector(u.0.iter().chain(&u.0).cloned().collect());
    let first = |u: &CounterVector| CounterVector(u.0.iter().cloned().chain(std::iter::repeat_n(BigInt::zero(), k)).collect());
    let mut ts = Vec::new();
    let mut origin = Vec::new();
    let mut add = |ts: &mut Vec<Transition>, s: usize, d: usize, update: CounterVector, o: Origin| {
        ts.push(Transition { name: format!("x{}", ts.len()), source: s, target: d, update });
        origin.push(o);
    };
    for (i, t) in vass.transitions().iter().enumerate() {
        add(&mut ts, t.source, t.target, both(&t.update), Origin::Original(i));
        if quiet[t.source] {
            add(&mut ts, t.source, pair(t.source, t.target), first(&t.update), Origin::Original(i));
            for s in 0..n {
                add(&mut ts, pair(s, t.source), pair(s, t.target), first(&t.update), Origin::Original(i));
            }
        }
    }
    for s in 0..n {
        add(&mut ts, pair(s, s), check, CounterVector::zeros(2 * k), Origin::Skip);
    }
    for j in 0..k {
        let mut u = CounterVector::zeros(2 * k);
        u.0[j] = BigInt::from(-1);
        u.0[k + j] = BigInt::from(-1);
        add(&mut ts, check, check, u, Origin::Skip);
        if mask >> j & 1 == 0 {
            let mut u = CounterVector::zeros(2 * k);
            u.0[j] = BigInt::from(-1);
            add(&mut ts, check, check, u, Origin::Skip);
        }
    }
    Ok((Vass::new(2 * k, states, vass.initial().to_vec(), ts, Domain::Natural)?, origin))
}
