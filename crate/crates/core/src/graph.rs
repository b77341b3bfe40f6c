//! Graph utilities over the control graph of a VASS.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::model::Vass;

/// States reachable from some initial state.
pub fn reachable_states(vass: &Vass) -> Vec<bool> {
    let mut seen = vec![false; vass.num_states()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in vass.initial() {
        if !seen[q] {
            seen[q] = true;
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        for &t in vass.outgoing(q) {
            let d = vass.transition(t).target;
            if !seen[d] {
                seen[d] = true;
                queue.push_back(d);
            }
        }
    }
    seen
}

/// States that can reach `target`.
pub fn coreachable_states(vass: &Vass, target: usize) -> Vec<bool> {
    let mut incoming = vec![Vec::new(); vass.num_states()];
    for t in vass.transitions() {
        incoming[t.target].push(t.source);
    }
    let mut seen = vec![false; vass.num_states()];
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(q) = queue.pop_front() {
        for &s in &incoming[q] {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Sorted state indices.
    pub states: Vec<usize>,
    /// Sorted indices of transitions with both ends inside.
    pub transitions: Vec<usize>,
}

/// Strongly connected components of the reachable part that contain at least one transition,
/// ordered by smallest state index.
pub fn reachable_components(vass: &Vass) -> Vec<Component> {
    let reach = reachable_states(vass);
    let mut g: DiGraph<usize, ()> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..vass.num_states()).map(|q| g.add_node(q)).collect();
    for t in vass.transitions() {
        if reach[t.source] {
            g.add_edge(nodes[t.source], nodes[t.target], ());
        }
    }
    let mut comp_of = vec![usize::MAX; vass.num_states()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for scc in tarjan_scc(&g) {
        let mut states: Vec<usize> = scc.iter().map(|n| g[*n]).filter(|&q| reach[q]).collect();
        if states.is_empty() {
            continue;
        }
        states.sort_unstable();
        for &q in &states {
            comp_of[q] = comps.len();
        }
        comps.push(states);
    }
    let mut out: Vec<Component> = comps
        .into_iter()
        .enumerate()
        .map(|(ci, states)| {
            let transitions = (0..vass.num_transitions())
                .filter(|&t| {
                    let tr = vass.transition(t);
                    comp_of[tr.source] == ci && comp_of[tr.target] == ci
                })
                .collect();
            Component { states, transitions }
        })
        .filter(|c: &Component| !c.transitions.is_empty())
        .collect();
    out.sort_by_key(|c| c.states[0]);
    out
}

/// Shortest (then lexicographically least) transition path from any state in `from` to `to`.
pub fn shortest_path(vass: &Vass, from: &[usize], to: usize, allowed: Option<&[bool]>) -> Option<Vec<usize>> {
    let n = vass.num_states();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut starts = from.to_vec();
    starts.sort_unstable();
    for &q in &starts {
        if !seen[q] {
            seen[q] = true;
            queue.push_back(q);
        }
    }
    if !seen[to] {
        'bfs: while let Some(q) = queue.pop_front() {
            for &t in vass.outgoing(q) {
                let d = vass.transition(t).target;
                if allowed.is_some_and(|a| !a[d]) || seen[d] {
                    continue;
                }
                seen[d] = true;
                parent[d] = Some(t);
                if d == to {
                    break 'bfs;
                }
                queue.push_back(d);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = to;
    while let Some(t) = parent[cur] {
        path.push(t);
        cur = vass.transition(t).source;
    }
    path.reverse();
    Some(path)
}

/// Shortest prefix from an initial state to `to`.
pub fn prefix_to(vass: &Vass, to: usize) -> Option<Vec<usize>> {
    shortest_path(vass, vass.initial(), to, None)
}

/// Simple cycles restricted to the transitions marked in `allowed`.
/// Each cycle starts at its smallest state. Output order: by start state, then DFS order
/// over transition indices. Stops after `cap` cycles; the flag reports completeness.
pub fn simple_cycles(vass: &Vass, allowed: &[bool], cap: usize) -> (Vec<Vec<usize>>, bool) {
    let n = vass.num_states();
    let mut cycles = Vec::new();
    let mut on_path = vec![false; n];
    for s in 0..n {
        let mut path: Vec<usize> = Vec::new();
        // stack of (state, next outgoing position)
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        on_path[s] = true;
        while let Some(&mut (q, ref mut pos)) = stack.last_mut() {
            let outs = vass.outgoing(q);
            if *pos >= outs.len() {
                on_path[q] = false;
                stack.pop();
                path.pop();
                continue;
            }
            let t = outs[*pos];
            *pos += 1;
            if !allowed[t] {
                continue;
            }
            let d = vass.transition(t).target;
            if d == s {
                let mut c = path.clone();
                c.push(t);
                cycles.push(c);
                if cycles.len() >= cap {
                    return (cycles, false);
                }
            } else if d > s && !on_path[d] {
                on_path[d] = true;
                path.push(t);
                stack.push((d, 0));
            }
        }
    }
    (cycles, true)
}

/// Transition multiplicities of a path.
pub fn count_transitions(m: usize, path: &[usize]) -> Vec<u64> {
    let mut c = vec![0u64; m];
    for &t in path {
        c[t] += 1;
    }
    c
}

/// Euler path using each transition `counts[t]` times, from `from` to `to`.
/// Returns None if the multiset does not form such a path (degree or connectivity failure).
pub fn euler_path(vass: &Vass, counts: &[u64], from: usize, to: usize) -> Option<Vec<usize>> {
    let n = vass.num_states();
    let mut balance = vec![0i128; n];
    let mut total: u64 = 0;
    for (t, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let tr = vass.transition(t);
        balance[tr.source] += c as i128;
        balance[tr.target] -= c as i128;
        total += c;
    }
    for (q, &b) in balance.iter().enumerate() {
        let want = if from == to {
            0
        } else if q == from {
            1
        } else if q == to {
            -1
        } else {
            0
        };
        if b != want {
            return None;
        }
    }
    if total == 0 {
        return (from == to).then(Vec::new);
    }
    let mut remaining = counts.to_vec();
    let mut next_pos = vec![0usize; n];
    // Hierholzer over edges; `stack` holds (state, transition used to get there)
    let mut stack: Vec<(usize, Option<usize>)> = vec![(from, None)];
    let mut out: Vec<usize> = Vec::with_capacity(total as usize);
    while let Some(&(q, via)) = stack.last() {
        let outs = vass.outgoing(q);
        let mut advanced = false;
        while next_pos[q] < outs.len() {
            let t = outs[next_pos[q]];
            if remaining[t] > 0 {
                remaining[t] -= 1;
                if remaining[t] == 0 {
                    next_pos[q] += 1;
                }
                stack.push((vass.transition(t).target, Some(t)));
                advanced = true;
                break;
            }
            next_pos[q] += 1;
        }
        if !advanced {
            stack.pop();
            if let Some(t) = via {
                out.push(t);
            }
        }
    }
    if out.len() as u64 != total {
        return None;
    }
    out.reverse();
    Some(out)
}

/// Whether the states touched by transitions with positive count form one weakly connected set.
pub fn support_connected(vass: &Vass, counts: &[u64]) -> bool {
    let n = vass.num_states();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    let mut touched = vec![false; n];
    for (t, &c) in counts.iter().enumerate() {
        if c > 0 {
            let tr = vass.transition(t);
            touched[tr.source] = true;
            touched[tr.target] = true;
            let a = find(&mut parent, tr.source);
            let b = find(&mut parent, tr.target);
            parent[a] = b;
        }
    }
    let mut root = None;
    for q in 0..n {
        if touched[q] {
            let r = find(&mut parent, q);
            match root {
                None => root = Some(r),
                Some(x) if x != r => return false,
                _ => {}
            }
        }
    }
    root.is_some()
}

/// Edge of a generic weighted digraph.
#[derive(Debug, Clone)]
pub struct WeightedEdge {
    pub from: usize,
    pub to: usize,
    pub weight: BigInt,
}

/// Minimum mean cycle over all cycles of the graph (Karp), with a witness cycle given as
/// edge indices in traversal order.
pub fn min_mean_cycle(n: usize, edges: &[WeightedEdge]) -> Option<(BigRational, Vec<usize>)> {
    let mut g: DiGraph<usize, ()> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..n).map(|q| g.add_node(q)).collect();
    for e in edges {
        g.add_edge(nodes[e.from], nodes[e.to], ());
    }
    let mut comp_of = vec![usize::MAX; n];
    let sccs = tarjan_scc(&g);
    for (ci, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp_of[g[*v]] = ci;
        }
    }
    let mut best: Option<(BigRational, Vec<usize>)> = None;
    for (ci, scc) in sccs.iter().enumerate() {
        let mut members: Vec<usize> = scc.iter().map(|v| g[*v]).collect();
        members.sort_unstable();
        let inner: Vec<usize> = (0..edges.len())
            .filter(|&i| comp_of[edges[i].from] == ci && comp_of[edges[i].to] == ci)
            .collect();
        if inner.is_empty() {
            continue;
        }
        if let Some((mu, cyc)) = karp_component(&members, edges, &inner) {
            if best.as_ref().is_none_or(|(b, _)| mu < *b) {
                best = Some((mu, cyc));
            }
        }
    }
    best
}

fn karp_component(members: &[usize], edges: &[WeightedEdge], inner: &[usize]) -> Option<(BigRational, Vec<usize>)> {
    let k = members.len();
    let local = |v: usize| members.binary_search(&v).unwrap();
    // d[j][v]: min weight of a walk with exactly j edges from members[0] to v
    let mut d: Vec<Vec<Option<BigInt>>> = vec![vec![None; k]; k + 1];
    d[0][0] = Some(BigInt::zero());
    for j in 1..=k {
        for &ei in inner {
            let e = &edges[ei];
            let (u, v) = (local(e.from), local(e.to));
            if let Some(du) = &d[j - 1][u] {
                let cand = du + &e.weight;
                if d[j][v].as_ref().is_none_or(|x| cand < *x) {
                    d[j][v] = Some(cand);
                }
            }
        }
    }
    let mut mu: Option<BigRational> = None;
    for v in 0..k {
        let Some(dn) = &d[k][v] else { continue };
        let mut worst: Option<BigRational> = None;
        for (j, row) in d.iter().enumerate().take(k) {
            if let Some(dj) = &row[v] {
                let r = BigRational::new(dn - dj, BigInt::from(k - j));
                if worst.as_ref().is_none_or(|w| r > *w) {
                    worst = Some(r);
                }
            }
        }
        if let Some(w) = worst {
            if mu.as_ref().is_none_or(|m| w < *m) {
                mu = Some(w);
            }
        }
    }
    let mu = mu?;
    // Reweight so the optimum cycles have weight 0 and all cycles are nonnegative,
    // then any cycle of tight edges is optimal.
    let (num, den) = (mu.numer().clone(), mu.denom().clone());
    let w2: Vec<BigInt> = inner.iter().map(|&ei| &edges[ei].weight * &den - &num).collect();
    let mut dist = vec![BigInt::zero(); k];
    for _ in 0..k {
        let mut changed = false;
        for (pos, &ei) in inner.iter().enumerate() {
            let e = &edges[ei];
            let (u, v) = (local(e.from), local(e.to));
            let cand = &dist[u] + &w2[pos];
            if cand < dist[v] {
                dist[v] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut tight_out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for (pos, &ei) in inner.iter().enumerate() {
        let e = &edges[ei];
        let (u, v) = (local(e.from), local(e.to));
        if &dist[u] + &w2[pos] == dist[v] {
            tight_out[u].push((v, ei));
        }
    }
    let cyc = find_cycle(k, &tight_out)?;
    Some((mu, cyc))
}

/// Any directed cycle, as edge labels in order.
fn find_cycle(k: usize, out: &[Vec<(usize, usize)>]) -> Option<Vec<usize>> {
    let mut color = vec![0u8; k];
    for s in 0..k {
        if color[s] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        let mut via: Vec<usize> = Vec::new();
        color[s] = 1;
        while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
            if *pos < out[u].len() {
                let (v, lbl) = out[u][*pos];
                *pos += 1;
                if color[v] == 1 {
                    let start = stack.iter().position(|&(x, _)| x == v).unwrap();
                    let mut c: Vec<usize> = via[start..].to_vec();
                    c.push(lbl);
                    return Some(c);
                }
                if color[v] == 0 {
                    color[v] = 1;
                    via.push(lbl);
                    stack.push((v, 0));
                }
            } else {
                color[u] = 2;
                stack.pop();
                via.pop();
            }
        }
    }
    None
}

/// Result of minimizing a transition-weighted path from an initial state to a target.
#[derive(Debug, Clone)]
pub enum MinPath {
    Unreachable,
    Finite { weight: BigInt, path: Vec<usize> },
    /// A negative cycle sits on some path to the target.
    Unbounded { lead: Vec<usize>, cycle: Vec<usize>, cycle_weight: BigInt, tail: Vec<usize> },
}

/// Bellman-Ford over the control graph with transition weights `w`.
pub fn min_weight_path(vass: &Vass, w: &[BigInt], target: usize) -> MinPath {
    let n = vass.num_states();
    let reach = reachable_states(vass);
    let co = coreachable_states(vass, target);
    let alive: Vec<bool> = (0..n).map(|q| reach[q] && co[q]).collect();
    if !alive[target] {
        return MinPath::Unreachable;
    }
    let mut dist: Vec<Option<BigInt>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    for &q in vass.initial() {
        if alive[q] {
            dist[q] = Some(BigInt::zero());
        }
    }
    let edges: Vec<usize> = (0..vass.num_transitions())
        .filter(|&t| {
            let tr = vass.transition(t);
            alive[tr.source] && alive[tr.target]
        })
        .collect();
    let mut last_relaxed = None;
    for _round in 0..n {
        last_relaxed = None;
        for &t in &edges {
            let tr = vass.transition(t);
            let Some(du) = &dist[tr.source] else { continue };
            let cand = du + &w[t];
            if dist[tr.target].as_ref().is_none_or(|dv| cand < *dv) {
                dist[tr.target] = Some(cand);
                parent[tr.target] = Some(t);
                last_relaxed = Some(tr.target);
            }
        }
        if last_relaxed.is_none() {
            break;
        }
    }
    if let Some(mut v) = last_relaxed {
        for _ in 0..n {
            v = vass.transition(parent[v].unwrap()).source;
        }
        let u = v;
        let mut cycle = Vec::new();
        let mut cur = u;
        loop {
            let t = parent[cur].unwrap();
            cycle.push(t);
            cur = vass.transition(t).source;
            if cur == u {
                break;
            }
        }
        cycle.reverse();
        let cycle_weight: BigInt = cycle.iter().map(|&t| w[t].clone()).sum();
        debug_assert!(cycle_weight.is_negative());
        let lead = shortest_path(vass, vass.initial(), u, Some(&alive)).unwrap();
        let tail = shortest_path(vass, &[u], target, Some(&alive)).unwrap();
        return MinPath::Unbounded { lead, cycle, cycle_weight, tail };
    }
    let weight = dist[target].clone().unwrap();
    let mut path = Vec::new();
    let mut cur = target;
    while let Some(t) = parent[cur] {
        path.push(t);
        cur = vass.transition(t).source;
        if path.len() > n {
            break;
        }
    }
    path.reverse();
    MinPath::Finite { weight, path }
}

/// Smallest k >= 0 with `a + k*b <= c` for b < 0.
pub fn pump_count(a: &BigInt, b: &BigInt, c: &BigInt) -> BigInt {
    debug_assert!(b.is_negative());
    if a <= c {
        return BigInt::zero();
    }
    let need = a - c;
    let step = -b;
    (&need + &step - BigInt::one()) / step
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::running_example;

    #[test]
    fn ae_is_one_component_with_two_simple_cycles() {
        let (v, _) = running_example();
        let comps = reachable_components(&v);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].transitions, vec![0, 1, 2, 3]);
        let (cycles, complete) = simple_cycles(&v, &[true; 4], 100);
        assert!(complete);
        assert_eq!(cycles.len(), 2);
    }

    #[test]
    fn euler_reconstruction() {
        let (v, _) = running_example();
        let b = v.state_index("B").unwrap();
        let p = euler_path(&v, &[2, 2, 1, 1], b, b).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(v.check_cycle(&p).unwrap(), b);
        assert!(euler_path(&v, &[1, 0, 1, 1], b, b).is_none());
        assert_eq!(euler_path(&v, &[0, 0, 0, 0], b, b), Some(vec![]));
        let a = v.state_index("A").unwrap();
        assert_eq!(euler_path(&v, &[1, 0, 0, 0], b, a), Some(vec![0]));
    }

    #[test]
    fn karp_simple() {
        // two cycles: 0->1->0 weights 3,1 (mean 2) and self-loop on 1 weight 5
        let e = |f, t, w: i64| WeightedEdge { from: f, to: t, weight: BigInt::from(w) };
        let edges = vec![e(0, 1, 3), e(1, 0, 1), e(1, 1, 5)];
        let (mu, cyc) = min_mean_cycle(2, &edges).unwrap();
        assert_eq!(mu, BigRational::from_integer(BigInt::from(2)));
        let mut c = cyc.clone();
        c.sort();
        assert_eq!(c, vec![0, 1]);
        let edges = vec![e(0, 1, 3), e(1, 0, 1), e(1, 1, -5)];
        let (mu, cyc) = min_mean_cycle(2, &edges).unwrap();
        assert_eq!(mu, BigRational::from_integer(BigInt::from(-5)));
        assert_eq!(cyc, vec![2]);
        assert!(min_mean_cycle(2, &[e(0, 1, 1)]).is_none());
    }

    #[test]
    fn bellman_ford_detects_pumpable_cycle() {
        let (v, _) = running_example();
        let b = v.state_index("B").unwrap();
        // weights update·(6,3): e1 6, e2 -3, e3 9, e4 -12
        let w: Vec<BigInt> = [6, -3, 9, -12].iter().map(|&x| BigInt::from(x)).collect();
        match min_weight_path(&v, &w, b) {
            MinPath::Unbounded { cycle_weight, .. } => assert!(cycle_weight < BigInt::zero()),
            other => panic!("{other:?}"),
        }
        let w: Vec<BigInt> = [1, 1, 1, 1].iter().map(|&x| BigInt::from(x)).collect();
        match min_weight_path(&v, &w, v.state_index("C").unwrap()) {
            MinPath::Finite { weight, path } => {
                assert_eq!(weight, BigInt::one());
                assert_eq!(path, vec![2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pump_counts() {
        let b = |x: i64| BigInt::from(x);
        assert_eq!(pump_count(&b(10), &b(-3), &b(0)), b(4));
        assert_eq!(pump_count(&b(-1), &b(-3), &b(0)), b(0));
        assert_eq!(pump_count(&b(9), &b(-3), &b(0)), b(3));
    }
}
