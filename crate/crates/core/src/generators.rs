//! Instance generators: the running example, the 3-SAT reduction and seeded random models.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{reachable_states, shortest_path};
use crate::model::{CostFunction, CounterVector, Domain, ModelError, Transition, Vass};
use crate::templates::Template;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("formula has no clauses")]
    NoClauses,
    #[error("formula has no variables")]
    NoVariables,
    #[error("literal {0} out of range")]
    LiteralRange(i64),
    #[error("clause {0} has more than 3 literals")]
    WideClause(usize),
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("no model with every state reachable after {0} attempts")]
    Exhausted(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn tr(name: impl Into<String>, source: usize, target: usize, update: CounterVector) -> Transition {
    Transition { name: name.into(), source, target, update }
}

/// The three-state example with labels A ↦ (4,0), B ↦ (1,1), C ↦ (0,1) and initial state B.
pub fn running_example() -> (Vass, CostFunction) {
    let (a, b, c) = (0, 1, 2);
    let v = Vass::new(
        2,
        vec!["A".into(), "B".into(), "C".into()],
        vec![b],
        vec![
            tr("e1", b, a, CounterVector::from_i64(&[1, 0])),
            tr("e2", a, b, CounterVector::from_i64(&[0, -1])),
            tr("e3", b, c, CounterVector::from_i64(&[0, 3])),
            tr("e4", c, b, CounterVector::from_i64(&[-2, 0])),
        ],
        Domain::Integer,
    )
    .expect("well-formed");
    let cost = CostFunction::new(
        &v,
        vec![CounterVector::from_i64(&[4, 0]), CounterVector::from_i64(&[1, 1]), CounterVector::from_i64(&[0, 1])],
    )
    .expect("well-formed");
    (v, cost)
}

/// 3-CNF formula; literal `i` is x_i and `-i` is ¬x_i, with 1 ≤ i ≤ vars.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    pub vars: usize,
    pub clauses: Vec<[i64; 3]>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<[i64; 3]>) -> Result<Self, GenError> {
        if vars == 0 {
            return Err(GenError::NoVariables);
        }
        if clauses.is_empty() {
            return Err(GenError::NoClauses);
        }
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > vars {
                    return Err(GenError::LiteralRange(l));
                }
            }
        }
        Ok(CnfFormula { vars, clauses })
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = assignment[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }

    /// Truth-table check over all 2^vars assignments.
    pub fn is_satisfiable(&self) -> bool {
        (0u64..1 << self.vars).any(|m| {
            let a: Vec<bool> = (0..self.vars).map(|i| m >> i & 1 == 1).collect();
            self.eval(&a)
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            s.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        s
    }
}

/// Reads `p cnf n l` followed by 0-terminated clauses. Clauses with fewer than three literals
/// are padded by repeating their last literal.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, GenError> {
    let mut vars: Option<usize> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(GenError::Dimacs { line: line_no, msg: "expected `p cnf <vars> <clauses>`".into() });
            }
            vars = Some(parts[2].parse().map_err(|_| GenError::Dimacs { line: line_no, msg: "bad variable count".into() })?);
            continue;
        }
        if vars.is_none() {
            return Err(GenError::Dimacs { line: line_no, msg: "clause before header".into() });
        }
        for tok in line.split_whitespace() {
            let l: i64 = tok
                .parse()
                .map_err(|_| GenError::Dimacs { line: line_no, msg: format!("bad literal `{tok}`") })?;
            if l == 0 {
                clauses.push(pad_clause(clauses.len(), &current)?);
                current.clear();
            } else {
                current.push(l);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(pad_clause(clauses.len(), &current)?);
    }
    let vars = vars.ok_or(GenError::Dimacs { line: 0, msg: "missing header".into() })?;
    CnfFormula::new(vars, clauses)
}

fn pad_clause(index: usize, lits: &[i64]) -> Result<[i64; 3], GenError> {
    match lits.len() {
        0 => Err(GenError::EmptyClause(index)),
        1 => Ok([lits[0]; 3]),
        2 => Ok([lits[0], lits[1], lits[1]]),
        3 => Ok([lits[0], lits[1], lits[2]]),
        _ => Err(GenError::WideClause(index)),
    }
}

/// Seeded random 3-CNF with `vars` variables and `clauses` clauses.
pub fn random_cnf(vars: usize, clauses: usize, seed: u64) -> Result<CnfFormula, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cs = (0..clauses)
        .map(|_| {
            let mut c = [0i64; 3];
            for l in c.iter_mut() {
                let v = rng.random_range(1..=vars as i64);
                *l = if rng.random_bool(0.5) { v } else { -v };
            }
            c
        })
        .collect();
    CnfFormula::new(vars, cs)
}

/// VASS of dimension 2n whose regular computations have value 0 exactly when φ is satisfiable
/// (and +∞ otherwise). Returns the model, its labeling and the threshold 0.
///
/// States are q0..qn (choosing an assignment: `t{i}` adds 1 to counter i, `f{i}` to counter
/// n+i), one state per literal occurrence `c{j}_{i}` in clause layers, and `fin` with the edge
/// back to q0. A literal occurrence is labelled by the counter of its negation.
pub fn threesat_to_vass(phi: &CnfFormula) -> Result<(Vass, CostFunction, BigInt), GenError> {
    let n = phi.vars;
    let l = phi.clauses.len();
    if l == 0 {
        return Err(GenError::NoClauses);
    }
    let k = 2 * n;
    let mut states: Vec<String> = (0..=n).map(|i| format!("q{i}")).collect();
    let layer = |j: usize, i: usize| n + 1 + 3 * j + i;
    for j in 0..l {
        for i in 0..3 {
            states.push(format!("c{}_{}", j + 1, i + 1));
        }
    }
    let fin = states.len();
    states.push("fin".into());
    let zero = CounterVector::zeros(k);
    let unit = |c: usize| {
        let mut v = CounterVector::zeros(k);
        v.0[c] = BigInt::from(1);
        v
    };
    let mut ts = Vec::new();
    for i in 0..n {
        ts.push(tr(format!("t{}", i + 1), i, i + 1, unit(i)));
        ts.push(tr(format!("f{}", i + 1), i, i + 1, unit(i + n)));
    }
    for i in 0..3 {
        ts.push(tr(format!("enter{}", i + 1), n, layer(0, i), zero.clone()));
    }
    for j in 0..l - 1 {
        for a in 0..3 {
            for b in 0..3 {
                ts.push(tr(format!("g{}_{}_{}", j + 1, a + 1, b + 1), layer(j, a), layer(j + 1, b), zero.clone()));
            }
        }
    }
    for i in 0..3 {
        ts.push(tr(format!("exit{}", i + 1), layer(l - 1, i), fin, zero.clone()));
    }
    ts.push(tr("back", fin, 0, zero.clone()));
    let vass = Vass::new(k, states, vec![0], ts, Domain::Integer)?;
    let mut labels = vec![zero.clone(); vass.num_states()];
    for (j, c) in phi.clauses.iter().enumerate() {
        for (i, &lit) in c.iter().enumerate() {
            let var = lit.unsigned_abs() as usize - 1;
            labels[layer(j, i)] = if lit > 0 { unit(var + n) } else { unit(var) };
        }
    }
    let cost = CostFunction::new(&vass, labels)?;
    Ok((vass, cost, BigInt::from(0)))
}

/// Parameters for [`random_vass`]. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub states: usize,
    pub transitions: usize,
    pub dim: usize,
    pub update: (i64, i64),
    pub coefficient: (u64, u64),
    pub domain: Domain,
}

const MAX_ATTEMPTS: usize = 10_000;

/// Seeded random model with initial state `q0` from which every state is reachable.
pub fn random_vass(spec: &RandomSpec, seed: u64) -> Result<(Vass, CostFunction), GenError> {
    if spec.states == 0 || spec.dim == 0 {
        return Err(GenError::Parameters("states and dimension must be positive".into()));
    }
    if spec.transitions + 1 < spec.states {
        return Err(GenError::Parameters("too few transitions to reach every state".into()));
    }
    if spec.update.0 > spec.update.1 || spec.coefficient.0 > spec.coefficient.1 {
        return Err(GenError::Parameters("empty range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<String> = (0..spec.states).map(|i| format!("q{i}")).collect();
    for _ in 0..MAX_ATTEMPTS {
        let ts: Vec<Transition> = (0..spec.transitions)
            .map(|i| {
                let s = rng.random_range(0..spec.states);
                let t = rng.random_range(0..spec.states);
                let u: Vec<i64> = (0..spec.dim).map(|_| rng.random_range(spec.update.0..=spec.update.1)).collect();
                tr(format!("t{i}"), s, t, CounterVector::from_i64(&u))
            })
            .collect();
        let v = Vass::new(spec.dim, states.clone(), vec![0], ts, spec.domain)?;
        let labels: Vec<CounterVector> = (0..spec.states)
            .map(|_| {
                CounterVector(
                    (0..spec.dim)
                        .map(|_| BigInt::from(rng.random_range(spec.coefficient.0..=spec.coefficient.1)))
                        .collect(),
                )
            })
            .collect();
        if reachable_states(&v).iter().all(|&r| r) {
            let cost = CostFunction::new(&v, labels)?;
            return Ok((v, cost));
        }
    }
    Err(GenError::Exhausted(MAX_ATTEMPTS))
}

fn random_walk(vass: &Vass, rng: &mut ChaCha8Rng, from: usize, len: usize) -> Option<(Vec<usize>, usize)> {
    let mut cur = from;
    let mut path = Vec::with_capacity(len);
    for _ in 0..len {
        let out = vass.outgoing(cur);
        if out.is_empty() {
            return None;
        }
        let t = out[rng.random_range(0..out.len())];
        path.push(t);
        cur = vass.transition(t).target;
    }
    Some((path, cur))
}

fn random_closed_walk(vass: &Vass, rng: &mut ChaCha8Rng, at: usize, max_len: usize) -> Option<Vec<usize>> {
    for _ in 0..64 {
        let len = rng.random_range(1..=max_len);
        if let Some((p, end)) = random_walk(vass, rng, at, len) {
            if end == at {
                return Some(p);
            }
        }
    }
    None
}

/// Random template with `p` cycles of length at most `max_cycle` and connectors made of
/// random walks of length at most `max_connector` (the last one closed by a shortest path).
pub fn random_template(
    vass: &Vass,
    rng: &mut ChaCha8Rng,
    p: usize,
    max_cycle: usize,
    max_connector: usize,
) -> Option<Template> {
    let base = vass.initial()[0];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut anchors = Vec::new();
    let mut cur = base;
    for _ in 0..p {
        let len = rng.random_range(0..=max_connector);
        let (alpha, at) = random_walk(vass, rng, cur, len)?;
        let beta = random_closed_walk(vass, rng, at, max_cycle)?;
        alphas.push(alpha);
        betas.push(beta);
        anchors.push(at);
        cur = at;
    }
    let len = rng.random_range(0..=max_connector);
    let (mut last, end) = random_walk(vass, rng, cur, len)?;
    if end != base {
        last.extend(shortest_path(vass, &[end], base, None)?);
    }
    alphas.push(last);
    Template::new(vass, base, anchors, alphas, betas).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_example_shape() {
        let (v, c) = running_example();
        assert_eq!((v.num_states(), v.num_transitions(), v.dim()), (3, 4, 2));
        assert_eq!(c.label(v.state_index("A").unwrap()), &CounterVector::from_i64(&[4, 0]));
        assert_eq!(v.initial(), &[v.state_index("B").unwrap()]);
    }

    #[test]
    fn threesat_sizes() {
        let phi = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
        let (v, _, _) = threesat_to_vass(&phi).unwrap();
        assert_eq!((v.num_states(), v.dim()), (6, 2));
        let phi = CnfFormula::new(3, vec![[1, -2, 3], [-1, 2, 2]]).unwrap();
        let (v, _, _) = threesat_to_vass(&phi).unwrap();
        assert_eq!((v.num_states(), v.dim()), (4 + 6 + 1, 6));
        assert!(CnfFormula::new(1, vec![]).is_err());
    }

    #[test]
    fn dimacs_round_trip() {
        let phi = parse_dimacs("c comment\np cnf 2 2\n1 -2 0\n2 0\n").unwrap();
        assert_eq!(phi.clauses, vec![[1, -2, -2], [2, 2, 2]]);
        assert_eq!(parse_dimacs(&phi.to_dimacs()).unwrap(), phi);
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("1 0\n").is_err());
    }

    #[test]
    fn truth_table() {
        assert!(CnfFormula::new(1, vec![[1, 1, 1]]).unwrap().is_satisfiable());
        assert!(!CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap().is_satisfiable());
    }

    fn spec() -> RandomSpec {
        RandomSpec { states: 4, transitions: 6, dim: 2, update: (-2, 2), coefficient: (0, 2), domain: Domain::Integer }
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_vass(&spec(), 7).unwrap();
        let b = random_vass(&spec(), 7).unwrap();
        assert_eq!(a, b);
        let (v, c) = a;
        assert_eq!((v.num_states(), v.num_transitions()), (4, 6));
        assert!(c.labels().iter().all(|l| l.0.iter().all(|x| *x >= BigInt::from(0) && *x <= BigInt::from(2))));
        assert!(reachable_states(&v).iter().all(|&r| r));
    }

    #[test]
    fn random_rejects_bad_parameters() {
        let mut s = spec();
        s.transitions = 1;
        assert!(random_vass(&s, 0).is_err());
        s = spec();
        s.update = (3, 1);
        assert!(random_vass(&s, 0).is_err());
    }

    #[test]
    fn random_templates_are_valid() {
        let (v, _) = random_vass(
            &RandomSpec { states: 3, transitions: 9, dim: 2, update: (-2, 2), coefficient: (0, 2), domain: Domain::Integer },
            3,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut made = 0;
        for _ in 0..50 {
            if let Some(t) = random_template(&v, &mut rng, 2, 4, 2) {
                t.validate(&v).unwrap();
                made += 1;
            }
        }
        assert!(made > 0);
    }
}
