use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("transition index {0} out of range")]
    UnknownTransition(usize),
    #[error("no initial state")]
    NoInitialState,
    #[error("duplicate transition name `{0}`")]
    DuplicateTransition(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("path is not chained at position {0}")]
    BrokenChain(usize),
    #[error("cycle is empty")]
    EmptyCycle,
    #[error("path is not a cycle")]
    NotACycle,
    #[error("lasso does not start in an initial state")]
    NotInitial,
    #[error("prefix ends in a different state than the cycle starts")]
    LassoChain,
    #[error("negative cost coefficient for state {0}")]
    NegativeCoefficient(usize),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Integer,
    Natural,
}

impl Domain {
    pub fn symbol(self) -> &'static str {
        match self {
            Domain::Integer => "Z",
            Domain::Natural => "N",
        }
    }
}

/// Integer vector of length `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CounterVector(pub Vec<BigInt>);

impl CounterVector {
    pub fn zeros(k: usize) -> Self {
        CounterVector(vec![BigInt::zero(); k])
    }

    pub fn from_i64(v: &[i64]) -> Self {
        CounterVector(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn dot(&self, other: &CounterVector) -> BigInt {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: &BigInt) -> CounterVector {
        CounterVector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn any_negative(&self) -> bool {
        self.0.iter().any(|x| x.is_negative())
    }
}

impl AddAssign<&CounterVector> for CounterVector {
    fn add_assign(&mut self, rhs: &CounterVector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Add<&CounterVector> for &CounterVector {
    type Output = CounterVector;
    fn add(self, rhs: &CounterVector) -> CounterVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&CounterVector> for &CounterVector {
    type Output = CounterVector;
    fn sub(self, rhs: &CounterVector) -> CounterVector {
        CounterVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for CounterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub update: CounterVector,
}

/// A VASS over ℤ or ℕ. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vass {
    dim: usize,
    states: Vec<String>,
    initial: Vec<usize>,
    transitions: Vec<Transition>,
    domain: Domain,
    out: Vec<Vec<usize>>,
}

impl Vass {
    pub fn new(
        dim: usize,
        states: Vec<String>,
        initial: Vec<usize>,
        transitions: Vec<Transition>,
        domain: Domain,
    ) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        let n = states.len();
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(ModelError::DuplicateState(s.clone()));
            }
        }
        if initial.is_empty() {
            return Err(ModelError::NoInitialState);
        }
        if let Some(&q) = initial.iter().find(|&&q| q >= n) {
            return Err(ModelError::UnknownState(q));
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        let mut out = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            if t.source >= n {
                return Err(ModelError::UnknownState(t.source));
            }
            if t.target >= n {
                return Err(ModelError::UnknownState(t.target));
            }
            if t.update.len() != dim {
                return Err(ModelError::DimensionMismatch { expected: dim, got: t.update.len() });
            }
            if transitions[..i].iter().any(|u| u.name == t.name) {
                return Err(ModelError::DuplicateTransition(t.name.clone()));
            }
            out[t.source].push(i);
        }
        Ok(Vass { dim, states, initial, transitions, domain, out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_initial(&self, q: usize) -> bool {
        self.initial.binary_search(&q).is_ok()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: usize) -> &Transition {
        &self.transitions[t]
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.name == name)
    }

    /// Outgoing transition indices of `q`, in index order.
    pub fn outgoing(&self, q: usize) -> &[usize] {
        &self.out[q]
    }

    pub fn with_domain(&self, domain: Domain) -> Vass {
        let mut v = self.clone();
        v.domain = domain;
        v
    }

    /// Checks that `path` is well-chained and returns its (start, end) states, or None if empty.
    pub fn check_path(&self, path: &[usize]) -> Result<Option<(usize, usize)>, ModelError> {
        for (i, &t) in path.iter().enumerate() {
            if t >= self.transitions.len() {
                return Err(ModelError::UnknownTransition(t));
            }
            if i > 0 && self.transitions[path[i - 1]].target != self.transitions[t].source {
                return Err(ModelError::BrokenChain(i));
            }
        }
        Ok(match (path.first(), path.last()) {
            (Some(&a), Some(&b)) => Some((self.transitions[a].source, self.transitions[b].target)),
            _ => None,
        })
    }

    pub fn check_cycle(&self, path: &[usize]) -> Result<usize, ModelError> {
        match self.check_path(path)? {
            None => Err(ModelError::EmptyCycle),
            Some((s, e)) if s == e => Ok(s),
            Some(_) => Err(ModelError::NotACycle),
        }
    }

    pub fn names_of(&self, path: &[usize]) -> Vec<String> {
        path.iter().map(|&t| self.transitions[t].name.clone()).collect()
    }
}

/// State labeling `l : Q -> N^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostFunction {
    labels: Vec<CounterVector>,
}

impl CostFunction {
    pub fn new(vass: &Vass, labels: Vec<CounterVector>) -> Result<Self, ModelError> {
        if labels.len() != vass.num_states() {
            return Err(ModelError::LabelCount { expected: vass.num_states(), got: labels.len() });
        }
        for (q, l) in labels.iter().enumerate() {
            if l.len() != vass.dim() {
                return Err(ModelError::DimensionMismatch { expected: vass.dim(), got: l.len() });
            }
            if l.any_negative() {
                return Err(ModelError::NegativeCoefficient(q));
            }
        }
        Ok(CostFunction { labels })
    }

    /// The same vector `a` at every state.
    pub fn uniform(vass: &Vass, a: &CounterVector) -> Result<Self, ModelError> {
        CostFunction::new(vass, vec![a.clone(); vass.num_states()])
    }

    pub fn label(&self, q: usize) -> &CounterVector {
        &self.labels[q]
    }

    pub fn labels(&self) -> &[CounterVector] {
        &self.labels
    }

    pub fn uniform_vector(&self) -> Option<&CounterVector> {
        let first = self.labels.first()?;
        self.labels.iter().all(|l| l == first).then_some(first)
    }

    /// f(q, z) = l(q) · z
    pub fn eval(&self, q: usize, z: &CounterVector) -> BigInt {
        self.labels[q].dot(z)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub counters: CounterVector,
}

impl Configuration {
    pub fn new(state: usize, counters: CounterVector) -> Self {
        Configuration { state, counters }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    pub fn new(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        Lasso { prefix, cycle }
    }

    /// Checks chaining, nonempty cycle, and that the run starts in an initial state.
    /// Returns the state the cycle is anchored at.
    pub fn check(&self, vass: &Vass) -> Result<usize, ModelError> {
        let base = vass.check_cycle(&self.cycle)?;
        match vass.check_path(&self.prefix)? {
            None => {
                if !vass.is_initial(base) {
                    return Err(ModelError::NotInitial);
                }
            }
            Some((s, e)) => {
                if !vass.is_initial(s) {
                    return Err(ModelError::NotInitial);
                }
                if e != base {
                    return Err(ModelError::LassoChain);
                }
            }
        }
        Ok(base)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtendedValue {
    NegInfinity,
    Finite(BigRational),
    PosInfinity,
}

impl ExtendedValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtendedValue::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn le_rational(&self, lambda: &BigRational) -> bool {
        match self {
            ExtendedValue::NegInfinity => true,
            ExtendedValue::Finite(v) => v <= lambda,
            ExtendedValue::PosInfinity => false,
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::NegInfinity => write!(f, "-inf"),
            ExtendedValue::PosInfinity => write!(f, "+inf"),
            ExtendedValue::Finite(r) => write!(f, "{}", fmt_rational(r)),
        }
    }
}

/// Lowest terms, denominator omitted when 1.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn gain(vass: &Vass, path: &[usize]) -> CounterVector {
    let mut g = CounterVector::zeros(vass.dim());
    for &t in path {
        g += &vass.transition(t).update;
    }
    g
}

/// Sum of labels of the source states; the final state is not counted.
pub fn vals(vass: &Vass, cost: &CostFunction, path: &[usize]) -> CounterVector {
    let mut v = CounterVector::zeros(vass.dim());
    for &t in path {
        v += cost.label(vass.transition(t).source);
    }
    v
}

pub fn path_summary(
    vass: &Vass,
    cost: &CostFunction,
    path: &[usize],
) -> Result<(CounterVector, CounterVector), ModelError> {
    vass.check_path(path)?;
    Ok((gain(vass, path), vals(vass, cost, path)))
}

/// Total cost along `path` when the counters start at `g`.
pub fn sum_from(
    vass: &Vass,
    cost: &CostFunction,
    g: &CounterVector,
    path: &[usize],
) -> Result<BigInt, ModelError> {
    if g.len() != vass.dim() {
        return Err(ModelError::DimensionMismatch { expected: vass.dim(), got: g.len() });
    }
    vass.check_path(path)?;
    Ok(sum_from_unchecked(vass, cost, g, path))
}

pub(crate) fn sum_from_unchecked(
    vass: &Vass,
    cost: &CostFunction,
    g: &CounterVector,
    path: &[usize],
) -> BigInt {
    let mut z = g.clone();
    let mut total = BigInt::zero();
    for &t in path {
        let tr = vass.transition(t);
        total += cost.eval(tr.source, &z);
        z += &tr.update;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub configurations: Vec<Configuration>,
    /// First index whose counters have a negative entry (NATURAL domain only).
    pub first_negative: Option<usize>,
}

pub fn simulate(vass: &Vass, start: &Configuration, path: &[usize]) -> Result<Simulation, ModelError> {
    if start.counters.len() != vass.dim() {
        return Err(ModelError::DimensionMismatch { expected: vass.dim(), got: start.counters.len() });
    }
    if start.state >= vass.num_states() {
        return Err(ModelError::UnknownState(start.state));
    }
    if let Some((s, _)) = vass.check_path(path)? {
        if s != start.state {
            return Err(ModelError::BrokenChain(0));
        }
    }
    let natural = vass.domain() == Domain::Natural;
    let mut configurations = Vec::with_capacity(path.len() + 1);
    let mut cur = start.clone();
    let mut first_negative = (natural && cur.counters.any_negative()).then_some(0);
    configurations.push(cur.clone());
    for (i, &t) in path.iter().enumerate() {
        let tr = vass.transition(t);
        cur.counters += &tr.update;
        cur.state = tr.target;
        if natural && first_negative.is_none() && cur.counters.any_negative() {
            first_negative = Some(i + 1);
        }
        configurations.push(cur.clone());
    }
    Ok(Simulation { configurations, first_negative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::running_example;

    fn idx(v: &Vass, names: &[&str]) -> Vec<usize> {
        names.iter().map(|n| v.transition_index(n).unwrap()).collect()
    }

    #[test]
    fn summary_of_full_block() {
        let (v, c) = running_example();
        let (g, w) = path_summary(&v, &c, &idx(&v, &["e1", "e2", "e3", "e4"])).unwrap();
        assert_eq!(g, CounterVector::from_i64(&[-1, 2]));
        assert_eq!(w, CounterVector::from_i64(&[6, 3]));
        assert_eq!(g.dot(&w), BigInt::zero());
    }

    #[test]
    fn summary_of_first_cycle() {
        let (v, c) = running_example();
        let (g, w) = path_summary(&v, &c, &idx(&v, &["e1", "e2"])).unwrap();
        // (1,0) + (0,-1); l(B) + l(A)
        assert_eq!(g, CounterVector::from_i64(&[1, -1]));
        assert_eq!(w, CounterVector::from_i64(&[5, 1]));
    }

    #[test]
    fn empty_path_summary() {
        let (v, c) = running_example();
        let (g, w) = path_summary(&v, &c, &[]).unwrap();
        assert!(g.is_zero() && w.is_zero());
        assert_eq!(sum_from(&v, &c, &CounterVector::from_i64(&[7, -3]), &[]).unwrap(), BigInt::zero());
    }

    #[test]
    fn block_sums() {
        let (v, c) = running_example();
        let p = idx(&v, &["e1", "e2", "e3", "e4"]);
        assert_eq!(sum_from(&v, &c, &CounterVector::zeros(2), &p).unwrap(), BigInt::from(6));
        // per-position values j, -8j, j, 3j at j = 1 add -3
        assert_eq!(sum_from(&v, &c, &CounterVector::from_i64(&[-2, 3]), &p).unwrap(), BigInt::from(3));
    }

    #[test]
    fn broken_chain_is_rejected() {
        let (v, c) = running_example();
        let p = idx(&v, &["e1", "e3"]);
        assert_eq!(path_summary(&v, &c, &p), Err(ModelError::BrokenChain(1)));
        assert!(sum_from(&v, &c, &CounterVector::zeros(3), &[]).is_err());
    }

    #[test]
    fn simulate_single_step() {
        let (v, _) = running_example();
        let b = v.state_index("B").unwrap();
        let a = v.state_index("A").unwrap();
        let sim = simulate(&v, &Configuration::new(b, CounterVector::zeros(2)), &idx(&v, &["e1"])).unwrap();
        assert_eq!(
            sim.configurations,
            vec![
                Configuration::new(b, CounterVector::zeros(2)),
                Configuration::new(a, CounterVector::from_i64(&[1, 0]))
            ]
        );
        let empty = simulate(&v, &Configuration::new(b, CounterVector::zeros(2)), &[]).unwrap();
        assert_eq!(empty.configurations.len(), 1);
    }

    #[test]
    fn natural_negativity_flag() {
        let v = Vass::new(
            1,
            vec!["q".into()],
            vec![0],
            vec![Transition { name: "d".into(), source: 0, target: 0, update: CounterVector::from_i64(&[-1]) }],
            Domain::Natural,
        )
        .unwrap();
        let sim = simulate(&v, &Configuration::new(0, CounterVector::zeros(1)), &[0]).unwrap();
        assert_eq!(sim.first_negative, Some(1));
        let z = v.with_domain(Domain::Integer);
        let sim = simulate(&z, &Configuration::new(0, CounterVector::zeros(1)), &[0]).unwrap();
        assert_eq!(sim.first_negative, None);
    }

    #[test]
    fn construction_errors() {
        let t = |s, d| Transition { name: "t".into(), source: s, target: d, update: CounterVector::zeros(1) };
        assert_eq!(
            Vass::new(1, vec!["q".into()], vec![0], vec![t(0, 3)], Domain::Integer),
            Err(ModelError::UnknownState(3))
        );
        assert_eq!(Vass::new(1, vec!["q".into()], vec![], vec![], Domain::Integer), Err(ModelError::NoInitialState));
        let v = Vass::new(1, vec!["q".into()], vec![0], vec![t(0, 0)], Domain::Integer).unwrap();
        assert_eq!(
            CostFunction::new(&v, vec![CounterVector::from_i64(&[-1])]),
            Err(ModelError::NegativeCoefficient(0))
        );
    }

    #[test]
    fn extended_value_display() {
        let r = BigRational::new(BigInt::from(6), BigInt::from(4));
        assert_eq!(ExtendedValue::Finite(r).to_string(), "3/2");
        assert_eq!(ExtendedValue::Finite(BigRational::from_integer(BigInt::from(-2))).to_string(), "-2");
        assert_eq!(ExtendedValue::NegInfinity.to_string(), "-inf");
        assert_eq!(ExtendedValue::PosInfinity.to_string(), "+inf");
        assert!(ExtendedValue::NegInfinity < ExtendedValue::Finite(BigRational::zero()));
    }
}
