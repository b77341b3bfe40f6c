//! Bounded breadth-first configuration reachability for natural-valued VASS.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::model::{simulate, Configuration, CounterVector, ModelError, Vass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("configuration has a negative counter")]
    NegativeCounter,
    #[error("budget must be positive")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachUnknown {
    /// More configurations than the budget allows.
    Budget,
    /// Some successor exceeded the counter cap and was dropped.
    Cap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachResult {
    Reachable(Vec<usize>),
    NotReachable,
    Unknown(ReachUnknown),
}

impl ReachResult {
    pub fn label(&self) -> &'static str {
        match self {
            ReachResult::Reachable(_) => "REACHABLE",
            ReachResult::NotReachable => "NOT_REACHABLE",
            ReachResult::Unknown(_) => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachQuery<'a> {
    pub vass: &'a Vass,
    pub source: Configuration,
    pub target: Configuration,
    /// Maximum number of distinct configurations stored.
    pub budget: usize,
    /// Configurations with a counter above the cap are not explored.
    pub cap: Option<CounterVector>,
}

fn check_config(vass: &Vass, c: &Configuration) -> Result<(), ReachError> {
    if c.counters.len() != vass.dim() {
        return Err(ModelError::DimensionMismatch { expected: vass.dim(), got: c.counters.len() }.into());
    }
    if c.state >= vass.num_states() {
        return Err(ModelError::UnknownState(c.state).into());
    }
    if c.counters.any_negative() {
        return Err(ReachError::NegativeCounter);
    }
    Ok(())
}

pub fn reachable(q: &ReachQuery) -> Result<ReachResult, ReachError> {
    check_config(q.vass, &q.target)?;
    let target = q.target.clone();
    reachable_set(q.vass, &q.source, &|c| *c == target, q.budget, q.cap.as_ref())
}

/// Breadth-first search from `source` for any configuration accepted by `is_target`.
/// Successors are tried in transition index order, so the returned path is deterministic and
/// of minimal length.
pub fn reachable_set(
    vass: &Vass,
    source: &Configuration,
    is_target: &dyn Fn(&Configuration) -> bool,
    budget: usize,
    cap: Option<&CounterVector>,
) -> Result<ReachResult, ReachError> {
    check_config(vass, source)?;
    if budget == 0 {
        return Err(ReachError::ZeroBudget);
    }
    if let Some(c) = cap {
        if c.len() != vass.dim() {
            return Err(ModelError::DimensionMismatch { expected: vass.dim(), got: c.len() }.into());
        }
    }
    let mut nodes: Vec<(Configuration, Option<(usize, usize)>)> = vec![(source.clone(), None)];
    let mut seen: HashMap<Configuration, usize> = HashMap::from([(source.clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut capped = false;
    let found = loop {
        let Some(i) = queue.pop_front() else { break None };
        if is_target(&nodes[i].0) {
            break Some(i);
        }
        let cur = nodes[i].0.clone();
        for &t in vass.outgoing(cur.state) {
            let tr = vass.transition(t);
            let counters = &cur.counters + &tr.update;
            if counters.any_negative() {
                continue;
            }
            if let Some(c) = cap {
                if counters.0.iter().zip(&c.0).any(|(x, m)| x > m) {
                    capped = true;
                    continue;
                }
            }
            let next = Configuration::new(tr.target, counters);
            if seen.contains_key(&next) {
                continue;
            }
            if nodes.len() >= budget {
                return Ok(ReachResult::Unknown(ReachUnknown::Budget));
            }
            seen.insert(next.clone(), nodes.len());
            nodes.push((next, Some((i, t))));
            queue.push_back(nodes.len() - 1);
        }
    };
    let Some(mut i) = found else {
        return Ok(if capped { ReachResult::Unknown(ReachUnknown::Cap) } else { ReachResult::NotReachable });
    };
    let end = nodes[i].0.clone();
    let mut path = Vec::new();
    while let Some((p, t)) = nodes[i].1 {
        path.push(t);
        i = p;
    }
    path.reverse();
    let sim = simulate(vass, source, &path)?;
    debug_assert!(sim.configurations.iter().all(|c| !c.counters.any_negative()));
    debug_assert_eq!(sim.configurations.last(), Some(&end));
    Ok(ReachResult::Reachable(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Domain, Transition};

    fn inc_loop() -> Vass {
        Vass::new(
            1,
            vec!["q".into()],
            vec![0],
            vec![Transition { name: "t".into(), source: 0, target: 0, update: CounterVector::from_i64(&[1]) }],
            Domain::Natural,
        )
        .unwrap()
    }

    fn cfg(s: usize, v: &[i64]) -> Configuration {
        Configuration::new(s, CounterVector::from_i64(v))
    }

    fn query(v: &Vass, s: i64, t: i64, cap: Option<i64>) -> ReachResult {
        reachable(&ReachQuery {
            vass: v,
            source: cfg(0, &[s]),
            target: cfg(0, &[t]),
            budget: 100,
            cap: cap.map(|c| CounterVector::from_i64(&[c])),
        })
        .unwrap()
    }

    #[test]
    fn examples() {
        let v = inc_loop();
        assert_eq!(query(&v, 0, 0, None), ReachResult::Reachable(vec![]));
        assert_eq!(query(&v, 0, 3, None), ReachResult::Reachable(vec![0, 0, 0]));
        assert_eq!(query(&v, 1, 0, None), ReachResult::Unknown(ReachUnknown::Budget));
        assert_eq!(query(&v, 1, 0, Some(5)), ReachResult::Unknown(ReachUnknown::Cap));
    }

    #[test]
    fn closed_frontier() {
        let v = Vass::new(
            1,
            vec!["a".into(), "b".into()],
            vec![0],
            vec![Transition { name: "d".into(), source: 0, target: 1, update: CounterVector::from_i64(&[-1]) }],
            Domain::Natural,
        )
        .unwrap();
        let r = reachable(&ReachQuery { vass: &v, source: cfg(0, &[0]), target: cfg(1, &[0]), budget: 10, cap: None });
        assert_eq!(r.unwrap(), ReachResult::NotReachable);
        let r = reachable(&ReachQuery { vass: &v, source: cfg(0, &[2]), target: cfg(1, &[1]), budget: 10, cap: None });
        assert_eq!(r.unwrap(), ReachResult::Reachable(vec![0]));
    }

    #[test]
    fn errors() {
        let v = inc_loop();
        let r = reachable(&ReachQuery { vass: &v, source: cfg(0, &[-1]), target: cfg(0, &[0]), budget: 10, cap: None });
        assert_eq!(r, Err(ReachError::NegativeCounter));
        let r = reachable(&ReachQuery { vass: &v, source: cfg(0, &[0]), target: cfg(0, &[0]), budget: 0, cap: None });
        assert_eq!(r, Err(ReachError::ZeroBudget));
    }
}
