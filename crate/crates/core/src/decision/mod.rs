//! Decision procedures for the regular average-value, finite-value and −∞ problems.

mod average;
mod integer;
mod natural;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::model::{CostFunction, Domain, ExtendedValue, Lasso, ModelError, Vass};
use crate::semantics::lasso_value;

pub use average::{regular_average_Z, uniform_average_Z, AverageAnalyzer};
pub use integer::{regular_finite_value_Z, regular_neg_inf_Z};
pub use natural::{reachability_to_average_N, regular_finite_value_N, uniform_average_N};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("misuse: {0}")]
    Misuse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Resource limits shared by all procedures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budget {
    /// First box bound of the IQP escalation.
    pub box_start: u64,
    /// Last box bound of the IQP escalation.
    pub box_cap: u64,
    /// Search nodes per IQP call.
    pub node_budget: u64,
    /// Simple cycles enumerated per component.
    pub max_simple_cycles: usize,
    /// Largest simple-cycle count for the exact copositivity certificates.
    pub exact_cycles: usize,
    /// Cycles per template.
    pub max_template_cycles: usize,
    /// Templates examined in Steps 2 and 3.
    pub max_templates: usize,
    /// Multiplicity vectors tried per template in Step 3.
    pub solutions_per_template: usize,
    /// Cycle length for the closing enumeration.
    pub enumeration_cycle_len: usize,
    /// Configurations stored per reachability query.
    pub reach_budget: usize,
    /// Configurations of the bounded configuration graph.
    pub max_box_configurations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            box_start: 4,
            box_cap: 64,
            node_budget: 200_000,
            max_simple_cycles: 64,
            exact_cycles: 10,
            max_template_cycles: 3,
            max_templates: 400,
            solutions_per_template: 16,
            enumeration_cycle_len: 8,
            reach_budget: 200_000,
            max_box_configurations: 200_000,
        }
    }
}

impl Budget {
    /// A small budget for quick runs.
    pub fn quick() -> Self {
        Budget {
            box_start: 4,
            box_cap: 8,
            node_budget: 20_000,
            max_simple_cycles: 24,
            exact_cycles: 8,
            max_templates: 120,
            solutions_per_template: 8,
            reach_budget: 20_000,
            max_box_configurations: 20_000,
            ..Budget::default()
        }
    }
}

/// Which part of a procedure produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Step1,
    Step2,
    Step3,
    ZeroGain,
    Enumeration,
    FiniteValue,
    Reachability,
    Structural,
}

impl Step {
    pub fn name(self) -> &'static str {
        match self {
            Step::Step1 => "step1",
            Step::Step2 => "step2",
            Step::Step3 => "step3",
            Step::ZeroGain => "zero-gain",
            Step::Enumeration => "enumeration",
            Step::FiniteValue => "finite-value",
            Step::Reachability => "reachability",
            Step::Structural => "structural",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Yes { witness: Lasso, value: ExtendedValue },
    No { reason: String },
    Unknown { report: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub verdict: Verdict,
    pub step: Step,
    pub budget: Budget,
}

impl Answer {
    pub fn label(&self) -> &'static str {
        match self.verdict {
            Verdict::Yes { .. } => "YES",
            Verdict::No { .. } => "NO",
            Verdict::Unknown { .. } => "UNKNOWN",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self.verdict, Verdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self.verdict, Verdict::No { .. })
    }

    pub fn witness(&self) -> Option<(&Lasso, &ExtendedValue)> {
        match &self.verdict {
            Verdict::Yes { witness, value } => Some((witness, value)),
            _ => None,
        }
    }

    pub(crate) fn yes(witness: Lasso, value: ExtendedValue, step: Step, budget: &Budget) -> Self {
        Answer { verdict: Verdict::Yes { witness, value }, step, budget: budget.clone() }
    }

    pub(crate) fn no(reason: impl Into<String>, step: Step, budget: &Budget) -> Self {
        Answer { verdict: Verdict::No { reason: reason.into() }, step, budget: budget.clone() }
    }

    pub(crate) fn unknown(report: impl Into<String>, step: Step, budget: &Budget) -> Self {
        Answer { verdict: Verdict::Unknown { report: report.into() }, step, budget: budget.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    RegularAverage(BigRational),
    RegularFinite,
    RegularNegInf,
}

impl Problem {
    /// Whether a lasso value answers the problem positively.
    pub fn accepts(&self, v: &ExtendedValue) -> bool {
        match self {
            Problem::RegularAverage(l) => v.le_rational(l),
            Problem::RegularFinite => *v != ExtendedValue::PosInfinity,
            Problem::RegularNegInf => *v == ExtendedValue::NegInfinity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Query<'a> {
    pub vass: &'a Vass,
    pub cost: &'a CostFunction,
    pub problem: Problem,
    pub budget: Budget,
}

/// Routes a query to the procedure matching its domain and problem.
pub fn decide(q: &Query) -> Result<Answer, DecisionError> {
    match (q.vass.domain(), &q.problem) {
        (Domain::Integer, Problem::RegularAverage(l)) => regular_average_Z(q.vass, q.cost, l, &q.budget),
        (Domain::Integer, Problem::RegularFinite) => regular_finite_value_Z(q.vass, q.cost, &q.budget),
        (Domain::Integer, Problem::RegularNegInf) => regular_neg_inf_Z(q.vass, q.cost, &q.budget),
        (Domain::Natural, Problem::RegularFinite) => regular_finite_value_N(q.vass, q.cost, &q.budget),
        (Domain::Natural, Problem::RegularAverage(l)) => match q.cost.uniform_vector() {
            Some(a) => uniform_average_N(q.vass, a, l, &q.budget),
            None => Err(DecisionError::Unsupported(
                "average value over N is only decided for uniform cost functions".into(),
            )),
        },
        (Domain::Natural, Problem::RegularNegInf) => {
            Err(DecisionError::Unsupported("the -inf problem is only decided over Z".into()))
        }
    }
}

/// Re-evaluates a witness; `None` when it fails to satisfy the problem.
pub(crate) fn certify(vass: &Vass, cost: &CostFunction, lasso: &Lasso, problem: &Problem) -> Option<ExtendedValue> {
    let v = lasso_value(vass, cost, lasso).ok()?.value;
    problem.accepts(&v).then_some(v)
}

/// λ = p/q with q > 0.
pub(crate) fn split_rational(l: &BigRational) -> (BigInt, BigInt) {
    (l.numer().clone(), l.denom().clone())
}
