//! Text format for models, threshold syntax and JSON reports.
//!
//! ```text
//! # comment
//! domain Z
//! dim 2
//! init B
//! state A
//! trans e1 B A 1 0
//! cost A 4 0
//! ```
//!
//! States are introduced by `state` or `cost` lines; every state needs exactly one `cost` line.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::decision::{Answer, Budget, Problem, Verdict};
use crate::model::{CostFunction, CounterVector, Domain, Lasso, Transition, Vass};
use crate::semantics::lasso_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind} error: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Syntax => "syntax",
            ErrorKind::Semantic => "semantic",
        })
    }
}

/// A 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub vass: Vass,
    pub cost: CostFunction,
    /// Declaration site of each state.
    pub state_spans: Vec<Span>,
    pub transition_spans: Vec<Span>,
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    span: Span,
}

fn tokens(line: &str, number: usize) -> Vec<Token<'_>> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                let col = line[..s].chars().count() + 1;
                out.push(Token { text: &line[s..i], span: Span { line: number, col } });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

fn err(kind: ErrorKind, span: Span, message: impl Into<String>) -> ParseError {
    ParseError { kind, line: span.line, col: span.col, message: message.into() }
}

fn integer(t: &Token) -> Result<BigInt, ParseError> {
    t.text.parse().map_err(|_| err(ErrorKind::Syntax, t.span, format!("expected an integer, found `{}`", t.text)))
}

pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let mut domain: Option<(Domain, Span)> = None;
    let mut dim: Option<(usize, Span)> = None;
    let mut inits: Vec<Token> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut state_spans: Vec<Span> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut trans: Vec<Vec<Token>> = Vec::new();
    let mut costs: Vec<Vec<Token>> = Vec::new();
    let mut end = Span { line: 1, col: 1 };

    let mut declare = |t: &Token, names: &mut Vec<String>, spans: &mut Vec<Span>| {
        if !index.contains_key(t.text) {
            index.insert(t.text.to_string(), names.len());
            names.push(t.text.to_string());
            spans.push(t.span);
        }
    };

    for (i, line) in text.lines().enumerate() {
        let toks = tokens(line, i + 1);
        end = Span { line: i + 1, col: 1 };
        let Some(head) = toks.first() else { continue };
        let args = &toks[1..];
        let want = |n: usize| -> Result<(), ParseError> {
            if args.len() != n {
                return Err(err(ErrorKind::Syntax, head.span, format!("`{}` takes {n} argument(s)", head.text)));
            }
            Ok(())
        };
        match head.text {
            "domain" => {
                want(1)?;
                if domain.is_some() {
                    return Err(err(ErrorKind::Semantic, head.span, "domain declared twice"));
                }
                let d = match args[0].text {
                    "Z" => Domain::Integer,
                    "N" => Domain::Natural,
                    other => return Err(err(ErrorKind::Syntax, args[0].span, format!("unknown domain `{other}`, expected Z or N"))),
                };
                domain = Some((d, head.span));
            }
            "dim" => {
                want(1)?;
                if dim.is_some() {
                    return Err(err(ErrorKind::Semantic, head.span, "dimension declared twice"));
                }
                let k: usize = args[0]
                    .text
                    .parse()
                    .map_err(|_| err(ErrorKind::Syntax, args[0].span, format!("expected a dimension, found `{}`", args[0].text)))?;
                if k == 0 {
                    return Err(err(ErrorKind::Semantic, args[0].span, "dimension must be at least 1"));
                }
                dim = Some((k, head.span));
            }
            "init" => {
                if args.is_empty() {
                    return Err(err(ErrorKind::Syntax, head.span, "`init` needs at least one state"));
                }
                inits.extend_from_slice(args);
            }
            "state" => {
                want(1)?;
                declare(&args[0], &mut names, &mut state_spans);
            }
            "trans" => {
                if args.len() < 3 {
                    return Err(err(ErrorKind::Syntax, head.span, "`trans` needs a name, a source and a target"));
                }
                for t in &args[3..] {
                    integer(t)?;
                }
                trans.push(toks.clone());
            }
            "cost" => {
                if args.is_empty() {
                    return Err(err(ErrorKind::Syntax, head.span, "`cost` needs a state"));
                }
                for t in &args[1..] {
                    integer(t)?;
                }
                declare(&args[0], &mut names, &mut state_spans);
                costs.push(toks.clone());
            }
            other => return Err(err(ErrorKind::Syntax, head.span, format!("unknown keyword `{other}`"))),
        }
    }

    let domain = domain.map(|d| d.0).unwrap_or(Domain::Integer);
    let Some((k, _)) = dim else { return Err(err(ErrorKind::Semantic, end, "missing `dim` line")) };
    let state = |t: &Token| -> Result<usize, ParseError> {
        index.get(t.text).copied().ok_or_else(|| err(ErrorKind::Semantic, t.span, format!("unknown state `{}`", t.text)))
    };
    let vector = |head: &Token, entries: &[Token]| -> Result<CounterVector, ParseError> {
        if entries.len() != k {
            return Err(err(
                ErrorKind::Semantic,
                head.span,
                format!("dimension mismatch: expected {k} entries, found {}", entries.len()),
            ));
        }
        Ok(CounterVector(entries.iter().map(integer).collect::<Result<_, _>>()?))
    };

    let mut transitions = Vec::new();
    let mut transition_spans = Vec::new();
    for line in &trans {
        let name = line[1];
        if transitions.iter().any(|t: &Transition| t.name == name.text) {
            return Err(err(ErrorKind::Semantic, name.span, format!("duplicate transition `{}`", name.text)));
        }
        transitions.push(Transition {
            name: name.text.to_string(),
            source: state(&line[2])?,
            target: state(&line[3])?,
            update: vector(&line[0], &line[4..])?,
        });
        transition_spans.push(line[0].span);
    }
    let mut labels: Vec<Option<CounterVector>> = vec![None; names.len()];
    for line in &costs {
        let q = state(&line[1])?;
        if labels[q].is_some() {
            return Err(err(ErrorKind::Semantic, line[0].span, format!("second `cost` line for state `{}`", line[1].text)));
        }
        let v = vector(&line[0], &line[2..])?;
        if let Some(j) = v.0.iter().position(|x| x.is_negative()) {
            return Err(err(ErrorKind::Semantic, line[2 + j].span, "negative coefficient"));
        }
        labels[q] = Some(v);
    }
    let labels: Vec<CounterVector> = labels
        .into_iter()
        .enumerate()
        .map(|(q, l)| l.ok_or_else(|| err(ErrorKind::Semantic, state_spans[q], format!("state `{}` has no `cost` line", names[q]))))
        .collect::<Result<_, _>>()?;
    let mut initial = Vec::new();
    for t in &inits {
        initial.push(state(t)?);
    }
    if initial.is_empty() {
        return Err(err(ErrorKind::Semantic, end, "missing `init` line"));
    }
    let vass = Vass::new(k, names, initial, transitions, domain).map_err(|e| err(ErrorKind::Semantic, end, e.to_string()))?;
    let cost = CostFunction::new(&vass, labels).map_err(|e| err(ErrorKind::Semantic, end, e.to_string()))?;
    Ok(ModelDocument { vass, cost, state_spans, transition_spans })
}

fn join(v: &CounterVector) -> String {
    v.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Canonical text of a model; [`parse_model`] reads it back to an equal model.
pub fn serialize_model(vass: &Vass, cost: &CostFunction) -> String {
    let mut out = String::new();
    out.push_str(&format!("domain {}\n", vass.domain().symbol()));
    out.push_str(&format!("dim {}\n", vass.dim()));
    let init: Vec<&str> = vass.initial().iter().map(|&q| vass.state_name(q)).collect();
    out.push_str(&format!("init {}\n", init.join(" ")));
    for name in vass.state_names() {
        out.push_str(&format!("state {name}\n"));
    }
    for t in vass.transitions() {
        out.push_str(&format!(
            "trans {} {} {} {}\n",
            t.name,
            vass.state_name(t.source),
            vass.state_name(t.target),
            join(&t.update)
        ));
    }
    for (q, l) in cost.labels().iter().enumerate() {
        out.push_str(&format!("cost {} {}\n", vass.state_name(q), join(l)));
    }
    out
}

/// Reads `p/q` or an integer.
pub fn parse_threshold(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("invalid threshold `{s}`, expected an integer or p/q");
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(format!("threshold `{s}` has a zero denominator"));
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Transition names separated by whitespace or commas.
pub fn parse_path(vass: &Vass, s: &str) -> Result<Vec<usize>, String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .map(|w| vass.transition_index(w).ok_or_else(|| format!("unknown transition `{w}`")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessJson {
    pub prefix: Vec<String>,
    pub cycle: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetJson {
    pub box_start: u64,
    pub box_cap: u64,
    pub node_budget: u64,
    pub max_simple_cycles: usize,
    pub exact_cycles: usize,
    pub max_template_cycles: usize,
    pub max_templates: usize,
    pub solutions_per_template: usize,
    pub enumeration_cycle_len: usize,
    pub reach_budget: usize,
    pub max_box_configurations: usize,
}

impl From<&Budget> for BudgetJson {
    fn from(b: &Budget) -> Self {
        BudgetJson {
            box_start: b.box_start,
            box_cap: b.box_cap,
            node_budget: b.node_budget,
            max_simple_cycles: b.max_simple_cycles,
            exact_cycles: b.exact_cycles,
            max_template_cycles: b.max_template_cycles,
            max_templates: b.max_templates,
            solutions_per_template: b.solutions_per_template,
            enumeration_cycle_len: b.enumeration_cycle_len,
            reach_budget: b.reach_budget,
            max_box_configurations: b.max_box_configurations,
        }
    }
}

/// The JSON result document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub answer: String,
    pub value: Option<String>,
    pub witness: Option<WitnessJson>,
    pub step: String,
    pub detail: Option<String>,
    pub budget: BudgetJson,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("witness failed verification: {0}")]
pub struct UnverifiedWitness(pub String);

pub fn witness_json(vass: &Vass, l: &Lasso) -> WitnessJson {
    WitnessJson { prefix: vass.names_of(&l.prefix), cycle: vass.names_of(&l.cycle) }
}

impl Report {
    /// Builds the report, re-evaluating a YES witness against the problem first.
    pub fn new(vass: &Vass, cost: &CostFunction, problem: &Problem, answer: &Answer) -> Result<Self, UnverifiedWitness> {
        let budget = BudgetJson::from(&answer.budget);
        let step = answer.step.name().to_string();
        Ok(match &answer.verdict {
            Verdict::Yes { witness, value } => {
                let v = lasso_value(vass, cost, witness).map_err(|e| UnverifiedWitness(e.to_string()))?.value;
                if &v != value || !problem.accepts(&v) {
                    return Err(UnverifiedWitness(format!("value {v} does not answer the query")));
                }
                Report {
                    answer: "YES".into(),
                    value: Some(v.to_string()),
                    witness: Some(witness_json(vass, witness)),
                    step,
                    detail: None,
                    budget,
                    verified: true,
                }
            }
            Verdict::No { reason } => Report {
                answer: "NO".into(),
                value: None,
                witness: None,
                step,
                detail: Some(reason.clone()),
                budget,
                verified: false,
            },
            Verdict::Unknown { report } => Report {
                answer: "UNKNOWN".into(),
                value: None,
                witness: None,
                step,
                detail: Some(report.clone()),
                budget,
                verified: false,
            },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::running_example;

    const AE: &str = "\
# running example
domain Z
dim 2
init B
trans e1 B A 1 0
trans e2 A B 0 -1
trans e3 B C 0 3
trans e4 C B -2 0
cost A 4 0
cost B 1 1
cost C 0 1
";

    #[test]
    fn parses_running_example() {
        let doc = parse_model(AE).unwrap();
        assert_eq!(doc.vass.num_states(), 3);
        assert_eq!(doc.vass.num_transitions(), 4);
        assert_eq!(doc.vass.dim(), 2);
        assert_eq!(doc.transition_spans[0], Span { line: 5, col: 1 });
        let (v, c) = running_example();
        let l = Lasso::new(vec![], parse_path(&v, "e1 e2 e3 e4").unwrap());
        let mine = Lasso::new(vec![], parse_path(&doc.vass, "e1 e2 e3 e4").unwrap());
        assert_eq!(lasso_value(&v, &c, &l).unwrap().value, lasso_value(&doc.vass, &doc.cost, &mine).unwrap().value);
    }

    #[test]
    fn diagnostics() {
        let e = parse_model(&AE.replace("cost A 4 0", "cost A -1 0")).unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (ErrorKind::Semantic, 9, 8));
        assert!(e.message.contains("negative coefficient"));
        let e = parse_model(&AE.replace("trans e1 B A", "trans e1 B X")).unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (ErrorKind::Semantic, 5, 12));
        assert!(e.message.contains("unknown state"));
        let e = parse_model(&AE.replace("trans e2 A B 0 -1", "trans e2 A B 0 x")).unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (ErrorKind::Syntax, 6, 16));
        let e = parse_model(&AE.replace("trans e2 A B 0 -1", "trans e2 A B 0")).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Semantic);
        assert!(e.message.contains("dimension mismatch"));
        let e = parse_model(&AE.replace("domain Z", "domian Z")).unwrap_err();
        assert_eq!((e.kind, e.line), (ErrorKind::Syntax, 2));
        let e = parse_model(&AE.replace("cost C 0 1\n", "state C\n")).unwrap_err();
        assert!(e.message.contains("no `cost` line"));
    }

    #[test]
    fn round_trip() {
        let doc = parse_model(AE).unwrap();
        let text = serialize_model(&doc.vass, &doc.cost);
        let again = parse_model(&text).unwrap();
        assert_eq!(again.vass, doc.vass);
        assert_eq!(again.cost, doc.cost);
        assert_eq!(serialize_model(&again.vass, &again.cost), text);
    }

    #[test]
    fn thresholds() {
        assert_eq!(parse_threshold("3/2").unwrap(), BigRational::new(3.into(), 2.into()));
        assert_eq!(parse_threshold("-4/8").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(parse_threshold("7").unwrap(), BigRational::from_integer(7.into()));
        assert!(parse_threshold("1/0").is_err());
        assert!(parse_threshold("x").is_err());
    }
}
