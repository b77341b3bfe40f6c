use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lravass::decision::{decide, Budget, Problem, Query};
use lravass::generators::{parse_dimacs, random_vass, running_example, threesat_to_vass, RandomSpec};
use lravass::io::{parse_model, parse_path, parse_threshold, serialize_model, witness_json, ErrorKind, Report};
use lravass::semantics::lasso_value;
use lravass::{Domain, Lasso};

const EXIT_USAGE: u8 = 10;
const EXIT_SYNTAX: u8 = 11;
const EXIT_SEMANTIC: u8 = 12;
const EXIT_IO: u8 = 13;
const EXIT_UNSUPPORTED: u8 = 14;

#[derive(Parser)]
#[command(name = "lravass", version, about = "Long-run average cost of VASS computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a regular average, finite-value or -inf query.
    Check(CheckArgs),
    /// Evaluate one lasso exactly.
    EvalLasso(EvalArgs),
    /// Print a generated model.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Model-to-model transformations.
    #[command(subcommand)]
    Transform(TransformCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    RegularAverage,
    RegularFinite,
    RegularNegInf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BudgetKind {
    Default,
    Quick,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Threshold λ as an integer or p/q; required for regular-average.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<String>,
    /// Accept and ignore a missing threshold for problems without one.
    #[arg(long)]
    threshold_ignored: bool,
    /// Model file; standard input when absent.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    json: bool,
    #[arg(long, value_enum, default_value = "default")]
    budget: BudgetKind,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    input: Option<String>,
    /// Transition names separated by spaces or commas.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    prefix: String,
    #[arg(long, allow_hyphen_values = true)]
    cycle: String,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum GenCommand {
    /// The instance built from a 3-CNF formula in DIMACS format.
    #[command(name = "3sat")]
    ThreeSat {
        /// DIMACS file; standard input when absent.
        #[arg(long)]
        cnf: Option<String>,
    },
    /// A seeded random model.
    Random {
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 5)]
        transitions: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
        min_update: i64,
        #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
        max_update: i64,
        #[arg(long, default_value_t = 2)]
        max_coefficient: u64,
        #[arg(long, default_value = "Z")]
        domain: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The three-state running example.
    ExampleAe,
}

#[derive(Subcommand)]
enum TransformCommand {
    /// Reachability of (target, 0) from (source, 0) as an average-value instance at λ = 0.
    ReachToAvg {
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn read_input(path: Option<&str>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::new(EXIT_IO, format!("{p}: {e}"))),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| Failure::new(EXIT_IO, format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn load(path: Option<&str>) -> Result<lravass::io::ModelDocument, Failure> {
    let text = read_input(path)?;
    parse_model(&text).map_err(|e| {
        let code = match e.kind {
            ErrorKind::Syntax => EXIT_SYNTAX,
            ErrorKind::Semantic => EXIT_SEMANTIC,
        };
        Failure::new(code, format!("{}:{e}", path.unwrap_or("<stdin>")))
    })
}

fn check(args: &CheckArgs, out: &mut String) -> Result<u8, Failure> {
    let problem = match args.problem {
        ProblemKind::RegularAverage => {
            let t = args
                .threshold
                .as_deref()
                .ok_or_else(|| Failure::new(EXIT_USAGE, "regular-average needs --threshold"))?;
            Problem::RegularAverage(parse_threshold(t).map_err(|e| Failure::new(EXIT_USAGE, e))?)
        }
        ProblemKind::RegularFinite | ProblemKind::RegularNegInf => {
            if args.threshold.is_some() && !args.threshold_ignored {
                return Err(Failure::new(EXIT_USAGE, "this problem takes no threshold; pass --threshold-ignored to allow one"));
            }
            if matches!(args.problem, ProblemKind::RegularFinite) {
                Problem::RegularFinite
            } else {
                Problem::RegularNegInf
            }
        }
    };
    let doc = load(args.input.as_deref())?;
    let budget = match args.budget {
        BudgetKind::Default => Budget::default(),
        BudgetKind::Quick => Budget::quick(),
    };
    let query = Query { vass: &doc.vass, cost: &doc.cost, problem: problem.clone(), budget };
    let answer = decide(&query).map_err(|e| match e {
        lravass::decision::DecisionError::Model(m) => Failure::new(EXIT_SEMANTIC, m.to_string()),
        other => Failure::new(EXIT_UNSUPPORTED, other.to_string()),
    })?;
    let report = Report::new(&doc.vass, &doc.cost, &problem, &answer)
        .map_err(|e| Failure::new(EXIT_SEMANTIC, format!("refusing to report: {e}")))?;
    if args.json {
        out.push_str(&report.to_json());
        out.push('\n');
    } else {
        out.push_str(&format!("{} (step {})\n", report.answer, report.step));
        if let Some(v) = &report.value {
            out.push_str(&format!("value: {v}\n"));
        }
        if let Some(w) = &report.witness {
            out.push_str(&format!("prefix: {}\ncycle: {}\n", w.prefix.join(" "), w.cycle.join(" ")));
        }
        if let Some(d) = &report.detail {
            out.push_str(&format!("{d}\n"));
        }
    }
    Ok(match report.answer.as_str() {
        "YES" => 0,
        "NO" => 1,
        _ => 2,
    })
}

fn eval_lasso(args: &EvalArgs, out: &mut String) -> Result<u8, Failure> {
    let doc = load(args.input.as_deref())?;
    let prefix = parse_path(&doc.vass, &args.prefix).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let cycle = parse_path(&doc.vass, &args.cycle).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let lasso = Lasso::new(prefix, cycle);
    let v = lasso_value(&doc.vass, &doc.cost, &lasso).map_err(|e| Failure::new(EXIT_SEMANTIC, e.to_string()))?;
    if args.json {
        let doc = serde_json::json!({
            "value": v.value.to_string(),
            "per_iteration_sum": v.per_iteration_sum.map(|s| s.to_string()),
            "cycle_length": v.cycle_length,
            "witness": witness_json(&doc.vass, &lasso),
        });
        out.push_str(&serde_json::to_string_pretty(&doc).expect("plain data serializes"));
        out.push('\n');
    } else {
        out.push_str(&format!("{}\n", v.value));
    }
    Ok(0)
}

fn generate(cmd: &GenCommand, out: &mut String) -> Result<u8, Failure> {
    let (vass, cost) = match cmd {
        GenCommand::ThreeSat { cnf } => {
            let text = read_input(cnf.as_deref())?;
            let phi = parse_dimacs(&text).map_err(|e| Failure::new(EXIT_SYNTAX, e.to_string()))?;
            let (v, c, _) = threesat_to_vass(&phi).map_err(|e| Failure::new(EXIT_SEMANTIC, e.to_string()))?;
            (v, c)
        }
        GenCommand::Random { states, transitions, dim, min_update, max_update, max_coefficient, domain, seed } => {
            let domain = match domain.as_str() {
                "Z" => Domain::Integer,
                "N" => Domain::Natural,
                other => return Err(Failure::new(EXIT_USAGE, format!("unknown domain `{other}`, expected Z or N"))),
            };
            let spec = RandomSpec {
                states: *states,
                transitions: *transitions,
                dim: *dim,
                update: (*min_update, *max_update),
                coefficient: (0, *max_coefficient),
                domain,
            };
            random_vass(&spec, *seed).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?
        }
        GenCommand::ExampleAe => running_example(),
    };
    out.push_str(&serialize_model(&vass, &cost));
    Ok(0)
}

fn transform(cmd: &TransformCommand, out: &mut String) -> Result<u8, Failure> {
    let TransformCommand::ReachToAvg { input, source, target } = cmd;
    let doc = load(input.as_deref())?;
    let state = |name: &str| {
        doc.vass.state_index(name).ok_or_else(|| Failure::new(EXIT_SEMANTIC, format!("unknown state `{name}`")))
    };
    let (v, c, _) = lravass::decision::reachability_to_average_N(&doc.vass, state(source)?, state(target)?)
        .map_err(|e| Failure::new(EXIT_UNSUPPORTED, e.to_string()))?;
    out.push_str(&serialize_model(&v, &c));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = String::new();
    let result = match &cli.command {
        Command::Check(a) => check(a, &mut out),
        Command::EvalLasso(a) => eval_lasso(a, &mut out),
        Command::Gen(g) => generate(g, &mut out),
        Command::Transform(t) => transform(t, &mut out),
    };
    match result {
        Ok(code) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_IO);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
