//! Command-line front end. [`run`] does all the work and returns the exit
//! code and output, so it can be driven from tests.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::axiom::{self, kp};
use crate::closure::{self, Fragment, FormulaSet, LemmaConfig, Rules, Universe};
use crate::descr::{self, TermBudget};
use crate::eval::{self, Env, Value};
use crate::gen;
use crate::hf::HFSet;
use crate::nmid::{self, OperatorSpec, Subset};
use crate::selftest::{self, SelftestConfig};
use crate::syntax::ast::{Expr, Name, Sort};
use crate::syntax::{desugar, Dialect};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gdst", version, about = "Workbench for staged three-valued set/ordinal semantics")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DialectArg {
    Gdst,
    Nmid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FragmentArg {
    Full,
    Ordinal,
    OrdinalMin,
}

impl From<FragmentArg> for Fragment {
    fn from(f: FragmentArg) -> Self {
        match f {
            FragmentArg::Full => Fragment::Full,
            FragmentArg::Ordinal => Fragment::Ordinal,
            FragmentArg::OrdinalMin => Fragment::OrdinalMin,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a formula or term at a stage.
    Eval {
        #[arg(long)]
        stage: u32,
        /// `name=value`, value in brace notation or a natural number.
        #[arg(long = "env")]
        env: Vec<String>,
        /// Evaluate at this inner stage as seen from `--stage`.
        #[arg(long)]
        meta: Option<u32>,
        #[arg(long, value_enum, default_value_t = DialectArg::Nmid)]
        dialect: DialectArg,
        expr: String,
    },
    /// Approximate f_z at a stage.
    Fz {
        #[arg(long)]
        stage: u32,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Parameter set `z`, as brace-notation elements.
        #[arg(long = "z")]
        z: Vec<String>,
    },
    /// Scan for reflecting pairs or k-fold chains.
    ScanReflect {
        #[arg(long, default_value_t = 5)]
        tau_max: u32,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Look for k-fold chains instead of pairs.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Iterate an inflationary operator from a seed.
    NmidRun {
        #[command(flatten)]
        op: OperatorArgs,
        /// Seed members, comma separated.
        #[arg(long, default_value = "")]
        seed: String,
    },
    /// Check an operator for inflation, monotonicity and regularity.
    NmidCheck {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Check a JSON proof file step by step.
    ProofCheck { file: PathBuf },
    /// Saturate a formula set under the closure rules.
    Saturate {
        file: PathBuf,
        #[arg(long, env = "GDST_BUDGET_NODES", default_value_t = 3)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = FragmentArg::Full)]
        fragment: FragmentArg,
        #[arg(long, default_value_t = 64)]
        max_rounds: usize,
    },
    /// Compare the saturation of a good set with its truth set.
    Lemmagood {
        file: PathBuf,
        #[arg(long, env = "GDST_BUDGET_NODES", default_value_t = 3)]
        budget: usize,
        /// Largest saturation budget tried for completeness.
        #[arg(long)]
        max_budget: Option<usize>,
        #[arg(long, value_enum, default_value_t = FragmentArg::Ordinal)]
        completeness: FragmentArg,
    },
    /// Check a KP axiom or schema on a finite stage.
    KpCheck {
        #[arg(long)]
        axiom: String,
        #[arg(long)]
        stage: u32,
        #[arg(long, env = "GDST_BUDGET_NODES", default_value_t = 3)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        params: usize,
    },
    /// Run the acceptance property suite.
    Selftest {
        /// Criteria to run, comma separated; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_time_limit: bool,
    },
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Node budget for enumerated terms.
    #[arg(long, env = "GDST_BUDGET_NODES", default_value_t = 4)]
    max_nodes: usize,
    #[arg(long)]
    min_depth: Option<usize>,
    #[arg(long)]
    arity: Option<usize>,
}

impl BudgetArgs {
    fn budget(&self, default_arity: usize) -> TermBudget {
        let mut b = TermBudget::new(self.max_nodes).with_arity(self.arity.unwrap_or(default_arity));
        if let Some(d) = self.min_depth {
            b = b.with_min_depth(d);
        }
        b
    }
}

#[derive(Debug, Args)]
struct OperatorArgs {
    #[arg(long)]
    universe: Option<u32>,
    /// Table file with `in -> out` lines.
    #[arg(long, conflicts_with = "builtin")]
    table: Option<PathBuf>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Builtin {
    MinComplement,
    Identity,
    Conditional,
}

/// Exit code and rendered output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    code: i32,
    body: Json,
}

fn ok(body: Json) -> Result<Report, String> {
    Ok(Report { code: EXIT_OK, body })
}

fn verdict(good: bool, body: Json) -> Result<Report, String> {
    Ok(Report {
        code: if good { EXIT_OK } else { EXIT_VIOLATION },
        body,
    })
}

fn to_json(x: &impl Serialize) -> Json {
    serde_json::to_value(x).expect("serializable")
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    if let Some(j) = cli.jobs {
        // Fails only if the pool was already built in this process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match dispatch(cli.command) {
        Ok(r) => Outcome {
            code: r.code,
            stdout: render(&r.body, cli.format),
            stderr: String::new(),
        },
        Err(msg) => Outcome {
            code: EXIT_USAGE,
            stdout: render(&json!({ "error": msg }), cli.format),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn render(body: &Json, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(body).expect("json") + "\n",
        Format::Plain => {
            let mut out = String::new();
            plain(body, "", &mut out);
            out
        }
    }
}

/// One `path: value` line per scalar.
fn plain(v: &Json, path: &str, out: &mut String) {
    match v {
        Json::Object(m) => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                plain(x, &p, out);
            }
        }
        Json::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            out.push_str(&format!("{path}: [{}]\n", items.join(", ")));
        }
        Json::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                plain(x, &format!("{path}[{i}]"), out);
            }
        }
        x => out.push_str(&format!("{path}: {}\n", scalar(x))),
    }
}

fn scalar(v: &Json) -> String {
    match v {
        Json::String(s) => s.clone(),
        x => x.to_string(),
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Parses `name=value` bindings. Values are brace-notation sets or
/// naturals; ordinal variables must receive ordinals.
pub fn parse_env(bindings: &[String]) -> Result<Env, String> {
    let mut env = Env::new();
    for b in bindings {
        let (name, value) = b.split_once('=').ok_or_else(|| format!("binding {b:?} is not name=value"))?;
        let name = name.trim();
        let value = value.trim();
        if name.is_empty() {
            return Err(format!("binding {b:?} has no name"));
        }
        let set: HFSet = match value.parse::<u32>() {
            Ok(k) => HFSet::ordinal(k),
            Err(_) => value.parse().map_err(|e| format!("{name}: {e}"))?,
        };
        let n = Name::new(name);
        let v = match n.sort() {
            Sort::Ord => Value::Ord(set.as_ordinal().ok_or_else(|| format!("{name} needs an ordinal"))?),
            Sort::Set => Value::Set(set),
        };
        env.bind(n, v);
    }
    Ok(env)
}

fn dispatch(cmd: Command) -> Result<Report, String> {
    match cmd {
        Command::Eval {
            stage,
            env,
            meta,
            dialect,
            expr,
        } => {
            let env = parse_env(&env)?;
            let dialect = match dialect {
                DialectArg::Gdst => Dialect::Gdst,
                DialectArg::Nmid => Dialect::Nmid,
            };
            let e = desugar(&expr, dialect).map_err(|e| e.to_string())?;
            let err = |e: eval::EvalError| e.to_string();
            if let Some(m) = meta {
                let Expr::Formula(p) = &e else {
                    return Err("--meta takes a formula".into());
                };
                let v = eval::eval_meta(p, &env, m, stage).map_err(err)?;
                return ok(json!({ "value": v }));
            }
            let value = match &e {
                Expr::Formula(p) => eval::eval_formula(p, &env, stage).map_err(err)?.to_string(),
                Expr::Ord(a) => eval::eval_ord(a, &env, stage)
                    .map_err(err)?
                    .map_or("undef".to_string(), |k| k.to_string()),
                Expr::Set(x) => eval::eval_set(x, &env, stage)
                    .map_err(err)?
                    .map_or("undef".to_string(), |s| s.to_string()),
            };
            ok(json!({ "value": value }))
        }
        Command::Fz { stage, budget, z } => {
            let z: Vec<HFSet> = z
                .iter()
                .map(|s| s.parse().map_err(|e| format!("{s}: {e}")))
                .collect::<Result<_, String>>()?;
            let b = budget.budget(if z.is_empty() { 0 } else { 2 });
            let r = descr::fz_approx(&z, stage, &b).map_err(|e| e.to_string())?;
            ok(to_json(&r))
        }
        Command::ScanReflect { tau_max, budget, k } => {
            let b = budget.budget(2);
            if let Some(k) = k {
                let chains = descr::kfold_scan(k, tau_max, &b).map_err(|e| e.to_string())?;
                return ok(json!({ "k": k, "bound": tau_max, "budget": b, "chains": chains }));
            }
            let mut pairs = Vec::new();
            let mut disagreements = Vec::new();
            for tau in 1..=tau_max {
                for theta in 0..tau {
                    let d = descr::reflect_check(theta, tau, &b).map_err(|e| e.to_string())?;
                    let v = descr::reflect_check_via_fz(theta, tau, &b).map_err(|e| e.to_string())?;
                    if d.reflecting {
                        pairs.push((theta, tau));
                    }
                    if d.reflecting != v {
                        disagreements.push((theta, tau));
                    }
                }
            }
            verdict(
                disagreements.is_empty(),
                json!({ "tau_max": tau_max, "budget": b, "reflecting": pairs, "disagreements": disagreements }),
            )
        }
        Command::NmidRun { op, seed } => {
            let op = operator(&op)?;
            let w0 = parse_members(&seed)?;
            let trace = nmid::iterate(&op, w0).map_err(|e| e.to_string())?;
            ok(to_json(&trace))
        }
        Command::NmidCheck { op, samples, rng_seed } => {
            let op = operator(&op)?;
            let inflationary = op.check_inflationary();
            let mut rng = gen::rng(rng_seed);
            let monotone = nmid::is_monotone(&op, &mut rng, samples).map_err(|e| e.to_string())?;
            let seeds: Vec<Subset> = if op.universe <= nmid::MAX_EXHAUSTIVE {
                (0..=nmid::full(op.universe)).collect()
            } else {
                vec![0]
            };
            let irregular: Vec<Vec<u32>> = seeds
                .iter()
                .filter(|&&w| !nmid::regularity_report(&op, w).regular)
                .map(|&w| nmid::members(w).collect())
                .collect();
            verdict(
                inflationary.is_ok(),
                json!({
                    "universe": op.universe,
                    "inflationary": inflationary.is_ok(),
                    "inflation_error": inflationary.err().map(|e| e.to_string()),
                    "monotone": monotone,
                    "seeds": seeds.len(),
                    "irregular_seeds": irregular,
                }),
            )
        }
        Command::ProofCheck { file } => {
            let steps = axiom::parse_proof(&read(&file)?).map_err(|e| e.to_string())?;
            match axiom::check_proof(&steps) {
                Ok(()) => ok(json!({ "valid": true, "steps": steps.len() })),
                Err(e) => verdict(
                    false,
                    json!({ "valid": false, "steps": steps.len(), "index": e.index, "kind": e.violation.kind(), "violation": e.violation, "message": e.to_string() }),
                ),
            }
        }
        Command::Saturate {
            file,
            budget,
            fragment,
            max_rounds,
        } => {
            let p = FormulaSet::parse(&read(&file)?).map_err(|e| e.to_string())?;
            let u = Universe::new(&p.atoms(), budget, fragment.into());
            let s = closure::saturate(&p, &u, &Rules::all(), max_rounds);
            ok(json!({
                "budget": budget,
                "fragment": u.fragment,
                "universe": u.len(),
                "rounds": s.rounds,
                "closed_world": s.set.closed_world,
                "diff": { "added": s.set.difference(&p), "removed": p.difference(&s.set) },
                "set": s.set.rendered(),
            }))
        }
        Command::Lemmagood {
            file,
            budget,
            max_budget,
            completeness,
        } => {
            let p = FormulaSet::parse(&read(&file)?).map_err(|e| e.to_string())?;
            let cfg = LemmaConfig {
                max_budget: max_budget.unwrap_or(budget).max(budget),
                completeness: completeness.into(),
                ..LemmaConfig::new(budget)
            };
            match closure::lemmagood_compare(&p, &cfg) {
                Ok(r) => verdict(r.sound && r.complete_at.is_some(), to_json(&r)),
                Err(closure::ClosureError::NotGood) => verdict(false, json!({ "good": false })),
                Err(e) => Err(e.to_string()),
            }
        }
        Command::KpCheck {
            axiom,
            stage,
            budget,
            params,
        } => {
            let ax = kp::KpAxiom::parse(&axiom).ok_or_else(|| {
                let names: Vec<_> = kp::KpAxiom::ALL.iter().map(|a| a.name()).collect();
                format!("unknown axiom {axiom}; one of {}", names.join(", "))
            })?;
            let b = kp::KpBudget {
                params,
                ..kp::KpBudget::new(budget)
            };
            let r = kp::kp_check(ax, stage, b).map_err(|e| e.to_string())?;
            verdict(r.holds, to_json(&r))
        }
        Command::Selftest {
            only,
            seed,
            no_time_limit,
        } => {
            let cfg = SelftestConfig {
                seed,
                enforce_time: !no_time_limit,
            };
            let ids: Vec<u8> = if only.is_empty() {
                selftest::CRITERIA.iter().map(|(i, _)| *i).collect()
            } else {
                only
            };
            if let Some(bad) = ids.iter().find(|i| !selftest::CRITERIA.iter().any(|(j, _)| j == *i)) {
                return Err(format!("no criterion {bad}"));
            }
            let reports: Vec<_> = ids.iter().map(|&i| selftest::run(i, &cfg)).collect();
            let passed = reports.iter().all(|r| r.passed);
            verdict(passed, json!({ "passed": passed, "criteria": reports }))
        }
    }
}

fn parse_members(s: &str) -> Result<Subset, String> {
    let mut w = 0;
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: u32 = part.parse().map_err(|_| format!("bad seed member {part:?}"))?;
        if k >= 64 {
            return Err(format!("seed member {k} out of range"));
        }
        w |= 1 << k;
    }
    Ok(w)
}

fn operator(args: &OperatorArgs) -> Result<OperatorSpec, String> {
    match (&args.table, args.builtin) {
        (Some(path), _) => {
            let n = args.universe.ok_or("--table needs --universe")?;
            nmid::parse_table(&read(path)?, n).map_err(|e| e.to_string())
        }
        (None, Some(Builtin::Conditional)) => Ok(OperatorSpec::conditional()),
        (None, Some(b)) => {
            let n = args.universe.ok_or("--builtin needs --universe")?;
            if n > nmid::MAX_UNIVERSE {
                return Err(format!("universe {n} exceeds {}", nmid::MAX_UNIVERSE));
            }
            Ok(match b {
                Builtin::MinComplement => OperatorSpec::min_complement(n),
                _ => OperatorSpec::identity(n),
            })
        }
        (None, None) => Err("give --table or --builtin".into()),
    }
}
