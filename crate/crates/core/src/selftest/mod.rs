//! The property suite behind `selftest` and the acceptance target.
//!
//! Each criterion returns a [`CriterionReport`]; reports carry no timings
//! so that identical seeds give identical JSON.

pub mod oracle;
pub mod rules;

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::axiom::kp::{kp_check, KpAxiom, KpBudget};
use crate::axiom::rules::LSTAGE_D_STAR;
use crate::axiom::rules::LSTAGE_ARITY;
use crate::closure::{self, FormulaSet, LemmaConfig};
use crate::descr::{self, TermBudget};
use crate::eval::{self, Env, EvalError, MetaTruth, Truth3, Value};
use crate::gen::{self, GenConfig};
use crate::hf::{self, HFSet};
use crate::nmid::{self, Dyadic, OperatorSpec, Subset};
use crate::syntax::ast::*;
use crate::syntax::parse_ord;

/// Budget at which `f_∅(n) = n` for every `n ≤ 4`.
pub const FZ_D_STAR: usize = 4;
/// Term budget for the reflection scan: node count and parameter arity.
pub const REFLECT_NODES: usize = 4;
pub const REFLECT_ARITY: usize = 2;
pub const KP_SEPARATION_BUDGET: usize = 6;
pub const KP_COLLECTION_BUDGET: usize = 3;
/// Target budget of the completeness comparison and the budget at which
/// every case is reached.
pub const LEMMA_TARGET_BUDGET: usize = 3;
pub const LEMMA_REFERENCE_BUDGET: usize = 4;

const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Enforce the wall-clock limits of the criteria that have them.
    pub enforce_time: bool,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 0,
            enforce_time: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Number of individual checks performed.
    pub checked: u64,
    pub violations: usize,
    /// The first few violations.
    pub examples: Vec<String>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<serde_json::Value>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {} ({}): {} checks, {} violations, {:.1}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.checked,
            self.violations,
            self.elapsed.as_secs_f64()
        )
    }
}

struct Tally {
    checked: u64,
    violations: usize,
    examples: Vec<String>,
    notes: Vec<String>,
    artifact: Option<serde_json::Value>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            violations: 0,
            examples: Vec::new(),
            notes: Vec::new(),
            artifact: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.violations += 1;
        if self.examples.len() < MAX_LISTED {
            self.examples.push(what);
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "monotonicity"),
    (2, "min-free totality"),
    (3, "min clause"),
    (4, "self-interpretation"),
    (5, "f_z convergence and degeneracy"),
    (6, "nmid"),
    (7, "axiomatics soundness"),
    (8, "lemma-good differential"),
    (9, "universe"),
];

/// Wall-clock limits, where a criterion has one.
fn time_limit(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(120)),
        5 => Some(Duration::from_secs(300)),
        8 => Some(Duration::from_secs(600)),
        _ => None,
    }
}

pub fn run(id: u8, cfg: &SelftestConfig) -> CriterionReport {
    let (_, name) = CRITERIA
        .iter()
        .copied()
        .find(|(i, _)| *i == id)
        .unwrap_or((id, "unknown"));
    let start = Instant::now();
    let mut t = Tally::new();
    match id {
        1 => monotonicity(cfg.seed, &mut t),
        2 => totality(cfg.seed, &mut t),
        3 => min_clause(cfg.seed, &mut t),
        4 => self_interpretation(cfg.seed, &mut t),
        5 => descriptionalism(&mut t),
        6 => nmid_suite(cfg.seed, &mut t),
        7 => axiomatics(cfg.seed, &mut t),
        8 => lemma_good(&mut t),
        9 => universe(&mut t),
        _ => t.fail(format!("no criterion {id}")),
    }
    let elapsed = start.elapsed();
    if let Some(limit) = time_limit(id) {
        t.note(format!("time limit {}s", limit.as_secs()));
        if cfg.enforce_time && elapsed > limit {
            t.fail(format!("took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()));
        }
    }
    CriterionReport {
        id,
        name,
        passed: t.violations == 0,
        checked: t.checked,
        violations: t.violations,
        examples: t.examples,
        notes: t.notes,
        artifact: t.artifact,
        elapsed,
    }
}

pub fn run_all(cfg: &SelftestConfig) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(id, _)| run(*id, cfg)).collect()
}

// ---------------------------------------------------------------------------
// 1. monotonicity

#[derive(Debug, Clone, PartialEq, Eq)]
enum Outcome {
    Truth(Truth3),
    Value(Option<Value>),
}

impl Outcome {
    fn defined(&self) -> bool {
        match self {
            Outcome::Truth(t) => t.is_defined(),
            Outcome::Value(v) => v.is_some(),
        }
    }
}

fn eval_expr(e: &Expr, env: &Env, n: u32) -> Result<Outcome, EvalError> {
    Ok(match e {
        Expr::Formula(p) => Outcome::Truth(eval::eval_formula(p, env, n)?),
        Expr::Ord(a) => Outcome::Value(eval::eval_ord(a, env, n)?.map(Value::Ord)),
        Expr::Set(x) => Outcome::Value(eval::eval_set(x, env, n)?.map(Value::Set)),
    })
}

fn monotonicity(seed: u64, t: &mut Tally) {
    let mut rng = gen::rng(seed);
    let cfg = GenConfig::default();
    let mut defined_pairs = 0u64;
    for i in 0..2000 {
        let e = gen::expr(&mut rng, &cfg);
        for n in 0..5 {
            let Some(env) = gen::env_for(&mut rng, &e, n) else {
                continue;
            };
            let base = match eval_expr(&e, &env, n) {
                Ok(b) => b,
                Err(err) => {
                    t.fail(format!("#{i} {e} at {n}: {err}"));
                    continue;
                }
            };
            if !base.defined() {
                continue;
            }
            for m in n + 1..=5 {
                defined_pairs += 1;
                let up = eval_expr(&e, &env, m);
                t.check(up.as_ref() == Ok(&base), || {
                    format!("#{i} {e} under {env:?}: {base:?} at {n}, {up:?} at {m}")
                });
            }
        }
    }
    t.note(format!("2000 expressions, {defined_pairs} defined stage pairs"));
}

// ---------------------------------------------------------------------------
// 2. totality of the min-free fragment

fn totality(seed: u64, t: &mut Tally) {
    let mut rng = gen::rng(seed ^ 2);
    let cfg = GenConfig::min_free(12);
    let mut i = 0;
    while i < 1000 {
        let p = gen::formula(&mut rng, &cfg);
        let k = rng.gen_range(0..=5);
        let Some(env) = gen::env_for(&mut rng, &Expr::Formula(p.clone()), k) else {
            continue;
        };
        i += 1;
        let mut seen: Option<Truth3> = None;
        for n in env.min_stage()..=5 {
            let v = eval::eval_formula(&p, &env, n);
            t.check(matches!(v, Ok(x) if x.is_defined()), || format!("#{i} {p} at {n}: {v:?}"));
            if let Ok(v) = v {
                match seen {
                    None => seen = Some(v),
                    Some(s) => t.check(s == v, || format!("#{i} {p}: {s} then {v} at {n}")),
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 3. min clause

const MIN_EXAMPLES: [(&str, Option<u32>); 2] = [
    ("(min a (or (eq a (nat 2)) (and (mem (nat 2) a) (def (nat 5)))))", Some(2)),
    ("(min a (or (eq a (nat 2)) (and (mem a (nat 2)) (def (nat 5)))))", None),
];

/// `(α = [k]) ∨ (C(α) ∧ R)` with a random comparison `C` and a random,
/// possibly undefined, side formula `R`.
fn min_variant(rng: &mut gen::Rng8) -> OrdTerm {
    let alpha = Term::var("a");
    let k = Term::Ord(numeral(rng.gen_range(0..4)));
    let j = Term::Ord(numeral(rng.gen_range(0..4)));
    let cmp = match rng.gen_range(0..3) {
        0 => Formula::mem(j, alpha.clone()),
        1 => Formula::mem(alpha.clone(), j),
        _ => Formula::not(Formula::eq(alpha.clone(), j)),
    };
    let side = match rng.gen_range(0..3) {
        0 => Formula::Defined(Term::Ord(numeral(rng.gen_range(0..7)))),
        1 => Formula::not(Formula::Defined(Term::Ord(numeral(rng.gen_range(0..7))))),
        _ => gen::formula(rng, &GenConfig::min_free(4)),
    };
    OrdTerm::min("a", Formula::or(Formula::eq(alpha, k), Formula::and(cmp, side)))
}

fn min_clause(seed: u64, t: &mut Tally) {
    for (text, want) in MIN_EXAMPLES {
        let a = parse_ord(text).expect("example parses");
        let got = eval::eval_ord(&a, &Env::new(), 4);
        t.check(got == Ok(want), || format!("{text} at 4: {got:?}, want {want:?}"));
    }
    let mut rng = gen::rng(seed ^ 3);
    let cfg = GenConfig {
        max_min_depth: 2,
        ..GenConfig::default()
    };
    let (mut defined, mut undefined) = (0, 0);
    let mut i = 0;
    while i < 200 {
        let a = if i % 2 == 0 {
            min_variant(&mut rng)
        } else {
            loop {
                let a = gen::ord_term(&mut rng, &cfg);
                if matches!(a, OrdTerm::Min { .. }) {
                    break a;
                }
            }
        };
        let n = rng.gen_range(0..=4);
        let Some(env) = gen::env_for(&mut rng, &Expr::Ord(a.clone()), n) else {
            continue;
        };
        i += 1;
        let fast = eval::eval_ord(&a, &env, n);
        let slow = oracle::Naive::new(n, &env).ord(&a);
        match (&fast, &slow) {
            (Ok(x), Ok(y)) if x == y => {
                if x.is_some() {
                    defined += 1
                } else {
                    undefined += 1
                }
                t.checked += 1;
            }
            _ => t.fail(format!("{a} at {n} under {env:?}: evaluator {fast:?}, oracle {slow:?}")),
        }
    }
    t.note(format!("random variants: {defined} defined, {undefined} undefined"));
}

// ---------------------------------------------------------------------------
// 4. self-interpretation

fn self_interpretation(seed: u64, t: &mut Tally) {
    let mut rng = gen::rng(seed ^ 4);
    let cfg = GenConfig::closed(12, 2);
    let env = Env::new();
    for i in 0..1000 {
        let p = gen::formula(&mut rng, &cfg);
        for n in 0..=4 {
            let direct = eval::eval_formula(&p, &env, n);
            let meta = eval::eval_selfmeta(&p, &env, n);
            t.check(
                matches!((&direct, &meta), (Ok(d), Ok((m, _))) if d == m),
                || format!("#{i} {p} at {n}: eval {direct:?}, selfmeta {meta:?}"),
            );
            for m in 0..n {
                let inner = eval::eval_formula(&p, &env, m);
                let marked = eval::eval_meta(&p, &env, m, n);
                let expect = inner.map(|v| match v {
                    Truth3::Top => MetaTruth::Top,
                    Truth3::Bot => MetaTruth::Bot,
                    Truth3::U => MetaTruth::MarkedU,
                });
                t.check(marked == expect, || format!("#{i} {p} meta {m} in {n}: {marked:?}"));
            }
        }
    }
    t.note("meta-evaluation has no unmarked U by construction; checked against inner evaluation");
}

// ---------------------------------------------------------------------------
// 5. f_z and reflection

fn descriptionalism(t: &mut Tally) {
    let mut stabilized = BTreeMap::new();
    for n in 0..=4u32 {
        let mut values = Vec::new();
        for d in 0..=FZ_D_STAR {
            match descr::fz_approx(&[], n, &TermBudget::new(d).with_arity(0)) {
                Ok(r) => values.push(r.value),
                Err(e) => {
                    t.fail(format!("f(∅, {n}) at {d}: {e}"));
                    return;
                }
            }
        }
        let from = (0..values.len()).find(|&d| values[d..].iter().all(|&v| v == n));
        t.check(from.is_some(), || format!("f(∅, {n}) by budget: {values:?}"));
        if let Some(d) = from {
            stabilized.insert(n, d);
        }
    }
    t.note(format!("f(∅, n) = n from budgets {stabilized:?}"));
    let budget = TermBudget::new(REFLECT_NODES).with_arity(REFLECT_ARITY);
    let mut pairs = 0;
    for tau in 1..=descr::MAX_STAGE {
        for theta in 0..tau {
            pairs += 1;
            let direct = descr::reflect_check(theta, tau, &budget);
            let via = descr::reflect_check_via_fz(theta, tau, &budget);
            match (&direct, &via) {
                (Ok(d), Ok(v)) => {
                    t.check(!d.reflecting, || format!("{theta} is {tau}-reflecting"));
                    t.check(d.reflecting == *v, || format!("({theta}, {tau}): direct {}, via f {v}", d.reflecting));
                }
                _ => t.fail(format!("({theta}, {tau}): {direct:?} / {via:?}")),
            }
        }
    }
    t.note(format!("{pairs} pairs at {REFLECT_NODES} nodes, arity {REFLECT_ARITY}"));
}

// ---------------------------------------------------------------------------
// 6. nmid

/// Every trajectory of an inflationary operator from `w0`: each step adds
/// a nonempty set of fresh elements, or stops. The operator is the
/// trajectory on its own chain and the identity elsewhere.
fn trajectories(universe: u32, w0: Subset) -> Vec<Vec<Subset>> {
    let full = nmid::full(universe);
    let mut out = Vec::new();
    let mut stack = vec![vec![w0]];
    while let Some(chain) = stack.pop() {
        let w = *chain.last().unwrap();
        out.push(chain.clone());
        let free = full & !w;
        let mut s = free;
        while s != 0 {
            let mut next = chain.clone();
            next.push(w | s);
            stack.push(next);
            s = (s - 1) & free;
        }
    }
    out
}

fn chain_operator(universe: u32, chain: &[Subset]) -> OperatorSpec {
    let mut table: Vec<Subset> = (0..1u64 << universe).collect();
    for pair in chain.windows(2) {
        table[pair[0] as usize] = pair[1];
    }
    OperatorSpec::table(universe, table).expect("valid table")
}

/// All inflationary tables on a universe of `n ≤ 3` elements.
fn all_tables(n: u32) -> Vec<Vec<Subset>> {
    let full = nmid::full(n);
    let mut out = vec![Vec::new()];
    for w in 0..=full {
        let free = full & !w;
        let mut options = Vec::new();
        let mut s = free;
        loop {
            options.push(w | s);
            if s == 0 {
                break;
            }
            s = (s - 1) & free;
        }
        out = out
            .into_iter()
            .flat_map(|t: Vec<Subset>| {
                options.iter().map(move |&o| {
                    let mut t = t.clone();
                    t.push(o);
                    t
                })
            })
            .collect();
    }
    out
}

fn check_trace(t: &mut Tally, op: &OperatorSpec, w0: Subset, label: &str) {
    match nmid::iterate(op, w0) {
        Ok(trace) => {
            let n = op.universe as usize;
            t.check(trace.fixpoint_index <= n, || {
                format!("{label} from {w0:#x}: fixpoint after {} steps", trace.fixpoint_index)
            });
            let total = nmid::total_time(&trace);
            t.check(total.lt_int(2), || format!("{label} from {w0:#x}: total time {total}"));
        }
        Err(e) => t.fail(format!("{label} from {w0:#x}: {e}")),
    }
}

/// `sep x (L 4) (∃b<4 (x = b) ∧ (x ∈ w ∨ Q))`: inflationary on subsets of 4.
fn fix_body(q: Formula) -> SetTerm {
    let x = || Term::var("x");
    let is_nat = Formula::exists_ord("b", numeral(4), Formula::eq(x(), Term::var("b")));
    let grow = Formula::or(Formula::mem(x(), Term::var("w")), q);
    SetTerm::sep("x", SetTerm::stage(numeral(4)), Formula::and(is_nat, grow))
}

fn nmid_suite(seed: u64, t: &mut Tally) {
    for n in 0..=3 {
        let tables = all_tables(n);
        for (k, table) in tables.iter().enumerate() {
            let op = OperatorSpec::table(n, table.clone()).expect("valid table");
            for w0 in 0..=nmid::full(n) {
                check_trace(t, &op, w0, &format!("table {k} on {n}"));
            }
        }
        t.note(format!("N = {n}: all {} inflationary tables", tables.len()));
    }
    let mut count = 0;
    for w0 in 0..=nmid::full(4) {
        for chain in trajectories(4, w0) {
            count += 1;
            check_trace(t, &chain_operator(4, &chain), w0, &format!("trajectory {chain:x?}"));
        }
    }
    t.note(format!("N = 4: all {count} trajectories from every seed"));
    let mut rng = gen::rng(seed ^ 6);
    for n in [5, 6] {
        for k in 0..500 {
            let op = nmid::random_inflationary(&mut rng, n);
            for w0 in 0..=nmid::full(n) {
                check_trace(t, &op, w0, &format!("random operator {k} on {n}"));
            }
        }
    }
    let mc = nmid::OperatorSpec::min_complement(4);
    match nmid::iterate(&mc, 0) {
        Ok(trace) => {
            let total = nmid::total_time(&trace);
            t.check(total == Dyadic::new(15, 3), || format!("min-complement total time {total}"));
        }
        Err(e) => t.fail(format!("min-complement: {e}")),
    }
    // Fixpoint terms against their compiled tables.
    let qcfg = GenConfig {
        set_vars: vec!["x", "w"],
        ord_vars: vec!["c"],
        ..GenConfig::min_free(6)
    };
    let mut made = 0;
    while made < 20 {
        let q = gen::formula(&mut rng, &qcfg);
        let fv = crate::syntax::free_vars(&q);
        if fv.iter().any(|v| v.as_str() != "x" && v.as_str() != "w") {
            continue;
        }
        made += 1;
        let body = fix_body(q);
        let op = match OperatorSpec::term(4, "w", body.clone(), Env::new(), 5) {
            Ok(op) => op,
            Err(e) => {
                t.fail(format!("{body}: {e}"));
                continue;
            }
        };
        let term = SetTerm::fix("w", body.clone(), SetTerm::var("s"));
        for w0 in 0..=nmid::full(4) {
            let env = Env::new().set("s", nmid::subset_to_hf(w0));
            let direct = nmid::eval_fix(&term, &env, 5);
            let compiled = nmid::iterate(&op, w0).map(|tr| nmid::subset_to_hf(tr.fixpoint()));
            t.check(
                matches!((&direct, &compiled), (Ok(Some(a)), Ok(b)) if a == b),
                || format!("{term} from {w0:#x}: eval_fix {direct:?}, iterate {compiled:?}"),
            );
        }
    }
    t.note("20 fixpoint terms on N = 4 against table iteration, all 16 seeds");
}

// ---------------------------------------------------------------------------
// 7. axiomatics

const INSTANCES: usize = 100;
const MAX_ATTEMPTS: usize = 20_000;

fn axiomatics(seed: u64, t: &mut Tally) {
    let mut per_schema = BTreeMap::new();
    for (k, &(rule, schema)) in rules::SCHEMAS.iter().enumerate() {
        let label = if schema.is_empty() {
            rule.name().to_string()
        } else {
            format!("{}/{schema}", rule.name())
        };
        let mut rng = gen::rng(seed ^ (7 << 8) ^ k as u64);
        let mut accepted = 0;
        let mut attempts = 0;
        let mut stage_checks = 0;
        while accepted < INSTANCES && attempts < MAX_ATTEMPTS {
            attempts += 1;
            let Some(inst) = rules::candidate(rule, schema, &mut rng) else {
                continue;
            };
            match rules::probe_instance(&inst) {
                Ok(rules::Verdict::Vacuous) => {}
                Ok(rules::Verdict::Sound(stages)) => {
                    accepted += 1;
                    stage_checks += stages.len();
                    t.checked += stages.len() as u64;
                }
                Ok(rules::Verdict::Counterexample { stage, output, detail }) => {
                    accepted += 1;
                    t.fail(format!("{label}: {output} fails at {stage} under {detail}"));
                }
                Err(e) => t.fail(format!("{label}: {} : {e}", inst.output)),
            }
        }
        if accepted < INSTANCES {
            t.fail(format!("{label}: only {accepted} usable instances in {attempts} attempts"));
        }
        per_schema.insert(label, json!({"instances": accepted, "attempts": attempts, "stage_checks": stage_checks}));
    }
    t.note(format!("{} schemas, {INSTANCES} instances each", rules::SCHEMAS.len()));
    for n in 0..=hf::MAX_DEFINABILITY_STAGE + 1 {
        match kp_check(KpAxiom::Infinity, n, KpBudget::new(0)) {
            Ok(r) => t.check(!r.holds, || format!("infinity holds on V_{n}")),
            Err(e) => t.fail(format!("infinity on V_{n}: {e}")),
        }
    }
    match kp_check(KpAxiom::Separation, 3, KpBudget::new(KP_SEPARATION_BUDGET)) {
        Ok(r) => {
            t.check(r.holds, || format!("Δ0-separation fails on V_3: {:?}", r.witness));
            t.note(format!("Δ0-separation on V_3 at budget {KP_SEPARATION_BUDGET}: {} relations", r.relations));
        }
        Err(e) => t.fail(format!("Δ0-separation: {e}")),
    }
    for n in 0..=4 {
        let b = KpBudget::new(KP_COLLECTION_BUDGET);
        match (kp_check(KpAxiom::Collection, n, b), kp_check(KpAxiom::CollectionV2, n, b)) {
            (Ok(a), Ok(c)) => t.check(a.holds == c.holds, || {
                format!("collection on V_{n}: {} vs v2 {}", a.holds, c.holds)
            }),
            (a, c) => t.fail(format!("collection on V_{n}: {:?} / {:?}", a.err(), c.err())),
        }
    }
    t.artifact = Some(json!({ "schemas": per_schema }));
}

// ---------------------------------------------------------------------------
// 8. lemma-good

/// The good sets over at most three atoms with `q ≤ 3`.
pub fn lemma_cases() -> Vec<FormulaSet> {
    closure::good_sets(&closure::atom_names(3), 3)
        .into_iter()
        .filter(|p| closure::is_good(p).is_some_and(|c| c.q <= 3))
        .collect()
}

fn lemma_good(t: &mut Tally) {
    let cfg = LemmaConfig {
        max_budget: LEMMA_REFERENCE_BUDGET,
        ..LemmaConfig::new(LEMMA_TARGET_BUDGET)
    };
    let mut trace = Vec::new();
    let cases = lemma_cases();
    for p in &cases {
        match closure::lemmagood_compare(p, &cfg) {
            Ok(r) => {
                t.check(r.sound, || format!("{{{}}}: unsound {:?}", p.rendered().join(", "), r.unsound));
                t.check(r.complete_at.is_some(), || {
                    format!("{{{}}}: incomplete at {LEMMA_REFERENCE_BUDGET}: {:?}", p.rendered().join(", "), r.missing)
                });
                trace.push(json!({
                    "set": p.rendered(),
                    "q": r.certificate.q,
                    "derived": r.derived,
                    "true_formulas": r.true_formulas,
                    "complete_at": r.complete_at,
                    "escalation": r.escalation,
                }));
            }
            Err(e) => t.fail(format!("{{{}}}: {e}", p.rendered().join(", "))),
        }
    }
    t.note(format!(
        "{} good sets; soundness at budget {LEMMA_TARGET_BUDGET}, completeness target {LEMMA_TARGET_BUDGET} escalated to {LEMMA_REFERENCE_BUDGET}",
        cases.len()
    ));
    t.artifact = Some(json!({
        "target_budget": LEMMA_TARGET_BUDGET,
        "reference_budget": LEMMA_REFERENCE_BUDGET,
        "fragment": cfg.completeness,
        "cases": trace,
    }));
}

// ---------------------------------------------------------------------------
// 9. universe

const STAGE_SIZES: [usize; 6] = [0, 1, 2, 4, 16, 65536];

fn universe(t: &mut Tally) {
    for (n, &want) in STAGE_SIZES.iter().enumerate() {
        let got = hf::stage_size(n as u32);
        t.check(got.as_ref() == Ok(&want), || format!("|V_{n}| = {got:?}, want {want}"));
        let listed = hf::stage_elements(n as u32).map(|e| e.len());
        t.check(listed == Ok(want), || format!("V_{n} lists {listed:?} elements"));
    }
    for n in 0..=hf::MAX_DEFINABILITY_STAGE {
        let found = hf::definable_subsets(n, LSTAGE_D_STAR, LSTAGE_ARITY);
        let all: HashSet<HFSet> = hf::stage_set(n).expect("small stage").powerset().into_iter().collect();
        match found {
            Ok(found) => {
                let found: HashSet<HFSet> = found.into_iter().collect();
                t.check(found == all, || {
                    format!("V_{n}: {} definable of {} subsets", found.len(), all.len())
                });
            }
            Err(e) => t.fail(format!("V_{n}: {e}")),
        }
    }
    t.note(format!("definability budget {LSTAGE_D_STAR} nodes, arity {LSTAGE_ARITY}"));
}
