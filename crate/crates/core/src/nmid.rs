//! Inflationary operators on subsets of a finite universe `{0, …, N-1}`:
//! iteration to the fixpoint, monotonicity, the lightswitch timing model,
//! and the bridge to the fixpoint constructor of the evaluator.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::eval::{self, Env, EvalError, Value};
use crate::hf::HFSet;
use crate::syntax::ast::{Name, SetTerm};

/// Subset of the universe as a bitset.
pub type Subset = u64;

pub const MAX_UNIVERSE: u32 = 63;
/// Largest universe checked exhaustively by [`is_monotone`].
pub const MAX_EXHAUSTIVE: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NmidError {
    #[error("step is not inflationary: t({}) = {}", fmt_subset(*input), fmt_subset(*output))]
    NonInflationary { input: Subset, output: Subset },
    #[error("operator output {} leaves the universe of size {n}", fmt_subset(*output))]
    OutOfUniverse { output: Subset, n: u32 },
    #[error("operator is undefined at {}", fmt_subset(*.0))]
    Undefined(Subset),
    #[error("universe size {0} out of range")]
    Universe(u32),
    #[error("table line {line}: {msg}")]
    Table { line: usize, msg: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn fmt_subset(w: Subset) -> String {
    let items: Vec<String> = members(w).map(|k| k.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

pub fn members(w: Subset) -> impl Iterator<Item = u32> {
    (0..64).filter(move |k| w >> k & 1 == 1)
}

pub fn full(n: u32) -> Subset {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// The set `{k : k ∈ w}` of von Neumann ordinals.
pub fn subset_to_hf(w: Subset) -> HFSet {
    HFSet::from_elements(members(w).map(HFSet::ordinal).collect::<Vec<_>>())
}

/// Inverse of [`subset_to_hf`]; `None` unless every element is an ordinal
/// below 64.
pub fn hf_to_subset(s: &HFSet) -> Option<Subset> {
    let mut w = 0u64;
    for x in s.elements() {
        let k = x.as_ordinal()?;
        if k >= 64 {
            return None;
        }
        w |= 1 << k;
    }
    Some(w)
}

#[derive(Clone)]
pub enum OpBody {
    /// `table[w]` is `t(w)`.
    Table(Vec<Subset>),
    /// A set term in the variable `var`, evaluated at `stage` with `var`
    /// bound to the ordinals in `w`.
    Term {
        var: Name,
        body: SetTerm,
        env: Env,
        stage: u32,
    },
    Host(Arc<dyn Fn(Subset) -> Subset + Send + Sync>),
}

impl fmt::Debug for OpBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpBody::Table(t) => write!(f, "Table({} entries)", t.len()),
            OpBody::Term { var, body, stage, .. } => write!(f, "Term({var} ↦ {body} @ {stage})"),
            OpBody::Host(_) => f.write_str("Host"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub universe: u32,
    pub body: OpBody,
}

impl OperatorSpec {
    pub fn table(universe: u32, table: Vec<Subset>) -> Result<Self, NmidError> {
        if universe > MAX_EXHAUSTIVE || table.len() != 1 << universe {
            return Err(NmidError::Universe(universe));
        }
        Ok(OperatorSpec {
            universe,
            body: OpBody::Table(table),
        })
    }

    pub fn host(universe: u32, f: impl Fn(Subset) -> Subset + Send + Sync + 'static) -> Result<Self, NmidError> {
        if universe > MAX_UNIVERSE {
            return Err(NmidError::Universe(universe));
        }
        Ok(OperatorSpec {
            universe,
            body: OpBody::Host(Arc::new(f)),
        })
    }

    pub fn term(universe: u32, var: &str, body: SetTerm, env: Env, stage: u32) -> Result<Self, NmidError> {
        if universe > MAX_UNIVERSE {
            return Err(NmidError::Universe(universe));
        }
        Ok(OperatorSpec {
            universe,
            body: OpBody::Term {
                var: Name::new(var),
                body,
                env,
                stage,
            },
        })
    }

    pub fn identity(universe: u32) -> Self {
        OperatorSpec::host(universe, |w| w).expect("universe in range")
    }

    /// `t(w) = w ∪ {min(universe ∖ w)}`.
    pub fn min_complement(universe: u32) -> Self {
        let all = full(universe);
        OperatorSpec::host(universe, move |w| {
            let rest = all & !w;
            if rest == 0 {
                w
            } else {
                w | (rest & rest.wrapping_neg())
            }
        })
        .expect("universe in range")
    }

    /// `t(w) = w ∪ {2}` if `0 ∈ w` and `1 ∉ w`, else `w ∪ {0}`.
    pub fn conditional() -> Self {
        OperatorSpec::host(3, |w| if w & 1 == 1 && w & 2 == 0 { w | 4 } else { w | 1 }).expect("universe in range")
    }

    /// Applies the operator, checking the result stays in the universe.
    pub fn apply(&self, w: Subset) -> Result<Subset, NmidError> {
        let out = match &self.body {
            OpBody::Table(t) => t[w as usize],
            OpBody::Host(f) => f(w),
            OpBody::Term { var, body, env, stage } => {
                let mut env = env.clone();
                env.bind(var.clone(), Value::Set(subset_to_hf(w)));
                match eval::eval_set(body, &env, *stage)? {
                    None => return Err(NmidError::Undefined(w)),
                    Some(s) => hf_to_subset(&s).ok_or(NmidError::Undefined(w))?,
                }
            }
        };
        if out & !full(self.universe) != 0 {
            return Err(NmidError::OutOfUniverse {
                output: out,
                n: self.universe,
            });
        }
        Ok(out)
    }

    /// Tabulates the operator over all subsets. Inputs where it fails map
    /// to `None`.
    pub fn compile(&self) -> Result<Vec<Option<Subset>>, NmidError> {
        if self.universe > MAX_EXHAUSTIVE {
            return Err(NmidError::Universe(self.universe));
        }
        Ok((0..1u64 << self.universe).map(|w| self.apply(w).ok()).collect())
    }

    /// Checks `t(w) ⊇ w` for every subset; returns the first violation.
    pub fn check_inflationary(&self) -> Result<(), NmidError> {
        if self.universe > MAX_EXHAUSTIVE {
            return Err(NmidError::Universe(self.universe));
        }
        for w in 0..1u64 << self.universe {
            let out = self.apply(w)?;
            if w & !out != 0 {
                return Err(NmidError::NonInflationary { input: w, output: out });
            }
        }
        Ok(())
    }
}

/// Random inflationary table: `t(w) = w ∪ r(w)` for random `r`.
pub fn random_inflationary(rng: &mut impl Rng, universe: u32) -> OperatorSpec {
    let all = full(universe);
    let table = (0..1u64 << universe).map(|w| w | (rng.gen::<u64>() & rng.gen::<u64>() & all)).collect();
    OperatorSpec::table(universe, table).expect("universe in range")
}

// ---------------------------------------------------------------------------
// Exact dyadic rationals

/// `num / 2^pow`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: u128,
    pow: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, pow: 0 };

    pub fn new(num: u128, pow: u32) -> Self {
        assert!(pow < 127);
        let mut d = Dyadic { num, pow };
        d.normalize();
        d
    }

    /// `2^-k`
    pub fn unit(k: u32) -> Self {
        Dyadic::new(1, k)
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.pow = 0;
        }
        while self.pow > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.pow -= 1;
        }
    }

    pub fn numerator(&self) -> u128 {
        self.num
    }

    pub fn power(&self) -> u32 {
        self.pow
    }

    /// Compares with the integer `k`.
    pub fn lt_int(&self, k: u128) -> bool {
        self.num < k << self.pow
    }

    pub fn le_int(&self, k: u128) -> bool {
        self.num <= k << self.pow
    }
}

impl std::ops::Add for Dyadic {
    type Output = Dyadic;

    fn add(self, o: Dyadic) -> Dyadic {
        let pow = self.pow.max(o.pow);
        Dyadic::new((self.num << (pow - self.pow)) + (o.num << (pow - o.pow)), pow)
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        let pow = self.pow.max(o.pow);
        (self.num << (pow - self.pow)).cmp(&(o.num << (pow - o.pow)))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.pow)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

// ---------------------------------------------------------------------------
// Iteration

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub universe: u32,
    /// `t^0(w0), t^1(w0), …` up to and including the first repeat.
    pub stages: Vec<Subset>,
    /// Least `α` with `t^{α+1}(w0) = t^α(w0)`.
    pub fixpoint_index: usize,
    /// `t^{α+1}(w0) ∖ t^α(w0)` for each strict step.
    pub newly_on: Vec<Subset>,
    /// `2^{-min(newly_on)}` for each strict step.
    pub dyadic_times: Vec<Dyadic>,
}

impl IterationTrace {
    pub fn fixpoint(&self) -> Subset {
        self.stages[self.fixpoint_index]
    }
}

impl Serialize for IterationTrace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            universe: u32,
            stages: Vec<Vec<u32>>,
            fixpoint_index: usize,
            fixpoint: Vec<u32>,
            newly_on: Vec<Vec<u32>>,
            times: Vec<String>,
            total_time: String,
        }
        Repr {
            universe: self.universe,
            stages: self.stages.iter().map(|w| members(*w).collect()).collect(),
            fixpoint_index: self.fixpoint_index,
            fixpoint: members(self.fixpoint()).collect(),
            newly_on: self.newly_on.iter().map(|w| members(*w).collect()).collect(),
            times: self.dyadic_times.iter().map(|d| d.to_string()).collect(),
            total_time: total_time(self).to_string(),
        }
        .serialize(s)
    }
}

/// Iterates `t` from `w0` until the first repeat.
pub fn iterate(op: &OperatorSpec, w0: Subset) -> Result<IterationTrace, NmidError> {
    if w0 & !full(op.universe) != 0 {
        return Err(NmidError::OutOfUniverse {
            output: w0,
            n: op.universe,
        });
    }
    let mut stages = vec![w0];
    let mut newly_on = Vec::new();
    let mut dyadic_times = Vec::new();
    let mut w = w0;
    loop {
        let next = op.apply(w)?;
        if w & !next != 0 {
            return Err(NmidError::NonInflationary { input: w, output: next });
        }
        stages.push(next);
        if next == w {
            break;
        }
        let new = next & !w;
        newly_on.push(new);
        dyadic_times.push(Dyadic::unit(new.trailing_zeros()));
        w = next;
    }
    Ok(IterationTrace {
        universe: op.universe,
        fixpoint_index: stages.len() - 2,
        stages,
        newly_on,
        dyadic_times,
    })
}

/// Total switching time of a trace.
pub fn total_time(trace: &IterationTrace) -> Dyadic {
    trace.dyadic_times.iter().copied().sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotoneReport {
    pub monotone: bool,
    pub exhaustive: bool,
    /// `(w1, w2)` with `w1 ⊆ w2` and `t(w1) ⊄ t(w2)`.
    #[serde(serialize_with = "ser_pair")]
    pub counterexample: Option<(Subset, Subset)>,
}

fn ser_pair<S: Serializer>(p: &Option<(Subset, Subset)>, s: S) -> Result<S::Ok, S::Error> {
    p.map(|(a, b)| (members(a).collect::<Vec<_>>(), members(b).collect::<Vec<_>>()))
        .serialize(s)
}

/// Checks `w1 ⊆ w2 ⇒ t(w1) ⊆ t(w2)`: exhaustively up to
/// [`MAX_EXHAUSTIVE`], otherwise on `samples` random pairs.
pub fn is_monotone(op: &OperatorSpec, rng: &mut impl Rng, samples: usize) -> Result<MonotoneReport, NmidError> {
    let all = full(op.universe);
    let check = |w1: Subset, w2: Subset| -> Result<bool, NmidError> {
        let (a, b) = (op.apply(w1)?, op.apply(w2)?);
        Ok(a & !b == 0)
    };
    if op.universe <= MAX_EXHAUSTIVE {
        let table: Vec<Subset> = (0..=all).map(|w| op.apply(w)).collect::<Result<_, _>>()?;
        for w1 in 0..=all {
            let t1 = table[w1 as usize];
            for w2 in w1..=all {
                if w2 & w1 == w1 && t1 & !table[w2 as usize] != 0 {
                    return Ok(MonotoneReport {
                        monotone: false,
                        exhaustive: true,
                        counterexample: Some((w1, w2)),
                    });
                }
            }
        }
        return Ok(MonotoneReport {
            monotone: true,
            exhaustive: true,
            counterexample: None,
        });
    }
    for _ in 0..samples {
        let w2 = rng.gen::<u64>() & all;
        let w1 = w2 & rng.gen::<u64>();
        if !check(w1, w2)? {
            return Ok(MonotoneReport {
                monotone: false,
                exhaustive: false,
                counterexample: Some((w1, w2)),
            });
        }
    }
    Ok(MonotoneReport {
        monotone: true,
        exhaustive: false,
        counterexample: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub infinitely_regular: bool,
    pub stabilization_index: Option<usize>,
}

/// Whether `t` acts regularly on `w0` (every iterate is admissible and each
/// step inflationary). With a finite universe there are no limit stages, so
/// regular and infinitely regular coincide and stabilization happens within
/// `N` steps.
pub fn regularity_report(op: &OperatorSpec, w0: Subset) -> RegularityReport {
    match iterate(op, w0) {
        Ok(t) => {
            assert!(t.fixpoint_index <= op.universe as usize);
            RegularityReport {
                regular: true,
                infinitely_regular: true,
                stabilization_index: Some(t.fixpoint_index),
            }
        }
        Err(_) => RegularityReport {
            regular: false,
            infinitely_regular: false,
            stabilization_index: None,
        },
    }
}

/// Evaluates a fixpoint term through the evaluator.
pub fn eval_fix(term: &SetTerm, env: &Env, stage: u32) -> Result<Option<HFSet>, NmidError> {
    assert!(matches!(term, SetTerm::Fix { .. }), "not a fixpoint term");
    Ok(eval::eval_set(term, env, stage)?)
}

// ---------------------------------------------------------------------------
// Table files

/// Parses lines `in -> out` with hex bitsets. Blank lines and `#` comments
/// are skipped; every input must appear exactly once.
pub fn parse_table(text: &str, universe: u32) -> Result<OperatorSpec, NmidError> {
    if universe > MAX_EXHAUSTIVE {
        return Err(NmidError::Universe(universe));
    }
    let mut table: Vec<Option<Subset>> = vec![None; 1 << universe];
    let hex = |s: &str, line: usize| {
        u64::from_str_radix(s.trim().trim_start_matches("0x"), 16).map_err(|e| NmidError::Table {
            line,
            msg: e.to_string(),
        })
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (a, b) = content.split_once("->").ok_or(NmidError::Table {
            line,
            msg: "expected 'in -> out'".into(),
        })?;
        let (w, out) = (hex(a, line)?, hex(b, line)?);
        let slot = table.get_mut(w as usize).ok_or(NmidError::Table {
            line,
            msg: format!("input {w:x} outside the universe"),
        })?;
        if slot.replace(out).is_some() {
            return Err(NmidError::Table {
                line,
                msg: format!("duplicate input {w:x}"),
            });
        }
    }
    let table = table
        .into_iter()
        .enumerate()
        .map(|(w, o)| {
            o.ok_or(NmidError::Table {
                line: 0,
                msg: format!("missing input {w:x}"),
            })
        })
        .collect::<Result<_, _>>()?;
    OperatorSpec::table(universe, table)
}

pub fn render_table(op: &OperatorSpec) -> Result<String, NmidError> {
    let mut out = String::new();
    for (w, t) in op.compile()?.into_iter().enumerate() {
        let t = t.ok_or(NmidError::Undefined(w as Subset))?;
        out.push_str(&format!("{w:x} -> {t:x}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_complement_trace() {
        let t = iterate(&OperatorSpec::min_complement(4), 0).unwrap();
        assert_eq!(t.stages, vec![0, 1, 3, 7, 15, 15]);
        assert_eq!(t.fixpoint_index, 4);
        assert_eq!(total_time(&t), Dyadic::new(15, 3));
        assert_eq!(total_time(&t).to_string(), "15/2^3");
    }

    #[test]
    fn conditional_trace() {
        let t = iterate(&OperatorSpec::conditional(), 0).unwrap();
        assert_eq!(t.stages, vec![0b000, 0b001, 0b101, 0b101]);
        assert_eq!(t.fixpoint(), 0b101);
    }

    #[test]
    fn identity_is_immediate() {
        let t = iterate(&OperatorSpec::identity(5), 0b10110).unwrap();
        assert_eq!(t.fixpoint_index, 0);
        assert_eq!(total_time(&t), Dyadic::ZERO);
    }

    #[test]
    fn non_inflationary_reported() {
        let op = OperatorSpec::host(2, |_| 0b01).unwrap();
        assert_eq!(
            iterate(&op, 0b10),
            Err(NmidError::NonInflationary { input: 0b10, output: 0b01 })
        );
    }

    #[test]
    fn monotonicity() {
        let mut rng = crate::gen::rng(0);
        assert!(is_monotone(&OperatorSpec::min_complement(4), &mut rng, 0).unwrap().monotone);
        assert!(is_monotone(&OperatorSpec::identity(4), &mut rng, 0).unwrap().monotone);
        let r = is_monotone(&OperatorSpec::conditional(), &mut rng, 0).unwrap();
        assert_eq!(r.counterexample, Some((0b001, 0b011)));
    }

    #[test]
    fn table_round_trip() {
        let op = OperatorSpec::min_complement(3);
        let text = render_table(&op).unwrap();
        let back = parse_table(&text, 3).unwrap();
        assert_eq!(back.compile().unwrap(), op.compile().unwrap());
    }

    #[test]
    fn dyadic_arithmetic() {
        let s = Dyadic::unit(0) + Dyadic::unit(1) + Dyadic::unit(1);
        assert_eq!(s, Dyadic::new(2, 0));
        assert!(Dyadic::new(15, 3).lt_int(2));
        assert!(!Dyadic::new(15, 3).le_int(1));
    }
}
