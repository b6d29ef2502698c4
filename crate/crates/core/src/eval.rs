//! Three-valued staged interpretation of formulas, ordinal terms and set
//! terms at a finite stage `n` (the model `L_n = V_n`).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hf::{self, HFSet, HfError, MAX_ENUMERABLE_STAGE};
use crate::syntax::ast::*;
use crate::syntax::ops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth3 {
    Top,
    Bot,
    #[serde(rename = "undef")]
    U,
}

impl Truth3 {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth3::Top
        } else {
            Truth3::Bot
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        match self {
            Truth3::Top => Truth3::Bot,
            Truth3::Bot => Truth3::Top,
            Truth3::U => Truth3::U,
        }
    }

    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Truth3::Bot, _) | (_, Truth3::Bot) => Truth3::Bot,
            (Truth3::Top, Truth3::Top) => Truth3::Top,
            _ => Truth3::U,
        }
    }

    pub fn or(self, other: Self) -> Self {
        self.not().and(other.not()).not()
    }

    pub fn is_defined(self) -> bool {
        self != Truth3::U
    }
}

impl fmt::Display for Truth3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth3::Top => "top",
            Truth3::Bot => "bot",
            Truth3::U => "undef",
        })
    }
}

/// Result of meta-evaluation: a crisp truth value or the marked `U′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaTruth {
    Top,
    Bot,
    #[serde(rename = "undef-marked")]
    MarkedU,
}

/// A denoted value: a finite ordinal or a hereditarily finite set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Set(HFSet),
    Ord(u32),
}

impl Value {
    /// The value as a set, ordinals injected as von Neumann ordinals.
    pub fn to_set(&self) -> HFSet {
        match self {
            Value::Set(s) => s.clone(),
            Value::Ord(k) => HFSet::ordinal(*k),
        }
    }

    pub fn as_ordinal(&self) -> Option<u32> {
        match self {
            Value::Set(s) => s.as_ordinal(),
            Value::Ord(k) => Some(*k),
        }
    }

    /// Least stage containing the value.
    pub fn min_stage(&self) -> u32 {
        match self {
            Value::Set(s) => s.rank() + 1,
            Value::Ord(k) => k + 1,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Set(s) => write!(f, "{s}"),
            Value::Ord(k) => write!(f, "{k}"),
        }
    }
}

/// Crisp membership with von Neumann injection of ordinals.
pub fn value_mem(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Ord(j), Value::Ord(k)) => j < k,
        (Value::Set(s), Value::Ord(k)) => s.as_ordinal().is_some_and(|j| j < *k),
        (Value::Ord(j), Value::Set(t)) => t.contains(&HFSet::ordinal(*j)),
        (Value::Set(s), Value::Set(t)) => t.contains(s),
    }
}

/// Crisp extensional equality with von Neumann injection of ordinals.
pub fn value_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Ord(j), Value::Ord(k)) => j == k,
        (Value::Set(s), Value::Ord(k)) | (Value::Ord(k), Value::Set(s)) => s.as_ordinal() == Some(*k),
        (Value::Set(s), Value::Set(t)) => s == t,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(Name),
    #[error("environment value for {0} is outside stage {1}")]
    OutOfStage(Name, u32),
    #[error("environment value for {0} has the wrong sort")]
    WrongSort(Name),
    #[error("meta-evaluation needs inner stage {inner} < outer stage {outer}")]
    StageOrder { inner: u32, outer: u32 },
    #[error("resource limit: {0}")]
    Resource(String),
}

impl From<HfError> for EvalError {
    fn from(e: HfError) -> Self {
        EvalError::Resource(e.to_string())
    }
}

pub type EvalResult<T> = Result<T, EvalError>;

/// Assignment of values to free variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    bindings: Vec<(Name, Value)>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with(mut self, name: &str, v: Value) -> Self {
        self.bind(Name::new(name), v);
        self
    }

    pub fn set(self, name: &str, v: HFSet) -> Self {
        self.with(name, Value::Set(v))
    }

    pub fn ord(self, name: &str, k: u32) -> Self {
        self.with(name, Value::Ord(k))
    }

    /// Adds or replaces a binding.
    pub fn bind(&mut self, name: Name, v: Value) {
        self.bindings.retain(|(n, _)| *n != name);
        self.bindings.push((name, v));
    }

    pub fn get(&self, name: &Name) -> Option<&Value> {
        self.bindings.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Value)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Least stage containing every value.
    pub fn min_stage(&self) -> u32 {
        self.bindings.iter().map(|(_, v)| v.min_stage()).max().unwrap_or(0)
    }

    /// Checks that values match their variables' sorts and lie in stage `n`.
    pub fn validate(&self, n: u32) -> EvalResult<()> {
        for (name, v) in &self.bindings {
            match (name.sort(), v) {
                (Sort::Set, Value::Set(_)) | (Sort::Ord, Value::Ord(_)) => {}
                _ => return Err(EvalError::WrongSort(name.clone())),
            }
            if v.min_stage() > n {
                return Err(EvalError::OutOfStage(name.clone(), n));
            }
        }
        Ok(())
    }
}

/// Evaluates a formula at stage `n`.
pub fn eval_formula(p: &Formula, env: &Env, n: u32) -> EvalResult<Truth3> {
    env.validate(n)?;
    Evaluator::new(n, env).formula(p)
}

/// Evaluates an ordinal term at stage `n`; `None` is `U`.
pub fn eval_ord(a: &OrdTerm, env: &Env, n: u32) -> EvalResult<Option<u32>> {
    env.validate(n)?;
    Evaluator::new(n, env).ord(a)
}

/// Evaluates a set term at stage `n`; `None` is `U`.
pub fn eval_set(x: &SetTerm, env: &Env, n: u32) -> EvalResult<Option<HFSet>> {
    env.validate(n)?;
    Evaluator::new(n, env).set(x)
}

pub fn eval_term(t: &Term, env: &Env, n: u32) -> EvalResult<Option<Value>> {
    env.validate(n)?;
    Evaluator::new(n, env).term(t)
}

/// Evaluates `p` at the inner stage `m` as seen from the outer stage `n`,
/// reporting inner undefinedness as the marked value.
pub fn eval_meta(p: &Formula, env: &Env, m: u32, n: u32) -> EvalResult<MetaTruth> {
    if m >= n {
        return Err(EvalError::StageOrder { inner: m, outer: n });
    }
    Ok(match eval_formula(p, env, m)? {
        Truth3::Top => MetaTruth::Top,
        Truth3::Bot => MetaTruth::Bot,
        Truth3::U => MetaTruth::MarkedU,
    })
}

/// Second evaluator: the value of `p` at the least stage `m ≤ n` (starting
/// from the least stage holding the environment) where meta-evaluation is
/// not marked undefined. Returns that stage alongside the value.
pub fn eval_selfmeta(p: &Formula, env: &Env, n: u32) -> EvalResult<(Truth3, Option<u32>)> {
    env.validate(n)?;
    for m in env.min_stage()..=n {
        match eval_meta(p, env, m, n + 1)? {
            MetaTruth::Top => return Ok((Truth3::Top, Some(m))),
            MetaTruth::Bot => return Ok((Truth3::Bot, Some(m))),
            MetaTruth::MarkedU => {}
        }
    }
    Ok((Truth3::U, None))
}

/// One evaluation at a fixed stage. Closed `min` terms are memoized by node
/// address, so an evaluator must not outlive the expression it is used on.
pub struct Evaluator {
    n: u32,
    env: Vec<(Name, Value)>,
    closed: HashMap<usize, bool>,
    memo: HashMap<usize, Option<u32>>,
}

impl Evaluator {
    pub fn new(n: u32, env: &Env) -> Self {
        Evaluator {
            n,
            env: env.bindings.clone(),
            closed: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    pub fn stage(&self) -> u32 {
        self.n
    }

    fn lookup(&self, v: &Name) -> EvalResult<&Value> {
        self.env
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, x)| x)
            .ok_or_else(|| EvalError::Unbound(v.clone()))
    }

    fn scoped<R>(&mut self, v: &Name, x: Value, k: impl FnOnce(&mut Self) -> R) -> R {
        self.env.push((v.clone(), x));
        let r = k(self);
        self.env.pop();
        r
    }

    pub fn term(&mut self, t: &Term) -> EvalResult<Option<Value>> {
        Ok(match t {
            Term::Set(x) => self.set(x)?.map(Value::Set),
            Term::Ord(a) => self.ord(a)?.map(Value::Ord),
        })
    }

    pub fn formula(&mut self, p: &Formula) -> EvalResult<Truth3> {
        Ok(match p {
            Formula::Mem(a, b) | Formula::Eq(a, b) => {
                let (Some(va), Some(vb)) = (self.term(a)?, self.term(b)?) else {
                    return Ok(Truth3::U);
                };
                Truth3::from_bool(if matches!(p, Formula::Mem(..)) {
                    value_mem(&va, &vb)
                } else {
                    value_eq(&va, &vb)
                })
            }
            Formula::Defined(t) => match self.term(t)? {
                Some(_) => Truth3::Top,
                None => Truth3::U,
            },
            Formula::And(p, q) => {
                let a = self.formula(p)?;
                if a == Truth3::Bot {
                    return Ok(Truth3::Bot);
                }
                a.and(self.formula(q)?)
            }
            Formula::Or(p, q) => {
                let a = self.formula(p)?;
                if a == Truth3::Top {
                    return Ok(Truth3::Top);
                }
                a.or(self.formula(q)?)
            }
            Formula::Not(p) => self.formula(p)?.not(),
            Formula::ForallSet { var, bound, body } | Formula::ExistsSet { var, bound, body } => {
                let Some(dom) = self.set(bound)? else {
                    return Ok(Truth3::U);
                };
                let all = matches!(p, Formula::ForallSet { .. });
                let vals = dom.elements().iter().map(|x| Value::Set(x.clone()));
                self.quantify(var, vals, body, all)?
            }
            Formula::ForallOrd { var, bound, body } | Formula::ExistsOrd { var, bound, body } => {
                let Some(k) = self.ord(bound)? else {
                    return Ok(Truth3::U);
                };
                let all = matches!(p, Formula::ForallOrd { .. });
                self.quantify(var, (0..k).map(Value::Ord), body, all)?
            }
        })
    }

    /// `∀`: ⊥ if some instance is ⊥, else U if some instance is U, else ⊤.
    /// `∃` is the de Morgan dual.
    fn quantify(
        &mut self,
        var: &Name,
        vals: impl Iterator<Item = Value>,
        body: &Formula,
        all: bool,
    ) -> EvalResult<Truth3> {
        let decisive = if all { Truth3::Bot } else { Truth3::Top };
        let mut undef = false;
        for x in vals {
            match self.scoped(var, x, |ev| ev.formula(body))? {
                Truth3::U => undef = true,
                t if t == decisive => return Ok(decisive),
                _ => {}
            }
        }
        Ok(if undef { Truth3::U } else { decisive.not() })
    }

    pub fn ord(&mut self, a: &OrdTerm) -> EvalResult<Option<u32>> {
        match a {
            OrdTerm::Var(v) => match self.lookup(v)? {
                Value::Ord(k) => Ok(Some(*k)),
                Value::Set(s) => s.as_ordinal().map(Some).ok_or_else(|| EvalError::WrongSort(v.clone())),
            },
            OrdTerm::Min { var, pred } => {
                let key = a as *const OrdTerm as usize;
                let closed = *self
                    .closed
                    .entry(key)
                    .or_insert_with(|| ops::free_vars_ord(a).is_empty());
                if closed {
                    if let Some(r) = self.memo.get(&key) {
                        return Ok(*r);
                    }
                }
                let r = self.min(var, pred)?;
                if closed {
                    self.memo.insert(key, r);
                }
                Ok(r)
            }
        }
    }

    /// `min α. P(α)` is the `α < n` with `P(α) = ⊤` and `P(β) = ⊥` for all
    /// `β < α`; U if there is none.
    fn min(&mut self, var: &Name, pred: &Formula) -> EvalResult<Option<u32>> {
        for alpha in 0..self.n {
            match self.scoped(var, Value::Ord(alpha), |ev| ev.formula(pred))? {
                Truth3::Top => return Ok(Some(alpha)),
                Truth3::U => return Ok(None),
                Truth3::Bot => {}
            }
        }
        Ok(None)
    }

    pub fn set(&mut self, x: &SetTerm) -> EvalResult<Option<HFSet>> {
        match x {
            SetTerm::Var(v) => Ok(Some(self.lookup(v)?.to_set())),
            SetTerm::Sep { var, bound, pred } => {
                let Some(dom) = self.set(bound)? else {
                    return Ok(None);
                };
                let mut keep = Vec::new();
                for y in dom.elements() {
                    match self.scoped(var, Value::Set(y.clone()), |ev| ev.formula(pred))? {
                        Truth3::Top => keep.push(y.clone()),
                        Truth3::Bot => {}
                        Truth3::U => return Ok(None),
                    }
                }
                Ok(Some(HFSet::from_elements(keep)))
            }
            SetTerm::Stage(a) => {
                let Some(k) = self.ord(a)? else {
                    return Ok(None);
                };
                // V_k is an element of V_n iff k < n.
                if k >= self.n {
                    return Ok(None);
                }
                if k > MAX_ENUMERABLE_STAGE {
                    return Err(EvalError::Resource(format!("L_{k} exceeds the enumerable stages")));
                }
                Ok(Some(hf::stage_set(k)?))
            }
            SetTerm::Fix { var, body, seed } => self.fix(var, body, seed),
        }
    }

    /// `body^∞(seed)`: iterate `w ↦ body` from the seed. U unless the seed
    /// and every step are defined sets of finite ordinals, every step is
    /// inflationary, and every iterate lies in the stage.
    fn fix(&mut self, var: &Name, body: &SetTerm, seed: &SetTerm) -> EvalResult<Option<HFSet>> {
        let Some(mut w) = self.set(seed)? else {
            return Ok(None);
        };
        if !is_nat_set(&w) || !w.in_stage(self.n) {
            return Ok(None);
        }
        loop {
            let Some(next) = self.scoped(var, Value::Set(w.clone()), |ev| ev.set(body))? else {
                return Ok(None);
            };
            if !is_nat_set(&next) || !next.in_stage(self.n) || !w.is_subset(&next) {
                return Ok(None);
            }
            if next == w {
                return Ok(Some(w));
            }
            w = next;
        }
    }
}

fn is_nat_set(s: &HFSet) -> bool {
    s.elements().iter().all(|x| x.as_ordinal().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_ord, parse_set};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn membership() {
        let env = Env::new().set("x0", HFSet::empty()).set("x1", "{{}}".parse().unwrap());
        assert_eq!(eval_formula(&f("(mem x0 x1)"), &env, 2), Ok(Truth3::Top));
    }

    #[test]
    fn numerals_need_room() {
        let p = f("(def (nat 5))");
        assert_eq!(eval_formula(&p, &Env::new(), 3), Ok(Truth3::U));
        assert_eq!(eval_formula(&p, &Env::new(), 6), Ok(Truth3::Top));
    }

    #[test]
    fn forall_over_l1() {
        let p = f("(forall-set x (L (nat 1)) (mem x x))");
        assert_eq!(eval_formula(&p, &Env::new(), 3), Ok(Truth3::Bot));
    }

    #[test]
    fn min_basics() {
        let a = parse_ord("(min a (eq a a))").unwrap();
        assert_eq!(eval_ord(&a, &Env::new(), 1), Ok(Some(0)));
        assert_eq!(eval_ord(&a, &Env::new(), 0), Ok(None));
    }

    #[test]
    fn min_clause_b() {
        let above = parse_ord("(min a (or (eq a (nat 2)) (and (lt (nat 2) a) (def (nat 5)))))").unwrap();
        assert_eq!(eval_ord(&above, &Env::new(), 4), Ok(Some(2)));
        let below = parse_ord("(min a (or (eq a (nat 2)) (and (lt a (nat 2)) (def (nat 5)))))").unwrap();
        assert_eq!(eval_ord(&below, &Env::new(), 4), Ok(None));
    }

    #[test]
    fn set_terms() {
        let v2 = hf::stage_set(2).unwrap();
        let l2 = parse_set("(L (nat 2))").unwrap();
        assert_eq!(eval_set(&l2, &Env::new(), 4), Ok(Some(v2.clone())));
        let sep = parse_set("(sep x (L (nat 2)) (eq x x))").unwrap();
        assert_eq!(eval_set(&sep, &Env::new(), 4), Ok(Some(v2)));
        let undef = parse_set("(sep x (L (nat 2)) (def (nat 9)))").unwrap();
        assert_eq!(eval_set(&undef, &Env::new(), 4), Ok(None));
    }

    #[test]
    fn meta() {
        let p = f("(def (nat 5))");
        assert_eq!(eval_meta(&p, &Env::new(), 3, 8), Ok(MetaTruth::MarkedU));
        let env = Env::new().set("x0", HFSet::empty());
        assert_eq!(eval_meta(&f("(eq x0 x0)"), &env, 2, 3), Ok(MetaTruth::Top));
        assert!(eval_meta(&p, &Env::new(), 3, 3).is_err());
    }

    #[test]
    fn selfmeta_stabilizes() {
        let p = f("(def (nat 2))");
        assert_eq!(eval_selfmeta(&p, &Env::new(), 4), Ok((Truth3::Top, Some(3))));
    }

    #[test]
    fn env_checked() {
        let env = Env::new().ord("a", 3);
        assert!(eval_formula(&f("(eq a a)"), &env, 3).is_err());
        assert_eq!(eval_formula(&f("(eq a a)"), &env, 4), Ok(Truth3::Top));
    }

    #[test]
    fn fix_adds_zero() {
        // w ∪ {0} over the universe {0, 1}
        let x = parse_set("(fix w (sep y (L (nat 2)) (or (mem y w) (eq y (nat 0)))) (sep y (L (nat 0)) (eq y y)))")
            .unwrap();
        assert_eq!(eval_set(&x, &Env::new(), 4), Ok(Some("{{}}".parse().unwrap())));
    }
}
