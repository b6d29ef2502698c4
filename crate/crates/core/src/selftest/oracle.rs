//! A second, deliberately naive evaluator used as a differential oracle.
//!
//! Every value is a plain hereditarily finite set (ordinals as von Neumann
//! ordinals) and truth values are the numbers 0, 1, 2 for ⊥, U, ⊤, so the
//! connectives are `min`, `max` and `2 - x`. Nothing short-circuits.

use std::collections::HashMap;

use crate::eval::Env;
use crate::hf::{stage_set, HFSet};
use crate::syntax::ast::*;

pub const BOT: u8 = 0;
pub const UNDEF: u8 = 1;
pub const TOP: u8 = 2;

pub struct Naive {
    n: u32,
    vars: HashMap<Name, Vec<HFSet>>,
}

impl Naive {
    pub fn new(n: u32, env: &Env) -> Self {
        let mut vars: HashMap<Name, Vec<HFSet>> = HashMap::new();
        for (name, v) in env.iter() {
            vars.entry(name.clone()).or_default().push(v.to_set());
        }
        Naive { n, vars }
    }

    fn with<R>(&mut self, v: &Name, x: HFSet, k: impl FnOnce(&mut Self) -> R) -> R {
        self.vars.entry(v.clone()).or_default().push(x);
        let r = k(self);
        self.vars.get_mut(v).expect("pushed").pop();
        r
    }

    fn var(&self, v: &Name) -> Result<HFSet, String> {
        self.vars
            .get(v)
            .and_then(|s| s.last())
            .cloned()
            .ok_or_else(|| format!("unbound {v}"))
    }

    pub fn truth(&mut self, p: &Formula) -> Result<u8, String> {
        Ok(match p {
            Formula::Mem(a, b) => match (self.term(a)?, self.term(b)?) {
                (Some(x), Some(y)) => 2 * u8::from(y.contains(&x)),
                _ => UNDEF,
            },
            Formula::Eq(a, b) => match (self.term(a)?, self.term(b)?) {
                (Some(x), Some(y)) => 2 * u8::from(x == y),
                _ => UNDEF,
            },
            Formula::Defined(t) => {
                if self.term(t)?.is_some() {
                    TOP
                } else {
                    UNDEF
                }
            }
            Formula::Not(q) => TOP - self.truth(q)?,
            Formula::And(p, q) => self.truth(p)?.min(self.truth(q)?),
            Formula::Or(p, q) => self.truth(p)?.max(self.truth(q)?),
            Formula::ForallSet { var, bound, body } | Formula::ExistsSet { var, bound, body } => {
                match self.set(bound)? {
                    None => UNDEF,
                    Some(dom) => {
                        let vals = dom.elements().to_vec();
                        self.fold(var, vals, body, matches!(p, Formula::ForallSet { .. }))?
                    }
                }
            }
            Formula::ForallOrd { var, bound, body } | Formula::ExistsOrd { var, bound, body } => {
                match self.ord(bound)? {
                    None => UNDEF,
                    Some(k) => {
                        let vals = (0..k).map(HFSet::ordinal).collect();
                        self.fold(var, vals, body, matches!(p, Formula::ForallOrd { .. }))?
                    }
                }
            }
        })
    }

    fn fold(&mut self, var: &Name, vals: Vec<HFSet>, body: &Formula, all: bool) -> Result<u8, String> {
        let mut acc = if all { TOP } else { BOT };
        for x in vals {
            let t = self.with(var, x, |o| o.truth(body))?;
            acc = if all { acc.min(t) } else { acc.max(t) };
        }
        Ok(acc)
    }

    pub fn term(&mut self, t: &Term) -> Result<Option<HFSet>, String> {
        match t {
            Term::Set(x) => self.set(x),
            Term::Ord(a) => Ok(self.ord(a)?.map(HFSet::ordinal)),
        }
    }

    /// The least `α < n` with `P(α) = ⊤` and `P(β) = ⊥` for every `β < α`.
    pub fn ord(&mut self, a: &OrdTerm) -> Result<Option<u32>, String> {
        match a {
            OrdTerm::Var(v) => {
                let x = self.var(v)?;
                x.as_ordinal().map(Some).ok_or_else(|| format!("{v} is not an ordinal"))
            }
            OrdTerm::Min { var, pred } => {
                let mut table = Vec::new();
                for alpha in 0..self.n {
                    table.push(self.with(var, HFSet::ordinal(alpha), |o| o.truth(pred))?);
                }
                let witness = (0..table.len()).find(|&i| table[i] == TOP && table[..i].iter().all(|&t| t == BOT));
                Ok(witness.map(|i| i as u32))
            }
        }
    }

    pub fn set(&mut self, x: &SetTerm) -> Result<Option<HFSet>, String> {
        match x {
            SetTerm::Var(v) => self.var(v).map(Some),
            SetTerm::Stage(a) => match self.ord(a)? {
                Some(k) if k < self.n => stage_set(k).map(Some).map_err(|e| e.to_string()),
                _ => Ok(None),
            },
            SetTerm::Sep { var, bound, pred } => {
                let Some(dom) = self.set(bound)? else {
                    return Ok(None);
                };
                let mut keep = Vec::new();
                let mut undefined = false;
                for y in dom.elements() {
                    match self.with(var, y.clone(), |o| o.truth(pred))? {
                        TOP => keep.push(y.clone()),
                        UNDEF => undefined = true,
                        _ => {}
                    }
                }
                Ok((!undefined).then(|| HFSet::from_elements(keep)))
            }
            SetTerm::Fix { .. } => Err("fixpoint terms are outside the oracle".into()),
        }
    }
}
