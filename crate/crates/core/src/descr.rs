//! Ordinal-term enumeration, budgeted approximations of `f_z`, and the
//! reflection checks built on them.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::eval::{self, Env, EvalError, Value};
use crate::hf::{self, HFSet, HfError};
use crate::syntax::ast::*;
use crate::syntax::enumerate::{param_name, Enumerator, Vocabulary};
use crate::syntax::ops;
use crate::syntax::st::{self, St};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescrError {
    #[error("stage {0} out of range (at most 5)")]
    Stage(u32),
    #[error("theta {theta} must be below tau {tau}")]
    Order { theta: u32, tau: u32 },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Hf(#[from] HfError),
}

pub const MAX_STAGE: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TermBudget {
    pub max_nodes: usize,
    pub max_min_depth: usize,
    /// Longest parameter tuple.
    pub max_arity: usize,
}

impl TermBudget {
    pub fn new(max_nodes: usize) -> Self {
        TermBudget {
            max_nodes,
            max_min_depth: max_nodes,
            max_arity: 3,
        }
    }

    pub fn with_arity(mut self, a: usize) -> Self {
        self.max_arity = a;
        self
    }

    pub fn with_min_depth(mut self, d: usize) -> Self {
        self.max_min_depth = d;
        self
    }
}

/// Closed-up-to-parameters ordinal terms within the budget, ordered by size
/// and then by rendering. Parameters are the set variables `p0, p1, …`.
pub fn enumerate_ord_terms(budget: &TermBudget) -> Vec<OrdTerm> {
    let mut e = Enumerator::new(Vocabulary::params(budget.max_arity));
    let mut out = Vec::new();
    for size in 1..=budget.max_nodes {
        let mut bucket: Vec<(String, OrdTerm)> = e
            .ord(size, budget.max_min_depth, &[])
            .iter()
            .map(|t| (t.to_string(), t.clone()))
            .collect();
        bucket.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(bucket.into_iter().map(|(_, t)| t));
    }
    out
}

/// Number of parameters a term needs: one more than its largest `p` index.
pub fn arity(t: &OrdTerm) -> usize {
    ops::free_vars_ord(t)
        .iter()
        .filter_map(|v| v.as_str().strip_prefix('p')?.parse::<usize>().ok())
        .map(|i| i + 1)
        .max()
        .unwrap_or(0)
}

/// Every (term, parameter tuple) pair within the budget, tuples drawn from
/// `z`.
pub fn enumerate_with_params(budget: &TermBudget, z: &[HFSet]) -> Vec<(OrdTerm, Vec<HFSet>)> {
    let mut out = Vec::new();
    for t in enumerate_ord_terms(budget) {
        for tuple in hf::tuples(z, arity(&t)) {
            out.push((t.clone(), tuple));
        }
    }
    out
}

fn param_env(tuple: &[HFSet]) -> Env {
    let mut env = Env::new();
    for (i, w) in tuple.iter().enumerate() {
        env.bind(param_name(i), Value::Set(w.clone()));
    }
    env
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub term: String,
    pub params: Vec<HFSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FzReport {
    pub stage: u32,
    pub budget: TermBudget,
    pub denoted: BTreeSet<u32>,
    pub value: u32,
    pub witnesses: BTreeMap<u32, Witness>,
}

/// `f_z` at stage `n` restricted to the budget: the least ordinal below `n`
/// not denoted by any enumerated term with parameters from `z`, or `n`.
pub fn fz_approx(z: &[HFSet], n: u32, budget: &TermBudget) -> Result<FzReport, DescrError> {
    if n > MAX_STAGE {
        return Err(DescrError::Stage(n));
    }
    // Parameters outside the stage cannot be assigned there.
    let z: Vec<HFSet> = z.iter().filter(|w| w.in_stage(n)).cloned().collect();
    let mut denoted = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    for t in enumerate_ord_terms(budget) {
        for tuple in hf::tuples(&z, arity(&t)) {
            if let Some(k) = eval::eval_ord(&t, &param_env(&tuple), n)? {
                if denoted.insert(k) {
                    witnesses.insert(
                        k,
                        Witness {
                            term: t.to_string(),
                            params: tuple.clone(),
                        },
                    );
                }
            }
        }
    }
    let value = (0..n).find(|k| !denoted.contains(k)).unwrap_or(n);
    Ok(FzReport {
        stage: n,
        budget: *budget,
        denoted,
        value,
        witnesses,
    })
}

/// Flags each `n ≤ n_max` with `f_z(n) = n` under the budget.
pub fn descriptionalist_scan(z: &[HFSet], n_max: u32, budget: &TermBudget) -> Result<Vec<(u32, bool)>, DescrError> {
    (0..=n_max)
        .map(|n| Ok((n, fz_approx(z, n, budget)?.value == n)))
        .collect()
}

/// The ordinals below `theta`, as sets.
pub fn ordinals_below(theta: u32) -> Vec<HFSet> {
    (0..theta).map(HFSet::ordinal).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReflectReport {
    pub theta: u32,
    pub tau: u32,
    pub reflecting: bool,
    /// A term denoting `theta` when not reflecting.
    pub witness: Option<Witness>,
}

/// Direct form: `theta` is `tau`-reflecting iff no enumerated term with
/// parameters below `theta` denotes `theta` at stage `tau`.
pub fn reflect_check(theta: u32, tau: u32, budget: &TermBudget) -> Result<ReflectReport, DescrError> {
    if theta >= tau {
        return Err(DescrError::Order { theta, tau });
    }
    if tau > MAX_STAGE {
        return Err(DescrError::Stage(tau));
    }
    let z = ordinals_below(theta);
    for t in enumerate_ord_terms(budget) {
        for tuple in hf::tuples(&z, arity(&t)) {
            if eval::eval_ord(&t, &param_env(&tuple), tau)? == Some(theta) {
                return Ok(ReflectReport {
                    theta,
                    tau,
                    reflecting: false,
                    witness: Some(Witness {
                        term: t.to_string(),
                        params: tuple,
                    }),
                });
            }
        }
    }
    Ok(ReflectReport {
        theta,
        tau,
        reflecting: true,
        witness: None,
    })
}

/// Second form: `f_theta(tau) = theta`.
pub fn reflect_check_via_fz(theta: u32, tau: u32, budget: &TermBudget) -> Result<bool, DescrError> {
    if theta >= tau {
        return Err(DescrError::Order { theta, tau });
    }
    Ok(fz_approx(&ordinals_below(theta), tau, budget)?.value == theta)
}

/// All pairs `theta < tau ≤ tau_max` that are reflecting under the budget.
pub fn reflect_scan(tau_max: u32, budget: &TermBudget) -> Result<Vec<(u32, u32)>, DescrError> {
    let mut out = Vec::new();
    for tau in 1..=tau_max {
        for theta in 0..tau {
            if reflect_check(theta, tau, budget)?.reflecting {
                out.push((theta, tau));
            }
        }
    }
    Ok(out)
}

/// Chains `η_0 < … < η_k ≤ bound` where each `η_i` is `η_{i+1}`-reflecting
/// under the budget. For `k = 0` every `η ≤ bound` is a chain.
pub fn kfold_scan(k: usize, bound: u32, budget: &TermBudget) -> Result<Vec<Vec<u32>>, DescrError> {
    if bound > MAX_STAGE {
        return Err(DescrError::Stage(bound));
    }
    let mut refl = BTreeSet::new();
    if k > 0 {
        for (theta, tau) in reflect_scan(bound, budget)? {
            refl.insert((theta, tau));
        }
    }
    let mut chains: Vec<Vec<u32>> = (0..=bound).map(|e| vec![e]).collect();
    for _ in 0..k {
        chains = chains
            .into_iter()
            .flat_map(|c| {
                let last = *c.last().expect("nonempty chain");
                (last + 1..=bound)
                    .filter(|next| refl.contains(&(last, *next)))
                    .map(|next| {
                        let mut c = c.clone();
                        c.push(next);
                        c
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    Ok(chains)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiReflectReport {
    pub theta: u32,
    /// Whether the sentence holds in `V_theta`.
    pub premise: bool,
    /// Least `α < theta` holding the parameters where it also holds.
    pub witness_stage: Option<u32>,
    pub reflects: bool,
}

/// Largest number of quantifier instances a model check may visit.
pub const PI_WORK_LIMIT: f64 = 1e8;

fn work(p: &St, dom: f64) -> f64 {
    match p {
        St::Mem(..) | St::Eq(..) => 1.0,
        St::And(p, q) | St::Or(p, q) | St::Imp(p, q) | St::Iff(p, q) => work(p, dom) + work(q, dom),
        St::Not(p) => work(p, dom),
        St::Forall(_, p) | St::Exists(_, p) | St::ForallIn(_, _, p) | St::ExistsIn(_, _, p) => dom * work(p, dom),
    }
}

/// If `P[w̄]` holds in `V_theta`, looks for `α < theta` with all parameters
/// in `V_α` where it holds too.
pub fn pi_reflect_check(theta: u32, p: &St, params: &[(String, HFSet)]) -> Result<PiReflectReport, DescrError> {
    if theta > MAX_STAGE {
        return Err(DescrError::Stage(theta));
    }
    let free = p.free_vars();
    for v in &free {
        if !params.iter().any(|(n, _)| n == v) {
            return Err(DescrError::Eval(EvalError::Unbound(Name::new(v))));
        }
    }
    for (n, w) in params {
        if !w.in_stage(theta) {
            return Err(DescrError::Eval(EvalError::OutOfStage(Name::new(n), theta)));
        }
    }
    let size = hf::stage_size(theta)? as f64;
    if work(p, size) > PI_WORK_LIMIT {
        return Err(DescrError::Resource(format!("model check of {p} on V_{theta}")));
    }
    let check = |n: u32| -> Result<bool, DescrError> {
        let mut env: st::StEnv = params.to_vec();
        Ok(st::holds(p, &mut env, hf::stage_elements(n)?))
    };
    if !check(theta)? {
        return Ok(PiReflectReport {
            theta,
            premise: false,
            witness_stage: None,
            reflects: true,
        });
    }
    let least = params.iter().map(|(_, w)| w.rank() + 1).max().unwrap_or(0);
    for alpha in least..theta {
        if check(alpha)? {
            return Ok(PiReflectReport {
                theta,
                premise: true,
                witness_stage: Some(alpha),
                reflects: true,
            });
        }
    }
    Ok(PiReflectReport {
        theta,
        premise: true,
        witness_stage: None,
        reflects: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_ord;

    #[test]
    fn small_enumeration() {
        assert!(enumerate_ord_terms(&TermBudget::new(0)).is_empty());
        let terms = enumerate_ord_terms(&TermBudget::new(3).with_arity(0));
        let zero = ops::canonical_ord(&parse_ord("(min a (eq a a))").unwrap());
        assert!(terms.contains(&zero));
    }

    #[test]
    fn fz_trivial_budget() {
        assert_eq!(fz_approx(&[], 3, &TermBudget::new(0)).unwrap().value, 0);
    }

    #[test]
    fn reflect_zero() {
        let r = reflect_check(0, 1, &TermBudget::new(3)).unwrap();
        assert!(!r.reflecting);
        let w = parse_ord(&r.witness.unwrap().term).unwrap();
        assert_eq!(eval::eval_ord(&w, &Env::new(), 1), Ok(Some(0)));
    }

    #[test]
    fn kfold_zero_is_everything() {
        assert_eq!(kfold_scan(0, 4, &TermBudget::new(0)).unwrap().len(), 5);
    }

    #[test]
    fn pi_reflection() {
        let p = st::parse_st("(exists x (eq x x))").unwrap();
        let r = pi_reflect_check(2, &p, &[]).unwrap();
        assert!(r.reflects);
        assert_eq!(r.witness_stage, Some(1));
    }
}
