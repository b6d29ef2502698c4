//! Seeded random generators for expressions and environments.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::eval::{Env, Value};
use crate::hf::{stage_elements, HFSet};
use crate::syntax::ast::*;
use crate::syntax::ops;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_nodes: usize,
    pub max_min_depth: usize,
    pub allow_fix: bool,
    /// Use only bound variables.
    pub closed: bool,
    pub set_vars: Vec<&'static str>,
    pub ord_vars: Vec<&'static str>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_nodes: 12,
            max_min_depth: 2,
            allow_fix: false,
            closed: false,
            set_vars: vec!["x", "y", "z"],
            ord_vars: vec!["a", "b", "c"],
        }
    }
}

impl GenConfig {
    pub fn min_free(max_nodes: usize) -> Self {
        GenConfig {
            max_nodes,
            max_min_depth: 0,
            ..GenConfig::default()
        }
    }

    pub fn closed(max_nodes: usize, max_min_depth: usize) -> Self {
        GenConfig {
            max_nodes,
            max_min_depth,
            closed: true,
            ..GenConfig::default()
        }
    }
}

struct Gen<'a> {
    rng: &'a mut Rng8,
    cfg: &'a GenConfig,
    scope: Vec<Name>,
}

impl Gen<'_> {
    fn pick_var(&mut self, sort: Sort) -> Option<Name> {
        let mut cands: Vec<Name> = self.scope.iter().filter(|v| v.sort() == sort).cloned().collect();
        if !self.cfg.closed {
            let pool = match sort {
                Sort::Set => &self.cfg.set_vars,
                Sort::Ord => &self.cfg.ord_vars,
            };
            cands.extend(pool.iter().map(|s| Name::new(s)));
        }
        cands.choose(self.rng).cloned()
    }

    fn binder(&mut self, sort: Sort) -> Name {
        let pool = match sort {
            Sort::Set => &self.cfg.set_vars,
            Sort::Ord => &self.cfg.ord_vars,
        };
        Name::new(pool.choose(self.rng).expect("nonempty pool"))
    }

    fn under<R>(&mut self, v: &Name, k: impl FnOnce(&mut Self) -> R) -> R {
        self.scope.push(v.clone());
        let r = k(self);
        self.scope.pop();
        r
    }

    fn split(&mut self, size: usize) -> (usize, usize) {
        let l = self.rng.gen_range(0..=size);
        (l, size - l)
    }

    fn formula(&mut self, size: usize, depth: usize) -> Formula {
        let size = size.max(1);
        let choice = self.rng.gen_range(0..if size >= 3 { 9 } else if size >= 2 { 7 } else { 3 });
        match choice {
            0 | 1 => {
                let (l, r) = self.split(size - 1);
                let (a, b) = (self.term(l, depth), self.term(r, depth));
                if choice == 0 {
                    Formula::Mem(a, b)
                } else {
                    Formula::Eq(a, b)
                }
            }
            2 => Formula::Defined(self.term(size - 1, depth)),
            3 => Formula::not(self.formula(size - 1, depth)),
            4 | 5 => {
                let (b, body) = self.split(size - 1);
                let var = self.binder(Sort::Set);
                let bound = self.set(b, depth);
                let body = self.under(&var, |g| g.formula(body, depth));
                if choice == 4 {
                    Formula::ForallSet { var, bound, body: Box::new(body) }
                } else {
                    Formula::ExistsSet { var, bound, body: Box::new(body) }
                }
            }
            6 => {
                let (b, body) = self.split(size - 1);
                let var = self.binder(Sort::Ord);
                let bound = self.ord(b, depth);
                let body = Box::new(self.under(&var, |g| g.formula(body, depth)));
                if self.rng.gen_bool(0.5) {
                    Formula::ForallOrd { var, bound, body }
                } else {
                    Formula::ExistsOrd { var, bound, body }
                }
            }
            _ => {
                let (l, r) = self.split(size - 1);
                let (p, q) = (self.formula(l, depth), self.formula(r, depth));
                if choice == 7 {
                    Formula::and(p, q)
                } else {
                    Formula::or(p, q)
                }
            }
        }
    }

    fn term(&mut self, size: usize, depth: usize) -> Term {
        if self.rng.gen_bool(0.5) {
            Term::Ord(self.ord(size, depth))
        } else {
            Term::Set(self.set(size, depth))
        }
    }

    fn ord(&mut self, size: usize, depth: usize) -> OrdTerm {
        let can_min = depth < self.cfg.max_min_depth && size >= 2;
        if !can_min || self.rng.gen_bool(0.3) {
            if let Some(v) = self.pick_var(Sort::Ord) {
                return OrdTerm::Var(v);
            }
        }
        let var = self.binder(Sort::Ord);
        let pred = self.under(&var, |g| g.formula(size.saturating_sub(1), depth + 1));
        OrdTerm::Min { var, pred: Box::new(pred) }
    }

    fn set(&mut self, size: usize, depth: usize) -> SetTerm {
        let var = self.pick_var(Sort::Set);
        if size == 0 || (var.is_some() && self.rng.gen_bool(0.3)) {
            if let Some(v) = var {
                return SetTerm::Var(v);
            }
        }
        let r = self.rng.gen_range(0..if self.cfg.allow_fix && size >= 3 { 5 } else { 4 });
        match r {
            0 | 1 => SetTerm::Stage(Box::new(self.ord(size.saturating_sub(1), depth))),
            2 | 3 => {
                let (b, p) = self.split(size.saturating_sub(1));
                let bound = self.set(b, depth);
                let var = self.binder(Sort::Set);
                let pred = self.under(&var, |g| g.formula(p, depth));
                SetTerm::Sep {
                    var,
                    bound: Box::new(bound),
                    pred: Box::new(pred),
                }
            }
            _ => {
                let (b, s) = self.split(size - 1);
                let seed = self.set(s, depth);
                let var = self.binder(Sort::Set);
                let body = self.under(&var, |g| g.set(b, depth));
                SetTerm::Fix {
                    var,
                    body: Box::new(body),
                    seed: Box::new(seed),
                }
            }
        }
    }
}

fn within(cfg: &GenConfig, e: &Expr) -> bool {
    ops::depth(e, ops::DepthKind::Nodes) <= cfg.max_nodes
        && ops::depth(e, ops::DepthKind::Min) <= cfg.max_min_depth
        && (cfg.allow_fix || !ops::contains_fix(e))
        && (!cfg.closed || ops::free_vars_expr(e).is_empty())
}

fn sample(rng: &mut Rng8, cfg: &GenConfig, k: impl Fn(&mut Gen, usize) -> Expr) -> Expr {
    loop {
        let size = rng.gen_range(1..=cfg.max_nodes);
        let mut g = Gen {
            rng,
            cfg,
            scope: Vec::new(),
        };
        let e = ops::freshen_expr(&k(&mut g, size));
        if within(cfg, &e) {
            return e;
        }
    }
}

pub fn formula(rng: &mut Rng8, cfg: &GenConfig) -> Formula {
    match sample(rng, cfg, |g, s| Expr::Formula(g.formula(s, 0))) {
        Expr::Formula(f) => f,
        _ => unreachable!(),
    }
}

pub fn ord_term(rng: &mut Rng8, cfg: &GenConfig) -> OrdTerm {
    match sample(rng, cfg, |g, s| Expr::Ord(g.ord(s, 0))) {
        Expr::Ord(t) => t,
        _ => unreachable!(),
    }
}

pub fn set_term(rng: &mut Rng8, cfg: &GenConfig) -> SetTerm {
    match sample(rng, cfg, |g, s| Expr::Set(g.set(s, 0))) {
        Expr::Set(t) => t,
        _ => unreachable!(),
    }
}

/// A formula, ordinal term or set term, weighted towards formulas.
pub fn expr(rng: &mut Rng8, cfg: &GenConfig) -> Expr {
    match rng.gen_range(0..4) {
        0 => Expr::Ord(ord_term(rng, cfg)),
        1 => Expr::Set(set_term(rng, cfg)),
        _ => Expr::Formula(formula(rng, cfg)),
    }
}

/// A random environment for the free variables of `e` inside stage `n`, or
/// `None` if `e` has free ordinal or set variables and `n = 0`.
pub fn env_for(rng: &mut Rng8, e: &Expr, n: u32) -> Option<Env> {
    let elems = stage_elements(n.min(5)).ok()?;
    let mut env = Env::new();
    for v in ops::free_vars_expr(e) {
        if n == 0 {
            return None;
        }
        let val = match v.sort() {
            Sort::Set => Value::Set(elems.choose(rng)?.clone()),
            Sort::Ord => Value::Ord(rng.gen_range(0..n)),
        };
        env.bind(v, val);
    }
    Some(env)
}

/// Every environment for the free variables of `e` inside stage `n ≤ 4`.
pub fn all_envs(e: &Expr, n: u32) -> Vec<Env> {
    assert!(n <= 4, "exhaustive environments above stage 4");
    let elems: Vec<Value> = stage_elements(n).expect("enumerable").iter().cloned().map(Value::Set).collect();
    let ords: Vec<Value> = (0..n).map(Value::Ord).collect();
    let mut out = vec![Env::new()];
    for v in ops::free_vars_expr(e) {
        let dom = match v.sort() {
            Sort::Set => &elems,
            Sort::Ord => &ords,
        };
        out = out
            .into_iter()
            .flat_map(|env| {
                let v = v.clone();
                dom.iter().map(move |x| {
                    let mut env = env.clone();
                    env.bind(v.clone(), x.clone());
                    env
                })
            })
            .collect();
    }
    out
}

/// A uniformly random element of `V_n`, `n ≤ 5`.
pub fn hfset(rng: &mut Rng8, n: u32) -> Option<HFSet> {
    stage_elements(n).ok()?.choose(rng).cloned()
}
