//! First-order set theory formulas with unrestricted quantifiers, used as
//! input to relativization and finite-model checks.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::{sort_of, Formula, Name, SetTerm, Sort};
use super::ops;
use super::parse::{err, is_ident, read_one, ParseError, Sexp};
use crate::hf::HFSet;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum St {
    Mem(String, String),
    Eq(String, String),
    And(Box<St>, Box<St>),
    Or(Box<St>, Box<St>),
    Not(Box<St>),
    Imp(Box<St>, Box<St>),
    Iff(Box<St>, Box<St>),
    Forall(String, Box<St>),
    Exists(String, Box<St>),
    /// `∀v ∈ bound. body`
    ForallIn(String, String, Box<St>),
    ExistsIn(String, String, Box<St>),
}

impl St {
    pub fn mem(a: &str, b: &str) -> St {
        St::Mem(a.into(), b.into())
    }

    pub fn eq(a: &str, b: &str) -> St {
        St::Eq(a.into(), b.into())
    }

    pub fn and(p: St, q: St) -> St {
        St::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: St, q: St) -> St {
        St::Or(Box::new(p), Box::new(q))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: St) -> St {
        St::Not(Box::new(p))
    }

    pub fn imp(p: St, q: St) -> St {
        St::Imp(Box::new(p), Box::new(q))
    }

    pub fn iff(p: St, q: St) -> St {
        St::Iff(Box::new(p), Box::new(q))
    }

    pub fn forall(v: &str, p: St) -> St {
        St::Forall(v.into(), Box::new(p))
    }

    pub fn exists(v: &str, p: St) -> St {
        St::Exists(v.into(), Box::new(p))
    }

    pub fn forall_in(v: &str, b: &str, p: St) -> St {
        St::ForallIn(v.into(), b.into(), Box::new(p))
    }

    pub fn exists_in(v: &str, b: &str, p: St) -> St {
        St::ExistsIn(v.into(), b.into(), Box::new(p))
    }

    /// True if every quantifier is bounded.
    pub fn is_delta0(&self) -> bool {
        match self {
            St::Mem(..) | St::Eq(..) => true,
            St::And(p, q) | St::Or(p, q) | St::Imp(p, q) | St::Iff(p, q) => p.is_delta0() && q.is_delta0(),
            St::Not(p) => p.is_delta0(),
            St::Forall(..) | St::Exists(..) => false,
            St::ForallIn(_, _, p) | St::ExistsIn(_, _, p) => p.is_delta0(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &St, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            let mut note = |v: &String, bound: &Vec<String>| {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            };
            match f {
                St::Mem(a, b) | St::Eq(a, b) => {
                    note(a, bound);
                    note(b, bound);
                }
                St::And(p, q) | St::Or(p, q) | St::Imp(p, q) | St::Iff(p, q) => {
                    go(p, bound, out);
                    go(q, bound, out);
                }
                St::Not(p) => go(p, bound, out),
                St::Forall(v, p) | St::Exists(v, p) => {
                    bound.push(v.clone());
                    go(p, bound, out);
                    bound.pop();
                }
                St::ForallIn(v, b, p) | St::ExistsIn(v, b, p) => {
                    note(b, bound);
                    bound.push(v.clone());
                    go(p, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            St::Mem(a, b) | St::Eq(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            St::And(p, q) | St::Or(p, q) | St::Imp(p, q) | St::Iff(p, q) => {
                p.all_names(out);
                q.all_names(out);
            }
            St::Not(p) => p.all_names(out),
            St::Forall(v, p) | St::Exists(v, p) => {
                out.insert(v.clone());
                p.all_names(out);
            }
            St::ForallIn(v, b, p) | St::ExistsIn(v, b, p) => {
                out.insert(v.clone());
                out.insert(b.clone());
                p.all_names(out);
            }
        }
    }

    /// Constructor count; variables count zero.
    pub fn size(&self) -> usize {
        match self {
            St::Mem(..) | St::Eq(..) => 1,
            St::And(p, q) | St::Or(p, q) | St::Imp(p, q) | St::Iff(p, q) => 1 + p.size() + q.size(),
            St::Not(p) | St::Forall(_, p) | St::Exists(_, p) | St::ForallIn(_, _, p) | St::ExistsIn(_, _, p) => {
                1 + p.size()
            }
        }
    }
}

impl fmt::Display for St {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            St::Mem(a, b) => write!(f, "(mem {a} {b})"),
            St::Eq(a, b) => write!(f, "(eq {a} {b})"),
            St::And(p, q) => write!(f, "(and {p} {q})"),
            St::Or(p, q) => write!(f, "(or {p} {q})"),
            St::Not(p) => write!(f, "(not {p})"),
            St::Imp(p, q) => write!(f, "(imp {p} {q})"),
            St::Iff(p, q) => write!(f, "(iff {p} {q})"),
            St::Forall(v, p) => write!(f, "(forall {v} {p})"),
            St::Exists(v, p) => write!(f, "(exists {v} {p})"),
            St::ForallIn(v, b, p) => write!(f, "(forall-in {v} {b} {p})"),
            St::ExistsIn(v, b, p) => write!(f, "(exists-in {v} {b} {p})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

pub fn parse_st(text: &str) -> Result<St, ParseError> {
    conv(&read_one(text)?)
}

fn var(s: &Sexp) -> Result<String, ParseError> {
    match s {
        Sexp::Atom(a, o) => {
            if !is_ident(a) {
                return err(*o, "expected a variable");
            }
            if sort_of(a) != Sort::Set {
                return err(*o, format!("'{a}' is not a set variable"));
            }
            Ok(a.to_string())
        }
        Sexp::List(_, o) => err(*o, "expected a variable"),
    }
}

fn conv(s: &Sexp) -> Result<St, ParseError> {
    let (items, o) = match s {
        Sexp::Atom(_, o) => return err(*o, "expected a formula"),
        Sexp::List(items, o) => (items, *o),
    };
    let head = match items.first() {
        Some(Sexp::Atom(h, _)) => *h,
        _ => return err(o, "expected a head symbol"),
    };
    let arity = |n: usize| -> Result<&[Sexp], ParseError> {
        if items.len() != n + 1 {
            return err(o, format!("'{head}' takes {n} arguments"));
        }
        Ok(&items[1..])
    };
    Ok(match head {
        "mem" => {
            let a = arity(2)?;
            St::Mem(var(&a[0])?, var(&a[1])?)
        }
        "eq" => {
            let a = arity(2)?;
            St::Eq(var(&a[0])?, var(&a[1])?)
        }
        "and" | "or" | "imp" | "iff" => {
            let a = arity(2)?;
            let (p, q) = (conv(&a[0])?, conv(&a[1])?);
            match head {
                "and" => St::and(p, q),
                "or" => St::or(p, q),
                "imp" => St::imp(p, q),
                _ => St::iff(p, q),
            }
        }
        "not" => St::not(conv(&arity(1)?[0])?),
        "forall" | "exists" => {
            let a = arity(2)?;
            let (v, p) = (var(&a[0])?, conv(&a[1])?);
            if head == "forall" {
                St::Forall(v, Box::new(p))
            } else {
                St::Exists(v, Box::new(p))
            }
        }
        "forall-in" | "exists-in" => {
            let a = arity(3)?;
            let (v, b, p) = (var(&a[0])?, var(&a[1])?, conv(&a[2])?);
            if head == "forall-in" {
                St::ForallIn(v, b, Box::new(p))
            } else {
                St::ExistsIn(v, b, Box::new(p))
            }
        }
        other => return err(o, format!("unknown head '{other}'")),
    })
}

// ---------------------------------------------------------------------------
// Relativization

/// Replaces each unbounded quantifier by one bounded by the set variable
/// `model`, which must not occur in `p`.
pub fn relativize(p: &St, model: &str) -> Formula {
    let mut names = BTreeSet::new();
    p.all_names(&mut names);
    assert!(!names.contains(model), "model variable {model} occurs in {p}");
    assert_eq!(sort_of(model), Sort::Set);
    ops::freshen(&rel(p, model))
}

/// Relativizes with a model variable chosen fresh for `p`.
pub fn relativize_fresh(p: &St) -> (Name, Formula) {
    let mut names = BTreeSet::new();
    p.all_names(&mut names);
    let m = if names.contains("M") {
        ops::fresh_name(Sort::Set, |n| names.contains(n.as_str()))
    } else {
        Name::new("M")
    };
    let f = relativize(p, m.as_str());
    (m, f)
}

fn rel(p: &St, m: &str) -> Formula {
    let v = SetTerm::var;
    match p {
        St::Mem(a, b) => Formula::mem(v(a), v(b)),
        St::Eq(a, b) => Formula::eq(v(a), v(b)),
        St::And(p, q) => Formula::and(rel(p, m), rel(q, m)),
        St::Or(p, q) => Formula::or(rel(p, m), rel(q, m)),
        St::Not(p) => Formula::not(rel(p, m)),
        St::Imp(p, q) => Formula::implies(rel(p, m), rel(q, m)),
        St::Iff(p, q) => Formula::iff(rel(p, m), rel(q, m)),
        St::Forall(x, p) => Formula::forall_set(x, v(m), rel(p, m)),
        St::Exists(x, p) => Formula::exists_set(x, v(m), rel(p, m)),
        St::ForallIn(x, b, p) => Formula::forall_set(x, v(b), rel(p, m)),
        St::ExistsIn(x, b, p) => Formula::exists_set(x, v(b), rel(p, m)),
    }
}

// ---------------------------------------------------------------------------
// Direct model checking

/// Assignment of set variables, innermost binding last.
pub type StEnv = Vec<(String, HFSet)>;

fn lookup<'e>(env: &'e StEnv, v: &str) -> &'e HFSet {
    env.iter()
        .rev()
        .find(|(n, _)| n == v)
        .map(|(_, x)| x)
        .unwrap_or_else(|| panic!("unbound variable {v}"))
}

/// Truth of `p` in the transitive model `model` under `env`. Unbounded
/// quantifiers range over `model`; bounded ones over the bound's elements.
/// Panics on an unbound free variable.
pub fn holds(p: &St, env: &mut StEnv, model: &[HFSet]) -> bool {
    match p {
        St::Mem(a, b) => lookup(env, b).contains(lookup(env, a)),
        St::Eq(a, b) => lookup(env, a) == lookup(env, b),
        St::And(p, q) => holds(p, env, model) && holds(q, env, model),
        St::Or(p, q) => holds(p, env, model) || holds(q, env, model),
        St::Not(p) => !holds(p, env, model),
        St::Imp(p, q) => !holds(p, env, model) || holds(q, env, model),
        St::Iff(p, q) => holds(p, env, model) == holds(q, env, model),
        St::Forall(x, p) => quant(x, model, p, env, model, true),
        St::Exists(x, p) => quant(x, model, p, env, model, false),
        St::ForallIn(x, b, p) => {
            let dom = lookup(env, b).clone();
            quant(x, dom.elements(), p, env, model, true)
        }
        St::ExistsIn(x, b, p) => {
            let dom = lookup(env, b).clone();
            quant(x, dom.elements(), p, env, model, false)
        }
    }
}

fn quant(x: &str, dom: &[HFSet], p: &St, env: &mut StEnv, model: &[HFSet], all: bool) -> bool {
    for d in dom {
        env.push((x.to_string(), d.clone()));
        let r = holds(p, env, model);
        env.pop();
        if r != all {
            return !all;
        }
    }
    all
}

// ---------------------------------------------------------------------------
// Enumeration

/// All Δ0 formulas (built from `mem`, `eq`, `not`, `and`, `or` and bounded
/// quantifiers) over the given free variables with at most `max_size`
/// constructors, ordered by size. Bound variables are named `q0`, `q1`, ...
/// by depth; the free variables must not use that prefix.
pub fn enumerate_delta0(free: &[&str], max_size: usize) -> Vec<St> {
    assert!(free.iter().all(|v| !v.starts_with('q')));
    let scope: Vec<String> = free.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for size in 1..=max_size {
        out.extend(exact(size, &scope));
    }
    out
}

fn exact(size: usize, scope: &[String]) -> Vec<St> {
    let mut out = Vec::new();
    if size == 0 {
        return out;
    }
    if size == 1 {
        for a in scope {
            for b in scope {
                out.push(St::Mem(a.clone(), b.clone()));
            }
        }
        for (i, a) in scope.iter().enumerate() {
            for b in &scope[i + 1..] {
                out.push(St::Eq(a.clone(), b.clone()));
            }
        }
        return out;
    }
    for p in exact(size - 1, scope) {
        out.push(St::not(p));
    }
    for left in 1..size - 1 {
        let ls = exact(left, scope);
        let rs = exact(size - 1 - left, scope);
        for l in &ls {
            for r in &rs {
                out.push(St::and(l.clone(), r.clone()));
                out.push(St::or(l.clone(), r.clone()));
            }
        }
    }
    let q = format!("q{}", scope.iter().filter(|v| v.starts_with('q')).count());
    let mut inner = scope.to_vec();
    inner.push(q.clone());
    let bodies = exact(size - 1, &inner);
    for b in scope {
        for body in &bodies {
            out.push(St::ForallIn(q.clone(), b.clone(), Box::new(body.clone())));
            out.push(St::ExistsIn(q.clone(), b.clone(), Box::new(body.clone())));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hf::stage_elements;

    #[test]
    fn parse_and_render() {
        let p = parse_st("(forall x (exists y (mem x y)))").unwrap();
        assert_eq!(p.to_string(), "(forall x (exists y (mem x y)))");
        assert!(!p.is_delta0());
    }

    #[test]
    fn relativize_bounds_quantifiers() {
        let p = parse_st("(forall x (exists y (mem x y)))").unwrap();
        assert_eq!(
            relativize(&p, "M").to_string(),
            "(forall-set x M (exists-set y M (mem x y)))"
        );
    }

    #[test]
    fn delta0_kept() {
        let p = parse_st("(forall-in x z (mem x z))").unwrap();
        assert_eq!(relativize(&p, "M").to_string(), "(forall-set x z (mem x z))");
    }

    #[test]
    fn direct_checks() {
        let v2 = stage_elements(2).unwrap();
        let ext = parse_st("(exists x (forall y (not (mem y x))))").unwrap();
        assert!(holds(&ext, &mut Vec::new(), v2));
        assert!(!holds(&ext, &mut Vec::new(), &[]));
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_delta0(&["x"], 1).len(), 1);
        assert_eq!(enumerate_delta0(&["x", "y"], 1).len(), 5);
        assert!(enumerate_delta0(&["x", "y"], 3).iter().all(|p| p.is_delta0() && p.size() <= 3));
    }
}
