use std::fmt;
use std::sync::Arc;

/// Variable name. The sort is carried by the name: identifiers whose first
/// character is in `a..=h` are ordinal variables, everything else is a set
/// variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Set,
    Ord,
}

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn sort(&self) -> Sort {
        sort_of(&self.0)
    }
}

pub fn sort_of(name: &str) -> Sort {
    match name.chars().next() {
        Some('a'..='h') => Sort::Ord,
        _ => Sort::Set,
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetTerm {
    Var(Name),
    /// `{x ∈ bound : pred}`
    Sep {
        var: Name,
        bound: Box<SetTerm>,
        pred: Box<Formula>,
    },
    /// `L_index`
    Stage(Box<OrdTerm>),
    /// `body^∞(seed)`, the fixpoint of `w ↦ body` from `seed` (NMID only).
    Fix {
        var: Name,
        body: Box<SetTerm>,
        seed: Box<SetTerm>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OrdTerm {
    Var(Name),
    /// `min{var : pred}`
    Min { var: Name, pred: Box<Formula> },
}

/// Either sort of term; atomic formulas accept any mix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Set(SetTerm),
    Ord(OrdTerm),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Mem(Term, Term),
    Eq(Term, Term),
    Defined(Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    ForallSet {
        var: Name,
        bound: SetTerm,
        body: Box<Formula>,
    },
    ExistsSet {
        var: Name,
        bound: SetTerm,
        body: Box<Formula>,
    },
    ForallOrd {
        var: Name,
        bound: OrdTerm,
        body: Box<Formula>,
    },
    ExistsOrd {
        var: Name,
        bound: OrdTerm,
        body: Box<Formula>,
    },
}

/// Any parsed expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Formula(Formula),
    Set(SetTerm),
    Ord(OrdTerm),
}

impl Term {
    pub fn var(name: &str) -> Term {
        let n = Name::new(name);
        match n.sort() {
            Sort::Set => Term::Set(SetTerm::Var(n)),
            Sort::Ord => Term::Ord(OrdTerm::Var(n)),
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Set(_) => Sort::Set,
            Term::Ord(_) => Sort::Ord,
        }
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Set(SetTerm::Var(n)) | Term::Ord(OrdTerm::Var(n)) => Some(n),
            _ => None,
        }
    }
}

impl From<SetTerm> for Term {
    fn from(t: SetTerm) -> Self {
        Term::Set(t)
    }
}

impl From<OrdTerm> for Term {
    fn from(t: OrdTerm) -> Self {
        Term::Ord(t)
    }
}

impl SetTerm {
    pub fn var(name: &str) -> SetTerm {
        SetTerm::Var(Name::new(name))
    }

    pub fn stage(index: OrdTerm) -> SetTerm {
        SetTerm::Stage(Box::new(index))
    }

    pub fn sep(var: &str, bound: SetTerm, pred: Formula) -> SetTerm {
        SetTerm::Sep {
            var: Name::new(var),
            bound: Box::new(bound),
            pred: Box::new(pred),
        }
    }

    pub fn fix(var: &str, body: SetTerm, seed: SetTerm) -> SetTerm {
        SetTerm::Fix {
            var: Name::new(var),
            body: Box::new(body),
            seed: Box::new(seed),
        }
    }
}

impl OrdTerm {
    pub fn var(name: &str) -> OrdTerm {
        OrdTerm::Var(Name::new(name))
    }

    pub fn min(var: &str, pred: Formula) -> OrdTerm {
        OrdTerm::Min {
            var: Name::new(var),
            pred: Box::new(pred),
        }
    }
}

impl Formula {
    pub fn mem(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
        Formula::Mem(a.into(), b.into())
    }

    pub fn eq(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
        Formula::Eq(a.into(), b.into())
    }

    pub fn defined(t: impl Into<Term>) -> Formula {
        Formula::Defined(t.into())
    }

    pub fn and(p: Formula, q: Formula) -> Formula {
        Formula::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Formula, q: Formula) -> Formula {
        Formula::Or(Box::new(p), Box::new(q))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Formula) -> Formula {
        Formula::Not(Box::new(p))
    }

    /// `P → Q`, i.e. `¬P ∨ Q`.
    pub fn implies(p: Formula, q: Formula) -> Formula {
        Formula::or(Formula::not(p), q)
    }

    /// `P ↔ Q`, i.e. `(P → Q) ∧ (Q → P)`.
    pub fn iff(p: Formula, q: Formula) -> Formula {
        Formula::and(Formula::implies(p.clone(), q.clone()), Formula::implies(q, p))
    }

    /// `P↓`, i.e. `P ∨ ¬P`.
    pub fn down(p: Formula) -> Formula {
        Formula::or(p.clone(), Formula::not(p))
    }

    pub fn forall_set(var: &str, bound: SetTerm, body: Formula) -> Formula {
        Formula::ForallSet {
            var: Name::new(var),
            bound,
            body: Box::new(body),
        }
    }

    pub fn exists_set(var: &str, bound: SetTerm, body: Formula) -> Formula {
        Formula::ExistsSet {
            var: Name::new(var),
            bound,
            body: Box::new(body),
        }
    }

    pub fn forall_ord(var: &str, bound: OrdTerm, body: Formula) -> Formula {
        Formula::ForallOrd {
            var: Name::new(var),
            bound,
            body: Box::new(body),
        }
    }

    pub fn exists_ord(var: &str, bound: OrdTerm, body: Formula) -> Formula {
        Formula::ExistsOrd {
            var: Name::new(var),
            bound,
            body: Box::new(body),
        }
    }

    /// Bounded universal over a term of either sort, binding `var`.
    pub fn forall_in(var: &Name, bound: Term, body: Formula) -> Formula {
        match bound {
            Term::Set(b) => Formula::ForallSet {
                var: var.clone(),
                bound: b,
                body: Box::new(body),
            },
            Term::Ord(b) => Formula::ForallOrd {
                var: var.clone(),
                bound: b,
                body: Box::new(body),
            },
        }
    }

    pub fn exists_in(var: &Name, bound: Term, body: Formula) -> Formula {
        match bound {
            Term::Set(b) => Formula::ExistsSet {
                var: var.clone(),
                bound: b,
                body: Box::new(body),
            },
            Term::Ord(b) => Formula::ExistsOrd {
                var: var.clone(),
                bound: b,
                body: Box::new(body),
            },
        }
    }
}

/// `[0] := min α (α = α)`, `[k+1] := min α ([k] < α)`. Binder names are
/// kept distinct from enclosing binders.
pub fn numeral(k: u32) -> OrdTerm {
    let mut t = OrdTerm::min("a", Formula::eq(OrdTerm::var("a"), OrdTerm::var("a")));
    for _ in 0..k {
        t = successor_named(t, "a");
    }
    super::ops::freshen_ord(&t)
}

fn successor_named(t: OrdTerm, var: &str) -> OrdTerm {
    OrdTerm::min(var, Formula::mem(t, OrdTerm::var(var)))
}

/// `A + 1 := min α (A < α)`, with `α` chosen fresh for `A`.
pub fn successor(t: OrdTerm) -> OrdTerm {
    let free = super::ops::free_vars_ord(&t);
    let var = super::ops::fresh_name(Sort::Ord, |n| free.contains(n));
    super::ops::freshen_ord(&successor_named(t, var.as_str()))
}
