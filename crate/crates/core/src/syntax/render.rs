use std::fmt;

use super::ast::*;

impl fmt::Display for SetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetTerm::Var(v) => write!(f, "{v}"),
            SetTerm::Sep { var, bound, pred } => write!(f, "(sep {var} {bound} {pred})"),
            SetTerm::Stage(a) => write!(f, "(L {a})"),
            SetTerm::Fix { var, body, seed } => write!(f, "(fix {var} {body} {seed})"),
        }
    }
}

impl fmt::Display for OrdTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdTerm::Var(v) => write!(f, "{v}"),
            OrdTerm::Min { var, pred } => write!(f, "(min {var} {pred})"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Set(t) => t.fmt(f),
            Term::Ord(t) => t.fmt(f),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Mem(a, b) => write!(f, "(mem {a} {b})"),
            Formula::Eq(a, b) => write!(f, "(eq {a} {b})"),
            Formula::Defined(t) => write!(f, "(def {t})"),
            Formula::And(p, q) => write!(f, "(and {p} {q})"),
            Formula::Or(p, q) => write!(f, "(or {p} {q})"),
            Formula::Not(p) => write!(f, "(not {p})"),
            Formula::ForallSet { var, bound, body } => write!(f, "(forall-set {var} {bound} {body})"),
            Formula::ExistsSet { var, bound, body } => write!(f, "(exists-set {var} {bound} {body})"),
            Formula::ForallOrd { var, bound, body } => write!(f, "(forall-ord {var} {bound} {body})"),
            Formula::ExistsOrd { var, bound, body } => write!(f, "(exists-ord {var} {bound} {body})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Formula(p) => p.fmt(f),
            Expr::Set(t) => t.fmt(f),
            Expr::Ord(t) => t.fmt(f),
        }
    }
}

pub fn render(e: &Expr) -> String {
    e.to_string()
}
