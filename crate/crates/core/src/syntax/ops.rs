//! Structural operations: free variables, binder renaming, alpha-equivalence,
//! capture-avoiding substitution, matching, and size metrics.

use std::collections::BTreeSet;

use super::ast::*;

// ---------------------------------------------------------------------------
// Free variables

pub type VarSet = BTreeSet<Name>;

/// Free-variable counts by sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct Signature {
    pub sets: usize,
    pub ords: usize,
}

impl Signature {
    pub fn of(vars: &VarSet) -> Signature {
        let ords = vars.iter().filter(|v| v.sort() == Sort::Ord).count();
        Signature {
            sets: vars.len() - ords,
            ords,
        }
    }
}

pub fn free_vars(f: &Formula) -> VarSet {
    let mut out = VarSet::new();
    fv_formula(f, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_set(t: &SetTerm) -> VarSet {
    let mut out = VarSet::new();
    fv_set(t, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_ord(t: &OrdTerm) -> VarSet {
    let mut out = VarSet::new();
    fv_ord(t, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_term(t: &Term) -> VarSet {
    match t {
        Term::Set(s) => free_vars_set(s),
        Term::Ord(o) => free_vars_ord(o),
    }
}

pub fn free_vars_expr(e: &Expr) -> VarSet {
    match e {
        Expr::Formula(f) => free_vars(f),
        Expr::Set(s) => free_vars_set(s),
        Expr::Ord(o) => free_vars_ord(o),
    }
}

fn note(v: &Name, bound: &[Name], out: &mut VarSet) {
    if !bound.contains(v) {
        out.insert(v.clone());
    }
}

fn fv_term(t: &Term, bound: &mut Vec<Name>, out: &mut VarSet) {
    match t {
        Term::Set(s) => fv_set(s, bound, out),
        Term::Ord(o) => fv_ord(o, bound, out),
    }
}

fn fv_set(t: &SetTerm, bound: &mut Vec<Name>, out: &mut VarSet) {
    match t {
        SetTerm::Var(v) => note(v, bound, out),
        SetTerm::Sep { var, bound: b, pred } => {
            fv_set(b, bound, out);
            bound.push(var.clone());
            fv_formula(pred, bound, out);
            bound.pop();
        }
        SetTerm::Stage(a) => fv_ord(a, bound, out),
        SetTerm::Fix { var, body, seed } => {
            fv_set(seed, bound, out);
            bound.push(var.clone());
            fv_set(body, bound, out);
            bound.pop();
        }
    }
}

fn fv_ord(t: &OrdTerm, bound: &mut Vec<Name>, out: &mut VarSet) {
    match t {
        OrdTerm::Var(v) => note(v, bound, out),
        OrdTerm::Min { var, pred } => {
            bound.push(var.clone());
            fv_formula(pred, bound, out);
            bound.pop();
        }
    }
}

fn fv_formula(f: &Formula, bound: &mut Vec<Name>, out: &mut VarSet) {
    match f {
        Formula::Mem(a, b) | Formula::Eq(a, b) => {
            fv_term(a, bound, out);
            fv_term(b, bound, out);
        }
        Formula::Defined(t) => fv_term(t, bound, out),
        Formula::And(p, q) | Formula::Or(p, q) => {
            fv_formula(p, bound, out);
            fv_formula(q, bound, out);
        }
        Formula::Not(p) => fv_formula(p, bound, out),
        Formula::ForallSet { var, bound: b, body } | Formula::ExistsSet { var, bound: b, body } => {
            fv_set(b, bound, out);
            bound.push(var.clone());
            fv_formula(body, bound, out);
            bound.pop();
        }
        Formula::ForallOrd { var, bound: b, body } | Formula::ExistsOrd { var, bound: b, body } => {
            fv_ord(b, bound, out);
            bound.push(var.clone());
            fv_formula(body, bound, out);
            bound.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Binder renaming

/// Picks a name of the given sort not rejected by `taken`.
pub fn fresh_name(sort: Sort, taken: impl Fn(&Name) -> bool) -> Name {
    let bases: &[&str] = match sort {
        Sort::Ord => &["a", "b", "c", "d", "e", "g", "h"],
        Sort::Set => &["x", "y", "z", "w", "u", "v"],
    };
    for i in 0.. {
        for b in bases {
            let cand = if i == 0 {
                Name::new(b)
            } else {
                Name::new(&format!("{b}{i}"))
            };
            if !taken(&cand) {
                return cand;
            }
        }
    }
    unreachable!()
}

#[derive(Clone, Copy)]
enum Naming {
    /// Keep names, renaming only binders that would shadow an enclosing one.
    Freshen,
    /// Name each binder by its depth (`b.d` / `y.d`).
    Canonical,
}

struct Renamer<'a> {
    naming: Naming,
    free: &'a VarSet,
    /// (original name, new name) for enclosing binders, innermost last.
    scope: Vec<(Name, Name)>,
}

impl Renamer<'_> {
    fn lookup(&self, v: &Name) -> Name {
        self.scope
            .iter()
            .rev()
            .find(|(old, _)| old == v)
            .map_or_else(|| v.clone(), |(_, new)| new.clone())
    }

    fn taken(&self, n: &Name) -> bool {
        self.free.contains(n) || self.scope.iter().any(|(_, new)| new == n)
    }

    fn bind(&mut self, v: &Name) -> Name {
        let new = match self.naming {
            Naming::Freshen => {
                if self.taken(v) {
                    fresh_name(v.sort(), |n| self.taken(n))
                } else {
                    v.clone()
                }
            }
            Naming::Canonical => {
                let d = self.scope.len();
                let base = match v.sort() {
                    Sort::Ord => format!("b.{d}"),
                    Sort::Set => format!("y.{d}"),
                };
                let mut cand = Name::new(&base);
                while self.taken(&cand) {
                    cand = Name::new(&format!("{cand}'"));
                }
                cand
            }
        };
        self.scope.push((v.clone(), new.clone()));
        new
    }

    fn unbind(&mut self) {
        self.scope.pop();
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Set(s) => Term::Set(self.set(s)),
            Term::Ord(o) => Term::Ord(self.ord(o)),
        }
    }

    fn set(&mut self, t: &SetTerm) -> SetTerm {
        match t {
            SetTerm::Var(v) => SetTerm::Var(self.lookup(v)),
            SetTerm::Sep { var, bound, pred } => {
                let bound = Box::new(self.set(bound));
                let var = self.bind(var);
                let pred = Box::new(self.formula(pred));
                self.unbind();
                SetTerm::Sep { var, bound, pred }
            }
            SetTerm::Stage(a) => SetTerm::Stage(Box::new(self.ord(a))),
            SetTerm::Fix { var, body, seed } => {
                let seed = Box::new(self.set(seed));
                let var = self.bind(var);
                let body = Box::new(self.set(body));
                self.unbind();
                SetTerm::Fix { var, body, seed }
            }
        }
    }

    fn ord(&mut self, t: &OrdTerm) -> OrdTerm {
        match t {
            OrdTerm::Var(v) => OrdTerm::Var(self.lookup(v)),
            OrdTerm::Min { var, pred } => {
                let var = self.bind(var);
                let pred = Box::new(self.formula(pred));
                self.unbind();
                OrdTerm::Min { var, pred }
            }
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Mem(a, b) => Formula::Mem(self.term(a), self.term(b)),
            Formula::Eq(a, b) => Formula::Eq(self.term(a), self.term(b)),
            Formula::Defined(t) => Formula::Defined(self.term(t)),
            Formula::And(p, q) => Formula::And(Box::new(self.formula(p)), Box::new(self.formula(q))),
            Formula::Or(p, q) => Formula::Or(Box::new(self.formula(p)), Box::new(self.formula(q))),
            Formula::Not(p) => Formula::Not(Box::new(self.formula(p))),
            Formula::ForallSet { var, bound, body } => {
                let bound = self.set(bound);
                let var = self.bind(var);
                let body = Box::new(self.formula(body));
                self.unbind();
                Formula::ForallSet { var, bound, body }
            }
            Formula::ExistsSet { var, bound, body } => {
                let bound = self.set(bound);
                let var = self.bind(var);
                let body = Box::new(self.formula(body));
                self.unbind();
                Formula::ExistsSet { var, bound, body }
            }
            Formula::ForallOrd { var, bound, body } => {
                let bound = self.ord(bound);
                let var = self.bind(var);
                let body = Box::new(self.formula(body));
                self.unbind();
                Formula::ForallOrd { var, bound, body }
            }
            Formula::ExistsOrd { var, bound, body } => {
                let bound = self.ord(bound);
                let var = self.bind(var);
                let body = Box::new(self.formula(body));
                self.unbind();
                Formula::ExistsOrd { var, bound, body }
            }
        }
    }
}

fn renamer(naming: Naming, free: &VarSet) -> Renamer<'_> {
    Renamer {
        naming,
        free,
        scope: Vec::new(),
    }
}

/// Renames binders that shadow an enclosing binder or a free variable, so
/// that every bound variable is fresh with respect to its context.
pub fn freshen(f: &Formula) -> Formula {
    let free = free_vars(f);
    renamer(Naming::Freshen, &free).formula(f)
}

pub fn freshen_set(t: &SetTerm) -> SetTerm {
    let free = free_vars_set(t);
    renamer(Naming::Freshen, &free).set(t)
}

pub fn freshen_ord(t: &OrdTerm) -> OrdTerm {
    let free = free_vars_ord(t);
    renamer(Naming::Freshen, &free).ord(t)
}

pub fn freshen_expr(e: &Expr) -> Expr {
    match e {
        Expr::Formula(f) => Expr::Formula(freshen(f)),
        Expr::Set(s) => Expr::Set(freshen_set(s)),
        Expr::Ord(o) => Expr::Ord(freshen_ord(o)),
    }
}

/// Canonical representative of the alpha-equivalence class: binders are
/// named by depth. Two expressions are alpha-equivalent iff their canonical
/// forms are equal.
pub fn canonical(f: &Formula) -> Formula {
    let free = free_vars(f);
    renamer(Naming::Canonical, &free).formula(f)
}

pub fn canonical_set(t: &SetTerm) -> SetTerm {
    let free = free_vars_set(t);
    renamer(Naming::Canonical, &free).set(t)
}

pub fn canonical_ord(t: &OrdTerm) -> OrdTerm {
    let free = free_vars_ord(t);
    renamer(Naming::Canonical, &free).ord(t)
}

pub fn canonical_term(t: &Term) -> Term {
    match t {
        Term::Set(s) => Term::Set(canonical_set(s)),
        Term::Ord(o) => Term::Ord(canonical_ord(o)),
    }
}

pub fn canonical_expr(e: &Expr) -> Expr {
    match e {
        Expr::Formula(f) => Expr::Formula(canonical(f)),
        Expr::Set(s) => Expr::Set(canonical_set(s)),
        Expr::Ord(o) => Expr::Ord(canonical_ord(o)),
    }
}

pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    canonical(a) == canonical(b)
}

pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    canonical_term(a) == canonical_term(b)
}

// ---------------------------------------------------------------------------
// Substitution

/// `f[var := t]`, capture-avoiding. Panics if the sorts disagree.
pub fn subst(f: &Formula, var: &Name, t: &Term) -> Formula {
    assert_eq!(var.sort(), t.sort(), "substituting {t:?} for {var}");
    let tfree = free_vars_term(t);
    Subst { var, t, tfree: &tfree }.formula(f)
}

pub fn subst_set(s: &SetTerm, var: &Name, t: &Term) -> SetTerm {
    assert_eq!(var.sort(), t.sort(), "substituting {t:?} for {var}");
    let tfree = free_vars_term(t);
    Subst { var, t, tfree: &tfree }.set(s)
}

struct Subst<'a> {
    var: &'a Name,
    t: &'a Term,
    tfree: &'a VarSet,
}

impl Subst<'_> {
    /// Prepares a binder: returns `None` when it shadows `var` (no
    /// substitution below), otherwise the binder name to use together with a
    /// renaming to apply to the scope first.
    fn binder(&self, v: &Name, scope_free: &VarSet) -> Option<(Name, Option<Term>)> {
        if v == self.var {
            return None;
        }
        if self.tfree.contains(v) {
            let new = fresh_name(v.sort(), |n| {
                self.tfree.contains(n) || scope_free.contains(n) || n == self.var
            });
            let rename = match new.sort() {
                Sort::Set => Term::Set(SetTerm::Var(new.clone())),
                Sort::Ord => Term::Ord(OrdTerm::Var(new.clone())),
            };
            Some((new, Some(rename)))
        } else {
            Some((v.clone(), None))
        }
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Set(s) => Term::Set(self.set(s)),
            Term::Ord(o) => Term::Ord(self.ord(o)),
        }
    }

    fn set(&self, s: &SetTerm) -> SetTerm {
        match s {
            SetTerm::Var(v) if v == self.var => match self.t {
                Term::Set(t) => t.clone(),
                Term::Ord(_) => unreachable!("sort checked"),
            },
            SetTerm::Var(_) => s.clone(),
            SetTerm::Sep { var, bound, pred } => {
                let bound = Box::new(self.set(bound));
                match self.binder(var, &free_vars(pred)) {
                    None => SetTerm::Sep {
                        var: var.clone(),
                        bound,
                        pred: pred.clone(),
                    },
                    Some((new, rename)) => {
                        let pred = match rename {
                            Some(r) => subst(pred, var, &r),
                            None => (**pred).clone(),
                        };
                        SetTerm::Sep {
                            var: new,
                            bound,
                            pred: Box::new(self.formula(&pred)),
                        }
                    }
                }
            }
            SetTerm::Stage(a) => SetTerm::Stage(Box::new(self.ord(a))),
            SetTerm::Fix { var, body, seed } => {
                let seed = Box::new(self.set(seed));
                match self.binder(var, &free_vars_set(body)) {
                    None => SetTerm::Fix {
                        var: var.clone(),
                        body: body.clone(),
                        seed,
                    },
                    Some((new, rename)) => {
                        let body = match rename {
                            Some(r) => subst_set(body, var, &r),
                            None => (**body).clone(),
                        };
                        SetTerm::Fix {
                            var: new,
                            body: Box::new(self.set(&body)),
                            seed,
                        }
                    }
                }
            }
        }
    }

    fn ord(&self, o: &OrdTerm) -> OrdTerm {
        match o {
            OrdTerm::Var(v) if v == self.var => match self.t {
                Term::Ord(t) => t.clone(),
                Term::Set(_) => unreachable!("sort checked"),
            },
            OrdTerm::Var(_) => o.clone(),
            OrdTerm::Min { var, pred } => match self.binder(var, &free_vars(pred)) {
                None => o.clone(),
                Some((new, rename)) => {
                    let pred = match rename {
                        Some(r) => subst(pred, var, &r),
                        None => (**pred).clone(),
                    };
                    OrdTerm::Min {
                        var: new,
                        pred: Box::new(self.formula(&pred)),
                    }
                }
            },
        }
    }

    fn quant_body(&self, var: &Name, body: &Formula) -> Option<(Name, Formula)> {
        self.binder(var, &free_vars(body)).map(|(new, rename)| {
            let body = match rename {
                Some(r) => subst(body, var, &r),
                None => body.clone(),
            };
            (new, self.formula(&body))
        })
    }

    fn formula(&self, f: &Formula) -> Formula {
        match f {
            Formula::Mem(a, b) => Formula::Mem(self.term(a), self.term(b)),
            Formula::Eq(a, b) => Formula::Eq(self.term(a), self.term(b)),
            Formula::Defined(t) => Formula::Defined(self.term(t)),
            Formula::And(p, q) => Formula::and(self.formula(p), self.formula(q)),
            Formula::Or(p, q) => Formula::or(self.formula(p), self.formula(q)),
            Formula::Not(p) => Formula::not(self.formula(p)),
            Formula::ForallSet { var, bound, body } => {
                let bound = self.set(bound);
                match self.quant_body(var, body) {
                    None => Formula::ForallSet {
                        var: var.clone(),
                        bound,
                        body: body.clone(),
                    },
                    Some((var, body)) => Formula::ForallSet {
                        var,
                        bound,
                        body: Box::new(body),
                    },
                }
            }
            Formula::ExistsSet { var, bound, body } => {
                let bound = self.set(bound);
                match self.quant_body(var, body) {
                    None => Formula::ExistsSet {
                        var: var.clone(),
                        bound,
                        body: body.clone(),
                    },
                    Some((var, body)) => Formula::ExistsSet {
                        var,
                        bound,
                        body: Box::new(body),
                    },
                }
            }
            Formula::ForallOrd { var, bound, body } => {
                let bound = self.ord(bound);
                match self.quant_body(var, body) {
                    None => Formula::ForallOrd {
                        var: var.clone(),
                        bound,
                        body: body.clone(),
                    },
                    Some((var, body)) => Formula::ForallOrd {
                        var,
                        bound,
                        body: Box::new(body),
                    },
                }
            }
            Formula::ExistsOrd { var, bound, body } => {
                let bound = self.ord(bound);
                match self.quant_body(var, body) {
                    None => Formula::ExistsOrd {
                        var: var.clone(),
                        bound,
                        body: body.clone(),
                    },
                    Some((var, body)) => Formula::ExistsOrd {
                        var,
                        bound,
                        body: Box::new(body),
                    },
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Matching

/// Finds `Y` with `pattern[hole := Y] ≡ target` (alpha-equivalence).
///
/// Returns `None` if no such `Y` exists, `Some(None)` if `hole` does not
/// occur in `pattern` and the two are alpha-equivalent (any `Y` works), and
/// `Some(Some(Y))` otherwise.
pub fn match_hole(pattern: &Formula, hole: &Name, target: &Formula) -> Option<Option<Term>> {
    let mut m = Matcher {
        hole,
        pscope: Vec::new(),
        tscope: Vec::new(),
        found: None,
    };
    if m.formula(pattern, target) {
        Some(m.found)
    } else {
        None
    }
}

struct Matcher<'a> {
    hole: &'a Name,
    pscope: Vec<Name>,
    tscope: Vec<Name>,
    found: Option<Term>,
}

impl Matcher<'_> {
    fn var(&self, p: &Name, t: &Name) -> bool {
        let pi = self.pscope.iter().rposition(|v| v == p);
        let ti = self.tscope.iter().rposition(|v| v == t);
        match (pi, ti) {
            (Some(i), Some(j)) => i == j,
            (None, None) => p == t,
            _ => false,
        }
    }

    fn hole_here(&self, p: &Name) -> bool {
        p == self.hole && !self.pscope.contains(p)
    }

    fn bind_hole(&mut self, t: Term) -> bool {
        // The instance may not mention variables bound inside the pattern.
        if free_vars_term(&t).iter().any(|v| self.tscope.contains(v)) {
            return false;
        }
        match &self.found {
            Some(prev) => alpha_eq_term(prev, &t),
            None => {
                self.found = Some(t);
                true
            }
        }
    }

    fn with<R>(&mut self, p: &Name, t: &Name, k: impl FnOnce(&mut Self) -> R) -> R {
        self.pscope.push(p.clone());
        self.tscope.push(t.clone());
        let r = k(self);
        self.pscope.pop();
        self.tscope.pop();
        r
    }

    fn term(&mut self, p: &Term, t: &Term) -> bool {
        match (p, t) {
            (Term::Set(SetTerm::Var(v)), _) | (Term::Ord(OrdTerm::Var(v)), _) if self.hole_here(v) => {
                v.sort() == t.sort() && self.bind_hole(t.clone())
            }
            (Term::Set(a), Term::Set(b)) => self.set(a, b),
            (Term::Ord(a), Term::Ord(b)) => self.ord(a, b),
            _ => false,
        }
    }

    fn set(&mut self, p: &SetTerm, t: &SetTerm) -> bool {
        match (p, t) {
            (SetTerm::Var(v), _) if self.hole_here(v) => self.bind_hole(Term::Set(t.clone())),
            (SetTerm::Var(a), SetTerm::Var(b)) => self.var(a, b),
            (
                SetTerm::Sep { var: v1, bound: b1, pred: p1 },
                SetTerm::Sep { var: v2, bound: b2, pred: p2 },
            ) => self.set(b1, b2) && self.with(v1, v2, |m| m.formula(p1, p2)),
            (SetTerm::Stage(a), SetTerm::Stage(b)) => self.ord(a, b),
            (
                SetTerm::Fix { var: v1, body: b1, seed: s1 },
                SetTerm::Fix { var: v2, body: b2, seed: s2 },
            ) => self.set(s1, s2) && self.with(v1, v2, |m| m.set(b1, b2)),
            _ => false,
        }
    }

    fn ord(&mut self, p: &OrdTerm, t: &OrdTerm) -> bool {
        match (p, t) {
            (OrdTerm::Var(v), _) if self.hole_here(v) => self.bind_hole(Term::Ord(t.clone())),
            (OrdTerm::Var(a), OrdTerm::Var(b)) => self.var(a, b),
            (OrdTerm::Min { var: v1, pred: p1 }, OrdTerm::Min { var: v2, pred: p2 }) => {
                self.with(v1, v2, |m| m.formula(p1, p2))
            }
            _ => false,
        }
    }

    fn formula(&mut self, p: &Formula, t: &Formula) -> bool {
        use Formula::*;
        match (p, t) {
            (Mem(a1, b1), Mem(a2, b2)) | (Eq(a1, b1), Eq(a2, b2)) => {
                self.term(a1, a2) && self.term(b1, b2)
            }
            (Defined(a), Defined(b)) => self.term(a, b),
            (And(p1, q1), And(p2, q2)) | (Or(p1, q1), Or(p2, q2)) => {
                self.formula(p1, p2) && self.formula(q1, q2)
            }
            (Not(a), Not(b)) => self.formula(a, b),
            (
                ForallSet { var: v1, bound: b1, body: f1 },
                ForallSet { var: v2, bound: b2, body: f2 },
            )
            | (
                ExistsSet { var: v1, bound: b1, body: f1 },
                ExistsSet { var: v2, bound: b2, body: f2 },
            ) => self.set(b1, b2) && self.with(v1, v2, |m| m.formula(f1, f2)),
            (
                ForallOrd { var: v1, bound: b1, body: f1 },
                ForallOrd { var: v2, bound: b2, body: f2 },
            )
            | (
                ExistsOrd { var: v1, bound: b1, body: f1 },
                ExistsOrd { var: v2, bound: b2, body: f2 },
            ) => self.ord(b1, b2) && self.with(v1, v2, |m| m.formula(f1, f2)),
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics

/// Which constructor class `depth` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthKind {
    /// Nesting of `min` (rule 6).
    Min,
    /// Nesting of `fix` (rule 6b).
    Fix,
    /// Total number of non-variable nodes.
    Nodes,
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    nodes: usize,
    min_depth: usize,
    fix_depth: usize,
}

impl Counts {
    fn leaf() -> Self {
        Counts::default()
    }

    fn node(children: &[Counts]) -> Self {
        Counts {
            nodes: 1 + children.iter().map(|c| c.nodes).sum::<usize>(),
            min_depth: children.iter().map(|c| c.min_depth).max().unwrap_or(0),
            fix_depth: children.iter().map(|c| c.fix_depth).max().unwrap_or(0),
        }
    }
}

fn counts_term(t: &Term) -> Counts {
    match t {
        Term::Set(s) => counts_set(s),
        Term::Ord(o) => counts_ord(o),
    }
}

fn counts_set(t: &SetTerm) -> Counts {
    match t {
        SetTerm::Var(_) => Counts::leaf(),
        SetTerm::Sep { bound, pred, .. } => Counts::node(&[counts_set(bound), counts_formula(pred)]),
        SetTerm::Stage(a) => Counts::node(&[counts_ord(a)]),
        SetTerm::Fix { body, seed, .. } => {
            let mut c = Counts::node(&[counts_set(body), counts_set(seed)]);
            c.fix_depth += 1;
            c
        }
    }
}

fn counts_ord(t: &OrdTerm) -> Counts {
    match t {
        OrdTerm::Var(_) => Counts::leaf(),
        OrdTerm::Min { pred, .. } => {
            let mut c = Counts::node(&[counts_formula(pred)]);
            c.min_depth += 1;
            c
        }
    }
}

fn counts_formula(f: &Formula) -> Counts {
    match f {
        Formula::Mem(a, b) | Formula::Eq(a, b) => Counts::node(&[counts_term(a), counts_term(b)]),
        Formula::Defined(t) => Counts::node(&[counts_term(t)]),
        Formula::And(p, q) | Formula::Or(p, q) => Counts::node(&[counts_formula(p), counts_formula(q)]),
        Formula::Not(p) => Counts::node(&[counts_formula(p)]),
        Formula::ForallSet { bound, body, .. } | Formula::ExistsSet { bound, body, .. } => {
            Counts::node(&[counts_set(bound), counts_formula(body)])
        }
        Formula::ForallOrd { bound, body, .. } | Formula::ExistsOrd { bound, body, .. } => {
            Counts::node(&[counts_ord(bound), counts_formula(body)])
        }
    }
}

fn counts_expr(e: &Expr) -> Counts {
    match e {
        Expr::Formula(f) => counts_formula(f),
        Expr::Set(s) => counts_set(s),
        Expr::Ord(o) => counts_ord(o),
    }
}

pub fn depth(e: &Expr, kind: DepthKind) -> usize {
    let c = counts_expr(e);
    match kind {
        DepthKind::Min => c.min_depth,
        DepthKind::Fix => c.fix_depth,
        DepthKind::Nodes => c.nodes,
    }
}

/// Size measure used for enumeration budgets: every constructor counts one,
/// variable occurrences count zero.
pub fn node_count(f: &Formula) -> usize {
    counts_formula(f).nodes
}

pub fn node_count_term(t: &Term) -> usize {
    counts_term(t).nodes
}

pub fn node_count_ord(t: &OrdTerm) -> usize {
    counts_ord(t).nodes
}

pub fn min_depth(f: &Formula) -> usize {
    counts_formula(f).min_depth
}

pub fn min_depth_ord(t: &OrdTerm) -> usize {
    counts_ord(t).min_depth
}

/// True if neither `min` nor `fix` occurs.
pub fn is_min_free(f: &Formula) -> bool {
    let c = counts_formula(f);
    c.min_depth == 0 && c.fix_depth == 0
}

pub fn contains_fix(e: &Expr) -> bool {
    counts_expr(e).fix_depth > 0
}

pub fn contains_min(e: &Expr) -> bool {
    counts_expr(e).min_depth > 0
}
