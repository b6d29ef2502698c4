//! Exhaustive enumeration of expressions by node count.
//!
//! Binders get canonical names (`b.d`, `y.d` by depth), so each alpha class
//! appears once.

use std::collections::HashMap;
use std::rc::Rc;

use super::ast::*;

pub fn param_name(i: usize) -> Name {
    Name::new(&format!("p{i}"))
}

pub(crate) fn binder_name(sort: Sort, depth: usize) -> Name {
    Name::new(&match sort {
        Sort::Ord => format!("b.{depth}"),
        Sort::Set => format!("y.{depth}"),
    })
}

/// Free variables and constructors available to the enumerator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    /// Set parameters `p0, …`.
    pub params: usize,
    /// Free ordinal variables.
    pub ord_atoms: Vec<Name>,
    /// Allow `L_A`.
    pub stages: bool,
    /// Apply `not` to `mem` and `eq` atoms only.
    pub nnf: bool,
}

impl Vocabulary {
    pub fn params(params: usize) -> Self {
        Vocabulary {
            params,
            ord_atoms: Vec::new(),
            stages: true,
            nnf: false,
        }
    }

    pub fn atoms(ord_atoms: Vec<Name>) -> Self {
        Vocabulary {
            params: 0,
            ord_atoms,
            stages: true,
            nnf: false,
        }
    }
}

type Key = (usize, usize, Vec<Sort>);

/// Memoized exact-size enumerator. `size` counts constructors; `md` bounds
/// the nesting of `min`.
pub struct Enumerator {
    voc: Vocabulary,
    formulas: HashMap<Key, Rc<Vec<Formula>>>,
    ords: HashMap<Key, Rc<Vec<OrdTerm>>>,
    sets: HashMap<Key, Rc<Vec<SetTerm>>>,
}

impl Enumerator {
    pub fn new(voc: Vocabulary) -> Self {
        Enumerator {
            voc,
            formulas: HashMap::new(),
            ords: HashMap::new(),
            sets: HashMap::new(),
        }
    }

    fn vars(&self, scope: &[Sort], sort: Sort) -> Vec<Name> {
        let mut out: Vec<Name> = scope
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == sort)
            .map(|(d, s)| binder_name(*s, d))
            .collect();
        match sort {
            Sort::Set => out.extend((0..self.voc.params).map(param_name)),
            Sort::Ord => out.extend(self.voc.ord_atoms.iter().cloned()),
        }
        out
    }

    pub fn terms(&mut self, size: usize, md: usize, scope: &[Sort]) -> Vec<Term> {
        let mut out: Vec<Term> = self.ord(size, md, scope).iter().cloned().map(Term::Ord).collect();
        out.extend(self.set(size, md, scope).iter().cloned().map(Term::Set));
        out
    }

    fn inner(scope: &[Sort], s: Sort) -> Vec<Sort> {
        let mut v = scope.to_vec();
        v.push(s);
        v
    }

    pub fn formula(&mut self, size: usize, md: usize, scope: &[Sort]) -> Rc<Vec<Formula>> {
        let key = (size, md, scope.to_vec());
        if let Some(r) = self.formulas.get(&key) {
            return r.clone();
        }
        let mut out = Vec::new();
        if size >= 1 {
            for l in 0..size {
                let ls = self.terms(l, md, scope);
                let rs = self.terms(size - 1 - l, md, scope);
                for a in &ls {
                    for b in &rs {
                        out.push(Formula::Mem(a.clone(), b.clone()));
                        out.push(Formula::Eq(a.clone(), b.clone()));
                    }
                }
            }
            for t in self.terms(size - 1, md, scope) {
                out.push(Formula::Defined(t));
            }
            let nnf = self.voc.nnf;
            for p in self.formula(size - 1, md, scope).iter() {
                if !nnf || matches!(p, Formula::Mem(..) | Formula::Eq(..)) {
                    out.push(Formula::not(p.clone()));
                }
            }
            for l in 1..size.saturating_sub(1) {
                let ls = self.formula(l, md, scope);
                let rs = self.formula(size - 1 - l, md, scope);
                for p in ls.iter() {
                    for q in rs.iter() {
                        out.push(Formula::and(p.clone(), q.clone()));
                        out.push(Formula::or(p.clone(), q.clone()));
                    }
                }
            }
            let d = scope.len();
            for b in 0..size {
                let bounds = self.set(b, md, scope);
                if !bounds.is_empty() {
                    let bodies = self.formula(size - 1 - b, md, &Self::inner(scope, Sort::Set));
                    let var = binder_name(Sort::Set, d);
                    for bound in bounds.iter() {
                        for body in bodies.iter() {
                            out.push(Formula::ForallSet {
                                var: var.clone(),
                                bound: bound.clone(),
                                body: Box::new(body.clone()),
                            });
                            out.push(Formula::ExistsSet {
                                var: var.clone(),
                                bound: bound.clone(),
                                body: Box::new(body.clone()),
                            });
                        }
                    }
                }
                let bounds = self.ord(b, md, scope);
                if !bounds.is_empty() {
                    let bodies = self.formula(size - 1 - b, md, &Self::inner(scope, Sort::Ord));
                    let var = binder_name(Sort::Ord, d);
                    for bound in bounds.iter() {
                        for body in bodies.iter() {
                            out.push(Formula::ForallOrd {
                                var: var.clone(),
                                bound: bound.clone(),
                                body: Box::new(body.clone()),
                            });
                            out.push(Formula::ExistsOrd {
                                var: var.clone(),
                                bound: bound.clone(),
                                body: Box::new(body.clone()),
                            });
                        }
                    }
                }
            }
        }
        let r = Rc::new(out);
        self.formulas.insert(key, r.clone());
        r
    }

    pub fn ord(&mut self, size: usize, md: usize, scope: &[Sort]) -> Rc<Vec<OrdTerm>> {
        let key = (size, md, scope.to_vec());
        if let Some(r) = self.ords.get(&key) {
            return r.clone();
        }
        let out: Vec<OrdTerm> = if size == 0 {
            self.vars(scope, Sort::Ord).into_iter().map(OrdTerm::Var).collect()
        } else if md > 0 {
            let var = binder_name(Sort::Ord, scope.len());
            self.formula(size - 1, md - 1, &Self::inner(scope, Sort::Ord))
                .iter()
                .map(|p| OrdTerm::Min {
                    var: var.clone(),
                    pred: Box::new(p.clone()),
                })
                .collect()
        } else {
            Vec::new()
        };
        let r = Rc::new(out);
        self.ords.insert(key, r.clone());
        r
    }

    pub fn set(&mut self, size: usize, md: usize, scope: &[Sort]) -> Rc<Vec<SetTerm>> {
        let key = (size, md, scope.to_vec());
        if let Some(r) = self.sets.get(&key) {
            return r.clone();
        }
        let mut out = Vec::new();
        if size == 0 {
            out.extend(self.vars(scope, Sort::Set).into_iter().map(SetTerm::Var));
        } else {
            if self.voc.stages {
                for a in self.ord(size - 1, md, scope).iter() {
                    out.push(SetTerm::Stage(Box::new(a.clone())));
                }
            }
            let var = binder_name(Sort::Set, scope.len());
            for b in 0..size {
                let bounds = self.set(b, md, scope);
                if bounds.is_empty() {
                    continue;
                }
                let preds = self.formula(size - 1 - b, md, &Self::inner(scope, Sort::Set));
                for bound in bounds.iter() {
                    for p in preds.iter() {
                        out.push(SetTerm::Sep {
                            var: var.clone(),
                            bound: Box::new(bound.clone()),
                            pred: Box::new(p.clone()),
                        });
                    }
                }
            }
        }
        let r = Rc::new(out);
        self.sets.insert(key, r.clone());
        r
    }
}

/// Every formula over `voc` with between 1 and `max_nodes` constructors
/// and `min` nested at most `md` deep, ordered by size and then rendering.
pub fn formulas_upto(voc: &Vocabulary, max_nodes: usize, md: usize) -> Vec<Formula> {
    let mut e = Enumerator::new(voc.clone());
    let mut out = Vec::new();
    for size in 1..=max_nodes {
        let mut bucket: Vec<(String, Formula)> =
            e.formula(size, md, &[]).iter().map(|f| (f.to_string(), f.clone())).collect();
        bucket.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(bucket.into_iter().map(|(_, f)| f));
    }
    out
}

/// Every term over `voc` with at most `max_nodes` constructors, ordered by
/// size and then rendering.
pub fn terms_upto(voc: &Vocabulary, max_nodes: usize, md: usize) -> Vec<Term> {
    let mut e = Enumerator::new(voc.clone());
    let mut out = Vec::new();
    for size in 0..=max_nodes {
        let mut bucket: Vec<(String, Term)> =
            e.terms(size, md, &[]).into_iter().map(|t| (t.to_string(), t)).collect();
        bucket.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(bucket.into_iter().map(|(_, t)| t));
    }
    out
}
