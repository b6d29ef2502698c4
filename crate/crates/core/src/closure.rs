//! Forward-chaining saturation of formula sets over ordinal atoms.
//!
//! Every derived formula must lie in a budgeted universe: the formulas whose
//! free variables are among the atoms and whose node count is at most the
//! budget. Closure claims are always relative to that universe.
//!
//! Soundness of the universal rule depends on knowing every member of its
//! bound. That holds for ordinal bounds (atoms by goodness, `min` terms by
//! the order facts derived alongside their definedness) but not for set
//! bounds, whose members are only partly nameable under a budget, so the
//! rule fires for ordinal bounds only. Its premises range over members whose
//! instance lies in the universe; atoms always do, and they name every
//! member.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::eval::{Env, EvalError, Evaluator, Truth3, Value};
use crate::syntax::ast::*;
use crate::syntax::enumerate::{formulas_upto, Vocabulary};
use crate::syntax::ops;
use crate::syntax::{desugar, Dialect};

pub const MAX_TRUTH_STAGE: u32 = 4;

#[derive(Debug, Error)]
pub enum ClosureError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} is not an ordinal atom")]
    NotAtom(String),
    #[error("stage {0} exceeds {MAX_TRUTH_STAGE}")]
    Stage(u32),
    #[error("formula set is not good")]
    NotGood,
    #[error("atom {0} has no value in the certificate")]
    Unassigned(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Which formulas a universe admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fragment {
    /// Every constructor, `min` nested at most twice.
    Full,
    /// No `L`, no `min`.
    Ordinal,
    /// No `L`, `min` not nested.
    OrdinalMin,
}

impl Fragment {
    fn vocabulary(self, atoms: &[Name]) -> (Vocabulary, usize) {
        let mut v = Vocabulary::atoms(atoms.to_vec());
        match self {
            Fragment::Full => (v, 2),
            Fragment::Ordinal => {
                v.stages = false;
                (v, 0)
            }
            Fragment::OrdinalMin => {
                v.stages = false;
                (v, 1)
            }
        }
    }
}

pub struct Universe {
    pub atoms: Vec<Name>,
    pub budget: usize,
    pub fragment: Fragment,
    formulas: Vec<Formula>,
    index: HashSet<Formula>,
}

impl Universe {
    pub fn new(atoms: &[Name], budget: usize, fragment: Fragment) -> Self {
        let (voc, md) = fragment.vocabulary(atoms);
        let formulas: Vec<Formula> = formulas_upto(&voc, budget, md).iter().map(ops::canonical).collect();
        let index = formulas.iter().cloned().collect();
        Universe {
            atoms: atoms.to_vec(),
            budget,
            fragment,
            formulas,
            index,
        }
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index.contains(&ops::canonical(f))
    }
}

/// A set of formulas kept in canonical form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormulaSet {
    members: HashSet<Formula>,
    /// Set when the set is a fixpoint of the production rules within its
    /// universe.
    pub closed_world: bool,
}

impl FormulaSet {
    pub fn new(members: impl IntoIterator<Item = Formula>) -> Self {
        FormulaSet {
            members: members.into_iter().map(|f| ops::canonical(&f)).collect(),
            closed_world: false,
        }
    }

    /// One formula per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ClosureError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| ClosureError::Parse { line: i + 1, msg };
            match desugar(line, Dialect::Gdst).map_err(|e| err(e.to_string()))? {
                Expr::Formula(f) => out.push(f),
                _ => return Err(err("expected a formula".into())),
            }
        }
        Ok(FormulaSet::new(out))
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.members.contains(&ops::canonical(f))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &FormulaSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Members of `self` missing from `other`, rendered and sorted.
    pub fn difference(&self, other: &FormulaSet) -> Vec<String> {
        sorted_renderings(self.members.difference(&other.members))
    }

    /// Renderings ordered by node count, then text.
    pub fn rendered(&self) -> Vec<String> {
        sorted_renderings(self.members.iter())
    }

    /// Free ordinal variables of the members.
    pub fn atoms(&self) -> Vec<Name> {
        let mut out: Vec<Name> = self
            .members
            .iter()
            .flat_map(ops::free_vars)
            .filter(|v| v.sort() == Sort::Ord)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        out.sort();
        out
    }

    /// Definedness and order facts between atoms.
    pub fn atom_facts(&self) -> FormulaSet {
        FormulaSet::new(self.members.iter().filter(|f| atom_fact(f).is_some()).cloned())
    }

    pub fn filter(&self, keep: impl Fn(&Formula) -> bool) -> FormulaSet {
        FormulaSet {
            members: self.members.iter().filter(|f| keep(f)).cloned().collect(),
            closed_world: false,
        }
    }

    pub fn insert(&mut self, f: Formula) -> bool {
        self.members.insert(ops::canonical(&f))
    }
}

impl fmt::Display for FormulaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.rendered() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn sorted_renderings<'a>(it: impl Iterator<Item = &'a Formula>) -> Vec<String> {
    let mut v: Vec<(usize, String)> = it.map(|f| (ops::node_count(f), f.to_string())).collect();
    v.sort();
    v.into_iter().map(|(_, s)| s).collect()
}

// ---------------------------------------------------------------------------
// Production rules

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Production {
    /// `X∈Y` from `X=Z`, `Z∈Y`.
    MemByEq,
    /// `X∉Y` from `∀x∈Y x≠X` and `X↓`.
    NotMem,
    /// `X=Y` from mutual inclusion.
    Extensional,
    /// `X≠Y`, `Y≠X` from `Z∈X ∧ Z∉Y`.
    NotEq,
    And,
    Or,
    Exists,
    /// `{x∈X : P}↓`
    SepDefined,
    /// `Y ∈ {x∈X : P}`
    SepMember,
    /// `L_A↓`
    StageDefined,
    /// `X ∈ L_A`
    StageMember,
    /// `min{α : P}↓`
    MinDefined,
    /// `B < min{α : P}`
    MinMember,
    Forall,
}

impl Production {
    pub const ALL: [Production; 14] = [
        Production::MemByEq,
        Production::NotMem,
        Production::Extensional,
        Production::NotEq,
        Production::And,
        Production::Or,
        Production::Exists,
        Production::SepDefined,
        Production::SepMember,
        Production::StageDefined,
        Production::StageMember,
        Production::MinDefined,
        Production::MinMember,
        Production::Forall,
    ];

    /// Whether adding facts can only add conclusions. The universal and
    /// `L_A↓` rules have side conditions over all facts of a shape.
    pub fn is_monotone(self) -> bool {
        !matches!(self, Production::Forall | Production::StageDefined)
    }
}

/// The enabled production rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rules {
    disabled: u16,
    /// Derive `P∧Q` from either conjunct. Only for mutation tests.
    pub corrupt_and: bool,
}

impl Default for Rules {
    fn default() -> Self {
        Rules::all()
    }
}

impl Rules {
    pub fn all() -> Self {
        Rules {
            disabled: 0,
            corrupt_and: false,
        }
    }

    pub fn monotone() -> Self {
        Production::ALL
            .iter()
            .filter(|p| !p.is_monotone())
            .fold(Rules::all(), |r, &p| r.without(p))
    }

    pub fn corrupted() -> Self {
        Rules {
            corrupt_and: true,
            ..Rules::all()
        }
    }

    pub fn without(mut self, p: Production) -> Self {
        self.disabled |= 1 << p as u16;
        self
    }

    pub fn on(&self, p: Production) -> bool {
        self.disabled & (1 << p as u16) == 0
    }
}

/// Lookup tables over the current set.
struct Facts<'a> {
    set: &'a HashSet<Formula>,
    universe: &'a HashSet<Formula>,
    /// `X ↦ [Y : "Y∈X"]`
    members: HashMap<Term, Vec<Term>>,
    /// `Y ↦ [X : "Y∈X"]`
    containers: HashMap<Term, Vec<Term>>,
    /// `X ↦ [Z : "X=Z"]`
    eqs: HashMap<Term, Vec<Term>>,
    /// `(X, Y)` with some `Z∈X ∧ Z∉Y`.
    differ: HashSet<(Term, Term)>,
    defined_ords: Vec<OrdTerm>,
}

impl<'a> Facts<'a> {
    fn new(set: &'a HashSet<Formula>, universe: &'a HashSet<Formula>) -> Self {
        let mut members: HashMap<Term, Vec<Term>> = HashMap::new();
        let mut containers: HashMap<Term, Vec<Term>> = HashMap::new();
        let mut eqs: HashMap<Term, Vec<Term>> = HashMap::new();
        let mut differ = HashSet::new();
        let mut defined_ords = Vec::new();
        for f in set {
            match f {
                Formula::Mem(y, x) => {
                    members.entry(x.clone()).or_default().push(y.clone());
                    containers.entry(y.clone()).or_default().push(x.clone());
                }
                Formula::Eq(x, z) => eqs.entry(x.clone()).or_default().push(z.clone()),
                Formula::Defined(Term::Ord(a)) => defined_ords.push(a.clone()),
                Formula::And(p, q) => {
                    if let (Formula::Mem(z, x), Formula::Not(n)) = (&**p, &**q) {
                        if let Formula::Mem(z2, y) = &**n {
                            if z == z2 {
                                differ.insert((x.clone(), y.clone()));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Facts {
            set,
            universe,
            members,
            containers,
            eqs,
            differ,
            defined_ords,
        }
    }

    fn has(&self, f: &Formula) -> bool {
        self.set.contains(&ops::canonical(f))
    }

    /// Present, or outside the universe.
    fn has_if_admitted(&self, f: &Formula) -> bool {
        let f = ops::canonical(f);
        self.set.contains(&f) || !self.universe.contains(&f)
    }

    fn members_of(&self, x: &Term, sort: Sort) -> impl Iterator<Item = &Term> {
        self.members
            .get(x)
            .into_iter()
            .flatten()
            .filter(move |y| y.sort() == sort)
    }
}

fn fresh_for(sort: Sort, t: &Term) -> Name {
    let taken = ops::free_vars_term(t);
    ops::fresh_name(sort, |n| taken.contains(n))
}

fn instance(body: &Formula, var: &Name, y: &Term) -> Formula {
    ops::subst(body, var, y)
}

fn derivable(f: &Formula, facts: &Facts, rules: &Rules) -> bool {
    use Production as R;
    match f {
        Formula::Mem(x, y) => {
            if rules.on(R::MemByEq) {
                let by_eq = facts.eqs.get(x).into_iter().flatten();
                if by_eq.into_iter().any(|z| facts.has(&Formula::Mem(z.clone(), y.clone()))) {
                    return true;
                }
            }
            match y {
                Term::Set(SetTerm::Sep { var, bound, pred }) if rules.on(R::SepMember) => {
                    x.sort() == var.sort()
                        && facts.has(&Formula::Mem(x.clone(), Term::Set((**bound).clone())))
                        && facts.has(&instance(pred, var, x))
                        && facts.has(&Formula::forall_in(
                            var,
                            Term::Set((**bound).clone()),
                            Formula::down((**pred).clone()),
                        ))
                }
                Term::Ord(OrdTerm::Min { var, pred }) if rules.on(R::MinMember) => {
                    facts.containers.get(x).into_iter().flatten().any(|a| match a {
                        Term::Ord(a) => min_witness(var, pred, a, facts),
                        Term::Set(_) => false,
                    })
                }
                // X ∈ L_A needs X in the set of separation terms over lower
                // stages, which then contains terms of every size; their
                // definedness facts cannot all fit a budget.
                _ => false,
            }
        }
        Formula::Not(p) => match &**p {
            Formula::Mem(x, y) if rules.on(R::NotMem) => {
                let v = fresh_for(y.sort(), x);
                facts.has(&Formula::Defined(x.clone()))
                    && facts.has(&Formula::forall_in(
                        &v,
                        y.clone(),
                        Formula::not(Formula::Eq(Term::var(v.as_str()), x.clone())),
                    ))
            }
            Formula::Eq(x, y) if rules.on(R::NotEq) => {
                facts.differ.contains(&(x.clone(), y.clone())) || facts.differ.contains(&(y.clone(), x.clone()))
            }
            _ => false,
        },
        Formula::Eq(x, y) if rules.on(R::Extensional) => {
            let inc = |a: &Term, b: &Term| {
                let v = fresh_for(a.sort(), b);
                facts.has(&Formula::forall_in(
                    &v,
                    a.clone(),
                    Formula::Mem(Term::var(v.as_str()), b.clone()),
                ))
            };
            inc(x, y) && inc(y, x)
        }
        Formula::And(p, q) if rules.on(R::And) => {
            if rules.corrupt_and {
                facts.has(p) || facts.has(q)
            } else {
                facts.has(p) && facts.has(q)
            }
        }
        Formula::Or(p, q) if rules.on(R::Or) => facts.has(p) || facts.has(q),
        Formula::ExistsSet { var, bound, body } if rules.on(R::Exists) => {
            let x = Term::Set(bound.clone());
            facts.members_of(&x, Sort::Set).any(|y| facts.has(&instance(body, var, y)))
        }
        Formula::ExistsOrd { var, bound, body } if rules.on(R::Exists) => {
            let x = Term::Ord(bound.clone());
            facts.members_of(&x, Sort::Ord).any(|y| facts.has(&instance(body, var, y)))
        }
        Formula::ForallOrd { var, bound, body } if rules.on(R::Forall) => {
            let x = Term::Ord(bound.clone());
            facts.has(&Formula::Defined(x.clone()))
                && facts
                    .members_of(&x, Sort::Ord)
                    .all(|y| facts.has_if_admitted(&instance(body, var, y)))
        }
        Formula::Defined(Term::Set(SetTerm::Sep { var, bound, pred })) if rules.on(R::SepDefined) => {
            let x = Term::Set((**bound).clone());
            facts.has(&Formula::forall_in(var, x.clone(), Formula::down((**pred).clone())))
                && facts.members_of(&x, Sort::Set).any(|y| facts.has(&instance(pred, var, y)))
        }
        Formula::Defined(Term::Set(SetTerm::Stage(a))) if rules.on(R::StageDefined) => {
            let a = Term::Ord((**a).clone());
            facts.has(&Formula::Defined(a.clone())) && facts.members_of(&a, Sort::Ord).next().is_none()
        }
        Formula::Defined(Term::Ord(OrdTerm::Min { var, pred })) if rules.on(R::MinDefined) => facts
            .defined_ords
            .iter()
            .any(|a| min_witness(var, pred, a, facts)),
        _ => false,
    }
}

/// `P(A)` and `∀β<A ¬P(β)`.
fn min_witness(var: &Name, pred: &Formula, a: &OrdTerm, facts: &Facts) -> bool {
    let at = Term::Ord(a.clone());
    facts.has(&instance(pred, var, &at))
        && facts.has(&Formula::ForallOrd {
            var: var.clone(),
            bound: a.clone(),
            body: Box::new(Formula::not(pred.clone())),
        })
}

/// One simultaneous application of every enabled rule, keeping only
/// conclusions inside `universe`.
pub fn t_step(p: &FormulaSet, universe: &Universe, rules: &Rules) -> FormulaSet {
    let facts = Facts::new(&p.members, &universe.index);
    let derived: Vec<Formula> = universe
        .formulas
        .par_iter()
        .filter(|f| !p.members.contains(*f) && derivable(f, &facts, rules))
        .cloned()
        .collect();
    let mut members = p.members.clone();
    members.extend(derived);
    FormulaSet {
        closed_world: members.len() == p.members.len(),
        members,
    }
}

#[derive(Debug, Clone)]
pub struct Saturation {
    pub set: FormulaSet,
    pub rounds: usize,
    /// Formulas added in each round.
    pub added: Vec<usize>,
}

/// Iterates `t_step` until nothing changes or `max_rounds` is reached.
pub fn saturate(p: &FormulaSet, universe: &Universe, rules: &Rules, max_rounds: usize) -> Saturation {
    let mut cur = p.clone();
    cur.closed_world = false;
    let mut added = Vec::new();
    for _ in 0..max_rounds {
        let next = t_step(&cur, universe, rules);
        let grew = next.len() - cur.len();
        cur = next;
        if grew == 0 {
            break;
        }
        added.push(grew);
    }
    Saturation {
        rounds: added.len(),
        set: cur,
        added,
    }
}

// ---------------------------------------------------------------------------
// Good sets

/// `q` and the surjection `g` from atoms onto `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodCertificate {
    pub q: u32,
    pub g: BTreeMap<Name, u32>,
}

impl Serialize for Name {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl GoodCertificate {
    pub fn atoms(&self) -> Vec<Name> {
        self.g.keys().cloned().collect()
    }

    pub fn env(&self) -> Env {
        let mut env = Env::new();
        for (a, &v) in &self.g {
            env.bind(a.clone(), Value::Ord(v));
        }
        env
    }
}

enum AtomFact {
    Defined(Name),
    Less(Name, Name),
}

fn atom_fact(f: &Formula) -> Option<AtomFact> {
    match f {
        Formula::Defined(Term::Ord(OrdTerm::Var(a))) => Some(AtomFact::Defined(a.clone())),
        Formula::Mem(Term::Ord(OrdTerm::Var(b)), Term::Ord(OrdTerm::Var(a))) => {
            Some(AtomFact::Less(b.clone(), a.clone()))
        }
        _ => None,
    }
}

/// Certifies `p` as good: only definedness and order facts between atoms,
/// every atom defined, and `g(A) = {g(B) : B<A}` an ordinal for every `A`.
pub fn is_good(p: &FormulaSet) -> Option<GoodCertificate> {
    let mut defined = HashSet::new();
    let mut below: BTreeMap<Name, Vec<Name>> = BTreeMap::new();
    for f in &p.members {
        match atom_fact(f)? {
            AtomFact::Defined(a) => {
                defined.insert(a.clone());
                below.entry(a).or_default();
            }
            AtomFact::Less(b, a) => {
                below.entry(b.clone()).or_default();
                below.entry(a).or_default().push(b);
            }
        }
    }
    if below.keys().any(|a| !defined.contains(a)) {
        return None;
    }
    let mut g: BTreeMap<Name, u32> = BTreeMap::new();
    let mut active = HashSet::new();
    fn visit(
        a: &Name,
        below: &BTreeMap<Name, Vec<Name>>,
        g: &mut BTreeMap<Name, u32>,
        active: &mut HashSet<Name>,
    ) -> Option<u32> {
        if let Some(&v) = g.get(a) {
            return Some(v);
        }
        if !active.insert(a.clone()) {
            return None;
        }
        let mut vals = Vec::new();
        for b in &below[a] {
            vals.push(visit(b, below, g, active)?);
        }
        vals.sort_unstable();
        vals.dedup();
        let k = vals.len() as u32;
        if vals.iter().enumerate().any(|(i, &v)| v != i as u32) {
            return None;
        }
        active.remove(a);
        g.insert(a.clone(), k);
        Some(k)
    }
    for a in below.keys() {
        visit(a, &below, &mut g, &mut active)?;
    }
    let q = g.values().map(|v| v + 1).max().unwrap_or(0);
    Some(GoodCertificate { q, g })
}

/// Adds a fresh atom above every existing one.
pub fn extend_top(p: &FormulaSet, new: &Name) -> FormulaSet {
    let mut out = p.clone();
    out.closed_world = false;
    let top = Term::Ord(OrdTerm::Var(new.clone()));
    for a in p.atoms() {
        out.insert(Formula::Mem(Term::Ord(OrdTerm::Var(a)), top.clone()));
    }
    out.insert(Formula::Defined(top));
    out
}

/// Every good set over the first `k` atoms of `names`, for `k ≤ max_atoms`.
pub fn good_sets(names: &[Name], max_atoms: usize) -> Vec<FormulaSet> {
    let mut out = Vec::new();
    for k in 1..=max_atoms.min(names.len()) {
        let atoms = &names[..k];
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        for mask in 0u32..(1 << pairs.len()) {
            let mut p = FormulaSet::new(atoms.iter().map(|a| Formula::Defined(Term::Ord(OrdTerm::Var(a.clone())))));
            for (bit, &(b, a)) in pairs.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    p.insert(Formula::Mem(
                        Term::Ord(OrdTerm::Var(atoms[b].clone())),
                        Term::Ord(OrdTerm::Var(atoms[a].clone())),
                    ));
                }
            }
            if is_good(&p).is_some() {
                out.push(p);
            }
        }
    }
    out
}

pub fn atom_names(k: usize) -> Vec<Name> {
    (0..k).map(|i| Name::new(&format!("a{}", (b'A' + i as u8) as char))).collect()
}

// ---------------------------------------------------------------------------
// Truth sets and the differential check

/// `not` applied only to `mem` and `eq`, including inside terms. The rules
/// produce negations of atomic formulas only.
pub fn negation_normal(f: &Formula) -> bool {
    fn term(t: &Term) -> bool {
        match t {
            Term::Ord(o) => ord(o),
            Term::Set(s) => set(s),
        }
    }
    fn ord(o: &OrdTerm) -> bool {
        match o {
            OrdTerm::Var(_) => true,
            OrdTerm::Min { pred, .. } => negation_normal(pred),
        }
    }
    fn set(s: &SetTerm) -> bool {
        match s {
            SetTerm::Var(_) => true,
            SetTerm::Sep { bound, pred, .. } => set(bound) && negation_normal(pred),
            SetTerm::Stage(a) => ord(a),
            SetTerm::Fix { .. } => false,
        }
    }
    match f {
        Formula::Mem(a, b) | Formula::Eq(a, b) => term(a) && term(b),
        Formula::Defined(t) => term(t),
        Formula::Not(p) => matches!(**p, Formula::Mem(..) | Formula::Eq(..)) && negation_normal(p),
        Formula::And(p, q) | Formula::Or(p, q) => negation_normal(p) && negation_normal(q),
        Formula::ForallSet { bound, body, .. } | Formula::ExistsSet { bound, body, .. } => {
            set(bound) && negation_normal(body)
        }
        Formula::ForallOrd { bound, body, .. } | Formula::ExistsOrd { bound, body, .. } => {
            ord(bound) && negation_normal(body)
        }
    }
}

/// Members of `universe` that evaluate to ⊤ at stage `q` with each atom
/// bound to its `g` value.
pub fn truth_set(cert: &GoodCertificate, universe: &Universe) -> Result<FormulaSet, ClosureError> {
    if cert.q > MAX_TRUTH_STAGE {
        return Err(ClosureError::Stage(cert.q));
    }
    if let Some(a) = universe.atoms.iter().find(|a| !cert.g.contains_key(*a)) {
        return Err(ClosureError::Unassigned(a.to_string()));
    }
    let env = cert.env();
    let verdicts: Vec<Result<bool, EvalError>> = universe
        .formulas
        .par_iter()
        .map(|f| Ok(Evaluator::new(cert.q, &env).formula(f)? == Truth3::Top))
        .collect();
    let mut members = HashSet::new();
    for (f, v) in universe.formulas.iter().zip(verdicts) {
        if v? {
            members.insert(f.clone());
        }
    }
    Ok(FormulaSet {
        members,
        closed_world: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EscalationStep {
    pub budget: usize,
    pub rounds: usize,
    pub universe: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub certificate: GoodCertificate,
    pub budget: usize,
    pub universe: usize,
    pub derived: usize,
    pub true_formulas: usize,
    pub closed_world: bool,
    pub sound: bool,
    /// Derived formulas that are not ⊤.
    pub unsound: Vec<String>,
    pub completeness: Fragment,
    /// Whether the ⊤ negation-normal formulas of the completeness fragment
    /// at `budget` are all derived when saturating at `budget`.
    pub complete_within_budget: bool,
    /// Target formulas never derived up to the largest budget tried.
    pub missing: Vec<String>,
    pub escalation: Vec<EscalationStep>,
    /// Smallest saturation budget that derives every target formula.
    pub complete_at: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct LemmaConfig {
    pub budget: usize,
    pub max_rounds: usize,
    pub max_budget: usize,
    pub completeness: Fragment,
    pub rules: Rules,
}

impl LemmaConfig {
    pub fn new(budget: usize) -> Self {
        LemmaConfig {
            budget,
            max_rounds: 64,
            max_budget: budget,
            completeness: Fragment::Ordinal,
            rules: Rules::all(),
        }
    }
}

/// Saturates a good set and compares the result with the formulas true
/// under its certificate. Soundness is exact over the full universe at
/// `budget`. Completeness is checked on the negation-normal ⊤ formulas of
/// size at most `budget` in `cfg.completeness`, raising the saturation
/// budget up to `max_budget` until all of them appear.
pub fn lemmagood_compare(p: &FormulaSet, cfg: &LemmaConfig) -> Result<LemmaReport, ClosureError> {
    let cert = is_good(p).ok_or(ClosureError::NotGood)?;
    if cert.q > 3 {
        return Err(ClosureError::Stage(cert.q));
    }
    let atoms = cert.atoms();
    let full = Universe::new(&atoms, cfg.budget, Fragment::Full);
    let sat = saturate(p, &full, &cfg.rules, cfg.max_rounds);
    let truth = truth_set(&cert, &full)?;
    let mut unsound = sat.set.difference(&truth);

    let target_u = Universe::new(&atoms, cfg.budget, cfg.completeness);
    let target = truth_set(&cert, &target_u)?.filter(negation_normal);
    let mut escalation = Vec::new();
    let mut complete_at = None;
    let mut missing = Vec::new();
    for b in cfg.budget..=cfg.max_budget.max(cfg.budget) {
        let u = if b == cfg.budget {
            None
        } else {
            Some(Universe::new(&atoms, b, cfg.completeness))
        };
        let u = u.as_ref().unwrap_or(&target_u);
        let s = saturate(p, u, &cfg.rules, cfg.max_rounds);
        let extra = s.set.difference(&truth_set(&cert, u)?);
        unsound.extend(extra);
        missing = target.difference(&s.set);
        escalation.push(EscalationStep {
            budget: b,
            rounds: s.rounds,
            universe: u.len(),
            missing: missing.len(),
        });
        if missing.is_empty() {
            complete_at = Some(b);
            break;
        }
    }
    unsound.sort();
    unsound.dedup();
    Ok(LemmaReport {
        budget: cfg.budget,
        universe: full.len(),
        derived: sat.set.len(),
        true_formulas: truth.len(),
        closed_world: sat.set.closed_world,
        sound: unsound.is_empty(),
        unsound,
        completeness: cfg.completeness,
        complete_within_budget: escalation.first().is_some_and(|s| s.missing == 0),
        missing,
        escalation,
        complete_at,
        certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn set(lines: &[&str]) -> FormulaSet {
        FormulaSet::new(lines.iter().map(|s| f(s)))
    }

    #[test]
    fn certificates() {
        let c = is_good(&set(&["(def aA)"])).unwrap();
        assert_eq!((c.q, c.g[&Name::new("aA")]), (1, 0));
        let c = is_good(&set(&["(def aA)", "(def aB)", "(mem aB aA)"])).unwrap();
        assert_eq!(c.q, 2);
        assert_eq!((c.g[&Name::new("aB")], c.g[&Name::new("aA")]), (0, 1));
        assert_eq!(is_good(&set(&["(mem aA aA)"])), None);
        assert_eq!(is_good(&set(&["(def aA)", "(mem aA aA)"])), None);
        assert_eq!(is_good(&set(&["(def aA)", "(def aB)", "(mem aA aB)", "(mem aB aA)"])), None);
        assert_eq!(is_good(&FormulaSet::default()).map(|c| c.q), Some(0));
    }

    #[test]
    fn gapped_order_is_not_good() {
        // g(aC) would be {1}, which is not an ordinal.
        let p = set(&["(def aA)", "(def aB)", "(def aC)", "(mem aA aB)", "(mem aB aC)"]);
        assert_eq!(is_good(&p), None);
        let p = set(&["(def aA)", "(def aB)", "(def aC)", "(mem aA aB)", "(mem aB aC)", "(mem aA aC)"]);
        assert_eq!(is_good(&p).unwrap().q, 3);
    }

    #[test]
    fn vacuous_universal_then_equality() {
        let p = set(&["(def aA)"]);
        let u = Universe::new(&atom_names(1), 2, Fragment::Full);
        let one = t_step(&p, &u, &Rules::all());
        assert!(one.contains(&f("(forall-ord b aA (mem b aA))")));
        assert!(!one.contains(&f("(eq aA aA)")));
        let two = t_step(&one, &u, &Rules::all());
        assert!(two.contains(&f("(eq aA aA)")));
        let s = saturate(&p, &u, &Rules::all(), 100);
        assert!(s.set.closed_world);
        assert!(s.set.contains(&f("(eq aA aA)")));
    }

    #[test]
    fn equality_from_inclusions() {
        let p = set(&["(forall-ord b aA (mem b aB))", "(forall-ord b aB (mem b aA))"]);
        let u = Universe::new(&atom_names(2), 1, Fragment::Full);
        assert!(t_step(&p, &u, &Rules::all()).contains(&f("(eq aA aB)")));
    }

    #[test]
    fn disjunction_with_every_budgeted_formula() {
        let p = set(&["(mem aA aB)"]);
        let u = Universe::new(&atom_names(2), 3, Fragment::Full);
        let next = t_step(&p, &u, &Rules::all());
        let qs = u.formulas().iter().filter(|q| ops::node_count(q) == 1);
        for q in qs {
            assert!(next.contains(&Formula::or(f("(mem aA aB)"), q.clone())), "{q}");
        }
    }

    #[test]
    fn empty_set_is_a_fixpoint() {
        let u = Universe::new(&atom_names(1), 3, Fragment::Full);
        let s = saturate(&FormulaSet::default(), &u, &Rules::all(), 10);
        assert!(s.set.is_empty());
        assert!(s.set.closed_world);
    }

    #[test]
    fn truth_set_examples() {
        let cert = is_good(&set(&["(def aA)"])).unwrap();
        let t = truth_set(&cert, &Universe::new(&atom_names(1), 2, Fragment::Full)).unwrap();
        assert!(t.contains(&f("(eq aA aA)")));
        assert!(!t.contains(&f("(mem aA aA)")));
        let cert = is_good(&set(&["(def aA)", "(def aB)", "(mem aB aA)"])).unwrap();
        let t = truth_set(&cert, &Universe::new(&atom_names(2), 1, Fragment::Full)).unwrap();
        assert!(t.contains(&f("(mem aB aA)")));
        assert!(!t.contains(&f("(mem aA aB)")));
    }

    #[test]
    fn one_atom_is_sound() {
        let r = lemmagood_compare(&set(&["(def aA)"]), &LemmaConfig::new(3)).unwrap();
        assert!(r.sound, "{:?}", r.unsound);
        assert!(r.closed_world);
    }

    #[test]
    fn corrupted_conjunction_is_caught() {
        let mut cfg = LemmaConfig::new(3);
        cfg.rules = Rules::corrupted();
        let r = lemmagood_compare(&set(&["(def aA)", "(def aB)", "(mem aB aA)"]), &cfg).unwrap();
        assert!(!r.sound);
        assert!(!r.unsound.is_empty());
    }

    #[test]
    fn top_extension_raises_q() {
        let p = set(&["(def aA)", "(def aB)", "(mem aB aA)"]);
        let r = extend_top(&p, &Name::new("aC"));
        assert_eq!(is_good(&r).unwrap().q, 3);
        let u = Universe::new(&atom_names(3), 2, Fragment::Ordinal);
        let s = saturate(&r, &u, &Rules::all(), 64);
        assert_eq!(is_good(&s.set.atom_facts()).unwrap().q, 3);
    }
}
