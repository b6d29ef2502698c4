//! Kripke–Platek axioms checked in the finite models `V_n`.
//!
//! Single sentences are decided by relativizing them to a model variable
//! and running the evaluator; a direct search supplies the witness. Schemas
//! range over Δ0 formulas up to a size budget. Formulas with the same truth
//! table over `V_n` yield the same instances, so the schema checks run over
//! distinct truth tables, each carrying a smallest formula that realizes it.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::eval::{eval_formula, Env, EvalError, Truth3};
use crate::hf::{stage_elements, stage_set, tuples, HFSet, HfError};
use crate::syntax::st::{holds, relativize, St, StEnv};

pub const MAX_KP_STAGE: u32 = 4;

/// Default cap on truth-table bits held by [`delta0_relations`] (128 MiB).
pub const DEFAULT_CELL_LIMIT: usize = 1 << 30;

#[derive(Debug, Error)]
pub enum KpError {
    #[error("stage {0} exceeds {MAX_KP_STAGE}")]
    Stage(u32),
    #[error("instance budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Hf(#[from] HfError),
    #[error("relativized check disagrees with direct check on {0}")]
    Disagreement(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum KpAxiom {
    Extensionality,
    #[serde(rename = "set-induction-Δ0")]
    SetInduction,
    Empty,
    Pairing,
    Union,
    #[serde(rename = "Δ0-separation")]
    Separation,
    #[serde(rename = "Δ0-collection")]
    Collection,
    #[serde(rename = "Δ0-collection-v2")]
    CollectionV2,
    Infinity,
}

impl KpAxiom {
    pub const ALL: [KpAxiom; 9] = [
        KpAxiom::Extensionality,
        KpAxiom::SetInduction,
        KpAxiom::Empty,
        KpAxiom::Pairing,
        KpAxiom::Union,
        KpAxiom::Separation,
        KpAxiom::Collection,
        KpAxiom::CollectionV2,
        KpAxiom::Infinity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KpAxiom::Extensionality => "extensionality",
            KpAxiom::SetInduction => "set-induction-Δ0",
            KpAxiom::Empty => "empty",
            KpAxiom::Pairing => "pairing",
            KpAxiom::Union => "union",
            KpAxiom::Separation => "Δ0-separation",
            KpAxiom::Collection => "Δ0-collection",
            KpAxiom::CollectionV2 => "Δ0-collection-v2",
            KpAxiom::Infinity => "infinity",
        }
    }

    pub fn parse(s: &str) -> Option<KpAxiom> {
        let s = s.replace("Δ0", "delta0");
        KpAxiom::ALL.into_iter().find(|a| a.name().replace("Δ0", "delta0") == s)
    }

    pub fn is_schema(self) -> bool {
        matches!(
            self,
            KpAxiom::SetInduction | KpAxiom::Separation | KpAxiom::Collection | KpAxiom::CollectionV2
        )
    }
}

impl fmt::Display for KpAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bounds for schema instances: Δ0 formulas with at most `max_size`
/// constructors and `params` parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KpBudget {
    pub max_size: usize,
    pub params: usize,
    #[serde(skip)]
    pub cell_limit: usize,
}

impl KpBudget {
    pub fn new(max_size: usize) -> Self {
        KpBudget {
            max_size,
            params: 1,
            cell_limit: DEFAULT_CELL_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KpReport {
    pub axiom: KpAxiom,
    pub stage: u32,
    pub holds: bool,
    /// Distinct truth tables examined (schemas only).
    pub relations: usize,
    pub instances: u64,
    /// A failing instance: the predicate (for schemas) and the assignment.
    pub witness: Option<Vec<(String, String)>>,
}

// ---------------------------------------------------------------------------
// Truth tables of Δ0 formulas

/// A truth table over `V_n^k`, indexed by `Σ code(a_i)·N^i`.
#[derive(Debug, Clone)]
pub struct Relation {
    pub formula: St,
    bits: Arc<[u64]>,
}

impl Relation {
    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }
}

struct Dp<'a> {
    n_elems: usize,
    children: Vec<Vec<usize>>,
    mem: Vec<Vec<bool>>,
    free: &'a [&'a str],
    /// `levels[k][s]`: tables at scope `k` whose smallest formula has size `s`.
    levels: HashMap<usize, Vec<Vec<Arc<Relation>>>>,
    seen: HashMap<usize, HashSet<Arc<[u64]>>>,
    cells: usize,
    limit: usize,
}

impl<'a> Dp<'a> {
    fn name(&self, i: usize) -> String {
        if i < self.free.len() {
            self.free[i].to_string()
        } else {
            format!("q{}", i - self.free.len())
        }
    }

    fn len(&self, k: usize) -> usize {
        self.n_elems.pow(k as u32)
    }

    fn table(&self, k: usize, f: impl Fn(usize) -> bool) -> Vec<u64> {
        let len = self.len(k);
        let mut bits = vec![0u64; len.div_ceil(64)];
        for idx in 0..len {
            if f(idx) {
                bits[idx / 64] |= 1 << (idx % 64);
            }
        }
        bits
    }

    fn digit(&self, idx: usize, i: usize) -> usize {
        idx / self.n_elems.pow(i as u32) % self.n_elems
    }

    fn level(&mut self, k: usize, s: usize) -> Result<Vec<Arc<Relation>>, KpError> {
        while self.levels.get(&k).map_or(0, Vec::len) <= s {
            let next = self.levels.get(&k).map_or(0, Vec::len);
            self.build(k, next)?;
        }
        Ok(self.levels[&k][s].clone())
    }

    fn build(&mut self, k: usize, s: usize) -> Result<(), KpError> {
        // Lower levels first; building them may recurse into this scope.
        let (prev, pairs, bodies) = if s > 1 {
            let prev = self.level(k, s - 1)?;
            let mut pairs = Vec::new();
            for l in 1..s - 1 {
                pairs.push((self.level(k, l)?, self.level(k, s - 1 - l)?));
            }
            let bodies = if k > 0 { self.level(k + 1, s - 1)? } else { Vec::new() };
            (prev, pairs, bodies)
        } else {
            Default::default()
        };
        let mut seen = self.seen.remove(&k).unwrap_or_default();
        let mut level = Vec::new();
        let mut cells = self.cells;
        let limit = self.limit;
        let mut offer = |bits: Vec<u64>, formula: &dyn Fn() -> St| -> Result<(), KpError> {
            if seen.contains(bits.as_slice()) {
                return Ok(());
            }
            cells += bits.len() * 64;
            if cells > limit {
                return Err(KpError::Budget(format!("truth tables exceed {limit} bits at scope {k}, size {s}")));
            }
            let bits: Arc<[u64]> = bits.into();
            seen.insert(bits.clone());
            level.push(Arc::new(Relation { formula: formula(), bits }));
            Ok(())
        };
        if s == 1 {
            for i in 0..k {
                for j in 0..k {
                    let t = self.table(k, |idx| self.mem[self.digit(idx, i)][self.digit(idx, j)]);
                    offer(t, &|| St::mem(&self.name(i), &self.name(j)))?;
                }
            }
            for i in 0..k {
                for j in i + 1..k {
                    let t = self.table(k, |idx| self.digit(idx, i) == self.digit(idx, j));
                    offer(t, &|| St::eq(&self.name(i), &self.name(j)))?;
                }
            }
        } else if s > 1 {
            let len = self.len(k);
            for r in &prev {
                let bits = (0..r.bits.len())
                    .map(|w| {
                        let valid = if (w + 1) * 64 <= len { !0 } else { (1u64 << (len % 64)) - 1 };
                        !r.bits[w] & valid
                    })
                    .collect();
                offer(bits, &|| St::not(r.formula.clone()))?;
            }
            for (ls, rs) in &pairs {
                for a in ls {
                    for b in rs {
                        let and = a.bits.iter().zip(b.bits.iter()).map(|(x, y)| x & y).collect();
                        offer(and, &|| St::and(a.formula.clone(), b.formula.clone()))?;
                        let or = a.bits.iter().zip(b.bits.iter()).map(|(x, y)| x | y).collect();
                        offer(or, &|| St::or(a.formula.clone(), b.formula.clone()))?;
                    }
                }
            }
            let q = self.name(k);
            let stride = self.len(k);
            for body in &bodies {
                for b in 0..k {
                    let bname = self.name(b);
                    let scan = |all: bool| {
                        self.table(k, |idx| {
                            let kids = &self.children[self.digit(idx, b)];
                            if all {
                                kids.iter().all(|&c| body.get(idx + c * stride))
                            } else {
                                kids.iter().any(|&c| body.get(idx + c * stride))
                            }
                        })
                    };
                    offer(scan(true), &|| St::forall_in(&q, &bname, body.formula.clone()))?;
                    offer(scan(false), &|| St::exists_in(&q, &bname, body.formula.clone()))?;
                }
            }
        }
        self.cells = cells;
        self.seen.insert(k, seen);
        self.levels.entry(k).or_default().push(level);
        Ok(())
    }
}

/// The distinct truth tables over `V_n` of Δ0 formulas in the variables
/// `free` with at most `max_size` constructors, each with a smallest
/// formula realizing it, in order of that formula's size.
pub fn delta0_relations(
    free: &[&str],
    n: u32,
    max_size: usize,
    cell_limit: usize,
) -> Result<Vec<Relation>, KpError> {
    assert!(free.iter().all(|v| !v.starts_with('q')));
    let elems = stage_elements(n)?;
    let children = elems
        .iter()
        .map(|e| e.elements().iter().map(|c| c.code().map(|c| c as usize)).collect())
        .collect::<Result<_, _>>()?;
    let mem = elems.iter().map(|a| elems.iter().map(|b| b.contains(a)).collect()).collect();
    let mut dp = Dp {
        n_elems: elems.len(),
        children,
        mem,
        free,
        levels: HashMap::new(),
        seen: HashMap::new(),
        cells: 0,
        limit: cell_limit,
    };
    let mut out = Vec::new();
    for s in 1..=max_size {
        out.extend(dp.level(free.len(), s)?.iter().map(|r| (**r).clone()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Sentences

fn sentence(axiom: KpAxiom) -> St {
    let (m, e, o, a, i) = (St::mem, St::eq, St::or, St::and, St::iff);
    match axiom {
        KpAxiom::Extensionality => St::forall(
            "x",
            St::forall(
                "y",
                St::imp(St::forall("z", i(m("z", "x"), m("z", "y"))), e("x", "y")),
            ),
        ),
        KpAxiom::Empty => St::exists("x", St::forall("y", St::not(m("y", "x")))),
        KpAxiom::Pairing => St::forall(
            "x",
            St::forall(
                "y",
                St::exists("p", St::forall("z", i(m("z", "p"), o(e("z", "x"), e("z", "y"))))),
            ),
        ),
        KpAxiom::Union => St::forall(
            "x",
            St::exists(
                "u",
                St::forall("z", i(m("z", "u"), St::exists_in("y", "x", m("z", "y")))),
            ),
        ),
        KpAxiom::Infinity => {
            let empty_in = St::exists_in("v", "w", St::forall_in("y", "v", St::not(e("y", "y"))));
            let succ = a(
                m("y", "s"),
                a(
                    St::forall_in("t", "y", m("t", "s")),
                    St::forall_in("t", "s", o(m("t", "y"), e("t", "y"))),
                ),
            );
            let closed = St::forall_in("y", "w", St::exists_in("s", "w", succ));
            St::exists("w", a(empty_in, closed))
        }
        _ => unreachable!("schema"),
    }
}

/// Truth of a sentence with free set variables in `V_n`, decided by the
/// evaluator on its relativization.
fn relativized_truth(p: &St, assignment: &[(String, HFSet)], n: u32) -> Result<bool, KpError> {
    let f = relativize(p, "M");
    let mut env = Env::new().set("M", stage_set(n)?);
    for (v, x) in assignment {
        env = env.set(v, x.clone());
    }
    Ok(eval_formula(&f, &env, n + 1)? == Truth3::Top)
}

/// Descends the universal prefix of a false sentence, picking at each step
/// the first value (in descending code order) that keeps it false.
fn universal_counterexample(p: &St, env: &mut StEnv, model: &[HFSet]) -> Vec<(String, String)> {
    if let St::Forall(x, body) = p {
        for d in model.iter().rev() {
            env.push((x.clone(), d.clone()));
            if !holds(body, env, model) {
                let mut rest = universal_counterexample(body, env, model);
                env.pop();
                rest.insert(0, (x.clone(), d.to_string()));
                return rest;
            }
            env.pop();
        }
    }
    Vec::new()
}

fn check_sentence(axiom: KpAxiom, n: u32) -> Result<KpReport, KpError> {
    let p = sentence(axiom);
    let model = stage_elements(n)?;
    let direct = holds(&p, &mut Vec::new(), model);
    let relativized = relativized_truth(&p, &[], n)?;
    if direct != relativized {
        return Err(KpError::Disagreement(format!("{axiom} on V_{n}")));
    }
    let witness = (!direct).then(|| universal_counterexample(&p, &mut Vec::new(), model));
    Ok(KpReport {
        axiom,
        stage: n,
        holds: direct,
        relations: 0,
        instances: 1,
        witness,
    })
}

// ---------------------------------------------------------------------------
// Schemas

fn param_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("p{i}")).collect()
}

struct Failure {
    predicate: St,
    assignment: Vec<(String, HFSet)>,
    /// The failing instance as a sentence in the assignment's variables.
    instance: St,
}

fn check_schema(axiom: KpAxiom, n: u32, budget: KpBudget) -> Result<KpReport, KpError> {
    let elems = stage_elements(n)?;
    let nn = elems.len();
    let params = param_names(budget.params);
    let mut vars: Vec<&str> = match axiom {
        KpAxiom::SetInduction => vec!["x"],
        KpAxiom::Separation => vec!["y", "x"],
        KpAxiom::Collection => vec!["x", "y"],
        KpAxiom::CollectionV2 => vec!["x", "u"],
        _ => unreachable!(),
    };
    vars.extend(params.iter().map(String::as_str));
    let rels = delta0_relations(&vars, n, budget.max_size, budget.cell_limit)?;
    let ptuples = tuples(elems, budget.params);
    let code = |x: &HFSet| x.code().expect("stage element") as usize;
    // Index of an assignment to `vars`, given values for the first slots and
    // the parameter tuple.
    let index = |lead: &[usize], p: &[HFSet]| {
        let mut idx = 0;
        let mut scale = 1;
        for &c in lead {
            idx += c * scale;
            scale *= nn;
        }
        for x in p {
            idx += code(x) * scale;
            scale *= nn;
        }
        idx
    };
    let mut instances = 0u64;
    let mut failure = None;
    'search: for r in &rels {
        for p in &ptuples {
            let bind = |extra: Vec<(&str, HFSet)>| {
                let mut a: Vec<(String, HFSet)> = extra.into_iter().map(|(v, x)| (v.to_string(), x)).collect();
                a.extend(params.iter().cloned().zip(p.iter().cloned()));
                a
            };
            match axiom {
                KpAxiom::SetInduction => {
                    instances += 1;
                    // Least set closed under "all members are in S" is V_n.
                    let s: Vec<bool> = elems.iter().map(|x| r.get(index(&[code(x)], p))).collect();
                    let progressive = elems
                        .iter()
                        .all(|x| !x.elements().iter().all(|y| s[code(y)]) || s[code(x)]);
                    if progressive && !s.iter().all(|&b| b) {
                        let pred = rename(&r.formula, "x", "y");
                        let inst = St::imp(
                            St::forall("x", St::imp(St::forall_in("y", "x", pred), r.formula.clone())),
                            St::forall("x", r.formula.clone()),
                        );
                        failure = Some(Failure {
                            predicate: r.formula.clone(),
                            assignment: bind(vec![]),
                            instance: inst,
                        });
                        break 'search;
                    }
                }
                KpAxiom::Separation => {
                    for x in elems {
                        instances += 1;
                        let s = HFSet::from_elements(
                            x.elements().iter().filter(|y| r.get(index(&[code(y), code(x)], p))).cloned(),
                        );
                        if !s.in_stage(n) {
                            let inst = St::exists(
                                "s",
                                St::forall(
                                    "y",
                                    St::iff(St::mem("y", "s"), St::and(St::mem("y", "x"), r.formula.clone())),
                                ),
                            );
                            failure = Some(Failure {
                                predicate: r.formula.clone(),
                                assignment: bind(vec![("x", x.clone())]),
                                instance: inst,
                            });
                            break 'search;
                        }
                    }
                }
                KpAxiom::Collection => {
                    let rel = |x: &HFSet, y: &HFSet| r.get(index(&[code(x), code(y)], p));
                    for z in elems {
                        instances += 1;
                        let total = z.elements().iter().all(|x| elems.iter().any(|y| rel(x, y)));
                        let bounded = || {
                            elems
                                .iter()
                                .any(|w| z.elements().iter().all(|x| w.elements().iter().any(|y| rel(x, y))))
                        };
                        if total && !bounded() {
                            let inst = St::imp(
                                St::forall_in("x", "z", St::exists("y", r.formula.clone())),
                                St::exists(
                                    "w",
                                    St::forall_in("x", "z", St::exists_in("y", "w", r.formula.clone())),
                                ),
                            );
                            failure = Some(Failure {
                                predicate: r.formula.clone(),
                                assignment: bind(vec![("z", z.clone())]),
                                instance: inst,
                            });
                            break 'search;
                        }
                    }
                }
                KpAxiom::CollectionV2 => {
                    let ords: Vec<HFSet> = (0..n).map(HFSet::ordinal).collect();
                    let rel = |x: &HFSet, b: &HFSet| r.get(index(&[code(x), code(b)], p));
                    for alpha in 0..n {
                        instances += 1;
                        let stage = stage_elements(alpha)?;
                        let total = stage.iter().all(|x| ords.iter().any(|b| rel(x, b)));
                        let bounded = || {
                            ords.iter()
                                .any(|g| stage.iter().all(|x| g.elements().iter().any(|b| rel(x, b))))
                        };
                        if total && !bounded() {
                            // `l` is L_α and `o` the ordinals below n.
                            let inst = St::imp(
                                St::forall_in("x", "l", St::exists_in("u", "o", r.formula.clone())),
                                St::exists_in(
                                    "k",
                                    "o",
                                    St::forall_in("x", "l", St::exists_in("u", "k", r.formula.clone())),
                                ),
                            );
                            failure = Some(Failure {
                                predicate: r.formula.clone(),
                                assignment: bind(vec![
                                    ("l", stage_set(alpha)?),
                                    ("o", HFSet::ordinal(n)),
                                ]),
                                instance: inst,
                            });
                            break 'search;
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    if let Some(f) = &failure {
        if relativized_truth(&f.instance, &f.assignment, n)? {
            return Err(KpError::Disagreement(format!("{axiom} instance {}", f.instance)));
        }
    }
    let mut holds = failure.is_none();
    if axiom == KpAxiom::Separation && holds {
        // Every subset of a member of V_n, definable or not, is a member.
        holds = elems.iter().all(|x| x.powerset().iter().all(|s| s.in_stage(n)));
    }
    Ok(KpReport {
        axiom,
        stage: n,
        holds,
        relations: rels.len(),
        instances,
        witness: failure.map(|f| {
            let mut w = vec![("predicate".to_string(), f.predicate.to_string())];
            w.extend(f.assignment.into_iter().map(|(v, x)| (v, x.to_string())));
            w
        }),
    })
}

/// Renames free occurrences of `from` to `to`, which must not be bound in `p`.
fn rename(p: &St, from: &str, to: &str) -> St {
    let r = |v: &String| if v == from { to.to_string() } else { v.clone() };
    match p {
        St::Mem(a, b) => St::Mem(r(a), r(b)),
        St::Eq(a, b) => St::Eq(r(a), r(b)),
        St::And(x, y) => St::and(rename(x, from, to), rename(y, from, to)),
        St::Or(x, y) => St::or(rename(x, from, to), rename(y, from, to)),
        St::Imp(x, y) => St::imp(rename(x, from, to), rename(y, from, to)),
        St::Iff(x, y) => St::iff(rename(x, from, to), rename(y, from, to)),
        St::Not(x) => St::not(rename(x, from, to)),
        St::Forall(v, x) | St::Exists(v, x) if v == from => p.clone(),
        St::Forall(v, x) => St::Forall(v.clone(), Box::new(rename(x, from, to))),
        St::Exists(v, x) => St::Exists(v.clone(), Box::new(rename(x, from, to))),
        St::ForallIn(v, b, x) if v == from => St::ForallIn(v.clone(), r(b), x.clone()),
        St::ExistsIn(v, b, x) if v == from => St::ExistsIn(v.clone(), r(b), x.clone()),
        St::ForallIn(v, b, x) => St::ForallIn(v.clone(), r(b), Box::new(rename(x, from, to))),
        St::ExistsIn(v, b, x) => St::ExistsIn(v.clone(), r(b), Box::new(rename(x, from, to))),
    }
}

/// Decides `axiom` in `V_n`. Schemas range over Δ0 predicates within
/// `budget`; sentences ignore it.
pub fn kp_check(axiom: KpAxiom, n: u32, budget: KpBudget) -> Result<KpReport, KpError> {
    if n > MAX_KP_STAGE {
        return Err(KpError::Stage(n));
    }
    if axiom.is_schema() {
        check_schema(axiom, n, budget)
    } else {
        check_sentence(axiom, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_witness_at_three() {
        let r = kp_check(KpAxiom::Pairing, 3, KpBudget::new(1)).unwrap();
        assert!(!r.holds);
        let w = r.witness.unwrap();
        assert_eq!(w[0], ("x".to_string(), "{{},{{}}}".to_string()));
        assert_eq!(w[1], ("y".to_string(), "{{},{{}}}".to_string()));
    }

    #[test]
    fn infinity_always_fails() {
        for n in 0..=4 {
            assert!(!kp_check(KpAxiom::Infinity, n, KpBudget::new(1)).unwrap().holds);
        }
    }

    #[test]
    fn empty_fails_only_at_zero() {
        for n in 0..=4 {
            assert_eq!(kp_check(KpAxiom::Empty, n, KpBudget::new(1)).unwrap().holds, n > 0);
        }
    }

    #[test]
    fn collection_fails_from_two() {
        for n in 0..=3 {
            for ax in [KpAxiom::Collection, KpAxiom::CollectionV2] {
                let r = kp_check(ax, n, KpBudget::new(2)).unwrap();
                assert_eq!(r.holds, n < 2, "{ax} at {n}");
            }
        }
    }

    #[test]
    fn relation_count_matches_enumeration() {
        use crate::syntax::st::enumerate_delta0;
        let vars = ["y", "p0"];
        let elems = stage_elements(2).unwrap();
        let mut tables = HashSet::new();
        for f in enumerate_delta0(&vars, 3) {
            let mut row = Vec::new();
            for p in elems {
                for y in elems {
                    let mut env = vec![("y".to_string(), y.clone()), ("p0".to_string(), p.clone())];
                    row.push(holds(&f, &mut env, elems));
                }
            }
            tables.insert(row);
        }
        let rels = delta0_relations(&vars, 2, 3, DEFAULT_CELL_LIMIT).unwrap();
        assert_eq!(rels.len(), tables.len());
    }
}
