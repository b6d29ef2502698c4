//! Random instances of every rule schema, with inputs biased towards
//! sequents that actually hold.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::axiom::{apply, soundness_probe, ProbeOutcome, Rule, Sampler, Sequent};
use crate::eval::EvalError;
use crate::gen::{self, GenConfig, Rng8};
use crate::syntax::ast::*;

/// `(rule, schema)` for every schema; `schema` is empty for rules without
/// a family.
pub const SCHEMAS: &[(Rule, &str)] = &[
    (Rule::Reflexivity, ""),
    (Rule::ModusPonens, ""),
    (Rule::Generalization, ""),
    (Rule::OrElimination, ""),
    (Rule::Definedness, "var"),
    (Rule::Definedness, "mem"),
    (Rule::Definedness, "eq"),
    (Rule::Definedness, "def"),
    (Rule::Definedness, "not"),
    (Rule::Definedness, "and"),
    (Rule::Definedness, "or"),
    (Rule::Definedness, "forall"),
    (Rule::Definedness, "exists"),
    (Rule::Definedness, "sep"),
    (Rule::Definedness, "L"),
    (Rule::Propositional, "K"),
    (Rule::Propositional, "S"),
    (Rule::Propositional, "contraposition"),
    (Rule::Propositional, "contraposition-converse"),
    (Rule::Propositional, "double-negation"),
    (Rule::Propositional, "mp-implication"),
    (Rule::Predicate, "bounded-elim"),
    (Rule::Predicate, "instance"),
    (Rule::Separation, ""),
    (Rule::Lstage, "elements-from-below"),
    (Rule::Lstage, "lower-stages-included"),
    (Rule::Min, ""),
    (Rule::Transitivity, ""),
    (Rule::Extensionality, ""),
];

/// A schema instance: its instantiation, inputs and the sequent it yields.
#[derive(Debug, Clone)]
pub struct Instance {
    pub inst: crate::axiom::Instantiation,
    pub inputs: Vec<Sequent>,
    pub output: Sequent,
}

struct G<'a> {
    rng: &'a mut Rng8,
}

fn cfg(nodes: usize, set_vars: Vec<&'static str>, ord_vars: Vec<&'static str>) -> GenConfig {
    GenConfig {
        max_nodes: nodes,
        max_min_depth: 1,
        allow_fix: false,
        closed: false,
        set_vars,
        ord_vars,
    }
}

impl G<'_> {
    fn formula_in(&mut self, set_vars: Vec<&'static str>, ord_vars: Vec<&'static str>) -> Formula {
        let n = self.rng.gen_range(1..=5);
        gen::formula(self.rng, &cfg(n, set_vars, ord_vars))
    }

    fn formula(&mut self) -> Formula {
        self.formula_in(vec!["x", "y"], vec!["a", "b"])
    }

    /// A formula mentioning the generalization variable `v`.
    fn formula_with(&mut self, v: &'static str) -> Formula {
        if v == "z" {
            self.formula_in(vec!["x", "z"], vec!["a"])
        } else {
            self.formula_in(vec!["x"], vec!["a", "c"])
        }
    }

    fn atom(&mut self) -> Formula {
        let vars = ["x", "y", "a", "b"];
        let l = Term::var(vars.choose(self.rng).unwrap());
        let r = Term::var(vars.choose(self.rng).unwrap());
        if self.rng.gen_bool(0.5) {
            Formula::mem(l, r)
        } else {
            Formula::eq(l, r)
        }
    }

    fn set_term(&mut self) -> SetTerm {
        if self.rng.gen_bool(0.3) {
            return SetTerm::var(["x", "y"].choose(self.rng).unwrap());
        }
        let n = self.rng.gen_range(1..=4);
        gen::set_term(self.rng, &cfg(n, vec!["x", "y"], vec!["a", "b"]))
    }

    fn ord_term(&mut self) -> OrdTerm {
        if self.rng.gen_bool(0.3) {
            return OrdTerm::var(["a", "b"].choose(self.rng).unwrap());
        }
        let n = self.rng.gen_range(1..=4);
        gen::ord_term(self.rng, &cfg(n, vec!["x", "y"], vec!["a", "b"]))
    }

    fn term(&mut self, sort: Sort) -> Term {
        match sort {
            Sort::Set => Term::Set(self.set_term()),
            Sort::Ord => Term::Ord(self.ord_term()),
        }
    }

    fn context(&mut self) -> Vec<Formula> {
        let k = self.rng.gen_range(0..=2);
        (0..k).map(|_| self.formula()).collect()
    }

    /// A conclusion likely to follow from `ctx`.
    fn consequence(&mut self, ctx: &[Formula]) -> Formula {
        match self.rng.gen_range(0..5) {
            0 if !ctx.is_empty() => ctx.choose(self.rng).unwrap().clone(),
            1 if !ctx.is_empty() => {
                let g = ctx.choose(self.rng).unwrap().clone();
                let r = self.formula();
                Formula::or(g, r)
            }
            2 => Formula::down(self.atom()),
            3 => {
                let v = Term::var(["x", "y", "a", "b"].choose(self.rng).unwrap());
                Formula::eq(v.clone(), v)
            }
            _ => self.formula(),
        }
    }

    /// A term of the given sort, adding its definedness to `ctx` at random.
    fn defined_term(&mut self, sort: Sort, ctx: &mut Vec<Formula>) -> Term {
        let t = self.term(sort);
        if t.as_var().is_none() && self.rng.gen_bool(0.6) {
            ctx.push(Formula::Defined(t.clone()));
        }
        t
    }
}

fn seq(ctx: &[Formula], extra: Option<&Formula>, concl: Formula) -> Sequent {
    let mut p = ctx.to_vec();
    p.extend(extra.cloned());
    Sequent::new(p, concl)
}

/// One random candidate instance of `(rule, schema)`; `None` when the
/// drawn pieces do not fit the schema.
pub fn candidate(rule: Rule, schema: &str, rng: &mut Rng8) -> Option<Instance> {
    let mut g = G { rng };
    let mut inst = crate::axiom::Instantiation::new();
    let mut put = |k: &str, v: String| {
        inst.insert(k.to_string(), v);
    };
    if !schema.is_empty() {
        put("schema", schema.to_string());
    }
    let mut inputs = Vec::new();
    match (rule, schema) {
        (Rule::Reflexivity, _) => put("P", g_formula(&mut g).to_string()),
        (Rule::ModusPonens, _) => {
            let ctx = g.context();
            let a = g.consequence(&ctx);
            let mut wider = ctx.clone();
            wider.push(a.clone());
            let b = g.consequence(&wider);
            inputs.push(seq(&ctx, None, a.clone()));
            inputs.push(seq(&ctx, Some(&a), b));
        }
        (Rule::Generalization, _) => {
            let v = *["z", "c"].choose(g.rng).unwrap();
            let mut ctx = g.context();
            let bound = g.defined_term(Name::new(v).sort(), &mut ctx);
            let p = match g.rng.gen_range(0..3) {
                0 => {
                    let t = Term::var(v);
                    Formula::eq(t.clone(), t)
                }
                1 => Formula::down(Formula::mem(Term::var(v), Term::var("x"))),
                _ => g.formula_with(v),
            };
            put("x", v.to_string());
            inputs.push(seq(&ctx, None, p));
            inputs.push(seq(&ctx, None, Formula::Defined(bound)));
        }
        (Rule::OrElimination, _) => {
            let ctx = g.context();
            let q1 = g.formula();
            let q2 = if g.rng.gen_bool(0.5) { Formula::not(q1.clone()) } else { g.formula() };
            let d = seq(&ctx, None, Formula::or(q1.clone(), q2.clone()));
            let c = if g.rng.gen_bool(0.5) { Formula::or(q1.clone(), q2.clone()) } else { g.consequence(&ctx) };
            inputs.push(seq(&ctx, Some(&q1), c.clone()));
            inputs.push(seq(&ctx, Some(&q2), c));
            inputs.push(d);
        }
        (Rule::Definedness, "var") => put("x", ["x", "y", "a", "b"].choose(g.rng).unwrap().to_string()),
        (Rule::Definedness, "mem" | "eq") => {
            let mut ctx = g.context();
            let s1 = *[Sort::Set, Sort::Ord].choose(g.rng).unwrap();
            let s2 = *[Sort::Set, Sort::Ord].choose(g.rng).unwrap();
            let t1 = g.defined_term(s1, &mut ctx);
            let t2 = g.defined_term(s2, &mut ctx);
            inputs.push(seq(&ctx, None, Formula::Defined(t1)));
            inputs.push(seq(&ctx, None, Formula::Defined(t2)));
        }
        (Rule::Definedness, "def" | "L") => {
            let mut ctx = g.context();
            let sort = if schema == "L" { Sort::Ord } else { *[Sort::Set, Sort::Ord].choose(g.rng).unwrap() };
            let t = g.defined_term(sort, &mut ctx);
            inputs.push(seq(&ctx, None, Formula::Defined(t)));
        }
        (Rule::Definedness, "not") => {
            let ctx = g.context();
            let p = if g.rng.gen_bool(0.5) { g.atom() } else { g.formula() };
            inputs.push(seq(&ctx, None, Formula::down(p)));
        }
        (Rule::Definedness, "and" | "or") => {
            let ctx = g.context();
            let p = if g.rng.gen_bool(0.5) { g.atom() } else { g.formula() };
            let q = if g.rng.gen_bool(0.5) { g.atom() } else { g.formula() };
            inputs.push(seq(&ctx, None, Formula::down(p)));
            inputs.push(seq(&ctx, None, Formula::down(q)));
        }
        (Rule::Definedness, "forall" | "exists" | "sep") => {
            let v = if schema == "sep" { "z" } else { *["z", "c"].choose(g.rng).unwrap() };
            let mut ctx = g.context();
            let bound = g.defined_term(Name::new(v).sort(), &mut ctx);
            let p = if g.rng.gen_bool(0.5) {
                Formula::mem(Term::var(v), Term::var("x"))
            } else {
                g.formula_with(v)
            };
            let within = Formula::mem(Term::var(v), bound.clone());
            put("x", v.to_string());
            inputs.push(seq(&ctx, None, Formula::Defined(bound)));
            inputs.push(seq(&ctx, Some(&within), Formula::down(p)));
        }
        (Rule::Propositional, _) => {
            for k in ["P", "Q", "R"] {
                let f = g_formula(&mut g);
                put(k, f.to_string());
            }
        }
        (Rule::Predicate, "bounded-elim") => {
            let v = *["z", "c"].choose(g.rng).unwrap();
            let sort = Name::new(v).sort();
            let (xs, y) = (g.term(sort), g.term(sort));
            put("x", v.to_string());
            put("X", xs.to_string());
            put("Y", y.to_string());
            put("P", g.formula_with(v).to_string());
        }
        (Rule::Predicate, "instance") => {
            let v = *["z", "c"].choose(g.rng).unwrap();
            let mut ctx = g.context();
            let xs = g.defined_term(Name::new(v).sort(), &mut ctx);
            let p = match g.rng.gen_range(0..3) {
                0 => {
                    let t = Term::var(v);
                    Formula::eq(t.clone(), t)
                }
                1 => Formula::down(Formula::eq(Term::var(v), Term::var("x"))),
                _ => g.formula_with(v),
            };
            put("x", v.to_string());
            put("X", xs.to_string());
            inputs.push(seq(&ctx, None, p));
            inputs.push(seq(&ctx, None, Formula::Defined(xs)));
        }
        (Rule::Separation, _) => {
            put("x", "z".to_string());
            put("X", g.set_term().to_string());
            put("Y", g.set_term().to_string());
            put("P", g.formula_with("z").to_string());
        }
        (Rule::Lstage, _) => put("A", g.ord_term().to_string()),
        (Rule::Min, _) => {
            put("alpha", "c".to_string());
            put("P", g.formula_with("c").to_string());
            put("A", g.ord_term().to_string());
        }
        (Rule::Transitivity, _) => {
            for k in ["alpha", "beta", "gamma"] {
                let t = g.ord_term();
                put(k, t.to_string());
            }
        }
        (Rule::Extensionality, _) => {
            for k in ["x", "y"] {
                let t = g.set_term();
                put(k, t.to_string());
            }
        }
        _ => return None,
    }
    let refs: Vec<&Sequent> = inputs.iter().collect();
    let output = apply(rule, &inst, &refs).ok()?;
    Some(Instance { inst, inputs, output })
}

fn g_formula(g: &mut G) -> Formula {
    if g.rng.gen_bool(0.2) {
        g.atom()
    } else {
        g.formula()
    }
}

fn holds(s: &Sequent, n: u32, sampler: &Sampler) -> Result<bool, EvalError> {
    Ok(soundness_probe(s, n, sampler)?.holds())
}

/// Outcome of probing one instance at stages `0..=4`.
#[derive(Debug, Clone)]
pub enum Verdict {
    /// Inputs fail at stage 3; the instance is not counted.
    Vacuous,
    /// Stages at which the inputs held and the output was probed.
    Sound(Vec<u32>),
    Counterexample { stage: u32, output: Sequent, detail: String },
}

pub fn probe_instance(inst: &Instance) -> Result<Verdict, EvalError> {
    let sampler = Sampler::default();
    for s in &inst.inputs {
        if !holds(s, 3, &Sampler::exhaustive())? {
            return Ok(Verdict::Vacuous);
        }
    }
    let mut probed = Vec::new();
    for n in 0..=4 {
        let pick = if n <= 3 { Sampler::exhaustive() } else { sampler };
        let mut inputs_hold = true;
        for s in &inst.inputs {
            if !holds(s, n, &pick)? {
                inputs_hold = false;
                break;
            }
        }
        if !inputs_hold {
            continue;
        }
        match soundness_probe(&inst.output, n, &pick)? {
            ProbeOutcome::Holds { .. } => probed.push(n),
            ProbeOutcome::Counterexample(env) => {
                // A sampled pass on the inputs is not proof that they hold.
                let mut genuine = true;
                for s in &inst.inputs {
                    if !holds(s, n, &Sampler::exhaustive())? {
                        genuine = false;
                    }
                }
                if genuine {
                    return Ok(Verdict::Counterexample {
                        stage: n,
                        output: inst.output.clone(),
                        detail: format!("{env:?}"),
                    });
                }
            }
        }
    }
    Ok(Verdict::Sound(probed))
}
