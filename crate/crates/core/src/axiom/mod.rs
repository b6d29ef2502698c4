//! Sequents, rule checking and semantic probes for the axiomatization.
//!
//! A proof is a list of steps, each naming a rule, the earlier steps it
//! consumes, the metavariable instantiation it used, and the sequent it
//! produces. Checking rebuilds the sequent the rule yields under that
//! instantiation and compares up to alpha-equivalence, with premise lists
//! compared as sets. Rules without inputs are axioms and may be weakened by
//! extra premises.

pub mod kp;
pub mod probe;
pub mod rules;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::ast::{Expr, Formula};
use crate::syntax::ops;
use crate::syntax::{desugar, Dialect};

pub use probe::{soundness_probe, ProbeOutcome, Sampler};
pub use rules::apply;

/// `P1, ..., Pk ⇒ Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequent {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl Sequent {
    pub fn new(premises: Vec<Formula>, conclusion: Formula) -> Self {
        Sequent { premises, conclusion }
    }

    pub fn axiom(conclusion: Formula) -> Self {
        Sequent::new(Vec::new(), conclusion)
    }

    pub fn premise_set(&self) -> HashSet<Formula> {
        self.premises.iter().map(ops::canonical).collect()
    }

    /// Same premise set and alpha-equivalent conclusion.
    pub fn equivalent(&self, other: &Sequent) -> bool {
        self.premise_set() == other.premise_set() && ops::alpha_eq(&self.conclusion, &other.conclusion)
    }

    /// `other` is this sequent with possibly extra premises.
    pub fn weakens_to(&self, other: &Sequent) -> bool {
        self.premise_set().is_subset(&other.premise_set()) && ops::alpha_eq(&self.conclusion, &other.conclusion)
    }

    pub fn free_vars(&self) -> ops::VarSet {
        let mut out = ops::free_vars(&self.conclusion);
        for p in &self.premises {
            out.extend(ops::free_vars(p));
        }
        out
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        if !self.premises.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "=> {}", self.conclusion)
    }
}

#[derive(Serialize, Deserialize)]
struct SequentText {
    premises: Vec<String>,
    conclusion: String,
}

fn parse_formula_text(text: &str) -> Result<Formula, String> {
    match desugar(text, Dialect::Gdst).map_err(|e| format!("{text}: {e}"))? {
        Expr::Formula(f) => Ok(f),
        _ => Err(format!("{text}: expected a formula")),
    }
}

impl Serialize for Sequent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SequentText {
            premises: self.premises.iter().map(|p| p.to_string()).collect(),
            conclusion: self.conclusion.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sequent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let t = SequentText::deserialize(d)?;
        let premises = t
            .premises
            .iter()
            .map(|p| parse_formula_text(p))
            .collect::<Result<_, _>>()
            .map_err(serde::de::Error::custom)?;
        let conclusion = parse_formula_text(&t.conclusion).map_err(serde::de::Error::custom)?;
        Ok(Sequent { premises, conclusion })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "reflexivity")]
    Reflexivity,
    #[serde(rename = "modus-ponens-structural")]
    ModusPonens,
    #[serde(rename = "generalization")]
    Generalization,
    #[serde(rename = "or-elimination")]
    OrElimination,
    #[serde(rename = "definedness-(1)")]
    Definedness,
    #[serde(rename = "propositional-(2)")]
    Propositional,
    #[serde(rename = "predicate-(3)")]
    Predicate,
    #[serde(rename = "separation-(4)")]
    Separation,
    #[serde(rename = "Lstage-(5)")]
    Lstage,
    #[serde(rename = "min-(6)")]
    Min,
    #[serde(rename = "transitivity-(7)")]
    Transitivity,
    #[serde(rename = "extensionality-(8)")]
    Extensionality,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::Reflexivity,
        Rule::ModusPonens,
        Rule::Generalization,
        Rule::OrElimination,
        Rule::Definedness,
        Rule::Propositional,
        Rule::Predicate,
        Rule::Separation,
        Rule::Lstage,
        Rule::Min,
        Rule::Transitivity,
        Rule::Extensionality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Reflexivity => "reflexivity",
            Rule::ModusPonens => "modus-ponens-structural",
            Rule::Generalization => "generalization",
            Rule::OrElimination => "or-elimination",
            Rule::Definedness => "definedness-(1)",
            Rule::Propositional => "propositional-(2)",
            Rule::Predicate => "predicate-(3)",
            Rule::Separation => "separation-(4)",
            Rule::Lstage => "Lstage-(5)",
            Rule::Min => "min-(6)",
            Rule::Transitivity => "transitivity-(7)",
            Rule::Extensionality => "extensionality-(8)",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Metavariable bindings, as source text. The key `schema` selects a
/// member of a rule family.
pub type Instantiation = BTreeMap<String, String>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofStep {
    pub rule: Rule,
    #[serde(default)]
    pub inputs: Vec<usize>,
    #[serde(default)]
    pub instantiation: Instantiation,
    pub sequent: Sequent,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum Violation {
    #[error("index order: input {input} is not earlier than step {step}")]
    IndexOrder { step: usize, input: usize },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("freshness: {0}")]
    Freshness(String),
    #[error("instantiation: {0}")]
    Instantiation(String),
    #[error("oracle: {0}")]
    Oracle(String),
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::IndexOrder { .. } => "index order",
            Violation::SchemaMismatch(_) => "schema mismatch",
            Violation::Freshness(_) => "freshness",
            Violation::Instantiation(_) => "instantiation",
            Violation::Oracle(_) => "oracle",
        }
    }
}

/// Checks one step against the sequents of the steps before it.
pub fn check_step(step: &ProofStep, context: &[Sequent]) -> Result<(), Violation> {
    let here = context.len();
    let mut inputs = Vec::new();
    for &i in &step.inputs {
        if i >= here {
            return Err(Violation::IndexOrder { step: here, input: i });
        }
        inputs.push(&context[i]);
    }
    let expected = apply(step.rule, &step.instantiation, &inputs)?;
    let ok = if inputs.is_empty() {
        expected.weakens_to(&step.sequent)
    } else {
        expected.equivalent(&step.sequent)
    };
    if !ok {
        return Err(Violation::SchemaMismatch(format!(
            "{} yields {expected}, step records {}",
            step.rule, step.sequent
        )));
    }
    if step.rule == Rule::Lstage {
        rules::certify_lstage(&step.sequent)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("step {index}: {violation}")]
pub struct ProofError {
    pub index: usize,
    pub violation: Violation,
}

/// Checks every step in order and reports the first failure.
pub fn check_proof(steps: &[ProofStep]) -> Result<(), ProofError> {
    let mut context = Vec::with_capacity(steps.len());
    for (index, step) in steps.iter().enumerate() {
        check_step(step, &context).map_err(|violation| ProofError { index, violation })?;
        context.push(step.sequent.clone());
    }
    Ok(())
}

pub fn parse_proof(json: &str) -> Result<Vec<ProofStep>, serde_json::Error> {
    serde_json::from_str(json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn inst(pairs: &[(&str, &str)]) -> Instantiation {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn step(rule: Rule, inputs: &[usize], i: Instantiation, premises: &[&str], concl: &str) -> ProofStep {
        ProofStep {
            rule,
            inputs: inputs.to_vec(),
            instantiation: i,
            sequent: Sequent::new(premises.iter().map(|p| f(p)).collect(), f(concl)),
        }
    }

    #[test]
    fn reflexivity_instance() {
        let s = step(Rule::Reflexivity, &[], inst(&[("P", "(mem x y)")]), &["(mem x y)", "(eq x x)"], "(mem x y)");
        assert_eq!(check_step(&s, &[]), Ok(()));
    }

    #[test]
    fn transitivity_instance() {
        let s = step(
            Rule::Transitivity,
            &[],
            inst(&[("alpha", "a"), ("beta", "b"), ("gamma", "c")]),
            &[],
            "(imp (and (mem a b) (mem b c)) (mem a c))",
        );
        assert_eq!(check_step(&s, &[]), Ok(()));
    }

    #[test]
    fn generalization_freshness() {
        let ctx = vec![
            Sequent::new(vec![f("(mem x y)")], f("(mem x y)")),
            Sequent::new(vec![f("(mem x y)")], f("(def y)")),
        ];
        let s = step(
            Rule::Generalization,
            &[0, 1],
            inst(&[("x", "x")]),
            &["(mem x y)"],
            "(forall-set x y (mem x y))",
        );
        assert_eq!(check_step(&s, &ctx).unwrap_err().kind(), "freshness");
    }

    fn chain() -> Vec<ProofStep> {
        let g = ["(mem x y)", "(imp (mem x y) (mem y z))", "(imp (mem y z) (mem z w))"];
        let mp = |p: &str, q: &str| inst(&[("P", p), ("Q", q)]);
        let mut g1 = g.to_vec();
        g1.push("(mem y z)");
        vec![
            step(Rule::Propositional, &[], {
                let mut i = mp("(mem x y)", "(mem y z)");
                i.insert("schema".into(), "mp-implication".into());
                i
            }, &g, "(mem y z)"),
            step(Rule::Propositional, &[], {
                let mut i = mp("(mem y z)", "(mem z w)");
                i.insert("schema".into(), "mp-implication".into());
                i
            }, &g1, "(mem z w)"),
            step(Rule::ModusPonens, &[0, 1], Instantiation::new(), &g, "(mem z w)"),
        ]
    }

    #[test]
    fn two_modus_ponens() {
        assert_eq!(check_proof(&chain()), Ok(()));
        let mut r = chain();
        r.swap(0, 2);
        assert_eq!(check_proof(&r).unwrap_err().violation.kind(), "index order");
        assert_eq!(check_proof(&[]), Ok(()));
    }

    #[test]
    fn proof_json_round_trip() {
        let json = serde_json::to_string(&chain()).unwrap();
        let back = parse_proof(&json).unwrap();
        assert_eq!(check_proof(&back), Ok(()));
        assert!(json.contains("\"rule\":\"propositional-(2)\""));
    }
}
