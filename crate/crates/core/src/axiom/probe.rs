//! Truth preservation of a sequent at a finite stage.

use rand::seq::SliceRandom;

use super::Sequent;
use crate::eval::{Env, EvalError, Evaluator, Truth3, Value};
use crate::gen;
use crate::hf::stage_elements;
use crate::syntax::ast::Sort;

pub const MAX_PROBE_STAGE: u32 = 4;

/// Environments are enumerated when there are at most `max_exhaustive` of
/// them; otherwise `samples` are drawn from a generator seeded by `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampler {
    pub max_exhaustive: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            max_exhaustive: 4096,
            samples: 512,
            seed: 0,
        }
    }
}

impl Sampler {
    pub fn exhaustive() -> Self {
        Sampler {
            max_exhaustive: usize::MAX,
            ..Sampler::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeOutcome {
    Holds { envs: usize, exhaustive: bool },
    Counterexample(Env),
}

impl ProbeOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, ProbeOutcome::Holds { .. })
    }
}

fn preserved(seq: &Sequent, env: &Env, n: u32) -> Result<bool, EvalError> {
    let mut ev = Evaluator::new(n, env);
    for p in &seq.premises {
        if ev.formula(p)? != Truth3::Top {
            return Ok(true);
        }
    }
    Ok(ev.formula(&seq.conclusion)? == Truth3::Top)
}

/// Checks that wherever every premise is true at stage `n`, so is the
/// conclusion. Free set variables range over `V_n`, ordinal ones over `n`.
pub fn soundness_probe(seq: &Sequent, n: u32, sampler: &Sampler) -> Result<ProbeOutcome, EvalError> {
    if n > MAX_PROBE_STAGE {
        return Err(EvalError::Resource(format!("probe stage {n} > {MAX_PROBE_STAGE}")));
    }
    let vars: Vec<_> = seq.free_vars().into_iter().collect();
    let sets: Vec<Value> = stage_elements(n)?.iter().cloned().map(Value::Set).collect();
    let ords: Vec<Value> = (0..n).map(Value::Ord).collect();
    let domain = |s: Sort| match s {
        Sort::Set => &sets,
        Sort::Ord => &ords,
    };
    let total = vars
        .iter()
        .try_fold(1usize, |acc, v| acc.checked_mul(domain(v.sort()).len()));
    match total {
        Some(total) if total <= sampler.max_exhaustive => {
            let mut digits = vec![0usize; vars.len()];
            for _ in 0..total {
                let mut env = Env::new();
                for (v, &d) in vars.iter().zip(&digits) {
                    env.bind(v.clone(), domain(v.sort())[d].clone());
                }
                if !preserved(seq, &env, n)? {
                    return Ok(ProbeOutcome::Counterexample(env));
                }
                for (i, v) in vars.iter().enumerate() {
                    digits[i] += 1;
                    if digits[i] < domain(v.sort()).len() {
                        break;
                    }
                    digits[i] = 0;
                }
            }
            Ok(ProbeOutcome::Holds {
                envs: total,
                exhaustive: true,
            })
        }
        _ => {
            let mut rng = gen::rng(sampler.seed);
            for _ in 0..sampler.samples {
                let mut env = Env::new();
                for v in &vars {
                    let x = domain(v.sort()).choose(&mut rng).expect("nonempty domain");
                    env.bind(v.clone(), x.clone());
                }
                if !preserved(seq, &env, n)? {
                    return Ok(ProbeOutcome::Counterexample(env));
                }
            }
            Ok(ProbeOutcome::Holds {
                envs: sampler.samples,
                exhaustive: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> crate::syntax::ast::Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn reflexive_sequents_hold() {
        let s = Sequent::new(vec![f("(mem x y)"), f("(mem a b)")], f("(mem a b)"));
        for n in 0..=4 {
            assert!(soundness_probe(&s, n, &Sampler::exhaustive()).unwrap().holds());
        }
    }

    #[test]
    fn transitivity_triples() {
        let s = Sequent::axiom(f("(imp (and (mem a b) (mem b c)) (mem a c))"));
        let r = soundness_probe(&s, 4, &Sampler::default()).unwrap();
        assert_eq!(r, ProbeOutcome::Holds { envs: 64, exhaustive: true });
    }

    #[test]
    fn broken_sequent() {
        let s = Sequent::new(vec![f("(eq x0 x0)")], f("(not (eq x0 x0))"));
        assert!(matches!(soundness_probe(&s, 1, &Sampler::default()).unwrap(), ProbeOutcome::Counterexample(_)));
    }
}
