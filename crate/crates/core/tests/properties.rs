use proptest::prelude::*;

use gdst::closure::{self, FormulaSet, Fragment, Rules, Universe};
use gdst::eval::{self, Env, Truth3};
use gdst::gen::{self, GenConfig};
use gdst::hf::{stage_elements, HFSet};
use gdst::nmid::{self, Dyadic};
use gdst::selftest::oracle::{Naive, BOT, TOP, UNDEF};
use gdst::syntax::ast::{Expr, Formula, Name};
use gdst::syntax::{alpha_eq, desugar, Dialect};

fn truth3() -> impl Strategy<Value = Truth3> {
    prop_oneof![Just(Truth3::Top), Just(Truth3::Bot), Just(Truth3::U)]
}

fn as_num(t: Truth3) -> u8 {
    match t {
        Truth3::Bot => BOT,
        Truth3::U => UNDEF,
        Truth3::Top => TOP,
    }
}

proptest! {
    #[test]
    fn codes_enumerate_stages(i in 0usize..65536) {
        let s = &stage_elements(5).unwrap()[i];
        prop_assert_eq!(s.code().unwrap(), i as u64);
        prop_assert_eq!(&HFSet::decode(i as u64), s);
        prop_assert_eq!(s.to_string().parse::<HFSet>().unwrap(), s.clone());
    }

    #[test]
    fn kleene_connectives(a in truth3(), b in truth3(), c in truth3()) {
        prop_assert_eq!(a.not().not(), a);
        prop_assert_eq!(a.and(b), b.and(a));
        prop_assert_eq!(a.and(b).not(), a.not().or(b.not()));
        prop_assert_eq!(a.and(b.and(c)), a.and(b).and(c));
        prop_assert_eq!(a.or(b.and(c)), a.or(b).and(a.or(c)));
        prop_assert_eq!(as_num(a.and(b)), as_num(a).min(as_num(b)));
        prop_assert_eq!(as_num(a.or(b)), as_num(a).max(as_num(b)));
    }

    #[test]
    fn render_parse_round_trip(seed: u64) {
        let mut rng = gen::rng(seed);
        let p = gen::formula(&mut rng, &GenConfig { allow_fix: true, ..GenConfig::default() });
        let back = desugar(&p.to_string(), Dialect::Nmid).unwrap();
        let Expr::Formula(q) = back else { panic!("not a formula") };
        prop_assert!(alpha_eq(&p, &q), "{} vs {}", p, q);
    }

    #[test]
    fn evaluator_matches_naive_oracle(seed: u64, n in 0u32..=4) {
        let mut rng = gen::rng(seed);
        let p = gen::formula(&mut rng, &GenConfig::default());
        if let Some(env) = gen::env_for(&mut rng, &Expr::Formula(p.clone()), n) {
            let fast = eval::eval_formula(&p, &env, n).unwrap();
            let slow = Naive::new(n, &env).truth(&p).unwrap();
            prop_assert_eq!(as_num(fast), slow, "{} at {}", p, n);
        }
    }

    #[test]
    fn defined_values_persist(seed: u64, n in 1u32..=4) {
        let mut rng = gen::rng(seed);
        let e = gen::expr(&mut rng, &GenConfig::default());
        if let Some(env) = gen::env_for(&mut rng, &e, n) {
            let at = |m| match &e {
                Expr::Formula(p) => format!("{:?}", eval::eval_formula(p, &env, m).unwrap()),
                Expr::Ord(a) => format!("{:?}", eval::eval_ord(a, &env, m).unwrap()),
                Expr::Set(x) => format!("{:?}", eval::eval_set(x, &env, m).unwrap()),
            };
            let here = at(n);
            if here != "U" && here != "None" {
                prop_assert_eq!(at(n + 1), here);
            }
        }
    }

    #[test]
    fn inflationary_iteration(seed: u64, universe in 1u32..=8, w0 in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let op = nmid::random_inflationary(&mut rng, universe);
        let w0 = w0 & nmid::full(universe);
        let trace = nmid::iterate(&op, w0).unwrap();
        prop_assert!(trace.fixpoint_index <= universe as usize);
        prop_assert_eq!(op.apply(trace.fixpoint()).unwrap(), trace.fixpoint());
        for pair in trace.stages.windows(2) {
            prop_assert_eq!(pair[0] & !pair[1], 0);
        }
        prop_assert!(nmid::total_time(&trace).lt_int(2));
    }

    #[test]
    fn dyadic_sums(ks in proptest::collection::vec(0u32..20, 0..12)) {
        // Exact oracle over the common denominator 2^20.
        let num: u128 = ks.iter().map(|&k| 1u128 << (20 - k)).sum();
        let d: Dyadic = ks.iter().map(|&k| Dyadic::unit(k)).sum();
        prop_assert_eq!(d, Dyadic::new(num, 20));
        prop_assert_eq!(d.lt_int(2), num < 2 << 20);
    }
}

fn small_universe() -> &'static Universe {
    use std::sync::OnceLock;
    static U: OnceLock<Universe> = OnceLock::new();
    U.get_or_init(|| Universe::new(&closure::atom_names(2), 2, Fragment::Full))
}

fn subset(mask: &[bool]) -> FormulaSet {
    let u = small_universe();
    FormulaSet::new(u.formulas().iter().zip(mask.iter().cycle()).filter(|(_, &b)| b).map(|(f, _)| f.clone()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn t_step_inflationary_and_monotone(
        small in proptest::collection::vec(prop::bool::weighted(0.05), 1..64),
        extra in proptest::collection::vec(prop::bool::weighted(0.05), 1..64),
    ) {
        let u = small_universe();
        let rules = Rules::monotone();
        let p = subset(&small);
        let mut q = p.clone();
        for f in subset(&extra).iter() {
            q.insert(f.clone());
        }
        let tp = closure::t_step(&p, u, &rules);
        let tq = closure::t_step(&q, u, &rules);
        prop_assert!(p.is_subset(&tp));
        prop_assert!(tp.is_subset(&tq), "lost {:?}", tp.difference(&tq));
    }

    #[test]
    fn saturation_is_a_fixpoint(mask in proptest::collection::vec(prop::bool::weighted(0.05), 1..64)) {
        let u = small_universe();
        let p = subset(&mask);
        let s = closure::saturate(&p, u, &Rules::all(), 64);
        let again = closure::t_step(&s.set, u, &Rules::all());
        prop_assert_eq!(again.rendered(), s.set.rendered());
        prop_assert!(again.closed_world);
    }
}

#[test]
fn fresh_top_atom_raises_q_by_one() {
    let names = closure::atom_names(3);
    let top = Name::new("aZ");
    for p in closure::good_sets(&names, 3) {
        let Some(c) = closure::is_good(&p) else { continue };
        let ext = closure::extend_top(&p, &top);
        let e = closure::is_good(&ext).expect("extension stays good");
        assert_eq!(e.q, c.q + 1, "{p}");
        assert_eq!(e.g[&top], c.q);
        // The rest of the certificate is unchanged.
        for (k, v) in &c.g {
            assert_eq!(e.g[k], *v);
        }
    }
}

#[test]
fn fz_grows_with_budget() {
    for n in 0..=4 {
        let mut last = 0;
        for d in 0..=4 {
            let v = gdst::descr::fz_approx(&[], n, &gdst::descr::TermBudget::new(d).with_arity(0))
                .unwrap()
                .value;
            assert!(v >= last && v <= n, "f(∅, {n}) at {d} = {v}");
            last = v;
        }
    }
}

#[test]
fn oracle_handles_sep_and_stages() {
    let p: Formula = gdst::syntax::parse_formula("(exists-set x (L (nat 2)) (eq x (sep y (L (nat 2)) (not (eq y y)))))").unwrap();
    for n in 0..=4 {
        let fast = eval::eval_formula(&p, &Env::new(), n).unwrap();
        assert_eq!(as_num(fast), Naive::new(n, &Env::new()).truth(&p).unwrap());
    }
}
