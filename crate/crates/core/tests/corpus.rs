use std::fs;
use std::path::PathBuf;

use serde_json::Value as Json;

use gdst::axiom::{self, Sequent};
use gdst::cli::{self, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use gdst::closure::{self, ClosureError, FormulaSet, LemmaConfig};
use gdst::nmid::{self, Dyadic, OperatorSpec};
use gdst::selftest::rules::{probe_instance, Instance, Verdict};
use gdst::syntax::parse_formula;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn read(name: &str) -> String {
    fs::read_to_string(corpus(name)).unwrap()
}

fn gdst(args: &[&str]) -> (i32, Json) {
    let mut argv = vec!["gdst"];
    argv.extend_from_slice(args);
    let out = cli::run(argv);
    let body = serde_json::from_str(&out.stdout).unwrap_or(Json::Null);
    (out.code, body)
}

#[test]
fn lemmagood_reference_budgets() {
    let manifest: Json = serde_json::from_str(&read("lemmagood.json")).unwrap();
    let target = manifest["target_budget"].as_u64().unwrap() as usize;
    let reference = manifest["reference_budget"].as_u64().unwrap() as usize;
    let cfg = LemmaConfig {
        max_budget: reference,
        ..LemmaConfig::new(target)
    };
    for case in manifest["cases"].as_array().unwrap() {
        let file = case["file"].as_str().unwrap();
        let p = FormulaSet::parse(&read(file)).unwrap();
        let r = closure::lemmagood_compare(&p, &cfg);
        if case["good"] == Json::Bool(false) {
            assert!(matches!(r, Err(ClosureError::NotGood)), "{file}");
            continue;
        }
        let r = r.unwrap();
        assert!(r.sound, "{file}: {:?}", r.unsound);
        assert_eq!(r.certificate.q as u64, case["q"].as_u64().unwrap(), "{file}");
        assert_eq!(r.complete_at.map(|b| b as u64), case["complete_at"].as_u64(), "{file}");
        assert_eq!(r.escalation.last().unwrap().missing, 0, "{file}");
    }
}

#[test]
fn proofs() {
    for (file, valid) in [("mp-chain.proof.json", true), ("separation.proof.json", true), ("freshness.proof.json", false)] {
        let steps = axiom::parse_proof(&read(file)).unwrap();
        assert_eq!(axiom::check_proof(&steps).is_ok(), valid, "{file}");
    }
    let steps = axiom::parse_proof(&read("freshness.proof.json")).unwrap();
    let err = axiom::check_proof(&steps).unwrap_err();
    assert_eq!((err.index, err.violation.kind()), (2, "freshness"));
}

#[test]
fn operator_tables() {
    let mc = nmid::parse_table(&read("min-complement-4.op"), 4).unwrap();
    let builtin = OperatorSpec::min_complement(4);
    for w in 0..16 {
        assert_eq!(mc.apply(w).unwrap(), builtin.apply(w).unwrap());
    }
    let trace = nmid::iterate(&mc, 0).unwrap();
    assert_eq!(nmid::total_time(&trace), Dyadic::new(15, 3));
    let cond = nmid::parse_table(&read("conditional-3.op"), 3).unwrap();
    for w in 0..8 {
        assert_eq!(cond.apply(w).unwrap(), OperatorSpec::conditional().apply(w).unwrap());
    }
    let shrinking = nmid::parse_table(&read("shrinking-2.op"), 2).unwrap();
    assert!(shrinking.check_inflationary().is_err());
}

#[test]
fn cli_examples() {
    let (code, body) = gdst(&["eval", "--stage", "4", "--env", "x0={}", "(eq x0 x0)"]);
    assert_eq!((code, body), (EXIT_OK, serde_json::json!({ "value": "top" })));
    let (code, body) = gdst(&["fz", "--stage", "3", "--max-nodes", "0"]);
    assert_eq!((code, &body["value"]), (EXIT_OK, &Json::from(0)));
    let (code, body) = gdst(&["eval", "--stage", "1", "(min a (eq a a))"]);
    assert_eq!((code, &body["value"]), (EXIT_OK, &Json::from("0")));
    let (_, body) = gdst(&["eval", "--stage", "0", "(min a (eq a a))"]);
    assert_eq!(body["value"], "undef");
    let (_, body) = gdst(&["eval", "--stage", "2", "--meta", "1", "(def (nat 1))"]);
    assert_eq!(body["value"], "undef-marked");
}

#[test]
fn cli_exit_codes() {
    assert_eq!(cli::run(["gdst", "frobnicate"]).code, EXIT_USAGE);
    assert_eq!(cli::run(["gdst", "eval", "--stage", "2", "(eq x"]).code, EXIT_USAGE);
    assert_eq!(cli::run(["gdst", "eval", "--stage", "2", "--env", "a={{}, {{}}}", "(eq a a)"]).code, EXIT_USAGE);
    assert_eq!(cli::run(["gdst", "--help"]).code, EXIT_OK);
    let proof = |f: &str| cli::run(["gdst".to_string(), "proof-check".into(), corpus(f).display().to_string()]).code;
    assert_eq!(proof("mp-chain.proof.json"), EXIT_OK);
    assert_eq!(proof("freshness.proof.json"), EXIT_VIOLATION);
    assert_eq!(proof("no-such-file.json"), EXIT_USAGE);
    let (code, _) = gdst(&["kp-check", "--axiom", "infinity", "--stage", "3"]);
    assert_eq!(code, EXIT_VIOLATION);
    let (code, _) = gdst(&["kp-check", "--axiom", "pairing", "--stage", "3"]);
    assert_eq!(code, EXIT_VIOLATION);
    let (code, _) = gdst(&["kp-check", "--axiom", "nonsense", "--stage", "3"]);
    assert_eq!(code, EXIT_USAGE);
    let table = corpus("shrinking-2.op").display().to_string();
    let (code, body) = gdst(&["nmid-check", "--universe", "2", "--table", &table]);
    assert_eq!((code, &body["inflationary"]), (EXIT_VIOLATION, &Json::Bool(false)));
    let gapped = corpus("gapped.gdst").display().to_string();
    let (code, body) = gdst(&["lemmagood", &gapped]);
    assert_eq!((code, &body["good"]), (EXIT_VIOLATION, &Json::Bool(false)));
}

#[test]
fn cli_is_deterministic() {
    let args = ["gdst", "selftest", "--only", "3,6,9"];
    let a = cli::run(args);
    let b = cli::run(args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stdout);
    assert_eq!(a.stdout, b.stdout);
    let pair = corpus("pair.gdst").display().to_string();
    let s1 = cli::run(["gdst", "saturate", &pair, "--budget", "2"]);
    let s2 = cli::run(["gdst", "saturate", &pair, "--budget", "2", "--jobs", "1"]);
    assert_eq!(s1.stdout, s2.stdout);
    let plain = cli::run(["gdst", "--format", "plain", "fz", "--stage", "3", "--max-nodes", "0"]);
    assert!(plain.stdout.lines().any(|l| l == "value: 0"), "{}", plain.stdout);
}

#[test]
fn budget_from_environment() {
    std::env::set_var("GDST_BUDGET_NODES", "0");
    let (_, body) = gdst(&["fz", "--stage", "3"]);
    std::env::remove_var("GDST_BUDGET_NODES");
    assert_eq!(body["budget"]["max_nodes"], 0);
    assert_eq!(body["value"], 0);
}

#[test]
fn probe_catches_a_broken_schema() {
    // Conclusion swapped for a non-consequence of the inputs.
    let f = |s: &str| parse_formula(s).unwrap();
    let inst = Instance {
        inst: Default::default(),
        inputs: vec![Sequent::new(vec![f("(mem x y)")], f("(mem x y)"))],
        output: Sequent::new(vec![f("(mem x y)")], f("(mem y x)")),
    };
    assert!(matches!(probe_instance(&inst).unwrap(), Verdict::Counterexample { .. }));
}
