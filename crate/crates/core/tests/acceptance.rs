//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

use std::fs;
use std::path::PathBuf;

use gdst::selftest::{self, SelftestConfig};

fn main() {
    let cfg = SelftestConfig::default();
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut failed = 0;
    for (id, _) in selftest::CRITERIA {
        let r = selftest::run(id, &cfg);
        println!("{}", r.line());
        for e in &r.examples {
            println!("    {e}");
        }
        if !r.passed {
            failed += 1;
        }
        if let Some(a) = &r.artifact {
            let path = out_dir.join(format!("criterion-{id}.json"));
            fs::write(&path, serde_json::to_string_pretty(a).expect("json")).expect("write artifact");
            println!("    artifact: {}", path.display());
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
