//! Pins every built-in scenario's canonical report to a golden file.
//! Run with `UPDATE_GOLDEN=1` to regenerate after an intentional change.

use std::path::PathBuf;

use nefcone::scenario::{builtin_scenario, canonical_bytes, list_builtins, run_scenario};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"))
}

#[test]
fn builtin_reports_match_their_golden_files() {
    let update = std::env::var("UPDATE_GOLDEN").is_ok();
    let mut deviations = Vec::new();
    for name in list_builtins() {
        let scenario = builtin_scenario(name, None, None).unwrap();
        let report = run_scenario(&scenario).unwrap();
        assert!(report.pass, "builtin {name} has a failing verdict");
        let bytes = canonical_bytes(&report);
        let path = golden_path(name);
        if update {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &bytes).unwrap();
            continue;
        }
        let expected = std::fs::read(&path).unwrap_or_else(|_| {
            panic!("missing golden file for {name}; regenerate with UPDATE_GOLDEN=1")
        });
        if bytes != expected {
            deviations.push(name);
        }
    }
    assert!(
        deviations.is_empty(),
        "reports deviate from their golden files: {deviations:?} \
         (regenerate with UPDATE_GOLDEN=1 if the change is intentional)"
    );
}
