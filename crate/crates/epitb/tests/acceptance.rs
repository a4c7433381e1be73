use epitb::verify::{run_suite, CRITERIA};

#[test]
fn all_criteria_pass() {
    let results = run_suite(None).unwrap();
    assert_eq!(results.len(), CRITERIA.len());
    for r in &results {
        println!("{} {:>2} {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.name);
        for c in &r.checks {
            let tol = c.tolerance.map(|t| format!(" tol {t:.1e}")).unwrap_or_default();
            println!("        {} {} = {:.3e}{tol} {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value, c.note);
        }
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
