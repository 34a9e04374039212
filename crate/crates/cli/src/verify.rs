//! `verify`: oracle sweeps with a one-line verdict each.

use dualcbf::oracle::sweep::{admissibility_reports, closed_form_sweep, edt_sweep, eikonal_sweep, soft_sweep};
use dualcbf::oracle::OracleConfig;

fn line(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name:<14} {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

/// Returns true when every check passes.
pub fn run(tolerance: f64, seed: u64) -> bool {
    let oracle = OracleConfig::default();
    let mut ok = true;

    let cf = closed_form_sweep(10_000, seed ^ 0xc105ed, tolerance, &oracle);
    ok &= line(
        "projection",
        cf.mismatches == 0 && cf.oracle_failures == 0,
        format!(
            "{} instances, max error {:.2e}, mismatches {}, oracle failures {}",
            cf.instances, cf.max_component_error, cf.mismatches, cf.oracle_failures
        ),
    );
    ok &= line("kkt", cf.kkt_failures == 0, format!("{} failures", cf.kkt_failures));

    let soft = soft_sweep(200, seed ^ 0x50f7, 1e-3, &oracle);
    ok &= line(
        "soft-qp",
        soft.passed(),
        format!(
            "max |du| {:.2e}, max |d delta| {:.2e}, nonzero slack on feasible {}",
            soft.max_u_error, soft.max_slack_error, soft.feasible_nonzero_slack
        ),
    );

    let edt = edt_sweep(50, seed ^ 0x3ed7, 48);
    ok &= line(
        "edt",
        edt.passed(),
        format!("{} of {} grids differ", edt.mismatched_grids, edt.grids),
    );

    let eik = eikonal_sweep(20, seed ^ 0xe1c0, 100);
    ok &= line(
        "eikonal",
        eik.passed(0.95),
        format!("worst grid {:.2}% within [0.9, 1.1]", 100.0 * eik.min_grid_fraction),
    );

    for r in admissibility_reports() {
        ok &= line("admissibility", r.all_pass(), r.to_string());
    }
    println!("{}", if ok { "all checks passed" } else { "verification failed" });
    ok
}
