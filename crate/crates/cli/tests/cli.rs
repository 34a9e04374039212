use std::path::Path;
use std::process::{Command, Output};

use dualcbf::config::RunConfig;

fn dualcbf(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualcbf"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

#[test]
fn run_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for out in ["a", "b"] {
        let o = dualcbf(
            &[
                "run",
                "--scenario",
                "corridor",
                "--seed",
                "1",
                "--ticks",
                "150",
                "--out-dir",
                out,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let run_dir = dir.path().join(out).join("corridor_1_filtered");
        traces.push(std::fs::read(run_dir.join("trace.csv")).unwrap());
        let summary = std::fs::read_to_string(run_dir.join("summary.txt")).unwrap();
        let echoed = RunConfig::from_summary(&summary).unwrap();
        assert_eq!(echoed.seed, 1);
        assert_eq!(echoed.ticks, 150);
        assert!(summary.contains("metrics.explored_area = "));
    }
    assert_eq!(traces[0], traces[1]);
    let header = String::from_utf8_lossy(&traces[0]).lines().next().unwrap().to_string();
    assert!(header.starts_with("tick,t,px,py,udx,udy,usx,usy,h1,h2,"));
}

#[test]
fn baseline_run_uses_its_own_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualcbf(
        &[
            "run",
            "--scenario",
            "rooms",
            "--ticks",
            "50",
            "--no-filter",
            "--out-dir",
            "o",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(dir.path().join("o/rooms_0_baseline/trace.csv").exists());
}

#[test]
fn config_file_is_applied_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.cfg"),
        "# test\nseed = 9\nticks = 40\nshaping = rational\n",
    )
    .unwrap();
    let o = dualcbf(
        &["run", "--config", "c.cfg", "--ticks", "30", "--out-dir", "o"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("o/corridor_9_filtered/summary.txt")).unwrap();
    let cfg = RunConfig::from_summary(&summary).unwrap();
    assert_eq!((cfg.ticks, cfg.seed, cfg.shaping.key()), (30, 9, "rational"));
}

#[test]
fn config_errors_exit_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    for (text, needle) in [
        ("gamma2_min = 0\n", "gamma2_min"),
        ("speed = 3\n", "speed"),
        ("a1 = fast\n", "a1"),
    ] {
        std::fs::write(dir.path().join("bad.cfg"), text).unwrap();
        let o = dualcbf(&["run", "--config", "bad.cfg"], dir.path());
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(needle), "{text}");
    }
    let o = dualcbf(&["run", "--scenario", "missing.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = dualcbf(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualcbf(&["verify"], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("all checks passed"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn admissibility_lists_each_shaping() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualcbf(&["admissibility"], dir.path());
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    for name in ["tanh", "rational", "erf"] {
        assert!(stdout.contains(name));
    }
}

#[test]
fn compare_prints_table_rows_for_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualcbf(
        &[
            "compare",
            "--scenario",
            "open_hall",
            "--seeds",
            "2",
            "--ticks",
            "60",
            "--out-dir",
            "o",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    for row in [
        "Total exploration time (s)",
        "Explored area (m^2)",
        "Total path length (m)",
        "Average speed (m/s)",
        "Global min clearance (m)",
        "Obstacle violation ticks",
        "Frontier violation ticks",
        "CBF intervention rate",
        "CBF speed clips",
        "Avg CBF slack",
        "Avg adaptive gamma2",
    ] {
        assert!(stdout.contains(row), "missing row {row}");
    }
    for seed in 0..2 {
        for mode in ["filtered", "baseline"] {
            assert!(dir
                .path()
                .join(format!("o/open_hall_{seed}_{mode}/summary.txt"))
                .exists());
        }
    }
    assert!(dir.path().join("o/open_hall_compare.txt").exists());
}

#[test]
fn compare_without_filter_gives_identical_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualcbf(
        &[
            "compare",
            "--scenario",
            "rooms",
            "--seeds",
            "2",
            "--ticks",
            "80",
            "--no-filter",
            "--out-dir",
            "o",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("paired traces identical: 2/2"));
}

#[test]
fn contact_flag_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // A weak repulsive field lets the unfiltered robot clip a wall early on.
    std::fs::write(dir.path().join("weak.cfg"), "k_rep = 0.01\nd0 = 0.5\n").unwrap();
    let args = |extra: &'static [&'static str]| {
        let mut a = vec!["run", "--scenario", "corridor", "--seed", "800", "--config", "weak.cfg"];
        a.extend(["--ticks", "200", "--fail-on-contact", "--out-dir", "o"]);
        a.extend(extra);
        a
    };
    let o = dualcbf(&args(&["--no-filter"]), dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("contact"));
    let o = dualcbf(&args(&[]), dir.path());
    assert_eq!(o.status.code(), Some(0));
    let summary = std::fs::read_to_string(dir.path().join("o/corridor_800_filtered/summary.txt")).unwrap();
    assert!(summary.contains("metrics.contacts = 0"));
    assert!(!summary.contains("metrics.intervention_rate = 0\n"));
}
