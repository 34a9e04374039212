//! Aggregate table for `compare`.

use std::fmt::Write;

use dualcbf::sim::{Episode, EpisodeMetrics};

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

type Row = (&'static str, fn(&[&EpisodeMetrics], f64) -> Option<f64>, usize);

const ROWS: [Row; 11] = [
    (
        "Total exploration time (s)",
        |m, dt| mean(m.iter().map(|x| x.ticks_evaluated as f64 * dt)),
        1,
    ),
    ("Explored area (m^2)", |m, _| mean(m.iter().map(|x| x.explored_area)), 2),
    ("Total path length (m)", |m, _| mean(m.iter().map(|x| x.path_length)), 2),
    ("Average speed (m/s)", |m, _| mean(m.iter().map(|x| x.avg_speed)), 3),
    (
        "Global min clearance (m)",
        |m, _| m.iter().map(|x| x.min_clearance).reduce(f64::min),
        3,
    ),
    (
        "Obstacle violation ticks",
        |m, _| mean(m.iter().map(|x| x.obstacle_violation_ticks as f64)),
        1,
    ),
    (
        "Frontier violation ticks",
        |m, _| mean(m.iter().map(|x| x.frontier_violation_ticks as f64)),
        1,
    ),
    (
        "CBF intervention rate",
        |m, _| mean(m.iter().map(|x| x.intervention_rate)),
        4,
    ),
    (
        "CBF speed clips",
        |m, _| mean(m.iter().map(|x| x.speed_clips as f64)),
        1,
    ),
    ("Avg CBF slack", |m, _| mean(m.iter().map(|x| x.avg_slack)), 4),
    (
        "Avg adaptive gamma2",
        |m, _| mean(m.iter().filter_map(|x| x.avg_gamma2)),
        4,
    ),
];

/// Means over seeds, except the clearance row which takes the minimum.
pub fn render(pairs: &[(Episode, Episode)], left: &str, right: &str, dt: f64) -> String {
    let a: Vec<&EpisodeMetrics> = pairs.iter().map(|p| &p.0.metrics).collect();
    let b: Vec<&EpisodeMetrics> = pairs.iter().map(|p| &p.1.metrics).collect();
    let cell = |v: Option<f64>, digits: usize| v.map_or_else(|| "---".to_string(), |x| format!("{x:.digits$}"));

    let mut out = String::new();
    let _ = writeln!(out, "{:<28} {:>16} {:>20}", "Metric", left, right);
    for (name, f, digits) in ROWS {
        let _ = writeln!(
            out,
            "{name:<28} {:>16} {:>20}",
            cell(f(&a, dt), digits),
            cell(f(&b, dt), digits)
        );
    }
    let contacts = |m: &[&EpisodeMetrics]| m.iter().map(|x| x.contacts).sum::<usize>();
    let _ = writeln!(
        out,
        "{:<28} {:>16} {:>20}",
        "Contacts (total)",
        contacts(&a),
        contacts(&b)
    );
    let identical = pairs.iter().filter(|(x, y)| x.trace_csv() == y.trace_csv()).count();
    let _ = writeln!(
        out,
        "seeds: {}; paired traces identical: {identical}/{}",
        pairs.len(),
        pairs.len()
    );
    out
}
