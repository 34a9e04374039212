use std::fmt::Write as _;

use super::trace::TickRecord;

/// Per-episode summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    /// Known belief area at the last tick, m^2.
    pub explored_area: f64,
    pub path_length: f64,
    pub avg_speed: f64,
    /// Smallest obstacle SDF value seen at the robot position.
    pub min_clearance: f64,
    pub obstacle_violation_ticks: usize,
    pub frontier_violation_ticks: usize,
    pub intervention_rate: f64,
    pub speed_clips: usize,
    pub avg_slack: f64,
    pub max_slack: f64,
    /// Mean over ticks that logged a frontier gain.
    pub avg_gamma2: Option<f64>,
    pub ticks_evaluated: usize,
    pub obstacle_active_ticks: usize,
    pub frontier_active_ticks: usize,
    /// Ticks resolved by the soft fallback or the fail-safe stop.
    pub infeasible_count: usize,
    pub min_h1: f64,
    pub min_h2: Option<f64>,
    pub contacts: usize,
}

/// Episode constants the metrics depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsContext {
    pub resolution: f64,
    pub dt: f64,
    pub d_safe: f64,
    pub d_stop: f64,
}

fn min_opt(acc: Option<f64>, v: Option<f64>) -> Option<f64> {
    match (acc, v) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// # Panics
/// On an empty trace.
pub fn compute_metrics(trace: &[TickRecord], ctx: &MetricsContext) -> EpisodeMetrics {
    assert!(!trace.is_empty(), "metrics need at least one tick");
    let n = trace.len();
    let path_length: f64 = trace.iter().map(|r| (r.next_position - r.position).norm()).sum();
    let gammas: Vec<f64> = trace.iter().filter_map(|r| r.gamma2).collect();
    let last = trace.last().expect("non-empty");
    EpisodeMetrics {
        explored_area: last.known_cells as f64 * ctx.resolution * ctx.resolution,
        path_length,
        avg_speed: path_length / (n as f64 * ctx.dt),
        min_clearance: trace.iter().map(|r| r.sdf_obs).fold(f64::INFINITY, f64::min),
        obstacle_violation_ticks: trace.iter().filter(|r| r.sdf_obs < ctx.d_safe).count(),
        frontier_violation_ticks: trace
            .iter()
            .filter(|r| r.sdf_unk.is_some_and(|v| v < ctx.d_stop))
            .count(),
        intervention_rate: trace.iter().filter(|r| r.intervention).count() as f64 / n as f64,
        speed_clips: trace.iter().filter(|r| r.speed_clipped).count(),
        avg_slack: trace.iter().map(|r| r.slack).sum::<f64>() / n as f64,
        max_slack: trace.iter().map(|r| r.slack).fold(0.0, f64::max),
        avg_gamma2: (!gammas.is_empty()).then(|| gammas.iter().sum::<f64>() / gammas.len() as f64),
        ticks_evaluated: n,
        obstacle_active_ticks: trace.iter().filter(|r| r.lambda1 > 0.0).count(),
        frontier_active_ticks: trace.iter().filter(|r| r.lambda2 > 0.0).count(),
        infeasible_count: trace.iter().filter(|r| r.case.is_infeasible()).count(),
        min_h1: trace.iter().map(|r| r.h1).fold(f64::INFINITY, f64::min),
        min_h2: trace.iter().map(|r| r.h2).fold(None, min_opt),
        contacts: trace.iter().filter(|r| r.contact).count(),
    }
}

impl EpisodeMetrics {
    /// `(key, value)` pairs in a fixed order; absent values are empty.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            ("explored_area", self.explored_area.to_string()),
            ("path_length", self.path_length.to_string()),
            ("avg_speed", self.avg_speed.to_string()),
            ("min_clearance", self.min_clearance.to_string()),
            ("obstacle_violation_ticks", self.obstacle_violation_ticks.to_string()),
            ("frontier_violation_ticks", self.frontier_violation_ticks.to_string()),
            ("intervention_rate", self.intervention_rate.to_string()),
            ("speed_clips", self.speed_clips.to_string()),
            ("avg_slack", self.avg_slack.to_string()),
            ("max_slack", self.max_slack.to_string()),
            ("avg_gamma2", opt(self.avg_gamma2)),
            ("ticks_evaluated", self.ticks_evaluated.to_string()),
            ("obstacle_active_ticks", self.obstacle_active_ticks.to_string()),
            ("frontier_active_ticks", self.frontier_active_ticks.to_string()),
            ("infeasible_count", self.infeasible_count.to_string()),
            ("min_h1", self.min_h1.to_string()),
            ("min_h2", opt(self.min_h2)),
            ("contacts", self.contacts.to_string()),
        ]
    }

    /// `metrics.<key> = <value>` lines.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            writeln!(s, "metrics.{k} = {v}").expect("write to String");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::FilterCase;
    use crate::sim::trace::TraceCase;
    use crate::Vec2;

    fn rec(tick: usize) -> TickRecord {
        TickRecord {
            tick,
            t: tick as f64 * 0.1,
            position: Vec2::new(tick as f64 * 0.02, 0.0),
            u_des: Vec2::new(0.2, 0.0),
            u_safe: Vec2::new(0.2, 0.0),
            h1: 0.9,
            h2: Some(0.8),
            sdf_obs: 1.0,
            sdf_unk: Some(1.0),
            rho: Some(0.5),
            gamma2: Some(0.6),
            case: TraceCase::Filter(FilterCase::Nominal),
            lambda1: 0.0,
            lambda2: 0.0,
            slack: 0.0,
            speed_clipped: false,
            intervention: false,
            next_position: Vec2::new((tick + 1) as f64 * 0.02, 0.0),
            known_cells: 100 + tick,
            contact: false,
        }
    }

    fn ctx() -> MetricsContext {
        MetricsContext {
            resolution: 0.1,
            dt: 0.1,
            d_safe: 0.35,
            d_stop: 0.35,
        }
    }

    #[test]
    fn hand_tallied_ten_ticks() {
        let mut t: Vec<TickRecord> = (0..10).map(rec).collect();
        t[2].intervention = true;
        t[2].lambda1 = 0.3;
        t[2].sdf_obs = 0.3;
        t[2].h1 = -0.1;
        t[4].case = TraceCase::Filter(FilterCase::SoftFallback);
        t[4].slack = 0.4;
        t[4].lambda2 = 0.1;
        t[4].intervention = true;
        t[5].speed_clipped = true;
        t[6].sdf_unk = None;
        t[6].h2 = None;
        t[6].gamma2 = None;
        t[6].rho = None;
        t[7].sdf_unk = Some(0.2);
        t[7].h2 = Some(-0.3);
        t[8].gamma2 = Some(1.0);
        t[9].case = TraceCase::Filter(FilterCase::FailSafeStop);
        let m = compute_metrics(&t, &ctx());
        assert!((m.explored_area - 1.09).abs() < 1e-12);
        assert!((m.path_length - 0.2).abs() < 1e-12);
        assert!((m.avg_speed - 0.2).abs() < 1e-12);
        assert_eq!(m.min_clearance, 0.3);
        assert_eq!(m.obstacle_violation_ticks, 1);
        assert_eq!(m.frontier_violation_ticks, 1);
        assert_eq!(m.intervention_rate, 0.2);
        assert_eq!(m.speed_clips, 1);
        assert!((m.avg_slack - 0.04).abs() < 1e-15);
        assert_eq!(m.max_slack, 0.4);
        // Nine logged gains: eight of 0.6 and one of 1.0.
        assert!((m.avg_gamma2.unwrap() - 5.8 / 9.0).abs() < 1e-12);
        assert_eq!(m.ticks_evaluated, 10);
        assert_eq!(m.obstacle_active_ticks, 1);
        assert_eq!(m.frontier_active_ticks, 1);
        assert_eq!(m.infeasible_count, 2);
        assert_eq!(m.min_h1, -0.1);
        assert_eq!(m.min_h2, Some(-0.3));
        assert_eq!(m.contacts, 0);
    }

    #[test]
    fn hundred_ticks_five_interventions() {
        let mut t: Vec<TickRecord> = (0..100).map(rec).collect();
        for k in [3, 17, 40, 41, 99] {
            t[k].intervention = true;
        }
        assert_eq!(compute_metrics(&t, &ctx()).intervention_rate, 0.05);
    }

    #[test]
    fn stationary_robot() {
        let t: Vec<TickRecord> = (0..5)
            .map(|k| {
                let mut r = rec(k);
                r.position = Vec2::new(1.0, 1.0);
                r.next_position = r.position;
                r
            })
            .collect();
        let m = compute_metrics(&t, &ctx());
        assert_eq!(m.path_length, 0.0);
        assert_eq!(m.avg_speed, 0.0);
    }

    #[test]
    fn kv_lines_cover_every_field() {
        let m = compute_metrics(&[rec(0)], &ctx());
        let kv = m.to_kv();
        assert_eq!(kv.lines().count(), 18);
        assert!(kv.contains("metrics.avg_gamma2 = 0.6\n"));
    }
}
