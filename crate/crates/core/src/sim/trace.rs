use std::io::Write;

use crate::filter::FilterCase;
use crate::Vec2;

/// The filter's case, or `Bypass` when the filter is disabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceCase {
    Filter(FilterCase),
    Bypass,
}

impl TraceCase {
    pub fn name(self) -> &'static str {
        match self {
            TraceCase::Filter(c) => c.name(),
            TraceCase::Bypass => "Bypass",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        if name == "Bypass" {
            Some(TraceCase::Bypass)
        } else {
            FilterCase::from_name(name).map(TraceCase::Filter)
        }
    }

    pub fn is_infeasible(self) -> bool {
        matches!(
            self,
            TraceCase::Filter(FilterCase::SoftFallback) | TraceCase::Filter(FilterCase::FailSafeStop)
        )
    }
}

/// One control tick. Positions are taken before the integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    pub t: f64,
    pub position: Vec2,
    pub u_des: Vec2,
    pub u_safe: Vec2,
    pub h1: f64,
    pub h2: Option<f64>,
    pub sdf_obs: f64,
    pub sdf_unk: Option<f64>,
    pub rho: Option<f64>,
    pub gamma2: Option<f64>,
    pub case: TraceCase,
    pub lambda1: f64,
    pub lambda2: f64,
    pub slack: f64,
    pub speed_clipped: bool,
    pub intervention: bool,
    /// Position after the step.
    pub next_position: Vec2,
    /// Known belief cells after this tick's scan.
    pub known_cells: usize,
    /// Set on the tick whose step ended in contact.
    pub contact: bool,
}

pub const TRACE_COLUMNS: [&str; 20] = [
    "tick",
    "t",
    "px",
    "py",
    "udx",
    "udy",
    "usx",
    "usy",
    "h1",
    "h2",
    "sdf_obs",
    "sdf_unk",
    "rho",
    "gamma2",
    "case",
    "lambda1",
    "lambda2",
    "slack",
    "speed_clipped",
    "intervention",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TickRecord {
    pub fn csv_fields(&self) -> [String; 20] {
        [
            self.tick.to_string(),
            self.t.to_string(),
            self.position.x.to_string(),
            self.position.y.to_string(),
            self.u_des.x.to_string(),
            self.u_des.y.to_string(),
            self.u_safe.x.to_string(),
            self.u_safe.y.to_string(),
            self.h1.to_string(),
            opt(self.h2),
            self.sdf_obs.to_string(),
            opt(self.sdf_unk),
            opt(self.rho),
            opt(self.gamma2),
            self.case.name().to_string(),
            self.lambda1.to_string(),
            self.lambda2.to_string(),
            self.slack.to_string(),
            u8::from(self.speed_clipped).to_string(),
            u8::from(self.intervention).to_string(),
        ]
    }
}

pub fn write_trace_csv<W: Write>(trace: &[TickRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for rec in trace {
        w.write_record(rec.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}
