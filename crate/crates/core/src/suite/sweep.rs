//! One orbit pass per sample point, shared by every check.

use super::config::CheckConfig;
use crate::dynamics::{dist, ComponentId, Point, SystemSpec};
use crate::error::Result;
use crate::measure::{moment_trace, TestFamily};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// regular grid point: enters every check
    Grid,
    /// point on a circle beyond the materialized ones, or far out on the
    /// integer line: only enters the uniformity checks
    Probe,
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub label: String,
    pub point: Point,
    pub pos: [f64; 2],
    pub role: Role,
    /// moment vectors at the sweep checkpoints
    pub signatures: Vec<Vec<f64>>,
    /// `min |x − T^i x|` over the ω-window
    pub recurrence: f64,
    /// thinned orbit points of the ω-window
    pub omega: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub checkpoints: Vec<usize>,
    pub grid: Vec<SweepPoint>,
    pub probes: Vec<SweepPoint>,
    pub family: TestFamily,
    n_schedule: Vec<usize>,
}

impl Sweep {
    pub fn signature_at<'a>(&self, p: &'a SweepPoint, n: usize) -> &'a [f64] {
        let i = self.checkpoints.iter().position(|&c| c == n).expect("checkpoint recorded");
        &p.signatures[i]
    }

    /// Moment vector of `Φ̂(x)` (largest schedule entry).
    pub fn phi<'a>(&self, p: &'a SweepPoint) -> &'a [f64] {
        self.signature_at(p, *self.n_schedule.last().unwrap())
    }

    /// Weak-star distances between consecutive schedule entries.
    pub fn phi_deltas(&self, p: &SweepPoint) -> Vec<f64> {
        self.n_schedule
            .windows(2)
            .map(|w| self.family.signature_distance(self.signature_at(p, w[0]), self.signature_at(p, w[1])))
            .collect()
    }

    pub fn phi_distance(&self, a: &SweepPoint, b: &SweepPoint) -> f64 {
        self.family.signature_distance(self.phi(a), self.phi(b))
    }

    pub fn all(&self) -> impl Iterator<Item = &SweepPoint> + Clone {
        self.grid.iter().chain(&self.probes)
    }

    pub fn n_schedule(&self) -> &[usize] {
        &self.n_schedule
    }
}

/// Grid points of every declared component.
pub fn build_grid(system: &SystemSpec, cfg: &CheckConfig) -> Vec<Point> {
    let g = &cfg.grid;
    let mut pts = Vec::new();
    for c in system.component_ids() {
        match c {
            ComponentId::Circle(_) => {
                pts.extend((0..g.per_circle).map(|j| Point::on(c, j as f64 / g.per_circle as f64)))
            }
            ComponentId::LimitCircle => {
                pts.extend((0..g.limit_circle).map(|j| Point::on(c, j as f64 / g.limit_circle as f64)))
            }
            ComponentId::TangentCircle => pts.extend(
                (0..g.tangent_circle).map(|j| Point::on(c, j as f64 / g.tangent_circle as f64)),
            ),
            ComponentId::IntegerLine => pts.extend((g.integer_min..=g.integer_max).map(Point::integer)),
            ComponentId::PlusInfinity => pts.push(Point::plus_infinity()),
            ComponentId::MinusInfinity => pts.push(Point::minus_infinity()),
        }
    }
    pts
}

/// Probe points beyond the materialized part of the system.
pub fn build_probes(system: &SystemSpec, cfg: &CheckConfig) -> Vec<Point> {
    let mut pts = Vec::new();
    if system.family.is_some() {
        let kmax = system.circles().last().copied().unwrap_or(1);
        for &m in &cfg.probe_multipliers {
            let k = kmax.saturating_mul(m);
            pts.extend((0..cfg.probe_angles).map(|j| Point::circle(k, j as f64 / cfg.probe_angles as f64)));
        }
    }
    if system.is_declared(ComponentId::IntegerLine) {
        pts.extend(cfg.integer_probe_exponents.iter().map(|&j| Point::integer(-(1i64 << j))));
    }
    pts
}

fn trace_point(
    system: &SystemSpec,
    cfg: &CheckConfig,
    family: &TestFamily,
    checkpoints: &[usize],
    point: Point,
    role: Role,
) -> Result<SweepPoint> {
    let pos = system.embed(&point)?;
    let (lo, hi) = (cfg.omega_burn, cfg.omega_burn + cfg.omega_keep);
    let cell = cfg.resolution / 2.0;
    let mut recurrence = f64::INFINITY;
    let mut seen = HashSet::new();
    let mut omega = Vec::new();
    let trace = moment_trace(system, &point, checkpoints, family, |i, q| {
        if i >= lo && i < hi {
            recurrence = recurrence.min(dist(q, pos));
            let key = ((q[0] / cell).floor() as i64, (q[1] / cell).floor() as i64);
            if seen.insert(key) {
                omega.push(q);
            }
        }
    })?;
    Ok(SweepPoint {
        label: point.to_string(),
        point,
        pos,
        role,
        signatures: trace.signatures,
        recurrence,
        omega,
    })
}

pub fn run_sweep(system: &SystemSpec, cfg: &CheckConfig) -> Result<Sweep> {
    let family = TestFamily::standard();
    let mut checkpoints = cfg.checkpoints();
    let len = cfg.sweep_length();
    if checkpoints.last() != Some(&len) {
        checkpoints.push(len);
    }
    let trace_all = |pts: Vec<Point>, role: Role| -> Result<Vec<SweepPoint>> {
        pts.into_par_iter()
            .map(|p| trace_point(system, cfg, &family, &checkpoints, p, role))
            .collect()
    };
    let grid = trace_all(build_grid(system, cfg), Role::Grid)?;
    let probes = trace_all(build_probes(system, cfg), Role::Probe)?;
    Ok(Sweep { checkpoints, grid, probes, family, n_schedule: cfg.n_schedule.clone() })
}
