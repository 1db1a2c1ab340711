//! Finite point clouds as stand-ins for compact sets: Hausdorff distance,
//! support estimation and semicontinuity checks along sequences of sets.

use crate::dynamics::dist;
use crate::error::{LabError, Result};
use crate::measure::EmpiricalMeasure;
use crate::verdict::Status;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, Write};

/// Clouds larger than this are subsampled before distance computations.
pub const CLOUD_CAP: usize = 10_000;

/// A finite δ-net of a compact planar set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactSetApprox {
    cloud: Vec<[f64; 2]>,
    resolution: f64,
}

fn cell_key(p: [f64; 2], side: f64) -> (i64, i64) {
    ((p[0] / side).floor() as i64, (p[1] / side).floor() as i64)
}

impl CompactSetApprox {
    /// Builds a cloud, dropping points within `δ/10` of an earlier point.
    pub fn new(points: Vec<[f64; 2]>, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(LabError::Argument(format!("resolution {resolution} must be positive")));
        }
        if points.is_empty() {
            return Err(LabError::Argument("compact set approximation needs a point".into()));
        }
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(LabError::Argument("non-finite cloud point".into()));
        }
        let side = resolution / 10.0;
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut cloud: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        'outer: for p in points {
            let (cx, cy) = cell_key(p, side);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = cells.get(&(cx + dx, cy + dy)) {
                        if ids.iter().any(|&i| dist(cloud[i], p) < side) {
                            continue 'outer;
                        }
                    }
                }
            }
            cells.entry((cx, cy)).or_default().push(cloud.len());
            cloud.push(p);
        }
        Ok(CompactSetApprox { cloud, resolution })
    }

    pub fn singleton(p: [f64; 2], resolution: f64) -> Result<Self> {
        Self::new(vec![p], resolution)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.cloud
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// Union of two clouds at the coarser resolution.
    pub fn union(&self, other: &CompactSetApprox) -> CompactSetApprox {
        let mut pts = self.cloud.clone();
        pts.extend_from_slice(&other.cloud);
        CompactSetApprox::new(pts, self.resolution.max(other.resolution)).expect("nonempty union")
    }

    /// Distance from a point to the cloud.
    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        self.cloud.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min)
    }

    /// Deterministic stride subsample down to at most `cap` points.
    fn capped(&self, cap: usize) -> Vec<[f64; 2]> {
        if self.cloud.len() <= cap {
            return self.cloud.clone();
        }
        let stride = self.cloud.len().div_ceil(cap);
        self.cloud.iter().step_by(stride).copied().collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# resolution={:e}", self.resolution)?;
        writeln!(out, "x,y")?;
        for p in &self.cloud {
            writeln!(out, "{:e},{:e}", p[0], p[1])?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut resolution = None;
        let mut pts = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if let Some(r) = t.strip_prefix("# resolution=") {
                resolution = Some(r.parse::<f64>().map_err(|e| {
                    LabError::Parse(format!("bad resolution on line {}: {e}", lineno + 1))
                })?);
                continue;
            }
            if t.is_empty() || t.starts_with('#') || t == "x,y" {
                continue;
            }
            let mut it = t.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| LabError::Parse(format!("bad cloud point on line {}", lineno + 1)))
            };
            pts.push([parse(it.next())?, parse(it.next())?]);
        }
        let resolution =
            resolution.ok_or_else(|| LabError::Parse("missing `# resolution=` header".into()))?;
        Self::new(pts, resolution)
    }
}

/// Directed Hausdorff distance `max_{a∈A} min_{b∈B} |a − b|`.
pub fn excess(a: &CompactSetApprox, b: &CompactSetApprox) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(LabError::Argument("excess of an empty cloud".into()));
    }
    Ok(excess_points(&a.capped(CLOUD_CAP), &b.capped(CLOUD_CAP)))
}

/// Brute-force directed distance with the usual early exit: once a point of
/// `a` is closer than the running maximum to some point of `b`, it cannot
/// raise the maximum.
pub fn excess_points(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mut worst: f64 = 0.0;
    for &p in a {
        let mut best = f64::INFINITY;
        for &q in b {
            let d = dist(p, q);
            if d < best {
                best = d;
                if best <= worst {
                    break;
                }
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

pub fn hausdorff_distance(a: &CompactSetApprox, b: &CompactSetApprox) -> Result<f64> {
    Ok(excess(a, b)?.max(excess(b, a)?))
}

/// Clusters the samples of `μ` into cells of diameter `δ`, keeps cells whose
/// merged weight exceeds `weight_floor` and returns one point per cell.
pub fn support_estimate(mu: &EmpiricalMeasure, weight_floor: f64, delta: f64) -> Result<CompactSetApprox> {
    if !(delta > 0.0) {
        return Err(LabError::Argument("clustering radius must be positive".into()));
    }
    if !(0.0..=mu.max_weight()).contains(&weight_floor) {
        return Err(LabError::Argument(format!(
            "weight floor {weight_floor} outside [0, {}]",
            mu.max_weight()
        )));
    }
    let side = delta / std::f64::consts::SQRT_2;
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut cells: Vec<([f64; 2], f64)> = Vec::new();
    for s in &mu.samples {
        let key = cell_key(s.pos, side);
        match index.get(&key) {
            Some(&i) => cells[i].1 += s.weight,
            None => {
                index.insert(key, cells.len());
                cells.push((s.pos, s.weight));
            }
        }
    }
    let kept: Vec<[f64; 2]> = cells.into_iter().filter(|c| c.1 > weight_floor).map(|c| c.0).collect();
    if kept.is_empty() {
        return Err(LabError::DegenerateSupport(format!(
            "no cluster of {} exceeds weight floor {weight_floor}",
            mu.system
        )));
    }
    CompactSetApprox::new(kept, delta)
}

/// Outcome of a semicontinuity check along a sequence of sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicontinuityReport {
    pub status: Status,
    /// Hausdorff gaps between the last three sequence entries
    pub cauchy_gaps: Vec<f64>,
    /// the directed excess that decides the check
    pub excess: f64,
}

/// Hausdorff gaps between consecutive entries among the last three.
pub fn cauchy_tail(sequence: &[(u32, CompactSetApprox)]) -> Result<Vec<f64>> {
    if sequence.len() < 3 {
        return Err(LabError::Argument("Cauchy test needs at least three sets".into()));
    }
    let tail = &sequence[sequence.len() - 3..];
    tail.windows(2).map(|w| hausdorff_distance(&w[0].1, &w[1].1)).collect()
}

fn semicontinuity(
    sequence: &[(u32, CompactSetApprox)],
    directed: Result<f64>,
    tol: f64,
) -> Result<SemicontinuityReport> {
    let gaps = cauchy_tail(sequence)?;
    let excess = directed?;
    let status = if gaps.iter().any(|&g| g > tol) {
        Status::Inconclusive
    } else {
        Status::from_bool(excess <= tol)
    };
    Ok(SemicontinuityReport { status, cauchy_gaps: gaps, excess })
}

/// Upper semicontinuity along a sequence: the limit must sit inside the atom.
pub fn usc_check(
    sequence: &[(u32, CompactSetApprox)],
    limit_candidate: &CompactSetApprox,
    containing_atom: &CompactSetApprox,
    tol: f64,
) -> Result<SemicontinuityReport> {
    semicontinuity(sequence, excess(limit_candidate, containing_atom), tol)
}

/// Lower semicontinuity: the atom must sit inside the limit.
pub fn lsc_check(
    sequence: &[(u32, CompactSetApprox)],
    limit_candidate: &CompactSetApprox,
    contained_atom: &CompactSetApprox,
    tol: f64,
) -> Result<SemicontinuityReport> {
    semicontinuity(sequence, excess(contained_atom, limit_candidate), tol)
}

/// Uniform-grid bucket index over tagged planar points, for "anything
/// within r?" queries against large raw point sets.
#[derive(Clone, Debug)]
pub struct SpatialHash<T> {
    side: f64,
    cells: HashMap<(i64, i64), Vec<([f64; 2], T)>>,
}

impl<T: Copy> SpatialHash<T> {
    pub fn new(side: f64) -> Self {
        assert!(side > 0.0, "cell side must be positive");
        SpatialHash { side, cells: HashMap::new() }
    }

    pub fn insert(&mut self, p: [f64; 2], tag: T) {
        self.cells.entry(cell_key(p, self.side)).or_default().push((p, tag));
    }

    /// Points within `side` of `p` (plus some slightly farther ones), with
    /// their distances.
    pub fn near(&self, p: [f64; 2]) -> impl Iterator<Item = (f64, T)> + '_ {
        let (cx, cy) = cell_key(p, self.side);
        (-1..=1)
            .flat_map(move |dx| (-1..=1).map(move |dy| (cx + dx, cy + dy)))
            .filter_map(move |k| self.cells.get(&k))
            .flatten()
            .map(move |&(q, t)| (dist(p, q), t))
    }
}

/// Dense cloud on a planar circle.
pub fn circle_cloud(center: [f64; 2], r: f64, m: usize, resolution: f64) -> Result<CompactSetApprox> {
    let pts = (0..m)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / m as f64;
            [center[0] + r * t.cos(), center[1] + r * t.sin()]
        })
        .collect();
    CompactSetApprox::new(pts, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_within_tenth_of_resolution() {
        let c = CompactSetApprox::new(vec![[0.0, 0.0], [0.0005, 0.0], [0.5, 0.0]], 0.01).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn asymmetric_excess() {
        let circle = circle_cloud([0.0, 0.0], 1.0, 2000, 0.005).unwrap();
        let point = CompactSetApprox::singleton([1.0, 0.0], 0.005).unwrap();
        assert!(excess(&point, &circle).unwrap() <= 0.005);
        assert!((excess(&circle, &point).unwrap() - 2.0).abs() < 0.01);
    }

    #[test]
    fn csv_round_trip() {
        let c = circle_cloud([1.0, -2.0], 0.5, 50, 0.01).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = CompactSetApprox::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn empty_cloud_rejected() {
        assert!(CompactSetApprox::new(vec![], 0.1).is_err());
    }
}
