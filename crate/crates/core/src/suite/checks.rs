//! The individual property checks. Each returns a [`ConditionReport`] with
//! numeric evidence and witness labels.

use super::config::CheckConfig;
use super::partition::{Atom, PartitionEstimate};
use super::sweep::{Sweep, SweepPoint};
use crate::dynamics::{dist, Approach, ComponentId, Point, SystemSpec};
use crate::error::Result;
use crate::measure::{EmpiricalMeasure, ErgodicEntry, ErgodicFamily};
use crate::topology::{
    excess, hausdorff_distance, lsc_check, support_estimate, usc_check, CompactSetApprox, SpatialHash,
};
use crate::verdict::Status;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub status: Status,
    pub evidence: BTreeMap<String, f64>,
    pub witnesses: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(status: Status) -> Self {
        ConditionReport { status, evidence: BTreeMap::new(), witnesses: Vec::new(), notes: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.evidence.insert(key.to_string(), value);
        self
    }

    pub fn witness(mut self, w: impl Into<String>) -> Self {
        self.witnesses.push(w.into());
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }
}

/// Grid indices of points on the limit component, when there is one.
fn limit_component(system: &SystemSpec) -> Option<ComponentId> {
    match system.approach {
        Some(Approach::Circles { limit }) => Some(limit),
        None => None,
    }
}

// ---------------------------------------------------------------------------
// (I)

pub fn check_pointwise_ergodic(sweep: &Sweep, cfg: &CheckConfig) -> ConditionReport {
    let mut worst = (0.0f64, None::<&SweepPoint>);
    let mut failing = 0usize;
    let mut first_fail = None;
    for p in &sweep.grid {
        let d = sweep.phi_deltas(p).last().copied().unwrap_or(0.0);
        if d > worst.0 || worst.1.is_none() {
            worst = (d, Some(p));
        }
        if d > cfg.ws_tol {
            failing += 1;
            first_fail.get_or_insert(p.label.clone());
        }
    }
    let mut r = ConditionReport::new(Status::from_bool(failing == 0))
        .with("grid_points", sweep.grid.len() as f64)
        .with("max_cauchy_residual", worst.0)
        .with("non_cauchy_points", failing as f64)
        .with("tolerance", cfg.ws_tol);
    if let Some(w) = first_fail {
        r = r.witness(w);
    }
    r
}

// ---------------------------------------------------------------------------
// (II)

pub fn check_semisimple(system: &SystemSpec, sweep: &Sweep, cfg: &CheckConfig) -> ConditionReport {
    let tol = cfg.tol_h();
    let mut worst: Option<&SweepPoint> = None;
    let mut failing = 0usize;
    for p in &sweep.grid {
        if p.recurrence > tol {
            failing += 1;
        }
        if worst.is_none_or(|w| p.recurrence > w.recurrence) {
            worst = Some(p);
        }
    }
    let mut r = ConditionReport::new(Status::from_bool(failing == 0))
        .with("max_recurrence_distance", worst.map_or(0.0, |w| w.recurrence))
        .with("non_recurrent_points", failing as f64)
        .with("tolerance", tol)
        .note(format!(
            "recurrence measured over orbit indices [{}, {})",
            cfg.omega_burn,
            cfg.omega_burn + cfg.omega_keep
        ));
    if failing > 0 {
        r = r.witness(worst.unwrap().label.clone());
    }
    if let Some(meta) = system.metadata.as_ref().filter(|m| !m.minimal_sets.is_empty()) {
        let disagreements = sweep
            .grid
            .iter()
            .filter(|p| meta.minimal_sets.iter().any(|m| m.contains(&p.point)) != (p.recurrence <= tol))
            .count();
        r = r.with("metadata_disagreements", disagreements as f64);
        if disagreements > 0 {
            r = r.note(
                "some grid points disagree with the declared minimal sets; \
                 finite recurrence windows cannot resolve slow returns",
            );
        }
    }
    r
}

// ---------------------------------------------------------------------------
// (P-closed)

struct Enriched {
    /// raw orbit points tagged with their orbit step
    raw: Vec<([f64; 2], usize)>,
    cloud: CompactSetApprox,
}

fn enrich(system: &SystemSpec, sweep: &Sweep, atom: &Atom, cfg: &CheckConfig) -> Result<Enriched> {
    let lmax = *cfg.closure_lengths.last().unwrap();
    let mut raw = Vec::with_capacity(2 * lmax * atom.members.len());
    for &i in &atom.members {
        let x = &sweep.grid[i].point;
        for mut w in [system.walker(x)?, system.walker_backward(x)?] {
            for step in 0..lmax {
                raw.push((w.position(), step));
                w.advance();
            }
        }
    }
    let cloud = CompactSetApprox::new(raw.iter().map(|r| r.0).collect(), cfg.resolution)?;
    Ok(Enriched { raw, cloud })
}

/// Distances from `y` to the orbit samples of each closure length, if the
/// longest one comes within `eps` of it.
fn approach_profile(e: &Enriched, hash: &SpatialHash<usize>, y: [f64; 2], lengths: &[usize], eps: f64) -> Option<Vec<f64>> {
    let hit = hash.near(y).any(|(d, _)| d <= eps);
    if !hit {
        return None;
    }
    let mut dists = vec![f64::INFINITY; lengths.len()];
    for &(q, step) in &e.raw {
        let d = dist(q, y);
        for (slot, &len) in dists.iter_mut().zip(lengths) {
            if step < len && d < *slot {
                *slot = d;
            }
        }
    }
    Some(dists)
}

pub fn check_closed_atoms(
    system: &SystemSpec,
    sweep: &Sweep,
    partition: &PartitionEstimate,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let tol = cfg.tol_h();
    let mut worst_excess = 0.0f64;
    let mut witnesses = Vec::new();
    let mut excess_witness = None;
    for (a, atom) in partition.atoms.iter().enumerate() {
        let e = enrich(system, sweep, atom, cfg)?;
        let ex = excess(&e.cloud, &atom.cloud)?;
        if ex > worst_excess {
            worst_excess = ex;
            if ex > tol {
                excess_witness = Some(format!("orbit samples of atom {} leave it by {ex:.3e}", atom.label));
            }
        }
        // grid points of other atoms that the atom's orbits accumulate on
        let mut hash = SpatialHash::new(cfg.limit_eps);
        for &(q, step) in &e.raw {
            hash.insert(q, step);
        }
        for (j, y) in sweep.grid.iter().enumerate() {
            if partition.assignment[j] == a {
                continue;
            }
            let Some(d) = approach_profile(&e, &hash, y.pos, &cfg.closure_lengths, cfg.limit_eps) else {
                continue;
            };
            // strictly closer with longer orbits: an accumulation, not a hit
            if d[0] > *d.last().unwrap() {
                witnesses.push(format!("{} (accumulated by atom {}; distances {:?})", y.label, atom.label, d));
            }
        }
    }
    let holds = witnesses.is_empty() && excess_witness.is_none();
    let mut r = ConditionReport::new(Status::from_bool(holds))
        .with("atoms", partition.atoms.len() as f64)
        .with("max_orbit_excess", worst_excess)
        .with("limit_point_witnesses", witnesses.len() as f64)
        .with("tolerance", tol)
        .with("limit_eps", cfg.limit_eps);
    if let Some(w) = excess_witness {
        r = r.witness(w);
    }
    for w in witnesses {
        r = r.witness(w);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// (P-usc)

/// Atom of each materialized circle, indexed by circle, via its origin.
fn circle_atoms<'a>(sweep: &Sweep, partition: &'a PartitionEstimate) -> Vec<(u32, &'a Atom)> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, p) in sweep.grid.iter().enumerate() {
        if let ComponentId::Circle(k) = p.point.component {
            if seen.insert(k) {
                out.push((k, partition.atom_of(i)));
            }
        }
    }
    out.sort_by_key(|e| e.0);
    out
}

fn limit_atoms<'a>(sweep: &Sweep, partition: &'a PartitionEstimate, limit: ComponentId) -> Vec<&'a Atom> {
    partition.atoms.iter().filter(|a| a.touches(limit, sweep)).collect()
}

#[derive(Clone, Debug)]
pub struct UscOutcome {
    pub usc: ConditionReport,
    /// excess of the containing atom over the limit set (lsc evidence)
    pub lsc_excess: Option<f64>,
    pub lsc_status: Status,
}

pub fn check_partition_usc(
    system: &SystemSpec,
    sweep: &Sweep,
    partition: &PartitionEstimate,
    closed: Status,
    cfg: &CheckConfig,
) -> Result<UscOutcome> {
    let tol = cfg.tol_h();
    let Some(limit) = limit_component(system) else {
        let r = ConditionReport::new(Status::Holds)
            .note("no structured sequence of atoms: nothing to test at this scale");
        return Ok(UscOutcome { usc: r, lsc_excess: None, lsc_status: Status::Holds });
    };
    if closed != Status::Holds || !partition.stable {
        let r = ConditionReport::new(Status::Inconclusive)
            .note("needs closed atoms and a stable partition estimate")
            .with("partition_stable", partition.stable as u8 as f64);
        return Ok(UscOutcome { usc: r, lsc_excess: None, lsc_status: Status::Inconclusive });
    }
    let seq: Vec<(u32, CompactSetApprox)> =
        circle_atoms(sweep, partition).into_iter().map(|(k, a)| (k, a.cloud.clone())).collect();
    let (kmax, s_lim) = seq.last().cloned().expect("approach implies circles");
    let mut best: Option<(&Atom, f64)> = None;
    for a in limit_atoms(sweep, partition, limit) {
        let ex = excess(&s_lim, &a.cloud)?;
        if best.is_none_or(|b| ex < b.1) {
            best = Some((a, ex));
        }
    }
    let (atom, _) = best.expect("limit component has grid points");
    let usc = usc_check(&seq, &s_lim, &atom.cloud, tol)?;
    let lsc = lsc_check(&seq, &s_lim, &atom.cloud, tol)?;
    let mut r = ConditionReport::new(usc.status)
        .with("limit_excess_over_atom", usc.excess)
        .with("atom_excess_over_limit", lsc.excess)
        .with("cauchy_gap_last", *usc.cauchy_gaps.last().unwrap())
        .with("tolerance", tol)
        .note(format!("limit of atoms of circle(k) approximated at k = {kmax}; containing atom {}", atom.label));
    if usc.status == Status::Fails {
        r = r.witness(format!("atoms of circle(k) -> limit not inside any atom; nearest {}", atom.label));
    }
    if lsc.status == Status::Fails {
        r = r.note(format!(
            "not lower semicontinuous: atom {} sticks out of the limit set by {:.3}",
            atom.label, lsc.excess
        ));
    }
    Ok(UscOutcome { usc: r, lsc_excess: Some(lsc.excess), lsc_status: lsc.status })
}

// ---------------------------------------------------------------------------
// (V)

pub fn check_phi_continuity(
    sweep: &Sweep,
    cfg: &CheckConfig,
    pointwise: Status,
    via_partition: Status,
) -> ConditionReport {
    if pointwise == Status::Fails {
        return ConditionReport::new(Status::Fails).note("Φ is not defined everywhere: (I) fails");
    }
    let mut holds = true;
    let mut r = ConditionReport::new(Status::Holds);
    let mut tested = 0usize;
    for (pi, &(delta, eps)) in cfg.modulus_pairs.iter().enumerate() {
        let mut worst = (0.0f64, None::<(usize, usize)>);
        let mut hash = SpatialHash::new(delta);
        for (i, p) in sweep.grid.iter().enumerate() {
            hash.insert(p.pos, i);
        }
        for (i, p) in sweep.grid.iter().enumerate() {
            let mut near: Vec<usize> =
                hash.near(p.pos).filter(|&(d, j)| j > i && d <= delta).map(|(_, j)| j).collect();
            near.sort_unstable();
            for j in near {
                tested += 1;
                let d = sweep.phi_distance(p, &sweep.grid[j]);
                if d > worst.0 {
                    worst = (d, Some((i, j)));
                }
            }
        }
        r = r.with(&format!("modulus_{pi}_delta"), delta).with(&format!("modulus_{pi}_max_distance"), worst.0);
        if worst.0 > eps {
            holds = false;
            let (i, j) = worst.1.unwrap();
            r = r.witness(format!(
                "{} ~ {} (|x-y| <= {delta}, d(Φ̂x, Φ̂y) = {:.3e} > {eps})",
                sweep.grid[i].label, sweep.grid[j].label, worst.0
            ));
        }
    }
    r = r.with("pairs_tested", tested as f64);
    let modulus = Status::from_bool(holds);
    r.status = match via_partition.definite() {
        Some(v) if v != holds => {
            r = r.note("modulus test and (III) ∧ P-usc disagree");
            Status::Inconclusive
        }
        _ => modulus,
    };
    r
}

// ---------------------------------------------------------------------------
// Ergodic family, (B) and (S)

/// Measures of every atom's representative, binned for support estimation.
pub fn ergodic_family(
    system: &SystemSpec,
    sweep: &Sweep,
    partition: &PartitionEstimate,
    cfg: &CheckConfig,
) -> Result<ErgodicFamily> {
    let n = *cfg.n_schedule.last().unwrap();
    let mut fam = ErgodicFamily::default();
    for a in &partition.atoms {
        let rep = &sweep.grid[a.representative];
        fam.push(ErgodicEntry {
            label: a.label.clone(),
            representative: rep.point,
            signature: sweep.phi(rep).to_vec(),
            measure: EmpiricalMeasure::binned_orbit(system, &rep.point, n, cfg.resolution / 4.0)?,
        })?;
    }
    Ok(fam)
}

fn long_support(system: &SystemSpec, x: &Point, cfg: &CheckConfig) -> Result<CompactSetApprox> {
    let mu = EmpiricalMeasure::binned_orbit(system, x, cfg.support_n, cfg.resolution / 4.0)?;
    let floor = cfg.support_floor.min(mu.max_weight());
    support_estimate(&mu, floor, cfg.resolution)
}

#[derive(Clone, Debug)]
pub struct BsOutcome {
    pub b: ConditionReport,
    pub s: ConditionReport,
}

pub fn check_b_and_s(
    system: &SystemSpec,
    sweep: &Sweep,
    partition: &PartitionEstimate,
    family: &ErgodicFamily,
    cfg: &CheckConfig,
) -> Result<BsOutcome> {
    let Some(limit) = limit_component(system) else {
        let note = "no structured sequence of ergodic measures: finitely many atoms at this scale";
        return Ok(BsOutcome {
            b: ConditionReport::new(Status::Holds).note(note),
            s: ConditionReport::new(Status::Holds).note(note),
        });
    };
    let seq: Vec<(u32, &ErgodicEntry)> = circle_atoms(sweep, partition)
        .into_iter()
        .map(|(k, a)| (k, family.get(&a.label).expect("every atom has an entry")))
        .collect();
    let tail = &seq[seq.len().saturating_sub(3)..];
    let gaps: Vec<f64> = tail
        .windows(2)
        .map(|w| sweep.family.signature_distance(&w[0].1.signature, &w[1].1.signature))
        .collect();
    let (kmax, mu_star) = *seq.last().unwrap();
    if gaps.iter().any(|&g| g > cfg.b_tol) {
        let r = ConditionReport::new(Status::Inconclusive)
            .with("cauchy_gap_last", *gaps.last().unwrap_or(&0.0))
            .note("no Cauchy tail in the sequence of circle measures");
        return Ok(BsOutcome { b: r.clone(), s: r });
    }
    let supp_star = long_support(system, &mu_star.representative, cfg)?;
    // candidates: limit-atom grid points inside the support of the limit
    let tol_h = cfg.tol_h();
    let mut best: Option<(&SweepPoint, f64)> = None;
    let mut candidates = 0usize;
    for (i, p) in sweep.grid.iter().enumerate() {
        if !partition.atom_of(i).touches(limit, sweep) || supp_star.distance_to(p.pos) > tol_h {
            continue;
        }
        candidates += 1;
        let d = sweep.family.signature_distance(&mu_star.signature, sweep.phi(p));
        if best.is_none_or(|b| d < b.1) {
            best = Some((p, d));
        }
    }
    let mut b = ConditionReport::new(Status::Fails)
        .with("cauchy_gap_last", *gaps.last().unwrap_or(&0.0))
        .with("candidates", candidates as f64)
        .with("tolerance", cfg.b_tol)
        .note(format!("limit measure approximated by the measure of circle({kmax})"));
    let Some((xstar, d)) = best else {
        b = b.witness(format!("measure of circle({kmax}): no limit-component point in its support"));
        let s = ConditionReport::new(Status::Holds)
            .note("the limit of the circle measures is not ergodic; no convergent sequence in the ergodic set");
        return Ok(BsOutcome { b, s });
    };
    b = b.with("distance_to_nearest_ergodic", d);
    if d > cfg.b_tol {
        b = b.witness(format!(
            "measures of circle(k) converge to a measure at distance {d:.3e} from Φ̂({}), the closest ergodic candidate",
            xstar.label
        ));
        let s = ConditionReport::new(Status::Holds)
            .with("distance_to_nearest_ergodic", d)
            .note("the limit of the circle measures is not ergodic; (S) holds vacuously along this sequence");
        return Ok(BsOutcome { b, s });
    }
    b.status = Status::Holds;
    b = b.note(format!("limit matches Φ̂({})", xstar.label));

    // (S): supports along the tail against the support of the matched limit
    let supp_limit = long_support(system, &xstar.point, cfg)?;
    let mut s = ConditionReport::new(Status::Holds).with("tolerance", cfg.s_tol);
    let mut last = 0.0;
    for (k, e) in tail {
        let supp_k = if *k == kmax { supp_star.clone() } else { long_support(system, &e.representative, cfg)? };
        last = hausdorff_distance(&supp_k, &supp_limit)?;
        s = s.with(&format!("support_distance_k{k}"), last);
    }
    if last > cfg.s_tol {
        s.status = Status::Fails;
        s = s.witness(format!(
            "supp(measure of circle({kmax})) vs supp(Φ̂({})): Hausdorff distance {last:.3}",
            xstar.label
        ));
    }
    Ok(BsOutcome { b, s })
}

// ---------------------------------------------------------------------------
// (U)

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformityGaps {
    /// `(n, max |A_n − A_{2n}|)` over the schedule
    pub per_n: Vec<(usize, f64)>,
    pub witness: Option<(usize, String, usize)>,
}

/// `max |A_n^f − A_{2n}^f|` over the selected points for every scheduled `n`.
pub fn uniformity_gaps<'a>(
    sweep: &Sweep,
    cfg: &CheckConfig,
    points: impl Iterator<Item = &'a SweepPoint> + Clone,
) -> UniformityGaps {
    let mut per_n = Vec::new();
    let mut worst_tail: (f64, Option<(usize, String, usize)>) = (0.0, None);
    let tail_from = cfg.u_schedule.len() - cfg.u_tail;
    for (si, &n) in cfg.u_schedule.iter().enumerate() {
        let mut m = 0.0f64;
        for p in points.clone() {
            let (a, b) = (sweep.signature_at(p, n), sweep.signature_at(p, 2 * n));
            for j in 1..=cfg.u_observables {
                let g = (a[j] - b[j]).abs();
                if g > m {
                    m = g;
                }
                if si >= tail_from && g > worst_tail.0 {
                    worst_tail = (g, Some((j, p.label.clone(), n)));
                }
            }
        }
        per_n.push((n, m));
    }
    UniformityGaps { per_n, witness: worst_tail.1 }
}

pub fn check_uniformity<'a>(
    sweep: &Sweep,
    cfg: &CheckConfig,
    points: impl Iterator<Item = &'a SweepPoint> + Clone,
) -> ConditionReport {
    let gaps = uniformity_gaps(sweep, cfg, points.clone());
    let tail = &gaps.per_n[gaps.per_n.len() - cfg.u_tail..];
    let worst = tail.iter().map(|t| t.1).fold(0.0, f64::max);
    let holds = worst <= cfg.u_tol;
    let mut r = ConditionReport::new(Status::from_bool(holds))
        .with("tolerance", cfg.u_tol)
        .with("points", points.count() as f64)
        .with("max_tail_gap", worst);
    for (n, g) in &gaps.per_n {
        r = r.with(&format!("gap_n{n}"), *g);
    }
    if !holds {
        if let Some((j, label, n)) = gaps.witness {
            r = r.witness(format!("f_{j} at {label}, n = {n}"));
        }
    }
    r
}
