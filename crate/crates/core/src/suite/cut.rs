//! For partitionable systems: the union of minimal sets is closed and
//! strictly uniform exactly when the ergodic set is compact and supports
//! vary continuously.

use super::checks::check_uniformity;
use super::config::CheckConfig;
use super::partition::component_cloud;
use super::sweep::{Sweep, SweepPoint};
use crate::dynamics::{Approach, MinimalSetDecl, SystemSpec};
use crate::error::Result;
use crate::topology::{excess, CompactSetApprox};
use crate::verdict::Status;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TheoremCut {
    pub applicable: bool,
    /// union of minimal sets is closed (proxy)
    pub closed: Status,
    /// strict uniformity on the union of minimal sets
    pub strictly_uniform: Status,
    /// `closed ∧ strictly_uniform`
    pub lhs: Status,
    /// `B ∧ S`
    pub rhs: Status,
    /// `None` when either side is inconclusive or the check does not apply
    pub agrees: Option<bool>,
    pub evidence: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TheoremCut {
    fn not_applicable(note: &str) -> Self {
        TheoremCut {
            applicable: false,
            closed: Status::Inconclusive,
            strictly_uniform: Status::Inconclusive,
            lhs: Status::Inconclusive,
            rhs: Status::Inconclusive,
            agrees: None,
            evidence: BTreeMap::new(),
            notes: vec![note.to_string()],
        }
    }
}

/// Membership in the estimated union of minimal sets.
fn in_minimal_union(system: &SystemSpec, p: &SweepPoint, tol_h: f64) -> bool {
    match system.metadata.as_ref().filter(|m| !m.minimal_sets.is_empty()) {
        Some(meta) => meta.minimal_sets.iter().any(|m| m.contains(&p.point)),
        None => p.recurrence <= tol_h,
    }
}

pub fn check_theorem_cut(
    system: &SystemSpec,
    sweep: &Sweep,
    cfg: &CheckConfig,
    partitionable: Status,
    b: Status,
    s: Status,
) -> Result<TheoremCut> {
    if partitionable != Status::Holds {
        return Ok(TheoremCut::not_applicable("the system is not (known to be) partitionable"));
    }
    let tol_h = cfg.tol_h();
    let mut evidence = BTreeMap::new();
    let mut notes = Vec::new();
    let source = if system.metadata.as_ref().is_some_and(|m| !m.minimal_sets.is_empty()) {
        "declared minimal sets"
    } else {
        "recurrent grid points"
    };
    notes.push(format!("union of minimal sets taken from {source}"));

    let closed = match system.approach {
        None => {
            notes.push("finitely many components: the union is a finite union of closed sets".into());
            Status::Holds
        }
        Some(Approach::Circles { limit }) => {
            let kmax = system.circles().last().copied();
            let on_last: Vec<[f64; 2]> = sweep
                .grid
                .iter()
                .filter(|p| p.point.component.circle_index() == kmax && in_minimal_union(system, p, tol_h))
                .flat_map(|p| p.omega.iter().copied())
                .collect();
            let mut on_limit: Vec<[f64; 2]> = sweep
                .grid
                .iter()
                .filter(|p| p.point.component == limit && in_minimal_union(system, p, tol_h))
                .flat_map(|p| p.omega.iter().copied().chain(std::iter::once(p.pos)))
                .collect();
            for m in system.metadata.iter().flat_map(|m| &m.minimal_sets) {
                match m {
                    MinimalSetDecl::WholeComponent { component } | MinimalSetDecl::EveryPoint { component }
                        if *component == limit =>
                    {
                        on_limit.extend(component_cloud(system, limit, cfg.resolution))
                    }
                    MinimalSetDecl::FixedPoint { point } if point.component == limit => {
                        on_limit.push(system.embed(point)?)
                    }
                    _ => {}
                }
            }
            if on_last.is_empty() || on_limit.is_empty() {
                notes.push("no minimal sets sampled on the outermost circle or on the limit".into());
                Status::Inconclusive
            } else {
                let ex = excess(
                    &CompactSetApprox::new(on_last, cfg.resolution)?,
                    &CompactSetApprox::new(on_limit, cfg.resolution)?,
                )?;
                evidence.insert("outermost_minimal_excess".to_string(), ex);
                Status::from_bool(ex <= tol_h)
            }
        }
    };

    let members: Vec<&SweepPoint> = sweep.all().filter(|p| in_minimal_union(system, p, tol_h)).collect();
    let u = check_uniformity(sweep, cfg, members.iter().copied());
    let recurrent = members.iter().filter(|p| p.recurrence.is_finite()).all(|p| p.recurrence <= tol_h);
    evidence.insert("minimal_points".to_string(), members.len() as f64);
    if let Some(g) = u.evidence.get("max_tail_gap") {
        evidence.insert("restricted_uniformity_gap".to_string(), *g);
    }
    let strictly_uniform = u.status.and(Status::from_bool(recurrent));
    let lhs = closed.and(strictly_uniform);
    let rhs = b.and(s);
    let agrees = match (lhs.definite(), rhs.definite()) {
        (Some(l), Some(r)) => Some(l == r),
        _ => None,
    };
    if agrees == Some(false) {
        notes.push("closed ∧ strictly uniform disagrees with B ∧ S".into());
    }
    Ok(TheoremCut { applicable: true, closed, strictly_uniform, lhs, rhs, agrees, evidence, notes })
}
