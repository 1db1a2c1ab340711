//! Numerical decision procedures for the property hierarchy.

pub mod certificate;
pub mod checks;
pub mod config;
pub mod cut;
pub mod diagram;
pub mod partition;
pub mod sweep;

pub use certificate::{orbit_decomposition_check, uniformity_certificate, UniformityCertificate};
pub use checks::ConditionReport;
pub use config::{CheckConfig, GridConfig};
pub use cut::TheoremCut;
pub use diagram::{diagram_consistency, DiagramReport};
pub use partition::{estimate_partition, PartitionEstimate, PartitionSummary};
pub use sweep::{run_sweep, Sweep};

use crate::dynamics::SystemSpec;
use crate::error::Result;
use crate::verdict::{Condition, Status};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The scale at which the verdicts were reached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Scale {
    pub grid_points: usize,
    pub probe_points: usize,
    pub circles: usize,
    pub n_max: usize,
    pub test_functions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PropertyVerdict {
    pub system: String,
    pub config_hash: String,
    pub scale: Scale,
    pub verdicts: BTreeMap<Condition, ConditionReport>,
    pub diagram: DiagramReport,
    pub partition: PartitionReport,
    pub theorem_cut: TheoremCut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PartitionReport {
    pub atoms: usize,
    pub stable: bool,
    pub labels: Vec<String>,
    pub trace: Vec<String>,
}

impl PropertyVerdict {
    pub fn statuses(&self) -> BTreeMap<Condition, Status> {
        self.verdicts.iter().map(|(c, r)| (*c, r.status)).collect()
    }

    pub fn status(&self, c: Condition) -> Status {
        self.verdicts[&c].status
    }

    /// `(condition, expected, found)` for every expected entry that differs.
    pub fn mismatches(&self, expected: &BTreeMap<Condition, Status>) -> Vec<(Condition, Status, Status)> {
        expected
            .iter()
            .filter(|(c, s)| self.status(**c) != **s)
            .map(|(c, s)| (*c, *s, self.status(*c)))
            .collect()
    }

    pub fn any_inconclusive(&self) -> bool {
        self.verdicts.values().any(|r| r.status == Status::Inconclusive)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

fn derived(status: Status, from: &str) -> ConditionReport {
    ConditionReport::new(status).note(format!("derived as {from}"))
}

pub fn run_suite(system: &SystemSpec, cfg: &CheckConfig) -> Result<PropertyVerdict> {
    system.validate()?;
    cfg.validate()?;
    let sweep = run_sweep(system, cfg)?;
    let partition = estimate_partition(system, &sweep, cfg);

    let i = checks::check_pointwise_ergodic(&sweep, cfg);
    let ii = checks::check_semisimple(system, &sweep, cfg);
    let closed = checks::check_closed_atoms(system, &sweep, &partition, cfg)?;
    let iii = derived(i.status.and(closed.status), "I ∧ P-closed");
    let usc = checks::check_partition_usc(system, &sweep, &partition, closed.status, cfg)?;
    let v = checks::check_phi_continuity(&sweep, cfg, i.status, iii.status.and(usc.usc.status));
    let iv = derived(i.status.and(ii.status), "I ∧ II");
    let vi = derived(v.status.and(ii.status), "V ∧ II");
    let family = checks::ergodic_family(system, &sweep, &partition, cfg)?;
    let bs = checks::check_b_and_s(system, &sweep, &partition, &family, cfg)?;
    let u = checks::check_uniformity(&sweep, cfg, sweep.all());
    let cut = cut::check_theorem_cut(system, &sweep, cfg, iii.status, bs.b.status, bs.s.status)?;

    let verdicts: BTreeMap<Condition, ConditionReport> = [
        (Condition::I, i),
        (Condition::II, ii),
        (Condition::III, iii),
        (Condition::IV, iv),
        (Condition::PClosed, closed),
        (Condition::PUsc, usc.usc),
        (Condition::V, v),
        (Condition::VI, vi),
        (Condition::B, bs.b),
        (Condition::S, bs.s),
        (Condition::U, u),
    ]
    .into_iter()
    .collect();
    let statuses = verdicts.iter().map(|(c, r)| (*c, r.status)).collect();
    Ok(PropertyVerdict {
        system: system.name.clone(),
        config_hash: cfg.hash(),
        scale: Scale {
            grid_points: sweep.grid.len(),
            probe_points: sweep.probes.len(),
            circles: system.circles().len(),
            n_max: cfg.sweep_length().max(cfg.support_n),
            test_functions: sweep.family.len(),
        },
        verdicts,
        diagram: diagram_consistency(&statuses),
        partition: PartitionReport {
            atoms: partition.atoms.len(),
            stable: partition.stable,
            labels: partition.atoms.iter().map(|a| a.label.clone()).collect(),
            trace: partition.trace.clone(),
        },
        theorem_cut: cut,
    })
}
