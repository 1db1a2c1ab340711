use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// points per materialized circle `C_k`, at angles `j/n`
    pub per_circle: usize,
    pub limit_circle: usize,
    pub tangent_circle: usize,
    pub integer_min: i64,
    pub integer_max: i64,
}

/// Every tolerance, schedule and sample size the suite uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub grid: GridConfig,
    /// orbit lengths for the generic-measure estimate
    pub n_schedule: Vec<usize>,
    /// weak-star Cauchy tolerance for the generic-measure estimate
    pub ws_tol: f64,
    /// single-linkage threshold for the partition estimate
    pub partition_tol: f64,
    /// configured Hausdorff tolerance; the effective one is `max(2δ, this)`
    pub hausdorff_tol: f64,
    /// cloud / support resolution `δ`
    pub resolution: f64,
    /// `(δ, ε)`: points within `δ` must have estimates within `ε`
    pub modulus_pairs: Vec<(f64, f64)>,
    pub b_tol: f64,
    pub s_tol: f64,
    pub u_tol: f64,
    /// `n` values for `|A_n − A_{2n}|`
    pub u_schedule: Vec<usize>,
    /// how many trailing `u_schedule` entries must be within `u_tol`
    pub u_tail: usize,
    /// observables `f_1..=f_m` of the test family used for uniformity
    pub u_observables: usize,
    pub omega_burn: usize,
    pub omega_keep: usize,
    pub support_n: usize,
    pub support_floor: f64,
    /// probe circles `C_{m·K}` for these multipliers `m`
    pub probe_multipliers: Vec<u32>,
    pub probe_angles: usize,
    /// integer probes at `−2^j`
    pub integer_probe_exponents: Vec<u32>,
    /// forward/backward orbit lengths for the closure proxy
    pub closure_lengths: Vec<usize>,
    /// distance below which a point counts as a limit point
    pub limit_eps: f64,
    pub certificate_cap: usize,
    pub certificate_samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            grid: GridConfig {
                per_circle: 20,
                limit_circle: 40,
                tangent_circle: 40,
                integer_min: -32,
                integer_max: 32,
            },
            n_schedule: vec![1_000, 10_000, 100_000],
            ws_tol: 0.01,
            partition_tol: 0.005,
            hausdorff_tol: 0.1,
            resolution: 0.02,
            modulus_pairs: vec![(0.02, 0.05)],
            b_tol: 0.05,
            s_tol: 0.1,
            u_tol: 2e-3,
            u_schedule: (10..=16).map(|j| 1usize << j).collect(),
            u_tail: 3,
            u_observables: 5,
            omega_burn: 10_000,
            omega_keep: 10_000,
            support_n: 1_000_000,
            support_floor: 1e-5,
            probe_multipliers: (1..=8).map(|j| 1u32 << j).collect(),
            probe_angles: 8,
            integer_probe_exponents: (6..=20).collect(),
            closure_lengths: vec![10, 100, 1_000],
            limit_eps: 1e-9,
            certificate_cap: 100_000,
            certificate_samples: 200,
            seed: 42,
        }
    }
}

fn increasing(v: &[usize]) -> bool {
    !v.is_empty() && v[0] > 0 && v.windows(2).all(|w| w[0] < w[1])
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.ws_tol,
            self.partition_tol,
            self.hausdorff_tol,
            self.resolution,
            self.b_tol,
            self.s_tol,
            self.u_tol,
            self.limit_eps,
        ];
        if positive.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(LabError::InvalidParams("tolerances must be positive".into()));
        }
        if self.support_floor < 0.0 {
            return Err(LabError::InvalidParams("support floor must be nonnegative".into()));
        }
        if self.modulus_pairs.iter().any(|&(d, e)| !(d > 0.0 && e > 0.0)) {
            return Err(LabError::InvalidParams("modulus pairs must be positive".into()));
        }
        if self.n_schedule.len() < 3 || !increasing(&self.n_schedule) {
            return Err(LabError::InvalidParams(
                "n_schedule needs at least three strictly increasing entries".into(),
            ));
        }
        if !increasing(&self.u_schedule) || self.u_tail == 0 || self.u_tail > self.u_schedule.len() {
            return Err(LabError::InvalidParams("invalid uniformity schedule".into()));
        }
        if !increasing(&self.closure_lengths) {
            return Err(LabError::InvalidParams("closure lengths must increase".into()));
        }
        if self.u_observables < 5 {
            return Err(LabError::InvalidParams("uniformity needs at least five observables".into()));
        }
        let g = &self.grid;
        if g.per_circle == 0 || g.limit_circle == 0 || g.tangent_circle == 0 || g.integer_min > g.integer_max {
            return Err(LabError::InvalidParams("grid sizes must be positive".into()));
        }
        if self.omega_burn == 0 || self.omega_keep == 0 || self.support_n == 0 {
            return Err(LabError::InvalidParams("orbit lengths must be positive".into()));
        }
        if self.certificate_cap == 0 || self.certificate_samples == 0 {
            return Err(LabError::InvalidParams("certificate sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CheckConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Effective Hausdorff tolerance `max(2δ, hausdorff_tol)`.
    pub fn tol_h(&self) -> f64 {
        (2.0 * self.resolution).max(self.hausdorff_tol)
    }

    /// First 64 bits of SHA-256 over the canonical JSON form, as hex.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Longest orbit a sweep needs.
    pub fn sweep_length(&self) -> usize {
        let n_phi = *self.n_schedule.last().unwrap();
        let n_u = 2 * *self.u_schedule.last().unwrap();
        n_phi.max(n_u).max(self.omega_burn + self.omega_keep)
    }

    /// Checkpoints at which the sweep records moment vectors.
    pub fn checkpoints(&self) -> Vec<usize> {
        let mut cps: Vec<usize> = self.n_schedule.clone();
        for &n in &self.u_schedule {
            cps.push(n);
            cps.push(2 * n);
        }
        cps.sort_unstable();
        cps.dedup();
        cps
    }
}
