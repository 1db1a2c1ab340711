//! Uniformity certificates: a finite cover with per-point convergence times,
//! the bound `M = 2·max n_i/ε`, and a randomized validation beyond `M`.

use super::config::CheckConfig;
use super::sweep::build_grid;
use crate::dynamics::{ComponentId, Point, SystemSpec};
use crate::error::{LabError, Result};
use crate::measure::Observable;
use crate::summation::CompensatedSum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest admissible bound; beyond it validation would not fit the budget.
pub const MAX_BOUND: f64 = 1e7;
/// Deep validation circles are `C_{K·2^j}` for `j` in this range.
const DEEP_EXPONENTS: std::ops::RangeInclusive<u32> = 1..=8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverEntry {
    pub point: Point,
    /// `∫f dΦ̂(x_i)`, estimated as `A_cap`
    pub target: f64,
    /// first `n` from which `A_n` stays within `ε/2` of the target up to
    /// the cap; `None` if that only happens in the last half of the run
    pub n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationSample {
    pub point: Point,
    pub n: usize,
    pub average: f64,
    pub target: f64,
    pub error: f64,
    /// the target itself converged to within `ε/4`
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_error: f64,
    pub unresolved: usize,
    pub passed: bool,
    /// the worst sample
    pub worst: Option<ValidationSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityCertificate {
    pub system: String,
    pub epsilon: f64,
    pub observable: String,
    pub cap: usize,
    pub seed: u64,
    pub cover_size: usize,
    /// `max n_i`, when every cover point converged
    pub max_n: Option<usize>,
    /// `M = 2·max n_i / ε`
    pub bound: Option<f64>,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub validation: Option<ValidationReport>,
    /// cover points whose convergence time is the maximum or missing
    pub slowest: Vec<CoverEntry>,
}

/// Running averages `A_m` at the requested lengths, in one orbit pass.
fn averages_at(system: &SystemSpec, f: &Observable, x: &Point, lengths: &[usize]) -> Result<Vec<f64>> {
    let n = lengths.iter().copied().max().unwrap_or(0);
    let mut walker = system.walker(x)?;
    let mut acc = CompensatedSum::new();
    let mut out = vec![f64::NAN; lengths.len()];
    for m in 1..=n {
        acc.add(f.eval(walker.position()));
        walker.advance();
        for (o, &l) in out.iter_mut().zip(lengths) {
            if l == m {
                *o = acc.value() / m as f64;
            }
        }
    }
    Ok(out)
}

/// Last time `A_m` is outside `ε/2` of `A_cap`, plus one.
fn convergence_time(system: &SystemSpec, f: &Observable, x: &Point, eps: f64, cap: usize) -> Result<CoverEntry> {
    let mut walker = system.walker(x)?;
    let mut acc = CompensatedSum::new();
    let mut avgs = Vec::with_capacity(cap);
    for m in 1..=cap {
        acc.add(f.eval(walker.position()));
        walker.advance();
        avgs.push(acc.value() / m as f64);
    }
    let target = avgs[cap - 1];
    let last_out = avgs.iter().rposition(|a| (a - target).abs() >= eps / 2.0);
    let n = last_out.map_or(1, |i| i + 2);
    Ok(CoverEntry { point: *x, target, n: (n <= cap / 2).then_some(n) })
}

/// Fresh validation points: materialized circles, circles far beyond them,
/// and every other declared component, chosen with equal group weight.
fn sample_point(system: &SystemSpec, rng: &mut ChaCha8Rng) -> Point {
    let circles = system.circles();
    let kmax = circles.last().copied().unwrap_or(1);
    let mut groups: Vec<u8> = Vec::new();
    if !circles.is_empty() {
        groups.push(0);
    }
    if system.family.is_some() {
        groups.push(1);
    }
    let others: Vec<ComponentId> =
        system.component_ids().filter(|c| !matches!(c, ComponentId::Circle(_))).collect();
    if !others.is_empty() {
        groups.push(2);
    }
    let t: f64 = rng.gen();
    match groups[rng.gen_range(0..groups.len())] {
        0 => Point::circle(circles[rng.gen_range(0..circles.len())], t),
        1 => Point::circle(kmax.saturating_mul(1 << rng.gen_range(DEEP_EXPONENTS)), t),
        _ => match others[rng.gen_range(0..others.len())] {
            ComponentId::IntegerLine => Point::integer(rng.gen_range(-1_000_000..=1_000_000)),
            ComponentId::PlusInfinity => Point::plus_infinity(),
            ComponentId::MinusInfinity => Point::minus_infinity(),
            c => Point::on(c, t),
        },
    }
}

pub fn uniformity_certificate(system: &SystemSpec, eps: f64, cfg: &CheckConfig) -> Result<UniformityCertificate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LabError::Argument(format!("ε must be positive, got {eps}")));
    }
    let f = Observable::first_coordinate();
    let cap = cfg.certificate_cap;
    let cover: Vec<CoverEntry> = build_grid(system, cfg)
        .into_par_iter()
        .map(|x| convergence_time(system, &f, &x, eps, cap))
        .collect::<Result<_>>()?;
    let mut cert = UniformityCertificate {
        system: system.name.clone(),
        epsilon: eps,
        observable: "first-coordinate".into(),
        cap,
        seed: cfg.seed,
        cover_size: cover.len(),
        max_n: None,
        bound: None,
        valid: false,
        failure: None,
        validation: None,
        slowest: Vec::new(),
    };
    let unconverged: Vec<&CoverEntry> = cover.iter().filter(|c| c.n.is_none()).collect();
    if !unconverged.is_empty() {
        cert.failure = Some(format!(
            "{} cover points did not settle within ε/2 by n = {}",
            unconverged.len(),
            cap / 2
        ));
        cert.slowest = unconverged.into_iter().take(8).cloned().collect();
        return Ok(cert);
    }
    let max_n = cover.iter().filter_map(|c| c.n).max().unwrap();
    let bound = 2.0 * max_n as f64 / eps;
    cert.max_n = Some(max_n);
    cert.bound = Some(bound);
    cert.slowest = cover.iter().filter(|c| c.n == Some(max_n)).take(8).cloned().collect();
    if bound > MAX_BOUND {
        cert.failure = Some(format!("bound M = {bound:.3e} exceeds {MAX_BOUND:.0e}"));
        return Ok(cert);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lo = bound.floor() as usize + 1;
    let hi = (2.0 * bound).floor() as usize;
    let n_target = cap.max(2 * hi.max(lo));
    let plan: Vec<(Point, usize)> =
        (0..cfg.certificate_samples).map(|_| (sample_point(system, &mut rng), rng.gen_range(lo..=hi.max(lo)))).collect();
    let samples: Vec<ValidationSample> = plan
        .into_par_iter()
        .map(|(x, n)| {
            let a = averages_at(system, &f, &x, &[n, n_target / 2, n_target])?;
            let target = a[2];
            Ok(ValidationSample {
                point: x,
                n,
                average: a[0],
                target,
                error: (a[0] - target).abs(),
                resolved: (a[1] - target).abs() <= eps / 4.0,
            })
        })
        .collect::<Result<_>>()?;
    let unresolved = samples.iter().filter(|s| !s.resolved).count();
    let worst = samples.iter().max_by(|a, b| a.error.total_cmp(&b.error)).cloned();
    let max_error = worst.as_ref().map_or(0.0, |w| w.error);
    let passed = unresolved == 0 && max_error < eps;
    if !passed {
        cert.failure = Some(if max_error >= eps {
            format!("validation error {max_error:.3e} ≥ ε beyond M")
        } else {
            format!("{unresolved} validation targets did not converge")
        });
    }
    cert.valid = passed;
    cert.validation = Some(ValidationReport { samples: samples.len(), max_error, unresolved, passed, worst });
    Ok(cert)
}

fn scaled_sum(values: &[f64], w: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(w * v);
    }
    acc.value()
}

/// `|A_n(x) − Σ (l_i/n)·A_{l_i}(T^{s_i}x) − (m/n)·A_m(T^s x)|` where the
/// orbit is cut into consecutive portions of the given lengths and a tail
/// of length `m = n − Σ l_i`.
pub fn orbit_decomposition_check(
    system: &SystemSpec,
    f: &Observable,
    x: &Point,
    portions: &[usize],
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Argument("orbit length must be at least 1".into()));
    }
    let used: usize = portions.iter().sum();
    if used > n {
        return Err(LabError::Argument(format!("portions cover {used} > n = {n} steps")));
    }
    let mut walker = system.walker(x)?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f.eval(walker.position()));
        walker.advance();
    }
    let nf = n as f64;
    let lhs = scaled_sum(&values, 1.0 / nf);
    let mut rhs = CompensatedSum::new();
    let mut start = 0;
    for &l in portions.iter().chain(std::iter::once(&(n - used))) {
        if l > 0 {
            let avg = scaled_sum(&values[start..start + l], 1.0 / l as f64);
            rhs.add(l as f64 / nf * avg);
        }
        start += l;
    }
    Ok((lhs - rhs.value()).abs())
}
