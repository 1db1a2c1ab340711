//! Empirical measures, Birkhoff averages and a weak-star metric built from a
//! fixed family of polynomial test functions.

use crate::dynamics::{Point, SystemSpec};
use crate::error::{LabError, Result};
use crate::summation::{BlockedVectorSum, CompensatedSum};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;

/// Half-widths of the ambient box every embedded point lives in
/// (`[−1.5, 3.5] × [−2.5, 1.5]`, so `|x| ≤ 3.5`, `|y| ≤ 2.5`).
pub const BOX_X: f64 = 3.5;
pub const BOX_Y: f64 = 2.5;

/// Maximal total degree of the default test family.
pub const MAX_DEGREE: u32 = 8;

/// Monomial observable `(x/sx)^a · (y/sy)^b` on the ambient plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub a: u32,
    pub b: u32,
    pub sx: f64,
    pub sy: f64,
}

impl Observable {
    pub fn monomial(a: u32, b: u32) -> Self {
        Observable { a, b, sx: BOX_X, sy: BOX_Y }
    }

    /// The raw first ambient coordinate.
    pub fn first_coordinate() -> Self {
        Observable { a: 1, b: 0, sx: 1.0, sy: 1.0 }
    }

    /// The raw second ambient coordinate.
    pub fn second_coordinate() -> Self {
        Observable { a: 0, b: 1, sx: 1.0, sy: 1.0 }
    }

    #[inline]
    pub fn eval(&self, pos: [f64; 2]) -> f64 {
        (pos[0] / self.sx).powi(self.a as i32) * (pos[1] / self.sy).powi(self.b as i32)
    }
}

/// Ordered test functions `f_j` with weights `2^{−j}`; `f_0 ≡ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub observables: Vec<Observable>,
}

impl Default for TestFamily {
    fn default() -> Self {
        Self::standard()
    }
}

impl TestFamily {
    /// Monomials of total degree ≤ 8 in graded order
    /// (`1, x, y, x², xy, y², …`), scaled to the ambient box.
    pub fn standard() -> Self {
        Self::graded(MAX_DEGREE)
    }

    pub fn graded(max_degree: u32) -> Self {
        let mut observables = Vec::new();
        for d in 0..=max_degree {
            for b in 0..=d {
                observables.push(Observable::monomial(d - b, b));
            }
        }
        TestFamily { observables }
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        0.5f64.powi(j as i32)
    }

    /// Evaluates every observable at `pos` into `out`.
    #[inline]
    pub fn eval_into(&self, pos: [f64; 2], out: &mut [f64]) {
        if self.is_box_scaled() {
            self.eval_box_scaled(pos, out);
        } else {
            for (o, f) in out.iter_mut().zip(&self.observables) {
                *o = f.eval(pos);
            }
        }
    }

    /// All members are box-scaled monomials of degree ≤ 8.
    pub fn is_box_scaled(&self) -> bool {
        self.observables
            .iter()
            .all(|f| f.sx == BOX_X && f.sy == BOX_Y && f.a <= MAX_DEGREE && f.b <= MAX_DEGREE)
    }

    /// Fast path for box-scaled monomials: shared power tables.
    #[inline]
    pub(crate) fn eval_box_scaled(&self, pos: [f64; 2], out: &mut [f64]) {
        let mut px = [1.0f64; (MAX_DEGREE + 1) as usize];
        let mut py = [1.0f64; (MAX_DEGREE + 1) as usize];
        let (u, v) = (pos[0] / BOX_X, pos[1] / BOX_Y);
        for i in 1..px.len() {
            px[i] = px[i - 1] * u;
            py[i] = py[i - 1] * v;
        }
        for (o, f) in out.iter_mut().zip(&self.observables) {
            *o = px[f.a as usize] * py[f.b as usize];
        }
    }

    /// `Σ_j 2^{−j}·|a_j − b_j|` for two moment vectors.
    pub fn signature_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        for (j, (x, y)) in a.iter().zip(b).enumerate() {
            acc.add(self.weight(j) * (x - y).abs());
        }
        acc.value()
    }

    /// Largest possible distance, `Σ_j 2^{−j+1}`.
    pub fn diameter_bound(&self) -> f64 {
        (0..self.len()).map(|j| 2.0 * self.weight(j)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub point: Point,
    pub pos: [f64; 2],
    pub weight: f64,
}

/// Finite weighted sample standing in for an invariant measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub system: String,
    pub samples: Vec<WeightedPoint>,
}

const MASS_TOL: f64 = 1e-12;

impl EmpiricalMeasure {
    pub fn new(system: &SystemSpec, samples: Vec<(Point, f64)>) -> Result<Self> {
        let mut out = Vec::with_capacity(samples.len());
        for (p, w) in samples {
            out.push(WeightedPoint { pos: system.embed(&p)?, point: p, weight: w });
        }
        Self::from_weighted(system.name.clone(), out)
    }

    fn from_weighted(system: String, samples: Vec<WeightedPoint>) -> Result<Self> {
        if samples.is_empty() {
            return Err(LabError::Argument("empirical measure needs at least one sample".into()));
        }
        if samples.iter().any(|s| !(s.weight >= 0.0)) {
            return Err(LabError::Argument("negative or NaN weight".into()));
        }
        let total: f64 = samples.iter().map(|s| s.weight).collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(LabError::Argument(format!("weights sum to {total}, not 1")));
        }
        Ok(EmpiricalMeasure { system, samples })
    }

    pub fn dirac(system: &SystemSpec, p: &Point) -> Result<Self> {
        Self::new(system, vec![(*p, 1.0)])
    }

    /// Uniform weights `1/n` on `x, Tx, …, T^{n−1}x`.
    pub fn from_orbit(system: &SystemSpec, x: &Point, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Argument("orbit length must be at least 1".into()));
        }
        let w = 1.0 / n as f64;
        let mut walker = system.walker(x)?;
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            samples.push(WeightedPoint { point: walker.current(), pos: walker.position(), weight: w });
            walker.advance();
        }
        Self::from_weighted(system.name.clone(), samples)
    }

    /// Orbit measure with samples merged into square cells of side `cell`;
    /// each cell is represented by the first orbit point that entered it.
    pub fn binned_orbit(system: &SystemSpec, x: &Point, n: usize, cell: f64) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Argument("orbit length must be at least 1".into()));
        }
        if !(cell > 0.0) {
            return Err(LabError::Argument("cell size must be positive".into()));
        }
        let mut walker = system.walker(x)?;
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut cells: Vec<(Point, [f64; 2], u64)> = Vec::new();
        for _ in 0..n {
            let pos = walker.position();
            let key = ((pos[0] / cell).floor() as i64, (pos[1] / cell).floor() as i64);
            match index.get(&key) {
                Some(&i) => cells[i].2 += 1,
                None => {
                    index.insert(key, cells.len());
                    cells.push((walker.current(), pos, 1));
                }
            }
            walker.advance();
        }
        let samples = cells
            .into_iter()
            .map(|(point, pos, c)| WeightedPoint { point, pos, weight: c as f64 / n as f64 })
            .collect();
        Self::from_weighted(system.name.clone(), samples)
    }

    /// Uniform measure on `m` equally spaced points of an angle-coordinated
    /// component (arc-length quadrature).
    pub fn uniform_on(system: &SystemSpec, component: crate::dynamics::ComponentId, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(LabError::Argument("quadrature needs at least one node".into()));
        }
        let w = 1.0 / m as f64;
        let samples = (0..m).map(|i| (Point::on(component, i as f64 / m as f64), w)).collect();
        Self::new(system, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).fold(0.0, f64::max)
    }

    /// Mass of the samples satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&Point) -> bool) -> f64 {
        self.samples
            .iter()
            .filter(|s| pred(&s.point))
            .map(|s| s.weight)
            .collect::<CompensatedSum>()
            .value()
    }

    /// `∫ f_j dμ` for every member of the family.
    pub fn signature(&self, family: &TestFamily) -> Vec<f64> {
        let mut acc = vec![CompensatedSum::new(); family.len()];
        let mut vals = vec![0.0; family.len()];
        for s in &self.samples {
            family.eval_into(s.pos, &mut vals);
            for (a, v) in acc.iter_mut().zip(&vals) {
                a.add(s.weight * v);
            }
        }
        acc.iter().map(CompensatedSum::value).collect()
    }
}

/// `Σ w_i·f(embed(p_i))`.
pub fn integrate(mu: &EmpiricalMeasure, f: &Observable) -> f64 {
    let mut acc = CompensatedSum::new();
    for s in &mu.samples {
        acc.add(s.weight * f.eval(s.pos));
    }
    acc.value()
}

/// `A_n^f(x) = (1/n)·Σ_{i<n} f(T^i x)`, accumulated in the same order and
/// with the same per-term weights as [`integrate`] over the orbit measure.
pub fn birkhoff_average(system: &SystemSpec, f: &Observable, x: &Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Argument("averaging length must be at least 1".into()));
    }
    let w = 1.0 / n as f64;
    let mut walker = system.walker(x)?;
    let mut acc = CompensatedSum::new();
    for _ in 0..n {
        acc.add(w * f.eval(walker.position()));
        walker.advance();
    }
    Ok(acc.value())
}

pub fn empirical_measure(system: &SystemSpec, x: &Point, n: usize) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::from_orbit(system, x, n)
}

pub fn weak_star_distance(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, family: &TestFamily) -> Result<f64> {
    if mu.system != nu.system {
        return Err(LabError::Argument(format!(
            "measures live on different systems ({} vs {})",
            mu.system, nu.system
        )));
    }
    Ok(family.signature_distance(&mu.signature(family), &nu.signature(family)))
}

/// Moment vectors of the orbit measures at a sorted list of checkpoints,
/// from one pass along the orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTrace {
    pub checkpoints: Vec<usize>,
    pub signatures: Vec<Vec<f64>>,
}

impl MomentTrace {
    pub fn at(&self, n: usize) -> Option<&[f64]> {
        self.checkpoints.iter().position(|&c| c == n).map(|i| self.signatures[i].as_slice())
    }
}

/// Block length of the moment accumulators.
const BLOCK: usize = 256;

/// Runs the orbit of `x` up to the largest checkpoint, recording the moment
/// vector `(1/n)·Σ_{i<n} f_j(T^i x)` at every checkpoint `n`. The optional
/// `visit` callback sees `(i, position)` for every orbit index.
pub fn moment_trace(
    system: &SystemSpec,
    x: &Point,
    checkpoints: &[usize],
    family: &TestFamily,
    mut visit: impl FnMut(usize, [f64; 2]),
) -> Result<MomentTrace> {
    let mut cps: Vec<usize> = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    if cps.first() == Some(&0) || cps.is_empty() {
        return Err(LabError::Argument("checkpoints must be nonempty and positive".into()));
    }
    let mut walker = system.walker(x)?;
    let mut sums = BlockedVectorSum::new(family.len(), BLOCK);
    let mut vals = vec![0.0; family.len()];
    let mut signatures = Vec::with_capacity(cps.len());
    let mut next = 0;
    let last = *cps.last().unwrap();
    let fast = family.is_box_scaled();
    for i in 0..last {
        let pos = walker.position();
        visit(i, pos);
        if fast {
            family.eval_box_scaled(pos, &mut vals);
        } else {
            family.eval_into(pos, &mut vals);
        }
        sums.add(&vals);
        walker.advance();
        if i + 1 == cps[next] {
            let n = cps[next] as f64;
            signatures.push(sums.totals().into_iter().map(|s| s / n).collect());
            next += 1;
        }
    }
    Ok(MomentTrace { checkpoints: cps, signatures })
}

/// Estimate of `Φ(x)` along an increasing schedule.
#[derive(Clone, Debug)]
pub struct PhiHat {
    /// orbit measure at the largest schedule entry
    pub measure: EmpiricalMeasure,
    /// `d(μ_{n_i}, μ_{n_{i+1}})` for consecutive schedule entries
    pub deltas: Vec<f64>,
    /// the last consecutive pair is within tolerance
    pub converged: bool,
}

pub fn validate_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.len() < 3 {
        return Err(LabError::Argument("schedule needs at least three entries".into()));
    }
    if schedule[0] == 0 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Argument("schedule must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Cauchy test over consecutive schedule distances. Early pairs are
/// reported but only the last one decides: slowly mixing points may not
/// have settled at the first entries and should not be judged there.
pub fn cauchy_converged(deltas: &[f64], tol: f64) -> bool {
    deltas.last().is_some_and(|&d| d <= tol)
}

pub fn phi_hat(
    system: &SystemSpec,
    x: &Point,
    schedule: &[usize],
    tol: f64,
    family: &TestFamily,
) -> Result<PhiHat> {
    validate_schedule(schedule)?;
    let trace = moment_trace(system, x, schedule, family, |_, _| {})?;
    let deltas: Vec<f64> = trace
        .signatures
        .windows(2)
        .map(|w| family.signature_distance(&w[0], &w[1]))
        .collect();
    let measure = EmpiricalMeasure::from_orbit(system, x, *schedule.last().unwrap())?;
    Ok(PhiHat { measure, converged: cauchy_converged(&deltas, tol), deltas })
}

/// `f̃(x) ≈ A_n^f(x)` on a grid, flagged converged when `|A_n − A_{2n}| ≤ tol`.
pub fn limit_function_estimate(
    system: &SystemSpec,
    f: &Observable,
    grid: &[Point],
    n: usize,
    tol: f64,
) -> Result<Vec<(f64, bool)>> {
    if grid.is_empty() {
        return Err(LabError::Argument("grid is empty".into()));
    }
    grid.iter()
        .map(|x| {
            let a = birkhoff_average(system, f, x, n)?;
            let a2 = birkhoff_average(system, f, x, 2 * n)?;
            Ok((a, (a - a2).abs() <= tol))
        })
        .collect()
}

/// Measures labeled by partition atom.
#[derive(Clone, Debug, Default)]
pub struct ErgodicFamily {
    pub entries: Vec<ErgodicEntry>,
}

#[derive(Clone, Debug)]
pub struct ErgodicEntry {
    pub label: String,
    pub representative: Point,
    /// exact moment vector of the orbit measure
    pub signature: Vec<f64>,
    /// binned orbit measure, for support estimation
    pub measure: EmpiricalMeasure,
}

impl ErgodicFamily {
    pub fn push(&mut self, entry: ErgodicEntry) -> Result<()> {
        if self.entries.iter().any(|e| e.label == entry.label) {
            return Err(LabError::Argument(format!("duplicate ergodic label `{}`", entry.label)));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&ErgodicEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// One row of a convergence curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub average: f64,
    pub delta_to_2n: f64,
}

/// `A_n^f(x)` and `|A_n − A_{2n}|` for `n = 1..=n_max`.
pub fn convergence_curve(system: &SystemSpec, f: &Observable, x: &Point, n_max: usize) -> Result<Vec<CurveRow>> {
    if n_max == 0 {
        return Err(LabError::Argument("curve length must be at least 1".into()));
    }
    let mut walker = system.walker(x)?;
    let mut acc = CompensatedSum::new();
    let mut avgs = Vec::with_capacity(2 * n_max);
    for i in 0..2 * n_max {
        acc.add(f.eval(walker.position()));
        walker.advance();
        avgs.push(acc.value() / (i + 1) as f64);
    }
    Ok((1..=n_max)
        .map(|n| CurveRow {
            n,
            average: avgs[n - 1],
            delta_to_2n: (avgs[n - 1] - avgs[2 * n - 1]).abs(),
        })
        .collect())
}

pub const CURVE_HEADER: &str = "system,point-id,f-index,n,A_n,delta-to-2n";

pub fn write_curve_csv<W: Write>(
    out: &mut W,
    system: &str,
    point_id: &str,
    f_index: usize,
    rows: &[CurveRow],
    header: bool,
) -> Result<()> {
    if header {
        writeln!(out, "{CURVE_HEADER}")?;
    }
    for r in rows {
        writeln!(out, "{system},{point_id},{f_index},{},{:e},{:e}", r.n, r.average, r.delta_to_2n)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn family_shape() {
        let fam = TestFamily::standard();
        assert_eq!(fam.len(), 45);
        assert_eq!((fam.observables[0].a, fam.observables[0].b), (0, 0));
        assert_eq!((fam.observables[1].a, fam.observables[1].b), (1, 0));
        assert_eq!((fam.observables[2].a, fam.observables[2].b), (0, 1));
    }

    #[test]
    fn eval_into_matches_eval() {
        let fam = TestFamily::standard();
        let mut out = vec![0.0; fam.len()];
        let pos = [2.9, -1.7];
        fam.eval_into(pos, &mut out);
        for (o, f) in out.iter().zip(&fam.observables) {
            assert!((o - f.eval(pos)).abs() < 1e-15);
            assert!(o.abs() <= 1.0);
        }
    }

    #[test]
    fn integrate_equals_birkhoff_bitwise() {
        let sys = gallery::make_rotation_baseline(gallery::GOLDEN).unwrap();
        let x = Point::limit(0.123);
        let f = Observable::monomial(3, 2);
        let mu = empirical_measure(&sys, &x, 777).unwrap();
        assert_eq!(integrate(&mu, &f).to_bits(), birkhoff_average(&sys, &f, &x, 777).unwrap().to_bits());
    }

    #[test]
    fn zero_length_is_argument_error() {
        let sys = gallery::make_rotation_baseline(0.5).unwrap();
        assert!(matches!(
            birkhoff_average(&sys, &Observable::monomial(1, 0), &Point::limit(0.0), 0),
            Err(LabError::Argument(_))
        ));
    }
}
