//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! (`harness = false`) so the lines are always visible.

use ergolab::dynamics::{circular_distance, Point, SystemSpec};
use ergolab::gallery::{self, ExampleParams, GALLERY_NAMES, GOLDEN};
use ergolab::measure::{birkhoff_average, empirical_measure, weak_star_distance, EmpiricalMeasure, Observable, TestFamily};
use ergolab::suite::{
    diagram_consistency, orbit_decomposition_check, run_suite, uniformity_certificate, CheckConfig,
    PropertyVerdict,
};
use ergolab::topology::{excess, hausdorff_distance, support_estimate, CompactSetApprox};
use ergolab::verdict::{Condition, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const GALLERY_BUDGET: Duration = Duration::from_secs(300);
const ROTATION_BUDGET: Duration = Duration::from_secs(5);
const CERTIFICATE_BUDGET: Duration = Duration::from_secs(60);
const RESIDUAL_TOL: f64 = 1e-12;
const METRIC_TOL: f64 = 1e-12;
const CONCENTRATION_MIN: f64 = 0.8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn row(v: &PropertyVerdict) -> String {
    v.verdicts.iter().map(|(c, r)| format!("{c}{}", r.status.mark())).collect::<Vec<_>>().join(" ")
}

// 1 ---------------------------------------------------------------------------

fn verdict_table(verdicts: &mut Vec<PropertyVerdict>) -> Outcome {
    let t = Instant::now();
    let cfg = CheckConfig::default();
    let params = ExampleParams::default();
    let mut bad = Vec::new();
    for name in GALLERY_NAMES {
        let sys = gallery::by_name(name, &params, None).unwrap();
        let v = run_suite(&sys, &cfg).unwrap();
        let mismatches = v.mismatches(&sys.expected());
        println!("    {name:<9} {}  ({} mismatches)", row(&v), mismatches.len());
        for (c, want, got) in &mismatches {
            bad.push(format!("{name}: {c} expected {} got {}", want.symbol(), got.symbol()));
        }
        verdicts.push(v);
    }
    let by = |n: &str| verdicts.iter().find(|v| v.system == n).unwrap();
    // ex6: the limit atom C ∪ C′ sticks out of lim C_k by about the tangent diameter
    let lsc = by("ex6").verdicts[&Condition::PUsc].evidence.get("atom_excess_over_limit").copied().unwrap_or(0.0);
    if lsc < 2.0 - cfg.tol_h() {
        bad.push(format!("ex6 lsc excess {lsc:.3} below tangent diameter"));
    }
    let zw = &by("zcomp").verdicts[&Condition::PClosed].witnesses;
    if !zw.iter().any(|w| w.starts_with("minus-infinity")) {
        bad.push("zcomp closed-atoms witness is not minus-infinity".into());
    }
    let elapsed = t.elapsed();
    if elapsed > GALLERY_BUDGET {
        bad.push(format!("runtime {elapsed:?} over budget"));
    }
    outcome(
        bad.is_empty(),
        format!("8 systems, ex6 lsc excess {lsc:.3}, {:.1}s{}", elapsed.as_secs_f64(), fail_list(&bad)),
    )
}

fn fail_list(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(" — {}", bad.join("; "))
    }
}

// 2 ---------------------------------------------------------------------------

/// The diagram as plain boolean formulas, written independently of the
/// library's rule table.
fn rule_truths(t: &BTreeMap<Condition, bool>) -> [bool; 13] {
    use Condition::*;
    let g = |c: Condition| t[&c];
    let (i, ii, iii, iv) = (g(I), g(II), g(III), g(IV));
    let (pc, pu, five, six, b, s, u) = (g(PClosed), g(PUsc), g(V), g(VI), g(B), g(S), g(U));
    [
        iv == (i && ii),
        iii == (i && pc),
        five == (iii && pc && pu),
        six == (five && ii),
        six == (iv && pc && pu),
        six == (iv && b && s),
        u == five,
        !five || b,
        !six || iv,
        !iv || ii,
        !iv || iii,
        !five || iii,
        !iii || i,
    ]
}

/// A rule is violated when it is false under every way of resolving the
/// inconclusive entries; enumerate them all.
fn truth_table_violations(v: &BTreeMap<Condition, Status>) -> usize {
    let unknown: Vec<Condition> =
        Condition::ALL.iter().copied().filter(|c| v[c] == Status::Inconclusive).collect();
    let mut always_false = [true; 13];
    for mask in 0..(1u32 << unknown.len()) {
        let mut t: BTreeMap<Condition, bool> = v.iter().map(|(c, s)| (*c, *s == Status::Holds)).collect();
        for (j, c) in unknown.iter().enumerate() {
            t.insert(*c, mask >> j & 1 == 1);
        }
        for (slot, ok) in always_false.iter_mut().zip(rule_truths(&t)) {
            *slot &= !ok;
        }
    }
    always_false.iter().filter(|f| **f).count()
}

fn diagram(verdicts: &[PropertyVerdict]) -> Outcome {
    let gallery_violations: usize = verdicts.iter().map(|v| v.diagram.violations.len()).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let states = [Status::Holds, Status::Fails, Status::Inconclusive];
    let mut disagreements = 0;
    let mut consistent_rows = 0;
    for _ in 0..10_000 {
        // bias towards definite entries so that constraints actually bind
        let assign: BTreeMap<Condition, Status> = Condition::ALL
            .iter()
            .map(|c| (*c, states[if rng.gen_bool(0.9) { rng.gen_range(0..2) } else { 2 }]))
            .collect();
        let lib = diagram_consistency(&assign);
        let oracle = truth_table_violations(&assign);
        if lib.violations.len() != oracle || lib.consistent != (oracle == 0) {
            disagreements += 1;
        }
        consistent_rows += lib.consistent as usize;
    }
    outcome(
        gallery_violations == 0 && disagreements == 0,
        format!(
            "gallery violations {gallery_violations}; 10^4 random rows: {disagreements} disagreements \
             ({consistent_rows} consistent)"
        ),
    )
}

// 3 ---------------------------------------------------------------------------

fn decomposition() -> Outcome {
    let params = ExampleParams::default();
    let systems: Vec<SystemSpec> =
        GALLERY_NAMES.iter().map(|n| gallery::by_name(n, &params, None).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fam = TestFamily::standard();
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let sys = &systems[rng.gen_range(0..systems.len())];
        let ids: Vec<_> = sys.component_ids().collect();
        let c = ids[rng.gen_range(0..ids.len())];
        let x = format!("{c}")
            .parse::<Point>()
            .or_else(|_| format!("{c}@{}", rng.gen_range(-1000..1000)).parse())
            .unwrap_or_else(|_| Point::on(c, rng.gen()));
        let n = rng.gen_range(1..=100_000usize);
        let mut portions = Vec::new();
        let mut left = n;
        while left > 0 && rng.gen_bool(0.8) {
            let l = rng.gen_range(0..=left);
            portions.push(l);
            left -= l;
        }
        let f = if rng.gen_bool(0.5) { Observable::first_coordinate() } else { fam.observables[rng.gen_range(0..fam.len())] };
        worst = worst.max(orbit_decomposition_check(sys, &f, &x, &portions, n).unwrap());
    }
    outcome(worst <= RESIDUAL_TOL, format!("max residual {worst:.2e} over 10^3 cases (tol {RESIDUAL_TOL:e})"))
}

// 4 ---------------------------------------------------------------------------

fn rotation_bound() -> Outcome {
    let t = Instant::now();
    let sys = gallery::make_rotation_baseline(GOLDEN).unwrap();
    let f = Observable::first_coordinate();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let x = Point::limit(rng.gen());
        for n in [100usize, 1_000, 10_000] {
            let a = birkhoff_average(&sys, &f, &x, n).unwrap();
            worst_ratio = worst_ratio.max(a.abs() / (2.0 / (n as f64 * (PI * GOLDEN).sin())));
        }
    }
    let elapsed = t.elapsed();
    outcome(
        worst_ratio <= 1.0 && elapsed < ROTATION_BUDGET,
        format!("max |A_n|·n·sin(πα)/2 = {worst_ratio:.3}, {:.2}s", elapsed.as_secs_f64()),
    )
}

// 5 ---------------------------------------------------------------------------

fn certificates() -> Outcome {
    let cfg = CheckConfig::default();
    let params = ExampleParams::default();
    let t = Instant::now();
    let ex5 = uniformity_certificate(&gallery::make_example5(&params).unwrap(), 0.05, &cfg).unwrap();
    let t5 = t.elapsed();
    let t = Instant::now();
    let ex1 = uniformity_certificate(&gallery::make_example1(&params).unwrap(), 0.05, &cfg).unwrap();
    let t1 = t.elapsed();
    let samples = ex5.validation.as_ref().map_or(0, |v| v.samples);
    let pass = ex5.valid
        && ex5.bound.is_some_and(f64::is_finite)
        && samples >= 200
        && !ex1.valid
        && ex1.failure.is_some()
        && t5 < CERTIFICATE_BUDGET
        && t1 < CERTIFICATE_BUDGET;
    outcome(
        pass,
        format!(
            "ex5 valid={} M={:?} samples={samples} ({:.1}s); ex1 valid={} failure={:?} ({:.1}s)",
            ex5.valid,
            ex5.bound,
            t5.as_secs_f64(),
            ex1.valid,
            ex1.failure.as_deref().unwrap_or("none"),
            t1.as_secs_f64()
        ),
    )
}

// 6 ---------------------------------------------------------------------------

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sys = gallery::make_example1(&ExampleParams::default()).unwrap();
    let fam = TestFamily::standard();
    let cloud = |rng: &mut ChaCha8Rng| {
        let m = rng.gen_range(1..40);
        let pts = (0..m).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        CompactSetApprox::new(pts, 0.01).unwrap()
    };
    let measure = |rng: &mut ChaCha8Rng| {
        let m = rng.gen_range(1..20);
        let raw: Vec<(Point, f64)> = (0..m)
            .map(|_| {
                let p = if rng.gen_bool(0.2) { Point::limit(rng.gen()) } else { Point::circle(rng.gen_range(1..=64), rng.gen()) };
                (p, rng.gen_range(0.01..1.0))
            })
            .collect();
        let total: f64 = raw.iter().map(|r| r.1).sum();
        EmpiricalMeasure::new(&sys, raw.into_iter().map(|(p, w)| (p, w / total)).collect()).unwrap()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let (a, b, c) = (cloud(&mut rng), cloud(&mut rng), cloud(&mut rng));
        let h = |x: &CompactSetApprox, y: &CompactSetApprox| hausdorff_distance(x, y).unwrap();
        worst = worst.max((h(&a, &b) - h(&b, &a)).abs());
        worst = worst.max(h(&a, &c) - h(&a, &b) - h(&b, &c));
        worst = worst.max(h(&a, &a));
        let (p, q, r) = (measure(&mut rng), measure(&mut rng), measure(&mut rng));
        let w = |x: &EmpiricalMeasure, y: &EmpiricalMeasure| weak_star_distance(x, y, &fam).unwrap();
        worst = worst.max((w(&p, &q) - w(&q, &p)).abs());
        worst = worst.max(w(&p, &r) - w(&p, &q) - w(&q, &r));
        worst = worst.max(w(&p, &p));
    }
    outcome(worst <= METRIC_TOL, format!("max violation {worst:.2e} over 10^3 triples each (tol {METRIC_TOL:e})"))
}

// 7 ---------------------------------------------------------------------------

fn concentration() -> Outcome {
    let p = ExampleParams::default();
    let sys = gallery::make_example2(&p).unwrap();
    let mut masses = Vec::new();
    for k in [2u32, 4, 8, 16, 32] {
        let mu = empirical_measure(&sys, &Point::circle(k, 0.5), 1_000_000).unwrap();
        let w = p.width(k);
        masses.push((k, mu.mass_where(|q| circular_distance(q.angle().unwrap(), 0.0) <= w / 2.0)));
    }
    let rising = masses.windows(2).all(|m| m[1].1 >= m[0].1);
    let last = masses.last().unwrap().1;
    let text: Vec<String> = masses.iter().map(|(k, m)| format!("k={k}: {m:.4}")).collect();
    outcome(last >= CONCENTRATION_MIN && rising, format!("μ̂_k(I_k) at n=10^6: {}", text.join(", ")))
}

// 8 ---------------------------------------------------------------------------

fn support_lsc() -> Outcome {
    let cfg = CheckConfig::default();
    let p = ExampleParams::default();
    let sys = gallery::make_example2(&p).unwrap();
    let delta = cfg.resolution;
    let c = Point::limit(0.0);
    let supp_c = support_estimate(&EmpiricalMeasure::dirac(&sys, &c).unwrap(), 0.5, delta).unwrap();
    let mut line = Vec::new();
    let mut last = f64::INFINITY;
    for k in [16u32, 32, p.k] {
        let mu = EmpiricalMeasure::binned_orbit(&sys, &Point::circle(k, 0.5), cfg.support_n, delta / 4.0).unwrap();
        let supp = support_estimate(&mu, cfg.support_floor.min(mu.max_weight()), delta).unwrap();
        last = excess(&supp_c, &supp).unwrap();
        line.push(format!("k={k}: {last:.4}"));
    }
    outcome(last <= 2.0 * delta, format!("excess(supp δ_c, supp μ̂_k): {} (tol 2δ = {})", line.join(", "), 2.0 * delta))
}

fn main() {
    let total = Instant::now();
    let mut verdicts = Vec::new();
    let mut failures = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        println!("{} criterion {n} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += (!o.pass) as usize;
    };
    println!("acceptance suite");
    report(1, "verdict table", verdict_table(&mut verdicts));
    report(2, "diagram consistency", diagram(&verdicts));
    report(3, "orbit decomposition", decomposition());
    report(4, "rotation equidistribution", rotation_bound());
    report(5, "uniformity certificate", certificates());
    report(6, "metric axioms", metric_axioms());
    report(7, "example-2 concentration", concentration());
    report(8, "support lsc proxy", support_lsc());
    println!("{} of 8 criteria passed in {:.1}s", 8 - failures, total.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
