//! Frozen reference values, each computed independently of the library.

use approx::assert_abs_diff_eq;
use ergolab::dynamics::{circular_distance, Point};
use ergolab::gallery::{self, ExampleParams, GOLDEN};
use ergolab::measure::{birkhoff_average, empirical_measure, Observable};
use std::f64::consts::PI;

/// Direct summation of the tanh-embedded orbit 0, 1, 2, … (scale 5).
#[test]
fn zcomp_average_matches_direct_sum() {
    let oracle: f64 = (0..1000).map(|n| (n as f64 / 5.0).tanh()).sum::<f64>() / 1000.0;
    assert_abs_diff_eq!(oracle, 0.996_017_575_036, epsilon = 1e-12);
    let sys = gallery::make_z_compactification();
    let a = birkhoff_average(&sys, &Observable::first_coordinate(), &Point::integer(0), 1000).unwrap();
    assert_abs_diff_eq!(a, oracle, epsilon = 1e-12);
}

/// `|Σ_{j<n} e^{2πi(θ+jα)}| = |sin(πnα)/sin(πα)|`.
#[test]
fn golden_rotation_geometric_sum() {
    let sys = gallery::make_rotation_baseline(GOLDEN).unwrap();
    let f = Observable::first_coordinate();
    for &n in &[100usize, 1_000, 10_000] {
        let exact = (PI * n as f64 * GOLDEN).sin() / (PI * GOLDEN).sin();
        let a = birkhoff_average(&sys, &f, &Point::limit(0.0), n).unwrap();
        // Re Σ e^{2πijα} = cos(π(n−1)α)·sin(πnα)/sin(πα)
        let re = (PI * (n - 1) as f64 * GOLDEN).cos() * exact / n as f64;
        assert_abs_diff_eq!(a, re, epsilon = 1e-10);
        assert!(a.abs() <= 1.0 / (n as f64 * (PI * GOLDEN).sin()));
    }
    let a = birkhoff_average(&sys, &f, &Point::limit(0.0), 10_000).unwrap();
    assert!(a.abs() <= 1.1e-4, "{a}");
}

/// The slowed-down circle is conjugate to a rotation by `h`, so its
/// invariant measure is `h*Leb` and gives the arc exactly `1 − 1/(k+1)`.
#[test]
fn example2_arc_mass_matches_conjugacy() {
    let p = ExampleParams::default();
    let sys = gallery::make_example2(&p).unwrap();
    for &k in &[4u32, 16] {
        let w = 1.0 / (k as f64 + 2.0);
        let m = 1.0 - 1.0 / (k as f64 + 1.0);
        let mu = empirical_measure(&sys, &Point::circle(k, 0.3), 200_000).unwrap();
        let inside = mu.mass_where(|q| circular_distance(q.angle().unwrap(), 0.0) <= w / 2.0);
        assert_abs_diff_eq!(inside, m, epsilon = 5e-3);
    }
}

/// Outside the arc the slowed map is the rotation by `α0/k`.
#[test]
fn example2_displacement_outside_arc() {
    let p = ExampleParams::default();
    let sys = gallery::make_example2(&p).unwrap();
    let k = 8u32;
    let alpha = GOLDEN / k as f64;
    let next = sys.step(&Point::circle(k, 0.4)).unwrap();
    assert_abs_diff_eq!(next.angle().unwrap(), 0.4 + alpha, epsilon = 1e-12);
}

/// Example 1: the arc-length average of the first coordinate over `C_k`
/// is 0, reached at rate `1/(n·sin(πα/k))`.
#[test]
fn example1_circle_average() {
    let p = ExampleParams::default();
    let sys = gallery::make_example1(&p).unwrap();
    let k = 8u32;
    let n = 50_000;
    let a = birkhoff_average(&sys, &Observable::first_coordinate(), &Point::circle(k, 0.0), n).unwrap();
    let r = 1.0 - 1.0 / (k as f64 + 1.0);
    let bound = r / (n as f64 * (PI * GOLDEN / k as f64).sin());
    assert!(a.abs() <= bound, "{a} > {bound}");
}

/// Trapezoid quadrature of `x` against the explicit arc density of the
/// example-2 measure (`m/w` inside, `(1−m)/(1−w)` outside) agrees with the
/// long-orbit average.
#[test]
fn example2_quadrature() {
    let p = ExampleParams::default();
    let sys = gallery::make_example2(&p).unwrap();
    let k = 6u32;
    let (w, m) = (1.0 / (k as f64 + 2.0), 1.0 - 1.0 / (k as f64 + 1.0));
    let r = 1.0 - 1.0 / (k as f64 + 1.0);
    let steps = 200_000;
    let mut q = 0.0;
    for i in 0..steps {
        let t = (i as f64 + 0.5) / steps as f64 - 0.5;
        let dens = if t.abs() <= w / 2.0 { m / w } else { (1.0 - m) / (1.0 - w) };
        q += dens * r * (2.0 * PI * t).cos() / steps as f64;
    }
    let a = birkhoff_average(&sys, &Observable::first_coordinate(), &Point::circle(k, 0.1), 400_000).unwrap();
    assert_abs_diff_eq!(a, q, epsilon = 3e-3);
}
