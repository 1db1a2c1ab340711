use ergolab::dynamics::{
    ComponentEntry, ComponentId, Embedding, Point, SystemSpec, TransformDescriptor,
};
use ergolab::gallery::{self, ExampleParams, GOLDEN};
use ergolab::measure::{EmpiricalMeasure, Observable};
use ergolab::suite::*;
use ergolab::topology::support_estimate;
use ergolab::verdict::{Condition, Status};
use ergolab::LabError;

/// Smaller sweep for structural tests.
fn quick() -> CheckConfig {
    let mut c = CheckConfig::default();
    c.grid.per_circle = 8;
    c.grid.limit_circle = 16;
    c.grid.tangent_circle = 16;
    c.n_schedule = vec![500, 5_000, 20_000];
    c.u_schedule = (8..=12).map(|j| 1 << j).collect();
    c.omega_burn = 2_000;
    c.omega_keep = 2_000;
    c.support_n = 50_000;
    c
}

fn small(k: u32) -> ExampleParams {
    ExampleParams { k, ..ExampleParams::default() }
}

fn identity_circle() -> SystemSpec {
    SystemSpec {
        name: "identity".into(),
        components: vec![ComponentEntry { id: ComponentId::LimitCircle, transform: TransformDescriptor::Identity }],
        family: None,
        embedding: Embedding::default(),
        approach: None,
        metadata: None,
    }
}

#[test]
fn zcomp_is_pointwise_ergodic_but_not_partitionable() {
    let sys = gallery::make_z_compactification();
    let v = run_suite(&sys, &CheckConfig::default()).unwrap();
    assert_eq!(v.status(Condition::I), Status::Holds);
    assert_eq!(v.status(Condition::PClosed), Status::Fails);
    assert_eq!(v.status(Condition::III), Status::Fails);
    let w = &v.verdicts[&Condition::PClosed].witnesses;
    assert!(w.iter().any(|w| w.starts_with("minus-infinity")), "{w:?}");
    assert!(!v.theorem_cut.applicable);
    assert!(v.diagram.consistent);
    assert!(v.mismatches(&sys.expected()).is_empty());
}

#[test]
fn identity_map_holds_everything() {
    let v = run_suite(&identity_circle(), &quick()).unwrap();
    for c in Condition::ALL {
        assert_eq!(v.status(c), Status::Holds, "{c}");
    }
    assert_eq!(v.partition.atoms, 16);
}

#[test]
fn rational_rotation_is_pointwise_ergodic() {
    let sys = gallery::make_rotation_baseline(0.5).unwrap();
    let v = run_suite(&sys, &quick()).unwrap();
    assert_eq!(v.status(Condition::I), Status::Holds);
    assert_eq!(v.status(Condition::II), Status::Holds);
    assert!(v.diagram.consistent);
}

#[test]
fn golden_rotation_all_hold_and_json_is_deterministic() {
    let sys = gallery::make_rotation_baseline(GOLDEN).unwrap();
    let a = run_suite(&sys, &quick()).unwrap();
    let b = run_suite(&sys, &quick()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.mismatches(&sys.expected()).is_empty());
    let back: PropertyVerdict = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(back.statuses(), a.statuses());
    assert_eq!(a.config_hash, quick().hash());
    for key in ["\"config-hash\"", "\"P-closed\"", "\"witnesses\"", "\"evidence\""] {
        assert!(a.to_json().contains(key), "{key}");
    }
}

#[test]
fn tangent_circle_joins_the_limit_atom() {
    let sys = gallery::by_name("ex6", &small(8), None).unwrap();
    let cfg = quick();
    let sweep = run_sweep(&sys, &cfg).unwrap();
    let part = estimate_partition(&sys, &sweep, &cfg);
    assert!(part.atom_by_label("limit-circle+tangent-circle").is_some(), "{:?}",
        part.atoms.iter().map(|a| &a.label).collect::<Vec<_>>());
    // every grid point in exactly one atom, covered by its cloud
    let mut seen = vec![0; sweep.grid.len()];
    for a in &part.atoms {
        for &i in &a.members {
            seen[i] += 1;
            assert!(a.cloud.distance_to(sweep.grid[i].pos) <= cfg.resolution);
        }
    }
    assert!(seen.iter().all(|&s| s == 1));
}

#[test]
fn example1_partition_splits_the_limit_into_points() {
    let sys = gallery::by_name("ex1", &small(8), None).unwrap();
    let cfg = quick();
    let sweep = run_sweep(&sys, &cfg).unwrap();
    let part = estimate_partition(&sys, &sweep, &cfg);
    // 8 circles plus 16 fixed points on the limit
    assert_eq!(part.atoms.len(), 8 + 16);
    assert!(part.stable);
    assert!(part.atom_by_label("circle(3)").is_some());
    assert!(!part.trace.is_empty());
}

#[test]
fn certificate_on_golden_rotation_respects_geometric_bound() {
    let sys = gallery::make_rotation_baseline(GOLDEN).unwrap();
    let eps = 0.1;
    let cert = uniformity_certificate(&sys, eps, &CheckConfig::default()).unwrap();
    assert!(cert.valid, "{:?}", cert.failure);
    let n1 = cert.max_n.unwrap();
    // |A_n − 0| ≤ 1/(n sin πα) < ε/2 from n > 2/(ε sin πα) on, up to the A_cap offset
    let bound = (2.0 / (eps * (std::f64::consts::PI * GOLDEN).sin())).ceil() as usize + 1;
    assert!(n1 <= bound, "{n1} > {bound}");
    assert_eq!(cert.bound.unwrap(), 2.0 * n1 as f64 / eps);
    let val = cert.validation.unwrap();
    assert!(val.samples >= 200);
    assert!(val.worst.unwrap().n as f64 > cert.bound.unwrap());
}

#[test]
fn certificate_rejects_bad_epsilon() {
    let sys = identity_circle();
    assert!(matches!(uniformity_certificate(&sys, 0.0, &quick()), Err(LabError::Argument(_))));
    assert!(matches!(uniformity_certificate(&sys, f64::NAN, &quick()), Err(LabError::Argument(_))));
}

#[test]
fn orbit_decomposition_edges() {
    let sys = gallery::make_rotation_baseline(GOLDEN).unwrap();
    let f = Observable::first_coordinate();
    let x = Point::limit(0.1);
    assert_eq!(orbit_decomposition_check(&sys, &f, &x, &[100], 100).unwrap(), 0.0);
    assert!(orbit_decomposition_check(&sys, &f, &x, &[], 10_000).unwrap() <= 1e-12);
    assert!(matches!(orbit_decomposition_check(&sys, &f, &x, &[60, 50], 100), Err(LabError::Argument(_))));
    assert!(matches!(orbit_decomposition_check(&sys, &f, &x, &[], 0), Err(LabError::Argument(_))));
}

#[test]
fn config_validation() {
    let mut c = CheckConfig::default();
    c.n_schedule = vec![10, 5, 100];
    assert!(c.validate().is_err());
    let mut c = CheckConfig::default();
    c.ws_tol = -1.0;
    assert!(c.validate().is_err());
    let mut c = CheckConfig::default();
    c.u_observables = 3;
    assert!(c.validate().is_err());
    assert!(CheckConfig::from_json("{\"grid\": 3}").is_err());
    assert!(matches!(CheckConfig::from_json("{"), Err(LabError::Parse(_))));
}

#[test]
fn dirac_support_is_a_singleton() {
    let sys = gallery::make_rotation_baseline(GOLDEN).unwrap();
    let mu = EmpiricalMeasure::dirac(&sys, &Point::limit(0.25)).unwrap();
    let s = support_estimate(&mu, 0.5, 0.02).unwrap();
    assert_eq!(s.len(), 1);
    assert!(matches!(support_estimate(&mu, 2.0, 0.02), Err(LabError::Argument(_))));
}

#[test]
fn uniformity_monotone_in_schedule() {
    // enlarging the schedule never turns a pass into a failure on the same grid
    let sys = gallery::make_rotation_baseline(GOLDEN).unwrap();
    let cfg = quick();
    let sweep = run_sweep(&sys, &cfg).unwrap();
    let short = checks::check_uniformity(&sweep, &cfg, sweep.all());
    let mut longer = cfg.clone();
    longer.u_schedule.push(1 << 13);
    let sweep2 = run_sweep(&sys, &longer).unwrap();
    let long = checks::check_uniformity(&sweep2, &longer, sweep2.all());
    assert_eq!(short.status, Status::Holds);
    assert_eq!(long.status, Status::Holds);
}
