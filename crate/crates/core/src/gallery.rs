//! The seven gallery systems: six circle-family examples, the two-point
//! compactification of the integers, and a single-rotation baseline.

use crate::dynamics::{
    Approach, CircleFamily, ComponentEntry, ComponentId, Contact, Embedding, EmbeddingParams,
    Metadata, MinimalSetDecl, Point, SystemSpec, TransformDescriptor,
};
use crate::error::{LabError, Result};
use crate::verdict::{Condition, Status};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `(√5 − 1)/2`
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub const GALLERY_NAMES: [&str; 8] = ["ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "rotation", "zcomp"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleParams {
    /// number of materialized circles
    pub k: u32,
    pub alpha0: f64,
    /// slowdown arc of `C_k` has width `1/(k + width_offset)`
    pub width_offset: f64,
    /// and carries invariant mass `1 − 1/(k + mass_offset)`
    pub mass_offset: f64,
    /// drift amplitude `s`
    pub drift: f64,
    /// drift floor `η_k = (k + 1)^(−floor_power)`
    pub floor_power: f64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams {
            k: 64,
            alpha0: GOLDEN,
            width_offset: 2.0,
            mass_offset: 1.0,
            drift: 0.05,
            floor_power: 2.0,
        }
    }
}

impl ExampleParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k >= 2
            && self.alpha0 > 0.0
            && self.alpha0 < 1.0
            && self.width_offset > 1.0 // w_1 < 1/2
            && self.mass_offset > 0.0
            && self.drift > 0.0
            && self.drift < 0.5
            && self.floor_power > 0.0;
        if ok {
            Ok(())
        } else {
            Err(LabError::InvalidParams(format!("invalid example parameters {self:?}")))
        }
    }

    pub fn width(&self, k: u32) -> f64 {
        1.0 / (k as f64 + self.width_offset)
    }

    pub fn mass(&self, k: u32) -> f64 {
        1.0 - 1.0 / (k as f64 + self.mass_offset)
    }

    pub fn floor(&self, k: u32) -> f64 {
        (k as f64 + 1.0).powf(-self.floor_power)
    }
}

fn expected(table: &[(Condition, bool)]) -> BTreeMap<Condition, Status> {
    table.iter().map(|&(c, h)| (c, Status::from_bool(h))).collect()
}

fn circle_system(
    name: &str,
    p: &ExampleParams,
    family: CircleFamily,
    limit: TransformDescriptor,
    metadata: Metadata,
) -> SystemSpec {
    let mut components: Vec<ComponentEntry> = (1..=p.k)
        .map(|k| ComponentEntry { id: ComponentId::Circle(k), transform: family.transform(k) })
        .collect();
    components.push(ComponentEntry { id: ComponentId::LimitCircle, transform: limit });
    SystemSpec {
        name: name.to_string(),
        components,
        family: Some(family),
        embedding: Embedding::default(),
        approach: Some(Approach::Circles { limit: ComponentId::LimitCircle }),
        metadata: Some(metadata),
    }
}

/// Rotations `α0/k` on `C_k`, identity on `C`.
pub fn make_example1(p: &ExampleParams) -> Result<SystemSpec> {
    p.validate()?;
    use Condition::*;
    let meta = Metadata {
        minimal_sets: vec![
            MinimalSetDecl::EveryCircle,
            MinimalSetDecl::EveryPoint { component: ComponentId::LimitCircle },
        ],
        ergodic_measures: vec!["lebesgue(C_k)".into(), "dirac(x), x in C".into()],
        expected: expected(&[
            (I, true),
            (II, true),
            (III, true),
            (PUsc, false),
            (V, false),
            (B, false),
            (S, true),
            (U, false),
        ]),
        note: Some("arc-length measures on C_k converge to the non-ergodic arc length on C".into()),
    };
    Ok(circle_system(
        "ex1",
        p,
        CircleFamily::Rotation { alpha0: p.alpha0 },
        TransformDescriptor::Identity,
        meta,
    ))
}

/// Example 1 slowed down on a shrinking arc `I_k` around the origin so that
/// the invariant measure of `C_k` concentrates: `μ_k(I_k) → 1`.
pub fn make_example2(p: &ExampleParams) -> Result<SystemSpec> {
    p.validate()?;
    use Condition::*;
    let meta = Metadata {
        minimal_sets: vec![
            MinimalSetDecl::EveryCircle,
            MinimalSetDecl::EveryPoint { component: ComponentId::LimitCircle },
        ],
        ergodic_measures: vec!["mu_k on C_k".into(), "dirac(x), x in C".into()],
        expected: expected(&[
            (I, true),
            (II, true),
            (III, true),
            (PUsc, false),
            (V, false),
            (B, true),
            (S, false),
            (U, false),
        ]),
        note: Some(format!(
            "target: mu_k(I_k) = 1 - 1/(k + {}) -> 1, I_k of width 1/(k + {})",
            p.mass_offset, p.width_offset
        )),
    };
    Ok(circle_system(
        "ex2",
        p,
        CircleFamily::ArcSlowdown {
            alpha0: p.alpha0,
            width_offset: p.width_offset,
            mass_offset: p.mass_offset,
        },
        TransformDescriptor::Identity,
        meta,
    ))
}

/// `C_k` drifts towards its fixed origin with speed `min(1/k, s)`; `C` is
/// fixed pointwise.
pub fn make_example3(p: &ExampleParams) -> Result<SystemSpec> {
    p.validate()?;
    use Condition::*;
    let meta = Metadata {
        minimal_sets: vec![
            MinimalSetDecl::CircleOrigins,
            MinimalSetDecl::EveryPoint { component: ComponentId::LimitCircle },
        ],
        ergodic_measures: vec!["dirac(c_k)".into(), "dirac(x), x in C".into()],
        expected: expected(&[
            (I, true),
            (II, false),
            (III, true),
            (PUsc, false),
            (V, false),
            (B, true),
            (S, true),
            (U, false),
        ]),
        note: None,
    };
    Ok(circle_system(
        "ex3",
        p,
        CircleFamily::DecayingDrift { drift: p.drift },
        TransformDescriptor::Identity,
        meta,
    ))
}

/// `C_k` carries `s·sin² + η_k` (no fixed point), `C` carries `s·sin²`
/// (fixed point `c` only).
pub fn make_example4(p: &ExampleParams) -> Result<SystemSpec> {
    p.validate()?;
    use Condition::*;
    let meta = Metadata {
        minimal_sets: vec![
            MinimalSetDecl::EveryCircle,
            MinimalSetDecl::FixedPoint { point: Point::limit(0.0) },
        ],
        ergodic_measures: vec!["mu_k on C_k".into(), "dirac(c)".into()],
        expected: expected(&[
            (I, true),
            (II, false),
            (III, true),
            (PUsc, true),
            (V, true),
            (VI, false),
            (B, true),
            (S, false),
            (U, true),
        ]),
        note: None,
    };
    Ok(circle_system(
        "ex4",
        p,
        CircleFamily::FlooredDrift { drift: p.drift, floor_power: p.floor_power },
        TransformDescriptor::sine_squared(p.drift, 0.0, 0.0),
        meta,
    ))
}

fn example5_meta(tangent: bool) -> Metadata {
    use Condition::*;
    let mut minimal_sets = vec![
        MinimalSetDecl::CircleOrigins,
        MinimalSetDecl::FixedPoint { point: Point::limit(0.0) },
    ];
    if tangent {
        minimal_sets.push(MinimalSetDecl::FixedPoint { point: Point::tangent(0.5) });
    }
    Metadata {
        minimal_sets,
        ergodic_measures: vec!["dirac(c_k)".into(), "dirac(c)".into()],
        expected: expected(&[
            (I, true),
            (II, false),
            (III, true),
            (PUsc, true),
            (V, true),
            (VI, false),
            (B, true),
            (S, true),
            (U, true),
        ]),
        note: tangent.then(|| "the atom of c is C together with the tangent circle".to_string()),
    }
}

/// The same drift `s·sin²` on every component.
pub fn make_example5(p: &ExampleParams) -> Result<SystemSpec> {
    p.validate()?;
    Ok(circle_system(
        "ex5",
        p,
        CircleFamily::UniformDrift { drift: p.drift },
        TransformDescriptor::sine_squared(p.drift, 0.0, 0.0),
        example5_meta(false),
    ))
}

/// Example 5 plus a unit circle tangent to `C` at `c`, drifting towards the
/// tangency point.
pub fn make_example6(p: &ExampleParams) -> Result<SystemSpec> {
    p.validate()?;
    let mut sys = circle_system(
        "ex6",
        p,
        CircleFamily::UniformDrift { drift: p.drift },
        TransformDescriptor::sine_squared(p.drift, 0.0, 0.0),
        example5_meta(true),
    );
    sys.components.push(ComponentEntry {
        id: ComponentId::TangentCircle,
        transform: TransformDescriptor::sine_squared(p.drift, 0.0, 0.5),
    });
    sys.embedding = Embedding::Standard(EmbeddingParams {
        contacts: vec![Contact {
            components: [ComponentId::LimitCircle, ComponentId::TangentCircle],
            at: [1.0, 0.0],
        }],
        ..EmbeddingParams::default()
    });
    Ok(sys)
}

/// `ℤ ∪ {−∞, +∞}` with `x ↦ x + 1`.
pub fn make_z_compactification() -> SystemSpec {
    use Condition::*;
    SystemSpec {
        name: "zcomp".into(),
        components: vec![
            ComponentEntry { id: ComponentId::IntegerLine, transform: TransformDescriptor::IntegerShift },
            ComponentEntry { id: ComponentId::PlusInfinity, transform: TransformDescriptor::Identity },
            ComponentEntry { id: ComponentId::MinusInfinity, transform: TransformDescriptor::Identity },
        ],
        family: None,
        embedding: Embedding::Standard(EmbeddingParams {
            contacts: vec![
                Contact {
                    components: [ComponentId::IntegerLine, ComponentId::PlusInfinity],
                    at: [1.0, -2.0],
                },
                Contact {
                    components: [ComponentId::IntegerLine, ComponentId::MinusInfinity],
                    at: [-1.0, -2.0],
                },
            ],
            ..EmbeddingParams::default()
        }),
        approach: None,
        metadata: Some(Metadata {
            minimal_sets: vec![
                MinimalSetDecl::FixedPoint { point: Point::plus_infinity() },
                MinimalSetDecl::FixedPoint { point: Point::minus_infinity() },
            ],
            ergodic_measures: vec!["dirac(+inf)".into(), "dirac(-inf)".into()],
            expected: expected(&[(I, true), (III, false), (PClosed, false)]),
            note: Some("integers are generic for dirac(+inf); that atom is not closed".into()),
        }),
    }
}

/// A single rotation by `alpha` on the unit circle.
pub fn make_rotation_baseline(alpha: f64) -> Result<SystemSpec> {
    if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
        return Err(LabError::InvalidParams(format!("rotation angle {alpha} not in [0,1)")));
    }
    let expected_all = Condition::ALL.iter().map(|&c| (c, Status::Holds)).collect();
    Ok(SystemSpec {
        name: "rotation".into(),
        components: vec![ComponentEntry {
            id: ComponentId::LimitCircle,
            transform: TransformDescriptor::Rotation { alpha },
        }],
        family: None,
        embedding: Embedding::default(),
        approach: None,
        metadata: Some(Metadata {
            minimal_sets: Vec::new(),
            ergodic_measures: vec![format!("rotation({alpha})")],
            expected: expected_all,
            note: Some(format!("alpha = {alpha}")),
        }),
    })
}

/// Looks a gallery system up by its CLI name.
pub fn by_name(name: &str, p: &ExampleParams, alpha: Option<f64>) -> Result<SystemSpec> {
    match name {
        "ex1" => make_example1(p),
        "ex2" => make_example2(p),
        "ex3" => make_example3(p),
        "ex4" => make_example4(p),
        "ex5" => make_example5(p),
        "ex6" => make_example6(p),
        "zcomp" => Ok(make_z_compactification()),
        "rotation" => make_rotation_baseline(alpha.unwrap_or(GOLDEN)),
        other => Err(LabError::Argument(format!(
            "unknown system `{other}` (known: {})",
            GALLERY_NAMES.join(", ")
        ))),
    }
}
