//! Points, components, circle maps and their planar embedding.
//!
//! A system is a disjoint union of components (concentric circles `C_k`, a
//! limit circle `C`, optionally a circle tangent to `C`, or the two-point
//! compactification of the integers). Every transform acts inside a single
//! component, so an orbit never changes component.

use crate::error::{LabError, Result};
use crate::verdict::{Condition, Status};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

const TAU: f64 = 2.0 * PI;

/// Grid used by the homeomorphism check.
pub const HOMEO_GRID: usize = 10_000;

// ---------------------------------------------------------------------------
// Angles

/// Angle measured in full turns, normalized into `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    /// Wraps any finite real into `[0, 1)`.
    #[inline]
    pub fn wrap(turns: f64) -> Angle {
        // orbit steps are small, so the common cases avoid fmod
        if (0.0..1.0).contains(&turns) {
            return Angle(turns);
        }
        if (1.0..2.0).contains(&turns) {
            return Angle(turns - 1.0);
        }
        let t = turns.rem_euclid(1.0);
        // rem_euclid can round up to exactly 1.0 for tiny negative inputs
        Angle(if t >= 1.0 { 0.0 } else { t })
    }

    /// Strict constructor: rejects values outside `[0, 1)`.
    pub fn new(turns: f64) -> Result<Angle> {
        if turns.is_finite() && (0.0..1.0).contains(&turns) {
            Ok(Angle(turns))
        } else {
            Err(LabError::Domain(format!("angle {turns} is not in [0, 1)")))
        }
    }

    #[inline]
    pub fn turns(self) -> f64 {
        self.0
    }
}

/// Distance on the unit-circumference circle, in turns (`0..=0.5`).
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Angle::new(v).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Components and points

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentId {
    Circle(u32),
    LimitCircle,
    TangentCircle,
    IntegerLine,
    PlusInfinity,
    MinusInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordKind {
    Angle,
    Integer,
    Absent,
}

impl ComponentId {
    pub fn coord_kind(self) -> CoordKind {
        match self {
            ComponentId::Circle(_) | ComponentId::LimitCircle | ComponentId::TangentCircle => {
                CoordKind::Angle
            }
            ComponentId::IntegerLine => CoordKind::Integer,
            ComponentId::PlusInfinity | ComponentId::MinusInfinity => CoordKind::Absent,
        }
    }

    pub fn circle_index(self) -> Option<u32> {
        match self {
            ComponentId::Circle(k) => Some(k),
            _ => None,
        }
    }

    fn check(self) -> Result<()> {
        match self {
            ComponentId::Circle(0) => Err(LabError::Domain("circle index must be >= 1".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentId::Circle(k) => write!(f, "circle({k})"),
            ComponentId::LimitCircle => f.write_str("limit-circle"),
            ComponentId::TangentCircle => f.write_str("tangent-circle"),
            ComponentId::IntegerLine => f.write_str("integer-line"),
            ComponentId::PlusInfinity => f.write_str("plus-infinity"),
            ComponentId::MinusInfinity => f.write_str("minus-infinity"),
        }
    }
}

impl FromStr for ComponentId {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s.trim() {
            "limit-circle" => ComponentId::LimitCircle,
            "tangent-circle" => ComponentId::TangentCircle,
            "integer-line" => ComponentId::IntegerLine,
            "plus-infinity" => ComponentId::PlusInfinity,
            "minus-infinity" => ComponentId::MinusInfinity,
            other => {
                let k = other
                    .strip_prefix("circle(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| LabError::Domain(format!("unknown component `{other}`")))?;
                ComponentId::Circle(k)
            }
        };
        id.check()?;
        Ok(id)
    }
}

impl Serialize for ComponentId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComponentId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coord {
    Angle(Angle),
    Integer(i64),
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub component: ComponentId,
    pub coord: Coord,
}

impl Point {
    pub fn new(component: ComponentId, coord: Coord) -> Result<Point> {
        component.check()?;
        let ok = matches!(
            (component.coord_kind(), coord),
            (CoordKind::Angle, Coord::Angle(_))
                | (CoordKind::Integer, Coord::Integer(_))
                | (CoordKind::Absent, Coord::Absent)
        );
        if !ok {
            return Err(LabError::Domain(format!(
                "coordinate {coord:?} does not match component {component}"
            )));
        }
        Ok(Point { component, coord })
    }

    /// Point on an angle-coordinated component; the angle is wrapped.
    pub fn on(component: ComponentId, turns: f64) -> Point {
        debug_assert_eq!(component.coord_kind(), CoordKind::Angle);
        Point { component, coord: Coord::Angle(Angle::wrap(turns)) }
    }

    pub fn circle(k: u32, turns: f64) -> Point {
        Point::on(ComponentId::Circle(k), turns)
    }

    pub fn limit(turns: f64) -> Point {
        Point::on(ComponentId::LimitCircle, turns)
    }

    pub fn tangent(turns: f64) -> Point {
        Point::on(ComponentId::TangentCircle, turns)
    }

    pub fn integer(n: i64) -> Point {
        Point { component: ComponentId::IntegerLine, coord: Coord::Integer(n) }
    }

    pub fn plus_infinity() -> Point {
        Point { component: ComponentId::PlusInfinity, coord: Coord::Absent }
    }

    pub fn minus_infinity() -> Point {
        Point { component: ComponentId::MinusInfinity, coord: Coord::Absent }
    }

    pub fn angle(&self) -> Option<f64> {
        match self.coord {
            Coord::Angle(a) => Some(a.turns()),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coord {
            Coord::Angle(a) => write!(f, "{}@{}", self.component, a.turns()),
            Coord::Integer(n) => write!(f, "{}@{}", self.component, n),
            Coord::Absent => write!(f, "{}", self.component),
        }
    }
}

/// Parses the display form: `circle(3)@0.25`, `integer-line@-7`, `plus-infinity`.
impl FromStr for Point {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (comp, coord) = match s.trim().split_once('@') {
            Some((c, v)) => (c.parse::<ComponentId>()?, Some(v.trim())),
            None => (s.parse::<ComponentId>()?, None),
        };
        let bad = || LabError::Parse(format!("bad coordinate in point `{s}`"));
        let coord = match (comp.coord_kind(), coord) {
            (CoordKind::Angle, Some(v)) => Coord::Angle(Angle::new(v.parse().map_err(|_| bad())?)?),
            (CoordKind::Integer, Some(v)) => Coord::Integer(v.parse().map_err(|_| bad())?),
            (CoordKind::Absent, None) => Coord::Absent,
            _ => return Err(bad()),
        };
        Point::new(comp, coord)
    }
}

// ---------------------------------------------------------------------------
// Transforms

/// Nonnegative displacement functions `d`, giving the circle map
/// `θ ↦ θ + d(θ) mod 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum DisplacementProfile {
    /// `d(θ) = amplitude·sin²(π(θ − phase)) + floor`.
    SineSquared { amplitude: f64, floor: f64, phase: f64 },
    /// Rotation by `alpha` outside the arc of the given width around
    /// `center`, slowed down inside it so that the unique invariant measure
    /// gives the arc mass `mass`.
    ///
    /// Realized as `h⁻¹ ∘ R_β ∘ h` where `h` is the piecewise-linear circle
    /// map stretching the arc to length `mass`, and
    /// `β = alpha·(1 − mass)/(1 − width)` so that the displacement equals
    /// `alpha` exactly on orbit segments that stay outside the arc.
    ArcSlowdown { alpha: f64, center: f64, width: f64, mass: f64 },
}

impl DisplacementProfile {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DisplacementProfile::SineSquared { amplitude, floor, phase } => {
                if !(amplitude.is_finite() && floor.is_finite() && phase.is_finite()) {
                    return Err(LabError::InvalidParams("non-finite sine-squared parameter".into()));
                }
                if amplitude < 0.0 || floor < 0.0 || amplitude + floor >= 1.0 {
                    return Err(LabError::InvalidParams(format!(
                        "sine-squared needs amplitude, floor >= 0 and amplitude + floor < 1 \
                         (got {amplitude}, {floor})"
                    )));
                }
                // lifted derivative 1 + π·a·sin(2π(θ−p)) must stay positive
                if PI * amplitude >= 1.0 {
                    return Err(LabError::InvalidParams(format!(
                        "sine-squared amplitude {amplitude} breaks monotonicity (needs < 1/π)"
                    )));
                }
                Ok(())
            }
            DisplacementProfile::ArcSlowdown { alpha, center, width, mass } => {
                let ok = alpha.is_finite()
                    && center.is_finite()
                    && (0.0..1.0).contains(&alpha)
                    && width > 0.0
                    && width < 0.5
                    && mass > 0.0
                    && mass < 1.0;
                if ok {
                    Ok(())
                } else {
                    Err(LabError::InvalidParams(format!(
                        "arc slowdown needs alpha in [0,1), width in (0,1/2), mass in (0,1) \
                         (got {alpha}, {width}, {mass})"
                    )))
                }
            }
        }
    }

    /// Displacement `d(θ)` in turns.
    #[inline]
    pub fn displacement(&self, theta: f64) -> f64 {
        match *self {
            DisplacementProfile::SineSquared { amplitude, floor, phase } => {
                let s = (PI * (theta - phase)).sin();
                amplitude * s * s + floor
            }
            DisplacementProfile::ArcSlowdown { .. } => {
                let image = self.arc_forward(theta);
                (image - theta).rem_euclid(1.0)
            }
        }
    }

    /// Declared Lipschitz bound of `d`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            DisplacementProfile::SineSquared { amplitude, .. } => PI * amplitude,
            DisplacementProfile::ArcSlowdown { width, mass, .. } => {
                let inside = mass / width;
                let outside = (1.0 - mass) / (1.0 - width);
                let ratio = (inside / outside).max(outside / inside);
                ratio - 1.0
            }
        }
    }

    #[inline]
    pub fn apply(&self, theta: f64) -> f64 {
        match self {
            DisplacementProfile::ArcSlowdown { .. } => self.arc_forward(theta),
            _ => Angle::wrap(theta + self.displacement(theta)).turns(),
        }
    }

    pub fn apply_inverse(&self, phi: f64) -> f64 {
        match *self {
            DisplacementProfile::SineSquared { amplitude, floor, .. } => {
                // g(θ) = θ + d(θ) is increasing; solve g(θ) = φ on
                // [φ − floor − amplitude, φ − floor] by safeguarded Newton.
                let (mut lo, mut hi) = (phi - floor - amplitude, phi - floor);
                let mut t = 0.5 * (lo + hi);
                for _ in 0..100 {
                    let g = t + self.displacement(t) - phi;
                    if g.abs() < 1e-15 {
                        break;
                    }
                    if g > 0.0 {
                        hi = t;
                    } else {
                        lo = t;
                    }
                    let slope = 1.0 + self.displacement_slope(t);
                    let mut next = t - g / slope;
                    if !(next > lo && next < hi) {
                        next = 0.5 * (lo + hi);
                    }
                    if (next - t).abs() < 1e-17 {
                        t = next;
                        break;
                    }
                    t = next;
                }
                Angle::wrap(t).turns()
            }
            DisplacementProfile::ArcSlowdown { .. } => self.arc_inverse(phi),
        }
    }

    fn displacement_slope(&self, theta: f64) -> f64 {
        match *self {
            DisplacementProfile::SineSquared { amplitude, phase, .. } => {
                PI * amplitude * (TAU * (theta - phase)).sin()
            }
            DisplacementProfile::ArcSlowdown { .. } => 0.0,
        }
    }

    // Arc slowdown internals: coordinates relative to the arc start.

    fn arc_params(&self) -> (f64, f64, f64, f64) {
        match *self {
            DisplacementProfile::ArcSlowdown { alpha, center, width, mass } => {
                let start = center - 0.5 * width;
                let beta = alpha * (1.0 - mass) / (1.0 - width);
                (start, width, mass, beta)
            }
            _ => unreachable!(),
        }
    }

    #[inline]
    fn arc_h(u: f64, w: f64, m: f64) -> f64 {
        if u < w {
            u * (m / w)
        } else {
            m + (u - w) * ((1.0 - m) / (1.0 - w))
        }
    }

    #[inline]
    fn arc_h_inv(v: f64, w: f64, m: f64) -> f64 {
        if v < m {
            v * (w / m)
        } else {
            w + (v - m) * ((1.0 - w) / (1.0 - m))
        }
    }

    fn arc_forward(&self, theta: f64) -> f64 {
        let (start, w, m, beta) = self.arc_params();
        let u = Angle::wrap(theta - start).turns();
        let v = Angle::wrap(Self::arc_h(u, w, m) + beta).turns();
        Angle::wrap(Self::arc_h_inv(v, w, m) + start).turns()
    }

    fn arc_inverse(&self, phi: f64) -> f64 {
        let (start, w, m, beta) = self.arc_params();
        let u = Angle::wrap(phi - start).turns();
        let v = Angle::wrap(Self::arc_h(u, w, m) - beta).turns();
        Angle::wrap(Self::arc_h_inv(v, w, m) + start).turns()
    }

    /// Grid check that the lifted map is strictly increasing and that `d`
    /// respects its declared Lipschitz bound.
    pub fn homeomorphism_check(&self, grid: usize) -> Result<()> {
        self.validate()?;
        let h = 1.0 / grid as f64;
        let lip = self.lipschitz();
        let mut prev_lift = f64::NEG_INFINITY;
        let mut prev_d = self.displacement(0.0);
        let first_lift = prev_d;
        for i in 0..grid {
            let theta = i as f64 * h;
            let d = self.displacement(theta);
            if d < 0.0 {
                return Err(LabError::InvalidParams(format!("negative displacement at θ={theta}")));
            }
            let lift = theta + d;
            if lift <= prev_lift {
                return Err(LabError::InvalidParams(format!(
                    "lifted map not strictly increasing near θ={theta}"
                )));
            }
            if i > 0 && (d - prev_d).abs() > lip * h * (1.0 + 1e-9) + 1e-12 {
                return Err(LabError::InvalidParams(format!(
                    "displacement jump {} at θ={theta} exceeds Lipschitz bound {lip}",
                    (d - prev_d).abs()
                )));
            }
            prev_lift = lift;
            prev_d = d;
        }
        // wrap-around: the lift over one turn must advance by less than one turn
        if prev_lift >= first_lift + 1.0 {
            return Err(LabError::InvalidParams("lifted map wraps more than once".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum TransformDescriptor {
    Identity,
    Rotation { alpha: f64 },
    Displacement(DisplacementProfile),
    IntegerShift,
}

impl TransformDescriptor {
    pub fn sine_squared(amplitude: f64, floor: f64, phase: f64) -> Self {
        TransformDescriptor::Displacement(DisplacementProfile::SineSquared { amplitude, floor, phase })
    }

    /// Checks that the transform is admissible on a component of the given
    /// coordinate kind; displacement maps get the grid homeomorphism check.
    pub fn validate_for(&self, kind: CoordKind) -> Result<()> {
        match (self, kind) {
            (TransformDescriptor::Identity, _) => Ok(()),
            (TransformDescriptor::Rotation { alpha }, CoordKind::Angle) => {
                if alpha.is_finite() && (0.0..1.0).contains(alpha) {
                    Ok(())
                } else {
                    Err(LabError::InvalidParams(format!("rotation angle {alpha} not in [0,1)")))
                }
            }
            (TransformDescriptor::Displacement(p), CoordKind::Angle) => {
                p.homeomorphism_check(HOMEO_GRID)
            }
            (TransformDescriptor::IntegerShift, CoordKind::Integer | CoordKind::Absent) => Ok(()),
            (t, k) => Err(LabError::InvalidParams(format!(
                "transform {t:?} cannot act on a component with {k:?} coordinates"
            ))),
        }
    }

    #[inline]
    pub fn forward(&self, coord: Coord) -> Coord {
        match (self, coord) {
            (TransformDescriptor::Identity, c) => c,
            (TransformDescriptor::Rotation { alpha }, Coord::Angle(a)) => {
                Coord::Angle(Angle::wrap(a.turns() + alpha))
            }
            (TransformDescriptor::Displacement(p), Coord::Angle(a)) => {
                Coord::Angle(Angle(p.apply(a.turns())))
            }
            (TransformDescriptor::IntegerShift, Coord::Integer(n)) => Coord::Integer(n + 1),
            (_, c) => c,
        }
    }

    #[inline]
    pub fn backward(&self, coord: Coord) -> Coord {
        match (self, coord) {
            (TransformDescriptor::Identity, c) => c,
            (TransformDescriptor::Rotation { alpha }, Coord::Angle(a)) => {
                Coord::Angle(Angle::wrap(a.turns() - alpha))
            }
            (TransformDescriptor::Displacement(p), Coord::Angle(a)) => {
                Coord::Angle(Angle(p.apply_inverse(a.turns())))
            }
            (TransformDescriptor::IntegerShift, Coord::Integer(n)) => Coord::Integer(n - 1),
            (_, c) => c,
        }
    }

    /// `sup_θ |T(θ) − θ|` (circular distance) estimated on a grid.
    pub fn sup_displacement(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|i| {
                let t = i as f64 / grid as f64;
                match self.forward(Coord::Angle(Angle::wrap(t))) {
                    Coord::Angle(a) => circular_distance(a.turns(), t),
                    _ => 0.0,
                }
            })
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Schematically infinite circle families

/// Transforms of `C_k` for every `k ≥ 1`, so circles beyond the materialized
/// ones can be probed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CircleFamily {
    /// rotation by `alpha0 / k`
    Rotation { alpha0: f64 },
    /// arc slowdown with rotation `alpha0 / k`, arc width `1/(k + width_offset)`
    /// and arc mass `1 − 1/(k + mass_offset)`, centered at the origin
    ArcSlowdown { alpha0: f64, width_offset: f64, mass_offset: f64 },
    /// `min(1/k, drift)·sin²(πθ)`
    DecayingDrift { drift: f64 },
    /// `drift·sin²(πθ) + (k + 1)^(−floor_power)`
    FlooredDrift { drift: f64, floor_power: f64 },
    /// `drift·sin²(πθ)` on every circle
    UniformDrift { drift: f64 },
}

impl CircleFamily {
    pub fn transform(&self, k: u32) -> TransformDescriptor {
        let kf = k as f64;
        match *self {
            CircleFamily::Rotation { alpha0 } => TransformDescriptor::Rotation { alpha: alpha0 / kf },
            CircleFamily::ArcSlowdown { alpha0, width_offset, mass_offset } => {
                TransformDescriptor::Displacement(DisplacementProfile::ArcSlowdown {
                    alpha: alpha0 / kf,
                    center: 0.0,
                    width: 1.0 / (kf + width_offset),
                    mass: 1.0 - 1.0 / (kf + mass_offset),
                })
            }
            CircleFamily::DecayingDrift { drift } => {
                TransformDescriptor::sine_squared((1.0 / kf).min(drift), 0.0, 0.0)
            }
            CircleFamily::FlooredDrift { drift, floor_power } => {
                TransformDescriptor::sine_squared(drift, (kf + 1.0).powf(-floor_power), 0.0)
            }
            CircleFamily::UniformDrift { drift } => TransformDescriptor::sine_squared(drift, 0.0, 0.0),
        }
    }
}

// ---------------------------------------------------------------------------
// Embedding

/// A point where the closures of two components meet in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub components: [ComponentId; 2],
    pub at: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub tangent_center: [f64; 2],
    pub tangent_radius: f64,
    pub line_y: f64,
    pub line_scale: f64,
    #[serde(default)]
    pub contacts: Vec<Contact>,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        EmbeddingParams {
            tangent_center: [2.0, 0.0],
            tangent_radius: 1.0,
            line_y: -2.0,
            line_scale: 5.0,
            contacts: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Embedding {
    /// Concentric circles of radius `1 − 1/(k+1)` inside the unit limit
    /// circle; tangent circle and `tanh`-compressed integer line as
    /// parameterized.
    Standard(EmbeddingParams),
}

impl Default for Embedding {
    fn default() -> Self {
        Embedding::Standard(EmbeddingParams::default())
    }
}

/// Placement of one component in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Placement {
    /// circle of radius `r` around `center`, angle 0 along +x
    Circle { center: [f64; 2], r: f64 },
    Line { y: f64, scale: f64 },
    Fixed([f64; 2]),
}

impl Placement {
    #[inline]
    pub fn position(&self, coord: Coord) -> [f64; 2] {
        match (*self, coord) {
            (Placement::Circle { center, r }, Coord::Angle(a)) => {
                let (s, c) = (TAU * a.turns()).sin_cos();
                [center[0] + r * c, center[1] + r * s]
            }
            (Placement::Line { y, scale }, Coord::Integer(n)) => [(n as f64 / scale).tanh(), y],
            (Placement::Fixed(p), _) => p,
            // coordinate kinds are validated at the API boundary
            (Placement::Circle { center, .. }, _) => center,
            (Placement::Line { y, .. }, _) => [0.0, y],
        }
    }
}

pub fn circle_radius(k: u32) -> f64 {
    1.0 - 1.0 / (k as f64 + 1.0)
}

impl Embedding {
    pub fn params(&self) -> &EmbeddingParams {
        match self {
            Embedding::Standard(p) => p,
        }
    }

    pub fn placement(&self, c: ComponentId) -> Placement {
        let p = self.params();
        match c {
            ComponentId::Circle(k) => Placement::Circle { center: [0.0, 0.0], r: circle_radius(k) },
            ComponentId::LimitCircle => Placement::Circle { center: [0.0, 0.0], r: 1.0 },
            ComponentId::TangentCircle => {
                Placement::Circle { center: p.tangent_center, r: p.tangent_radius }
            }
            ComponentId::IntegerLine => Placement::Line { y: p.line_y, scale: p.line_scale },
            ComponentId::PlusInfinity => Placement::Fixed([1.0, p.line_y]),
            ComponentId::MinusInfinity => Placement::Fixed([-1.0, p.line_y]),
        }
    }

    pub fn embed(&self, p: &Point) -> [f64; 2] {
        self.placement(p.component).position(p.coord)
    }

    /// Contacts touching a component.
    pub fn contacts_of(&self, c: ComponentId) -> impl Iterator<Item = &Contact> {
        self.params().contacts.iter().filter(move |j| j.components.contains(&c))
    }

    /// Contact shared by two distinct components, if declared.
    pub fn contact_between(&self, a: ComponentId, b: ComponentId) -> Option<&Contact> {
        self.params()
            .contacts
            .iter()
            .find(|j| j.components.contains(&a) && j.components.contains(&b) && a != b)
    }
}

#[inline]
pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

// ---------------------------------------------------------------------------
// Metadata

/// Symbolic description of a known minimal set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MinimalSetDecl {
    /// the whole component is minimal
    WholeComponent { component: ComponentId },
    /// a single fixed point
    FixedPoint { point: Point },
    /// every point of the component is fixed
    EveryPoint { component: ComponentId },
    /// every circle `C_k` of the family is minimal
    EveryCircle,
    /// the origin of every circle `C_k` is fixed
    CircleOrigins,
}

impl MinimalSetDecl {
    fn components(&self) -> Vec<ComponentId> {
        match self {
            MinimalSetDecl::WholeComponent { component } | MinimalSetDecl::EveryPoint { component } => {
                vec![*component]
            }
            MinimalSetDecl::FixedPoint { point } => vec![point.component],
            MinimalSetDecl::EveryCircle | MinimalSetDecl::CircleOrigins => vec![],
        }
    }

    /// Whether `p` belongs to one of the declared minimal sets.
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            MinimalSetDecl::WholeComponent { component } | MinimalSetDecl::EveryPoint { component } => {
                p.component == *component
            }
            MinimalSetDecl::FixedPoint { point } => point == p,
            MinimalSetDecl::EveryCircle => matches!(p.component, ComponentId::Circle(_)),
            MinimalSetDecl::CircleOrigins => {
                matches!(p.component, ComponentId::Circle(_)) && p.angle() == Some(0.0)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default)]
    pub minimal_sets: Vec<MinimalSetDecl>,
    #[serde(default)]
    pub ergodic_measures: Vec<String>,
    #[serde(default)]
    pub expected: BTreeMap<Condition, Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// How the materialized circles approach a limit component; drives the
/// structured sequences used by the semicontinuity, (B) and (S) checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Approach {
    /// `C_k → limit` as `k → ∞`
    Circles { limit: ComponentId },
}

// ---------------------------------------------------------------------------
// Systems

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub id: ComponentId,
    pub transform: TransformDescriptor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub components: Vec<ComponentEntry>,
    /// transforms of circles beyond the materialized ones
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<CircleFamily>,
    pub embedding: Embedding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approach: Option<Approach>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<SystemSpec> {
        let spec: SystemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(LabError::InvalidParams("system name is empty".into()));
        }
        if self.components.is_empty() {
            return Err(LabError::InvalidParams("system declares no components".into()));
        }
        let mut seen = BTreeSet::new();
        for entry in &self.components {
            entry.id.check()?;
            if !seen.insert(entry.id) {
                return Err(LabError::InvalidParams(format!(
                    "component {} declared more than once",
                    entry.id
                )));
            }
            entry.transform.validate_for(entry.id.coord_kind())?;
        }
        for j in &self.embedding.params().contacts {
            for c in j.components {
                if !seen.contains(&c) {
                    return Err(LabError::InvalidParams(format!(
                        "contact references undeclared component {c}"
                    )));
                }
            }
        }
        if let Some(Approach::Circles { limit }) = self.approach {
            if !seen.contains(&limit) {
                return Err(LabError::InvalidParams(format!("approach limit {limit} not declared")));
            }
            if self.circles().len() < 2 {
                return Err(LabError::InvalidParams("approach needs at least two circles".into()));
            }
        }
        if let Some(meta) = &self.metadata {
            for m in &meta.minimal_sets {
                for c in m.components() {
                    if !seen.contains(&c) {
                        return Err(LabError::InvalidParams(format!(
                            "metadata references undeclared component {c}"
                        )));
                    }
                }
                if let MinimalSetDecl::FixedPoint { point } = m {
                    Point::new(point.component, point.coord)?;
                }
            }
        }
        Ok(())
    }

    /// Declared components, in declaration order.
    pub fn component_ids(&self) -> impl Iterator<Item = ComponentId> + '_ {
        self.components.iter().map(|e| e.id)
    }

    /// Materialized circle indices, ascending.
    pub fn circles(&self) -> Vec<u32> {
        let mut ks: Vec<u32> = self.component_ids().filter_map(ComponentId::circle_index).collect();
        ks.sort_unstable();
        ks
    }

    pub fn is_declared(&self, c: ComponentId) -> bool {
        self.components.iter().any(|e| e.id == c)
    }

    /// Transform of a component; circles beyond the materialized ones are
    /// served by the family, when the system has one.
    pub fn transform(&self, c: ComponentId) -> Result<TransformDescriptor> {
        if let Some(e) = self.components.iter().find(|e| e.id == c) {
            return Ok(e.transform);
        }
        match (c, &self.family) {
            (ComponentId::Circle(k), Some(fam)) if k >= 1 => Ok(fam.transform(k)),
            _ => Err(LabError::Domain(format!("component {c} is not part of system {}", self.name))),
        }
    }

    /// Validates a point against the system.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        Point::new(p.component, p.coord)?;
        self.transform(p.component).map(|_| ())
    }

    pub fn step(&self, p: &Point) -> Result<Point> {
        let t = self.transform(p.component)?;
        self.check_point(p)?;
        Ok(Point { component: p.component, coord: t.forward(p.coord) })
    }

    pub fn step_inverse(&self, p: &Point) -> Result<Point> {
        let t = self.transform(p.component)?;
        self.check_point(p)?;
        Ok(Point { component: p.component, coord: t.backward(p.coord) })
    }

    pub fn orbit(&self, p: &Point, n: usize) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(LabError::Argument("orbit length must be at least 1".into()));
        }
        let walker = self.walker(p)?;
        Ok(walker.take(n).collect())
    }

    pub fn embed(&self, p: &Point) -> Result<[f64; 2]> {
        self.check_point(p)?;
        Ok(self.embedding.embed(p))
    }

    /// Forward orbit iterator starting at `p` (yields `p` first).
    pub fn walker(&self, p: &Point) -> Result<Walker> {
        self.check_point(p)?;
        Ok(Walker {
            component: p.component,
            transform: self.transform(p.component)?,
            placement: self.embedding.placement(p.component),
            coord: p.coord,
            backward: false,
        })
    }

    /// Backward orbit iterator starting at `p` (yields `p` first).
    pub fn walker_backward(&self, p: &Point) -> Result<Walker> {
        let mut w = self.walker(p)?;
        w.backward = true;
        Ok(w)
    }

    /// Path distance inside the union of embedded components, routing
    /// between components through declared contacts. Concentric circles are
    /// connected radially. Agrees with the ambient distance to first order
    /// away from contacts and tends to zero together with it.
    pub fn intrinsic_distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(intrinsic(&self.embedding, p, q))
    }

    pub fn expected(&self) -> BTreeMap<Condition, Status> {
        self.metadata.as_ref().map(|m| m.expected.clone()).unwrap_or_default()
    }
}

fn polar(p: &Point) -> Option<(f64, f64)> {
    match (p.component, p.coord) {
        (ComponentId::Circle(k), Coord::Angle(a)) => Some((circle_radius(k), a.turns())),
        (ComponentId::LimitCircle, Coord::Angle(a)) => Some((1.0, a.turns())),
        _ => None,
    }
}

fn polar_distance((r1, t1): (f64, f64), (r2, t2): (f64, f64)) -> f64 {
    (r1 - r2).abs() + r1.min(r2) * TAU * circular_distance(t1, t2)
}

fn intrinsic(emb: &Embedding, p: &Point, q: &Point) -> f64 {
    let line_u = |x: &Point| -> Option<f64> {
        match (x.component, x.coord) {
            (ComponentId::IntegerLine, Coord::Integer(n)) => {
                Some((n as f64 / emb.params().line_scale).tanh())
            }
            (ComponentId::PlusInfinity, _) => Some(1.0),
            (ComponentId::MinusInfinity, _) => Some(-1.0),
            _ => None,
        }
    };
    let tangent_arc = |x: &Point, target: f64| -> Option<f64> {
        match (x.component, x.coord) {
            (ComponentId::TangentCircle, Coord::Angle(a)) => {
                Some(emb.params().tangent_radius * TAU * circular_distance(a.turns(), target))
            }
            _ => None,
        }
    };
    if let (Some(a), Some(b)) = (polar(p), polar(q)) {
        return polar_distance(a, b);
    }
    if let (Some(a), Some(b)) = (line_u(p), line_u(q)) {
        return (a - b).abs();
    }
    if p.component == ComponentId::TangentCircle && q.component == ComponentId::TangentCircle {
        return tangent_arc(p, q.angle().unwrap_or(0.0)).unwrap_or(0.0);
    }
    // tangent circle to a concentric circle: through the contact with C
    let via_contact = |t: &Point, c: &Point| -> Option<f64> {
        let contact = emb.contact_between(ComponentId::TangentCircle, ComponentId::LimitCircle)?;
        let cp = contact.at;
        let phi_c = {
            let ctr = emb.params().tangent_center;
            Angle::wrap((cp[1] - ctr[1]).atan2(cp[0] - ctr[0]) / TAU).turns()
        };
        let theta_c = Angle::wrap(cp[1].atan2(cp[0]) / TAU).turns();
        Some(tangent_arc(t, phi_c)? + polar_distance(polar(c)?, (1.0, theta_c)))
    };
    if let Some(d) = via_contact(p, q).or_else(|| via_contact(q, p)) {
        return d;
    }
    dist(emb.embed(p), emb.embed(q))
}

/// Orbit iterator with the transform and placement resolved once.
#[derive(Clone, Debug)]
pub struct Walker {
    component: ComponentId,
    transform: TransformDescriptor,
    placement: Placement,
    coord: Coord,
    backward: bool,
}

impl Walker {
    /// Current point without advancing.
    #[inline]
    pub fn current(&self) -> Point {
        Point { component: self.component, coord: self.coord }
    }

    #[inline]
    pub fn position(&self) -> [f64; 2] {
        self.placement.position(self.coord)
    }

    #[inline]
    pub fn advance(&mut self) {
        self.coord = if self.backward {
            self.transform.backward(self.coord)
        } else {
            self.transform.forward(self.coord)
        };
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }
}

impl Iterator for Walker {
    type Item = Point;

    #[inline]
    fn next(&mut self) -> Option<Point> {
        let p = self.current();
        self.advance();
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_circle(t: TransformDescriptor) -> SystemSpec {
        SystemSpec {
            name: "test".into(),
            components: vec![ComponentEntry { id: ComponentId::Circle(1), transform: t }],
            family: None,
            embedding: Embedding::default(),
            approach: None,
            metadata: None,
        }
    }

    #[test]
    fn point_text_round_trip() {
        for p in [Point::circle(3, 0.25), Point::limit(0.0), Point::integer(-7), Point::minus_infinity()] {
            assert_eq!(p.to_string().parse::<Point>().unwrap(), p);
        }
        assert!("circle(3)".parse::<Point>().is_err());
        assert!("plus-infinity@1".parse::<Point>().is_err());
        assert!("circle(0)@0.5".parse::<Point>().is_err());
    }

    #[test]
    fn angle_wrap_stays_in_range() {
        assert_eq!(Angle::wrap(-1e-20).turns(), 0.0);
        assert_eq!(Angle::wrap(1.25).turns(), 0.25);
        assert!(Angle::new(1.0).is_err());
    }

    #[test]
    fn rotation_step() {
        let sys = one_circle(TransformDescriptor::Rotation { alpha: 0.25 });
        let q = sys.step(&Point::circle(1, 0.9)).unwrap();
        assert!((q.angle().unwrap() - 0.15).abs() < 1e-12);
    }

    #[test]
    fn component_id_strings() {
        for c in [
            ComponentId::Circle(7),
            ComponentId::LimitCircle,
            ComponentId::TangentCircle,
            ComponentId::IntegerLine,
            ComponentId::PlusInfinity,
            ComponentId::MinusInfinity,
        ] {
            assert_eq!(c.to_string().parse::<ComponentId>().unwrap(), c);
        }
        assert!("circle(0)".parse::<ComponentId>().is_err());
        assert!("square".parse::<ComponentId>().is_err());
    }

    #[test]
    fn sine_inverse_round_trip() {
        let p = DisplacementProfile::SineSquared { amplitude: 0.05, floor: 0.01, phase: 0.3 };
        for i in 0..1000 {
            let t = i as f64 / 1000.0;
            let back = p.apply_inverse(p.apply(t));
            assert!(circular_distance(back, t) < 1e-13, "{t} -> {back}");
        }
    }

    #[test]
    fn arc_slowdown_is_conjugate_rotation() {
        let p = DisplacementProfile::ArcSlowdown { alpha: 0.3, center: 0.0, width: 0.1, mass: 0.9 };
        p.homeomorphism_check(HOMEO_GRID).unwrap();
        // unchanged far from the arc
        assert!((p.displacement(0.5) - 0.3).abs() < 1e-12);
        for i in 0..1000 {
            let t = i as f64 / 1000.0;
            assert!(circular_distance(p.apply_inverse(p.apply(t)), t) < 1e-12);
        }
    }

    #[test]
    fn homeomorphism_check_rejects_folding() {
        let p = DisplacementProfile::SineSquared { amplitude: 0.4, floor: 0.0, phase: 0.0 };
        assert!(p.homeomorphism_check(HOMEO_GRID).is_err());
    }

    #[test]
    fn coord_kind_mismatch_is_domain_error() {
        assert!(Point::new(ComponentId::IntegerLine, Coord::Absent).is_err());
        assert!(Point::new(ComponentId::PlusInfinity, Coord::Absent).is_ok());
    }
}
