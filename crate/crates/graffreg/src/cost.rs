//! Per-correspondence residuals and the total registration objective.
//!
//! Each feature pair contributes two terms. The rotation term `f` is the
//! squared acute angle between direction data after rotating the source:
//! line direction vs line direction, line direction vs its projection
//! onto the rotated plane, or plane normal vs plane normal (the normal
//! is the orthogonal complement of a plane in R³, so plane-plane
//! alignment reduces to a single angle). The translation term `g` is the
//! squared Euclidean distance in R⁴ between the target's tilde-augmented
//! canonical displacement and its projection onto the embedded
//! transformed source feature.
//!
//! The total objective sums, per pair, the basis-projection residuals
//! `Σⱼ‖P_{R·B}aⱼ − aⱼ‖²` over the target basis columns (the plane-plane
//! case uses the squared normal angle instead) plus the `g` term. For a
//! unit vector `a`, `‖Pa − a‖² = sin²θ` with `θ` the acute angle between
//! `a` and its projection, which is how the projection form and the
//! angle form interchange.

use nalgebra::{Matrix3, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::subspace::{AffineSubspace, RigidTransform};

/// Projection norms below this are treated as a fully degenerate
/// line-to-plane configuration (angle π/2).
const DEGENERATE_PROJECTION: f64 = 1e-12;

/// The three supported 3D feature pairings (target kind, source kind).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    LineLine,
    LinePlane,
    PlanePlane,
}

impl FeatureKind {
    pub fn target_dim(self) -> usize {
        match self {
            FeatureKind::LineLine | FeatureKind::LinePlane => 1,
            FeatureKind::PlanePlane => 2,
        }
    }

    pub fn source_dim(self) -> usize {
        match self {
            FeatureKind::LineLine => 1,
            FeatureKind::LinePlane | FeatureKind::PlanePlane => 2,
        }
    }
}

/// One target/source correspondence. The source feature is the one the
/// transform acts on; the target stays fixed.
#[derive(Debug, Clone)]
pub struct FeaturePair {
    index: usize,
    kind: FeatureKind,
    target: AffineSubspace,
    source: AffineSubspace,
    compiled: CompiledPair,
}

impl FeaturePair {
    /// Pair a target with a source. The kind is inferred from the
    /// subspace dimensions: (1,1), (1,2), or (2,2) in ambient R³.
    pub fn new(index: usize, target: AffineSubspace, source: AffineSubspace) -> Result<Self> {
        if target.dim_ambient() != source.dim_ambient() {
            return Err(Error::MixedAmbientDims(
                target.dim_ambient(),
                source.dim_ambient(),
            ));
        }
        if target.dim_ambient() != 3 {
            return Err(Error::DimensionMismatch {
                what: "feature pairs require ambient dimension 3",
                left: target.dim_ambient(),
                right: 3,
            });
        }
        if target.dim_sub() > source.dim_sub() {
            return Err(Error::SubspaceOrder {
                left: target.dim_sub(),
                right: source.dim_sub(),
            });
        }
        let kind = match (target.dim_sub(), source.dim_sub()) {
            (1, 1) => FeatureKind::LineLine,
            (1, 2) => FeatureKind::LinePlane,
            (2, 2) => FeatureKind::PlanePlane,
            (k, l) => {
                return Err(Error::InvalidConfig(format!(
                    "unsupported pair dimensions ({k}, {l}); lines and planes only"
                )))
            }
        };
        let compiled = CompiledPair::build(kind, &target, &source);
        Ok(Self {
            index,
            kind,
            target,
            source,
            compiled,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn target(&self) -> &AffineSubspace {
        &self.target
    }

    pub fn source(&self) -> &AffineSubspace {
        &self.source
    }

    pub(crate) fn compiled(&self) -> &CompiledPair {
        &self.compiled
    }
}

/// Per-pair residual values plus their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    /// Rotation-only terms, one per pair.
    pub f_terms: Vec<f64>,
    /// Translation terms (embedded-space squared residuals), one per pair.
    pub g_terms: Vec<f64>,
    /// `Σf + Σg`.
    pub total: f64,
}

impl CostBreakdown {
    pub fn f_sum(&self) -> f64 {
        self.f_terms.iter().sum()
    }

    pub fn g_sum(&self) -> f64 {
        self.g_terms.iter().sum()
    }

    pub fn empty() -> Self {
        Self {
            f_terms: Vec::new(),
            g_terms: Vec::new(),
            total: 0.0,
        }
    }
}

/// Squared acute residual angle of one pair under a candidate rotation.
///
/// Line-line and plane-plane compare the rotated source direction/normal
/// with the target one; line-plane measures the angle between the target
/// line direction and its projection onto the rotated source plane, with
/// a vanishing projection defined as π/2.
pub fn rotation_residual(pair: &FeaturePair, rotation: &Matrix3<f64>) -> f64 {
    let angle = pair.compiled.rotation_angle(rotation);
    angle * angle
}

/// Squared embedded-space translation residual of one pair under a full
/// rigid transform (the source feature is transformed; the target's
/// tilde-augmented displacement is projected onto it).
pub fn translation_residual(pair: &FeaturePair, transform: &RigidTransform) -> f64 {
    assert_eq!(transform.dim(), 3, "feature pairs live in R³");
    let r = transform.rotation3();
    let t = transform.translation3();
    pair.compiled.g_term(&r, &t)
}

/// Evaluate the full objective over a set of pairs.
pub fn total_cost(pairs: &[FeaturePair], transform: &RigidTransform) -> Result<CostBreakdown> {
    if transform.dim() != 3 {
        return Err(Error::DimensionMismatch {
            what: "transform dimension for 3D registration",
            left: transform.dim(),
            right: 3,
        });
    }
    let r = transform.rotation3();
    let t = transform.translation3();
    let mut f_terms = Vec::with_capacity(pairs.len());
    let mut g_terms = Vec::with_capacity(pairs.len());
    for pair in pairs {
        f_terms.push(pair.compiled.f_term(&r));
        g_terms.push(pair.compiled.g_term(&r, &t));
    }
    let total = f_terms.iter().sum::<f64>() + g_terms.iter().sum::<f64>();
    Ok(CostBreakdown {
        f_terms,
        g_terms,
        total,
    })
}

// ── Compiled fixed-size pair data (solver hot path) ─────────────────────────

/// Fixed-size 3D data extracted from a pair once, so residual evaluation
/// inside the branch-and-bound loops allocates nothing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CompiledPair {
    pub kind: FeatureKind,
    /// Rotated by candidate rotations: source direction (line-line),
    /// source plane normal (line-plane, plane-plane).
    pub rot_source: Vector3<f64>,
    /// Fixed side: target direction (line-*) or target normal (plane-plane).
    pub rot_target: Vector3<f64>,
    target_cols: [Vector3<f64>; 2],
    n_target_cols: usize,
    source_cols: [Vector3<f64>; 2],
    n_source_cols: usize,
    pub source_disp: Vector3<f64>,
    /// Unit 4-vector `[c₀; 1]/√(1+‖c₀‖²)` of the target.
    pub target_tilde: Vector4<f64>,
}

fn col3(s: &AffineSubspace, j: usize) -> Vector3<f64> {
    Vector3::from_column_slice(s.basis().column(j).as_slice())
}

/// Acute angle between two unit vectors via atan2, which stays accurate
/// near 0 and π/2 where arccos loses digits.
fn acute_angle(u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    let cross = u.cross(v).norm();
    let dot = u.dot(v).abs();
    cross.atan2(dot)
}

/// Residual angle between the (already rotated) source direction datum and
/// the target one: direction vs direction, direction vs plane (through the
/// plane normal, where the angle to the projection is arcsin |d·n| and a
/// vanishing projection hits exactly π/2), or normal vs normal.
pub(crate) fn residual_angle(
    kind: FeatureKind,
    rotated_source: &Vector3<f64>,
    target: &Vector3<f64>,
) -> f64 {
    match kind {
        FeatureKind::LineLine | FeatureKind::PlanePlane => acute_angle(rotated_source, target),
        FeatureKind::LinePlane => {
            let s = target.dot(rotated_source).abs().min(1.0);
            let projection_norm_sq = 1.0 - s * s;
            if projection_norm_sq < DEGENERATE_PROJECTION * DEGENERATE_PROJECTION {
                std::f64::consts::FRAC_PI_2
            } else {
                s.asin()
            }
        }
    }
}

impl CompiledPair {
    fn build(kind: FeatureKind, target: &AffineSubspace, source: &AffineSubspace) -> Self {
        let mut target_cols = [Vector3::zeros(); 2];
        for j in 0..target.dim_sub() {
            target_cols[j] = col3(target, j);
        }
        let mut source_cols = [Vector3::zeros(); 2];
        for j in 0..source.dim_sub() {
            source_cols[j] = col3(source, j);
        }
        let (rot_source, rot_target) = match kind {
            FeatureKind::LineLine => (source_cols[0], target_cols[0]),
            FeatureKind::LinePlane => (
                source_cols[0].cross(&source_cols[1]).normalize(),
                target_cols[0],
            ),
            FeatureKind::PlanePlane => (
                source_cols[0].cross(&source_cols[1]).normalize(),
                target_cols[0].cross(&target_cols[1]).normalize(),
            ),
        };
        let c0 = target.displacement3().expect("3D pair");
        let scale = 1.0 / (1.0 + c0.norm_squared()).sqrt();
        let target_tilde = Vector4::new(c0.x * scale, c0.y * scale, c0.z * scale, scale);
        Self {
            kind,
            rot_source,
            rot_target,
            target_cols,
            n_target_cols: target.dim_sub(),
            source_cols,
            n_source_cols: source.dim_sub(),
            source_disp: source.displacement3().expect("3D pair"),
            target_tilde,
        }
    }

    pub fn source_cols(&self) -> &[Vector3<f64>] {
        &self.source_cols[..self.n_source_cols]
    }

    pub fn target_cols(&self) -> &[Vector3<f64>] {
        &self.target_cols[..self.n_target_cols]
    }

    /// Acute residual angle (radians) under `r`.
    pub fn rotation_angle(&self, r: &Matrix3<f64>) -> f64 {
        residual_angle(self.kind, &(r * self.rot_source), &self.rot_target)
    }

    /// The f-term of the total objective: basis-projection residuals for
    /// line targets, squared normal angle for plane-plane.
    pub fn f_term(&self, r: &Matrix3<f64>) -> f64 {
        match self.kind {
            FeatureKind::PlanePlane => {
                let angle = self.rotation_angle(r);
                angle * angle
            }
            FeatureKind::LineLine | FeatureKind::LinePlane => {
                let mut sum = 0.0;
                for a in self.target_cols() {
                    sum += self.f_residual_vec(r, a).norm_squared();
                }
                sum
            }
        }
    }

    /// Residual vector `P_{R·B}a − a` for one target basis column.
    pub fn f_residual_vec(&self, r: &Matrix3<f64>, a: &Vector3<f64>) -> Vector3<f64> {
        let mut projected = Vector3::zeros();
        for b in self.source_cols() {
            let rb = r * b;
            projected += rb * rb.dot(a);
        }
        projected - a
    }

    /// Displacement of the transformed source: `R(d₀ + (I − BBᵀ)Rᵀt)`.
    pub fn transformed_source_disp(&self, r: &Matrix3<f64>, t: &Vector3<f64>) -> Vector3<f64> {
        let u = r.transpose() * t;
        let mut w = self.source_disp + u;
        for b in self.source_cols() {
            w -= b * b.dot(&u);
        }
        r * w
    }

    /// `P_{z(T·source)}·c̃ − c̃` in R⁴.
    pub fn g_residual_vec(&self, r: &Matrix3<f64>, t: &Vector3<f64>) -> Vector4<f64> {
        let d = self.transformed_source_disp(r, t);
        let tilde = tilde4(&d);
        let c = self.target_tilde;
        let c3 = Vector3::new(c.x, c.y, c.z);
        let mut projected = tilde * c.dot(&tilde);
        for b in self.source_cols() {
            let rb = r * b;
            let coeff = c3.dot(&rb);
            projected.x += coeff * rb.x;
            projected.y += coeff * rb.y;
            projected.z += coeff * rb.z;
        }
        projected - c
    }

    pub fn g_term(&self, r: &Matrix3<f64>, t: &Vector3<f64>) -> f64 {
        self.g_residual_vec(r, t).norm_squared()
    }
}

/// `[v; 1]/√(1+‖v‖²)`.
pub(crate) fn tilde4(v: &Vector3<f64>) -> Vector4<f64> {
    let scale = 1.0 / (1.0 + v.norm_squared()).sqrt();
    Vector4::new(v.x * scale, v.y * scale, v.z * scale, scale)
}
