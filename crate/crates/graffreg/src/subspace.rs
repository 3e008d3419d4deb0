//! Affine subspaces as Grassmannian elements, the geodesic metric, and
//! the SE(n) group action.
//!
//! An affine subspace of Rⁿ is stored as an n×k orthonormal basis `A`
//! for its linear part together with the unique displacement `b₀`
//! orthogonal to that part, obtained from any anchor point `c` as
//! `b₀ = (I − AAᵀ)c`. Embedding the pair as the (n+1)×(k+1) orthonormal
//! matrix
//!
//! ```text
//! Y = [ A   b₀/√(1+‖b₀‖²) ]
//!     [ 0    1/√(1+‖b₀‖²) ]
//! ```
//!
//! places the affine subspace on a higher-dimensional Grassmannian, so
//! geodesic distance between affine subspaces reduces to principal
//! angles between the embedded bases. Rigid motions act on the pair by
//! `A ↦ RA`, `b₀ ↦ Rb₀ + R(I − AAᵀ)Rᵀt`, which commutes with the usual
//! point action `x ↦ Rx + t`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

/// Smallest singular value (after column normalization) accepted as full rank.
const RANK_TOL: f64 = 1e-8;
/// Orthonormality drift beyond which a rotated basis is re-orthonormalized.
const DRIFT_TOL: f64 = 1e-12;
/// Tolerance for the SO(n) checks on `RigidTransform` construction.
const ROTATION_TOL: f64 = 1e-9;

// ── Free operations on plain matrices ───────────────────────────────────────

/// Orthonormalize the columns of `raw` without changing their span.
///
/// Columns are normalized, checked for numerical rank, then passed twice
/// through modified Gram-Schmidt. The first column keeps its direction.
pub fn orthonormalize(raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, k) = raw.shape();
    if k == 0 {
        return Ok(raw.clone());
    }
    if k > n {
        return Err(Error::RankDeficient {
            context: format!("{k} columns in dimension {n}"),
        });
    }
    // Already-orthonormal input passes through untouched, so canonical
    // data survives a parse round trip bit-for-bit.
    if orthonormality_drift(raw) < 1e-13 {
        return Ok(raw.clone());
    }
    let mut m = raw.clone();
    for j in 0..k {
        let norm = m.column(j).norm();
        if norm <= f64::MIN_POSITIVE {
            return Err(Error::RankDeficient {
                context: format!("column {j} is zero"),
            });
        }
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    let singular_values = m.clone().svd(false, false).singular_values;
    let sigma_min = singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if sigma_min <= RANK_TOL {
        return Err(Error::RankDeficient {
            context: format!("smallest singular value {sigma_min:.3e}"),
        });
    }
    // Two MGS passes restore orthogonality to machine precision even for
    // ill-conditioned (but full-rank) inputs.
    for _ in 0..2 {
        for j in 0..k {
            for i in 0..j {
                let proj = m.column(i).dot(&m.column(j));
                let prev = m.column(i).clone_owned();
                m.column_mut(j).axpy(-proj, &prev, 1.0);
            }
            let norm = m.column(j).norm();
            m.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    Ok(m)
}

/// Unique displacement orthogonal to `basis` reaching the affine subspace
/// through `anchor`: `b₀ = anchor − A(Aᵀ·anchor)`.
pub fn canonical_displacement(basis: &DMatrix<f64>, anchor: &DVector<f64>) -> DVector<f64> {
    let mut out = anchor.clone();
    if basis.ncols() == 0 {
        return out;
    }
    let coeffs = basis.transpose() * anchor;
    // an anchor that is orthogonal to float precision stays untouched, so
    // canonicalization is a fixed point on canonical data
    if coeffs.amax() <= 1e-14 * (1.0 + anchor.norm()) {
        return out;
    }
    out.gemv(-1.0, basis, &coeffs, 1.0);
    out
}

/// Orthogonal projector `P = UUᵀ` onto the span of an orthonormal basis.
pub fn projection_matrix(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

/// Principal angles between the column spans of two orthonormal matrices,
/// in radians, ascending.
///
/// The angles are `θᵢ = arccos(σᵢ)` for the descending singular values of
/// `YaᵀYb`, clamped into [0, 1] before the arccos. `Ya` must not have more
/// columns than `Yb`.
pub fn principal_angles(ya: &DMatrix<f64>, yb: &DMatrix<f64>) -> Result<Vec<f64>> {
    if ya.nrows() != yb.nrows() {
        return Err(Error::DimensionMismatch {
            what: "principal angles: row counts",
            left: ya.nrows(),
            right: yb.nrows(),
        });
    }
    if ya.ncols() > yb.ncols() {
        return Err(Error::SubspaceOrder {
            left: ya.ncols(),
            right: yb.ncols(),
        });
    }
    if ya.ncols() == 0 {
        return Ok(Vec::new());
    }
    let product = ya.transpose() * yb;
    let mut sigma: Vec<f64> = product.svd(false, false).singular_values.iter().cloned().collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    sigma.truncate(ya.ncols());
    Ok(sigma.into_iter().map(|s| s.clamp(0.0, 1.0).acos()).collect())
}

/// Grassmann (geodesic) distance: root-sum-square of the principal angles.
pub fn grassmann_distance(ya: &DMatrix<f64>, yb: &DMatrix<f64>) -> Result<f64> {
    let angles = principal_angles(ya, yb)?;
    Ok(angles.iter().map(|t| t * t).sum::<f64>().sqrt())
}

// ── AffineSubspace ───────────────────────────────────────────────────────────

/// A k-dimensional affine subspace of Rⁿ: orthonormal basis plus the
/// canonical orthogonal displacement.
///
/// `k = 1` models 3D lines, `k = 2` planes, `k = 0` points (empty basis).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    basis: DMatrix<f64>,
    displacement: DVector<f64>,
}

impl AffineSubspace {
    /// Build from a raw (not necessarily orthonormal) basis and any anchor
    /// point on the subspace. The basis is orthonormalized and the anchor
    /// reduced to the canonical displacement.
    pub fn new(raw_basis: &DMatrix<f64>, anchor: &DVector<f64>) -> Result<Self> {
        if raw_basis.nrows() != anchor.len() {
            return Err(Error::DimensionMismatch {
                what: "basis rows vs anchor length",
                left: raw_basis.nrows(),
                right: anchor.len(),
            });
        }
        if raw_basis.ncols() >= raw_basis.nrows() {
            return Err(Error::DimensionMismatch {
                what: "subspace dimension must be below ambient",
                left: raw_basis.ncols(),
                right: raw_basis.nrows(),
            });
        }
        let basis = orthonormalize(raw_basis)?;
        let displacement = canonical_displacement(&basis, anchor);
        Ok(Self { basis, displacement })
    }

    /// A point (k = 0) at `x`.
    pub fn point(x: DVector<f64>) -> Self {
        let n = x.len();
        Self {
            basis: DMatrix::zeros(n, 0),
            displacement: x,
        }
    }

    /// A 3D line with the given direction through `anchor`.
    pub fn line3(direction: Vector3<f64>, anchor: Vector3<f64>) -> Result<Self> {
        let raw = DMatrix::from_column_slice(3, 1, direction.as_slice());
        Self::new(&raw, &DVector::from_column_slice(anchor.as_slice()))
    }

    /// A 3D plane spanned by `u` and `v` through `anchor`.
    pub fn plane3(u: Vector3<f64>, v: Vector3<f64>, anchor: Vector3<f64>) -> Result<Self> {
        let mut raw = DMatrix::zeros(3, 2);
        raw.set_column(0, &DVector::from_column_slice(u.as_slice()).column(0));
        raw.set_column(1, &DVector::from_column_slice(v.as_slice()).column(0));
        Self::new(&raw, &DVector::from_column_slice(anchor.as_slice()))
    }

    /// A 3D point feature.
    pub fn point3(x: Vector3<f64>) -> Self {
        Self::point(DVector::from_column_slice(x.as_slice()))
    }

    pub fn dim_ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim_sub(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    /// Direction of a 1-dimensional subspace in R³.
    pub fn direction3(&self) -> Option<Vector3<f64>> {
        if self.dim_ambient() == 3 && self.dim_sub() == 1 {
            Some(Vector3::from_column_slice(self.basis.column(0).as_slice()))
        } else {
            None
        }
    }

    /// Unit normal of a plane in R³ (cross product of the basis columns).
    /// Orientation is arbitrary; the metric does not depend on it.
    pub fn normal3(&self) -> Option<Vector3<f64>> {
        if self.dim_ambient() == 3 && self.dim_sub() == 2 {
            let u = Vector3::from_column_slice(self.basis.column(0).as_slice());
            let v = Vector3::from_column_slice(self.basis.column(1).as_slice());
            Some(u.cross(&v).normalize())
        } else {
            None
        }
    }

    pub fn displacement3(&self) -> Option<Vector3<f64>> {
        if self.dim_ambient() == 3 {
            Some(Vector3::from_column_slice(self.displacement.as_slice()))
        } else {
            None
        }
    }

    /// The (n+1)×(k+1) orthonormal matrix representation.
    pub fn embed(&self) -> EmbeddedBasis {
        EmbeddedBasis::from_subspace(self)
    }

    /// True iff `‖(I − AAᵀ)(x − b₀)‖ ≤ tol`.
    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> bool {
        assert_eq!(x.len(), self.dim_ambient(), "ambient dimension mismatch");
        let residual = canonical_displacement(&self.basis, &(x - &self.displacement));
        residual.norm() <= tol
    }

    /// Apply a rigid transform: `A ↦ RA`, `b₀ ↦ Rb₀ + R(I − AAᵀ)Rᵀt`.
    pub fn transformed(&self, t: &RigidTransform) -> Result<Self> {
        if t.dim() != self.dim_ambient() {
            return Err(Error::DimensionMismatch {
                what: "transform vs subspace ambient dimension",
                left: t.dim(),
                right: self.dim_ambient(),
            });
        }
        let mut basis = t.rotation() * &self.basis;
        if orthonormality_drift(&basis) > DRIFT_TOL {
            basis = orthonormalize(&basis)?;
        }
        // b₀' = R(b₀ + (I − AAᵀ)Rᵀt), then canonicalized against RA to
        // strip float residue.
        let back_rotated = t.rotation().transpose() * t.translation();
        let orth_part = canonical_displacement(&self.basis, &back_rotated);
        let displacement = canonical_displacement(&basis, &(t.rotation() * (&self.displacement + orth_part)));
        Ok(Self { basis, displacement })
    }
}

fn orthonormality_drift(basis: &DMatrix<f64>) -> f64 {
    let k = basis.ncols();
    if k == 0 {
        return 0.0;
    }
    let gram = basis.transpose() * basis;
    let mut drift: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            drift = drift.max((gram[(i, j)] - target).abs());
        }
    }
    drift
}

// ── EmbeddedBasis ────────────────────────────────────────────────────────────

/// The (n+1)×(k+1) orthonormal matrix representing an affine subspace as a
/// point of Gr(k+1, n+1).
///
/// The first k columns are the basis columns padded with a trailing zero;
/// the last column is `[b₀; 1] / √(1+‖b₀‖²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedBasis {
    matrix: DMatrix<f64>,
}

impl EmbeddedBasis {
    fn from_subspace(s: &AffineSubspace) -> Self {
        let n = s.dim_ambient();
        let k = s.dim_sub();
        let mut matrix = DMatrix::zeros(n + 1, k + 1);
        for j in 0..k {
            for i in 0..n {
                matrix[(i, j)] = s.basis[(i, j)];
            }
        }
        let scale = 1.0 / (1.0 + s.displacement.norm_squared()).sqrt();
        for i in 0..n {
            matrix[(i, k)] = s.displacement[i] * scale;
        }
        matrix[(n, k)] = scale;
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Geodesic distance to another embedded subspace (smaller-dimensional
    /// argument first).
    pub fn distance(&self, other: &EmbeddedBasis) -> Result<f64> {
        grassmann_distance(&self.matrix, &other.matrix)
    }
}

// ── RigidTransform ───────────────────────────────────────────────────────────

/// A rigid motion of Rⁿ: rotation matrix in SO(n) plus translation.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    rotation: DMatrix<f64>,
    translation: DVector<f64>,
}

impl RigidTransform {
    /// Validates `RᵀR = I` and `det R = +1` to 1e-9.
    pub fn new(rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        if !rotation.is_square() || rotation.nrows() != translation.len() {
            return Err(Error::DimensionMismatch {
                what: "rotation vs translation",
                left: rotation.nrows(),
                right: translation.len(),
            });
        }
        let n = rotation.nrows();
        let gram = rotation.transpose() * &rotation;
        let mut drift: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                drift = drift.max((gram[(i, j)] - target).abs());
            }
        }
        if drift > ROTATION_TOL {
            return Err(Error::InvalidConfig(format!(
                "rotation is not orthogonal (drift {drift:.3e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::InvalidConfig(format!(
                "rotation determinant {det} is not +1"
            )));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rotation: DMatrix::identity(n, n),
            translation: DVector::zeros(n),
        }
    }

    /// 3D constructor from fixed-size parts.
    pub fn from_parts3(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Result<Self> {
        Self::new(
            DMatrix::from_column_slice(3, 3, rotation.as_slice()),
            DVector::from_column_slice(translation.as_slice()),
        )
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn rotation3(&self) -> Matrix3<f64> {
        assert_eq!(self.dim(), 3, "rotation3 requires a 3D transform");
        Matrix3::from_column_slice(self.rotation.as_slice())
    }

    pub fn translation3(&self) -> Vector3<f64> {
        assert_eq!(self.dim(), 3, "translation3 requires a 3D transform");
        Vector3::from_column_slice(self.translation.as_slice())
    }

    /// Standard point action `x ↦ Rx + t`.
    pub fn apply_point(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.rotation * x + &self.translation
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &RigidTransform) -> Result<RigidTransform> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                what: "transform composition",
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(RigidTransform {
            rotation: &self.rotation * &other.rotation,
            translation: &self.rotation * &other.translation + &self.translation,
        })
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        let translation = -(&rt * &self.translation);
        RigidTransform { rotation: rt, translation }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Rotation3;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn dmat(cols: &[[f64; 3]]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(3, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..3 {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    fn dvec(v: [f64; 3]) -> DVector<f64> {
        DVector::from_column_slice(&v)
    }

    fn rot_z(angle: f64) -> DMatrix<f64> {
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
        DMatrix::from_column_slice(3, 3, r.matrix().as_slice())
    }

    #[test]
    fn orthonormalize_scales_single_column() {
        let out = orthonormalize(&dmat(&[[2.0, 0.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(out[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[(1, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[(2, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn orthonormalize_spans_xy_plane() {
        let out = orthonormalize(&dmat(&[[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])).unwrap();
        // Orthonormal and z-components zero: same span as the input.
        let gram = out.transpose() * &out;
        assert_abs_diff_eq!(gram[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gram[(1, 1)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gram[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[(2, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[(2, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn orthonormalize_rejects_parallel_columns() {
        let err = orthonormalize(&dmat(&[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn orthonormalize_rejects_zero_column() {
        let err = orthonormalize(&dmat(&[[0.0, 0.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn canonical_displacement_strips_in_span_components() {
        let e1 = dmat(&[[1.0, 0.0, 0.0]]);
        let out = canonical_displacement(&e1, &dvec([2.0, 3.0, 4.0]));
        assert_abs_diff_eq!(out, dvec([0.0, 3.0, 4.0]), epsilon = 1e-14);

        let e12 = dmat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let out = canonical_displacement(&e12, &dvec([1.0, 1.0, 5.0]));
        assert_abs_diff_eq!(out, dvec([0.0, 0.0, 5.0]), epsilon = 1e-14);

        let out = canonical_displacement(&e1, &dvec([0.0, 0.0, 0.0]));
        assert_abs_diff_eq!(out, dvec([0.0, 0.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn embed_matches_block_form() {
        let line = AffineSubspace::line3(Vector3::x(), Vector3::new(0.0, 2.0, 0.0)).unwrap();
        let y = line.embed();
        let s5 = 5.0_f64.sqrt();
        let expected = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 0.0, 0.0, 2.0 / s5, 0.0, 0.0, 0.0, 1.0 / s5],
        );
        assert_abs_diff_eq!(y.matrix(), &expected, epsilon = 1e-14);
    }

    #[test]
    fn embed_line_through_origin() {
        let line = AffineSubspace::line3(Vector3::x(), Vector3::zeros()).unwrap();
        let y = line.embed();
        let expected = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(y.matrix(), &expected, epsilon = 1e-14);
    }

    #[test]
    fn embed_plane_z_equals_one() {
        let plane =
            AffineSubspace::plane3(Vector3::x(), Vector3::y(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let y = plane.embed();
        let s2 = 2.0_f64.sqrt();
        assert_abs_diff_eq!(y.matrix()[(0, 2)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y.matrix()[(1, 2)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y.matrix()[(2, 2)], 1.0 / s2, epsilon = 1e-14);
        assert_abs_diff_eq!(y.matrix()[(3, 2)], 1.0 / s2, epsilon = 1e-14);
        // first two columns padded with zero
        assert_eq!(y.matrix()[(3, 0)], 0.0);
        assert_eq!(y.matrix()[(3, 1)], 0.0);
    }

    #[test]
    fn principal_angles_shared_and_orthogonal_directions() {
        let a = dmat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let b = dmat(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let angles = principal_angles(&a, &b).unwrap();
        assert_abs_diff_eq!(angles[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(angles[1], FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn principal_angles_identical_subspaces_are_zero() {
        let a = dmat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let angles = principal_angles(&a, &a).unwrap();
        assert!(angles.iter().all(|t| t.abs() < 1e-12));
    }

    #[test]
    fn principal_angles_quarter_turn() {
        let s = 1.0 / 2.0_f64.sqrt();
        let a = dmat(&[[1.0, 0.0, 0.0]]);
        let b = dmat(&[[s, s, 0.0]]);
        let angles = principal_angles(&a, &b).unwrap();
        assert_abs_diff_eq!(angles[0], FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn principal_angles_rejects_row_mismatch() {
        let a = dmat(&[[1.0, 0.0, 0.0]]);
        let b = DMatrix::identity(4, 1);
        assert!(matches!(
            principal_angles(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn principal_angles_rejects_larger_first() {
        let a = dmat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let b = dmat(&[[1.0, 0.0, 0.0]]);
        assert!(matches!(
            principal_angles(&a, &b),
            Err(Error::SubspaceOrder { .. })
        ));
    }

    // Independent oracle: singular values of a 2x2 matrix from the closed
    // form, bypassing the SVD routine used by the implementation.
    fn singular_values_2x2(m: [[f64; 2]; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = m;
        let e = (a + d) / 2.0;
        let f = (a - d) / 2.0;
        let g = (c + b) / 2.0;
        let h = (c - b) / 2.0;
        let q = (e * e + h * h).sqrt();
        let r = (f * f + g * g).sqrt();
        [q + r, (q - r).abs()]
    }

    #[test]
    fn grassmann_distance_examples() {
        let u = dmat(&[[1.0, 0.0, 0.0]]);
        let v = dmat(&[[0.0, 1.0, 0.0]]);
        assert_abs_diff_eq!(grassmann_distance(&u, &v).unwrap(), FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(grassmann_distance(&u, &u).unwrap(), 0.0, epsilon = 1e-15);

        // span{e1,e2} vs span{(e1+e3)/sqrt2, e2}; expected value frozen from
        // the closed-form 2x2 singular values of the basis product.
        let s = 1.0 / 2.0_f64.sqrt();
        let a = dmat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let b = dmat(&[[s, 0.0, s], [0.0, 1.0, 0.0]]);
        let product = a.transpose() * &b;
        let sv = singular_values_2x2([
            [product[(0, 0)], product[(0, 1)]],
            [product[(1, 0)], product[(1, 1)]],
        ]);
        let oracle = (sv[0].clamp(0.0, 1.0).acos().powi(2)
            + sv[1].clamp(0.0, 1.0).acos().powi(2))
        .sqrt();
        assert_abs_diff_eq!(oracle, FRAC_PI_4, epsilon = 1e-12);
        assert_abs_diff_eq!(grassmann_distance(&a, &b).unwrap(), FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn one_dimensional_distance_is_acute_angle() {
        // d(u, v) = arccos|u·v| for unit vectors.
        let u = dmat(&[[0.6, 0.8, 0.0]]);
        let v = dmat(&[[0.0, 0.6, 0.8]]);
        let expected = (0.48_f64).abs().acos();
        assert_abs_diff_eq!(grassmann_distance(&u, &v).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn transform_translation_along_line_is_noop() {
        let line = AffineSubspace::line3(Vector3::x(), Vector3::new(0.0, 2.0, 0.0)).unwrap();
        let t = RigidTransform::new(DMatrix::identity(3, 3), dvec([5.0, 0.0, 0.0])).unwrap();
        let moved = line.transformed(&t).unwrap();
        assert_abs_diff_eq!(moved.displacement(), line.displacement(), epsilon = 1e-14);
        assert_abs_diff_eq!(moved.basis(), line.basis(), epsilon = 1e-14);
    }

    #[test]
    fn transform_translation_across_line_shifts_displacement() {
        let line = AffineSubspace::line3(Vector3::x(), Vector3::new(0.0, 2.0, 0.0)).unwrap();
        let t = RigidTransform::new(DMatrix::identity(3, 3), dvec([0.0, 1.0, 0.0])).unwrap();
        let moved = line.transformed(&t).unwrap();
        assert_abs_diff_eq!(moved.displacement(), &dvec([0.0, 3.0, 0.0]), epsilon = 1e-14);
    }

    #[test]
    fn transform_quarter_turn_rotates_basis_and_displacement() {
        // Hand evaluation: Rz(90°) sends e1 to e2 and (0,2,0) to (-2,0,0).
        let line = AffineSubspace::line3(Vector3::x(), Vector3::new(0.0, 2.0, 0.0)).unwrap();
        let t = RigidTransform::new(rot_z(FRAC_PI_2), dvec([0.0, 0.0, 0.0])).unwrap();
        let moved = line.transformed(&t).unwrap();
        assert_abs_diff_eq!(moved.basis(), &dmat(&[[0.0, 1.0, 0.0]]), epsilon = 1e-14);
        assert_abs_diff_eq!(moved.displacement(), &dvec([-2.0, 0.0, 0.0]), epsilon = 1e-14);
    }

    #[test]
    fn apply_point_examples() {
        let id = RigidTransform::identity(3);
        let x = dvec([1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(id.apply_point(&x), x, epsilon = 1e-15);

        let shift = RigidTransform::new(DMatrix::identity(3, 3), dvec([1.0, 2.0, 3.0])).unwrap();
        assert_abs_diff_eq!(shift.apply_point(&dvec([0.0; 3])), dvec([1.0, 2.0, 3.0]), epsilon = 1e-15);

        let quarter = RigidTransform::new(rot_z(FRAC_PI_2), dvec([0.0; 3])).unwrap();
        assert_abs_diff_eq!(quarter.apply_point(&dvec([1.0, 0.0, 0.0])), dvec([0.0, 1.0, 0.0]), epsilon = 1e-14);
    }

    #[test]
    fn contains_point_examples() {
        let line = AffineSubspace::line3(Vector3::x(), Vector3::new(0.0, 2.0, 0.0)).unwrap();
        assert!(line.contains_point(&dvec([7.0, 2.0, 0.0]), 1e-9));
        assert!(!line.contains_point(&dvec([7.0, 3.0, 0.0]), 1e-9));

        let plane =
            AffineSubspace::plane3(Vector3::x(), Vector3::y(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(plane.contains_point(&dvec([4.0, -2.0, 1.0]), 1e-9));
    }

    #[test]
    fn projection_matrix_examples() {
        let p = projection_matrix(&dmat(&[[1.0, 0.0, 0.0]]));
        assert_abs_diff_eq!(p, DMatrix::from_diagonal(&dvec([1.0, 0.0, 0.0])), epsilon = 1e-14);

        let p = projection_matrix(&dmat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]));
        assert_abs_diff_eq!(p, DMatrix::from_diagonal(&dvec([1.0, 1.0, 0.0])), epsilon = 1e-14);

        let s = 1.0 / 2.0_f64.sqrt();
        let p = projection_matrix(&dmat(&[[s, s, 0.0]]));
        let expected = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(p, expected, epsilon = 1e-14);
    }

    #[test]
    fn projection_matrix_is_idempotent_with_trace_k() {
        let basis = orthonormalize(&dmat(&[[1.0, 2.0, -1.0], [0.5, -1.0, 3.0]])).unwrap();
        let p = projection_matrix(&basis);
        assert_abs_diff_eq!(&p * &p, p.clone(), epsilon = 1e-10);
        assert_abs_diff_eq!(p.trace(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.transpose(), p, epsilon = 1e-14);
    }

    #[test]
    fn representation_invariance_of_projection_and_distance() {
        // Two different orthonormal bases of one subspace must give the
        // same projector and the same distance to a third subspace.
        let basis = orthonormalize(&dmat(&[[1.0, 2.0, -1.0], [0.5, -1.0, 3.0]])).unwrap();
        let c = 0.3_f64.cos();
        let s = 0.3_f64.sin();
        let mix = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let remixed = &basis * &mix;
        assert_abs_diff_eq!(
            projection_matrix(&basis),
            projection_matrix(&remixed),
            epsilon = 1e-10
        );
        let third = orthonormalize(&dmat(&[[0.0, 1.0, 1.0], [1.0, 0.0, -2.0]])).unwrap();
        assert_abs_diff_eq!(
            grassmann_distance(&basis, &third).unwrap(),
            grassmann_distance(&remixed, &third).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn point_subspace_has_empty_basis() {
        let p = AffineSubspace::point3(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(p.dim_sub(), 0);
        assert_eq!(p.dim_ambient(), 3);
        assert!(p.contains_point(&dvec([1.0, 2.0, 3.0]), 1e-12));
        assert!(!p.contains_point(&dvec([1.0, 2.0, 3.1]), 1e-3));
        // embedding is a single tilde-augmented column
        let y = p.embed();
        assert_eq!(y.matrix().shape(), (4, 1));
        assert_abs_diff_eq!(y.matrix().column(0).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn metric_properties_on_sampled_subspaces() {
        use crate::synth::random::{rotation_uniform, unit_vector3};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let sample = |rng: &mut rand_chacha::ChaCha8Rng, k: usize| -> DMatrix<f64> {
            loop {
                let mut m = DMatrix::zeros(3, k);
                for j in 0..k {
                    m.set_column(j, &DVector::from_column_slice(unit_vector3(rng).as_slice()).column(0));
                }
                if let Ok(out) = orthonormalize(&m) {
                    return out;
                }
            }
        };
        for k in [1usize, 2] {
            for _ in 0..200 {
                let a = sample(&mut rng, k);
                let b = sample(&mut rng, k);
                let c = sample(&mut rng, k);
                let dab = grassmann_distance(&a, &b).unwrap();
                let dba = grassmann_distance(&b, &a).unwrap();
                assert_abs_diff_eq!(dab, dba, epsilon = 1e-12);
                let dac = grassmann_distance(&a, &c).unwrap();
                let dbc = grassmann_distance(&b, &c).unwrap();
                assert!(dac <= dab + dbc + 1e-9, "triangle violated: {dac} > {dab} + {dbc}");
                // rotation invariance
                let r = rotation_uniform(&mut rng);
                let rd = DMatrix::from_column_slice(3, 3, r.as_slice());
                let dr = grassmann_distance(&(&rd * &a), &(&rd * &b)).unwrap();
                assert_abs_diff_eq!(dr, dab, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn zero_embedded_distance_iff_spanning_condition() {
        use crate::synth::random::{gaussian3, rotation_uniform, unit_vector3};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let random_plane = |rng: &mut rand_chacha::ChaCha8Rng| loop {
            let u = unit_vector3(rng);
            let v = unit_vector3(rng);
            if u.cross(&v).norm() > 0.1 {
                return AffineSubspace::plane3(u, v, gaussian3(rng, 2.0)).unwrap();
            }
        };
        for trial in 0..200 {
            let target = AffineSubspace::line3(unit_vector3(&mut rng), gaussian3(&mut rng, 2.0)).unwrap();
            let t = RigidTransform::from_parts3(&rotation_uniform(&mut rng), &gaussian3(&mut rng, 1.0)).unwrap();
            let source = if trial % 2 == 0 {
                // a plane containing the target line, pushed through the inverse
                let d = target.direction3().unwrap();
                let mut v = unit_vector3(&mut rng);
                while v.cross(&d).norm() < 0.1 {
                    v = unit_vector3(&mut rng);
                }
                AffineSubspace::plane3(d, v, target.displacement3().unwrap())
                    .unwrap()
                    .transformed(&t.inverse())
                    .unwrap()
            } else {
                random_plane(&mut rng)
            };
            let moved = source.transformed(&t).unwrap();
            let dist = grassmann_distance(target.embed().matrix(), moved.embed().matrix()).unwrap();
            // spanning condition: every embedded target column is reproduced
            // by projection onto the embedded moved source
            let y_moved = moved.embed();
            let projector = y_moved.matrix() * y_moved.matrix().transpose();
            let y_target = target.embed();
            let mut worst = 0.0_f64;
            for j in 0..y_target.matrix().ncols() {
                let col = y_target.matrix().column(j).into_owned();
                worst = worst.max((&projector * &col - &col).norm());
            }
            assert_eq!(
                dist < 1e-8,
                worst < 1e-8,
                "distance {dist} vs spanning residual {worst}"
            );
        }
    }

    #[test]
    fn rigid_transform_rejects_non_rotation() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 0)] = -1.0; // det = -1, a reflection
        assert!(RigidTransform::new(m, dvec([0.0; 3])).is_err());
        let skew = DMatrix::from_row_slice(3, 3, &[1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(RigidTransform::new(skew, dvec([0.0; 3])).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn unit3() -> impl Strategy<Value = Vector3<f64>> {
            (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
                .prop_filter_map("nonzero", |(x, y, z)| {
                    let v = Vector3::new(x, y, z);
                    (v.norm() > 1e-3).then(|| v.normalize())
                })
        }

        proptest! {
            // 1D special case: the metric is the acute angle arccos|u·v|
            #[test]
            fn one_dimensional_metric_is_acute_angle(u in unit3(), v in unit3()) {
                let a = DMatrix::from_column_slice(3, 1, u.as_slice());
                let b = DMatrix::from_column_slice(3, 1, v.as_slice());
                let expected = u.dot(&v).abs().clamp(0.0, 1.0).acos();
                prop_assert!((grassmann_distance(&a, &b).unwrap() - expected).abs() < 1e-12);
            }

            // the metric cannot see which orthonormal basis represents a span
            #[test]
            fn metric_ignores_basis_choice(
                u in unit3(), v in unit3(), w in unit3(), angle in 0.0..std::f64::consts::TAU
            ) {
                prop_assume!(u.cross(&v).norm() > 1e-2);
                let mut plane = DMatrix::zeros(3, 2);
                plane.set_column(0, &DVector::from_column_slice(u.as_slice()).column(0));
                plane.set_column(1, &DVector::from_column_slice(v.as_slice()).column(0));
                let basis = orthonormalize(&plane).unwrap();
                let (c, s) = (angle.cos(), angle.sin());
                let remix = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
                let other = DMatrix::from_column_slice(3, 1, w.as_slice());
                let d1 = grassmann_distance(&other, &basis).unwrap();
                let d2 = grassmann_distance(&other, &(&basis * &remix)).unwrap();
                prop_assert!((d1 - d2).abs() < 1e-10);
            }
        }
    }
}
