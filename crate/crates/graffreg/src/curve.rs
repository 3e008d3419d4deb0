//! Lengths of parameter-space straight lines mapped onto the manifold of
//! 2D lines, versus the analytic geodesic distance.
//!
//! A 2D line `ax + by + c = 0` with coordinate vector `v = (a, b, c)`
//! corresponds to a rank-2 projection matrix `φ(v)` on the embedded
//! manifold (the map is even in `v`, so `v` and `−v` project
//! identically). The straight segment `v(t) = t·v₂ + (1−t)·v₁` in
//! parameter space maps to a curve `φ(v(t))` whose length under the
//! Riemannian metric `g_P(Δ, Δ) = ½ tr(Δ²)` is the Riemann sum of
//! `√(½ tr(φ̇²))`. Because the parameter vector carries a sign ambiguity,
//! the segments to `v₂` and to `−v₂` map to two different curves; one of
//! them matches the geodesic and their lengths sum to π.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::grassmann_distance;

/// Finite-difference step for the reference velocity.
const FD_STEP: f64 = 1e-6;
/// Samples below this parameter norm abort the length computation.
const MIN_PARAM_NORM: f64 = 1e-9;

/// Coefficients `(a, b, c)` of the 2D line `ax + by + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line2DParams {
    pub v: [f64; 3],
}

impl Line2DParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let v = [a, b, c];
        if norm3(&v) <= 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self { v })
    }

    fn vec(&self) -> Vector3<f64> {
        Vector3::from(self.v)
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Projection matrix of the embedded 2D line: symmetric, idempotent,
/// trace 2, and even in `v`.
pub fn line2d_projection(line: &Line2DParams) -> Matrix3<f64> {
    projection_of(&line.vec())
}

fn projection_of(v: &Vector3<f64>) -> Matrix3<f64> {
    let (a, b, c) = (v.x, v.y, v.z);
    let s = a * a + b * b + c * c;
    Matrix3::new(
        b * b + c * c,
        -a * b,
        a * c,
        -a * b,
        c * c + a * a,
        b * c,
        a * c,
        b * c,
        a * a + b * b,
    ) / s
}

/// Velocity of `t ↦ φ(v(t))` by central finite differences (the
/// reference used for the curve length).
fn velocity_fd(v1: &Vector3<f64>, v2: &Vector3<f64>, t: f64) -> Matrix3<f64> {
    let at = |t: f64| projection_of(&(v2 * t + v1 * (1.0 - t)));
    (at(t + FD_STEP) - at(t - FD_STEP)) / (2.0 * FD_STEP)
}

/// Velocity from the closed-form partial derivatives of the projection
/// entries, contracted with `v₂ − v₁`. Kept as a cross-check against the
/// finite-difference reference.
pub fn velocity_closed_form(v1: &Vector3<f64>, v2: &Vector3<f64>, t: f64) -> Matrix3<f64> {
    let v = v2 * t + v1 * (1.0 - t);
    let (a, b, c) = (v.x, v.y, v.z);
    let dv = v2 - v1;
    let s = a * a + b * b + c * c;
    let s2 = s * s;
    let dot = |g: [f64; 3]| (g[0] * dv.x + g[1] * dv.y + g[2] * dv.z) / s2;

    let d11 = dot([-2.0 * a * (b * b + c * c), 2.0 * a * a * b, 2.0 * a * a * c]);
    let d12 = dot([
        -b * (b * b + c * c - a * a),
        -a * (a * a + c * c - b * b),
        2.0 * a * b * c,
    ]);
    let d13 = dot([
        c * (b * b + c * c - a * a),
        -2.0 * a * b * c,
        a * (a * a + b * b - c * c),
    ]);
    let d22 = dot([2.0 * a * b * b, -2.0 * b * (a * a + c * c), 2.0 * b * b * c]);
    let d23 = dot([
        -2.0 * a * b * c,
        c * (a * a + c * c - b * b),
        b * (a * a + b * b - c * c),
    ]);
    let d33 = dot([2.0 * a * c * c, 2.0 * b * c * c, -2.0 * c * (a * a + b * b)]);

    Matrix3::new(d11, d12, d13, d12, d22, d23, d13, d23, d33)
}

/// Length of the mapped parameter-space segment from `v1` to `v2`,
/// discretized into `n` uniform samples.
pub fn curve_length(v1: &Line2DParams, v2: &Line2DParams, n: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::InvalidConfig(format!(
            "need at least 10 samples, got {n}"
        )));
    }
    let a = v1.vec();
    let b = v2.vec();
    // closest approach of the parameter segment to the origin
    let dir = b - a;
    let denom = dir.norm_squared();
    let t_min = if denom > 0.0 {
        (-a.dot(&dir) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if (b * t_min + a * (1.0 - t_min)).norm() < MIN_PARAM_NORM {
        return Err(Error::PathThroughZero { t: t_min });
    }
    let dt = 1.0 / n as f64;
    let mut length = 0.0;
    for i in 0..n {
        let t = i as f64 * dt;
        let v = b * t + a * (1.0 - t);
        if v.norm() < MIN_PARAM_NORM {
            return Err(Error::PathThroughZero { t });
        }
        let velocity = velocity_fd(&a, &b, t);
        // speed = √(g(φ̇, φ̇)) = √(½ tr(φ̇²)); φ̇ is symmetric so the trace of
        // its square is the squared Frobenius norm
        let speed = (0.5 * velocity.norm_squared()).sqrt();
        length += speed * dt;
    }
    Ok(length)
}

/// Orthonormal basis of the range of a rank-2 projection matrix, via the
/// symmetric eigendecomposition.
fn range_basis(p: &Matrix3<f64>) -> nalgebra::DMatrix<f64> {
    let eigen = nalgebra::SymmetricEigen::new(*p);
    let mut cols = Vec::new();
    for i in 0..3 {
        if eigen.eigenvalues[i] > 0.5 {
            cols.push(eigen.eigenvectors.column(i).into_owned());
        }
    }
    let mut out = nalgebra::DMatrix::zeros(3, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, &nalgebra::DVector::from_column_slice(c.as_slice()).column(0));
    }
    out
}

/// Geodesic distance between the embedded lines `v1` and `v2`.
pub fn embedded_geodesic_distance(v1: &Line2DParams, v2: &Line2DParams) -> f64 {
    let b1 = range_basis(&line2d_projection(v1));
    let b2 = range_basis(&line2d_projection(v2));
    grassmann_distance(&b1, &b2).expect("rank-2 projections have equal dimensions")
}

/// The four quantities of the sign-ambiguity analysis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClosedGeodesicReport {
    /// Length of the mapped segment to `+v2`.
    pub l_plus: f64,
    /// Length of the mapped segment to `−v2`; absent when that segment
    /// passes through the parameter-space origin (e.g. v2 = v1).
    pub l_minus: Option<f64>,
    /// Analytic Grassmann distance between the embedded lines.
    pub geodesic: f64,
    /// `l_plus + l_minus − π`; absent with `l_minus`.
    pub sum_minus_pi: Option<f64>,
}

/// Compute both curve lengths (to `v2` and `−v2`), the analytic geodesic
/// distance, and the deviation of their sum from π.
pub fn closed_geodesic_report(
    v1: &Line2DParams,
    v2: &Line2DParams,
    n: usize,
) -> Result<ClosedGeodesicReport> {
    let l_plus = curve_length(v1, v2, n)?;
    let negated = Line2DParams::new(-v2.v[0], -v2.v[1], -v2.v[2])?;
    let l_minus = match curve_length(v1, &negated, n) {
        Ok(l) => Some(l),
        Err(Error::PathThroughZero { .. }) => None,
        Err(e) => return Err(e),
    };
    let geodesic = embedded_geodesic_distance(v1, v2);
    Ok(ClosedGeodesicReport {
        l_plus,
        l_minus,
        geodesic,
        sum_minus_pi: l_minus.map(|l| l_plus + l - std::f64::consts::PI),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(a: f64, b: f64, c: f64) -> Line2DParams {
        Line2DParams::new(a, b, c).unwrap()
    }

    #[test]
    fn projection_invariants() {
        let p = line2d_projection(&params(0.0, 1.0, -1.0));
        assert_abs_diff_eq!(p * p, p, epsilon = 1e-10);
        assert_abs_diff_eq!(p.trace(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.transpose(), p, epsilon = 1e-15);
    }

    #[test]
    fn projection_is_even_in_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let v = params(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0f64),
            );
            if norm3(&v.v) < 0.1 {
                continue;
            }
            let neg = params(-v.v[0], -v.v[1], -v.v[2]);
            assert_abs_diff_eq!(line2d_projection(&v), line2d_projection(&neg), epsilon = 1e-15);
        }
    }

    #[test]
    fn projection_of_x_axis_coefficient() {
        // v = (1, 0, 0): substituting gives diag(0, 1, 1)
        let p = line2d_projection(&params(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(p, Matrix3::from_diagonal(&Vector3::new(0.0, 1.0, 1.0)), epsilon = 1e-15);
    }

    #[test]
    fn projection_rejects_zero_vector() {
        assert!(matches!(Line2DParams::new(0.0, 0.0, 0.0), Err(Error::ZeroVector)));
    }

    #[test]
    fn zero_length_for_equal_endpoints() {
        // constant path; finite-difference noise only
        let v = params(1.0, 2.0, -5.0);
        assert_abs_diff_eq!(curve_length(&v, &v, 100).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn reported_lengths_of_the_two_sign_choices() {
        let v1 = params(1.0, 2.0, -5.0);
        let v2 = params(1.0, -3.0, 5.0);
        // the short curve runs to the sign-flipped endpoint
        let l_to_neg = curve_length(&v1, &params(-1.0, 3.0, -5.0), 1000).unwrap();
        let l_to_pos = curve_length(&v1, &v2, 1000).unwrap();
        assert_abs_diff_eq!(l_to_neg, 0.3876, epsilon = 1e-3);
        assert_abs_diff_eq!(l_to_pos, 2.7539, epsilon = 1e-3);
    }

    #[test]
    fn path_through_zero_is_detected() {
        let v = params(1.0, 1.0, 1.0);
        let neg = params(-1.0, -1.0, -1.0);
        assert!(matches!(
            curve_length(&v, &neg, 101),
            Err(Error::PathThroughZero { .. })
        ));
    }

    #[test]
    fn too_few_samples_is_invalid() {
        let v = params(1.0, 0.0, 0.0);
        assert!(curve_length(&v, &v, 9).is_err());
    }

    #[test]
    fn closed_form_velocity_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let v1 = Vector3::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
            );
            let v2 = Vector3::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
            );
            let t: f64 = rng.random_range(0.0..1.0);
            let v = v2 * t + v1 * (1.0 - t);
            if v.norm() < 0.5 {
                continue;
            }
            let fd = velocity_fd(&v1, &v2, t);
            let cf = velocity_closed_form(&v1, &v2, t);
            let max_entry_diff = (fd - cf).abs().max();
            assert!(max_entry_diff < 1e-5, "velocity mismatch {max_entry_diff}");
        }
    }

    #[test]
    fn lengths_are_scale_invariant() {
        // Scaling an endpoint reparameterizes the same mapped curve (the
        // projection is scale invariant to 1e-10), so the arc length must
        // agree up to discretization error.
        let v1 = params(1.0, 2.0, -5.0);
        let v1_scaled = params(3.0, 6.0, -15.0);
        let v2 = params(1.0, -3.0, 5.0);
        let pa = line2d_projection(&v1);
        let pb = line2d_projection(&v1_scaled);
        assert_abs_diff_eq!(pa, pb, epsilon = 1e-10);
        let a = curve_length(&v1, &v2, 8000).unwrap();
        let b = curve_length(&v1_scaled, &v2, 8000).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-3);
    }

    #[test]
    fn report_sums_to_pi_and_touches_geodesic() {
        let v1 = params(1.0, 2.0, -5.0);
        let v2 = params(1.0, -3.0, 5.0);
        let report = closed_geodesic_report(&v1, &v2, 1000).unwrap();
        assert!(report.sum_minus_pi.unwrap().abs() < 1e-3);
        let min_len = report.l_plus.min(report.l_minus.unwrap());
        assert!((min_len - report.geodesic).abs() < 1e-4);
        assert!(min_len >= report.geodesic - 2e-4);
    }

    #[test]
    fn degenerate_report_for_equal_lines() {
        let v = params(1.0, 2.0, -5.0);
        let report = closed_geodesic_report(&v, &v, 500).unwrap();
        assert_abs_diff_eq!(report.l_plus, 0.0, epsilon = 1e-9);
        // arccos of clamped singular values floors out around √ε
        assert_abs_diff_eq!(report.geodesic, 0.0, epsilon = 1e-7);
        // the segment to −v passes through the origin
        assert!(report.l_minus.is_none());
    }

    fn segment_min_norm(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        let dir = b - a;
        let denom = dir.norm_squared();
        let t = if denom > 0.0 {
            (-a.dot(&dir) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (b * t + a * (1.0 - t)).norm()
    }

    #[test]
    fn curves_never_beat_the_geodesic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 30 {
            let sample = |rng: &mut ChaCha8Rng| {
                loop {
                    let v = Vector3::new(
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                    );
                    if v.norm() > 0.5 {
                        return v;
                    }
                }
            };
            let v1 = sample(&mut rng);
            let v2 = sample(&mut rng);
            // near-crossings need far denser sampling; skip them here
            if segment_min_norm(&v1, &v2).min(segment_min_norm(&v1, &-v2)) < 0.3 {
                continue;
            }
            checked += 1;
            let report = closed_geodesic_report(
                &params(v1.x, v1.y, v1.z),
                &params(v2.x, v2.y, v2.z),
                20_000,
            )
            .unwrap();
            let min_len = report.l_plus.min(report.l_minus.unwrap());
            assert!(
                min_len >= report.geodesic - 2e-4,
                "curve beat the geodesic: {report:?}"
            );
        }
    }
}
