//! Seeded sampling helpers for scenes and property tests.

use nalgebra::{Matrix3, Quaternion, Rotation3, Unit, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::subspace::AffineSubspace;

/// Uniform direction on the unit sphere.
pub fn unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Uniformly distributed rotation (normalized quaternion of four normals).
pub fn rotation_uniform<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let q = Quaternion::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    );
    *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix()
}

/// Isotropic Gaussian vector with the given standard deviation.
pub fn gaussian3<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vector3<f64> {
    Vector3::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    ) * sigma
}

/// Uniform point in the cube `[-half, half]³`.
pub fn uniform_box3<R: Rng + ?Sized>(rng: &mut R, half: f64) -> Vector3<f64> {
    if half == 0.0 {
        return Vector3::zeros();
    }
    Vector3::new(
        rng.random_range(-half..=half),
        rng.random_range(-half..=half),
        rng.random_range(-half..=half),
    )
}

/// Tilt a unit direction by a Gaussian angle about a random axis
/// perpendicular to it, so the deviation angle is `|N(0, sigma)|`.
pub fn tilt_direction<R: Rng + ?Sized>(
    rng: &mut R,
    direction: &Vector3<f64>,
    sigma: f64,
) -> Vector3<f64> {
    if sigma == 0.0 {
        return *direction;
    }
    let (u, v) = orthonormal_complement(direction);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let axis = u * phase.cos() + v * phase.sin();
    let angle: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
    Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle) * direction
}

/// Two orthonormal vectors spanning the plane perpendicular to `w`.
pub fn orthonormal_complement(w: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if w.x.abs() <= w.y.abs() && w.x.abs() <= w.z.abs() {
        Vector3::x()
    } else if w.y.abs() <= w.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = w.cross(&seed).normalize();
    let v = w.normalize().cross(&u);
    (u, v)
}

/// The plane through `anchor` with the given normal.
pub fn plane_with_normal(normal: &Vector3<f64>, anchor: &Vector3<f64>) -> Result<AffineSubspace> {
    let (u, v) = orthonormal_complement(normal);
    AffineSubspace::plane3(u, v, *anchor)
}
