//! Synthetic scenes, outlier injection, error metrics, and the benchmark
//! harness.

pub mod bench;
pub mod pnl;
pub mod random;

use nalgebra::{Matrix3, Vector3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{FeatureKind, FeaturePair};
use crate::error::{Error, Result};
use crate::subspace::{AffineSubspace, RigidTransform};
use random::{gaussian3, plane_with_normal, tilt_direction, uniform_box3, unit_vector3};

pub use pnl::{backproject_line, generate_pnl_scene, CameraModel, PnlConfig};

/// Parameters for a randomly generated registration scene.
///
/// Targets are sampled in a box of `anchor_halfside`; sources are the
/// perturbed targets carried through the inverse ground-truth transform,
/// with an `outlier_ratio` fraction of the source side replaced by fresh
/// random features. Direction/normal noise is a small random tilt
/// (`noise_sigma_ang` radians); positional noise is additive Gaussian on
/// the displacement (`noise_sigma_pos` length units).
#[derive(Debug, Clone)]
pub struct SceneConfig {
    pub n_pairs: usize,
    pub feature_kind: FeatureKind,
    pub noise_sigma_ang: f64,
    pub noise_sigma_pos: f64,
    /// Fraction in [0, 1) of pairs whose source is replaced by an outlier.
    pub outlier_ratio: f64,
    /// Ground-truth translation is uniform in `[-h, h]³`.
    pub translation_halfside: f64,
    /// Feature anchors are uniform in `[-h, h]³`.
    pub anchor_halfside: f64,
    pub rng_seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_pairs: 20,
            feature_kind: FeatureKind::LineLine,
            noise_sigma_ang: 0.0,
            noise_sigma_pos: 0.0,
            outlier_ratio: 0.0,
            translation_halfside: 1.0,
            anchor_halfside: 5.0,
            rng_seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::InvalidConfig("n_pairs must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.outlier_ratio) {
            return Err(Error::InvalidConfig(format!(
                "outlier_ratio {} must lie in [0, 1)",
                self.outlier_ratio
            )));
        }
        if self.noise_sigma_ang < 0.0 || self.noise_sigma_pos < 0.0 {
            return Err(Error::InvalidConfig("noise sigmas must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A generated scene: target features, source features (perturbed,
/// transformed, partially replaced by outliers), the ground truth, and
/// the inlier mask.
#[derive(Debug, Clone)]
pub struct Scene {
    pub targets: Vec<AffineSubspace>,
    pub sources: Vec<AffineSubspace>,
    pub ground_truth: RigidTransform,
    pub inlier_mask: Vec<bool>,
}

impl Scene {
    /// Zip targets and sources into indexed feature pairs.
    pub fn pairs(&self) -> Result<Vec<FeaturePair>> {
        self.targets
            .iter()
            .zip(&self.sources)
            .enumerate()
            .map(|(i, (t, s))| FeaturePair::new(i, t.clone(), s.clone()))
            .collect()
    }

    pub fn true_inlier_indices(&self) -> Vec<usize> {
        self.inlier_mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }
}

/// Generate a scene according to `cfg`. Deterministic per seed.
pub fn generate_scene(cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let rotation = random::rotation_uniform(&mut rng);
    let translation = uniform_box3(&mut rng, cfg.translation_halfside);
    let ground_truth = RigidTransform::from_parts3(&rotation, &translation)?;
    let inverse = ground_truth.inverse();

    let n = cfg.n_pairs;
    let n_outliers = (cfg.outlier_ratio * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut inlier_mask = vec![true; n];
    for &i in order.iter().take(n_outliers) {
        inlier_mask[i] = false;
    }

    let mut targets = Vec::with_capacity(n);
    let mut sources = Vec::with_capacity(n);
    for &is_inlier in &inlier_mask {
        let (target, perturbed) = match cfg.feature_kind {
            FeatureKind::LineLine => {
                let d = unit_vector3(&mut rng);
                let anchor = uniform_box3(&mut rng, cfg.anchor_halfside);
                let target = AffineSubspace::line3(d, anchor)?;
                let noisy_dir = tilt_direction(&mut rng, &d, cfg.noise_sigma_ang);
                let noisy_anchor = anchor + gaussian3(&mut rng, cfg.noise_sigma_pos);
                (target, AffineSubspace::line3(noisy_dir, noisy_anchor)?)
            }
            FeatureKind::PlanePlane => {
                let normal = unit_vector3(&mut rng);
                let anchor = uniform_box3(&mut rng, cfg.anchor_halfside);
                let target = plane_with_normal(&normal, &anchor)?;
                let noisy_normal = tilt_direction(&mut rng, &normal, cfg.noise_sigma_ang);
                let noisy_anchor = anchor + gaussian3(&mut rng, cfg.noise_sigma_pos);
                (target, plane_with_normal(&noisy_normal, &noisy_anchor)?)
            }
            FeatureKind::LinePlane => {
                let d = unit_vector3(&mut rng);
                let anchor = uniform_box3(&mut rng, cfg.anchor_halfside);
                let target = AffineSubspace::line3(d, anchor)?;
                let noisy_dir = tilt_direction(&mut rng, &d, cfg.noise_sigma_ang);
                let noisy_anchor = anchor + gaussian3(&mut rng, cfg.noise_sigma_pos);
                // a random plane from the pencil containing the noisy line
                let plane = random_containing_plane(&mut rng, &noisy_dir, &noisy_anchor)?;
                (target, plane)
            }
        };
        targets.push(target);
        let source = if is_inlier {
            perturbed.transformed(&inverse)?
        } else {
            fresh_source(&mut rng, cfg)?
        };
        sources.push(source);
    }

    Ok(Scene {
        targets,
        sources,
        ground_truth,
        inlier_mask,
    })
}

fn fresh_source(rng: &mut ChaCha8Rng, cfg: &SceneConfig) -> Result<AffineSubspace> {
    let anchor = uniform_box3(rng, cfg.anchor_halfside);
    match cfg.feature_kind {
        FeatureKind::LineLine => AffineSubspace::line3(unit_vector3(rng), anchor),
        FeatureKind::LinePlane | FeatureKind::PlanePlane => {
            plane_with_normal(&unit_vector3(rng), &anchor)
        }
    }
}

/// A random plane containing the line `(direction, anchor)`.
fn random_containing_plane(
    rng: &mut ChaCha8Rng,
    direction: &Vector3<f64>,
    anchor: &Vector3<f64>,
) -> Result<AffineSubspace> {
    loop {
        let v = unit_vector3(rng);
        if v.cross(direction).norm() > 0.1 {
            return AffineSubspace::plane3(*direction, v, *anchor);
        }
    }
}

// ── Error metrics ────────────────────────────────────────────────────────────

/// Rotation error `arccos((tr(R̂ᵀR_gt) − 1)/2)` in degrees, in [0°, 180°].
pub fn rotation_error_deg(r_est: &Matrix3<f64>, r_gt: &Matrix3<f64>) -> f64 {
    let arg = ((r_est.transpose() * r_gt).trace() - 1.0) / 2.0;
    arg.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Relative translation error in percent, or the absolute norm when the
/// ground truth translation is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationError {
    pub value: f64,
    /// False when `‖t_gt‖ = 0` and `value` is `‖t̂‖` instead of a percentage.
    pub relative: bool,
}

pub fn translation_error_pct(t_est: &Vector3<f64>, t_gt: &Vector3<f64>) -> TranslationError {
    let norm = t_gt.norm();
    if norm > 0.0 {
        TranslationError {
            value: (t_est - t_gt).norm() / norm * 100.0,
            relative: true,
        }
    } else {
        TranslationError {
            value: t_est.norm(),
            relative: false,
        }
    }
}
