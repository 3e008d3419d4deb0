//! Camera back-projection protocol for pose-from-lines problems.
//!
//! A 2D image segment back-projects to the interpretation plane: the
//! plane through the camera center spanned by the two viewing rays. A 3D
//! line observed by the camera lies in that plane, so camera pose
//! estimation from 2D-3D line correspondences becomes line-to-plane
//! registration (target: 3D line in the world frame; source:
//! interpretation plane in the camera frame).

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::subspace::{AffineSubspace, RigidTransform};
use crate::synth::random::{rotation_uniform, uniform_box3, unit_vector3};
use crate::synth::Scene;

/// Pinhole camera. Defaults to a 640×480 image with an 800 px focal
/// length and the principal point at the image center.
#[derive(Debug, Clone)]
pub struct CameraModel {
    pub focal: f64,
    pub principal_point: Vector2<f64>,
    pub image_size: (f64, f64),
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            focal: 800.0,
            principal_point: Vector2::new(320.0, 240.0),
            image_size: (640.0, 480.0),
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if self.focal <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "focal length {} must be positive",
                self.focal
            )));
        }
        Ok(())
    }

    /// Viewing ray of a pixel: `((u−cx)/f, (v−cy)/f, 1)`.
    pub fn ray(&self, pixel: &Vector2<f64>) -> Vector3<f64> {
        Vector3::new(
            (pixel.x - self.principal_point.x) / self.focal,
            (pixel.y - self.principal_point.y) / self.focal,
            1.0,
        )
    }
}

/// Endpoints closer than this are rejected as degenerate.
pub const MIN_SEGMENT_PX: f64 = 1.0;

/// Back-project a 2D segment to its interpretation plane: the plane
/// through the camera center spanned by the two viewing rays
/// (displacement exactly zero).
pub fn backproject_line(
    cam: &CameraModel,
    p1: &Vector2<f64>,
    p2: &Vector2<f64>,
) -> Result<AffineSubspace> {
    cam.validate()?;
    if (p1 - p2).norm() < MIN_SEGMENT_PX {
        return Err(Error::DegenerateSegment { min_px: MIN_SEGMENT_PX });
    }
    AffineSubspace::plane3(cam.ray(p1), cam.ray(p2), Vector3::zeros())
}

/// Parameters of the synthetic pose-from-lines protocol: 2D segments are
/// scattered over the image, back-projected with random depths to build
/// 3D lines, and the noisy 2D observations become interpretation planes.
#[derive(Debug, Clone)]
pub struct PnlConfig {
    pub camera: CameraModel,
    pub n_pairs: usize,
    /// Gaussian noise added to each 2D endpoint, in pixels.
    pub pixel_sigma: f64,
    /// Fraction in [0, 1) of pairs whose plane comes from an unrelated segment.
    pub outlier_ratio: f64,
    /// Endpoint depths are uniform in this range (scene units).
    pub depth_range: (f64, f64),
    /// Minimum 2D segment length in pixels.
    pub min_segment_px: f64,
    /// Ground-truth translation is uniform in `[-h, h]³`.
    pub translation_halfside: f64,
    pub rng_seed: u64,
}

impl Default for PnlConfig {
    fn default() -> Self {
        Self {
            camera: CameraModel::default(),
            n_pairs: 100,
            pixel_sigma: 1.0,
            outlier_ratio: 0.0,
            depth_range: (2.0, 10.0),
            min_segment_px: 100.0,
            translation_halfside: 2.0,
            rng_seed: 0,
        }
    }
}

impl PnlConfig {
    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        if self.n_pairs == 0 {
            return Err(Error::InvalidConfig("n_pairs must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.outlier_ratio) {
            return Err(Error::InvalidConfig("outlier_ratio must lie in [0, 1)".into()));
        }
        if self.depth_range.0 <= 0.0 || self.depth_range.1 < self.depth_range.0 {
            return Err(Error::InvalidConfig("depth range must satisfy 0 < lo <= hi".into()));
        }
        if self.min_segment_px < MIN_SEGMENT_PX {
            return Err(Error::InvalidConfig(format!(
                "min_segment_px must be at least {MIN_SEGMENT_PX}"
            )));
        }
        Ok(())
    }
}

fn random_pixel<R: Rng + ?Sized>(rng: &mut R, cam: &CameraModel) -> Vector2<f64> {
    Vector2::new(
        rng.random_range(0.0..cam.image_size.0),
        rng.random_range(0.0..cam.image_size.1),
    )
}

fn random_segment<R: Rng + ?Sized>(rng: &mut R, cfg: &PnlConfig) -> (Vector2<f64>, Vector2<f64>) {
    loop {
        let p1 = random_pixel(rng, &cfg.camera);
        let p2 = random_pixel(rng, &cfg.camera);
        if (p1 - p2).norm() >= cfg.min_segment_px {
            return (p1, p2);
        }
    }
}

/// Generate a synthetic pose-from-lines scene.
///
/// Targets are 3D lines in the world frame (camera-frame back-projections
/// carried through the ground-truth transform); sources are the
/// interpretation planes of the noisy 2D observations in the camera
/// frame. The estimated transform maps camera-frame features onto the
/// world frame.
pub fn generate_pnl_scene(cfg: &PnlConfig) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let rotation = rotation_uniform(&mut rng);
    let translation = {
        // keep the ground truth away from zero so relative errors are stable
        let mut t = uniform_box3(&mut rng, cfg.translation_halfside);
        while t.norm() < 0.25 * cfg.translation_halfside {
            t = uniform_box3(&mut rng, cfg.translation_halfside);
        }
        t
    };
    let ground_truth = RigidTransform::from_parts3(&rotation, &translation)?;

    let n = cfg.n_pairs;
    let n_outliers = (cfg.outlier_ratio * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut inlier_mask = vec![true; n];
    for &i in order.iter().take(n_outliers) {
        inlier_mask[i] = false;
    }

    let mut targets = Vec::with_capacity(n);
    let mut sources = Vec::with_capacity(n);
    for &is_inlier in &inlier_mask {
        let (p1, p2) = random_segment(&mut rng, cfg);
        let z1 = rng.random_range(cfg.depth_range.0..=cfg.depth_range.1);
        let z2 = rng.random_range(cfg.depth_range.0..=cfg.depth_range.1);
        let x1 = cfg.camera.ray(&p1) * z1;
        let x2 = cfg.camera.ray(&p2) * z2;
        let camera_line = AffineSubspace::line3(x2 - x1, x1)?;
        targets.push(camera_line.transformed(&ground_truth)?);

        let source = if is_inlier {
            let mut noisy = |p: &Vector2<f64>| {
                Vector2::new(
                    p.x + rng_normal(&mut rng) * cfg.pixel_sigma,
                    p.y + rng_normal(&mut rng) * cfg.pixel_sigma,
                )
            };
            let (q1, q2) = (noisy(&p1), noisy(&p2));
            backproject_line(&cfg.camera, &q1, &q2)?
        } else {
            // an unrelated segment's interpretation plane, biased away from
            // coincidence with the true one
            let (q1, q2) = random_segment(&mut rng, cfg);
            let _ = unit_vector3(&mut rng);
            backproject_line(&cfg.camera, &q1, &q2)?
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

fn rng_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(rand_distr::StandardNormal)
}
