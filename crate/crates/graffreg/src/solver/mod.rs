//! Globally optimal registration: rotation search by inlier-set
//! maximization, translation search by cost minimization, both as
//! best-first branch-and-bound with provable per-cube bounds, plus
//! Levenberg-Marquardt refinement and correspondence-free matching.
//!
//! The pipeline decouples the two stages. The rotation objective counts
//! pairs whose squared residual angle stays below the inlier threshold ε;
//! the rotation search covers SO(3) through the axis-angle cube [−π, π]³,
//! subdividing octants best-first on the upper bound. With the rotation
//! fixed, the translation stage minimizes the summed embedded-space
//! residuals of the rotation-stage inliers over a Euclidean cube,
//! best-first on the lower bound, terminating when the incumbent is
//! within ε_t of the smallest outstanding bound. Both stages invoke a
//! damped least-squares refinement whenever a bound improves on the
//! incumbent.

mod matching;
mod refine;
mod rotation;
mod translation;

use std::time::{Duration, Instant};

use crate::cost::{total_cost, CostBreakdown, FeaturePair};
use crate::error::{Error, Result};
use crate::subspace::{AffineSubspace, RigidTransform};

pub use matching::find_correspondences;
pub use refine::{refine_lm, RefineOutcome};
pub use rotation::{rotation_bnb, rotation_bnb_free, rotation_lower_bound, rotation_upper_bound, RotationCube, RotationSolution};
pub use translation::{translation_bnb, translation_bounds, TranslationBounds, TranslationCube, TranslationSolution};

/// Thresholds and resource limits of the global solver.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Inlier threshold ε on the squared residual angle (rad²).
    pub epsilon_r: f64,
    /// Translation search terminates when the incumbent cost is within
    /// this gap of the smallest outstanding lower bound.
    pub epsilon_t: f64,
    /// Half-side of the initial translation cube centered at the origin.
    /// Defaults to the bounding-box diagonal of the target displacement
    /// vectors when unset.
    pub initial_translation_halfside: Option<f64>,
    /// Cap on the branch-and-bound priority queues.
    pub max_queue: usize,
    /// Seed for any randomized subroutine. The shipped solver is fully
    /// deterministic, so this only matters for downstream extensions; it
    /// is threaded through so results remain reproducible either way.
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon_r: 0.015,
            epsilon_t: 1e-6,
            initial_translation_halfside: None,
            max_queue: 2_000_000,
            rng_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_r > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon_r {} must be positive",
                self.epsilon_r
            )));
        }
        if !(self.epsilon_t > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon_t {} must be positive",
                self.epsilon_t
            )));
        }
        if let Some(h) = self.initial_translation_halfside {
            if !(h > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "initial translation half-side {h} must be positive"
                )));
            }
        }
        if self.max_queue == 0 {
            return Err(Error::InvalidConfig("max_queue must be positive".into()));
        }
        Ok(())
    }
}

/// Search effort counters and wall time.
#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub cubes_expanded: u64,
    pub bound_evaluations: u64,
    pub wall_time: Duration,
}

/// Output of the full registration pipeline.
#[derive(Debug, Clone)]
pub struct RegistrationResult {
    pub transform: RigidTransform,
    /// Positions (into the input pair slice) of the rotation-stage inliers.
    pub inliers: Vec<usize>,
    /// Residual breakdown over the inlier pairs, aligned with `inliers`.
    pub final_cost: CostBreakdown,
    pub stats: SolveStats,
}

/// Rotation search, translation search, and a final joint refinement,
/// with correspondences given by the pair list.
pub fn register_with_correspondences(
    pairs: &[FeaturePair],
    config: &SolverConfig,
) -> Result<RegistrationResult> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no feature pairs"));
    }
    let start = Instant::now();
    let rot = rotation_bnb(pairs, config)?;
    let inliers = rot.inliers.clone();
    finish_pipeline(pairs, rot, inliers, config, start)
}

/// Correspondence-free registration: rotation search over all candidate
/// pairings, greedy one-to-one matching under the found rotation, then
/// the usual translation search and refinement.
///
/// Returns the result together with the matched `(target_idx, source_idx)`
/// list; `result.inliers` indexes into that list.
pub fn register_correspondence_free(
    targets: &[AffineSubspace],
    sources: &[AffineSubspace],
    config: &SolverConfig,
) -> Result<(RegistrationResult, Vec<(usize, usize)>)> {
    config.validate()?;
    let start = Instant::now();
    let rot = rotation_bnb_free(targets, sources, config)?;
    let matches = find_correspondences(targets, sources, &rot.rotation, config.epsilon_r)?;
    if matches.is_empty() {
        return Err(Error::EmptyInlierSet);
    }
    let pairs: Vec<FeaturePair> = matches
        .iter()
        .enumerate()
        .map(|(k, &(ti, sj))| FeaturePair::new(k, targets[ti].clone(), sources[sj].clone()))
        .collect::<Result<_>>()?;
    // Every matched pair enters the translation stage in free mode.
    let inliers: Vec<usize> = (0..pairs.len()).collect();
    let result = finish_pipeline(&pairs, rot, inliers, config, start)?;
    Ok((result, matches))
}

fn finish_pipeline(
    pairs: &[FeaturePair],
    rot: RotationSolution,
    inliers: Vec<usize>,
    config: &SolverConfig,
    start: Instant,
) -> Result<RegistrationResult> {
    if inliers.is_empty() {
        return Err(Error::EmptyInlierSet);
    }
    let trans = translation_bnb(pairs, &rot.rotation, &inliers, config)?;

    let coarse = RigidTransform::from_parts3(&rot.rotation, &trans.translation)?;
    let refined = refine_lm(pairs, &inliers, &coarse)?;

    // Keep the refined transform only while every reported inlier still
    // passes the threshold it was selected under.
    let refined_r = refined.transform.rotation3();
    let still_inliers = inliers
        .iter()
        .all(|&i| crate::cost::rotation_residual(&pairs[i], &refined_r) <= config.epsilon_r);
    let transform = if still_inliers { refined.transform } else { coarse };

    let inlier_pairs: Vec<FeaturePair> = inliers.iter().map(|&i| pairs[i].clone()).collect();
    let final_cost = total_cost(&inlier_pairs, &transform)?;
    Ok(RegistrationResult {
        transform,
        inliers,
        final_cost,
        stats: SolveStats {
            cubes_expanded: rot.cubes_expanded + trans.cubes_expanded,
            bound_evaluations: rot.bound_evaluations + trans.bound_evaluations,
            wall_time: start.elapsed(),
        },
    })
}
