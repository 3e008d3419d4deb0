//! Damped least-squares refinement of rotation, translation, or both.
//!
//! The residual vector stacks, per pair, the projection-form rotation
//! residual (three components for line-line and plane-plane, the signed
//! normal component for line-to-plane) and the four components of the
//! embedded translation residual. Steps update the rotation
//! multiplicatively through the exponential map of a 3-vector increment
//! and the translation additively, and are accepted only when the true
//! objective does not increase, so the reported cost history is
//! monotonically non-increasing by construction.

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Vector3};

use crate::cost::{residual_angle, CompiledPair, FeatureKind, FeaturePair};
use crate::error::{Error, Result};
use crate::subspace::RigidTransform;

use super::translation::TranslationTerm;

const MAX_ITERATIONS: usize = 100;
const GRADIENT_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-7;

/// Result of [`refine_lm`].
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub transform: RigidTransform,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Objective value after every accepted step, starting with the
    /// initial cost. Non-increasing.
    pub cost_history: Vec<f64>,
    pub iterations: usize,
}

/// Levenberg-Marquardt refinement of a full rigid transform over the
/// selected pairs. Never returns a transform with a higher objective than
/// the initial one; non-convergence returns the best iterate.
pub fn refine_lm(
    pairs: &[FeaturePair],
    inliers: &[usize],
    initial: &RigidTransform,
) -> Result<RefineOutcome> {
    if inliers.is_empty() {
        return Err(Error::EmptyInput("inlier set for refinement"));
    }
    if let Some(&bad) = inliers.iter().find(|&&i| i >= pairs.len()) {
        return Err(Error::InvalidConfig(format!(
            "inlier index {bad} out of range ({} pairs)",
            pairs.len()
        )));
    }
    if initial.dim() != 3 {
        return Err(Error::DimensionMismatch {
            what: "refinement transform dimension",
            left: initial.dim(),
            right: 3,
        });
    }
    let terms: Vec<CompiledPair> = inliers.iter().map(|&i| *pairs[i].compiled()).collect();
    let residuals = |r: &Matrix3<f64>, t: &Vector3<f64>, out: &mut Vec<f64>| {
        out.clear();
        for term in &terms {
            push_rotation_residual(term.kind, &term.rot_source, &term.rot_target, r, out);
            let g = term.g_residual_vec(r, t);
            out.extend_from_slice(g.as_slice());
        }
    };
    let cost = |r: &Matrix3<f64>, t: &Vector3<f64>| -> f64 {
        terms.iter().map(|p| p.f_term(r) + p.g_term(r, t)).sum()
    };
    let state = run_lm(
        &initial.rotation3(),
        &initial.translation3(),
        true,
        true,
        &residuals,
        &cost,
        MAX_ITERATIONS,
    );
    Ok(RefineOutcome {
        transform: RigidTransform::from_parts3(&state.rotation, &state.translation)?,
        initial_cost: state.history[0],
        final_cost: *state.history.last().expect("nonempty history"),
        cost_history: state.history,
        iterations: state.iterations,
    })
}

/// One rotation-residual term for the rotation-only refinement used
/// inside the rotation search.
#[derive(Debug, Clone, Copy)]
pub(super) struct RotationTerm {
    pub kind: FeatureKind,
    pub source: Vector3<f64>,
    pub target: Vector3<f64>,
}

/// Minimize `Σ θᵢ²` over the rotation, seeded at `r0`.
pub(super) fn lm_rotation_only(terms: &[RotationTerm], r0: &Matrix3<f64>) -> Matrix3<f64> {
    let residuals = |r: &Matrix3<f64>, _t: &Vector3<f64>, out: &mut Vec<f64>| {
        out.clear();
        for term in terms {
            push_rotation_residual(term.kind, &term.source, &term.target, r, out);
        }
    };
    let cost = |r: &Matrix3<f64>, _t: &Vector3<f64>| -> f64 {
        terms
            .iter()
            .map(|term| {
                let a = residual_angle(term.kind, &(r * term.source), &term.target);
                a * a
            })
            .sum()
    };
    let state = run_lm(r0, &Vector3::zeros(), true, false, &residuals, &cost, 40);
    state.rotation
}

/// Minimize `Σ gᵢ` over the translation at a fixed rotation. Returns the
/// refined translation and its cost.
pub(super) fn lm_translation_only(
    terms: &[TranslationTerm],
    t0: &Vector3<f64>,
) -> (Vector3<f64>, f64) {
    let residuals = |_r: &Matrix3<f64>, t: &Vector3<f64>, out: &mut Vec<f64>| {
        out.clear();
        for term in terms {
            out.extend_from_slice(term.residual4(t).as_slice());
        }
    };
    let cost = |_r: &Matrix3<f64>, t: &Vector3<f64>| -> f64 {
        terms.iter().map(|term| term.g(t)).sum()
    };
    let state = run_lm(
        &Matrix3::identity(),
        t0,
        false,
        true,
        &residuals,
        &cost,
        40,
    );
    (state.translation, *state.history.last().expect("nonempty"))
}

fn push_rotation_residual(
    kind: FeatureKind,
    source: &Vector3<f64>,
    target: &Vector3<f64>,
    r: &Matrix3<f64>,
    out: &mut Vec<f64>,
) {
    let rs = r * source;
    match kind {
        FeatureKind::LineLine | FeatureKind::PlanePlane => {
            let v = rs * rs.dot(target) - target;
            out.extend_from_slice(v.as_slice());
        }
        FeatureKind::LinePlane => out.push(target.dot(&rs)),
    }
}

struct LmState {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    history: Vec<f64>,
    iterations: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_lm(
    r0: &Matrix3<f64>,
    t0: &Vector3<f64>,
    rotate: bool,
    translate: bool,
    residuals: &dyn Fn(&Matrix3<f64>, &Vector3<f64>, &mut Vec<f64>),
    cost: &dyn Fn(&Matrix3<f64>, &Vector3<f64>) -> f64,
    max_iterations: usize,
) -> LmState {
    let n_params = 3 * (rotate as usize) + 3 * (translate as usize);
    let mut r_cur = orthonormalized_rotation(r0);
    let mut t_cur = *t0;
    let mut cost_cur = cost(&r_cur, &t_cur);
    let mut history = vec![cost_cur];
    let mut lambda = 1e-4;

    let apply = |r: &Matrix3<f64>, t: &Vector3<f64>, delta: &DVector<f64>| {
        let mut idx = 0;
        let r_new = if rotate {
            let omega = Vector3::new(delta[0], delta[1], delta[2]);
            idx = 3;
            orthonormalized_rotation(&(*Rotation3::from_scaled_axis(omega).matrix() * r))
        } else {
            *r
        };
        let t_new = if translate {
            *t + Vector3::new(delta[idx], delta[idx + 1], delta[idx + 2])
        } else {
            *t
        };
        (r_new, t_new)
    };

    let mut base = Vec::new();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut iterations = 0;
    'outer: for _ in 0..max_iterations {
        iterations += 1;
        residuals(&r_cur, &t_cur, &mut base);
        let m = base.len();
        if m == 0 {
            break;
        }
        let mut jacobian = DMatrix::zeros(m, n_params);
        for p in 0..n_params {
            let mut delta = DVector::zeros(n_params);
            delta[p] = FD_STEP;
            let (rp, tp) = apply(&r_cur, &t_cur, &delta);
            residuals(&rp, &tp, &mut plus);
            delta[p] = -FD_STEP;
            let (rm, tm) = apply(&r_cur, &t_cur, &delta);
            residuals(&rm, &tm, &mut minus);
            for i in 0..m {
                jacobian[(i, p)] = (plus[i] - minus[i]) / (2.0 * FD_STEP);
            }
        }
        let res = DVector::from_column_slice(&base);
        let gradient = jacobian.transpose() * &res;
        if gradient.amax() < GRADIENT_TOL {
            break;
        }
        let jtj = jacobian.transpose() * &jacobian;

        let mut attempts = 0;
        loop {
            attempts += 1;
            let mut damped = jtj.clone();
            for p in 0..n_params {
                damped[(p, p)] += lambda * damped[(p, p)].max(1e-12);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&gradient)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e10 || attempts > 12 {
                        break 'outer;
                    }
                    continue;
                }
            };
            if step.norm() < STEP_TOL {
                break 'outer;
            }
            let (r_new, t_new) = apply(&r_cur, &t_cur, &step);
            let cost_new = cost(&r_new, &t_new);
            if cost_new <= cost_cur {
                r_cur = r_new;
                t_cur = t_new;
                cost_cur = cost_new;
                history.push(cost_cur);
                lambda = (lambda / 3.0).max(1e-12);
                break;
            }
            lambda *= 10.0;
            if lambda > 1e10 || attempts > 12 {
                break 'outer;
            }
        }
    }
    LmState {
        rotation: r_cur,
        translation: t_cur,
        history,
        iterations,
    }
}

/// Nearest-by-construction rotation: Gram-Schmidt on the columns with the
/// third column rebuilt from the cross product, so the result is exactly
/// special orthogonal.
fn orthonormalized_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c0: Vector3<f64> = m.column(0).into_owned().normalize();
    let mut c1: Vector3<f64> = m.column(1).into_owned();
    c1 -= c0 * c0.dot(&c1);
    let c1 = c1.normalize();
    let c2 = c0.cross(&c1);
    Matrix3::from_columns(&[c0, c1, c2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::AffineSubspace;
    use crate::synth::{generate_scene, rotation_error_deg, translation_error_pct, SceneConfig};
    use nalgebra::Unit;
    use rand::SeedableRng;

    fn clean_pairs(seed: u64, n: usize) -> (Vec<FeaturePair>, RigidTransform) {
        let scene = generate_scene(&SceneConfig {
            n_pairs: n,
            rng_seed: seed,
            ..Default::default()
        })
        .unwrap();
        (scene.pairs().unwrap(), scene.ground_truth)
    }

    #[test]
    fn stationary_at_exact_optimum() {
        let (pairs, t_gt) = clean_pairs(1, 10);
        let inliers: Vec<usize> = (0..pairs.len()).collect();
        let outcome = refine_lm(&pairs, &inliers, &t_gt).unwrap();
        assert!(outcome.final_cost <= outcome.initial_cost + 1e-15);
        assert!(outcome.final_cost < 1e-16);
        let err = rotation_error_deg(&outcome.transform.rotation3(), &t_gt.rotation3());
        assert!(err < 1e-8, "moved {err}° from the optimum");
    }

    #[test]
    fn recovers_from_small_perturbation() {
        let (pairs, t_gt) = clean_pairs(2, 12);
        let inliers: Vec<usize> = (0..pairs.len()).collect();
        let axis = Unit::new_normalize(Vector3::new(0.3, -1.0, 0.5));
        let r_pert = *Rotation3::from_axis_angle(&axis, 2.0_f64.to_radians()).matrix()
            * t_gt.rotation3();
        let t_pert = t_gt.translation3() * 1.02;
        let start = RigidTransform::from_parts3(&r_pert, &t_pert).unwrap();
        let outcome = refine_lm(&pairs, &inliers, &start).unwrap();
        let rot_err = rotation_error_deg(&outcome.transform.rotation3(), &t_gt.rotation3());
        let trans_err = translation_error_pct(
            &outcome.transform.translation3(),
            &t_gt.translation3(),
        );
        assert!(rot_err < 0.01, "rotation error {rot_err}°");
        assert!(trans_err.value < 0.01, "translation error {}%", trans_err.value);
    }

    #[test]
    fn cost_history_is_monotone() {
        let (pairs, t_gt) = clean_pairs(3, 8);
        let inliers: Vec<usize> = (0..pairs.len()).collect();
        let axis = Unit::new_normalize(Vector3::new(1.0, 0.2, -0.4));
        let r_pert = *Rotation3::from_axis_angle(&axis, 10.0_f64.to_radians()).matrix()
            * t_gt.rotation3();
        let start = RigidTransform::from_parts3(&r_pert, &(t_gt.translation3() * 1.3)).unwrap();
        let outcome = refine_lm(&pairs, &inliers, &start).unwrap();
        for w in outcome.cost_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "cost increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn rejects_empty_inlier_set() {
        let (pairs, t_gt) = clean_pairs(4, 5);
        assert!(matches!(
            refine_lm(&pairs, &[], &t_gt),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn rotation_only_alignment_of_directions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let r_gt = crate::synth::random::rotation_uniform(&mut rng);
        let terms: Vec<RotationTerm> = (0..8)
            .map(|_| {
                let s = crate::synth::random::unit_vector3(&mut rng);
                RotationTerm {
                    kind: FeatureKind::LineLine,
                    source: s,
                    target: r_gt * s,
                }
            })
            .collect();
        let axis = Unit::new_normalize(Vector3::new(0.1, 0.9, -0.2));
        let seed = *Rotation3::from_axis_angle(&axis, 0.05).matrix() * r_gt;
        let refined = lm_rotation_only(&terms, &seed);
        assert!(rotation_error_deg(&refined, &r_gt) < 1e-3);
    }

    #[test]
    fn mixed_kind_refinement_reaches_ground_truth() {
        let mut pairs = Vec::new();
        let mut offset = 0;
        for (kind_seed, kind) in [
            (10u64, crate::cost::FeatureKind::LineLine),
            (11, crate::cost::FeatureKind::LinePlane),
            (12, crate::cost::FeatureKind::PlanePlane),
        ] {
            let scene = generate_scene(&SceneConfig {
                n_pairs: 5,
                feature_kind: kind,
                rng_seed: kind_seed,
                translation_halfside: 0.0,
                ..Default::default()
            })
            .unwrap();
            // rebase all kinds onto one shared ground truth by composing
            let t_gt = scene.ground_truth.clone();
            for (i, (target, source)) in scene.targets.iter().zip(&scene.sources).enumerate() {
                let realigned = source
                    .transformed(&t_gt)
                    .unwrap()
                    .transformed(&shared_ground_truth().inverse())
                    .unwrap();
                pairs.push(FeaturePair::new(offset + i, target.clone(), realigned).unwrap());
            }
            offset += 5;
        }
        let inliers: Vec<usize> = (0..pairs.len()).collect();
        let gt = shared_ground_truth();
        let axis = Unit::new_normalize(Vector3::new(-0.3, 0.1, 1.0));
        let start = RigidTransform::from_parts3(
            &(*Rotation3::from_axis_angle(&axis, 0.03).matrix() * gt.rotation3()),
            &(gt.translation3() + Vector3::new(0.02, -0.01, 0.03)),
        )
        .unwrap();
        let outcome = refine_lm(&pairs, &inliers, &start).unwrap();
        assert!(outcome.final_cost < 1e-20, "final cost {}", outcome.final_cost);
        assert!(rotation_error_deg(&outcome.transform.rotation3(), &gt.rotation3()) < 1e-5);
    }

    fn shared_ground_truth() -> RigidTransform {
        let axis = Unit::new_normalize(Vector3::new(0.2, 0.5, -1.0));
        RigidTransform::from_parts3(
            &Rotation3::from_axis_angle(&axis, 0.8).matrix().clone(),
            &Vector3::new(0.4, -0.6, 0.9),
        )
        .unwrap()
    }
}
