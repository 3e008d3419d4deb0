//! Inlier-maximizing rotation search over SO(3).
//!
//! Rotations are parameterized by axis-angle vectors; the search domain
//! is the cube [−π, π]³ covering the π-ball. A cube with half-side σ and
//! center rotation R₀ moves any unit vector by at most ψ = min(π/2, √3σ),
//! so by the triangle inequality the residual angle of pair i anywhere in
//! the cube is at least θᵢ(R₀) − ψ. Counting pairs whose relaxed squared
//! residual clears the threshold gives an upper bound on the in-cube
//! inlier count; evaluating at R₀ gives a lower bound. Line-to-plane
//! pairs need a case split: when the center angle between the rotated
//! plane normal and the line direction is below √3σ, the projected
//! direction can swing arbitrarily and the relaxation widens to π/2.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::cost::{residual_angle, CompiledPair, FeatureKind, FeaturePair};
use crate::error::{Error, Result};
use crate::subspace::AffineSubspace;

use super::refine::{lm_rotation_only, RotationTerm};
use super::SolverConfig;

/// Cubes below this half-side (radians) are not subdivided further.
const MIN_HALF_SIDE: f64 = 1e-6;
/// Candidate-pair cap before the correspondence-free search deduplicates
/// directions into histogram buckets.
const FREE_CANDIDATE_CAP: usize = 1_000_000;

/// An axis-angle search cube with its cached inlier-count bounds.
#[derive(Debug, Clone)]
pub struct RotationCube {
    /// Axis-angle center (radians); the cube is `center ± half_side` per axis.
    pub center: Vector3<f64>,
    pub half_side: f64,
    pub lower_bound: usize,
    pub upper_bound: usize,
}

impl RotationCube {
    pub fn new(center: Vector3<f64>, half_side: f64) -> Self {
        Self {
            center,
            half_side,
            lower_bound: 0,
            upper_bound: 0,
        }
    }

    /// Rotation at the cube center.
    pub fn center_rotation(&self) -> Matrix3<f64> {
        *Rotation3::from_scaled_axis(self.center).matrix()
    }
}

/// Count of pairs whose residual at the center rotation clears ε — a
/// lower bound for the maximal in-cube inlier count.
pub fn rotation_lower_bound(cube: &RotationCube, pairs: &[FeaturePair], epsilon: f64) -> usize {
    let r0 = cube.center_rotation();
    pairs
        .iter()
        .filter(|p| {
            let angle = p.compiled().rotation_angle(&r0);
            angle * angle <= epsilon
        })
        .count()
}

/// Count of pairs whose relaxed residual `max(0, θᵢ(R₀) − ψᵢ)²` clears ε —
/// an upper bound for the maximal in-cube inlier count.
pub fn rotation_upper_bound(cube: &RotationCube, pairs: &[FeaturePair], epsilon: f64) -> usize {
    let r0 = cube.center_rotation();
    pairs
        .iter()
        .filter(|p| relaxed_passes(p.compiled(), &r0, cube.half_side, epsilon))
        .count()
}

/// Uncertainty angle of an axis-angle cube: min(π/2, √3·σ).
fn uncertainty_angle(half_side: f64) -> f64 {
    (3.0_f64.sqrt() * half_side).min(FRAC_PI_2)
}

fn relaxed_passes(term: &CompiledPair, r0: &Matrix3<f64>, half_side: f64, epsilon: f64) -> bool {
    let sqrt3_sigma = 3.0_f64.sqrt() * half_side;
    let theta0 = term.rotation_angle(r0);
    let psi = match term.kind {
        FeatureKind::LineLine | FeatureKind::PlanePlane => uncertainty_angle(half_side),
        FeatureKind::LinePlane => {
            // angle between the rotated source normal and the target direction
            let rn = r0 * term.rot_source;
            let alpha = rn.cross(&term.rot_target).norm().atan2(rn.dot(&term.rot_target).abs());
            if alpha >= sqrt3_sigma {
                uncertainty_angle(half_side)
            } else {
                FRAC_PI_2
            }
        }
    };
    let relaxed = (theta0 - psi).max(0.0);
    relaxed * relaxed <= epsilon
}

/// Result of a rotation search.
#[derive(Debug, Clone)]
pub struct RotationSolution {
    pub rotation: Matrix3<f64>,
    /// Known correspondences: positions of the inlier pairs. Free mode:
    /// source indices that have at least one target within the threshold.
    pub inliers: Vec<usize>,
    pub cubes_expanded: u64,
    pub bound_evaluations: u64,
}

// ── Objective over candidate rotations ───────────────────────────────────────

enum Objective {
    /// One term per given correspondence.
    Corr { terms: Vec<CompiledPair> },
    /// All target×source combinations; a source counts as an inlier when
    /// some target direction datum matches it.
    Free {
        kind: FeatureKind,
        targets: Vec<Vector3<f64>>,
        sources: Vec<Vector3<f64>>,
    },
}

fn pair_angle(kind: FeatureKind, rotated_source: &Vector3<f64>, target: &Vector3<f64>) -> f64 {
    residual_angle(kind, rotated_source, target)
}

/// A rotation sending the source datum onto the target one: direction
/// onto direction (either sign) for line-line and plane-plane, the plane
/// normal onto the nearest direction perpendicular to the line for
/// line-to-plane.
fn aligning_rotation(
    kind: FeatureKind,
    source: &Vector3<f64>,
    target: &Vector3<f64>,
) -> Option<Matrix3<f64>> {
    let goal = match kind {
        FeatureKind::LineLine | FeatureKind::PlanePlane => *target,
        FeatureKind::LinePlane => {
            // move the normal perpendicular to the target line direction
            let mut v = source - target * target.dot(source);
            if v.norm() < 1e-9 {
                v = crate::synth::random::orthonormal_complement(target).0;
            }
            v.normalize()
        }
    };
    let rotation = Rotation3::rotation_between(source, &goal)
        .or_else(|| Rotation3::rotation_between(source, &-goal))?;
    Some(*rotation.matrix())
}

impl Objective {
    /// Inlier indices at a concrete rotation.
    fn inliers_at(&self, r: &Matrix3<f64>, epsilon: f64) -> Vec<usize> {
        match self {
            Objective::Corr { terms } => terms
                .iter()
                .enumerate()
                .filter_map(|(i, t)| {
                    let a = t.rotation_angle(r);
                    (a * a <= epsilon).then_some(i)
                })
                .collect(),
            Objective::Free { kind, targets, sources } => sources
                .iter()
                .enumerate()
                .filter_map(|(j, s)| {
                    let rs = r * s;
                    let hit = targets.iter().any(|t| {
                        let a = pair_angle(*kind, &rs, t);
                        a * a <= epsilon
                    });
                    hit.then_some(j)
                })
                .collect(),
        }
    }

    /// Upper bound on the inlier count over a cube.
    fn upper_count(&self, center: &Vector3<f64>, half_side: f64, epsilon: f64) -> usize {
        let r0 = *Rotation3::from_scaled_axis(*center).matrix();
        match self {
            Objective::Corr { terms } => terms
                .iter()
                .filter(|t| relaxed_passes(t, &r0, half_side, epsilon))
                .count(),
            Objective::Free { kind, targets, sources } => {
                let sqrt3_sigma = 3.0_f64.sqrt() * half_side;
                let psi_plain = uncertainty_angle(half_side);
                sources
                    .iter()
                    .filter(|s| {
                        let rs = r0 * **s;
                        targets.iter().any(|t| {
                            let theta0 = pair_angle(*kind, &rs, t);
                            let psi = match kind {
                                FeatureKind::LineLine | FeatureKind::PlanePlane => psi_plain,
                                FeatureKind::LinePlane => {
                                    let alpha =
                                        rs.cross(t).norm().atan2(rs.dot(t).abs());
                                    if alpha >= sqrt3_sigma {
                                        psi_plain
                                    } else {
                                        FRAC_PI_2
                                    }
                                }
                            };
                            let relaxed = (theta0 - psi).max(0.0);
                            relaxed * relaxed <= epsilon
                        })
                    })
                    .count()
            }
        }
    }

    /// Squared-residual sum over a concrete inlier set (tie-break metric).
    fn residual_sum(&self, r: &Matrix3<f64>, inliers: &[usize]) -> f64 {
        match self {
            Objective::Corr { terms } => inliers
                .iter()
                .map(|&i| {
                    let a = terms[i].rotation_angle(r);
                    a * a
                })
                .sum(),
            Objective::Free { kind, targets, sources } => inliers
                .iter()
                .map(|&j| {
                    let rs = r * sources[j];
                    targets
                        .iter()
                        .map(|t| {
                            let a = pair_angle(*kind, &rs, t);
                            a * a
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .sum(),
        }
    }

    /// Rotations aligning single pairs exactly, used to seed the search.
    fn alignment_seeds(&self) -> Vec<Matrix3<f64>> {
        let mut seeds = Vec::new();
        match self {
            Objective::Corr { terms } => {
                for term in terms.iter().take(16) {
                    if let Some(r) = aligning_rotation(term.kind, &term.rot_source, &term.rot_target) {
                        seeds.push(r);
                    }
                }
            }
            Objective::Free { kind, targets, sources } => {
                for s in sources.iter().take(4) {
                    for t in targets.iter().take(8) {
                        if let Some(r) = aligning_rotation(*kind, s, t) {
                            seeds.push(r);
                        }
                    }
                }
            }
        }
        seeds
    }

    /// Residual terms for the least-squares rotation refinement, built
    /// from the current inlier set.
    fn refinement_terms(&self, r: &Matrix3<f64>, inliers: &[usize], epsilon: f64) -> Vec<RotationTerm> {
        match self {
            Objective::Corr { terms } => inliers
                .iter()
                .map(|&i| RotationTerm {
                    kind: terms[i].kind,
                    source: terms[i].rot_source,
                    target: terms[i].rot_target,
                })
                .collect(),
            Objective::Free { kind, targets, sources } => inliers
                .iter()
                .filter_map(|&j| {
                    let rs = r * sources[j];
                    // pair each inlier source with its best target
                    let best = targets
                        .iter()
                        .map(|t| {
                            let a = pair_angle(*kind, &rs, t);
                            (a * a, t)
                        })
                        .min_by(|x, y| x.0.total_cmp(&y.0))?;
                    (best.0 <= epsilon).then(|| RotationTerm {
                        kind: *kind,
                        source: sources[j],
                        target: *best.1,
                    })
                })
                .collect(),
        }
    }
}

// ── Best-first search ────────────────────────────────────────────────────────

struct HeapEntry {
    upper: usize,
    seq: u64,
    center: Vector3<f64>,
    half_side: f64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on the upper bound; ties pop the older cube first
        self.upper
            .cmp(&other.upper)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    rotation: Matrix3<f64>,
    inliers: Vec<usize>,
    residual_sum: f64,
    refined: bool,
}

fn search(objective: &Objective, config: &SolverConfig) -> Result<RotationSolution> {
    let epsilon = config.epsilon_r;
    let mut bound_evaluations: u64 = 0;
    let mut cubes_expanded: u64 = 0;
    let mut seq: u64 = 0;

    let identity = Matrix3::identity();
    let root_inliers = objective.inliers_at(&identity, epsilon);
    bound_evaluations += 1;
    let mut incumbent = Incumbent {
        rotation: identity,
        residual_sum: objective.residual_sum(&identity, &root_inliers),
        inliers: root_inliers,
        refined: false,
    };

    // Constructive warm start: rotations that align individual pairs
    // exactly. A one-pair problem is always satisfiable, so the incumbent
    // starts at a count of at least one for any threshold.
    for rotation in objective.alignment_seeds() {
        let inliers = objective.inliers_at(&rotation, epsilon);
        bound_evaluations += 1;
        consider(objective, &mut incumbent, rotation, inliers);
    }
    refine_incumbent(objective, &mut incumbent, epsilon);

    let mut heap = BinaryHeap::new();
    let root_upper = objective.upper_count(&Vector3::zeros(), PI, epsilon);
    bound_evaluations += 1;
    heap.push(HeapEntry {
        upper: root_upper,
        seq,
        center: Vector3::zeros(),
        half_side: PI,
    });

    while let Some(entry) = heap.pop() {
        if entry.upper <= incumbent.inliers.len() {
            break;
        }
        cubes_expanded += 1;
        let child_half = entry.half_side / 2.0;
        for corner in 0..8u8 {
            let offset = Vector3::new(
                if corner & 1 == 0 { -child_half } else { child_half },
                if corner & 2 == 0 { -child_half } else { child_half },
                if corner & 4 == 0 { -child_half } else { child_half },
            );
            let center = entry.center + offset;
            seq += 1;

            let r_center = *Rotation3::from_scaled_axis(center).matrix();
            let center_inliers = objective.inliers_at(&r_center, epsilon);
            bound_evaluations += 1;
            let lower = center_inliers.len();
            consider(objective, &mut incumbent, r_center, center_inliers);

            // Refine the incumbent whenever a cube's center count reaches
            // half of it (at most once per incumbent update).
            if incumbent.inliers.len() < 2 * lower && !incumbent.refined {
                refine_incumbent(objective, &mut incumbent, epsilon);
            }

            let upper = objective.upper_count(&center, child_half, epsilon);
            bound_evaluations += 1;
            if upper > incumbent.inliers.len() && child_half > MIN_HALF_SIDE {
                heap.push(HeapEntry {
                    upper,
                    seq,
                    center,
                    half_side: child_half,
                });
                if heap.len() > config.max_queue {
                    return Err(Error::QueueOverflow { max: config.max_queue });
                }
            }
        }
    }

    // Final least-squares polish of the returned representative.
    refine_incumbent(objective, &mut incumbent, epsilon);

    Ok(RotationSolution {
        rotation: incumbent.rotation,
        inliers: incumbent.inliers,
        cubes_expanded,
        bound_evaluations,
    })
}

/// Replace the incumbent when the candidate has a strictly larger inlier
/// count, or an equal count with a strictly smaller residual sum.
fn consider(
    objective: &Objective,
    incumbent: &mut Incumbent,
    rotation: Matrix3<f64>,
    inliers: Vec<usize>,
) {
    if inliers.len() < incumbent.inliers.len() {
        return;
    }
    let sum = objective.residual_sum(&rotation, &inliers);
    if inliers.len() > incumbent.inliers.len() || sum < incumbent.residual_sum {
        incumbent.rotation = rotation;
        incumbent.inliers = inliers;
        incumbent.residual_sum = sum;
        incumbent.refined = false;
    }
}

fn refine_incumbent(objective: &Objective, incumbent: &mut Incumbent, epsilon: f64) {
    incumbent.refined = true;
    if incumbent.inliers.is_empty() {
        return;
    }
    let terms = objective.refinement_terms(&incumbent.rotation, &incumbent.inliers, epsilon);
    if terms.is_empty() {
        return;
    }
    let refined = lm_rotation_only(&terms, &incumbent.rotation);
    let new_inliers = objective.inliers_at(&refined, epsilon);
    let new_sum = objective.residual_sum(&refined, &new_inliers);
    if new_inliers.len() > incumbent.inliers.len()
        || (new_inliers.len() == incumbent.inliers.len() && new_sum < incumbent.residual_sum)
    {
        incumbent.rotation = refined;
        incumbent.inliers = new_inliers;
        incumbent.residual_sum = new_sum;
    }
}

// ── Entry points ─────────────────────────────────────────────────────────────

/// Rotation search with known correspondences. Returns the maximizing
/// rotation (least-squares representative among equal counts) and its
/// inlier positions.
pub fn rotation_bnb(pairs: &[FeaturePair], config: &SolverConfig) -> Result<RotationSolution> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no feature pairs"));
    }
    let objective = Objective::Corr {
        terms: pairs.iter().map(|p| *p.compiled()).collect(),
    };
    search(&objective, config)
}

/// Rotation search without correspondences over all target×source
/// candidates. `inliers` in the solution are source indices with at
/// least one target residual within the threshold at the returned
/// rotation.
pub fn rotation_bnb_free(
    targets: &[AffineSubspace],
    sources: &[AffineSubspace],
    config: &SolverConfig,
) -> Result<RotationSolution> {
    config.validate()?;
    let (kind, target_data, source_data) = direction_data(targets, sources)?;
    let (target_data, source_data) = if target_data.len() * source_data.len() > FREE_CANDIDATE_CAP
    {
        (
            dedupe_directions(target_data, config.epsilon_r),
            dedupe_directions(source_data, config.epsilon_r),
        )
    } else {
        (target_data, source_data)
    };
    let objective = Objective::Free {
        kind,
        targets: target_data,
        sources: source_data,
    };
    search(&objective, config)
}

/// Extract the per-feature direction datum used by rotation residuals:
/// line direction for lines, unit normal for planes.
pub(super) fn direction_data(
    targets: &[AffineSubspace],
    sources: &[AffineSubspace],
) -> Result<(FeatureKind, Vec<Vector3<f64>>, Vec<Vector3<f64>>)> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("no target features"));
    }
    if sources.is_empty() {
        return Err(Error::EmptyInput("no source features"));
    }
    let t_dim = targets[0].dim_sub();
    let s_dim = sources[0].dim_sub();
    let kind = match (t_dim, s_dim) {
        (1, 1) => FeatureKind::LineLine,
        (1, 2) => FeatureKind::LinePlane,
        (2, 2) => FeatureKind::PlanePlane,
        (k, l) if k > l => return Err(Error::SubspaceOrder { left: k, right: l }),
        (k, l) => {
            return Err(Error::InvalidConfig(format!(
                "unsupported feature dimensions ({k}, {l})"
            )))
        }
    };
    let datum = |s: &AffineSubspace, want: usize| -> Result<Vector3<f64>> {
        if s.dim_ambient() != 3 || s.dim_sub() != want {
            return Err(Error::InvalidConfig(
                "all features in one set must share kind and ambient dimension 3".into(),
            ));
        }
        Ok(match want {
            1 => s.direction3().expect("line"),
            _ => s.normal3().expect("plane"),
        })
    };
    let target_data = targets
        .iter()
        .map(|s| datum(s, t_dim))
        .collect::<Result<Vec<_>>>()?;
    let source_data = sources
        .iter()
        .map(|s| datum(s, s_dim))
        .collect::<Result<Vec<_>>>()?;
    Ok((kind, target_data, source_data))
}

/// Histogram prefilter for oversized candidate sets: directions falling
/// into one angular bucket are represented by the first of them. Sign is
/// folded out first since the residuals are sign-agnostic.
fn dedupe_directions(data: Vec<Vector3<f64>>, epsilon: f64) -> Vec<Vector3<f64>> {
    let cell = (0.5 * epsilon.sqrt()).max(1e-3);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for v in data {
        let canon = if v.z < 0.0 || (v.z == 0.0 && (v.y < 0.0 || (v.y == 0.0 && v.x < 0.0))) {
            -v
        } else {
            v
        };
        let key = (
            (canon.x / cell).round() as i64,
            (canon.y / cell).round() as i64,
            (canon.z / cell).round() as i64,
        );
        if seen.insert(key) {
            out.push(v);
        }
    }
    out
}
