//! Translation search with the rotation fixed.
//!
//! With `R*` fixed, the per-pair residual depends on the translation only
//! through the tilde-normalized displacement column of the embedded
//! transformed source. Over a cube the displacement sweeps a segment in
//! R³, so the displacement column sweeps an arc on the unit 3-sphere, and
//! the deviation of the pair's projection term from its cube-center value
//! is bounded by a per-pair budget ψ. The cube-center cost is an upper
//! bound for the in-cube minimum; `Σ max(0, √gᵢ(t₀) − ψᵢ)²` is a lower
//! bound. The budget is the observed maximum of the deviation over the
//! cube's vertices — conjectured extremal there — widened by sampling the
//! edge midpoints as well and inflating by 5%.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Vector3, Vector4};

use crate::cost::{tilde4, CompiledPair, FeaturePair};
use crate::error::{Error, Result};

use super::refine::lm_translation_only;
use super::SolverConfig;

/// Cubes below this half-side are not subdivided further.
const MIN_HALF_SIDE: f64 = 1e-12;
/// Safety inflation on the sampled deviation budget.
const PSI_INFLATION: f64 = 1.05;

/// A translation search cube with cached cost bounds.
#[derive(Debug, Clone)]
pub struct TranslationCube {
    pub center: Vector3<f64>,
    pub half_side: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl TranslationCube {
    pub fn new(center: Vector3<f64>, half_side: f64) -> Self {
        Self {
            center,
            half_side,
            lower_bound: 0.0,
            upper_bound: f64::INFINITY,
        }
    }

    /// The eight corners.
    pub fn vertices(&self) -> [Vector3<f64>; 8] {
        let h = self.half_side;
        let c = self.center;
        let mut out = [Vector3::zeros(); 8];
        for (i, v) in out.iter_mut().enumerate() {
            *v = c + Vector3::new(
                if i & 1 == 0 { -h } else { h },
                if i & 2 == 0 { -h } else { h },
                if i & 4 == 0 { -h } else { h },
            );
        }
        out
    }

    /// The twelve edge midpoints (exactly one coordinate at the center).
    pub fn edge_midpoints(&self) -> [Vector3<f64>; 12] {
        let h = self.half_side;
        let c = self.center;
        let mut out = [Vector3::zeros(); 12];
        let mut idx = 0;
        for zero_axis in 0..3usize {
            for s1 in [-h, h] {
                for s2 in [-h, h] {
                    let mut v = [0.0; 3];
                    let mut others = (0..3).filter(|&a| a != zero_axis);
                    v[others.next().unwrap()] = s1;
                    v[others.next().unwrap()] = s2;
                    out[idx] = c + Vector3::from_row_slice(&v);
                    idx += 1;
                }
            }
        }
        out
    }
}

/// Per-pair translation residual data at a fixed rotation.
#[derive(Debug, Clone)]
pub(super) struct TranslationTerm {
    rotated_cols: [Vector3<f64>; 2],
    n_cols: usize,
    rotated_disp: Vector3<f64>,
    /// `R(I − BBᵀ)Rᵀ`.
    sweep: Matrix3<f64>,
    c_tilde: Vector4<f64>,
    c3: Vector3<f64>,
}

impl TranslationTerm {
    pub(super) fn new(pair: &CompiledPair, r: &Matrix3<f64>) -> Self {
        let mut rotated_cols = [Vector3::zeros(); 2];
        let mut projector = Matrix3::identity();
        for (i, b) in pair.source_cols().iter().enumerate() {
            let rb = r * b;
            rotated_cols[i] = rb;
            projector -= rb * rb.transpose();
        }
        let c = pair.target_tilde;
        Self {
            rotated_cols,
            n_cols: pair.source_cols().len(),
            rotated_disp: r * pair.source_disp,
            sweep: projector,
            c_tilde: c,
            c3: Vector3::new(c.x, c.y, c.z),
        }
    }

    fn displacement(&self, t: &Vector3<f64>) -> Vector3<f64> {
        self.rotated_disp + self.sweep * t
    }

    /// Contribution of the displacement column to the projection of the
    /// target's tilde displacement.
    fn tilde_projection(&self, t: &Vector3<f64>) -> Vector4<f64> {
        let y = tilde4(&self.displacement(t));
        y * self.c_tilde.dot(&y)
    }

    /// `P_{z(T·source)}·c̃ − c̃` at this rotation.
    pub(super) fn residual4(&self, t: &Vector3<f64>) -> Vector4<f64> {
        let mut projected = self.tilde_projection(t);
        for rb in &self.rotated_cols[..self.n_cols] {
            let coeff = self.c3.dot(rb);
            projected.x += coeff * rb.x;
            projected.y += coeff * rb.y;
            projected.z += coeff * rb.z;
        }
        projected - self.c_tilde
    }

    pub(super) fn g(&self, t: &Vector3<f64>) -> f64 {
        self.residual4(t).norm_squared()
    }
}

/// Lower/upper bounds of the summed residual over a cube. `lower_raw`
/// uses the vertex-only deviation budget; `lower` additionally samples
/// the edge midpoints and inflates by 5% (the bound actually used by the
/// search).
#[derive(Debug, Clone, Copy)]
pub struct TranslationBounds {
    pub lower_raw: f64,
    pub lower: f64,
    pub upper: f64,
}

pub(super) fn bounds_over(terms: &[TranslationTerm], cube: &TranslationCube) -> TranslationBounds {
    let center = cube.center;
    let vertices = cube.vertices();
    let midpoints = cube.edge_midpoints();
    let mut lower_raw = 0.0;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for term in terms {
        let g0 = term.g(&center);
        upper += g0;
        let at_center = term.tilde_projection(&center);
        let mut psi_vertices: f64 = 0.0;
        for v in &vertices {
            psi_vertices = psi_vertices.max((term.tilde_projection(v) - at_center).norm());
        }
        let mut psi_safe = psi_vertices;
        for m in &midpoints {
            psi_safe = psi_safe.max((term.tilde_projection(m) - at_center).norm());
        }
        psi_safe *= PSI_INFLATION;
        let s0 = g0.sqrt();
        lower_raw += (s0 - psi_vertices).max(0.0).powi(2);
        lower += (s0 - psi_safe).max(0.0).powi(2);
    }
    TranslationBounds {
        lower_raw,
        lower,
        upper,
    }
}

/// Bounds on `Σᵢ gᵢ(R, t)` over a translation cube for the given pairs.
pub fn translation_bounds(
    cube: &TranslationCube,
    pairs: &[FeaturePair],
    rotation: &Matrix3<f64>,
) -> TranslationBounds {
    let terms: Vec<TranslationTerm> = pairs
        .iter()
        .map(|p| TranslationTerm::new(p.compiled(), rotation))
        .collect();
    bounds_over(&terms, cube)
}

/// Result of the translation search.
#[derive(Debug, Clone)]
pub struct TranslationSolution {
    pub translation: Vector3<f64>,
    /// Final summed residual over the inlier pairs.
    pub cost: f64,
    /// True when the search hit the initial cube's boundary region, which
    /// suggests the optimum may lie outside the cube.
    pub on_boundary: bool,
    pub cubes_expanded: u64,
    pub bound_evaluations: u64,
}

struct HeapEntry {
    lower: f64,
    seq: u64,
    center: Vector3<f64>,
    half_side: f64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower && self.seq == other.seq
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
        // BinaryHeap is a max-heap: order reversed to pop the lowest lower
        // bound, ties popping the older cube first.
        other
            .lower
            .total_cmp(&self.lower)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Best-first translation search over the initial cube, minimizing the
/// summed residual of the selected pairs at the fixed rotation. The
/// search terminates when the incumbent is within `epsilon_t` of the
/// smallest outstanding lower bound.
pub fn translation_bnb(
    pairs: &[FeaturePair],
    rotation: &Matrix3<f64>,
    inliers: &[usize],
    config: &SolverConfig,
) -> Result<TranslationSolution> {
    config.validate()?;
    if inliers.is_empty() {
        return Err(Error::EmptyInlierSet);
    }
    let terms: Vec<TranslationTerm> = inliers
        .iter()
        .map(|&i| TranslationTerm::new(pairs[i].compiled(), rotation))
        .collect();

    let half0 = config
        .initial_translation_halfside
        .unwrap_or_else(|| default_halfside(pairs));
    let root = TranslationCube::new(Vector3::zeros(), half0);

    let mut bound_evaluations: u64 = 0;
    let mut cubes_expanded: u64 = 0;
    let mut seq: u64 = 0;

    let cost_at = |t: &Vector3<f64>| -> f64 { terms.iter().map(|term| term.g(t)).sum() };

    let mut best_t = root.center;
    let mut best_cost = cost_at(&best_t);
    bound_evaluations += 1;
    // Polish the center seed right away. Refinement results are accepted
    // only inside the initial cube so the search stays a constrained
    // minimizer.
    let inside = |t: &Vector3<f64>| t.iter().all(|c| c.abs() <= half0);
    let (t_lm, c_lm) = lm_translation_only(&terms, &best_t);
    if c_lm < best_cost && inside(&t_lm) {
        best_t = t_lm;
        best_cost = c_lm;
    }

    let root_bounds = bounds_over(&terms, &root);
    bound_evaluations += 1;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        lower: root_bounds.lower,
        seq,
        center: root.center,
        half_side: root.half_side,
    });

    while let Some(entry) = heap.pop() {
        if best_cost - entry.lower < config.epsilon_t {
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
            let child = TranslationCube::new(entry.center + offset, child_half);
            seq += 1;
            let bounds = bounds_over(&terms, &child);
            bound_evaluations += 1;
            if bounds.upper < best_cost {
                best_cost = bounds.upper;
                best_t = child.center;
                let (t_lm, c_lm) = lm_translation_only(&terms, &best_t);
                if c_lm < best_cost && inside(&t_lm) {
                    best_t = t_lm;
                    best_cost = c_lm;
                }
            }
            if bounds.lower < best_cost - config.epsilon_t && child_half > MIN_HALF_SIDE {
                heap.push(HeapEntry {
                    lower: bounds.lower,
                    seq,
                    center: child.center,
                    half_side: child_half,
                });
                if heap.len() > config.max_queue {
                    return Err(Error::QueueOverflow { max: config.max_queue });
                }
            }
        }
    }

    let on_boundary = best_t.iter().any(|c| c.abs() >= half0 * 0.99);
    Ok(TranslationSolution {
        translation: best_t,
        cost: best_cost,
        on_boundary,
        cubes_expanded,
        bound_evaluations,
    })
}

/// Default initial half-side: the bounding-box diagonal of the target
/// displacement vectors (any overlap-preserving translation lies within).
fn default_halfside(pairs: &[FeaturePair]) -> f64 {
    let mut lo = Vector3::from_element(f64::INFINITY);
    let mut hi = Vector3::from_element(f64::NEG_INFINITY);
    for pair in pairs {
        let d = pair
            .target()
            .displacement3()
            .expect("3D pairs in translation search");
        lo = lo.inf(&d);
        hi = hi.sup(&d);
    }
    let diag = (hi - lo).norm();
    if diag.is_finite() && diag > 0.0 {
        diag
    } else {
        1.0
    }
}
