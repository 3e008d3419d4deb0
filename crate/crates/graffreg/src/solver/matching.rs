//! Greedy one-to-one correspondence search under a fixed rotation.

use nalgebra::Matrix3;

use crate::cost::residual_angle;
use crate::error::Result;
use crate::subspace::AffineSubspace;

use super::rotation::direction_data;

/// Match targets to sources at the rotation `r`: all candidate pairs are
/// sorted by squared residual angle ascending and accepted greedily while
/// the residual stays within `epsilon` and both indices are unused.
/// Returns `(target_idx, source_idx)` pairs; may be empty.
pub fn find_correspondences(
    targets: &[AffineSubspace],
    sources: &[AffineSubspace],
    r: &Matrix3<f64>,
    epsilon: f64,
) -> Result<Vec<(usize, usize)>> {
    if targets.is_empty() || sources.is_empty() {
        return Ok(Vec::new());
    }
    let (kind, target_data, source_data) = direction_data(targets, sources)?;
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(targets.len() * sources.len());
    for (j, s) in source_data.iter().enumerate() {
        let rs = r * s;
        for (i, t) in target_data.iter().enumerate() {
            let angle = residual_angle(kind, &rs, t);
            let residual = angle * angle;
            if residual <= epsilon {
                candidates.push((residual, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_targets = vec![false; targets.len()];
    let mut used_sources = vec![false; sources.len()];
    let mut matches = Vec::new();
    for (_, i, j) in candidates {
        if !used_targets[i] && !used_sources[j] {
            used_targets[i] = true;
            used_sources[j] = true;
            matches.push((i, j));
        }
    }
    matches.sort_unstable();
    Ok(matches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::random::{rotation_uniform, unit_vector3};
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lines(dirs: &[Vector3<f64>]) -> Vec<AffineSubspace> {
        dirs.iter()
            .map(|d| AffineSubspace::line3(*d, Vector3::zeros()).unwrap())
            .collect()
    }

    #[test]
    fn identical_sets_match_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dirs: Vec<Vector3<f64>> = (0..10).map(|_| unit_vector3(&mut rng)).collect();
        let set = lines(&dirs);
        let matches = find_correspondences(&set, &set, &Matrix3::identity(), 1e-6).unwrap();
        assert_eq!(matches, (0..10).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn disjoint_direction_sets_match_nothing() {
        let targets = lines(&[Vector3::x(), Vector3::y()]);
        let sources = lines(&[
            (Vector3::x() + Vector3::y()).normalize(),
            (Vector3::y() + Vector3::z()).normalize(),
        ]);
        let matches =
            find_correspondences(&targets, &sources, &Matrix3::identity(), 1e-4).unwrap();
        assert!(matches.is_empty());
    }

    #[test]
    fn true_pairs_found_among_distractors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r_gt = rotation_uniform(&mut rng);
        let true_dirs: Vec<Vector3<f64>> = (0..10).map(|_| unit_vector3(&mut rng)).collect();
        let targets = lines(&true_dirs);
        let mut source_dirs: Vec<Vector3<f64>> =
            true_dirs.iter().map(|d| r_gt.transpose() * d).collect();
        // distractors appended after the true sources
        for _ in 0..5 {
            source_dirs.push(unit_vector3(&mut rng));
        }
        let sources = lines(&source_dirs);
        let matches = find_correspondences(&targets, &sources, &r_gt, 1e-8).unwrap();
        assert_eq!(matches, (0..10).map(|i| (i, i)).collect::<Vec<_>>());
    }
}
