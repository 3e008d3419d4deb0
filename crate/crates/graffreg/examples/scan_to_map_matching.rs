//! Localize a scan inside a 3D line map without any given correspondences.
//!
//! The rotation search scores every map×query direction pairing at once;
//! once the inlier-maximizing rotation is found, greedy one-to-one
//! matching fixes the correspondences and the translation search and
//! refinement finish the pose.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use graffreg::solver::{register_correspondence_free, SolverConfig};
use graffreg::subspace::{AffineSubspace, RigidTransform};
use graffreg::synth::random::{gaussian3, rotation_uniform, tilt_direction, unit_vector3};
use graffreg::synth::{rotation_error_deg, translation_error_pct};

fn main() -> graffreg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    // a map of 60 lines
    let map: Vec<AffineSubspace> = (0..60)
        .map(|_| AffineSubspace::line3(unit_vector3(&mut rng), gaussian3(&mut rng, 4.0)))
        .collect::<graffreg::Result<_>>()?;

    // the scan observes 25 of them, noisily, in its own frame
    let ground_truth =
        RigidTransform::from_parts3(&rotation_uniform(&mut rng), &Vector3::new(1.2, -0.8, 2.1))?;
    let inverse = ground_truth.inverse();
    let observed: Vec<usize> = (0..60).step_by(2).take(25).collect();
    let queries: Vec<AffineSubspace> = observed
        .iter()
        .map(|&i| {
            let dir = tilt_direction(&mut rng, &map[i].direction3().unwrap(), 0.002);
            let anchor = map[i].displacement3().unwrap() + gaussian3(&mut rng, 0.005);
            AffineSubspace::line3(dir, anchor)?.transformed(&inverse)
        })
        .collect::<graffreg::Result<_>>()?;

    let config = SolverConfig {
        epsilon_r: 4e-4,
        epsilon_t: 1e-7,
        initial_translation_halfside: Some(6.0),
        ..Default::default()
    };
    let (result, matches) = register_correspondence_free(&map, &queries, &config)?;

    let correct = matches
        .iter()
        .filter(|&&(map_idx, query_idx)| observed[query_idx] == map_idx)
        .count();
    println!("queries: {} of a {}-line map", queries.len(), map.len());
    println!("matches found: {} ({correct} correct)", matches.len());
    println!(
        "rotation error:    {:.5}°",
        rotation_error_deg(&result.transform.rotation3(), &ground_truth.rotation3())
    );
    println!(
        "translation error: {:.5}%",
        translation_error_pct(
            &result.transform.translation3(),
            &ground_truth.translation3()
        )
        .value
    );
    Ok(())
}
