//! A small outlier-ratio sweep: repeated line registrations per ratio,
//! CSV rows plus per-ratio medians.

use graffreg::cost::FeatureKind;
use graffreg::solver::SolverConfig;
use graffreg::synth::bench::{run_benchmark, BenchConfig};

fn main() -> graffreg::Result<()> {
    let cfg = BenchConfig {
        kind: FeatureKind::LineLine,
        ratios: vec![0.0, 0.4, 0.8],
        repeats: 10,
        n_pairs: 40,
        noise_sigma_ang: 0.003,
        noise_sigma_pos: 0.01,
        solver: SolverConfig {
            epsilon_r: 1e-3,
            ..Default::default()
        },
        rng_seed: 1,
        ..Default::default()
    };
    let report = run_benchmark(&cfg)?;
    print!("{}", report.to_csv());
    println!();
    print!("{}", report.summary_text());
    Ok(())
}
