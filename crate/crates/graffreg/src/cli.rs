//! Command-line driver: `register`, `bench`, and `curve` subcommands.
//!
//! Exit codes: 0 on success, 2 when registration finds no inliers, 3 on
//! parse/validation errors (missing files, schema violations, bad
//! flags), 1 on anything else. Errors go to stderr as
//! `error[<id>]: <message>`.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cost::{FeatureKind, FeaturePair};
use crate::curve::{closed_geodesic_report, Line2DParams};
use crate::error::{Error, Result};
use crate::io::{
    fmt_g17, parse_correspondences, parse_features, write_result, NamedFeature, ResultFile,
};
use crate::solver::{
    register_correspondence_free, register_with_correspondences, SolverConfig,
};
use crate::synth::bench::{run_benchmark, BenchConfig};

#[derive(Parser)]
#[command(
    name = "graffreg",
    version,
    about = "Register 3D lines and planes by geodesic distance minimization on the affine Grassmannian"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Globally optimal registration of a source feature file onto a target one.
    Register(RegisterArgs),
    /// Synthetic benchmark sweeping outlier ratios; emits CSV.
    Bench(BenchArgs),
    /// Curve-length analysis for 2D lines; emits JSON.
    Curve(CurveArgs),
}

fn parse_kind(s: &str) -> std::result::Result<FeatureKind, String> {
    match s {
        "l2l" => Ok(FeatureKind::LineLine),
        "l2p" => Ok(FeatureKind::LinePlane),
        "p2p" => Ok(FeatureKind::PlanePlane),
        other => Err(format!("unknown kind '{other}' (expected l2l, l2p, or p2p)")),
    }
}

#[derive(Args)]
struct RegisterArgs {
    /// Target feature file (JSON).
    #[arg(long)]
    target: PathBuf,
    /// Source feature file (JSON); the estimated transform maps sources onto targets.
    #[arg(long)]
    source: PathBuf,
    /// Pairing kind: l2l, l2p, or p2p.
    #[arg(long, value_parser = parse_kind)]
    kind: FeatureKind,
    /// Correspondence file: JSON array of [target_id, source_id] pairs.
    #[arg(long, conflicts_with = "free")]
    corr: Option<PathBuf>,
    /// Search correspondences as part of the optimization.
    #[arg(long)]
    free: bool,
    /// Inlier threshold on the squared residual angle (rad²).
    #[arg(long = "eps-r", default_value_t = 0.015)]
    eps_r: f64,
    /// Translation search gap-termination threshold.
    #[arg(long = "eps-t", default_value_t = 1e-6)]
    eps_t: f64,
    /// Half-side of the initial translation cube (default: bounding-box
    /// diagonal of the target displacements).
    #[arg(long = "t-halfside")]
    t_halfside: Option<f64>,
    /// Seed for randomized subroutines (the solver itself is deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (1 = single-threaded reference mode).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output result file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Record wall-clock time in the result (breaks byte-reproducibility).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Pairing kind: l2l, l2p, or p2p.
    #[arg(long, value_parser = parse_kind, default_value = "l2l")]
    kind: FeatureKind,
    /// Comma-separated outlier ratios, e.g. 0,0.4,0.8.
    #[arg(long, default_value = "0,0.2,0.4,0.6,0.8")]
    ratios: String,
    /// Registrations per ratio.
    #[arg(long, default_value_t = 50)]
    repeats: usize,
    /// Pairs per scene.
    #[arg(long = "n-pairs", default_value_t = 100)]
    n_pairs: usize,
    /// Angular noise sigma (radians) for l2l/p2p scenes.
    #[arg(long = "noise-ang", default_value_t = 0.003)]
    noise_ang: f64,
    /// Positional noise sigma (scene units) for l2l/p2p scenes.
    #[arg(long = "noise-pos", default_value_t = 0.01)]
    noise_pos: f64,
    /// Endpoint noise sigma (pixels) for l2p scenes.
    #[arg(long = "pixel-sigma", default_value_t = 1.0)]
    pixel_sigma: f64,
    /// Inlier threshold on the squared residual angle (rad²).
    #[arg(long = "eps-r", default_value_t = 4e-4)]
    eps_r: f64,
    /// Translation search gap-termination threshold.
    #[arg(long = "eps-t", default_value_t = 1e-6)]
    eps_t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (repeats run in parallel; results are order-stable).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock times in the CSV (breaks byte-reproducibility).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CurveArgs {
    /// First line as "a,b,c" of ax + by + c = 0.
    #[arg(long)]
    v1: String,
    /// Second line as "a,b,c".
    #[arg(long)]
    v2: String,
    /// Discretization samples.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Run the CLI on explicit arguments; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Register(args) => cmd_register(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Curve(args) => cmd_curve(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.id(), e);
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::EmptyInlierSet => 2,
        Error::Io(_)
        | Error::SchemaError { .. }
        | Error::RankDeficient { .. }
        | Error::InvalidConfig(_)
        | Error::ZeroVector
        | Error::DimensionMismatch { .. }
        | Error::MixedAmbientDims(..)
        | Error::SubspaceOrder { .. }
        | Error::DegenerateSegment { .. }
        | Error::EmptyInput(_)
        | Error::Json(_) => 3,
        _ => 1,
    }
}

fn init_threads(threads: usize) {
    if threads > 1 {
        // fails harmlessly if a pool already exists (e.g. repeated calls)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn check_kinds(features: &[NamedFeature], want: usize, role: &str) -> Result<()> {
    for nf in features {
        if nf.feature.dim_sub() != want {
            return Err(Error::InvalidConfig(format!(
                "{role} feature '{}' has dimension {} but the requested kind needs {}",
                nf.id,
                nf.feature.dim_sub(),
                want
            )));
        }
    }
    Ok(())
}

fn cmd_register(args: RegisterArgs) -> Result<()> {
    init_threads(args.threads);
    let targets = parse_features(&args.target)?;
    let sources = parse_features(&args.source)?;
    check_kinds(&targets, args.kind.target_dim(), "target")?;
    check_kinds(&sources, args.kind.source_dim(), "source")?;
    if args.corr.is_none() && !args.free {
        return Err(Error::InvalidConfig(
            "pass either --corr FILE or --free".into(),
        ));
    }
    let config = SolverConfig {
        epsilon_r: args.eps_r,
        epsilon_t: args.eps_t,
        initial_translation_halfside: args.t_halfside,
        rng_seed: args.seed,
        ..Default::default()
    };

    let (result, inlier_ids) = if let Some(corr_path) = &args.corr {
        let id_pairs = parse_correspondences(corr_path)?;
        if id_pairs.is_empty() {
            return Err(Error::EmptyInput("correspondence file has no pairs"));
        }
        let target_index: HashMap<&str, usize> = targets
            .iter()
            .enumerate()
            .map(|(i, nf)| (nf.id.as_str(), i))
            .collect();
        let source_index: HashMap<&str, usize> = sources
            .iter()
            .enumerate()
            .map(|(i, nf)| (nf.id.as_str(), i))
            .collect();
        let mut pairs = Vec::with_capacity(id_pairs.len());
        for (k, (tid, sid)) in id_pairs.iter().enumerate() {
            let &ti = target_index.get(tid.as_str()).ok_or_else(|| Error::SchemaError {
                path: corr_path.display().to_string(),
                message: format!("unknown target id '{tid}'"),
            })?;
            let &si = source_index.get(sid.as_str()).ok_or_else(|| Error::SchemaError {
                path: corr_path.display().to_string(),
                message: format!("unknown source id '{sid}'"),
            })?;
            pairs.push(FeaturePair::new(
                k,
                targets[ti].feature.clone(),
                sources[si].feature.clone(),
            )?);
        }
        let result = register_with_correspondences(&pairs, &config)?;
        let ids = result
            .inliers
            .iter()
            .map(|&k| format!("{}:{}", id_pairs[k].0, id_pairs[k].1))
            .collect();
        (result, ids)
    } else {
        let target_features: Vec<_> = targets.iter().map(|nf| nf.feature.clone()).collect();
        let source_features: Vec<_> = sources.iter().map(|nf| nf.feature.clone()).collect();
        let (result, matches) =
            register_correspondence_free(&target_features, &source_features, &config)?;
        let ids = result
            .inliers
            .iter()
            .map(|&k| {
                let (ti, si) = matches[k];
                format!("{}:{}", targets[ti].id, sources[si].id)
            })
            .collect();
        (result, ids)
    };

    let file = ResultFile::from_result(&result, inlier_ids, args.timing);
    write_result(&args.out, &file)?;

    let t = result.transform.translation3();
    println!(
        "inliers {} of input; translation [{}, {}, {}]; cost {}",
        result.inliers.len(),
        fmt_g17(t.x),
        fmt_g17(t.y),
        fmt_g17(t.z),
        fmt_g17(result.final_cost.total),
    );
    println!("result written to {}", args.out.display());
    Ok(())
}

fn parse_ratio_list(text: &str) -> Result<Vec<f64>> {
    let ratios = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad ratio '{s}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if ratios.is_empty() {
        return Err(Error::InvalidConfig("empty ratio list".into()));
    }
    for &r in &ratios {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidConfig(format!("ratio {r} outside [0, 1)")));
        }
    }
    Ok(ratios)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    init_threads(args.threads);
    let cfg = BenchConfig {
        kind: args.kind,
        ratios: parse_ratio_list(&args.ratios)?,
        repeats: args.repeats,
        n_pairs: args.n_pairs,
        noise_sigma_ang: args.noise_ang,
        noise_sigma_pos: args.noise_pos,
        pixel_sigma: args.pixel_sigma,
        solver: SolverConfig {
            epsilon_r: args.eps_r,
            epsilon_t: args.eps_t,
            rng_seed: args.seed,
            ..Default::default()
        },
        rng_seed: args.seed,
        timing: args.timing,
    };
    let report = run_benchmark(&cfg)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            println!("csv written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    print!("{}", report.summary_text());
    Ok(())
}

fn parse_vec3(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad component '{s}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "expected three components, got {}",
            parts.len()
        )));
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn cmd_curve(args: CurveArgs) -> Result<()> {
    let v1 = parse_vec3(&args.v1)?;
    let v2 = parse_vec3(&args.v2)?;
    let line1 = Line2DParams::new(v1[0], v1[1], v1[2])?;
    let line2 = Line2DParams::new(v2[0], v2[1], v2[2])?;
    let report = closed_geodesic_report(&line1, &line2, args.n)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => {
            std::fs::write(path, &json)?;
            println!("report written to {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}
