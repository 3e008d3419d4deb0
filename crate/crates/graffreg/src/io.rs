//! JSON file formats: features, correspondences, and registration results.
//!
//! Features are stored canonicalized (orthonormal basis, orthogonal
//! displacement), so a write/read round trip reproduces every value
//! exactly; arbitrary direction/basis/anchor data is accepted on input
//! and canonicalized while parsing.

use std::path::Path;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::cost::CostBreakdown;
use crate::error::{Error, Result};
use crate::solver::RegistrationResult;
use crate::subspace::{AffineSubspace, RigidTransform};

pub const FEATURE_FILE_VERSION: u32 = 1;

/// One stored feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureItem {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<[[f64; 3]; 2]>,
    pub anchor: [f64; 3],
    pub id: String,
}

/// On-disk feature set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureFile {
    pub version: u32,
    pub ambient_dim: usize,
    pub items: Vec<FeatureItem>,
}

/// A parsed feature with its id.
#[derive(Debug, Clone)]
pub struct NamedFeature {
    pub id: String,
    pub feature: AffineSubspace,
}

fn schema_err(path: &Path, message: impl Into<String>) -> Error {
    Error::SchemaError {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Read and canonicalize a feature file.
pub fn parse_features(path: &Path) -> Result<Vec<NamedFeature>> {
    let text = std::fs::read_to_string(path)?;
    let file: FeatureFile =
        serde_json::from_str(&text).map_err(|e| schema_err(path, e.to_string()))?;
    if file.version != FEATURE_FILE_VERSION {
        return Err(schema_err(
            path,
            format!("unsupported version {} (expected {FEATURE_FILE_VERSION})", file.version),
        ));
    }
    if file.ambient_dim != 3 {
        return Err(schema_err(
            path,
            format!("unsupported ambient_dim {} (expected 3)", file.ambient_dim),
        ));
    }
    let mut out = Vec::with_capacity(file.items.len());
    for item in &file.items {
        let anchor = Vector3::from(item.anchor);
        let feature = match item.kind.as_str() {
            "line3d" => {
                let direction = item.direction.ok_or_else(|| {
                    schema_err(path, format!("item '{}': line3d requires a direction", item.id))
                })?;
                AffineSubspace::line3(Vector3::from(direction), anchor)
            }
            "plane3d" => {
                let basis = item.basis.ok_or_else(|| {
                    schema_err(path, format!("item '{}': plane3d requires a basis", item.id))
                })?;
                AffineSubspace::plane3(Vector3::from(basis[0]), Vector3::from(basis[1]), anchor)
            }
            "point3d" => Ok(AffineSubspace::point3(anchor)),
            other => {
                return Err(schema_err(
                    path,
                    format!("item '{}': unknown kind '{other}'", item.id),
                ))
            }
        }
        .map_err(|e| match e {
            Error::RankDeficient { context } => Error::RankDeficient {
                context: format!("item '{}': {context}", item.id),
            },
            e => e,
        })?;
        out.push(NamedFeature {
            id: item.id.clone(),
            feature,
        });
    }
    Ok(out)
}

/// Write features in canonical form.
pub fn write_features(path: &Path, features: &[NamedFeature]) -> Result<()> {
    let items = features
        .iter()
        .map(|nf| {
            let s = &nf.feature;
            let anchor: [f64; 3] = [s.displacement()[0], s.displacement()[1], s.displacement()[2]];
            match s.dim_sub() {
                0 => Ok(FeatureItem {
                    kind: "point3d".into(),
                    direction: None,
                    basis: None,
                    anchor,
                    id: nf.id.clone(),
                }),
                1 => Ok(FeatureItem {
                    kind: "line3d".into(),
                    direction: Some(column3(s.basis(), 0)),
                    basis: None,
                    anchor,
                    id: nf.id.clone(),
                }),
                2 => Ok(FeatureItem {
                    kind: "plane3d".into(),
                    direction: None,
                    basis: Some([column3(s.basis(), 0), column3(s.basis(), 1)]),
                    anchor,
                    id: nf.id.clone(),
                }),
                k => Err(Error::InvalidConfig(format!(
                    "feature '{}' has unsupported dimension {k}",
                    nf.id
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let file = FeatureFile {
        version: FEATURE_FILE_VERSION,
        ambient_dim: 3,
        items,
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

fn column3(m: &DMatrix<f64>, j: usize) -> [f64; 3] {
    [m[(0, j)], m[(1, j)], m[(2, j)]]
}

/// Read a correspondence file: a JSON array of `[target_id, source_id]`
/// pairs.
pub fn parse_correspondences(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let pairs: Vec<(String, String)> =
        serde_json::from_str(&text).map_err(|e| schema_err(path, e.to_string()))?;
    Ok(pairs)
}

pub fn write_correspondences(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(pairs)? + "\n")?;
    Ok(())
}

/// Cost summary stored in a result file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostSummary {
    pub f_sum: f64,
    pub g_sum: f64,
    pub total: f64,
}

impl From<&CostBreakdown> for CostSummary {
    fn from(c: &CostBreakdown) -> Self {
        Self {
            f_sum: c.f_sum(),
            g_sum: c.g_sum(),
            total: c.total,
        }
    }
}

/// Search statistics stored in a result file. `wall_time_ms` is zero
/// unless timing output was requested, keeping default outputs
/// byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsSummary {
    pub cubes_expanded: u64,
    pub bound_evaluations: u64,
    pub wall_time_ms: f64,
}

/// On-disk registration result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    /// Row-major 3×3 rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub inlier_ids: Vec<String>,
    pub cost: CostSummary,
    pub stats: StatsSummary,
}

impl ResultFile {
    pub fn from_result(
        result: &RegistrationResult,
        inlier_ids: Vec<String>,
        with_timing: bool,
    ) -> Self {
        let r = result.transform.rotation3();
        let t = result.transform.translation3();
        Self {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [t.x, t.y, t.z],
            inlier_ids,
            cost: CostSummary::from(&result.final_cost),
            stats: StatsSummary {
                cubes_expanded: result.stats.cubes_expanded,
                bound_evaluations: result.stats.bound_evaluations,
                wall_time_ms: if with_timing {
                    result.stats.wall_time.as_secs_f64() * 1e3
                } else {
                    0.0
                },
            },
        }
    }

    /// The stored transform, revalidated against the SO(3) invariants.
    pub fn transform(&self) -> Result<RigidTransform> {
        let mut rotation = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                rotation[(i, j)] = self.rotation[i][j];
            }
        }
        RigidTransform::new(rotation, DVector::from_column_slice(&self.translation))
    }
}

pub fn write_result(path: &Path, result: &ResultFile) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(result)? + "\n")?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<ResultFile> {
    let text = std::fs::read_to_string(path)?;
    let file: ResultFile =
        serde_json::from_str(&text).map_err(|e| schema_err(path, e.to_string()))?;
    file.transform()?;
    Ok(file)
}

/// Format a float with 17 significant digits (value-preserving for f64).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}
