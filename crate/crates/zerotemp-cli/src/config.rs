//! Experiment configuration: a single versioned JSON file, schema 1.
//! Unknown fields are rejected everywhere (reproducibility over
//! forgiveness).

use std::fs;
use std::path::Path;

use serde::Deserialize;
use zerotemp::spectra::{Level, ParameterDomain, SpectrumModel, TablePoint, TruncationPolicy};
use zerotemp::thermo::EntropySurface;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Output directory; the `--out` flag overrides it.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub thermo_table: Option<ThermoTableCfg>,
    #[serde(default)]
    pub staircase: Option<StaircaseCfg>,
    #[serde(default)]
    pub b2_solve: Option<B2Cfg>,
    #[serde(default)]
    pub measure_ensemble: Option<MeasureEnsembleCfg>,
    #[serde(default)]
    pub equivalence_suite: Option<EquivalenceCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCfg {
    pub family: String,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    /// `degenerate_ground` only: a constant or a list of step points.
    #[serde(default)]
    pub ground_degeneracy: Option<GroundDegeneracyCfg>,
    /// `custom` only.
    #[serde(default)]
    pub table: Option<Vec<TablePointCfg>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum GroundDegeneracyCfg {
    Constant(u64),
    Steps(Vec<DegeneracyStepCfg>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegeneracyStepCfg {
    pub parameter: f64,
    pub degeneracy: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablePointCfg {
    pub parameter: f64,
    pub levels: Vec<LevelCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelCfg {
    pub energy: f64,
    pub degeneracy: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceCfg {
    pub model: ModelCfg,
    pub parameter: f64,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub tail_tolerance: Option<f64>,
    #[serde(default)]
    pub max_levels: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoTableCfg {
    pub model: ModelCfg,
    pub parameter: f64,
    pub temperatures: Vec<f64>,
    #[serde(default)]
    pub quad_tol: Option<f64>,
    #[serde(default)]
    pub tail_tolerance: Option<f64>,
    #[serde(default)]
    pub max_levels: Option<usize>,
    #[serde(default)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseCfg {
    pub surface_a: SurfaceCfg,
    pub surface_b: SurfaceCfg,
    pub t0: f64,
    pub t_target: f64,
    pub max_steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct B2Cfg {
    pub surface_alpha: SurfaceCfg,
    pub surface_beta: SurfaceCfg,
    #[serde(default)]
    pub bracket_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureEnsembleCfg {
    pub model: ModelCfg,
    pub parameter: f64,
    pub temperature: f64,
    pub trials: u64,
    #[serde(default)]
    pub tail_tolerance: Option<f64>,
    #[serde(default)]
    pub max_levels: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceCfg {
    pub n_models: usize,
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub bracket_max: Option<f64>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))?;
    if config.schema != SCHEMA_VERSION {
        return Err(CliError::Validation(format!(
            "unsupported schema {} (expected {SCHEMA_VERSION})",
            config.schema
        )));
    }
    Ok(config)
}

impl ModelCfg {
    pub fn build(&self) -> Result<SpectrumModel<f64>, CliError> {
        let domain = || -> Result<ParameterDomain<f64>, CliError> {
            let [lo, hi] = self.domain.ok_or_else(|| {
                CliError::Validation(format!("family {} requires a domain", self.family))
            })?;
            Ok(ParameterDomain::new(lo, hi)?)
        };
        let reject_table = || -> Result<(), CliError> {
            if self.table.is_some() {
                return Err(CliError::Validation(format!(
                    "family {} does not take a level table",
                    self.family
                )));
            }
            Ok(())
        };
        let reject_ground_w = || -> Result<(), CliError> {
            if self.ground_degeneracy.is_some() {
                return Err(CliError::Validation(format!(
                    "family {} does not take a ground degeneracy",
                    self.family
                )));
            }
            Ok(())
        };
        match self.family.as_str() {
            "two_level" => {
                reject_table()?;
                reject_ground_w()?;
                Ok(SpectrumModel::two_level(domain()?)?)
            }
            "harmonic" => {
                reject_table()?;
                reject_ground_w()?;
                Ok(SpectrumModel::harmonic(domain()?)?)
            }
            "box" => {
                reject_table()?;
                reject_ground_w()?;
                Ok(SpectrumModel::particle_box(domain()?)?)
            }
            "degenerate_ground" => {
                reject_table()?;
                let spec = self.ground_degeneracy.as_ref().ok_or_else(|| {
                    CliError::Validation("degenerate_ground requires a ground_degeneracy".into())
                })?;
                let domain = domain()?;
                match spec {
                    GroundDegeneracyCfg::Constant(w) => {
                        Ok(SpectrumModel::degenerate_ground(domain, *w)?)
                    }
                    GroundDegeneracyCfg::Steps(steps) => {
                        let steps = steps.iter().map(|s| (s.parameter, s.degeneracy)).collect();
                        Ok(SpectrumModel::degenerate_ground_steps(domain, steps)?)
                    }
                }
            }
            "custom" => {
                reject_ground_w()?;
                if self.domain.is_some() {
                    return Err(CliError::Validation(
                        "custom derives its domain from the table; drop the domain field".into(),
                    ));
                }
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Validation("custom requires a level table".into()))?;
                let table = table
                    .iter()
                    .map(|p| TablePoint {
                        parameter: p.parameter,
                        levels: p
                            .levels
                            .iter()
                            .map(|l| Level {
                                energy: l.energy,
                                degeneracy: l.degeneracy,
                            })
                            .collect(),
                    })
                    .collect();
                Ok(SpectrumModel::custom(table)?)
            }
            other => Err(CliError::Validation(format!("unknown family {other}"))),
        }
    }
}

pub fn policy(tail_tolerance: Option<f64>, max_levels: Option<usize>) -> TruncationPolicy<f64> {
    let mut policy = TruncationPolicy::default();
    if let Some(tol) = tail_tolerance {
        policy.tail_tolerance = tol;
    }
    if let Some(cap) = max_levels {
        policy.cap = cap;
    }
    policy
}

impl SurfaceCfg {
    pub fn build(&self) -> Result<EntropySurface<f64>, CliError> {
        let model = self.model.build()?;
        let policy = policy(self.tail_tolerance, self.max_levels);
        let t_max = self.t_max.unwrap_or(10.0);
        Ok(EntropySurface::for_model(
            &model,
            self.parameter,
            t_max,
            &policy,
        )?)
    }
}
