//! Versioned JSON configuration schema for the command-line tools.
//!
//! Unknown keys are rejected so that typos surface as configuration errors
//! (exit code 2 in the CLI) instead of silently changing an experiment.

use crate::estimators::FieldModel;
use crate::fields::{AlloyModel, CouplingLaw, CovarianceModel, SingleSite};
use crate::grid::GridSpec;
use crate::operator::{BoundaryCondition, ConstantFieldGauge};
use crate::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn check_schema_version(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(config_err(format!(
            "schema_version {version} is not supported (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

/// Read a JSON config file. A run-manifest file (with a `config` snapshot)
/// can be passed in place of a config; the snapshot is extracted so that
/// re-running a manifest reproduces the original run.
pub fn load<T: DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let payload = match value.get("config") {
        Some(snapshot) if value.get("tool_version").is_some() => snapshot.clone(),
        _ => value,
    };
    serde_json::from_value(payload).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSiteConfig {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl SingleSiteConfig {
    fn to_single_site(&self, dim: usize) -> Result<SingleSite> {
        match self.kind.as_str() {
            "indicator" => Ok(SingleSite::Indicator {
                height: self.height.unwrap_or(1.0),
            }),
            "tabulated" => {
                let spacing = self
                    .spacing
                    .ok_or_else(|| config_err("tabulated single_site needs 'spacing'"))?;
                let shape_vec = self
                    .shape
                    .clone()
                    .ok_or_else(|| config_err("tabulated single_site needs 'shape'"))?;
                if shape_vec.len() != dim {
                    return Err(config_err("single_site shape length must equal the dimension"));
                }
                let mut shape = [1usize; 3];
                shape[..dim].copy_from_slice(&shape_vec);
                Ok(SingleSite::Tabulated {
                    dim,
                    spacing,
                    shape,
                    values: self
                        .values
                        .clone()
                        .ok_or_else(|| config_err("tabulated single_site needs 'values'"))?,
                })
            }
            other => Err(config_err(format!("unknown single_site kind '{other}'"))),
        }
    }
}

/// Random-field model description. `kind` selects alloy or gaussian; the
/// remaining keys apply to the matching kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_site: Option<SingleSiteConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v2: Option<f64>,
}

impl FieldConfig {
    pub fn to_model(&self, dim: usize) -> Result<FieldModel> {
        match self.kind.as_str() {
            "alloy" => Ok(FieldModel::Alloy(self.to_alloy(dim)?)),
            "gaussian" => Ok(FieldModel::Gaussian(self.to_covariance(dim)?)),
            other => Err(config_err(format!("unknown field kind '{other}'"))),
        }
    }

    pub fn to_alloy(&self, dim: usize) -> Result<AlloyModel> {
        if self.kind != "alloy" {
            return Err(config_err("field kind must be 'alloy'"));
        }
        let coupling = match (self.alpha, self.support, self.gmax) {
            (Some(alpha), None, None) => CouplingLaw::Laplace { scale: alpha },
            (None, Some([a, b]), gmax) => {
                if a == b {
                    CouplingLaw::Degenerate { value: a }
                } else {
                    if let Some(g) = gmax {
                        let implied = 1.0 / (b - a);
                        if (g - implied).abs() > 1e-9 * implied {
                            return Err(config_err(format!(
                                "gmax {g} contradicts support width (implies {implied})"
                            )));
                        }
                    }
                    CouplingLaw::Uniform { support: (a, b) }
                }
            }
            (None, None, Some(g)) => CouplingLaw::Uniform {
                support: (0.0, 1.0 / g),
            },
            _ => {
                return Err(config_err(
                    "alloy coupling needs exactly one of 'alpha' (Laplace) or 'support'/'gmax' (uniform)",
                ))
            }
        };
        let single_site = self
            .single_site
            .as_ref()
            .map(|s| s.to_single_site(dim))
            .transpose()?
            .unwrap_or(SingleSite::Indicator { height: 1.0 });
        let (lo, hi) = single_site.bounds_on_unit_cell(dim);
        let v1 = self.v1.unwrap_or(lo);
        let v2 = self.v2.unwrap_or(hi);
        AlloyModel::new(dim, single_site, coupling, v1, v2)
    }

    pub fn to_covariance(&self, dim: usize) -> Result<CovarianceModel> {
        if self.kind != "gaussian" {
            return Err(config_err("field kind must be 'gaussian'"));
        }
        let c0 = self.c0.ok_or_else(|| config_err("gaussian field needs 'c0'"))?;
        let tau = self.tau.ok_or_else(|| config_err("gaussian field needs 'tau'"))?;
        CovarianceModel::gaussian(dim, c0, tau)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dimension: usize,
    pub cells: usize,
    pub spacing: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<GridSpec> {
        match &self.origin {
            None => GridSpec::cube(self.dimension, self.cells, self.spacing),
            Some(o) => {
                if o.len() != self.dimension {
                    return Err(config_err("origin length must equal the dimension"));
                }
                let mut origin = [0.0; 3];
                origin[..o.len()].copy_from_slice(o);
                GridSpec::boxed(self.dimension, [self.cells; 3], self.spacing, origin)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    /// perpendicular field strength B_12 (two dimensions)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// full antisymmetric tensor, row-major d x d
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<f64>>>,
}

impl GaugeConfig {
    pub fn to_gauge(&self, dim: usize) -> Result<ConstantFieldGauge> {
        match (&self.b, &self.components) {
            (None, None) => Ok(ConstantFieldGauge::zero(dim)),
            (Some(b), None) => {
                if *b == 0.0 {
                    Ok(ConstantFieldGauge::zero(dim))
                } else if dim == 2 {
                    Ok(ConstantFieldGauge::perpendicular(*b))
                } else {
                    Err(config_err("scalar 'b' only defines a gauge in two dimensions"))
                }
            }
            (None, Some(rows)) => {
                let mut b = [[0.0; 3]; 3];
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(config_err("gauge components must be a d x d matrix"));
                }
                for (j, row) in rows.iter().enumerate() {
                    for (k, &v) in row.iter().enumerate() {
                        b[j][k] = v;
                    }
                }
                ConstantFieldGauge::new(dim, b)
            }
            (Some(_), Some(_)) => Err(config_err("give either 'b' or 'components', not both")),
        }
    }
}

/// `field sample` configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSampleConfig {
    pub schema_version: u32,
    pub field: FieldConfig,
    pub grid: GridConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGridConfig {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl EnergyGridConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.steps < 2 || !(self.min < self.max) {
            return Err(config_err("energy grid needs min < max and steps >= 2"));
        }
        Ok((0..self.steps)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64)
            .collect())
    }
}

/// `ids run` configuration: one IDS curve per cube size and boundary
/// condition, with Cauchy differences between successive sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsConfig {
    pub schema_version: u32,
    pub dimension: usize,
    pub field: FieldConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeConfig>,
    /// "D", "N" or "both"
    pub boundary: String,
    pub realizations: usize,
    pub base_seed: u64,
    pub spacing: f64,
    /// side lengths (unit cells) of the cube ladder
    pub cube_sides: Vec<usize>,
    pub energies: EnergyGridConfig,
    /// adds a Landau staircase reference column for this field strength
    #[serde(skip_serializing_if = "Option::is_none")]
    pub staircase_b: Option<f64>,
}

impl IdsConfig {
    pub fn boundaries(&self) -> Result<Vec<BoundaryCondition>> {
        match self.boundary.as_str() {
            "D" => Ok(vec![BoundaryCondition::Dirichlet]),
            "N" => Ok(vec![BoundaryCondition::Neumann]),
            "both" => Ok(vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann]),
            other => Err(config_err(format!("unknown boundary '{other}' (use D, N, both)"))),
        }
    }
}

/// `wegner` configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WegnerCliConfig {
    pub schema_version: u32,
    /// "alloy-uniform", "alloy-laplace" or "gauss"
    pub family: String,
    /// "eval", "minimize" or "asymptotics"
    pub mode: String,
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energies: Option<EnergyGridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    // fixed parameters for eval mode
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    // family constants
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_site: Option<SingleSiteConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    // asymptotics probes
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low_probes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high_probes: Option<Vec<f64>>,
}

impl WegnerCliConfig {
    /// The Fig-style preset: minimized Gaussian bound on E in [-0.5, 2.5]
    /// for unit field strength (disorder C(0) = (B/5)^2, correlation length
    /// 100 B^{-1/2}).
    pub fn fig1_preset() -> Self {
        WegnerCliConfig {
            schema_version: SCHEMA_VERSION,
            family: "gauss".to_string(),
            mode: "minimize".to_string(),
            dimension: 2,
            energies: Some(EnergyGridConfig {
                min: -0.5,
                max: 2.5,
                steps: 61,
            }),
            energy: None,
            beta: None,
            ell: None,
            s: None,
            gmax: None,
            v1: None,
            alpha: None,
            single_site: None,
            c0: Some(0.04),
            tau: Some(100.0),
            u0_value: None,
            low_probes: None,
            high_probes: None,
        }
    }

    pub fn to_family(&self) -> Result<crate::wegner::BoundFamily> {
        match self.family.as_str() {
            "alloy-uniform" => Ok(crate::wegner::BoundFamily::AlloyUniform {
                dim: self.dimension,
                g_max: self.gmax.ok_or_else(|| config_err("alloy-uniform needs 'gmax'"))?,
                v1: self.v1.ok_or_else(|| config_err("alloy-uniform needs 'v1'"))?,
            }),
            "alloy-laplace" => {
                let u0 = self
                    .single_site
                    .as_ref()
                    .map(|s| s.to_single_site(self.dimension))
                    .transpose()?
                    .unwrap_or(SingleSite::Indicator { height: 1.0 });
                Ok(crate::wegner::BoundFamily::AlloyLaplace {
                    dim: self.dimension,
                    alpha: self.alpha.ok_or_else(|| config_err("alloy-laplace needs 'alpha'"))?,
                    v1: self.v1.ok_or_else(|| config_err("alloy-laplace needs 'v1'"))?,
                    u0,
                })
            }
            "gauss" => Ok(crate::wegner::BoundFamily::Gauss {
                model: CovarianceModel::gaussian(
                    self.dimension,
                    self.c0.ok_or_else(|| config_err("gauss family needs 'c0'"))?,
                    self.tau.ok_or_else(|| config_err("gauss family needs 'tau'"))?,
                )?,
            }),
            other => Err(config_err(format!("unknown bound family '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alloy_config_roundtrip() {
        let json = r#"{
            "kind": "alloy",
            "support": [0.0, 1.0],
            "single_site": {"kind": "indicator", "height": 1.0},
            "v1": 1.0,
            "v2": 1.0
        }"#;
        let cfg: FieldConfig = serde_json::from_str(json).unwrap();
        let model = cfg.to_alloy(2).unwrap();
        assert_eq!(model.v1, 1.0);
        assert!(matches!(model.coupling, CouplingLaw::Uniform { .. }));
    }

    #[test]
    fn degenerate_support_means_deterministic_coupling() {
        let json = r#"{"kind": "alloy", "support": [0.0, 0.0]}"#;
        let cfg: FieldConfig = serde_json::from_str(json).unwrap();
        let model = cfg.to_alloy(2).unwrap();
        assert!(matches!(model.coupling, CouplingLaw::Degenerate { value } if value == 0.0));
    }

    #[test]
    fn gmax_contradiction_rejected() {
        let json = r#"{"kind": "alloy", "support": [0.0, 2.0], "gmax": 1.0}"#;
        let cfg: FieldConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.to_alloy(2).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let json = r#"{"kind": "gaussian", "c0": 1.0, "tau": 2.0, "bogus": 1}"#;
        assert!(serde_json::from_str::<FieldConfig>(json).is_err());
    }

    #[test]
    fn schema_version_gate() {
        assert!(check_schema_version(SCHEMA_VERSION).is_ok());
        assert!(check_schema_version(99).is_err());
    }

    #[test]
    fn fig1_preset_is_the_published_parameter_set() {
        let cfg = WegnerCliConfig::fig1_preset();
        assert_eq!(cfg.c0, Some(0.04));
        assert_eq!(cfg.tau, Some(100.0));
        let family = cfg.to_family().unwrap();
        assert_eq!(family.label(), "gauss");
    }
}
