//! Random potentials on grid nodes: alloy-type fields, stationary Gaussian
//! fields, and their one-parameter (U, lambda, u, rho) decompositions.
//!
//! Samplers are pure functions of (model, grid, seed). Coupling strengths of
//! alloy fields come from per-site ChaCha streams derived from the seed and
//! the lattice site, so a decomposition can recover a single coupling without
//! re-sampling the field.

mod alloy;
mod gaussian;

pub use alloy::{alloy_coupling, decompose_alloy, sample_alloy, AlloyModel, CouplingLaw, SingleSite};
pub use gaussian::{
    background_variance, decompose_gaussian, gaussian_u_profile, sample_gaussian, CovarianceModel,
    CovarianceShape, GaussianMethod, GaussianSampler,
};

use crate::grid::{GridSpec, SubBox};
use crate::{Error, Result};

/// One sampled realization of a random potential on grid nodes.
#[derive(Debug, Clone)]
pub struct FieldRealization {
    grid: GridSpec,
    values: Vec<f64>,
    seed: u64,
    model_tag: String,
}

impl FieldRealization {
    /// Wrap raw node values; rejects non-finite entries.
    pub fn from_values(grid: GridSpec, values: Vec<f64>, seed: u64, tag: &str) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinitePotential { node });
        }
        Ok(FieldRealization {
            grid,
            values,
            seed,
            model_tag: tag.to_string(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    /// Restriction to a sub-box (values reindexed in the sub-grid's order).
    pub fn restrict(&self, sub: &SubBox) -> FieldRealization {
        let values = sub.parent_nodes.iter().map(|&i| self.values[i]).collect();
        FieldRealization {
            grid: sub.grid.clone(),
            values,
            seed: self.seed,
            model_tag: format!("{}|restricted", self.model_tag),
        }
    }

    /// Pointwise sum with another realization on the same grid.
    pub fn add(&self, other: &FieldRealization) -> Result<FieldRealization> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        FieldRealization::from_values(self.grid.clone(), values, self.seed, "sum")
    }
}

/// Conditional density of the scalar coupling in a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    /// Bounded Lebesgue density with the given sup norm.
    UniformBounded { sup: f64 },
    /// Two-sided exponential with the given scale.
    Laplace { scale: f64 },
    /// Standard normal (the Gaussian-field construction).
    StandardNormal,
}

/// Split V = U + lambda * u of a realization into a background field, a
/// scalar coupling and a fixed nonnegative profile.
#[derive(Debug, Clone)]
pub struct OneParameterDecomposition {
    pub background: FieldRealization,
    pub lambda: f64,
    pub profile: Vec<f64>,
    pub density: DensityKind,
}

impl OneParameterDecomposition {
    /// Nodewise U + lambda * u.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.background
            .values()
            .iter()
            .zip(&self.profile)
            .map(|(u, p)| u + self.lambda * p)
            .collect()
    }

    /// Largest relative deviation of U + lambda*u from the given realization.
    pub fn reconstruction_error(&self, field: &FieldRealization) -> f64 {
        let scale = field
            .values()
            .iter()
            .fold(1.0f64, |acc, v| acc.max(v.abs()));
        self.reconstruct()
            .iter()
            .zip(field.values())
            .map(|(r, v)| (r - v).abs() / scale)
            .fold(0.0, f64::max)
    }
}
