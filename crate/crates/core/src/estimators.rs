//! Monte Carlo estimation of disorder-averaged spectral quantities.
//!
//! Realization r of an ensemble uses seed `base_seed XOR r`. Realizations are
//! embarrassingly parallel; reductions always run in fixed index order, so
//! results are bit-identical whether the ensemble is evaluated serially or on
//! any number of workers.

use crate::fields::{
    decompose_alloy, decompose_gaussian, sample_alloy, AlloyModel, CovarianceModel,
    FieldRealization, GaussianSampler,
};
use crate::grid::GridSpec;
use crate::operator::{BoundaryCondition, ConstantFieldGauge, HermitianOperator};
use crate::seed::realization_seed;
use crate::spectral::{self, EnergyInterval, Spectrum};
use crate::{Error, Result};
use rayon::prelude::*;

/// Random-potential model of an ensemble. The background variants sample the
/// full field and return the background U of its one-parameter decomposition.
#[derive(Debug, Clone)]
pub enum FieldModel {
    Zero,
    Alloy(AlloyModel),
    Gaussian(CovarianceModel),
    AlloyBackground { model: AlloyModel, site: [i64; 3] },
    GaussianBackground { model: CovarianceModel, s: f64 },
}

impl FieldModel {
    pub fn tag(&self) -> &'static str {
        match self {
            FieldModel::Zero => "zero",
            FieldModel::Alloy(_) => "alloy",
            FieldModel::Gaussian(_) => "gaussian",
            FieldModel::AlloyBackground { .. } => "alloy-background",
            FieldModel::GaussianBackground { .. } => "gaussian-background",
        }
    }
}

/// Prepared sampler for repeated draws on one grid (Gaussian factorizations
/// are computed once).
enum PreparedModel<'a> {
    Zero,
    Alloy(&'a AlloyModel),
    Gaussian(GaussianSampler),
    AlloyBackground { model: &'a AlloyModel, site: [i64; 3] },
    GaussianBackground { sampler: GaussianSampler, model: &'a CovarianceModel, s: f64 },
}

impl<'a> PreparedModel<'a> {
    fn new(model: &'a FieldModel, grid: &GridSpec) -> Result<Self> {
        Ok(match model {
            FieldModel::Zero => PreparedModel::Zero,
            FieldModel::Alloy(m) => PreparedModel::Alloy(m),
            FieldModel::Gaussian(m) => PreparedModel::Gaussian(GaussianSampler::new(m, grid)?),
            FieldModel::AlloyBackground { model, site } => PreparedModel::AlloyBackground {
                model,
                site: *site,
            },
            FieldModel::GaussianBackground { model, s } => PreparedModel::GaussianBackground {
                sampler: GaussianSampler::new(model, grid)?,
                model,
                s: *s,
            },
        })
    }

    fn sample(&self, grid: &GridSpec, seed: u64) -> Result<Option<FieldRealization>> {
        Ok(match self {
            PreparedModel::Zero => None,
            PreparedModel::Alloy(m) => Some(sample_alloy(m, grid, seed)?),
            PreparedModel::Gaussian(s) => Some(s.sample(seed)),
            PreparedModel::AlloyBackground { model, site } => {
                let field = sample_alloy(model, grid, seed)?;
                Some(decompose_alloy(&field, model, *site)?.background)
            }
            PreparedModel::GaussianBackground { sampler, model, s } => {
                let field = sampler.sample(seed);
                Some(decompose_gaussian(model, &field, *s)?.background)
            }
        })
    }
}

/// Ensemble of random finite-volume operators.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub model: FieldModel,
    pub grid: GridSpec,
    pub gauge: ConstantFieldGauge,
    pub bc: BoundaryCondition,
    pub realizations: usize,
    pub base_seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Model("ensemble needs at least one realization".into()));
        }
        Ok(())
    }

    pub fn seed_for(&self, r: usize) -> u64 {
        realization_seed(self.base_seed, r)
    }

    /// Eigenvalues of realization r.
    pub fn spectrum(&self, r: usize) -> Result<Spectrum> {
        let prepared = PreparedModel::new(&self.model, &self.grid)?;
        self.spectrum_with(&prepared, r)
    }

    fn spectrum_with(&self, prepared: &PreparedModel, r: usize) -> Result<Spectrum> {
        let seed = self.seed_for(r);
        let run = || -> Result<Spectrum> {
            let field = prepared.sample(&self.grid, seed)?;
            let op = HermitianOperator::assemble(&self.grid, self.bc, &self.gauge, field.as_ref())?;
            spectral::eigenvalues(&op)
        };
        run().map_err(|e| e.with_seed(seed))
    }

    /// Map every realization's spectrum through `f`, in parallel, collecting
    /// results in realization order.
    pub fn map_spectra<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &Spectrum) -> T + Sync,
    {
        self.validate()?;
        let prepared = PreparedModel::new(&self.model, &self.grid)?;
        (0..self.realizations)
            .into_par_iter()
            .map(|r| {
                let spec = self.spectrum_with(&prepared, r)?;
                Ok(f(r, &spec))
            })
            .collect()
    }

    /// Map every sampled potential through `f`, in parallel, collecting
    /// results in realization order. `None` is the zero potential.
    pub fn map_fields<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, Option<&FieldRealization>) -> Result<T> + Sync,
    {
        self.validate()?;
        let prepared = PreparedModel::new(&self.model, &self.grid)?;
        (0..self.realizations)
            .into_par_iter()
            .map(|r| {
                let seed = self.seed_for(r);
                let run = || -> Result<T> {
                    let field = prepared.sample(&self.grid, seed)?;
                    f(r, field.as_ref())
                };
                run().map_err(|e| e.with_seed(seed))
            })
            .collect()
    }
}

/// Mean and standard error of a Monte Carlo sample.
#[derive(Debug, Clone)]
pub struct MCResult {
    pub mean: f64,
    pub std_error: f64,
    pub realizations: usize,
    pub values: Option<Vec<f64>>,
}

impl MCResult {
    /// Reduce per-realization values in index order.
    pub fn from_values(values: Vec<f64>, keep_values: bool) -> Self {
        let r = values.len();
        let mean = values.iter().sum::<f64>() / r as f64;
        let std_error = if r > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
            (var / r as f64).sqrt()
        } else {
            0.0
        };
        MCResult {
            mean,
            std_error,
            realizations: r,
            values: keep_values.then_some(values),
        }
    }
}

/// Monte Carlo mean of the eigenvalue count nu(I) over the ensemble.
pub fn expected_counting(spec: &EnsembleSpec, interval: &EnergyInterval) -> Result<MCResult> {
    let counts = spec.map_spectra(|_, s| {
        spectral::count_in_interval(s, interval, spec.grid.volume()).count as f64
    })?;
    Ok(MCResult::from_values(counts, false))
}

/// Monte Carlo mean of the finite-volume integrated density of states at each
/// probe energy. Energies must be ascending; the per-realization curve is a
/// nondecreasing step function, so the means are too.
pub fn ids_curve(spec: &EnsembleSpec, energies: &[f64]) -> Result<Vec<MCResult>> {
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Model("probe energies must be strictly ascending".into()));
    }
    let volume = spec.grid.volume();
    let per_real: Vec<Vec<f64>> = spec.map_spectra(|_, s| {
        energies
            .iter()
            .map(|&e| spectral::finite_volume_ids(s, e, volume))
            .collect()
    })?;
    Ok((0..energies.len())
        .map(|k| {
            let column: Vec<f64> = per_real.iter().map(|row| row[k]).collect();
            MCResult::from_values(column, false)
        })
        .collect())
}

/// Outcome of the Chebyshev-Markov self-check: the empirical frequency of
/// {nu >= 1} must not exceed the empirical mean of nu (up to 3 combined
/// standard errors).
#[derive(Debug, Clone)]
pub struct ChebyshevReport {
    pub frequency: MCResult,
    pub mean_count: MCResult,
    pub margin: f64,
    pub pass: bool,
}

pub fn chebyshev_check(spec: &EnsembleSpec, interval: &EnergyInterval) -> Result<ChebyshevReport> {
    let counts = spec.map_spectra(|_, s| {
        spectral::count_in_interval(s, interval, spec.grid.volume()).count as f64
    })?;
    let hits: Vec<f64> = counts.iter().map(|&c| if c >= 1.0 { 1.0 } else { 0.0 }).collect();
    let frequency = MCResult::from_values(hits, false);
    let mean_count = MCResult::from_values(counts, false);
    let band = 3.0 * (frequency.std_error.powi(2) + mean_count.std_error.powi(2)).sqrt();
    let margin = frequency.mean - mean_count.mean - band;
    Ok(ChebyshevReport {
        pass: margin <= 0.0,
        frequency,
        mean_count,
        margin,
    })
}
