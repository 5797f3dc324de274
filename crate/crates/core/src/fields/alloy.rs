//! Alloy-type random fields: V(x) = sum_j lambda_j u0(x - j) with i.i.d.
//! coupling strengths on the integer lattice and a fixed single-site profile.

use super::{DensityKind, FieldRealization, OneParameterDecomposition};
use crate::grid::GridSpec;
use crate::seed::{site_index, stream, StreamTag};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Distribution of the i.i.d. coupling strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CouplingLaw {
    /// Uniform density on `[support.0, support.1]` (subset of the positive
    /// half-line); the density bound is 1/width.
    Uniform { support: (f64, f64) },
    /// Two-sided exponential density exp(-|x|/scale) / (2 scale).
    Laplace { scale: f64 },
    /// Deterministic coupling; admits no Lebesgue density.
    Degenerate { value: f64 },
}

impl CouplingLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            CouplingLaw::Uniform { support: (a, b) } => {
                if !(*a >= 0.0 && b >= a && a.is_finite() && b.is_finite()) {
                    return Err(Error::Model(format!(
                        "uniform support [{a}, {b}] must satisfy 0 <= a <= b"
                    )));
                }
            }
            CouplingLaw::Laplace { scale } => {
                if !(*scale > 0.0) {
                    return Err(Error::Model(format!("Laplace scale {scale} must be > 0")));
                }
            }
            CouplingLaw::Degenerate { value } => {
                if !value.is_finite() {
                    return Err(Error::Model("degenerate coupling must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Sup norm of the Lebesgue density, when one exists.
    pub fn density_sup(&self) -> Option<f64> {
        match self {
            CouplingLaw::Uniform { support: (a, b) } if b > a => Some(1.0 / (b - a)),
            CouplingLaw::Laplace { scale } => Some(1.0 / (2.0 * scale)),
            _ => None,
        }
    }

    /// The constant R of the Wegner hypothesis:
    /// sup_xi rho(xi) max{exp(-beta v1 xi), exp(-beta v2 xi)}.
    ///
    /// For densities supported on the positive half-line this is the density
    /// bound itself; for the Laplace law it is finite only when
    /// beta <= 1 / (scale * v2).
    pub fn wegner_density_bound(&self, beta: f64, v2: f64) -> Result<f64> {
        match self {
            CouplingLaw::Uniform { .. } => self
                .density_sup()
                .ok_or_else(|| Error::NoDecomposition("degenerate uniform support".into())),
            CouplingLaw::Laplace { scale } => {
                let limit = 1.0 / (scale * v2);
                if beta > limit {
                    return Err(Error::OutsideAdmissibleBeta { beta, limit });
                }
                Ok(1.0 / (2.0 * scale))
            }
            CouplingLaw::Degenerate { .. } => {
                Err(Error::NoDecomposition("degenerate coupling law has no density".into()))
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            CouplingLaw::Uniform { support: (a, b) } => {
                if b > a {
                    a + (b - a) * rng.random::<f64>()
                } else {
                    *a
                }
            }
            CouplingLaw::Laplace { scale } => {
                // Inverse CDF of the two-sided exponential.
                let u: f64 = rng.random::<f64>() - 0.5;
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
            CouplingLaw::Degenerate { value } => *value,
        }
    }
}

/// Single-site potential u0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SingleSite {
    /// Height `v` on the open unit cube around the origin, zero outside.
    Indicator { height: f64 },
    /// Piecewise-constant profile on a cell-centered box of its own spacing,
    /// centered at the origin; zero outside the box.
    Tabulated {
        dim: usize,
        spacing: f64,
        shape: [usize; 3],
        values: Vec<f64>,
    },
}

impl SingleSite {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            SingleSite::Indicator { height } => {
                if !(*height > 0.0) {
                    return Err(Error::Model(format!("indicator height {height} must be > 0")));
                }
            }
            SingleSite::Tabulated {
                dim: d,
                spacing,
                shape,
                values,
            } => {
                if *d != dim {
                    return Err(Error::Model("profile dimension mismatch".into()));
                }
                if !(*spacing > 0.0) {
                    return Err(Error::Model("profile spacing must be > 0".into()));
                }
                let n: usize = shape[..dim].iter().product();
                if values.len() != n {
                    return Err(Error::Model("profile value count does not match shape".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Model("profile contains non-finite values".into()));
                }
            }
        }
        Ok(())
    }

    /// Evaluate at an offset from the site center. The unit-cube indicator is
    /// the indicator of the open cube, so points on the boundary map to zero.
    pub fn eval(&self, offset: [f64; 3], dim: usize) -> f64 {
        match self {
            SingleSite::Indicator { height } => {
                if (0..dim).all(|k| offset[k].abs() < 0.5) {
                    *height
                } else {
                    0.0
                }
            }
            SingleSite::Tabulated {
                spacing,
                shape,
                values,
                ..
            } => {
                let mut idx = [0usize; 3];
                for k in 0..dim {
                    let half = shape[k] as f64 * spacing / 2.0;
                    let t = (offset[k] + half) / spacing;
                    if t <= 0.0 || t >= shape[k] as f64 {
                        return 0.0;
                    }
                    idx[k] = t.floor() as usize;
                }
                let lin = idx[0] + shape[0] * (idx[1] + shape[1] * idx[2]);
                values[lin]
            }
        }
    }

    /// Half-extent of the support per axis, in length units.
    pub fn half_extent(&self, dim: usize) -> f64 {
        match self {
            SingleSite::Indicator { .. } => 0.5,
            SingleSite::Tabulated { spacing, shape, .. } => (0..dim)
                .map(|k| shape[k] as f64 * spacing / 2.0)
                .fold(0.0, f64::max),
        }
    }

    /// Extra unit cells around the box whose sites can still reach into it.
    pub fn halo_cells(&self, dim: usize) -> i64 {
        ((self.half_extent(dim) - 0.5).ceil() as i64).max(0)
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            SingleSite::Indicator { height } => *height,
            SingleSite::Tabulated { values, .. } => {
                values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
            }
        }
    }

    /// Extremes of u0 over the open unit cube around the origin (the As
    /// condition bounds). Piecewise-constant profiles make these exact cell
    /// extremes; the builtin indicator is constant there.
    pub fn bounds_on_unit_cell(&self, dim: usize) -> (f64, f64) {
        match self {
            SingleSite::Indicator { height } => (*height, *height),
            SingleSite::Tabulated {
                spacing,
                shape,
                values,
                ..
            } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let n: usize = shape[..dim].iter().product();
                for lin in 0..n {
                    let mut rest = lin;
                    let mut inside = true;
                    for k in 0..dim {
                        let i = rest % shape[k];
                        rest /= shape[k];
                        let half = shape[k] as f64 * spacing / 2.0;
                        let cell_lo = -half + i as f64 * spacing;
                        let cell_hi = cell_lo + spacing;
                        // cell must intersect the open cube (-1/2, 1/2)
                        if cell_hi <= -0.5 || cell_lo >= 0.5 {
                            inside = false;
                            break;
                        }
                    }
                    if inside {
                        lo = lo.min(values[lin]);
                        hi = hi.max(values[lin]);
                    }
                }
                (lo, hi)
            }
        }
    }
}

/// Alloy-type random field model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlloyModel {
    pub dim: usize,
    pub single_site: SingleSite,
    pub coupling: CouplingLaw,
    /// Declared lower bound of u0 on the unit cell (v1 > 0).
    pub v1: f64,
    /// Declared upper bound of u0 on the unit cell (v2 >= v1).
    pub v2: f64,
}

impl AlloyModel {
    pub fn new(
        dim: usize,
        single_site: SingleSite,
        coupling: CouplingLaw,
        v1: f64,
        v2: f64,
    ) -> Result<Self> {
        let model = AlloyModel {
            dim,
            single_site,
            coupling,
            v1,
            v2,
        };
        model.validate()?;
        Ok(model)
    }

    /// Unit-cube indicator sites with i.i.d. couplings; v1 = v2 = height.
    pub fn indicator(dim: usize, height: f64, coupling: CouplingLaw) -> Result<Self> {
        Self::new(dim, SingleSite::Indicator { height }, coupling, height, height)
    }

    pub fn validate(&self) -> Result<()> {
        self.coupling.validate()?;
        self.single_site.validate(self.dim)?;
        if !(self.v1 > 0.0 && self.v2 >= self.v1) {
            return Err(Error::Model(format!(
                "bounds must satisfy 0 < v1 <= v2, got v1={}, v2={}",
                self.v1, self.v2
            )));
        }
        let (lo, hi) = self.single_site.bounds_on_unit_cell(self.dim);
        if lo < self.v1 - 1e-12 || hi > self.v2 + 1e-12 {
            return Err(Error::Model(format!(
                "single-site profile violates declared bounds: range [{lo}, {hi}] vs [v1, v2] = [{}, {}]",
                self.v1, self.v2
            )));
        }
        Ok(())
    }

    /// Lattice sites whose single-site support can intersect the box.
    pub fn sites(&self, grid: &GridSpec) -> Vec<[i64; 3]> {
        grid.lattice_sites(self.single_site.halo_cells(self.dim))
    }
}

/// Coupling strength of one lattice site, recovered from the seed without
/// sampling the rest of the field.
pub fn alloy_coupling(model: &AlloyModel, seed: u64, site: [i64; 3]) -> f64 {
    let mut rng = stream(seed, StreamTag::AlloyCoupling, site_index(site));
    model.coupling.sample(&mut rng)
}

/// Sample an alloy-type field on the grid.
///
/// The grid side must be an integer number of unit cells so that the box has
/// the unit-cell form required by the decomposition machinery.
pub fn sample_alloy(model: &AlloyModel, grid: &GridSpec, seed: u64) -> Result<FieldRealization> {
    model.validate()?;
    if grid.dim() != model.dim {
        return Err(Error::Model(format!(
            "model dimension {} does not match grid dimension {}",
            model.dim,
            grid.dim()
        )));
    }
    if !grid.has_integer_sides() {
        return Err(Error::NonIntegerSide { side: grid.side(0) });
    }
    let mut values = vec![0.0f64; grid.node_count()];
    for site in model.sites(grid) {
        let lambda = alloy_coupling(model, seed, site);
        if lambda == 0.0 {
            continue;
        }
        let center = [site[0] as f64, site[1] as f64, site[2] as f64];
        for (i, x) in grid.positions().enumerate() {
            let offset = crate::grid::sub(x, center);
            let u = model.single_site.eval(offset, model.dim);
            if u != 0.0 {
                values[i] += lambda * u;
            }
        }
    }
    FieldRealization::from_values(grid.clone(), values, seed, "alloy")
}

/// (U_j, lambda_j, u_j, rho)-decomposition of an alloy realization at site j.
pub fn decompose_alloy(
    realization: &FieldRealization,
    model: &AlloyModel,
    site: [i64; 3],
) -> Result<OneParameterDecomposition> {
    let grid = realization.grid();
    if !model.sites(grid).contains(&site) {
        return Err(Error::UnknownSite { site });
    }
    let density = match &model.coupling {
        CouplingLaw::Uniform { .. } => DensityKind::UniformBounded {
            sup: model
                .coupling
                .density_sup()
                .ok_or_else(|| Error::NoDecomposition("zero-width uniform support".into()))?,
        },
        CouplingLaw::Laplace { scale } => DensityKind::Laplace { scale: *scale },
        CouplingLaw::Degenerate { .. } => {
            return Err(Error::NoDecomposition(
                "degenerate coupling law has no Lebesgue density".into(),
            ))
        }
    };
    let lambda = alloy_coupling(model, realization.seed(), site);
    let center = [site[0] as f64, site[1] as f64, site[2] as f64];
    let profile: Vec<f64> = grid
        .positions()
        .map(|x| model.single_site.eval(crate::grid::sub(x, center), model.dim))
        .collect();
    let background: Vec<f64> = realization
        .values()
        .iter()
        .zip(&profile)
        .map(|(v, u)| v - lambda * u)
        .collect();
    Ok(OneParameterDecomposition {
        background: FieldRealization::from_values(
            grid.clone(),
            background,
            realization.seed(),
            "alloy-background",
        )?,
        lambda,
        profile,
        density,
    })
}
