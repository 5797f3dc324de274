//! Closed-form Wegner-type upper bounds on the averaged eigenvalue count and
//! the density of states, their trace-bound ingredients Z1/Z2/Z3, numerical
//! minimization over the variational parameters, and the low/high-energy
//! asymptotics of the Gaussian bound.
//!
//! The master estimate bounds the disorder-averaged eigenvalue count in an
//! energy interval I by |box| |I| (R Z / v1) exp(beta sup I), where v1 bounds
//! the single-site profile from below on its cell, R bounds the coupling
//! density against the exponential weight, and Z bounds the averaged Neumann
//! partition function per cell volume. Specializations:
//!
//! - alloy couplings with bounded density g on the positive half-line:
//!   W(E) = (1 + (2 pi beta)^{-1/2})^d (||g||_inf / v1) exp(beta E),
//! - alloy couplings with a Laplace density of scale alpha:
//!   W(E) = (1 + (2 pi beta)^{-1/2})^d (1 - (beta alpha v1)^2) / (2 alpha v1)
//!          exp(beta E + K_beta),
//! - Gaussian fields with mollified decompositions:
//!   W(E) = (2/l + (2 pi beta)^{-1/2})^d exp(beta E + beta^2 C_l / 2)
//!          / (sqrt(2 pi C(0)) b_l).

use crate::estimators::{EnsembleSpec, MCResult};
use crate::fields::{background_variance, gaussian_u_profile, CovarianceModel, SingleSite};
use crate::grid::GridSpec;
use crate::operator::{BoundaryCondition, ConstantFieldGauge, HermitianOperator};
use crate::spectral::{self, EnergyInterval};
use crate::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// The five constants of the master estimate.
#[derive(Debug, Clone, Copy)]
pub struct WegnerConstants {
    pub v1: f64,
    pub v2: f64,
    pub beta: f64,
    /// R: bound on the weighted coupling density.
    pub density_sup: f64,
    /// Z: bound on the averaged Neumann partition function per cell volume.
    pub trace_bound: f64,
    pub dim: usize,
}

impl WegnerConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.v1 > 0.0 && self.v2 >= self.v1 && self.beta > 0.0 && self.trace_bound > 0.0) {
            return Err(Error::Model(
                "Wegner constants need v1 > 0, v2 >= v1, beta > 0, Z > 0".into(),
            ));
        }
        if !(self.density_sup >= 0.0) {
            return Err(Error::Model("density bound R must be >= 0".into()));
        }
        Ok(())
    }
}

/// Right-hand side of the master estimate:
/// |box| |I| (R Z / v1) exp(beta sup I).
pub fn wegner_rhs(c: &WegnerConstants, volume: f64, interval: &EnergyInterval) -> f64 {
    volume * interval.length() * c.density_sup * c.trace_bound / c.v1
        * (c.beta * interval.sup()).exp()
}

/// The fully explicit trace bound
/// Z3 = (cell_volume^{-1/d} + (2 pi beta)^{-1/2})^d * sup_x E[exp(-beta U(x))].
pub fn z3(beta: f64, cell_volume: f64, dim: usize, mgf_sup: f64) -> Result<f64> {
    if !(beta > 0.0 && cell_volume > 0.0 && mgf_sup > 0.0) || dim == 0 {
        return Err(Error::Model(
            "Z3 needs beta, cell volume, mgf bound > 0 and d >= 1".into(),
        ));
    }
    let free = cell_volume.powf(-1.0 / dim as f64) + (TAU * beta).powf(-0.5);
    Ok(free.powi(dim as i32) * mgf_sup)
}

/// Z1: Monte Carlo mean of the zero-field Neumann partition function of the
/// background field, per cell volume. The ensemble's gauge and boundary
/// condition are overridden to (0, Neumann).
pub fn z1_estimate(spec: &EnsembleSpec, beta: f64) -> Result<MCResult> {
    let mut cell_spec = spec.clone();
    cell_spec.gauge = ConstantFieldGauge::zero(spec.grid.dim());
    cell_spec.bc = BoundaryCondition::Neumann;
    let volume = cell_spec.grid.volume();
    let traces = cell_spec.map_spectra(|_, s| spectral::heat_trace(s, beta).map(|t| t / volume))?;
    let traces: Result<Vec<f64>> = traces.into_iter().collect();
    Ok(MCResult::from_values(traces?, false))
}

/// Z2: magnetic free Neumann partition function per cell volume, times the
/// moment-generating bound of the background field.
pub fn z2_estimate(free_magnetic: &HermitianOperator, beta: f64, mgf_sup: f64) -> Result<f64> {
    let grid = free_magnetic
        .grid()
        .ok_or_else(|| Error::Model("Z2 needs an operator with grid provenance".into()))?;
    let spec = spectral::eigenvalues(free_magnetic)?;
    Ok(spectral::heat_trace(&spec, beta)? / grid.volume() * mgf_sup)
}

/// sup_x E[exp(-beta U(x))] for a nonnegative background field.
pub fn mgf_sup_nonnegative() -> f64 {
    1.0
}

/// sup over grid nodes of E[exp(-beta U(x))] for the Gaussian background
/// U = V - lambda u: exp(beta^2 (C(0) - u(x)^2) / 2), maximized where the
/// profile is smallest.
pub fn mgf_sup_gaussian_background(
    model: &CovarianceModel,
    s: f64,
    grid: &GridSpec,
    beta: f64,
) -> Result<f64> {
    let mut max_var = 0.0f64;
    for x in grid.positions() {
        max_var = max_var.max(background_variance(model, s, x)?);
    }
    Ok((beta * beta * max_var / 2.0).exp())
}

/// Alloy bound for couplings with a bounded density on [0, inf):
/// (1 + (2 pi beta)^{-1/2})^d (g_max / v1) exp(beta E).
pub fn w_alloy_uniform(e: f64, dim: usize, beta: f64, g_max: f64, v1: f64) -> f64 {
    (1.0 + (TAU * beta).powf(-0.5)).powi(dim as i32) * g_max / v1 * (beta * e).exp()
}

/// K_beta = -inf over the unit cell of sum_j ln(1 - [beta alpha u0(x - j)]^2),
/// finite on 0 < beta < 1 / (alpha ||u0||_inf).
pub fn k_beta(u0: &SingleSite, dim: usize, alpha: f64, beta: f64) -> Result<f64> {
    let limit = 1.0 / (alpha * u0.sup_norm());
    if !(beta > 0.0 && beta < limit) {
        return Err(Error::OutsideAdmissibleBeta { beta, limit });
    }
    match u0 {
        // only the site of the cell itself contributes on the open unit cube
        SingleSite::Indicator { height } => Ok(-(1.0 - (beta * alpha * height).powi(2)).ln()),
        SingleSite::Tabulated { .. } => {
            // grid infimum over probe points of the open unit cube
            let probes_per_axis = if dim == 3 { 24 } else { 64 };
            let halo = u0.halo_cells(dim) + 1;
            let mut inf = f64::INFINITY;
            let mut idx = [0usize; 3];
            let probes = |i: usize| (i as f64 + 0.5) / probes_per_axis as f64 - 0.5;
            'outer: loop {
                let mut x = [0.0f64; 3];
                for k in 0..dim {
                    x[k] = probes(idx[k]);
                }
                let mut sum = 0.0;
                for site in sites_in_halo(dim, halo) {
                    let offset = [
                        x[0] - site[0] as f64,
                        x[1] - site[1] as f64,
                        x[2] - site[2] as f64,
                    ];
                    let u = u0.eval(offset, dim);
                    if u != 0.0 {
                        sum += (1.0 - (beta * alpha * u).powi(2)).ln();
                    }
                }
                inf = inf.min(sum);
                for k in 0..dim {
                    idx[k] += 1;
                    if idx[k] < probes_per_axis {
                        continue 'outer;
                    }
                    idx[k] = 0;
                }
                break;
            }
            Ok(-inf)
        }
    }
}

fn sites_in_halo(dim: usize, halo: i64) -> Vec<[i64; 3]> {
    let mut sites = Vec::new();
    let range = |k: usize| if k < dim { -halo..=halo } else { 0..=0 };
    for j2 in range(2) {
        for j1 in range(1) {
            for j0 in range(0) {
                sites.push([j0, j1, j2]);
            }
        }
    }
    sites
}

/// Alloy bound for Laplace-distributed couplings:
/// (1 + (2 pi beta)^{-1/2})^d (1 - (beta alpha v1)^2) / (2 alpha v1)
/// exp(beta E + K_beta).
pub fn w_alloy_laplace(e: f64, dim: usize, beta: f64, alpha: f64, v1: f64, k_beta: f64) -> f64 {
    (1.0 + (TAU * beta).powf(-0.5)).powi(dim as i32)
        * (1.0 - (beta * alpha * v1).powi(2))
        / (2.0 * alpha * v1)
        * (beta * e + k_beta).exp()
}

/// Constants of the Gaussian bound for a cube of edge `ell` and decomposition
/// parameter `s`.
#[derive(Debug, Clone, Copy)]
pub struct GaussBoundParams {
    pub c0: f64,
    pub ell: f64,
    pub s: f64,
    /// B_l = sup of u / sqrt(C(0)) over the cube.
    pub b_upper: f64,
    /// b_l = inf of u / sqrt(C(0)) over the cube (the effective gamma).
    pub b_lower: f64,
    /// C_l = C(0) (1 + B_l^2 - b_l^2).
    pub c_ell: f64,
    pub dim: usize,
}

/// Profile extrema over the origin-centered cube of edge `ell`. The profile
/// is radial, so the cube's image under |x| is exactly [0, sqrt(d) ell / 2]
/// and the extrema are one-dimensional.
pub fn gauss_constants(model: &CovarianceModel, s: f64, ell: f64) -> Result<GaussBoundParams> {
    if !(ell > 0.0) {
        return Err(Error::Model(format!("cube edge {ell} must be > 0")));
    }
    let d = model.dim;
    let sqrt_c0 = model.c0.sqrt();
    let r_corner = (d as f64).sqrt() * ell / 2.0;
    let (sup, inf) = match (&model.shape, s) {
        (crate::fields::CovarianceShape::Gaussian { tau }, _) => {
            // closed form: u is a radial Gaussian of width sqrt(tau^2 + s^2)
            // scaled by kappa(s); max at the center, min at the corner
            let center = gaussian_u_profile(model, s, [0.0; 3])?;
            let sigma2 = tau * tau + s * s;
            let corner = center * (-r_corner * r_corner / (2.0 * sigma2)).exp();
            (center, corner)
        }
        _ => {
            // radial probe over [0, r_corner]
            let n = 512;
            let mut sup = f64::NEG_INFINITY;
            let mut inf = f64::INFINITY;
            for i in 0..=n {
                let r = r_corner * i as f64 / n as f64;
                let u = gaussian_u_profile(model, s, [r, 0.0, 0.0])?;
                sup = sup.max(u);
                inf = inf.min(u);
            }
            (sup, inf)
        }
    };
    if !(inf > 0.0) {
        let max_ell = max_admissible_ell(model, s)?;
        return Err(Error::CubeNotContained { ell, max_ell });
    }
    let b_upper = sup / sqrt_c0;
    let b_lower = inf / sqrt_c0;
    Ok(GaussBoundParams {
        c0: model.c0,
        ell,
        s,
        b_upper,
        b_lower,
        c_ell: model.c0 * (1.0 + b_upper * b_upper - b_lower * b_lower),
        dim: d,
    })
}

/// Largest cube edge whose corner stays inside the positivity region of the
/// profile, found by bisection along the radial direction.
fn max_admissible_ell(model: &CovarianceModel, s: f64) -> Result<f64> {
    let d = model.dim as f64;
    let mut lo = 0.0f64;
    let mut hi = model.support_radius() * 4.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let u = gaussian_u_profile(model, s, [mid, 0.0, 0.0])?;
        if u > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(2.0 * lo / d.sqrt())
}

/// The Gaussian bound
/// W(E) = (2/l + (2 pi beta)^{-1/2})^d exp(beta E + beta^2 C_l / 2)
///        / (sqrt(2 pi C(0)) b_l).
pub fn w_gauss(e: f64, beta: f64, p: &GaussBoundParams) -> f64 {
    ln_w_gauss(e, beta, p).exp()
}

fn ln_w_gauss(e: f64, beta: f64, p: &GaussBoundParams) -> f64 {
    p.dim as f64 * (2.0 / p.ell + (TAU * beta).powf(-0.5)).ln() + beta * e
        + beta * beta * p.c_ell / 2.0
        - (TAU * p.c0).sqrt().ln()
        - p.b_lower.ln()
}

/// Bound family selected for minimization.
#[derive(Debug, Clone)]
pub enum BoundFamily {
    AlloyUniform {
        dim: usize,
        g_max: f64,
        v1: f64,
    },
    AlloyLaplace {
        dim: usize,
        alpha: f64,
        v1: f64,
        u0: SingleSite,
    },
    Gauss {
        model: CovarianceModel,
    },
}

impl BoundFamily {
    pub fn label(&self) -> &'static str {
        match self {
            BoundFamily::AlloyUniform { .. } => "alloy-uniform",
            BoundFamily::AlloyLaplace { .. } => "alloy-laplace",
            BoundFamily::Gauss { .. } => "gauss",
        }
    }

    /// Bound value at one parameter point. Infeasible points are errors; the
    /// search maps them to +infinity.
    pub fn eval(&self, e: f64, beta: f64, ell: Option<f64>, s: Option<f64>) -> Result<f64> {
        match self {
            BoundFamily::AlloyUniform { dim, g_max, v1 } => {
                Ok(w_alloy_uniform(e, *dim, beta, *g_max, *v1))
            }
            BoundFamily::AlloyLaplace { dim, alpha, v1, u0 } => {
                let kb = k_beta(u0, *dim, *alpha, beta)?;
                Ok(w_alloy_laplace(e, *dim, beta, *alpha, *v1, kb))
            }
            BoundFamily::Gauss { model } => {
                let p = gauss_constants(model, s.unwrap_or(0.0), ell.unwrap_or(1.0))?;
                Ok(w_gauss(e, beta, &p))
            }
        }
    }
}

/// Minimizing parameters of a bound at one energy.
#[derive(Debug, Clone, Copy)]
pub struct ArgMin {
    pub beta: f64,
    pub ell: Option<f64>,
    pub s: Option<f64>,
}

/// One point of a tabulated bound curve.
#[derive(Debug, Clone, Copy)]
pub struct BoundPoint {
    pub e: f64,
    pub w: f64,
    pub beta: f64,
    pub ell: Option<f64>,
    pub s: Option<f64>,
}

/// Tabulated upper bound with the minimizing parameters per energy.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    pub family: String,
    pub points: Vec<BoundPoint>,
}

struct SearchAxis {
    values: Vec<f64>,
}

impl SearchAxis {
    fn log_spaced(lo: f64, hi: f64, n: usize) -> Self {
        let values = (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect();
        SearchAxis { values }
    }

    fn with_zero(mut self) -> Self {
        self.values.insert(0, 0.0);
        self
    }
}

/// Minimize a bound family at energy `e`: coordinate descent over log-spaced
/// 40-point grids with golden-section refinement, two passes.
pub fn minimize_bound(family: &BoundFamily, e: f64) -> Result<(f64, ArgMin)> {
    let objective = |beta: f64, ell: Option<f64>, s: Option<f64>| -> f64 {
        family.eval(e, beta, ell, s).unwrap_or(f64::INFINITY)
    };

    let (beta_axis, ell_axis, s_axis): (SearchAxis, Option<SearchAxis>, Option<SearchAxis>) =
        match family {
            BoundFamily::AlloyUniform { .. } => {
                (SearchAxis::log_spaced(1e-3, 1e3, 40), None, None)
            }
            BoundFamily::AlloyLaplace { alpha, u0, .. } => {
                let cap = 0.999_999 / (alpha * u0.sup_norm());
                (SearchAxis::log_spaced(1e-3_f64.min(cap / 2.0), cap, 40), None, None)
            }
            BoundFamily::Gauss { model } => {
                let scale = model.c0.sqrt();
                let tau_like = match &model.shape {
                    crate::fields::CovarianceShape::Gaussian { tau } => *tau,
                    _ => model.support_radius() / 6.0,
                };
                (
                    SearchAxis::log_spaced(1e-3 / scale, 1e3 / scale, 40),
                    Some(SearchAxis::log_spaced(tau_like / 100.0, 6.0 * tau_like, 40)),
                    Some(SearchAxis::log_spaced(tau_like / 100.0, 3.0 * tau_like, 39).with_zero()),
                )
            }
        };

    let mut beta = median(&beta_axis.values);
    let mut ell = ell_axis.as_ref().map(|a| median(&a.values));
    let mut s = s_axis.as_ref().map(|_| 0.0);

    let mut best = objective(beta, ell, s);
    for _pass in 0..2 {
        let (b, w) = line_search(&beta_axis, |x| objective(x, ell, s));
        if w < best {
            best = w;
            beta = b;
        }
        if let Some(axis) = &ell_axis {
            let (l, w) = line_search(axis, |x| objective(beta, Some(x), s));
            if w < best {
                best = w;
                ell = Some(l);
            }
        }
        if let Some(axis) = &s_axis {
            let (sv, w) = line_search(axis, |x| objective(beta, ell, Some(x)));
            if w < best {
                best = w;
                s = Some(sv);
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::EmptyFeasibleSet(format!(
            "no feasible parameters for family {} at E = {e}",
            family.label()
        )));
    }
    // deep below the spectrum the bound underflows f64; keep it positive
    Ok((best.max(f64::MIN_POSITIVE), ArgMin { beta, ell, s }))
}

fn median(values: &[f64]) -> f64 {
    values[values.len() / 2]
}

/// Grid scan followed by golden-section refinement between the neighbors of
/// the best grid point.
fn line_search(axis: &SearchAxis, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    for (i, &x) in axis.values.iter().enumerate() {
        let v = f(x);
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }
    if !best_val.is_finite() {
        return (axis.values[best_idx], best_val);
    }
    let lo = axis.values[best_idx.saturating_sub(1)].max(f64::MIN_POSITIVE);
    let hi = axis.values[(best_idx + 1).min(axis.values.len() - 1)];
    if lo >= hi {
        return (axis.values[best_idx], best_val);
    }
    let (x, v) = golden_section(&f, lo, hi, 1e-7);
    if v < best_val {
        (x, v)
    } else {
        (axis.values[best_idx], best_val)
    }
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..90 {
        if (b - a) <= rel_tol * b.abs().max(1e-12) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimized bound curve over an energy grid.
pub fn minimize_curve(family: &BoundFamily, energies: &[f64]) -> Result<BoundCurve> {
    let points = energies
        .iter()
        .map(|&e| {
            let (w, arg) = minimize_bound(family, e)?;
            Ok(BoundPoint {
                e,
                w,
                beta: arg.beta,
                ell: arg.ell,
                s: arg.s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        family: family.label().to_string(),
        points,
    })
}

/// Asymptotics of the Gaussian bound with the prescribed parameter choices
/// l(E) = |E|^{-1/4} and beta(E) = (sqrt(E^2 + 2 d C_l) - E) / (2 C_l).
#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    /// (E, ln W(E) / E^2) at the low-energy probes.
    pub low: Vec<(f64, f64)>,
    /// analytic limit -1 / (2 C(0))
    pub low_limit: f64,
    /// (E, W(E) / E^{d/2}) at the high-energy probes.
    pub high: Vec<(f64, f64)>,
    /// analytic limit (e / (pi d))^{d/2} / (sqrt(2 pi) u(0))
    pub high_limit: f64,
    pub warnings: Vec<String>,
}

/// Evaluate the asymptotic diagnostics. The cube shrinks as l = |E|^{-1/4},
/// so the profile constants are taken in their small-cube limit
/// B_l = b_l = u(0)/sqrt(C(0)) and C_l = C(0).
pub fn gauss_asymptotics(
    c0: f64,
    dim: usize,
    u0_value: f64,
    low_probes: &[f64],
    high_probes: &[f64],
) -> Result<AsymptoticsReport> {
    if !(c0 > 0.0 && u0_value > 0.0) {
        return Err(Error::Model("asymptotics need C(0) > 0 and u(0) > 0".into()));
    }
    let b = u0_value / c0.sqrt();
    let mut warnings = Vec::new();
    let params_at = |e: f64| -> GaussBoundParams {
        GaussBoundParams {
            c0,
            ell: e.abs().powf(-0.25),
            s: 0.0,
            b_upper: b,
            b_lower: b,
            c_ell: c0,
            dim,
        }
    };
    // conjugate form for e >= 0 avoids the cancellation in sqrt(e^2 + a) - e
    let beta_at = |e: f64, c_ell: f64| {
        let a = 2.0 * dim as f64 * c_ell;
        if e >= 0.0 {
            dim as f64 / ((e * e + a).sqrt() + e)
        } else {
            ((e * e + a).sqrt() - e) / (2.0 * c_ell)
        }
    };

    let mut low = Vec::new();
    for &e in low_probes {
        if e >= 0.0 {
            return Err(Error::Model(format!("low-energy probe {e} must be negative")));
        }
        if e.abs() < 10.0 * c0.sqrt() {
            warnings.push(format!("low-energy probe {e} is small; ratio not yet asymptotic"));
        }
        let p = params_at(e);
        let beta = beta_at(e, p.c_ell);
        low.push((e, ln_w_gauss(e, beta, &p) / (e * e)));
    }
    let mut high = Vec::new();
    for &e in high_probes {
        if e <= 0.0 {
            return Err(Error::Model(format!("high-energy probe {e} must be positive")));
        }
        if e < 10.0 {
            warnings.push(format!("high-energy probe {e} is small; ratio not yet asymptotic"));
        }
        let p = params_at(e);
        let beta = beta_at(e, p.c_ell);
        let ratio = (ln_w_gauss(e, beta, &p) - 0.5 * dim as f64 * e.ln()).exp();
        high.push((e, ratio));
    }
    let d = dim as f64;
    Ok(AsymptoticsReport {
        low,
        low_limit: -1.0 / (2.0 * c0),
        high,
        high_limit: (std::f64::consts::E / (std::f64::consts::PI * d)).powf(d / 2.0)
            / (TAU.sqrt() * u0_value),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::FieldModel;
    use crate::seed::{stream, StreamTag};
    use rand::Rng;

    #[test]
    fn wegner_rhs_direct_evaluation() {
        let c = WegnerConstants {
            v1: 0.5,
            v2: 1.0,
            beta: 0.1,
            density_sup: 2.0,
            trace_bound: 3.0,
            dim: 2,
        };
        c.validate().unwrap();
        let i = EnergyInterval::closed(1.5, 2.0).unwrap();
        // 4 * 0.5 * (2*3/0.5) * e^{0.2} = 24 e^{0.2}
        let expect = 24.0 * 0.2f64.exp();
        assert!((wegner_rhs(&c, 4.0, &i) - expect).abs() < 1e-12);
        assert!((expect - 29.313666195844076).abs() < 1e-12);
    }

    #[test]
    fn wegner_rhs_vanishes_with_interval_length() {
        let c = WegnerConstants {
            v1: 1.0,
            v2: 1.0,
            beta: 1.0,
            density_sup: 1.0,
            trace_bound: 1.0,
            dim: 1,
        };
        let tiny = EnergyInterval::closed(-0.5e-9, 0.5e-9).unwrap();
        assert!(wegner_rhs(&c, 1.0, &tiny) < 2e-9);
        let unit = EnergyInterval::closed(-1.0, 0.0).unwrap();
        assert!((wegner_rhs(&c, 1.0, &unit) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z3_values() {
        // beta = 1/(2 pi), d = 1, unit cell, mgf 1: (1 + 1)^1 = 2
        let v = z3(1.0 / TAU, 1.0, 1, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        // d = 2, beta = 1: (1 + (2 pi)^{-1/2})^2
        let v = z3(1.0, 1.0, 2, 1.0).unwrap();
        let expect = (1.0 + TAU.powf(-0.5)).powi(2);
        assert!((v - expect).abs() < 1e-14);
        assert!((expect - 1.957039).abs() < 1e-6);
        assert!(z3(-1.0, 1.0, 2, 1.0).is_err());
    }

    #[test]
    fn z1_zero_background_reduces_to_free_trace() {
        let grid = GridSpec::cube(2, 4, 0.25).unwrap();
        let spec = EnsembleSpec {
            model: FieldModel::Zero,
            grid: grid.clone(),
            gauge: ConstantFieldGauge::zero(2),
            bc: BoundaryCondition::Neumann,
            realizations: 3,
            base_seed: 0,
        };
        let beta = 0.7;
        let r = z1_estimate(&spec, beta).unwrap();
        assert_eq!(r.std_error, 0.0);
        let free = HermitianOperator::assemble(&grid, BoundaryCondition::Neumann, &spec.gauge, None)
            .unwrap();
        let tau0 = spectral::heat_trace(&spectral::eigenvalues(&free).unwrap(), beta).unwrap();
        assert!((r.mean - tau0 / grid.volume()).abs() < 1e-12);
    }

    #[test]
    fn z2_without_field_is_free_trace_factor() {
        let grid = GridSpec::cube(2, 4, 0.25).unwrap();
        let free = HermitianOperator::assemble(
            &grid,
            BoundaryCondition::Neumann,
            &ConstantFieldGauge::zero(2),
            None,
        )
        .unwrap();
        let beta = 0.5;
        let z2 = z2_estimate(&free, beta, 1.0).unwrap();
        let tau0 = spectral::heat_trace(&spectral::eigenvalues(&free).unwrap(), beta).unwrap();
        assert!((z2 - tau0 / grid.volume()).abs() < 1e-12);
    }

    #[test]
    fn magnetic_free_trace_below_zero_field_free_trace() {
        // first inequality behind Z3 at matrix level: unit cell, 6x6 nodes
        let grid = GridSpec::boxed(2, [6, 6, 1], 1.0 / 6.0, [-0.5, -0.5, 0.0]).unwrap();
        let beta = 1.0;
        let hb = HermitianOperator::assemble(
            &grid,
            BoundaryCondition::Neumann,
            &ConstantFieldGauge::perpendicular(1.0),
            None,
        )
        .unwrap();
        let h0 = HermitianOperator::assemble(
            &grid,
            BoundaryCondition::Neumann,
            &ConstantFieldGauge::zero(2),
            None,
        )
        .unwrap();
        let tb = spectral::heat_trace(&spectral::eigenvalues(&hb).unwrap(), beta).unwrap();
        let t0 = spectral::heat_trace(&spectral::eigenvalues(&h0).unwrap(), beta).unwrap();
        assert!(tb <= t0 + 1e-10, "{tb} vs {t0}");
    }

    #[test]
    fn z3_dominates_z2_on_unit_cell() {
        let grid = GridSpec::boxed(2, [6, 6, 1], 1.0 / 6.0, [-0.5, -0.5, 0.0]).unwrap();
        let free_b = HermitianOperator::assemble(
            &grid,
            BoundaryCondition::Neumann,
            &ConstantFieldGauge::perpendicular(1.0),
            None,
        )
        .unwrap();
        for beta in [0.05, 0.2, 1.0, 5.0] {
            let z2 = z2_estimate(&free_b, beta, 1.0).unwrap();
            let z3v = z3(beta, grid.volume(), 2, 1.0).unwrap();
            assert!(z3v >= z2, "beta {beta}: Z3 {z3v} < Z2 {z2}");
        }
    }

    #[test]
    fn alloy_uniform_values_and_scalings() {
        let w = w_alloy_uniform(0.0, 2, 1.0, 1.0, 1.0);
        assert!((w - 1.957039).abs() < 1e-6);
        // shifting E by 1/beta multiplies by e
        let beta = 0.37;
        let a = w_alloy_uniform(1.0, 2, beta, 1.0, 1.0);
        let b = w_alloy_uniform(1.0 + 1.0 / beta, 2, beta, 1.0, 1.0);
        assert!((b / a - std::f64::consts::E).abs() < 1e-12);
        // linear in the density bound
        let c = w_alloy_uniform(1.0, 2, beta, 2.0, 1.0);
        assert!((c / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn k_beta_indicator_closed_form() {
        let u0 = SingleSite::Indicator { height: 1.0 };
        // alpha = 1, beta = 1/2: K = -ln(1 - 1/4) = ln(4/3)
        let kb = k_beta(&u0, 2, 1.0, 0.5).unwrap();
        assert!((kb - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((kb - 0.2876820724517809).abs() < 1e-12);
        // beta -> 0: K -> 0
        let kb = k_beta(&u0, 2, 1.0, 1e-8).unwrap();
        assert!(kb.abs() < 1e-15);
        // outside the admissible range
        assert!(matches!(
            k_beta(&u0, 2, 1.0, 1.0),
            Err(Error::OutsideAdmissibleBeta { .. })
        ));
    }

    #[test]
    fn k_beta_tabulated_matches_indicator() {
        // a tabulated unit-cube indicator must reproduce the closed form
        let u0 = SingleSite::Tabulated {
            dim: 2,
            spacing: 1.0,
            shape: [1, 1, 1],
            values: vec![1.0],
        };
        let kb = k_beta(&u0, 2, 1.0, 0.5).unwrap();
        assert!((kb - (4.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn alloy_laplace_chain_evaluation() {
        let u0 = SingleSite::Indicator { height: 1.0 };
        let kb = k_beta(&u0, 2, 1.0, 0.5).unwrap();
        let w = w_alloy_laplace(0.0, 2, 0.5, 1.0, 1.0, kb);
        // (1 + pi^{-1/2})^2 * 0.375 * 4/3
        let expect = (1.0 + std::f64::consts::PI.powf(-0.5)).powi(2) * 0.375 * 4.0 / 3.0;
        assert!((w - expect).abs() < 1e-12);
        assert!((expect - 1.2233).abs() < 1e-4);
    }

    #[test]
    fn gauss_constants_closed_form() {
        let model = CovarianceModel::gaussian(2, 1.0, 1.0).unwrap();
        // l -> 0: B = b = 1, C_l = C0
        let p = gauss_constants(&model, 0.0, 1e-8).unwrap();
        assert!((p.b_upper - 1.0).abs() < 1e-12);
        assert!((p.b_lower - 1.0).abs() < 1e-12);
        assert!((p.c_ell - 1.0).abs() < 1e-10);
        // l = 1: b = exp(-1/4), C_l = 2 - exp(-1/2)
        let p = gauss_constants(&model, 0.0, 1.0).unwrap();
        assert!((p.b_upper - 1.0).abs() < 1e-14);
        assert!((p.b_lower - (-0.25f64).exp()).abs() < 1e-14);
        assert!((p.c_ell - (2.0 - (-0.5f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn gauss_constants_tabulated_matches_closed_form() {
        let tau = 1.0;
        let n = 20_000;
        let rmax = 9.0;
        let radii: Vec<f64> = (0..n).map(|i| rmax * i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = radii.iter().map(|r| (-r * r / (2.0 * tau * tau)).exp()).collect();
        let table = CovarianceModel::tabulated(2, 1.0, radii, values).unwrap();
        let builtin = CovarianceModel::gaussian(2, 1.0, tau).unwrap();
        let pt = gauss_constants(&table, 0.0, 1.0).unwrap();
        let pb = gauss_constants(&builtin, 0.0, 1.0).unwrap();
        assert!((pt.b_upper - pb.b_upper).abs() < 1e-8);
        assert!((pt.b_lower - pb.b_lower).abs() < 1e-8);
        assert!((pt.c_ell - pb.c_ell).abs() < 1e-7);
    }

    #[test]
    fn gauss_bound_value_and_monotonicity() {
        let model = CovarianceModel::gaussian(2, 1.0, 1.0).unwrap();
        let p = gauss_constants(&model, 0.0, 1.0).unwrap();
        let w0 = w_gauss(0.0, 1.0, &p);
        assert!((w0 - 5.917).abs() < 1e-3, "w = {w0}");
        // increasing in E
        assert!(w_gauss(0.5, 1.0, &p) > w0);
        // decreasing in b_l, increasing in C_l
        let mut worse_b = p;
        worse_b.b_lower *= 0.9;
        assert!(w_gauss(0.0, 1.0, &worse_b) > w0);
        let mut worse_c = p;
        worse_c.c_ell *= 1.1;
        assert!(w_gauss(0.0, 1.0, &worse_c) > w0);
    }

    #[test]
    fn cube_containment_reports_max_edge() {
        // covariance that turns negative beyond r = 1
        let radii = vec![0.0, 1.0, 2.0, 3.0];
        let values = vec![1.0, 0.0, -0.2, 0.0];
        let model = CovarianceModel::tabulated(2, 1.0, radii, values).unwrap();
        match gauss_constants(&model, 0.0, 3.0) {
            Err(Error::CubeNotContained { max_ell, .. }) => {
                // positivity ends at r = 1: max edge 2 / sqrt(2)
                assert!((max_ell - std::f64::consts::SQRT_2).abs() < 1e-3);
            }
            other => panic!("expected CubeNotContained, got {other:?}"),
        }
    }

    #[test]
    fn minimizer_beats_random_probes() {
        let family = BoundFamily::Gauss {
            model: CovarianceModel::gaussian(2, 0.04, 100.0).unwrap(),
        };
        let e = 1.0;
        let (w_star, arg) = minimize_bound(&family, e).unwrap();
        assert!(w_star.is_finite());
        let mut rng = stream(9, StreamTag::TestVectors, 0);
        for _ in 0..1000 {
            let beta = 10f64.powf(rng.random::<f64>() * 4.0 - 2.0) / 0.2;
            let ell = 10f64.powf(rng.random::<f64>() * 3.0 - 1.0);
            let s = 10f64.powf(rng.random::<f64>() * 3.0 - 1.0);
            if let Ok(w) = family.eval(e, beta, Some(ell), Some(s)) {
                assert!(
                    w_star <= w * (1.0 + 1e-9),
                    "probe beta={beta}, l={ell}, s={s} gives {w} < {w_star}"
                );
            }
        }
        assert!(arg.beta > 0.0);
    }

    #[test]
    fn alloy_uniform_argmin_is_stationary() {
        let family = BoundFamily::AlloyUniform {
            dim: 2,
            g_max: 1.0,
            v1: 1.0,
        };
        let e = 1.5;
        let (_, arg) = minimize_bound(&family, e).unwrap();
        let h = arg.beta * 1e-6;
        let f = |b: f64| family.eval(e, b, None, None).unwrap().ln();
        let grad = (f(arg.beta + h) - f(arg.beta - h)) / (2.0 * h);
        // stationarity of the log-derivative in the interior case
        assert!(
            grad.abs() * arg.beta <= 1e-4,
            "d log W / d log beta = {}",
            grad * arg.beta
        );
    }

    #[test]
    fn minimized_curve_is_finite_and_nondecreasing() {
        let family = BoundFamily::Gauss {
            model: CovarianceModel::gaussian(2, 0.04, 100.0).unwrap(),
        };
        let energies: Vec<f64> = (0..16).map(|k| -0.5 + 3.0 * k as f64 / 15.0).collect();
        let curve = minimize_curve(&family, &energies).unwrap();
        for pair in curve.points.windows(2) {
            assert!(pair[0].w.is_finite() && pair[0].w > 0.0);
            assert!(
                pair[1].w >= pair[0].w * (1.0 - 1e-6),
                "bound not monotone: {} then {}",
                pair[0].w,
                pair[1].w
            );
        }
    }

    #[test]
    fn asymptotics_match_analytic_limits() {
        // the prefactor converges like (1 + 2 sqrt(pi d) E^{-1/4})^d, so the
        // high-energy probe must be huge for a tight numeric match
        let report = gauss_asymptotics(1.0, 2, 1.0, &[-50.0], &[1e12]).unwrap();
        let (_, low_ratio) = report.low[0];
        assert!(
            ((low_ratio - report.low_limit) / report.low_limit).abs() < 0.10,
            "low ratio {low_ratio} vs {}",
            report.low_limit
        );
        assert!((report.low_limit + 0.5).abs() < 1e-15);
        // high-energy constant for d = 2, u(0) = 1
        assert!(
            (report.high_limit - 0.17259).abs() < 1e-4,
            "high limit {}",
            report.high_limit
        );
        let (_, high_ratio) = report.high[0];
        assert!(
            ((high_ratio - report.high_limit) / report.high_limit).abs() < 0.02,
            "high ratio {high_ratio}"
        );
    }

    #[test]
    fn asymptotic_limits_are_grid_free() {
        let a = gauss_asymptotics(0.25, 2, 0.5, &[-40.0], &[1e4]).unwrap();
        let b = gauss_asymptotics(0.25, 2, 0.5, &[-80.0, -40.0], &[1e4, 1e5]).unwrap();
        assert_eq!(a.low_limit, b.low_limit);
        assert_eq!(a.high_limit, b.high_limit);
    }

    #[test]
    fn mgf_bounds() {
        assert_eq!(mgf_sup_nonnegative(), 1.0);
        let model = CovarianceModel::gaussian(2, 1.0, 1.0).unwrap();
        let grid = GridSpec::cube(2, 2, 0.5).unwrap();
        let m = mgf_sup_gaussian_background(&model, 0.0, &grid, 1.0).unwrap();
        // background variance is at most C(0), so the bound is below e^{1/2}
        assert!(m > 1.0 && m <= (0.5f64).exp() + 1e-12);
    }
}
