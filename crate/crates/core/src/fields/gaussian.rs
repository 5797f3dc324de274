//! Stationary zero-mean Gaussian random fields with prescribed covariance,
//! sampled on grid nodes, and their one-parameter decompositions
//! V = U + lambda * u built from a mollified point evaluation.
//!
//! Two sampling backends: a dense symmetric factorization of the node
//! covariance matrix (small grids), and circulant spectral embedding on a
//! padded torus (large grids). Padding is chosen so that the wrapped
//! covariance tail is below 1e-9 of the variance.

use super::{DensityKind, FieldRealization, OneParameterDecomposition};
use crate::grid::{norm_sq, sub, GridSpec, Point};
use crate::seed::{stream, StreamTag};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const PSD_RELATIVE_TOL: f64 = 1e-8;
const DENSE_NODE_LIMIT: usize = 4096;

/// Covariance function shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CovarianceShape {
    /// C(x) = C(0) exp(-|x|^2 / (2 tau^2)).
    Gaussian { tau: f64 },
    /// Radial table (r_k, C_k), linearly interpolated, zero beyond the last
    /// radius. The first entry must be (0, C(0)).
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

/// Homogeneous Gaussian random field model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    pub dim: usize,
    pub c0: f64,
    pub shape: CovarianceShape,
}

impl CovarianceModel {
    pub fn gaussian(dim: usize, c0: f64, tau: f64) -> Result<Self> {
        let model = CovarianceModel {
            dim,
            c0,
            shape: CovarianceShape::Gaussian { tau },
        };
        model.validate()?;
        Ok(model)
    }

    pub fn tabulated(dim: usize, c0: f64, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let model = CovarianceModel {
            dim,
            c0,
            shape: CovarianceShape::Tabulated { radii, values },
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Model(format!("dimension {} not in 1..=3", self.dim)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::Model(format!("variance C(0) = {} must be > 0", self.c0)));
        }
        match &self.shape {
            CovarianceShape::Gaussian { tau } => {
                if !(*tau > 0.0 && tau.is_finite()) {
                    return Err(Error::Model(format!("correlation length {tau} must be > 0")));
                }
            }
            CovarianceShape::Tabulated { radii, values } => {
                if radii.len() != values.len() || radii.len() < 2 {
                    return Err(Error::Model("covariance table needs matching r/C columns".into()));
                }
                if radii[0] != 0.0 || (values[0] - self.c0).abs() > 1e-12 * self.c0 {
                    return Err(Error::Model("covariance table must start at (0, C(0))".into()));
                }
                if radii.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Model("covariance radii must be strictly increasing".into()));
                }
            }
        }
        Ok(())
    }

    /// Covariance at separation r >= 0.
    pub fn cov(&self, r: f64) -> f64 {
        match &self.shape {
            CovarianceShape::Gaussian { tau } => self.c0 * (-r * r / (2.0 * tau * tau)).exp(),
            CovarianceShape::Tabulated { radii, values } => {
                if r >= *radii.last().unwrap() {
                    return 0.0;
                }
                let k = radii.partition_point(|&rk| rk <= r).min(radii.len() - 1);
                let (r0, r1) = (radii[k - 1], radii[k]);
                let t = (r - r0) / (r1 - r0);
                values[k - 1] * (1.0 - t) + values[k] * t
            }
        }
    }

    /// Distance beyond which the covariance is below 1e-9 of the variance
    /// (used for spectral-embedding padding).
    pub fn support_radius(&self) -> f64 {
        match &self.shape {
            // exp(-r^2/2tau^2) <= 1e-9 at r = tau sqrt(2 ln 1e9) ~ 6.44 tau
            CovarianceShape::Gaussian { tau } => tau * (2.0 * 9.0 * std::f64::consts::LN_10).sqrt(),
            CovarianceShape::Tabulated { radii, .. } => *radii.last().unwrap(),
        }
    }

    /// Mollifier normalization: the measure mu_s = c_s N(0, s^2) satisfies
    /// the double-integral condition int int mu mu C = C(0).
    fn mollifier_scale(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        match &self.shape {
            CovarianceShape::Gaussian { tau } => {
                Ok(((tau * tau + 2.0 * s * s) / (tau * tau)).powf(self.dim as f64 / 4.0))
            }
            CovarianceShape::Tabulated { .. } => {
                let d = self.convolve_with_gaussian(std::f64::consts::SQRT_2 * s, [0.0; 3]);
                if !(d > 1e-300) {
                    return Err(Error::MollifierUnderflow { s });
                }
                Ok((self.c0 / d).sqrt())
            }
        }
    }

    /// (N_w * C)(x) by tensor Gauss-Legendre over the mollifier support.
    fn convolve_with_gaussian(&self, w: f64, x: Point) -> f64 {
        let d = self.dim;
        let order = if d == 3 { 40 } else { 64 };
        let (ys, wts) = crate::quad::gauss_legendre_on(order, -8.0 * w, 8.0 * w);
        let norm = (std::f64::consts::TAU * w * w).powf(-(d as f64) / 2.0);
        let mut sum = 0.0;
        let mut idx = vec![0usize; d];
        'outer: loop {
            let mut weight = 1.0;
            let mut y = [0.0f64; 3];
            for k in 0..d {
                weight *= wts[idx[k]];
                y[k] = ys[idx[k]];
            }
            let r2 = norm_sq(y);
            let diff = sub(x, y);
            sum += weight * (-r2 / (2.0 * w * w)).exp() * self.cov(norm_sq(diff).sqrt());
            for k in 0..d {
                idx[k] += 1;
                if idx[k] < ys.len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        norm * sum
    }
}

/// u(x) = C(0)^{-1/2} int mu_s(dy) C(x - y) for the normalized Gaussian
/// mollifier family; s = 0 is the Dirac choice u(x) = C(x) / sqrt(C(0)).
pub fn gaussian_u_profile(model: &CovarianceModel, s: f64, x: Point) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Model(format!("mollifier width {s} must be >= 0")));
    }
    let c0 = model.c0;
    if s == 0.0 {
        return Ok(model.cov(norm_sq(x).sqrt()) / c0.sqrt());
    }
    let scale = model.mollifier_scale(s)?;
    match &model.shape {
        CovarianceShape::Gaussian { tau } => {
            let sigma2 = tau * tau + s * s;
            let kappa = scale * (tau * tau / sigma2).powf(model.dim as f64 / 2.0);
            Ok(c0.sqrt() * kappa * (-norm_sq(x) / (2.0 * sigma2)).exp())
        }
        CovarianceShape::Tabulated { .. } => {
            Ok(scale / c0.sqrt() * model.convolve_with_gaussian(s, x))
        }
    }
}

/// Variance of the background field U(x) = V(x) - lambda u(x) in the
/// mollified decomposition: C(0) - u(x)^2.
pub fn background_variance(model: &CovarianceModel, s: f64, x: Point) -> Result<f64> {
    let u = gaussian_u_profile(model, s, x)?;
    Ok((model.c0 - u * u).max(0.0))
}

/// Sampling backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianMethod {
    /// Dense factorization below the node limit, spectral embedding above.
    Auto,
    Dense,
    Spectral,
}

enum Factor {
    Dense {
        transform: DMatrix<f64>,
    },
    Spectral {
        torus: [usize; 3],
        sqrt_ev: Vec<f64>,
        ffts: Vec<Arc<dyn Fft<f64>>>,
    },
}

/// Reusable sampler: the factorization is computed once per (model, grid).
pub struct GaussianSampler {
    model: CovarianceModel,
    grid: GridSpec,
    factor: Factor,
}

impl GaussianSampler {
    pub fn new(model: &CovarianceModel, grid: &GridSpec) -> Result<Self> {
        Self::with_method(model, grid, GaussianMethod::Auto)
    }

    pub fn with_method(model: &CovarianceModel, grid: &GridSpec, method: GaussianMethod) -> Result<Self> {
        model.validate()?;
        if model.dim != grid.dim() {
            return Err(Error::Model(format!(
                "model dimension {} does not match grid dimension {}",
                model.dim,
                grid.dim()
            )));
        }
        let dense = match method {
            GaussianMethod::Dense => true,
            GaussianMethod::Spectral => false,
            GaussianMethod::Auto => grid.node_count() <= DENSE_NODE_LIMIT,
        };
        let factor = if dense {
            Self::dense_factor(model, grid)?
        } else {
            Self::spectral_factor(model, grid)?
        };
        Ok(GaussianSampler {
            model: model.clone(),
            grid: grid.clone(),
            factor,
        })
    }

    fn dense_factor(model: &CovarianceModel, grid: &GridSpec) -> Result<Factor> {
        let m = grid.node_count();
        let pos: Vec<Point> = grid.positions().collect();
        let mut cov = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let c = model.cov(norm_sq(sub(pos[i], pos[j])).sqrt());
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        let eig = cov.symmetric_eigen();
        let min_ev = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_ev < -PSD_RELATIVE_TOL * model.c0 * m as f64 {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_ev });
        }
        let mut transform = eig.eigenvectors;
        for (k, col) in transform.column_iter_mut().enumerate() {
            let scale = eig.eigenvalues[k].max(0.0).sqrt();
            let mut col = col;
            col *= scale;
        }
        Ok(Factor::Dense { transform })
    }

    fn spectral_factor(model: &CovarianceModel, grid: &GridSpec) -> Result<Factor> {
        let d = grid.dim();
        let h = grid.spacing();
        let pad = (model.support_radius() / h).ceil() as usize + 1;
        let mut torus = [1usize; 3];
        for k in 0..d {
            torus[k] = grid.cells(k) + pad;
        }
        let total: usize = torus.iter().product();

        // Wrapped covariance on the torus.
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        for (lin, slot) in data.iter_mut().enumerate() {
            let mut rest = lin;
            let mut r2 = 0.0;
            for &tk in torus.iter().take(d) {
                let i = rest % tk;
                rest /= tk;
                let wrapped = i.min(tk - i) as f64 * h;
                r2 += wrapped * wrapped;
            }
            slot.re = model.cov(r2.sqrt());
        }

        let mut planner = FftPlanner::<f64>::new();
        let ffts: Vec<Arc<dyn Fft<f64>>> = (0..d)
            .map(|k| planner.plan_fft_forward(torus[k]))
            .collect();
        let inverses: Vec<Arc<dyn Fft<f64>>> = (0..d)
            .map(|k| planner.plan_fft_inverse(torus[k]))
            .collect();
        fft_nd(&mut data, torus, d, &ffts);

        let max_ev = data.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let min_ev = data.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if min_ev < -PSD_RELATIVE_TOL * max_ev {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_ev });
        }
        let sqrt_ev: Vec<f64> = data.iter().map(|z| z.re.max(0.0).sqrt()).collect();
        Ok(Factor::Spectral {
            torus,
            sqrt_ev,
            ffts: inverses,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    /// Draw one realization. Identical seeds reproduce values bit-exactly.
    pub fn sample(&self, seed: u64) -> FieldRealization {
        let mut rng = stream(seed, StreamTag::GaussianNodes, 0);
        let values = match &self.factor {
            Factor::Dense { transform } => {
                let m = self.grid.node_count();
                let z: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let zv = nalgebra::DVector::from_vec(z);
                let v = transform * zv;
                v.iter().copied().collect::<Vec<f64>>()
            }
            Factor::Spectral { torus, sqrt_ev, ffts } => {
                let total: usize = torus.iter().product();
                let mut data = vec![Complex64::new(0.0, 0.0); total];
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                for (slot, ev) in data.iter_mut().zip(sqrt_ev) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *slot = Complex64::new(re * inv_sqrt2, im * inv_sqrt2) * *ev;
                }
                let d = self.grid.dim();
                fft_nd(&mut data, *torus, d, ffts);
                let norm = std::f64::consts::SQRT_2 / (total as f64).sqrt();
                (0..self.grid.node_count())
                    .map(|i| {
                        let iv = self.grid.node_iv(i);
                        let lin = iv[0] + torus[0] * (iv[1] + torus[1] * iv[2]);
                        data[lin].re * norm
                    })
                    .collect()
            }
        };
        FieldRealization {
            grid: self.grid.clone(),
            values,
            seed,
            model_tag: "gaussian".to_string(),
        }
    }
}

/// One-shot sampler; factorizes the covariance on every call. Use
/// [`GaussianSampler`] when drawing many realizations on one grid.
pub fn sample_gaussian(model: &CovarianceModel, grid: &GridSpec, seed: u64) -> Result<FieldRealization> {
    Ok(GaussianSampler::new(model, grid)?.sample(seed))
}

/// In-place n-dimensional FFT by axis passes.
fn fft_nd(data: &mut [Complex64], torus: [usize; 3], dim: usize, ffts: &[Arc<dyn Fft<f64>>]) {
    let total = data.len();
    for axis in 0..dim {
        let n = torus[axis];
        if n == 1 {
            continue;
        }
        let fft = &ffts[axis];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let stride: usize = torus[..axis].iter().product();
        let lines = total / n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..lines {
            // Decompose the line index into (inner, outer) around this axis.
            let inner = l % stride;
            let outer = l / stride;
            let base = inner + outer * stride * n;
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[base + i * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (i, value) in line.iter().enumerate() {
                data[base + i * stride] = *value;
            }
        }
    }
}

/// Discrete quadrature weights of the mollifier mu_s on the grid nodes.
///
/// For s = 0 the weight is a unit mass on the node nearest the origin. For
/// s > 0 the probability mollifier is discretized by the midpoint rule; its
/// total mass must match 1 to 1e-10, otherwise the grid does not resolve the
/// mollifier (or does not contain its support) and an error is returned.
fn mollifier_weights(grid: &GridSpec, s: f64) -> Result<Vec<(usize, f64)>> {
    if s == 0.0 {
        let nearest = grid
            .positions()
            .enumerate()
            .min_by(|(_, a), (_, b)| norm_sq(*a).partial_cmp(&norm_sq(*b)).unwrap())
            .map(|(i, _)| i)
            .expect("non-empty grid");
        return Ok(vec![(nearest, 1.0)]);
    }
    let d = grid.dim();
    let cell = grid.spacing().powi(d as i32);
    let norm = (std::f64::consts::TAU * s * s).powf(-(d as f64) / 2.0);
    let mut weights = Vec::new();
    let mut mass = 0.0;
    for (i, x) in grid.positions().enumerate() {
        let w = norm * (-norm_sq(x) / (2.0 * s * s)).exp() * cell;
        mass += w;
        if w > 0.0 {
            weights.push((i, w));
        }
    }
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::QuadratureMass { mass });
    }
    for (_, w) in weights.iter_mut() {
        *w /= mass;
    }
    Ok(weights)
}

/// (U, lambda, u, rho)-decomposition of a Gaussian realization:
/// lambda = C(0)^{-1/2} mu_s(V) is standard normal and independent of the
/// background U = V - lambda u.
pub fn decompose_gaussian(
    model: &CovarianceModel,
    realization: &FieldRealization,
    s: f64,
) -> Result<OneParameterDecomposition> {
    let grid = realization.grid();
    if model.dim != grid.dim() {
        return Err(Error::Model("model/grid dimension mismatch".into()));
    }
    let weights = mollifier_weights(grid, s)?;
    let scale = model.mollifier_scale(s)?;
    let lambda = scale / model.c0.sqrt()
        * weights
            .iter()
            .map(|(i, w)| w * realization.value(*i))
            .sum::<f64>();
    let profile: Vec<f64> = grid
        .positions()
        .map(|x| gaussian_u_profile(model, s, x))
        .collect::<Result<_>>()?;
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
            "gaussian-background",
        )?,
        lambda,
        profile,
        density: DensityKind::StandardNormal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_covariance_limit_is_rank_one() {
        // tau -> infinity: every node carries the same normal draw.
        let model = CovarianceModel::gaussian(2, 1.0, 1e8).unwrap();
        let grid = GridSpec::cube(2, 3, 0.5).unwrap();
        let field = sample_gaussian(&model, &grid, 3).unwrap();
        let first = field.value(0);
        assert!(first != 0.0);
        for &v in field.values() {
            assert!((v - first).abs() < 1e-6 * first.abs().max(1.0));
        }
    }

    #[test]
    fn node_variance_matches_c0() {
        // Fig-style parameters: C(0) = 0.04, long correlation length.
        let model = CovarianceModel::gaussian(2, 0.04, 100.0).unwrap();
        let grid = GridSpec::cube(2, 4, 1.0).unwrap();
        let sampler = GaussianSampler::new(&model, &grid).unwrap();
        let runs = 10_000usize;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for seed in 0..runs as u64 {
            let v = sampler.sample(seed).value(0);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / runs as f64;
        let var = sum2 / runs as f64 - mean * mean;
        // standard error of a normal sample variance: sigma^2 sqrt(2/R)
        let se = 0.04 * (2.0 / runs as f64).sqrt();
        assert!(
            (var - 0.04).abs() <= 3.0 * se,
            "variance {var} deviates from 0.04 by more than {}",
            3.0 * se
        );
    }

    #[test]
    fn pair_covariance_matches_model() {
        let model = CovarianceModel::gaussian(1, 1.0, 1.0).unwrap();
        let grid = GridSpec::cube(1, 8, 1.0).unwrap();
        let sampler = GaussianSampler::new(&model, &grid).unwrap();
        let runs = 100_000usize;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s01 = 0.0;
        for seed in 0..runs as u64 {
            let f = sampler.sample(seed);
            s0 += f.value(0);
            s1 += f.value(1);
            s01 += f.value(0) * f.value(1);
        }
        let r = runs as f64;
        let cov = s01 / r - (s0 / r) * (s1 / r);
        let expected = (-0.5f64).exp(); // C(h) at h = 1, tau = 1
        let se = ((1.0 + expected * expected) / r).sqrt();
        assert!(
            (cov - expected).abs() <= 3.0 * se,
            "cov {cov} vs {expected} (3se = {})",
            3.0 * se
        );
    }

    #[test]
    fn stationarity_equal_separations_agree() {
        let model = CovarianceModel::gaussian(1, 1.0, 1.5).unwrap();
        let grid = GridSpec::cube(1, 6, 1.0).unwrap();
        let sampler = GaussianSampler::new(&model, &grid).unwrap();
        let runs = 20_000usize;
        let mut cov_a = 0.0;
        let mut cov_b = 0.0;
        for seed in 0..runs as u64 {
            let f = sampler.sample(seed);
            cov_a += f.value(0) * f.value(2);
            cov_b += f.value(3) * f.value(5);
        }
        cov_a /= runs as f64;
        cov_b /= runs as f64;
        let se = (2.0 / runs as f64).sqrt() * 2.0;
        assert!(
            (cov_a - cov_b).abs() <= 3.0 * se,
            "same-separation covariances differ: {cov_a} vs {cov_b}"
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = CovarianceModel::gaussian(2, 1.0, 1.0).unwrap();
        let grid = GridSpec::cube(2, 4, 0.5).unwrap();
        let a = sample_gaussian(&model, &grid, 11).unwrap();
        let b = sample_gaussian(&model, &grid, 11).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn spectral_method_reproduces_covariance() {
        let model = CovarianceModel::gaussian(1, 1.0, 0.7).unwrap();
        let grid = GridSpec::cube(1, 16, 0.5).unwrap();
        let sampler = GaussianSampler::with_method(&model, &grid, GaussianMethod::Spectral).unwrap();
        let a = sampler.sample(5);
        let b = sampler.sample(5);
        assert_eq!(a.values(), b.values());

        let runs = 40_000usize;
        let mut var = 0.0;
        let mut cov1 = 0.0;
        for seed in 0..runs as u64 {
            let f = sampler.sample(seed);
            var += f.value(4) * f.value(4);
            cov1 += f.value(4) * f.value(5);
        }
        var /= runs as f64;
        cov1 /= runs as f64;
        let expected = model.cov(0.5);
        let se = (2.0 / runs as f64).sqrt();
        assert!((var - 1.0).abs() <= 3.0 * se, "var {var}");
        assert!(
            (cov1 - expected).abs() <= 3.0 * se,
            "cov {cov1} vs {expected}"
        );
    }

    #[test]
    fn non_psd_table_is_rejected_with_min_eigenvalue() {
        // A top-hat "covariance" is not positive definite.
        let model = CovarianceModel::tabulated(
            1,
            1.0,
            vec![0.0, 0.999, 1.0],
            vec![1.0, 1.0, 0.0],
        )
        .unwrap();
        let grid = GridSpec::cube(1, 8, 0.5).unwrap();
        match sample_gaussian(&model, &grid, 0) {
            Err(Error::NotPositiveSemidefinite { min_eigenvalue }) => {
                assert!(min_eigenvalue < 0.0);
            }
            other => panic!("expected NotPositiveSemidefinite, got {other:?}"),
        }
    }

    #[test]
    fn u_profile_at_origin_is_sqrt_c0() {
        let model = CovarianceModel::gaussian(2, 0.25, 3.0).unwrap();
        let u = gaussian_u_profile(&model, 0.0, [0.0; 3]).unwrap();
        assert!((u - 0.5).abs() < 1e-15);
    }

    #[test]
    fn u_profile_closed_form_point() {
        // s = 0, C0 = 1, tau = 1, |x|^2 = 1/2: u = exp(-1/4)
        let model = CovarianceModel::gaussian(2, 1.0, 1.0).unwrap();
        let u = gaussian_u_profile(&model, 0.0, [0.5, 0.5, 0.0]).unwrap();
        assert!((u - (-0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn u_profile_tabulated_matches_builtin() {
        // Dual-path check: finely tabulated builtin shape vs closed form.
        let tau = 1.3;
        let n = 4000;
        let rmax = 10.0 * tau;
        let radii: Vec<f64> = (0..n).map(|i| rmax * i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = radii.iter().map(|r| (-r * r / (2.0 * tau * tau)).exp()).collect();
        let table = CovarianceModel::tabulated(2, 1.0, radii, values).unwrap();
        let builtin = CovarianceModel::gaussian(2, 1.0, tau).unwrap();
        for x in [[0.0, 0.0, 0.0], [0.4, 0.3, 0.0], [1.0, -0.7, 0.0]] {
            let a = gaussian_u_profile(&table, 0.0, x).unwrap();
            let b = gaussian_u_profile(&builtin, 0.0, x).unwrap();
            assert!((a - b).abs() < 1e-6, "tabulated {a} vs builtin {b}");
        }
    }

    #[test]
    fn mollified_u_profile_tabulated_matches_builtin() {
        let tau = 1.0;
        let n = 6000;
        let rmax = 12.0;
        let radii: Vec<f64> = (0..n).map(|i| rmax * i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = radii.iter().map(|r| (-r * r / (2.0 * tau * tau)).exp()).collect();
        let table = CovarianceModel::tabulated(1, 1.0, radii, values).unwrap();
        let builtin = CovarianceModel::gaussian(1, 1.0, tau).unwrap();
        let s = 0.5;
        for x in [[0.0, 0.0, 0.0], [0.8, 0.0, 0.0]] {
            let a = gaussian_u_profile(&table, s, x).unwrap();
            let b = gaussian_u_profile(&builtin, s, x).unwrap();
            assert!((a - b).abs() < 1e-5, "tabulated {a} vs builtin {b}");
        }
    }

    #[test]
    fn dirac_decomposition_is_exact_at_origin() {
        let model = CovarianceModel::gaussian(1, 4.0, 1.0).unwrap();
        let grid = GridSpec::cube(1, 3, 1.0).unwrap(); // nodes at 0, 1, 2
        let field = sample_gaussian(&model, &grid, 21).unwrap();
        let dec = decompose_gaussian(&model, &field, 0.0).unwrap();
        assert!((dec.lambda - field.value(0) / 2.0).abs() < 1e-15);
        assert!(dec.background.value(0).abs() < 1e-12);
        assert_eq!(dec.density, DensityKind::StandardNormal);
        assert!(dec.reconstruction_error(&field) <= 1e-12);
    }

    #[test]
    fn lambda_is_standard_normal_and_uncorrelated_with_background() {
        let model = CovarianceModel::gaussian(1, 1.0, 1.0).unwrap();
        let grid = GridSpec::cube(1, 8, 1.0).unwrap();
        let sampler = GaussianSampler::new(&model, &grid).unwrap();
        let runs = 100_000usize;
        let n = grid.node_count();
        let mut lam_sum = 0.0;
        let mut lam_sq = 0.0;
        let mut cross = vec![0.0f64; n];
        let mut u_sq = vec![0.0f64; n];
        for seed in 0..runs as u64 {
            let f = sampler.sample(seed);
            let dec = decompose_gaussian(&model, &f, 0.0).unwrap();
            lam_sum += dec.lambda;
            lam_sq += dec.lambda * dec.lambda;
            for (k, &u) in dec.background.values().iter().enumerate() {
                cross[k] += dec.lambda * u;
                u_sq[k] += u * u;
            }
        }
        let r = runs as f64;
        let lam_mean = lam_sum / r;
        let lam_var = lam_sq / r - lam_mean * lam_mean;
        let se_var = (2.0 / r).sqrt();
        assert!(
            (lam_var - 1.0).abs() <= 3.0 * se_var,
            "Var(lambda) = {lam_var}"
        );
        // correlation of lambda with U at every node: within 3 standard errors
        let se_corr = 3.0 / r.sqrt();
        for k in 0..n {
            let var_u = u_sq[k] / r;
            if var_u < 1e-12 {
                continue; // U at the evaluation node vanishes identically
            }
            let corr = (cross[k] / r - lam_mean * 0.0) / (lam_var.sqrt() * var_u.sqrt());
            assert!(
                corr.abs() <= se_corr,
                "corr(lambda, U({k})) = {corr} exceeds {se_corr}"
            );
        }
    }

    #[test]
    fn mollified_decomposition_keeps_lambda_standard_normal() {
        // s > 0 path on an origin-centered grid that resolves the mollifier.
        let model = CovarianceModel::gaussian(1, 1.0, 1.0).unwrap();
        let grid = GridSpec::boxed(1, [64, 1, 1], 0.125, [-4.0, 0.0, 0.0]).unwrap();
        let sampler = GaussianSampler::new(&model, &grid).unwrap();
        let s = 0.5;
        let runs = 50_000usize;
        let mut lam_sq = 0.0;
        let mut lam_sum = 0.0;
        for seed in 0..runs as u64 {
            let f = sampler.sample(seed);
            let dec = decompose_gaussian(&model, &f, s).unwrap();
            lam_sum += dec.lambda;
            lam_sq += dec.lambda * dec.lambda;
            if seed == 0 {
                assert!(dec.reconstruction_error(&f) <= 1e-12);
            }
        }
        let r = runs as f64;
        let var = lam_sq / r - (lam_sum / r).powi(2);
        let se = (2.0 / r).sqrt();
        assert!((var - 1.0).abs() <= 3.0 * se, "Var(lambda) = {var}");
    }

    #[test]
    fn coarse_grid_fails_mass_check() {
        let model = CovarianceModel::gaussian(1, 1.0, 1.0).unwrap();
        let grid = GridSpec::cube(1, 4, 1.0).unwrap();
        let field = sample_gaussian(&model, &grid, 1).unwrap();
        assert!(matches!(
            decompose_gaussian(&model, &field, 0.3),
            Err(Error::QuadratureMass { .. })
        ));
    }
}
