//! The abstract one-parameter spectral-averaging estimate: for self-adjoint
//! L and bounded K, M with kappa = inf_{K phi != 0} <phi, M phi> / <phi, K^2 phi>
//! strictly positive,
//!
//!   int dxi |g(xi)| <psi, K 1_I(L + xi M) K psi>
//!     <= |I| ||g||_inf / kappa * <psi, psi>.
//!
//! The spectral flow integral is evaluated by adaptive quadrature over a
//! xi-range outside which every eigenvalue of L + xi M has left I (Weyl
//! bracketing via the smallest eigenvalue of M); the spectral projection is
//! computed by full eigendecomposition per quadrature node.

use super::CheckReport;
use crate::quad::adaptive_simpson;
use crate::seed::{stream, StreamTag};
use crate::spectral::EnergyInterval;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

/// Weight |g| in the averaging integral.
#[derive(Debug, Clone)]
pub enum WeightFunction {
    One,
    GaussianBump { amplitude: f64, center: f64, width: f64 },
}

impl WeightFunction {
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            WeightFunction::One => 1.0,
            WeightFunction::GaussianBump {
                amplitude,
                center,
                width,
            } => amplitude * (-(xi - center).powi(2) / (2.0 * width * width)).exp(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            WeightFunction::One => 1.0,
            WeightFunction::GaussianBump { amplitude, .. } => amplitude.abs(),
        }
    }
}

/// One instance of the averaging estimate.
#[derive(Debug, Clone)]
pub struct SpectralAveragingInstance {
    pub l: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub weight: WeightFunction,
    pub interval: EnergyInterval,
    pub psi: DVector<f64>,
    pub label: String,
}

impl SpectralAveragingInstance {
    /// The rank-one instance where the estimate is an identity:
    /// K = M = 1, L = 0, g = 1, psi = 1, I = [0, 1].
    pub fn scalar() -> Self {
        SpectralAveragingInstance {
            l: DMatrix::from_element(1, 1, 0.0),
            k: DMatrix::from_element(1, 1, 1.0),
            m: DMatrix::from_element(1, 1, 1.0),
            weight: WeightFunction::One,
            interval: EnergyInterval::closed(0.0, 1.0).unwrap(),
            psi: DVector::from_element(1, 1.0),
            label: "scalar".to_string(),
        }
    }

    /// Randomized instance: random symmetric L, the projection-like
    /// K = diag(1, ..., 1, 0), M = K^2 + 0.1, a Gaussian bump weight and a
    /// random state on I = [-1, 1].
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = stream(seed, StreamTag::CheckInstance, 0);
        let mut l = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.sample(StandardNormal);
                l[(i, j)] = x;
                l[(j, i)] = x;
            }
        }
        let mut k = DMatrix::<f64>::identity(n, n);
        k[(n - 1, n - 1)] = 0.0;
        let m = &k * &k + DMatrix::<f64>::identity(n, n) * 0.1;
        let psi = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        SpectralAveragingInstance {
            l,
            k,
            m,
            weight: WeightFunction::GaussianBump {
                amplitude: 1.0,
                center: 0.0,
                width: 1.0,
            },
            interval: EnergyInterval::closed(-1.0, 1.0).unwrap(),
            psi,
            label: format!("random-{n}x{n}-seed{seed}"),
        }
    }

    /// kappa, recomputed as the smallest generalized eigenvalue of (M, K^2)
    /// restricted to the range of K.
    pub fn kappa(&self) -> Result<f64> {
        let k_sq = &self.k * &self.k;
        let eig = k_sq.clone().symmetric_eigen();
        let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        if max_ev <= 0.0 {
            return Err(Error::NonPositiveKappa { kappa: 0.0 });
        }
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > 1e-12 * max_ev)
            .collect();
        // restrict to the K^2 eigenbasis of its range; there K^2 is diagonal
        let mut kappa = f64::INFINITY;
        let basis: Vec<DVector<f64>> = keep.iter().map(|&i| eig.eigenvectors.column(i).into()).collect();
        let r = basis.len();
        let mut a = DMatrix::<f64>::zeros(r, r);
        for i in 0..r {
            let mi = &self.m * &basis[i];
            for j in 0..r {
                a[(i, j)] = basis[j].dot(&mi);
            }
        }
        for (i, &ki) in keep.iter().enumerate() {
            let di = eig.eigenvalues[ki].sqrt();
            for (j, &kj) in keep.iter().enumerate() {
                a[(i, j)] /= di * eig.eigenvalues[kj].sqrt();
            }
        }
        for ev in a.symmetric_eigen().eigenvalues.iter() {
            kappa = kappa.min(*ev);
        }
        if !(kappa > 0.0) {
            return Err(Error::NonPositiveKappa { kappa });
        }
        Ok(kappa)
    }

    /// <psi, K 1_I(L + xi M) K psi> at one xi.
    fn spectral_weight(&self, xi: f64) -> f64 {
        let op = &self.l + &self.m * xi;
        let eig = op.symmetric_eigen();
        let k_psi = &self.k * &self.psi;
        let mut sum = 0.0;
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if self.interval.contains(lambda) {
                let overlap = eig.eigenvectors.column(idx).dot(&k_psi);
                sum += overlap * overlap;
            }
        }
        sum
    }

    /// xi-range outside which every eigenvalue of L + xi M has left I.
    fn bracket(&self) -> Result<(f64, f64)> {
        let m_min = self
            .m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(m_min > 0.0) {
            return Err(Error::Model(
                "xi-range bracketing needs a strictly positive M".into(),
            ));
        }
        let l_eigs = self.l.clone().symmetric_eigen().eigenvalues;
        let l_min = l_eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let l_max = l_eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = 1e-3;
        let hi = ((self.interval.sup() - l_min) / m_min).max(0.0) + pad;
        let lo = ((self.interval.lower - l_max) / m_min).min(0.0) - pad;
        Ok((lo, hi))
    }
}

/// Evaluate the averaging integral by adaptive quadrature.
/// Returns (integral, error_estimate).
pub fn spectral_averaging_integral(
    instance: &SpectralAveragingInstance,
) -> Result<(f64, f64)> {
    let (lo, hi) = instance.bracket()?;
    let f = |xi: f64| instance.weight.eval(xi).abs() * instance.spectral_weight(xi);
    Ok(adaptive_simpson(&f, lo, hi, 1e-10, 10, 48))
}

/// Check the estimate on one instance: the quadrature value must not exceed
/// |I| ||g||_inf / kappa * ||psi||^2 by more than the quadrature error bound
/// plus the tolerance.
pub fn check_spectral_averaging(instance: &SpectralAveragingInstance) -> Result<CheckReport> {
    let kappa = instance.kappa()?;
    let (integral, quad_err) = spectral_averaging_integral(instance)?;
    let rhs = instance.interval.length() * instance.weight.sup_norm() / kappa
        * instance.psi.dot(&instance.psi);
    let scale = rhs.max(1.0);
    let margin = (integral - rhs - quad_err) / scale;
    Ok(CheckReport::new(
        "spectral-averaging",
        json!({
            "label": instance.label,
            "n": instance.l.nrows(),
            "kappa": kappa,
            "integral": integral,
            "quadrature_error": quad_err,
            "rhs": rhs,
        }),
        margin,
        1e-8,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_instance_achieves_equality() {
        let inst = SpectralAveragingInstance::scalar();
        assert!((inst.kappa().unwrap() - 1.0).abs() < 1e-14);
        let (integral, err) = spectral_averaging_integral(&inst).unwrap();
        // exact spectral flow: the integral equals |I| = 1
        assert!(
            (integral - 1.0).abs() <= 1e-8,
            "integral {integral}, err estimate {err}"
        );
        let report = check_spectral_averaging(&inst).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn weight_scaling_is_homogeneous() {
        let mut inst = SpectralAveragingInstance::scalar();
        inst.weight = WeightFunction::GaussianBump {
            amplitude: 3.0,
            center: 0.5,
            width: 100.0, // effectively constant 3 on [0, 1]
        };
        let (integral, _) = spectral_averaging_integral(&inst).unwrap();
        // both sides scale by the amplitude: integral close to 3 |I|
        assert!((integral - 3.0).abs() < 1e-4, "integral {integral}");
        let report = check_spectral_averaging(&inst).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn randomized_instances_pass() {
        for seed in 0..20u64 {
            let inst = SpectralAveragingInstance::random(6, seed);
            let report = check_spectral_averaging(&inst).unwrap();
            assert!(
                report.pass,
                "seed {seed}: margin {} tolerance {}",
                report.margin, report.tolerance
            );
        }
    }

    #[test]
    fn kappa_on_random_instance_is_positive_and_consistent() {
        let inst = SpectralAveragingInstance::random(6, 3);
        let kappa = inst.kappa().unwrap();
        // M = K^2 + 0.1 with K a projection: on the range of K the quotient
        // is (x + 0.1 x') / x >= 1 + 0.1 ... bounded below by 1 + 0.1
        assert!(kappa >= 1.0 + 0.1 - 1e-12, "kappa {kappa}");
    }

    #[test]
    fn singular_m_is_rejected() {
        let mut inst = SpectralAveragingInstance::random(4, 1);
        inst.m = DMatrix::zeros(4, 4);
        assert!(inst.kappa().is_err());
    }
}
