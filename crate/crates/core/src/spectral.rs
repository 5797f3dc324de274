//! Dense Hermitian eigendecomposition, eigenvalue counting, finite-volume
//! integrated density of states, heat traces, semigroup and resolvent-power
//! application.
//!
//! Counting follows the left-continuous convention throughout: the Heaviside
//! function is the indicator of the open positive half-line, so an eigenvalue
//! exactly at the probe energy is not counted.

use crate::operator::HermitianOperator;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Default dense-eigensolver size limit; larger operators must be decoupled
/// or coarsened.
pub const DENSE_LIMIT: usize = 8192;

/// Eigenvalues (ascending, with multiplicity) and optional eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<DMatrix<Complex64>>,
    residual: Option<f64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&DMatrix<Complex64>> {
        self.eigenvectors.as_ref()
    }

    /// Largest residual max-norm ||H v - lambda v||_inf over retained pairs,
    /// when eigenvectors were computed.
    pub fn residual(&self) -> Option<f64> {
        self.residual
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Number of eigenvalues strictly below `e`.
    pub fn count_below(&self, e: f64) -> usize {
        self.eigenvalues.partition_point(|&x| x < e)
    }
}

/// Counting interval with explicit boundary-membership flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyInterval {
    pub lower: f64,
    pub upper: f64,
    pub closed_lower: bool,
    pub closed_upper: bool,
}

impl EnergyInterval {
    pub fn closed(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, true, true)
    }

    /// Half-open [lower, upper), the natural ladder element.
    pub fn half_open(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, true, false)
    }

    pub fn new(lower: f64, upper: f64, closed_lower: bool, closed_upper: bool) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::Model(format!(
                "interval needs lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(EnergyInterval {
            lower,
            upper,
            closed_lower,
            closed_upper,
        })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Least upper bound of the interval.
    pub fn sup(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, x: f64) -> bool {
        let lower_ok = if self.closed_lower { x >= self.lower } else { x > self.lower };
        let upper_ok = if self.closed_upper { x <= self.upper } else { x < self.upper };
        lower_ok && upper_ok
    }
}

/// Eigenvalue count in an interval together with its volume normalization.
#[derive(Debug, Clone, Copy)]
pub struct CountingResult {
    pub count: usize,
    pub volume: f64,
}

impl CountingResult {
    pub fn per_volume(&self) -> f64 {
        self.count as f64 / self.volume
    }
}

/// Full spectrum with multiplicity, ascending, no eigenvectors.
pub fn eigenvalues(op: &HermitianOperator) -> Result<Spectrum> {
    eigenvalues_with_limit(op, DENSE_LIMIT)
}

pub fn eigenvalues_with_limit(op: &HermitianOperator, limit: usize) -> Result<Spectrum> {
    if op.dim() > limit {
        return Err(Error::DenseLimit {
            dim: op.dim(),
            limit,
        });
    }
    let mut ev: Vec<f64> = if op.bonds().is_empty() {
        op.diag().to_vec()
    } else {
        op.to_dense().symmetric_eigenvalues().iter().copied().collect()
    };
    ev.sort_by(f64::total_cmp);
    Ok(Spectrum {
        eigenvalues: ev,
        eigenvectors: None,
        residual: None,
    })
}

/// Spectrum with eigenvectors (needed for semigroup and resolvent action).
pub fn eigen_full(op: &HermitianOperator) -> Result<Spectrum> {
    eigen_full_with_limit(op, DENSE_LIMIT)
}

pub fn eigen_full_with_limit(op: &HermitianOperator, limit: usize) -> Result<Spectrum> {
    if op.dim() > limit {
        return Err(Error::DenseLimit {
            dim: op.dim(),
            limit,
        });
    }
    let dense = op.to_dense();
    let eig = dense.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(op.dim(), op.dim());
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    // residual of the worst retained pair
    let mut residual = 0.0f64;
    for (col, &lambda) in eigenvalues.iter().enumerate() {
        let v = vectors.column(col);
        let hv = &dense * v;
        let r = hv
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b * Complex64::new(lambda, 0.0)).norm())
            .fold(0.0f64, f64::max);
        residual = residual.max(r);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(vectors),
        residual: Some(residual),
    })
}

/// Number of eigenvalues in the interval, with multiplicity; boundary
/// membership follows the interval's open/closed flags.
pub fn count_in_interval(spec: &Spectrum, interval: &EnergyInterval, volume: f64) -> CountingResult {
    let count = spec
        .eigenvalues
        .iter()
        .filter(|&&x| interval.contains(x))
        .count();
    CountingResult { count, volume }
}

/// Finite-volume integrated density of states N(E)/|box|: the number of
/// eigenvalues strictly below E divided by the volume (left continuity,
/// Theta(0) = 0).
pub fn finite_volume_ids(spec: &Spectrum, e: f64, volume: f64) -> f64 {
    spec.count_below(e) as f64 / volume
}

/// Partition-function trace sum_k exp(-beta lambda_k).
pub fn heat_trace(spec: &Spectrum, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Model(format!("heat trace needs beta > 0, got {beta}")));
    }
    let beta_lambda_min = beta * spec.min_eigenvalue();
    if -beta_lambda_min > 700.0 {
        return Err(Error::HeatTraceOverflow { beta_lambda_min });
    }
    Ok(spec.eigenvalues.iter().map(|&l| (-beta * l).exp()).sum())
}

/// exp(-t H) psi through the eigendecomposition; t = 0 returns psi exactly.
pub fn semigroup_apply(spec: &Spectrum, t: f64, psi: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if !(t >= 0.0) {
        return Err(Error::Model(format!("semigroup time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(psi.clone());
    }
    apply_function(spec, psi, |l| Complex64::new((-t * l).exp(), 0.0))
}

/// (H - z)^{-alpha} psi through the eigendecomposition. Requires
/// Re z < min spec H; the principal branch of the complex power applies.
pub fn resolvent_power_apply(
    spec: &Spectrum,
    z: Complex64,
    alpha: f64,
    psi: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    if !(alpha > 0.0) {
        return Err(Error::Model(format!("resolvent power must be > 0, got {alpha}")));
    }
    if z.re >= spec.min_eigenvalue() {
        return Err(Error::SpectralCondition {
            re_z: z.re,
            min_eigenvalue: spec.min_eigenvalue(),
        });
    }
    apply_function(spec, psi, |l| (Complex64::new(l, 0.0) - z).powf(-alpha))
}

fn apply_function(
    spec: &Spectrum,
    psi: &DVector<Complex64>,
    f: impl Fn(f64) -> Complex64,
) -> Result<DVector<Complex64>> {
    let vectors = spec.eigenvectors.as_ref().ok_or_else(|| {
        Error::Model("spectral function application needs eigenvectors (use eigen_full)".into())
    })?;
    if psi.len() != vectors.nrows() {
        return Err(Error::DimensionMismatch {
            expected: vectors.nrows(),
            got: psi.len(),
        });
    }
    let coeffs = vectors.adjoint() * psi;
    let mut scaled = coeffs;
    for (k, c) in scaled.iter_mut().enumerate() {
        *c *= f(spec.eigenvalues[k]);
    }
    Ok(vectors * scaled)
}
