//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("grid side {side} is not an integer number of unit cells")]
    NonIntegerSide { side: f64 },

    #[error("covariance matrix is not positive semidefinite: most negative eigenvalue {min_eigenvalue:.6e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("unknown lattice site {site:?}: single-site support does not intersect the box")]
    UnknownSite { site: [i64; 3] },

    #[error("mollifier quadrature mass {mass:.12} deviates from 1 by more than 1e-10; refine the grid or enlarge the box")]
    QuadratureMass { mass: f64 },

    #[error("mollifier normalization constant underflowed (width s = {s})")]
    MollifierUnderflow { s: f64 },

    #[error("potential contains a non-finite value at node {node}")]
    NonFinitePotential { node: usize },

    #[error("a one-dimensional grid admits no magnetic field; gauge away the vector potential instead")]
    FieldInOneDimension,

    #[error("operator dimension {dim} exceeds the dense eigensolver limit {limit}; decouple or coarsen the grid")]
    DenseLimit { dim: usize, limit: usize },

    #[error("heat trace overflow: beta * lambda_min = {beta_lambda_min:.3e} is too negative")]
    HeatTraceOverflow { beta_lambda_min: f64 },

    #[error("spectral condition violated: Re z = {re_z} is not below the lowest eigenvalue {min_eigenvalue}")]
    SpectralCondition { re_z: f64, min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("node sets overlap; decoupling requires disjoint boxes")]
    OverlappingNodeSets,

    #[error("beta = {beta} is outside the admissible range (0, {limit}) for the Laplace coupling bound")]
    OutsideAdmissibleBeta { beta: f64, limit: f64 },

    #[error("cube edge {ell} is not contained in the positivity region; largest admissible edge is {max_ell:.6}")]
    CubeNotContained { ell: f64, max_ell: f64 },

    #[error("empty feasible set for bound minimization: {0}")]
    EmptyFeasibleSet(String),

    #[error("model admits no one-parameter decomposition: {0}")]
    NoDecomposition(String),

    #[error("spectral-averaging instance rejected: kappa = {kappa:.6e} is not strictly positive")]
    NonPositiveKappa { kappa: f64 },

    #[error("realization with seed {seed} failed: {source}")]
    Realization {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the seed of the realization that produced it.
    pub fn with_seed(self, seed: u64) -> Self {
        Error::Realization {
            seed,
            source: Box::new(self),
        }
    }
}
