use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symplectic: max |A^T J0 A - J0| = {deviation:.3e} exceeds {tol:.3e}")]
    NotSymplectic { deviation: f64, tol: f64 },

    #[error("ill-conditioned polar decomposition: smallest eigenvalue of A^T A is {min_eig:.3e}")]
    IllConditioned { min_eig: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("damping bound violated: Re Theta / |x|^2 = {ratio:.3e} >= 0 at t = {t}, u = {u}")]
    DampingViolated { ratio: f64, t: f64, u: f64, sample: Vec<f64> },

    #[error("sample set is not closed under n -> -n (no mirror for {0:?})")]
    MissingMirror(Vec<f64>),

    #[error("quadrature did not converge: relative change {rel_change:.3e} under node doubling")]
    NonConvergence { rel_change: f64 },

    #[error("spectral tail not covered: top eigenphase {top:.3} must exceed {needed:.3}")]
    TailCoverage { top: f64, needed: f64 },

    #[error("eigenphase {mu} at level {k}, index {j} is not positive")]
    NonPositiveEigenphase { k: usize, j: usize, mu: f64 },

    #[error("lifted-flow ODE disagrees with closed-form phases by {deviation:.3e}")]
    ConventionMismatch { deviation: f64 },

    #[error("resonant period: linearization is the identity but the fixed locus is not everything")]
    Resonant,

    #[error("window around tau0 = {tau0} contains another period {other}")]
    WindowNotIsolated { tau0: f64, other: f64 },

    #[error("point leaves the affine chart: |w| = {0:.3} >= 0.5")]
    ChartDomain(f64),
}
