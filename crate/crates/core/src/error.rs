use thiserror::Error;

/// Everything that can go wrong when building or running one of the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid qubit density: {0}")]
    InvalidDensity(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid momentum grid: {0}")]
    InvalidGrid(String),

    #[error("initial momentum distribution leaks {mass:.3e} probability outside [{p_min}, {p_max}]")]
    BoundaryMass { mass: f64, p_min: f64, p_max: f64 },

    #[error("boundary guard: support [{lo:.4}, {hi:.4}] after t = {t} leaves the periodic domain [{p_min}, {p_max}]")]
    BoundaryGuard {
        lo: f64,
        hi: f64,
        p_min: f64,
        p_max: f64,
        t: f64,
    },

    #[error("field is not normalized (integral of trace = {integral:.12})")]
    NotNormalized { integral: f64 },

    #[error("gamma_c = 0 with nonzero coupling leaves the measurement coefficient lambda/sqrt(8 gamma_c) undefined")]
    UndefinedMeasurementCoefficient,

    #[error("trade-off gamma_c * gamma_q >= lambda^2 / 16 violated (margin {margin:.4e})")]
    TradeoffViolated { margin: f64 },

    #[error("time {0} was not recorded")]
    UnrecordedTime(f64),

    #[error("unsupported observable: {0}")]
    UnsupportedObservable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors that flag a broken internal invariant rather than bad input.
    pub fn is_invariant_breach(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
