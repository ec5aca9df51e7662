use thiserror::Error;

/// Everything that can go wrong across the simulator. Messages name the
/// violated bound so callers can surface them directly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid side must be even and at least 4, got {side}")]
    GridSide { side: usize },

    #[error("vertex ({x}, {y}) out of range for side {side}")]
    VertexOutOfRange { x: usize, y: usize, side: usize },

    #[error("cell ({rx}, {ry}) out of range for cell side {cell_side}")]
    CellOutOfRange { rx: usize, ry: usize, cell_side: usize },

    #[error("cell offset components must be 0 or 1, got ({sx}, {sy})")]
    CellOffsetOutOfRange { sx: u8, sy: u8 },

    #[error("state has {got} amplitudes, grid needs {expected}")]
    StateLength { expected: usize, got: usize },

    #[error("state norm^2 is {norm_sq}, must be 1 within 1e-9")]
    NotNormalized { norm_sq: f64 },

    #[error("vertex count {n} is not the square of an even side >= 4")]
    VertexCount { n: usize },

    #[error("time step {dt} outside (0, 0.05]")]
    TimeStep { dt: f64 },

    #[error("time horizon {t_max} must be positive and finite")]
    TimeHorizon { t_max: f64 },

    #[error("sample stride must be at least 1")]
    SampleStride,

    #[error("coupling ({g}, {c}) invalid: both must be finite and nonnegative")]
    Coupling { g: f64, c: f64 },

    #[error("norm drift {drift:e} in one step at t = {t} exceeds 1e-6; integration failed")]
    IntegrationFailure { t: f64, drift: f64 },

    #[error("no local maximum above 3x the initial overlap before the horizon")]
    NoPeak,

    #[error("half-maximum crossing not bracketed on the {side} side of the peak")]
    WidthNotBracketed { side: &'static str },

    #[error("rescaled coupling energy is zero; two-level eigenvectors are undefined")]
    DegenerateCoupling,

    #[error("coupling window empty: c_min = {c_min} >= c_max = {c_max}")]
    InfeasibleCoupling { c_min: f64, c_max: f64 },

    #[error("fixed-point iteration did not reach residual 1e-10 at t = {t}")]
    FixedPointDivergence { t: f64 },

    #[error("regime separation T1*ln(N) = {t1_log_n} exceeds T0 = {t0}; asymptotic estimate invalid")]
    RegimeOverlap { t1_log_n: f64, t0: f64 },

    #[error("fit needs at least 3 usable rows, got {got}")]
    FitRows { got: usize },

    #[error("ansatz parameter {name} must be positive and finite, got {value}")]
    AnsatzParam { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
