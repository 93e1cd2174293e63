use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown surface `{0}`")]
    UnknownSurface(String),

    #[error("degenerate metric at (u, v) = ({u}, {v})")]
    DegenerateMetric { u: f64, v: f64 },

    #[error("distortion undefined: every sample is umbilic-flat")]
    DistortionUndefined,

    #[error("direction is normal to the surface on the entire grid")]
    NormalDirection,

    #[error("near-critical level {level}: node ({u}, {v}) has |f - t| and |grad f| below tolerance")]
    NearCriticalLevel { level: f64, u: f64, v: f64 },

    #[error("undefined frequency: {0}")]
    UndefinedFrequency(String),

    #[error("eigen-solver did not converge")]
    EigenSolver,

    #[error("test function must be positive (found {value} at sample {index})")]
    NonPositiveTestFunction { index: usize, value: f64 },

    #[error("flow not constant across levels: relative deviation {deviation:.3e} at t = {t}")]
    FlowNotConstant { t: f64, deviation: f64 },

    #[error("invalid interval: t1 = {t1} must be below t2 = {t2}")]
    InvalidInterval { t1: f64, t2: f64 },

    #[error("empty level set at t = {0}")]
    EmptyLevelSet(f64),

    #[error("level {0} is not tubular: open arcs present")]
    NotTubular(f64),

    #[error("critical threshold {0} sampled")]
    CriticalThreshold(f64),

    #[error("direction is not regular: compact section component at level {level}")]
    NotRegular { level: f64 },

    #[error("t grid too short: {decades:.2} decades (need at least 2)")]
    GridTooShort { decades: f64 },

    #[error("surface not proper at radius {radius}: projected truncation boundary reaches {reach}")]
    NotProper { radius: f64, reach: f64 },

    #[error("projective volume is infinite")]
    InfiniteVolume,

    #[error("euler characteristic unknown")]
    UnknownEulerCharacteristic,

    #[error("mismatched reports: {0}")]
    MismatchedReports(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid grid spec `{spec}`: {reason}")]
    InvalidGridSpec { spec: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
