use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("edge {index} has non-positive length {length}")]
    NonPositiveLength { index: usize, length: f64 },
    #[error("vertex {vertex} has non-positive mass {mass}")]
    NonPositiveMass { vertex: usize, mass: f64 },
    #[error("space has no vertices")]
    EmptySpace,
    #[error("sample set is empty")]
    EmptySample,
    #[error("not Ahlfors regular: C_A = {c_a} exceeds cap {cap}")]
    NotAhlfors { c_a: f64, cap: f64 },
    #[error("invalid gallery spec: {0}")]
    InvalidSpec(String),
    #[error("schema error in field `{field}`: {detail}")]
    Schema { field: String, detail: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("base vertex {0} is not a vertex of the space")]
    NoBasePoint(usize),
    #[error("kappa must be > 1, got {0}")]
    KappaOutOfRange(f64),
    #[error("piece {0} is empty")]
    EmptyPiece(usize),
    #[error("graph has no boundary vertices")]
    NoBoundary,
    #[error("geometric series diverges: eta = {eta} <= s = {s}")]
    SeriesDiverges { eta: f64, s: f64 },
    #[error("eta = {eta} must exceed p = {p}")]
    EtaNotAboveP { eta: f64, p: f64 },
    #[error("target equals the ball center")]
    XEqualsCenter,
    #[error("target lies outside the ball")]
    XOutsideBall,
    #[error("no vertex within resolution of radius {radius} around vertex {center}")]
    SphereEmpty { center: usize, radius: f64 },
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("g is not an upper gradient at vertex {vertex} (g = {g}, lip f = {lip})")]
    GNotUpperGradient { vertex: usize, g: f64, lip: f64 },
    #[error("set has zero mass")]
    ZeroMass,
    #[error("set is not connected")]
    NotConnected,
    #[error("set is not contained in the annulus")]
    NotInAnnulus,
    #[error("rho = {rho} is below the resolution {resolution}")]
    RhoBelowResolution { rho: f64, resolution: f64 },
    #[error("p = {p} must be below Q = {q}")]
    PNotBelowQ { p: f64, q: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
