use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("elements carry different deformation matrices")]
    ThetaMismatch,

    #[error("deformation matrix is not antisymmetric at ({row}, {col})")]
    NotAntisymmetric { row: usize, col: usize },

    #[error("invalid truncation: radius {radius} must exceed margin {margin}")]
    InvalidTruncation { radius: u32, margin: u32 },

    #[error("support radius {support} exceeds truncation margin {margin}")]
    MarginViolation { support: u32, margin: u32 },

    #[error("spectral gap violated: distance {distance:.3e} below {gap:.3e}")]
    SpectralGap { distance: f64, gap: f64 },

    #[error("element is not normal at truncation (commutator norm {0:.3e})")]
    NonNormal(f64),

    #[error("singular system: smallest singular value {value:.3e} below {gap:.3e}")]
    Singular { value: f64, gap: f64 },

    #[error("homogeneous component evaluated at the origin without a convention")]
    OriginEvaluation,

    #[error("derivative order {order} exceeds cap {cap}")]
    DerivativeCap { order: u32, cap: u32 },

    #[error("jet has {available} components, {required} required")]
    JetTooShort { available: usize, required: usize },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("symbol is only defined on lattice points")]
    NotLattice,

    #[error("cut {cut} too close to truncation edge (trusted up to {limit})")]
    TruncationEdge { cut: f64, limit: f64 },

    #[error("fit needs at least two usable points, got {0}")]
    DegenerateFit(usize),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("window check `{check}` failed: {value:.3e} exceeds {tol:.1e}")]
    WindowCheck { check: &'static str, value: f64, tol: f64 },

    #[error("quadrature box {box_radius} does not cover lattice radius {lattice}")]
    QuadratureBox { box_radius: f64, lattice: u32 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
