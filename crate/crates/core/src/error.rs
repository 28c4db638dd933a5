use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("degenerate triangle {0} (area below tolerance)")]
    DegenerateTriangle(usize),
    #[error("triangle {tri} references node {node} out of range")]
    DanglingNode { tri: usize, node: usize },
    #[error("duplicate triangle {0}")]
    DuplicateTriangle(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("point ({x}, {y}) lies outside element {element}")]
    PointOutside { element: usize, x: f64, y: f64 },
    #[error("invalid crack: {0}")]
    InvalidCrack(String),
    #[error("branch functions are singular at the crack tip (r = 0)")]
    TipSingularity,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conflicting Dirichlet entries for dof {0}")]
    ConflictingDirichlet(usize),
    #[error("non-finite entry in element {0} stiffness")]
    NonFinite(usize),
    #[error("conjugate gradient did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("conjugate gradient breakdown: non-positive curvature {0:e}")]
    Breakdown(f64),
    #[error("interaction domain invalid: {0}")]
    InteractionDomain(String),
    #[error("no propagation direction: K_I = K_II = 0")]
    NoPropagationDirection,
    #[error("evaluation point outside the exact-field domain: {0}")]
    OutsideFieldDomain(String),
    #[error("zero exact norm")]
    ZeroExactNorm,
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::DegenerateTriangle(_) => "degenerate_triangle",
            Error::DanglingNode { .. } => "dangling_node",
            Error::DuplicateTriangle(_) => "duplicate_triangle",
            Error::InvalidMesh(_) => "invalid_mesh",
            Error::PointOutside { .. } => "point_outside",
            Error::InvalidCrack(_) => "invalid_crack",
            Error::TipSingularity => "tip_singularity",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ConflictingDirichlet(_) => "conflicting_dirichlet",
            Error::NonFinite(_) => "non_finite",
            Error::NotConverged { .. } => "not_converged",
            Error::Breakdown(_) => "breakdown",
            Error::InteractionDomain(_) => "interaction_domain",
            Error::NoPropagationDirection => "no_propagation_direction",
            Error::OutsideFieldDomain(_) => "outside_field_domain",
            Error::ZeroExactNorm => "zero_exact_norm",
            Error::Config(_) => "config",
        }
    }
}
