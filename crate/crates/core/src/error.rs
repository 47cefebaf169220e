use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("Wood anomaly: |alpha_{n}| = {alpha_abs} coincides with wavenumber {wavenumber}")]
    WoodAnomaly { n: i64, alpha_abs: f64, wavenumber: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("profile too steep for a valid triangulation at h = {target_h}: {reason}")]
    ProfileTooSteep { target_h: f64, reason: String },

    #[error("degenerate edge of length {0} on the interface")]
    DegenerateEdge(f64),

    #[error("degenerate triangle {index} with area {area}")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("edge ({0}, {1}) lies on no boundary or interface set")]
    UnclassifiableEdge(usize, usize),

    #[error("left and right boundary vertices do not pair up: {0}")]
    PeriodicMismatch(String),

    #[error("mesh format error at line {line}: {message}")]
    MeshFormat { line: usize, message: String },

    #[error("dof map and solution do not belong to this mesh")]
    InconsistentMesh,

    #[error("unsupported quadrature order {0}")]
    QuadratureOverflow(usize),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("singular 3x3 coefficient system for the flat-interface solution")]
    SingularSystem,
}
