use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("block shape mismatch: {0}")]
    Shape(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("operator {operator} is not self-adjoint in block {block} (deviation {deviation:.3e})")]
    NotHermitian {
        operator: usize,
        block: usize,
        deviation: f64,
    },

    #[error("spectral pair requires a nonzero direction t")]
    ZeroDirection,

    #[error("direction has {got} components, expected {expected}")]
    DirectionLength { expected: usize, got: usize },

    #[error("eigensolver did not converge in block {block}")]
    EigenSolver { block: usize },

    #[error("element is not in the positive unit ball: spectrum spans [{min:.3e}, {max:.3e}]")]
    NotInUnitBall { min: f64, max: f64 },

    #[error("isotrace level {0} is outside [0, 1]")]
    LevelOutOfRange(f64),

    #[error("face is a single point: cut-down projection r is zero")]
    DegenerateFace,

    #[error("operation requires a proper face, got the whole scale [0, 1]")]
    NotProperFace,

    #[error("combined normal has no t-component (pure trace direction); refine the direction sample")]
    PureTraceNormal,

    #[error("a facial complex needs at least one spectral pair")]
    EmptyComplex,

    #[error("minimal exposed chain did not stabilize within {0} levels")]
    ChainDidNotConverge(usize),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
