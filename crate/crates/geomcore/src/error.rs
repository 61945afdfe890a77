use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("expected {expected} coefficients, got {got}")]
    Length { expected: usize, got: usize },
    #[error("chart has more than one time coordinate")]
    MultipleTime,
    #[error("`{0}` is not linear in the {1} symbols")]
    NotLinear(String, &'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Sym(#[from] symexpr::SymError),
}
