use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("entity index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("edge {0} is phantom")]
    PhantomEdge(usize),
    #[error("cell ({0},{1},{2}) is not covered by any material box")]
    UncoveredCell(usize, usize, usize),
    #[error("nonphysical temperature: 1 + alpha*(T - T0) = {0} <= 0")]
    NonphysicalTemperature(f64),
}
