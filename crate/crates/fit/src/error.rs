use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error(transparent)]
    Solver(#[from] fieldnet_solver::SolverError),
    #[error(transparent)]
    Extract(#[from] fieldnet_extract::ExtractError),
    #[error("fixed-point iteration did not converge at t = {0}")]
    FixedPoint(f64),
    #[error("time step {dt} violates the CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("{0}")]
    Other(String),
}
