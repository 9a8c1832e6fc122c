use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("netlist error: {0}")]
    Netlist(#[from] fieldnet_netlist::NetlistError),
    #[error("floating node '{0}': no conduction or source path")]
    FloatingNode(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("DC operating point requires initial conditions: {0}")]
    RequiresIc(String),
    #[error("transient failed at t = {t}: {reason}")]
    TransientFailure { t: f64, reason: String },
    #[error("unsupported control element '{0}' ({1})")]
    UnsupportedControl(String, String),
    #[error("expression not linear, rejected for AC analysis: {0}")]
    NonlinearAc(String),
    #[error("unknown node or element '{0}' in expression")]
    UnknownReference(String),
    #[error("{0}")]
    Other(String),
}
