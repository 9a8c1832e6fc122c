use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Core(#[from] fieldnet_core::CoreError),
    #[error("netlist error: {0}")]
    Netlist(#[from] fieldnet_netlist::NetlistError),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("impressed source on PEC edge {0}")]
    SourceOnPec(usize),
    #[error("edge {0} is both PEC and ABC-terminated")]
    PecAbcConflict(usize),
    #[error("grid graph is disconnected at node {0}")]
    Disconnected(usize),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}
