//! Circuit solver over the emitted netlist dialect: DC operating point,
//! implicit-Euler transient with adaptive stepping, and AC sweeps.

pub mod ac;
pub mod compile;
pub mod dc;
pub mod error;
pub mod linalg;
pub mod mna;
pub mod result;
pub mod transient;

pub use ac::{ac_solve, AcOptions};
pub use dc::dc_operating_point;
pub use error::SolverError;
pub use mna::{assemble, MnaSystem, Observable};
pub use result::{AxisKind, SimResult, Trace, TraceData};
pub use transient::{transient_solve, TransientOptions};
