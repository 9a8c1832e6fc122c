//! Reference field solvers operating directly on the FIT matrices: the
//! coupled electrothermal transient, electromagnetic frequency-domain and
//! leapfrog time-domain solves, and resonance peak extraction.

pub mod em;
pub mod error;
pub mod et;
pub mod peaks;

pub use em::{cfl_timestep, em_frequency_solve, em_leapfrog, em_sweep, LeapfrogOptions};
pub use error::FitError;
pub use et::{et_transient, EtTransientOptions};
pub use peaks::find_resonances;
