//! Netlist extraction: electrothermal stamps, the two electromagnetic
//! formulations, and matched boundary terminations.

pub mod abc;
pub mod ea;
pub mod eh;
pub mod error;
pub mod et;
pub mod problem;

pub use abc::{build_abc_spec, characteristic_impedance, stamp_abc, AbcEdge, AbcSpec};
pub use ea::{essential_incidence, extract_ea, spanning_tree, EssentialIncidence, TreeCotree};
pub use eh::{coupling_gain, extract_eh, reluctance_sum};
pub use error::ExtractError;
pub use et::{extract_et, EtBoundarySpec, EtInitial, EtMaterials, EtOptions, RobinFace};
pub use problem::{EdgeCurrent, EmMaterials, Face};
