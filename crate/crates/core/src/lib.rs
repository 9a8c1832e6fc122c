//! Staggered primal/dual hexahedral grid pair with canonical numbering,
//! signed incidence operators and diagonal material matrices.
//!
//! All entity slots are fully allocated: each of the three directional
//! blocks holds one slot per grid point, and slots whose entity would
//! stick out of the domain are flagged phantom. Operator rows of phantom
//! entities are identically zero, which keeps the shift-block structure
//! of the curl matrix intact and makes indexing uniform.

pub mod error;
pub mod grid;
pub mod incidence;
pub mod materials;

pub use error::CoreError;
pub use grid::{build_topology, Axis, EdgeNeighbourhood, EntityKind, GridSpec, GridTopology};
pub use incidence::{dual_operators, primal_operators, IncidenceSet, IntSparse};
pub use materials::{
    edge_matrix, edge_sigma_terms, eval_sigma_terms, facet_matrix, node_matrix, rasterize,
    sigma_of_t, CellFields, DiagonalOperator, MaterialBox, MaterialProps, MatrixKind, SigmaTerm,
};

/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.8541878128e-12;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 1.25663706212e-6;
/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
