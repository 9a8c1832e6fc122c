//! Shared problem-description pieces consumed by the extractors and the
//! reference field solvers.

use fieldnet_core::{Axis, DiagonalOperator, GridTopology};
use fieldnet_netlist::Waveform;

/// A domain boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub fn normal(self) -> Axis {
        match self {
            Face::XMin | Face::XMax => Axis::X,
            Face::YMin | Face::YMax => Axis::Y,
            Face::ZMin | Face::ZMax => Axis::Z,
        }
    }

    pub fn is_max(self) -> bool {
        matches!(self, Face::XMax | Face::YMax | Face::ZMax)
    }

    /// Plane index along the normal axis.
    pub fn plane(self, topo: &GridTopology) -> usize {
        if self.is_max() {
            topo.spec.cells(self.normal())
        } else {
            0
        }
    }

    /// Whether a point (i,j,k) lies on this face.
    pub fn contains_point(self, topo: &GridTopology, i: usize, j: usize, k: usize) -> bool {
        let c = match self.normal() {
            Axis::X => i,
            Axis::Y => j,
            Axis::Z => k,
        };
        c == self.plane(topo)
    }

    pub fn parse(s: &str) -> Option<Face> {
        Some(match s {
            "xmin" => Face::XMin,
            "xmax" => Face::XMax,
            "ymin" => Face::YMin,
            "ymax" => Face::YMax,
            "zmin" => Face::ZMin,
            "zmax" => Face::ZMax,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::XMin => "xmin",
            Face::XMax => "xmax",
            Face::YMin => "ymin",
            Face::YMax => "ymax",
            Face::ZMin => "zmin",
            Face::ZMax => "zmax",
        }
    }
}

/// Electromagnetic material matrices.
#[derive(Debug, Clone)]
pub struct EmMaterials {
    pub m_sigma: DiagonalOperator,
    pub m_eps: DiagonalOperator,
    pub m_nu: DiagonalOperator,
}

/// Impressed grid current on one primal edge (through its dual facet).
#[derive(Debug, Clone)]
pub struct EdgeCurrent {
    pub edge: usize,
    pub waveform: Waveform,
}

/// Mark all edges lying in a boundary face (tangential edges) in a mask.
pub fn mark_face_edges(topo: &GridTopology, face: Face, mask: &mut [bool]) {
    for e in topo.non_phantom_edges() {
        let (axis, i, j, k) = topo.entity_coords(e);
        if axis == face.normal() {
            continue;
        }
        let on_plane = match face.normal() {
            Axis::X => i == face.plane(topo),
            Axis::Y => j == face.plane(topo),
            Axis::Z => k == face.plane(topo),
        };
        if on_plane {
            mask[e] = true;
        }
    }
}

/// Mark all edges whose endpoints both fall inside the closed box (metres).
pub fn mark_box_edges(topo: &GridTopology, bounds: &[[f64; 2]; 3], mask: &mut [bool]) {
    let planes = [
        topo.spec.planes(Axis::X),
        topo.spec.planes(Axis::Y),
        topo.spec.planes(Axis::Z),
    ];
    let tol = 1e-12;
    let inside = |i: usize, j: usize, k: usize| -> bool {
        let p = [planes[0][i], planes[1][j], planes[2][k]];
        (0..3).all(|a| p[a] >= bounds[a][0] - tol && p[a] <= bounds[a][1] + tol)
    };
    for e in topo.non_phantom_edges() {
        let (axis, i, j, k) = topo.entity_coords(e);
        let (i2, j2, k2) = match axis {
            Axis::X => (i + 1, j, k),
            Axis::Y => (i, j + 1, k),
            Axis::Z => (i, j, k + 1),
        };
        if inside(i, j, k) && inside(i2, j2, k2) {
            mask[e] = true;
        }
    }
}
