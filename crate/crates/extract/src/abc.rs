//! Matched terminations realising the first-order absorbing boundary
//! condition on designated boundary edges.

use fieldnet_core::{Axis, DiagonalOperator, EntityKind, GridTopology};
use fieldnet_netlist::names::edge_node;
use fieldnet_netlist::{Element, ElementKind, Netlist};

use crate::error::ExtractError;
use crate::problem::Face;

/// One terminated boundary edge with its precomputed line data.
#[derive(Debug, Clone)]
pub struct AbcEdge {
    /// The boundary edge carrying the termination.
    pub edge: usize,
    /// The parallel edge one layer inside, which feeds the line.
    pub inner_edge: usize,
    /// Characteristic impedance (ohms).
    pub z0: f64,
    /// Grid wave speed in cells per second along the boundary normal.
    pub speed_cells: f64,
}

/// Boundary face with its terminated edges.
#[derive(Debug, Clone)]
pub struct AbcSpec {
    pub face: Face,
    pub edges: Vec<AbcEdge>,
}

/// Characteristic impedance of the grid transmission line feeding a
/// tangential boundary edge: Z0 = 1/sqrt(Mnu_avg * Meps), with the
/// reluctance averaged over the two facets stacked along the propagation
/// direction and the capacitance read from the parallel edge one layer in
/// front of the boundary.
pub fn characteristic_impedance(
    topo: &GridTopology,
    m_nu: &DiagonalOperator,
    m_eps: &DiagonalOperator,
    m: usize,
    face: Face,
) -> Result<AbcEdge, ExtractError> {
    let normal = face.normal();
    let (axis, i, j, k) = topo.entity_coords(m);
    if axis == normal {
        return Err(ExtractError::InvalidSpec(format!(
            "edge {m} is normal to face {}, cannot terminate it",
            face.name()
        )));
    }
    let plane = face.plane(topo);
    let pos = match normal {
        Axis::X => i,
        Axis::Y => j,
        Axis::Z => k,
    };
    if pos != plane {
        return Err(ExtractError::InvalidSpec(format!(
            "edge {m} does not lie on face {}",
            face.name()
        )));
    }
    // step inward along the normal
    let step = |c: usize, by: i64| -> i64 { c as i64 + by };
    let inward: i64 = if face.is_max() { -1 } else { 1 };
    let at = |d: i64| -> Option<(usize, usize, usize)> {
        let (mut ci, mut cj, mut ck) = (i as i64, j as i64, k as i64);
        match normal {
            Axis::X => ci = step(i, inward * d),
            Axis::Y => cj = step(j, inward * d),
            Axis::Z => ck = step(k, inward * d),
        }
        (ci >= 0 && cj >= 0 && ck >= 0).then(|| (ci as usize, cj as usize, ck as usize))
    };
    let (i1, j1, k1) = at(1).ok_or_else(|| {
        ExtractError::InvalidSpec(format!("no interior parallel edge behind edge {m}"))
    })?;
    let inner_edge = topo
        .canonical_index(EntityKind::Edge, axis, i1, j1, k1)
        .map_err(ExtractError::Core)?;
    if topo.edge_phantom[inner_edge] {
        return Err(ExtractError::InvalidSpec(format!(
            "inner parallel edge of {m} is phantom"
        )));
    }

    // the two facets between (edge, inner) and (inner, inner2), normal to
    // the third axis
    let third = Axis::from_index(3 - axis.index() - normal.index());
    let facet_between = |pa: (usize, usize, usize),
                         pb: (usize, usize, usize)|
     -> Option<usize> {
        // the facet spanning `axis` and `normal` whose min corner is the
        // inward-most of the two base points
        let (bi, bj, bk) = (pa.0.min(pb.0), pa.1.min(pb.1), pa.2.min(pb.2));
        let f = topo.canonical_index(EntityKind::Facet, third, bi, bj, bk).ok()?;
        (!topo.facet_phantom[f]).then_some(f)
    };
    let p0 = (i, j, k);
    let p1 = (i1, j1, k1);
    let f1 = facet_between(p0, p1).ok_or_else(|| {
        ExtractError::InvalidSpec(format!("no facet between edge {m} and its inner edge"))
    })?;
    let nu_avg = match at(2).and_then(|p2| facet_between(p1, p2)) {
        Some(f2) => 0.5 * (m_nu.get(f1) + m_nu.get(f2)),
        None => m_nu.get(f1),
    };
    let eps = m_eps.get(inner_edge);
    let z0 = 1.0 / (nu_avg * eps).sqrt();
    let speed_cells = (nu_avg / eps).sqrt();
    Ok(AbcEdge {
        edge: m,
        inner_edge,
        z0,
        speed_cells,
    })
}

/// Collect all tangential non-PEC edges of a boundary face with their
/// impedances.
pub fn build_abc_spec(
    topo: &GridTopology,
    m_nu: &DiagonalOperator,
    m_eps: &DiagonalOperator,
    face: Face,
    pec: &[bool],
) -> Result<AbcSpec, ExtractError> {
    let mut edges = Vec::new();
    for m in topo.non_phantom_edges() {
        let (axis, i, j, k) = topo.entity_coords(m);
        if axis == face.normal() {
            continue;
        }
        let pos = match face.normal() {
            Axis::X => i,
            Axis::Y => j,
            Axis::Z => k,
        };
        if pos != face.plane(topo) || pec[m] {
            continue;
        }
        edges.push(characteristic_impedance(topo, m_nu, m_eps, m, face)?);
    }
    Ok(AbcSpec { face, edges })
}

/// Terminate the listed edges by a matched resistor from the stamp node to
/// ground. The stamp itself stays in place: its half dual cell already
/// carries the truncated capacitance and single-facet reluctance, so the
/// parallel resistor is the matched load of the feeding line.
pub fn stamp_abc(mut netlist: Netlist, spec: &AbcSpec) -> Result<Netlist, ExtractError> {
    for t in &spec.edges {
        let nm = edge_node(t.edge);
        // a missing stamp means the edge was removed as PEC
        if netlist.get(&format!("L{}", t.edge)).is_none() {
            return Err(ExtractError::PecAbcConflict(t.edge));
        }
        netlist.add(Element {
            name: format!("Rabc{}", t.edge),
            pos: nm,
            neg: "0".into(),
            kind: ElementKind::Resistor(t.z0),
        })?;
    }
    Ok(netlist)
}
