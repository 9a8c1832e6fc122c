//! Coupled electrothermal netlist generation.
//!
//! Per edge: a behavioural conductance whose value follows the branch
//! temperature, the FIT edge capacitance, and a thermal resistor. Per
//! node: a thermal capacitance to ground (the Cauer picture) and a
//! behavioural source injecting the node's share of the Joule losses.
//! Dirichlet values become voltage sources against ground, convective
//! faces become conductances to a pinned ambient node.

use fieldnet_core::{
    edge_matrix, edge_sigma_terms, node_matrix, CellFields, DiagonalOperator, GridTopology,
    MatrixKind, SigmaTerm,
};
use fieldnet_netlist::names::{ambient_node, electric_node, thermal_node};
use fieldnet_netlist::{Element, ElementKind, Expression, Netlist, Waveform};

use crate::error::ExtractError;
use crate::problem::Face;

/// Electrothermal material data: assembled diagonals plus the per-edge
/// conductivity terms for temperature-dependent conductances.
#[derive(Debug, Clone)]
pub struct EtMaterials {
    pub m_eps: DiagonalOperator,
    pub m_lambda: DiagonalOperator,
    pub m_rhoc: DiagonalOperator,
    /// Per-edge weighted conductivity contributions.
    pub sigma_terms: Vec<Vec<SigmaTerm>>,
}

impl EtMaterials {
    pub fn assemble(topo: &GridTopology, fields: &CellFields) -> EtMaterials {
        let m_eps = edge_matrix(topo, fields, MatrixKind::Epsilon);
        let m_lambda = edge_matrix(topo, fields, MatrixKind::Lambda);
        let m_rhoc = node_matrix(topo, fields);
        let sigma_terms = (0..topo.ne)
            .map(|e| {
                if topo.edge_phantom[e] {
                    Vec::new()
                } else {
                    edge_sigma_terms(topo, fields, e)
                }
            })
            .collect();
        EtMaterials {
            m_eps,
            m_lambda,
            m_rhoc,
            sigma_terms,
        }
    }

    /// The conductance matrix at the reference state (every branch at its
    /// own reference temperature).
    pub fn m_sigma_ref(&self, topo: &GridTopology) -> Vec<f64> {
        (0..topo.ne)
            .map(|e| self.sigma_terms[e].iter().map(|t| t.scale * t.sigma0).sum())
            .collect()
    }
}

/// Convective boundary face.
#[derive(Debug, Clone)]
pub struct RobinFace {
    pub face: Face,
    /// Heat transfer coefficient (W/K/m^2).
    pub h_c: f64,
    /// Ambient temperature (K).
    pub t_inf: f64,
}

/// Boundary conditions and impressed sources of the coupled problem.
#[derive(Debug, Clone, Default)]
pub struct EtBoundarySpec {
    /// (point, potential waveform)
    pub electric_dirichlet: Vec<(usize, Waveform)>,
    /// (point, temperature waveform)
    pub thermal_dirichlet: Vec<(usize, Waveform)>,
    pub robin: Vec<RobinFace>,
    /// Impressed electric grid currents per edge (through the dual facet).
    pub impressed_current: Vec<(usize, Waveform)>,
    /// Impressed heat grid fluxes per edge.
    pub impressed_heat: Vec<(usize, Waveform)>,
}

/// Initial values per grid point.
#[derive(Debug, Clone)]
pub struct EtInitial {
    pub t0: Vec<f64>,
    pub phi0: Vec<f64>,
}

impl EtInitial {
    pub fn uniform(topo: &GridTopology, t0: f64, phi0: f64) -> EtInitial {
        EtInitial {
            t0: vec![t0; topo.np],
            phi0: vec![phi0; topo.np],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EtOptions {
    /// Emit the thermal sub-circuit and the coupling sources.
    pub thermal: bool,
}

impl Default for EtOptions {
    fn default() -> Self {
        EtOptions { thermal: true }
    }
}

/// Mean of the two terminal temperatures of a branch.
fn branch_temperature(i: usize, j: usize) -> Expression {
    Expression::mul(
        Expression::constant(0.5),
        Expression::add(
            Expression::v(&thermal_node(i)),
            Expression::v(&thermal_node(j)),
        ),
    )
}

/// Temperature-dependent branch conductance expression
/// G_m(T) = sum_q scale_q * sigma0_q / (1 + alpha_q (T - T0_q)).
pub fn branch_conductance(terms: &[SigmaTerm], t_mean: &Expression) -> Expression {
    let mut parts = Vec::new();
    for term in terms {
        let g0 = term.scale * term.sigma0;
        if g0 == 0.0 {
            continue;
        }
        if term.alpha == 0.0 {
            parts.push(Expression::constant(g0));
        } else {
            let denom = Expression::add(
                Expression::constant(1.0),
                Expression::mul(
                    Expression::constant(term.alpha),
                    Expression::sub(t_mean.clone(), Expression::constant(term.t_ref)),
                ),
            );
            parts.push(Expression::div(Expression::constant(g0), denom));
        }
    }
    Expression::sum(parts)
}

/// Joule-loss expression of one node: half of each incident branch power.
pub fn joule_source(
    topo: &GridTopology,
    mats: &EtMaterials,
    thermal: bool,
    i: usize,
) -> Expression {
    let mut parts = Vec::new();
    for m in incident_edges_of_point(topo, i) {
        let terms = &mats.sigma_terms[m];
        if terms.iter().all(|t| t.scale * t.sigma0 == 0.0) {
            continue;
        }
        let (a, b) = topo.edge_points(m);
        let g = if thermal {
            branch_conductance(terms, &branch_temperature(a, b))
        } else {
            Expression::constant(terms.iter().map(|t| t.scale * t.sigma0).sum())
        };
        let v = Expression::v2(&electric_node(a), &electric_node(b));
        parts.push(Expression::mul(
            Expression::constant(0.5),
            Expression::mul(g, Expression::mul(v.clone(), v)),
        ));
    }
    Expression::sum(parts)
}

fn incident_edges_of_point(topo: &GridTopology, p: usize) -> Vec<usize> {
    use fieldnet_core::{Axis, EntityKind};
    let (i, j, k) = topo.point_coords(p);
    let mut out = Vec::with_capacity(6);
    for axis in Axis::ALL {
        let back = match axis {
            Axis::X => i.checked_sub(1).map(|i| (i, j, k)),
            Axis::Y => j.checked_sub(1).map(|j| (i, j, k)),
            Axis::Z => k.checked_sub(1).map(|k| (i, j, k)),
        };
        if let Some((bi, bj, bk)) = back {
            if let Ok(e) = topo.canonical_index(EntityKind::Edge, axis, bi, bj, bk) {
                if !topo.edge_phantom[e] {
                    out.push(e);
                }
            }
        }
        if let Ok(e) = topo.canonical_index(EntityKind::Edge, axis, i, j, k) {
            if !topo.edge_phantom[e] {
                out.push(e);
            }
        }
    }
    out
}

/// Nodal area of a boundary point on a face: the dual facet piece the
/// point exposes on that face.
fn boundary_node_area(topo: &GridTopology, face: Face, i: usize, j: usize, k: usize) -> f64 {
    use fieldnet_core::Axis;
    let d = |axis: Axis, idx: usize| -> f64 {
        let w = topo.spec.widths(axis);
        let lo = if idx > 0 { w[idx - 1] / 2.0 } else { 0.0 };
        let hi = if idx < w.len() { w[idx] / 2.0 } else { 0.0 };
        lo + hi
    };
    match face.normal() {
        Axis::X => d(Axis::Y, j) * d(Axis::Z, k),
        Axis::Y => d(Axis::X, i) * d(Axis::Z, k),
        Axis::Z => d(Axis::X, i) * d(Axis::Y, j),
    }
}

/// Convective boundary elements of one face: a conductance from every
/// face node to the shared ambient node.
pub fn stamp_robin(
    topo: &GridTopology,
    spec: &RobinFace,
) -> Result<Vec<Element>, ExtractError> {
    let mut out = Vec::new();
    if spec.h_c == 0.0 {
        return Ok(out);
    }
    if spec.h_c < 0.0 {
        return Err(ExtractError::InvalidSpec("negative Robin coefficient".into()));
    }
    let (nx, ny, nz) = (topo.spec.nx, topo.spec.ny, topo.spec.nz);
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                if !spec.face.contains_point(topo, i, j, k) {
                    continue;
                }
                let area = boundary_node_area(topo, spec.face, i, j, k);
                let p = topo.point_index(i, j, k);
                out.push(Element {
                    name: format!("RRob{}p{p}", spec.face.name()),
                    pos: thermal_node(p),
                    neg: ambient_node().into(),
                    kind: ElementKind::Resistor(1.0 / (spec.h_c * area)),
                });
            }
        }
    }
    Ok(out)
}

/// Generate the coupled electrothermal netlist. Returns the netlist and
/// any advisory warnings (for example a missing electric reference).
pub fn extract_et(
    topo: &GridTopology,
    mats: &EtMaterials,
    bcs: &EtBoundarySpec,
    init: &EtInitial,
    opts: &EtOptions,
) -> Result<(Netlist, Vec<String>), ExtractError> {
    let mut warnings = Vec::new();
    let mut netlist = Netlist::new("electrothermal field circuit");

    for (p, _) in bcs
        .electric_dirichlet
        .iter()
        .chain(bcs.thermal_dirichlet.iter())
    {
        if *p >= topo.np {
            return Err(ExtractError::InvalidSpec(format!(
                "Dirichlet point {p} out of range"
            )));
        }
    }
    for r in &bcs.robin {
        for (p, _) in &bcs.thermal_dirichlet {
            let (i, j, k) = topo.point_coords(*p);
            if r.face.contains_point(topo, i, j, k) {
                return Err(ExtractError::InvalidSpec(format!(
                    "point {p} is both thermal Dirichlet and on Robin face {}",
                    r.face.name()
                )));
            }
        }
    }

    // edge stamps (Algorithm lines 1-4)
    for m in topo.non_phantom_edges() {
        let (i, j) = topo.edge_points(m);
        let (ni, nj) = (electric_node(i), electric_node(j));
        let g = if opts.thermal {
            branch_conductance(&mats.sigma_terms[m], &branch_temperature(i, j))
        } else {
            Expression::constant(
                mats.sigma_terms[m]
                    .iter()
                    .map(|t| t.scale * t.sigma0)
                    .sum(),
            )
        };
        netlist.add(Element {
            name: format!("BGel{m}"),
            pos: ni.clone(),
            neg: nj.clone(),
            kind: ElementKind::BehaviouralI(Expression::mul(Expression::v2(&ni, &nj), g)),
        })?;
        netlist.add(Element {
            name: format!("Cel{m}"),
            pos: ni.clone(),
            neg: nj.clone(),
            kind: ElementKind::Capacitor {
                farads: mats.m_eps.get(m),
                ic: Some(init.phi0[i] - init.phi0[j]),
            },
        })?;
        if opts.thermal && mats.m_lambda.get(m) > 0.0 {
            netlist.add(Element {
                name: format!("Rth{m}"),
                pos: thermal_node(i),
                neg: thermal_node(j),
                kind: ElementKind::Resistor(1.0 / mats.m_lambda.get(m)),
            })?;
        }
    }

    // node stamps (lines 5-20)
    for p in 0..topo.np {
        if opts.thermal {
            netlist.add(Element {
                name: format!("Cth{p}"),
                pos: thermal_node(p),
                neg: "0".into(),
                kind: ElementKind::Capacitor {
                    farads: mats.m_rhoc.get(p),
                    ic: Some(init.t0[p]),
                },
            })?;
            netlist.add(Element {
                name: format!("BLoss{p}"),
                pos: "0".into(),
                neg: thermal_node(p),
                kind: ElementKind::BehaviouralI(joule_source(topo, mats, true, p)),
            })?;
        }
    }
    for (p, w) in &bcs.electric_dirichlet {
        netlist.add(Element {
            name: format!("VDirEl{p}"),
            pos: electric_node(*p),
            neg: "0".into(),
            kind: ElementKind::VSource(w.clone()),
        })?;
    }
    if opts.thermal {
        for (p, w) in &bcs.thermal_dirichlet {
            netlist.add(Element {
                name: format!("VDirTh{p}"),
                pos: thermal_node(*p),
                neg: "0".into(),
                kind: ElementKind::VSource(w.clone()),
            })?;
        }
    }
    // impressed currents: per-node divergence, one card per contribution
    for (seq, (edge, w)) in bcs.impressed_current.iter().enumerate() {
        let (a, b) = topo.edge_points(*edge);
        for (p, sign) in [(a, 1.0), (b, -1.0)] {
            netlist.add(Element {
                name: format!("IimpEl{p}x{seq}"),
                pos: electric_node(p),
                neg: "0".into(),
                kind: ElementKind::ISource(w.scaled(sign)),
            })?;
        }
    }
    if opts.thermal {
        for (seq, (edge, w)) in bcs.impressed_heat.iter().enumerate() {
            let (a, b) = topo.edge_points(*edge);
            for (p, sign) in [(a, 1.0), (b, -1.0)] {
                netlist.add(Element {
                    name: format!("IimpTh{p}x{seq}"),
                    pos: thermal_node(p),
                    neg: "0".into(),
                    kind: ElementKind::ISource(w.scaled(sign)),
                })?;
            }
        }
    }

    // convective faces share one pinned ambient node
    if opts.thermal && !bcs.robin.is_empty() {
        let t_inf = bcs.robin[0].t_inf;
        if bcs.robin.iter().any(|r| r.t_inf != t_inf) {
            return Err(ExtractError::InvalidSpec(
                "all Robin faces must share the ambient temperature".into(),
            ));
        }
        let mut any = false;
        for r in &bcs.robin {
            for e in stamp_robin(topo, r)? {
                netlist.add(e)?;
                any = true;
            }
        }
        if any {
            netlist.add(Element {
                name: "VRobInf".into(),
                pos: ambient_node().into(),
                neg: "0".into(),
                kind: ElementKind::VSource(Waveform::Dc(t_inf)),
            })?;
        }
    }

    if bcs.electric_dirichlet.is_empty() {
        warnings.push(
            "no electric Dirichlet node; grounding n0 through a zero-volt source".to_string(),
        );
        netlist.add(Element {
            name: "VGndRef".into(),
            pos: electric_node(0),
            neg: "0".into(),
            kind: ElementKind::VSource(Waveform::Dc(0.0)),
        })?;
    }
    if opts.thermal && bcs.thermal_dirichlet.is_empty() && bcs.robin.is_empty() {
        warnings.push("thermal circuit is adiabatic (no Dirichlet or Robin)".to_string());
    }

    Ok((netlist, warnings))
}
