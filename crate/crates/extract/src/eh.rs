//! Per-edge RLC stamps of the E-H formulation with current-controlled
//! coupling sources.
//!
//! Every non-PEC grid edge m becomes a stamp at node n{m}: capacitor
//! M_eps, inductor 1/(sum of neighbouring facet reluctances), optional
//! resistor 1/M_sigma, each to ground, so that the node voltage equals the
//! grid voltage of the edge. The inductor current is the time integral of
//! the edge voltage scaled by the reluctance sum, which makes it the
//! natural controlling quantity for the coupling sources into the
//! neighbouring stamps.

use fieldnet_core::{GridTopology, IncidenceSet};
use fieldnet_netlist::names::edge_node;
use fieldnet_netlist::{Element, ElementKind, Netlist};

use crate::abc::{stamp_abc, AbcSpec};
use crate::error::ExtractError;
use crate::problem::{EdgeCurrent, EmMaterials};

/// Sum of the facet reluctance entries around edge `m` (phantom facets
/// excluded).
pub fn reluctance_sum(
    topo: &GridTopology,
    m_nu: &fieldnet_core::DiagonalOperator,
    m: usize,
) -> f64 {
    topo.edge_facets(m).iter().map(|&f| m_nu.get(f)).sum()
}

/// Gain of the coupling source from neighbour edge `n` through facet `k`
/// into the stamp of edge `m`. The incidence signs come from the curl
/// rows; the normaliser is the reluctance sum of the controlling stamp.
pub fn coupling_gain(
    topo: &GridTopology,
    inc: &IncidenceSet,
    m_nu: &fieldnet_core::DiagonalOperator,
    m: usize,
    k: usize,
    n: usize,
) -> f64 {
    let sign_of = |edge: usize| -> f64 {
        inc.curl
            .row(k)
            .find(|&(c, _)| c == edge)
            .map(|(_, v)| v as f64)
            .unwrap_or(0.0)
    };
    let c_km = sign_of(m);
    let c_kn = sign_of(n);
    c_km * m_nu.get(k) * c_kn / reluctance_sum(topo, m_nu, n)
}

/// Generate the E-H netlist. `pec` masks edges whose stamps are omitted
/// (short circuit); `abc` terminates the listed boundary edges.
pub fn extract_eh(
    topo: &GridTopology,
    inc: &IncidenceSet,
    mats: &EmMaterials,
    sources: &[EdgeCurrent],
    pec: &[bool],
    abc: Option<&AbcSpec>,
) -> Result<Netlist, ExtractError> {
    assert_eq!(pec.len(), topo.ne);
    let mut netlist = Netlist::new("E-H field circuit");
    let mut has_source = vec![None::<usize>; topo.ne];
    for (si, s) in sources.iter().enumerate() {
        if s.edge >= topo.ne || topo.edge_phantom[s.edge] {
            return Err(ExtractError::InvalidSpec(format!(
                "impressed current on phantom edge {}",
                s.edge
            )));
        }
        if pec[s.edge] {
            return Err(ExtractError::SourceOnPec(s.edge));
        }
        has_source[s.edge] = Some(si);
    }

    for m in topo.non_phantom_edges() {
        if pec[m] {
            continue;
        }
        let nm = edge_node(m);
        let mnu_sum = reluctance_sum(topo, &mats.m_nu, m);
        let sigma = mats.m_sigma.get(m);
        if sigma > 0.0 {
            netlist.add(Element {
                name: format!("R{m}"),
                pos: nm.clone(),
                neg: "0".into(),
                kind: ElementKind::Resistor(1.0 / sigma),
            })?;
        }
        netlist.add(Element {
            name: format!("L{m}"),
            pos: nm.clone(),
            neg: "0".into(),
            kind: ElementKind::Inductor(1.0 / mnu_sum),
        })?;
        netlist.add(Element {
            name: format!("C{m}"),
            pos: nm.clone(),
            neg: "0".into(),
            kind: ElementKind::Capacitor {
                farads: mats.m_eps.get(m),
                ic: None,
            },
        })?;
        if let Some(si) = has_source[m] {
            netlist.add(Element {
                name: format!("I{m}"),
                pos: nm.clone(),
                neg: "0".into(),
                kind: ElementKind::ISource(sources[si].waveform.clone()),
            })?;
        }
        for &k in &topo.edge_facets(m) {
            for (n, _) in inc.curl.row(k) {
                if n == m || topo.edge_phantom[n] || pec[n] {
                    continue;
                }
                let gain = coupling_gain(topo, inc, &mats.m_nu, m, k, n);
                netlist.add(Element {
                    name: format!("F{m}n{n}"),
                    pos: nm.clone(),
                    neg: "0".into(),
                    kind: ElementKind::Cccs {
                        ctrl: format!("L{n}"),
                        gain,
                    },
                })?;
            }
        }
    }

    match abc {
        Some(spec) => Ok(stamp_abc(netlist, spec)?),
        None => Ok(netlist),
    }
}
