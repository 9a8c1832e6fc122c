//! E-A formulation stamps with tree-cotree gauging.
//!
//! Each edge stamp represents the gauged vector potential component as the
//! current through a series chain of controlled and behavioural voltage
//! sources (the facet-averaged induction law), while the node voltage of
//! the stamp reproduces the electric grid voltage. Tree-edge currents are
//! dictated by the fundamental cut-sets through banks of
//! current-controlled sources.

use std::collections::HashMap;

use fieldnet_core::{DiagonalOperator, GridTopology, IncidenceSet};
use fieldnet_netlist::names::{chain_head_node, chain_node, edge_node};
use fieldnet_netlist::{Element, ElementKind, Expression, Netlist};

use crate::eh::reluctance_sum;
use crate::error::ExtractError;
use crate::problem::{EdgeCurrent, EmMaterials};

/// Spanning tree of the primal node graph with its cotree complement.
#[derive(Debug, Clone)]
pub struct TreeCotree {
    /// Grounded root point.
    pub root: usize,
    /// Tree membership per edge slot (None for phantom edges).
    pub in_tree: Vec<Option<bool>>,
    pub tree_edges: Vec<usize>,
    pub cotree_edges: Vec<usize>,
    /// Position of each tree edge within `tree_edges`.
    pub tree_pos: HashMap<usize, usize>,
    /// Position of each cotree edge within `cotree_edges`.
    pub cotree_pos: HashMap<usize, usize>,
    /// BFS parent edge of each point (root has none).
    pub parent_edge: Vec<Option<usize>>,
    /// Points in BFS visit order.
    pub bfs_order: Vec<usize>,
}

impl TreeCotree {
    pub fn n_t(&self) -> usize {
        self.tree_edges.len()
    }

    pub fn n_c(&self) -> usize {
        self.cotree_edges.len()
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.in_tree[e] == Some(true)
    }
}

fn incident_edges(topo: &GridTopology, p: usize) -> Vec<usize> {
    let (i, j, k) = topo.point_coords(p);
    let mut out = Vec::with_capacity(6);
    let mut push = |slot: Result<usize, _>| {
        if let Ok(e) = slot {
            if !topo.edge_phantom[e] {
                out.push(e);
            }
        }
    };
    use fieldnet_core::{Axis, EntityKind};
    for axis in Axis::ALL {
        let (bi, bj, bk) = match axis {
            Axis::X => (i.wrapping_sub(1), j, k),
            Axis::Y => (i, j.wrapping_sub(1), k),
            Axis::Z => (i, j, k.wrapping_sub(1)),
        };
        if bi != usize::MAX && bj != usize::MAX && bk != usize::MAX {
            push(topo.canonical_index(EntityKind::Edge, axis, bi, bj, bk));
        }
        push(topo.canonical_index(EntityKind::Edge, axis, i, j, k));
    }
    out.sort_unstable();
    out
}

/// Breadth-first spanning tree over all non-phantom edges, rooted at point
/// 0, with incident edges visited in ascending canonical order.
pub fn spanning_tree(topo: &GridTopology) -> Result<TreeCotree, ExtractError> {
    let mut in_tree: Vec<Option<bool>> = topo
        .edge_phantom
        .iter()
        .map(|&ph| if ph { None } else { Some(false) })
        .collect();
    let mut visited = vec![false; topo.np];
    let mut parent_edge = vec![None; topo.np];
    let mut order = Vec::with_capacity(topo.np);
    let root = 0usize;
    visited[root] = true;
    order.push(root);
    let mut head = 0;
    let mut tree_edges = Vec::new();
    while head < order.len() {
        let p = order[head];
        head += 1;
        for e in incident_edges(topo, p) {
            let (a, b) = topo.edge_points(e);
            let q = if a == p { b } else { a };
            if !visited[q] {
                visited[q] = true;
                in_tree[e] = Some(true);
                parent_edge[q] = Some(e);
                tree_edges.push(e);
                order.push(q);
            }
        }
    }
    if let Some(p) = visited.iter().position(|&v| !v) {
        return Err(ExtractError::Disconnected(p));
    }
    let cotree_edges: Vec<usize> = topo
        .non_phantom_edges()
        .filter(|&e| in_tree[e] == Some(false))
        .collect();
    let tree_pos = tree_edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let cotree_pos = cotree_edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i))
        .collect();
    Ok(TreeCotree {
        root,
        in_tree,
        tree_edges,
        cotree_edges,
        tree_pos,
        cotree_pos,
        parent_edge,
        bfs_order: order,
    })
}

/// The essential incidence matrix E_tc, stored per tree edge as its
/// fundamental cut-set row over cotree edges.
#[derive(Debug, Clone)]
pub struct EssentialIncidence {
    /// rows[tree_pos] = list of (cotree edge slot, value).
    pub rows: Vec<Vec<(usize, f64)>>,
}

/// Build E_tc = M_Gt^{-1} S1t^{-1} S1c M_Gc column by column. Each column
/// solves the tree-structured divergence system by elimination in reverse
/// BFS order (children before parents), the sparse factorisation of the
/// tree incidence matrix.
pub fn essential_incidence(
    topo: &GridTopology,
    tc: &TreeCotree,
    m_gauge: &DiagonalOperator,
) -> EssentialIncidence {
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); tc.n_t()];
    // per-node pending right-hand side, reused across columns
    let mut b = vec![0.0f64; topo.np];
    for &n in &tc.cotree_edges {
        let (start, end) = topo.edge_points(n);
        let mg_n = m_gauge.get(n);
        // dual divergence column of edge n: +1 at start, -1 at end
        b[start] += mg_n;
        b[end] -= mg_n;
        // eliminate leaves towards the root (reverse BFS order)
        for &p in tc.bfs_order.iter().rev() {
            if p == tc.root {
                continue;
            }
            let e = tc.parent_edge[p].expect("non-root point has a parent edge");
            let (a, bb) = topo.edge_points(e);
            // S~[p][e]: +1 if e starts at p, -1 if it ends at p
            let sign = if a == p { 1.0 } else { -1.0 };
            let y = sign * b[p];
            if y != 0.0 {
                let tp = tc.tree_pos[&e];
                rows[tp].push((n, y / m_gauge.get(e)));
                // fold the solved edge into its other endpoint's row:
                // b_other -= S~[other][e] * y with S~[other][e] = -sign
                let other = if a == p { bb } else { a };
                b[other] += sign * y;
            }
            b[p] = 0.0;
        }
        b[tc.root] = 0.0;
    }
    EssentialIncidence { rows }
}

/// Name of the element whose branch current carries the gauged potential
/// of edge `m` (the first element of the stamp's series chain).
fn chain_plan(
    topo: &GridTopology,
    inc: &IncidenceSet,
    tc: &TreeCotree,
    m: usize,
) -> Vec<ChainSource> {
    let facets = topo.edge_facets(m);
    let n_f = facets.len() as f64;
    let sign_of = |k: usize, edge: usize| -> f64 {
        inc.curl
            .row(k)
            .find(|&(c, _)| c == edge)
            .map(|(_, v)| v as f64)
            .unwrap_or(0.0)
    };
    let mut plan = Vec::new();
    for (ki, &k) in facets.iter().enumerate() {
        let c_km = sign_of(k, m);
        let edges: Vec<usize> = inc.curl.row(k).map(|(e, _)| e).collect();
        // voltage-controlled terms over the other edges of the facet
        let mut ve_idx = 0usize;
        for &n in &edges {
            if n == m || topo.edge_phantom[n] {
                continue;
            }
            ve_idx += 1;
            plan.push(ChainSource {
                name: format!("EVe{m}k{}n{}", ki + 1, ve_idx),
                node: chain_node("ne", m, ki + 1, ve_idx),
                gain: sign_of(k, n) / (n_f * c_km),
                kind: ChainKind::EdgeVoltage(n),
            });
        }
        // induced terms over cotree then tree members, the edge included
        let mut c_idx = 0usize;
        let mut t_idx = 0usize;
        for &n in &edges {
            if topo.edge_phantom[n] {
                continue;
            }
            let gain = sign_of(k, n) / (n_f * c_km);
            if tc.is_tree_edge(n) {
                t_idx += 1;
                plan.push(ChainSource {
                    name: format!("BVt{m}k{}n{}", ki + 1, t_idx),
                    node: chain_node("nt", m, ki + 1, t_idx),
                    gain,
                    kind: ChainKind::PotentialDerivative(n),
                });
            } else {
                c_idx += 1;
                plan.push(ChainSource {
                    name: format!("BVc{m}k{}n{}", ki + 1, c_idx),
                    node: chain_node("nc", m, ki + 1, c_idx),
                    gain,
                    kind: ChainKind::PotentialDerivative(n),
                });
            }
        }
    }
    plan
}

struct ChainSource {
    name: String,
    node: String,
    gain: f64,
    kind: ChainKind,
}

enum ChainKind {
    /// gain * e_n, a VCVS on the neighbour's stamp node.
    EdgeVoltage(usize),
    /// gain * d(a_n)/dt, a behavioural source on the neighbour's chain current.
    PotentialDerivative(usize),
}

/// Generate the E-A netlist. PEC edges are not supported by this
/// formulation here; use natural (magnetic-wall) boundaries.
pub fn extract_ea(
    topo: &GridTopology,
    inc: &IncidenceSet,
    mats: &EmMaterials,
    tc: &TreeCotree,
    etc: &EssentialIncidence,
    sources: &[EdgeCurrent],
    pec: &[bool],
) -> Result<Netlist, ExtractError> {
    if pec.iter().any(|&p| p) {
        return Err(ExtractError::Unsupported(
            "PEC edges in the E-A extraction; use the E-H formulation or magnetic walls".into(),
        ));
    }
    let mut netlist = Netlist::new("E-A field circuit");
    let mut has_source = vec![None::<usize>; topo.ne];
    for (si, s) in sources.iter().enumerate() {
        if s.edge >= topo.ne || topo.edge_phantom[s.edge] {
            return Err(ExtractError::InvalidSpec(format!(
                "impressed current on phantom edge {}",
                s.edge
            )));
        }
        has_source[s.edge] = Some(si);
    }

    // the chain sense element of every stamp, known before emission
    let plans: HashMap<usize, Vec<ChainSource>> = topo
        .non_phantom_edges()
        .map(|m| (m, chain_plan(topo, inc, tc, m)))
        .collect();
    let sense: HashMap<usize, String> = plans
        .iter()
        .map(|(&m, plan)| (m, plan.first().expect("edge has facets").name.clone()))
        .collect();

    for m in topo.non_phantom_edges() {
        let nm = edge_node(m);
        let mnu_sum = reluctance_sum(topo, &mats.m_nu, m);
        let sigma = mats.m_sigma.get(m);
        if sigma > 0.0 {
            netlist.add(Element {
                name: format!("R{m}"),
                pos: nm.clone(),
                neg: "0".into(),
                kind: ElementKind::Resistor(mnu_sum / sigma),
            })?;
        }
        netlist.add(Element {
            name: format!("C{m}"),
            pos: nm.clone(),
            neg: "0".into(),
            kind: ElementKind::Capacitor {
                farads: mats.m_eps.get(m) / mnu_sum,
                ic: None,
            },
        })?;
        if let Some(si) = has_source[m] {
            netlist.add(Element {
                name: format!("I{m}"),
                pos: nm.clone(),
                neg: "0".into(),
                kind: ElementKind::ISource(sources[si].waveform.scaled(1.0 / mnu_sum)),
            })?;
        }

        let is_tree = tc.is_tree_edge(m);
        let top = if is_tree { chain_head_node(m) } else { nm.clone() };

        // tree edges: the dictated current enters the stamp node through a
        // bank of current-controlled sources over the fundamental cut-set
        if is_tree {
            let row = &etc.rows[tc.tree_pos[&m]];
            for &(n, e_tc) in row {
                netlist.add(Element {
                    name: format!("FIsum{m}n{n}"),
                    pos: top.clone(),
                    neg: nm.clone(),
                    kind: ElementKind::Cccs {
                        ctrl: sense[&n].clone(),
                        gain: -e_tc,
                    },
                })?;
            }
        }

        // coupling sources into the stamp node from all facet neighbours
        for &k in &topo.edge_facets(m) {
            let c_km = inc
                .curl
                .row(k)
                .find(|&(c, _)| c == m)
                .map(|(_, v)| v as f64)
                .unwrap();
            for (n, c_kn) in inc.curl.row(k) {
                if n == m || topo.edge_phantom[n] {
                    continue;
                }
                let gain = c_km * mats.m_nu.get(k) * c_kn as f64 / mnu_sum;
                let family = if tc.is_tree_edge(n) { "FIt" } else { "FIc" };
                netlist.add(Element {
                    name: format!("{family}{m}n{n}"),
                    pos: "0".into(),
                    neg: nm.clone(),
                    kind: ElementKind::Cccs {
                        ctrl: sense[&n].clone(),
                        gain,
                    },
                })?;
            }
        }

        // series chain from the top node down to ground; each source's
        // positive terminal faces ground so that the upward branch current
        // is the gauged potential of this edge
        let plan = &plans[&m];
        let mut upper = top.clone();
        for (idx, src) in plan.iter().enumerate() {
            let lower = if idx + 1 == plan.len() {
                "0".to_string()
            } else {
                src.node.clone()
            };
            match &src.kind {
                ChainKind::EdgeVoltage(n) => {
                    netlist.add(Element {
                        name: src.name.clone(),
                        pos: lower.clone(),
                        neg: upper.clone(),
                        kind: ElementKind::Vcvs {
                            ctrl_pos: edge_node(*n),
                            ctrl_neg: "0".into(),
                            gain: src.gain,
                        },
                    })?;
                }
                ChainKind::PotentialDerivative(n) => {
                    let expr = Expression::mul(
                        Expression::constant(src.gain),
                        Expression::ddt(Expression::i(&sense[n])),
                    );
                    netlist.add(Element {
                        name: src.name.clone(),
                        pos: lower.clone(),
                        neg: upper.clone(),
                        kind: ElementKind::BehaviouralV(expr),
                    })?;
                }
            }
            upper = lower;
        }
    }
    Ok(netlist)
}
