//! Rasterisation of material boxes onto primal cells and assembly of the
//! diagonal material matrices.
//!
//! Edge quantities use quadrant-area weighted arithmetic averaging over the
//! up-to-four adjacent cells, facet quantities use half-length weighting
//! along the crossing dual edge, and point quantities use octant-volume
//! weighting.

use crate::error::CoreError;
use crate::grid::{Axis, GridTopology};

/// Constitutive parameters of one material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProps {
    /// Electric permittivity (F/m).
    pub eps: f64,
    /// Electric conductivity at the reference temperature (S/m).
    pub sigma0: f64,
    /// Thermal conductivity (W/K/m).
    pub lambda: f64,
    /// Volumetric heat capacity (J/K/m^3).
    pub rhoc: f64,
    /// Magnetic reluctivity 1/mu (m/H).
    pub nu: f64,
    /// Linear resistivity temperature coefficient (1/K).
    pub alpha: f64,
    /// Reference temperature for sigma0 and alpha (K).
    pub t_ref: f64,
}

impl MaterialProps {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.eps > 0.0) || !(self.nu > 0.0) {
            return Err(CoreError::InvalidSpec(
                "eps and nu must be strictly positive".into(),
            ));
        }
        if self.sigma0 < 0.0 || self.lambda < 0.0 || self.rhoc < 0.0 {
            return Err(CoreError::InvalidSpec(
                "sigma, lambda, rhoc must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Axis-aligned material region; later boxes override earlier ones.
#[derive(Debug, Clone)]
pub struct MaterialBox {
    /// [[x0,x1],[y0,y1],[z0,z1]] in metres.
    pub bounds: [[f64; 2]; 3],
    pub props: MaterialProps,
}

/// Per-cell constitutive parameters, indexed by volume slot.
#[derive(Debug, Clone)]
pub struct CellFields {
    pub cells: Vec<Option<MaterialProps>>,
}

impl CellFields {
    pub fn uniform(topo: &GridTopology, props: MaterialProps) -> CellFields {
        let mut cells = vec![None; topo.nv];
        for v in topo.non_phantom_volumes() {
            cells[v] = Some(props);
        }
        CellFields { cells }
    }

    fn get(&self, v: usize) -> MaterialProps {
        self.cells[v].expect("cell coverage validated during rasterisation")
    }
}

/// Paint material boxes onto the cells; every non-phantom cell must end up
/// covered. Box bounds are snapped to the nearest grid plane; a warning
/// string is returned for every bound that had to move.
pub fn rasterize(
    topo: &GridTopology,
    boxes: &[MaterialBox],
) -> Result<(CellFields, Vec<String>), CoreError> {
    let mut warnings = Vec::new();
    for b in boxes {
        b.props.validate()?;
    }
    let planes = [
        topo.spec.planes(Axis::X),
        topo.spec.planes(Axis::Y),
        topo.spec.planes(Axis::Z),
    ];
    let mut snapped = Vec::with_capacity(boxes.len());
    for (bi, b) in boxes.iter().enumerate() {
        let mut s = b.bounds;
        for (ax, pl) in planes.iter().enumerate() {
            for side in 0..2 {
                let v = b.bounds[ax][side];
                let nearest = pl
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - v).abs().partial_cmp(&(b - v).abs()).unwrap())
                    .unwrap();
                let span = pl[pl.len() - 1] - pl[0];
                if (nearest - v).abs() > 1e-9 * span.max(1e-300) {
                    warnings.push(format!(
                        "box {bi}: bound {v} on axis {ax} snapped to grid plane {nearest}"
                    ));
                }
                s[ax][side] = nearest;
            }
        }
        snapped.push(MaterialBox {
            bounds: s,
            props: b.props,
        });
    }

    let mut cells = vec![None; topo.nv];
    let (nx, ny, nz) = (topo.spec.nx, topo.spec.ny, topo.spec.nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let centre = [
                    (planes[0][i] + planes[0][i + 1]) / 2.0,
                    (planes[1][j] + planes[1][j + 1]) / 2.0,
                    (planes[2][k] + planes[2][k + 1]) / 2.0,
                ];
                let v = topo.point_index(i, j, k);
                for b in &snapped {
                    if (0..3).all(|a| centre[a] >= b.bounds[a][0] && centre[a] <= b.bounds[a][1]) {
                        cells[v] = Some(b.props);
                    }
                }
                if cells[v].is_none() {
                    return Err(CoreError::UncoveredCell(i, j, k));
                }
            }
        }
    }
    Ok((CellFields { cells }, warnings))
}

/// Which material matrix a diagonal operator represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// Edge capacitances M_eps (F).
    Epsilon,
    /// Edge conductances M_sigma (S).
    Sigma,
    /// Edge thermal conductances M_lambda (W/K).
    Lambda,
    /// Node thermal capacitances M_rhoc (J/K).
    RhoC,
    /// Facet reluctances M_nu (1/H).
    Nu,
    /// Edge gauging matrix M_G (eps-like, with material value sigma_g).
    Gauge,
}

/// A diagonal FIT material matrix with its phantom mask.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    pub kind: MatrixKind,
    pub values: Vec<f64>,
    pub phantom: Vec<bool>,
}

impl DiagonalOperator {
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

fn cell_param(kind: MatrixKind, p: &MaterialProps) -> f64 {
    match kind {
        MatrixKind::Epsilon => p.eps,
        MatrixKind::Sigma => p.sigma0,
        MatrixKind::Lambda => p.lambda,
        MatrixKind::RhoC => p.rhoc,
        MatrixKind::Nu => p.nu,
        MatrixKind::Gauge => 1.0,
    }
}

/// Edge-allocated matrix: entry n = (quadrant-area mean of the cell values)
/// * |A~_n| / |L_n|. Since the quadrant areas sum to |A~_n|, this equals
/// sum_q (w_q * value_q) / |L_n|.
pub fn edge_matrix(topo: &GridTopology, fields: &CellFields, kind: MatrixKind) -> DiagonalOperator {
    assert!(matches!(
        kind,
        MatrixKind::Epsilon | MatrixKind::Sigma | MatrixKind::Lambda | MatrixKind::Gauge
    ));
    let mut values = vec![0.0; topo.ne];
    for e in topo.non_phantom_edges() {
        let mut acc = 0.0;
        for (cell, w) in topo.edge_quadrants(e) {
            acc += w * cell_param(kind, &fields.get(cell));
        }
        values[e] = acc / topo.edge_len[e];
    }
    DiagonalOperator {
        kind,
        values,
        phantom: topo.edge_phantom.clone(),
    }
}

/// Facet-allocated reluctance matrix: entry n = (half-length mean of nu over
/// the cells crossed by the dual edge) * |L~_n| / |A_n|.
pub fn facet_matrix(topo: &GridTopology, fields: &CellFields) -> DiagonalOperator {
    let mut values = vec![0.0; topo.nf];
    for f in topo.non_phantom_facets() {
        let mut acc = 0.0;
        for (cell, w) in topo.facet_halves(f) {
            acc += w * fields.get(cell).nu;
        }
        values[f] = acc / topo.facet_area[f];
    }
    DiagonalOperator {
        kind: MatrixKind::Nu,
        values,
        phantom: topo.facet_phantom.clone(),
    }
}

/// Point-allocated heat capacity matrix: entry i = octant-volume mean of
/// rho*c times |V~_i|, which equals the octant-weighted sum directly.
pub fn node_matrix(topo: &GridTopology, fields: &CellFields) -> DiagonalOperator {
    let mut values = vec![0.0; topo.np];
    for p in 0..topo.np {
        let mut acc = 0.0;
        for (cell, w) in topo.point_octants(p) {
            acc += w * fields.get(cell).rhoc;
        }
        values[p] = acc;
    }
    DiagonalOperator {
        kind: MatrixKind::RhoC,
        values,
        phantom: vec![false; topo.np],
    }
}

/// Linear-resistivity conductivity model sigma(T) = sigma0 / (1 + alpha*(T - T0)).
pub fn sigma_of_t(sigma0: f64, alpha: f64, t_ref: f64, t: f64) -> Result<f64, CoreError> {
    let denom = 1.0 + alpha * (t - t_ref);
    if denom <= 0.0 {
        return Err(CoreError::NonphysicalTemperature(denom));
    }
    Ok(sigma0 / denom)
}

/// One weighted conductivity contribution of a cell to an edge conductance.
/// The branch conductance is G_m(T) = sum_q scale_q * sigma_q(T), with
/// scale_q = (quadrant area) / |L_m| so that G is in siemens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTerm {
    pub scale: f64,
    pub sigma0: f64,
    pub alpha: f64,
    pub t_ref: f64,
}

/// The per-quadrant conductivity data of an edge, for temperature-dependent
/// conductance evaluation. Terms of identical (sigma0, alpha, t_ref) are
/// merged.
pub fn edge_sigma_terms(topo: &GridTopology, fields: &CellFields, e: usize) -> Vec<SigmaTerm> {
    let mut terms: Vec<SigmaTerm> = Vec::new();
    for (cell, w) in topo.edge_quadrants(e) {
        let p = fields.get(cell);
        let scale = w / topo.edge_len[e];
        if let Some(t) = terms
            .iter_mut()
            .find(|t| t.sigma0 == p.sigma0 && t.alpha == p.alpha && t.t_ref == p.t_ref)
        {
            t.scale += scale;
        } else {
            terms.push(SigmaTerm {
                scale,
                sigma0: p.sigma0,
                alpha: p.alpha,
                t_ref: p.t_ref,
            });
        }
    }
    terms
}

/// Evaluate the branch conductance at temperature `t` from its terms.
pub fn eval_sigma_terms(terms: &[SigmaTerm], t: f64) -> Result<f64, CoreError> {
    let mut g = 0.0;
    for term in terms {
        g += term.scale * sigma_of_t(term.sigma0, term.alpha, term.t_ref, t)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_topology, EntityKind, GridSpec};
    use crate::{EPS0, MU0};

    fn vacuum() -> MaterialProps {
        MaterialProps {
            eps: EPS0,
            sigma0: 0.0,
            lambda: 0.0,
            rhoc: 0.0,
            nu: 1.0 / MU0,
            alpha: 0.0,
            t_ref: 293.0,
        }
    }

    fn whole_box(props: MaterialProps, lx: f64, ly: f64, lz: f64) -> MaterialBox {
        MaterialBox {
            bounds: [[0.0, lx], [0.0, ly], [0.0, lz]],
            props,
        }
    }

    #[test]
    fn rasterize_uniform_and_override() {
        let topo = build_topology(GridSpec::uniform(2, 2, 2, 0.5).unwrap()).unwrap();
        let a = vacuum();
        let mut b = vacuum();
        b.sigma0 = 7.0;
        let (fields, warns) = rasterize(
            &topo,
            &[
                whole_box(a, 1.0, 1.0, 1.0),
                MaterialBox {
                    bounds: [[0.5, 1.0], [0.0, 1.0], [0.0, 1.0]],
                    props: b,
                },
            ],
        )
        .unwrap();
        assert!(warns.is_empty());
        let left = topo.point_index(0, 1, 1);
        let right = topo.point_index(1, 1, 1);
        assert_eq!(fields.cells[left].unwrap().sigma0, 0.0);
        assert_eq!(fields.cells[right].unwrap().sigma0, 7.0);
    }

    #[test]
    fn rasterize_reports_uncovered_cell() {
        let topo = build_topology(GridSpec::uniform(2, 1, 1, 1.0).unwrap()).unwrap();
        let err = rasterize(&topo, &[whole_box(vacuum(), 1.0, 1.0, 1.0)]).unwrap_err();
        match err {
            CoreError::UncoveredCell(i, _, _) => assert_eq!(i, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rasterize_snaps_with_warning() {
        let topo = build_topology(GridSpec::uniform(2, 1, 1, 1.0).unwrap()).unwrap();
        let mut b = vacuum();
        b.sigma0 = 3.0;
        let (fields, warns) = rasterize(
            &topo,
            &[
                whole_box(vacuum(), 2.0, 1.0, 1.0),
                MaterialBox {
                    bounds: [[0.93, 2.0], [0.0, 1.0], [0.0, 1.0]],
                    props: b,
                },
            ],
        )
        .unwrap();
        assert_eq!(warns.len(), 1);
        assert_eq!(fields.cells[topo.point_index(1, 0, 0)].unwrap().sigma0, 3.0);
        assert_eq!(fields.cells[topo.point_index(0, 0, 0)].unwrap().sigma0, 0.0);
    }

    /// Table 2 of the electrothermal test case: resistive and capacitive
    /// halves of the brick.
    #[test]
    fn rasterize_et_brick_materials() {
        let spec = GridSpec::new(
            vec![0.05e-6; 8],
            vec![0.1e-6 / 3.0; 3],
            vec![0.1e-6 / 3.0; 3],
        )
        .unwrap();
        let topo = build_topology(spec).unwrap();
        let resistive = MaterialProps {
            eps: EPS0,
            sigma0: 1e-4,
            lambda: 401.0,
            rhoc: 3.48e6,
            nu: 1.0 / MU0,
            alpha: 3.9e-3,
            t_ref: 293.0,
        };
        let capacitive = MaterialProps {
            eps: 3.9 * EPS0,
            sigma0: 0.0,
            lambda: 1400.0,
            rhoc: 2.10e6,
            nu: 1.0 / MU0,
            alpha: 0.0,
            t_ref: 293.0,
        };
        let (fields, _) = rasterize(
            &topo,
            &[
                MaterialBox {
                    bounds: [[0.0, 0.3e-6], [0.0, 0.1e-6], [0.0, 0.1e-6]],
                    props: resistive,
                },
                MaterialBox {
                    bounds: [[0.3e-6, 0.4e-6], [0.0, 0.1e-6], [0.0, 0.1e-6]],
                    props: capacitive,
                },
            ],
        )
        .unwrap();
        assert_eq!(fields.cells[topo.point_index(0, 0, 0)].unwrap().sigma0, 1e-4);
        assert_eq!(fields.cells[topo.point_index(7, 2, 2)].unwrap().eps, 3.9 * EPS0);
    }

    #[test]
    fn edge_matrix_uniform_interior() {
        let h = 0.2;
        let topo = build_topology(GridSpec::uniform(3, 3, 3, h).unwrap()).unwrap();
        let fields = CellFields::uniform(&topo, vacuum());
        let m_eps = edge_matrix(&topo, &fields, MatrixKind::Epsilon);
        let e = topo
            .canonical_index(EntityKind::Edge, Axis::X, 1, 1, 1)
            .unwrap();
        assert!((m_eps.get(e) - EPS0 * h).abs() < 1e-12 * EPS0 * h);
    }

    /// Quadrant-area weighting oracle for a bi-material edge.
    #[test]
    fn edge_matrix_bimaterial_quadrants() {
        let h = 1.0;
        let topo = build_topology(GridSpec::uniform(2, 2, 2, h).unwrap()).unwrap();
        let mut hot = vacuum();
        hot.sigma0 = 1e-4;
        let cold = vacuum();
        let (fields, _) = rasterize(
            &topo,
            &[
                whole_box(cold, 2.0, 2.0, 2.0),
                MaterialBox {
                    bounds: [[0.0, 2.0], [0.0, 1.0], [0.0, 2.0]],
                    props: hot,
                },
            ],
        )
        .unwrap();
        // x-edge at the y-interface j=1, interior in z: two quadrants hot,
        // two cold, all areas (h/2)^2
        let e = topo
            .canonical_index(EntityKind::Edge, Axis::X, 0, 1, 1)
            .unwrap();
        let m_sigma = edge_matrix(&topo, &fields, MatrixKind::Sigma);
        let quadrant = h / 2.0 * (h / 2.0);
        let oracle = (2.0 * quadrant * 1e-4 + 2.0 * quadrant * 0.0) / h;
        assert!((m_sigma.get(e) - oracle).abs() < 1e-18);
        // same as 0.5e-4 * |A~|/|L|
        assert!((oracle - 0.5e-4 * (h * h) / h).abs() < 1e-18);
    }

    #[test]
    fn edge_matrix_boundary_two_quadrants() {
        let h = 1.0;
        let topo = build_topology(GridSpec::uniform(2, 2, 2, h).unwrap()).unwrap();
        let fields = CellFields::uniform(&topo, vacuum());
        // edge on the y=0 boundary face, interior in z
        let e = topo
            .canonical_index(EntityKind::Edge, Axis::X, 0, 0, 1)
            .unwrap();
        let m_eps = edge_matrix(&topo, &fields, MatrixKind::Epsilon);
        // |A~| = h/2 * h, mean over two cells = eps
        assert!((m_eps.get(e) - EPS0 * (h / 2.0 * h) / h).abs() < 1e-15);
    }

    #[test]
    fn facet_matrix_values() {
        let h = 0.5;
        let topo = build_topology(GridSpec::uniform(2, 2, 2, h).unwrap()).unwrap();
        let fields = CellFields::uniform(&topo, vacuum());
        let m_nu = facet_matrix(&topo, &fields);
        let nu0 = 1.0 / MU0;
        // interior x-facet: |L~| = h, |A| = h^2
        let f = topo
            .canonical_index(EntityKind::Facet, Axis::X, 1, 1, 1)
            .unwrap();
        assert!((m_nu.get(f) - nu0 / h).abs() < 1e-9 * nu0 / h);
        // boundary facet at i=0: half dual edge, single cell
        let f0 = topo
            .canonical_index(EntityKind::Facet, Axis::X, 0, 1, 1)
            .unwrap();
        let oracle = nu0 * (h / 2.0) / (h * h);
        assert!((m_nu.get(f0) - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn facet_matrix_two_cell_mean() {
        let h = 1.0;
        let topo = build_topology(GridSpec::uniform(2, 1, 1, h).unwrap()).unwrap();
        let mut a = vacuum();
        a.nu = 100.0;
        let mut b = vacuum();
        b.nu = 300.0;
        let (fields, _) = rasterize(
            &topo,
            &[
                MaterialBox { bounds: [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]], props: a },
                MaterialBox { bounds: [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], props: b },
            ],
        )
        .unwrap();
        let m_nu = facet_matrix(&topo, &fields);
        let f = topo
            .canonical_index(EntityKind::Facet, Axis::X, 1, 0, 0)
            .unwrap();
        // equal half lengths: mean (100+300)/2, |L~| = h, |A| = h^2
        assert!((m_nu.get(f) - 200.0).abs() < 1e-12);
    }

    #[test]
    fn node_matrix_values() {
        let h = 0.1;
        let topo = build_topology(GridSpec::uniform(2, 2, 2, h).unwrap()).unwrap();
        let mut props = vacuum();
        props.rhoc = 3.48e6;
        let fields = CellFields::uniform(&topo, props);
        let m = node_matrix(&topo, &fields);
        let interior = topo.point_index(1, 1, 1);
        let corner = topo.point_index(0, 0, 0);
        assert!((m.get(interior) - 3.48e6 * h * h * h).abs() < 1e-6);
        assert!((m.get(corner) - 3.48e6 * h * h * h / 8.0).abs() < 1e-6);
    }

    #[test]
    fn node_matrix_bimaterial_octants() {
        let h = 1.0;
        let topo = build_topology(GridSpec::uniform(2, 2, 2, h).unwrap()).unwrap();
        let mut a = vacuum();
        a.rhoc = 8.0;
        let mut b = vacuum();
        b.rhoc = 16.0;
        let (fields, _) = rasterize(
            &topo,
            &[
                whole_box(a, 2.0, 2.0, 2.0),
                MaterialBox { bounds: [[1.0, 2.0], [0.0, 2.0], [0.0, 2.0]], props: b },
            ],
        )
        .unwrap();
        // centre point: 4 octants of each material, octant volume 1/8
        let m = node_matrix(&topo, &fields);
        let oracle = 4.0 * (8.0 / 8.0) + 4.0 * (16.0 / 8.0);
        assert!((m.get(topo.point_index(1, 1, 1)) - oracle).abs() < 1e-12);
    }

    #[test]
    fn sigma_of_t_model() {
        assert_eq!(sigma_of_t(2.0, 0.0, 293.0, 500.0).unwrap(), 2.0);
        assert_eq!(sigma_of_t(2.0, 3.9e-3, 293.0, 293.0).unwrap(), 2.0);
        let s = sigma_of_t(1e-4, 3.9e-3, 293.0, 393.0).unwrap();
        let oracle = 1e-4 / 1.39;
        assert!((s - oracle).abs() < 1e-19);
        assert!((s - 7.194e-5).abs() < 1e-8);
        assert!(sigma_of_t(1.0, -1e-2, 293.0, 500.0).is_err());
    }

    #[test]
    fn positivity_and_translation_invariance() {
        let topo = build_topology(GridSpec::uniform(4, 4, 4, 0.3).unwrap()).unwrap();
        let mut props = vacuum();
        props.rhoc = 2.0;
        props.lambda = 5.0;
        let fields = CellFields::uniform(&topo, props);
        let m_eps = edge_matrix(&topo, &fields, MatrixKind::Epsilon);
        let m_nu = facet_matrix(&topo, &fields);
        let m_rhoc = node_matrix(&topo, &fields);
        for e in topo.non_phantom_edges() {
            assert!(m_eps.get(e) > 0.0);
        }
        for f in topo.non_phantom_facets() {
            assert!(m_nu.get(f) > 0.0);
        }
        for p in 0..topo.np {
            assert!(m_rhoc.get(p) > 0.0);
        }
        // translation symmetry: all interior x-edges carry the same entry
        let reference = m_eps.get(
            topo.canonical_index(EntityKind::Edge, Axis::X, 1, 1, 1).unwrap(),
        );
        for i in 0..4 {
            for j in 1..4 {
                for k in 1..4 {
                    let e = topo
                        .canonical_index(EntityKind::Edge, Axis::X, i, j, k)
                        .unwrap();
                    assert!((m_eps.get(e) - reference).abs() < 1e-15 * reference);
                }
            }
        }
    }

    #[test]
    fn sigma_terms_merge_and_evaluate() {
        let h = 1.0;
        let topo = build_topology(GridSpec::uniform(2, 2, 2, h).unwrap()).unwrap();
        let mut hot = vacuum();
        hot.sigma0 = 1e-4;
        hot.alpha = 3.9e-3;
        let fields = CellFields::uniform(&topo, hot);
        let e = topo
            .canonical_index(EntityKind::Edge, Axis::X, 0, 1, 1)
            .unwrap();
        let terms = edge_sigma_terms(&topo, &fields, e);
        assert_eq!(terms.len(), 1);
        let g_ref = eval_sigma_terms(&terms, 293.0).unwrap();
        let m_sigma = edge_matrix(&topo, &fields, MatrixKind::Sigma);
        assert!((g_ref - m_sigma.get(e)).abs() < 1e-18);
        let g_hot = eval_sigma_terms(&terms, 393.0).unwrap();
        assert!((g_hot - g_ref / 1.39).abs() < 1e-18);
    }
}
