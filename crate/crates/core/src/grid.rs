//! Grid topology: canonical numbering, entity measures and phantom masks.

use crate::error::CoreError;

/// Coordinate axis, also used as the directional block of an entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        match i {
            0 => Axis::X,
            1 => Axis::Y,
            2 => Axis::Z,
            _ => panic!("axis index {i}"),
        }
    }
}

/// Kind of grid entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Point,
    Edge,
    Facet,
    Volume,
}

/// Cell counts and widths of the primal grid.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dz: Vec<f64>,
}

impl GridSpec {
    pub fn new(dx: Vec<f64>, dy: Vec<f64>, dz: Vec<f64>) -> Result<Self, CoreError> {
        let spec = GridSpec {
            nx: dx.len(),
            ny: dy.len(),
            nz: dz.len(),
            dx,
            dy,
            dz,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Uniform spacing helper.
    pub fn uniform(nx: usize, ny: usize, nz: usize, h: f64) -> Result<Self, CoreError> {
        GridSpec::new(vec![h; nx], vec![h; ny], vec![h; nz])
    }

    fn validate(&self) -> Result<(), CoreError> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(CoreError::InvalidSpec("zero cell count".into()));
        }
        for (axis, widths) in [("x", &self.dx), ("y", &self.dy), ("z", &self.dz)] {
            if widths.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
                return Err(CoreError::InvalidSpec(format!(
                    "non-positive cell width on {axis} axis"
                )));
            }
        }
        Ok(())
    }

    pub fn widths(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.dx,
            Axis::Y => &self.dy,
            Axis::Z => &self.dz,
        }
    }

    pub fn cells(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::Z => self.nz,
        }
    }

    /// Grid plane coordinates along `axis` (length cells+1).
    pub fn planes(&self, axis: Axis) -> Vec<f64> {
        let w = self.widths(axis);
        let mut p = Vec::with_capacity(w.len() + 1);
        let mut acc = 0.0;
        p.push(0.0);
        for &d in w {
            acc += d;
            p.push(acc);
        }
        p
    }

    /// Half-sum dual spacing at plane index `i` (0..=cells), truncated at
    /// the domain boundary.
    fn dual_width(&self, axis: Axis, i: usize) -> f64 {
        let w = self.widths(axis);
        let n = w.len();
        let lo = if i > 0 { w[i - 1] / 2.0 } else { 0.0 };
        let hi = if i < n { w[i] / 2.0 } else { 0.0 };
        lo + hi
    }
}

/// The staggered grid pair: counts, measures and phantom masks under full
/// allocation (every directional block has one slot per point).
#[derive(Debug, Clone)]
pub struct GridTopology {
    pub spec: GridSpec,
    /// Number of points; also the slot count of each directional block.
    pub np: usize,
    /// Edge slots (3 * np).
    pub ne: usize,
    /// Facet slots (3 * np).
    pub nf: usize,
    /// Volume slots (np).
    pub nv: usize,
    /// Primal edge lengths |L_n| per edge slot (0 on phantom).
    pub edge_len: Vec<f64>,
    /// Primal facet areas |A_n| per facet slot.
    pub facet_area: Vec<f64>,
    /// Primal cell volumes |V_i| per volume slot.
    pub cell_vol: Vec<f64>,
    /// Dual facet areas |A~_n|, indexed like the primal edge they are pierced by.
    pub dual_area: Vec<f64>,
    /// Dual edge lengths |L~_n|, indexed like the primal facet they pierce.
    pub dual_len: Vec<f64>,
    /// Dual volumes |V~_i| around each primal point.
    pub dual_vol: Vec<f64>,
    pub edge_phantom: Vec<bool>,
    pub facet_phantom: Vec<bool>,
    pub vol_phantom: Vec<bool>,
}

/// Build the topology from a validated spec.
pub fn build_topology(spec: GridSpec) -> Result<GridTopology, CoreError> {
    spec.validate()?;
    let (nx, ny, nz) = (spec.nx, spec.ny, spec.nz);
    let np = (nx + 1) * (ny + 1) * (nz + 1);
    let ne = 3 * np;
    let nf = 3 * np;
    let nv = np;

    let mut topo = GridTopology {
        spec,
        np,
        ne,
        nf,
        nv,
        edge_len: vec![0.0; ne],
        facet_area: vec![0.0; nf],
        cell_vol: vec![0.0; nv],
        dual_area: vec![0.0; ne],
        dual_len: vec![0.0; nf],
        dual_vol: vec![0.0; np],
        edge_phantom: vec![true; ne],
        facet_phantom: vec![true; nf],
        vol_phantom: vec![true; nv],
    };

    let spec = &topo.spec;
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let p = topo.point_index(i, j, k);
                topo.dual_vol[p] = spec.dual_width(Axis::X, i)
                    * spec.dual_width(Axis::Y, j)
                    * spec.dual_width(Axis::Z, k);

                // Edges along each axis starting at this point.
                if i < nx {
                    let e = topo.entity_slot(Axis::X, i, j, k);
                    topo.edge_phantom[e] = false;
                    topo.edge_len[e] = spec.dx[i];
                    topo.dual_area[e] =
                        spec.dual_width(Axis::Y, j) * spec.dual_width(Axis::Z, k);
                }
                if j < ny {
                    let e = topo.np + topo.entity_slot_raw(i, j, k);
                    topo.edge_phantom[e] = false;
                    topo.edge_len[e] = spec.dy[j];
                    topo.dual_area[e] =
                        spec.dual_width(Axis::X, i) * spec.dual_width(Axis::Z, k);
                }
                if k < nz {
                    let e = 2 * topo.np + topo.entity_slot_raw(i, j, k);
                    topo.edge_phantom[e] = false;
                    topo.edge_len[e] = spec.dz[k];
                    topo.dual_area[e] =
                        spec.dual_width(Axis::X, i) * spec.dual_width(Axis::Y, j);
                }

                // Facets normal to each axis with min corner at this point.
                if j < ny && k < nz {
                    let f = topo.entity_slot_raw(i, j, k);
                    topo.facet_phantom[f] = false;
                    topo.facet_area[f] = spec.dy[j] * spec.dz[k];
                    topo.dual_len[f] = spec.dual_width(Axis::X, i);
                }
                if i < nx && k < nz {
                    let f = topo.np + topo.entity_slot_raw(i, j, k);
                    topo.facet_phantom[f] = false;
                    topo.facet_area[f] = spec.dx[i] * spec.dz[k];
                    topo.dual_len[f] = spec.dual_width(Axis::Y, j);
                }
                if i < nx && j < ny {
                    let f = 2 * topo.np + topo.entity_slot_raw(i, j, k);
                    topo.facet_phantom[f] = false;
                    topo.facet_area[f] = spec.dx[i] * spec.dy[j];
                    topo.dual_len[f] = spec.dual_width(Axis::Z, k);
                }

                if i < nx && j < ny && k < nz {
                    let v = topo.entity_slot_raw(i, j, k);
                    topo.vol_phantom[v] = false;
                    topo.cell_vol[v] = spec.dx[i] * spec.dy[j] * spec.dz[k];
                }
            }
        }
    }
    Ok(topo)
}

impl GridTopology {
    pub fn build(spec: GridSpec) -> Result<GridTopology, CoreError> {
        build_topology(spec)
    }

    fn entity_slot_raw(&self, i: usize, j: usize, k: usize) -> usize {
        i + j * (self.spec.nx + 1) + k * (self.spec.nx + 1) * (self.spec.ny + 1)
    }

    /// Slot within the directional block of `axis` (x-fastest numbering),
    /// offset by the block position.
    fn entity_slot(&self, axis: Axis, i: usize, j: usize, k: usize) -> usize {
        axis.index() * self.np + self.entity_slot_raw(i, j, k)
    }

    pub fn point_index(&self, i: usize, j: usize, k: usize) -> usize {
        self.entity_slot_raw(i, j, k)
    }

    /// Canonical index of an entity; errors on out-of-allocation coordinates.
    pub fn canonical_index(
        &self,
        kind: EntityKind,
        axis: Axis,
        i: usize,
        j: usize,
        k: usize,
    ) -> Result<usize, CoreError> {
        let (nx, ny, nz) = (self.spec.nx, self.spec.ny, self.spec.nz);
        if i > nx || j > ny || k > nz {
            return Err(CoreError::IndexOutOfRange(format!(
                "{kind:?} {axis:?} ({i},{j},{k}) outside allocation {nx}x{ny}x{nz}"
            )));
        }
        Ok(match kind {
            EntityKind::Point | EntityKind::Volume => self.entity_slot_raw(i, j, k),
            EntityKind::Edge | EntityKind::Facet => self.entity_slot(axis, i, j, k),
        })
    }

    /// Inverse of `canonical_index` for edges/facets: (axis, i, j, k).
    pub fn entity_coords(&self, slot: usize) -> (Axis, usize, usize, usize) {
        let axis = Axis::from_index(slot / self.np);
        let r = slot % self.np;
        let sx = self.spec.nx + 1;
        let sy = self.spec.ny + 1;
        let i = r % sx;
        let j = (r / sx) % sy;
        let k = r / (sx * sy);
        (axis, i, j, k)
    }

    pub fn point_coords(&self, p: usize) -> (usize, usize, usize) {
        let (_, i, j, k) = self.entity_coords(p % self.np);
        (i, j, k)
    }

    /// Start and end point of an edge slot; the start index is always the
    /// smaller one under canonical numbering.
    pub fn edge_points(&self, e: usize) -> (usize, usize) {
        let (axis, i, j, k) = self.entity_coords(e);
        let a = self.entity_slot_raw(i, j, k);
        let b = match axis {
            Axis::X => self.entity_slot_raw(i + 1, j, k),
            Axis::Y => self.entity_slot_raw(i, j + 1, k),
            Axis::Z => self.entity_slot_raw(i, j, k + 1),
        };
        (a, b)
    }

    pub fn edge_axis(&self, e: usize) -> Axis {
        Axis::from_index(e / self.np)
    }

    /// The four boundary edge slots of a facet, paired with their curl signs
    /// for the facet orientation (right-handed around the facet normal).
    pub fn facet_edges(&self, f: usize) -> [(usize, i8); 4] {
        let (normal, i, j, k) = self.entity_coords(f);
        match normal {
            // x-facet spans y,z: +y@p, +z@(p+y), -y@(p+z), -z@p
            Axis::X => [
                (self.entity_slot(Axis::Y, i, j, k), 1),
                (self.entity_slot(Axis::Z, i, j + 1, k), 1),
                (self.entity_slot(Axis::Y, i, j, k + 1), -1),
                (self.entity_slot(Axis::Z, i, j, k), -1),
            ],
            // y-facet spans z,x: +z@p, +x@(p+z), -z@(p+x), -x@p
            Axis::Y => [
                (self.entity_slot(Axis::Z, i, j, k), 1),
                (self.entity_slot(Axis::X, i, j, k + 1), 1),
                (self.entity_slot(Axis::Z, i + 1, j, k), -1),
                (self.entity_slot(Axis::X, i, j, k), -1),
            ],
            // z-facet spans x,y: +x@p, +y@(p+x), -x@(p+y), -y@p
            Axis::Z => [
                (self.entity_slot(Axis::X, i, j, k), 1),
                (self.entity_slot(Axis::Y, i + 1, j, k), 1),
                (self.entity_slot(Axis::X, i, j + 1, k), -1),
                (self.entity_slot(Axis::Y, i, j, k), -1),
            ],
        }
    }

    /// The six boundary facet slots of a volume with outward signs.
    pub fn volume_facets(&self, v: usize) -> [(usize, i8); 6] {
        let (_, i, j, k) = self.entity_coords(v);
        [
            (self.entity_slot(Axis::X, i + 1, j, k), 1),
            (self.entity_slot(Axis::X, i, j, k), -1),
            (self.entity_slot(Axis::Y, i, j + 1, k), 1),
            (self.entity_slot(Axis::Y, i, j, k), -1),
            (self.entity_slot(Axis::Z, i, j, k + 1), 1),
            (self.entity_slot(Axis::Z, i, j, k), -1),
        ]
    }

    /// Facet slots containing edge `e` (phantoms excluded).
    ///
    /// For an edge along `axis`, the containing facets are normal to the two
    /// perpendicular axes, at the edge position and one step back along the
    /// third axis.
    pub fn edge_facets(&self, e: usize) -> Vec<usize> {
        let (axis, i, j, k) = self.entity_coords(e);
        let mut out = Vec::with_capacity(4);
        for normal in Axis::ALL {
            if normal == axis {
                continue;
            }
            let third = third_axis(axis, normal);
            for back in [0usize, 1] {
                let pos = coord_of(third, i, j, k);
                if pos < back {
                    continue;
                }
                let (fi, fj, fk) = replace_coord(third, pos - back, i, j, k);
                let f = self.entity_slot(normal, fi, fj, fk);
                if !self.facet_phantom[f] {
                    out.push(f);
                }
            }
        }
        out
    }

    /// Primal cells adjacent to an edge with their quadrant cross-section
    /// areas (up to four; boundary edges have fewer).
    pub fn edge_quadrants(&self, e: usize) -> Vec<(usize, f64)> {
        let (axis, i, j, k) = self.entity_coords(e);
        let (a1, a2) = perp_axes(axis);
        let mut out = Vec::with_capacity(4);
        let c1 = coord_of(axis, i, j, k);
        for o1 in [-1i64, 0] {
            for o2 in [-1i64, 0] {
                let q1 = coord_of(a1, i, j, k) as i64 + o1;
                let q2 = coord_of(a2, i, j, k) as i64 + o2;
                if q1 < 0
                    || q2 < 0
                    || q1 >= self.spec.cells(a1) as i64
                    || q2 >= self.spec.cells(a2) as i64
                {
                    continue;
                }
                let (ci, cj, ck) = assemble_coords(axis, c1, a1, q1 as usize, a2, q2 as usize);
                let v = self.entity_slot_raw(ci, cj, ck);
                let w = self.spec.widths(a1)[q1 as usize] / 2.0
                    * self.spec.widths(a2)[q2 as usize] / 2.0;
                out.push((v, w));
            }
        }
        out
    }

    /// Primal cells traversed by the dual edge of facet `f` with their
    /// half-length weights (two for interior facets, one at the boundary).
    pub fn facet_halves(&self, f: usize) -> Vec<(usize, f64)> {
        let (normal, i, j, k) = self.entity_coords(f);
        let pos = coord_of(normal, i, j, k);
        let mut out = Vec::with_capacity(2);
        for o in [-1i64, 0] {
            let q = pos as i64 + o;
            if q < 0 || q >= self.spec.cells(normal) as i64 {
                continue;
            }
            let (ci, cj, ck) = replace_coord(normal, q as usize, i, j, k);
            let v = self.entity_slot_raw(ci, cj, ck);
            out.push((v, self.spec.widths(normal)[q as usize] / 2.0));
        }
        out
    }

    /// Primal cells around a point with their octant volumes.
    pub fn point_octants(&self, p: usize) -> Vec<(usize, f64)> {
        let (i, j, k) = self.point_coords(p);
        let mut out = Vec::with_capacity(8);
        for ox in [-1i64, 0] {
            for oy in [-1i64, 0] {
                for oz in [-1i64, 0] {
                    let (ci, cj, ck) = (i as i64 + ox, j as i64 + oy, k as i64 + oz);
                    if ci < 0
                        || cj < 0
                        || ck < 0
                        || ci >= self.spec.nx as i64
                        || cj >= self.spec.ny as i64
                        || ck >= self.spec.nz as i64
                    {
                        continue;
                    }
                    let v = self.entity_slot_raw(ci as usize, cj as usize, ck as usize);
                    let w = self.spec.dx[ci as usize] / 2.0
                        * self.spec.dy[cj as usize] / 2.0
                        * self.spec.dz[ck as usize] / 2.0;
                    out.push((v, w));
                }
            }
        }
        out
    }

    pub fn non_phantom_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ne).filter(|&e| !self.edge_phantom[e])
    }

    pub fn non_phantom_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nf).filter(|&f| !self.facet_phantom[f])
    }

    pub fn non_phantom_volumes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nv).filter(|&v| !self.vol_phantom[v])
    }

    pub fn edge_count_real(&self) -> usize {
        self.non_phantom_edges().count()
    }

    pub fn facet_count_real(&self) -> usize {
        self.non_phantom_facets().count()
    }

    /// Neighbourhood sets of a primal edge used by the electromagnetic stamps.
    pub fn edge_neighbourhood(&self, m: usize) -> Result<EdgeNeighbourhood, CoreError> {
        if m >= self.ne || self.edge_phantom[m] {
            return Err(CoreError::PhantomEdge(m));
        }
        let facets = self.edge_facets(m);
        let mut per_facet = Vec::with_capacity(facets.len());
        let mut edges_all = vec![m];
        for &f in &facets {
            let edges: Vec<usize> = self.facet_edges(f).iter().map(|&(e, _)| e).collect();
            for &e in &edges {
                if !edges_all.contains(&e) {
                    edges_all.push(e);
                }
            }
            let edges_other = edges.iter().copied().filter(|&e| e != m).collect();
            per_facet.push(FacetEdges {
                facet: f,
                edges,
                edges_other,
            });
        }
        let edges_other = edges_all.iter().copied().filter(|&e| e != m).collect();
        let n_f = facets.len();
        Ok(EdgeNeighbourhood {
            edge: m,
            facets,
            edges_all,
            edges_other,
            per_facet,
            n_f,
        })
    }
}

/// Edge and facet sets in the neighbourhood of one primal edge.
#[derive(Debug, Clone)]
pub struct EdgeNeighbourhood {
    pub edge: usize,
    /// Facets containing the edge; also the dual edges embedded in the
    /// edge's dual facet, by index duality.
    pub facets: Vec<usize>,
    /// All edges embedded in those facets, the edge itself included.
    pub edges_all: Vec<usize>,
    /// Same set with the edge itself removed.
    pub edges_other: Vec<usize>,
    pub per_facet: Vec<FacetEdges>,
    /// Number of non-phantom facets containing the edge.
    pub n_f: usize,
}

#[derive(Debug, Clone)]
pub struct FacetEdges {
    pub facet: usize,
    /// Boundary edges of the facet (four on a hexahedral grid).
    pub edges: Vec<usize>,
    /// Boundary edges without the reference edge.
    pub edges_other: Vec<usize>,
}

fn third_axis(a: Axis, b: Axis) -> Axis {
    Axis::from_index(3 - a.index() - b.index())
}

fn perp_axes(a: Axis) -> (Axis, Axis) {
    match a {
        Axis::X => (Axis::Y, Axis::Z),
        Axis::Y => (Axis::X, Axis::Z),
        Axis::Z => (Axis::X, Axis::Y),
    }
}

fn coord_of(axis: Axis, i: usize, j: usize, k: usize) -> usize {
    match axis {
        Axis::X => i,
        Axis::Y => j,
        Axis::Z => k,
    }
}

fn replace_coord(axis: Axis, v: usize, i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    match axis {
        Axis::X => (v, j, k),
        Axis::Y => (i, v, k),
        Axis::Z => (i, j, v),
    }
}

fn assemble_coords(
    fixed_axis: Axis,
    fixed: usize,
    a1: Axis,
    v1: usize,
    a2: Axis,
    v2: usize,
) -> (usize, usize, usize) {
    let mut c = [0usize; 3];
    c[fixed_axis.index()] = fixed;
    c[a1.index()] = v1;
    c[a2.index()] = v2;
    (c[0], c[1], c[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_counts() {
        let topo = build_topology(GridSpec::uniform(1, 1, 1, 1.0).unwrap()).unwrap();
        assert_eq!(topo.np, 8);
        assert_eq!(topo.non_phantom_edges().count(), 12);
        assert_eq!(topo.non_phantom_facets().count(), 6);
        assert_eq!(topo.non_phantom_volumes().count(), 1);
    }

    /// Independent enumeration oracle: count edges per direction by loops.
    #[test]
    fn edge_count_10x10x10_oracle() {
        let topo = build_topology(GridSpec::uniform(10, 10, 10, 0.01).unwrap()).unwrap();
        assert_eq!(topo.np, 1331);
        let mut count = 0usize;
        let (nx, ny, nz) = (10usize, 10, 10);
        for _k in 0..=nz {
            for _j in 0..=ny {
                for _i in 0..nx {
                    count += 1; // x-edges
                }
            }
        }
        for _k in 0..=nz {
            for _j in 0..ny {
                for _i in 0..=nx {
                    count += 1; // y-edges
                }
            }
        }
        for _k in 0..nz {
            for _j in 0..=ny {
                for _i in 0..=nx {
                    count += 1; // z-edges
                }
            }
        }
        assert_eq!(count, 3630);
        assert_eq!(topo.non_phantom_edges().count(), count);
    }

    #[test]
    fn uniform_dual_measures() {
        let h = 0.25;
        let topo = build_topology(GridSpec::uniform(3, 3, 3, h).unwrap()).unwrap();
        // interior x-edge -> dual facet area h^2
        let e = topo
            .canonical_index(EntityKind::Edge, Axis::X, 1, 1, 1)
            .unwrap();
        assert!((topo.dual_area[e] - h * h).abs() < 1e-15);
        // interior x-facet -> dual edge length h
        let f = topo
            .canonical_index(EntityKind::Facet, Axis::X, 1, 1, 1)
            .unwrap();
        assert!((topo.dual_len[f] - h).abs() < 1e-15);
    }

    #[test]
    fn canonical_index_block_offsets() {
        let topo = build_topology(GridSpec::uniform(2, 2, 2, 1.0).unwrap()).unwrap();
        assert_eq!(topo.point_index(0, 0, 0), 0);
        assert_eq!(
            topo.canonical_index(EntityKind::Edge, Axis::X, 0, 0, 0).unwrap(),
            0
        );
        assert_eq!(
            topo.canonical_index(EntityKind::Edge, Axis::Y, 0, 0, 0).unwrap(),
            topo.np
        );
        // z-edge formula from the numbering definition
        let (nx, ny) = (2usize, 2usize);
        for (i, j, k) in [(0, 0, 0), (1, 2, 0), (2, 1, 1)] {
            let expect = 2 * topo.np + i + j * (nx + 1) + k * (nx + 1) * (ny + 1);
            assert_eq!(
                topo.canonical_index(EntityKind::Edge, Axis::Z, i, j, k).unwrap(),
                expect
            );
        }
        assert!(topo
            .canonical_index(EntityKind::Edge, Axis::X, 3, 0, 0)
            .is_err());
    }

    #[test]
    fn canonical_index_roundtrip() {
        let topo = build_topology(GridSpec::uniform(3, 4, 5, 1.0).unwrap()).unwrap();
        for axis in Axis::ALL {
            for k in 0..=5 {
                for j in 0..=4 {
                    for i in 0..=3 {
                        let e = topo
                            .canonical_index(EntityKind::Edge, axis, i, j, k)
                            .unwrap();
                        assert_eq!(topo.entity_coords(e), (axis, i, j, k));
                    }
                }
            }
        }
    }

    #[test]
    fn neighbourhood_set_sizes() {
        let topo = build_topology(GridSpec::uniform(3, 3, 3, 1.0).unwrap()).unwrap();
        // interior x-edge
        let m = topo
            .canonical_index(EntityKind::Edge, Axis::X, 1, 1, 1)
            .unwrap();
        let nb = topo.edge_neighbourhood(m).unwrap();
        assert_eq!(nb.facets.len(), 4);
        assert_eq!(nb.edges_all.len(), 13);
        assert_eq!(nb.edges_other.len(), 12);
        for pf in &nb.per_facet {
            assert_eq!(pf.edges.len(), 4);
            assert_eq!(pf.edges_other.len(), 3);
        }
        assert!(nb.edges_all.contains(&m));
        assert!(!nb.edges_other.contains(&m));

        // edge on a boundary face: one facet phantom
        let m = topo
            .canonical_index(EntityKind::Edge, Axis::X, 1, 0, 1)
            .unwrap();
        assert_eq!(topo.edge_neighbourhood(m).unwrap().facets.len(), 3);

        // edge on a domain corner line: two facets phantom
        let m = topo
            .canonical_index(EntityKind::Edge, Axis::X, 1, 0, 0)
            .unwrap();
        assert_eq!(topo.edge_neighbourhood(m).unwrap().facets.len(), 2);

        // phantom edge is rejected
        let m = topo
            .canonical_index(EntityKind::Edge, Axis::X, 3, 0, 0)
            .unwrap();
        assert!(topo.edge_neighbourhood(m).is_err());
    }

    /// |L_n| * |A~_n| equals the sum of quarter cross-section volumes of the
    /// adjacent cells, on a nonuniform grid.
    #[test]
    fn measure_product_consistency() {
        let spec = GridSpec::new(
            vec![0.1, 0.3, 0.2],
            vec![0.5, 0.25],
            vec![0.4, 0.1, 0.35, 0.2],
        )
        .unwrap();
        let topo = build_topology(spec).unwrap();
        for e in topo.non_phantom_edges() {
            let product = topo.edge_len[e] * topo.dual_area[e];
            let quarters: f64 = topo
                .edge_quadrants(e)
                .iter()
                .map(|&(_, w)| w * topo.edge_len[e])
                .sum();
            assert!(
                (product - quarters).abs() <= 1e-14 * product.abs(),
                "edge {e}: {product} vs {quarters}"
            );
        }
    }

    /// Primal/dual object counts match: every non-phantom primal edge has a
    /// dual facet of positive area and vice versa.
    #[test]
    fn duality_counts() {
        let topo = build_topology(GridSpec::uniform(2, 3, 4, 1.0).unwrap()).unwrap();
        for e in 0..topo.ne {
            assert_eq!(topo.dual_area[e] > 0.0, !topo.edge_phantom[e]);
        }
        for f in 0..topo.nf {
            assert_eq!(topo.dual_len[f] > 0.0, !topo.facet_phantom[f]);
        }
        for p in 0..topo.np {
            assert!(topo.dual_vol[p] > 0.0);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(GridSpec::new(vec![], vec![1.0], vec![1.0]).is_err());
        assert!(GridSpec::new(vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(GridSpec::new(vec![1.0], vec![1.0], vec![-2.0]).is_err());
    }

    #[test]
    fn edge_points_ascending() {
        let topo = build_topology(GridSpec::uniform(2, 2, 2, 1.0).unwrap()).unwrap();
        for e in topo.non_phantom_edges() {
            let (a, b) = topo.edge_points(e);
            assert!(a < b);
        }
    }
}
