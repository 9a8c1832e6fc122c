//! Signed incidence matrices of the grid pair.
//!
//! Entries are stored as signed 8-bit integers so the topological
//! identities C*G = 0 and S*C = 0 can be checked exactly.

use crate::grid::{Axis, GridTopology};

/// Compressed sparse row matrix with i8 entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSparse {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<i8>,
}

impl IntSparse {
    pub fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(usize, i8)>>) -> IntSparse {
        assert_eq!(rows.len(), nrows);
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for (c, v) in row {
                debug_assert!(c < ncols);
                if v != 0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        IntSparse {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&c, &v)| (c, v))
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn transpose(&self) -> IntSparse {
        let mut rows = vec![Vec::new(); self.ncols];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                rows[c].push((r, v));
            }
        }
        IntSparse::from_rows(self.ncols, self.nrows, rows)
    }

    pub fn negated(&self) -> IntSparse {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = -*v;
        }
        out
    }

    /// Exact integer product; entries accumulate in i32.
    pub fn matmul(&self, rhs: &IntSparse) -> Vec<Vec<(usize, i32)>> {
        assert_eq!(self.ncols, rhs.nrows);
        let mut out = Vec::with_capacity(self.nrows);
        let mut acc: Vec<i32> = vec![0; rhs.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                for (c2, v2) in rhs.row(c) {
                    if acc[c2] == 0 {
                        touched.push(c2);
                    }
                    acc[c2] += v as i32 * v2 as i32;
                }
            }
            let mut row: Vec<(usize, i32)> = touched
                .drain(..)
                .filter_map(|c| {
                    let v = acc[c];
                    acc[c] = 0;
                    (v != 0).then_some((c, v))
                })
                .collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            out.push(row);
        }
        out
    }

    pub fn is_matmul_zero(&self, rhs: &IntSparse) -> bool {
        self.matmul(rhs).iter().all(|row| row.is_empty())
    }

    /// y = A * x in f64 arithmetic.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut s = 0.0;
            for (c, v) in self.row(r) {
                s += v as f64 * x[c];
            }
            y[r] = s;
        }
    }

    /// Triplets of A * diag(d) * A^T, used for the divergence-form operators.
    pub fn scaled_gram(&self, diag: &[f64]) -> Vec<(usize, usize, f64)> {
        assert_eq!(diag.len(), self.ncols);
        let mut trips = Vec::new();
        let t = self.transpose();
        // (A diag A^T)_{rs} = sum_c A_rc d_c A_sc; iterate over columns c.
        for c in 0..self.ncols {
            let d = diag[c];
            if d == 0.0 {
                continue;
            }
            let entries: Vec<(usize, i8)> = t.row(c).collect();
            for &(r, vr) in &entries {
                for &(s, vs) in &entries {
                    trips.push((r, s, vr as f64 * vs as f64 * d));
                }
            }
        }
        trips
    }
}

/// Primal and dual gradient/curl/divergence matrices.
#[derive(Debug, Clone)]
pub struct IncidenceSet {
    pub grad: IntSparse,
    pub curl: IntSparse,
    pub div: IntSparse,
    pub dual_grad: IntSparse,
    pub dual_curl: IntSparse,
    pub dual_div: IntSparse,
}

/// Directional shift-difference block: row p carries -1 at p and +1 at the
/// point one step along `axis`, wherever that stays inside the allocation.
fn shift_block(topo: &GridTopology, axis: Axis) -> Vec<Vec<(usize, i8)>> {
    let (nx, ny, nz) = (topo.spec.nx, topo.spec.ny, topo.spec.nz);
    let mut rows = vec![Vec::new(); topo.np];
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let p = topo.point_index(i, j, k);
                let next = match axis {
                    Axis::X => (i < nx).then(|| topo.point_index(i + 1, j, k)),
                    Axis::Y => (j < ny).then(|| topo.point_index(i, j + 1, k)),
                    Axis::Z => (k < nz).then(|| topo.point_index(i, j, k + 1)),
                };
                if let Some(q) = next {
                    rows[p].push((p, -1));
                    rows[p].push((q, 1));
                }
            }
        }
    }
    rows
}

/// Assemble the primal gradient, curl and divergence matrices from the
/// directional shift blocks, zeroing the rows of phantom entities.
pub fn primal_operators(topo: &GridTopology) -> IncidenceSet {
    let px = shift_block(topo, Axis::X);
    let py = shift_block(topo, Axis::Y);
    let pz = shift_block(topo, Axis::Z);
    let np = topo.np;

    // G: edge rows stacked [Px; Py; Pz] over point columns.
    let mut g_rows: Vec<Vec<(usize, i8)>> = Vec::with_capacity(topo.ne);
    for block in [&px, &py, &pz] {
        for p in 0..np {
            g_rows.push(block[p].clone());
        }
    }
    for (e, row) in g_rows.iter_mut().enumerate() {
        if topo.edge_phantom[e] {
            row.clear();
        }
    }
    let grad = IntSparse::from_rows(topo.ne, np, g_rows);

    // C block pattern:
    //   [ 0   -Pz   Py ]
    //   [ Pz   0   -Px ]
    //   [-Py   Px   0  ]
    // with facet rows over edge columns; column blocks offset per direction.
    let mut c_rows: Vec<Vec<(usize, i8)>> = vec![Vec::new(); topo.nf];
    let put = |rows: &mut Vec<Vec<(usize, i8)>>,
               row_block: usize,
               col_block: usize,
               block: &Vec<Vec<(usize, i8)>>,
               sign: i8| {
        for p in 0..np {
            for &(c, v) in &block[p] {
                rows[row_block * np + p].push((col_block * np + c, sign * v));
            }
        }
    };
    put(&mut c_rows, 0, 1, &pz, -1);
    put(&mut c_rows, 0, 2, &py, 1);
    put(&mut c_rows, 1, 2, &px, -1);
    put(&mut c_rows, 1, 0, &pz, 1);
    put(&mut c_rows, 2, 0, &py, -1);
    put(&mut c_rows, 2, 1, &px, 1);
    for (f, row) in c_rows.iter_mut().enumerate() {
        if topo.facet_phantom[f] {
            row.clear();
        }
    }
    let curl = IntSparse::from_rows(topo.nf, topo.ne, c_rows);

    // S: volume rows [Px Py Pz] over facet columns.
    let mut s_rows: Vec<Vec<(usize, i8)>> = vec![Vec::new(); topo.nv];
    for (bi, block) in [&px, &py, &pz].into_iter().enumerate() {
        for p in 0..np {
            for &(c, v) in &block[p] {
                s_rows[p].push((bi * np + c, v));
            }
        }
    }
    for (v, row) in s_rows.iter_mut().enumerate() {
        if topo.vol_phantom[v] {
            row.clear();
        }
    }
    let div = IntSparse::from_rows(topo.nv, topo.nf, s_rows);

    let dual_curl = curl.transpose();
    let dual_grad = div.transpose().negated();
    let dual_div = grad.transpose().negated();

    IncidenceSet {
        grad,
        curl,
        div,
        dual_grad,
        dual_curl,
        dual_div,
    }
}

/// Dual operators derived from the primal ones by transposition.
pub fn dual_operators(primal: &IncidenceSet) -> IncidenceSet {
    IncidenceSet {
        grad: primal.grad.clone(),
        curl: primal.curl.clone(),
        div: primal.div.clone(),
        dual_curl: primal.curl.transpose(),
        dual_grad: primal.div.transpose().negated(),
        dual_div: primal.grad.transpose().negated(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_topology, EntityKind, GridSpec};

    fn ops(nx: usize, ny: usize, nz: usize) -> (GridTopology, IncidenceSet) {
        let topo = build_topology(GridSpec::uniform(nx, ny, nz, 1.0).unwrap()).unwrap();
        let inc = primal_operators(&topo);
        (topo, inc)
    }

    #[test]
    fn curl_grad_and_div_curl_vanish() {
        for (nx, ny, nz) in [(1, 1, 1), (2, 3, 4), (6, 6, 6)] {
            let (_, inc) = ops(nx, ny, nz);
            assert!(inc.curl.is_matmul_zero(&inc.grad), "C*G != 0 on {nx}x{ny}x{nz}");
            assert!(inc.div.is_matmul_zero(&inc.curl), "S*C != 0 on {nx}x{ny}x{nz}");
        }
    }

    #[test]
    fn transposition_identities() {
        let (_, inc) = ops(2, 3, 2);
        assert_eq!(inc.dual_curl, inc.curl.transpose());
        assert_eq!(inc.grad, inc.dual_div.transpose().negated());
        assert_eq!(inc.dual_grad, inc.div.transpose().negated());
        // and S~*C~ = 0 follows by transposition
        assert!(inc.dual_div.is_matmul_zero(&inc.dual_curl));
        let derived = dual_operators(&inc);
        assert_eq!(derived.dual_curl, inc.dual_curl);
        assert_eq!(derived.dual_div, inc.dual_div);
        assert_eq!(derived.dual_grad, inc.dual_grad);
    }

    #[test]
    fn row_structure() {
        let (topo, inc) = ops(2, 2, 3);
        for e in 0..topo.ne {
            let row: Vec<_> = inc.grad.row(e).collect();
            if topo.edge_phantom[e] {
                assert!(row.is_empty());
            } else {
                assert_eq!(row.len(), 2);
                let sum: i32 = row.iter().map(|&(_, v)| v as i32).sum();
                assert_eq!(sum, 0);
            }
        }
        for f in 0..topo.nf {
            let row: Vec<_> = inc.curl.row(f).collect();
            if topo.facet_phantom[f] {
                assert!(row.is_empty());
            } else {
                assert_eq!(row.len(), 4);
            }
        }
        for v in 0..topo.nv {
            let row: Vec<_> = inc.div.row(v).collect();
            if topo.vol_phantom[v] {
                assert!(row.is_empty());
            } else {
                assert_eq!(row.len(), 6);
                let sum: i32 = row.iter().map(|&(_, s)| s as i32).sum();
                assert_eq!(sum, 0, "closed surface must telescope");
            }
        }
    }

    /// The curl rows must agree with the per-facet boundary enumeration used
    /// by the extractors.
    #[test]
    fn curl_rows_match_facet_edges() {
        let (topo, inc) = ops(3, 2, 2);
        for f in topo.non_phantom_facets() {
            let mut expect: Vec<(usize, i8)> = topo.facet_edges(f).to_vec();
            expect.sort_unstable_by_key(|&(e, _)| e);
            let row: Vec<(usize, i8)> = inc.curl.row(f).collect();
            assert_eq!(row, expect, "facet {f}");
        }
    }

    /// Dual divergence rows: +1 for edges leaving a point, -1 for edges
    /// arriving, from S~ = -G^T.
    #[test]
    fn dual_div_rows_match_edge_points() {
        let (topo, inc) = ops(1, 1, 1);
        for p in 0..topo.np {
            let mut expect: Vec<(usize, i8)> = Vec::new();
            for e in topo.non_phantom_edges() {
                let (a, b) = topo.edge_points(e);
                if a == p {
                    expect.push((e, 1));
                } else if b == p {
                    expect.push((e, -1));
                }
            }
            expect.sort_unstable_by_key(|&(e, _)| e);
            let row: Vec<(usize, i8)> = inc.dual_div.row(p).collect();
            assert_eq!(row, expect, "point {p}");
        }
    }

    /// Dense brute-force oracle on the 2x1x1 grid: facet boundary edges are
    /// derived geometrically by walking the facet corners counterclockwise
    /// around the facet normal.
    #[test]
    fn curl_matches_dense_geometric_oracle_2x1x1() {
        let (topo, inc) = ops(2, 1, 1);
        let mut dense = vec![vec![0i8; topo.ne]; topo.nf];
        for f in topo.non_phantom_facets() {
            let (normal, i, j, k) = topo.entity_coords(f);
            // corner offsets in the two spanned axes, counterclockwise
            // around the +normal direction (right-hand rule)
            let (a1, a2) = match normal {
                Axis::X => (Axis::Y, Axis::Z),
                Axis::Y => (Axis::Z, Axis::X),
                Axis::Z => (Axis::X, Axis::Y),
            };
            let offsets = [(0, 0), (1, 0), (1, 1), (0, 1)];
            let corner = |o1: usize, o2: usize| -> [usize; 3] {
                let mut c = [i, j, k];
                c[a1.index()] += o1;
                c[a2.index()] += o2;
                c
            };
            for w in 0..4 {
                let p0 = corner(offsets[w].0, offsets[w].1);
                let p1 = corner(offsets[(w + 1) % 4].0, offsets[(w + 1) % 4].1);
                // the walk direction determines the traversed edge and sign
                let axis = if p0[0] != p1[0] {
                    Axis::X
                } else if p0[1] != p1[1] {
                    Axis::Y
                } else {
                    Axis::Z
                };
                let forward = p1[axis.index()] > p0[axis.index()];
                let base = if forward { p0 } else { p1 };
                let e = topo
                    .canonical_index(EntityKind::Edge, axis, base[0], base[1], base[2])
                    .unwrap();
                dense[f][e] = if forward { 1 } else { -1 };
            }
        }
        for f in 0..topo.nf {
            for e in 0..topo.ne {
                let got = inc.curl.row(f).find(|&(c, _)| c == e).map_or(0, |(_, v)| v);
                assert_eq!(got, dense[f][e], "facet {f} edge {e}");
            }
        }
    }

    use crate::grid::{Axis, GridTopology};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn topological_identities_random_grids(nx in 1usize..6, ny in 1usize..6, nz in 1usize..6) {
            let (_, inc) = ops(nx, ny, nz);
            prop_assert!(inc.curl.is_matmul_zero(&inc.grad));
            prop_assert!(inc.div.is_matmul_zero(&inc.curl));
            prop_assert!(inc.dual_div.is_matmul_zero(&inc.dual_curl));
        }
    }
}
