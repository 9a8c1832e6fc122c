//! Sparse LU wrappers over faer, for real and complex square systems.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use crate::error::SolverError;

pub struct RealLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl RealLu {
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<RealLu, SolverError> {
        let trips: Vec<Triplet<usize, usize, f64>> = triplets
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| SolverError::Singular(format!("matrix assembly failed: {e:?}")))?;
        let lu = a
            .sp_lu()
            .map_err(|e| SolverError::Singular(format!("LU factorisation failed: {e:?}")))?;
        Ok(RealLu { lu, n })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let b = faer::Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

pub struct ComplexLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, c64>,
    n: usize,
}

impl ComplexLu {
    pub fn factor(
        n: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<ComplexLu, SolverError> {
        let trips: Vec<Triplet<usize, usize, c64>> = triplets
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, c64::new(v.re, v.im)))
            .collect();
        let a = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| SolverError::Singular(format!("matrix assembly failed: {e:?}")))?;
        let lu = a
            .sp_lu()
            .map_err(|e| SolverError::Singular(format!("LU factorisation failed: {e:?}")))?;
        Ok(ComplexLu { lu, n })
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(rhs.len(), self.n);
        let b = faer::Mat::<c64>::from_fn(self.n, 1, |i, _| c64::new(rhs[i].re, rhs[i].im));
        let x = self.lu.solve(&b);
        (0..self.n)
            .map(|i| Complex64::new(x[(i, 0)].re, x[(i, 0)].im))
            .collect()
    }
}

/// Dense real residual check helper: max |A x - b| over rows from triplets.
pub fn residual_inf(
    n: usize,
    triplets: &[(usize, usize, f64)],
    x: &[f64],
    b: &[f64],
) -> f64 {
    let mut r = b.to_vec();
    for &(i, j, v) in triplets {
        r[i] -= v * x[j];
    }
    let _ = n;
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
