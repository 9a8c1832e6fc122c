//! DC operating point: capacitors open, inductors shorted.

use crate::compile::EvalEnv;
use crate::error::SolverError;
use crate::linalg::RealLu;
use crate::mna::MnaSystem;

/// Solve the operating point. Behavioural sources are resolved by Newton
/// iteration with time derivatives at zero.
pub fn dc_operating_point(sys: &MnaSystem) -> Result<Vec<f64>, SolverError> {
    let b = sys.rhs_dc();
    let mut x = vec![0.0; sys.dim];
    let ddt_prev = vec![0.0; sys.ddt_slots];

    for _iter in 0..60 {
        let mut trips = sys.g_static.clone();
        let mut rhs = b.clone();
        let env = EvalEnv {
            x: &x,
            t: 0.0,
            dt: 0.0,
            ddt_prev: &ddt_prev,
        };
        for bh in &sys.behavioural {
            let f = bh.expr.eval(&env);
            // Newton: move f(x_k) - J x_k to the RHS, J into the matrix
            let mut jdotx = 0.0;
            for &col in &bh.columns {
                let d = bh.expr.deriv(&env, col);
                jdotx += d * x[col];
                if bh.is_voltage {
                    trips.push((bh.plus_row.unwrap(), col, -d));
                } else {
                    if let Some(r) = bh.plus_row {
                        trips.push((r, col, d));
                    }
                    if let Some(r) = bh.minus_row {
                        trips.push((r, col, -d));
                    }
                }
            }
            let residual_const = f - jdotx;
            if bh.is_voltage {
                rhs[bh.plus_row.unwrap()] += residual_const;
            } else {
                if let Some(r) = bh.plus_row {
                    rhs[r] -= residual_const;
                }
                if let Some(r) = bh.minus_row {
                    rhs[r] += residual_const;
                }
            }
        }
        let lu = RealLu::factor(sys.dim, &trips).map_err(|e| match e {
            SolverError::Singular(m) => SolverError::RequiresIc(format!(
                "operating point system is singular ({m}); supply initial conditions"
            )),
            other => other,
        })?;
        let x_new = lu.solve(&rhs);
        let scale = x_new
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-12);
        let delta = x_new
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let converged = delta <= 1e-12 * scale;
        x = x_new;
        if sys.behavioural.is_empty() || converged {
            return Ok(x);
        }
    }
    Err(SolverError::TransientFailure {
        t: 0.0,
        reason: "DC Newton iteration did not converge".into(),
    })
}
