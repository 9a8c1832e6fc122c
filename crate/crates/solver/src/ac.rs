//! AC sweep: complex solve of (G + jw C + affine behavioural) x = b(w).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::SolverError;
use crate::linalg::ComplexLu;
use crate::mna::{MnaSystem, Observable};
use crate::result::{AxisKind, SimResult, SolveStats, Trace, TraceData};
use fieldnet_netlist::Waveform;

#[derive(Debug, Clone, Default)]
pub struct AcOptions {
    /// Verify ||A x - b|| / ||b|| at every sample and mark failures.
    pub residual_check: bool,
}

fn ac_amplitude(w: &Waveform) -> f64 {
    match w {
        Waveform::Dc(v) => *v,
        Waveform::StepExp { amp, .. } => *amp,
        Waveform::Gaussian { amp, .. } => *amp,
        Waveform::Sine { amp, .. } => *amp,
        Waveform::Pwl(points) => points
            .iter()
            .map(|&(_, v)| v.abs())
            .fold(0.0f64, f64::max),
    }
}

/// Solve the system at the given frequencies (Hz). Behavioural sources
/// must be affine in the unknowns; DDT multiplies by jw.
pub fn ac_solve(
    sys: &MnaSystem,
    freqs: &[f64],
    observables: &[Observable],
    opts: &AcOptions,
) -> Result<SimResult, SolverError> {
    // resolve observables up front
    let mut record: Vec<(String, usize)> = Vec::new();
    for o in observables {
        match o {
            Observable::NodeVoltage(n) => match sys.node_col(n) {
                Some(Some(c)) => record.push((n.clone(), c)),
                Some(None) => return Err(SolverError::Other("cannot record ground".into())),
                None => return Err(SolverError::UnknownReference(n.clone())),
            },
            Observable::BranchCurrent(e) => {
                let col = sys
                    .branch_col_of(e)
                    .ok_or_else(|| SolverError::UnsupportedControl(e.clone(), "no branch".into()))?;
                record.push((e.clone(), col));
            }
            Observable::AllNodes => {
                for (i, n) in sys.node_names.iter().enumerate() {
                    record.push((n.clone(), i));
                }
            }
        }
    }

    // reject nonlinear behaviourals once, at a probe frequency
    for bh in &sys.behavioural {
        bh.expr.affine(Complex64::new(0.0, 1.0))?;
    }

    let solve_one = |&f: &f64| -> Result<Vec<Complex64>, SolverError> {
        let w = 2.0 * std::f64::consts::PI * f;
        let jw = Complex64::new(0.0, w);
        let mut trips: Vec<(usize, usize, Complex64)> = Vec::new();
        for &(r, c, v) in &sys.g_static {
            trips.push((r, c, Complex64::new(v, 0.0)));
        }
        for &(r, c, v) in &sys.c_static {
            trips.push((r, c, jw * v));
        }
        let mut rhs = vec![Complex64::new(0.0, 0.0); sys.dim];
        for s in &sys.sources {
            rhs[s.row] += Complex64::new(s.sign * ac_amplitude(&s.waveform), 0.0);
        }
        for bh in &sys.behavioural {
            let affine = bh.expr.affine(jw)?;
            if bh.is_voltage {
                let q = bh.plus_row.unwrap();
                for &(col, coef) in &affine.terms {
                    trips.push((q, col, -coef));
                }
                rhs[q] += affine.constant;
            } else {
                for &(col, coef) in &affine.terms {
                    if let Some(r) = bh.plus_row {
                        trips.push((r, col, coef));
                    }
                    if let Some(r) = bh.minus_row {
                        trips.push((r, col, -coef));
                    }
                }
                if let Some(r) = bh.plus_row {
                    rhs[r] -= affine.constant;
                }
                if let Some(r) = bh.minus_row {
                    rhs[r] += affine.constant;
                }
            }
        }
        let lu = ComplexLu::factor(sys.dim, &trips)?;
        let x = lu.solve(&rhs);
        if opts.residual_check {
            let mut r = rhs.clone();
            for &(i, j, v) in &trips {
                r[i] -= v * x[j];
            }
            let rn = r.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
            let bn = rhs.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
            if rn > 1e-8 * bn.max(1e-30) {
                return Err(SolverError::Singular(format!(
                    "residual {rn:.3e} at {f} Hz"
                )));
            }
        }
        Ok(x)
    };

    let solutions: Vec<Result<Vec<Complex64>, SolverError>> =
        freqs.par_iter().map(solve_one).collect();

    let mut stats = SolveStats::default();
    let mut data: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(freqs.len()); record.len()];
    for sol in &solutions {
        match sol {
            Ok(x) => {
                for (slot, (_, col)) in record.iter().enumerate() {
                    data[slot].push((x[*col].re, x[*col].im));
                }
            }
            Err(_) => {
                stats.failed_samples += 1;
                for d in &mut data {
                    d.push((f64::NAN, f64::NAN));
                }
            }
        }
    }

    let traces = record
        .into_iter()
        .zip(data)
        .map(|((name, _), d)| Trace {
            name,
            data: TraceData::Complex(d),
        })
        .collect();
    Ok(SimResult {
        axis_kind: AxisKind::Frequency,
        axis: freqs.to_vec(),
        traces,
        stats,
    })
}

/// Frequency grids for the `.ac` directives.
pub fn frequency_grid(
    scale: fieldnet_netlist::AcScale,
    points: usize,
    f_start: f64,
    f_stop: f64,
) -> Vec<f64> {
    match scale {
        fieldnet_netlist::AcScale::Lin => {
            if points == 1 {
                return vec![f_start];
            }
            (0..points)
                .map(|i| f_start + (f_stop - f_start) * i as f64 / (points - 1) as f64)
                .collect()
        }
        fieldnet_netlist::AcScale::Dec => {
            let decades = (f_stop / f_start).log10();
            let total = ((points as f64) * decades).ceil() as usize + 1;
            (0..total)
                .map(|i| f_start * 10f64.powf(decades * i as f64 / (total - 1) as f64))
                .collect()
        }
    }
}
