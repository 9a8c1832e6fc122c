//! Coupled electrothermal transient on the semi-discrete FIT system, with
//! implicit Euler in time and a per-step fixed-point between the two
//! physics.

use std::collections::HashMap;

use fieldnet_core::{eval_sigma_terms, GridTopology, IncidenceSet};
use fieldnet_extract::et::{EtBoundarySpec, EtInitial, EtMaterials};
use fieldnet_netlist::names::{electric_node, thermal_node};
use fieldnet_solver::linalg::RealLu;
use fieldnet_solver::{AxisKind, SimResult, Trace, TraceData};

use crate::error::FitError;

#[derive(Debug, Clone)]
pub struct EtTransientOptions {
    /// Fixed-point tolerance between the electric and thermal solves.
    pub coupling_tol: f64,
    pub max_coupling_iters: usize,
    /// Solve the thermal subsystem and the Joule coupling.
    pub thermal: bool,
}

impl Default for EtTransientOptions {
    fn default() -> Self {
        EtTransientOptions {
            coupling_tol: 1e-10,
            max_coupling_iters: 60,
            thermal: true,
        }
    }
}

struct Reduced {
    free: Vec<usize>,
    pos_of: Vec<Option<usize>>,
}

impl Reduced {
    fn new(np: usize, dirichlet: &[usize]) -> Reduced {
        let is_dir: Vec<bool> = {
            let mut v = vec![false; np];
            for &d in dirichlet {
                v[d] = true;
            }
            v
        };
        let free: Vec<usize> = (0..np).filter(|&p| !is_dir[p]).collect();
        let mut pos_of = vec![None; np];
        for (i, &p) in free.iter().enumerate() {
            pos_of[p] = Some(i);
        }
        Reduced { free, pos_of }
    }

    fn n(&self) -> usize {
        self.free.len()
    }
}

/// Split full-size triplets into the free block and the free-Dirichlet
/// coupling entries.
fn reduce(
    trips: &[(usize, usize, f64)],
    red: &Reduced,
) -> (Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>) {
    let mut ff = Vec::new();
    let mut fd = Vec::new();
    for &(r, c, v) in trips {
        match (red.pos_of[r], red.pos_of[c]) {
            (Some(rr), Some(cc)) => ff.push((rr, cc, v)),
            (Some(rr), None) => fd.push((rr, c, v)),
            _ => {}
        }
    }
    (ff, fd)
}

fn edge_conductances(
    topo: &GridTopology,
    mats: &EtMaterials,
    temps: Option<&[f64]>,
) -> Result<Vec<f64>, FitError> {
    let mut g = vec![0.0; topo.ne];
    for m in topo.non_phantom_edges() {
        let terms = &mats.sigma_terms[m];
        g[m] = match temps {
            Some(t) => {
                let (a, b) = topo.edge_points(m);
                let t_mean = 0.5 * (t[a] + t[b]);
                eval_sigma_terms(terms, t_mean)
                    .map_err(|e| FitError::Other(e.to_string()))?
            }
            None => terms.iter().map(|q| q.scale * q.sigma0).sum(),
        };
    }
    Ok(g)
}

/// Nodal Joule losses with the half-split rule, matching the circuit side.
fn joule_losses(
    topo: &GridTopology,
    g_edges: &[f64],
    phi: &[f64],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for m in topo.non_phantom_edges() {
        let (a, b) = topo.edge_points(m);
        let dv = phi[a] - phi[b];
        let p = g_edges[m] * dv * dv;
        out[a] += 0.5 * p;
        out[b] += 0.5 * p;
    }
}

/// Run the reference transient on the given time axis (the first entry
/// must be 0). Traces use the circuit node names (`n{i}` and `n{i}T`).
pub fn et_transient(
    topo: &GridTopology,
    inc: &IncidenceSet,
    mats: &EtMaterials,
    bcs: &EtBoundarySpec,
    init: &EtInitial,
    timeaxis: &[f64],
    opts: &EtTransientOptions,
) -> Result<SimResult, FitError> {
    let np = topo.np;
    let sdiv = &inc.dual_div;

    // without an electric Dirichlet value the potential needs a reference;
    // point 0 is pinned to zero, matching the circuit's grounding rule
    let mut electric_dirichlet = bcs.electric_dirichlet.clone();
    if electric_dirichlet.is_empty() {
        electric_dirichlet.push((0, fieldnet_netlist::Waveform::Dc(0.0)));
    }
    let elec_dir: Vec<usize> = electric_dirichlet.iter().map(|&(p, _)| p).collect();
    let therm_dir: Vec<usize> = bcs.thermal_dirichlet.iter().map(|&(p, _)| p).collect();
    let red_e = Reduced::new(np, &elec_dir);
    let red_t = Reduced::new(np, &therm_dir);

    // constant operators
    let eps_trips = sdiv.scaled_gram(&mats.m_eps.values);
    let (eps_ff, eps_fd) = reduce(&eps_trips, &red_e);
    let lam_trips = sdiv.scaled_gram(&mats.m_lambda.values);
    let (lam_ff, lam_fd) = reduce(&lam_trips, &red_t);

    // Robin terms: conductance to ambient on the thermal diagonal
    let mut robin_diag = vec![0.0; np];
    let mut robin_rhs = vec![0.0; np];
    for r in &bcs.robin {
        if r.h_c == 0.0 {
            continue;
        }
        for e in fieldnet_extract::et::stamp_robin(topo, r)? {
            // reuse the circuit stamping to stay entry-identical
            let p: usize = e.pos.trim_start_matches('n').trim_end_matches('T').parse().unwrap();
            if let fieldnet_netlist::ElementKind::Resistor(res) = e.kind {
                robin_diag[p] += 1.0 / res;
                robin_rhs[p] += r.t_inf / res;
            }
        }
    }

    // impressed divergences
    let mut imp_elec: Vec<(usize, f64, fieldnet_netlist::Waveform)> = Vec::new();
    for (edge, w) in &bcs.impressed_current {
        let (a, b) = topo.edge_points(*edge);
        imp_elec.push((a, -1.0, w.clone()));
        imp_elec.push((b, 1.0, w.clone()));
    }
    let mut imp_th: Vec<(usize, f64, fieldnet_netlist::Waveform)> = Vec::new();
    for (edge, w) in &bcs.impressed_heat {
        let (a, b) = topo.edge_points(*edge);
        imp_th.push((a, -1.0, w.clone()));
        imp_th.push((b, 1.0, w.clone()));
    }

    let dir_value = |list: &[(usize, fieldnet_netlist::Waveform)], t: f64, out: &mut [f64]| {
        for (p, w) in list {
            out[*p] = w.eval(t);
        }
    };

    let mut phi = init.phi0.clone();
    let mut temp = init.t0.clone();
    dir_value(&electric_dirichlet, 0.0, &mut phi);
    if opts.thermal {
        dir_value(&bcs.thermal_dirichlet, 0.0, &mut temp);
    }

    let nonlinear = opts.thermal
        && mats
            .sigma_terms
            .iter()
            .flatten()
            .any(|t| t.alpha != 0.0 && t.sigma0 != 0.0);

    let mut phi_traces: Vec<Vec<f64>> = vec![Vec::with_capacity(timeaxis.len()); np];
    let mut temp_traces: Vec<Vec<f64>> = vec![Vec::with_capacity(timeaxis.len()); np];
    let record = |phi: &[f64], temp: &[f64], pt: &mut Vec<Vec<f64>>, tt: &mut Vec<Vec<f64>>| {
        for p in 0..np {
            pt[p].push(phi[p]);
            if opts.thermal {
                tt[p].push(temp[p]);
            }
        }
    };
    record(&phi, &temp, &mut phi_traces, &mut temp_traces);

    let mut q_joule = vec![0.0; np];
    // cache for the linear electric factorisation, keyed by the step size
    let mut lin_cache: HashMap<u64, RealLu> = HashMap::new();
    let mut th_cache: HashMap<u64, RealLu> = HashMap::new();

    for w in timeaxis.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let dt = t1 - t0;
        if dt <= 0.0 {
            return Err(FitError::Other("time axis must be increasing".into()));
        }
        let mut phi_dir = vec![0.0; np];
        dir_value(&electric_dirichlet, t1, &mut phi_dir);
        let mut temp_dir = vec![0.0; np];
        if opts.thermal {
            dir_value(&bcs.thermal_dirichlet, t1, &mut temp_dir);
        }

        let mut temp_new = temp.clone();
        let mut phi_new = phi.clone();
        let iters = if opts.thermal { opts.max_coupling_iters } else { 1 };
        let mut converged = !opts.thermal;
        for _pass in 0..iters {
            // electric solve with conductances at the current temperature
            let g_edges = edge_conductances(
                topo,
                mats,
                if opts.thermal { Some(&temp_new) } else { None },
            )?;
            let sig_trips = sdiv.scaled_gram(&g_edges);
            let (sig_ff, sig_fd) = reduce(&sig_trips, &red_e);
            let mut a_e: Vec<(usize, usize, f64)> =
                eps_ff.iter().map(|&(r, c, v)| (r, c, v / dt)).collect();
            a_e.extend(sig_ff.iter().copied());
            let mut rhs_e = vec![0.0; red_e.n()];
            // (A_eps/dt) phi_old - coupling to Dirichlet columns
            for &(r, c, v) in &eps_ff {
                rhs_e[r] += v / dt * phi[red_e.free[c]];
            }
            for &(r, c, v) in &eps_fd {
                rhs_e[r] += v / dt * phi[c] - v / dt * phi_dir[c];
                // (A_eps/dt)(phi_old_d - phi_new_d) moves to the RHS
            }
            for &(r, c, v) in &sig_fd {
                rhs_e[r] -= v * phi_dir[c];
            }
            for (p, sign, w) in &imp_elec {
                if let Some(rr) = red_e.pos_of[*p] {
                    rhs_e[rr] += sign * w.eval(t1);
                }
            }
            let phi_f = if nonlinear {
                RealLu::factor(red_e.n(), &a_e)?.solve(&rhs_e)
            } else {
                let key = dt.to_bits();
                lin_cache
                    .entry(key)
                    .or_insert_with(|| RealLu::factor(red_e.n(), &a_e).expect("electric factor"))
                    .solve(&rhs_e)
            };
            for (i, &p) in red_e.free.iter().enumerate() {
                phi_new[p] = phi_f[i];
            }
            for &p in &elec_dir {
                phi_new[p] = phi_dir[p];
            }

            if !opts.thermal {
                converged = true;
                break;
            }

            // thermal solve with the fresh potentials
            joule_losses(topo, &g_edges, &phi_new, &mut q_joule);
            let mut a_t: Vec<(usize, usize, f64)> = lam_ff.clone();
            for (i, &p) in red_t.free.iter().enumerate() {
                a_t.push((i, i, mats.m_rhoc.get(p) / dt + robin_diag[p]));
            }
            let mut rhs_t = vec![0.0; red_t.n()];
            for (i, &p) in red_t.free.iter().enumerate() {
                rhs_t[i] +=
                    mats.m_rhoc.get(p) / dt * temp[p] + q_joule[p] + robin_rhs[p];
            }
            for &(r, c, v) in &lam_fd {
                rhs_t[r] -= v * temp_dir[c];
            }
            for (p, sign, w) in &imp_th {
                if let Some(rr) = red_t.pos_of[*p] {
                    rhs_t[rr] += sign * w.eval(t1);
                }
            }
            let temp_f = if nonlinear {
                RealLu::factor(red_t.n(), &a_t)?.solve(&rhs_t)
            } else {
                let key = dt.to_bits();
                th_cache
                    .entry(key)
                    .or_insert_with(|| RealLu::factor(red_t.n(), &a_t).expect("thermal factor"))
                    .solve(&rhs_t)
            };
            let mut delta = 0.0f64;
            let mut scale = 1e-12f64;
            for (i, &p) in red_t.free.iter().enumerate() {
                delta = delta.max((temp_f[i] - temp_new[p]).abs());
                scale = scale.max(temp_f[i].abs());
                temp_new[p] = temp_f[i];
            }
            for &p in &therm_dir {
                temp_new[p] = temp_dir[p];
            }
            if !nonlinear || delta <= opts.coupling_tol * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(FitError::FixedPoint(t1));
        }
        phi = phi_new;
        temp = temp_new;
        record(&phi, &temp, &mut phi_traces, &mut temp_traces);
    }

    let mut traces = Vec::with_capacity(if opts.thermal { 2 * np } else { np });
    for p in 0..np {
        traces.push(Trace {
            name: electric_node(p),
            data: TraceData::Real(std::mem::take(&mut phi_traces[p])),
        });
    }
    if opts.thermal {
        for p in 0..np {
            traces.push(Trace {
                name: thermal_node(p),
                data: TraceData::Real(std::mem::take(&mut temp_traces[p])),
            });
        }
    }
    Ok(SimResult {
        axis_kind: AxisKind::Time,
        axis: timeaxis.to_vec(),
        traces,
        stats: Default::default(),
    })
}
