//! Electromagnetic reference solves: frequency-domain and leapfrog
//! time-domain integration of the Maxwell grid equations.

use num_complex::Complex64;
use rayon::prelude::*;

use fieldnet_core::{CellFields, GridTopology, IncidenceSet};
use fieldnet_extract::abc::AbcSpec;
use fieldnet_extract::problem::{EdgeCurrent, EmMaterials};
use fieldnet_netlist::names::edge_node;
use fieldnet_solver::linalg::ComplexLu;
use fieldnet_solver::{AxisKind, SimResult, Trace, TraceData};

use crate::error::FitError;

fn free_edges(topo: &GridTopology, pec: &[bool]) -> (Vec<usize>, Vec<Option<usize>>) {
    let free: Vec<usize> = topo.non_phantom_edges().filter(|&e| !pec[e]).collect();
    let mut pos = vec![None; topo.ne];
    for (i, &e) in free.iter().enumerate() {
        pos[e] = Some(i);
    }
    (free, pos)
}

/// Solve (C~ Mnu C + jw Msigma - w^2 Meps) e = -jw j_i at one angular
/// frequency; returns the full edge-voltage vector with PEC and phantom
/// entries zero.
pub fn em_frequency_solve(
    topo: &GridTopology,
    inc: &IncidenceSet,
    mats: &EmMaterials,
    currents: &[(usize, f64)],
    pec: &[bool],
    omega: f64,
) -> Result<Vec<Complex64>, FitError> {
    let (free, pos) = free_edges(topo, pec);
    let n = free.len();
    let mut trips: Vec<(usize, usize, Complex64)> = Vec::new();
    for k in topo.non_phantom_facets() {
        let nu = mats.m_nu.get(k);
        let row: Vec<(usize, i8)> = inc.curl.row(k).collect();
        for &(e1, s1) in &row {
            let Some(r) = pos[e1] else { continue };
            for &(e2, s2) in &row {
                let Some(c) = pos[e2] else { continue };
                trips.push((r, c, Complex64::new(s1 as f64 * s2 as f64 * nu, 0.0)));
            }
        }
    }
    for (i, &e) in free.iter().enumerate() {
        trips.push((
            i,
            i,
            Complex64::new(
                -omega * omega * mats.m_eps.get(e),
                omega * mats.m_sigma.get(e),
            ),
        ));
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for &(e, amp) in currents {
        if let Some(i) = pos[e] {
            rhs[i] = Complex64::new(0.0, -omega * amp);
        }
    }
    let lu = ComplexLu::factor(n, &trips)?;
    let x = lu.solve(&rhs);
    // residual check
    let mut r = rhs.clone();
    for &(i, j, v) in &trips {
        r[i] -= v * x[j];
    }
    let rn = r.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let bn = rhs.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if bn > 0.0 && rn > 1e-8 * bn {
        return Err(FitError::Other(format!(
            "near-singular frequency solve, residual {rn:.3e} vs rhs {bn:.3e}"
        )));
    }
    let mut full = vec![Complex64::new(0.0, 0.0); topo.ne];
    for (i, &e) in free.iter().enumerate() {
        full[e] = x[i];
    }
    Ok(full)
}

/// Frequency sweep recording the requested edges; traces carry the stamp
/// node names so they pair with the circuit solution directly.
pub fn em_sweep(
    topo: &GridTopology,
    inc: &IncidenceSet,
    mats: &EmMaterials,
    currents: &[(usize, f64)],
    pec: &[bool],
    freqs: &[f64],
    observe: &[usize],
) -> Result<SimResult, FitError> {
    let sols: Vec<Result<Vec<Complex64>, FitError>> = freqs
        .par_iter()
        .map(|&f| {
            em_frequency_solve(topo, inc, mats, currents, pec, 2.0 * std::f64::consts::PI * f)
        })
        .collect();
    let mut data: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(freqs.len()); observe.len()];
    let mut failed = 0usize;
    for sol in &sols {
        match sol {
            Ok(e) => {
                for (slot, &edge) in observe.iter().enumerate() {
                    data[slot].push((e[edge].re, e[edge].im));
                }
            }
            Err(_) => {
                failed += 1;
                for d in &mut data {
                    d.push((f64::NAN, f64::NAN));
                }
            }
        }
    }
    let traces = observe
        .iter()
        .zip(data)
        .map(|(&edge, d)| Trace {
            name: edge_node(edge),
            data: TraceData::Complex(d),
        })
        .collect();
    let mut stats = fieldnet_solver::result::SolveStats::default();
    stats.failed_samples = failed;
    Ok(SimResult {
        axis_kind: AxisKind::Frequency,
        axis: freqs.to_vec(),
        traces,
        stats,
    })
}

/// Largest stable leapfrog step over the local cell wave speeds, with a
/// 0.99 safety factor.
pub fn cfl_timestep(topo: &GridTopology, fields: &CellFields) -> f64 {
    let mut dt = f64::INFINITY;
    for v in topo.non_phantom_volumes() {
        let (_, i, j, k) = topo.entity_coords(v);
        let p = fields.cells[v].expect("covered cell");
        let c = (p.nu / p.eps).sqrt();
        let inv = 1.0 / topo.spec.dx[i].powi(2)
            + 1.0 / topo.spec.dy[j].powi(2)
            + 1.0 / topo.spec.dz[k].powi(2);
        dt = dt.min(1.0 / (c * inv.sqrt()));
    }
    0.99 * dt
}

#[derive(Debug, Clone)]
pub struct LeapfrogOptions {
    pub dt: f64,
    pub t_stop: f64,
    /// Record the discrete field energy as an extra trace named "energy".
    pub record_energy: bool,
}

/// Leapfrog time integration of the two curl equations. PEC edges stay at
/// zero; ABC edges follow the one-way wave update fed by their inner
/// parallel edge.
pub fn em_leapfrog(
    topo: &GridTopology,
    inc: &IncidenceSet,
    mats: &EmMaterials,
    sources: &[EdgeCurrent],
    pec: &[bool],
    abc: Option<&AbcSpec>,
    opts: &LeapfrogOptions,
    observe: &[usize],
) -> Result<SimResult, FitError> {
    let dt = opts.dt;
    let steps = (opts.t_stop / dt).ceil() as usize;

    // per-edge adjacency: facets containing the edge with curl signs
    let mut edge_facets: Vec<Vec<(usize, f64)>> = vec![Vec::new(); topo.ne];
    for k in topo.non_phantom_facets() {
        for (e, s) in inc.curl.row(k) {
            edge_facets[e].push((k, s as f64));
        }
    }
    let mut is_abc = vec![false; topo.ne];
    if let Some(spec) = abc {
        for t in &spec.edges {
            if pec[t.edge] {
                return Err(FitError::Extract(
                    fieldnet_extract::ExtractError::PecAbcConflict(t.edge),
                ));
            }
            is_abc[t.edge] = true;
        }
    }

    let mut e = vec![0.0f64; topo.ne];
    let mut h = vec![0.0f64; topo.nf];
    let mut source_on_edge: Vec<Option<&EdgeCurrent>> = vec![None; topo.ne];
    for s in sources {
        source_on_edge[s.edge] = Some(s);
    }

    let mut axis = Vec::with_capacity(steps + 1);
    let mut data: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); observe.len()];
    let mut energy = Vec::new();

    let record =
        |e: &[f64], en: Option<f64>, data: &mut Vec<Vec<f64>>, energy: &mut Vec<f64>| {
            for (slot, &edge) in observe.iter().enumerate() {
                data[slot].push(e[edge]);
            }
            if let Some(v) = en {
                energy.push(v);
            }
        };

    axis.push(0.0);
    record(&e, opts.record_energy.then_some(0.0), &mut data, &mut energy);

    let mut h_prev = h.clone();
    for n in 0..steps {
        let t_half = (n as f64 + 0.5) * dt;
        // magnetic update: h += -dt * Mnu * (C e)
        h_prev.copy_from_slice(&h);
        for k in topo.non_phantom_facets() {
            let mut curl_e = 0.0;
            for (edge, s) in inc.curl.row(k) {
                curl_e += s as f64 * e[edge];
            }
            h[k] -= dt * mats.m_nu.get(k) * curl_e;
        }
        // electric update on interior edges
        let e_old = e.clone();
        for m in topo.non_phantom_edges() {
            if pec[m] || is_abc[m] {
                continue;
            }
            let mut curl_h = 0.0;
            for &(k, s) in &edge_facets[m] {
                curl_h += s * h[k];
            }
            let j_i = source_on_edge[m].map_or(0.0, |s| s.waveform.eval(t_half));
            e[m] += dt / mats.m_eps.get(m) * (curl_h - mats.m_sigma.get(m) * e[m] - j_i);
        }
        // one-way wave update on terminated edges
        if let Some(spec) = abc {
            for term in &spec.edges {
                let kappa = (term.speed_cells * dt - 1.0) / (term.speed_cells * dt + 1.0);
                e[term.edge] =
                    e_old[term.inner_edge] + kappa * (e[term.inner_edge] - e_old[term.edge]);
            }
        }
        axis.push((n + 1) as f64 * dt);
        let en = opts.record_energy.then(|| {
            // cross form 1/2 e_n' Meps e_{n+1} + 1/2 h' Mnu^-1 h, which the
            // lossless scheme conserves exactly
            let mut ee = 0.0;
            for m in topo.non_phantom_edges() {
                ee += 0.5 * mats.m_eps.get(m) * e_old[m] * e[m];
            }
            let mut hh = 0.0;
            for k in topo.non_phantom_facets() {
                hh += 0.5 / mats.m_nu.get(k) * h[k] * h[k];
            }
            ee + hh
        });
        record(&e, en, &mut data, &mut energy);
    }

    let mut traces: Vec<Trace> = observe
        .iter()
        .zip(data)
        .map(|(&edge, d)| Trace {
            name: edge_node(edge),
            data: TraceData::Real(d),
        })
        .collect();
    if opts.record_energy {
        traces.push(Trace {
            name: "energy".into(),
            data: TraceData::Real(energy),
        });
    }
    Ok(SimResult {
        axis_kind: AxisKind::Time,
        axis,
        traces,
        stats: Default::default(),
    })
}
