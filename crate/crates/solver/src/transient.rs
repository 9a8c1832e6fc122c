//! Implicit-Euler transient analysis with adaptive step control.

use std::collections::HashMap;

use fieldnet_netlist::netlist::is_ground;
use fieldnet_netlist::ElementKind;

use crate::compile::EvalEnv;
use crate::error::SolverError;
use crate::linalg::RealLu;
use crate::mna::{element_current, MnaSystem, Observable};
use crate::result::{AxisKind, SimResult, SolveStats, Trace, TraceData};

#[derive(Debug, Clone)]
pub struct TransientOptions {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Relative local-error tolerance for step control.
    pub tol: f64,
    pub max_newton: usize,
    /// Verify the KCL residual at every accepted step.
    pub check_kcl: bool,
}

impl TransientOptions {
    pub fn new(dt_init: f64) -> TransientOptions {
        TransientOptions {
            dt_init,
            dt_min: dt_init * 1e-9,
            dt_max: f64::INFINITY,
            tol: 1e-3,
            max_newton: 50,
            check_kcl: false,
        }
    }

    /// Fixed-step integration (no adaptivity).
    pub fn fixed(dt: f64) -> TransientOptions {
        TransientOptions {
            dt_init: dt,
            dt_min: dt,
            dt_max: dt,
            tol: f64::INFINITY,
            max_newton: 50,
            check_kcl: false,
        }
    }
}

/// Initial node voltages propagated from ground through voltage sources,
/// VCVS with resolved controls, and capacitor initial conditions; explicit
/// `.ic` entries and unreached nodes default as stated (unreached -> 0).
pub fn initial_state(sys: &MnaSystem) -> Vec<f64> {
    let mut x = vec![0.0; sys.dim];
    let mut known = vec![false; sys.n_nodes];

    for (node, v) in &sys.netlist.node_ics {
        if let Some(Some(c)) = sys.node_col(node) {
            x[c] = *v;
            known[c] = true;
        }
    }

    // constraint edges (a, b, voltage a-b); ground encoded as None
    struct Edge {
        a: Option<usize>,
        b: Option<usize>,
        dv: f64,
    }
    let mut edges = Vec::new();
    for e in &sys.netlist.elements {
        let a = sys.node_col(&e.pos).unwrap_or(None);
        let b = sys.node_col(&e.neg).unwrap_or(None);
        match &e.kind {
            ElementKind::VSource(w) => edges.push(Edge {
                a,
                b,
                dv: w.eval(0.0),
            }),
            ElementKind::Capacitor { ic: Some(v), .. } => edges.push(Edge { a, b, dv: *v }),
            _ => {}
        }
    }

    let value_of = |c: Option<usize>, x: &[f64], known: &[bool]| -> Option<f64> {
        match c {
            None => Some(0.0),
            Some(c) => known[c].then(|| x[c]),
        }
    };
    loop {
        let mut progressed = false;
        for e in &edges {
            let va = value_of(e.a, &x, &known);
            let vb = value_of(e.b, &x, &known);
            match (va, vb, e.a, e.b) {
                (Some(va), None, _, Some(cb)) => {
                    x[cb] = va - e.dv;
                    known[cb] = true;
                    progressed = true;
                }
                (None, Some(vb), Some(ca), _) => {
                    x[ca] = vb + e.dv;
                    known[ca] = true;
                    progressed = true;
                }
                _ => {}
            }
        }
        if !progressed {
            break;
        }
    }
    x
}

struct NewtonWorkspace {
    /// static part of the Jacobian for the current dt
    base: Vec<(usize, usize, f64)>,
    lu_linear: Option<RealLu>,
    dt: f64,
}

fn build_base(sys: &MnaSystem, dt: f64) -> Vec<(usize, usize, f64)> {
    let mut trips = sys.g_static.clone();
    for &(r, c, v) in &sys.c_static {
        trips.push((r, c, v / dt));
    }
    trips
}

/// One implicit-Euler step; returns the new state.
fn be_step(
    sys: &MnaSystem,
    ws: &mut NewtonWorkspace,
    x_old: &[f64],
    ddt_prev: &[f64],
    t_new: f64,
    dt: f64,
    opts: &TransientOptions,
    stats: &mut SolveStats,
) -> Result<Vec<f64>, SolverError> {
    if ws.dt != dt {
        ws.base = build_base(sys, dt);
        ws.lu_linear = None;
        ws.dt = dt;
    }
    // b(t) + C/dt * x_old
    let mut rhs0 = sys.rhs_at(t_new);
    for &(r, c, v) in &sys.c_static {
        rhs0[r] += v / dt * x_old[c];
    }

    if sys.behavioural.is_empty() {
        if ws.lu_linear.is_none() {
            ws.lu_linear = Some(RealLu::factor(sys.dim, &ws.base)?);
        }
        stats.newton_iterations += 1;
        return Ok(ws.lu_linear.as_ref().unwrap().solve(&rhs0));
    }

    let mut x = x_old.to_vec();
    for _iter in 0..opts.max_newton {
        stats.newton_iterations += 1;
        let env = EvalEnv {
            x: &x,
            t: t_new,
            dt,
            ddt_prev,
        };
        let mut trips = ws.base.clone();
        let mut rhs = rhs0.clone();
        for bh in &sys.behavioural {
            let f = bh.expr.eval(&env);
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
        let lu = RealLu::factor(sys.dim, &trips)?;
        let x_new = lu.solve(&rhs);
        let scale = x_new
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-12);
        let delta = x_new
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = x_new;
        if delta <= 1e-10 * scale {
            return Ok(x);
        }
    }
    Err(SolverError::TransientFailure {
        t: t_new,
        reason: format!("Newton did not converge in {} iterations", opts.max_newton),
    })
}

/// Scaled local-error measure against the linear predictor.
fn lte_measure(x_new: &[f64], x_pred: &[f64], n_nodes: usize) -> f64 {
    // per-class scales keep mixed units (volts vs amperes) comparable
    let class_scale = |lo: usize, hi: usize, v: &[f64]| -> f64 {
        v[lo..hi].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    };
    let dim = x_new.len();
    let sn = class_scale(0, n_nodes, x_new).max(1e-12);
    let sb = if dim > n_nodes {
        class_scale(n_nodes, dim, x_new).max(1e-12)
    } else {
        1.0
    };
    let mut worst = 0.0f64;
    for i in 0..dim {
        let s = if i < n_nodes { sn } else { sb };
        worst = worst.max((x_new[i] - x_pred[i]).abs() / s);
    }
    worst
}

fn kcl_residual(
    sys: &MnaSystem,
    x: &[f64],
    x_prev: &[f64],
    dt: f64,
    t: f64,
    ddt_prev: &[f64],
) -> Result<(f64, f64), SolverError> {
    let mut node_sum = vec![0.0; sys.n_nodes];
    let mut max_current = 0.0f64;
    for (i, e) in sys.netlist.elements.iter().enumerate() {
        let cur = element_current(sys, i, x, Some(x_prev), dt, t, ddt_prev)?;
        max_current = max_current.max(cur.abs());
        if let Some(Some(c)) = sys.node_col(&e.pos) {
            node_sum[c] += cur;
        }
        if let Some(Some(c)) = sys.node_col(&e.neg) {
            node_sum[c] -= cur;
        }
    }
    let worst = node_sum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((worst, max_current))
}

/// Run the transient analysis and record the requested observables.
pub fn transient_solve(
    sys: &MnaSystem,
    tstop: f64,
    opts: &TransientOptions,
    observables: &[Observable],
) -> Result<SimResult, SolverError> {
    let mut record: Vec<(String, RecordKind)> = Vec::new();
    for o in observables {
        match o {
            Observable::NodeVoltage(n) => {
                let col = match sys.node_col(n) {
                    Some(Some(c)) => RecordKind::Col(c),
                    Some(None) => RecordKind::Ground,
                    None => return Err(SolverError::UnknownReference(n.clone())),
                };
                record.push((n.clone(), col));
            }
            Observable::BranchCurrent(e) => {
                let idx = sys
                    .netlist
                    .index_of(e)
                    .ok_or_else(|| SolverError::UnknownReference(e.clone()))?;
                record.push((e.clone(), RecordKind::Element(idx)));
            }
            Observable::AllNodes => {
                for (c, name) in sys.node_names.iter().enumerate() {
                    record.push((name.clone(), RecordKind::Col(c)));
                }
            }
        }
    }

    let mut x = initial_state(sys);
    let mut ddt_prev = vec![0.0; sys.ddt_slots];
    {
        // seed DDT memories at the initial state
        let env = EvalEnv {
            x: &x,
            t: 0.0,
            dt: 0.0,
            ddt_prev: &ddt_prev,
        };
        let mut mem = vec![0.0; sys.ddt_slots];
        for bh in &sys.behavioural {
            bh.expr.store_ddt(&env, &mut mem);
        }
        ddt_prev = mem;
    }

    let mut stats = SolveStats::default();
    let mut axis = vec![0.0];
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); record.len()];
    let push_sample =
        |x: &[f64], x_prev: &[f64], dt: f64, t: f64, ddt_prev: &[f64], data: &mut Vec<Vec<f64>>| {
            for (slot, (_, kind)) in record.iter().enumerate() {
                let v = match kind {
                    RecordKind::Ground => 0.0,
                    RecordKind::Col(c) => x[*c],
                    RecordKind::Element(idx) => {
                        element_current(sys, *idx, x, Some(x_prev), dt, t, ddt_prev)
                            .unwrap_or(f64::NAN)
                    }
                };
                data[slot].push(v);
            }
        };
    push_sample(&x, &x, 0.0, 0.0, &ddt_prev, &mut data);

    let mut ws = NewtonWorkspace {
        base: Vec::new(),
        lu_linear: None,
        dt: 0.0,
    };
    let mut t = 0.0;
    let mut dt = opts.dt_init.min(opts.dt_max).min(tstop);
    let mut history: Option<(Vec<f64>, f64)> = None; // (x_prev, dt_prev)

    while t < tstop * (1.0 - 1e-12) {
        let dt_eff = dt.min(tstop - t);
        let t_new = t + dt_eff;
        let x_new = match be_step(sys, &mut ws, &x, &ddt_prev, t_new, dt_eff, opts, &mut stats) {
            Ok(x_new) => x_new,
            Err(SolverError::TransientFailure { .. }) if dt_eff > opts.dt_min => {
                stats.steps_rejected += 1;
                dt = (dt / 2.0).max(opts.dt_min);
                continue;
            }
            Err(e) => return Err(e),
        };

        // local-error estimate from the previous-step linear predictor
        if opts.tol.is_finite() {
            if let Some((ref x_prev, dt_prev)) = history {
                let ratio = dt_eff / dt_prev;
                let x_pred: Vec<f64> = x
                    .iter()
                    .zip(x_prev)
                    .map(|(&a, &b)| a + (a - b) * ratio)
                    .collect();
                let err = lte_measure(&x_new, &x_pred, sys.n_nodes);
                if err > opts.tol && dt_eff > opts.dt_min {
                    stats.steps_rejected += 1;
                    dt = (dt / 2.0).max(opts.dt_min);
                    continue;
                }
                if err < opts.tol / 4.0 {
                    dt = (dt * 2.0).min(opts.dt_max);
                }
            }
        }

        if opts.check_kcl {
            let (worst, max_cur) = kcl_residual(sys, &x_new, &x, dt_eff, t_new, &ddt_prev)?;
            let bound = 1e-9 * max_cur.max(1e-30);
            stats.max_kcl_residual = stats.max_kcl_residual.max(worst / max_cur.max(1e-30));
            if worst > bound.max(1e-16) {
                return Err(SolverError::TransientFailure {
                    t: t_new,
                    reason: format!("KCL residual {worst} exceeds bound {bound}"),
                });
            }
        }

        // accept
        {
            let env = EvalEnv {
                x: &x_new,
                t: t_new,
                dt: dt_eff,
                ddt_prev: &ddt_prev,
            };
            let mut mem = ddt_prev.clone();
            for bh in &sys.behavioural {
                bh.expr.store_ddt(&env, &mut mem);
            }
            push_sample(&x_new, &x, dt_eff, t_new, &ddt_prev, &mut data);
            ddt_prev = mem;
        }
        history = Some((x.clone(), dt_eff));
        x = x_new;
        t = t_new;
        stats.steps_accepted += 1;
        axis.push(t);
    }

    let traces = record
        .into_iter()
        .zip(data)
        .map(|((name, _), d)| Trace {
            name,
            data: TraceData::Real(d),
        })
        .collect();
    Ok(SimResult {
        axis_kind: AxisKind::Time,
        axis,
        traces,
        stats,
    })
}

enum RecordKind {
    Ground,
    Col(usize),
    Element(usize),
}

/// Helper for tests: branch currents of named elements at the end state.
pub fn final_state_map(sys: &MnaSystem, x: &[f64]) -> HashMap<String, f64> {
    let mut m = HashMap::new();
    for (name, &c) in sys.node_index.iter() {
        if !is_ground(name) {
            m.insert(name.clone(), x[c]);
        }
    }
    m
}
