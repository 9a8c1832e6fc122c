//! Assembly of the modified nodal analysis system.
//!
//! Unknown layout: node voltages of every non-ground node first (in
//! first-use order), then one branch current per voltage-defined element
//! (V sources, VCVS, behavioural V) and per inductor.
//!
//! Row conventions: node rows are KCL with element currents counted
//! positive when flowing out of the node through the element (pos -> neg
//! internally). Branch rows are the element voltage equations. The system
//! is G x + C x' + f(x, t) = b(t), with G and C constant, `f` collecting
//! behavioural sources and `b` the independent source terms.

use std::collections::HashMap;

use fieldnet_netlist::netlist::is_ground;
use fieldnet_netlist::{ElementKind, Netlist, Waveform};

use crate::compile::{compile, CExpr, CompileCtx, CurrentForm};
use crate::error::SolverError;

/// Quantity to record during a solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observable {
    /// Voltage of a named node; trace name is the node name.
    NodeVoltage(String),
    /// Branch current of a named element; trace name is the element name.
    BranchCurrent(String),
    /// All non-ground node voltages.
    AllNodes,
}

/// Independent source entry: b[row] += sign * w(t).
#[derive(Debug, Clone)]
pub struct SourceTerm {
    pub row: usize,
    pub sign: f64,
    pub waveform: Waveform,
}

/// A compiled behavioural source.
pub struct BehaviouralStamp {
    pub element: usize,
    /// Rows receiving +f and -f (node rows for I-type, branch row for V-type).
    pub plus_row: Option<usize>,
    pub minus_row: Option<usize>,
    pub expr: CExpr,
    /// Unknowns the expression depends on.
    pub columns: Vec<usize>,
    /// Whether this is a voltage-type source (expression moves to its
    /// branch row with negative sign).
    pub is_voltage: bool,
}

pub struct MnaSystem {
    pub netlist: Netlist,
    pub node_names: Vec<String>,
    pub node_index: HashMap<String, usize>,
    pub n_nodes: usize,
    /// element index -> branch column
    pub branch_col: HashMap<usize, usize>,
    pub dim: usize,
    pub g_static: Vec<(usize, usize, f64)>,
    pub c_static: Vec<(usize, usize, f64)>,
    pub sources: Vec<SourceTerm>,
    pub behavioural: Vec<BehaviouralStamp>,
    pub ddt_slots: usize,
}

impl MnaSystem {
    pub fn node_col(&self, name: &str) -> Option<Option<usize>> {
        if is_ground(name) {
            return Some(None);
        }
        self.node_index.get(name).map(|&i| Some(i))
    }

    pub fn branch_col_of(&self, elem_name: &str) -> Option<usize> {
        let idx = self.netlist.index_of(elem_name)?;
        self.branch_col.get(&idx).copied()
    }

    /// Independent-source vector b(t).
    pub fn rhs_at(&self, t: f64) -> Vec<f64> {
        let mut b = vec![0.0; self.dim];
        for s in &self.sources {
            b[s.row] += s.sign * s.waveform.eval(t);
        }
        b
    }

    /// b with every waveform at its DC value.
    pub fn rhs_dc(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.dim];
        for s in &self.sources {
            b[s.row] += s.sign * s.waveform.dc_value();
        }
        b
    }

    /// The conductance matrix restricted to node rows/columns, densely.
    /// Used by structural-equivalence checks.
    pub fn node_conductance_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n_nodes]; self.n_nodes];
        for &(r, c, v) in &self.g_static {
            if r < self.n_nodes && c < self.n_nodes {
                m[r][c] += v;
            }
        }
        m
    }

    /// The capacitance matrix restricted to node rows/columns, densely.
    pub fn node_capacitance_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n_nodes]; self.n_nodes];
        for &(r, c, v) in &self.c_static {
            if r < self.n_nodes && c < self.n_nodes {
                m[r][c] += v;
            }
        }
        m
    }

    /// Conductance contributions of behavioural current sources linearised
    /// at a given state (zero state linearises conductance cards exactly
    /// when their expression is V*G with G state-independent).
    pub fn behavioural_node_conductance_dense(&self, x: &[f64], t: f64) -> Vec<Vec<f64>> {
        let env = crate::compile::EvalEnv {
            x,
            t,
            dt: 0.0,
            ddt_prev: &[],
        };
        let mut m = vec![vec![0.0; self.n_nodes]; self.n_nodes];
        for b in &self.behavioural {
            if b.is_voltage {
                continue;
            }
            for &col in &b.columns {
                if col >= self.n_nodes {
                    continue;
                }
                let d = b.expr.deriv(&env, col);
                if let Some(r) = b.plus_row {
                    if r < self.n_nodes {
                        m[r][col] += d;
                    }
                }
                if let Some(r) = b.minus_row {
                    if r < self.n_nodes {
                        m[r][col] -= d;
                    }
                }
            }
        }
        m
    }
}

fn has_branch_unknown(kind: &ElementKind) -> bool {
    matches!(
        kind,
        ElementKind::Inductor(_)
            | ElementKind::VSource(_)
            | ElementKind::Vcvs { .. }
            | ElementKind::BehaviouralV(_)
    )
}

/// Resolve the branch current of an element into a linear form.
fn resolve_current(
    netlist: &Netlist,
    node_index: &HashMap<String, usize>,
    branch_col: &HashMap<usize, usize>,
    name: &str,
    visited: &mut Vec<String>,
) -> Result<CurrentForm, SolverError> {
    if visited.iter().any(|v| v == name) {
        return Err(SolverError::UnsupportedControl(
            name.to_string(),
            "cyclic control chain".to_string(),
        ));
    }
    visited.push(name.to_string());
    let idx = netlist
        .index_of(name)
        .ok_or_else(|| SolverError::UnknownReference(name.to_string()))?;
    let e = &netlist.elements[idx];
    let col_of = |n: &str| -> Option<usize> {
        if is_ground(n) {
            None
        } else {
            node_index.get(n).copied()
        }
    };
    let mut form = CurrentForm::default();
    match &e.kind {
        ElementKind::Inductor(_)
        | ElementKind::VSource(_)
        | ElementKind::Vcvs { .. }
        | ElementKind::BehaviouralV(_) => {
            form.cols.push((branch_col[&idx], 1.0));
        }
        ElementKind::Resistor(r) => {
            if let Some(c) = col_of(&e.pos) {
                form.cols.push((c, 1.0 / r));
            }
            if let Some(c) = col_of(&e.neg) {
                form.cols.push((c, -1.0 / r));
            }
        }
        ElementKind::ISource(w) => {
            form.known.push((1.0, w.clone()));
        }
        ElementKind::Cccs { ctrl, gain } => {
            let inner = resolve_current(netlist, node_index, branch_col, ctrl, visited)?;
            for (c, v) in inner.cols {
                form.cols.push((c, gain * v));
            }
            for (s, w) in inner.known {
                form.known.push((gain * s, w));
            }
        }
        ElementKind::Capacitor { .. } | ElementKind::BehaviouralI(_) => {
            return Err(SolverError::UnsupportedControl(
                name.to_string(),
                "capacitor and behavioural-I currents cannot be referenced".to_string(),
            ));
        }
    }
    visited.pop();
    Ok(form)
}

/// Assemble the MNA system from a netlist.
pub fn assemble(netlist: Netlist) -> Result<MnaSystem, SolverError> {
    netlist.validate_controls()?;
    let node_names = netlist.node_names();
    let node_index: HashMap<String, usize> = node_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    let n_nodes = node_names.len();

    let mut branch_col = HashMap::new();
    let mut next = n_nodes;
    for (i, e) in netlist.elements.iter().enumerate() {
        if has_branch_unknown(&e.kind) {
            branch_col.insert(i, next);
            next += 1;
        }
    }
    let dim = next;

    // floating-node diagnosis: every node must touch an element that can
    // determine its voltage (anything but a pure current injection)
    let mut anchored = vec![false; n_nodes];
    for e in &netlist.elements {
        let voltage_defining = !matches!(
            e.kind,
            ElementKind::ISource(_) | ElementKind::BehaviouralI(_) | ElementKind::Cccs { .. }
        );
        if voltage_defining {
            for n in [&e.pos, &e.neg] {
                if let Some(&c) = node_index.get(n.as_str()) {
                    anchored[c] = true;
                }
            }
        }
    }
    if let Some(i) = anchored.iter().position(|a| !a) {
        return Err(SolverError::FloatingNode(node_names[i].clone()));
    }

    let mut g = Vec::new();
    let mut c = Vec::new();
    let mut sources = Vec::new();
    let mut behavioural = Vec::new();
    let mut ddt_slots = 0usize;

    let col_of = |n: &str| -> Option<usize> {
        if is_ground(n) {
            None
        } else {
            node_index.get(n).copied()
        }
    };

    for (i, e) in netlist.elements.iter().enumerate() {
        let a = col_of(&e.pos);
        let bcol = col_of(&e.neg);
        match &e.kind {
            ElementKind::Resistor(r) => {
                stamp_conductance(&mut g, a, bcol, 1.0 / r);
            }
            ElementKind::Capacitor { farads, .. } => {
                stamp_conductance(&mut c, a, bcol, *farads);
            }
            ElementKind::Inductor(l) => {
                let q = branch_col[&i];
                stamp_branch_current(&mut g, a, bcol, q);
                stamp_branch_voltage_row(&mut g, q, a, bcol);
                c.push((q, q, -*l));
            }
            ElementKind::VSource(w) => {
                let q = branch_col[&i];
                stamp_branch_current(&mut g, a, bcol, q);
                stamp_branch_voltage_row(&mut g, q, a, bcol);
                sources.push(SourceTerm {
                    row: q,
                    sign: 1.0,
                    waveform: w.clone(),
                });
            }
            ElementKind::ISource(w) => {
                if let Some(r) = a {
                    sources.push(SourceTerm {
                        row: r,
                        sign: -1.0,
                        waveform: w.clone(),
                    });
                }
                if let Some(r) = bcol {
                    sources.push(SourceTerm {
                        row: r,
                        sign: 1.0,
                        waveform: w.clone(),
                    });
                }
            }
            ElementKind::Vcvs {
                ctrl_pos,
                ctrl_neg,
                gain,
            } => {
                let q = branch_col[&i];
                stamp_branch_current(&mut g, a, bcol, q);
                stamp_branch_voltage_row(&mut g, q, a, bcol);
                if let Some(cp) = col_of(ctrl_pos) {
                    g.push((q, cp, -gain));
                }
                if let Some(cn) = col_of(ctrl_neg) {
                    g.push((q, cn, *gain));
                }
            }
            ElementKind::Cccs { ctrl, gain } => {
                let mut visited = Vec::new();
                let form =
                    resolve_current(&netlist, &node_index, &branch_col, ctrl, &mut visited)?;
                for &(col, coef) in &form.cols {
                    if let Some(r) = a {
                        g.push((r, col, gain * coef));
                    }
                    if let Some(r) = bcol {
                        g.push((r, col, -gain * coef));
                    }
                }
                for (scale, w) in form.known {
                    if let Some(r) = a {
                        sources.push(SourceTerm {
                            row: r,
                            sign: -gain * scale,
                            waveform: w.clone(),
                        });
                    }
                    if let Some(r) = bcol {
                        sources.push(SourceTerm {
                            row: r,
                            sign: gain * scale,
                            waveform: w.clone(),
                        });
                    }
                }
            }
            ElementKind::BehaviouralI(expr) | ElementKind::BehaviouralV(expr) => {
                let is_voltage = matches!(e.kind, ElementKind::BehaviouralV(_));
                let node_col_fn = |n: &str| -> Option<Option<usize>> {
                    if is_ground(n) {
                        Some(None)
                    } else {
                        node_index.get(n).map(|&i| Some(i))
                    }
                };
                let current_form_fn = |name: &str| -> Result<CurrentForm, SolverError> {
                    let mut visited = Vec::new();
                    resolve_current(&netlist, &node_index, &branch_col, name, &mut visited)
                };
                let ctx = CompileCtx {
                    node_col: &node_col_fn,
                    current_form: &current_form_fn,
                };
                let cexpr = compile(expr, &ctx, &mut ddt_slots)?;
                let mut columns = Vec::new();
                cexpr.columns(&mut columns);
                if is_voltage {
                    let q = branch_col[&i];
                    stamp_branch_current(&mut g, a, bcol, q);
                    stamp_branch_voltage_row(&mut g, q, a, bcol);
                    behavioural.push(BehaviouralStamp {
                        element: i,
                        plus_row: Some(q),
                        minus_row: None,
                        expr: cexpr,
                        columns,
                        is_voltage: true,
                    });
                } else {
                    behavioural.push(BehaviouralStamp {
                        element: i,
                        plus_row: a,
                        minus_row: bcol,
                        expr: cexpr,
                        columns,
                        is_voltage: false,
                    });
                }
            }
        }
    }

    Ok(MnaSystem {
        netlist,
        node_names,
        node_index,
        n_nodes,
        branch_col,
        dim,
        g_static: g,
        c_static: c,
        sources,
        behavioural,
        ddt_slots,
    })
}

fn stamp_conductance(
    trips: &mut Vec<(usize, usize, f64)>,
    a: Option<usize>,
    b: Option<usize>,
    value: f64,
) {
    if let Some(a) = a {
        trips.push((a, a, value));
        if let Some(b) = b {
            trips.push((a, b, -value));
            trips.push((b, a, -value));
        }
    }
    if let Some(b) = b {
        trips.push((b, b, value));
    }
}

/// Current unknown q leaves `a` and enters `b`.
fn stamp_branch_current(
    trips: &mut Vec<(usize, usize, f64)>,
    a: Option<usize>,
    b: Option<usize>,
    q: usize,
) {
    if let Some(a) = a {
        trips.push((a, q, 1.0));
    }
    if let Some(b) = b {
        trips.push((b, q, -1.0));
    }
}

/// Branch voltage row: v_a - v_b (sources subtract their value on this row).
fn stamp_branch_voltage_row(
    trips: &mut Vec<(usize, usize, f64)>,
    q: usize,
    a: Option<usize>,
    b: Option<usize>,
) {
    if let Some(a) = a {
        trips.push((q, a, 1.0));
    }
    if let Some(b) = b {
        trips.push((q, b, -1.0));
    }
}

/// Branch current of every element evaluated at a state, for KCL checks
/// and observables. `x_prev`/`dt` supply capacitor backward differences;
/// pass `dt = 0` to treat capacitors as open.
pub fn element_current(
    sys: &MnaSystem,
    idx: usize,
    x: &[f64],
    x_prev: Option<&[f64]>,
    dt: f64,
    t: f64,
    ddt_prev: &[f64],
) -> Result<f64, SolverError> {
    let e = &sys.netlist.elements[idx];
    let vof = |n: &str, xv: &[f64]| -> f64 {
        match sys.node_col(n) {
            Some(Some(c)) => xv[c],
            _ => 0.0,
        }
    };
    let v = vof(&e.pos, x) - vof(&e.neg, x);
    Ok(match &e.kind {
        ElementKind::Resistor(r) => v / r,
        ElementKind::Capacitor { farads, .. } => match (x_prev, dt > 0.0) {
            (Some(xp), true) => {
                let vp = vof(&e.pos, xp) - vof(&e.neg, xp);
                farads * (v - vp) / dt
            }
            _ => 0.0,
        },
        ElementKind::Inductor(_)
        | ElementKind::VSource(_)
        | ElementKind::Vcvs { .. }
        | ElementKind::BehaviouralV(_) => {
            let q = sys.branch_col[&idx];
            x[q]
        }
        ElementKind::ISource(w) => w.eval(t),
        ElementKind::Cccs { ctrl, gain } => {
            let cidx = sys
                .netlist
                .index_of(ctrl)
                .ok_or_else(|| SolverError::UnknownReference(ctrl.clone()))?;
            gain * element_current(sys, cidx, x, x_prev, dt, t, ddt_prev)?
        }
        ElementKind::BehaviouralI(_) => {
            let stamp = sys
                .behavioural
                .iter()
                .find(|b| b.element == idx)
                .expect("behavioural stamp exists");
            let env = crate::compile::EvalEnv {
                x,
                t,
                dt,
                ddt_prev,
            };
            stamp.expr.eval(&env)
        }
    })
}
