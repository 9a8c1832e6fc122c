//! Engine validation against analytic circuits.

use fieldnet_netlist::{parse, AcScale, Element, ElementKind, Expression, Netlist, Waveform};
use fieldnet_solver::ac::frequency_grid;
use fieldnet_solver::transient::initial_state;
use fieldnet_solver::{
    ac_solve, assemble, dc_operating_point, transient_solve, AcOptions, Observable, SolverError,
    TransientOptions,
};

fn el(name: &str, pos: &str, neg: &str, kind: ElementKind) -> Element {
    Element {
        name: name.into(),
        pos: pos.into(),
        neg: neg.into(),
        kind,
    }
}

#[test]
fn single_resistor_gives_one_by_one_system() {
    let mut n = Netlist::new("r");
    n.add(el("R1", "n1", "0", ElementKind::Resistor(2.0))).unwrap();
    let sys = assemble(n).unwrap();
    assert_eq!(sys.dim, 1);
    let g = sys.node_conductance_dense();
    assert!((g[0][0] - 0.5).abs() < 1e-15);
}

#[test]
fn incidence_block_structure() {
    // I source, two resistors, two capacitors: every element column in the
    // incidence pattern carries at most two entries of +-1
    let text = "example\nI1 0 n1 DC 1\nR1 n1 n2 2\nR2 n2 0 2\nC1 n1 0 1e-6\nC2 n2 0 2e-6\n.end\n";
    let n = parse(text).unwrap();
    let sys = assemble(n).unwrap();
    assert_eq!(sys.dim, 2);
    let g = sys.node_conductance_dense();
    // A_G G A_G^T for the two-resistor chain
    assert!((g[0][0] - 0.5).abs() < 1e-12);
    assert!((g[0][1] + 0.5).abs() < 1e-12);
    assert!((g[1][1] - 1.0).abs() < 1e-12);
    let c = sys.node_capacitance_dense();
    assert!((c[0][0] - 1e-6).abs() < 1e-18);
    assert!((c[1][1] - 2e-6).abs() < 1e-18);
    assert!(c[0][1].abs() < 1e-18);
}

#[test]
fn dc_voltage_divider() {
    let text = "divider\nV1 n1 0 DC 1\nR1 n1 n2 1\nR2 n2 0 1\n.end\n";
    let sys = assemble(parse(text).unwrap()).unwrap();
    let x = dc_operating_point(&sys).unwrap();
    let mid = sys.node_col("n2").unwrap().unwrap();
    assert!((x[mid] - 0.5).abs() < 1e-12);
}

#[test]
fn dc_pure_capacitive_requires_ic() {
    let text = "caps\nC1 n1 0 1e-6\nC2 n1 n2 1e-6\nI1 0 n1 DC 0\n.end\n";
    let sys = assemble(parse(text).unwrap()).unwrap();
    match dc_operating_point(&sys) {
        Err(SolverError::RequiresIc(_)) => {}
        other => panic!("expected RequiresIc, got {other:?}"),
    }
}

#[test]
fn floating_node_named() {
    let text = "float\nR1 n1 0 1\nI2 0 n9 DC 1\n.end\n";
    match assemble(parse(text).unwrap()) {
        Err(SolverError::FloatingNode(n)) => assert_eq!(n, "n9"),
        Ok(_) => panic!("expected FloatingNode, assembly succeeded"),
        other => panic!("expected FloatingNode, got {:?}", other.err()),
    }
}

#[test]
fn rc_discharge_matches_exponential() {
    let mut n = Netlist::new("rc");
    n.add(el("R1", "n1", "0", ElementKind::Resistor(1.0))).unwrap();
    n.add(el(
        "C1",
        "n1",
        "0",
        ElementKind::Capacitor {
            farads: 1.0,
            ic: Some(1.0),
        },
    ))
    .unwrap();
    let sys = assemble(n).unwrap();
    let mut opts = TransientOptions::fixed(1e-4);
    opts.check_kcl = true;
    let res = transient_solve(&sys, 1.0, &opts, &[Observable::NodeVoltage("n1".into())]).unwrap();
    let v = res.trace("n1").unwrap().data.real();
    let v_end = *v.last().unwrap();
    assert!(
        (v_end - (-1.0f64).exp()).abs() < 1e-3,
        "v(1s) = {v_end}, expected about {}",
        (-1.0f64).exp()
    );
}

#[test]
fn implicit_euler_first_order_convergence() {
    let run = |dt: f64| -> f64 {
        let mut n = Netlist::new("rc");
        n.add(el("R1", "n1", "0", ElementKind::Resistor(1.0))).unwrap();
        n.add(el(
            "C1",
            "n1",
            "0",
            ElementKind::Capacitor {
                farads: 1.0,
                ic: Some(1.0),
            },
        ))
        .unwrap();
        let sys = assemble(n).unwrap();
        let res = transient_solve(
            &sys,
            1.0,
            &TransientOptions::fixed(dt),
            &[Observable::NodeVoltage("n1".into())],
        )
        .unwrap();
        let v = res.trace("n1").unwrap().data.real();
        (v.last().unwrap() - (-1.0f64).exp()).abs()
    };
    let e1 = run(1e-2);
    let e2 = run(5e-3);
    let ratio = e1 / e2;
    assert!(
        (1.8..2.2).contains(&ratio),
        "halving the step should halve the error, ratio = {ratio}"
    );
}

#[test]
fn lc_oscillation_frequency() {
    // parallel LC excited by initial capacitor voltage
    let l: f64 = 2.5e-3;
    let c = 1.6e-9;
    let f0 = 1.0 / (2.0 * std::f64::consts::PI * (l * c).sqrt());
    let mut n = Netlist::new("lc");
    n.add(el("L1", "n1", "0", ElementKind::Inductor(l))).unwrap();
    n.add(el(
        "C1",
        "n1",
        "0",
        ElementKind::Capacitor {
            farads: c,
            ic: Some(1.0),
        },
    ))
    .unwrap();
    let sys = assemble(n).unwrap();
    let period = 1.0 / f0;
    let res = transient_solve(
        &sys,
        6.0 * period,
        &TransientOptions::fixed(period / 2000.0),
        &[Observable::NodeVoltage("n1".into())],
    )
    .unwrap();
    let v = res.trace("n1").unwrap().data.real();
    // measure the oscillation period from zero crossings
    let mut crossings = Vec::new();
    for i in 1..v.len() {
        if v[i - 1] > 0.0 && v[i] <= 0.0 {
            let t0 = res.axis[i - 1];
            let t1 = res.axis[i];
            let frac = v[i - 1] / (v[i - 1] - v[i]);
            crossings.push(t0 + frac * (t1 - t0));
        }
    }
    assert!(crossings.len() >= 4);
    let measured_period = (crossings[crossings.len() - 1] - crossings[0])
        / (crossings.len() - 1) as f64;
    let f_measured = 1.0 / measured_period;
    assert!(
        ((f_measured - f0) / f0).abs() < 1e-3,
        "f = {f_measured}, expected {f0}"
    );
}

#[test]
fn ac_series_rlc_peak_at_resonance() {
    // V source -> R -> L -> C -> ground; |V_C| peaks at f0
    let l: f64 = 1e-3;
    let c = 1e-9;
    let f0 = 1.0 / (2.0 * std::f64::consts::PI * (l * c).sqrt());
    let mut n = Netlist::new("rlc");
    n.add(el("V1", "n1", "0", ElementKind::VSource(Waveform::Dc(1.0)))).unwrap();
    n.add(el("R1", "n1", "n2", ElementKind::Resistor(10.0))).unwrap();
    n.add(el("L1", "n2", "n3", ElementKind::Inductor(l))).unwrap();
    n.add(el("C1", "n3", "0", ElementKind::Capacitor { farads: c, ic: None })).unwrap();
    let sys = assemble(n).unwrap();
    let freqs = frequency_grid(AcScale::Lin, 400, 0.2 * f0, 3.0 * f0);
    let res = ac_solve(
        &sys,
        &freqs,
        &[Observable::NodeVoltage("n3".into())],
        &AcOptions { residual_check: true },
    )
    .unwrap();
    let mag = res.trace("n3").unwrap().data.magnitude();
    let peak_idx = mag
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    let f_peak = freqs[peak_idx];
    assert!(
        ((f_peak - f0) / f0).abs() < 0.02,
        "peak at {f_peak}, resonance {f0}"
    );
}

#[test]
fn stamp_order_independence() {
    let a = "o1\nV1 n1 0 DC 1\nR1 n1 n2 1\nR2 n2 0 1\nC1 n2 0 1e-6\n.end\n";
    let b = "o2\nC1 n2 0 1e-6\nR2 n2 0 1\nR1 n1 n2 1\nV1 n1 0 DC 1\n.end\n";
    let sa = assemble(parse(a).unwrap()).unwrap();
    let sb = assemble(parse(b).unwrap()).unwrap();
    // same node set, so compare matrices under the name mapping
    let map: Vec<usize> = sa
        .node_names
        .iter()
        .map(|n| sb.node_col(n).unwrap().unwrap())
        .collect();
    let ga = sa.node_conductance_dense();
    let gb = sb.node_conductance_dense();
    let ca = sa.node_capacitance_dense();
    let cb = sb.node_capacitance_dense();
    for i in 0..sa.n_nodes {
        for j in 0..sa.n_nodes {
            assert_eq!(ga[i][j], gb[map[i]][map[j]]);
            assert_eq!(ca[i][j], cb[map[i]][map[j]]);
        }
    }
}

#[test]
fn behavioural_conductance_matches_resistor() {
    // B source I = V(n1,0) * 0.5 behaves as a 2 ohm resistor
    let mut n = Netlist::new("b");
    n.add(el("V1", "n1", "0", ElementKind::VSource(Waveform::Dc(1.0)))).unwrap();
    n.add(el(
        "BG1",
        "n1",
        "0",
        ElementKind::BehaviouralI(Expression::mul(
            Expression::v("n1"),
            Expression::constant(0.5),
        )),
    ))
    .unwrap();
    let sys = assemble(n).unwrap();
    let x = dc_operating_point(&sys).unwrap();
    // source current = conductance current
    let q = sys.branch_col_of("V1").unwrap();
    assert!((x[q] + 0.5).abs() < 1e-12, "source supplies 0.5 A, got {}", x[q]);
}

#[test]
fn behavioural_ddt_acts_as_capacitor() {
    // B source I = DDT(V(n1)) * C parallels an RC discharge
    let mut n = Netlist::new("bddt");
    n.add(el("R1", "n1", "0", ElementKind::Resistor(1.0))).unwrap();
    n.add(el(
        "BC1",
        "n1",
        "0",
        ElementKind::BehaviouralI(Expression::mul(
            Expression::ddt(Expression::v("n1")),
            Expression::constant(1.0),
        )),
    ))
    .unwrap();
    let mut nl = n;
    nl.node_ics.push(("n1".into(), 1.0));
    let sys = assemble(nl).unwrap();
    let x0 = initial_state(&sys);
    assert!((x0[sys.node_col("n1").unwrap().unwrap()] - 1.0).abs() < 1e-15);
    let res = transient_solve(
        &sys,
        1.0,
        &TransientOptions::fixed(1e-4),
        &[Observable::NodeVoltage("n1".into())],
    )
    .unwrap();
    let v_end = *res.trace("n1").unwrap().data.real().last().unwrap();
    assert!(
        (v_end - (-1.0f64).exp()).abs() < 1e-3,
        "behavioural capacitor discharge got {v_end}"
    );
}

#[test]
fn cccs_chain_resolution() {
    // F2 controlled by F1 controlled by V1: gains multiply
    let text = "chain\nV1 n1 0 DC 1\nR1 n1 0 1\nF1 0 n2 V1 2\nR2 n2 0 1\nF2 0 n3 F1 3\nR3 n3 0 1\n.end\n";
    let sys = assemble(parse(text).unwrap()).unwrap();
    let x = dc_operating_point(&sys).unwrap();
    // I(V1) = -1 A (source supplies R1); F1 injects 2*I into n2 -> v = -2
    let v2 = x[sys.node_col("n2").unwrap().unwrap()];
    let v3 = x[sys.node_col("n3").unwrap().unwrap()];
    assert!((v2 + 2.0).abs() < 1e-12);
    assert!((v3 + 6.0).abs() < 1e-12);
}

#[test]
fn ac_rejects_nonlinear_behavioural() {
    let mut n = Netlist::new("nl");
    n.add(el("V1", "n1", "0", ElementKind::VSource(Waveform::Dc(1.0)))).unwrap();
    n.add(el(
        "B1",
        "n1",
        "0",
        ElementKind::BehaviouralI(Expression::mul(Expression::v("n1"), Expression::v("n1"))),
    ))
    .unwrap();
    let sys = assemble(n).unwrap();
    match ac_solve(&sys, &[1.0], &[], &AcOptions::default()) {
        Err(SolverError::NonlinearAc(_)) => {}
        other => panic!("expected NonlinearAc, got {other:?}"),
    }
}

#[test]
fn csv_roundtrip() {
    let mut n = Netlist::new("rc");
    n.add(el("R1", "n1", "0", ElementKind::Resistor(1.0))).unwrap();
    n.add(el(
        "C1",
        "n1",
        "0",
        ElementKind::Capacitor {
            farads: 1.0,
            ic: Some(1.0),
        },
    ))
    .unwrap();
    let sys = assemble(n).unwrap();
    let res = transient_solve(
        &sys,
        0.01,
        &TransientOptions::fixed(1e-3),
        &[Observable::NodeVoltage("n1".into())],
    )
    .unwrap();
    let csv = res.to_csv();
    let back =
        fieldnet_solver::SimResult::from_csv(&csv, fieldnet_solver::AxisKind::Time).unwrap();
    assert_eq!(back.axis, res.axis);
    assert_eq!(back.trace("n1").unwrap().data, res.trace("n1").unwrap().data);
}
