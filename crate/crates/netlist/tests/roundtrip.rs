//! Serialization round-trip and card format tests.

use fieldnet_netlist::expr::parse_expression;
use fieldnet_netlist::serialize::{element_card, serialize};
use fieldnet_netlist::{parse, AcScale, Analysis, Element, ElementKind, Expression, Netlist, Waveform};
use proptest::prelude::*;

fn el(name: &str, pos: &str, neg: &str, kind: ElementKind) -> Element {
    Element {
        name: name.into(),
        pos: pos.into(),
        neg: neg.into(),
        kind,
    }
}

#[test]
fn resistor_card_format() {
    let e = el("Rth4", "n1T", "n2T", ElementKind::Resistor(2.5));
    assert_eq!(element_card(&e), "Rth4 n1T n2T 2.5");
}

#[test]
fn capacitor_card_with_ic() {
    let e = el(
        "Cth7",
        "n7T",
        "0",
        ElementKind::Capacitor {
            farads: 3.1e-12,
            ic: Some(293.0),
        },
    );
    assert_eq!(element_card(&e), "Cth7 n7T 0 3.1e-12 ic=293");
}

#[test]
fn cccs_card_format() {
    let e = el(
        "F12",
        "0",
        "n12",
        ElementKind::Cccs {
            ctrl: "FIc3".into(),
            gain: 0.25,
        },
    );
    assert_eq!(element_card(&e), "F12 0 n12 FIc3 0.25");
}

#[test]
fn behavioural_card_format() {
    let g = Expression::mul(
        Expression::v2("n3", "n7"),
        Expression::div(
            Expression::constant(2.5e-7),
            Expression::add(
                Expression::constant(1.0),
                Expression::mul(
                    Expression::constant(0.0039),
                    Expression::sub(
                        Expression::mul(
                            Expression::constant(0.5),
                            Expression::add(Expression::v("n3T"), Expression::v("n7T")),
                        ),
                        Expression::constant(293.0),
                    ),
                ),
            ),
        ),
    );
    let e = el("BGel3", "n3", "n7", ElementKind::BehaviouralI(g));
    let card = element_card(&e);
    assert_eq!(
        card,
        "BGel3 n3 n7 I=V(n3,n7)*(2.5e-7/(1+0.0039*(0.5*(V(n3T)+V(n7T))-293)))"
    );
    // and it parses back to the identical tree
    let n = parse(&format!("t\n{card}\n.end\n")).unwrap();
    assert_eq!(n.elements[0], e);
}

#[test]
fn empty_netlist_roundtrip() {
    let n = Netlist::new("just a title");
    let text = serialize(&n).unwrap();
    let parsed = parse(&text).unwrap();
    assert_eq!(parsed.title, "just a title");
    assert!(parsed.is_empty());
}

#[test]
fn unknown_element_letter_errors_with_line() {
    let text = "title\nR1 a 0 5\nQx a b c\n.end\n";
    let err = parse(text).unwrap_err();
    assert_eq!(err.line, 3);
    assert!(err.to_string().contains("unsupported element letter"));
}

#[test]
fn duplicate_names_rejected() {
    let mut n = Netlist::new("t");
    n.add(el("R1", "a", "0", ElementKind::Resistor(1.0))).unwrap();
    assert!(n.add(el("R1", "b", "0", ElementKind::Resistor(1.0))).is_err());
}

#[test]
fn gnd_alias_normalised_on_parse() {
    let n = parse("t\nR1 a gnd 5\n.end\n").unwrap();
    assert_eq!(n.elements[0].neg, "0");
}

#[test]
fn directives_roundtrip() {
    let mut n = Netlist::new("directives");
    n.add(el("R1", "a", "0", ElementKind::Resistor(50.0))).unwrap();
    n.add(el(
        "V1",
        "a",
        "0",
        ElementKind::VSource(Waveform::StepExp {
            amp: 1000.0,
            tau: 1.3e-6,
        }),
    ))
    .unwrap();
    n.node_ics.push(("a".into(), 0.5));
    n.analyses.push(Analysis::Tran {
        tstep: 1.3e-7,
        tstop: 1.3e-5,
    });
    n.analyses.push(Analysis::Ac {
        scale: AcScale::Lin,
        points: 2000,
        f_start: 5e8,
        f_stop: 3e9,
    });
    let text = serialize(&n).unwrap();
    let p = parse(&text).unwrap();
    assert_eq!(p, n);
}

#[test]
fn waveform_shapes() {
    let w = Waveform::StepExp { amp: 1000.0, tau: 1.3e-6 };
    assert!((w.eval(1.3e-6) - 1000.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    let g = Waveform::Gaussian { amp: 1.0, t0: 2.0, sigma: 0.5 };
    assert!((g.eval(2.0) - 1.0).abs() < 1e-15);
    assert!(g.eval(0.0) < 1e-3);
    let p = Waveform::Pwl(vec![(0.0, 0.0), (1.0, 2.0)]);
    assert_eq!(p.eval(0.5), 1.0);
    assert_eq!(p.eval(5.0), 2.0);
}

// --- property: parse . serialize is the identity ------------------------

fn arb_node() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("0".to_string()),
        (1usize..200).prop_map(|i| format!("n{i}")),
        (1usize..50).prop_map(|i| format!("n{i}T")),
    ]
}

fn arb_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        (1e-15f64..1e6).prop_map(|v| v),
        Just(1.0),
        Just(2.5e-7),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![
        arb_value().prop_map(Expression::Const),
        arb_node().prop_map(|n| Expression::NodeVoltage(n, None)),
        (arb_node(), arb_node())
            .prop_map(|(a, b)| Expression::NodeVoltage(a, Some(b))),
        (1usize..99).prop_map(|i| Expression::BranchCurrent(format!("L{i}"))),
        Just(Expression::Time),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::div(a, b)),
            inner.clone().prop_map(Expression::ddt),
            inner.prop_map(|e| match e {
                // negation of a literal folds into the literal on parse
                Expression::Const(v) => Expression::Const(-v),
                other => Expression::Neg(Box::new(other)),
            }),
        ]
    })
}

fn arb_unnamed_element() -> impl Strategy<Value = (String, String, ElementKind)> {
    let kind = prop_oneof![
        arb_value().prop_map(ElementKind::Resistor),
        (arb_value(), proptest::option::of(arb_value())).prop_map(|(v, ic)| {
            ElementKind::Capacitor { farads: v, ic }
        }),
        arb_value().prop_map(ElementKind::Inductor),
        arb_value().prop_map(|v| ElementKind::VSource(Waveform::Dc(v))),
        (arb_value(), arb_value())
            .prop_map(|(a, t)| ElementKind::ISource(Waveform::Gaussian { amp: a, t0: t, sigma: t.max(1e-12) })),
        (arb_node(), arb_node(), arb_value())
            .prop_map(|(p, n, g)| ElementKind::Vcvs { ctrl_pos: p, ctrl_neg: n, gain: g }),
        (1usize..500, arb_value())
            .prop_map(|(c, g)| ElementKind::Cccs { ctrl: format!("L{c}"), gain: g }),
        arb_expr().prop_map(ElementKind::BehaviouralI),
        arb_expr().prop_map(ElementKind::BehaviouralV),
    ];
    (arb_node(), arb_node(), kind)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn serialize_parse_roundtrip(parts in proptest::collection::vec(arb_unnamed_element(), 1..6)) {
        let mut n = Netlist::new("prop");
        for (i, (pos, neg, kind)) in parts.into_iter().enumerate() {
            let name = format!("{}{}", kind.letter(), i);
            n.add(Element { name, pos, neg, kind }).unwrap();
        }
        let text = serialize(&n).unwrap();
        let parsed = parse(&text).unwrap();
        prop_assert_eq!(parsed, n);
    }

    #[test]
    fn expression_roundtrip(e in arb_expr()) {
        let text = e.to_string();
        let parsed = parse_expression(&text).unwrap();
        prop_assert_eq!(parsed, e);
    }
}
