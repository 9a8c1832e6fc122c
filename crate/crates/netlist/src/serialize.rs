//! Netlist card serializer.

use crate::netlist::{AcScale, Analysis, Element, ElementKind, Netlist, NetlistError};
use crate::waveform::Waveform;
use std::collections::HashSet;
use std::fmt::Write;

/// Shortest round-trip decimal: plain or exponent form, whichever is
/// shorter. Both parse back to the identical f64.
pub fn fmt_f64(v: f64) -> String {
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

fn waveform_text(w: &Waveform) -> String {
    match w {
        Waveform::Dc(v) => format!("DC {}", fmt_f64(*v)),
        Waveform::StepExp { amp, tau } => {
            format!("STEPEXP({} {})", fmt_f64(*amp), fmt_f64(*tau))
        }
        Waveform::Gaussian { amp, t0, sigma } => format!(
            "GAUSS({} {} {})",
            fmt_f64(*amp),
            fmt_f64(*t0),
            fmt_f64(*sigma)
        ),
        Waveform::Sine { amp, freq } => format!("SIN({} {})", fmt_f64(*amp), fmt_f64(*freq)),
        Waveform::Pwl(points) => {
            let mut s = String::from("PWL(");
            for (i, (t, v)) in points.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                write!(s, "{} {}", fmt_f64(*t), fmt_f64(*v)).unwrap();
            }
            s.push(')');
            s
        }
    }
}

pub fn element_card(e: &Element) -> String {
    let head = format!("{} {} {}", e.name, e.pos, e.neg);
    match &e.kind {
        ElementKind::Resistor(v) => format!("{head} {}", fmt_f64(*v)),
        ElementKind::Capacitor { farads, ic } => match ic {
            Some(ic) => format!("{head} {} ic={}", fmt_f64(*farads), fmt_f64(*ic)),
            None => format!("{head} {}", fmt_f64(*farads)),
        },
        ElementKind::Inductor(v) => format!("{head} {}", fmt_f64(*v)),
        ElementKind::VSource(w) => format!("{head} {}", waveform_text(w)),
        ElementKind::ISource(w) => format!("{head} {}", waveform_text(w)),
        ElementKind::Vcvs {
            ctrl_pos,
            ctrl_neg,
            gain,
        } => format!("{head} {ctrl_pos} {ctrl_neg} {}", fmt_f64(*gain)),
        ElementKind::Cccs { ctrl, gain } => format!("{head} {ctrl} {}", fmt_f64(*gain)),
        ElementKind::BehaviouralI(expr) => format!("{head} I={expr}"),
        ElementKind::BehaviouralV(expr) => format!("{head} V={expr}"),
    }
}

/// Serialize to the dialect text, one card per element in insertion order.
pub fn serialize(netlist: &Netlist) -> Result<String, NetlistError> {
    let mut seen = HashSet::new();
    for e in &netlist.elements {
        if !seen.insert(&e.name) {
            return Err(NetlistError::DuplicateName(e.name.clone()));
        }
        let expected = e.kind.letter().to_ascii_lowercase();
        let got = e
            .name
            .chars()
            .next()
            .map(|c| c.to_ascii_lowercase())
            .unwrap_or(' ');
        if got != expected {
            return Err(NetlistError::BadElement(
                e.name.clone(),
                format!("name must start with '{}'", e.kind.letter()),
            ));
        }
    }
    let mut out = String::new();
    writeln!(out, "{}", netlist.title).unwrap();
    for e in &netlist.elements {
        writeln!(out, "{}", element_card(e)).unwrap();
    }
    for (node, v) in &netlist.node_ics {
        writeln!(out, ".ic V({node})={}", fmt_f64(*v)).unwrap();
    }
    for a in &netlist.analyses {
        match a {
            Analysis::Tran { tstep, tstop } => {
                writeln!(out, ".tran {} {}", fmt_f64(*tstep), fmt_f64(*tstop)).unwrap()
            }
            Analysis::Ac {
                scale,
                points,
                f_start,
                f_stop,
            } => {
                let s = match scale {
                    AcScale::Lin => "lin",
                    AcScale::Dec => "dec",
                };
                writeln!(
                    out,
                    ".ac {s} {points} {} {}",
                    fmt_f64(*f_start),
                    fmt_f64(*f_stop)
                )
                .unwrap()
            }
        }
    }
    writeln!(out, ".end").unwrap();
    Ok(out)
}
