//! Netlist data model.

use crate::expr::Expression;
use crate::waveform::Waveform;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("duplicate element name '{0}'")]
    DuplicateName(String),
    #[error("element '{0}': {1}")]
    BadElement(String, String),
    #[error("unknown control element '{0}'")]
    UnknownControl(String),
}

/// Two-terminal circuit element. Current flows from `pos` through the
/// element to `neg` when positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub pos: String,
    pub neg: String,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor(f64),
    Capacitor { farads: f64, ic: Option<f64> },
    Inductor(f64),
    VSource(Waveform),
    ISource(Waveform),
    /// V(pos,neg) = gain * V(ctrl_pos, ctrl_neg)
    Vcvs {
        ctrl_pos: String,
        ctrl_neg: String,
        gain: f64,
    },
    /// I = gain * I(ctrl)
    Cccs { ctrl: String, gain: f64 },
    /// I = expression
    BehaviouralI(Expression),
    /// V(pos,neg) = expression
    BehaviouralV(Expression),
}

impl ElementKind {
    pub fn letter(&self) -> char {
        match self {
            ElementKind::Resistor(_) => 'R',
            ElementKind::Capacitor { .. } => 'C',
            ElementKind::Inductor(_) => 'L',
            ElementKind::VSource(_) => 'V',
            ElementKind::ISource(_) => 'I',
            ElementKind::Vcvs { .. } => 'E',
            ElementKind::Cccs { .. } => 'F',
            ElementKind::BehaviouralI(_) | ElementKind::BehaviouralV(_) => 'B',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcScale {
    Lin,
    Dec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Tran {
        tstep: f64,
        tstop: f64,
    },
    Ac {
        scale: AcScale,
        points: usize,
        f_start: f64,
        f_stop: f64,
    },
}

/// Ordered collection of elements plus analysis directives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Netlist {
    pub title: String,
    pub elements: Vec<Element>,
    pub analyses: Vec<Analysis>,
    /// `.ic V(node)=value` records.
    pub node_ics: Vec<(String, f64)>,
    name_index: HashMap<String, usize>,
}

impl Netlist {
    pub fn new(title: &str) -> Netlist {
        Netlist {
            title: title.to_string(),
            ..Default::default()
        }
    }

    pub fn add(&mut self, element: Element) -> Result<(), NetlistError> {
        if self.name_index.contains_key(&element.name) {
            return Err(NetlistError::DuplicateName(element.name));
        }
        match &element.kind {
            ElementKind::Resistor(v) | ElementKind::Inductor(v) => {
                if !(*v > 0.0) {
                    return Err(NetlistError::BadElement(
                        element.name,
                        format!("passive value must be positive, got {v}"),
                    ));
                }
            }
            ElementKind::Capacitor { farads, .. } => {
                if !(*farads > 0.0) {
                    return Err(NetlistError::BadElement(
                        element.name,
                        format!("capacitance must be positive, got {farads}"),
                    ));
                }
            }
            ElementKind::Vcvs { gain, .. } | ElementKind::Cccs { gain, .. } => {
                if !gain.is_finite() {
                    return Err(NetlistError::BadElement(
                        element.name,
                        "gain must be finite".into(),
                    ));
                }
            }
            ElementKind::VSource(w) | ElementKind::ISource(w) => {
                w.validate()
                    .map_err(|e| NetlistError::BadElement(element.name.clone(), e))?;
            }
            _ => {}
        }
        self.name_index
            .insert(element.name.clone(), self.elements.len());
        self.elements.push(element);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Element> {
        self.name_index.get(name).map(|&i| &self.elements[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Every controlled source must reference an existing element.
    pub fn validate_controls(&self) -> Result<(), NetlistError> {
        for e in &self.elements {
            if let ElementKind::Cccs { ctrl, .. } = &e.kind {
                if !self.name_index.contains_key(ctrl) {
                    return Err(NetlistError::UnknownControl(ctrl.clone()));
                }
            }
        }
        Ok(())
    }

    /// Node names in first-use order, ground ("0"/"gnd") excluded.
    pub fn node_names(&self) -> Vec<String> {
        let mut seen = Vec::new();
        let mut push = |n: &String| {
            if !is_ground(n) && !seen.contains(n) {
                seen.push(n.clone());
            }
        };
        for e in &self.elements {
            push(&e.pos);
            push(&e.neg);
            if let ElementKind::Vcvs {
                ctrl_pos, ctrl_neg, ..
            } = &e.kind
            {
                push(ctrl_pos);
                push(ctrl_neg);
            }
        }
        seen
    }
}

pub fn is_ground(name: &str) -> bool {
    name == "0" || name.eq_ignore_ascii_case("gnd")
}
