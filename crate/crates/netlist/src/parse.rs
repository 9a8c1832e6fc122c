//! Parser for the emitted dialect subset.

use crate::expr::parse_expression;
use crate::netlist::{AcScale, Analysis, Element, ElementKind, Netlist};
use crate::waveform::Waveform;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// The "gnd" alias is accepted on parse and normalised to "0".
fn normalize_node(name: &str) -> String {
    if crate::netlist::is_ground(name) {
        "0".to_string()
    } else {
        name.to_string()
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|e| ParseError {
            line,
            message: format!("bad number '{tok}': {e}"),
        })
}

/// Numbers inside a `NAME(a b c)` tail, tolerating spaces after the name.
fn paren_args(rest: &str, line: usize) -> Result<Vec<f64>, ParseError> {
    let open = match rest.find('(') {
        Some(i) => i,
        None => return err(line, format!("expected '(' in waveform '{rest}'")),
    };
    let close = match rest.rfind(')') {
        Some(i) => i,
        None => return err(line, format!("expected ')' in waveform '{rest}'")),
    };
    rest[open + 1..close]
        .split_whitespace()
        .map(|t| parse_f64(t, line))
        .collect()
}

fn parse_waveform(tokens: &[&str], line: usize) -> Result<Waveform, ParseError> {
    let joined = tokens.join(" ");
    let upper = joined.to_ascii_uppercase();
    if upper.starts_with("DC") {
        let v = tokens
            .get(1)
            .ok_or_else(|| ParseError {
                line,
                message: "DC needs a value".into(),
            })
            .and_then(|t| parse_f64(t, line))?;
        return Ok(Waveform::Dc(v));
    }
    if upper.starts_with("STEPEXP") {
        let a = paren_args(&joined, line)?;
        if a.len() != 2 {
            return err(line, "STEPEXP(amp tau) takes two numbers");
        }
        return Ok(Waveform::StepExp { amp: a[0], tau: a[1] });
    }
    if upper.starts_with("GAUSS") {
        let a = paren_args(&joined, line)?;
        if a.len() != 3 {
            return err(line, "GAUSS(amp t0 sigma) takes three numbers");
        }
        return Ok(Waveform::Gaussian {
            amp: a[0],
            t0: a[1],
            sigma: a[2],
        });
    }
    if upper.starts_with("SIN") {
        let a = paren_args(&joined, line)?;
        if a.len() != 2 {
            return err(line, "SIN(amp freq) takes two numbers");
        }
        return Ok(Waveform::Sine { amp: a[0], freq: a[1] });
    }
    if upper.starts_with("PWL") {
        let a = paren_args(&joined, line)?;
        if a.len() % 2 != 0 {
            return err(line, "PWL takes time/value pairs");
        }
        return Ok(Waveform::Pwl(
            a.chunks(2).map(|c| (c[0], c[1])).collect(),
        ));
    }
    // bare number means DC
    if tokens.len() == 1 {
        return Ok(Waveform::Dc(parse_f64(tokens[0], line)?));
    }
    err(line, format!("unknown waveform '{joined}'"))
}

/// Parse dialect text. The first line is the title; `*` starts a comment.
pub fn parse(text: &str) -> Result<Netlist, ParseError> {
    let mut lines = text.lines().enumerate();
    let title = match lines.next() {
        Some((_, t)) => t.trim_end().to_string(),
        None => String::new(),
    };
    let mut netlist = Netlist::new(&title);
    let mut ended = false;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        if ended {
            return err(line_no, "content after .end");
        }
        if let Some(rest) = line.strip_prefix('.') {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            match tokens.first().map(|t| t.to_ascii_lowercase()).as_deref() {
                Some("end") => ended = true,
                Some("tran") => {
                    if tokens.len() != 3 {
                        return err(line_no, ".tran <tstep> <tstop>");
                    }
                    netlist.analyses.push(Analysis::Tran {
                        tstep: parse_f64(tokens[1], line_no)?,
                        tstop: parse_f64(tokens[2], line_no)?,
                    });
                }
                Some("ac") => {
                    if tokens.len() != 5 {
                        return err(line_no, ".ac lin|dec <N> <f1> <f2>");
                    }
                    let scale = match tokens[1].to_ascii_lowercase().as_str() {
                        "lin" => AcScale::Lin,
                        "dec" => AcScale::Dec,
                        other => return err(line_no, format!("unknown ac scale '{other}'")),
                    };
                    let points = tokens[2].parse::<usize>().map_err(|e| ParseError {
                        line: line_no,
                        message: format!("bad point count: {e}"),
                    })?;
                    netlist.analyses.push(Analysis::Ac {
                        scale,
                        points,
                        f_start: parse_f64(tokens[3], line_no)?,
                        f_stop: parse_f64(tokens[4], line_no)?,
                    });
                }
                Some("ic") => {
                    // .ic V(node)=value
                    let body = rest["ic".len()..].trim();
                    let inner = body
                        .strip_prefix("V(")
                        .or_else(|| body.strip_prefix("v("))
                        .ok_or_else(|| ParseError {
                            line: line_no,
                            message: ".ic V(<node>)=<value>".into(),
                        })?;
                    let close = inner.find(')').ok_or_else(|| ParseError {
                        line: line_no,
                        message: "missing ')' in .ic".into(),
                    })?;
                    let node = inner[..close].to_string();
                    let eq = inner[close + 1..].trim();
                    let value = eq.strip_prefix('=').ok_or_else(|| ParseError {
                        line: line_no,
                        message: "missing '=' in .ic".into(),
                    })?;
                    netlist
                        .node_ics
                        .push((node, parse_f64(value.trim(), line_no)?));
                }
                other => {
                    return err(line_no, format!("unknown directive '.{}'", other.unwrap_or("")))
                }
            }
            continue;
        }

        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return err(line_no, format!("malformed card '{line}'"));
        }
        let name = tokens[0].to_string();
        let pos = normalize_node(tokens[1]);
        let neg = normalize_node(tokens[2]);
        let tail = &tokens[3..];
        let kind = match name.chars().next().map(|c| c.to_ascii_uppercase()) {
            Some('R') => {
                if tail.len() != 1 {
                    return err(line_no, "R card takes one value");
                }
                ElementKind::Resistor(parse_f64(tail[0], line_no)?)
            }
            Some('C') => {
                if tail.is_empty() || tail.len() > 2 {
                    return err(line_no, "C card takes a value and optional ic=");
                }
                let farads = parse_f64(tail[0], line_no)?;
                let ic = match tail.get(1) {
                    Some(t) => {
                        let v = t.strip_prefix("ic=").or_else(|| t.strip_prefix("IC="));
                        match v {
                            Some(v) => Some(parse_f64(v, line_no)?),
                            None => return err(line_no, format!("expected ic=<value>, got '{t}'")),
                        }
                    }
                    None => None,
                };
                ElementKind::Capacitor { farads, ic }
            }
            Some('L') => {
                if tail.len() != 1 {
                    return err(line_no, "L card takes one value");
                }
                ElementKind::Inductor(parse_f64(tail[0], line_no)?)
            }
            Some('V') => ElementKind::VSource(parse_waveform(tail, line_no)?),
            Some('I') => ElementKind::ISource(parse_waveform(tail, line_no)?),
            Some('E') => {
                if tail.len() != 3 {
                    return err(line_no, "E card: E<name> n+ n- nc+ nc- gain");
                }
                ElementKind::Vcvs {
                    ctrl_pos: normalize_node(tail[0]),
                    ctrl_neg: normalize_node(tail[1]),
                    gain: parse_f64(tail[2], line_no)?,
                }
            }
            Some('F') => {
                if tail.len() != 2 {
                    return err(line_no, "F card: F<name> n+ n- <ctrl> gain");
                }
                ElementKind::Cccs {
                    ctrl: tail[0].to_string(),
                    gain: parse_f64(tail[1], line_no)?,
                }
            }
            Some('B') => {
                let body = tail.join("");
                if let Some(e) = body.strip_prefix("I=").or_else(|| body.strip_prefix("i=")) {
                    ElementKind::BehaviouralI(parse_expression(e).map_err(|m| ParseError {
                        line: line_no,
                        message: m,
                    })?)
                } else if let Some(e) = body.strip_prefix("V=").or_else(|| body.strip_prefix("v="))
                {
                    ElementKind::BehaviouralV(parse_expression(e).map_err(|m| ParseError {
                        line: line_no,
                        message: m,
                    })?)
                } else {
                    return err(line_no, "B card needs I= or V= expression");
                }
            }
            other => {
                return err(
                    line_no,
                    format!(
                        "unsupported element letter '{}'",
                        other.map(String::from).unwrap_or_default()
                    ),
                )
            }
        };
        netlist
            .add(Element {
                name,
                pos,
                neg,
                kind,
            })
            .map_err(|e| ParseError {
                line: line_no,
                message: e.to_string(),
            })?;
    }
    Ok(netlist)
}
