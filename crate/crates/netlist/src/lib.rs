//! In-memory netlist representation with a SPICE-dialect serializer and a
//! parser for the emitted subset.
//!
//! The dialect is LTspice-compatible: R/C/L/V/I/E/F/B cards, `.tran`,
//! `.ac lin|dec`, `.ic`, comments starting with `*` and an `.end`
//! terminator. Behavioural sources carry `I=` or `V=` expressions over
//! node voltages, branch currents, time and `DDT(...)`.

pub mod expr;
pub mod names;
pub mod netlist;
pub mod parse;
pub mod serialize;
pub mod waveform;

pub use expr::Expression;
pub use netlist::{AcScale, Analysis, Element, ElementKind, Netlist, NetlistError};
pub use parse::{parse, ParseError};
pub use waveform::Waveform;
