//! Node naming conventions shared by the extractors.

/// Electric node of grid point `i`.
pub fn electric_node(i: usize) -> String {
    format!("n{i}")
}

/// Thermal node of grid point `i`.
pub fn thermal_node(i: usize) -> String {
    format!("n{i}T")
}

/// Stamp node of grid edge `m` in the electromagnetic extractions.
pub fn edge_node(m: usize) -> String {
    format!("n{m}")
}

/// Head node of the series source chain of edge `m`.
pub fn chain_head_node(m: usize) -> String {
    format!("ne{m}")
}

/// Intermediate chain node after source `n` of facet slot `k`, with the
/// family prefix of the source that produced it.
pub fn chain_node(prefix: &str, m: usize, k: usize, n: usize) -> String {
    format!("{prefix}{m}k{k}n{n}")
}

/// Ambient-temperature node for convective boundaries.
pub fn ambient_node() -> &'static str {
    "ninf"
}

pub fn ground_node() -> &'static str {
    "0"
}
