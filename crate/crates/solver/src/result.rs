//! Simulation results and their CSV form.

use crate::error::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Time,
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceData {
    Real(Vec<f64>),
    Complex(Vec<(f64, f64)>),
}

impl TraceData {
    pub fn len(&self) -> usize {
        match self {
            TraceData::Real(v) => v.len(),
            TraceData::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn magnitude(&self) -> Vec<f64> {
        match self {
            TraceData::Real(v) => v.iter().map(|x| x.abs()).collect(),
            TraceData::Complex(v) => v.iter().map(|(re, im)| (re * re + im * im).sqrt()).collect(),
        }
    }

    pub fn real(&self) -> Vec<f64> {
        match self {
            TraceData::Real(v) => v.clone(),
            TraceData::Complex(v) => v.iter().map(|(re, _)| *re).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    pub data: TraceData,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub newton_iterations: usize,
    pub failed_samples: usize,
    pub max_kcl_residual: f64,
}

/// Time- or frequency-axis traces of named quantities.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub axis_kind: AxisKind,
    pub axis: Vec<f64>,
    pub traces: Vec<Trace>,
    pub stats: SolveStats,
}

impl SimResult {
    pub fn trace(&self, name: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.name == name)
    }

    /// CSV text: header `axis,<names>`, complex traces split into
    /// `<name>.re` / `<name>.im` columns, full-precision decimals.
    pub fn to_csv(&self) -> String {
        let mut header = vec![match self.axis_kind {
            AxisKind::Time => "time".to_string(),
            AxisKind::Frequency => "frequency".to_string(),
        }];
        for t in &self.traces {
            match &t.data {
                TraceData::Real(_) => header.push(t.name.clone()),
                TraceData::Complex(_) => {
                    header.push(format!("{}.re", t.name));
                    header.push(format!("{}.im", t.name));
                }
            }
        }
        let mut out = header.join(",");
        out.push('\n');
        for (i, &a) in self.axis.iter().enumerate() {
            let mut row = vec![format!("{a:?}")];
            for t in &self.traces {
                match &t.data {
                    TraceData::Real(v) => row.push(format!("{:?}", v[i])),
                    TraceData::Complex(v) => {
                        row.push(format!("{:?}", v[i].0));
                        row.push(format!("{:?}", v[i].1));
                    }
                }
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, axis_kind: AxisKind) -> Result<SimResult, SolverError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SolverError::Other("empty CSV".into()))?;
        let names: Vec<&str> = header.split(',').collect();
        if names.len() < 1 {
            return Err(SolverError::Other("CSV header missing".into()));
        }
        let ncols = names.len();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); ncols];
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != ncols {
                return Err(SolverError::Other(format!(
                    "CSV row {} has {} fields, expected {ncols}",
                    ln + 2,
                    fields.len()
                )));
            }
            for (c, f) in fields.iter().enumerate() {
                columns[c].push(f.parse::<f64>().map_err(|e| {
                    SolverError::Other(format!("CSV row {}: bad number '{f}': {e}", ln + 2))
                })?);
            }
        }
        let axis = columns[0].clone();
        let mut traces = Vec::new();
        let mut c = 1;
        while c < ncols {
            let name = names[c];
            if let Some(base) = name.strip_suffix(".re") {
                if c + 1 < ncols && names[c + 1] == format!("{base}.im") {
                    let data: Vec<(f64, f64)> = columns[c]
                        .iter()
                        .zip(&columns[c + 1])
                        .map(|(&re, &im)| (re, im))
                        .collect();
                    traces.push(Trace {
                        name: base.to_string(),
                        data: TraceData::Complex(data),
                    });
                    c += 2;
                    continue;
                }
            }
            traces.push(Trace {
                name: name.to_string(),
                data: TraceData::Real(columns[c].clone()),
            });
            c += 1;
        }
        Ok(SimResult {
            axis_kind,
            axis,
            traces,
            stats: SolveStats::default(),
        })
    }
}
