//! File formats. All frequencies are MHz.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use freqalloc_core::{
    Architecture, CollisionReport, ConstraintInstance, ConstraintType, DeviceGraph, FrequencyAssignment,
    GraphError, SolveResult, ThresholdTable, YieldEstimate,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {err}")]
    Io {
        path: PathBuf,
        err: std::io::Error,
    },
    #[error("{path}: {err}")]
    Json {
        path: PathBuf,
        err: serde_json::Error,
    },
    #[error("{path}: {err}")]
    Csv { path: PathBuf, err: csv::Error },
    #[error("{path}: {err}")]
    Graph { path: PathBuf, err: GraphError },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|err| IoError::Io {
        path: path.into(),
        err,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|err| IoError::Json {
        path: path.into(),
        err,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|err| IoError::Io {
        path: path.into(),
        err,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    serde_json::from_str(&read(path)?).map_err(|err| IoError::Json {
        path: path.into(),
        err,
    })
}

/// `{"nodes": N, "edges": [[i, j], ...], "labels": [...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl From<&DeviceGraph> for GraphFile {
    fn from(g: &DeviceGraph) -> Self {
        Self {
            nodes: g.node_count(),
            edges: g.directed_edges().iter().map(|&(i, j)| [i, j]).collect(),
            labels: g.labels().map(<[String]>::to_vec),
        }
    }
}

impl GraphFile {
    pub fn into_graph(self) -> Result<DeviceGraph, GraphError> {
        let edges = self.edges.into_iter().map(|[i, j]| (i, j)).collect();
        DeviceGraph::new(self.nodes, edges, self.labels)
    }
}

pub fn read_graph(path: &Path) -> Result<DeviceGraph, IoError> {
    read_json::<GraphFile>(path)?
        .into_graph()
        .map_err(|err| IoError::Graph {
            path: path.into(),
            err,
        })
}

pub fn write_graph(path: &Path, graph: &DeviceGraph) -> Result<(), IoError> {
    write_json(path, &GraphFile::from(graph))
}

/// Flat threshold object; missing keys keep their defaults.
pub fn read_thresholds(path: &Path) -> Result<ThresholdTable, IoError> {
    let table: ThresholdTable = read_json(path)?;
    table.validate().map_err(|e| IoError::Invalid {
        path: path.into(),
        message: e.to_string(),
    })?;
    Ok(table)
}

pub fn write_thresholds(path: &Path, table: &ThresholdTable) -> Result<(), IoError> {
    write_json(path, table)
}

/// Solver output as written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub architecture: Architecture,
    #[serde(flatten)]
    pub result: SolveResult,
}

pub fn write_layout(path: &Path, layout: &LayoutFile) -> Result<(), IoError> {
    write_json(path, layout)
}

/// Accepts a `solve` output or a bare assignment
/// `{"freqs": [...], "anharms": [...], "drives": [...]}`. The architecture
/// is known only for the former.
pub fn read_layout(path: &Path) -> Result<(FrequencyAssignment, Option<Architecture>), IoError> {
    let value: serde_json::Value = read_json(path)?;
    let invalid = |message: &str| IoError::Invalid {
        path: path.into(),
        message: message.into(),
    };
    let json_err = |err| IoError::Json {
        path: path.into(),
        err,
    };
    if value.get("status").is_some() {
        let layout: LayoutFile = serde_json::from_value(value).map_err(json_err)?;
        let assignment = layout
            .result
            .assignment
            .ok_or_else(|| invalid("layout holds no assignment"))?;
        Ok((assignment, Some(layout.architecture)))
    } else {
        let a: FrequencyAssignment = serde_json::from_value(value).map_err(json_err)?;
        if a.freqs.len() != a.anharms.len() {
            return Err(invalid("freqs and anharms differ in length"));
        }
        Ok((a, None))
    }
}

/// One row per instance: `type,participants,margin_mhz`.
pub fn write_collision_csv<W: Write>(
    out: W,
    instances: &[ConstraintInstance],
    report: &CollisionReport,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["type", "participants", "margin_mhz"])?;
    for (inst, m) in instances.iter().zip(&report.margins) {
        w.write_record([
            inst.ctype.as_str(),
            &inst.participants.to_string(),
            &m.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `sigma_mhz,yield,stderr[,scaled_yield],<type>...` with mean violations
/// per trial in the type columns.
pub fn write_yield_csv<W: Write>(
    out: W,
    types: &[ConstraintType],
    rows: &[(YieldEstimate, Option<f64>)],
) -> Result<(), csv::Error> {
    let scaled = rows.iter().any(|(_, s)| s.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = vec!["sigma_mhz".into(), "yield".into(), "stderr".into()];
    if scaled {
        header.push("scaled_yield".into());
    }
    header.extend(types.iter().map(|t| t.to_string()));
    w.write_record(&header)?;
    for (y, s) in rows {
        let mut rec = vec![y.sigma.to_string(), y.yield_fraction.to_string(), y.stderr.to_string()];
        if scaled {
            rec.push(s.map(|v| v.to_string()).unwrap_or_default());
        }
        for t in types {
            let v = y.per_type_collision_freq.get(t).copied().unwrap_or(0.0);
            rec.push(v.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(
    path: &Path,
    emit: impl FnOnce(fs::File) -> Result<(), csv::Error>,
) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(|err| IoError::Io {
        path: path.into(),
        err,
    })?;
    emit(file).map_err(|err| IoError::Csv {
        path: path.into(),
        err,
    })
}
