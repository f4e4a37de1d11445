//! Plot-ready summaries of graphs, profiles, co-design plans, and address
//! traces, emitted as one JSON bundle and optional per-section CSV files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codesign::WcssPoint;
use crate::error::Result;
use crate::hypergraph::{HyperGraph, IntensityClass};
use crate::locality::{reuse_distance_histogram, AddressTrace};
use crate::profile::ComplexityProfile;

/// One histogram row: a level's total computation and outgoing
/// communication weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: u32,
    pub computation: f64,
    pub comm_out: f64,
}

pub fn complexity_histogram(p: &ComplexityProfile) -> Vec<LevelRow> {
    p.computation_table
        .iter()
        .map(|row| LevelRow {
            level: row.level,
            computation: row.complexity,
            comm_out: p
                .communication_matrix
                .get(row.level as usize - 1)
                .map_or(0.0, |r| r.iter().sum()),
        })
        .collect()
}

/// Edge counts by depth/volume class; the four classes partition the
/// edge set, so the counts sum to the edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntensityCounts {
    pub intense: u64,
    pub medium_deep_small: u64,
    pub medium_shallow_large: u64,
    pub low: u64,
}

impl IntensityCounts {
    pub fn total(&self) -> u64 {
        self.intense + self.medium_deep_small + self.medium_shallow_large + self.low
    }
}

pub fn intensity_counts(
    g: &HyperGraph,
    d_thresh: u32,
    bytes_thresh: u64,
) -> Result<IntensityCounts> {
    let mut counts = IntensityCounts::default();
    for e in g.edges() {
        match g.classify_intensity(e, d_thresh, bytes_thresh)? {
            IntensityClass::Intense => counts.intense += 1,
            IntensityClass::MediumDeepSmall => counts.medium_deep_small += 1,
            IntensityClass::MediumShallowLarge => counts.medium_shallow_large += 1,
            IntensityClass::Low => counts.low += 1,
        }
    }
    Ok(counts)
}

/// Reuse-distance digest of one address trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseSummary {
    pub refs: u64,
    pub cold: u64,
    pub mean_finite: Option<f64>,
    pub max_finite: Option<u64>,
    /// (distance, count) rows in ascending distance order.
    pub histogram: Vec<(u64, u64)>,
}

pub fn reuse_summary(trace: &AddressTrace, block_words: u64) -> Result<ReuseSummary> {
    let h = reuse_distance_histogram(trace, block_words)?;
    Ok(ReuseSummary {
        refs: h.total(),
        cold: h.cold,
        mean_finite: h.mean_finite(),
        max_finite: h.finite.keys().next_back().copied(),
        histogram: h.finite.iter().map(|(&d, &c)| (d, c)).collect(),
    })
}

/// The full report: sections are present when their input was given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportBundle {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<LevelRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity: Option<IntensityCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wcss: Option<Vec<WcssPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reuse: Option<ReuseSummary>,
}

impl ReportBundle {
    pub fn to_json_string(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("report serialization is infallible");
        s.push('\n');
        s
    }
}

fn csv_error(e: csv::Error) -> crate::ForgeError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::ForgeError::Io(io),
        other => crate::ForgeError::SchemaMismatch(format!("csv: {other:?}")),
    }
}

pub(crate) fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one CSV per present section into `dir`; returns the paths
/// written, in a fixed order.
pub fn write_csv_bundle(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if let Some(levels) = &bundle.levels {
        let path = dir.join("levels.csv");
        let rows = levels
            .iter()
            .map(|r| {
                vec![r.level.to_string(), r.computation.to_string(), r.comm_out.to_string()]
            })
            .collect::<Vec<_>>();
        write_csv(&path, &cols(["level", "computation", "comm_out"]), &rows)?;
        written.push(path);
    }
    if let Some(i) = &bundle.intensity {
        let path = dir.join("intensity.csv");
        let rows = vec![
            vec!["intense".into(), i.intense.to_string()],
            vec!["medium_deep_small".into(), i.medium_deep_small.to_string()],
            vec!["medium_shallow_large".into(), i.medium_shallow_large.to_string()],
            vec!["low".into(), i.low.to_string()],
        ];
        write_csv(&path, &cols(["class", "edges"]), &rows)?;
        written.push(path);
    }
    if let Some(curve) = &bundle.wcss {
        let path = dir.join("wcss.csv");
        let rows = curve
            .iter()
            .map(|p| vec![p.k.to_string(), p.wcss.to_string()])
            .collect::<Vec<_>>();
        write_csv(&path, &cols(["k", "wcss"]), &rows)?;
        written.push(path);
    }
    if let Some(r) = &bundle.reuse {
        let path = dir.join("reuse.csv");
        let rows = r
            .histogram
            .iter()
            .map(|(d, c)| vec![d.to_string(), c.to_string()])
            .collect::<Vec<_>>();
        write_csv(&path, &cols(["distance", "count"]), &rows)?;
        written.push(path);
    }
    Ok(written)
}

fn cols<const N: usize>(names: [&str; N]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
