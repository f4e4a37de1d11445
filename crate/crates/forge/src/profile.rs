//! Complexity profiles: the per-level computation table and the
//! level-by-level communication matrix extracted from a graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::algobank::AlgoBank;
use crate::error::{ForgeError, Result};
use crate::hypergraph::HyperGraph;

/// One computation-table row: total compute complexity of a level and the
/// distinct algorithms residing there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputationRow {
    pub level: u32,
    pub complexity: f64,
    pub alfus: Vec<String>,
}

/// Per-algorithm mean and population variance of per-level instance counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitStat {
    pub mean: f64,
    pub variance: f64,
}

/// The topology-free summary of a workload: what each level computes and
/// how many depth-weighted bytes flow between levels. `unit_stats` is
/// filled by profile extraction and absent on plain profiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub computation_table: Vec<ComputationRow>,
    /// `communication_matrix[i][j]` is the summed edge weight from level
    /// `i+1` to level `j+1`.
    pub communication_matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_stats: Option<BTreeMap<String, UnitStat>>,
}

impl ComplexityProfile {
    pub fn num_levels(&self) -> u32 {
        self.computation_table.len() as u32
    }

    /// Communication cell for 1-based levels.
    pub fn cell(&self, from_level: u32, to_level: u32) -> f64 {
        self.communication_matrix[(from_level - 1) as usize][(to_level - 1) as usize]
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.computation_table.len();
        if l == 0 {
            return Err(ForgeError::SchemaMismatch(
                "profile has an empty computation table".into(),
            ));
        }
        for (i, row) in self.computation_table.iter().enumerate() {
            if row.level as usize != i + 1 {
                return Err(ForgeError::SchemaMismatch(format!(
                    "computation table levels not contiguous: row {i} has level {}",
                    row.level
                )));
            }
            if !(row.complexity >= 0.0) {
                return Err(ForgeError::SchemaMismatch(format!(
                    "computation complexity at level {} is negative or NaN",
                    row.level
                )));
            }
        }
        if self.communication_matrix.len() != l
            || self.communication_matrix.iter().any(|r| r.len() != l)
        {
            return Err(ForgeError::SchemaMismatch(format!(
                "communication matrix is not {l}x{l}"
            )));
        }
        for (i, row) in self.communication_matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(ForgeError::SchemaMismatch(format!(
                        "communication cell ({}, {}) is negative or NaN",
                        i + 1,
                        j + 1
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(ForgeError::SchemaMismatch(format!(
                        "communication matrix has nonzero diagonal at level {}",
                        i + 1
                    )));
                }
            }
        }
        if let Some(stats) = &self.unit_stats {
            for (id, s) in stats {
                if !(s.mean >= 0.0) || !(s.variance >= 0.0) {
                    return Err(ForgeError::SchemaMismatch(format!(
                        "unit statistics for `{id}` are negative or NaN"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("profile serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let p: ComplexityProfile = serde_json::from_str(json)
            .map_err(|e| ForgeError::SchemaMismatch(format!("profile file: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn write_path(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Profiles a graph: per-level compute totals with resident algorithm
/// sets, and the level-to-level matrix of summed edge weights.
pub fn profile(g: &HyperGraph, bank: &AlgoBank) -> Result<ComplexityProfile> {
    let l = g.num_levels() as usize;
    let mut totals = vec![0.0f64; l];
    let mut alfus: Vec<BTreeSet<String>> = vec![BTreeSet::new(); l];
    for v in g.vertices() {
        let cost = bank.lookup(&v.algo)?.eval_cost(v.size)?;
        totals[(v.level - 1) as usize] += cost;
        alfus[(v.level - 1) as usize].insert(v.algo.clone());
    }
    let mut matrix = vec![vec![0.0f64; l]; l];
    for e in g.edges() {
        let i = (g.vertex(&e.src)?.level - 1) as usize;
        let j = (g.vertex(&e.dst)?.level - 1) as usize;
        matrix[i][j] += g.edge_weight(e)?;
    }
    Ok(ComplexityProfile {
        computation_table: totals
            .into_iter()
            .zip(alfus)
            .enumerate()
            .map(|(i, (complexity, ids))| ComputationRow {
                level: (i + 1) as u32,
                complexity,
                alfus: ids.into_iter().collect(),
            })
            .collect(),
        communication_matrix: matrix,
        unit_stats: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{HyperEdge, HyperVertex};

    fn vx(id: &str, level: u32, algo: &str, size: u64) -> HyperVertex {
        HyperVertex { id: id.into(), level, algo: algo.into(), size }
    }

    fn ed(src: &str, dst: &str, bytes: u64) -> HyperEdge {
        HyperEdge { src: src.into(), dst: dst.into(), bytes }
    }

    #[test]
    fn chain_profile_has_superdiagonal_matrix() {
        let g = HyperGraph::new(
            3,
            vec![vx("a", 1, "gp_op", 1), vx("b", 2, "gp_op", 1), vx("c", 3, "gp_op", 1)],
            vec![ed("a", "b", 10), ed("b", "c", 10)],
            vec![],
        )
        .unwrap();
        let p = profile(&g, &AlgoBank::builtin()).unwrap();
        assert_eq!(p.cell(1, 2), 10.0);
        assert_eq!(p.cell(2, 3), 10.0);
        assert_eq!(p.cell(1, 3), 0.0);
        for row in &p.computation_table {
            assert_eq!(row.complexity, 1.0);
            assert_eq!(row.alfus, vec!["gp_op".to_string()]);
        }
    }

    #[test]
    fn edgeless_graph_profiles_to_zero_matrix() {
        let g = HyperGraph::new(
            1,
            vec![vx("a", 1, "matmul", 3), vx("b", 1, "matadd", 3)],
            vec![],
            vec![],
        )
        .unwrap();
        let p = profile(&g, &AlgoBank::builtin()).unwrap();
        assert_eq!(p.communication_matrix, vec![vec![0.0]]);
        // 2*27 - 9 = 45 for matmul, 9 for matadd.
        assert_eq!(p.computation_table[0].complexity, 54.0);
        assert_eq!(p.computation_table[0].alfus, vec!["matadd", "matmul"]);
    }

    #[test]
    fn matrix_total_equals_summed_edge_weights() {
        let g = HyperGraph::new(
            3,
            vec![
                vx("a", 1, "gp_op", 1),
                vx("b", 2, "gp_op", 1),
                vx("c", 3, "gp_op", 1),
            ],
            vec![ed("a", "b", 7), ed("a", "c", 9), ed("b", "c", 11)],
            vec![],
        )
        .unwrap();
        let p = profile(&g, &AlgoBank::builtin()).unwrap();
        let total: f64 = p.communication_matrix.iter().flatten().sum();
        let direct: f64 = g.edges().iter().map(|e| g.edge_weight(e).unwrap()).sum();
        assert_eq!(total, direct);
        assert_eq!(total, 7.0 + 18.0 + 11.0);
    }

    #[test]
    fn validation_catches_malformed_profiles() {
        let g = HyperGraph::new(1, vec![vx("a", 1, "gp_op", 1)], vec![], vec![]).unwrap();
        let mut p = profile(&g, &AlgoBank::builtin()).unwrap();
        assert!(p.validate().is_ok());
        p.communication_matrix[0][0] = 5.0;
        assert!(p.validate().is_err());

        let bad = r#"{"computation_table": [{"level": 2, "complexity": 1.0, "alfus": []}],
                      "communication_matrix": [[0.0]]}"#;
        assert!(ComplexityProfile::from_json_str(bad).is_err());
        let ragged = r#"{"computation_table": [{"level": 1, "complexity": 1.0, "alfus": []}],
                      "communication_matrix": [[0.0], [0.0]]}"#;
        assert!(ComplexityProfile::from_json_str(ragged).is_err());
    }

    #[test]
    fn profile_round_trips_through_json() {
        let g = HyperGraph::new(
            2,
            vec![vx("a", 1, "matmul", 4), vx("b", 2, "sort", 16)],
            vec![ed("a", "b", 128)],
            vec![],
        )
        .unwrap();
        let p = profile(&g, &AlgoBank::builtin()).unwrap();
        let back = ComplexityProfile::from_json_str(&p.to_json_string()).unwrap();
        assert_eq!(p, back);
    }
}
