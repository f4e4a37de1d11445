//! The algorithm bank: cost, dataset, and internal fan-in/fan-out models
//! for the unit algorithms that vertices execute.
//!
//! Every model is a deterministic function of the size parameter `n`, so
//! costs can be cross-checked against instruction counters of the naive
//! implementations. Compute counts follow the classic op counts (e.g.
//! `2n^3 - n^2` for naive matrix multiply); internal fan-in/fan-out counts
//! are the dataflow edge counts of the same naive algorithm, which for
//! binary-op kernels means `2*ops` inputs and `ops` outputs. Transpose is
//! the exception: it performs no arithmetic, only `n^2` element moves, each
//! one read and one write.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::{ForgeError, Result};
use crate::locality::LoopModel;

pub const DEFAULT_ELEM_BYTES: u64 = 8;

/// Broad algorithm family, following the usual numeric / semi-numeric /
/// non-numeric / general-purpose split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoClass {
    Numeric,
    SemiNumeric,
    NonNumeric,
    GeneralPurpose,
}

/// Parameters of a loop-shaped general-purpose entry. The iteration bound
/// comes from the vertex size at evaluation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopParams {
    pub start: DistributionSpec,
    pub step: DistributionSpec,
    pub end: DistributionSpec,
    /// Indexed variables touched per iteration (`Z`).
    pub indexed_vars: u64,
    /// Words per block; the default per-variable stride is `k * block_words`.
    #[serde(default = "default_block_words")]
    pub block_words: u64,
    /// Optional per-variable affine offsets `(c0, c1)` giving
    /// `offset_k(i) = c0 + c1 * i` in place of the default stride.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<Vec<[i64; 2]>>,
}

fn default_block_words() -> u64 {
    1
}

/// Closed family of cost models. `params` is only present for `loop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cost_kind", content = "params")]
pub enum CostKind {
    /// Naive matrix multiply: `2n^3 - n^2` ops.
    #[serde(rename = "matmul")]
    MatMul,
    /// Elementwise square-matrix kernel: `n^2` ops.
    #[serde(rename = "square")]
    Square,
    /// Transpose: zero arithmetic, `n^2` element moves.
    #[serde(rename = "transpose")]
    Transpose,
    /// Gaussian elimination flops, `(2/3)n^3` rounded to nearest integer.
    #[serde(rename = "gaussian")]
    Gaussian,
    /// `n` rounds each scanning `n` keys (adjacency-matrix Prim,
    /// nearest-neighbour tours): `n^2` ops.
    #[serde(rename = "min_scan")]
    MinScan,
    /// Comparison sort: `n * ceil(log2 n)` ops.
    #[serde(rename = "sort")]
    Sort,
    /// Single scalar operation.
    #[serde(rename = "scalar")]
    Scalar,
    /// Guarded loop over indexed variables; `n` bounds the iteration count.
    #[serde(rename = "loop")]
    Loop(LoopParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoEntry {
    #[serde(skip)]
    pub id: String,
    pub class: AlgoClass,
    #[serde(flatten)]
    pub cost: CostKind,
    #[serde(default = "default_elem_bytes")]
    pub elem_bytes: u64,
}

fn default_elem_bytes() -> u64 {
    DEFAULT_ELEM_BYTES
}

fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// `round((2/3) n^3)` in exact integer arithmetic. The fractional part of
/// `2n^3 / 3` is 0, 1/3, or 2/3, so round-to-nearest is `(2n^3 + 1) div 3`.
fn gaussian_ops(n: u128) -> u128 {
    (2 * n * n * n + 1) / 3
}

impl AlgoEntry {
    fn check_size(&self, n: u64) -> Result<()> {
        if n == 0 {
            Err(ForgeError::InvalidSize(n))
        } else {
            Ok(())
        }
    }

    fn ops(&self, n: u64) -> u128 {
        let n = n as u128;
        match &self.cost {
            CostKind::MatMul => 2 * n * n * n - n * n,
            CostKind::Square => n * n,
            CostKind::Transpose => 0,
            CostKind::Gaussian => gaussian_ops(n),
            CostKind::MinScan => n * n,
            CostKind::Sort => n * ceil_log2(n as u64) as u128,
            CostKind::Scalar => 1,
            CostKind::Loop(p) => n * p.indexed_vars as u128,
        }
    }

    /// Compute cost of one execution at size `n`.
    pub fn eval_cost(&self, n: u64) -> Result<f64> {
        self.check_size(n)?;
        Ok(self.ops(n) as f64)
    }

    /// Internal dataflow `(fan_in, fan_out)` edge counts at size `n`.
    pub fn eval_internal(&self, n: u64) -> Result<(u64, u64)> {
        self.check_size(n)?;
        let (fi, fo) = match &self.cost {
            // One read and one write per element move.
            CostKind::Transpose => {
                let m = (n as u128) * (n as u128);
                (m, m)
            }
            // Binary ops: two inputs, one output each.
            _ => {
                let ops = self.ops(n);
                (2 * ops, ops)
            }
        };
        Ok((fi.min(u64::MAX as u128) as u64, fo.min(u64::MAX as u128) as u64))
    }

    /// Bytes of the output dataset produced at size `n`, never zero.
    pub fn output_bytes(&self, n: u64) -> Result<u64> {
        self.check_size(n)?;
        let n = n as u128;
        let e = self.elem_bytes as u128;
        let b = match &self.cost {
            CostKind::MatMul
            | CostKind::Square
            | CostKind::Transpose
            | CostKind::Gaussian => n * n * e,
            CostKind::MinScan | CostKind::Sort => n * e,
            CostKind::Scalar => e,
            CostKind::Loop(p) => n * p.indexed_vars as u128 * e,
        };
        Ok(b.max(1).min(u64::MAX as u128) as u64)
    }

    /// For loop-shaped entries, the concrete loop model with the vertex
    /// size as iteration bound.
    pub fn loop_model(&self, n: u64) -> Option<LoopModel> {
        match &self.cost {
            CostKind::Loop(p) => Some(LoopModel {
                start: p.start.clone(),
                step: p.step.clone(),
                end: p.end.clone(),
                max_iterations: n,
                indexed_vars: p.indexed_vars.max(1),
                block_words: p.block_words.max(1),
                affine: p.affine.clone(),
            }),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(ForgeError::SchemaMismatch("empty algorithm id".into()));
        }
        if self.elem_bytes == 0 {
            return Err(ForgeError::SchemaMismatch(format!(
                "algorithm `{}` has elem_bytes 0",
                self.id
            )));
        }
        if let CostKind::Loop(p) = &self.cost {
            p.start.validate()?;
            p.step.validate()?;
            p.end.validate()?;
            if p.indexed_vars == 0 {
                return Err(ForgeError::SchemaMismatch(format!(
                    "loop entry `{}` has indexed_vars 0",
                    self.id
                )));
            }
            if let Some(aff) = &p.affine {
                if aff.len() != p.indexed_vars as usize {
                    return Err(ForgeError::SchemaMismatch(format!(
                        "loop entry `{}`: affine list length {} != indexed_vars {}",
                        self.id,
                        aff.len(),
                        p.indexed_vars
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Immutable, shareable registry of algorithm entries keyed by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgoBank {
    entries: BTreeMap<String, AlgoEntry>,
}

impl AlgoBank {
    /// The built-in bank. Contains the standard matrix, graph, sorting and
    /// scalar units plus a default loop entry for locality modeling.
    pub fn builtin() -> Self {
        let mut bank = AlgoBank::default();
        let mut add = |id: &str, class: AlgoClass, cost: CostKind| {
            bank.register(AlgoEntry {
                id: id.to_string(),
                class,
                cost,
                elem_bytes: DEFAULT_ELEM_BYTES,
            })
            .expect("built-in entries are valid and unique");
        };
        add("matmul", AlgoClass::Numeric, CostKind::MatMul);
        add("matadd", AlgoClass::Numeric, CostKind::Square);
        add("mattrans", AlgoClass::Numeric, CostKind::Transpose);
        add("matinv", AlgoClass::Numeric, CostKind::Gaussian);
        add("matmul2", AlgoClass::Numeric, CostKind::MatMul);
        add("matadd2", AlgoClass::Numeric, CostKind::Square);
        add("lud", AlgoClass::Numeric, CostKind::Gaussian);
        add("mst", AlgoClass::SemiNumeric, CostKind::MinScan);
        add("tsp", AlgoClass::SemiNumeric, CostKind::MinScan);
        add("sort", AlgoClass::NonNumeric, CostKind::Sort);
        add("gp_op", AlgoClass::GeneralPurpose, CostKind::Scalar);
        add(
            "loop",
            AlgoClass::GeneralPurpose,
            CostKind::Loop(LoopParams {
                start: DistributionSpec::constant(0.0),
                step: DistributionSpec::constant(1.0),
                end: DistributionSpec::constant(4096.0),
                indexed_vars: 2,
                block_words: 8,
                affine: None,
            }),
        );
        bank
    }

    /// Adds an entry; ids are unique.
    pub fn register(&mut self, entry: AlgoEntry) -> Result<()> {
        entry.validate()?;
        if self.entries.contains_key(&entry.id) {
            return Err(ForgeError::SchemaMismatch(format!(
                "duplicate algorithm id `{}`",
                entry.id
            )));
        }
        self.entries.insert(entry.id.clone(), entry);
        Ok(())
    }

    pub fn lookup(&self, id: &str) -> Result<&AlgoEntry> {
        self.entries
            .get(id)
            .ok_or_else(|| ForgeError::UnknownAlgorithm(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = &AlgoEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the bank file format: a JSON object mapping id to
    /// `{class, cost_kind, params?, elem_bytes?}`.
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, AlgoEntry> = serde_json::from_str(json)
            .map_err(|e| ForgeError::SchemaMismatch(format!("algorithm bank: {e}")))?;
        let mut bank = AlgoBank::default();
        for (id, mut entry) in raw {
            entry.id = id;
            bank.register(entry)?;
        }
        Ok(bank)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("bank serialization is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_finds_builtin_classes() {
        let bank = AlgoBank::builtin();
        assert_eq!(bank.lookup("matmul").unwrap().class, AlgoClass::Numeric);
        assert_eq!(bank.lookup("mst").unwrap().class, AlgoClass::SemiNumeric);
        assert_eq!(bank.lookup("sort").unwrap().class, AlgoClass::NonNumeric);
        assert_eq!(
            bank.lookup("gp_op").unwrap().class,
            AlgoClass::GeneralPurpose
        );
    }

    #[test]
    fn lookup_unknown_id_errors() {
        let bank = AlgoBank::builtin();
        let err = bank.lookup("no_such").unwrap_err();
        assert!(matches!(err, ForgeError::UnknownAlgorithm(ref id) if id == "no_such"));
    }

    #[test]
    fn builtin_set_is_complete() {
        let bank = AlgoBank::builtin();
        for id in [
            "matmul", "matadd", "mattrans", "matinv", "matmul2", "matadd2", "lud", "mst", "tsp",
            "sort", "gp_op",
        ] {
            assert!(bank.contains(id), "missing built-in `{id}`");
        }
    }

    #[test]
    fn eval_cost_matches_pinned_values() {
        let bank = AlgoBank::builtin();
        assert_eq!(bank.lookup("matmul").unwrap().eval_cost(1).unwrap(), 1.0);
        assert_eq!(bank.lookup("matmul").unwrap().eval_cost(10).unwrap(), 1900.0);
        assert_eq!(bank.lookup("matadd").unwrap().eval_cost(8).unwrap(), 64.0);
        assert_eq!(bank.lookup("mattrans").unwrap().eval_cost(5).unwrap(), 0.0);
        assert_eq!(bank.lookup("gp_op").unwrap().eval_cost(17).unwrap(), 1.0);
    }

    #[test]
    fn eval_cost_rejects_size_zero() {
        let bank = AlgoBank::builtin();
        let err = bank.lookup("matmul").unwrap().eval_cost(0).unwrap_err();
        assert!(matches!(err, ForgeError::InvalidSize(0)));
    }

    #[test]
    fn internal_counts_match_pinned_values() {
        let bank = AlgoBank::builtin();
        assert_eq!(bank.lookup("matadd").unwrap().eval_internal(4).unwrap(), (32, 16));
        assert_eq!(bank.lookup("gp_op").unwrap().eval_internal(1).unwrap(), (2, 1));
        assert_eq!(bank.lookup("mattrans").unwrap().eval_internal(3).unwrap(), (9, 9));
    }

    #[test]
    fn output_bytes_follows_element_width() {
        let bank = AlgoBank::builtin();
        assert_eq!(bank.lookup("matmul").unwrap().output_bytes(4).unwrap(), 128);
        assert_eq!(bank.lookup("sort").unwrap().output_bytes(10).unwrap(), 80);
        assert_eq!(bank.lookup("gp_op").unwrap().output_bytes(9).unwrap(), 8);
        // Output datasets are never empty.
        for e in bank.entries() {
            assert!(e.output_bytes(1).unwrap() >= 1, "{} empty output", e.id);
        }
    }

    #[test]
    fn bank_file_round_trips() {
        let bank = AlgoBank::builtin();
        let json = bank.to_json();
        let back = AlgoBank::from_json(&json).unwrap();
        assert_eq!(bank, back);
    }

    #[test]
    fn bank_file_accepts_custom_entries_and_defaults() {
        let json = r#"{
            "blur3": {"class": "numeric", "cost_kind": "square"},
            "walker": {"class": "general-purpose", "cost_kind": "loop",
                       "params": {"start": {"kind": "constant", "value": 0},
                                   "step": {"kind": "normal", "mean": 2, "sigma": 1},
                                   "end": {"kind": "constant", "value": 512},
                                   "indexed_vars": 3},
                       "elem_bytes": 4}
        }"#;
        let bank = AlgoBank::from_json(json).unwrap();
        assert_eq!(bank.lookup("blur3").unwrap().elem_bytes, DEFAULT_ELEM_BYTES);
        let walker = bank.lookup("walker").unwrap();
        assert_eq!(walker.elem_bytes, 4);
        assert_eq!(walker.eval_cost(10).unwrap(), 30.0);
        let model = walker.loop_model(10).unwrap();
        assert_eq!(model.max_iterations, 10);
        assert_eq!(model.indexed_vars, 3);
    }

    #[test]
    fn bank_file_rejects_bad_entries() {
        assert!(AlgoBank::from_json(r#"{"x": {"class": "numeric", "cost_kind": "square", "elem_bytes": 0}}"#).is_err());
        assert!(AlgoBank::from_json(r#"{"x": {"class": "numeric", "cost_kind": "wat"}}"#).is_err());
        assert!(AlgoBank::from_json("[1, 2]").is_err());
    }

    #[test]
    fn register_rejects_duplicates() {
        let mut bank = AlgoBank::builtin();
        let err = bank
            .register(AlgoEntry {
                id: "matmul".into(),
                class: AlgoClass::Numeric,
                cost: CostKind::Square,
                elem_bytes: 8,
            })
            .unwrap_err();
        assert!(matches!(err, ForgeError::SchemaMismatch(_)));
    }

    #[test]
    fn bank_is_shareable_across_threads() {
        let bank = std::sync::Arc::new(AlgoBank::builtin());
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let b = bank.clone();
                std::thread::spawn(move || b.lookup("matmul").unwrap().eval_cost(10).unwrap())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), 1900.0);
        }
    }
}
