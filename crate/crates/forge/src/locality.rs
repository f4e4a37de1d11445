//! Loop-shaped memory locality models: guarded index loops, the address
//! traces they emit, and LRU reuse-distance histograms over those traces.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dist::{substream_rng, DistributionSpec};
use crate::error::{ForgeError, Result};

/// A guarded loop `for (a; a + b < c, count < max_iterations; a += b)`
/// touching `indexed_vars` addresses per iteration.
///
/// `a` (start) and `c` (end) are drawn once per trace; the increment `b`
/// is re-drawn every iteration, so a wide step distribution produces a
/// random walk over the address space while a zero-variance step produces
/// an arithmetic progression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopModel {
    pub start: DistributionSpec,
    pub step: DistributionSpec,
    pub end: DistributionSpec,
    pub max_iterations: u64,
    pub indexed_vars: u64,
    #[serde(default = "default_block_words")]
    pub block_words: u64,
    /// Per-variable affine offsets `(c0, c1)`: variable `k` touches
    /// `a + c0_k + c1_k * i` at iteration `i`. Defaults to the constant
    /// stride `k * block_words`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<Vec<[i64; 2]>>,
}

fn default_block_words() -> u64 {
    1
}

impl LoopModel {
    pub fn validate(&self) -> Result<()> {
        self.start.validate()?;
        self.step.validate()?;
        self.end.validate()?;
        if self.indexed_vars == 0 {
            return Err(ForgeError::InfeasibleSpec(
                "loop model has indexed_vars 0".into(),
            ));
        }
        if self.block_words == 0 {
            return Err(ForgeError::InfeasibleSpec(
                "loop model has block_words 0".into(),
            ));
        }
        if let Some(aff) = &self.affine {
            if aff.len() != self.indexed_vars as usize {
                return Err(ForgeError::InfeasibleSpec(format!(
                    "affine list length {} != indexed_vars {}",
                    aff.len(),
                    self.indexed_vars
                )));
            }
        }
        Ok(())
    }
}

/// Word-granular address trace. A trace may be empty when the loop guard
/// fails on entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddressTrace {
    pub addresses: Vec<u64>,
}

/// Runs the loop model under the given seed and records every address in
/// program order. Addresses are clamped to stay nonnegative.
pub fn generate_trace(model: &LoopModel, seed: u64) -> Result<AddressTrace> {
    model.validate()?;
    let mut start_rng = substream_rng(seed, "trace/start");
    let mut step_rng = substream_rng(seed, "trace/step");
    let mut end_rng = substream_rng(seed, "trace/end");

    let mut a: i128 = model.start.sample_clamped_int(&mut start_rng, 0) as i128;
    let c: i128 = model.end.sample_clamped_int(&mut end_rng, 0) as i128;
    let z = model.indexed_vars;

    let mut addresses = Vec::new();
    for i in 0..model.max_iterations {
        let b = model.step.sample_f64(&mut step_rng).round() as i128;
        if a + b >= c {
            break;
        }
        for k in 0..z {
            let offset: i128 = match &model.affine {
                Some(aff) => {
                    let [c0, c1] = aff[k as usize];
                    c0 as i128 + c1 as i128 * i as i128
                }
                None => (k * model.block_words) as i128,
            };
            addresses.push((a + offset).max(0) as u64);
        }
        a = (a + b).max(0);
    }
    Ok(AddressTrace { addresses })
}

/// LRU reuse-distance histogram. `finite[d]` counts accesses whose block
/// was last touched with exactly `d` distinct other blocks in between;
/// `cold` counts first touches.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReuseHistogram {
    pub finite: BTreeMap<u64, u64>,
    pub cold: u64,
}

impl ReuseHistogram {
    pub fn total(&self) -> u64 {
        self.cold + self.finite.values().sum::<u64>()
    }

    /// Mean of the finite distances, or None when every access was cold.
    pub fn mean_finite(&self) -> Option<f64> {
        let n: u64 = self.finite.values().sum();
        if n == 0 {
            return None;
        }
        let sum: f64 = self.finite.iter().map(|(d, c)| *d as f64 * *c as f64).sum();
        Some(sum / n as f64)
    }
}

struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize, delta: i64) {
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> i64 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Computes the reuse-distance histogram of a trace at the given block
/// granularity (in words). Runs in O(N log N) via a last-access marker
/// tree; equivalent to LRU stack simulation.
pub fn reuse_distance_histogram(trace: &AddressTrace, block_words: u64) -> Result<ReuseHistogram> {
    if block_words == 0 {
        return Err(ForgeError::InvalidSize(0));
    }
    let n = trace.addresses.len();
    let mut hist = ReuseHistogram::default();
    let mut last: HashMap<u64, usize> = HashMap::new();
    let mut marks = Fenwick::new(n);
    for (t, &addr) in trace.addresses.iter().enumerate() {
        let pos = t + 1;
        let block = addr / block_words;
        match last.insert(block, pos) {
            Some(prev) => {
                let d = (marks.prefix(pos - 1) - marks.prefix(prev)) as u64;
                *hist.finite.entry(d).or_insert(0) += 1;
                marks.add(prev, -1);
            }
            None => hist.cold += 1,
        }
        marks.add(pos, 1);
    }
    Ok(hist)
}
