//! Probabilistic control flow: probability vectors over a vertex's
//! out-edges, path resolution, and the entropy-based control complexity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::{ForgeError, Result};
use crate::hypergraph::HyperGraph;

/// Probability sums must close to 1 within this tolerance.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// One probability per out-edge of `vertex`, in the canonical (level, id)
/// order of the edge destinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlFlowVector {
    pub vertex: String,
    pub probs: Vec<f64>,
}

impl ControlFlowVector {
    pub fn new(vertex: impl Into<String>, probs: Vec<f64>) -> Result<Self> {
        let v = ControlFlowVector { vertex: vertex.into(), probs };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.probs.len() < 2 {
            return Err(ForgeError::InvalidControlVector(format!(
                "vertex `{}`: need at least 2 branch probabilities, got {}",
                self.vertex,
                self.probs.len()
            )));
        }
        for &p in &self.probs {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(ForgeError::InvalidControlVector(format!(
                    "vertex `{}`: probability {p} outside [0, 1]",
                    self.vertex
                )));
            }
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(ForgeError::InvalidControlVector(format!(
                "vertex `{}`: probabilities sum to {sum}, not 1",
                self.vertex
            )));
        }
        Ok(())
    }

    /// Shannon entropy of the vector in bits; zero terms contribute zero.
    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(&self.probs)
    }
}

pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Draws `n` branch probabilities from `dist`: each draw is clamped into
/// [0, 1] and the vector is normalized to sum 1. Errors with
/// `DegenerateDistribution` when every draw clamps to zero.
pub fn sample_control_probs<R: Rng + ?Sized>(
    n: usize,
    dist: &DistributionSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(ForgeError::InvalidControlVector(format!(
            "need at least 2 branch targets, got {n}"
        )));
    }
    dist.validate()?;
    let mut probs: Vec<f64> = (0..n)
        .map(|_| dist.sample_f64(rng).clamp(0.0, 1.0))
        .collect();
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return Err(ForgeError::DegenerateDistribution);
    }
    for p in &mut probs {
        *p /= sum;
    }
    Ok(probs)
}

/// Index of the out-edge taken: the highest-probability entry, lowest
/// index on ties. Execution follows the path of highest probability.
pub fn resolve_path(v: &ControlFlowVector) -> usize {
    let mut best = 0;
    for (i, &p) in v.probs.iter().enumerate() {
        if p > v.probs[best] {
            best = i;
        }
    }
    best
}

/// Total control complexity of a graph: the sum of branch-vector entropies
/// in bits. `vectors` must cover exactly the fan-out > 1 vertices of `g`,
/// with one probability per out-edge.
pub fn control_complexity(g: &HyperGraph, vectors: &[ControlFlowVector]) -> Result<f64> {
    let mut branch_vertices: Vec<&str> = g
        .vertices()
        .iter()
        .filter(|v| g.out_degree(&v.id).unwrap_or(0) > 1)
        .map(|v| v.id.as_str())
        .collect();
    branch_vertices.sort_unstable();

    let mut covered: Vec<&str> = Vec::with_capacity(vectors.len());
    let mut total = 0.0;
    for v in vectors {
        v.validate()?;
        let out = g.out_degree(&v.vertex)?;
        if out < 2 {
            return Err(ForgeError::CoverageMismatch(format!(
                "vertex `{}` has fan-out {out}, not a branch vertex",
                v.vertex
            )));
        }
        if out != v.probs.len() {
            return Err(ForgeError::CoverageMismatch(format!(
                "vertex `{}` has {out} out-edges but {} probabilities",
                v.vertex,
                v.probs.len()
            )));
        }
        covered.push(v.vertex.as_str());
        total += v.entropy_bits();
    }
    covered.sort_unstable();
    if covered.windows(2).any(|w| w[0] == w[1]) {
        return Err(ForgeError::CoverageMismatch(
            "duplicate control vector for a vertex".into(),
        ));
    }
    if covered != branch_vertices {
        return Err(ForgeError::CoverageMismatch(format!(
            "control vectors cover {} vertices but the graph has {} branch vertices",
            covered.len(),
            branch_vertices.len()
        )));
    }
    Ok(total)
}
