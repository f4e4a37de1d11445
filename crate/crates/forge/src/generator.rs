//! Seeded workload generation from distribution specs, plus conformance
//! checking of generated graphs against the spec they came from.
//!
//! Generation is a single deterministic pass: levels, then vertices, then
//! edges, then control vectors. Each quantity draws from its own named
//! substream of the spec seed, so changing one distribution's parameters
//! never perturbs the draws of another.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algobank::{AlgoBank, CostKind};
use crate::control_flow::{sample_control_probs, ControlFlowVector};
use crate::dist::{substream_rng, DistributionSpec};
use crate::error::{ForgeError, Result};
use crate::hypergraph::{HyperEdge, HyperGraph, HyperVertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgeKind {
    /// Multiplies sampled vertex sizes inside the band.
    Computational,
    /// Multiplies sampled dataset bytes on edges into the band.
    Communication,
    /// Multiplies the branch fraction inside the band (capped at 1).
    Control,
}

/// A localized hotspot over an inclusive level band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeSpec {
    pub kind: SurgeKind,
    pub level_lo: u32,
    pub level_hi: u32,
    pub multiplier: f64,
}

impl SurgeSpec {
    fn validate(&self) -> Result<()> {
        if self.level_lo < 1 || self.level_lo > self.level_hi {
            return Err(ForgeError::InfeasibleSpec(format!(
                "surge band {}..{} is not a valid inclusive range",
                self.level_lo, self.level_hi
            )));
        }
        if !(self.multiplier > 1.0) {
            return Err(ForgeError::InfeasibleSpec(format!(
                "surge multiplier {} must be > 1",
                self.multiplier
            )));
        }
        Ok(())
    }

    fn contains(&self, level: u32) -> bool {
        (self.level_lo..=self.level_hi).contains(&level)
    }
}

fn default_branch_probs() -> DistributionSpec {
    DistributionSpec::normal(0.5, 0.2)
}

/// Distribution-level description of a workload family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub seed: u64,
    pub num_levels: DistributionSpec,
    pub nodes_per_level: DistributionSpec,
    pub in_degree: DistributionSpec,
    pub out_degree: DistributionSpec,
    /// Positive weights over bank algorithm ids.
    pub algo_mix: BTreeMap<String, f64>,
    pub size: DistributionSpec,
    pub bytes: DistributionSpec,
    #[serde(default)]
    pub branch_fraction: f64,
    #[serde(default)]
    pub locality_fraction: f64,
    /// Distribution the branch probabilities are drawn from.
    #[serde(default = "default_branch_probs")]
    pub branch_probs: DistributionSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surges: Vec<SurgeSpec>,
}

impl WorkloadSpec {
    pub fn validate(&self, bank: &AlgoBank) -> Result<()> {
        self.num_levels.validate()?;
        self.nodes_per_level.validate()?;
        self.in_degree.validate()?;
        self.out_degree.validate()?;
        self.size.validate()?;
        self.bytes.validate()?;
        self.branch_probs.validate()?;
        if !(0.0..=1.0).contains(&self.branch_fraction) {
            return Err(ForgeError::InfeasibleSpec(format!(
                "branch_fraction {} outside [0, 1]",
                self.branch_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.locality_fraction) {
            return Err(ForgeError::InfeasibleSpec(format!(
                "locality_fraction {} outside [0, 1]",
                self.locality_fraction
            )));
        }
        if self.algo_mix.is_empty() {
            return Err(ForgeError::InfeasibleSpec("algo_mix is empty".into()));
        }
        for (id, &w) in &self.algo_mix {
            if !(w > 0.0) || !w.is_finite() {
                return Err(ForgeError::InfeasibleSpec(format!(
                    "algo_mix weight for `{id}` must be positive, got {w}"
                )));
            }
            bank.lookup(id)?;
        }
        if self.locality_fraction > 0.0 && loop_ids(bank).is_empty() {
            return Err(ForgeError::InfeasibleSpec(
                "locality_fraction > 0 but the bank has no loop entry".into(),
            ));
        }
        for s in &self.surges {
            s.validate()?;
        }
        Ok(())
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| ForgeError::SchemaMismatch(format!("workload spec: {e}")))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serialization is infallible");
        s.push('\n');
        s
    }
}

fn loop_ids(bank: &AlgoBank) -> Vec<&str> {
    bank.entries()
        .filter(|e| matches!(e.cost, CostKind::Loop(_)))
        .map(|e| e.id.as_str())
        .collect()
}

/// Clamp and repair events observed during one generation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// Draws pushed up to the minimum (levels, node counts, sizes, bytes).
    pub clamped_draws: u64,
    /// In-degree draws cut down to the predecessor population.
    pub clamped_in_degree: u64,
    /// Edges added to repair otherwise-orphaned vertices.
    pub fallback_edges: u64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: HyperGraph,
    pub stats: GenerationStats,
}

struct SurgeView<'a> {
    surges: &'a [SurgeSpec],
}

impl SurgeView<'_> {
    fn multiplier(&self, kind: SurgeKind, level: u32) -> f64 {
        self.surges
            .iter()
            .filter(|s| s.kind == kind && s.contains(level))
            .map(|s| s.multiplier)
            .product()
    }
}

fn weighted_pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        x -= w;
        if x <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Generates one workload graph from the spec, deterministically in
/// `spec.seed`. Infeasible draws are clamped rather than rejected and the
/// clamp counts are reported in the stats.
pub fn generate(spec: &WorkloadSpec, bank: &AlgoBank) -> Result<Generated> {
    spec.validate(bank)?;
    let seed = spec.seed;
    let mut stats = GenerationStats::default();
    let surges = SurgeView { surges: &spec.surges };

    let mut rng_levels = substream_rng(seed, "gen/levels");
    let mut rng_nodes = substream_rng(seed, "gen/nodes");
    let mut rng_algo = substream_rng(seed, "gen/algo");
    let mut rng_loc = substream_rng(seed, "gen/locality");
    let mut rng_size = substream_rng(seed, "gen/size");
    let mut rng_indeg = substream_rng(seed, "gen/in_degree");
    let mut rng_outdeg = substream_rng(seed, "gen/out_degree");
    let mut rng_pred = substream_rng(seed, "gen/pred");
    let mut rng_bytes = substream_rng(seed, "gen/bytes");
    let mut rng_branch = substream_rng(seed, "gen/branch");
    let mut rng_probs = substream_rng(seed, "gen/branch_probs");

    let raw_levels = spec.num_levels.sample_clamped_int(&mut rng_levels, i64::MIN + 1);
    if raw_levels < 1 {
        stats.clamped_draws += 1;
    }
    let num_levels = raw_levels.max(1) as u32;

    let mix_ids: Vec<&str> = spec.algo_mix.keys().map(String::as_str).collect();
    let mix_weights: Vec<f64> = spec.algo_mix.values().copied().collect();
    let loop_entries = loop_ids(bank);

    // Vertices, level by level. Each vertex also draws its out-degree
    // capacity here so the draw order is independent of later wiring.
    let mut vertices: Vec<HyperVertex> = Vec::new();
    let mut capacity: Vec<i64> = Vec::new();
    let mut level_ranges: Vec<std::ops::Range<usize>> = Vec::new();
    for level in 1..=num_levels {
        let raw = spec.nodes_per_level.sample_clamped_int(&mut rng_nodes, i64::MIN + 1);
        if raw < 1 {
            stats.clamped_draws += 1;
        }
        let count = raw.max(1) as usize;
        let start = vertices.len();
        for k in 0..count {
            let loc_draw = rng_loc.gen::<f64>();
            let algo = if spec.locality_fraction > 0.0
                && loc_draw < spec.locality_fraction
                && !loop_entries.is_empty()
            {
                let i = rng_loc.gen_range(0..loop_entries.len());
                loop_entries[i].to_string()
            } else {
                mix_ids[weighted_pick(&mix_weights, &mut rng_algo)].to_string()
            };
            let raw_size = spec.size.sample_clamped_int(&mut rng_size, i64::MIN + 1);
            if raw_size < 1 {
                stats.clamped_draws += 1;
            }
            let mut size = raw_size.max(1) as u64;
            let mult = surges.multiplier(SurgeKind::Computational, level);
            if mult > 1.0 {
                size = ((size as f64 * mult).round() as u64).max(1);
            }
            vertices.push(HyperVertex {
                id: format!("v{level:03}_{k:04}"),
                level,
                algo,
                size,
            });
            capacity.push(spec.out_degree.sample_clamped_int(&mut rng_outdeg, 0));
        }
        level_ranges.push(start..vertices.len());
        if level_ranges.last().unwrap().is_empty() {
            return Err(ForgeError::InfeasibleSpec(format!("level {level} is empty")));
        }
    }

    let sample_bytes = |rng: &mut rand_chacha::ChaCha8Rng,
                            dst_level: u32,
                            stats: &mut GenerationStats| {
        let raw = spec.bytes.sample_clamped_int(rng, i64::MIN + 1);
        if raw < 1 {
            stats.clamped_draws += 1;
        }
        let mut bytes = raw.max(1) as u64;
        let mult = surges.multiplier(SurgeKind::Communication, dst_level);
        if mult > 1.0 {
            bytes = ((bytes as f64 * mult).round() as u64).max(1);
        }
        bytes
    };

    // Wiring: every vertex above level 1 samples an in-degree and picks
    // that many distinct predecessors, weighted toward near levels by
    // 1/gap. Vertices with remaining out-capacity are preferred; orphans
    // get a repair edge from the previous level.
    let mut edges: Vec<HyperEdge> = Vec::new();
    for level in 2..=num_levels {
        let pool_end = level_ranges[(level - 2) as usize].end;
        for vi in level_ranges[(level - 1) as usize].clone() {
            let raw_k = spec.in_degree.sample_clamped_int(&mut rng_indeg, 0);
            let mut k = raw_k.max(0) as usize;
            if k > pool_end {
                stats.clamped_in_degree += 1;
                k = pool_end;
            }
            let mut chosen = vec![false; pool_end];
            let mut picked = 0;
            while picked < k {
                let with_capacity: Vec<usize> = (0..pool_end)
                    .filter(|&p| !chosen[p] && capacity[p] > 0)
                    .collect();
                let candidates: Vec<usize> = if with_capacity.is_empty() {
                    (0..pool_end).filter(|&p| !chosen[p]).collect()
                } else {
                    with_capacity
                };
                let weights: Vec<f64> = candidates
                    .iter()
                    .map(|&p| 1.0 / (level - vertices[p].level) as f64)
                    .collect();
                let p = candidates[weighted_pick(&weights, &mut rng_pred)];
                chosen[p] = true;
                capacity[p] -= 1;
                edges.push(HyperEdge {
                    src: vertices[p].id.clone(),
                    dst: vertices[vi].id.clone(),
                    bytes: sample_bytes(&mut rng_bytes, level, &mut stats),
                });
                picked += 1;
            }
            if k == 0 {
                // Orphan repair: pull one edge from the previous level.
                let prev = level_ranges[(level - 2) as usize].clone();
                let with_capacity: Vec<usize> =
                    prev.clone().filter(|&p| capacity[p] > 0).collect();
                let candidates: Vec<usize> = if with_capacity.is_empty() {
                    prev.collect()
                } else {
                    with_capacity
                };
                let p = candidates[rng_pred.gen_range(0..candidates.len())];
                capacity[p] -= 1;
                edges.push(HyperEdge {
                    src: vertices[p].id.clone(),
                    dst: vertices[vi].id.clone(),
                    bytes: sample_bytes(&mut rng_bytes, level, &mut stats),
                });
                stats.fallback_edges += 1;
            }
        }
    }

    // Branch vectors on a seeded fraction of the fan-out > 1 vertices.
    let mut out_degree = vec![0usize; vertices.len()];
    let index_of: std::collections::HashMap<&str, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.id.as_str(), i))
        .collect();
    for e in &edges {
        out_degree[index_of[e.src.as_str()]] += 1;
    }
    let mut control = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        if out_degree[i] < 2 {
            continue;
        }
        let draw = rng_branch.gen::<f64>();
        let mult = surges.multiplier(SurgeKind::Control, v.level);
        let p = (spec.branch_fraction * mult.max(1.0)).min(1.0);
        if draw < p {
            let probs = sample_control_probs(out_degree[i], &spec.branch_probs, &mut rng_probs)?;
            control.push(ControlFlowVector { vertex: v.id.clone(), probs });
        }
    }

    let graph = HyperGraph::new(num_levels, vertices, edges, control)?;
    Ok(Generated { graph, stats })
}

/// One distribution's conformance record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistCheck {
    pub name: String,
    pub spec_mean: f64,
    pub spec_variance: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub samples: u64,
    pub pass: bool,
}

/// Realized effect of one surge band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeCheck {
    pub kind: SurgeKind,
    pub level_lo: u32,
    pub level_hi: u32,
    pub multiplier: f64,
    pub in_band_mean: f64,
    pub out_band_mean: f64,
    /// `in_band_mean / out_band_mean`; NaN when either side is empty.
    pub realized_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub tolerance: f64,
    pub graphs: u64,
    pub checks: Vec<DistCheck>,
    pub surges: Vec<SurgeCheck>,
    pub pass: bool,
}

pub const DEFAULT_CONFORMANCE_TOL: f64 = 0.15;

fn moments(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Compares realized statistics of one or more generated graphs with the
/// spec they were generated from. Means are checked at a relative
/// tolerance; sizes and bytes inside surge bands are excluded from the
/// base checks and reported per band instead.
pub fn verify_against_spec(
    graphs: &[HyperGraph],
    spec: &WorkloadSpec,
    tolerance: f64,
) -> Result<ConformanceReport> {
    if graphs.is_empty() {
        return Err(ForgeError::InfeasibleSpec(
            "conformance needs at least one graph".into(),
        ));
    }
    let comp_band = |level: u32| {
        spec.surges
            .iter()
            .any(|s| s.kind == SurgeKind::Computational && s.contains(level))
    };
    let comm_band = |level: u32| {
        spec.surges
            .iter()
            .any(|s| s.kind == SurgeKind::Communication && s.contains(level))
    };

    let mut levels = Vec::new();
    let mut nodes = Vec::new();
    let mut in_deg = Vec::new();
    let mut out_deg = Vec::new();
    let mut sizes = Vec::new();
    let mut bytes = Vec::new();
    for g in graphs {
        levels.push(g.num_levels() as f64);
        for l in 1..=g.num_levels() {
            nodes.push(g.vertices_at_level(l).count() as f64);
        }
        for v in g.vertices() {
            if v.level > 1 {
                in_deg.push(g.in_degree(&v.id)? as f64);
            }
            if v.level < g.num_levels() {
                out_deg.push(g.out_degree(&v.id)? as f64);
            }
            if !comp_band(v.level) {
                sizes.push(v.size as f64);
            }
        }
        for e in g.edges() {
            if !comm_band(g.vertex(&e.dst)?.level) {
                bytes.push(e.bytes as f64);
            }
        }
    }

    let mut checks = Vec::new();
    let mut check = |name: &str, dist: &DistributionSpec, samples: &[f64]| {
        let (mean, var) = moments(samples);
        let target = dist.mean();
        let pass = if samples.is_empty() {
            true
        } else {
            (mean - target).abs() <= tolerance * target.abs().max(1e-9)
        };
        checks.push(DistCheck {
            name: name.to_string(),
            spec_mean: target,
            spec_variance: dist.variance(),
            empirical_mean: mean,
            empirical_variance: var,
            samples: samples.len() as u64,
            pass,
        });
    };
    check("num_levels", &spec.num_levels, &levels);
    check("nodes_per_level", &spec.nodes_per_level, &nodes);
    check("in_degree", &spec.in_degree, &in_deg);
    check("out_degree", &spec.out_degree, &out_deg);
    check("size", &spec.size, &sizes);
    check("bytes", &spec.bytes, &bytes);

    let mut surge_checks = Vec::new();
    for s in &spec.surges {
        let (mut inside, mut outside) = (Vec::new(), Vec::new());
        match s.kind {
            SurgeKind::Computational => {
                for g in graphs {
                    for v in g.vertices() {
                        if s.contains(v.level) {
                            inside.push(v.size as f64);
                        } else {
                            outside.push(v.size as f64);
                        }
                    }
                }
            }
            SurgeKind::Communication => {
                for g in graphs {
                    for e in g.edges() {
                        if s.contains(g.vertex(&e.dst)?.level) {
                            inside.push(e.bytes as f64);
                        } else {
                            outside.push(e.bytes as f64);
                        }
                    }
                }
            }
            SurgeKind::Control => {
                for g in graphs {
                    let with_vector: std::collections::HashSet<&str> =
                        g.control().iter().map(|c| c.vertex.as_str()).collect();
                    for v in g.vertices() {
                        if g.out_degree(&v.id)? > 1 {
                            let val = if with_vector.contains(v.id.as_str()) { 1.0 } else { 0.0 };
                            if s.contains(v.level) {
                                inside.push(val);
                            } else {
                                outside.push(val);
                            }
                        }
                    }
                }
            }
        }
        let (in_mean, _) = moments(&inside);
        let (out_mean, _) = moments(&outside);
        surge_checks.push(SurgeCheck {
            kind: s.kind,
            level_lo: s.level_lo,
            level_hi: s.level_hi,
            multiplier: s.multiplier,
            in_band_mean: in_mean,
            out_band_mean: out_mean,
            realized_ratio: in_mean / out_mean,
        });
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(ConformanceReport {
        tolerance,
        graphs: graphs.len() as u64,
        checks,
        surges: surge_checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn degenerate_spec() -> WorkloadSpec {
        WorkloadSpec {
            seed: 1,
            num_levels: DistributionSpec::constant(3.0),
            nodes_per_level: DistributionSpec::constant(1.0),
            in_degree: DistributionSpec::constant(1.0),
            out_degree: DistributionSpec::constant(1.0),
            algo_mix: BTreeMap::from([("gp_op".to_string(), 1.0)]),
            size: DistributionSpec::constant(1.0),
            bytes: DistributionSpec::constant(8.0),
            branch_fraction: 0.0,
            locality_fraction: 0.0,
            branch_probs: default_branch_probs(),
            surges: vec![],
        }
    }

    #[test]
    fn degenerate_spec_yields_exact_chain() {
        let bank = AlgoBank::builtin();
        let out = generate(&degenerate_spec(), &bank).unwrap();
        let g = &out.graph;
        assert_eq!(g.num_levels(), 3);
        assert_eq!(g.vertices().len(), 3);
        assert_eq!(g.edges().len(), 2);
        for v in g.vertices() {
            assert_eq!(v.algo, "gp_op");
            assert_eq!(v.size, 1);
        }
        for e in g.edges() {
            assert_eq!(e.bytes, 8);
        }
        // Exact chain: each non-first level vertex has in-degree 1 from
        // the previous level.
        assert_eq!(out.stats.fallback_edges, 0);
        assert_eq!(out.stats.clamped_draws, 0);
    }

    #[test]
    fn generation_replays_per_seed() {
        let bank = AlgoBank::builtin();
        let mut spec = degenerate_spec();
        spec.num_levels = DistributionSpec::uniform_int(3, 6);
        spec.nodes_per_level = DistributionSpec::uniform_int(1, 5);
        spec.in_degree = DistributionSpec::uniform_int(1, 3);
        spec.bytes = DistributionSpec::uniform_int(1, 4096);
        spec.branch_fraction = 0.5;
        spec.seed = 7;
        let a = generate(&spec, &bank).unwrap().graph;
        let b = generate(&spec, &bank).unwrap().graph;
        assert_eq!(a.to_json_string(), b.to_json_string());
        spec.seed = 8;
        let c = generate(&spec, &bank).unwrap().graph;
        assert_ne!(a.to_json_string(), c.to_json_string());
    }

    #[test]
    fn in_degree_clamps_to_population_and_reports() {
        let bank = AlgoBank::builtin();
        let mut spec = degenerate_spec();
        spec.in_degree = DistributionSpec::constant(50.0);
        let out = generate(&spec, &bank).unwrap();
        assert!(out.stats.clamped_in_degree > 0);
        // Level 2's single vertex can only reach the single level-1 vertex.
        let v2: Vec<_> = out.graph.vertices_at_level(2).collect();
        assert_eq!(out.graph.in_degree(&v2[0].id).unwrap(), 1);
    }

    #[test]
    fn zero_in_degree_draws_get_fallback_edges() {
        let bank = AlgoBank::builtin();
        let mut spec = degenerate_spec();
        spec.in_degree = DistributionSpec::constant(0.0);
        let out = generate(&spec, &bank).unwrap();
        assert_eq!(out.stats.fallback_edges, 2);
        for v in out.graph.vertices() {
            if v.level > 1 {
                assert_eq!(out.graph.in_degree(&v.id).unwrap(), 1, "orphan at {}", v.id);
            }
        }
    }

    #[test]
    fn locality_fraction_assigns_loop_vertices() {
        let bank = AlgoBank::builtin();
        let mut spec = degenerate_spec();
        spec.nodes_per_level = DistributionSpec::constant(20.0);
        spec.locality_fraction = 1.0;
        let out = generate(&spec, &bank).unwrap();
        assert!(out.graph.vertices().iter().all(|v| v.algo == "loop"));
    }

    #[test]
    fn branch_fraction_one_covers_every_branch_vertex() {
        let bank = AlgoBank::builtin();
        let mut spec = degenerate_spec();
        spec.nodes_per_level = DistributionSpec::constant(4.0);
        spec.num_levels = DistributionSpec::constant(4.0);
        spec.in_degree = DistributionSpec::uniform_int(1, 4);
        spec.branch_fraction = 1.0;
        spec.seed = 11;
        let g = generate(&spec, &bank).unwrap().graph;
        let branchy = g
            .vertices()
            .iter()
            .filter(|v| g.out_degree(&v.id).unwrap() > 1)
            .count();
        assert!(branchy > 0, "test graph should have branch vertices");
        assert_eq!(g.control().len(), branchy);
        // Exact coverage means control complexity is defined.
        assert!(crate::control_flow::control_complexity(&g, g.control()).is_ok());
    }

    #[test]
    fn spec_validation_rejects_bad_inputs() {
        let bank = AlgoBank::builtin();
        let mut spec = degenerate_spec();
        spec.algo_mix.clear();
        assert!(matches!(
            generate(&spec, &bank),
            Err(ForgeError::InfeasibleSpec(_))
        ));
        let mut spec = degenerate_spec();
        spec.algo_mix.insert("no_such".into(), 1.0);
        assert!(matches!(
            generate(&spec, &bank),
            Err(ForgeError::UnknownAlgorithm(_))
        ));
        let mut spec = degenerate_spec();
        spec.branch_fraction = 1.5;
        assert!(generate(&spec, &bank).is_err());
        let mut spec = degenerate_spec();
        spec.surges.push(SurgeSpec {
            kind: SurgeKind::Communication,
            level_lo: 3,
            level_hi: 2,
            multiplier: 10.0,
        });
        assert!(generate(&spec, &bank).is_err());
        let mut spec = degenerate_spec();
        spec.surges.push(SurgeSpec {
            kind: SurgeKind::Communication,
            level_lo: 1,
            level_hi: 2,
            multiplier: 1.0,
        });
        assert!(generate(&spec, &bank).is_err());
    }

    #[test]
    fn degenerate_spec_passes_conformance_exactly() {
        let bank = AlgoBank::builtin();
        let spec = degenerate_spec();
        let g = generate(&spec, &bank).unwrap().graph;
        let report = verify_against_spec(&[g], &spec, DEFAULT_CONFORMANCE_TOL).unwrap();
        assert!(report.pass, "{report:?}");
        for c in &report.checks {
            if c.samples > 0 {
                assert_eq!(c.empirical_mean, c.spec_mean, "{}", c.name);
                assert_eq!(c.empirical_variance, 0.0, "{}", c.name);
            }
        }
    }

    #[test]
    fn spec_json_round_trips() {
        let spec = degenerate_spec();
        let json = spec.to_json_string();
        let back = WorkloadSpec::from_json_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn branch_prob_default_applies_when_field_missing() {
        let json = r#"{
            "seed": 3,
            "num_levels": {"kind": "constant", "value": 2},
            "nodes_per_level": {"kind": "constant", "value": 1},
            "in_degree": {"kind": "constant", "value": 1},
            "out_degree": {"kind": "constant", "value": 1},
            "algo_mix": {"gp_op": 1.0},
            "size": {"kind": "constant", "value": 1},
            "bytes": {"kind": "constant", "value": 8}
        }"#;
        let spec = WorkloadSpec::from_json_str(json).unwrap();
        assert_eq!(spec.branch_probs, default_branch_probs());
        assert_eq!(spec.branch_fraction, 0.0);
    }
}
