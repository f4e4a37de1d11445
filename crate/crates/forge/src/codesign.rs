//! Core formation and network sizing: byte-affinity clustering of unit
//! instances into core types, inter-core traffic matrices, dense-block
//! partitioning, and per-partition mesh switch counts.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::substream_rng;
use crate::error::{ForgeError, Result};
use crate::hypergraph::HyperGraph;

/// Symmetric, zero-diagonal matrix of bytes exchanged between unit
/// instances (graph vertices), in canonical vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityMatrix {
    pub ids: Vec<String>,
    pub bytes: Vec<Vec<f64>>,
}

impl AffinityMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }
}

/// Raw bytes over edges between each vertex pair, either direction.
/// Affinity is undirected volume; depth weighting stays in the
/// complexity math.
pub fn build_affinity(g: &HyperGraph) -> AffinityMatrix {
    let ids: Vec<String> = g.vertices().iter().map(|v| v.id.clone()).collect();
    let index: BTreeMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let n = ids.len();
    let mut bytes = vec![vec![0.0; n]; n];
    for e in g.edges() {
        let (p, q) = (index[e.src.as_str()], index[e.dst.as_str()]);
        bytes[p][q] += e.bytes as f64;
        bytes[q][p] += e.bytes as f64;
    }
    AffinityMatrix { ids, bytes }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WcssPoint {
    pub k: usize,
    pub wcss: f64,
}

/// Clustering of unit instances into core types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreTypePlan {
    pub k: usize,
    /// Vertex id -> core type index in 0..k.
    pub assignment: BTreeMap<String, usize>,
    pub wcss_curve: Vec<WcssPoint>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn wcss_of(points: &[Vec<f64>], centers: &[Vec<f64>], assign: &[usize]) -> f64 {
    points
        .iter()
        .zip(assign)
        .map(|(p, &c)| sq_dist(p, &centers[c]))
        .sum()
}

fn centers_from(points: &[Vec<f64>], assign: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assign) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (c, count) in counts.iter().enumerate() {
        if *count > 0 {
            for s in sums[c].iter_mut() {
                *s /= *count as f64;
            }
        }
    }
    sums
}

/// Standard Lloyd iterations from the given initial centers; returns the
/// best (lowest-WCSS) assignment seen, so the result never exceeds the
/// WCSS of the initial configuration.
fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (Vec<usize>, f64) {
    const MAX_ITER: usize = 300;
    const TOL: f64 = 1e-6;
    let k = centers.len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..MAX_ITER {
        let mut assign: Vec<usize> = points
            .iter()
            .map(|p| {
                let mut best_c = 0;
                let mut best_d = f64::INFINITY;
                for (c, center) in centers.iter().enumerate() {
                    let d = sq_dist(p, center);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                best_c
            })
            .collect();
        // Empty clusters grab the point currently farthest from its
        // center, one at a time.
        loop {
            let mut counts = vec![0usize; k];
            for &a in &assign {
                counts[a] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let farthest = (0..points.len())
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&i, &j| {
                    sq_dist(&points[i], &centers[assign[i]])
                        .total_cmp(&sq_dist(&points[j], &centers[assign[j]]))
                });
            match farthest {
                Some(i) => assign[i] = empty,
                None => break,
            }
        }
        let current = wcss_of(points, &centers, &assign);
        let improved = best.as_ref().map_or(true, |(_, w)| current < *w);
        if improved {
            best = Some((assign.clone(), current));
        }
        if let Some((_, w)) = &best {
            if (w - current).abs() < TOL && !improved {
                break;
            }
        }
        let prev = current;
        centers = centers_from(points, &assign, k);
        let after = wcss_of(points, &centers, &assign);
        if prev - after < TOL {
            if after < best.as_ref().map_or(f64::INFINITY, |(_, w)| *w) {
                best = Some((assign, after));
            }
            break;
        }
    }
    best.expect("at least one iteration ran")
}

fn kmeanspp_init<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = vec![points[rng.gen_range(0..points.len())].clone()];
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| sq_dist(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut x = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                x -= w;
                if x <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..points.len())
        };
        centers.push(points[next].clone());
    }
    centers
}

const RESTARTS_PER_K: usize = 10;

/// Best assignment for each k in 1..=k_max. Candidates per k are seeded
/// k-means++ restarts plus one run inheriting the best (k-1) solution
/// with its worst point split off as a new center, which pins the WCSS
/// curve non-increasing in k.
fn run_ladder(
    points: &[Vec<f64>],
    k_max: usize,
    seed: u64,
) -> Vec<(Vec<usize>, f64)> {
    let mut solutions: Vec<(Vec<usize>, f64)> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for r in 0..RESTARTS_PER_K {
            let mut rng = substream_rng(seed, &format!("codesign/kmeans/k{k}/r{r}"));
            let centers = kmeanspp_init(points, k, &mut rng);
            let (assign, w) = lloyd(points, centers);
            if best.as_ref().map_or(true, |(_, bw)| w < *bw) {
                best = Some((assign, w));
            }
        }
        if k >= 2 {
            let (prev_assign, _) = &solutions[k - 2];
            let mut centers = centers_from(points, prev_assign, k - 1);
            let split = points
                .iter()
                .enumerate()
                .max_by(|(i, p), (j, q)| {
                    sq_dist(p, &centers[prev_assign[*i]])
                        .total_cmp(&sq_dist(q, &centers[prev_assign[*j]]))
                })
                .map(|(i, _)| i)
                .expect("points is nonempty");
            centers.push(points[split].clone());
            let (assign, w) = lloyd(points, centers);
            if best.as_ref().map_or(true, |(_, bw)| w < *bw) {
                best = Some((assign, w));
            }
        }
        solutions.push(best.expect("restarts always produce a candidate"));
    }
    solutions
}

/// Elbow: the k whose WCSS second difference is largest, i.e. where the
/// slope of the curve flattens the most. Falls back to k_max when the
/// curve is too short for second differences.
fn elbow(curve: &[f64]) -> usize {
    let k_max = curve.len();
    if k_max < 3 {
        return k_max;
    }
    let mut best_k = 2;
    let mut best_dd = f64::NEG_INFINITY;
    for k in 2..k_max {
        // Indices are 1-based ks, so curve[k-1] is WCSS at k.
        let dd = curve[k - 2] - 2.0 * curve[k - 1] + curve[k];
        if dd > best_dd {
            best_dd = dd;
            best_k = k;
        }
    }
    best_k
}

/// Relabels clusters by first appearance so output is stable.
fn canonical_plan(
    a: &AffinityMatrix,
    assign: &[usize],
    k: usize,
    curve: Vec<WcssPoint>,
) -> CoreTypePlan {
    let mut relabel: Vec<Option<usize>> = vec![None; k];
    let mut next = 0;
    let mut assignment = BTreeMap::new();
    for (id, &c) in a.ids.iter().zip(assign) {
        let label = *relabel[c].get_or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        assignment.insert(id.clone(), label);
    }
    CoreTypePlan { k: next, assignment, wcss_curve: curve }
}

fn check_clusterable(a: &AffinityMatrix, k_max: usize) -> Result<()> {
    if a.n() == 0 {
        return Err(ForgeError::InfeasibleSpec(
            "affinity matrix has no unit instances".into(),
        ));
    }
    if k_max < 1 || k_max > a.n() {
        return Err(ForgeError::InfeasibleSpec(format!(
            "k_max {k_max} outside 1..={} unit instances",
            a.n()
        )));
    }
    Ok(())
}

fn rows_identical(a: &AffinityMatrix) -> bool {
    a.bytes.windows(2).all(|w| w[0] == w[1])
}

/// Clusters unit instances by their affinity rows, k selected by the
/// elbow of the WCSS curve over k = 1..=k_max. Identical rows carry no
/// structure and collapse to a single core type. Deterministic per seed.
pub fn cluster_cores(a: &AffinityMatrix, k_max: usize, seed: u64) -> Result<CoreTypePlan> {
    check_clusterable(a, k_max)?;
    if rows_identical(a) {
        let curve = (1..=k_max).map(|k| WcssPoint { k, wcss: 0.0 }).collect();
        return Ok(canonical_plan(a, &vec![0; a.n()], 1, curve));
    }
    let solutions = run_ladder(&a.bytes, k_max, seed);
    let curve: Vec<f64> = solutions.iter().map(|(_, w)| *w).collect();
    let k = elbow(&curve);
    let points = curve
        .iter()
        .enumerate()
        .map(|(i, &w)| WcssPoint { k: i + 1, wcss: w })
        .collect();
    Ok(canonical_plan(a, &solutions[k - 1].0, k, points))
}

/// As [`cluster_cores`] with the core-type count fixed by the caller;
/// the WCSS curve up to that k is still reported.
pub fn cluster_cores_with_k(a: &AffinityMatrix, k: usize, seed: u64) -> Result<CoreTypePlan> {
    check_clusterable(a, k)?;
    if rows_identical(a) && k == 1 {
        return Ok(canonical_plan(a, &vec![0; a.n()], 1, vec![WcssPoint { k: 1, wcss: 0.0 }]));
    }
    let solutions = run_ladder(&a.bytes, k, seed);
    let points = solutions
        .iter()
        .enumerate()
        .map(|(i, (_, w))| WcssPoint { k: i + 1, wcss: *w })
        .collect();
    Ok(canonical_plan(a, &solutions[k - 1].0, k, points))
}

/// Symmetric inter-core byte matrix plus per-core internal traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterCoreMatrix {
    pub bytes: Vec<Vec<u64>>,
    /// Traffic between units of the same core type, kept off the matrix.
    pub intra: Vec<u64>,
}

impl InterCoreMatrix {
    pub fn n(&self) -> usize {
        self.bytes.len()
    }

    /// Off-diagonal bytes over unordered pairs plus intra-core bytes:
    /// together these account for every edge byte once.
    pub fn total_bytes(&self) -> u64 {
        let mut t: u64 = self.intra.iter().sum();
        for p in 0..self.n() {
            for q in (p + 1)..self.n() {
                t += self.bytes[p][q];
            }
        }
        t
    }
}

/// Aggregates edge bytes by the core types of their endpoints. Edges
/// within one core type are internal traffic; crossings accumulate
/// symmetrically.
pub fn inter_core_matrix(g: &HyperGraph, plan: &CoreTypePlan) -> Result<InterCoreMatrix> {
    let k = plan.k;
    let mut bytes = vec![vec![0u64; k]; k];
    let mut intra = vec![0u64; k];
    let core_of = |id: &str| -> Result<usize> {
        let &c = plan
            .assignment
            .get(id)
            .ok_or_else(|| ForgeError::CoverageMismatch(format!("vertex `{id}` has no core type")))?;
        if c >= k {
            return Err(ForgeError::CoverageMismatch(format!(
                "vertex `{id}` assigned to core {c} with only {k} core types"
            )));
        }
        Ok(c)
    };
    for e in g.edges() {
        let (c1, c2) = (core_of(&e.src)?, core_of(&e.dst)?);
        if c1 == c2 {
            intra[c1] += e.bytes;
        } else {
            bytes[c1][c2] += e.bytes;
            bytes[c2][c1] += e.bytes;
        }
    }
    Ok(InterCoreMatrix { bytes, intra })
}

/// Greedy dense-block partitioning. Blocks grow from the heaviest
/// remaining pair; each step absorbs the core adding the most bytes to
/// the block, as long as the block's density (mean over the full
/// submatrix, diagonal included) stays at or above `density_thresh`
/// times the global mean nonzero entry. Every core ends up in exactly
/// one partition; cores that never join a block become singletons.
pub fn partition_matrix(m: &InterCoreMatrix, density_thresh: f64) -> Vec<Vec<usize>> {
    let n = m.n();
    let mut pair_sum = 0.0;
    let mut pair_count = 0u64;
    for p in 0..n {
        for q in (p + 1)..n {
            if m.bytes[p][q] > 0 {
                pair_sum += m.bytes[p][q] as f64;
                pair_count += 1;
            }
        }
    }
    let mut partitions: Vec<Vec<usize>> = Vec::new();
    let mut remaining: Vec<usize> = (0..n).collect();
    if pair_count > 0 {
        let mean_nonzero = pair_sum / pair_count as f64;
        let gate = density_thresh * mean_nonzero;
        loop {
            // Heaviest remaining pair seeds a block unconditionally.
            let mut seed: Option<(u64, usize, usize)> = None;
            for (i, &p) in remaining.iter().enumerate() {
                for &q in &remaining[(i + 1)..] {
                    let w = m.bytes[p][q];
                    if w > 0 && seed.map_or(true, |(bw, ..)| w > bw) {
                        seed = Some((w, p, q));
                    }
                }
            }
            let Some((_, p, q)) = seed else {
                break;
            };
            let mut block = vec![p, q];
            let mut block_pairs = m.bytes[p][q] as f64;
            loop {
                let candidate = remaining
                    .iter()
                    .filter(|c| !block.contains(c))
                    .map(|&c| {
                        let added: u64 = block.iter().map(|&x| m.bytes[c][x]).sum();
                        (added, c)
                    })
                    .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
                let Some((added, c)) = candidate else {
                    break;
                };
                let grown = block_pairs + added as f64;
                let s = (block.len() + 1) as f64;
                let density = 2.0 * grown / (s * s);
                if density < gate {
                    break;
                }
                block.push(c);
                block_pairs = grown;
            }
            block.sort_unstable();
            remaining.retain(|x| !block.contains(x));
            partitions.push(block);
        }
    }
    for p in remaining {
        partitions.push(vec![p]);
    }
    partitions
}

/// One partition's mesh: switch count from total block bytes at `s`
/// bytes per switch, shaped near-square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionMesh {
    pub cores: Vec<usize>,
    pub bytes: u64,
    pub switches: u64,
    pub rows: u64,
    pub cols: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshPlan {
    pub switch_bytes: u64,
    pub partitions: Vec<PartitionMesh>,
}

/// Sizes each partition's mesh: b bytes through the block need
/// max(1, ceil(b / s)) switches.
pub fn size_mesh(
    partitions: &[Vec<usize>],
    m: &InterCoreMatrix,
    switch_bytes: u64,
) -> Result<MeshPlan> {
    if switch_bytes < 1 {
        return Err(ForgeError::InfeasibleSpec(
            "switch byte capacity must be >= 1".into(),
        ));
    }
    let n = m.n();
    let mut seen = vec![false; n];
    for part in partitions {
        for &c in part {
            if c >= n {
                return Err(ForgeError::CoverageMismatch(format!(
                    "partition names core {c} outside 0..{n}"
                )));
            }
            if seen[c] {
                return Err(ForgeError::CoverageMismatch(format!(
                    "core {c} appears in two partitions"
                )));
            }
            seen[c] = true;
        }
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(ForgeError::CoverageMismatch(format!(
            "core {c} belongs to no partition"
        )));
    }
    let mut out = Vec::with_capacity(partitions.len());
    for part in partitions {
        let mut b = 0u64;
        for (i, &p) in part.iter().enumerate() {
            for &q in &part[(i + 1)..] {
                b += m.bytes[p][q];
            }
        }
        let switches = if b == 0 { 1 } else { b.div_ceil(switch_bytes) };
        let rows = (switches as f64).sqrt().floor() as u64;
        let rows = rows.max(1);
        let cols = switches.div_ceil(rows);
        out.push(PartitionMesh {
            cores: part.clone(),
            bytes: b,
            switches,
            rows,
            cols,
        });
    }
    Ok(MeshPlan { switch_bytes, partitions: out })
}

/// Full co-design result for one graph: core types, inter-core traffic,
/// dense-block partitions, and per-partition mesh sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodesignPlan {
    pub core_types: CoreTypePlan,
    pub inter_core: InterCoreMatrix,
    pub partitions: Vec<Vec<usize>>,
    pub mesh: MeshPlan,
}

impl CodesignPlan {
    pub fn to_json_string(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("plan serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| ForgeError::SchemaMismatch(format!("codesign plan: {e}")))
    }
}

/// Runs the whole co-design chain on one graph. `k` fixes the core-type
/// count; otherwise the elbow picks it over 1..=k_max.
pub fn run_codesign(
    g: &HyperGraph,
    k_max: usize,
    k: Option<usize>,
    density_thresh: f64,
    switch_bytes: u64,
    seed: u64,
) -> Result<CodesignPlan> {
    let a = build_affinity(g);
    let core_types = match k {
        Some(k) => cluster_cores_with_k(&a, k, seed)?,
        None => cluster_cores(&a, k_max, seed)?,
    };
    let inter_core = inter_core_matrix(g, &core_types)?;
    let partitions = partition_matrix(&inter_core, density_thresh);
    let mesh = size_mesh(&partitions, &inter_core, switch_bytes)?;
    Ok(CodesignPlan { core_types, inter_core, partitions, mesh })
}
