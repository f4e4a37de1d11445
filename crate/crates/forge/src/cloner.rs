//! Profile-matching graph synthesis: regenerate a workload graph whose
//! extracted profile matches a target table and matrix within tolerance,
//! while the graph itself differs structurally from the original.
//!
//! The synthesis is decomposable: each table row is hit by greedy
//! largest-fit allocation of unit instances (sizes found by inverting the
//! unit's cost model), then each matrix cell is packed independently into
//! a seeded number of edges whose dataset bytes sum to the cell's weight
//! divided by its fixed level gap. Tolerances are relative with an
//! absolute floor of one unit, so zero and near-zero targets stay
//! satisfiable.

use rand::Rng;

use crate::algobank::{AlgoBank, AlgoEntry};
use crate::dist::substream_rng;
use crate::error::{ForgeError, Result};
use crate::hypergraph::{HyperEdge, HyperGraph, HyperVertex};
use crate::profile::ComplexityProfile;

/// Re-seed attempts when the clone's shape hash collides with a source.
pub const CLONE_MAX_ATTEMPTS: usize = 8;

/// Most edges any single matrix cell is spread over.
const MAX_EDGES_PER_CELL: u64 = 8;

/// Hard ceiling on instances allocated to one level.
const MAX_INSTANCES_PER_LEVEL: usize = 65_536;

fn tol_abs(tol: f64, target: f64) -> f64 {
    (tol * target.abs()).max(1.0)
}

/// Largest cost not exceeding the budget, at the smallest size that
/// achieves it (cost models may plateau), if any size fits at all.
fn max_size_within(entry: &AlgoEntry, budget: f64) -> Option<(u64, f64)> {
    let cost = |n: u64| entry.eval_cost(n).expect("sizes >= 1 cannot fail");
    if cost(1) > budget {
        return None;
    }
    let mut hi = 2u64;
    while cost(hi) <= budget {
        if hi >= 1 << 32 {
            break;
        }
        hi *= 2;
    }
    let best = if cost(hi) <= budget {
        // Flat cost family: the doubling capped out with hi still fitting.
        hi
    } else {
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if cost(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    // Smallest size with the same cost.
    let target = cost(best);
    let (mut lo, mut hi) = (1u64, best);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if cost(mid) == target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some((lo, target))
}

/// Allocates unit instances whose costs sum to `target` within
/// `tol_abs(tol, target)`. Returns (algo id, size) pairs.
fn allocate_row(
    level: u32,
    target: f64,
    alfus: &[String],
    bank: &AlgoBank,
    tol: f64,
) -> Result<Vec<(String, u64)>> {
    if alfus.is_empty() {
        return Err(ForgeError::InfeasibleTarget(format!(
            "level {level} lists no units"
        )));
    }
    let entries: Vec<&AlgoEntry> = alfus
        .iter()
        .map(|id| bank.lookup(id))
        .collect::<Result<_>>()?;
    let budget_tol = tol_abs(tol, target);
    let mut picked: Vec<(String, u64)> = Vec::new();
    let mut spent = 0.0;

    // Coverage first: one smallest instance of every listed unit, so the
    // clone's level hosts exactly the units the profile names.
    for e in &entries {
        picked.push((e.id.clone(), 1));
        spent += e.eval_cost(1)?;
    }

    // Greedy largest-fit toward the exact value. Costs are whole numbers,
    // so any remainder below 1 is unimprovable by adding instances.
    loop {
        let remaining = target - spent;
        if remaining < 1.0 {
            break;
        }
        if picked.len() >= MAX_INSTANCES_PER_LEVEL {
            return Err(ForgeError::InfeasibleTarget(format!(
                "level {level} needs more than {MAX_INSTANCES_PER_LEVEL} instances"
            )));
        }
        let best = entries
            .iter()
            .filter_map(|e| max_size_within(e, remaining).map(|(n, c)| (e, n, c)))
            .max_by(|a, b| a.2.total_cmp(&b.2));
        match best {
            Some((e, n, c)) if c > 0.0 => {
                picked.push((e.id.clone(), n));
                spent += c;
            }
            // Every unit overshoots or contributes nothing: repair below.
            _ => break,
        }
    }

    // Repair: a leftover gap may shrink by one of two single moves,
    // adding the smallest overshooting instance or growing the last pick
    // by one size step. Keep whichever lands closest.
    let mut best: Option<(f64, Vec<(String, u64)>)> = None;
    let mut consider = |err: f64, alt: Vec<(String, u64)>| {
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, alt));
        }
    };
    consider((target - spent).abs(), picked.clone());
    for e in &entries {
        let c = e.eval_cost(1)?;
        if c > 0.0 {
            let mut alt = picked.clone();
            alt.push((e.id.clone(), 1));
            consider((target - spent - c).abs(), alt);
        }
    }
    if let Some((algo, n)) = picked.last().cloned() {
        let e = bank.lookup(&algo)?;
        let step = e.eval_cost(n + 1)? - e.eval_cost(n)?;
        let mut alt = picked.clone();
        *alt.last_mut().expect("picked is nonempty") = (algo, n + 1);
        consider((target - spent - step).abs(), alt);
    }
    let (err, alt) = best.expect("the unchanged allocation is always a candidate");
    if err > budget_tol {
        return Err(ForgeError::InfeasibleTarget(format!(
            "level {level}: best achievable complexity misses {target} by {err:.3}"
        )));
    }
    Ok(alt)
}

/// Synthesizes a graph matching `target` within `tol`, deterministic per
/// seed. The graph's per-level shape hash is not constrained; use
/// [`synthesize_clone_avoiding`] to steer away from known source shapes.
pub fn synthesize_clone(
    target: &ComplexityProfile,
    bank: &AlgoBank,
    seed: u64,
    tol: f64,
) -> Result<HyperGraph> {
    synthesize_clone_avoiding(target, bank, seed, tol, &[])
}

/// As [`synthesize_clone`], but re-seeds (bounded number of attempts)
/// while the result's degree/level shape hash appears in `avoid`. The
/// last attempt is returned even on persistent collision, which for
/// graphs this small only happens when the target admits essentially one
/// shape.
pub fn synthesize_clone_avoiding(
    target: &ComplexityProfile,
    bank: &AlgoBank,
    seed: u64,
    tol: f64,
    avoid: &[u64],
) -> Result<HyperGraph> {
    target.validate()?;
    if !(0.0..1.0).contains(&tol) {
        return Err(ForgeError::InfeasibleTarget(format!(
            "tolerance {tol} outside [0, 1)"
        )));
    }
    let l = target.num_levels() as usize;
    for i in 1..=l {
        for j in 1..=i {
            if target.cell(i as u32, j as u32) != 0.0 {
                return Err(ForgeError::InfeasibleTarget(format!(
                    "matrix cell ({i}, {j}) is not strictly above the diagonal: \
                     dataflow only moves to deeper levels"
                )));
            }
        }
    }

    let mut last = None;
    for attempt in 0..CLONE_MAX_ATTEMPTS {
        let eff_seed = seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let g = synthesize_once(target, bank, eff_seed, tol)?;
        if !avoid.contains(&g.degree_level_hash()) {
            return Ok(g);
        }
        last = Some(g);
    }
    Ok(last.expect("at least one attempt ran"))
}

fn synthesize_once(
    target: &ComplexityProfile,
    bank: &AlgoBank,
    seed: u64,
    tol: f64,
) -> Result<HyperGraph> {
    let mut rng_count = substream_rng(seed, "clone/edge_count");
    let mut rng_ep = substream_rng(seed, "clone/endpoints");

    let mut vertices: Vec<HyperVertex> = Vec::new();
    let mut per_level_ids: Vec<Vec<String>> = Vec::new();
    for row in &target.computation_table {
        let picked = allocate_row(row.level, row.complexity, &row.alfus, bank, tol)?;
        let mut ids = Vec::with_capacity(picked.len());
        for (k, (algo, size)) in picked.into_iter().enumerate() {
            let id = format!("c{:03}_{k:04}", row.level);
            ids.push(id.clone());
            vertices.push(HyperVertex { id, level: row.level, algo, size });
        }
        per_level_ids.push(ids);
    }

    let l = target.num_levels();
    let mut edges: Vec<HyperEdge> = Vec::new();
    for i in 1..=l {
        for j in (i + 1)..=l {
            let w = target.cell(i, j);
            if w == 0.0 {
                continue;
            }
            let d = (j - i) as f64;
            let q = (w / d).round();
            let err = (q * d - w).abs();
            if err > tol_abs(tol, w) {
                return Err(ForgeError::InfeasibleTarget(format!(
                    "matrix cell ({i}, {j}): weight {w} is not reachable with \
                     integer dataset bytes at gap {d} (off by {err:.3})"
                )));
            }
            let q = q as u64;
            if q == 0 {
                // The cell is closer to empty than to any 1-byte edge.
                continue;
            }
            let m = rng_count.gen_range(1..=q.min(MAX_EDGES_PER_CELL));
            let base = q / m;
            let rem = q % m;
            let srcs = &per_level_ids[(i - 1) as usize];
            let dsts = &per_level_ids[(j - 1) as usize];
            for e in 0..m {
                let bytes = if e == m - 1 { base + rem } else { base };
                edges.push(HyperEdge {
                    src: srcs[rng_ep.gen_range(0..srcs.len())].clone(),
                    dst: dsts[rng_ep.gen_range(0..dsts.len())].clone(),
                    bytes,
                });
            }
        }
    }

    HyperGraph::new(l, vertices, edges, Vec::new())
}
