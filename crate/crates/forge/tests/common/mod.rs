//! Builders shared by the integration test suites.
// Each test binary compiles this module on its own, so helpers used by
// only one suite look dead to the others.
#![allow(dead_code)]

use forge::hypergraph::{HyperEdge, HyperGraph, HyperVertex};
use rand::Rng;

pub fn vertex(id: &str, level: u32, algo: &str, size: u64) -> HyperVertex {
    HyperVertex { id: id.into(), level, algo: algo.into(), size }
}

pub fn edge(src: &str, dst: &str, bytes: u64) -> HyperEdge {
    HyperEdge { src: src.into(), dst: dst.into(), bytes }
}

/// Random leveled DAG with up to `max_vertices` vertices. Every edge
/// points strictly forward; vertices all use unit-size gp_op so any
/// bank accepts the graph.
pub fn fuzz_graph<R: Rng>(rng: &mut R, max_vertices: usize) -> HyperGraph {
    let num_levels = rng.gen_range(1..=6u32);
    let mut vertices = Vec::new();
    let mut per_level: Vec<Vec<String>> = vec![Vec::new(); num_levels as usize];
    for level in 1..=num_levels {
        let count = rng.gen_range(1..=4.max(max_vertices / num_levels as usize));
        for k in 0..count {
            // Keep the first vertex of every level so no level is empty,
            // at the price of overshooting max_vertices by < num_levels.
            if k > 0 && vertices.len() >= max_vertices {
                break;
            }
            let id = format!("f{level:02}_{k:03}");
            per_level[level as usize - 1].push(id.clone());
            vertices.push(vertex(&id, level, "gp_op", 1 + rng.gen_range(0..8)));
        }
    }
    let mut edges = Vec::new();
    for dst_level in 2..=num_levels as usize {
        for dst in &per_level[dst_level - 1] {
            let fan_in = rng.gen_range(0..=3);
            for _ in 0..fan_in {
                let src_level = rng.gen_range(1..dst_level);
                let pool = &per_level[src_level - 1];
                if pool.is_empty() {
                    continue;
                }
                let src = &pool[rng.gen_range(0..pool.len())];
                edges.push(edge(src, dst, rng.gen_range(1..=10_000)));
            }
        }
    }
    HyperGraph::new(num_levels, vertices, edges, vec![]).expect("fuzz graph is valid")
}

/// Five-level graph whose levels host exactly the case-study unit sets
/// {matmul}, {matadd}, {mattrans}, {matadd2, matmul2}, {matinv}.
/// Edge bytes are chosen so the extracted communication matrix carries
/// the reference upper-triangular weights at depth-divisible cells.
pub fn case_study_graph() -> HyperGraph {
    let vertices = vec![
        vertex("mm1", 1, "matmul", 4),
        vertex("ad2", 2, "matadd", 6),
        vertex("tr3", 3, "mattrans", 8),
        vertex("ad4", 4, "matadd2", 5),
        vertex("mm4", 4, "matmul2", 3),
        vertex("inv5", 5, "matinv", 4),
    ];
    let edges = vec![
        // cell (1,2): depth 1, weight 240
        edge("mm1", "ad2", 240),
        // cell (1,3): depth 2, weight 560
        edge("mm1", "tr3", 280),
        // cell (1,4): depth 3, weight 456
        edge("mm1", "ad4", 152),
        // cell (1,5): depth 4, weight 20
        edge("mm1", "inv5", 5),
        // cell (2,3): depth 1, weight 256
        edge("ad2", "tr3", 256),
        // cell (2,4): depth 2, weight 46 (closest even-stepped value to
        // the reference 45, which no integer byte count reaches)
        edge("ad2", "mm4", 23),
        // cell (3,4): depth 1, weight 500
        edge("tr3", "mm4", 500),
    ];
    HyperGraph::new(5, vertices, edges, vec![]).expect("case-study graph is valid")
}

/// Naive O(N^2) LRU stack oracle for reuse distances: returns
/// (finite histogram, cold count).
pub fn naive_reuse_histogram(
    addresses: &[u64],
    block_words: u64,
) -> (std::collections::BTreeMap<u64, u64>, u64) {
    let mut stack: Vec<u64> = Vec::new();
    let mut finite = std::collections::BTreeMap::new();
    let mut cold = 0u64;
    for &a in addresses {
        let block = a / block_words;
        match stack.iter().position(|&b| b == block) {
            Some(pos) => {
                *finite.entry(pos as u64).or_insert(0) += 1;
                stack.remove(pos);
                stack.insert(0, block);
            }
            None => {
                cold += 1;
                stack.insert(0, block);
            }
        }
    }
    (finite, cold)
}
