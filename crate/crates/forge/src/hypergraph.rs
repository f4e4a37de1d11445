//! The leveled workload graph and its complexity quantification.
//!
//! Vertices are algorithm instances pinned to levels; edges carry dataset
//! bytes strictly forward across levels. The depth index of an edge is the
//! level gap it spans, and an edge's weight is `depth * bytes`. Vertex
//! complexity splits into an external part (the depth-weighted bytes
//! entering and leaving the vertex) and an internal part (the dataflow
//! fan-in or fan-out of the algorithm it hosts).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algobank::AlgoBank;
use crate::control_flow::ControlFlowVector;
use crate::error::{ForgeError, Result};

pub const DEFAULT_DEPTH_THRESH: u32 = 2;
pub const DEFAULT_BYTES_THRESH: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperVertex {
    pub id: String,
    pub level: u32,
    pub algo: String,
    pub size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperEdge {
    pub src: String,
    pub dst: String,
    pub bytes: u64,
}

/// Which internal dataflow count enters a vertex's complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InternalMode {
    FanIn,
    FanOut,
}

/// Depth/volume class of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityClass {
    /// Deep and large: `d >= d_thresh` and `bytes >= bytes_thresh`.
    Intense,
    /// Deep but small.
    MediumDeepSmall,
    /// Shallow but large.
    MediumShallowLarge,
    /// Shallow and small.
    Low,
}

/// Complexity record of one vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexComplexity {
    pub id: String,
    pub level: u32,
    pub cef_in: f64,
    pub cef_out: f64,
    pub ce: f64,
    pub ci: f64,
    pub c_total: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    num_levels: u32,
    vertices: Vec<HyperVertex>,
    edges: Vec<HyperEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    control: Vec<ControlFlowVector>,
}

/// Validated, canonically ordered workload graph.
///
/// Vertices are kept sorted by (level, id) and edges by (src, dst) in that
/// vertex order, so serialization is byte-stable regardless of input
/// order. Optional control vectors ride along for branch vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct HyperGraph {
    num_levels: u32,
    vertices: Vec<HyperVertex>,
    edges: Vec<HyperEdge>,
    control: Vec<ControlFlowVector>,
    vidx: HashMap<String, usize>,
    out_idx: HashMap<String, Vec<usize>>,
    in_idx: HashMap<String, Vec<usize>>,
}

impl TryFrom<GraphDoc> for HyperGraph {
    type Error = ForgeError;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        HyperGraph::new(doc.num_levels, doc.vertices, doc.edges, doc.control)
    }
}

impl From<HyperGraph> for GraphDoc {
    fn from(g: HyperGraph) -> GraphDoc {
        GraphDoc {
            num_levels: g.num_levels,
            vertices: g.vertices,
            edges: g.edges,
            control: g.control,
        }
    }
}

impl HyperGraph {
    pub fn new(
        num_levels: u32,
        mut vertices: Vec<HyperVertex>,
        mut edges: Vec<HyperEdge>,
        mut control: Vec<ControlFlowVector>,
    ) -> Result<Self> {
        if num_levels < 1 {
            return Err(ForgeError::InvalidGraph("num_levels must be >= 1".into()));
        }
        vertices.sort_by(|a, b| (a.level, &a.id).cmp(&(b.level, &b.id)));

        let mut vidx = HashMap::with_capacity(vertices.len());
        let mut level_seen = vec![false; num_levels as usize];
        for (i, v) in vertices.iter().enumerate() {
            if v.id.is_empty() {
                return Err(ForgeError::InvalidGraph("empty vertex id".into()));
            }
            if v.size < 1 {
                return Err(ForgeError::InvalidGraph(format!(
                    "vertex `{}` has size 0",
                    v.id
                )));
            }
            if v.level < 1 || v.level > num_levels {
                return Err(ForgeError::InvalidGraph(format!(
                    "vertex `{}` at level {} outside 1..={num_levels}",
                    v.id, v.level
                )));
            }
            if vidx.insert(v.id.clone(), i).is_some() {
                return Err(ForgeError::InvalidGraph(format!(
                    "duplicate vertex id `{}`",
                    v.id
                )));
            }
            level_seen[(v.level - 1) as usize] = true;
        }
        if let Some(l) = level_seen.iter().position(|s| !s) {
            return Err(ForgeError::InvalidGraph(format!(
                "level {} hosts no vertex",
                l + 1
            )));
        }

        let key_of = |id: &str| -> (u32, String) {
            let v = &vertices[vidx[id]];
            (v.level, v.id.clone())
        };
        for e in &edges {
            let (sl, dl) = match (vidx.get(&e.src), vidx.get(&e.dst)) {
                (Some(&s), Some(&d)) => (vertices[s].level, vertices[d].level),
                (None, _) => {
                    return Err(ForgeError::InvalidGraph(format!(
                        "edge source `{}` is not a vertex",
                        e.src
                    )))
                }
                (_, None) => {
                    return Err(ForgeError::InvalidGraph(format!(
                        "edge destination `{}` is not a vertex",
                        e.dst
                    )))
                }
            };
            if sl >= dl {
                return Err(ForgeError::InvalidGraph(format!(
                    "edge `{}` -> `{}` does not move strictly forward (levels {sl} -> {dl})",
                    e.src, e.dst
                )));
            }
            if e.bytes < 1 {
                return Err(ForgeError::InvalidGraph(format!(
                    "edge `{}` -> `{}` carries 0 bytes",
                    e.src, e.dst
                )));
            }
        }
        edges.sort_by(|a, b| {
            (key_of(&a.src), key_of(&a.dst), a.bytes).cmp(&(key_of(&b.src), key_of(&b.dst), b.bytes))
        });

        let mut out_idx: HashMap<String, Vec<usize>> = HashMap::new();
        let mut in_idx: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            out_idx.entry(e.src.clone()).or_default().push(i);
            in_idx.entry(e.dst.clone()).or_default().push(i);
        }

        control.sort_by_key(|c| key_of(&c.vertex));
        let g = HyperGraph {
            num_levels,
            vertices,
            edges,
            control,
            vidx,
            out_idx,
            in_idx,
        };
        for c in &g.control {
            c.validate()
                .map_err(|e| ForgeError::InvalidGraph(e.to_string()))?;
            let out = g.out_degree(&c.vertex).map_err(|_| {
                ForgeError::InvalidGraph(format!(
                    "control vector names unknown vertex `{}`",
                    c.vertex
                ))
            })?;
            if out != c.probs.len() {
                return Err(ForgeError::InvalidGraph(format!(
                    "control vector on `{}` has {} probabilities for {out} out-edges",
                    c.vertex,
                    c.probs.len()
                )));
            }
        }
        Ok(g)
    }

    pub fn num_levels(&self) -> u32 {
        self.num_levels
    }

    /// Vertices in canonical (level, id) order.
    pub fn vertices(&self) -> &[HyperVertex] {
        &self.vertices
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> &[HyperEdge] {
        &self.edges
    }

    pub fn control(&self) -> &[ControlFlowVector] {
        &self.control
    }

    pub fn vertex(&self, id: &str) -> Result<&HyperVertex> {
        self.vidx
            .get(id)
            .map(|&i| &self.vertices[i])
            .ok_or_else(|| ForgeError::NoSuchVertex(id.to_string()))
    }

    pub fn vertices_at_level(&self, level: u32) -> impl Iterator<Item = &HyperVertex> {
        self.vertices.iter().filter(move |v| v.level == level)
    }

    pub fn out_edges(&self, id: &str) -> Result<Vec<&HyperEdge>> {
        self.vertex(id)?;
        Ok(self
            .out_idx
            .get(id)
            .map(|ix| ix.iter().map(|&i| &self.edges[i]).collect())
            .unwrap_or_default())
    }

    pub fn in_edges(&self, id: &str) -> Result<Vec<&HyperEdge>> {
        self.vertex(id)?;
        Ok(self
            .in_idx
            .get(id)
            .map(|ix| ix.iter().map(|&i| &self.edges[i]).collect())
            .unwrap_or_default())
    }

    pub fn out_degree(&self, id: &str) -> Result<usize> {
        self.vertex(id)?;
        Ok(self.out_idx.get(id).map_or(0, Vec::len))
    }

    pub fn in_degree(&self, id: &str) -> Result<usize> {
        self.vertex(id)?;
        Ok(self.in_idx.get(id).map_or(0, Vec::len))
    }

    /// Depth index of the edge `src -> dst`: the level gap it spans.
    /// Errors when no such edge exists.
    pub fn depth_index(&self, src: &str, dst: &str) -> Result<u32> {
        let s = self.vertex(src)?;
        let d = self.vertex(dst)?;
        let has = self
            .out_idx
            .get(src)
            .map(|ix| ix.iter().any(|&i| self.edges[i].dst == dst))
            .unwrap_or(false);
        if !has {
            return Err(ForgeError::NoSuchEdge(src.to_string(), dst.to_string()));
        }
        Ok(d.level - s.level)
    }

    /// Weight of an edge: `depth_index * bytes`.
    pub fn edge_weight(&self, e: &HyperEdge) -> Result<f64> {
        let s = self.vertex(&e.src)?;
        let d = self.vertex(&e.dst)?;
        Ok((d.level - s.level) as f64 * e.bytes as f64)
    }

    /// External fan-in complexity: dot product of incoming dataset sizes
    /// with their depth indices.
    pub fn cef_in(&self, id: &str) -> Result<f64> {
        let level = self.vertex(id)?.level;
        let mut sum = 0.0;
        for e in self.in_edges(id)? {
            let d = level - self.vertex(&e.src)?.level;
            sum += d as f64 * e.bytes as f64;
        }
        Ok(sum)
    }

    /// External fan-out complexity: dot product of outgoing dataset sizes
    /// with their depth indices.
    pub fn cef_out(&self, id: &str) -> Result<f64> {
        let level = self.vertex(id)?.level;
        let mut sum = 0.0;
        for e in self.out_edges(id)? {
            let d = self.vertex(&e.dst)?.level - level;
            sum += d as f64 * e.bytes as f64;
        }
        Ok(sum)
    }

    /// Internal complexity of the vertex's algorithm at its size, under
    /// the chosen fan direction.
    pub fn internal_complexity(&self, bank: &AlgoBank, id: &str, mode: InternalMode) -> Result<f64> {
        let v = self.vertex(id)?;
        let (fi, fo) = bank.lookup(&v.algo)?.eval_internal(v.size)?;
        Ok(match mode {
            InternalMode::FanIn => fi as f64,
            InternalMode::FanOut => fo as f64,
        })
    }

    /// Full complexity record of one vertex: `ce = cef_in + cef_out`,
    /// `c_total = ce + ci`.
    pub fn vertex_complexity(
        &self,
        bank: &AlgoBank,
        id: &str,
        mode: InternalMode,
    ) -> Result<VertexComplexity> {
        let v = self.vertex(id)?;
        let cef_in = self.cef_in(id)?;
        let cef_out = self.cef_out(id)?;
        let ci = self.internal_complexity(bank, id, mode)?;
        let ce = cef_in + cef_out;
        Ok(VertexComplexity {
            id: v.id.clone(),
            level: v.level,
            cef_in,
            cef_out,
            ce,
            ci,
            c_total: ce + ci,
        })
    }

    /// Complexity records for every vertex in canonical (level, id) order.
    pub fn graph_complexity_vector(
        &self,
        bank: &AlgoBank,
        mode: InternalMode,
    ) -> Result<Vec<VertexComplexity>> {
        self.vertices
            .iter()
            .map(|v| self.vertex_complexity(bank, &v.id, mode))
            .collect()
    }

    /// Classifies an edge by depth and volume against the thresholds.
    pub fn classify_intensity(
        &self,
        e: &HyperEdge,
        d_thresh: u32,
        bytes_thresh: u64,
    ) -> Result<IntensityClass> {
        let s = self.vertex(&e.src)?;
        let d = self.vertex(&e.dst)?;
        let depth = d.level - s.level;
        Ok(match (depth >= d_thresh, e.bytes >= bytes_thresh) {
            (true, true) => IntensityClass::Intense,
            (true, false) => IntensityClass::MediumDeepSmall,
            (false, true) => IntensityClass::MediumShallowLarge,
            (false, false) => IntensityClass::Low,
        })
    }

    /// Order-invariant hash of the per-level degree sequence. Two graphs
    /// with different hashes are certainly non-isomorphic; clones use this
    /// to steer away from their sources.
    pub fn degree_level_hash(&self) -> u64 {
        let mut rows: Vec<(u32, usize, usize)> = self
            .vertices
            .iter()
            .map(|v| {
                (
                    v.level,
                    self.in_idx.get(&v.id).map_or(0, Vec::len),
                    self.out_idx.get(&v.id).map_or(0, Vec::len),
                )
            })
            .collect();
        rows.sort_unstable();
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.num_levels as u64);
        eat(self.vertices.len() as u64);
        for (l, i, o) in rows {
            eat(l as u64);
            eat(i as u64);
            eat(o as u64);
        }
        h
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| {
            // Validation failures surface through the same path; keep their
            // message but classify structural JSON problems as schema errors.
            let msg = e.to_string();
            if msg.contains("invalid graph:") {
                ForgeError::InvalidGraph(msg)
            } else {
                ForgeError::SchemaMismatch(format!("graph file: {msg}"))
            }
        })
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
