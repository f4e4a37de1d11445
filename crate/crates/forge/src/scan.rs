//! Scanner for WPPL-lite, a minimal assembly-like program format, plus
//! per-unit statistics and full profile extraction.
//!
//! Grammar (one statement per line, `#` starts a comment):
//!
//! ```text
//! line      := [ statement ] [ '#' comment ]
//! statement := input | op | branch
//! input     := 'input' name [ suffix ]
//! op        := name '=' name '(' [ name (',' name)* ] ')' [ suffix ]
//! branch    := 'branch' '(' name ')' '{' 'probs' ':' number (',' number)*
//!              '}' '->' name (',' name)+
//! suffix    := '[' 'bytes' '=' integer ']'
//! name      := [A-Za-z_][A-Za-z0-9_]*
//! number    := decimal literal
//! ```
//!
//! Each op statement becomes one vertex; inputs are external and never
//! appear in the graph. Def-use references become edges carrying the
//! producer's dataset bytes: the `[bytes=N]` suffix when declared,
//! otherwise the producing unit's output bytes at its size. A declared
//! suffix also fixes the producer's size as the closest size under the
//! unit's output-bytes model (ties to the smaller size); undeclared
//! statements run at size 1.
//!
//! A branch statement models divergent control: it becomes a scalar
//! vertex fed by its condition's producer, with one out-edge per target
//! and the written probabilities as the vertex's control vector. Targets
//! are the only names that may be referenced before their definition,
//! and must appear after the branch statement (control moves forward).

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::algobank::AlgoBank;
use crate::control_flow::{ControlFlowVector, PROB_SUM_TOL};
use crate::error::{ForgeError, Result};
use crate::hypergraph::{HyperEdge, HyperGraph, HyperVertex};
use crate::profile::{profile, ComplexityProfile, UnitStat};

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(text: &str, line: usize) -> Self {
        Cursor { chars: text.chars().collect(), pos: 0, line }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, msg: impl Into<String>) -> ForgeError {
        ForgeError::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.err(format!("expected `{want}`, found end of line"))),
        }
    }

    fn expect_str(&mut self, want: &str) -> Result<()> {
        self.skip_ws();
        for w in want.chars() {
            match self.peek() {
                Some(c) if c == w => {
                    self.pos += 1;
                }
                _ => return Err(self.err(format!("expected `{want}`"))),
            }
        }
        Ok(())
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected identifier")),
        }
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || ".eE+-".contains(c)) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected number"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>().map_err(|_| {
            self.pos = start;
            self.err(format!("`{text}` is not a number"))
        })
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<u64>().map_err(|_| {
            self.pos = start;
            self.err(format!("`{text}` does not fit an unsigned 64-bit integer"))
        })
    }

    /// Optional `[bytes=N]` suffix.
    fn bytes_suffix(&mut self) -> Result<Option<u64>> {
        self.skip_ws();
        if self.peek() != Some('[') {
            return Ok(None);
        }
        self.expect('[')?;
        self.expect_str("bytes")?;
        self.expect('=')?;
        let col_before = self.col();
        let n = self.integer()?;
        if n == 0 {
            return Err(ForgeError::Syntax {
                line: self.line,
                col: col_before,
                msg: "bytes must be >= 1".into(),
            });
        }
        self.expect(']')?;
        Ok(Some(n))
    }

    fn end_of_statement(&mut self) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.err(format!("unexpected `{c}` after statement"))),
        }
    }
}

struct OpStmt {
    name: String,
    algo: String,
    args: Vec<String>,
    declared: Option<u64>,
}

struct BranchStmt {
    line: usize,
    cond: String,
    probs: Vec<f64>,
    targets: Vec<String>,
}

enum Stmt {
    Op(OpStmt),
    Branch(BranchStmt),
}

/// Size whose output bytes under `entry`'s model are closest to `bytes`
/// (ties to the smaller size).
fn invert_output_bytes(bank: &AlgoBank, algo: &str, bytes: u64) -> u64 {
    let entry = bank.lookup(algo).expect("caller checked the id");
    let ob = |n: u64| entry.output_bytes(n).expect("sizes >= 1 cannot fail");
    if ob(1) >= bytes {
        return 1;
    }
    let mut hi = 2u64;
    while ob(hi) < bytes {
        if hi >= 1 << 40 {
            // Flat output model (scalar units): every size is equally
            // distant, so the smallest wins.
            return 1;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ob(mid) < bytes {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if bytes - ob(lo) <= ob(hi) - bytes {
        lo
    } else {
        hi
    }
}

/// Parses WPPL-lite text into a workload graph: one vertex per operation
/// statement, levels by longest def-use path, edges carrying producer
/// bytes, branch statements as control vertices.
pub fn scan_program(text: &str, bank: &AlgoBank) -> Result<HyperGraph> {
    let mut stmts: Vec<Stmt> = Vec::new();
    let mut inputs: HashMap<String, usize> = HashMap::new();
    // name -> statement index in `stmts`
    let mut defs: HashMap<String, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if body.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(body, line_no);
        let head_col = {
            cur.skip_ws();
            cur.col()
        };
        let head = cur.ident()?;
        let dup = |name: &str| ForgeError::Syntax {
            line: line_no,
            col: head_col,
            msg: format!("`{name}` is already defined"),
        };
        match head.as_str() {
            "input" => {
                let name = cur.ident()?;
                cur.bytes_suffix()?;
                cur.end_of_statement()?;
                if inputs.contains_key(&name) || defs.contains_key(&name) {
                    return Err(dup(&name));
                }
                inputs.insert(name, line_no);
            }
            "branch" => {
                cur.expect('(')?;
                let cond_col = {
                    cur.skip_ws();
                    cur.col()
                };
                let cond = cur.ident()?;
                cur.expect(')')?;
                if !inputs.contains_key(&cond) && !defs.contains_key(&cond) {
                    let _ = cond_col;
                    return Err(ForgeError::UseBeforeDef { line: line_no, name: cond });
                }
                let probs_col = {
                    cur.skip_ws();
                    cur.col()
                };
                cur.expect('{')?;
                cur.expect_str("probs")?;
                cur.expect(':')?;
                let mut probs = vec![cur.number()?];
                loop {
                    cur.skip_ws();
                    if cur.peek() == Some(',') {
                        cur.bump();
                        probs.push(cur.number()?);
                    } else {
                        break;
                    }
                }
                cur.expect('}')?;
                cur.expect_str("->")?;
                let mut targets = vec![cur.ident()?];
                loop {
                    cur.skip_ws();
                    if cur.peek() == Some(',') {
                        cur.bump();
                        targets.push(cur.ident()?);
                    } else {
                        break;
                    }
                }
                cur.end_of_statement()?;
                let prob_err = |msg: String| ForgeError::Syntax {
                    line: line_no,
                    col: probs_col,
                    msg,
                };
                if targets.len() < 2 {
                    return Err(prob_err("a branch needs at least 2 targets".into()));
                }
                if probs.len() != targets.len() {
                    return Err(prob_err(format!(
                        "{} probabilities for {} targets",
                        probs.len(),
                        targets.len()
                    )));
                }
                if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(prob_err("probabilities must lie in [0, 1]".into()));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > PROB_SUM_TOL {
                    return Err(prob_err(format!("probabilities sum to {sum}, not 1")));
                }
                stmts.push(Stmt::Branch(BranchStmt { line: line_no, cond, probs, targets }));
            }
            _ => {
                let name = head;
                cur.expect('=')?;
                let algo = cur.ident()?;
                bank.lookup(&algo)?;
                cur.expect('(')?;
                let mut args = Vec::new();
                cur.skip_ws();
                if cur.peek() != Some(')') {
                    args.push(cur.ident()?);
                    loop {
                        cur.skip_ws();
                        match cur.peek() {
                            Some(',') => {
                                cur.bump();
                                args.push(cur.ident()?);
                            }
                            Some(')') => break,
                            _ => return Err(cur.err("expected `,` or `)`")),
                        }
                    }
                }
                cur.expect(')')?;
                let declared = cur.bytes_suffix()?;
                cur.end_of_statement()?;
                for a in &args {
                    if !inputs.contains_key(a) && !defs.contains_key(a) {
                        return Err(ForgeError::UseBeforeDef { line: line_no, name: a.clone() });
                    }
                }
                if inputs.contains_key(&name) || defs.contains_key(&name) {
                    return Err(dup(&name));
                }
                defs.insert(name.clone(), stmts.len());
                stmts.push(Stmt::Op(OpStmt { name, algo, args, declared }));
            }
        }
    }

    if defs.is_empty() {
        return Err(ForgeError::InvalidGraph(
            "program defines no operation statements".into(),
        ));
    }

    // Branch targets resolve against the whole program but must point
    // strictly forward, which keeps statement order a topological order.
    for (si, s) in stmts.iter().enumerate() {
        if let Stmt::Branch(b) = s {
            for t in &b.targets {
                match defs.get(t) {
                    None if inputs.contains_key(t) => {
                        return Err(ForgeError::Syntax {
                            line: b.line,
                            col: 1,
                            msg: format!("branch target `{t}` is an input, not an operation"),
                        })
                    }
                    None => {
                        return Err(ForgeError::UseBeforeDef {
                            line: b.line,
                            name: t.clone(),
                        })
                    }
                    Some(&ti) if ti <= si => {
                        return Err(ForgeError::Syntax {
                            line: b.line,
                            col: 1,
                            msg: format!(
                                "branch target `{t}` must follow the branch statement"
                            ),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }

    // Branch vertices are scalar control points.
    bank.lookup("gp_op")?;
    let branch_bytes = bank.lookup("gp_op")?.output_bytes(1)?;

    // Producer bytes and sizes, fixed per defining statement.
    let mut size_of: HashMap<&str, u64> = HashMap::new();
    let mut bytes_of: HashMap<&str, u64> = HashMap::new();
    for s in &stmts {
        if let Stmt::Op(op) = s {
            let size = match op.declared {
                Some(b) => invert_output_bytes(bank, &op.algo, b),
                None => 1,
            };
            let out = match op.declared {
                Some(b) => b,
                None => bank.lookup(&op.algo)?.output_bytes(size)?,
            };
            size_of.insert(&op.name, size);
            bytes_of.insert(&op.name, out);
        }
    }

    // Levels in statement order: longest path from the external inputs.
    // Producers of an op are its op-defined args and any branches that
    // target it; a branch's producer is its condition's def, if any.
    let mut branches_into: HashMap<&str, Vec<usize>> = HashMap::new();
    for (si, s) in stmts.iter().enumerate() {
        if let Stmt::Branch(b) = s {
            for t in &b.targets {
                branches_into.entry(t).or_default().push(si);
            }
        }
    }
    let mut level: Vec<u32> = vec![0; stmts.len()];
    for (si, s) in stmts.iter().enumerate() {
        let mut max_pred = 0;
        match s {
            Stmt::Op(op) => {
                for a in &op.args {
                    if let Some(&pi) = defs.get(a) {
                        max_pred = max_pred.max(level[pi]);
                    }
                }
                for &bi in branches_into.get(op.name.as_str()).into_iter().flatten() {
                    max_pred = max_pred.max(level[bi]);
                }
            }
            Stmt::Branch(b) => {
                if let Some(&pi) = defs.get(&b.cond) {
                    max_pred = max_pred.max(level[pi]);
                }
            }
        }
        level[si] = max_pred + 1;
    }

    let branch_id = |b: &BranchStmt| format!("branch@{}", b.line);
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut control = Vec::new();
    for (si, s) in stmts.iter().enumerate() {
        match s {
            Stmt::Op(op) => {
                vertices.push(HyperVertex {
                    id: op.name.clone(),
                    level: level[si],
                    algo: op.algo.clone(),
                    size: size_of[op.name.as_str()],
                });
                for a in &op.args {
                    if defs.contains_key(a) {
                        edges.push(HyperEdge {
                            src: a.clone(),
                            dst: op.name.clone(),
                            bytes: bytes_of[a.as_str()],
                        });
                    }
                }
            }
            Stmt::Branch(b) => {
                let id = branch_id(b);
                vertices.push(HyperVertex {
                    id: id.clone(),
                    level: level[si],
                    algo: "gp_op".to_string(),
                    size: 1,
                });
                if defs.contains_key(&b.cond) {
                    edges.push(HyperEdge {
                        src: b.cond.clone(),
                        dst: id.clone(),
                        bytes: bytes_of[b.cond.as_str()],
                    });
                }
                for t in &b.targets {
                    edges.push(HyperEdge {
                        src: id.clone(),
                        dst: t.clone(),
                        bytes: branch_bytes,
                    });
                }
                // Probabilities were written in target order; the vector
                // is stored in the canonical (level, id) edge order.
                let mut order: Vec<usize> = (0..b.targets.len()).collect();
                order.sort_by_key(|&i| {
                    let t = &b.targets[i];
                    (level[defs[t.as_str()]], t.clone())
                });
                let probs = order.iter().map(|&i| b.probs[i]).collect();
                control.push(ControlFlowVector { vertex: id, probs });
            }
        }
    }

    let num_levels = level.iter().copied().max().unwrap_or(1);
    HyperGraph::new(num_levels, vertices, edges, control)
}

/// Mean and population variance of each unit's per-level instance count,
/// over all levels (a level without the unit counts as 0).
pub fn unit_statistics(g: &HyperGraph) -> BTreeMap<String, UnitStat> {
    let l = g.num_levels() as usize;
    let mut counts: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for v in g.vertices() {
        counts.entry(&v.algo).or_insert_with(|| vec![0; l])[(v.level - 1) as usize] += 1;
    }
    counts
        .into_iter()
        .map(|(algo, per_level)| {
            let mean = per_level.iter().sum::<u64>() as f64 / l as f64;
            let variance = per_level
                .iter()
                .map(|&c| {
                    let d = c as f64 - mean;
                    d * d
                })
                .sum::<f64>()
                / l as f64;
            (algo.to_string(), UnitStat { mean, variance })
        })
        .collect()
}

/// Full profile: computation table, communication matrix, and per-unit
/// statistics. The result carries level aggregates only; the graph's
/// vertex identities and wiring cannot be reconstructed from it.
pub fn extract_profile(g: &HyperGraph, bank: &AlgoBank) -> Result<ComplexityProfile> {
    let mut p = profile(g, bank)?;
    p.unit_stats = Some(unit_statistics(g));
    Ok(p)
}
