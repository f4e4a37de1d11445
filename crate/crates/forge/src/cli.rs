//! Command-line front end: file-to-file subcommands over the library,
//! each emitting a run manifest with content hashes so outputs are
//! auditable and byte-reproducible per seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::builder::ArgPredicate;
use clap::{ArgGroup, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algobank::AlgoBank;
use crate::cloner::synthesize_clone;
use crate::codesign::{run_codesign, CodesignPlan, CoreTypePlan, WcssPoint};
use crate::error::{ForgeError, Result};
use crate::generator::{generate, verify_against_spec, WorkloadSpec, DEFAULT_CONFORMANCE_TOL};
use crate::hypergraph::{HyperGraph, DEFAULT_BYTES_THRESH, DEFAULT_DEPTH_THRESH};
use crate::locality::{generate_trace, reuse_distance_histogram, AddressTrace};
use crate::profile::{profile, ComplexityProfile};
use crate::report::{
    complexity_histogram, intensity_counts, reuse_summary, write_csv, write_csv_bundle,
    ReportBundle,
};
use crate::scan::{extract_profile, scan_program};

/// Environment variable naming a JSON file that replaces the built-in
/// algorithm bank for every subcommand.
pub const ALGOBANK_ENV: &str = "FORGE_ALGOBANK";

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Synthesize, quantify, clone, and co-design graph-shaped workloads"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_seed_range(s: &str) -> std::result::Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| "expected an inclusive range like 1..8".to_string())?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: u64 = lo.trim().parse().map_err(|e| format!("range start: {e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("range end: {e}"))?;
    if hi < lo {
        return Err(format!("range {lo}..{hi} is empty"));
    }
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Command {
    /// Sample a workload graph from a distribution spec
    Generate {
        /// Workload spec JSON
        #[arg(long)]
        spec: PathBuf,
        /// Override the spec's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Run every seed in the inclusive range A..B, writing one
        /// output per seed (out.json becomes out.s<seed>.json)
        #[arg(long, value_parser = parse_seed_range, conflicts_with = "seed")]
        seeds: Option<(u64, u64)>,
        /// Output graph JSON
        #[arg(long)]
        out: PathBuf,
        /// Also write a spec-conformance report here
        #[arg(long)]
        conformance: Option<PathBuf>,
    },
    /// Compute a graph's computation table and communication matrix
    Profile {
        /// Input graph JSON
        graph: PathBuf,
        /// Output profile JSON
        #[arg(long)]
        out: PathBuf,
        /// Also export the computation table as CSV
        #[arg(long)]
        table_csv: Option<PathBuf>,
        /// Also export the communication matrix as CSV
        #[arg(long)]
        matrix_csv: Option<PathBuf>,
    },
    /// Parse a program listing into a workload graph
    Scan {
        /// Program source file
        program: PathBuf,
        /// Output graph JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract a complexity profile with per-unit level statistics
    Extract {
        /// Input graph JSON
        graph: PathBuf,
        /// Output profile JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a structurally fresh graph hitting a profile's targets
    Clone {
        /// Target profile JSON
        profile: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-row/per-cell relative complexity tolerance
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Output graph JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster units into core types, partition traffic, size meshes
    Codesign {
        /// Input graph JSON
        graph: PathBuf,
        /// Largest core-type count the elbow may pick (clamped to the
        /// unit-instance count)
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        /// Fix the core-type count instead of using the elbow
        #[arg(long)]
        k: Option<usize>,
        /// Per-switch byte capacity for mesh sizing
        #[arg(long, default_value_t = 50)]
        switch_bytes: u64,
        /// Density threshold as a multiple of the mean nonzero
        /// inter-core entry
        #[arg(long, default_value_t = 1.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output co-design plan JSON
        #[arg(long)]
        out: PathBuf,
        /// Also export the inter-core matrix as CSV
        #[arg(long)]
        matrix_csv: Option<PathBuf>,
    },
    /// Run a bank algorithm's loop model and dump its address trace
    Trace {
        /// Algorithm id with a loop cost model
        algo: String,
        /// Problem size n
        #[arg(long, default_value_t = 1)]
        size: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output trace JSON
        #[arg(long)]
        out: PathBuf,
        /// Also write the reuse-distance histogram here
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Summarize graphs, profiles, plans, and traces as plot-ready data
    #[command(group(
        ArgGroup::new("report_inputs")
            .required(true)
            .multiple(true)
            .args(["graph", "profile", "plan", "trace"])
    ))]
    Report {
        /// Graph JSON: adds intensity counts (and level rows if no
        /// profile is given)
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Profile JSON: adds per-level complexity rows
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Co-design plan JSON: adds the WCSS curve
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Address-trace JSON: adds a reuse-distance summary
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Block size in words for the reuse summary
        #[arg(long, default_value_t = 1, requires_if(ArgPredicate::IsPresent, "trace"))]
        block_words: u64,
        /// Output report JSON
        #[arg(long)]
        out: PathBuf,
        /// Also write one CSV per report section into this directory
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Generate, profile, clone, and co-design in one run
    Pipeline {
        /// Workload spec JSON
        #[arg(long)]
        spec: PathBuf,
        /// Override the spec's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Run every seed in the inclusive range A..B, one output
        /// directory per seed
        #[arg(long, value_parser = parse_seed_range, conflicts_with = "seed")]
        seeds: Option<(u64, u64)>,
        /// Clone tolerance
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long, default_value_t = 50)]
        switch_bytes: u64,
        #[arg(long, default_value_t = 1.5)]
        density: f64,
        /// Directory receiving graph, profile, clone, plan, and manifest
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Provenance record written next to every primary output: the exact
/// command, the resolved seed, and content hashes of all files read and
/// written, so identical re-runs are checkable by hash alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Tracks every file read and written during one command so the final
/// manifest can list their hashes.
struct Emitter {
    argv: Vec<String>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn with_path(path: &Path, e: std::io::Error) -> ForgeError {
    ForgeError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

impl Emitter {
    fn new(argv: &[String]) -> Self {
        Emitter {
            argv: argv.to_vec(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    fn read_text(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).map_err(|e| with_path(path, e))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn write_text(&mut self, path: &Path, content: &str) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| with_path(parent, e))?;
            }
        }
        fs::write(path, content).map_err(|e| with_path(path, e))?;
        self.outputs
            .insert(path.display().to_string(), sha256_hex(content.as_bytes()));
        Ok(())
    }

    /// Records a file some other writer produced (CSV exports).
    fn note_output(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| with_path(path, e))?;
        self.outputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    fn finish(self, seed: Option<u64>, manifest_path: &Path) -> Result<()> {
        let manifest = RunManifest {
            tool: "forge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.argv,
            seed,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        fs::write(manifest_path, to_pretty(&manifest)).map_err(|e| with_path(manifest_path, e))?;
        Ok(())
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialization is infallible");
    s.push('\n');
    s
}

fn manifest_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", out.display()))
}

/// graph.json + seed 7 -> graph.s7.json
fn seeded_path(path: &Path, seed: u64) -> PathBuf {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match name.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() => {
            path.with_file_name(format!("{stem}.s{seed}.{ext}"))
        }
        _ => path.with_file_name(format!("{name}.s{seed}")),
    }
}

fn load_bank(em: &mut Emitter) -> Result<AlgoBank> {
    match std::env::var_os(ALGOBANK_ENV) {
        Some(p) => {
            let path = PathBuf::from(p);
            let text = em.read_text(&path)?;
            AlgoBank::from_json(&text)
        }
        None => Ok(AlgoBank::builtin()),
    }
}

/// Runs `f` once per seed, fanning out across threads for batches.
/// Each seed's outputs are independent files, so order does not matter.
fn for_each_seed<F>(seeds: &[u64], f: F) -> Result<()>
where
    F: Fn(u64) -> Result<()> + Sync,
{
    if seeds.len() <= 1 {
        return seeds.iter().try_for_each(|&s| f(s));
    }
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(seeds.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || -> Result<()> {
                    for &s in seeds.iter().skip(w).step_by(workers) {
                        f(s)?;
                    }
                    Ok(())
                })
            })
            .collect();
        for h in handles {
            h.join().expect("seed worker panicked")?;
        }
        Ok(())
    })
}

/// Entry point used by the binary and by tests: parses argv, runs the
/// subcommand, prints a machine-readable error envelope on failure.
/// Exit status: 0 success, 1 domain error, 2 usage error.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let argv: Vec<String> = argv.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(cli.command, &argv) {
        Ok(()) => 0,
        Err(e) => {
            let envelope =
                serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{envelope}");
            1
        }
    }
}

fn dispatch(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Generate { spec, seed, seeds, out, conformance } => {
            cmd_generate(argv, &spec, seed, seeds, &out, conformance.as_deref())
        }
        Command::Profile { graph, out, table_csv, matrix_csv } => {
            cmd_profile(argv, &graph, &out, table_csv.as_deref(), matrix_csv.as_deref())
        }
        Command::Scan { program, out } => cmd_scan(argv, &program, &out),
        Command::Extract { graph, out } => cmd_extract(argv, &graph, &out),
        Command::Clone { profile, seed, tol, out } => {
            cmd_clone(argv, &profile, seed, tol, &out)
        }
        Command::Codesign { graph, kmax, k, switch_bytes, density, seed, out, matrix_csv } => {
            cmd_codesign(argv, &graph, kmax, k, switch_bytes, density, seed, &out, matrix_csv.as_deref())
        }
        Command::Trace { algo, size, seed, out, histogram } => {
            cmd_trace(argv, &algo, size, seed, &out, histogram.as_deref())
        }
        Command::Report { graph, profile, plan, trace, block_words, out, csv_dir } => cmd_report(
            argv,
            graph.as_deref(),
            profile.as_deref(),
            plan.as_deref(),
            trace.as_deref(),
            block_words,
            &out,
            csv_dir.as_deref(),
        ),
        Command::Pipeline { spec, seed, seeds, tol, kmax, switch_bytes, density, out_dir } => {
            cmd_pipeline(argv, &spec, seed, seeds, tol, kmax, switch_bytes, density, &out_dir)
        }
    }
}

fn seed_list(seed: Option<u64>, seeds: Option<(u64, u64)>) -> Option<Vec<u64>> {
    seeds.map(|(lo, hi)| (lo..=hi).collect()).or(seed.map(|s| vec![s]))
}

fn cmd_generate(
    argv: &[String],
    spec_path: &Path,
    seed: Option<u64>,
    seeds: Option<(u64, u64)>,
    out: &Path,
    conformance: Option<&Path>,
) -> Result<()> {
    let batch = seeds.is_some();
    let run_one = |seed_override: Option<u64>| -> Result<()> {
        let mut em = Emitter::new(argv);
        let mut spec = WorkloadSpec::from_json_str(&em.read_text(spec_path)?)?;
        let bank = load_bank(&mut em)?;
        if let Some(s) = seed_override {
            spec.seed = s;
        }
        let resolved = spec.seed;
        let generated = generate(&spec, &bank)?;
        let out_path = if batch { seeded_path(out, resolved) } else { out.to_path_buf() };
        em.write_text(&out_path, &generated.graph.to_json_string())?;
        if let Some(conf) = conformance {
            let report = verify_against_spec(
                std::slice::from_ref(&generated.graph),
                &spec,
                DEFAULT_CONFORMANCE_TOL,
            )?;
            let conf_path = if batch { seeded_path(conf, resolved) } else { conf.to_path_buf() };
            em.write_text(&conf_path, &to_pretty(&report))?;
        }
        em.finish(Some(resolved), &manifest_path(&out_path))
    };
    match seed_list(seed, seeds) {
        Some(list) => for_each_seed(&list, |s| run_one(Some(s))),
        None => run_one(None),
    }
}

fn write_table_csv(p: &ComplexityProfile, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = p
        .computation_table
        .iter()
        .map(|r| vec![r.level.to_string(), r.complexity.to_string(), r.alfus.join(";")])
        .collect();
    write_csv(path, &["level".into(), "complexity".into(), "alfus".into()], &rows)
}

fn write_matrix_csv(p: &ComplexityProfile, path: &Path) -> Result<()> {
    let l = p.num_levels();
    let mut header = vec!["from".to_string()];
    header.extend((1..=l).map(|j| format!("to_{j}")));
    let rows: Vec<Vec<String>> = p
        .communication_matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = vec![(i + 1).to_string()];
            r.extend(row.iter().map(|v| v.to_string()));
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

fn cmd_profile(
    argv: &[String],
    graph: &Path,
    out: &Path,
    table_csv: Option<&Path>,
    matrix_csv: Option<&Path>,
) -> Result<()> {
    let mut em = Emitter::new(argv);
    let g = HyperGraph::from_json_str(&em.read_text(graph)?)?;
    let bank = load_bank(&mut em)?;
    let p = profile(&g, &bank)?;
    em.write_text(out, &p.to_json_string())?;
    if let Some(path) = table_csv {
        write_table_csv(&p, path)?;
        em.note_output(path)?;
    }
    if let Some(path) = matrix_csv {
        write_matrix_csv(&p, path)?;
        em.note_output(path)?;
    }
    em.finish(None, &manifest_path(out))
}

fn cmd_scan(argv: &[String], program: &Path, out: &Path) -> Result<()> {
    let mut em = Emitter::new(argv);
    let text = em.read_text(program)?;
    let bank = load_bank(&mut em)?;
    let g = scan_program(&text, &bank)?;
    em.write_text(out, &g.to_json_string())?;
    em.finish(None, &manifest_path(out))
}

fn cmd_extract(argv: &[String], graph: &Path, out: &Path) -> Result<()> {
    let mut em = Emitter::new(argv);
    let g = HyperGraph::from_json_str(&em.read_text(graph)?)?;
    let bank = load_bank(&mut em)?;
    let p = extract_profile(&g, &bank)?;
    em.write_text(out, &p.to_json_string())?;
    em.finish(None, &manifest_path(out))
}

fn cmd_clone(argv: &[String], profile: &Path, seed: u64, tol: f64, out: &Path) -> Result<()> {
    let mut em = Emitter::new(argv);
    let target = ComplexityProfile::from_json_str(&em.read_text(profile)?)?;
    let bank = load_bank(&mut em)?;
    let clone = synthesize_clone(&target, &bank, seed, tol)?;
    em.write_text(out, &clone.to_json_string())?;
    em.finish(Some(seed), &manifest_path(out))
}

fn write_inter_core_csv(plan: &CodesignPlan, path: &Path) -> Result<()> {
    let k = plan.inter_core.n();
    let mut header = vec!["core".to_string()];
    header.extend((0..k).map(|j| format!("c{j}")));
    header.push("intra".into());
    let rows: Vec<Vec<String>> = (0..k)
        .map(|i| {
            let mut r = vec![i.to_string()];
            r.extend(plan.inter_core.bytes[i].iter().map(|b| b.to_string()));
            r.push(plan.inter_core.intra[i].to_string());
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

#[allow(clippy::too_many_arguments)]
fn cmd_codesign(
    argv: &[String],
    graph: &Path,
    kmax: usize,
    k: Option<usize>,
    switch_bytes: u64,
    density: f64,
    seed: u64,
    out: &Path,
    matrix_csv: Option<&Path>,
) -> Result<()> {
    let mut em = Emitter::new(argv);
    let g = HyperGraph::from_json_str(&em.read_text(graph)?)?;
    let kmax = kmax.min(g.vertices().len()).max(1);
    let plan = run_codesign(&g, kmax, k, density, switch_bytes, seed)?;
    em.write_text(out, &plan.to_json_string())?;
    if let Some(path) = matrix_csv {
        write_inter_core_csv(&plan, path)?;
        em.note_output(path)?;
    }
    em.finish(Some(seed), &manifest_path(out))
}

fn cmd_trace(
    argv: &[String],
    algo: &str,
    size: u64,
    seed: u64,
    out: &Path,
    histogram: Option<&Path>,
) -> Result<()> {
    let mut em = Emitter::new(argv);
    let bank = load_bank(&mut em)?;
    let entry = bank.lookup(algo)?;
    let model = entry.loop_model(size).ok_or_else(|| {
        ForgeError::InfeasibleSpec(format!("algorithm `{algo}` has no loop model"))
    })?;
    let trace = generate_trace(&model, seed)?;
    em.write_text(out, &to_pretty(&trace))?;
    if let Some(path) = histogram {
        let hist = reuse_distance_histogram(&trace, model.block_words)?;
        em.write_text(path, &to_pretty(&hist))?;
    }
    em.finish(Some(seed), &manifest_path(out))
}

/// Accepts either a full co-design plan or a bare core-type plan.
fn parse_wcss_curve(text: &str) -> Result<Vec<WcssPoint>> {
    if let Ok(plan) = CodesignPlan::from_json_str(text) {
        return Ok(plan.core_types.wcss_curve);
    }
    serde_json::from_str::<CoreTypePlan>(text)
        .map(|p| p.wcss_curve)
        .map_err(|e| ForgeError::SchemaMismatch(format!("plan: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_report(
    argv: &[String],
    graph: Option<&Path>,
    profile_path: Option<&Path>,
    plan: Option<&Path>,
    trace: Option<&Path>,
    block_words: u64,
    out: &Path,
    csv_dir: Option<&Path>,
) -> Result<()> {
    let mut em = Emitter::new(argv);
    let mut bundle = ReportBundle::default();
    let mut loaded_graph = None;
    if let Some(path) = graph {
        let g = HyperGraph::from_json_str(&em.read_text(path)?)?;
        bundle.intensity =
            Some(intensity_counts(&g, DEFAULT_DEPTH_THRESH, DEFAULT_BYTES_THRESH)?);
        loaded_graph = Some(g);
    }
    if let Some(path) = profile_path {
        let p = ComplexityProfile::from_json_str(&em.read_text(path)?)?;
        bundle.levels = Some(complexity_histogram(&p));
    } else if let Some(g) = &loaded_graph {
        let bank = load_bank(&mut em)?;
        bundle.levels = Some(complexity_histogram(&profile(g, &bank)?));
    }
    if let Some(path) = plan {
        bundle.wcss = Some(parse_wcss_curve(&em.read_text(path)?)?);
    }
    if let Some(path) = trace {
        let t: AddressTrace = serde_json::from_str(&em.read_text(path)?)
            .map_err(|e| ForgeError::SchemaMismatch(format!("trace: {e}")))?;
        bundle.reuse = Some(reuse_summary(&t, block_words)?);
    }
    em.write_text(out, &bundle.to_json_string())?;
    if let Some(dir) = csv_dir {
        for path in write_csv_bundle(&bundle, dir)? {
            em.note_output(&path)?;
        }
    }
    em.finish(None, &manifest_path(out))
}

#[allow(clippy::too_many_arguments)]
fn cmd_pipeline(
    argv: &[String],
    spec_path: &Path,
    seed: Option<u64>,
    seeds: Option<(u64, u64)>,
    tol: f64,
    kmax: usize,
    switch_bytes: u64,
    density: f64,
    out_dir: &Path,
) -> Result<()> {
    let batch = seeds.is_some();
    let run_one = |seed_override: Option<u64>| -> Result<()> {
        let mut em = Emitter::new(argv);
        let mut spec = WorkloadSpec::from_json_str(&em.read_text(spec_path)?)?;
        let bank = load_bank(&mut em)?;
        if let Some(s) = seed_override {
            spec.seed = s;
        }
        let resolved = spec.seed;
        let dir =
            if batch { out_dir.join(format!("s{resolved}")) } else { out_dir.to_path_buf() };
        fs::create_dir_all(&dir).map_err(|e| with_path(&dir, e))?;
        let generated = generate(&spec, &bank)?;
        let g = generated.graph;
        em.write_text(&dir.join("graph.json"), &g.to_json_string())?;
        let p = extract_profile(&g, &bank)?;
        em.write_text(&dir.join("profile.json"), &p.to_json_string())?;
        let clone = synthesize_clone(&p, &bank, resolved, tol)?;
        em.write_text(&dir.join("clone.json"), &clone.to_json_string())?;
        let kmax = kmax.min(g.vertices().len()).max(1);
        let plan = run_codesign(&g, kmax, None, density, switch_bytes, resolved)?;
        em.write_text(&dir.join("plan.json"), &plan.to_json_string())?;
        em.finish(Some(resolved), &dir.join("manifest.json"))
    };
    match seed_list(seed, seeds) {
        Some(list) => for_each_seed(&list, |s| run_one(Some(s))),
        None => run_one(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges_parse_inclusively() {
        assert_eq!(parse_seed_range("1..4"), Ok((1, 4)));
        assert_eq!(parse_seed_range("3..=5"), Ok((3, 5)));
        assert_eq!(parse_seed_range("7..7"), Ok((7, 7)));
        assert!(parse_seed_range("9..2").is_err());
        assert!(parse_seed_range("abc").is_err());
    }

    #[test]
    fn seeded_paths_keep_extensions() {
        assert_eq!(seeded_path(Path::new("out/graph.json"), 7), Path::new("out/graph.s7.json"));
        assert_eq!(seeded_path(Path::new("graph"), 7), Path::new("graph.s7"));
    }

    #[test]
    fn usage_errors_exit_2_and_domain_errors_exit_1() {
        let argv = |args: &[&str]| args.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(run(argv(&["forge", "no-such-command"])), 2);
        assert_eq!(run(argv(&["forge", "clone", "/nonexistent/profile.json", "--out", "/tmp/x.json"])), 1);
        assert_eq!(run(argv(&["forge", "--help"])), 0);
    }

    #[test]
    fn manifest_serializes_deterministically() {
        let mut inputs = BTreeMap::new();
        inputs.insert("a".into(), sha256_hex(b"x"));
        let m = RunManifest {
            tool: "forge".into(),
            version: "0".into(),
            command: vec!["forge".into()],
            seed: Some(3),
            inputs: inputs.clone(),
            outputs: inputs,
        };
        assert_eq!(to_pretty(&m), to_pretty(&m));
        let parsed: RunManifest = serde_json::from_str(&to_pretty(&m)).unwrap();
        assert_eq!(parsed, m);
    }
}
