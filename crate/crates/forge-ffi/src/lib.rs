//! C ABI over the forge library: opaque handles, status codes, UTF-8
//! JSON strings at the boundary. Every function is panic-safe; failures
//! set a thread-local message readable via `forge_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use forge::algobank::AlgoBank;
use forge::cloner::synthesize_clone;
use forge::codesign::run_codesign;
use forge::hypergraph::{HyperGraph, InternalMode};
use forge::locality::generate_trace;
use forge::profile::{profile, ComplexityProfile};
use forge::scan::{extract_profile, scan_program};
use forge::ForgeError;

/// Result of every fallible call. Anything but Ok leaves the out
/// parameters untouched; forge_last_error() describes the failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForgeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input value or structure rejected by validation.
    InvalidArgument = 3,
    /// Named algorithm, vertex, or edge does not exist.
    NotFound = 4,
    /// The request cannot be satisfied (infeasible spec or target).
    Infeasible = 5,
    /// Malformed JSON or program text.
    ParseError = 6,
    /// Underlying file or stream error.
    IoError = 7,
    /// Internal panic was caught at the boundary.
    Panic = 8,
}

/// Algorithm registry handle.
pub struct ForgeBank {
    inner: AlgoBank,
}

/// Workload graph handle.
pub struct ForgeGraph {
    inner: HyperGraph,
}

/// Complexity profile handle.
pub struct ForgeProfile {
    inner: ComplexityProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("").expect("empty string has no NUL"));
}

fn set_last_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes were replaced");
    });
}

fn status_of(e: &ForgeError) -> ForgeStatus {
    match e {
        ForgeError::UnknownAlgorithm(_) | ForgeError::NoSuchVertex(_) | ForgeError::NoSuchEdge(..) => {
            ForgeStatus::NotFound
        }
        ForgeError::InfeasibleSpec(_)
        | ForgeError::InfeasibleTarget(_)
        | ForgeError::DegenerateDistribution => ForgeStatus::Infeasible,
        ForgeError::Syntax { .. }
        | ForgeError::UseBeforeDef { .. }
        | ForgeError::SchemaMismatch(_)
        | ForgeError::Json(_) => ForgeStatus::ParseError,
        ForgeError::Io(_) => ForgeStatus::IoError,
        ForgeError::InvalidSize(_)
        | ForgeError::InvalidGraph(_)
        | ForgeError::InvalidControlVector(_)
        | ForgeError::CoverageMismatch(_) => ForgeStatus::InvalidArgument,
    }
}

fn fail(status: ForgeStatus, msg: &str) -> ForgeStatus {
    set_last_error(msg);
    status
}

fn fail_err(e: &ForgeError) -> ForgeStatus {
    fail(status_of(e), &e.to_string())
}

fn guard<F: FnOnce() -> ForgeStatus>(f: F) -> ForgeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(ForgeStatus::Panic, "internal panic caught at the C boundary"),
    }
}

/// Reads a required UTF-8 C string argument.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, ForgeStatus> {
    if ptr.is_null() {
        return Err(fail(ForgeStatus::NullArgument, &format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(ForgeStatus::InvalidUtf8, &format!("{name} is not valid UTF-8")))
}

unsafe fn read_handle<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, ForgeStatus> {
    if ptr.is_null() {
        return Err(fail(ForgeStatus::NullArgument, &format!("{name} is null")));
    }
    Ok(&*ptr)
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> ForgeStatus {
    if out.is_null() {
        return fail(ForgeStatus::NullArgument, &format!("{name} is null"));
    }
    *out = value;
    ForgeStatus::Ok
}

unsafe fn write_string(out: *mut *mut c_char, s: String, name: &str) -> ForgeStatus {
    match CString::new(s) {
        Ok(c) => write_out(out, c.into_raw(), name),
        Err(_) => fail(ForgeStatus::InvalidArgument, "string contains a NUL byte"),
    }
}

/// Library version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn forge_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread, or an empty
/// string. Owned by the library; valid until the next failing call on
/// the same thread. Do not free.
#[no_mangle]
pub extern "C" fn forge_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string returned through a `char **` out parameter.
///
/// # Safety
/// `s` must be a pointer previously returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn forge_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates the built-in algorithm bank. Free with forge_bank_free.
#[no_mangle]
pub extern "C" fn forge_bank_builtin() -> *mut ForgeBank {
    Box::into_raw(Box::new(ForgeBank { inner: AlgoBank::builtin() }))
}

/// Parses a bank from its JSON form. On Ok, `*out` owns the bank.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn forge_bank_from_json(
    json: *const c_char,
    out: *mut *mut ForgeBank,
) -> ForgeStatus {
    guard(|| {
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match AlgoBank::from_json(text) {
            Ok(bank) => {
                write_out(out, Box::into_raw(Box::new(ForgeBank { inner: bank })), "out")
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// # Safety
/// `bank` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn forge_bank_free(bank: *mut ForgeBank) {
    if !bank.is_null() {
        drop(Box::from_raw(bank));
    }
}

/// Parses a graph from its JSON form. On Ok, `*out` owns the graph.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn forge_graph_from_json(
    json: *const c_char,
    out: *mut *mut ForgeGraph,
) -> ForgeStatus {
    guard(|| {
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match HyperGraph::from_json_str(text) {
            Ok(g) => write_out(out, Box::into_raw(Box::new(ForgeGraph { inner: g })), "out"),
            Err(e) => fail_err(&e),
        }
    })
}

/// Serializes a graph to JSON. Free `*out` with forge_string_free.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn forge_graph_to_json(
    graph: *const ForgeGraph,
    out: *mut *mut c_char,
) -> ForgeStatus {
    guard(|| {
        let g = match read_handle(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        write_string(out, g.inner.to_json_string(), "out")
    })
}

/// # Safety
/// `graph` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn forge_graph_free(graph: *mut ForgeGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Samples a workload graph from a JSON spec using `bank`.
///
/// # Safety
/// `spec_json` must be NUL-terminated; `bank` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_generate(
    spec_json: *const c_char,
    bank: *const ForgeBank,
    out: *mut *mut ForgeGraph,
) -> ForgeStatus {
    guard(|| {
        let text = match read_str(spec_json, "spec_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let bank = match read_handle(bank, "bank") {
            Ok(b) => b,
            Err(s) => return s,
        };
        let spec = match forge::generator::WorkloadSpec::from_json_str(text) {
            Ok(s) => s,
            Err(e) => return fail_err(&e),
        };
        match forge::generator::generate(&spec, &bank.inner) {
            Ok(generated) => write_out(
                out,
                Box::into_raw(Box::new(ForgeGraph { inner: generated.graph })),
                "out",
            ),
            Err(e) => fail_err(&e),
        }
    })
}

/// Parses a program listing into a workload graph.
///
/// # Safety
/// `text` must be NUL-terminated; `bank` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_scan_program(
    text: *const c_char,
    bank: *const ForgeBank,
    out: *mut *mut ForgeGraph,
) -> ForgeStatus {
    guard(|| {
        let program = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let bank = match read_handle(bank, "bank") {
            Ok(b) => b,
            Err(s) => return s,
        };
        match scan_program(program, &bank.inner) {
            Ok(g) => write_out(out, Box::into_raw(Box::new(ForgeGraph { inner: g })), "out"),
            Err(e) => fail_err(&e),
        }
    })
}

/// Computes the computation table and communication matrix of a graph.
///
/// # Safety
/// `graph` and `bank` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_profile(
    graph: *const ForgeGraph,
    bank: *const ForgeBank,
    out: *mut *mut ForgeProfile,
) -> ForgeStatus {
    guard(|| {
        let g = match read_handle(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        let bank = match read_handle(bank, "bank") {
            Ok(b) => b,
            Err(s) => return s,
        };
        match profile(&g.inner, &bank.inner) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(ForgeProfile { inner: p })), "out"),
            Err(e) => fail_err(&e),
        }
    })
}

/// As forge_profile, additionally carrying per-unit level statistics.
///
/// # Safety
/// `graph` and `bank` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_extract_profile(
    graph: *const ForgeGraph,
    bank: *const ForgeBank,
    out: *mut *mut ForgeProfile,
) -> ForgeStatus {
    guard(|| {
        let g = match read_handle(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        let bank = match read_handle(bank, "bank") {
            Ok(b) => b,
            Err(s) => return s,
        };
        match extract_profile(&g.inner, &bank.inner) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(ForgeProfile { inner: p })), "out"),
            Err(e) => fail_err(&e),
        }
    })
}

/// Serializes a profile to JSON. Free `*out` with forge_string_free.
///
/// # Safety
/// `profile` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_profile_to_json(
    profile: *const ForgeProfile,
    out: *mut *mut c_char,
) -> ForgeStatus {
    guard(|| {
        let p = match read_handle(profile, "profile") {
            Ok(p) => p,
            Err(s) => return s,
        };
        write_string(out, p.inner.to_json_string(), "out")
    })
}

/// Parses a profile from its JSON form. On Ok, `*out` owns the profile.
///
/// # Safety
/// `json` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_profile_from_json(
    json: *const c_char,
    out: *mut *mut ForgeProfile,
) -> ForgeStatus {
    guard(|| {
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ComplexityProfile::from_json_str(text) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(ForgeProfile { inner: p })), "out"),
            Err(e) => fail_err(&e),
        }
    })
}

/// # Safety
/// `profile` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn forge_profile_free(profile: *mut ForgeProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Synthesizes a structurally fresh graph whose extracted profile hits
/// the target's complexity rows and matrix cells within `tol`.
///
/// # Safety
/// `profile` and `bank` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_clone(
    profile: *const ForgeProfile,
    bank: *const ForgeBank,
    seed: u64,
    tol: f64,
    out: *mut *mut ForgeGraph,
) -> ForgeStatus {
    guard(|| {
        let p = match read_handle(profile, "profile") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let bank = match read_handle(bank, "bank") {
            Ok(b) => b,
            Err(s) => return s,
        };
        match synthesize_clone(&p.inner, &bank.inner, seed, tol) {
            Ok(g) => write_out(out, Box::into_raw(Box::new(ForgeGraph { inner: g })), "out"),
            Err(e) => fail_err(&e),
        }
    })
}

/// Total complexity (external + internal) per vertex, in the graph's
/// canonical vertex order. On Ok, `*out_values` holds `*out_len`
/// doubles; free with forge_f64_free.
///
/// # Safety
/// `graph` and `bank` must be live handles; out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn forge_complexity_vector(
    graph: *const ForgeGraph,
    bank: *const ForgeBank,
    out_values: *mut *mut f64,
    out_len: *mut usize,
) -> ForgeStatus {
    guard(|| {
        let g = match read_handle(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        let bank = match read_handle(bank, "bank") {
            Ok(b) => b,
            Err(s) => return s,
        };
        if out_values.is_null() || out_len.is_null() {
            return fail(ForgeStatus::NullArgument, "out_values/out_len is null");
        }
        match g.inner.graph_complexity_vector(&bank.inner, InternalMode::FanIn) {
            Ok(rows) => {
                let values: Vec<f64> = rows.iter().map(|r| r.c_total).collect();
                let len = values.len();
                let ptr = Box::into_raw(values.into_boxed_slice()) as *mut f64;
                *out_values = ptr;
                *out_len = len;
                ForgeStatus::Ok
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// Frees an array returned through a `double **` out parameter.
///
/// # Safety
/// `ptr`/`len` must match a previous forge_complexity_vector result.
#[no_mangle]
pub unsafe extern "C" fn forge_f64_free(ptr: *mut f64, len: usize) {
    if !ptr.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(ptr, len)));
    }
}

/// Runs the co-design chain (core types, inter-core traffic, dense
/// partitions, mesh sizes) and returns the plan as JSON. Pass `k < 0`
/// to let the elbow pick the core-type count within `kmax` (clamped to
/// the vertex count). Free `*out_json` with forge_string_free.
///
/// # Safety
/// `graph` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn forge_codesign(
    graph: *const ForgeGraph,
    kmax: usize,
    k: i64,
    density: f64,
    switch_bytes: u64,
    seed: u64,
    out_json: *mut *mut c_char,
) -> ForgeStatus {
    guard(|| {
        let g = match read_handle(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        let kmax = kmax.min(g.inner.vertices().len()).max(1);
        let fixed = if k < 0 { None } else { Some(k as usize) };
        match run_codesign(&g.inner, kmax, fixed, density, switch_bytes, seed) {
            Ok(plan) => write_string(out_json, plan.to_json_string(), "out_json"),
            Err(e) => fail_err(&e),
        }
    })
}

/// Runs the loop model of bank algorithm `algo` at problem size `size`
/// and returns its address trace. On Ok, `*out_addrs` holds `*out_len`
/// word addresses; free with forge_u64_free.
///
/// # Safety
/// `bank` must be a live handle; `algo` NUL-terminated; out pointers
/// writable.
#[no_mangle]
pub unsafe extern "C" fn forge_trace(
    bank: *const ForgeBank,
    algo: *const c_char,
    size: u64,
    seed: u64,
    out_addrs: *mut *mut u64,
    out_len: *mut usize,
) -> ForgeStatus {
    guard(|| {
        let bank = match read_handle(bank, "bank") {
            Ok(b) => b,
            Err(s) => return s,
        };
        let algo = match read_str(algo, "algo") {
            Ok(a) => a,
            Err(s) => return s,
        };
        if out_addrs.is_null() || out_len.is_null() {
            return fail(ForgeStatus::NullArgument, "out_addrs/out_len is null");
        }
        let entry = match bank.inner.lookup(algo) {
            Ok(e) => e,
            Err(e) => return fail_err(&e),
        };
        let Some(model) = entry.loop_model(size) else {
            return fail(
                ForgeStatus::Infeasible,
                &format!("algorithm `{algo}` has no loop model"),
            );
        };
        match generate_trace(&model, seed) {
            Ok(trace) => {
                let len = trace.addresses.len();
                let ptr = Box::into_raw(trace.addresses.into_boxed_slice()) as *mut u64;
                *out_addrs = ptr;
                *out_len = len;
                ForgeStatus::Ok
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// Frees an array returned through a `uint64_t **` out parameter.
///
/// # Safety
/// `ptr`/`len` must match a previous forge_trace result.
#[no_mangle]
pub unsafe extern "C" fn forge_u64_free(ptr: *mut u64, len: usize) {
    if !ptr.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(ptr, len)));
    }
}
