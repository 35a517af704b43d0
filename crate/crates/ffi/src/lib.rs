//! C ABI over the patchbench core.
//!
//! Graphs and rendered buffers cross the boundary as opaque handles. Every
//! fallible call returns a [`PbStatus`]; on failure a message for the
//! calling thread is available from [`pb_last_error_message`]. Strings
//! returned through `char **` out-parameters are owned by the caller and
//! must be released with [`pb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use patchbench::codec::{emit_maxpat, emit_wavir, parse_maxpat, parse_wavir};
use patchbench::harness::{pass_at_k, wilcoxon_one_sided, StatsError};
use patchbench::ir::{validate, PatchGraph};
use patchbench::render::{compile, judge_specific, render, JudgeError, PcmBuffer};
use patchbench::script::run_source;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    NotWellFormed = 4,
    ScriptError = 5,
    RenderError = 6,
    DomainError = 7,
    UnknownBenchmark = 8,
    Panic = 9,
}

/// A patch graph.
pub struct PbGraph(PatchGraph);

/// Rendered mono audio.
pub struct PbBuffer(PcmBuffer);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: PbStatus, message: impl Into<String>) -> PbStatus {
    set_error(message);
    status
}

/// Runs `f`, turning a panic into [`PbStatus::Panic`].
fn guard(f: impl FnOnce() -> PbStatus) -> PbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(PbStatus::Panic, "internal panic"),
    }
}

unsafe fn bytes<'a>(data: *const u8, len: usize) -> Option<&'a [u8]> {
    if data.is_null() {
        (len == 0).then_some(&[])
    } else {
        Some(std::slice::from_raw_parts(data, len))
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, PbStatus> {
    if s.is_null() {
        return Err(fail(PbStatus::NullArgument, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(PbStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> PbStatus {
    *out = Box::into_raw(Box::new(value));
    PbStatus::Ok
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> PbStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            PbStatus::Ok
        }
        Err(_) => fail(PbStatus::Panic, "string contains a nul byte"),
    }
}

unsafe fn parse_with(
    parse: fn(&[u8]) -> Result<PatchGraph, patchbench::codec::CodecError>,
    data: *const u8,
    len: usize,
    out: *mut *mut PbGraph,
) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PbStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let Some(input) = bytes(data, len) else {
            return fail(PbStatus::NullArgument, "null data with nonzero length");
        };
        match parse(input) {
            Ok(g) => put(out, PbGraph(g)),
            Err(e) => fail(PbStatus::ParseError, format!("{}: {e}", e.code())),
        }
    })
}

/// Parses a `.maxpat` document.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_graph_parse_maxpat(data: *const u8, len: usize, out: *mut *mut PbGraph) -> PbStatus {
    parse_with(parse_maxpat, data, len, out)
}

/// Parses a `wavir/1` document.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_graph_parse_wavir(data: *const u8, len: usize, out: *mut *mut PbGraph) -> PbStatus {
    parse_with(parse_wavir, data, len, out)
}

/// Runs a PatchScript program with the given seed and returns the graph it
/// emits.
///
/// # Safety
/// `source` must be a nul-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_graph_from_script(source: *const c_char, seed: u64, out: *mut *mut PbGraph) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PbStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let src = match text(source) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match run_source(src, seed) {
            Ok(g) => put(out, PbGraph(g)),
            Err(e) => fail(PbStatus::ScriptError, format!("{}: {e}", e.code())),
        }
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pb_graph_free(graph: *mut PbGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of nodes, or 0 for null.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_graph_node_count(graph: *const PbGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Number of edges, or 0 for null.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_graph_edge_count(graph: *const PbGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edges().len())
}

/// Whether the graph passes validation. False for null. When it does not,
/// the violations are available from [`pb_last_error_message`].
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_graph_is_well_formed(graph: *const PbGraph) -> bool {
    let Some(g) = graph.as_ref() else {
        set_error("null graph");
        return false;
    };
    let report = validate(&g.0);
    if !report.well_formed {
        set_error(report.to_string());
    }
    report.well_formed
}

unsafe fn emit_with(
    emit: fn(&PatchGraph) -> Result<Vec<u8>, patchbench::codec::CodecError>,
    graph: *const PbGraph,
    out: *mut *mut c_char,
) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PbStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let Some(g) = graph.as_ref() else {
            return fail(PbStatus::NullArgument, "null graph");
        };
        match emit(&g.0) {
            Ok(doc) => put_string(out, String::from_utf8(doc).expect("emitters write UTF-8")),
            Err(e) => fail(PbStatus::NotWellFormed, e.to_string()),
        }
    })
}

/// Serializes a well-formed graph as `.maxpat` JSON.
///
/// # Safety
/// `graph` must be a live handle and `out` writable. Free the result with
/// [`pb_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pb_graph_emit_maxpat(graph: *const PbGraph, out: *mut *mut c_char) -> PbStatus {
    emit_with(emit_maxpat, graph, out)
}

/// Serializes a well-formed graph as `wavir/1` JSON.
///
/// # Safety
/// As for [`pb_graph_emit_maxpat`].
#[no_mangle]
pub unsafe extern "C" fn pb_graph_emit_wavir(graph: *const PbGraph, out: *mut *mut c_char) -> PbStatus {
    emit_with(emit_wavir, graph, out)
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

fn stats_status(e: &StatsError) -> PbStatus {
    fail(PbStatus::DomainError, format!("{}: {e}", e.code()))
}

/// Unbiased pass@k for `c` correct samples out of `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_pass_at_k(n: u64, c: u64, k: u64, out: *mut f64) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PbStatus::NullArgument, "null out pointer");
        }
        match pass_at_k(n, c, k) {
            Ok(v) => {
                *out = v;
                PbStatus::Ok
            }
            Err(e) => stats_status(&e),
        }
    })
}

/// One-sided Wilcoxon signed-rank test of `xs > ys` over `len` pairs.
/// `exact` may be null.
///
/// # Safety
/// `xs` and `ys` must each hold `len` values; the out pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pb_wilcoxon_one_sided(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    w_plus: *mut f64,
    p_value: *mut f64,
    exact: *mut bool,
) -> PbStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() || w_plus.is_null() || p_value.is_null() {
            return fail(PbStatus::NullArgument, "null argument");
        }
        let xs = std::slice::from_raw_parts(xs, len);
        let ys = std::slice::from_raw_parts(ys, len);
        match wilcoxon_one_sided(xs, ys) {
            Ok(r) => {
                *w_plus = r.w_plus;
                *p_value = r.p_value;
                if !exact.is_null() {
                    *exact = r.exact;
                }
                PbStatus::Ok
            }
            Err(e) => stats_status(&e),
        }
    })
}

/// Renders a well-formed graph to mono audio. `noise_seed` fixes the
/// output of noise sources.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_render(
    graph: *const PbGraph,
    duration: f64,
    sample_rate: u32,
    noise_seed: u64,
    out: *mut *mut PbBuffer,
) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PbStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let Some(g) = graph.as_ref() else {
            return fail(PbStatus::NullArgument, "null graph");
        };
        let program = match compile(&g.0) {
            Ok(p) => p.with_noise_seed(noise_seed),
            Err(e) => return fail(PbStatus::NotWellFormed, e.to_string()),
        };
        match render(&program, duration, sample_rate) {
            Ok(b) => put(out, PbBuffer(b)),
            Err(e) => fail(PbStatus::RenderError, format!("{}: {e}", e.code())),
        }
    })
}

/// Releases a buffer. Null is ignored.
///
/// # Safety
/// `buffer` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pb_buffer_free(buffer: *mut PbBuffer) {
    if !buffer.is_null() {
        drop(Box::from_raw(buffer));
    }
}

/// Number of samples, or 0 for null.
///
/// # Safety
/// `buffer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_buffer_len(buffer: *const PbBuffer) -> usize {
    buffer.as_ref().map_or(0, |b| b.0.len())
}

/// Sample rate in Hz, or 0 for null.
///
/// # Safety
/// `buffer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_buffer_sample_rate(buffer: *const PbBuffer) -> u32 {
    buffer.as_ref().map_or(0, |b| b.0.sample_rate)
}

/// Pointer to the samples, valid while the buffer lives. Null for null.
///
/// # Safety
/// `buffer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_buffer_data(buffer: *const PbBuffer) -> *const f64 {
    buffer.as_ref().map_or(ptr::null(), |b| b.0.samples.as_ptr())
}

/// Judges a render against a benchmark's oracle and writes the verdict as
/// JSON. `benchmark` is an id such as `"am"` or a display name.
///
/// # Safety
/// `buffer` and `graph` must be live handles, `benchmark` a nul-terminated
/// string and `out` writable. Free the result with [`pb_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pb_judge(
    benchmark: *const c_char,
    buffer: *const PbBuffer,
    graph: *const PbGraph,
    out: *mut *mut c_char,
) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PbStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let (Some(b), Some(g)) = (buffer.as_ref(), graph.as_ref()) else {
            return fail(PbStatus::NullArgument, "null handle");
        };
        let name = match text(benchmark) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match judge_specific(name, &b.0, &g.0) {
            Ok(v) => put_string(out, serde_json::to_string(&v).expect("verdict serializes")),
            Err(e @ JudgeError::UnknownBenchmark(_)) => fail(PbStatus::UnknownBenchmark, e.to_string()),
        }
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
