//! C ABI for `ncsync`.
//!
//! Objects cross the boundary as opaque heap handles that the caller frees
//! with the matching `*_free` function. Every fallible call returns an
//! [`NcsStatus`] and writes its result through an out pointer. On failure
//! [`ncs_last_error_message`] describes the most recent error on the calling
//! thread. Panics never unwind into C and are reported as `NCS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ncsync::coding::DEFAULT_PAYLOAD_LEN;
use ncsync::sim::{self, write_trace};
use ncsync::{rng, Error, LossModel, Scheme, SimConfig, SimResult, Topology};

pub const NCS_SCHEME_U_DBS: u32 = 0;
pub const NCS_SCHEME_C_DBS: u32 = 1;
pub const NCS_SCHEME_C_DBS_NS: u32 = 2;

pub const NCS_LOSS_PER_BROADCAST: u32 = 0;
pub const NCS_LOSS_PER_RECEIVER: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Rejection sampling gave up before finding a connected topology.
    Rejected = 3,
    Disconnected = 4,
    ParseError = 5,
    Internal = 6,
    Panic = 7,
}

/// Opaque network topology.
pub struct NcsTopology(Topology);

/// Opaque result of one simulation run.
pub struct NcsSimResult(SimResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NcsStatus {
    match e {
        Error::InvalidParameter { .. }
        | Error::NodeOutOfRange { .. }
        | Error::SelfLoop(_)
        | Error::UnknownBlock { .. }
        | Error::PayloadLength { .. } => NcsStatus::InvalidArgument,
        Error::Disconnected => NcsStatus::Disconnected,
        Error::RejectionCapExceeded { .. } => NcsStatus::Rejected,
        Error::Parse { .. } | Error::Json(_) => NcsStatus::ParseError,
        _ => NcsStatus::Internal,
    }
}

struct Failure(NcsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NcsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(NcsStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any error or panic, and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NcsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            NcsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            NcsStatus::Panic
        }
    }
}

/// Stores a boxed handle in `out`.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s)
        .map_err(|_| invalid("string contains a nul byte"))?
        .into_raw();
    Ok(())
}

unsafe fn topology<'a>(t: *const NcsTopology) -> Result<&'a Topology, Failure> {
    t.as_ref().map(|t| &t.0).ok_or_else(|| null("topology"))
}

/// Builds a topology on `n` nodes from `edge_count` pairs laid out as
/// `edges[2*i], edges[2*i+1]`. Duplicate edges are merged.
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values (or be null when
/// `edge_count` is 0). `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_from_edges(
    n: usize,
    edges: *const usize,
    edge_count: usize,
    out: *mut *mut NcsTopology,
) -> NcsStatus {
    guard(|| {
        let flat: &[usize] = if edge_count == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * edge_count)
        };
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        emit(out, NcsTopology(Topology::from_edges(n, &pairs)?))
    })
}

/// Samples a connected random geometric graph: `n` nodes uniform in the unit
/// square, linked within `radius`, redrawn until connected. Returns
/// `NCS_STATUS_REJECTED` after `max_rejections` disconnected draws.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_generate(
    n: usize,
    radius: f64,
    seed: u64,
    max_rejections: u32,
    out: *mut *mut NcsTopology,
) -> NcsStatus {
    guard(|| {
        let t = Topology::sample_connected(n, radius, max_rejections, &mut rng::stream(seed, &[]))?;
        emit(out, NcsTopology(t))
    })
}

/// Parses a topology from its JSON form `{"n":..,"edges":[[u,v],..]}`.
///
/// # Safety
/// `json` must be a nul-terminated string. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_from_json(
    json: *const c_char,
    out: *mut *mut NcsTopology,
) -> NcsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let s = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| invalid("json is not UTF-8"))?;
        emit(out, NcsTopology(Topology::from_json(s)?))
    })
}

/// Serializes a topology to JSON. Free the string with [`ncs_string_free`].
///
/// # Safety
/// `t` must be a live handle. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_to_json(
    t: *const NcsTopology,
    out: *mut *mut c_char,
) -> NcsStatus {
    guard(|| emit_string(out, topology(t)?.to_json()))
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_free(t: *mut NcsTopology) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_node_count(t: *const NcsTopology) -> usize {
    t.as_ref().map_or(0, |t| t.0.node_count())
}

/// Undirected edge count, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_edge_count(t: *const NcsTopology) -> usize {
    t.as_ref().map_or(0, |t| t.0.edge_count())
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_is_connected(t: *const NcsTopology) -> bool {
    t.as_ref().is_some_and(|t| t.0.is_connected())
}

/// Mean node degree, or NaN for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_topology_average_degree(t: *const NcsTopology) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.0.average_degree_f64())
}

/// Runs one synchronization. `scheme` is an `NCS_SCHEME_*` value and `loss`
/// an `NCS_LOSS_*` value. Payloads of `payload_len` bytes are drawn from
/// `seed`. Zero for `payload_len` or `max_slots` selects the default. The
/// result for a given seed matches the `ncsync simulate` command.
///
/// # Safety
/// `t` must be a live handle. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncs_simulate(
    t: *const NcsTopology,
    scheme: u32,
    pe: f64,
    loss: u32,
    seed: u64,
    payload_len: usize,
    max_slots: u32,
    out: *mut *mut NcsSimResult,
) -> NcsStatus {
    guard(|| {
        let t = topology(t)?;
        let scheme = match scheme {
            NCS_SCHEME_U_DBS => Scheme::UDbs,
            NCS_SCHEME_C_DBS => Scheme::CDbs,
            NCS_SCHEME_C_DBS_NS => Scheme::CDbsNs,
            other => return Err(invalid(format!("unknown scheme {other}"))),
        };
        let mut cfg = SimConfig::new(scheme, t.node_count(), pe, seed);
        cfg.loss = match loss {
            NCS_LOSS_PER_BROADCAST => LossModel::PerBroadcast,
            NCS_LOSS_PER_RECEIVER => LossModel::PerReceiver,
            other => return Err(invalid(format!("unknown loss model {other}"))),
        };
        cfg.payload_len = if payload_len == 0 {
            DEFAULT_PAYLOAD_LEN
        } else {
            payload_len
        };
        if max_slots != 0 {
            cfg.max_slots = max_slots;
        }
        emit(out, NcsSimResult(sim::run_seeded(t, cfg)?))
    })
}

/// Slots used, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_result_slots(r: *const NcsSimResult) -> u32 {
    r.as_ref().map_or(0, |r| r.0.slots)
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_result_converged(r: *const NcsSimResult) -> bool {
    r.as_ref().is_some_and(|r| r.0.converged)
}

/// Elementary operation count, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_result_op_count(r: *const NcsSimResult) -> u64 {
    r.as_ref().map_or(0, |r| r.0.op_count)
}

/// Cyclic turns skipped because the node had nothing useful to send.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncs_result_skipped_turns(r: *const NcsSimResult) -> u32 {
    r.as_ref().map_or(0, |r| r.0.skipped_turns)
}

/// Per-slot trace as JSON lines. Free the string with [`ncs_string_free`].
///
/// # Safety
/// `r` must be a live handle. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncs_result_trace_json(
    r: *const NcsSimResult,
    out: *mut *mut c_char,
) -> NcsStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        let mut buf = Vec::new();
        write_trace(&r.0.events, &mut buf)
            .map_err(|e| Failure(NcsStatus::Internal, e.to_string()))?;
        emit_string(
            out,
            String::from_utf8(buf).map_err(|e| Failure(NcsStatus::Internal, e.to_string()))?,
        )
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncs_result_free(r: *mut NcsSimResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ncs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ncs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
