//! C interface to the countdown simulator.
//!
//! Networks and spike trains are opaque handles created and released through
//! this API. Every fallible call returns a [`CdStatus`]; on failure the
//! message of the last error on the calling thread is available from
//! [`cd_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use countdown::fpt::{ig_density, DriftedBmFptParams};
use countdown::models::parse_network;
use countdown::rng::stream_rng;
use countdown::sim::{Network, SimError, SpikeTrain};
use countdown::stats::ks_statistic;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    InvalidArgument = 4,
    SimulationFailed = 5,
    Avalanche = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Compiled network.
pub struct CdNetwork {
    network: Network,
}

/// Spikes of one realization.
pub struct CdSpikeTrain {
    train: SpikeTrain,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: CdStatus, message: impl Into<String>) -> CdStatus {
    let text = CString::new(message.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
    status
}

/// Runs `f`, turning panics into [`CdStatus::Panic`].
fn guard(f: impl FnOnce() -> CdStatus) -> CdStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CdStatus::Panic, "internal panic"))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and compiles a TOML network document.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_network_parse(toml: *const c_char, out: *mut *mut CdNetwork) -> CdStatus {
    guard(|| {
        if toml.is_null() || out.is_null() {
            return fail(CdStatus::NullPointer, "null argument");
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let Ok(text) = unsafe { CStr::from_ptr(toml) }.to_str() else {
            return fail(CdStatus::InvalidUtf8, "spec is not valid UTF-8");
        };
        let spec = match parse_network(text) {
            Ok(s) => s,
            Err(e) => return fail(CdStatus::InvalidSpec, e.to_string()),
        };
        match Network::compile(&spec) {
            Ok(network) => {
                // SAFETY: checked non-null.
                unsafe { *out = Box::into_raw(Box::new(CdNetwork { network })) };
                CdStatus::Ok
            }
            Err(e) => fail(CdStatus::InvalidSpec, e.to_string()),
        }
    })
}

/// Releases a network; null is ignored.
///
/// # Safety
/// `network` must come from [`cd_network_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cd_network_free(network: *mut CdNetwork) {
    if !network.is_null() {
        // SAFETY: allocated by cd_network_parse and released once.
        drop(unsafe { Box::from_raw(network) });
    }
}

/// Number of neurons; 0 for null.
///
/// # Safety
/// `network` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_network_neuron_count(network: *const CdNetwork) -> usize {
    // SAFETY: null or a live handle per the contract.
    unsafe { network.as_ref() }.map_or(0, |n| n.network.len())
}

/// Horizon of the spec; NaN for null.
///
/// # Safety
/// `network` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_network_horizon(network: *const CdNetwork) -> f64 {
    // SAFETY: null or a live handle per the contract.
    unsafe { network.as_ref() }.map_or(f64::NAN, |n| n.network.spec().horizon)
}

/// Simulates realization `run_index` of master seed `seed` on `[0, horizon]`.
/// The result equals run `run_index` of an ensemble with the same seed.
///
/// # Safety
/// `network` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_simulate(
    network: *const CdNetwork,
    seed: u64,
    run_index: u64,
    horizon: f64,
    out: *mut *mut CdSpikeTrain,
) -> CdStatus {
    guard(|| {
        // SAFETY: null or a live handle per the contract.
        let Some(net) = (unsafe { network.as_ref() }) else {
            return fail(CdStatus::NullPointer, "null network");
        };
        if out.is_null() {
            return fail(CdStatus::NullPointer, "null output");
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return fail(CdStatus::InvalidArgument, format!("horizon must be finite and > 0, got {horizon}"));
        }
        match net.network.run(&mut stream_rng(seed, run_index), horizon) {
            Ok(train) => {
                // SAFETY: checked non-null.
                unsafe { *out = Box::into_raw(Box::new(CdSpikeTrain { train })) };
                CdStatus::Ok
            }
            Err(e @ SimError::AvalancheDetected { .. }) => fail(CdStatus::Avalanche, e.to_string()),
            Err(e) => fail(CdStatus::SimulationFailed, e.to_string()),
        }
    })
}

/// Number of spikes; 0 for null.
///
/// # Safety
/// `train` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_spike_train_len(train: *const CdSpikeTrain) -> usize {
    // SAFETY: null or a live handle per the contract.
    unsafe { train.as_ref() }.map_or(0, |t| t.train.len())
}

/// Spike `index` (time order) as time and neuron id.
///
/// # Safety
/// `train` must be a live handle; `time` and `neuron` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_spike_train_get(
    train: *const CdSpikeTrain,
    index: usize,
    time: *mut f64,
    neuron: *mut usize,
) -> CdStatus {
    guard(|| {
        // SAFETY: null or a live handle per the contract.
        let Some(t) = (unsafe { train.as_ref() }) else {
            return fail(CdStatus::NullPointer, "null spike train");
        };
        if time.is_null() || neuron.is_null() {
            return fail(CdStatus::NullPointer, "null output");
        }
        let Some(&(s, j)) = t.train.records().get(index) else {
            return fail(CdStatus::OutOfRange, format!("index {index} beyond {} spikes", t.train.len()));
        };
        // SAFETY: checked non-null.
        unsafe {
            *time = s;
            *neuron = j;
        }
        CdStatus::Ok
    })
}

/// Releases a spike train; null is ignored.
///
/// # Safety
/// `train` must come from [`cd_simulate`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cd_spike_train_free(train: *mut CdSpikeTrain) {
    if !train.is_null() {
        // SAFETY: allocated by cd_simulate and released once.
        drop(unsafe { Box::from_raw(train) });
    }
}

/// Density at `t` of the first passage of a Brownian motion with drift `mu`
/// and noise `sigma` through a barrier at distance `a`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_ig_density(t: f64, a: f64, mu: f64, sigma: f64, out: *mut f64) -> CdStatus {
    guard(|| {
        if out.is_null() {
            return fail(CdStatus::NullPointer, "null output");
        }
        match ig_density(t, &DriftedBmFptParams { a, mu, sigma }) {
            Ok(d) => {
                // SAFETY: checked non-null.
                unsafe { *out = d };
                CdStatus::Ok
            }
            Err(e) => fail(CdStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Two-sample Kolmogorov–Smirnov statistic.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cd_ks_statistic(a: *const f64, na: usize, b: *const f64, nb: usize, out: *mut f64) -> CdStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(CdStatus::NullPointer, "null argument");
        }
        // SAFETY: non-null with the stated lengths per the contract.
        let (a, b) = unsafe { (std::slice::from_raw_parts(a, na), std::slice::from_raw_parts(b, nb)) };
        match ks_statistic(a, b) {
            Ok(d) => {
                // SAFETY: checked non-null.
                unsafe { *out = d };
                CdStatus::Ok
            }
            Err(e) => fail(CdStatus::InvalidArgument, e.to_string()),
        }
    })
}
