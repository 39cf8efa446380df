//! C ABI for the percwalk simulation library.
//!
//! Conventions:
//! * Every fallible function returns a [`PwStatus`] code and writes results
//!   through out-pointers; `PW_STATUS_OK` (0) means success.
//! * Enumerated options (regime, input, coin, quantity) are passed as
//!   `uint32_t` codes matching the exported enums, and are validated, so no
//!   undefined behaviour arises from out-of-range values.
//! * `pw_estimation_run` returns an opaque handle that must be released with
//!   `pw_estimation_free`. All other functions write into caller-provided
//!   buffers; `pw_window_size` gives the required lengths.
//! * Panics never cross the boundary; they surface as
//!   `PW_STATUS_INTERNAL_ERROR`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use percwalk::estimation::{self, EstimationReport, EstimationRequest};
use percwalk::lattice::{self, Regime};
use percwalk::montecarlo::{self, EnsembleSpec};
use percwalk::observables::{self, Quantity};
use percwalk::state::CoinSpec;
use percwalk::twowalker::{CanonicalInput, InputSpec};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    InternalError = 4,
}

/// Percolation regime codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwRegime {
    Perfect = 0,
    Static = 1,
    Dynamic = 2,
}

/// Two-walker input codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwPairInput {
    PhiPlus = 0,
    PsiMinus = 1,
    PsiS = 2,
}

/// Single-walker coin codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwCoin {
    Up = 0,
    Down = 1,
    PhiPlus = 2,
    PhiMinus = 3,
}

/// Observable codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwQuantity {
    Distance = 0,
    Meeting = 1,
    Origin = 2,
    Spread = 3,
}

/// Opaque estimation report handle.
pub struct PwEstimation {
    report: EstimationReport,
}

fn regime_from(code: u32) -> Option<Regime> {
    match code {
        0 => Some(Regime::Perfect),
        1 => Some(Regime::Statical),
        2 => Some(Regime::Dynamical),
        _ => None,
    }
}

fn pair_input_from(code: u32) -> Option<InputSpec> {
    match code {
        0 => Some(InputSpec::Canonical(CanonicalInput::PhiPlus)),
        1 => Some(InputSpec::Canonical(CanonicalInput::PsiMinus)),
        2 => Some(InputSpec::Canonical(CanonicalInput::PsiS)),
        _ => None,
    }
}

fn coin_from(code: u32) -> Option<CoinSpec> {
    match code {
        0 => Some(CoinSpec::Up),
        1 => Some(CoinSpec::Down),
        2 => Some(CoinSpec::PhiPlus),
        3 => Some(CoinSpec::PhiMinus),
        _ => None,
    }
}

fn quantity_from(code: u32) -> Option<Quantity> {
    match code {
        0 => Some(Quantity::Distance),
        1 => Some(Quantity::Meeting),
        2 => Some(Quantity::Origin),
        3 => Some(Quantity::Spread),
        _ => None,
    }
}

fn guarded<F: FnOnce() -> PwStatus>(body: F) -> PwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => PwStatus::InternalError,
    }
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn pw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Number of lattice positions a `steps`-step walk can reach: `2*steps + 1`.
/// Single-walker buffers need this many doubles, joint buffers its square.
#[no_mangle]
pub extern "C" fn pw_window_size(steps: usize) -> usize {
    2 * steps + 1
}

/// Average connected-segment length `p / (1 - p)`.
/// Fails with `PW_STATUS_INVALID_ARGUMENT` for p outside [0, 1).
/// # Safety
/// `out` must be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn pw_avg_segment_length(p: f64, out: *mut f64) -> PwStatus {
    guarded(|| {
        if out.is_null() {
            return PwStatus::NullPointer;
        }
        match lattice::avg_segment_length(p) {
            Ok(value) => {
                unsafe { *out = value };
                PwStatus::Ok
            }
            Err(_) => PwStatus::InvalidArgument,
        }
    })
}

/// Variance `P_E (1 - P_E) / n` of the n-run frequency estimator.
/// # Safety
/// `out` must be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn pw_estimator_variance(p_e: f64, n: u64, out: *mut f64) -> PwStatus {
    guarded(|| {
        if out.is_null() {
            return PwStatus::NullPointer;
        }
        if !(0.0..=1.0).contains(&p_e) || p_e.is_nan() || n == 0 {
            return PwStatus::InvalidArgument;
        }
        unsafe { *out = estimation::estimator_variance(p_e, n) };
        PwStatus::Ok
    })
}

/// Lower bound on the number of runs needed to estimate p to precision
/// `epsilon` from an event with probability `p_e` and curve slope `dp_dp`.
/// Writes +infinity for a flat curve; `out_reliable` is 1 when the Gaussian
/// error propagation behind the bound applies.
/// # Safety
/// Out-pointers must be null or point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn pw_n_min(
    p_e: f64,
    dp_dp: f64,
    epsilon: f64,
    out_value: *mut f64,
    out_reliable: *mut u8,
) -> PwStatus {
    guarded(|| {
        if out_value.is_null() || out_reliable.is_null() {
            return PwStatus::NullPointer;
        }
        if !(0.0..=1.0).contains(&p_e)
            || p_e.is_nan()
            || epsilon <= 0.0
            || epsilon.is_nan()
            || dp_dp.is_nan()
        {
            return PwStatus::InvalidArgument;
        }
        let bound = estimation::n_min(p_e, dp_dp, epsilon);
        unsafe {
            *out_value = bound.value;
            *out_reliable = bound.reliable as u8;
        }
        PwStatus::Ok
    })
}

/// Ensemble-averaged single-walker distribution over positions
/// `-steps ..= steps`. `out_probs` must hold `pw_window_size(steps)` doubles.
/// # Safety
/// `out_probs` must be null or point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pw_single_average(
    steps: usize,
    regime: u32,
    p: f64,
    coin: u32,
    averages: usize,
    seed: u64,
    out_probs: *mut f64,
    out_len: usize,
) -> PwStatus {
    guarded(|| {
        if out_probs.is_null() {
            return PwStatus::NullPointer;
        }
        let (Some(regime), Some(coin)) = (regime_from(regime), coin_from(coin)) else {
            return PwStatus::InvalidArgument;
        };
        let needed = pw_window_size(steps);
        if out_len < needed {
            return PwStatus::BufferTooSmall;
        }
        match montecarlo::run_single_ensemble(&coin.coin(), steps, regime, p, averages, seed) {
            Ok(mean) => {
                let out = unsafe { std::slice::from_raw_parts_mut(out_probs, needed) };
                out.copy_from_slice(mean.probs());
                PwStatus::Ok
            }
            Err(_) => PwStatus::InvalidArgument,
        }
    })
}

/// Ensemble-averaged two-walker joint distribution, row-major over
/// `(i + steps) * (2*steps + 1) + (j + steps)`. `out_probs` must hold
/// `pw_window_size(steps)^2` doubles.
/// # Safety
/// `out_probs` must be null or point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pw_joint_average(
    steps: usize,
    regime: u32,
    p: f64,
    input: u32,
    averages: usize,
    seed: u64,
    out_probs: *mut f64,
    out_len: usize,
) -> PwStatus {
    guarded(|| {
        if out_probs.is_null() {
            return PwStatus::NullPointer;
        }
        let (Some(regime), Some(input)) = (regime_from(regime), pair_input_from(input)) else {
            return PwStatus::InvalidArgument;
        };
        let side = pw_window_size(steps);
        if out_len < side * side {
            return PwStatus::BufferTooSmall;
        }
        let spec = EnsembleSpec {
            averages,
            steps,
            regime,
            p,
            input,
            master_seed: seed,
            retain_marginals: false,
        };
        match montecarlo::run_ensemble(&spec) {
            Ok(averaged) => {
                let out = unsafe { std::slice::from_raw_parts_mut(out_probs, side * side) };
                out.copy_from_slice(averaged.mean.grid().values());
                PwStatus::Ok
            }
            Err(_) => PwStatus::InvalidArgument,
        }
    })
}

/// Monte Carlo sweep of one observable over the caller's p values.
/// `out_means` and `out_stderrs` must each hold `count` doubles.
/// # Safety
/// `p_values` must point to `count` readable doubles; non-null out-buffers
/// must hold `count` writable doubles each.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pw_sweep(
    quantity: u32,
    input: u32,
    regime: u32,
    steps: usize,
    averages: usize,
    seed: u64,
    p_values: *const f64,
    count: usize,
    out_means: *mut f64,
    out_stderrs: *mut f64,
) -> PwStatus {
    guarded(|| {
        if p_values.is_null() || out_means.is_null() || out_stderrs.is_null() {
            return PwStatus::NullPointer;
        }
        let (Some(quantity), Some(input), Some(regime)) = (
            quantity_from(quantity),
            pair_input_from(input),
            regime_from(regime),
        ) else {
            return PwStatus::InvalidArgument;
        };
        let grid = unsafe { std::slice::from_raw_parts(p_values, count) };
        match observables::sweep(quantity, &input, regime, grid, steps, averages, seed) {
            Ok(curve) => {
                unsafe {
                    std::slice::from_raw_parts_mut(out_means, count).copy_from_slice(&curve.means);
                    std::slice::from_raw_parts_mut(out_stderrs, count)
                        .copy_from_slice(&curve.stderrs);
                }
                PwStatus::Ok
            }
            Err(_) => PwStatus::InvalidArgument,
        }
    })
}

/// Runs the full estimation pipeline (boson, fermion, classical pairs at the
/// origin plus the single symmetric-coin walker) on an evenly spaced grid.
/// Returns null on invalid arguments or internal failure.
#[no_mangle]
pub extern "C" fn pw_estimation_run(
    steps: usize,
    regime: u32,
    averages: usize,
    seed: u64,
    epsilon: f64,
    fit_degree: usize,
    grid_lo: f64,
    grid_hi: f64,
    grid_count: usize,
) -> *mut PwEstimation {
    let result = catch_unwind(AssertUnwindSafe(|| {
        let regime = regime_from(regime)?;
        if grid_count < 2
            || grid_hi <= grid_lo
            || grid_hi.is_nan()
            || epsilon <= 0.0
            || epsilon.is_nan()
        {
            return None;
        }
        let p_grid: Vec<f64> = (0..grid_count)
            .map(|k| grid_lo + (grid_hi - grid_lo) * k as f64 / (grid_count - 1) as f64)
            .collect();
        let request = EstimationRequest {
            p_grid,
            averages,
            master_seed: seed,
            epsilon,
            fit_degree,
            events: estimation::standard_strategies(steps, regime),
        };
        estimation::run_estimation(&request)
            .ok()
            .map(|report| Box::into_raw(Box::new(PwEstimation { report })))
    }));
    match result {
        Ok(Some(handle)) => handle,
        _ => std::ptr::null_mut(),
    }
}

/// Frees a handle returned by `pw_estimation_run`. Null is ignored.
///
/// # Safety
/// `handle` must be a pointer previously returned by `pw_estimation_run` that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn pw_estimation_free(handle: *mut PwEstimation) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// # Safety
/// `handle` must be a live pointer from `pw_estimation_run`.
#[no_mangle]
pub unsafe extern "C" fn pw_estimation_strategy_count(handle: *const PwEstimation) -> usize {
    if handle.is_null() {
        return 0;
    }
    unsafe { &*handle }.report.strategies.len()
}

/// # Safety
/// `handle` must be a live pointer from `pw_estimation_run`.
#[no_mangle]
pub unsafe extern "C" fn pw_estimation_grid_count(handle: *const PwEstimation) -> usize {
    if handle.is_null() {
        return 0;
    }
    unsafe { &*handle }.report.p_grid.len()
}

/// Writes the NUL-terminated label of one strategy.
///
/// # Safety
/// `handle` must be a live pointer from `pw_estimation_run`; `buffer` must
/// point to `buffer_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pw_estimation_strategy_label(
    handle: *const PwEstimation,
    strategy: usize,
    buffer: *mut c_char,
    buffer_len: usize,
) -> PwStatus {
    guarded(|| {
        if handle.is_null() || buffer.is_null() {
            return PwStatus::NullPointer;
        }
        let report = &unsafe { &*handle }.report;
        let Some(entry) = report.strategies.get(strategy) else {
            return PwStatus::InvalidArgument;
        };
        let bytes = entry.label.as_bytes();
        if buffer_len < bytes.len() + 1 {
            return PwStatus::BufferTooSmall;
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buffer as *mut u8, bytes.len() + 1) };
        out[..bytes.len()].copy_from_slice(bytes);
        out[bytes.len()] = 0;
        PwStatus::Ok
    })
}

/// Copies one strategy's simulated event probabilities and run-count bounds
/// at the grid points. Either output may be null to skip it; non-null buffers
/// must hold `pw_estimation_grid_count` doubles. Unbounded entries are
/// +infinity.
///
/// # Safety
/// `handle` must be a live pointer from `pw_estimation_run`; non-null buffers
/// must be large enough.
#[no_mangle]
pub unsafe extern "C" fn pw_estimation_curves(
    handle: *const PwEstimation,
    strategy: usize,
    out_event_probability: *mut f64,
    out_n_min: *mut f64,
    out_len: usize,
) -> PwStatus {
    guarded(|| {
        if handle.is_null() {
            return PwStatus::NullPointer;
        }
        let report = &unsafe { &*handle }.report;
        let Some(entry) = report.strategies.get(strategy) else {
            return PwStatus::InvalidArgument;
        };
        let points = report.p_grid.len();
        if (!out_event_probability.is_null() || !out_n_min.is_null()) && out_len < points {
            return PwStatus::BufferTooSmall;
        }
        if !out_event_probability.is_null() {
            unsafe { std::slice::from_raw_parts_mut(out_event_probability, points) }
                .copy_from_slice(&entry.curve.means);
        }
        if !out_n_min.is_null() {
            let out = unsafe { std::slice::from_raw_parts_mut(out_n_min, points) };
            for (slot, bound) in out.iter_mut().zip(&entry.n_min) {
                *slot = bound.value;
            }
        }
        PwStatus::Ok
    })
}

/// Number of optimality windows in the report.
///
/// # Safety
/// `handle` must be a live pointer from `pw_estimation_run`.
#[no_mangle]
pub unsafe extern "C" fn pw_estimation_window_count(handle: *const PwEstimation) -> usize {
    if handle.is_null() {
        return 0;
    }
    unsafe { &*handle }.report.windows.len()
}

/// Reads one optimality window: the winning strategy index and the p range on
/// which it needs the fewest runs.
///
/// # Safety
/// `handle` must be a live pointer from `pw_estimation_run`; out-pointers
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn pw_estimation_window(
    handle: *const PwEstimation,
    window: usize,
    out_strategy: *mut usize,
    out_p_lo: *mut f64,
    out_p_hi: *mut f64,
) -> PwStatus {
    guarded(|| {
        if handle.is_null() || out_strategy.is_null() || out_p_lo.is_null() || out_p_hi.is_null() {
            return PwStatus::NullPointer;
        }
        let report = &unsafe { &*handle }.report;
        let Some(entry) = report.windows.get(window) else {
            return PwStatus::InvalidArgument;
        };
        let Some(strategy) = report
            .strategies
            .iter()
            .position(|s| s.label == entry.label)
        else {
            return PwStatus::InternalError;
        };
        unsafe {
            *out_strategy = strategy;
            *out_p_lo = entry.p_lo;
            *out_p_hi = entry.p_hi;
        }
        PwStatus::Ok
    })
}
