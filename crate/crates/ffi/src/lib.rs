//! C interface to `brox-core`.
//!
//! Objects cross the boundary as opaque handles created by `brox_*_new`-style
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`BroxStatus`]; on failure `brox_last_error` describes the cause
//! for the calling thread. Randomness is always given as `(seed, stream)`,
//! which selects a ChaCha8 stream, so results are reproducible from C.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use brox_core::bessel::{self, BesselError, HorizonRule, TwoSidedBessel};
use brox_core::diffusion::{self, DiffusionError, DiffusionPath, LocalTimeProfile, SimOptions};
use brox_core::environment::{self, EnvError, EnvironmentPath, ExtremumKind};
use brox_core::stats::{self, StatsError};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfDomain = 3,
    /// No valley or crossing exists in the current domain.
    NotFound = 4,
    BudgetExceeded = 5,
    /// Output buffer too small; the required length was written.
    BufferTooSmall = 6,
    Internal = 7,
}

/// A sampled potential.
pub struct BroxEnvironment(EnvironmentPath);

/// A diffusion path on a time grid.
pub struct BroxPath(DiffusionPath);

/// A local-time profile.
pub struct BroxProfile(LocalTimeProfile);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BroxValley {
    pub p: f64,
    pub m: f64,
    pub q: f64,
    pub depth: f64,
    pub ascent: f64,
    pub ambiguous: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BroxExtremum {
    pub x: f64,
    /// `true` for a maximum.
    pub is_max: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BroxKsResult {
    pub statistic: f64,
    pub p_bound: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Message for the last failing call on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn brox_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

struct Failure(BroxStatus, String);

impl From<EnvError> for Failure {
    fn from(e: EnvError) -> Self {
        let code = match e {
            EnvError::OutOfDomain(_) => BroxStatus::OutOfDomain,
            EnvError::ValleyNotContained { .. } | EnvError::ThresholdNotReached { .. } => BroxStatus::NotFound,
            EnvError::WideningCapExceeded { .. } => BroxStatus::BudgetExceeded,
            _ => BroxStatus::InvalidArgument,
        };
        Failure(code, e.to_string())
    }
}

impl From<DiffusionError> for Failure {
    fn from(e: DiffusionError) -> Self {
        let code = match &e {
            DiffusionError::InvalidParameter(_) => BroxStatus::InvalidArgument,
            DiffusionError::OutsideEnvironment(_) | DiffusionError::RangeExceeded(_) | DiffusionError::BeyondHorizon { .. } => {
                BroxStatus::OutOfDomain
            }
            DiffusionError::StepBudgetExceeded { .. } | DiffusionError::WideningCapExceeded(_) => BroxStatus::BudgetExceeded,
            DiffusionError::Environment(_) => BroxStatus::InvalidArgument,
        };
        Failure(code, e.to_string())
    }
}

impl From<BesselError> for Failure {
    fn from(e: BesselError) -> Self {
        let code = match e {
            BesselError::InvalidParameter(_) => BroxStatus::InvalidArgument,
            BesselError::StepBudgetExceeded(_) => BroxStatus::BudgetExceeded,
            BesselError::OutsideWindow(_) => BroxStatus::OutOfDomain,
        };
        Failure(code, e.to_string())
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        Failure(BroxStatus::InvalidArgument, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BroxStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, turning errors and panics into a status and a thread-local message.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> BroxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BroxStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            BroxStatus::Internal
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copy `src` into `(buf, cap)`; `*len` always receives `src.len()`.
unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, cap: usize, len: *mut usize) -> Result<(), Failure> {
    write(len, src.len(), "len")?;
    if cap < src.len() {
        return Err(Failure(BroxStatus::BufferTooSmall, format!("need {} elements, got {cap}", src.len())));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

// ---- environment ----

/// Sample a two-sided Brownian potential on `[left, right]` with grid `step`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn brox_environment_sample(
    seed: u64,
    stream: u64,
    step: f64,
    left: f64,
    right: f64,
    out: *mut *mut BroxEnvironment,
) -> BroxStatus {
    guard(|| {
        let env = environment::sample_environment(step, left, right, &mut rng(seed, stream))?;
        write(out, boxed(BroxEnvironment(env)), "out")
    })
}

/// Build a potential from knot values; `values[origin]` must be 0.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_environment_from_values(
    step: f64,
    origin: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut BroxEnvironment,
) -> BroxStatus {
    guard(|| {
        let v = slice(values, len, "values")?.to_vec();
        let env = EnvironmentPath::from_values(step, origin, v)?;
        write(out, boxed(BroxEnvironment(env)), "out")
    })
}

/// # Safety
/// `env` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn brox_environment_free(env: *mut BroxEnvironment) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Knot values. If `cap` is too small, `*len` receives the needed size and
/// the call fails with `BufferTooSmall`.
///
/// # Safety
/// `env` must be a live handle, `buf` must hold `cap` doubles, `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_environment_values(
    env: *const BroxEnvironment,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BroxStatus {
    guard(|| copy_out(borrow(env, "env")?.0.values(), buf, cap, len))
}

/// `W(x)` by linear interpolation.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brox_environment_evaluate(env: *const BroxEnvironment, x: f64, out: *mut f64) -> BroxStatus {
    guard(|| write(out, borrow(env, "env")?.0.evaluate(x)?, "out"))
}

/// Largest barrier crossed going from `x` to `y`.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brox_barrier(env: *const BroxEnvironment, x: f64, y: f64, out: *mut f64) -> BroxStatus {
    guard(|| write(out, environment::barrier(&borrow(env, "env")?.0, x, y)?, "out"))
}

/// All h-extrema in position order.
///
/// # Safety
/// `env` must be a live handle, `buf` must hold `cap` entries, `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_find_h_extrema(
    env: *const BroxEnvironment,
    h: f64,
    buf: *mut BroxExtremum,
    cap: usize,
    len: *mut usize,
) -> BroxStatus {
    guard(|| {
        let ext: Vec<BroxExtremum> = environment::find_h_extrema(&borrow(env, "env")?.0, h)?
            .iter()
            .map(|e| BroxExtremum {
                x: e.x,
                is_max: e.kind == ExtremumKind::Max,
            })
            .collect();
        copy_out(&ext, buf, cap, len)
    })
}

/// The standard h-valley around the origin; `NotFound` if the domain is too narrow.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brox_standard_valley(env: *const BroxEnvironment, h: f64, out: *mut BroxValley) -> BroxStatus {
    guard(|| {
        let v = environment::standard_valley(&borrow(env, "env")?.0, h)?;
        let c = BroxValley {
            p: v.p,
            m: v.m,
            q: v.q,
            depth: v.depth,
            ascent: v.ascent,
            ambiguous: v.ambiguous,
        };
        write(out, c, "out")
    })
}

// ---- diffusion ----

/// Simulate `X` in the potential `alpha · W` up to time `t` on a driving grid `dt`.
/// The environment is extended with fresh Brownian increments if the path leaves it.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brox_simulate(
    env: *const BroxEnvironment,
    alpha: f64,
    seed: u64,
    stream: u64,
    dt: f64,
    t: f64,
    out: *mut *mut BroxPath,
) -> BroxStatus {
    guard(|| {
        let env = &borrow(env, "env")?.0;
        let p = diffusion::simulate_path(env, alpha, &mut rng(seed, stream), dt, t, &SimOptions::default())?;
        write(out, boxed(BroxPath(p)), "out")
    })
}

/// # Safety
/// `path` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn brox_path_free(path: *mut BroxPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Clock times and positions; both buffers use the same length.
///
/// # Safety
/// `path` must be a live handle, `clock` and `positions` must hold `cap` doubles, `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_path_samples(
    path: *const BroxPath,
    clock: *mut f64,
    positions: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BroxStatus {
    guard(|| {
        let p = &borrow(path, "path")?.0;
        copy_out(&p.clock, clock, cap, len)?;
        copy_out(&p.positions, positions, cap, len)
    })
}

/// First time the path reaches `x`; `*found` is false if it never does.
///
/// # Safety
/// `path` must be a live handle; `out` and `found` writable.
#[no_mangle]
pub unsafe extern "C" fn brox_hitting_time(path: *const BroxPath, x: f64, out: *mut f64, found: *mut bool) -> BroxStatus {
    guard(|| {
        let h = diffusion::hitting_time(&borrow(path, "path")?.0, x);
        write(found, h.is_some(), "found")?;
        write(out, h.unwrap_or(f64::INFINITY), "out")
    })
}

/// Occupation-histogram local time at time `t` with bins of width `bin_width`.
///
/// # Safety
/// `path` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brox_local_time(
    path: *const BroxPath,
    bin_width: f64,
    t: f64,
    out: *mut *mut BroxProfile,
) -> BroxStatus {
    guard(|| {
        let prof = diffusion::local_time_occupation(&borrow(path, "path")?.0, bin_width, t)?;
        write(out, boxed(BroxProfile(prof)), "out")
    })
}

/// # Safety
/// `profile` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn brox_profile_free(profile: *mut BroxProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Bin centers and local-time values.
///
/// # Safety
/// `profile` must be a live handle, `centers` and `values` must hold `cap` doubles, `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_profile_values(
    profile: *const BroxProfile,
    centers: *mut f64,
    values: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BroxStatus {
    guard(|| {
        let p = &borrow(profile, "profile")?.0;
        copy_out(&p.bin_centers, centers, cap, len)?;
        copy_out(&p.values, values, cap, len)
    })
}

/// Leftmost bin with the largest local time.
///
/// # Safety
/// `profile` must be a live handle; `x` and `l` writable.
#[no_mangle]
pub unsafe extern "C" fn brox_favorite_point(profile: *const BroxProfile, x: *mut f64, l: *mut f64) -> BroxStatus {
    guard(|| {
        let (fx, fl) = diffusion::favorite_point(&borrow(profile, "profile")?.0)
            .ok_or_else(|| Failure(BroxStatus::NotFound, "empty profile".into()))?;
        write(x, fx, "x")?;
        write(l, fl, "l")
    })
}

// ---- limit laws ----

/// One draw of `∫ e^{-R}` for the two-sided 3-d Bessel process `R`, followed
/// to level `cutoff` with base step `dt`; `*tail` is the expected omitted mass.
///
/// # Safety
/// `value` and `tail` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_functional_sample(
    seed: u64,
    stream: u64,
    dt: f64,
    cutoff: f64,
    value: *mut f64,
    tail: *mut f64,
) -> BroxStatus {
    guard(|| {
        let rule = HorizonRule {
            cutoff,
            ..HorizonRule::default()
        };
        let two = TwoSidedBessel::sample(dt, &rule, &mut rng(seed, stream))?;
        let f = bessel::functional_sample(&two);
        write(value, f.value, "value")?;
        write(tail, f.truncation_bound, "tail")
    })
}

/// One draw of `4τ(1) + 4τ̃(1)` from two BESQ(2) hitting times.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_alias_sample(seed: u64, stream: u64, dt: f64, max_steps: u64, out: *mut f64) -> BroxStatus {
    guard(|| write(out, bessel::rayknight_alias_sample(dt, max_steps, &mut rng(seed, stream))?, "out"))
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value bound.
///
/// # Safety
/// `a` and `b` must point to `n` and `m` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brox_ks_two_sample(
    a: *const f64,
    n: usize,
    b: *const f64,
    m: usize,
    out: *mut BroxKsResult,
) -> BroxStatus {
    guard(|| {
        let r = stats::ks_two_sample(slice(a, n, "a")?, slice(b, m, "b")?)?;
        write(
            out,
            BroxKsResult {
                statistic: r.statistic,
                p_bound: r.p_value_bound,
            },
            "out",
        )
    })
}
