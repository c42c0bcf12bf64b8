//! C interface to rmtedge.
//!
//! Every function returns an [`RmtStatus`]; on failure the message of the last error on the
//! calling thread is available through [`rmt_last_error_message`]. Spectra and Pearcey
//! kernels are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use rmtedge::edge_analysis::cusps;
use rmtedge::fredholm::{f_alpha, hard_edge_prediction, pearcey_gap, s_df_ds};
use rmtedge::kernels::{bessel_kernel, KernelEvaluator, PearceyKernel, PearceyParams};
use rmtedge::montecarlo::sample_eigenvalues;
use rmtedge::spectral_model::{density, solve_stieltjes, support, PopulationSpectrum};
use rmtedge::Error;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSpectrum = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque population spectrum.
pub struct RmtSpectrum(PopulationSpectrum);

/// Opaque Pearcey kernel with fixed tau.
pub struct RmtPearcey(PearceyKernel);

/// Cusp point and its scaling constants.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmtCusp {
    pub a: f64,
    pub c: f64,
    pub g3: f64,
    pub sigma: f64,
    pub cube_root_coefficient: f64,
}

/// Gap probability with its self-convergence estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmtGap {
    pub value: f64,
    pub error_estimate: f64,
    pub order: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RmtStatus {
    match e {
        Error::InvalidSpectrum(_) => RmtStatus::InvalidSpectrum,
        e if e.is_numerical() => RmtStatus::Numerical,
        _ => RmtStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), RmtStatus>) -> RmtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            RmtStatus::Panic
        }
    }
}

fn lift<T>(r: rmtedge::Result<T>) -> Result<T, RmtStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), RmtStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(RmtStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
/// `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rmt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a spectrum from `len` atoms.
///
/// # Safety
/// `lambdas` and `weights` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_new(
    gamma: f64,
    lambdas: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut *mut RmtSpectrum,
) -> RmtStatus {
    guard(|| {
        non_null(lambdas, "lambdas")?;
        non_null(weights, "weights")?;
        non_null(out, "out")?;
        let l = std::slice::from_raw_parts(lambdas, len);
        let w = std::slice::from_raw_parts(weights, len);
        let spec = lift(PopulationSpectrum::from_pairs(gamma, l, w))?;
        *out = Box::into_raw(Box::new(RmtSpectrum(spec)));
        Ok(())
    })
}

/// Parses a spectrum from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_from_json(
    json: *const c_char,
    out: *mut *mut RmtSpectrum,
) -> RmtStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("json is not valid UTF-8".into());
            RmtStatus::InvalidArgument
        })?;
        let spec = lift(PopulationSpectrum::from_json(text))?;
        *out = Box::into_raw(Box::new(RmtSpectrum(spec)));
        Ok(())
    })
}

/// Releases a spectrum; null is ignored.
///
/// # Safety
/// `spec` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_free(spec: *mut RmtSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Limiting density at x > 0.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_density(spec: *const RmtSpectrum, x: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        *out = lift(density(&(*spec).0, x))?;
        Ok(())
    })
}

/// Stieltjes transform at z = re + i im with im > 0.
///
/// # Safety
/// `spec` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_stieltjes(
    spec: *const RmtSpectrum,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RmtStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out_re, "out_re")?;
        non_null(out_im, "out_im")?;
        let v = lift(solve_stieltjes(&(*spec).0, Complex64::new(re, im)))?;
        *out_re = v.m.re;
        *out_im = v.m.im;
        Ok(())
    })
}

/// Writes the support intervals into `lo[i], hi[i]` for i < capacity and their number into
/// `count`. Returns BufferTooSmall (with `count` set) when capacity is insufficient.
///
/// # Safety
/// `lo` and `hi` must hold `capacity` doubles; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_support(
    spec: *const RmtSpectrum,
    lo: *mut f64,
    hi: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> RmtStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(count, "count")?;
        let s = lift(support(&(*spec).0))?;
        *count = s.intervals.len();
        if s.intervals.len() > capacity {
            set_error(format!("{} intervals, capacity {capacity}", s.intervals.len()));
            return Err(RmtStatus::BufferTooSmall);
        }
        non_null(lo, "lo")?;
        non_null(hi, "hi")?;
        for (i, (a, b)) in s.intervals.iter().enumerate() {
            *lo.add(i) = *a;
            *hi.add(i) = *b;
        }
        Ok(())
    })
}

/// First cusp of the spectrum; `found` is set to 0 when there is none.
///
/// # Safety
/// `spec` must be a live handle; `out` and `found` writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_cusp(spec: *const RmtSpectrum, out: *mut RmtCusp, found: *mut i32) -> RmtStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        non_null(found, "found")?;
        let list = lift(cusps(&(*spec).0))?;
        match list.first() {
            Some(c) => {
                *out = RmtCusp {
                    a: c.a,
                    c: c.c,
                    g3: c.g3,
                    sigma: c.sigma_limit,
                    cube_root_coefficient: c.cube_root_coefficient,
                };
                *found = 1;
            }
            None => *found = 0,
        }
        Ok(())
    })
}

/// Creates a Pearcey kernel with parameter tau.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_pearcey_new(tau: f64, out: *mut *mut RmtPearcey) -> RmtStatus {
    guard(|| {
        non_null(out, "out")?;
        let k = lift(PearceyKernel::new(PearceyParams::new(tau)))?;
        *out = Box::into_raw(Box::new(RmtPearcey(k)));
        Ok(())
    })
}

/// # Safety
/// `k` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_pearcey_eval(k: *const RmtPearcey, x: f64, y: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        non_null(k, "kernel")?;
        non_null(out, "out")?;
        *out = lift((*k).0.eval(x, y))?;
        Ok(())
    })
}

/// Releases a Pearcey kernel; null is ignored.
///
/// # Safety
/// `k` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmt_pearcey_free(k: *mut RmtPearcey) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Bessel kernel K_alpha(x, y) for x, y > 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_bessel_kernel(alpha: i32, x: f64, y: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(bessel_kernel(alpha, x, y))?;
        Ok(())
    })
}

/// Hard-edge gap probability F_alpha(s).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_f_alpha(alpha: i32, s: f64, order: usize, out: *mut RmtGap) -> RmtStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = lift(f_alpha(alpha, s, order))?;
        *out = RmtGap {
            value: g.value,
            error_estimate: g.error_estimate,
            order: g.order,
        };
        Ok(())
    })
}

/// s F_alpha'(s).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_s_df_ds(alpha: i32, s: f64, order: usize, out: *mut f64) -> RmtStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(s_df_ds(alpha, s, order))?;
        Ok(())
    })
}

/// F_alpha(s) corrected at order 1/N.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_hard_edge_prediction(
    alpha: i32,
    s: f64,
    big_n: usize,
    sigma_n: f64,
    zeta_n: f64,
    order: usize,
    out: *mut f64,
) -> RmtStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(hard_edge_prediction(alpha, s, big_n, sigma_n, zeta_n, order))?.prediction;
        Ok(())
    })
}

/// Pearcey gap probability on [s, t].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmt_pearcey_gap(tau: f64, s: f64, t: f64, order: usize, out: *mut RmtGap) -> RmtStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = lift(pearcey_gap(tau, s, t, order))?;
        *out = RmtGap {
            value: g.value,
            error_estimate: g.error_estimate,
            order: g.order,
        };
        Ok(())
    })
}

/// Eigenvalues of one sampled matrix (1/N) X diag(lambdas) X^*, ascending, into `out`
/// which must hold `big_n` doubles.
///
/// # Safety
/// `lambdas` must point to `n` doubles and `out` to `big_n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rmt_sample_eigenvalues(
    lambdas: *const f64,
    n: usize,
    big_n: usize,
    seed: u64,
    replica: u64,
    out: *mut f64,
) -> RmtStatus {
    guard(|| {
        non_null(lambdas, "lambdas")?;
        non_null(out, "out")?;
        let l = std::slice::from_raw_parts(lambdas, n);
        let ev = lift(sample_eigenvalues(l, big_n, seed, replica))?;
        ptr::copy_nonoverlapping(ev.as_ptr(), out, ev.len());
        Ok(())
    })
}
