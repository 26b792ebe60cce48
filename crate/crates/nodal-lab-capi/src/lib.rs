//! C ABI over the solver: opaque solution handles, integer status codes,
//! and limit-constant lookups. Every entry point catches panics and
//! reports them as a status; the last error message is kept in
//! thread-local storage and retrievable with [`nodal_last_error_message`].
//! The generated header lives in `include/nodal_lab.h`.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nodal_lab::constants::{kappa, ConstantsTable, LimitFamily};
use nodal_lab::error::Error;
use nodal_lab::params::{Bc, ProblemParams};
use nodal_lab::solutions::{dirichlet_solution, neumann_solution, NodalSolution};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodalStatus {
    /// Success.
    Ok = 0,
    /// A parameter is outside its documented domain.
    InvalidParams = 1,
    /// A feature or constant index is outside its family's range.
    IndexOutOfRange = 2,
    /// The computation failed numerically (non-convergence, overflow, ...).
    NumericFailure = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
    /// The library panicked; treat the handle as poisoned.
    Panic = 5,
}

/// Boundary condition selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodalBc {
    /// Solution vanishes on the unit-ball boundary.
    Dirichlet = 0,
    /// Normal derivative vanishes on the unit-ball boundary.
    Neumann = 1,
    /// Entire-space solution (constant lookups only).
    WholeSpace = 2,
}

impl From<NodalBc> for Bc {
    fn from(bc: NodalBc) -> Bc {
        match bc {
            NodalBc::Dirichlet => Bc::Dirichlet,
            NodalBc::Neumann => Bc::Neumann,
            NodalBc::WholeSpace => Bc::WholeSpace,
        }
    }
}

/// Limit-constant family selector, mirroring the feature kinds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodalFamily {
    /// Scaled critical values `|u(delta_k)|`.
    CritValue = 0,
    /// Scaled critical radii `delta_k`.
    CritRadius = 1,
    /// Scaled zero slopes `|u'(rho_k)|`.
    ZeroSlope = 2,
    /// Scaled zero radii `rho_k`.
    ZeroRadius = 3,
}

impl From<NodalFamily> for LimitFamily {
    fn from(family: NodalFamily) -> LimitFamily {
        match family {
            NodalFamily::CritValue => LimitFamily::CritValue,
            NodalFamily::CritRadius => LimitFamily::CritRadius,
            NodalFamily::ZeroSlope => LimitFamily::ZeroSlope,
            NodalFamily::ZeroRadius => LimitFamily::ZeroRadius,
        }
    }
}

/// Opaque handle to a constructed nodal ball solution.
pub struct NodalSolutionHandle {
    inner: NodalSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn status_of(err: &Error) -> NodalStatus {
    match err {
        Error::InvalidParams(_) | Error::OutOfRange { .. } => NodalStatus::InvalidParams,
        Error::IndexError { .. } => NodalStatus::IndexOutOfRange,
        _ => NodalStatus::NumericFailure,
    }
}

fn fail(err: &Error) -> NodalStatus {
    set_error(err.to_string());
    status_of(err)
}

/// Runs `body` with panics converted to [`NodalStatus::Panic`].
fn guarded(body: impl FnOnce() -> NodalStatus) -> NodalStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".into());
            set_error(format!("library panic: {message}"));
            NodalStatus::Panic
        }
    }
}

/// Copies the message for the most recent error on this thread into
/// `buf` (NUL-terminated, truncated to `cap - 1` bytes) and returns the
/// full message length in bytes, excluding the NUL. With a null `buf` or
/// zero `cap`, only the length is reported.
///
/// # Safety
///
/// `buf` must be null or point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nodal_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let copy = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), copy);
            *buf.add(copy) = 0;
        }
        bytes.len()
    })
}

unsafe fn write_out<T>(ptr: *mut T, value: T) -> Result<(), NodalStatus> {
    if ptr.is_null() {
        set_error("output pointer is null");
        return Err(NodalStatus::NullPointer);
    }
    ptr.write(value);
    Ok(())
}

unsafe fn borrow_handle<'a>(
    sol: *const NodalSolutionHandle,
) -> Result<&'a NodalSolution, NodalStatus> {
    if sol.is_null() {
        set_error("solution handle is null");
        return Err(NodalStatus::NullPointer);
    }
    Ok(&(*sol).inner)
}

/// Constructs the nodal radial solution with `m` nodal regions on the
/// unit ball and stores an owned handle in `*out`. Neumann solutions
/// need `m >= 2`; `NodalBc_WholeSpace` is rejected here. Free the handle
/// with [`nodal_solution_free`].
///
/// # Safety
///
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_create(
    n: u32,
    eps: f64,
    m: usize,
    bc: NodalBc,
    out: *mut *mut NodalSolutionHandle,
) -> NodalStatus {
    guarded(|| {
        if out.is_null() {
            set_error("output pointer is null");
            return NodalStatus::NullPointer;
        }
        let built = match bc {
            NodalBc::Dirichlet => dirichlet_solution(n, eps, m),
            NodalBc::Neumann => neumann_solution(n, eps, m),
            NodalBc::WholeSpace => Err(Error::InvalidParams(
                "whole-space profiles are not ball solutions; use the constant lookups".into(),
            )),
        };
        match built {
            Ok(inner) => {
                out.write(Box::into_raw(Box::new(NodalSolutionHandle { inner })));
                NodalStatus::Ok
            }
            Err(err) => {
                out.write(std::ptr::null_mut());
                fail(&err)
            }
        }
    })
}

/// Releases a handle returned by [`nodal_solution_create`]. Null is
/// accepted and ignored.
///
/// # Safety
///
/// `sol` must be null or a handle from [`nodal_solution_create`] that
/// has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_free(sol: *mut NodalSolutionHandle) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Reports the solution's parameters and normalization: dimension,
/// nodal regions, subcriticality, sign of `u(0)`, interior scale radius
/// `R`, and amplitude `A = R^{2/(p-1)}`. Any output pointer may be null
/// to skip that field.
///
/// # Safety
///
/// `sol` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_info(
    sol: *const NodalSolutionHandle,
    n: *mut u32,
    m: *mut usize,
    eps: *mut f64,
    sign: *mut f64,
    scale_radius: *mut f64,
    amplitude: *mut f64,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if !n.is_null() {
            n.write(solution.params().n());
        }
        if !m.is_null() {
            m.write(solution.m());
        }
        if !eps.is_null() {
            eps.write(solution.params().eps());
        }
        if !sign.is_null() {
            sign.write(solution.sign());
        }
        if !scale_radius.is_null() {
            scale_radius.write(solution.scale_radius());
        }
        if !amplitude.is_null() {
            amplitude.write(solution.amplitude_factor());
        }
        NodalStatus::Ok
    })
}

/// Evaluates the solution and its radial derivative at `x` in `[0, 1]`.
///
/// # Safety
///
/// `sol` must be a live handle; `u` and `du` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_evaluate(
    sol: *const NodalSolutionHandle,
    x: f64,
    u: *mut f64,
    du: *mut f64,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match solution.evaluate(x) {
            Ok((value, slope)) => {
                if let Err(status) = write_out(u, value) {
                    return status;
                }
                if let Err(status) = write_out(du, slope) {
                    return status;
                }
                NodalStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Number of interior critical points (equals the region count `m`;
/// the innermost is the origin).
///
/// # Safety
///
/// `sol` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_critical_count(
    sol: *const NodalSolutionHandle,
    count: *mut usize,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match write_out(count, solution.criticals().len()) {
            Ok(()) => NodalStatus::Ok,
            Err(status) => status,
        }
    })
}

/// Number of zeros (Dirichlet: `m`, counting the boundary; Neumann:
/// `m - 1`, all interior).
///
/// # Safety
///
/// `sol` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_zero_count(
    sol: *const NodalSolutionHandle,
    count: *mut usize,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match write_out(count, solution.zeros().len()) {
            Ok(()) => NodalStatus::Ok,
            Err(status) => status,
        }
    })
}

/// Looks up critical point `k` (1-based, outermost first): its radius
/// `delta_k` and signed value `u(delta_k)`.
///
/// # Safety
///
/// `sol` must be a live handle; `radius` and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_critical(
    sol: *const NodalSolutionHandle,
    k: usize,
    radius: *mut f64,
    value: *mut f64,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match solution.critical(k) {
            Ok(feature) => {
                if let Err(status) = write_out(radius, feature.radius) {
                    return status;
                }
                if let Err(status) = write_out(value, feature.value) {
                    return status;
                }
                NodalStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Looks up zero `k` (1-based, outermost first): its radius `rho_k` and
/// signed slope `u'(rho_k)`.
///
/// # Safety
///
/// `sol` must be a live handle; `radius` and `slope` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_zero(
    sol: *const NodalSolutionHandle,
    k: usize,
    radius: *mut f64,
    slope: *mut f64,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match solution.zero(k) {
            Ok(feature) => {
                if let Err(status) = write_out(radius, feature.radius) {
                    return status;
                }
                if let Err(status) = write_out(slope, feature.slope) {
                    return status;
                }
                NodalStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Computes the energy pair: the Dirichlet integral of `|grad u|^2` and
/// the `L^{p+1}` power integral (equal for every solution here).
///
/// # Safety
///
/// `sol` must be a live handle; `grad_sq` and `lp_integral` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_energy(
    sol: *const NodalSolutionHandle,
    grad_sq: *mut f64,
    lp_integral: *mut f64,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match solution.energy() {
            Ok(energy) => {
                if let Err(status) = write_out(grad_sq, energy.grad_sq) {
                    return status;
                }
                if let Err(status) = write_out(lp_integral, energy.lp_integral) {
                    return status;
                }
                NodalStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Computes the relative residual of the variational balance identity;
/// values near machine precision confirm the profile solves the
/// equation.
///
/// # Safety
///
/// `sol` must be a live handle; `residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_solution_pohozaev_residual(
    sol: *const NodalSolutionHandle,
    residual: *mut f64,
) -> NodalStatus {
    guarded(|| {
        let solution = match borrow_handle(sol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match solution.pohozaev_residual() {
            Ok(value) => match write_out(residual, value) {
                Ok(()) => NodalStatus::Ok,
                Err(status) => status,
            },
            Err(err) => fail(&err),
        }
    })
}

/// Stores the dimensional constant `kappa_n = (n-2)/4 * Gamma(n/2)^2 /
/// Gamma(n)` in `*out`.
///
/// # Safety
///
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_kappa(n: u32, out: *mut f64) -> NodalStatus {
    guarded(|| match kappa(n) {
        Ok(value) => match write_out(out, value) {
            Ok(()) => NodalStatus::Ok,
            Err(status) => status,
        },
        Err(err) => fail(&err),
    })
}

/// Stores the bubble normalization `gamma_n = (n(n-2))^{(n-2)/4}` in
/// `*out`.
///
/// # Safety
///
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_gamma(n: u32, out: *mut f64) -> NodalStatus {
    guarded(|| {
        if n < 3 {
            set_error(format!("dimension n = {n} below 3"));
            return NodalStatus::InvalidParams;
        }
        match write_out(out, nodal_lab::constants::gamma_n(n)) {
            Ok(()) => NodalStatus::Ok,
            Err(status) => status,
        }
    })
}

/// Stores the largest admissible subcriticality `4/(n-2)` in `*out`.
///
/// # Safety
///
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_eps_max(n: u32, out: *mut f64) -> NodalStatus {
    guarded(|| {
        if n < 3 {
            set_error(format!("dimension n = {n} below 3"));
            return NodalStatus::InvalidParams;
        }
        match write_out(out, ProblemParams::eps_max(n)) {
            Ok(()) => NodalStatus::Ok,
            Err(status) => status,
        }
    })
}

/// Stores the limit constant for feature `k` of `family` under `bc` in
/// `*out`: the value the suitably rescaled feature approaches as the
/// subcriticality vanishes. `m` is the region count for ball boundary
/// conditions and is ignored for `NodalBc_WholeSpace`, where `k` indexes
/// features of the entire-space profile directly.
///
/// # Safety
///
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nodal_limit_constant(
    n: u32,
    m: usize,
    bc: NodalBc,
    family: NodalFamily,
    k: usize,
    out: *mut f64,
) -> NodalStatus {
    guarded(|| {
        let table_m = if bc == NodalBc::WholeSpace { 1 } else { m };
        let table = match ConstantsTable::closed_form(n, table_m) {
            Ok(table) => table,
            Err(err) => return fail(&err),
        };
        match table.limit(bc.into(), family.into(), k) {
            Ok(value) => match write_out(out, value) {
                Ok(()) => NodalStatus::Ok,
                Err(status) => status,
            },
            Err(err) => fail(&err),
        }
    })
}
