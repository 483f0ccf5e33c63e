//! C ABI over the `hestoncap` solver.
//!
//! Markets and solutions are opaque heap handles created and freed by the
//! library. Every fallible call returns an [`HcStatus`] and writes its result
//! through an out-pointer; the message of the last failure on the calling
//! thread is available from [`hc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hestoncap::heston::{validate_params, IntervalConstraint, MarketParams};
use hestoncap::policy::{solve_b, PiecewiseB, SolveOptions, ValueSurface};
use hestoncap::wel::{wel_report, DeterministicStrategy, WelOptions};
use hestoncap::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Market parameters or constraint bounds were rejected.
    InvalidArgument = 2,
    /// An assumption check failed and the solve was not forced.
    Assumption = 3,
    /// The solver or an integrator failed.
    SolverFailure = 4,
    /// The requested time lies outside `[0, T]` or a state is out of domain.
    Domain = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Competitor strategy for the welfare loss.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcCompetitor {
    /// Merton ratio projected onto the constraint.
    CappedMerton = 0,
    /// Unconstrained optimum projected onto the constraint.
    CappedUnconstrained = 1,
}

/// Market parameters in the layout accepted by [`hc_market_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HcMarketParams {
    pub r: f64,
    pub eta: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub z0: f64,
    pub b: f64,
    pub horizon: f64,
    pub v0: f64,
}

impl From<MarketParams> for HcMarketParams {
    fn from(p: MarketParams) -> Self {
        Self {
            r: p.r,
            eta: p.eta,
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            rho: p.rho,
            z0: p.z0,
            b: p.b,
            horizon: p.horizon,
            v0: p.v0,
        }
    }
}

impl From<HcMarketParams> for MarketParams {
    fn from(p: HcMarketParams) -> Self {
        Self {
            r: p.r,
            eta: p.eta,
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            rho: p.rho,
            z0: p.z0,
            b: p.b,
            horizon: p.horizon,
            v0: p.v0,
        }
    }
}

/// Opaque validated market.
pub struct HcMarket(MarketParams);

/// Opaque solved policy for one market and constraint.
pub struct HcSolution {
    solution: PiecewiseB,
    value: ValueSurface,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(e: &Error) -> HcStatus {
    match e {
        Error::InvalidParams(_) | Error::InvalidConstraint(_) | Error::Scenario(_) => {
            HcStatus::InvalidArgument
        }
        Error::Assumption(_) => HcStatus::Assumption,
        Error::Domain(_) | Error::LifetimeExceeded { .. } => HcStatus::Domain,
        Error::Factor { source, .. } => status_of(source),
        _ => HcStatus::SolverFailure,
    }
}

/// Runs `body`, recording failures and converting panics into [`HcStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), (HcStatus, String)>) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            HcStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("panic inside hestoncap");
            HcStatus::Panic
        }
    }
}

fn fail(e: Error) -> (HcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (HcStatus, String) {
    (HcStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (HcStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), (HcStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn check_time(t: f64, horizon: f64) -> Result<(), (HcStatus, String)> {
    if (0.0..=horizon).contains(&t) {
        Ok(())
    } else {
        Err((HcStatus::Domain, format!("t = {t} outside [0, {horizon}]")))
    }
}

/// Parameters of the reference calibration.
#[no_mangle]
pub extern "C" fn hc_market_params_base() -> HcMarketParams {
    MarketParams::base().into()
}

/// Validates `params` and stores a new market handle in `*out`.
///
/// # Safety
/// `params` must point to a valid [`HcMarketParams`] and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hc_market_new(
    params: *const HcMarketParams,
    out: *mut *mut HcMarket,
) -> HcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p: MarketParams = (*deref(params, "params")?).into();
        validate_params(&p).into_result().map_err(fail)?;
        write(out, Box::into_raw(Box::new(HcMarket(p))), "out")
    })
}

/// Releases a market handle; null is ignored.
///
/// # Safety
/// `market` must be null or a handle from [`hc_market_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hc_market_free(market: *mut HcMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Unconstrained optimal weight of the market.
///
/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hc_market_merton_ratio(
    market: *const HcMarket,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let m = deref(market, "market")?;
        write(out, m.0.merton_ratio(), "out")
    })
}

/// Solves the constrained problem on `[alpha, beta]`; pass `-INFINITY` or
/// `INFINITY` for an open side. With `force` non-zero the assumption checks
/// are reported but do not stop the solve.
///
/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hc_solve(
    market: *const HcMarket,
    alpha: f64,
    beta: f64,
    force: i32,
    out: *mut *mut HcSolution,
) -> HcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = deref(market, "market")?;
        let k = IntervalConstraint::new(alpha, beta).map_err(fail)?;
        let opts = if force != 0 {
            SolveOptions::forced()
        } else {
            SolveOptions::default()
        };
        let solution = solve_b(&m.0, &k, opts).map_err(fail)?;
        let value = ValueSurface::new(&solution);
        write(
            out,
            Box::into_raw(Box::new(HcSolution { solution, value })),
            "out",
        )
    })
}

/// Releases a solution handle; null is ignored.
///
/// # Safety
/// `solution` must be null or a handle from [`hc_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_free(solution: *mut HcSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Optimal constrained weight at calendar time `t`.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_weight(
    solution: *const HcSolution,
    t: f64,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        check_time(t, s.solution.market().horizon)?;
        write(out, s.solution.pi_star(t), "out")
    })
}

/// Factor loading of the value function at time to maturity `tau`.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_loading(
    solution: *const HcSolution,
    tau: f64,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        check_time(tau, s.solution.market().horizon)?;
        write(out, s.solution.eval(tau), "out")
    })
}

/// Optimal expected utility from wealth `v` and factor level `z` at time `t`.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_value(
    solution: *const HcSolution,
    t: f64,
    v: f64,
    z: f64,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        check_time(t, s.solution.market().horizon)?;
        if !(v > 0.0 && z >= 0.0) {
            return Err((
                HcStatus::Domain,
                format!("need v > 0 and z >= 0, got {v}, {z}"),
            ));
        }
        write(out, s.value.value(t, v, z), "out")
    })
}

/// Relative wealth-equivalent loss at time zero of `competitor` (an
/// [`HcCompetitor`] value) against the optimum.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hc_solution_welfare_loss(
    solution: *const HcSolution,
    competitor: i32,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let (p, k) = (s.solution.market(), s.solution.constraint());
        let strategy = match competitor {
            c if c == HcCompetitor::CappedMerton as i32 => {
                DeterministicStrategy::capped_merton(p, k)
            }
            c if c == HcCompetitor::CappedUnconstrained as i32 => {
                DeterministicStrategy::capped_unconstrained(p, k).map_err(fail)?
            }
            c => return Err((HcStatus::InvalidArgument, format!("unknown competitor {c}"))),
        };
        let report = wel_report(&s.solution, &strategy, WelOptions::default()).map_err(fail)?;
        write(out, report.l0, "out")
    })
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn hc_status_name(status: HcStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        HcStatus::Ok => b"ok\0",
        HcStatus::NullPointer => b"null pointer\0",
        HcStatus::InvalidArgument => b"invalid argument\0",
        HcStatus::Assumption => b"assumption check failed\0",
        HcStatus::SolverFailure => b"solver failure\0",
        HcStatus::Domain => b"domain error\0",
        HcStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}
