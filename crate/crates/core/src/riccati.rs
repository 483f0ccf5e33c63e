//! Constant-coefficient Riccati equations `B' = -r0 + r1 B + r2/2 B^2`.
//!
//! Closed-form solution, lifetime (finite-time blow-up), hitting times of a
//! level and the time integral. Every closed form is cross-checked against
//! [`crate::numeric`] in tests.

use crate::heston::ExtendedReal;
use crate::numeric::{adaptive_simpson, bisect};
use crate::{Error, Result};

/// Absolute tolerance of the adaptive Simpson rule used for time integrals.
pub const INTEGRAL_TOL: f64 = 1e-10;

/// Above this value of `r3 * tau` the solution is evaluated in the
/// `exp(-r3 tau)` form to avoid overflow.
const SCALED_FORM_THRESHOLD: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiCoeffs {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    r3: Option<f64>,
}

impl RiccatiCoeffs {
    pub fn new(r0: f64, r1: f64, r2: f64) -> Self {
        let disc = r1 * r1 + 2.0 * r0 * r2;
        let r3 = (disc > 0.0 && r2 != 0.0 && disc.is_finite()).then(|| disc.sqrt());
        Self { r0, r1, r2, r3 }
    }

    /// `r1^2 + 2 r0 r2`
    pub fn discriminant(&self) -> f64 {
        self.r1 * self.r1 + 2.0 * self.r0 * self.r2
    }

    /// `sqrt(r1^2 + 2 r0 r2)` when the closed form exists.
    pub fn r3(&self) -> Option<f64> {
        self.r3
    }

    pub fn require_r3(&self) -> Result<f64> {
        self.r3.ok_or(Error::Coefficient {
            zone: None,
            discriminant: self.discriminant(),
        })
    }

    /// Right-hand side `-r0 + r1 B + r2/2 B^2`.
    pub fn rhs(&self, b: f64) -> f64 {
        -self.r0 + self.r1 * b + 0.5 * self.r2 * b * b
    }
}

/// Lifetime `t+(B0)`: finite iff `r1 + r2 B0 - r3 > 0`.
pub fn riccati_lifetime(coeffs: &RiccatiCoeffs, b0: f64) -> Result<ExtendedReal> {
    let r3 = coeffs.require_r3()?;
    let q = coeffs.r1 + coeffs.r2 * b0 - r3;
    if q > 0.0 {
        Ok(ExtendedReal::Finite((2.0 * r3 / q).ln_1p() / r3))
    } else {
        Ok(ExtendedReal::PosInf)
    }
}

/// Time at which the flow started at `b0` reaches `target`, `+inf` if never.
///
/// Returns NaN-free results only; a NaN from the closed form (cancellation
/// in degenerate inputs) is reported as `None` in the inner helper and then
/// treated as unreachable here. [`RiccatiFlow::transition_time_within`]
/// falls back to bisection in that case.
pub fn transition_time(coeffs: &RiccatiCoeffs, b0: f64, target: f64) -> Result<ExtendedReal> {
    let lifetime = riccati_lifetime(coeffs, b0)?;
    Ok(closed_transition(coeffs, b0, target, lifetime).unwrap_or(ExtendedReal::PosInf))
}

fn closed_transition(
    coeffs: &RiccatiCoeffs,
    b0: f64,
    target: f64,
    lifetime: ExtendedReal,
) -> Option<ExtendedReal> {
    if target == b0 {
        return Some(ExtendedReal::Finite(0.0));
    }
    let r3 = coeffs.r3?;
    let q = coeffs.r1 + coeffs.r2 * b0 - r3;
    let s = coeffs.r1 + coeffs.r2 * target + r3;
    let denom = q * s;
    if denom == 0.0 {
        // b0 is a rest point, or target is the repelling/attracting rest point
        return Some(ExtendedReal::PosInf);
    }
    let ratio = 2.0 * coeffs.r2 * r3 * (target - b0) / denom;
    if ratio.is_nan() {
        return None;
    }
    if ratio <= -1.0 {
        return Some(ExtendedReal::PosInf);
    }
    let tau = ratio.ln_1p() / r3;
    if tau.is_nan() {
        return None;
    }
    if tau < 0.0 || !tau.is_finite() || !lifetime.gt(tau) {
        return Some(ExtendedReal::PosInf);
    }
    Some(ExtendedReal::Finite(tau))
}

/// A Riccati solution with its initial value and lifetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiFlow {
    pub coeffs: RiccatiCoeffs,
    pub b0: f64,
    pub lifetime: ExtendedReal,
    r3: f64,
}

/// Quadrature value of the time integral next to the two closed-form displays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralReport {
    /// Adaptive Simpson, the reference value.
    pub quadrature: f64,
    /// Antiderivative with exponent `(r3 - r1) T / 2`.
    pub closed_form: f64,
    /// Antiderivative as printed, with exponent `(r3 - B0) T / 2`.
    pub printed_form: f64,
}

impl IntegralReport {
    pub fn closed_form_error(&self) -> f64 {
        (self.closed_form - self.quadrature).abs()
    }

    pub fn printed_form_error(&self) -> f64 {
        (self.printed_form - self.quadrature).abs()
    }
}

impl RiccatiFlow {
    pub fn new(coeffs: RiccatiCoeffs, b0: f64) -> Result<Self> {
        let r3 = coeffs.require_r3()?;
        let lifetime = riccati_lifetime(&coeffs, b0)?;
        Ok(Self {
            coeffs,
            b0,
            lifetime,
            r3,
        })
    }

    pub fn r3(&self) -> f64 {
        self.r3
    }

    fn check(&self, tau: f64) -> Result<()> {
        if self.lifetime.gt(tau) {
            Ok(())
        } else {
            Err(Error::LifetimeExceeded {
                tau,
                lifetime: self.lifetime.to_f64(),
            })
        }
    }

    /// `B(tau)`; fails for `tau` at or beyond the lifetime.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        self.check(tau)?;
        Ok(self.value(tau))
    }

    /// Closed form without the lifetime check.
    pub fn value(&self, tau: f64) -> f64 {
        if tau == 0.0 {
            return self.b0;
        }
        let RiccatiCoeffs { r1, r2, .. } = self.coeffs;
        let r3 = self.r3;
        let q = r1 + r2 * self.b0 - r3;
        let x = r3 * tau;
        let (num, den) = if x <= SCALED_FORM_THRESHOLD {
            let e = x.exp_m1();
            (
                2.0 * r2 * r3 * self.b0 + e * (r1 + r3) * q,
                2.0 * r2 * r3 - r2 * e * q,
            )
        } else {
            // numerator and denominator divided by exp(r3 tau)
            let w = (-x).exp();
            (
                2.0 * r2 * r3 * self.b0 * w + (1.0 - w) * (r1 + r3) * q,
                2.0 * r2 * r3 * w - r2 * (1.0 - w) * q,
            )
        };
        num / den
    }

    /// `B'(tau)` from the ODE right-hand side.
    pub fn derivative(&self, tau: f64) -> Result<f64> {
        Ok(self.coeffs.rhs(self.eval(tau)?))
    }

    /// `int_0^t B` by adaptive Simpson.
    pub fn integral(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(adaptive_simpson(&|s| self.value(s), 0.0, t, INTEGRAL_TOL))
    }

    pub fn integral_report(&self, t: f64) -> Result<IntegralReport> {
        let quadrature = self.integral(t)?;
        let RiccatiCoeffs { r1, r2, .. } = self.coeffs;
        let r3 = self.r3;
        let w = (-r3 * t).exp();
        let scaled_den = r3 * (1.0 + w) - (r1 + r2 * self.b0) * (1.0 - w);
        let closed_form = 2.0 / r2 * ((2.0 * r3).ln() - 0.5 * (r3 + r1) * t - scaled_den.ln());
        let printed_form = closed_form + (r1 - self.b0) * t / r2;
        Ok(IntegralReport {
            quadrature,
            closed_form,
            printed_form,
        })
    }

    /// Closed-form hitting time of `target`, `+inf` if never reached.
    pub fn transition_time(&self, target: f64) -> ExtendedReal {
        closed_transition(&self.coeffs, self.b0, target, self.lifetime)
            .unwrap_or(ExtendedReal::PosInf)
    }

    /// Hitting time of `target` within `[0, horizon]`.
    ///
    /// Uses the closed form; if that is NaN, brackets the crossing on the
    /// solution itself and bisects to `1e-12`.
    pub fn transition_time_within(&self, target: f64, horizon: f64) -> ExtendedReal {
        match closed_transition(&self.coeffs, self.b0, target, self.lifetime) {
            Some(t) => t,
            None => {
                let end = match self.lifetime {
                    ExtendedReal::Finite(l) => horizon.min(l * (1.0 - 1e-12)),
                    _ => horizon,
                };
                bisect(|s| self.value(s) - target, 0.0, end, 1e-12)
                    .map(ExtendedReal::Finite)
                    .unwrap_or(ExtendedReal::PosInf)
            }
        }
    }
}

pub fn riccati_eval(flow: &RiccatiFlow, tau: f64) -> Result<f64> {
    flow.eval(tau)
}

pub fn riccati_integral(flow: &RiccatiFlow, t: f64) -> Result<f64> {
    flow.integral(t)
}
