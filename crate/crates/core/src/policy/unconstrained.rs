//! Unconstrained optimum: `B_u` in closed form and `pi_u`.

use crate::heston::{IntervalConstraint, MarketParams, ZoneSystem};
use crate::riccati::RiccatiCoeffs;
use crate::{Error, Result};

/// `B_u(tau) = 2 r0 (e^{r3 tau} - 1) / ((r1 - r3)(e^{r3 tau} - 1) - 2 r3)`
/// with the mid-zone coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnconstrainedB {
    pub coeffs: RiccatiCoeffs,
    r3: f64,
    market: MarketParams,
}

/// Left side of the single existence inequality of the unconstrained
/// problem, `b/(1-b) eta (kappa rho / sigma + eta / 2)`, and its bound
/// `kappa^2 / (2 sigma^2)`.
pub fn unconstrained_condition(p: &MarketParams) -> (f64, f64) {
    (
        p.b / (1.0 - p.b) * p.eta * (p.kappa * p.rho / p.sigma + 0.5 * p.eta),
        p.kappa * p.kappa / (2.0 * p.sigma * p.sigma),
    )
}

impl UnconstrainedB {
    pub fn new(p: &MarketParams) -> Result<Self> {
        let (lhs, bound) = unconstrained_condition(p);
        if !(lhs < bound) {
            return Err(Error::Assumption(format!(
                "unconstrained existence condition fails: {lhs} >= {bound}"
            )));
        }
        let coeffs = ZoneSystem::build(p, &IntervalConstraint::unconstrained()).coeffs_mid;
        let r3 = coeffs.require_r3()?;
        let this = Self {
            coeffs,
            r3,
            market: *p,
        };
        // the denominator must stay away from zero on [0, T]
        let den_end = this.denominator(p.horizon);
        if !(den_end < 0.0) {
            return Err(Error::Assumption(format!(
                "unconstrained solution blows up before T = {}",
                p.horizon
            )));
        }
        Ok(this)
    }

    fn denominator(&self, tau: f64) -> f64 {
        let e = (self.r3 * tau).exp_m1();
        (self.coeffs.r1 - self.r3) * e - 2.0 * self.r3
    }

    pub fn eval(&self, tau: f64) -> f64 {
        if tau == 0.0 {
            return 0.0;
        }
        let x = self.r3 * tau;
        if x <= 30.0 {
            let e = x.exp_m1();
            2.0 * self.coeffs.r0 * e / ((self.coeffs.r1 - self.r3) * e - 2.0 * self.r3)
        } else {
            let w = (-x).exp();
            2.0 * self.coeffs.r0 * (1.0 - w)
                / ((self.coeffs.r1 - self.r3) * (1.0 - w) - 2.0 * self.r3 * w)
        }
    }

    /// `pi_u(t) = (eta + sigma rho B_u(T - t)) / (1 - b)`.
    pub fn pi(&self, t: f64) -> f64 {
        let p = &self.market;
        (p.eta + p.sigma * p.rho * self.eval(p.horizon - t)) / (1.0 - p.b)
    }
}

/// `pi_u(t)`; fails when the unconstrained existence condition does not hold.
pub fn pi_unconstrained(p: &MarketParams, t: f64) -> Result<f64> {
    Ok(UnconstrainedB::new(p)?.pi(t))
}
