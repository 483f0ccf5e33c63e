//! Zone decomposition of the `B` equation.
//!
//! With `x = eta + sigma rho B`, the pointwise minimisation over the dual
//! variable picks `lambda* = Cap(x, (1-b) alpha, (1-b) beta) - x`, which
//! splits the real line of `rho B` into three zones with their own
//! constant-coefficient Riccati equation.

use super::{ExtendedReal, IntervalConstraint, MarketParams, Zone};
use crate::riccati::RiccatiCoeffs;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneSystem {
    /// `((1-b) alpha - eta) / sigma`, `-inf` without a lower bound.
    pub b_minus: ExtendedReal,
    /// `((1-b) beta - eta) / sigma`, `+inf` without an upper bound.
    pub b_plus: ExtendedReal,
    /// `None` when the lower bound is infinite (zone empty).
    pub coeffs_minus: Option<RiccatiCoeffs>,
    pub coeffs_mid: RiccatiCoeffs,
    /// `None` when the upper bound is infinite (zone empty).
    pub coeffs_plus: Option<RiccatiCoeffs>,
    market: MarketParams,
    constraint: IntervalConstraint,
}

fn bound_coeffs(p: &MarketParams, bound: f64) -> RiccatiCoeffs {
    RiccatiCoeffs::new(
        0.5 * p.b * bound * ((1.0 - p.b) * bound - 2.0 * p.eta),
        p.b * p.sigma * p.rho * bound - p.kappa,
        p.sigma * p.sigma,
    )
}

/// Builds the three coefficient triples and the zone boundaries.
///
/// Only the zone containing `rho * 0 = 0` is required to admit a closed form
/// here; the other zones are checked when a trajectory actually enters them.
pub fn zone_system(p: &MarketParams, k: &IntervalConstraint) -> Result<ZoneSystem> {
    let zs = ZoneSystem::build(p, k);
    zs.closed_form(zs.classify(0.0))?;
    Ok(zs)
}

impl ZoneSystem {
    /// Coefficients and boundaries without any closed-form requirement.
    pub fn build(p: &MarketParams, k: &IntervalConstraint) -> Self {
        let ratio = p.b / (1.0 - p.b);
        let coeffs_mid = RiccatiCoeffs::new(
            -0.5 * ratio * p.eta * p.eta,
            ratio * p.eta * p.sigma * p.rho - p.kappa,
            p.sigma * p.sigma * (1.0 + ratio * p.rho * p.rho),
        );
        let boundary = |bound: f64| ((1.0 - p.b) * bound - p.eta) / p.sigma;
        ZoneSystem {
            b_minus: k
                .alpha()
                .finite()
                .map_or(ExtendedReal::NegInf, |a| boundary(a).into()),
            b_plus: k
                .beta()
                .finite()
                .map_or(ExtendedReal::PosInf, |b| boundary(b).into()),
            coeffs_minus: k.alpha().finite().map(|a| bound_coeffs(p, a)),
            coeffs_mid,
            coeffs_plus: k.beta().finite().map(|b| bound_coeffs(p, b)),
            market: *p,
            constraint: *k,
        }
    }

    pub fn market(&self) -> &MarketParams {
        &self.market
    }

    pub fn constraint(&self) -> &IntervalConstraint {
        &self.constraint
    }

    /// Zone of the state `B` (ties go to the mid zone).
    pub fn classify(&self, b: f64) -> Zone {
        let x = self.market.rho * b;
        if self.b_minus.gt(x) {
            Zone::Minus
        } else if self.b_plus.lt(x) {
            Zone::Plus
        } else {
            Zone::Mid
        }
    }

    /// Coefficients of a zone; `None` for an empty outer zone.
    pub fn coeffs(&self, zone: Zone) -> Option<RiccatiCoeffs> {
        match zone {
            Zone::Minus => self.coeffs_minus,
            Zone::Mid => Some(self.coeffs_mid),
            Zone::Plus => self.coeffs_plus,
        }
    }

    /// Coefficients of a zone that must admit the closed-form solution.
    pub fn closed_form(&self, zone: Zone) -> Result<RiccatiCoeffs> {
        let coeffs = self.coeffs(zone).ok_or_else(|| {
            Error::Domain(format!("the {zone} zone is empty for this constraint"))
        })?;
        match coeffs.r3() {
            Some(_) => Ok(coeffs),
            None => Err(Error::Coefficient {
                zone: Some(zone),
                discriminant: coeffs.discriminant(),
            }),
        }
    }

    /// The state value `B` at which `rho B` sits on the boundary of `zone`'s
    /// lower (`Minus`) or upper (`Plus`) edge. `None` if `rho = 0` or the
    /// boundary is infinite.
    pub fn boundary_state(&self, edge: Zone) -> Option<f64> {
        if self.market.rho == 0.0 {
            return None;
        }
        let bound = match edge {
            Zone::Minus => self.b_minus,
            Zone::Plus => self.b_plus,
            Zone::Mid => return None,
        };
        bound.finite().map(|v| v / self.market.rho)
    }

    /// `lambda*(B)`.
    pub fn lambda_star(&self, b: f64) -> f64 {
        let p = &self.market;
        let x = p.eta + p.sigma * p.rho * b;
        match self.classify(b) {
            Zone::Minus => (1.0 - p.b) * self.constraint.alpha().to_f64() - x,
            Zone::Plus => (1.0 - p.b) * self.constraint.beta().to_f64() - x,
            Zone::Mid => 0.0,
        }
    }

    /// Uncapped candidate `(eta + sigma rho B) / (1 - b)`.
    pub fn pi_hat(&self, b: f64) -> f64 {
        let p = &self.market;
        (p.eta + p.sigma * p.rho * b) / (1.0 - p.b)
    }

    /// Candidate policy `(eta + lambda* + sigma rho B) / (1 - b)` with the
    /// zone decided by the boundaries (equals `Cap(pi_hat)`).
    pub fn pi_star(&self, b: f64) -> f64 {
        match self.classify(b) {
            Zone::Minus => self.constraint.alpha().to_f64(),
            Zone::Plus => self.constraint.beta().to_f64(),
            Zone::Mid => self.pi_hat(b),
        }
    }

    /// Right-hand side `B'` of the zone-switching equation.
    pub fn rhs(&self, b: f64) -> f64 {
        match self.coeffs(self.classify(b)) {
            Some(c) => c.rhs(b),
            None => unreachable!("an empty zone is never classified"),
        }
    }

    /// Derivative of `lambda*` with respect to `B`.
    pub fn lambda_star_slope(&self, b: f64) -> f64 {
        match self.classify(b) {
            Zone::Mid => 0.0,
            _ => -self.market.sigma * self.market.rho,
        }
    }
}

/// `lambda*(B)` for the given market and constraint.
pub fn lambda_star(zs: &ZoneSystem, b: f64) -> f64 {
    zs.lambda_star(b)
}
