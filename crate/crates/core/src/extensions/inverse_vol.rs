//! Constraints scaled by the inverse of the volatility function `Sigma(z)`.
//!
//! With a constant market price of risk and `K(z) = [alpha, beta] / Sigma(z)`
//! the optimum is the constant-volatility mix `Cap(pi_M, alpha, beta) / Sigma(z)`.
//! With the Heston market price `eta sqrt(z)` and `K(z) = sqrt(z) / Sigma(z) [alpha, beta]`
//! the optimum is `sqrt(z) / Sigma(z) pi*(t)`.

use crate::heston::{IntervalConstraint, MarketParams};
use crate::policy::{solve_b, PiecewiseB, SolveOptions};
use crate::{Error, Result};

/// Volatility `Sigma(z)` of the risky asset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolFunction {
    /// `Sigma(z) = c`
    Constant(f64),
    /// `Sigma(z) = sqrt(z)`
    SqrtZ,
    /// `Sigma(z) = scale * z^exponent`
    Power { exponent: f64, scale: f64 },
}

impl VolFunction {
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain(format!(
                "volatility factor must be positive, got {z}"
            )));
        }
        let value = match *self {
            VolFunction::Constant(c) => c,
            VolFunction::SqrtZ => z.sqrt(),
            VolFunction::Power { exponent, scale } => scale * z.powf(exponent),
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain(format!(
                "volatility function must be positive and finite, got {value} at z = {z}"
            )));
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseVolCase {
    /// Constant market price of risk `eta`.
    ConstantPrice,
    /// Heston market price of risk `eta sqrt(z)`.
    HestonPrice,
}

/// Feedback policy `(t, z) -> pi*_z(t)`.
#[derive(Debug, Clone)]
pub struct InverseVolPolicy {
    vol: VolFunction,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Constant(f64),
    Heston(Box<PiecewiseB>),
}

impl InverseVolPolicy {
    /// The Heston case solves the core problem and checks its assumptions
    /// unless `opts.force` is set.
    pub fn new(
        p: &MarketParams,
        vol: VolFunction,
        core: &IntervalConstraint,
        case: InverseVolCase,
        opts: SolveOptions,
    ) -> Result<Self> {
        let kind = match case {
            InverseVolCase::ConstantPrice => Kind::Constant(core.cap(p.merton_ratio())),
            InverseVolCase::HestonPrice => Kind::Heston(Box::new(solve_b(p, core, opts)?)),
        };
        Ok(Self { vol, kind })
    }

    pub fn weight(&self, t: f64, z: f64) -> Result<f64> {
        let sigma = self.vol.eval(z)?;
        Ok(match &self.kind {
            Kind::Constant(mix) => mix / sigma,
            Kind::Heston(sol) => z.sqrt() / sigma * sol.pi_star(t),
        })
    }
}

/// One-shot evaluation of the optimal policy at `(t, z)`.
pub fn inverse_vol_policy(
    p: &MarketParams,
    vol: VolFunction,
    core: &IntervalConstraint,
    case: InverseVolCase,
    t: f64,
    z: f64,
) -> Result<f64> {
    vol.eval(z)?;
    InverseVolPolicy::new(p, vol, core, case, SolveOptions::default())?.weight(t, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> IntervalConstraint {
        IntervalConstraint::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn sqrt_volatility_recovers_plain_policy() {
        let p = MarketParams::base();
        let sol = solve_b(&p, &unit(), SolveOptions::default()).unwrap();
        let pol = InverseVolPolicy::new(
            &p,
            VolFunction::SqrtZ,
            &unit(),
            InverseVolCase::HestonPrice,
            SolveOptions::default(),
        )
        .unwrap();
        for t in [0.0, 0.25, 0.5, 0.99, 1.0] {
            for z in [0.05, 0.35, 2.0] {
                assert_eq!(pol.weight(t, z).unwrap(), sol.pi_star(t));
            }
        }
    }

    #[test]
    fn constant_volatility_is_a_constant_mix() {
        let p = MarketParams::base();
        let k = IntervalConstraint::new(0.0, 0.5).unwrap();
        for z in [0.1, 0.35, 3.0] {
            let w = inverse_vol_policy(
                &p,
                VolFunction::Constant(0.2),
                &k,
                InverseVolCase::ConstantPrice,
                0.3,
                z,
            )
            .unwrap();
            assert_eq!(w, 0.5 / 0.2);
        }
    }

    #[test]
    fn linear_volatility_scales_by_inverse_root() {
        let p = MarketParams::base();
        let vol = VolFunction::Power {
            exponent: 1.0,
            scale: 1.0,
        };
        let sol = solve_b(&p, &unit(), SolveOptions::default()).unwrap();
        let w =
            inverse_vol_policy(&p, vol, &unit(), InverseVolCase::HestonPrice, 0.0, 0.35).unwrap();
        assert!((w - sol.pi_star(0.0) / 0.35f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rescaled_policy_is_factor_independent() {
        let p = MarketParams::base();
        let vol = VolFunction::Power {
            exponent: 0.8,
            scale: 1.3,
        };
        let pol = InverseVolPolicy::new(
            &p,
            vol,
            &unit(),
            InverseVolCase::HestonPrice,
            SolveOptions::default(),
        )
        .unwrap();
        let t = 0.4;
        let reference = pol.weight(t, 0.35).unwrap() * vol.eval(0.35).unwrap() / 0.35f64.sqrt();
        for z in [0.01, 0.2, 1.0, 5.0] {
            let v = pol.weight(t, z).unwrap() * vol.eval(z).unwrap() / z.sqrt();
            assert!((v - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn non_positive_factor_is_a_domain_error() {
        let p = MarketParams::base();
        for z in [0.0, -0.1] {
            assert!(matches!(
                inverse_vol_policy(
                    &p,
                    VolFunction::SqrtZ,
                    &unit(),
                    InverseVolCase::ConstantPrice,
                    0.0,
                    z
                ),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn heston_case_checks_assumptions() {
        let p = MarketParams::stressed();
        let k = IntervalConstraint::new(2.0 * p.merton_ratio(), 1.0).unwrap();
        assert!(matches!(
            inverse_vol_policy(
                &p,
                VolFunction::SqrtZ,
                &k,
                InverseVolCase::HestonPrice,
                0.0,
                0.35
            ),
            Err(Error::Assumption(_))
        ));
    }
}
