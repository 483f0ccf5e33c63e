//! Heston market, allocation constraint, zone coefficients and the standing
//! assumptions of the constrained CRRA problem.

mod assumptions;
mod constraint;
mod params;
mod zones;

use std::fmt;

pub use assumptions::{check_assumptions, AssumptionReport, BlowupCheck};
pub use constraint::{support_function, ExtendedReal, IntervalConstraint};
pub use params::{merton_ratio, validate_params, MarketParams, ValidationReport, Violation};
pub use zones::{lambda_star, zone_system, ZoneSystem};

/// Region of `rho * B` deciding which bound, if any, is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    /// `rho B < B-`: the lower bound binds.
    Minus,
    /// `B- <= rho B <= B+`: unconstrained interior.
    Mid,
    /// `rho B > B+`: the upper bound binds.
    Plus,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Minus, Zone::Mid, Zone::Plus];

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Minus => "minus",
            Zone::Mid => "mid",
            Zone::Plus => "plus",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
