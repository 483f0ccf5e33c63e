//! Market and preference parameters of the Heston model
//!
//! ```text
//! dP1 = P1 (r + eta z) dt + P1 sqrt(z) dW,      dW = rho dW^z + sqrt(1 - rho^2) dW^
//! dz  = kappa (theta - z) dt + sigma sqrt(z) dW^z
//! U(v) = v^b / b
//! ```

use std::fmt;

/// Heston market together with the CRRA investor's preferences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Risk-free rate (1/yr).
    pub r: f64,
    /// Market price of risk driver; the risk premium is `eta * z`.
    pub eta: f64,
    /// Mean reversion speed of the variance.
    pub kappa: f64,
    /// Long-term variance.
    pub theta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Correlation between the stock and variance shocks.
    pub rho: f64,
    /// Initial variance.
    pub z0: f64,
    /// CRRA exponent, `b < 1`, `b != 0`.
    pub b: f64,
    /// Investment horizon in years.
    pub horizon: f64,
    /// Initial wealth.
    pub v0: f64,
}

impl MarketParams {
    /// Crisis-calibrated base market: T=1, b=-2.5, v0=1, r=0, eta=3.0071,
    /// kappa=3.15, sigma=0.76, rho=-0.81, theta=z0=0.35.
    pub fn base() -> Self {
        Self {
            r: 0.0,
            eta: 3.0071,
            kappa: 3.15,
            theta: 0.35,
            sigma: 0.76,
            rho: -0.81,
            z0: 0.35,
            b: -2.5,
            horizon: 1.0,
            v0: 1.0,
        }
    }

    /// The base market with the most extreme volatility parameters
    /// (sigma=1.0, kappa=1.5, rho=-0.9) and a strongly risk-averse investor (b=-15).
    pub fn stressed() -> Self {
        Self {
            sigma: 1.0,
            kappa: 1.5,
            rho: -0.9,
            b: -15.0,
            ..Self::base()
        }
    }

    /// `pi_M = eta / (1 - b)`, the optimal constant mix under constant volatility.
    pub fn merton_ratio(&self) -> f64 {
        self.eta / (1.0 - self.b)
    }

    pub fn feller_holds(&self) -> bool {
        2.0 * self.kappa * self.theta > self.sigma * self.sigma
    }

    /// `v^b / b`
    pub fn utility(&self, v: f64) -> f64 {
        v.powf(self.b) / self.b
    }

    pub fn validate(&self) -> ValidationReport {
        validate_params(self)
    }
}

/// `pi_M = eta / (1 - b)`.
pub fn merton_ratio(p: &MarketParams) -> f64 {
    p.merton_ratio()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every violated parameter invariant; empty iff the parameters are admissible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> crate::Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(crate::Error::InvalidParams(self.to_string()))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_params(p: &MarketParams) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push =
        |field: &'static str, message: String| violations.push(Violation { field, message });

    let all = [
        ("r", p.r),
        ("eta", p.eta),
        ("kappa", p.kappa),
        ("theta", p.theta),
        ("sigma", p.sigma),
        ("rho", p.rho),
        ("z0", p.z0),
        ("b", p.b),
        ("T", p.horizon),
        ("v0", p.v0),
    ];
    for (field, value) in all {
        if !value.is_finite() {
            push(field, format!("must be finite, got {value}"));
        }
    }

    if p.r < 0.0 {
        push("r", format!("must be non-negative, got {}", p.r));
    }
    for (field, value) in [
        ("eta", p.eta),
        ("kappa", p.kappa),
        ("theta", p.theta),
        ("sigma", p.sigma),
        ("z0", p.z0),
        ("T", p.horizon),
        ("v0", p.v0),
    ] {
        if value <= 0.0 {
            push(field, format!("must be strictly positive, got {value}"));
        }
    }
    if !(p.rho > -1.0 && p.rho < 1.0) {
        push("rho", format!("must lie in (-1, 1), got {}", p.rho));
    }
    if p.b == 0.0 {
        push("b", "b must be nonzero".to_string());
    } else if p.b >= 1.0 {
        push("b", format!("must be below 1, got {}", p.b));
    }
    if p.kappa > 0.0 && p.sigma > 0.0 && !p.feller_holds() {
        push(
            "sigma",
            format!(
                "Feller condition 2 kappa theta > sigma^2 violated ({} <= {})",
                2.0 * p.kappa * p.theta,
                p.sigma * p.sigma
            ),
        );
    }

    ValidationReport { violations }
}
