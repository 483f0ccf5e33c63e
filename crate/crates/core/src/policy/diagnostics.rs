//! Grid checks of the two inequalities the verification argument relies on.
//!
//! ```text
//! first:  (b rho / sigma) pi*(t) + B(T-t) <= kappa / sigma^2
//! second: 1/2 k eta^2 - 1/2 k (lambda* + sigma rho B)^2 - 1/2 b^2 rho^2 pi*^2
//!         + b rho kappa / sigma pi* + k rho / sigma (lambda*' + sigma rho) B'
//!         < kappa^2 / (2 sigma^2),           k = b / (1 - b), B at T - t
//! ```

use super::curve::time_grid;
use super::piecewise::PiecewiseB;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    /// Largest `lhs - bound` over the grid; negative means slack.
    pub max_excess: f64,
    /// Time at which `max_excess` is attained.
    pub worst_t: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationDiagnostics {
    pub first: InequalityCheck,
    pub second: InequalityCheck,
}

impl VerificationDiagnostics {
    pub fn holds(&self) -> bool {
        self.first.holds && self.second.holds
    }
}

/// Left side of the first inequality at time `t`.
pub fn first_lhs(solution: &PiecewiseB, t: f64) -> f64 {
    let p = solution.market();
    let b = solution.eval(p.horizon - t);
    p.b * p.rho / p.sigma * solution.zones().pi_star(b) + b
}

/// Left side of the second inequality at time `t`.
pub fn second_lhs(solution: &PiecewiseB, t: f64) -> f64 {
    let p = solution.market();
    let zs = solution.zones();
    let tau = p.horizon - t;
    let b = solution.eval(tau);
    let k = p.b / (1.0 - p.b);
    let lambda = zs.lambda_star(b);
    let pi = zs.pi_star(b);
    let slope = zs.lambda_star_slope(b) + p.sigma * p.rho;
    0.5 * k * p.eta * p.eta
        - 0.5 * k * (lambda + p.sigma * p.rho * b).powi(2)
        - 0.5 * (p.b * p.rho * pi).powi(2)
        + p.b * p.rho * p.kappa / p.sigma * pi
        + k * p.rho / p.sigma * slope * solution.derivative(tau)
}

/// Evaluates both inequalities on `n` uniform points of `[0, T]`.
pub fn verification_diagnostics(solution: &PiecewiseB, n: usize) -> VerificationDiagnostics {
    let p = solution.market();
    let first_bound = p.kappa / (p.sigma * p.sigma);
    let second_bound = p.kappa * p.kappa / (2.0 * p.sigma * p.sigma);
    let mut first = InequalityCheck {
        max_excess: f64::NEG_INFINITY,
        worst_t: 0.0,
        holds: true,
    };
    let mut second = first;
    for t in time_grid(p.horizon, n) {
        let e1 = first_lhs(solution, t) - first_bound;
        if e1 > first.max_excess {
            first.max_excess = e1;
            first.worst_t = t;
        }
        let e2 = second_lhs(solution, t) - second_bound;
        if e2 > second.max_excess {
            second.max_excess = e2;
            second.worst_t = t;
        }
    }
    first.holds = first.max_excess <= 0.0;
    second.holds = second.max_excess < 0.0;
    VerificationDiagnostics { first, second }
}
