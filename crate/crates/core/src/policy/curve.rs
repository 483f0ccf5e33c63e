//! Time grids of the optimal, uncapped and unconstrained policies, the value
//! function and the comparison with the capped unconstrained policy.

use super::piecewise::{solve_a, ACurve, PiecewiseB};
use super::unconstrained::UnconstrainedB;
use crate::heston::{MarketParams, Zone};

/// Default number of grid points on `[0, T]`.
pub const DEFAULT_GRID: usize = 2001;

/// `n` uniform points on `[0, horizon]` with exact endpoints.
pub fn time_grid(horizon: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a time grid needs both endpoints");
    let mut grid: Vec<f64> = (0..n)
        .map(|i| horizon * i as f64 / (n - 1) as f64)
        .collect();
    grid[n - 1] = horizon;
    grid
}

/// Policies and exponents sampled on a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCurve {
    pub grid: Vec<f64>,
    pub pi_star: Vec<f64>,
    pub pi_hat: Vec<f64>,
    /// NaN where the unconstrained solution does not exist.
    pub pi_u: Vec<f64>,
    pub cap_pi_u: Vec<f64>,
    /// `B(T - t)`
    pub b: Vec<f64>,
    /// `B_u(T - t)`, NaN when undefined.
    pub b_u: Vec<f64>,
    pub zone: Vec<Zone>,
}

impl PolicyCurve {
    pub fn new(solution: &PiecewiseB, n: usize) -> Self {
        let p = solution.market();
        let k = solution.constraint();
        let unconstrained = UnconstrainedB::new(p).ok();
        let grid = time_grid(p.horizon, n);
        let mut curve = PolicyCurve {
            pi_star: Vec::with_capacity(n),
            pi_hat: Vec::with_capacity(n),
            pi_u: Vec::with_capacity(n),
            cap_pi_u: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            b_u: Vec::with_capacity(n),
            zone: Vec::with_capacity(n),
            grid: Vec::new(),
        };
        for &t in &grid {
            let tau = p.horizon - t;
            let b = solution.eval(tau);
            let pi_hat = solution.zones().pi_hat(b);
            let (b_u, pi_u) = match &unconstrained {
                Some(u) => (u.eval(tau), u.pi(t)),
                None => (f64::NAN, f64::NAN),
            };
            curve.b.push(b);
            curve.pi_hat.push(pi_hat);
            curve.pi_star.push(k.cap(pi_hat));
            curve.b_u.push(b_u);
            curve.pi_u.push(pi_u);
            curve
                .cap_pi_u
                .push(if pi_u.is_nan() { f64::NAN } else { k.cap(pi_u) });
            curve.zone.push(solution.zones().classify(b));
        }
        curve.grid = grid;
        curve
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `pi*(t)`.
pub fn pi_star(solution: &PiecewiseB, t: f64) -> f64 {
    solution.pi_star(t)
}

/// `pi_hat*(t)`.
pub fn pi_hat(solution: &PiecewiseB, t: f64) -> f64 {
    solution.pi_hat(t)
}

/// Outcome of comparing `pi*` with `Cap(pi_u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Equal,
    /// A time at which exactly one of `pi_hat*` and `pi_u` lies strictly
    /// inside the constraint.
    Differs {
        t: f64,
    },
}

/// Decides whether the optimal policy is the capped unconstrained policy.
///
/// Zero correlation or an admissible Merton ratio give equality directly;
/// otherwise the curve is scanned for a witness time.
pub fn projection_differs(
    curve: &PolicyCurve,
    p: &MarketParams,
    solution: &PiecewiseB,
) -> Projection {
    let k = solution.constraint();
    if p.rho == 0.0 || k.contains(p.merton_ratio()) {
        return Projection::Equal;
    }
    for i in 0..curve.len() {
        let hat_inside = k.interior_contains(curve.pi_hat[i]);
        let u_inside = k.interior_contains(curve.pi_u[i]);
        if hat_inside != u_inside && !curve.pi_u[i].is_nan() {
            return Projection::Differs { t: curve.grid[i] };
        }
    }
    Projection::Equal
}

/// `G(t, v, z) = v^b / b exp(A(T - t) + B(T - t) z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurface {
    pub b_curve: PiecewiseB,
    pub a_curve: ACurve,
}

impl ValueSurface {
    pub fn new(b_curve: &PiecewiseB) -> Self {
        Self {
            a_curve: solve_a(b_curve),
            b_curve: b_curve.clone(),
        }
    }

    pub fn value(&self, t: f64, v: f64, z: f64) -> f64 {
        let p = self.b_curve.market();
        let tau = p.horizon - t;
        v.powf(p.b) / p.b * (self.a_curve.eval(tau) + self.b_curve.eval(tau) * z).exp()
    }
}

pub fn value_function(vs: &ValueSurface, t: f64, v: f64, z: f64) -> f64 {
    vs.value(t, v, z)
}
