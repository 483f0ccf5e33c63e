//! Helpers shared by the integration tests: an independent ODE oracle for
//! `B` and scenario generators.

#![allow(dead_code)]

use hestoncap::heston::{check_assumptions, IntervalConstraint, MarketParams};
use hestoncap::policy::{solve_b, PiecewiseB, SolveOptions, UnconstrainedB};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn unit() -> IntervalConstraint {
    IntervalConstraint::new(0.0, 1.0).unwrap()
}

pub fn base_solution() -> PiecewiseB {
    solve_b(&MarketParams::base(), &unit(), SolveOptions::default()).unwrap()
}

/// Stressed market with `alpha = multiple * pi_M`, `beta = 1`.
pub fn crisis(multiple: f64) -> (MarketParams, IntervalConstraint) {
    let p = MarketParams::stressed();
    let k = IntervalConstraint::new(multiple * p.merton_ratio(), 1.0).unwrap();
    (p, k)
}

/// `inf_lambda { 2 (1 - b) delta_K(lambda) + (x + lambda)^2 }` by direct
/// minimisation of the two convex quadratic pieces `lambda >= 0` and `lambda < 0`.
pub fn penalised_infimum(x: f64, b: f64, alpha: f64, beta: f64) -> f64 {
    let c = 1.0 - b;
    // delta_K(lambda) = -alpha lambda for lambda >= 0, -beta lambda for lambda < 0;
    // an infinite bound makes the matching half-line infinitely penalised
    let mut best = x * x;
    if alpha.is_finite() {
        let l = (c * alpha - x).max(0.0);
        best = best.min(-2.0 * c * alpha * l + (x + l).powi(2));
    }
    if beta.is_finite() {
        let l = (c * beta - x).min(0.0);
        best = best.min(-2.0 * c * beta * l + (x + l).powi(2));
    }
    best
}

/// Right-hand side of the `B` equation in its infimum form.
pub fn oracle_rhs(p: &MarketParams, alpha: f64, beta: f64, b_val: f64) -> f64 {
    let k = p.b / (1.0 - p.b);
    let x = p.eta + p.sigma * p.rho * b_val;
    -p.kappa * b_val
        + 0.5 * p.sigma * p.sigma * b_val * b_val
        + 0.5 * k * penalised_infimum(x, p.b, alpha, beta)
}

/// Classical RK4 for the oracle equation; returns `B` at `steps + 1` points of `[0, T]`.
pub fn oracle_rk4(p: &MarketParams, alpha: f64, beta: f64, steps: usize) -> Vec<f64> {
    let h = p.horizon / steps as f64;
    let f = |y: f64| oracle_rhs(p, alpha, beta, y);
    let mut y = 0.0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y);
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(y);
    }
    out
}

/// `sup_tau |closed form - oracle|` on the oracle grid.
pub fn oracle_gap(sol: &PiecewiseB, steps: usize) -> f64 {
    let p = sol.market();
    let k = sol.constraint();
    let grid = oracle_rk4(p, k.alpha().to_f64(), k.beta().to_f64(), steps);
    let h = p.horizon / steps as f64;
    grid.iter()
        .enumerate()
        .map(|(i, y)| (sol.eval(i as f64 * h) - y).abs())
        .fold(0.0, f64::max)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random market around the base calibration that satisfies the Feller condition.
pub fn random_market(rng: &mut ChaCha8Rng) -> MarketParams {
    loop {
        let p = MarketParams {
            r: rng.random_range(0.0..0.05),
            eta: rng.random_range(0.5..4.0),
            kappa: rng.random_range(1.0..6.0),
            theta: rng.random_range(0.05..0.5),
            sigma: rng.random_range(0.1..1.0),
            rho: rng.random_range(-0.95..0.95),
            z0: rng.random_range(0.05..0.6),
            b: if rng.random_bool(0.8) {
                rng.random_range(-8.0..-0.2)
            } else {
                rng.random_range(0.05..0.6)
            },
            horizon: rng.random_range(0.25..2.0),
            v0: 1.0,
        };
        if p.feller_holds() {
            return p;
        }
    }
}

/// A random interval around the Merton ratio, possibly half-infinite.
pub fn random_constraint(rng: &mut ChaCha8Rng, p: &MarketParams) -> IntervalConstraint {
    let m = p.merton_ratio();
    let alpha = match rng.random_range(0..4) {
        0 => f64::NEG_INFINITY,
        1 => 0.0,
        _ => m * rng.random_range(-0.5..1.5),
    };
    let beta = match rng.random_range(0..4) {
        0 => f64::INFINITY,
        _ => alpha.max(0.0) + m * rng.random_range(0.1..1.5),
    };
    IntervalConstraint::new(alpha, beta).unwrap()
}

/// Draws until the assumption checks pass and a solution exists.
pub fn random_admissible(rng: &mut ChaCha8Rng) -> (MarketParams, IntervalConstraint, PiecewiseB) {
    loop {
        let p = random_market(rng);
        let k = random_constraint(rng, &p);
        if !check_assumptions(&p, &k).passes() {
            continue;
        }
        if let Ok(sol) = solve_b(&p, &k, SolveOptions::default()) {
            return (p, k, sol);
        }
    }
}

/// Admissible draws that also have an unconstrained solution.
pub fn random_with_unconstrained(
    rng: &mut ChaCha8Rng,
    adjust: impl Fn(&mut ChaCha8Rng, &mut MarketParams, &mut IntervalConstraint),
) -> (MarketParams, IntervalConstraint, PiecewiseB) {
    loop {
        let mut p = random_market(rng);
        let mut k = random_constraint(rng, &p);
        adjust(rng, &mut p, &mut k);
        if UnconstrainedB::new(&p).is_err() || !check_assumptions(&p, &k).passes() {
            continue;
        }
        if let Ok(sol) = solve_b(&p, &k, SolveOptions::default()) {
            return (p, k, sol);
        }
    }
}
