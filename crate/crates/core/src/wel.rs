//! Expected utility of deterministic strategies and wealth-equivalent loss.
//!
//! For a deterministic `pi`, `E[U(V(T))] = v^b / b exp(A^pi(T) + B^pi(T) z)`
//! with
//!
//! ```text
//! B^pi' = -(pi^2 b (1-b) / 2 - b eta pi) + (sigma rho b pi - kappa) B^pi + sigma^2 / 2 (B^pi)^2
//! A^pi' = r b + kappa theta B^pi,          A^pi(0) = B^pi(0) = 0,  pi at t = T - tau
//! ```
//!
//! and the loss relative to the optimum is
//! `L = 1 - exp((A^pi - A + (B^pi - B) z) / b)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::heston::{validate_params, IntervalConstraint, MarketParams};
use crate::numeric::{ode_solve_system, StepMethod};
use crate::policy::{solve_b, time_grid, PiecewiseB, SolveOptions, UnconstrainedB, ValueSurface};
use crate::{Error, Result};

/// Default number of exponent-solver steps over the horizon.
pub const DEFAULT_STEPS: usize = 20_000;

/// A deterministic allocation `t -> pi(t)`.
#[derive(Clone)]
pub struct DeterministicStrategy {
    policy: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub label: String,
}

impl fmt::Debug for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeterministicStrategy")
            .field("label", &self.label)
            .finish()
    }
}

impl DeterministicStrategy {
    pub fn new(
        label: impl Into<String>,
        policy: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            policy: Arc::new(policy),
            label: label.into(),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(format!("constant {value}"), move |_| value)
    }

    /// The optimal constrained policy `pi*`.
    pub fn optimal(solution: &PiecewiseB) -> Self {
        let s = solution.clone();
        Self::new("pi_star", move |t| s.pi_star(t))
    }

    /// `Cap(pi_M, alpha, beta)`, constant in time.
    pub fn capped_merton(p: &MarketParams, k: &IntervalConstraint) -> Self {
        let value = k.cap(p.merton_ratio());
        Self::new("cap_merton", move |_| value)
    }

    /// `Cap(pi_u(t), alpha, beta)`; fails when `pi_u` does not exist.
    pub fn capped_unconstrained(p: &MarketParams, k: &IntervalConstraint) -> Result<Self> {
        let u = UnconstrainedB::new(p)?;
        let k = *k;
        Ok(Self::new("cap_pi_u", move |t| k.cap(u.pi(t))))
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.policy)(t)
    }
}

/// `A^pi`, `B^pi` on a uniform `tau` grid with cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyExponents {
    pub horizon: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `(A^pi', B^pi')` at the grid points, used for interpolation.
    slopes: Vec<[f64; 2]>,
}

fn exponent_rhs(p: &MarketParams, pi: f64, b_pi: f64) -> [f64; 2] {
    let forcing = 0.5 * pi * pi * p.b * (1.0 - p.b) - p.b * p.eta * pi;
    [
        p.r * p.b + p.kappa * p.theta * b_pi,
        -forcing
            + (p.sigma * p.rho * p.b * pi - p.kappa) * b_pi
            + 0.5 * p.sigma * p.sigma * b_pi * b_pi,
    ]
}

/// Integrates the exponent system of `strategy` over `[0, T]`.
pub fn strategy_exponents(
    p: &MarketParams,
    strategy: &DeterministicStrategy,
    steps: usize,
    method: StepMethod,
) -> Result<StrategyExponents> {
    let horizon = p.horizon;
    let states = ode_solve_system(
        |tau, y: &[f64; 2]| exponent_rhs(p, strategy.at(horizon - tau), y[1]),
        [0.0, 0.0],
        horizon,
        steps,
        method,
    )?;
    let h = horizon / steps as f64;
    let slopes = states
        .iter()
        .enumerate()
        .map(|(i, y)| exponent_rhs(p, strategy.at((horizon - i as f64 * h).max(0.0)), y[1]))
        .collect();
    Ok(StrategyExponents {
        horizon,
        a: states.iter().map(|y| y[0]).collect(),
        b: states.iter().map(|y| y[1]).collect(),
        slopes,
    })
}

impl StrategyExponents {
    fn steps(&self) -> usize {
        self.a.len() - 1
    }

    /// `(A^pi(tau), B^pi(tau))`.
    pub fn at(&self, tau: f64) -> (f64, f64) {
        let n = self.steps();
        let h = self.horizon / n as f64;
        let x = (tau / h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let s = x - i as f64;
        if s == 0.0 {
            return (self.a[i], self.b[i]);
        }
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        let interp =
            |y0: f64, y1: f64, d0: f64, d1: f64| h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        (
            interp(
                self.a[i],
                self.a[i + 1],
                self.slopes[i][0],
                self.slopes[i + 1][0],
            ),
            interp(
                self.b[i],
                self.b[i + 1],
                self.slopes[i][1],
                self.slopes[i + 1][1],
            ),
        )
    }

    /// Exponents at the horizon, `tau = T`.
    pub fn terminal(&self) -> (f64, f64) {
        (*self.a.last().unwrap(), *self.b.last().unwrap())
    }
}

/// `L(t, z) = 1 - exp((A^pi - A + (B^pi - B) z) / b)` at `tau = T - t`.
pub fn wel(optimum: &ValueSurface, exponents: &StrategyExponents, t: f64, z: f64) -> f64 {
    let p = optimum.b_curve.market();
    let tau = p.horizon - t;
    let (a_pi, b_pi) = exponents.at(tau);
    let a = optimum.a_curve.eval(tau);
    let b = optimum.b_curve.eval(tau);
    -((a_pi - a + (b_pi - b) * z) / p.b).exp_m1()
}

/// `max_t |pi(t) - pi*(t)|` over a common grid.
pub fn delta_max(curve_a: &[f64], curve_b: &[f64]) -> f64 {
    assert_eq!(curve_a.len(), curve_b.len(), "curves must share a grid");
    curve_a
        .iter()
        .zip(curve_b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelOptions {
    pub steps: usize,
    pub method: StepMethod,
    /// Grid used for `delta_max`.
    pub grid: usize,
}

impl Default for WelOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            method: StepMethod::Rk4,
            grid: crate::policy::DEFAULT_GRID,
        }
    }
}

/// Loss of one competitor against the optimum.
#[derive(Debug, Clone)]
pub struct WelReport {
    pub label: String,
    pub exponents: StrategyExponents,
    pub optimum: ValueSurface,
    /// `L(0, z0)`
    pub l0: f64,
    pub delta_max: f64,
}

impl WelReport {
    pub fn loss(&self, t: f64, z: f64) -> f64 {
        wel(&self.optimum, &self.exponents, t, z)
    }
}

pub fn wel_report(
    solution: &PiecewiseB,
    strategy: &DeterministicStrategy,
    opts: WelOptions,
) -> Result<WelReport> {
    let p = solution.market();
    let exponents = strategy_exponents(p, strategy, opts.steps, opts.method)?;
    let optimum = ValueSurface::new(solution);
    let l0 = wel(&optimum, &exponents, 0.0, p.z0);
    let grid = time_grid(p.horizon, opts.grid);
    let theirs: Vec<f64> = grid.iter().map(|&t| strategy.at(t)).collect();
    let ours: Vec<f64> = grid.iter().map(|&t| solution.pi_star(t)).collect();
    Ok(WelReport {
        label: strategy.label.clone(),
        exponents,
        optimum,
        l0,
        delta_max: delta_max(&theirs, &ours),
    })
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    B,
    Sigma,
    Kappa,
    Rho,
    Alpha,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::B => "b",
            SweepAxis::Sigma => "sigma",
            SweepAxis::Kappa => "kappa",
            SweepAxis::Rho => "rho",
            SweepAxis::Alpha => "alpha",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The competitor compared against `pi*` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Competitor {
    /// `Cap(pi_M, alpha, beta)`
    #[default]
    CappedMerton,
    /// `Cap(pi_u(t), alpha, beta)`
    CappedUnconstrained,
}

impl Competitor {
    pub fn strategy(
        self,
        p: &MarketParams,
        k: &IntervalConstraint,
    ) -> Result<DeterministicStrategy> {
        match self {
            Competitor::CappedMerton => Ok(DeterministicStrategy::capped_merton(p, k)),
            Competitor::CappedUnconstrained => DeterministicStrategy::capped_unconstrained(p, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    /// Alpha values are multiples of the Merton ratio.
    pub relative_to_merton: bool,
    pub competitor: Competitor,
    /// Compute points whose assumptions fail instead of skipping them.
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepFlag {
    Ok,
    /// Computed although these assumption checks failed.
    Forced(Vec<&'static str>),
    /// Not computed because these assumption checks failed.
    Skipped(Vec<&'static str>),
    /// Invalid parameters or a solver failure.
    Error(String),
}

impl fmt::Display for SweepFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepFlag::Ok => f.write_str("ok"),
            SweepFlag::Forced(v) => write!(f, "forced:{}", v.join("+")),
            SweepFlag::Skipped(v) => write!(f, "skipped:{}", v.join("+")),
            SweepFlag::Error(m) => {
                let cleaned: String = m
                    .chars()
                    .map(|c| if c == ',' || c == '\n' { ';' } else { c })
                    .collect();
                write!(f, "error:{cleaned}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub l0: f64,
    pub delta_max: f64,
    pub flag: SweepFlag,
}

/// Parameters of one sweep point.
pub fn sweep_point(
    p: &MarketParams,
    k: &IntervalConstraint,
    axis: SweepAxis,
    value: f64,
    relative_to_merton: bool,
) -> Result<(MarketParams, IntervalConstraint)> {
    let mut p = *p;
    let mut k = *k;
    match axis {
        SweepAxis::B => p.b = value,
        SweepAxis::Sigma => p.sigma = value,
        SweepAxis::Kappa => p.kappa = value,
        SweepAxis::Rho => p.rho = value,
        SweepAxis::Alpha => {
            let alpha = if relative_to_merton {
                value * p.merton_ratio()
            } else {
                value
            };
            k = IntervalConstraint::new(alpha, k.beta())?;
        }
    }
    Ok((p, k))
}

fn sweep_row(
    p: &MarketParams,
    k: &IntervalConstraint,
    spec: &SweepSpec,
    value: f64,
    opts: WelOptions,
) -> SweepRow {
    let failed = |flag| SweepRow {
        value,
        l0: f64::NAN,
        delta_max: f64::NAN,
        flag,
    };
    let (p, k) = match sweep_point(p, k, spec.axis, value, spec.relative_to_merton) {
        Ok(pk) => pk,
        Err(e) => return failed(SweepFlag::Error(e.to_string())),
    };
    if let Err(e) = validate_params(&p).into_result() {
        return failed(SweepFlag::Error(e.to_string()));
    }
    let report = crate::heston::check_assumptions(&p, &k);
    let flag = if report.passes() {
        SweepFlag::Ok
    } else if spec.force {
        SweepFlag::Forced(report.failures())
    } else {
        return failed(SweepFlag::Skipped(report.failures()));
    };
    let computed = solve_b(&p, &k, SolveOptions { force: spec.force })
        .and_then(|sol| Ok((spec.competitor.strategy(&p, &k)?, sol)))
        .and_then(|(strategy, sol)| wel_report(&sol, &strategy, opts));
    match computed {
        Ok(r) => SweepRow {
            value,
            l0: r.l0,
            delta_max: r.delta_max,
            flag,
        },
        Err(e) => failed(SweepFlag::Error(e.to_string())),
    }
}

/// Evaluates `L(0, z0)` and `delta_max` on `points` uniform values of the axis.
/// Points are computed in parallel and returned in order.
pub fn sweep(
    p: &MarketParams,
    k: &IntervalConstraint,
    spec: &SweepSpec,
    opts: WelOptions,
) -> Result<Vec<SweepRow>> {
    if spec.points < 1 {
        return Err(Error::Scenario("a sweep needs at least one point".into()));
    }
    let values: Vec<f64> = if spec.points == 1 {
        vec![spec.from]
    } else {
        (0..spec.points)
            .map(|i| spec.from + (spec.to - spec.from) * i as f64 / (spec.points - 1) as f64)
            .collect()
    };
    Ok(values
        .par_iter()
        .map(|&v| sweep_row(p, k, spec, v, opts))
        .collect())
}
