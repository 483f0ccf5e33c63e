//! Monte Carlo simulation of the variance factor and wealth under a given
//! strategy, used to cross-check the analytic value function and rankings.
//!
//! The factor follows a full-truncation Euler scheme: the negative part of
//! `z` is clipped inside drift and diffusion only. The stock shock is
//! `dW = rho dW^z + sqrt(1 - rho^2) dW^perp`.
//!
//! Two estimators of `E[U(V(T))]` are available. `Plain` averages `U(V(T))`.
//! `Tilted` changes measure with the density `exp(b int pi sqrt(z) dW - b^2/2 int pi^2 z dt)`,
//! under which `V(T)^b = v0^b exp(b int (r + eta pi z - (1 - b)/2 pi^2 z) dt)` and `z`
//! gains the drift `sigma rho b pi z`. It removes the stochastic integral
//! and keeps the variance manageable for strongly risk-averse investors.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::heston::MarketParams;
use crate::wel::DeterministicStrategy;
use crate::{Error, Result};

/// Samples per parallel block; each block has its own random substream.
const BLOCK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            steps_per_year: 1000,
            seed: 42,
            antithetic: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::Scenario(format!(
                "paths must be at least 2, got {}",
                self.paths
            )));
        }
        if self.steps_per_year < 100 {
            return Err(Error::Scenario(format!(
                "steps_per_year must be at least 100, got {}",
                self.steps_per_year
            )));
        }
        Ok(())
    }

    /// Number of time steps over `horizon`.
    pub fn steps(&self, horizon: f64) -> usize {
        ((self.steps_per_year as f64 * horizon).round() as usize).max(1)
    }

    /// Independent samples: antithetic pairs count once.
    fn samples(&self) -> usize {
        if self.antithetic {
            self.paths / 2
        } else {
            self.paths
        }
    }

    fn paths_used(&self) -> usize {
        if self.antithetic {
            2 * self.samples()
        } else {
            self.paths
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    Plain,
    Tilted,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Plain => "plain",
            Estimator::Tilted => "tilted",
        })
    }
}

/// An allocation rule `(t, z) -> pi`.
#[derive(Clone)]
pub enum Strategy {
    Deterministic(DeterministicStrategy),
    Feedback {
        label: String,
        policy: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Strategy").field(&self.label()).finish()
    }
}

impl From<DeterministicStrategy> for Strategy {
    fn from(s: DeterministicStrategy) -> Self {
        Strategy::Deterministic(s)
    }
}

impl Strategy {
    pub fn feedback(
        label: impl Into<String>,
        policy: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Strategy::Feedback {
            label: label.into(),
            policy: Arc::new(policy),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Strategy::Deterministic(s) => &s.label,
            Strategy::Feedback { label, .. } => label,
        }
    }

    pub fn weight(&self, t: f64, z: f64) -> f64 {
        match self {
            Strategy::Deterministic(s) => s.at(t),
            Strategy::Feedback { policy, .. } => policy(t, z),
        }
    }

    /// Time-only strategies are tabulated once on the simulation grid.
    fn prepare(&self, dt: f64, steps: usize) -> Prepared<'_> {
        match self {
            Strategy::Deterministic(s) => {
                Prepared::Table((0..steps).map(|n| s.at(n as f64 * dt)).collect())
            }
            Strategy::Feedback { policy, .. } => Prepared::Feedback(policy.as_ref(), dt),
        }
    }
}

enum Prepared<'a> {
    Table(Vec<f64>),
    Feedback(&'a (dyn Fn(f64, f64) -> f64 + Send + Sync), f64),
}

impl Prepared<'_> {
    #[inline]
    fn at(&self, n: usize, z: f64) -> f64 {
        match self {
            Prepared::Table(v) => v[n],
            Prepared::Feedback(f, dt) => f(n as f64 * dt, z),
        }
    }
}

/// One simulated path: factor levels on the grid and stock Brownian increments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    pub dt: f64,
    /// `z` at `t_0 .. t_N` (truncated at zero where clipped).
    pub z: Vec<f64>,
    /// Stock Brownian increments over each step.
    pub dw: Vec<f64>,
    /// Steps whose untruncated update went negative.
    pub clipped: usize,
}

/// Paths with the standard normals that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub paths: Vec<Path>,
}

impl PathEnsemble {
    pub fn clipped_fraction(&self) -> f64 {
        let steps: usize = self.paths.iter().map(|p| p.dw.len()).sum();
        let clipped: usize = self.paths.iter().map(|p| p.clipped).sum();
        clipped as f64 / steps as f64
    }
}

/// Standard normal shocks of one path.
struct Shocks {
    factor: Vec<f64>,
    perp: Vec<f64>,
}

impl Shocks {
    fn new(steps: usize) -> Self {
        Self {
            factor: vec![0.0; steps],
            perp: vec![0.0; steps],
        }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) {
        for (a, b) in self.factor.iter_mut().zip(self.perp.iter_mut()) {
            *a = rng.sample(StandardNormal);
            *b = rng.sample(StandardNormal);
        }
    }
}

/// Builds the path for shocks multiplied by `sign`. With `tilt`, the factor
/// drift gains `sigma rho b pi z`.
fn build_path(
    p: &MarketParams,
    dt: f64,
    shocks: &Shocks,
    sign: f64,
    tilt: Option<&Prepared<'_>>,
    out: &mut Path,
) {
    let steps = shocks.factor.len();
    let sqrt_dt = dt.sqrt();
    let perp_weight = (1.0 - p.rho * p.rho).max(0.0).sqrt();
    out.dt = dt;
    out.z.clear();
    out.dw.clear();
    out.clipped = 0;
    let mut z = p.z0;
    out.z.push(z);
    for n in 0..steps {
        let zp = z.max(0.0);
        let dwz = sign * shocks.factor[n] * sqrt_dt;
        let dw = p.rho * dwz + perp_weight * sign * shocks.perp[n] * sqrt_dt;
        let mut drift = p.kappa * (p.theta - zp);
        if let Some(policy) = tilt {
            drift += p.sigma * p.rho * p.b * policy.at(n, zp) * zp;
        }
        let next = z + drift * dt + p.sigma * zp.sqrt() * dwz;
        if next < 0.0 {
            out.clipped += 1;
        }
        z = next;
        out.z.push(z.max(0.0));
        out.dw.push(dw);
    }
}

fn log_wealth(path: &Path, policy: &Prepared<'_>, p: &MarketParams) -> f64 {
    let dt = path.dt;
    let mut acc = p.v0.ln();
    for (n, &dw) in path.dw.iter().enumerate() {
        let z = path.z[n];
        let pi = policy.at(n, z);
        acc += (p.r + p.eta * z * pi - 0.5 * z * pi * pi) * dt + pi * z.sqrt() * dw;
    }
    acc
}

/// `b ln V(T)` under the tilted measure, without the stochastic integral.
fn tilted_log_power(path: &Path, policy: &Prepared<'_>, p: &MarketParams) -> f64 {
    let dt = path.dt;
    let mut acc = 0.0;
    for n in 0..path.dw.len() {
        let z = path.z[n];
        let pi = policy.at(n, z);
        acc += (p.r + p.eta * pi * z - 0.5 * (1.0 - p.b) * pi * pi * z) * dt;
    }
    p.b * (p.v0.ln() + acc)
}

/// Simulates and stores every path. Memory grows with `paths * steps`; the
/// estimators below stream instead.
pub fn simulate_paths(p: &MarketParams, cfg: &SimConfig) -> Result<PathEnsemble> {
    cfg.validate()?;
    let steps = cfg.steps(p.horizon);
    let dt = p.horizon / steps as f64;
    let samples = cfg.samples();
    let blocks = samples.div_ceil(BLOCK);
    let per_block: Vec<Vec<Path>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(cfg.seed, block);
            let mut shocks = Shocks::new(steps);
            let mut out = Vec::new();
            for _ in block * BLOCK..((block + 1) * BLOCK).min(samples) {
                shocks.draw(&mut rng);
                let signs: &[f64] = if cfg.antithetic { &[1.0, -1.0] } else { &[1.0] };
                for &sign in signs {
                    let mut path = Path::default();
                    build_path(p, dt, &shocks, sign, None, &mut path);
                    out.push(path);
                }
            }
            out
        })
        .collect();
    Ok(PathEnsemble {
        paths: per_block.into_iter().flatten().collect(),
    })
}

/// `v0 exp(int (r + eta z pi - z pi^2 / 2) dt + int pi sqrt(z) dW)` with the
/// left-point rule on the path grid.
pub fn terminal_wealth(path: &Path, strategy: &Strategy, p: &MarketParams) -> f64 {
    let prepared = strategy.prepare(path.dt, path.dw.len());
    log_wealth(path, &prepared, p).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths_used: usize,
}

impl UtilityEstimate {
    /// `(mean - target) / std_error`; zero when both coincide exactly.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = self.mean - target;
        if gap == 0.0 {
            0.0
        } else {
            gap / self.std_error
        }
    }
}

impl fmt::Display for UtilityEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.10} (se {:.3e}, {} paths)",
            self.mean, self.std_error, self.paths_used
        )
    }
}

/// Running mean and sum of squared deviations, mergeable in any grouping.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    fn estimate(&self, paths_used: usize) -> UtilityEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        UtilityEstimate {
            mean: self.mean,
            std_error: (var.max(0.0) / self.n as f64).sqrt(),
            paths_used,
        }
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Runs `sample` on every path (pair) and accumulates `N` statistics. Blocks
/// are merged in index order, so results do not depend on scheduling.
fn accumulate<const N: usize, F>(
    p: &MarketParams,
    cfg: &SimConfig,
    sample: F,
) -> Result<[Moments; N]>
where
    F: Fn(&Shocks, f64, &mut Path) -> [f64; N] + Sync,
{
    cfg.validate()?;
    let steps = cfg.steps(p.horizon);
    let samples = cfg.samples();
    let blocks = samples.div_ceil(BLOCK);
    let partial: Vec<[Moments; N]> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(cfg.seed, block);
            let mut shocks = Shocks::new(steps);
            let mut path = Path::default();
            let mut acc = [Moments::default(); N];
            for _ in block * BLOCK..((block + 1) * BLOCK).min(samples) {
                shocks.draw(&mut rng);
                let mut values = sample(&shocks, 1.0, &mut path);
                if cfg.antithetic {
                    let mirrored = sample(&shocks, -1.0, &mut path);
                    for (v, m) in values.iter_mut().zip(mirrored) {
                        *v = 0.5 * (*v + m);
                    }
                }
                for (a, v) in acc.iter_mut().zip(values) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = [Moments::default(); N];
    for block in partial {
        for (t, b) in total.iter_mut().zip(block) {
            *t = t.merge(b);
        }
    }
    Ok(total)
}

/// Utility sample of one path under `estimator`.
fn utility_sample(
    p: &MarketParams,
    dt: f64,
    shocks: &Shocks,
    sign: f64,
    policy: &Prepared<'_>,
    estimator: Estimator,
    path: &mut Path,
) -> f64 {
    match estimator {
        Estimator::Plain => {
            build_path(p, dt, shocks, sign, None, path);
            (p.b * log_wealth(path, policy, p)).exp() / p.b
        }
        Estimator::Tilted => {
            build_path(p, dt, shocks, sign, Some(policy), path);
            tilted_log_power(path, policy, p).exp() / p.b
        }
    }
}

/// Mean and standard error of `U(V(T))`.
pub fn estimate_utility(
    p: &MarketParams,
    strategy: &Strategy,
    cfg: &SimConfig,
    estimator: Estimator,
) -> Result<UtilityEstimate> {
    let steps = cfg.steps(p.horizon);
    let dt = p.horizon / steps as f64;
    let policy = strategy.prepare(dt, steps);
    let [m] = accumulate(p, cfg, |shocks, sign, path| {
        [utility_sample(
            p, dt, shocks, sign, &policy, estimator, path,
        )]
    })?;
    Ok(m.estimate(cfg.paths_used()))
}

/// Two strategies evaluated on common random numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedEstimate {
    pub first: UtilityEstimate,
    pub second: UtilityEstimate,
    /// `first - second` per path, with its own standard error.
    pub difference: UtilityEstimate,
}

impl PairedEstimate {
    /// The first strategy is not beaten by more than `k` standard errors.
    pub fn first_not_worse(&self, k: f64) -> bool {
        self.difference.mean >= -k * self.difference.std_error
    }

    /// The first strategy wins by more than `k` standard errors.
    pub fn first_strictly_better(&self, k: f64) -> bool {
        self.difference.mean > k * self.difference.std_error
    }
}

pub fn compare_paired(
    p: &MarketParams,
    first: &Strategy,
    second: &Strategy,
    cfg: &SimConfig,
    estimator: Estimator,
) -> Result<PairedEstimate> {
    let steps = cfg.steps(p.horizon);
    let dt = p.horizon / steps as f64;
    let pa = first.prepare(dt, steps);
    let pb = second.prepare(dt, steps);
    let [a, b, d] = accumulate(p, cfg, |shocks, sign, path| {
        let ua = utility_sample(p, dt, shocks, sign, &pa, estimator, path);
        let ub = utility_sample(p, dt, shocks, sign, &pb, estimator, path);
        [ua, ub, ua - ub]
    })?;
    let used = cfg.paths_used();
    Ok(PairedEstimate {
        first: a.estimate(used),
        second: b.estimate(used),
        difference: d.estimate(used),
    })
}

/// Fraction of factor steps whose untruncated update went negative.
pub fn clipped_fraction(p: &MarketParams, cfg: &SimConfig) -> Result<f64> {
    let steps = cfg.steps(p.horizon);
    let dt = p.horizon / steps as f64;
    let [m] = accumulate(p, cfg, |shocks, sign, path| {
        build_path(p, dt, shocks, sign, None, path);
        [path.clipped as f64 / steps as f64]
    })?;
    Ok(m.mean)
}

/// Mean and standard error of the terminal factor level `z(T)`.
pub fn terminal_factor(p: &MarketParams, cfg: &SimConfig) -> Result<UtilityEstimate> {
    let steps = cfg.steps(p.horizon);
    let dt = p.horizon / steps as f64;
    let [m] = accumulate(p, cfg, |shocks, sign, path| {
        build_path(p, dt, shocks, sign, None, path);
        [*path.z.last().unwrap()]
    })?;
    Ok(m.estimate(cfg.paths_used()))
}
