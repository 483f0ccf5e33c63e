//! Command-line front end driven by scenario files.
//!
//! Exit codes: 0 success, 1 solver failure, 2 parse or validation error,
//! 3 assumption failure, 4 Monte Carlo disagreement beyond three standard errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::extensions::{exposure_report, solve_pcsv};
use crate::heston::{check_assumptions, IntervalConstraint, MarketParams};
use crate::montecarlo::{compare_paired, estimate_utility, Estimator, SimConfig, Strategy};
use crate::numeric::StepMethod;
use crate::policy::{
    solve_b, time_grid, unconstrained_condition, PiecewiseB, PolicyCurve, SolveOptions,
    ValueSurface,
};
use crate::scenario::Scenario;
use crate::wel::{sweep, wel_report, Competitor, DeterministicStrategy, SweepFlag, WelOptions};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ASSUMPTIONS: i32 = 3;
pub const EXIT_MC_MISMATCH: i32 = 4;

/// Header of the `solve` output.
pub const SOLVE_HEADER: &str = "t,pi_star,pi_hat,pi_u,cap_pi_u,B,B_u,zone";
/// Header of the `wel` and `sweep` outputs.
pub const SWEEP_HEADER: &str = "axis,L0,delta_max,assumption_flag";

#[derive(Debug, Parser)]
#[command(
    name = "hestoncap",
    version,
    about = "Allocation-constrained optimal portfolios in Heston's model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Write CSV or report output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of time-grid points on [0, T].
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Solve even when the assumption checks fail.
    #[arg(long, global = true)]
    pub force: bool,
    /// Integrate strategy exponents with explicit Euler instead of RK4.
    #[arg(long, global = true)]
    pub euler: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Validate parameters and evaluate the assumption checks.
    Check,
    /// Optimal, uncapped and unconstrained policy curves as CSV.
    Solve,
    /// Wealth-equivalent loss of the capped competitors.
    Wel,
    /// Wealth-equivalent loss along the scenario's sweep axis.
    Sweep,
    /// Monte Carlo check of the value function and strategy ranking.
    Simulate,
    /// Exposure-constrained multi-factor policy as CSV.
    Pcsv,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Scenario(_) | Error::InvalidParams(_) | Error::InvalidConstraint(_) => EXIT_PARSE,
        Error::Assumption(_) => EXIT_ASSUMPTIONS,
        Error::Factor { source, .. } => exit_code(source),
        _ => EXIT_FAILURE,
    }
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct Context {
    scenario: Scenario,
    force: bool,
    grid: usize,
    seed: Option<u64>,
    method: StepMethod,
}

impl Context {
    fn new(cli: &Cli) -> crate::Result<Self> {
        let path = cli
            .scenario
            .as_ref()
            .ok_or_else(|| Error::Scenario("--scenario <path> is required".into()))?;
        let scenario = Scenario::load(path)?;
        let grid = cli.grid.unwrap_or(scenario.output.grid);
        if grid < 2 {
            return Err(Error::Scenario(format!(
                "grid must be at least 2, got {grid}"
            )));
        }
        Ok(Self {
            scenario,
            force: cli.force,
            grid,
            seed: cli.seed,
            method: if cli.euler {
                StepMethod::Euler
            } else {
                StepMethod::Rk4
            },
        })
    }

    fn market_and_constraint(&self) -> crate::Result<(MarketParams, IntervalConstraint)> {
        Ok((
            self.scenario.validated_market()?,
            self.scenario.constraint()?,
        ))
    }

    fn solve(&self) -> crate::Result<PiecewiseB> {
        let (p, k) = self.market_and_constraint()?;
        solve_b(&p, &k, SolveOptions { force: self.force })
    }

    fn wel_options(&self) -> WelOptions {
        WelOptions {
            steps: self.scenario.output.wel_steps,
            method: self.method,
            grid: self.grid,
        }
    }

    fn sim_config(&self) -> SimConfig {
        let mut cfg = self.scenario.mc.config();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> crate::Result<i32> {
    let ctx = Context::new(cli)?;
    let mut body = String::new();
    let code = match cli.command {
        Command::Check => cmd_check(&ctx, &mut body)?,
        Command::Solve => cmd_solve(&ctx, &mut body)?,
        Command::Wel => cmd_wel(&ctx, &mut body)?,
        Command::Sweep => cmd_sweep(&ctx, &mut body)?,
        Command::Simulate => cmd_simulate(&ctx, &mut body)?,
        Command::Pcsv => cmd_pcsv(&ctx, &mut body, stderr)?,
    };
    emit(cli, &body, stdout)?;
    Ok(code)
}

fn emit(cli: &Cli, body: &str, stdout: &mut dyn Write) -> crate::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::Scenario(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| Error::Scenario(format!("cannot write output: {e}"))),
    }
}

fn cmd_check(ctx: &Context, out: &mut String) -> crate::Result<i32> {
    let (p, k) = ctx.market_and_constraint()?;
    let report = check_assumptions(&p, &k);
    let (lhs, bound) = unconstrained_condition(&p);
    let _ = writeln!(out, "parameters    valid");
    let _ = writeln!(out, "constraint    {k}");
    let _ = writeln!(out, "merton ratio  {}", p.merton_ratio());
    let _ = writeln!(
        out,
        "unconstrained existence {} ({lhs:.6} < {bound:.6})",
        if lhs < bound { "pass" } else { "FAIL" }
    );
    let _ = writeln!(out, "{report}");
    if report.passes() {
        let _ = writeln!(out, "all assumptions hold");
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(out, "failed: {}", report.failures().join(", "));
        Ok(EXIT_ASSUMPTIONS)
    }
}

fn cmd_solve(ctx: &Context, out: &mut String) -> crate::Result<i32> {
    let sol = ctx.solve()?;
    let curve = PolicyCurve::new(&sol, ctx.grid);
    let _ = writeln!(out, "{SOLVE_HEADER}");
    for i in 0..curve.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_number(curve.grid[i]),
            csv_number(curve.pi_star[i]),
            csv_number(curve.pi_hat[i]),
            csv_number(curve.pi_u[i]),
            csv_number(curve.cap_pi_u[i]),
            csv_number(curve.b[i]),
            csv_number(curve.b_u[i]),
            curve.zone[i]
        );
    }
    Ok(EXIT_OK)
}

fn assumption_flag(sol: &PiecewiseB) -> SweepFlag {
    let report = sol.assumptions();
    if report.passes() {
        SweepFlag::Ok
    } else {
        SweepFlag::Forced(report.failures())
    }
}

fn cmd_wel(ctx: &Context, out: &mut String) -> crate::Result<i32> {
    let sol = ctx.solve()?;
    let (p, k) = (*sol.market(), *sol.constraint());
    let flag = assumption_flag(&sol);
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for competitor in [Competitor::CappedMerton, Competitor::CappedUnconstrained] {
        let strategy = match competitor.strategy(&p, &k) {
            Ok(s) => s,
            // the unconstrained policy may not exist
            Err(_) => continue,
        };
        let r = wel_report(&sol, &strategy, ctx.wel_options())?;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.label,
            csv_number(r.l0),
            csv_number(r.delta_max),
            flag
        );
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(ctx: &Context, out: &mut String) -> crate::Result<i32> {
    let p = ctx.scenario.validated_market()?;
    let k = ctx.scenario.constraint()?;
    let spec = ctx.scenario.sweep_spec(ctx.force)?;
    let rows = sweep(&p, &k, &spec, ctx.wel_options())?;
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_number(row.value),
            csv_number(row.l0),
            csv_number(row.delta_max),
            row.flag
        );
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(ctx: &Context, out: &mut String) -> crate::Result<i32> {
    let sol = ctx.solve()?;
    let (p, k) = (*sol.market(), *sol.constraint());
    let cfg = ctx.sim_config();
    let estimator: Estimator = ctx.scenario.mc.estimator.into();
    let analytic = ValueSurface::new(&sol).value(0.0, p.v0, p.z0);
    let optimal: Strategy = DeterministicStrategy::optimal(&sol).into();
    let est = estimate_utility(&p, &optimal, &cfg, estimator)?;
    let z = est.z_score(analytic);
    let _ = writeln!(
        out,
        "paths {} steps/yr {} seed {} antithetic {} estimator {estimator}",
        cfg.paths, cfg.steps_per_year, cfg.seed, cfg.antithetic
    );
    let _ = writeln!(out, "analytic G(0, v0, z0)  {analytic:.10}");
    let _ = writeln!(out, "MC mean of pi_star     {:.10}", est.mean);
    let _ = writeln!(out, "standard error         {:.3e}", est.std_error);
    let _ = writeln!(out, "z-score                {z:.3}");

    let mut competitors: Vec<Strategy> = Vec::new();
    if let Ok(s) = DeterministicStrategy::capped_unconstrained(&p, &k) {
        competitors.push(s.into());
    }
    competitors.push(DeterministicStrategy::capped_merton(&p, &k).into());
    if k.contains(0.0) {
        competitors.push(DeterministicStrategy::constant(0.0).into());
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<12} {:>16} {:>11} {:>16} {:>11}  verdict",
        "strategy", "utility", "se", "pi_star - it", "se diff"
    );
    let _ = writeln!(
        out,
        "{:<12} {:>16.10} {:>11.3e} {:>16} {:>11}",
        optimal.label(),
        est.mean,
        est.std_error,
        "-",
        "-"
    );
    for c in &competitors {
        let pe = compare_paired(&p, &optimal, c, &cfg, estimator)?;
        let verdict = if pe.first_strictly_better(3.0) {
            "pi_star better"
        } else if pe.first_not_worse(3.0) {
            "tie within 3 se"
        } else {
            "pi_star WORSE"
        };
        let _ = writeln!(
            out,
            "{:<12} {:>16.10} {:>11.3e} {:>16.6e} {:>11.3e}  {verdict}",
            c.label(),
            pe.second.mean,
            pe.second.std_error,
            pe.difference.mean,
            pe.difference.std_error
        );
    }
    if z.abs() <= 3.0 {
        let _ = writeln!(out, "\nagreement within 3 standard errors");
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(out, "\nMISMATCH: |z| > 3");
        Ok(EXIT_MC_MISMATCH)
    }
}

fn cmd_pcsv(ctx: &Context, out: &mut String, stderr: &mut dyn Write) -> crate::Result<i32> {
    let params = ctx.scenario.pcsv_params()?;
    let sol = solve_pcsv(&params, SolveOptions { force: ctx.force })?;
    let d = params.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("pi_{i}")));
    header.extend((1..=d).map(|i| format!("exposure_{i}")));
    let _ = writeln!(out, "{}", header.join(","));
    for t in time_grid(params.horizon, ctx.grid) {
        let mut row = vec![csv_number(t)];
        row.extend(sol.weights(t).iter().map(|&x| csv_number(x)));
        row.extend(sol.exposures(t).into_iter().map(csv_number));
        let _ = writeln!(out, "{}", row.join(","));
    }
    for r in exposure_report(&sol, ctx.grid) {
        let _ = writeln!(
            stderr,
            "factor {}: max exposure / cap = {:.12}, binding until t = {:.6}",
            r.factor + 1,
            r.max_ratio,
            r.binding_until
        );
    }
    Ok(EXIT_OK)
}
