//! Piecewise closed-form solution of the zone-switching `B` equation and the
//! matching `A` exponent.

use crate::heston::{
    check_assumptions, validate_params, AssumptionReport, ExtendedReal, IntervalConstraint,
    MarketParams, Zone, ZoneSystem,
};
use crate::riccati::RiccatiFlow;
use crate::{Error, Result};

/// Solver switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Solve even when the standing assumptions fail.
    pub force: bool,
}

impl SolveOptions {
    pub fn forced() -> Self {
        Self { force: true }
    }
}

/// One constant-coefficient piece of `B` on `[tau_start, tau_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub tau_start: f64,
    pub tau_end: f64,
    pub zone: Zone,
    pub flow: RiccatiFlow,
    /// `int_{tau_start}^{tau_end} B`
    integral: f64,
}

impl Segment {
    pub fn span(&self) -> f64 {
        self.tau_end - self.tau_start
    }
}

/// `B` on `[0, T]` as at most three stitched Riccati solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseB {
    segments: Vec<Segment>,
    horizon: f64,
    zones: ZoneSystem,
    report: AssumptionReport,
}

/// Solves for `B` after validating the parameters and checking the
/// standing assumptions (skipped with [`SolveOptions::force`]).
pub fn solve_b(p: &MarketParams, k: &IntervalConstraint, opts: SolveOptions) -> Result<PiecewiseB> {
    validate_params(p).into_result()?;
    solve_b_unvalidated(p, k, opts)
}

/// [`solve_b`] without the parameter sign checks; used for factor problems
/// whose market price of risk may be zero or negative.
pub(crate) fn solve_b_unvalidated(
    p: &MarketParams,
    k: &IntervalConstraint,
    opts: SolveOptions,
) -> Result<PiecewiseB> {
    let report = check_assumptions(p, k);
    if !report.passes() && !opts.force {
        return Err(Error::Assumption(format!(
            "{} failed (use force to solve anyway)",
            report.failures().join(", ")
        )));
    }
    let zones = crate::heston::zone_system(p, k)?;
    let segments = stitch(&zones, p.horizon)?;
    Ok(PiecewiseB {
        segments,
        horizon: p.horizon,
        zones,
        report,
    })
}

fn direction(zones: &ZoneSystem, zone: Zone, b0: f64) -> Result<f64> {
    let d = zones.market().rho * zones.closed_form(zone)?.rhs(b0);
    Ok(if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    })
}

/// The boundary the flow of `zone` started at `b0` heads for, if any.
fn exit_target(zones: &ZoneSystem, zone: Zone, b0: f64) -> Result<Option<(f64, Zone)>> {
    // sign of d(rho B)/d tau decides which edge can be reached; flows are monotone
    let dir = direction(zones, zone, b0)?;
    let up = zones.boundary_state(Zone::Plus).map(|b| (b, Zone::Plus));
    let down = zones.boundary_state(Zone::Minus).map(|b| (b, Zone::Minus));
    Ok(match zone {
        Zone::Mid if dir > 0.0 => up,
        Zone::Mid if dir < 0.0 => down,
        Zone::Minus if dir > 0.0 => down.map(|(b, _)| (b, Zone::Mid)),
        Zone::Plus if dir < 0.0 => up.map(|(b, _)| (b, Zone::Mid)),
        _ => None,
    })
}

fn stitch(zones: &ZoneSystem, horizon: f64) -> Result<Vec<Segment>> {
    let mut segments = Vec::with_capacity(3);
    let mut zone = zones.classify(0.0);
    let mut b0 = 0.0;
    let mut tau = 0.0;
    // a zero-length piece (start on a boundary) may precede the three real ones
    for _ in 0..4 {
        let flow = RiccatiFlow::new(zones.closed_form(zone)?, b0)?;
        let remaining = horizon - tau;
        let exit = exit_target(zones, zone, b0)?
            .map(|(target, next)| (flow.transition_time_within(target, remaining), target, next));
        if let Some((ExtendedReal::Finite(dt), target, next)) = exit {
            if dt < remaining {
                if dt > 0.0 {
                    segments.push(Segment {
                        tau_start: tau,
                        tau_end: tau + dt,
                        zone,
                        flow,
                        integral: flow.integral(dt)?,
                    });
                }
                tau += dt;
                b0 = target;
                zone = next;
                continue;
            }
        }
        if !flow.lifetime.gt(remaining) {
            return Err(Error::Blowup {
                zone,
                lifetime: flow.lifetime.to_f64(),
                required: remaining,
            });
        }
        segments.push(Segment {
            tau_start: tau,
            tau_end: horizon,
            zone,
            flow,
            integral: flow.integral(remaining)?,
        });
        debug_assert!(segments.len() <= 3);
        return Ok(segments);
    }
    unreachable!("monotone flows cross at most two boundaries")
}

impl PiecewiseB {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn zones(&self) -> &ZoneSystem {
        &self.zones
    }

    pub fn market(&self) -> &MarketParams {
        self.zones.market()
    }

    pub fn constraint(&self) -> &IntervalConstraint {
        self.zones.constraint()
    }

    pub fn assumptions(&self) -> &AssumptionReport {
        &self.report
    }

    /// Times at which `B` changes zone.
    pub fn transition_times(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.tau_start).collect()
    }

    fn segment_at(&self, tau: f64) -> &Segment {
        self.segments
            .iter()
            .find(|s| tau <= s.tau_end)
            .unwrap_or_else(|| self.segments.last().expect("at least one segment"))
    }

    /// `B(tau)` for `tau` in `[0, T]` (clamped).
    pub fn eval(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, self.horizon);
        let s = self.segment_at(tau);
        s.flow.value(tau - s.tau_start)
    }

    /// `B'(tau)`.
    pub fn derivative(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, self.horizon);
        let s = self.segment_at(tau);
        s.flow.coeffs.rhs(s.flow.value(tau - s.tau_start))
    }

    /// Zone of the segment containing `tau`.
    pub fn zone_at(&self, tau: f64) -> Zone {
        self.segment_at(tau.clamp(0.0, self.horizon)).zone
    }

    /// `int_0^tau B(s) ds` from per-segment adaptive quadrature.
    pub fn integral(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, self.horizon);
        let mut total = 0.0;
        for s in &self.segments {
            if tau >= s.tau_end {
                total += s.integral;
            } else {
                if tau > s.tau_start {
                    total += s.flow.integral(tau - s.tau_start).unwrap_or(f64::NAN);
                }
                break;
            }
        }
        total
    }

    /// `pi*(t) = Cap(pi_hat(t), alpha, beta)` with `B` taken at `T - t`.
    pub fn pi_star(&self, t: f64) -> f64 {
        self.constraint().cap(self.pi_hat(t))
    }

    /// Uncapped `(eta + sigma rho B(T - t)) / (1 - b)`.
    pub fn pi_hat(&self, t: f64) -> f64 {
        self.zones.pi_hat(self.eval(self.horizon - t))
    }
}

/// `A(tau) = b r tau + kappa theta int_0^tau B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ACurve {
    b_curve: PiecewiseB,
}

pub fn solve_a(b_curve: &PiecewiseB) -> ACurve {
    ACurve {
        b_curve: b_curve.clone(),
    }
}

impl ACurve {
    pub fn eval(&self, tau: f64) -> f64 {
        if tau == 0.0 {
            return 0.0;
        }
        let p = self.b_curve.market();
        p.b * p.r * tau + p.kappa * p.theta * self.b_curve.integral(tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> IntervalConstraint {
        IntervalConstraint::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn base_solution_structure() {
        let sol = solve_b(&MarketParams::base(), &unit(), SolveOptions::default()).unwrap();
        let zones: Vec<Zone> = sol.segments().iter().map(|s| s.zone).collect();
        assert_eq!(zones, [Zone::Mid, Zone::Plus]);
        assert_eq!(sol.eval(0.0), 0.0);
        assert!(
            (sol.eval(1.0) + 1.381_084).abs() < 1e-6,
            "{}",
            sol.eval(1.0)
        );
        assert_eq!(sol.pi_star(0.0), 1.0);
        let first = sol.segments()[0];
        assert_eq!(first.tau_start, 0.0);
        assert_eq!(first.flow.b0, 0.0);
    }

    #[test]
    fn continuity_at_junctions() {
        let sol = solve_b(&MarketParams::base(), &unit(), SolveOptions::default()).unwrap();
        for pair in sol.segments().windows(2) {
            let end = pair[0].flow.value(pair[0].span());
            assert!((end - pair[1].flow.b0).abs() < 1e-12);
            let left = pair[0].flow.coeffs.rhs(end);
            let right = pair[1].flow.coeffs.rhs(pair[1].flow.b0);
            assert!((left - right).abs() < 1e-8);
        }
    }

    #[test]
    fn refuses_failed_assumptions_unless_forced() {
        let p = MarketParams::stressed();
        let k = IntervalConstraint::new(1.5 * p.merton_ratio(), 1.0).unwrap();
        let err = solve_b(&p, &k, SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Assumption(ref m) if m.contains("(i)")));
        assert!(solve_b(&p, &k, SolveOptions::forced()).is_ok());
    }

    #[test]
    fn crisis_twice_merton_is_flat() {
        let p = MarketParams::stressed();
        let k = IntervalConstraint::new(2.0 * p.merton_ratio(), 1.0).unwrap();
        let sol = solve_b(&p, &k, SolveOptions::forced()).unwrap();
        assert_eq!(sol.segments().len(), 1);
        assert_eq!(sol.segments()[0].zone, Zone::Minus);
        for i in 0..=100 {
            let tau = i as f64 / 100.0;
            assert!(sol.eval(tau).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_correlation_is_one_segment() {
        let p = MarketParams {
            rho: 0.0,
            ..MarketParams::base()
        };
        let sol = solve_b(&p, &unit(), SolveOptions::default()).unwrap();
        assert_eq!(sol.segments().len(), 1);
        assert!(sol.transition_times().is_empty());
    }

    #[test]
    fn a_starts_at_zero_and_is_linear_without_forcing() {
        let p = MarketParams {
            r: 0.03,
            ..MarketParams::stressed()
        };
        let k = IntervalConstraint::new(2.0 * p.merton_ratio(), 1.0).unwrap();
        let a = solve_a(&solve_b(&p, &k, SolveOptions::forced()).unwrap());
        assert_eq!(a.eval(0.0), 0.0);
        assert!((a.eval(0.7) - p.b * p.r * 0.7).abs() < 1e-12);
    }
}
