mod common;

use common::{crisis, unit};
use hestoncap::heston::{IntervalConstraint, MarketParams};
use hestoncap::montecarlo::{
    clipped_fraction, compare_paired, estimate_utility, terminal_factor, Estimator, SimConfig,
    Strategy,
};
use hestoncap::policy::{solve_b, SolveOptions, ValueSurface};
use hestoncap::wel::DeterministicStrategy;

fn cfg(paths: usize, steps_per_year: usize) -> SimConfig {
    SimConfig {
        paths,
        steps_per_year,
        seed: 42,
        antithetic: true,
    }
}

#[test]
fn terminal_factor_mean_matches_cir_mean() {
    let p = MarketParams {
        z0: 0.2,
        ..MarketParams::base()
    };
    let est = terminal_factor(&p, &cfg(100_000, 1000)).unwrap();
    let exact = p.theta + (p.z0 - p.theta) * (-p.kappa * p.horizon).exp();
    assert!(est.z_score(exact).abs() <= 3.0, "{est} vs {exact}");
}

#[test]
fn clipping_is_rare_at_the_base_market() {
    let f = clipped_fraction(&MarketParams::base(), &cfg(20_000, 1000)).unwrap();
    assert!(f < 0.05, "{f}");
}

#[test]
fn weak_convergence_in_the_step_size() {
    let p = MarketParams::base();
    let sol = common::base_solution();
    let s: Strategy = DeterministicStrategy::optimal(&sol).into();
    let coarse = estimate_utility(&p, &s, &cfg(100_000, 500), Estimator::Plain).unwrap();
    let fine = estimate_utility(&p, &s, &cfg(100_000, 1000), Estimator::Plain).unwrap();
    let combined = (coarse.std_error.powi(2) + fine.std_error.powi(2)).sqrt();
    assert!((coarse.mean - fine.mean).abs() < 2.0 * combined);
}

#[test]
fn unconstrained_positive_power_matches_value_function() {
    let p = MarketParams {
        b: 0.5,
        ..MarketParams::base()
    };
    let k = IntervalConstraint::unconstrained();
    let sol = solve_b(&p, &k, SolveOptions::forced()).unwrap();
    let g = ValueSurface::new(&sol).value(0.0, p.v0, p.z0);
    let pi_u: Strategy = DeterministicStrategy::capped_unconstrained(&p, &k)
        .unwrap()
        .into();
    let est = estimate_utility(&p, &pi_u, &cfg(40_000, 500), Estimator::Plain).unwrap();
    assert!(est.z_score(g).abs() <= 3.0, "{est} vs {g}");
}

#[test]
fn optimum_is_not_beaten_on_common_paths() {
    let p = MarketParams::base();
    let sol = common::base_solution();
    let optimal: Strategy = DeterministicStrategy::optimal(&sol).into();
    let rivals: Vec<Strategy> = vec![
        DeterministicStrategy::capped_merton(&p, &unit()).into(),
        DeterministicStrategy::constant(0.5).into(),
        DeterministicStrategy::new("linear", |t| 1.0 - 0.2 * t).into(),
    ];
    for rival in &rivals {
        let pair =
            compare_paired(&p, &optimal, rival, &cfg(20_000, 250), Estimator::Plain).unwrap();
        assert!(
            pair.first_not_worse(3.0),
            "{}: {:?}",
            rival.label(),
            pair.difference
        );
    }
}

#[test]
fn crisis_ranking_with_tilted_estimator() {
    let (p, k) = crisis(2.0);
    let sol = solve_b(&p, &k, SolveOptions::forced()).unwrap();
    let optimal: Strategy = DeterministicStrategy::optimal(&sol).into();
    let capped: Strategy = DeterministicStrategy::capped_unconstrained(&p, &k)
        .unwrap()
        .into();
    let pair = compare_paired(&p, &optimal, &capped, &cfg(20_000, 250), Estimator::Tilted).unwrap();
    assert!(pair.first_strictly_better(3.0), "{:?}", pair.difference);
    let g = ValueSurface::new(&sol).value(0.0, p.v0, p.z0);
    // a constant allocation with B == 0 has a deterministic utility
    assert!((pair.first.mean - g).abs() < 1e-9);
}
