//! Principal-component stochastic volatility with exposure limits.
//!
//! The covariance is `A diag(z) A'` with orthogonal `A` and independent CIR
//! factors `z_i`. Limits `(a_i' pi)^2 <= beta_i` turn into the box
//! `A' pi in [0, sqrt(beta_1)] x ... x [0, sqrt(beta_d)]`, so each factor is a
//! one-factor problem with market price `(A' eta)_i` and the optimum is
//! `pi* = A pi*_A`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::heston::{validate_params, IntervalConstraint, MarketParams};
use crate::policy::{solve_b_unvalidated, time_grid, PiecewiseB, SolveOptions};
use crate::{Error, Result};

/// Largest accepted entry of `|A A' - I|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcsvFactor {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcsvParams {
    /// Orthogonal loading matrix; column `i` is the eigenvector `a_i`.
    pub loadings: DMatrix<f64>,
    pub eta: DVector<f64>,
    pub factors: Vec<PcsvFactor>,
    /// Exposure bounds `beta_i > 0`.
    pub exposure_caps: Vec<f64>,
    pub r: f64,
    pub b: f64,
    pub horizon: f64,
    pub v0: f64,
}

impl PcsvParams {
    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// `max |A A' - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.loadings.nrows();
        let gram = &self.loadings * self.loadings.transpose();
        (gram - DMatrix::identity(d, d)).amax()
    }

    /// Replaces the loadings by their Gram-Schmidt orthonormalisation,
    /// keeping the orientation of every column.
    pub fn repaired(&self) -> Result<Self> {
        let d = self.loadings.nrows();
        let qr = self.loadings.clone().qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..d {
            if r[(j, j)] == 0.0 {
                return Err(Error::InvalidParams(
                    "loading matrix is singular and cannot be repaired".into(),
                ));
            }
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Ok(Self {
            loadings: q,
            ..self.clone()
        })
    }

    /// Market price of risk of each factor, `A' eta`.
    pub fn factor_prices(&self) -> DVector<f64> {
        self.loadings.transpose() * &self.eta
    }

    /// One-factor market of factor `i`.
    pub fn factor_market(&self, i: usize) -> MarketParams {
        let f = self.factors[i];
        MarketParams {
            r: self.r,
            eta: self.factor_prices()[i],
            kappa: f.kappa,
            theta: f.theta,
            sigma: f.sigma,
            rho: f.rho,
            z0: f.z0,
            b: self.b,
            horizon: self.horizon,
            v0: self.v0,
        }
    }

    /// `[0, sqrt(beta_i)]`.
    pub fn factor_constraint(&self, i: usize) -> Result<IntervalConstraint> {
        IntervalConstraint::new(0.0, self.exposure_caps[i].sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidParams(
                "at least one factor is required".into(),
            ));
        }
        if self.loadings.nrows() != d || self.loadings.ncols() != d {
            return Err(Error::InvalidParams(format!(
                "loading matrix is {}x{} but there are {d} factors",
                self.loadings.nrows(),
                self.loadings.ncols()
            )));
        }
        if self.eta.len() != d || self.exposure_caps.len() != d {
            return Err(Error::InvalidParams(format!(
                "eta has {} and exposure_caps {} entries; expected {d}",
                self.eta.len(),
                self.exposure_caps.len()
            )));
        }
        let err = self.orthogonality_error();
        if !(err <= ORTHOGONALITY_TOL) {
            return Err(Error::InvalidParams(format!(
                "loading matrix is not orthogonal: max |A A' - I| = {err:e}"
            )));
        }
        for (i, &beta) in self.exposure_caps.iter().enumerate() {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::Factor {
                    index: i,
                    source: Box::new(Error::InvalidParams(format!(
                        "exposure cap must be positive and finite, got {beta}"
                    ))),
                });
            }
        }
        for i in 0..d {
            // factor prices of either sign are legitimate after rotation
            let mut report = validate_params(&self.factor_market(i));
            report.violations.retain(|v| v.field != "eta");
            report.into_result().map_err(|e| Error::Factor {
                index: i,
                source: Box::new(e),
            })?;
        }
        Ok(())
    }
}

/// Per-factor solutions and the rotation back to asset weights.
#[derive(Debug, Clone)]
pub struct PcsvSolution {
    pub params: PcsvParams,
    pub factors: Vec<PiecewiseB>,
}

impl PcsvSolution {
    /// `pi*_A(t)`, the optimal factor exposures `A' pi*`.
    pub fn factor_weights(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.factors.len(),
            self.factors.iter().map(|f| f.pi_star(t)),
        )
    }

    /// `pi*(t) = A pi*_A(t)`.
    pub fn weights(&self, t: f64) -> DVector<f64> {
        &self.params.loadings * self.factor_weights(t)
    }

    /// `(a_i' pi*(t))^2` for every factor.
    pub fn exposures(&self, t: f64) -> Vec<f64> {
        let rotated = self.params.loadings.transpose() * self.weights(t);
        rotated.iter().map(|x| x * x).collect()
    }
}

/// Solves every factor problem; failures name the factor index.
pub fn solve_pcsv(pp: &PcsvParams, opts: SolveOptions) -> Result<PcsvSolution> {
    pp.validate()?;
    let factors = (0..pp.dim())
        .into_par_iter()
        .map(|i| {
            let k = pp.factor_constraint(i)?;
            solve_b_unvalidated(&pp.factor_market(i), &k, opts)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Factor {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PcsvSolution {
        params: pp.clone(),
        factors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureRow {
    pub factor: usize,
    /// `max_t (a_i' pi*(t))^2 / beta_i`
    pub max_ratio: f64,
    /// End of the initial interval on which the bound binds; zero if it does not.
    pub binding_until: f64,
}

/// Exposure utilisation per factor on `n` uniform points of `[0, T]`.
pub fn exposure_report(solution: &PcsvSolution, n: usize) -> Vec<ExposureRow> {
    let grid = time_grid(solution.params.horizon, n);
    let exposures: Vec<Vec<f64>> = grid.iter().map(|&t| solution.exposures(t)).collect();
    (0..solution.params.dim())
        .map(|i| {
            let beta = solution.params.exposure_caps[i];
            let ratios: Vec<f64> = exposures.iter().map(|e| e[i] / beta).collect();
            let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
            let cap = solution.params.exposure_caps[i].sqrt();
            let binding_until = grid
                .iter()
                .take_while(|&&t| solution.factors[i].pi_star(t) == cap)
                .last()
                .copied()
                .unwrap_or(0.0);
            ExposureRow {
                factor: i,
                max_ratio,
                binding_until,
            }
        })
        .collect()
}

/// `|| diag(sqrt(z)) A' pi ||^2`, the instantaneous portfolio variance.
pub fn portfolio_variance(loadings: &DMatrix<f64>, z: &DVector<f64>, pi: &DVector<f64>) -> f64 {
    let rotated = loadings.transpose() * pi;
    rotated.iter().zip(z.iter()).map(|(x, zi)| x * x * zi).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::solve_b;
    use proptest::prelude::*;

    fn base_factor() -> PcsvFactor {
        let p = MarketParams::base();
        PcsvFactor {
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            rho: p.rho,
            z0: p.z0,
        }
    }

    fn rotation(angle: f64) -> DMatrix<f64> {
        let (s, c) = angle.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    }

    fn two_factor(loadings: DMatrix<f64>) -> PcsvParams {
        let p = MarketParams::base();
        PcsvParams {
            loadings,
            eta: DVector::from_vec(vec![3.0, 2.0]),
            factors: vec![
                base_factor(),
                PcsvFactor {
                    kappa: 4.0,
                    theta: 0.2,
                    sigma: 0.5,
                    rho: -0.6,
                    z0: 0.25,
                },
            ],
            exposure_caps: vec![1.0, 0.36],
            r: p.r,
            b: p.b,
            horizon: p.horizon,
            v0: p.v0,
        }
    }

    #[test]
    fn single_factor_reduces_to_one_dimensional_solver() {
        let p = MarketParams::base();
        let pp = PcsvParams {
            loadings: DMatrix::identity(1, 1),
            eta: DVector::from_vec(vec![p.eta]),
            factors: vec![base_factor()],
            exposure_caps: vec![1.0],
            r: p.r,
            b: p.b,
            horizon: p.horizon,
            v0: p.v0,
        };
        let sol = solve_pcsv(&pp, SolveOptions::default()).unwrap();
        let k = IntervalConstraint::new(0.0, 1.0).unwrap();
        let one = solve_b(&p, &k, SolveOptions::default()).unwrap();
        for t in time_grid(1.0, 101) {
            assert_eq!(sol.weights(t)[0], one.pi_star(t));
        }
        let row = exposure_report(&sol, 101)[0];
        assert!((row.max_ratio - 1.0).abs() < 1e-12);
        assert!(row.binding_until > 0.0);
    }

    #[test]
    fn identity_loadings_decouple() {
        let pp = two_factor(DMatrix::identity(2, 2));
        let sol = solve_pcsv(&pp, SolveOptions::default()).unwrap();
        for i in 0..2 {
            let k = pp.factor_constraint(i).unwrap();
            let one = solve_b(&pp.factor_market(i), &k, SolveOptions::default()).unwrap();
            for t in time_grid(1.0, 51) {
                assert!((sol.weights(t)[i] - one.pi_star(t)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rotated_exposures_respect_caps() {
        let pp = two_factor(rotation(std::f64::consts::FRAC_PI_4));
        let sol = solve_pcsv(&pp, SolveOptions::default()).unwrap();
        for t in time_grid(1.0, 2001) {
            for (e, beta) in sol.exposures(t).iter().zip(&pp.exposure_caps) {
                assert!(*e <= beta * (1.0 + 1e-12));
            }
        }
        for row in exposure_report(&sol, 2001) {
            assert!(row.max_ratio <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn slack_caps_give_unconstrained_exposures() {
        let mut pp = two_factor(DMatrix::identity(2, 2));
        pp.exposure_caps = vec![1e6, 1e6];
        // wide finite bounds fail the near-maturity check although they never bind
        let sol = solve_pcsv(&pp, SolveOptions::forced()).unwrap();
        for i in 0..2 {
            let u = crate::policy::pi_unconstrained(&pp.factor_market(i), 0.0).unwrap();
            assert!((sol.exposures(0.0)[i] - u * u).abs() < 1e-9);
        }
    }

    #[test]
    fn non_orthogonal_loadings_are_rejected_then_repaired() {
        let mut a = rotation(0.3);
        a[(0, 0)] += 1e-6;
        let pp = two_factor(a);
        assert!(matches!(pp.validate(), Err(Error::InvalidParams(_))));
        let fixed = pp.repaired().unwrap();
        assert!(fixed.orthogonality_error() <= ORTHOGONALITY_TOL);
        assert!((fixed.loadings.clone() - rotation(0.3)).amax() < 1e-5);
    }

    #[test]
    fn failing_factor_is_named() {
        let mut pp = two_factor(DMatrix::identity(2, 2));
        pp.factors[1].sigma = 2.0;
        match solve_pcsv(&pp, SolveOptions::default()) {
            Err(Error::Factor { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn block_diagonal_loadings_split() {
        let mut a = DMatrix::zeros(3, 3);
        a.view_mut((0, 0), (2, 2)).copy_from(&rotation(0.7));
        a[(2, 2)] = 1.0;
        let p = MarketParams::base();
        let pp = PcsvParams {
            loadings: a,
            eta: DVector::from_vec(vec![3.0, 2.0, 2.5]),
            factors: vec![
                base_factor(),
                two_factor(rotation(0.0)).factors[1],
                base_factor(),
            ],
            exposure_caps: vec![1.0, 0.36, 0.5],
            r: p.r,
            b: p.b,
            horizon: p.horizon,
            v0: p.v0,
        };
        let full = solve_pcsv(&pp, SolveOptions::default()).unwrap();
        let mut top = two_factor(rotation(0.7));
        top.eta = DVector::from_vec(vec![3.0, 2.0]);
        let top = solve_pcsv(&top, SolveOptions::default()).unwrap();
        let k = IntervalConstraint::new(0.0, 0.5f64.sqrt()).unwrap();
        let last = solve_b(&MarketParams { eta: 2.5, ..p }, &k, SolveOptions::default()).unwrap();
        for t in time_grid(1.0, 41) {
            let w = full.weights(t);
            let wt = top.weights(t);
            assert!((w[0] - wt[0]).abs() <= 1e-12 && (w[1] - wt[1]).abs() <= 1e-12);
            assert!((w[2] - last.pi_star(t)).abs() <= 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn change_of_control_round_trip(
            angle in -3.0f64..3.0,
            x in -2.0f64..2.0,
            y in -2.0f64..2.0,
        ) {
            let a = rotation(angle);
            let v = DVector::from_vec(vec![x, y]);
            let back = a.transpose() * (&a * &v);
            prop_assert!((back - v).amax() <= 1e-14);
        }

        #[test]
        fn variance_decomposes_over_factors(
            angle in -3.0f64..3.0,
            z1 in 0.01f64..1.0,
            z2 in 0.01f64..1.0,
            x in -2.0f64..2.0,
            y in -2.0f64..2.0,
        ) {
            let a = rotation(angle);
            let z = DVector::from_vec(vec![z1, z2]);
            let pi = DVector::from_vec(vec![x, y]);
            // covariance form pi' A diag(z) A' pi
            let cov = &a * DMatrix::from_diagonal(&z) * a.transpose();
            let direct = (pi.transpose() * cov * &pi)[(0, 0)];
            let by_factor: f64 = (0..2)
                .map(|i| a.column(i).dot(&pi).powi(2) * z[i])
                .sum();
            prop_assert!((portfolio_variance(&a, &z, &pi) - direct).abs() <= 1e-12);
            prop_assert!((by_factor - direct).abs() <= 1e-12);
        }
    }
}
