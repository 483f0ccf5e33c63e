//! TOML scenario files.
//!
//! ```toml
//! [market]              # omitted keys take the base-market values
//! b = -2.5
//! [constraint]
//! alpha = 0.0           # numbers or "inf" / "-inf"
//! beta = 1.0
//! [sweep]
//! axis = "kappa"
//! from = 1.5
//! to = 5.0
//! points = 50
//! [mc]
//! paths = 100000
//! [output]
//! grid = 2001
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::extensions::{PcsvFactor, PcsvParams};
use crate::heston::{validate_params, ExtendedReal, IntervalConstraint, MarketParams};
use crate::montecarlo::{Estimator, SimConfig};
use crate::policy::DEFAULT_GRID;
use crate::wel::{Competitor, SweepAxis, SweepSpec, DEFAULT_STEPS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketBlock {
    pub r: f64,
    pub eta: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub z0: f64,
    pub b: f64,
    #[serde(alias = "T")]
    pub horizon: f64,
    pub v0: f64,
}

impl Default for MarketBlock {
    fn default() -> Self {
        let p = MarketParams::base();
        Self {
            r: p.r,
            eta: p.eta,
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            rho: p.rho,
            z0: p.z0,
            b: p.b,
            horizon: p.horizon,
            v0: p.v0,
        }
    }
}

impl From<MarketBlock> for MarketParams {
    fn from(m: MarketBlock) -> Self {
        MarketParams {
            r: m.r,
            eta: m.eta,
            kappa: m.kappa,
            theta: m.theta,
            sigma: m.sigma,
            rho: m.rho,
            z0: m.z0,
            b: m.b,
            horizon: m.horizon,
            v0: m.v0,
        }
    }
}

/// A bound given as a number or as `"inf"` / `"-inf"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BoundValue {
    Number(f64),
    Text(String),
}

impl BoundValue {
    fn resolve(&self, field: &str) -> Result<ExtendedReal> {
        match self {
            BoundValue::Number(x) => Ok(ExtendedReal::from_f64(*x)),
            BoundValue::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(ExtendedReal::PosInf),
                "-inf" | "-infinity" => Ok(ExtendedReal::NegInf),
                other => Err(Error::Scenario(format!(
                    "constraint.{field}: expected a number, \"inf\" or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintBlock {
    pub alpha: BoundValue,
    pub beta: BoundValue,
    /// Read `alpha` as a multiple of the Merton ratio.
    pub alpha_relative_to_merton: bool,
}

impl Default for ConstraintBlock {
    fn default() -> Self {
        Self {
            alpha: BoundValue::Text("-inf".into()),
            beta: BoundValue::Text("inf".into()),
            alpha_relative_to_merton: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default)]
    pub relative_to_merton: bool,
    #[serde(default)]
    pub competitor: Competitor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    #[default]
    Plain,
    Tilted,
}

impl From<EstimatorChoice> for Estimator {
    fn from(e: EstimatorChoice) -> Self {
        match e {
            EstimatorChoice::Plain => Estimator::Plain,
            EstimatorChoice::Tilted => Estimator::Tilted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McBlock {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub estimator: EstimatorChoice,
}

impl Default for McBlock {
    fn default() -> Self {
        let c = SimConfig::default();
        Self {
            paths: c.paths,
            steps_per_year: c.steps_per_year,
            seed: c.seed,
            antithetic: c.antithetic,
            estimator: EstimatorChoice::Plain,
        }
    }
}

impl McBlock {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            paths: self.paths,
            steps_per_year: self.steps_per_year,
            seed: self.seed,
            antithetic: self.antithetic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorBlock {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcsvBlock {
    /// Rows of the loading matrix.
    pub loadings: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    pub exposure_caps: Vec<f64>,
    #[serde(rename = "factor")]
    pub factors: Vec<FactorBlock>,
    /// Orthonormalise slightly non-orthogonal loadings instead of failing.
    #[serde(default)]
    pub repair: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub grid: usize,
    pub wel_steps: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            wel_steps: DEFAULT_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub market: MarketBlock,
    #[serde(default)]
    pub constraint: ConstraintBlock,
    pub pcsv: Option<PcsvBlock>,
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn market(&self) -> MarketParams {
        self.market.into()
    }

    /// Market parameters after the sign and Feller checks.
    pub fn validated_market(&self) -> Result<MarketParams> {
        let p = self.market();
        validate_params(&p).into_result()?;
        Ok(p)
    }

    pub fn constraint(&self) -> Result<IntervalConstraint> {
        let mut alpha = self.constraint.alpha.resolve("alpha")?;
        if self.constraint.alpha_relative_to_merton {
            if let Some(a) = alpha.finite() {
                alpha = ExtendedReal::from_f64(a * self.market().merton_ratio());
            }
        }
        IntervalConstraint::new(alpha, self.constraint.beta.resolve("beta")?)
    }

    pub fn sweep_spec(&self, force: bool) -> Result<SweepSpec> {
        let s = self
            .sweep
            .ok_or_else(|| Error::Scenario("the scenario has no [sweep] block".into()))?;
        Ok(SweepSpec {
            axis: s.axis,
            from: s.from,
            to: s.to,
            points: s.points,
            relative_to_merton: s.relative_to_merton,
            competitor: s.competitor,
            force,
        })
    }

    pub fn pcsv_params(&self) -> Result<PcsvParams> {
        let block = self
            .pcsv
            .as_ref()
            .ok_or_else(|| Error::Scenario("the scenario has no [pcsv] block".into()))?;
        let d = block.loadings.len();
        if block.loadings.iter().any(|row| row.len() != d) {
            return Err(Error::Scenario(
                "pcsv.loadings must be a square matrix".into(),
            ));
        }
        let m = self.market();
        let params = PcsvParams {
            loadings: DMatrix::from_row_iterator(d, d, block.loadings.iter().flatten().copied()),
            eta: DVector::from_vec(block.eta.clone()),
            factors: block
                .factors
                .iter()
                .map(|f| PcsvFactor {
                    kappa: f.kappa,
                    theta: f.theta,
                    sigma: f.sigma,
                    rho: f.rho,
                    z0: f.z0,
                })
                .collect(),
            exposure_caps: block.exposure_caps.clone(),
            r: m.r,
            b: m.b,
            horizon: m.horizon,
            v0: m.v0,
        };
        if block.repair {
            params.repaired()
        } else {
            Ok(params)
        }
    }
}
