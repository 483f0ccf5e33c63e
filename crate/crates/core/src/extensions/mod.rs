//! Generalisations of the one-factor solution: exposure-constrained
//! principal-component volatility and volatility-scaled constraints.

mod inverse_vol;
mod pcsv;

pub use inverse_vol::{inverse_vol_policy, InverseVolCase, InverseVolPolicy, VolFunction};
pub use pcsv::{
    exposure_report, portfolio_variance, solve_pcsv, ExposureRow, PcsvFactor, PcsvParams,
    PcsvSolution, ORTHOGONALITY_TOL,
};
