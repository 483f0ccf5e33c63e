use thiserror::Error;

use crate::heston::Zone;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid market parameters: {0}")]
    InvalidParams(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    /// `r1^2 + 2 r0 r2 <= 0` (or `r2 == 0`): the closed-form Riccati solution is undefined.
    #[error("Riccati coefficients{} admit no closed form (r1^2 + 2 r0 r2 = {discriminant})", zone_suffix(.zone))]
    Coefficient {
        zone: Option<Zone>,
        discriminant: f64,
    },

    #[error("evaluation at tau = {tau} is beyond the solution lifetime {lifetime}")]
    LifetimeExceeded { tau: f64, lifetime: f64 },

    #[error("numeric integration left the finite range at t = {at}")]
    NonFiniteState { at: f64 },

    #[error("assumption check failed: {0}")]
    Assumption(String),

    #[error("Riccati segment in the {zone} zone blows up at tau = {lifetime} before reaching {required}")]
    Blowup {
        zone: Zone,
        lifetime: f64,
        required: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("factor {index}: {source}")]
    Factor { index: usize, source: Box<Error> },
}

fn zone_suffix(zone: &Option<Zone>) -> String {
    zone.map(|z| format!(" of the {z} zone"))
        .unwrap_or_default()
}
