//! Interval allocation constraints `K = [alpha, beta]` over the extended reals.

use std::cmp::Ordering;
use std::fmt;

use crate::{Error, Result};

/// A real number or one of the two infinities.
///
/// Infinities only take part in comparisons and indicator logic; arithmetic
/// goes through [`ExtendedReal::finite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            Self::PosInf
        } else if x == f64::NEG_INFINITY {
            Self::NegInf
        } else {
            Self::Finite(x)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// Lossy view as `f64` (infinities map to `f64` infinities).
    pub fn to_f64(self) -> f64 {
        match self {
            Self::NegInf => f64::NEG_INFINITY,
            Self::Finite(x) => x,
            Self::PosInf => f64::INFINITY,
        }
    }

    /// `self < x` for a real `x`.
    pub fn lt(self, x: f64) -> bool {
        match self {
            Self::NegInf => true,
            Self::Finite(v) => v < x,
            Self::PosInf => false,
        }
    }

    /// `self > x` for a real `x`.
    pub fn gt(self, x: f64) -> bool {
        match self {
            Self::NegInf => false,
            Self::Finite(v) => v > x,
            Self::PosInf => true,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (PosInf, _) | (_, NegInf) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegInf => f.write_str("-inf"),
            Self::Finite(x) => write!(f, "{x}"),
            Self::PosInf => f.write_str("inf"),
        }
    }
}

/// Closed interval `[alpha, beta]` with `alpha < beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalConstraint {
    alpha: ExtendedReal,
    beta: ExtendedReal,
}

impl IntervalConstraint {
    pub fn new(alpha: impl Into<ExtendedReal>, beta: impl Into<ExtendedReal>) -> Result<Self> {
        let (alpha, beta) = (alpha.into(), beta.into());
        for bound in [alpha, beta] {
            if let ExtendedReal::Finite(x) = bound {
                if x.is_nan() {
                    return Err(Error::InvalidConstraint("bounds must not be NaN".into()));
                }
            }
        }
        if alpha == ExtendedReal::PosInf || beta == ExtendedReal::NegInf {
            return Err(Error::InvalidConstraint(format!(
                "[{alpha}, {beta}] has an empty interior"
            )));
        }
        if !(alpha < beta) {
            return Err(Error::InvalidConstraint(format!(
                "alpha must be below beta, got [{alpha}, {beta}]"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `K = R`, the unconstrained case.
    pub fn unconstrained() -> Self {
        Self {
            alpha: ExtendedReal::NegInf,
            beta: ExtendedReal::PosInf,
        }
    }

    pub fn alpha(&self) -> ExtendedReal {
        self.alpha
    }

    pub fn beta(&self) -> ExtendedReal {
        self.beta
    }

    pub fn is_unconstrained(&self) -> bool {
        !self.alpha.is_finite() && !self.beta.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        !self.alpha.gt(x) && !self.beta.lt(x)
    }

    /// Membership in the open interval `(alpha, beta)`.
    pub fn interior_contains(&self, x: f64) -> bool {
        self.alpha.lt(x) && self.beta.gt(x)
    }

    /// `Cap(x, alpha, beta)`: projection of `x` onto the interval.
    pub fn cap(&self, x: f64) -> f64 {
        match (self.alpha, self.beta) {
            (ExtendedReal::Finite(a), _) if x < a => a,
            (_, ExtendedReal::Finite(b)) if x > b => b,
            _ => x,
        }
    }

    /// Support function of the interval, see [`support_function`].
    pub fn support(&self, x: f64) -> ExtendedReal {
        support_function(self, x)
    }
}

impl fmt::Display for IntervalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.alpha, self.beta)
    }
}

/// `delta_K(x) = -inf_{y in K} x y = -alpha x 1{x>0} - beta x 1{x<0}`.
pub fn support_function(k: &IntervalConstraint, x: f64) -> ExtendedReal {
    if x > 0.0 {
        match k.alpha {
            ExtendedReal::Finite(a) => ExtendedReal::Finite(-a * x),
            _ => ExtendedReal::PosInf,
        }
    } else if x < 0.0 {
        match k.beta {
            ExtendedReal::Finite(b) => ExtendedReal::Finite(-b * x),
            _ => ExtendedReal::PosInf,
        }
    } else {
        ExtendedReal::Finite(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> IntervalConstraint {
        IntervalConstraint::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn support_function_examples() {
        assert_eq!(support_function(&unit(), 2.0), ExtendedReal::Finite(-0.0));
        assert_eq!(support_function(&unit(), 2.0).finite(), Some(0.0));
        assert_eq!(support_function(&unit(), -3.0), ExtendedReal::Finite(3.0));
        assert_eq!(support_function(&unit(), 0.0), ExtendedReal::Finite(0.0));
        let half_line = IntervalConstraint::new(f64::NEG_INFINITY, 1.0).unwrap();
        assert_eq!(support_function(&half_line, 5.0), ExtendedReal::PosInf);
        assert_eq!(
            support_function(&half_line, -5.0),
            ExtendedReal::Finite(5.0)
        );
        assert_eq!(
            support_function(&IntervalConstraint::unconstrained(), 0.0),
            ExtendedReal::Finite(0.0)
        );
    }

    #[test]
    fn rejects_degenerate_intervals() {
        assert!(IntervalConstraint::new(1.0, 1.0).is_err());
        assert!(IntervalConstraint::new(2.0, 1.0).is_err());
        assert!(IntervalConstraint::new(f64::INFINITY, f64::INFINITY).is_err());
        assert!(IntervalConstraint::new(f64::NAN, 1.0).is_err());
        assert!(IntervalConstraint::new(0.0, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn cap_is_median() {
        let k = unit();
        assert_eq!(k.cap(-0.5), 0.0);
        assert_eq!(k.cap(0.3), 0.3);
        assert_eq!(k.cap(7.0), 1.0);
        assert_eq!(IntervalConstraint::unconstrained().cap(7.0), 7.0);
        assert!(k.contains(1.0) && !k.interior_contains(1.0));
    }

    #[test]
    fn extended_ordering() {
        use ExtendedReal::*;
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(1e300) < PosInf);
        assert!(NegInf.lt(0.0) && PosInf.gt(0.0));
        assert_eq!(ExtendedReal::from(f64::INFINITY), PosInf);
        assert_eq!(PosInf.to_string(), "inf");
    }

    fn bound() -> impl Strategy<Value = f64> {
        prop_oneof![
            1 => Just(f64::INFINITY),
            4 => -5.0..5.0f64,
        ]
    }

    proptest! {
        // delta_K(x) >= -x y for every y in K
        #[test]
        fn support_function_dominates(a in bound(), w in 0.01..5.0f64, b in bound(),
                                      x in -10.0..10.0f64, s in 0.0..1.0f64) {
            let alpha = if a.is_finite() { a } else { f64::NEG_INFINITY };
            let beta = if b.is_finite() && alpha.is_finite() { alpha + w }
                       else if b.is_finite() { b } else { f64::INFINITY };
            let k = IntervalConstraint::new(alpha, beta).unwrap();
            let lo = if alpha.is_finite() { alpha } else { -50.0 };
            let hi = if beta.is_finite() { beta } else { lo.max(0.0) + 50.0 };
            let y = lo + s * (hi - lo);
            prop_assert!(k.contains(y));
            match support_function(&k, x) {
                ExtendedReal::Finite(d) => prop_assert!(d >= -x * y - 1e-12),
                ExtendedReal::PosInf => {}
                ExtendedReal::NegInf => prop_assert!(false, "support function is never -inf"),
            }
        }
    }
}
