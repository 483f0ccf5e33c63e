//! Fixed-step ODE integrators, adaptive Simpson quadrature and bisection.
//!
//! The integrators here are the independent oracle for every closed form in
//! the crate; none of them know anything about Riccati equations.

use crate::{Error, Result};

/// States with a component above this magnitude count as blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMethod {
    /// Classic fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Explicit Euler.
    Euler,
}

/// Integrates `y' = rhs(t, y)` on `[0, t_end]` with `steps` equal steps.
///
/// Returns the `steps + 1` grid values including `y0`. Fails with
/// [`Error::NonFiniteState`] once the state is NaN or exceeds
/// [`BLOWUP_THRESHOLD`] in magnitude.
pub fn ode_solve_numeric<F>(
    rhs: F,
    y0: f64,
    t_end: f64,
    steps: usize,
    method: StepMethod,
) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64,
{
    let grid = ode_solve_system(|t, y: &[f64; 1]| [rhs(t, y[0])], [y0], t_end, steps, method)?;
    Ok(grid.into_iter().map(|y| y[0]).collect())
}

/// Vector version of [`ode_solve_numeric`].
pub fn ode_solve_system<F, const N: usize>(
    rhs: F,
    y0: [f64; N],
    t_end: f64,
    steps: usize,
    method: StepMethod,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    assert!(steps >= 1, "ode_solve_system needs at least one step");
    let h = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    for i in 0..steps {
        let t = i as f64 * h;
        y = match method {
            StepMethod::Euler => {
                let k = rhs(t, &y);
                axpy(&y, h, &k)
            }
            StepMethod::Rk4 => {
                let k1 = rhs(t, &y);
                let k2 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
                let k3 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
                let k4 = rhs(t + h, &axpy(&y, h, &k3));
                let mut next = y;
                for j in 0..N {
                    next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                next
            }
        };
        if y.iter()
            .any(|v| !v.is_finite() || v.abs() > BLOWUP_THRESHOLD)
        {
            return Err(Error::NonFiniteState { at: t + h });
        }
        out.push(y);
    }
    Ok(out)
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for j in 0..N {
        out[j] += h * k[j];
    }
    out
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite trapezoid rule with `n` panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_is_constant() {
        let grid = ode_solve_numeric(|_, _| 0.0, 3.25, 2.0, 17, StepMethod::Rk4).unwrap();
        assert_eq!(grid.len(), 18);
        assert!(grid.iter().all(|&y| y == 3.25));
    }

    #[test]
    fn exponential_growth() {
        let grid = ode_solve_numeric(|_, y| y, 1.0, 1.0, 1000, StepMethod::Rk4).unwrap();
        assert!((grid[1000] - 1f64.exp()).abs() < 1e-12);
        let euler = ode_solve_numeric(|_, y| y, 1.0, 1.0, 1000, StepMethod::Euler).unwrap();
        assert!((euler[1000] - 1.001f64.powi(1000)).abs() < 1e-12);
    }

    #[test]
    fn blowup_is_detected() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let err = ode_solve_numeric(|_, y| y * y, 1.0, 2.0, 20_000, StepMethod::Rk4).unwrap_err();
        match err {
            Error::NonFiniteState { at } => assert!((at - 1.0).abs() < 1e-3, "at = {at}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simpson_and_trapezoid() {
        let s = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((s - 2.0).abs() < 1e-11);
        let t = trapezoid(|x: f64| x * x, 0.0, 1.0, 1000);
        assert!((t - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-10), 0.0);
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }
}
