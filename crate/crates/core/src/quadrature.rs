//! Double-exponential quadrature in extended precision.
//!
//! Everything reduces to the trapezoidal rule on the real line, which
//! converges exponentially for analytic integrands that decay fast at both
//! ends. The finite-interval (tanh-sinh) and half-line (exp-sinh) rules are
//! changes of variable onto that case.

use crate::error::{Error, Result};
use crate::precision::{PrecisionCtx, Real};

const MAX_LEVELS: usize = 14;
const MAX_POINTS_PER_SIDE: usize = 200_000;

/// Sum f(offset + j h) over j >= 1 (direction +1) or j <= -1 (direction -1),
/// stepping `stride` grid points at a time, until the terms have fallen below
/// `cutoff` times the largest magnitude seen.
fn march(
    f: &impl Fn(&Real) -> Real,
    start: &Real,
    step: &Real,
    peak: &mut Real,
    cutoff: &Real,
) -> Result<Real> {
    let mut acc = start.zero_like();
    let mut x = start.clone();
    let mut quiet = 0;
    for _ in 0..MAX_POINTS_PER_SIDE {
        let v = f(&x);
        let mag = if v.is_finite() { v.abs() } else { v.zero_like() };
        if mag > *peak {
            *peak = mag.clone();
        }
        if v.is_finite() {
            acc += &v;
        }
        if mag <= &*peak * cutoff {
            quiet += 1;
            if quiet >= 3 {
                return Ok(acc);
            }
        } else {
            quiet = 0;
        }
        x += step;
    }
    Err(Error::Quadrature { estimate: f64::NAN, levels: 0 })
}

/// Integral over the real line of a smooth integrand decaying at least
/// exponentially at both ends, with a single hump.
pub fn trapezoid_real_line(f: impl Fn(&Real) -> Real, ctx: &PrecisionCtx) -> Result<Real> {
    let wp = ctx.bits() + 32;
    let cutoff = Real::from_f64(2f64.powi(-(wp as i32) - 10), wp);
    let tol = ctx.target_tol() / 64.0;

    let mut h = Real::from_f64(0.5, wp);
    let zero = Real::from_i64(0, wp);
    let mut peak = f(&zero).abs();
    if !peak.is_finite() {
        peak = zero.clone();
    }
    // Raw sum of samples at the current spacing.
    let mut raw = {
        let f0 = f(&zero);
        let center = if f0.is_finite() { f0 } else { zero.clone() };
        let right = march(&f, &h, &h, &mut peak, &cutoff)?;
        let left = march(&f, &(-&h), &(-&h), &mut peak, &cutoff)?;
        center + right + left
    };
    let mut estimate = &raw * &h;
    let mut last_diff = f64::INFINITY;
    for level in 1..=MAX_LEVELS {
        let half = &h / 2i64;
        // New points are the odd multiples of the halved step.
        let step = &h.clone();
        let right = march(&f, &half, step, &mut peak, &cutoff)?;
        let left = march(&f, &(-&half), &(-step), &mut peak, &cutoff)?;
        raw = raw + right + left;
        h = half;
        let next = &raw * &h;
        let diff = (&next - &estimate).abs();
        let scale = next.abs().max(Real::from_f64(f64::MIN_POSITIVE, wp));
        let rel = (&diff / &scale).to_f64();
        estimate = next;
        last_diff = rel;
        // The rule converges quadratically, so a small difference between
        // consecutive levels certifies the finer one.
        if level >= 3 && (rel <= tol || diff.is_zero()) {
            return Ok(estimate.with_prec(ctx.bits()));
        }
    }
    Err(Error::Quadrature { estimate: last_diff, levels: MAX_LEVELS })
}

/// Integral of f over [a, b] by the tanh-sinh rule. Points that round onto
/// an endpoint are skipped, so integrable endpoint singularities are fine.
pub fn tanh_sinh(a: &Real, b: &Real, f: impl Fn(&Real) -> Real, ctx: &PrecisionCtx) -> Result<Real> {
    if !(b > a) {
        return Err(Error::domain("tanh_sinh", "interval must satisfy a < b"));
    }
    let wp = ctx.bits() + 32;
    let a = a.with_prec(wp);
    let b = b.with_prec(wp);
    let rad = (&b - &a) / 2i64;
    let half_pi = Real::from_f64(0.5, wp) * PrecisionCtx::new(wp, 0.5).expect("valid").pi();
    let g = |v: &Real| {
        let u = v.sinh() * &half_pi;
        // Distance to the nearer endpoint, 2 rad / (1 + e^{2|u|}), keeps full
        // relative accuracy where tanh(u) rounds to +-1.
        let gap = &rad * 2i64 / ((u.abs() * 2i64).exp() + 1i64);
        let x = if u.is_negative() { &a + &gap } else { &b - &gap };
        if !(x > a && x < b) {
            return v.zero_like();
        }
        let ch = u.cosh();
        let w = &rad * &half_pi * v.cosh() / ch.sqr();
        f(&x) * w
    };
    trapezoid_real_line(g, ctx)
}

/// Integral of f over (0, infinity) by the exp-sinh rule.
pub fn exp_sinh(f: impl Fn(&Real) -> Real, ctx: &PrecisionCtx) -> Result<Real> {
    let wp = ctx.bits() + 32;
    let half_pi = Real::from_f64(0.5, wp) * PrecisionCtx::new(wp, 0.5).expect("valid").pi();
    let g = |v: &Real| {
        let x = (v.sinh() * &half_pi).exp();
        if x.is_zero() || !x.is_finite() {
            return v.zero_like();
        }
        let w = &x * &half_pi * v.cosh();
        f(&x) * w
    };
    trapezoid_real_line(g, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_on_the_line() {
        let c = PrecisionCtx::default();
        let v = trapezoid_real_line(|x: &Real| (-x.sqr()).exp(), &c).unwrap();
        assert!((v - c.pi().sqrt()).abs() < 1e-70);
    }

    #[test]
    fn finite_interval_with_endpoint_singularity() {
        let c = PrecisionCtx::default();
        let v = tanh_sinh(&c.zero(), &c.one(), |x: &Real| x.sqrt().recip(), &c).unwrap();
        assert!((v - 2.0).abs() < 1e-60);
    }

    #[test]
    fn half_line_gamma_integral() {
        let c = PrecisionCtx::default();
        let v = exp_sinh(|x: &Real| x.sqr() * (-x).exp(), &c).unwrap();
        assert!((v - 2.0).abs() < 1e-60);
    }

    #[test]
    fn rejects_empty_interval() {
        let c = PrecisionCtx::default();
        assert!(tanh_sinh(&c.one(), &c.one(), |x: &Real| x.clone(), &c).is_err());
    }
}
