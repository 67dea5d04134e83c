//! Equilibrium density of the Coulomb fluid for the weight
//! x^alpha e^{-x - t/x}: endpoints of the support, the density itself, the
//! double-scaled cubic and the integration identities behind the endpoint
//! equations.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hankel::WeightParams;
use crate::precision::{PrecisionCtx, Real};
use crate::quadrature::tanh_sinh;

/// Which shift of 2n enters the quartic and the endpoint equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    /// 2n + alpha, as in the Coulomb-fluid endpoint equations.
    #[default]
    Fluid,
    /// 2n + 1 + alpha, as in the scaling s = (2n + 1 + alpha) t.
    Recurrence,
}

impl Convention {
    /// The effective size n~.
    pub fn n_eff(self, n: usize, alpha: &Real) -> Real {
        match self {
            Convention::Fluid => alpha + 2 * n as i64,
            Convention::Recurrence => alpha + (2 * n as i64 + 1),
        }
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Convention> {
        match s {
            "2n+alpha" | "fluid" => Ok(Convention::Fluid),
            "2n+1+alpha" | "recurrence" => Ok(Convention::Recurrence),
            _ => Err(Error::Usage(format!(
                "unknown convention '{s}' (expected 2n+alpha or 2n+1+alpha)"
            ))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Fluid => "2n+alpha",
            Convention::Recurrence => "2n+1+alpha",
        })
    }
}

#[derive(Clone, Debug)]
pub struct FluidEndpoints {
    pub a: Real,
    pub b: Real,
    /// sqrt(a b), the positive root of the quartic.
    pub x: Real,
    pub n: usize,
    pub params: WeightParams,
    pub convention: Convention,
}

impl FluidEndpoints {
    /// Residuals of (a+b)/2 = n~ + t/X and (a+b) t / (2 X^3) + alpha/X = 1.
    pub fn equation_residuals(&self) -> (Real, Real) {
        let p = &self.params;
        let x = (&self.a * &self.b).sqrt();
        let sum = &self.a + &self.b;
        let r1 = self.convention.n_eff(self.n, &p.alpha) + &p.t / &x - &sum / 2i64;
        let r2 = &sum * &p.t / (x.sqr() * &x * 2i64) + &p.alpha / &x - 1i64;
        (r1.abs(), r2.abs())
    }
}

/// X^4 - alpha X^3 - n~ t X - t^2.
pub fn quartic(x: &Real, alpha: &Real, n_eff: &Real, t: &Real) -> Real {
    x.sqr() * x * (x - alpha) - n_eff * t * x - t.sqr()
}

/// Number of sign changes in the coefficient sequence of the quartic; by
/// Descartes' rule this bounds the number of positive roots.
fn descartes_count(coeffs: &[Real]) -> usize {
    let signs: Vec<bool> = coeffs.iter().filter(|c| !c.is_zero()).map(|c| c.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Endpoints in the default (2n + alpha) convention.
pub fn solve_endpoints(n: usize, params: &WeightParams) -> Result<FluidEndpoints> {
    solve_endpoints_with(n, params, Convention::Fluid)
}

pub fn solve_endpoints_with(n: usize, params: &WeightParams, convention: Convention) -> Result<FluidEndpoints> {
    if n == 0 {
        return Err(Error::domain("solve_endpoints", "n must be at least 1"));
    }
    let ctx = &params.ctx;
    let wp = ctx.bits() + 64;
    let alpha = params.alpha.with_prec(wp);
    let t = params.t.with_prec(wp);
    let n_eff = convention.n_eff(n, &alpha);

    let x = if t.is_zero() {
        alpha.clone()
    } else {
        let zero = alpha.zero_like();
        let coeffs = [alpha.one_like(), -&alpha, zero, -(&n_eff * &t), -t.sqr()];
        let changes = descartes_count(&coeffs);
        if changes != 1 {
            return Err(Error::solver(
                "solve_endpoints",
                format!("quartic has {changes} sign changes; expected exactly one positive root"),
            ));
        }
        positive_root(|x| quartic(x, &alpha, &n_eff, &t), |x| {
            x.sqr() * x * 4i64 - alpha.clone() * x.sqr() * 3i64 - &n_eff * &t
        }, &(alpha.one_like() + &alpha + &n_eff * &t + t.sqr()), wp)?
    };
    let sum = &n_eff + &t / &x;
    let disc = sum.sqr() - x.sqr();
    if disc.is_negative() {
        return Err(Error::solver("solve_endpoints", "endpoint discriminant is negative"));
    }
    let b = &sum + disc.sqrt();
    let a = x.sqr() / &b;
    let bits = ctx.bits();
    Ok(FluidEndpoints {
        a: a.with_prec(bits),
        b: b.with_prec(bits),
        x: x.with_prec(bits),
        n,
        params: params.clone(),
        convention,
    })
}

/// The root of f in (0, upper) for f(0) < 0 < f(upper), f convex and
/// increasing to the right of its root: bisection to a coarse bracket, then
/// Newton from the right end, which decreases monotonically.
fn positive_root(f: impl Fn(&Real) -> Real, df: impl Fn(&Real) -> Real, upper: &Real, wp: u32) -> Result<Real> {
    let mut lo = upper.zero_like();
    let mut hi = upper.clone();
    if !f(&hi).is_positive() {
        return Err(Error::solver("positive_root", "no sign change on the bracket"));
    }
    for _ in 0..60 {
        let mid = (&lo + &hi) / 2i64;
        if f(&mid).is_positive() {
            hi = mid;
        } else {
            lo = mid;
        }
        if (&hi - &lo) < &hi * 1e-6 {
            break;
        }
    }
    let mut x = hi;
    let eps = x.lit(2f64.powi(-(wp as i32) + 16));
    for _ in 0..200 {
        let step = f(&x) / df(&x);
        x -= &step;
        if step.abs() <= &x * &eps {
            // one more step to land on full precision
            let step = f(&x) / df(&x);
            x -= step;
            return Ok(x);
        }
    }
    Err(Error::solver("positive_root", "Newton iteration did not converge"))
}

/// Equilibrium density at x in [a, b].
pub fn density(x: &Real, ep: &FluidEndpoints) -> Result<Real> {
    if *x < ep.a || *x > ep.b {
        return Err(Error::domain("density", "x outside the support [a, b]"));
    }
    Ok(density_unchecked(x, ep))
}

fn density_factor(x: &Real, ep: &FluidEndpoints) -> Real {
    let alpha = &ep.params.alpha;
    let t = &ep.params.t;
    let ab = &ep.a * &ep.b;
    let r = ab.sqrt();
    let c1 = alpha / &r + t * (&ep.a + &ep.b) / (&ab * &r * 2i64);
    (c1 / x + t / (x.sqr() * &r)) / (x.one_like() * 2i64 * pi(x.prec()))
}

fn density_unchecked(x: &Real, ep: &FluidEndpoints) -> Real {
    let root = ((&ep.b - x) * (x - &ep.a)).max(x.zero_like()).sqrt();
    root * density_factor(x, ep)
}

fn pi(bits: u32) -> Real {
    PrecisionCtx::new(bits.max(PrecisionCtx::MIN_BITS), 0.5).expect("valid bits").pi()
}

/// Integral of g(x) / sqrt((b-x)(x-a)) over [a, b] through
/// x = a + (b-a) sin^2(theta), which turns it into 2 int_0^{pi/2} g dtheta.
fn arcsine_integral(a: &Real, b: &Real, g: impl Fn(&Real) -> Real, ctx: &PrecisionCtx) -> Result<Real> {
    let half_pi = pi(ctx.bits() + 32) / 2i64;
    let width = b - a;
    let v = tanh_sinh(&half_pi.zero_like(), &half_pi, |th| g(&(a + &width * th.sin().sqr())), ctx)?;
    Ok(v * 2i64)
}

/// Integral of sigma over [a, b].
pub fn total_mass(ep: &FluidEndpoints, ctx: &PrecisionCtx) -> Result<Real> {
    // sigma = (b-x)(x-a) factor / sqrt((b-x)(x-a))
    arcsine_integral(&ep.a, &ep.b, |x| (&ep.b - x) * (x - &ep.a) * density_factor(x, ep), ctx)
}

/// Profile of sigma at `points` equispaced nodes including both endpoints,
/// as CSV with columns x, sigma.
pub fn density_csv(ep: &FluidEndpoints, points: usize) -> String {
    let mut out = String::from("x,sigma\n");
    let points = points.max(2);
    let width = &ep.b - &ep.a;
    for i in 0..points {
        let x = if i + 1 == points {
            ep.b.clone()
        } else {
            &ep.a + &width * i as i64 / (points as i64 - 1)
        };
        let v = density_unchecked(&x, ep);
        out.push_str(&format!("{},{}\n", x.to_decimal(), v.to_decimal()));
    }
    out
}

/// C~(s) = 1/X~ for the real root of X~^3 - alpha X~^2 - s = 0, by the
/// radical formula; Newton on the cubic cross-checks it.
pub fn cubic_limit_root(s: &Real, alpha: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    if !s.is_positive() {
        return Err(Error::domain("cubic_limit_root", "s must be positive"));
    }
    if alpha.is_negative() {
        return Err(Error::domain("cubic_limit_root", "alpha must be non-negative"));
    }
    let wp = ctx.bits() + 64;
    let s = s.with_prec(wp);
    let a = alpha.with_prec(wp);
    let x = cubic_radical(&s, &a);
    let newton = positive_root(
        |x| x.sqr() * (x - &a) - &s,
        |x| x.sqr() * 3i64 - &a * x * 2i64,
        &(s.one_like() + &a + &s),
        wp,
    )?;
    let disc = ((&x - &newton) / &x).abs();
    if disc > 10.0 * ctx.target_tol() {
        return Err(Error::consistency(
            "cubic_limit_root",
            format!("radical and Newton roots differ by {:e}", disc.to_f64()),
        ));
    }
    Ok(x.recip().with_prec(ctx.bits()))
}

/// X = alpha/3 + w + alpha^2/(9 w), w^3 = alpha^3/27 + s/2 + sqrt(s (s/4 + alpha^3/27)).
fn cubic_radical(s: &Real, a: &Real) -> Real {
    let a3 = a.sqr() * a / 27i64;
    let w = (&a3 + s / 2i64 + (s * (s / 4i64 + &a3)).sqrt()).cbrt();
    a / 3i64 + &w + a.sqr() / (&w * 9i64)
}

/// Value and printed right-hand side of each integration identity.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub label: &'static str,
    pub integral: Real,
    pub closed_form: Real,
    pub residual: Real,
}

/// The six arcsine-weighted integrals of 1, x, 1/x, 1/x^2, ln x, ln x / x
/// against their closed forms.
pub fn verify_appendix_integrals(a: &Real, b: &Real, ctx: &PrecisionCtx) -> Result<Vec<IdentityCheck>> {
    if !a.is_positive() || !(b > a) {
        return Err(Error::domain("verify_appendix_integrals", "need 0 < a < b"));
    }
    let wp = ctx.bits() + 32;
    let qctx = ctx.with_guard(32);
    let (a, b) = (a.with_prec(wp), b.with_prec(wp));
    let pi = pi(wp);
    let r = (&a * &b).sqrt();
    let sa_sb = a.sqrt() + b.sqrt();
    let ln = |x: &Real| x.ln();
    let cases: Vec<(&'static str, Box<dyn Fn(&Real) -> Real>, Real)> = vec![
        ("1", Box::new(|x: &Real| x.one_like()), pi.clone()),
        ("x", Box::new(|x: &Real| x.clone()), &pi * (&a + &b) / 2i64),
        ("1/x", Box::new(|x: &Real| x.recip()), &pi / &r),
        ("1/x^2", Box::new(|x: &Real| x.sqr().recip()), &pi * (&a + &b) / (r.sqr() * &r * 2i64)),
        ("ln x", Box::new(move |x: &Real| ln(x)), &pi * 2i64 * (&sa_sb / 2i64).ln()),
        ("ln x / x", Box::new(|x: &Real| x.ln() / x), &pi * 2i64 / &r * (&r * 2i64 / (a.sqrt() + b.sqrt())).ln()),
    ];
    let mut out = Vec::with_capacity(6);
    for (label, g, rhs) in cases {
        let v = arcsine_integral(&a, &b, g, &qctx)?;
        let residual = (&v - &rhs).abs();
        out.push(IdentityCheck {
            label,
            integral: v.with_prec(ctx.bits()),
            closed_form: rhs.with_prec(ctx.bits()),
            residual: residual.with_prec(ctx.bits()),
        });
    }
    Ok(out)
}

/// 1/X~ at t = s / n~ against the cubic root, for the scaled-limit check.
pub fn scaled_root_error(n: usize, s: &Real, alpha: &Real, t_convention: Convention, ctx: &PrecisionCtx) -> Result<Real> {
    let t = s / t_convention.n_eff(n, alpha);
    let params = WeightParams::new(alpha.clone(), t, *ctx)?;
    let ep = solve_endpoints(n, &params)?;
    let c = cubic_limit_root(s, alpha, ctx)?;
    Ok((ep.x.recip() - c).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{ctilde_series, eval_series, AlphaValue, Origin};
    use proptest::prelude::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::default()
    }

    fn params(alpha: f64, t: f64) -> WeightParams {
        WeightParams::from_f64(alpha, t, ctx()).unwrap()
    }

    #[test]
    fn laguerre_endpoints_at_t_zero() {
        let ep = solve_endpoints(10, &params(1.0, 0.0)).unwrap();
        let c = ctx();
        let r440 = c.int(440).sqrt();
        assert!((&ep.x - 1i64).abs() < 1e-70);
        assert!((&ep.a - (c.int(21) - &r440)).abs() < 1e-70);
        assert!((&ep.b - (c.int(21) + r440)).abs() < 1e-70);
    }

    #[test]
    fn quartic_root_and_endpoint_equations() {
        let c = ctx();
        let p = params(0.5, 0.5);
        let ep = solve_endpoints(20, &p).unwrap();
        let n_eff = c.real(40.5);
        let q = quartic(&ep.x, &p.alpha, &n_eff, &p.t);
        assert!(q.abs() <= 10.0 * c.target_tol() * ep.x.sqr().sqr().to_f64());
        let (r1, r2) = ep.equation_residuals();
        assert!(r1 < 10.0 * c.target_tol() * 41.0);
        assert!(r2 < 10.0 * c.target_tol());
        assert!(((&ep.a * &ep.b).sqrt() - &ep.x).abs() < 1e-70);
    }

    #[test]
    fn density_normalises_and_vanishes_at_edges() {
        let c = ctx();
        let ep = solve_endpoints(20, &params(0.5, 0.5)).unwrap();
        assert!(density(&ep.a, &ep).unwrap().is_zero());
        assert!(density(&ep.b, &ep).unwrap().is_zero());
        assert!(density(&(&ep.b + 1i64), &ep).is_err());
        let m = total_mass(&ep, &c.with_tol(1e-30)).unwrap();
        assert!((m - 20i64).abs() < 1e-10);
    }

    #[test]
    fn laguerre_density_at_midpoint() {
        let c = ctx();
        let ep = solve_endpoints(5, &params(1.5, 0.0)).unwrap();
        let x = (&ep.a + &ep.b) / 2i64;
        let direct = c.real(1.5) / (&ep.a * &ep.b).sqrt() / &x * ((&ep.b - &x) * (&x - &ep.a)).sqrt()
            / (c.pi() * 2i64);
        assert!((density(&x, &ep).unwrap() - direct).abs() < 1e-70);
    }

    #[test]
    fn left_endpoint_scaling() {
        // a n~^{1/3} / t^{2/3} -> 1/2
        let c = ctx();
        let mut prev = f64::INFINITY;
        for n in [1000usize, 10_000, 100_000] {
            let ep = solve_endpoints(n, &params(0.5, 1.0)).unwrap();
            let v = (&ep.a * c.real(2.0 * n as f64 + 0.5).cbrt()).to_f64();
            let err = (v - 0.5).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn cubic_root_special_cases() {
        let c = ctx();
        let v = cubic_limit_root(&c.int(8), &c.zero(), &c).unwrap();
        assert!((v - 0.5).abs() < 1e-70);
        let s = c.real(1e-3);
        let v = cubic_limit_root(&s, &c.one(), &c).unwrap();
        let printed = c.one() - &s + s.sqr() * 3i64 - s.sqr() * &s * 12i64 + s.sqr().sqr() * 55i64;
        assert!((&v - printed).abs() < 1e-8);
        let s = c.real(1e6);
        let v = cubic_limit_root(&s, &c.one(), &c).unwrap();
        let third = c.one() / 3i64;
        let lead = s.powr(&(-&third)) - s.powr(&(-(&third * 2i64))) / 3i64;
        assert!((v - lead).abs() < 1e-9);
    }

    #[test]
    fn cubic_root_matches_series() {
        let c = ctx();
        let a = AlphaValue::ratio(3, 2);
        let small = ctilde_series(&a, 12, Origin::Zero).unwrap();
        let s = c.real(0.01);
        let v = eval_series(&small, &s, &c).unwrap();
        let got = cubic_limit_root(&s, &c.real(1.5), &c).unwrap();
        assert!((got - v.value).abs() <= v.truncation * 10i64);
    }

    #[test]
    fn appendix_identities() {
        let c = ctx().with_tol(1e-30);
        for (a, b) in [(1.0, 3.0), (0.5, 7.0), (1.0, 4.0), (1.0, 1.0 + 1e-4)] {
            let checks = verify_appendix_integrals(&c.real(a), &c.real(b), &c).unwrap();
            assert_eq!(checks.len(), 6);
            for ch in &checks {
                assert!(ch.residual < 1e-10, "{} at ({a},{b})", ch.label);
            }
        }
        let ch = verify_appendix_integrals(&c.one(), &c.int(4), &c).unwrap();
        assert!((&ch[2].integral - c.pi() / 2i64).abs() < 1e-25);
    }

    #[test]
    fn scaled_limit_converges() {
        let c = ctx();
        let s = c.int(2);
        let a = c.real(0.5);
        let errs: Vec<f64> = [100usize, 1000, 10_000]
            .iter()
            .map(|&n| scaled_root_error(n, &s, &a, Convention::Recurrence, &c).unwrap().to_f64())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 8.0 && ratio < 12.5, "{errs:?}");
        }
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("2n+alpha".parse::<Convention>().unwrap(), Convention::Fluid);
        assert_eq!("2n+1+alpha".parse::<Convention>().unwrap(), Convention::Recurrence);
        assert!("x".parse::<Convention>().is_err());
        assert_eq!(Convention::Recurrence.to_string(), "2n+1+alpha");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unique_positive_root(n in 1usize..200, alpha in 0.05f64..6.0, t in 0.01f64..5.0) {
            let ep = solve_endpoints(n, &params(alpha, t)).unwrap();
            prop_assert!(ep.a.is_positive() && ep.a < ep.b);
            let (r1, r2) = ep.equation_residuals();
            let scale = 2.0 * n as f64 + alpha + 1.0;
            prop_assert!(r1.to_f64() <= 10.0 * 1e-60 * scale);
            prop_assert!(r2.to_f64() <= 1e-58);
        }
    }
}
