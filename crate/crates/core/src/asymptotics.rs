//! Large-n behaviour of (-1)^n P_n(0; t, alpha) from the Coulomb fluid, the
//! constants c_2 and conjectured c_1, and comparison with the exact
//! finite-n ratio.

use crate::coulomb_fluid::{solve_endpoints, FluidEndpoints};
use crate::error::{Error, Result};
use crate::hankel::{pn_at_zero, WeightParams};
use crate::precision::{PrecisionCtx, Real};
use crate::series::{eval_series, ratio_expansion, AlphaValue};
use crate::special_functions::{barnes_g_log, log_gamma};

#[derive(Clone, Debug)]
pub struct OriginAsymptotics {
    /// ln exp[-S_1(0)]
    pub log_exp_ms1: Real,
    /// ln |exp[-S_2(0)]|; the sign is (-1)^n.
    pub log_exp_ms2: Real,
    pub log_pn0: Real,
    pub n: usize,
    pub params: WeightParams,
}

/// ln{(1/2)[(b/a)^{1/4} + (a/b)^{1/4}]}.
pub fn s1_at_zero(ep: &FluidEndpoints) -> Result<Real> {
    if !ep.a.is_positive() || !(ep.b >= ep.a) {
        return Err(Error::domain("s1_at_zero", "need 0 < a <= b"));
    }
    let q = (&ep.b / &ep.a).sqrt().sqrt();
    Ok(((&q + q.recip()) / 2i64).ln())
}

/// ln of 2^{-1/6} n^{1/3} t^{-1/6}.
pub fn s1_asymptotic(n: usize, t: &Real) -> Real {
    let nr = t.int_like(n as i64);
    nr.ln() / 3i64 - (t.ln() + t.lit(2.0).ln()) / 6i64
}

/// ln |exp[-S_2(0)]| from the closed form in X = sqrt(ab):
/// n ln(n + alpha/2 + t/(2X) + X/2) + alpha ln(n/X + alpha/(2X) + t/(2X^2) + 1/2)
///   - n - alpha/2 - t/X + X/2 + (n + alpha/2) t/X^2 + t^2/(2 X^3).
pub fn s2_at_zero(n: usize, params: &WeightParams, ep: &FluidEndpoints) -> Result<Real> {
    if !params.t.is_positive() {
        return Err(Error::domain("s2_at_zero", "t must be positive"));
    }
    let alpha = &params.alpha;
    let t = &params.t;
    let x = (&ep.a * &ep.b).sqrt();
    let nr = t.int_like(n as i64);
    let half_a = alpha / 2i64;
    let f1 = &nr + &half_a + t / (&x * 2i64) + &x / 2i64;
    let f2 = (&nr + &half_a) / &x + t / (x.sqr() * 2i64) + 0.5;
    let e = -(&nr) - &half_a - t / &x + &x / 2i64 + (&nr + &half_a) * t / x.sqr() + t.sqr() / (x.sqr() * &x * 2i64);
    Ok(f1.ln() * &nr + f2.ln() * alpha + e)
}

/// n ln n - n + 3 2^{-2/3} n^{1/3} t^{1/3} + (2 alpha/3) ln n - (alpha/3) ln(2t).
pub fn s2_asymptotic(n: usize, alpha: &Real, t: &Real) -> Real {
    let nr = t.int_like(n as i64);
    let ln_n = nr.ln();
    let cross = (&nr * t / 4i64).cbrt() * 3i64;
    &ln_n * &nr - &nr + cross + alpha * &ln_n * 2i64 / 3i64 - alpha * (t * 2i64).ln() / 3i64
}

/// n ln n - n + 3 2^{-2/3} (nt)^{1/3} + ((1+2alpha)/3) ln n - (1/6 + alpha/3) ln(2t).
pub fn pn0_asymptotic(n: usize, alpha: &Real, t: &Real) -> Real {
    let nr = t.int_like(n as i64);
    let ln_n = nr.ln();
    let cross = (&nr * t / 4i64).cbrt() * 3i64;
    let k = alpha * 2i64 + 1i64;
    &ln_n * &nr - &nr + cross + &k * &ln_n / 3i64 - &k * (t * 2i64).ln() / 6i64
}

/// The Coulomb-fluid evaluation of ln (-1)^n P_n(0) in the 2n + alpha
/// convention.
pub fn origin_asymptotics(n: usize, params: &WeightParams) -> Result<OriginAsymptotics> {
    let ep = solve_endpoints(n, params)?;
    let log_exp_ms1 = s1_at_zero(&ep)?;
    let log_exp_ms2 = s2_at_zero(n, params, &ep)?;
    Ok(OriginAsymptotics {
        log_pn0: &log_exp_ms1 + &log_exp_ms2,
        log_exp_ms1,
        log_exp_ms2,
        n,
        params: params.clone(),
    })
}

/// c_2(alpha) = ln(Gamma(1+alpha) / sqrt(2 pi)).
pub fn c2_constant(alpha: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    if !alpha.is_positive() {
        return Err(Error::domain("c2_constant", "alpha must be positive"));
    }
    let lg = log_gamma(&(alpha + 1i64), ctx)?;
    Ok(lg - (ctx.pi() * 2i64).ln() / 2i64)
}

/// The conjectured c_1(alpha) = ln G(alpha+1) - (alpha/2) ln(2 pi).
pub fn c1_conjectured(alpha: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    if !alpha.is_positive() {
        return Err(Error::domain("c1_conjectured", "alpha must be positive"));
    }
    let lg = barnes_g_log(&(alpha + 1i64), ctx)?;
    Ok(lg - alpha * (ctx.pi() * 2i64).ln() / 2i64)
}

#[derive(Clone, Debug)]
pub struct RatioCheck {
    pub n: usize,
    /// ln[P_n(0; t) / P_n(0; 0)] from the Hankel engine.
    pub exact: Real,
    /// c_2 + (3/2) s^{1/3} - ((1+2alpha)/6) ln s.
    pub asymptotic: Real,
    /// The large-s ratio expansion with its constant set to c_2.
    pub corollary: Real,
}

impl RatioCheck {
    pub fn difference(&self) -> Real {
        (&self.exact - &self.asymptotic).abs()
    }
}

/// Ratio terms kept in the corollary value (through s^{-4/3}).
const COROLLARY_TERMS: usize = 5;

/// Compares the exact ratio at t = s/(2n+1+alpha) with the asymptotic form,
/// in which 2nt is identified with s.
pub fn pn0_ratio_check(n: usize, s: &Real, alpha: &Real, ctx: &PrecisionCtx) -> Result<RatioCheck> {
    if !s.is_positive() {
        return Err(Error::domain("pn0_ratio_check", "s must be positive"));
    }
    // Scaling boundary: the recurrence convention s = (2n + 1 + alpha) t.
    let t = s / (alpha + (2 * n as i64 + 1));
    if t > 2.0 {
        return Err(Error::domain("pn0_ratio_check", "n too small: t = s/(2n+1+alpha) exceeds 2"));
    }
    let p_t = WeightParams::new(alpha.clone(), t, *ctx)?;
    let p_0 = WeightParams::new(alpha.clone(), ctx.zero(), *ctx)?;
    let (at_t, at_0) = rayon::join(|| pn_at_zero(n, &p_t), || pn_at_zero(n, &p_0));
    let exact = at_t?.log_value - at_0?.log_value;
    let c2 = c2_constant(alpha, ctx)?;
    let asymptotic = &c2 + s.cbrt() * 3i64 / 2i64 - (alpha * 2i64 + 1i64) * s.ln() / 6i64;
    let av = AlphaValue::Approx(alpha.clone());
    let ser = ratio_expansion(&av, COROLLARY_TERMS)?.resolve_const(c2);
    let corollary = eval_series(&ser, s, &ctx.with_tol(1.0 - f64::EPSILON))?.value;
    Ok(RatioCheck { n, exact, asymptotic, corollary })
}

/// CSV with columns n, exact, asymptotic, difference.
pub fn convergence_csv(rows: &[RatioCheck]) -> String {
    let mut out = String::from("n,exact,asymptotic,difference\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            r.exact.to_decimal(),
            r.asymptotic.to_decimal(),
            r.difference().to_decimal()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::default()
    }

    fn params(alpha: f64, t: f64) -> WeightParams {
        WeightParams::from_f64(alpha, t, ctx()).unwrap()
    }

    #[test]
    fn s1_plug_in_at_t_zero() {
        let c = ctx();
        let ep = solve_endpoints(10, &params(1.0, 0.0)).unwrap();
        let r = c.int(440).sqrt();
        let (a, b) = (c.int(21) - &r, c.int(21) + &r);
        let q = (&b / &a).powr(&c.real(0.25));
        let direct = ((&q + (&a / &b).powr(&c.real(0.25))) / 2i64).ln();
        assert!((s1_at_zero(&ep).unwrap() - direct).abs() < 1e-60);
        let mut deg = ep.clone();
        deg.a = deg.b.clone();
        assert!(s1_at_zero(&deg).unwrap().abs() < 1e-70);
    }

    #[test]
    fn s1_ratio_to_asymptotic_improves() {
        let t = ctx().real(0.5);
        let mut prev = f64::INFINITY;
        // the two leading corrections nearly cancel below n ~ 400
        for n in [200usize, 400, 1600, 10_000] {
            let ep = solve_endpoints(n, &params(0.5, 0.5)).unwrap();
            let d = (s1_at_zero(&ep).unwrap() - s1_asymptotic(n, &t)).to_f64().exp();
            let err = (d - 1.0).abs();
            if n == 200 {
                assert!(err < 0.1);
                continue;
            }
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn s2_and_pn0_ratios_approach_one() {
        let c = ctx();
        let t = c.real(0.5);
        let a = c.real(0.5);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in [100usize, 200, 400] {
            let o = origin_asymptotics(n, &params(0.5, 0.5)).unwrap();
            let r2 = (&o.log_exp_ms2 / s2_asymptotic(n, &a, &t) - 1i64).abs().to_f64();
            let rp = (&o.log_pn0 / pn0_asymptotic(n, &a, &t) - 1i64).abs().to_f64();
            assert!(r2 < prev.0 && rp < prev.1);
            prev = (r2, rp);
            assert_eq!(o.log_pn0, &o.log_exp_ms1 + &o.log_exp_ms2);
        }
        assert!(prev.1 < 1e-2);
    }

    #[test]
    fn s2_alpha_derivative_matches_difference() {
        let c = ctx();
        let n = 50;
        let f = |alpha: &Real| {
            let p = WeightParams::new(alpha.clone(), c.real(0.5), c).unwrap();
            let ep = solve_endpoints(n, &p).unwrap();
            s2_at_zero(n, &p, &ep).unwrap()
        };
        let a = c.real(0.7);
        let h = c.real(1e-20);
        let central = (f(&(&a + &h)) - f(&(&a - &h))) / (&h * 2i64);
        let h2 = c.real(2e-20);
        let wide = (f(&(&a + &h2)) - f(&(&a - &h2))) / (&h2 * 2i64);
        assert!((central - wide).abs() < 1e-30);
    }

    #[test]
    fn constants_at_small_integers() {
        let c = ctx();
        let half_ln = (c.pi() * 2i64).ln() / 2i64;
        assert!((c2_constant(&c.one(), &c).unwrap() + &half_ln).abs() < 1e-70);
        assert!((c1_conjectured(&c.one(), &c).unwrap() + &half_ln).abs() < 1e-70);
        assert!((c1_conjectured(&c.int(2), &c).unwrap() + &half_ln * 2i64).abs() < 1e-70);
    }

    #[test]
    fn ratio_check_pieces() {
        let c = ctx();
        let r = pn0_ratio_check(60, &c.int(30), &c.real(0.5), &c).unwrap();
        // corollary and asymptotic share every term through ln s
        let tail = (&r.corollary - &r.asymptotic).abs().to_f64();
        assert!(tail > 0.0 && tail < 0.05);
        assert!(convergence_csv(&[r]).starts_with("n,exact,asymptotic,difference\n"));
        assert!(pn0_ratio_check(2, &c.int(30), &c.real(0.5), &c).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn c1_c2_relation(alpha in 0.01f64..5.0) {
            let c = ctx();
            let a = c.real(alpha);
            let lhs = c1_conjectured(&(&a + 1i64), &c).unwrap() - c1_conjectured(&a, &c).unwrap();
            let d = (lhs - c2_constant(&a, &c).unwrap()).abs();
            prop_assert!(d.to_f64() <= 10.0 * c.target_tol());
        }
    }
}
