//! The double-scaled C-potential
//!
//!   C'' = C'^2/C - C'/s + C^2/s + alpha/s^2 - 1/(s^2 C),   C(0) = 1/alpha,
//!
//! integrated together with ln Delta(s) = int_0^s H(x) dx / x, where
//! H = (1/4)(s C'/C)^2 - s C/2 - (1/4)(1/C - alpha)^2.
//!
//! The regular solution at s = 0 is not a pure power series: it is a double
//! series in s and s^alpha, and the coefficient of s^alpha is the one free
//! datum. Its value for the solution that arises as the limit of Hankel
//! determinants is Gamma(-alpha) / (2^alpha Gamma(1+alpha)^2); setting it to
//! zero gives the pure series of `series::c_small_series`, which is a
//! different solution and blows up at finite s.
//!
//! Away from the origin the solution is advanced by a Taylor method whose
//! coefficients come from the equation itself, so C'' and the derivatives
//! of H at any node are available without numerical differentiation.

use std::collections::HashMap;

use rug::Float;
use serde_json::json;

use crate::error::{Error, Result};
use crate::precision::{PrecisionCtx, Real};
use crate::series::{self, AlphaValue};
use crate::special_functions::gamma;

/// Default local tolerance of the integrator.
pub const DEFAULT_TOL: f64 = 1e-30;

const MIN_ORDER: usize = 8;
const MAX_ORDER: usize = 120;

/// Growth exponent of the unstable linearised mode: perturbations of the
/// regular solution grow like exp(3 sqrt(3) s^{1/3}).
fn instability_factor(s_max: f64) -> f64 {
    3.0 * 3f64.sqrt() * s_max.cbrt()
}

// ---------------------------------------------------------------------------
// double series at the origin

/// C(s) = sum c_{jk} s^{j + k alpha} together with ln Delta on the same
/// monomials, truncated at j + k alpha <= e_max.
#[derive(Clone, Debug)]
pub struct OriginSeries {
    pub alpha: Real,
    /// Coefficient of s^alpha.
    pub k_coeff: Real,
    mons: Vec<(usize, usize)>,
    e: Vec<Real>,
    c: Vec<Real>,
    /// Coefficients of ln Delta (zero at the constant monomial).
    log_delta: Vec<Real>,
    pub e_max: f64,
}

/// Gamma(-alpha) / (2^alpha Gamma(1+alpha)^2), the coefficient of s^alpha in
/// the regular solution selected by the double-scaling limit.
pub fn k_coefficient(alpha: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    let g_neg = gamma(&(-alpha), ctx)?;
    let g_pos = gamma(&(alpha + 1i64), ctx)?;
    let two = ctx.int(2);
    Ok(g_neg / (two.powr(alpha) * g_pos.sqr()))
}

impl OriginSeries {
    /// Solves for every monomial with exponent up to `e_max`, with the
    /// s^alpha coefficient set to `k_coeff`.
    pub fn new(alpha: &Real, k_coeff: &Real, e_max: f64) -> Result<OriginSeries> {
        if !alpha.is_positive() {
            return Err(Error::domain("OriginSeries", "alpha must be positive"));
        }
        if alpha.as_float().is_integer() {
            return Err(Error::domain(
                "OriginSeries",
                "integer alpha makes the s^alpha and s^j monomials resonate; perturb alpha",
            ));
        }
        let a = alpha.to_f64();
        let mut mons = Vec::new();
        let mut k = 0usize;
        while k as f64 * a <= e_max {
            let mut j = 0usize;
            while j as f64 + k as f64 * a <= e_max {
                mons.push((j, k));
                j += 1;
            }
            k += 1;
        }
        let ev = |m: &(usize, usize)| alpha * m.1 as i64 + m.0 as i64;
        mons.sort_by(|x, y| ev(x).partial_cmp(&ev(y)).expect("finite exponents"));
        let e: Vec<Real> = mons.iter().map(ev).collect();
        let index: HashMap<(usize, usize), usize> = mons.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        // pairs[m] lists (p, q) with p + q = m
        let pairs: Vec<Vec<(usize, usize)>> = mons
            .iter()
            .map(|&(j, k)| {
                let mut out = Vec::with_capacity((j + 1) * (k + 1));
                for jp in 0..=j {
                    for kp in 0..=k {
                        out.push((index[&(jp, kp)], index[&(j - jp, k - kp)]));
                    }
                }
                out
            })
            .collect();

        let n = mons.len();
        let zero = alpha.zero_like();
        let mut c = vec![zero.clone(); n];
        let mut c2 = vec![zero.clone(); n];
        let mut c3 = vec![zero.clone(); n];
        let alpha2 = alpha.sqr();
        for m in 0..n {
            let (j, k) = mons[m];
            c[m] = if m == 0 {
                alpha.recip()
            } else if (j, k) == (0, 1) {
                k_coeff.with_prec(alpha.prec())
            } else {
                let mut rest = zero.clone();
                for &(p, q) in &pairs[m] {
                    if p == 0 || q == 0 {
                        continue;
                    }
                    rest += (&e[p] - &e[q]).sqr() * &c[p] * &c[q];
                }
                rest /= 2i64;
                if j >= 1 {
                    rest -= &c3[index[&(j - 1, k)]];
                }
                let pivot = (e[m].sqr() - &alpha2) / alpha;
                -(rest / pivot)
            };
            let mut acc = zero.clone();
            for &(p, q) in &pairs[m] {
                acc += &c[p] * &c[q];
            }
            c2[m] = acc;
            let mut acc = zero.clone();
            for &(p, q) in &pairs[m] {
                acc += &c[p] * &c2[q];
            }
            c3[m] = acc;
        }

        // H = (1/4)(theta C / C)^2 - s C / 2 - (1/4)(1/C - alpha)^2
        let prod = |x: &[Real], y: &[Real]| -> Vec<Real> {
            (0..n)
                .map(|m| {
                    let mut acc = zero.clone();
                    for &(p, q) in &pairs[m] {
                        acc += &x[p] * &y[q];
                    }
                    acc
                })
                .collect()
        };
        let mut inv = vec![zero.clone(); n];
        inv[0] = alpha.clone();
        for m in 1..n {
            let mut acc = zero.clone();
            for &(p, q) in &pairs[m] {
                if p != 0 {
                    acc += &c[p] * &inv[q];
                }
            }
            inv[m] = -(acc * alpha);
        }
        let theta: Vec<Real> = c.iter().zip(&e).map(|(x, y)| x * y).collect();
        let l = prod(&theta, &inv);
        let l2 = prod(&l, &l);
        let mut r = inv.clone();
        r[0] = zero.clone();
        let r2 = prod(&r, &r);
        let mut log_delta = vec![zero.clone(); n];
        for m in 1..n {
            let (j, k) = mons[m];
            let sc = if j >= 1 { c[index[&(j - 1, k)]].clone() } else { zero.clone() };
            let h = (&l2[m] - &r2[m]) / 4i64 - sc / 2i64;
            log_delta[m] = h / &e[m];
        }
        Ok(OriginSeries {
            alpha: alpha.clone(),
            k_coeff: k_coeff.clone(),
            mons,
            e,
            c,
            log_delta,
            e_max,
        })
    }

    /// Grows the truncation until the top unit band of exponents contributes
    /// less than tol/10 at s0, for C, s C' and ln Delta.
    pub fn for_seed(alpha: &Real, k_coeff: &Real, s0: &Real, tol: f64) -> Result<OriginSeries> {
        let guess = (tol.ln() / (s0.to_f64() / 0.5).ln()).abs().max(4.0) + 2.0;
        let mut e_max = guess;
        for _ in 0..12 {
            let ser = OriginSeries::new(alpha, k_coeff, e_max)?;
            if ser.top_band(s0) < tol / 10.0 {
                return Ok(ser);
            }
            e_max *= 1.5;
        }
        Err(Error::solver("OriginSeries", "double series at the seed point does not converge"))
    }

    fn powers(&self, s: &Real) -> Vec<Real> {
        let ls = s.ln();
        self.e.iter().map(|e| (e * &ls).exp()).collect()
    }

    fn top_band(&self, s: &Real) -> f64 {
        let p = self.powers(s);
        let mut band = 0.0f64;
        for m in 0..self.mons.len() {
            if self.e[m].to_f64() > self.e_max - 1.0 {
                let t1 = (&self.c[m] * &p[m]).abs().to_f64();
                let t2 = (&self.c[m] * &p[m] * &self.e[m]).abs().to_f64();
                let t3 = (&self.log_delta[m] * &p[m]).abs().to_f64();
                band += t1.max(t2).max(t3);
            }
        }
        band
    }

    /// Coefficient of s^j (pure powers, k = 0).
    pub fn pure_coeff(&self, j: usize) -> Option<&Real> {
        self.mons.iter().position(|&m| m == (j, 0)).map(|i| &self.c[i])
    }

    /// Coefficient c_{jk} of s^{j + k alpha}.
    pub fn coeff(&self, j: usize, k: usize) -> Option<&Real> {
        self.mons.iter().position(|&m| m == (j, k)).map(|i| &self.c[i])
    }

    /// (C, C', ln Delta) at s.
    pub fn eval(&self, s: &Real) -> (Real, Real, Real) {
        let p = self.powers(s);
        let zero = s.zero_like();
        let (mut c, mut cp, mut ld) = (zero.clone(), zero.clone(), zero);
        for m in 0..self.mons.len() {
            let t = &self.c[m] * &p[m];
            cp += &t * &self.e[m];
            c += t;
            ld += &self.log_delta[m] * &p[m];
        }
        (c, cp / s, ld)
    }
}

// ---------------------------------------------------------------------------
// local Taylor expansion

/// Taylor coefficients c_0..c_order of C(s + h) given C(s) and C'(s), from
/// s^2 (C C'' - C'^2) + s C C' - s C^3 - alpha C + 1 = 0 with s -> s + h.
pub fn local_expansion(alpha: &Real, s: &Real, c0: &Real, c1: &Real, order: usize) -> Vec<Real> {
    let order = order.max(2);
    let zero = c0.zero_like();
    let mut c = vec![zero.clone(); order + 1];
    c[0] = c0.clone();
    c[1] = c1.clone();
    let mut sq = vec![zero.clone(); order + 1];
    let s2 = s.sqr();
    let d1 = |c: &[Real], i: usize| -> Real {
        if i + 1 < c.len() {
            &c[i + 1] * (i as i64 + 1)
        } else {
            zero.clone()
        }
    };
    let d2 = |c: &[Real], i: usize| -> Real {
        if i + 2 < c.len() {
            &c[i + 2] * ((i as i64 + 2) * (i as i64 + 1))
        } else {
            zero.clone()
        }
    };
    let p_at = |c: &[Real], m: usize| -> Real {
        let mut acc = zero.clone();
        for i in 0..=m {
            acc += &c[i] * d2(c, m - i) - d1(c, i) * d1(c, m - i);
        }
        acc
    };
    let q_at = |c: &[Real], m: usize| -> Real {
        let mut acc = zero.clone();
        for i in 0..=m {
            acc += &c[i] * d1(c, m - i);
        }
        acc
    };
    let mut r = vec![zero.clone(); order + 1];
    for m in 0..=order - 2 {
        // C^2 and C^3 through index m
        let mut acc = zero.clone();
        for i in 0..=m {
            acc += &c[i] * &c[m - i];
        }
        sq[m] = acc;
        let mut acc = zero.clone();
        for i in 0..=m {
            acc += &c[i] * &sq[m - i];
        }
        r[m] = acc;

        let mut e = &s2 * p_at(&c, m) + s * q_at(&c, m) - s * &r[m] - alpha * &c[m];
        if m >= 1 {
            e += s * p_at(&c, m - 1) * 2i64 + q_at(&c, m - 1) - &r[m - 1];
        }
        if m >= 2 {
            e += p_at(&c, m - 2);
        }
        if m == 0 {
            e += 1i64;
        }
        let denom = &s2 * &c[0] * ((m as i64 + 2) * (m as i64 + 1));
        c[m + 2] = -(e / denom);
    }
    c
}

fn recip_series(a: &[Real]) -> Vec<Real> {
    let n = a.len();
    let mut r: Vec<Real> = Vec::with_capacity(n);
    r.push(a[0].recip());
    for k in 1..n {
        let mut acc = a[0].zero_like();
        for i in 1..=k {
            acc += &a[i] * &r[k - i];
        }
        r.push(-(acc / &a[0]));
    }
    r
}

fn mul_series(a: &[Real], b: &[Real], n: usize) -> Vec<Real> {
    (0..n)
        .map(|k| {
            let mut acc = a[0].zero_like();
            for i in 0..=k {
                if i < a.len() && k - i < b.len() {
                    acc += &a[i] * &b[k - i];
                }
            }
            acc
        })
        .collect()
}

/// Taylor coefficients of H(s + h) / (s + h), one fewer than `c`.
fn h_over_s_series(alpha: &Real, s: &Real, c: &[Real]) -> Vec<Real> {
    let n = c.len() - 1;
    let inv = recip_series(&c[..n]);
    let dc: Vec<Real> = (0..n).map(|i| &c[i + 1] * (i as i64 + 1)).collect();
    let d = mul_series(&dc, &inv, n);
    let d2 = mul_series(&d, &d, n);
    let s_ser = vec![s.clone(), s.one_like()];
    let t1 = mul_series(&d2, &s_ser, n);
    let mut r = inv;
    r[0] -= alpha;
    let r2 = mul_series(&r, &r, n);
    let inv_s: Vec<Real> = {
        let mut v = Vec::with_capacity(n);
        let mut p = s.recip();
        let ms = -s.recip();
        for _ in 0..n {
            v.push(p.clone());
            p *= &ms;
        }
        v
    };
    let t3 = mul_series(&r2, &inv_s, n);
    (0..n)
        .map(|i| &t1[i] / 4i64 - &c[i] / 2i64 - &t3[i] / 4i64)
        .collect()
}

/// H from (s, C, C').
pub fn hcal_from_state(alpha: &Real, s: &Real, c: &Real, cp: &Real) -> Real {
    (s * cp / c).sqr() / 4i64 - s * c / 2i64 - (c.recip() - alpha).sqr() / 4i64
}

fn horner(coeffs: &[Real], h: &Real) -> Real {
    let mut acc = h.zero_like();
    for c in coeffs.iter().rev() {
        acc = acc * h + c;
    }
    acc
}

// ---------------------------------------------------------------------------
// the solution

/// One Taylor step: C(s_k + h) = sum c_i h^i and
/// ln Delta(s_k + h) = ln Delta(s_k) + sum g_i h^{i+1} / (i+1).
#[derive(Clone, Debug)]
struct Segment {
    s: Real,
    h: Real,
    c: Vec<Real>,
    g: Vec<Real>,
    log_delta: Real,
}

impl Segment {
    fn log_delta_at(&self, x: &Real) -> Real {
        let mut acc = x.zero_like();
        for (i, gi) in self.g.iter().enumerate().rev() {
            acc = acc * x + gi / (i as i64 + 1);
        }
        &self.log_delta + acc * x
    }

    fn c_at(&self, x: &Real) -> (Real, Real) {
        let dc: Vec<Real> = (1..self.c.len()).map(|i| &self.c[i] * i as i64).collect();
        (horner(&self.c, x), horner(&dc, x))
    }
}

/// Dense trajectory of the C-potential system.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub alpha: Real,
    pub grid: Vec<Real>,
    pub c: Vec<Real>,
    pub cp: Vec<Real>,
    pub log_delta: Vec<Real>,
    pub hcal: Vec<Real>,
    /// Number of monomials in the double series used at the seed point.
    pub seed_order: usize,
    pub s0: Real,
    pub tol: f64,
    /// Local tolerance actually imposed per step.
    pub local_tol: f64,
    pub taylor_order: usize,
    pub bits: u32,
    seed: OriginSeries,
    segments: Vec<Segment>,
}

/// Default seed point min(10^-2, alpha^3 / 10).
pub fn default_s0(alpha: f64) -> f64 {
    (1e-2f64).min(alpha.powi(3) / 10.0)
}

/// Integrates the regular solution from the seed point to `s_max`.
///
/// `tol` bounds the accumulated error at `s_max`: the local tolerance is
/// tightened by the growth of the unstable mode over [0, s_max].
pub fn solve_c(alpha: &Real, s_max: &Real, tol: f64, ctx: &PrecisionCtx) -> Result<OdeSolution> {
    if !alpha.is_positive() {
        return Err(Error::domain("solve_c", "alpha must be positive"));
    }
    if alpha.as_float().is_integer() {
        return Err(Error::domain(
            "solve_c",
            "integer alpha: the origin series has a vanishing denominator; seed with a perturbed alpha such as alpha + 1e-6",
        ));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain("solve_c", "tol must lie in (0, 1)"));
    }
    let s0f = default_s0(alpha.to_f64());
    if !(s_max.to_f64() > s0f) {
        return Err(Error::domain("solve_c", format!("s_max must exceed the seed point {s0f:e}")));
    }
    let local_tol = tol * (-instability_factor(s_max.to_f64())).exp() / 10.0;
    let need_bits = (-local_tol.log2()).ceil() as u32 + 64;
    let wp = ctx.bits().max(need_bits) + 32;
    let wctx = PrecisionCtx::new(wp, ctx.target_tol().max(2f64.powi(-(wp as i32) + 8)))?;
    let alpha_w = alpha.with_prec(wp);
    let s_end = s_max.with_prec(wp);
    let s0 = wctx.real(s0f);

    let k = k_coefficient(&alpha_w, &wctx)?;
    let seed = OriginSeries::for_seed(&alpha_w, &k, &s0, local_tol)?;
    let (c0, cp0, ld0) = seed.eval(&s0);

    let order = ((-0.5 * local_tol.ln()).ceil() as usize + 4).clamp(MIN_ORDER, MAX_ORDER);
    let mut grid = vec![s0.clone()];
    let mut cs = vec![c0.clone()];
    let mut cps = vec![cp0.clone()];
    let mut lds = vec![ld0.clone()];
    let mut segments = Vec::new();
    let (mut s, mut c, mut cp, mut ld) = (s0.clone(), c0, cp0, ld0);
    let min_step = 2f64.powi(-(wp as i32) / 2);
    while s < s_end {
        let coeffs = local_expansion(&alpha_w, &s, &c, &cp, order);
        let g = h_over_s_series(&alpha_w, &s, &coeffs);
        let mut h = s.to_f64();
        let scale_c = coeffs[0].abs().to_f64();
        for i in [order - 1, order] {
            let ci = coeffs[i].abs().to_f64();
            if ci > 0.0 {
                h = h.min((local_tol * scale_c / ci).powf(1.0 / i as f64));
            }
        }
        let scale_g = g[0].abs().to_f64().max(local_tol);
        for i in [order - 2, order - 1] {
            let gi = g[i].abs().to_f64();
            if gi > 0.0 {
                h = h.min((local_tol * scale_g / gi).powf(1.0 / i as f64));
            }
        }
        h *= 0.9;
        if !(h > min_step * s.to_f64()) {
            return Err(Error::Singularity {
                s: s.to_f64(),
                msg: "step size underflow".into(),
            });
        }
        let mut hr = wctx.real(h);
        let remaining = &s_end - &s;
        let last = hr >= remaining;
        if last {
            hr = remaining;
        }
        let seg = Segment { s: s.clone(), h: hr.clone(), c: coeffs, g, log_delta: ld.clone() };
        let (c_new, cp_new) = seg.c_at(&hr);
        let ld_new = seg.log_delta_at(&hr);
        if !c_new.is_positive() {
            return Err(Error::Singularity {
                s: s.to_f64(),
                msg: format!("C lost positivity (C = {:e})", c_new.to_f64()),
            });
        }
        s = if last { s_end.clone() } else { &s + &hr };
        c = c_new;
        cp = cp_new;
        ld = ld_new;
        segments.push(seg);
        grid.push(s.clone());
        cs.push(c.clone());
        cps.push(cp.clone());
        lds.push(ld.clone());
    }
    let bits = ctx.bits();
    let hcal: Vec<Real> = grid
        .iter()
        .zip(cs.iter().zip(&cps))
        .map(|(s, (c, cp))| hcal_from_state(&alpha_w, s, c, cp).with_prec(bits))
        .collect();
    let round = |v: Vec<Real>| -> Vec<Real> { v.into_iter().map(|x| x.with_prec(bits)).collect() };
    Ok(OdeSolution {
        alpha: alpha.clone(),
        grid: round(grid),
        c: round(cs),
        cp: round(cps),
        log_delta: round(lds),
        hcal,
        seed_order: seed.mons.len(),
        s0: s0.with_prec(bits),
        tol,
        local_tol,
        taylor_order: order,
        bits,
        seed,
        segments,
    })
}

impl OdeSolution {
    pub fn s_max(&self) -> &Real {
        self.grid.last().expect("non-empty grid")
    }

    fn locate(&self, s: &Real) -> Result<Option<&Segment>> {
        if !s.is_positive() || *s > *self.s_max() {
            return Err(Error::Range { s: s.to_f64(), lo: 0.0, hi: self.s_max().to_f64() });
        }
        if *s <= self.s0 {
            return Ok(None);
        }
        let i = self.segments.partition_point(|seg| seg.s < *s);
        Ok(Some(&self.segments[i.saturating_sub(1)]))
    }

    /// (C, C', ln Delta) at any s in (0, s_max].
    pub fn state_at(&self, s: &Real) -> Result<(Real, Real, Real)> {
        let wp = self.seed.alpha.prec();
        let sw = s.with_prec(wp);
        let out = match self.locate(s)? {
            None => self.seed.eval(&sw),
            Some(seg) => {
                let x = &sw - &seg.s;
                let (c, cp) = seg.c_at(&x);
                (c, cp, seg.log_delta_at(&x))
            }
        };
        Ok((out.0.with_prec(self.bits), out.1.with_prec(self.bits), out.2.with_prec(self.bits)))
    }

    pub fn c_at(&self, s: &Real) -> Result<Real> {
        Ok(self.state_at(s)?.0)
    }

    pub fn delta(&self, s: &Real) -> Result<Real> {
        Ok(self.state_at(s)?.2)
    }

    pub fn hcal(&self, s: &Real) -> Result<Real> {
        let (c, cp, _) = self.state_at(s)?;
        Ok(hcal_from_state(&self.alpha.with_prec(self.bits), &s.with_prec(self.bits), &c, &cp))
    }

    pub fn header_json(&self) -> serde_json::Value {
        json!({
            "alpha": self.alpha.to_decimal(),
            "tol": format!("{:e}", self.tol),
            "s0": self.s0.to_decimal(),
            "seed_order": self.seed_order,
            "bits": self.bits,
        })
    }

    /// Columns s, C, C', lnDelta, Hcal.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,C,Cp,lnDelta,Hcal\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.grid[i].to_decimal(),
                self.c[i].to_decimal(),
                self.cp[i].to_decimal(),
                self.log_delta[i].to_decimal(),
                self.hcal[i].to_decimal()
            ));
        }
        out
    }
}

/// ln Delta(s, alpha) from a fresh solution at tolerance ctx.target_tol
/// (floored at 10^-40).
pub fn delta(s: &Real, alpha: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    let sol = solve_c(alpha, &fresh_end(s, alpha), ctx.target_tol().max(1e-40), ctx)?;
    sol.delta(s)
}

/// H(s) from a fresh solution, as for [`delta`].
pub fn hcal(s: &Real, alpha: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    let sol = solve_c(alpha, &fresh_end(s, alpha), ctx.target_tol().max(1e-40), ctx)?;
    sol.hcal(s)
}

fn fresh_end(s: &Real, alpha: &Real) -> Real {
    let s0 = default_s0(alpha.to_f64());
    if s.to_f64() > s0 {
        s.clone()
    } else {
        s.lit(2.0 * s0)
    }
}

// ---------------------------------------------------------------------------
// residuals

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub max_sigma_residual: Real,
    pub max_identity_residual: Real,
    pub max_lesser_p3_residual: Real,
    pub max_okamoto_residual: Real,
    pub grid_range: (Real, Real),
}

fn rel(terms: &[Real]) -> Real {
    let mut sum = terms[0].zero_like();
    let mut scale = terms[0].zero_like();
    for t in terms {
        sum += t;
        scale = scale.max(t.abs());
    }
    if scale.is_zero() {
        scale
    } else {
        sum.abs() / scale
    }
}

/// (H, H', H'') at s through the equation, from C and C'.
pub fn hcal_derivatives(alpha: &Real, s: &Real, c: &Real, cp: &Real) -> (Real, Real, Real) {
    let coeffs = local_expansion(alpha, s, c, cp, 6);
    let g = h_over_s_series(alpha, s, &coeffs);
    let h0 = s * &g[0];
    let h1 = &g[0] + s * &g[1];
    let h2 = &g[1] + s * &g[2];
    (h0, h1, h2 * 2i64)
}

/// Relative residual of (s H'')^2 + 4 H'^2 (s H' - H) - (alpha H' + 1/2)^2.
pub fn sigma_residual(alpha: &Real, s: &Real, h: &Real, hp: &Real, hpp: &Real) -> Real {
    let t1 = (s * hpp).sqr();
    let t2 = hp.sqr() * (s * hp - h) * 4i64;
    let t3 = -(alpha * hp + 0.5).sqr();
    rel(&[t1, t2, t3])
}

/// Relative residual of the Okamoto form
/// (x K'')^2 + 4 K'^2 (x K' - K) - 2 alpha K' - 1 with K(x) = H(2x) + alpha^2/4,
/// evaluated at x = s/2 from H and its derivatives at s.
pub fn okamoto_residual(alpha: &Real, s: &Real, h: &Real, hp: &Real, hpp: &Real) -> Real {
    let x = s / 2i64;
    let k = h + alpha.sqr() / 4i64;
    let kp = hp * 2i64;
    let kpp = hpp * 4i64;
    let t1 = (&x * &kpp).sqr();
    let t2 = kp.sqr() * (&x * &kp - &k) * 4i64;
    let t3 = -(alpha * &kp * 2i64);
    let t4 = -x.one_like();
    rel(&[t1, t2, t3, t4])
}

/// Relative residual of Y'' = Y'^2/Y - Y'/x + Y^2/x - 1/Y + 2 alpha/x for
/// Y(x) = (x/2) C(x^2/8), from C, C', C'' at s = x^2/8.
pub fn lesser_p3_residual(alpha: &Real, s: &Real, c: &Real, cp: &Real, cpp: &Real) -> Real {
    let x = (s * 8i64).sqrt();
    let y = &x * c / 2i64;
    let yp = c / 2i64 + x.sqr() * cp / 8i64;
    let ypp = &x * cp * 3i64 / 8i64 + x.sqr() * &x * cpp / 32i64;
    rel(&[
        ypp,
        -(yp.sqr() / &y),
        &yp / &x,
        -(y.sqr() / &x),
        y.recip(),
        -(alpha * 2i64 / &x),
    ])
}

/// C'' from the equation.
pub fn c_second_derivative(alpha: &Real, s: &Real, c: &Real, cp: &Real) -> Real {
    cp.sqr() / c - cp / s + c.sqr() / s + alpha / s.sqr() - (s.sqr() * c).recip()
}

/// Residual C'' - rhs of the C-equation (absolute).
pub fn c_equation_residual(alpha: &Real, s: &Real, c: &Real, cp: &Real, cpp: &Real) -> Real {
    cpp - c_second_derivative(alpha, s, c, cp)
}

/// Checks the four residuals at every node in [lo, hi] (the identity
/// residual at segment midpoints, where the dense output is least exact).
pub fn verify_residuals_on(sol: &OdeSolution, lo: &Real, hi: &Real) -> ResidualReport {
    let alpha = sol.seed.alpha.clone();
    let zero = alpha.zero_like();
    let mut report = ResidualReport {
        max_sigma_residual: zero.clone(),
        max_identity_residual: zero.clone(),
        max_lesser_p3_residual: zero.clone(),
        max_okamoto_residual: zero.clone(),
        grid_range: (lo.clone(), hi.clone()),
    };
    let mut nodes: Vec<(Real, Real, Real)> = Vec::new();
    let mut node = |s: &Real, c: Real, cp: Real| nodes.push((s.clone(), c, cp));
    for seg in &sol.segments {
        if seg.s >= *lo && seg.s <= *hi {
            node(&seg.s, seg.c[0].clone(), seg.c[1].clone());
        }
    }
    if let Some(last) = sol.segments.last() {
        let end = &last.s + &last.h;
        if end >= *lo && end <= *hi {
            let (c, cp) = last.c_at(&last.h);
            node(&end, c, cp);
        }
    }
    for (s, c, cp) in &nodes {
        let (h, hp, hpp) = hcal_derivatives(&alpha, s, c, cp);
        let sig = sigma_residual(&alpha, s, &h, &hp, &hpp);
        let oka = okamoto_residual(&alpha, s, &h, &hp, &hpp);
        let cpp = c_second_derivative(&alpha, s, c, cp);
        let lp3 = lesser_p3_residual(&alpha, s, c, cp, &cpp);
        report.max_sigma_residual = report.max_sigma_residual.clone().max(sig);
        report.max_okamoto_residual = report.max_okamoto_residual.clone().max(oka);
        report.max_lesser_p3_residual = report.max_lesser_p3_residual.clone().max(lp3);
    }
    for seg in &sol.segments {
        let mid = &seg.s + &seg.h / 2i64;
        if mid < *lo || mid > *hi {
            continue;
        }
        let x = &seg.h / 2i64;
        let (c, cp) = seg.c_at(&x);
        let h_state = hcal_from_state(&alpha, &mid, &c, &cp);
        // s d(ln Delta)/ds from the integrated polynomial
        let h_int = horner(&seg.g, &x) * &mid;
        let r = (&h_state - &h_int).abs() / h_state.abs();
        report.max_identity_residual = report.max_identity_residual.clone().max(r);
    }
    let bits = sol.bits;
    report.max_sigma_residual = report.max_sigma_residual.with_prec(bits);
    report.max_identity_residual = report.max_identity_residual.with_prec(bits);
    report.max_lesser_p3_residual = report.max_lesser_p3_residual.with_prec(bits);
    report.max_okamoto_residual = report.max_okamoto_residual.with_prec(bits);
    report
}

/// Residuals over the whole integrated range.
pub fn verify_residuals(sol: &OdeSolution) -> ResidualReport {
    let lo = sol.s0.clone();
    let hi = sol.s_max().clone();
    verify_residuals_on(sol, &lo, &hi)
}

// ---------------------------------------------------------------------------
// algebraic solutions

/// The closed-form solutions C = s^{-1/3} (alpha = 0) and
/// C = s^{-1/3} - s^{-2/3}/3 (alpha = 1): returns (C, C', C'').
pub fn algebraic_solution(alpha: u32, s: &Real) -> Result<(Real, Real, Real)> {
    let third = s.one_like() / 3i64;
    let u = s.powr(&(-&third));
    match alpha {
        0 => {
            let c = u.clone();
            let cp = -(u.clone() / s) / 3i64;
            let cpp = u / s.sqr() * 4i64 / 9i64;
            Ok((c, cp, cpp))
        }
        1 => {
            let u2 = u.sqr();
            let c = &u - &u2 / 3i64;
            let cp = (-(&u) / 3i64 + &u2 * 2i64 / 9i64) / s;
            let cpp = (&u * 4i64 / 9i64 - &u2 * 10i64 / 27i64) / s.sqr();
            Ok((c, cp, cpp))
        }
        _ => Err(Error::domain("algebraic_solution", "closed forms exist only for alpha = 0 and 1")),
    }
}

// ---------------------------------------------------------------------------
// constants

/// A constant fitted from the trajectory at several s.
#[derive(Clone, Debug)]
pub struct ConstantFit {
    pub mean: Real,
    /// max - min of the per-point estimates.
    pub spread: Real,
    pub estimates: Vec<Real>,
    /// Size of the first omitted expansion term at the smallest s.
    pub tail: Real,
}

fn alpha_value(alpha: &Real) -> AlphaValue {
    // f64-representable alpha is exactly rational; keep exactness when the
    // value carries no more bits than an f64.
    let f = alpha.to_f64();
    if alpha.as_float() == &Float::with_val(53, f) {
        AlphaValue::Exact(rug::Rational::from_f64(f).expect("finite"))
    } else {
        AlphaValue::Approx(alpha.clone())
    }
}

/// Number of large-s terms: through s^{-5/3} for ln Delta.
const FIT_TERMS: usize = 9;

fn fit_from(
    estimates: Vec<Real>,
    tail: Real,
) -> Result<ConstantFit> {
    let n = estimates.len() as i64;
    let mut sum = estimates[0].zero_like();
    let mut lo = estimates[0].clone();
    let mut hi = estimates[0].clone();
    for e in &estimates {
        sum += e;
        lo = lo.min(e.clone());
        hi = hi.max(e.clone());
    }
    let spread = hi - lo;
    if spread > &tail * 10i64 {
        return Err(Error::FitQuality { spread: spread.to_f64(), bound: (tail * 10i64).to_f64() });
    }
    Ok(ConstantFit { mean: sum / n, spread, estimates, tail })
}

fn check_grid(op: &'static str, s_grid: &[Real]) -> Result<Real> {
    if s_grid.is_empty() {
        return Err(Error::domain(op, "empty s grid"));
    }
    let mut hi = s_grid[0].clone();
    for s in s_grid {
        if *s < 50.0 {
            return Err(Error::domain(op, "grid points must be >= 50"));
        }
        hi = hi.max(s.clone());
    }
    Ok(hi)
}

fn nonconstant_part(ser: &series::PuiseuxSeries, s: &Real, ctx: &PrecisionCtx) -> Result<(Real, Real)> {
    let loose = ctx.with_tol(1.0 - f64::EPSILON);
    let v = series::eval_series(&ser.resolve_const(s.zero_like()), s, &loose)?;
    Ok((v.value, v.truncation))
}

/// c_1(alpha) = ln Delta(s) minus every non-constant term of the large-s
/// expansion, averaged over `s_grid` (all points >= 50).
pub fn fit_constant_c1(alpha: &Real, s_grid: &[Real], ctx: &PrecisionCtx) -> Result<ConstantFit> {
    let hi = check_grid("fit_constant_c1", s_grid)?;
    let sol = solve_c(alpha, &hi, 1e-30, ctx)?;
    fit_c1_from(&sol, s_grid, ctx)
}

/// As [`fit_constant_c1`] on an existing solution.
pub fn fit_c1_from(sol: &OdeSolution, s_grid: &[Real], ctx: &PrecisionCtx) -> Result<ConstantFit> {
    check_grid("fit_constant_c1", s_grid)?;
    let ser = series::delta_log_large_series(&alpha_value(&sol.alpha), FIT_TERMS)?;
    let mut estimates = Vec::with_capacity(s_grid.len());
    let mut tail = ctx.zero();
    for s in s_grid {
        let (part, tr) = nonconstant_part(&ser, s, ctx)?;
        tail = tail.max(tr);
        estimates.push(sol.delta(s)? - part);
    }
    fit_from(estimates, tail)
}

/// c_2(alpha) from ln[Delta(s, alpha+1) / Delta(s, alpha)] minus the
/// non-constant terms of the ratio expansion.
pub fn fit_constant_c2(alpha: &Real, s_grid: &[Real], ctx: &PrecisionCtx) -> Result<ConstantFit> {
    let hi = check_grid("fit_constant_c2", s_grid)?;
    let a1 = alpha + 1i64;
    let (lo_sol, hi_sol) = rayon::join(|| solve_c(alpha, &hi, 1e-30, ctx), || solve_c(&a1, &hi, 1e-30, ctx));
    let (lo_sol, hi_sol) = (lo_sol?, hi_sol?);
    let ser = series::ratio_expansion(&alpha_value(alpha), FIT_TERMS)?;
    let mut estimates = Vec::with_capacity(s_grid.len());
    let mut tail = ctx.zero();
    for s in s_grid {
        let (part, tr) = nonconstant_part(&ser, s, ctx)?;
        tail = tail.max(tr);
        estimates.push(hi_sol.delta(s)? - lo_sol.delta(s)? - part);
    }
    fit_from(estimates, tail)
}
