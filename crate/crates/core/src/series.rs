//! Truncated small-s and large-s expansions of the C-potential, of H, of
//! ln Delta, of the cubic root C~ and of the ratio Delta(s, alpha+1) /
//! Delta(s, alpha).
//!
//! Coefficients come from substituting a truncated ansatz into the governing
//! equation and solving order by order. Rational alpha gives exact rational
//! coefficients; any other alpha falls back to `Real`.
//!
//! Large-s expansions are computed in u = s^{-1/3}, where theta_s = s d/ds
//! becomes -(1/3) u d/du.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::precision::{PrecisionCtx, Real};

/// Default number of generated terms.
pub const DEFAULT_TERMS: usize = 20;

/// Number of orders past the truncation scanned for a nonzero omitted term.
const OMITTED_LOOKAHEAD: usize = 3;

/// Field operations shared by exact and extended-precision coefficients.
pub trait Coeff: Clone + fmt::Debug + Send + Sync {
    fn int(&self, n: i64) -> Self;
    fn frac(&self, n: i64, d: i64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;

    fn scale(&self, n: i64) -> Self {
        self.times(&self.int(n))
    }
}

impl Coeff for Rational {
    fn int(&self, n: i64) -> Self {
        Rational::from(n)
    }
    fn frac(&self, n: i64, d: i64) -> Self {
        Rational::from((n, d))
    }
    fn plus(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn minus(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn times(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn over(&self, o: &Self) -> Self {
        Rational::from(self / o)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
}

impl Coeff for Real {
    fn int(&self, n: i64) -> Self {
        self.int_like(n)
    }
    fn frac(&self, n: i64, d: i64) -> Self {
        self.int_like(n) / d
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }
}

// ---------------------------------------------------------------------------
// truncated power-series helpers (coefficient k multiplies x^k)

fn conv<T: Coeff>(a: &[T], b: &[T], len: usize, zero: &T) -> Vec<T> {
    (0..len)
        .map(|k| {
            let mut acc = zero.clone();
            for i in 0..=k {
                if i < a.len() && k - i < b.len() {
                    acc = acc.plus(&a[i].times(&b[k - i]));
                }
            }
            acc
        })
        .collect()
}

fn recip<T: Coeff>(a: &[T], len: usize) -> Vec<T> {
    let mut r: Vec<T> = Vec::with_capacity(len);
    let one = a[0].int(1);
    r.push(one.over(&a[0]));
    for k in 1..len {
        let mut acc = a[0].int(0);
        for i in 1..=k.min(a.len() - 1) {
            acc = acc.plus(&a[i].times(&r[k - i]));
        }
        r.push(acc.over(&a[0]).times(&a[0].int(-1)));
    }
    r
}

fn theta<T: Coeff>(a: &[T]) -> Vec<T> {
    a.iter().enumerate().map(|(k, c)| c.scale(k as i64)).collect()
}

/// Coefficient k of C theta^2 C - (theta C)^2 = 1/2 sum_{i+j=k} (i-j)^2 c_i c_j,
/// skipping the pairs that involve index `skip` (the unknown being solved).
fn bracket<T: Coeff>(c: &[T], k: usize, skip: usize, zero: &T) -> T {
    let mut acc = zero.clone();
    for i in 0..=k {
        let j = k - i;
        if i == skip || j == skip || i >= c.len() || j >= c.len() {
            continue;
        }
        let d = i as i64 - j as i64;
        acc = acc.plus(&c[i].times(&c[j]).scale(d * d));
    }
    acc.times(&zero.frac(1, 2))
}

/// Coefficient k of c^3.
fn cube_coeff<T: Coeff>(c: &[T], k: usize, zero: &T) -> T {
    let sq = conv(c, c, k + 1, zero);
    let mut acc = zero.clone();
    for i in 0..=k {
        if i < c.len() {
            acc = acc.plus(&c[i].times(&sq[k - i]));
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// order-by-order solvers

/// a_0..a_{len-1} of the regular small-s solution of
/// C theta^2 C - (theta C)^2 - s C^3 - alpha C + 1 = 0, or of the algebraic
/// part s C^3 + alpha C - 1 = 0 when `with_derivatives` is false.
pub fn solve_small<T: Coeff>(alpha: &T, len: usize, with_derivatives: bool) -> Result<Vec<T>> {
    let zero = alpha.int(0);
    if alpha.is_zero() {
        return Err(Error::domain("small-s series", "alpha must be nonzero"));
    }
    let mut a = vec![alpha.int(1).over(alpha)];
    for k in 1..len {
        let pivot = if with_derivatives {
            alpha.int((k * k) as i64).over(alpha).minus(alpha)
        } else {
            zero.minus(alpha)
        };
        if pivot.is_zero() {
            return Err(Error::domain(
                "small-s series",
                format!("alpha^2 - {} vanishes: the order-{k} coefficient has a zero denominator", k * k),
            ));
        }
        let mut rest = cube_coeff(&a, k - 1, &zero).times(&alpha.int(-1));
        if with_derivatives {
            rest = rest.plus(&bracket(&a, k, k, &zero));
        }
        a.push(rest.over(&pivot).times(&alpha.int(-1)));
    }
    Ok(a)
}

/// b_0..b_len (b_0 = 0) of C = sum b_k u^k, u = s^{-1/3}, b_1 = 1 the real
/// root of 1 - b_1^3 = 0.
pub fn solve_large<T: Coeff>(alpha: &T, len: usize, with_derivatives: bool) -> Vec<T> {
    let zero = alpha.int(0);
    let mut b = vec![zero.clone(), alpha.int(1)];
    for n in 2..=len {
        b.push(zero.clone());
        // Coefficient of u^{n+2} with b_n = 0; b_n enters only as -3 b_n.
        let mut rhs = cube_coeff(&b, n + 2, &zero).times(&alpha.int(-1));
        rhs = rhs.minus(&alpha.times(&b[n - 1]));
        if with_derivatives {
            rhs = rhs.plus(&bracket(&b, n - 1, usize::MAX, &zero).times(&zero.frac(1, 9)));
        }
        b[n] = rhs.times(&zero.frac(1, 3));
    }
    b
}

/// H through s^{len}: index k holds the coefficient of s^k (index 0 is 0).
/// Needs a_0..a_{len-1}.
fn h_small_coeffs<T: Coeff>(alpha: &T, a: &[T]) -> Vec<T> {
    let m = a.len();
    let zero = alpha.int(0);
    let inv = recip(a, m);
    let l = conv(&theta(a), &inv, m, &zero);
    let l2 = conv(&l, &l, m + 1, &zero);
    let mut r = inv;
    r[0] = r[0].minus(alpha);
    let r2 = conv(&r, &r, m + 1, &zero);
    (0..=m)
        .map(|k| {
            let sc = if k >= 1 { a[k - 1].clone() } else { zero.clone() };
            l2[k]
                .minus(&r2[k])
                .times(&zero.frac(1, 4))
                .minus(&sc.times(&zero.frac(1, 2)))
        })
        .collect()
}

/// W with H = u^{-2} W, W known through u^{len-1} from b_1..b_len.
fn h_large_coeffs<T: Coeff>(alpha: &T, b: &[T]) -> Vec<T> {
    let zero = alpha.int(0);
    let m = b.len() - 1;
    let big_b: Vec<T> = b[1..].to_vec();
    let inv = recip(&big_b, m);
    let mut lam = conv(&theta(&big_b), &inv, m, &zero);
    lam[0] = lam[0].plus(&alpha.int(1));
    let lam2 = conv(&lam, &lam, m, &zero);
    let mut r = inv;
    if m > 1 {
        r[1] = r[1].minus(alpha);
    }
    let r2 = conv(&r, &r, m, &zero);
    (0..m)
        .map(|k| {
            let shifted = if k >= 2 { lam2[k - 2].clone() } else { zero.clone() };
            shifted
                .times(&zero.frac(1, 36))
                .minus(&big_b[k].times(&zero.frac(1, 2)))
                .minus(&r2[k].times(&zero.frac(1, 4)))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// public types

/// The value of alpha: exact when rational, extended precision otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaValue {
    Exact(Rational),
    Approx(Real),
}

impl AlphaValue {
    pub fn ratio(num: i64, den: i64) -> AlphaValue {
        AlphaValue::Exact(Rational::from((num, den)))
    }

    /// Parses "p/q", an integer, or a terminating decimal exactly.
    pub fn parse(text: &str) -> Result<AlphaValue> {
        let t = text.trim();
        if let Ok(q) = Rational::from_str(t) {
            return Ok(AlphaValue::Exact(q));
        }
        let bad = || Error::Usage(format!("cannot parse alpha value {text:?}"));
        let (mantissa, exp10) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits = format!("{int_part}{frac_part}");
        let num = Integer::from_str(&digits).map_err(|_| bad())?;
        let shift = exp10 - frac_part.len() as i32;
        let ten = Integer::from(10);
        let q = if shift >= 0 {
            Rational::from(num * ten.pow(shift as u32))
        } else {
            Rational::from((num, ten.pow((-shift) as u32)))
        };
        Ok(AlphaValue::Exact(q))
    }

    pub fn to_real(&self, bits: u32) -> Real {
        match self {
            AlphaValue::Exact(q) => Real::from_float(rug::Float::with_val(bits, q)),
            AlphaValue::Approx(r) => r.with_prec(bits),
        }
    }

    pub fn plus_one(&self) -> AlphaValue {
        match self {
            AlphaValue::Exact(q) => AlphaValue::Exact(Rational::from(q + 1u32)),
            AlphaValue::Approx(r) => AlphaValue::Approx(r + 1i64),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            AlphaValue::Exact(q) => *q.denom() == 1,
            AlphaValue::Approx(r) => r.as_float().is_integer(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            AlphaValue::Exact(q) => q.cmp0() == Ordering::Greater,
            AlphaValue::Approx(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            AlphaValue::Exact(q) => q.cmp0() == Ordering::Less,
            AlphaValue::Approx(r) => r.is_negative(),
        }
    }
}

impl fmt::Display for AlphaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaValue::Exact(q) => write!(f, "{q}"),
            AlphaValue::Approx(r) => write!(f, "{}", r.to_decimal()),
        }
    }
}

/// A series coefficient.
#[derive(Clone, Debug, PartialEq)]
pub enum Coef {
    Exact(Rational),
    Approx(Real),
}

impl Coef {
    pub fn to_real(&self, bits: u32) -> Real {
        match self {
            Coef::Exact(q) => Real::from_float(rug::Float::with_val(bits, q)),
            Coef::Approx(r) => r.with_prec(bits),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Coef::Exact(q) => Some(q),
            Coef::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coef::Exact(q) => q.cmp0() == Ordering::Equal,
            Coef::Approx(r) => r.is_zero(),
        }
    }

    fn sub(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(Rational::from(a - b)),
            _ => {
                let bits = self.bits().max(other.bits());
                Coef::Approx(self.to_real(bits) - other.to_real(bits))
            }
        }
    }

    fn bits(&self) -> u32 {
        match self {
            Coef::Exact(_) => 64,
            Coef::Approx(r) => r.prec(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Coef::Exact(q) => json!({"num": q.numer().to_string(), "den": q.denom().to_string()}),
            Coef::Approx(r) => json!({"num": r.to_decimal(), "den": "1"}),
        }
    }
}

trait IntoCoef {
    fn into_coef(self) -> Coef;
}

impl IntoCoef for Rational {
    fn into_coef(self) -> Coef {
        Coef::Exact(self)
    }
}

impl IntoCoef for Real {
    fn into_coef(self) -> Coef {
        Coef::Approx(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Zero,
    Infinity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    /// Exponent of s, a multiple of 1/3.
    pub exponent: Rational,
    pub coeff: Coef,
}

/// A constant that is not a series coefficient (c_1 or c_2) and must be
/// supplied before the series can be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstSlot {
    pub name: &'static str,
    pub value: Option<Real>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries {
    pub origin: Origin,
    pub alpha: AlphaValue,
    /// Ascending exponents at zero, descending at infinity.
    pub terms: Vec<Term>,
    /// Coefficient of ln s.
    pub log_coeff: Option<Coef>,
    pub const_slot: Option<ConstSlot>,
    /// First exponent not represented in `terms`.
    pub order: Rational,
    /// First nonzero omitted term, used for the truncation estimate.
    pub omitted: Option<Term>,
}

/// Value of a truncated series and the magnitude of its first omitted term.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: Real,
    pub truncation: Real,
}

fn thirds(k: i64) -> Rational {
    Rational::from((k, 3))
}

impl PuiseuxSeries {
    /// Coefficient of s^exponent, if present.
    pub fn coeff(&self, exponent: &Rational) -> Option<&Coef> {
        self.terms.iter().find(|t| &t.exponent == exponent).map(|t| &t.coeff)
    }

    pub fn coeff_at(&self, num: i64, den: i64) -> Option<&Coef> {
        self.coeff(&Rational::from((num, den)))
    }

    /// Returns a copy with the constant slot filled in.
    pub fn resolve_const(&self, value: Real) -> PuiseuxSeries {
        let mut out = self.clone();
        if let Some(slot) = out.const_slot.as_mut() {
            slot.value = Some(value);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                let c = t.coeff.json();
                json!({
                    "exponent_num": t.exponent.numer().to_string(),
                    "exponent_den": t.exponent.denom().to_string(),
                    "coeff_num": c["num"],
                    "coeff_den": c["den"],
                })
            })
            .collect();
        json!({
            "origin": match self.origin { Origin::Zero => "zero", Origin::Infinity => "infinity" },
            "alpha": self.alpha.to_string(),
            "terms": terms,
            "log_coeff": self.log_coeff.as_ref().map(Coef::json),
            "const_slot": self.const_slot.as_ref().map(|c| c.name),
            "order": self.order.to_string(),
        })
    }
}

fn power(s: &Real, e: &Rational) -> Real {
    if *e.denom() == 1 {
        s.powi(e.numer().to_i32().expect("small exponent"))
    } else {
        let bits = s.prec();
        s.powr(&Real::from_float(rug::Float::with_val(bits, e)))
    }
}

/// Numeric value of a truncated series at s > 0, with the magnitude of the
/// first omitted term as the truncation estimate. Expansions at infinity
/// need s >= 1 and are refused when no retained term falls below the
/// context tolerance, since they are only asymptotic.
pub fn eval_series(series: &PuiseuxSeries, s: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    if !s.is_positive() {
        return Err(Error::domain("eval_series", "s must be positive"));
    }
    if series.origin == Origin::Infinity && *s < 1.0 {
        return Err(Error::domain("eval_series", "expansion at infinity needs s >= 1"));
    }
    let bits = ctx.bits();
    let s = s.with_prec(bits);
    let mut value = Real::from_i64(0, bits);
    let mut smallest: Option<Real> = None;
    for t in &series.terms {
        let term = t.coeff.to_real(bits) * power(&s, &t.exponent);
        if !t.coeff.is_zero() {
            let mag = term.abs();
            smallest = Some(match smallest {
                Some(m) => m.min(mag),
                None => mag,
            });
        }
        value += term;
    }
    if let Some(lc) = &series.log_coeff {
        value += lc.to_real(bits) * s.ln();
    }
    if let Some(slot) = &series.const_slot {
        match &slot.value {
            Some(v) => value += v.with_prec(bits),
            None => {
                return Err(Error::Usage(format!(
                    "series constant {} is unresolved; supply it before evaluating",
                    slot.name
                )))
            }
        }
    }
    let truncation = match &series.omitted {
        Some(t) => (t.coeff.to_real(bits) * power(&s, &t.exponent)).abs(),
        None => Real::from_i64(0, bits),
    };
    if series.origin == Origin::Infinity {
        let min_term = match smallest {
            Some(m) => m.min(truncation.clone()),
            None => truncation.clone(),
        };
        if min_term > ctx.target_tol() {
            return Err(Error::domain(
                "eval_series",
                format!(
                    "asymptotic series: smallest term {:e} at s = {} exceeds tolerance {:e}",
                    min_term.to_f64(),
                    s.to_f64(),
                    ctx.target_tol()
                ),
            ));
        }
    }
    Ok(SeriesValue { value, truncation })
}

// ---------------------------------------------------------------------------
// constructors

fn check_small(alpha: &AlphaValue, m: usize) -> Result<()> {
    if !alpha.is_positive() {
        return Err(Error::domain("small-s series", "alpha must be positive"));
    }
    if m < 1 {
        return Err(Error::domain("small-s series", "need at least one term"));
    }
    Ok(())
}

fn check_large(alpha: &AlphaValue, m: usize) -> Result<()> {
    if alpha.is_negative() {
        return Err(Error::domain("large-s series", "alpha must be non-negative"));
    }
    if m < 1 {
        return Err(Error::domain("large-s series", "need at least one term"));
    }
    Ok(())
}

/// Splits generated (exponent, coeff) pairs into `m` retained terms and the
/// first nonzero omitted term among the extras.
fn assemble(
    origin: Origin,
    alpha: &AlphaValue,
    mut all: Vec<(Rational, Coef)>,
    m: usize,
) -> PuiseuxSeries {
    let extra = all.split_off(m.min(all.len()));
    let order = extra.first().map(|(e, _)| e.clone()).unwrap_or_else(|| {
        let last = all.last().map(|(e, _)| e.clone()).unwrap_or_default();
        match origin {
            Origin::Zero => last + 1u32,
            Origin::Infinity => last - thirds(1),
        }
    });
    let omitted = extra
        .into_iter()
        .find(|(_, c)| !c.is_zero())
        .map(|(exponent, coeff)| Term { exponent, coeff });
    PuiseuxSeries {
        origin,
        alpha: alpha.clone(),
        terms: all.into_iter().map(|(exponent, coeff)| Term { exponent, coeff }).collect(),
        log_coeff: None,
        const_slot: None,
        order,
        omitted,
    }
}

/// Dispatches a generic generator on the representation of alpha.
macro_rules! with_alpha {
    ($alpha:expr, $bits:expr, |$a:ident| $body:expr) => {
        match $alpha {
            AlphaValue::Exact(q) => {
                let $a: &Rational = q;
                $body
            }
            AlphaValue::Approx(r) => {
                let tmp = r.with_prec($bits);
                let $a: &Real = &tmp;
                $body
            }
        }
    };
}

fn small_terms<T: Coeff + IntoCoef>(v: Vec<T>, first_power: i64) -> Vec<(Rational, Coef)> {
    v.into_iter()
        .enumerate()
        .map(|(k, c)| (Rational::from(k as i64 + first_power), c.into_coef()))
        .collect()
}

/// Coefficients a_0..a_{m-1} of the regular solution C(s) = sum a_j s^j.
/// Integer alpha is accepted only while the denominators alpha^2 - k^2 of
/// the requested orders stay nonzero.
pub fn c_small_series(alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    check_small(alpha, m)?;
    let bits = approx_bits(alpha);
    let all = with_alpha!(alpha, bits, |a| {
        let mut v = solve_small(a, m, true)?;
        let extra = solve_small(a, m + OMITTED_LOOKAHEAD, true)
            .map(|w| w[m..].to_vec())
            .unwrap_or_default();
        v.extend(extra);
        small_terms(v, 0)
    });
    Ok(assemble(Origin::Zero, alpha, all, m))
}

fn approx_bits(alpha: &AlphaValue) -> u32 {
    match alpha {
        AlphaValue::Exact(_) => 64,
        AlphaValue::Approx(r) => r.prec(),
    }
}

fn large_terms<T: Coeff + IntoCoef>(b: Vec<T>) -> Vec<(Rational, Coef)> {
    b.into_iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| (thirds(-(k as i64)), c.into_coef()))
        .collect()
}

/// C(s) = sum_{k>=1} b_k s^{-k/3}, b_1 = 1, m terms.
pub fn c_large_series(alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    check_large(alpha, m)?;
    let bits = approx_bits(alpha);
    let all = with_alpha!(alpha, bits, |a| large_terms(solve_large(a, m + OMITTED_LOOKAHEAD, true)));
    Ok(assemble(Origin::Infinity, alpha, all, m))
}

/// H(s) = sum_{j=1}^{m} d_j s^j, composed from the C series.
pub fn h_small_series(alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    check_small(alpha, m)?;
    let bits = approx_bits(alpha);
    let all = with_alpha!(alpha, bits, |a| {
        let c = solve_small(a, m, true)?;
        let mut h = h_small_coeffs(a, &c);
        let extra = solve_small(a, m + OMITTED_LOOKAHEAD, true)
            .map(|c2| h_small_coeffs(a, &c2)[m + 1..].to_vec())
            .unwrap_or_default();
        h.remove(0);
        h.extend(extra);
        small_terms(h, 1)
    });
    Ok(assemble(Origin::Zero, alpha, all, m))
}

fn h_large_terms<T: Coeff + IntoCoef>(w: Vec<T>) -> Vec<(Rational, Coef)> {
    w.into_iter()
        .enumerate()
        .map(|(k, c)| (thirds(2 - k as i64), c.into_coef()))
        .collect()
}

/// H(s) = s^{2/3} sum_{j=0}^{m-1} eta_j s^{-j/3}.
pub fn h_large_series(alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    check_large(alpha, m)?;
    let bits = approx_bits(alpha);
    let all = with_alpha!(alpha, bits, |a| {
        let b = solve_large(a, m + OMITTED_LOOKAHEAD, true);
        h_large_terms(h_large_coeffs(a, &b))
    });
    Ok(assemble(Origin::Infinity, alpha, all, m))
}

/// ln Delta(s) = sum_{j=1}^{m} (d_j / j) s^j.
pub fn delta_log_small_series(alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    let mut h = h_small_series(alpha, m)?;
    let integrate = |t: &mut Term| {
        t.coeff = match &t.coeff {
            Coef::Exact(q) => Coef::Exact(Rational::from(q / &t.exponent)),
            Coef::Approx(r) => Coef::Approx(r / t.exponent.to_f64()),
        };
    };
    h.terms.iter_mut().for_each(integrate);
    if let Some(t) = h.omitted.as_mut() {
        integrate(t);
    }
    Ok(h)
}

/// ln Delta(s) = c_1 + log_coeff ln s + sum of the m - 1 non-constant terms
/// s^{2/3}, s^{1/3}, s^{-1/3}, ... obtained by integrating H/s termwise.
/// The constant c_1 is left in the constant slot.
pub fn delta_log_large_series(alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    let h = h_large_series(alpha, m)?;
    let integrate = |t: &Term| -> Term {
        let coeff = match &t.coeff {
            Coef::Exact(q) => Coef::Exact(Rational::from(q / &t.exponent)),
            Coef::Approx(r) => Coef::Approx(r / t.exponent.to_f64()),
        };
        Term { exponent: t.exponent.clone(), coeff }
    };
    let mut out = h.clone();
    out.terms = h
        .terms
        .iter()
        .filter(|t| t.exponent.cmp0() != Ordering::Equal)
        .map(integrate)
        .collect();
    out.log_coeff = h
        .terms
        .iter()
        .find(|t| t.exponent.cmp0() == Ordering::Equal)
        .map(|t| t.coeff.clone());
    out.omitted = h.omitted.as_ref().map(integrate);
    out.const_slot = Some(ConstSlot { name: "c1", value: None });
    Ok(out)
}

/// Expansions of the real root C~ of s C~^3 + alpha C~ - 1 = 0.
pub fn ctilde_series(alpha: &AlphaValue, m: usize, origin: Origin) -> Result<PuiseuxSeries> {
    let bits = approx_bits(alpha);
    match origin {
        Origin::Zero => {
            check_small(alpha, m)?;
            let all = with_alpha!(alpha, bits, |a| small_terms(solve_small(a, m + OMITTED_LOOKAHEAD, false)?, 0));
            Ok(assemble(Origin::Zero, alpha, all, m))
        }
        Origin::Infinity => {
            check_large(alpha, m)?;
            let all = with_alpha!(alpha, bits, |a| large_terms(solve_large(a, m + OMITTED_LOOKAHEAD, false)));
            Ok(assemble(Origin::Infinity, alpha, all, m))
        }
    }
}

/// ln[Delta(s, alpha+1) / Delta(s, alpha)] at large s, with the constant
/// c_2 = c_1(alpha+1) - c_1(alpha) left in the constant slot.
pub fn ratio_expansion(alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    if !alpha.is_positive() {
        return Err(Error::domain("ratio_expansion", "alpha must be positive"));
    }
    let lo = delta_log_large_series(alpha, m)?;
    let hi = delta_log_large_series(&alpha.plus_one(), m)?;
    let diff = |x: &Term, y: &Term| Term { exponent: x.exponent.clone(), coeff: x.coeff.sub(&y.coeff) };
    let mut out = lo.clone();
    out.terms = hi.terms.iter().zip(&lo.terms).map(|(x, y)| diff(x, y)).collect();
    out.log_coeff = match (&hi.log_coeff, &lo.log_coeff) {
        (Some(x), Some(y)) => Some(x.sub(y)),
        _ => None,
    };
    out.omitted = match (&hi.omitted, &lo.omitted) {
        (Some(x), Some(y)) if x.exponent == y.exponent => Some(diff(x, y)),
        _ => hi.omitted.clone().or(lo.omitted.clone()),
    };
    out.const_slot = Some(ConstSlot { name: "c2", value: None });
    Ok(out)
}

/// Residual coefficients of the C-equation for a small-s coefficient list,
/// orders 0..len-1 (all zero for a correct solution).
pub fn c_small_residual<T: Coeff>(alpha: &T, a: &[T]) -> Vec<T> {
    let zero = alpha.int(0);
    (0..a.len())
        .map(|k| {
            let mut r = bracket(a, k, usize::MAX, &zero).minus(&alpha.times(&a[k]));
            if k >= 1 {
                r = r.minus(&cube_coeff(a, k - 1, &zero));
            } else {
                r = r.plus(&alpha.int(1));
            }
            r
        })
        .collect()
}

/// Residual coefficients of the sigma form
/// (s H'')^2 + 4 H'^2 (s H' - H) - (alpha H' + 1/2)^2 for a small-s H given
/// as coefficients of s^0..s^m; orders 0..m are returned.
pub fn h_small_sigma_residual<T: Coeff>(alpha: &T, h: &[T]) -> Vec<T> {
    let zero = alpha.int(0);
    let len = h.len();
    // H' and s H''
    let hp: Vec<T> = (0..len).map(|k| if k + 1 < len { h[k + 1].scale(k as i64 + 1) } else { zero.clone() }).collect();
    let shpp: Vec<T> = (0..len)
        .map(|k| if k + 1 < len { h[k + 1].scale(((k + 1) * k) as i64) } else { zero.clone() })
        .collect();
    let shp: Vec<T> = (0..len).map(|k| h[k].scale(k as i64)).collect();
    let a = conv(&shpp, &shpp, len, &zero);
    let hp2 = conv(&hp, &hp, len, &zero);
    let diff: Vec<T> = (0..len).map(|k| shp[k].minus(&h[k])).collect();
    let b = conv(&hp2, &diff, len, &zero);
    let mut lin: Vec<T> = hp.iter().map(|c| alpha.times(c)).collect();
    lin[0] = lin[0].plus(&zero.frac(1, 2));
    let c = conv(&lin, &lin, len, &zero);
    (0..len).map(|k| a[k].plus(&b[k].scale(4)).minus(&c[k])).collect()
}

/// The b_j relation as displayed for the large-s expansion, evaluated at
/// index n (n >= 2) for a coefficient list b_0..b_N (b_0 unused).
pub fn large_recurrence_residual<T: Coeff>(alpha: &T, b: &[T], n: usize) -> T {
    let zero = alpha.int(0);
    let g = |k: i64| -> T {
        if k >= 1 && (k as usize) < b.len() {
            b[k as usize].clone()
        } else {
            zero.clone()
        }
    };
    let n_i = n as i64;
    let mut s1 = zero.clone();
    let mut s2 = zero.clone();
    for j in 1..=n_i {
        s1 = s1.plus(&g(j).times(&g(n_i - j)).scale(j * (2 * j + 3 - n_i)));
        s2 = s2.plus(&g(j).times(&g(n_i - j)).scale(j));
    }
    let mut s3 = zero.clone();
    for j in 1..=n_i + 3 {
        for k in 1..=(n_i + 3 - j) {
            s3 = s3.plus(&g(j).times(&g(k)).times(&g(n_i + 3 - j - k)));
        }
    }
    s1.times(&zero.frac(1, 9))
        .minus(&s2.times(&zero.frac(1, 3)))
        .minus(&s3)
        .minus(&alpha.times(&g(n_i)))
}

/// Large-s coefficient list b_0..b_m (b_0 = 0) for direct use.
pub fn c_large_coeffs(alpha: &Rational, m: usize) -> Vec<Rational> {
    solve_large(alpha, m, true)
}

/// Small-s H coefficients s^0..s^m for direct use.
pub fn h_small_coeffs_exact(alpha: &Rational, m: usize) -> Result<Vec<Rational>> {
    let c = solve_small(alpha, m, true)?;
    Ok(h_small_coeffs(alpha, &c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn exact(c: &Coef) -> Rational {
        c.as_rational().unwrap().clone()
    }

    #[test]
    fn small_c_leading_terms() {
        let s = c_small_series(&AlphaValue::ratio(3, 1), 3).unwrap();
        assert_eq!(exact(s.coeff_at(0, 1).unwrap()), q(1, 3));
        assert_eq!(exact(s.coeff_at(1, 1).unwrap()), q(-1, 72));
        assert_eq!(exact(s.coeff_at(2, 1).unwrap()), q(1, 360));
        let h = c_small_series(&AlphaValue::ratio(1, 2), 2).unwrap();
        assert_eq!(exact(&h.terms[0].coeff), q(2, 1));
        assert_eq!(exact(&h.terms[1].coeff), q(16, 3));
    }

    #[test]
    fn integer_alpha_refused_past_the_pole() {
        let e = c_small_series(&AlphaValue::ratio(3, 1), 6).unwrap_err();
        assert!(matches!(e, Error::Domain { .. }));
        assert!(e.to_string().contains("alpha^2 - 9"));
    }

    #[test]
    fn large_c_leading_terms_and_termination() {
        let a = AlphaValue::ratio(1, 2);
        let s = c_large_series(&a, 6).unwrap();
        assert_eq!(exact(s.coeff_at(-1, 3).unwrap()), q(1, 1));
        assert_eq!(exact(s.coeff_at(-2, 3).unwrap()), q(-1, 6));
        assert_eq!(exact(s.coeff_at(-1, 1).unwrap()), q(0, 1));
        let zero = c_large_series(&AlphaValue::ratio(0, 1), 12).unwrap();
        for t in &zero.terms[1..] {
            assert!(t.coeff.is_zero());
        }
        let one = c_large_series(&AlphaValue::ratio(1, 1), 12).unwrap();
        assert_eq!(exact(&one.terms[1].coeff), q(-1, 3));
        for t in &one.terms[2..] {
            assert!(t.coeff.is_zero());
        }
        assert!(one.omitted.is_none());
    }

    #[test]
    fn h_leading_terms() {
        let h = h_small_series(&AlphaValue::ratio(2, 1), 1).unwrap();
        assert_eq!(exact(h.coeff_at(1, 1).unwrap()), q(-1, 4));
        let hl = h_large_series(&AlphaValue::ratio(1, 1), 4).unwrap();
        assert_eq!(exact(hl.coeff_at(2, 3).unwrap()), q(-3, 4));
        assert_eq!(exact(hl.coeff_at(1, 3).unwrap()), q(1, 2));
        assert_eq!(exact(hl.coeff_at(0, 1).unwrap()), q(-5, 36));
    }

    #[test]
    fn delta_leading_terms() {
        let d = delta_log_small_series(&AlphaValue::ratio(3, 1), 2).unwrap();
        assert_eq!(exact(d.coeff_at(1, 1).unwrap()), q(-1, 6));
        assert_eq!(exact(d.coeff_at(2, 1).unwrap()), q(1, 576));
        let a = q(5, 7);
        let dl = delta_log_large_series(&AlphaValue::Exact(a.clone()), 6).unwrap();
        assert_eq!(exact(dl.coeff_at(2, 3).unwrap()), q(-9, 8));
        assert_eq!(exact(dl.coeff_at(1, 3).unwrap()), (&a * q(3, 2)));
        let lc = (1 - Rational::from(&a * &a) * 6) / 36;
        assert_eq!(exact(dl.log_coeff.as_ref().unwrap()), lc);
        assert!(dl.coeff_at(0, 1).is_none());
        assert_eq!(dl.const_slot.as_ref().unwrap().name, "c1");
    }

    #[test]
    fn delta_derivative_reproduces_h() {
        for (n, d) in [(1, 2), (7, 2), (5, 3)] {
            let a = AlphaValue::ratio(n, d);
            let h = h_small_series(&a, 8).unwrap();
            let dl = delta_log_small_series(&a, 8).unwrap();
            for (x, y) in h.terms.iter().zip(&dl.terms) {
                assert_eq!(exact(&x.coeff), (exact(&y.coeff) * &x.exponent));
            }
            let hl = h_large_series(&a, 10).unwrap();
            let dll = delta_log_large_series(&a, 10).unwrap();
            for t in &hl.terms {
                if t.exponent.cmp0() == Ordering::Equal {
                    assert_eq!(&t.coeff, dll.log_coeff.as_ref().unwrap());
                } else {
                    let y = dll.coeff(&t.exponent).unwrap();
                    assert_eq!(exact(&t.coeff), (exact(y) * &t.exponent));
                }
            }
        }
    }

    #[test]
    fn ctilde_known_forms() {
        let s = ctilde_series(&AlphaValue::ratio(1, 1), 5, Origin::Zero).unwrap();
        let want = [1, -1, 3, -12, 55];
        for (t, w) in s.terms.iter().zip(want) {
            assert_eq!(exact(&t.coeff), q(w, 1));
        }
        let z = ctilde_series(&AlphaValue::ratio(0, 1), 8, Origin::Infinity).unwrap();
        assert_eq!(exact(&z.terms[0].coeff), q(1, 1));
        assert!(z.terms[1..].iter().all(|t| t.coeff.is_zero()));
        let a = AlphaValue::ratio(7, 2);
        let c = ctilde_series(&a, 8, Origin::Infinity).unwrap();
        assert!(c.coeff_at(-2, 1).unwrap().is_zero());
        let full = c_large_series(&a, 8).unwrap();
        let alpha = q(7, 2);
        let expect = (&alpha * (Rational::from(&alpha * &alpha) - 1u32)) / 243;
        assert_eq!(exact(full.coeff_at(-2, 1).unwrap()), expect);
    }

    #[test]
    fn ratio_leading_terms() {
        let r = ratio_expansion(&AlphaValue::ratio(1, 1), 8).unwrap();
        assert_eq!(exact(r.coeff_at(1, 3).unwrap()), q(3, 2));
        assert_eq!(exact(r.log_coeff.as_ref().unwrap()), q(-1, 2));
        assert_eq!(exact(r.coeff_at(-1, 3).unwrap()), q(-1, 3));
        assert!(r.coeff_at(2, 3).unwrap().is_zero());
        assert_eq!(r.const_slot.as_ref().unwrap().name, "c2");
    }

    #[test]
    fn printed_small_recurrence_and_large_recurrence_hold() {
        for (n, d) in [(1, 2), (7, 2), (3, 1), (2, 5)] {
            let a = q(n, d);
            let b = solve_large(&a, 14, true);
            for k in 2..=10 {
                assert!(large_recurrence_residual(&a, &b, k).is_zero(), "n={k}");
            }
        }
    }

    #[test]
    fn eval_constant_and_errors() {
        let ctx = PrecisionCtx::default();
        let s = PuiseuxSeries {
            origin: Origin::Zero,
            alpha: AlphaValue::ratio(1, 2),
            terms: vec![Term { exponent: q(0, 1), coeff: Coef::Exact(q(2, 1)) }],
            log_coeff: None,
            const_slot: None,
            order: q(1, 1),
            omitted: None,
        };
        let v = eval_series(&s, &ctx.real(0.37), &ctx).unwrap();
        assert_eq!(v.value, 2.0);
        let dl = delta_log_large_series(&AlphaValue::ratio(1, 2), 10).unwrap();
        let loose = ctx.with_tol(1e-2);
        assert!(matches!(eval_series(&dl, &ctx.real(100.0), &loose), Err(Error::Usage(_))));
        let resolved = dl.resolve_const(ctx.zero());
        assert!(eval_series(&resolved, &ctx.real(100.0), &loose).is_ok());
        assert!(eval_series(&resolved, &ctx.real(0.5), &loose).is_err());
        // No term reaches 1e-60 at s = 2.
        assert!(eval_series(&resolved, &ctx.real(2.0), &ctx).is_err());
    }

    #[test]
    fn ctilde_large_matches_closed_root() {
        // real root of x^3 - x^2 - s, C~ = 1/x, by Newton in f64 as a rough check
        let ctx = PrecisionCtx::default().with_tol(1e-5);
        let s = 100.0f64;
        let mut x = s.cbrt() + 0.5;
        for _ in 0..50 {
            x -= (x * x * x - x * x - s) / (3.0 * x * x - 2.0 * x);
        }
        let ser = ctilde_series(&AlphaValue::ratio(1, 1), 5, Origin::Infinity).unwrap();
        let v = eval_series(&ser, &ctx.real(s), &ctx).unwrap();
        assert!((v.value.to_f64() - 1.0 / x).abs() < 1e-6);
    }

    #[test]
    fn coulomb_agreement_improves_with_alpha() {
        // a_j - c~_j = O(alpha^{-(3j+3)})
        for j in 1..=2usize {
            let mut scaled = Vec::new();
            for big in [10i64, 100, 1000] {
                let a = AlphaValue::ratio(big, 1);
                let c = c_small_series(&a, j + 1).unwrap();
                let ct = ctilde_series(&a, j + 1, Origin::Zero).unwrap();
                let d = exact(&c.terms[j].coeff) - exact(&ct.terms[j].coeff);
                let pow = Rational::from(Integer::from(big).pow(3 * j as u32 + 3));
                scaled.push((d * pow).to_f64());
            }
            assert!(scaled.iter().all(|v| v.abs() > 0.1 && v.abs() < 100.0), "{scaled:?}");
            let spread = (scaled[2] - scaled[1]).abs();
            assert!(spread < (scaled[1] - scaled[0]).abs());
        }
    }

    #[test]
    fn parses_alpha() {
        assert_eq!(AlphaValue::parse("1/2").unwrap(), AlphaValue::ratio(1, 2));
        assert_eq!(AlphaValue::parse("0.5").unwrap(), AlphaValue::ratio(1, 2));
        assert_eq!(AlphaValue::parse("3.5").unwrap(), AlphaValue::ratio(7, 2));
        assert_eq!(AlphaValue::parse("2.5e-1").unwrap(), AlphaValue::ratio(1, 4));
        assert!(AlphaValue::parse("x").is_err());
    }

    #[test]
    fn json_schema() {
        let s = c_small_series(&AlphaValue::ratio(1, 2), 2).unwrap();
        let j = s.to_json();
        assert_eq!(j["origin"], "zero");
        assert_eq!(j["alpha"], "1/2");
        assert_eq!(j["terms"][1]["coeff_num"], "16");
        assert_eq!(j["terms"][1]["coeff_den"], "3");
        assert_eq!(j["order"], "2");
    }

    #[test]
    fn real_alpha_matches_exact() {
        let ctx = PrecisionCtx::default();
        let ex = c_small_series(&AlphaValue::ratio(7, 10), 8).unwrap();
        let ap = c_small_series(&AlphaValue::Approx(ctx.ratio(7, 10)), 8).unwrap();
        for (x, y) in ex.terms.iter().zip(&ap.terms) {
            let xr = x.coeff.to_real(256);
            let yr = y.coeff.to_real(256);
            assert!((&xr - &yr).abs() <= xr.abs() * 1e-70);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn substitution_residual_vanishes(n in 1i64..40, d in 2i64..9) {
            let a = q(n, d);
            prop_assume!(*a.denom() != 1);
            let c = solve_small(&a, 8, true).unwrap();
            for r in c_small_residual(&a, &c) {
                prop_assert!(r.is_zero());
            }
            let h = h_small_coeffs_exact(&a, 7).unwrap();
            let res = h_small_sigma_residual(&a, &h);
            for r in &res[..h.len()] {
                prop_assert!(r.is_zero());
            }
            let b = solve_large(&a, 10, true);
            for k in 2..=8 {
                prop_assert!(large_recurrence_residual(&a, &b, k).is_zero());
            }
        }
    }
}
