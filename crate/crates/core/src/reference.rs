//! Published closed forms of the expansion coefficients as rational
//! functions of alpha, evaluated exactly. These are the golden values the
//! generated series are compared against.

use rug::Rational;

/// One published coefficient. `value` is `None` where a denominator
/// vanishes at the chosen alpha.
#[derive(Clone, Debug)]
pub struct Printed {
    /// Exponent of s.
    pub exponent: Rational,
    pub value: Option<Rational>,
    /// The published sign of this entry is known to be wrong; the generated
    /// coefficient equals minus the published value.
    pub sign_erratum: bool,
}

/// A published table: the coefficients plus an optional ln s coefficient.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: &'static str,
    pub entries: Vec<Printed>,
    pub log_coeff: Option<Rational>,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

struct A {
    a: Rational,
}

impl A {
    fn pow(&self, k: u32) -> Rational {
        let mut r = q(1, 1);
        for _ in 0..k {
            r *= &self.a;
        }
        r
    }

    /// alpha^2 - k^2
    fn d(&self, k: i64) -> Rational {
        self.pow(2) - Rational::from(k * k)
    }

    /// Polynomial in alpha^2 with integer coefficients, lowest degree first.
    fn poly2(&self, c: &[i64]) -> Rational {
        let a2 = self.pow(2);
        let mut acc = q(0, 1);
        for &k in c.iter().rev() {
            acc = acc * &a2 + Rational::from(k);
        }
        acc
    }

    fn ratio(num: Rational, den: Rational) -> Option<Rational> {
        if den == 0 {
            None
        } else {
            Some(num / den)
        }
    }
}

fn entry(e: (i64, i64), value: Option<Rational>) -> Printed {
    Printed { exponent: q(e.0, e.1), value, sign_erratum: false }
}

fn table(name: &'static str, entries: Vec<Printed>) -> Table {
    Table { name, entries, log_coeff: None }
}

/// Small-s C: a_0..a_5.
pub fn c_small(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    let p = |k| x.pow(k);
    let d = |k| x.d(k);
    table(
        "C small-s",
        vec![
            entry((0, 1), A::ratio(q(1, 1), p(1))),
            entry((1, 1), A::ratio(q(-1, 1), p(2) * d(1))),
            entry((2, 1), A::ratio(q(3, 1), p(3) * d(1) * d(2))),
            entry(
                (3, 1),
                A::ratio(-6 * x.poly2(&[-3, 2]), p(4) * d(1).square() * d(2) * d(3)),
            ),
            entry(
                (4, 1),
                A::ratio(5 * x.poly2(&[-36, 11]), p(5) * d(1).square() * d(2) * d(3) * d(4)),
            ),
            entry(
                (5, 1),
                A::ratio(
                    3 * x.poly2(&[3600, -4219, 1115, -91]),
                    p(6) * d(1).square() * d(1) * d(2).square() * d(3) * d(4) * d(5),
                ),
            ),
        ],
    )
}

/// Large-s C: b_1..b_8 at s^{-1/3}..s^{-8/3}.
pub fn c_large(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    let a = || x.a.clone();
    let d1 = || x.d(1);
    table(
        "C large-s",
        vec![
            entry((-1, 3), Some(q(1, 1))),
            entry((-2, 3), Some(-a() / 3)),
            entry((-1, 1), Some(q(0, 1))),
            entry((-4, 3), Some(a() * d1() / 81)),
            entry((-5, 3), Some(x.pow(2) * d1() / 243)),
            entry((-2, 1), Some(a() * d1() / 243)),
            entry((-7, 3), Some(-2 * x.pow(2) * d1() * x.poly2(&[-11, 2]) / 6561)),
            entry((-8, 3), Some(-5 * a() * d1() * x.poly2(&[-15, -1, 1]) / 19683)),
        ],
    )
}

/// Small-s H: d_1..d_6.
pub fn h_small(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    let p = |k| x.pow(k);
    let d = |k| x.d(k);
    let mut t = table(
        "H small-s",
        vec![
            entry((1, 1), A::ratio(q(-1, 1), 2 * p(1))),
            entry((2, 1), A::ratio(q(1, 1), 4 * p(2) * d(1))),
            entry((3, 1), A::ratio(q(-1, 1), 2 * p(3) * d(1) * d(2))),
            entry(
                (4, 1),
                A::ratio(3 * x.poly2(&[-3, 2]), 4 * p(4) * d(1).square() * d(2) * d(3)),
            ),
            entry(
                (5, 1),
                A::ratio(x.poly2(&[-36, 11]), 2 * p(5) * d(1).square() * d(2) * d(3) * d(4)),
            ),
            entry(
                (6, 1),
                A::ratio(
                    x.poly2(&[-3600, 4219, -1115, 91]),
                    4 * p(6) * d(1).square() * d(1) * d(2).square() * d(3) * d(4) * d(5),
                ),
            ),
        ],
    );
    t.entries[4].sign_erratum = true;
    t
}

/// Large-s H: eta_0..eta_8 at s^{2/3}..s^{-2}.
pub fn h_large(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    let a = || x.a.clone();
    let d1 = || x.d(1);
    table(
        "H large-s",
        vec![
            entry((2, 3), Some(q(-3, 4))),
            entry((1, 3), Some(a() / 2)),
            entry((0, 1), Some(x.poly2(&[1, -6]) / 36)),
            entry((-1, 3), Some(a() * d1() / 54)),
            entry((-2, 3), Some(x.pow(2) * d1() / 324)),
            entry((-1, 1), Some(a() * d1() / 486)),
            entry((-4, 3), Some(-x.pow(2) * d1() * x.poly2(&[-11, 2]) / 8748)),
            entry((-5, 3), Some(-a() * x.poly2(&[15, -14, -2, 1]) / 13122)),
            entry((-2, 1), Some(-x.poly2(&[0, 33, -41, 8]) / 26244)),
        ],
    )
}

/// Small-s ln Delta: s^1..s^6.
pub fn delta_small(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    let p = |k| x.pow(k);
    let d = |k| x.d(k);
    table(
        "ln Delta small-s",
        vec![
            entry((1, 1), A::ratio(q(-1, 1), 2 * p(1))),
            entry((2, 1), A::ratio(q(1, 1), 8 * p(2) * d(1))),
            entry((3, 1), A::ratio(q(-1, 1), 6 * p(3) * d(1) * d(2))),
            entry(
                (4, 1),
                A::ratio(3 * x.poly2(&[-3, 2]), 16 * p(4) * d(1).square() * d(2) * d(3)),
            ),
            entry(
                (5, 1),
                A::ratio(x.poly2(&[36, -11]), 10 * p(5) * d(1).square() * d(2) * d(3) * d(4)),
            ),
            entry(
                (6, 1),
                A::ratio(
                    x.poly2(&[-3600, 4219, -1115, 91]),
                    24 * p(6) * d(2).square() * d(1).square() * d(1) * d(3) * d(4) * d(5),
                ),
            ),
        ],
    )
}

/// Large-s ln Delta: every non-constant published term plus the ln s
/// coefficient. The constant c_1 is not a coefficient.
pub fn delta_large(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    let a = || x.a.clone();
    let one_m = || -x.d(1);
    let mut t = table(
        "ln Delta large-s",
        vec![
            entry((2, 3), Some(q(-9, 8))),
            entry((1, 3), Some(3 * a() / 2)),
            entry((-1, 3), Some(a() * one_m() / 18)),
            entry((-2, 3), Some(x.pow(2) * one_m() / 216)),
            entry((-1, 1), Some(a() * one_m() / 486)),
            entry((-4, 3), Some(x.pow(2) * x.poly2(&[11, -13, 2]) / 11664)),
            entry((-5, 3), Some(a() * x.poly2(&[15, -14, -2, 1]) / 21870)),
        ],
    );
    t.log_coeff = Some(x.poly2(&[1, -6]) / 36);
    t
}

/// ln[Delta(s, alpha+1) / Delta(s, alpha)] at large s through s^{-4/3}.
pub fn ratio(alpha: &Rational) -> Table {
    let a = alpha.clone();
    let aa1 = || &a * Rational::from(&a + 1u32);
    let two_a1 = || Rational::from(2 * &a) + 1u32;
    let quad = Rational::from(&a * &a) + &a - 3u32;
    let mut t = table(
        "ratio large-s",
        vec![
            entry((1, 3), Some(q(3, 2))),
            entry((-1, 3), Some(-aa1() / 6)),
            entry((-2, 3), Some(-aa1() * two_a1() / 108)),
            entry((-1, 1), Some(-aa1() / 162)),
            entry((-4, 3), Some(aa1() * two_a1() * quad / 1944)),
        ],
    );
    t.log_coeff = Some(-two_a1() / 6);
    t
}

/// Small-s C~: s^0..s^4.
pub fn ctilde_small(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    table(
        "C~ small-s",
        [(0, 1i64, 1u32), (1, -1, 4), (2, 3, 7), (3, -12, 10), (4, 55, 13)]
            .iter()
            .map(|&(e, c, k)| entry((e, 1), A::ratio(q(c, 1), x.pow(k))))
            .collect(),
    )
}

/// Large-s C~ through s^{-7/3}; the orders s^{-1} and s^{-2} are absent from
/// the published form, i.e. zero.
pub fn ctilde_large(alpha: &Rational) -> Table {
    let x = A { a: alpha.clone() };
    table(
        "C~ large-s",
        vec![
            entry((-1, 3), Some(q(1, 1))),
            entry((-2, 3), Some(-x.pow(1) / 3)),
            entry((-1, 1), Some(q(0, 1))),
            entry((-4, 3), Some(x.pow(3) / 81)),
            entry((-5, 3), Some(x.pow(4) / 243)),
            entry((-2, 1), Some(q(0, 1))),
            entry((-7, 3), Some(-4 * x.pow(6) / 6561)),
        ],
    )
}
