//! Command-line front end. Every number is emitted as a decimal string with
//! enough digits to round-trip at the working precision.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Rational;
use serde_json::{json, Value};

use crate::asymptotics::{c1_conjectured, c2_constant, convergence_csv, origin_asymptotics, pn0_ratio_check};
use crate::coulomb_fluid::{density_csv, solve_endpoints_with, total_mass, Convention};
use crate::error::{Error, Result};
use crate::hankel::{hankel_det, moment, recurrence_coeffs, WeightParams};
use crate::painleve::solve_c;
use crate::precision::{PrecisionCtx, Real};
use crate::series::{self, AlphaValue, Origin, PuiseuxSeries};
use crate::verify::{run_all, run_criterion, VerifyConfig, CRITERIA};

/// Environment variable holding the default mantissa size.
pub const BITS_ENV: &str = "LAGUERRE_P3_BITS";

#[derive(Parser, Debug)]
#[command(name = "laguerre-p3", version, about = "Hankel determinants and Painleve III for x^alpha e^{-x-t/x}")]
pub struct Cli {
    /// Mantissa bits of the working precision.
    #[arg(long, global = true, env = BITS_ENV, default_value_t = PrecisionCtx::DEFAULT_BITS)]
    pub bits: u32,
    /// Target relative accuracy of the special functions and quadratures.
    #[arg(long, global = true, default_value_t = PrecisionCtx::DEFAULT_TOL)]
    pub tol: f64,
    /// Which of 2n+alpha and 2n+1+alpha enters the Coulomb-fluid equations.
    #[arg(long, global = true, default_value = "2n+alpha")]
    pub convention: String,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Moments mu_j(t) of the weight.
    Moments(MomentsArgs),
    /// ln D_n(t, alpha) of the moment matrix.
    Hankel(HankelArgs),
    /// Squared norms and recurrence coefficients h_j, alpha_j, beta_j.
    Recurrence(HankelArgs),
    /// Trajectory of the C-potential, ln Delta and H.
    Ode(OdeArgs),
    /// Expansion coefficients at s -> 0 or s -> infinity.
    Series(SeriesArgs),
    /// Coulomb-fluid endpoints and density.
    Fluid(FluidArgs),
    /// P_n(0) asymptotics and the constants c1, c2.
    Asymptotics(AsymptoticsArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub t: String,
    /// First index.
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    /// Number of consecutive moments.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

#[derive(Args, Debug)]
pub struct HankelArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub t: String,
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct OdeArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long = "s-max")]
    pub s_max: String,
    /// Accuracy requested at s_max.
    #[arg(long = "ode-tol", default_value_t = 1e-20)]
    pub ode_tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// The potential C(s).
    C,
    /// H(s) = s d/ds ln Delta.
    H,
    /// ln Delta(s).
    Delta,
    /// Real root of the double-scaled cubic.
    Ctilde,
    /// ln[Delta(s, alpha+1)/Delta(s, alpha)] (infinity only).
    Ratio,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OriginArg {
    Zero,
    Infinity,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    #[arg(long, value_enum)]
    pub kind: SeriesKind,
    #[arg(long, value_enum, default_value = "zero")]
    pub origin: OriginArg,
    /// Exact rational ("7/2", "0.5") or decimal value.
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 6)]
    pub terms: usize,
    /// Evaluate the series at this s as well.
    #[arg(long)]
    pub s: Option<String>,
}

#[derive(Args, Debug)]
pub struct FluidArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub t: String,
    #[arg(long)]
    pub n: usize,
    /// Points of the density profile (CSV output).
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct AsymptoticsArgs {
    #[arg(long)]
    pub alpha: String,
    /// Double-scaled variable s = (2n+1+alpha) t.
    #[arg(long)]
    pub s: String,
    /// Comma-separated list of n.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub n: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// alpha of the trajectory-based criteria.
    #[arg(long, default_value = "1/2")]
    pub alpha: String,
    /// Run only these criteria (comma-separated ids).
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
}

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failure = 1,
    Usage = 2,
}

/// Decimal string without trailing zeros, positional for moderate exponents.
pub fn fmt_real(x: &Real) -> String {
    let s = x.to_decimal();
    let (mantissa, exp) = match s.find('e') {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (s.as_str(), 0),
    };
    let (sign, body) = match mantissa.strip_prefix('-') {
        Some(b) => ("-", b),
        None => ("", mantissa),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int}{}", frac.trim_end_matches('0'));
    let digits = digits.trim_start_matches('0');
    if digits.is_empty() {
        return "0".into();
    }
    // position of the decimal point relative to the start of `digits`
    let lead_zeros = (int.len() + frac.len()) as i64 - format!("{int}{frac}").trim_start_matches('0').len() as i64;
    let point = int.len() as i64 - lead_zeros + exp;
    let n = digits.len() as i64;
    if (-6..=24).contains(&point) {
        if point <= 0 {
            format!("{sign}0.{}{digits}", "0".repeat((-point) as usize))
        } else if point >= n {
            format!("{sign}{digits}{}", "0".repeat((point - n) as usize))
        } else {
            let (a, b) = digits.split_at(point as usize);
            format!("{sign}{a}.{b}")
        }
    } else {
        let (a, b) = digits.split_at(1);
        let b = if b.is_empty() { String::new() } else { format!(".{b}") };
        format!("{sign}{a}{b}e{}", point - 1)
    }
}

fn reals(v: &[Real]) -> Vec<String> {
    v.iter().map(fmt_real).collect()
}

struct Ctx {
    ctx: PrecisionCtx,
    format: Option<Format>,
}

impl Ctx {
    fn real(&self, text: &str, what: &str) -> Result<Real> {
        let a = AlphaValue::parse(text).or_else(|_| self.ctx.parse(text).map(AlphaValue::Approx));
        match a {
            Ok(v) => Ok(v.to_real(self.ctx.bits())),
            Err(_) => Err(Error::Usage(format!("--{what}: cannot parse '{text}'"))),
        }
    }

    fn alpha(&self, text: &str) -> Result<AlphaValue> {
        AlphaValue::parse(text).map_err(|_| Error::Usage(format!("--alpha: cannot parse '{text}'")))
    }

    fn params(&self, alpha: &str, t: &str) -> Result<WeightParams> {
        WeightParams::new(self.real(alpha, "alpha")?, self.real(t, "t")?, self.ctx)
    }

    fn csv(&self) -> bool {
        self.format == Some(Format::Csv)
    }
}

fn json_doc(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

/// Executes a parsed command line, returning the document and exit status.
pub fn execute(cli: &Cli) -> Result<(String, Status)> {
    if cli.bits < PrecisionCtx::MIN_BITS {
        return Err(Error::Usage(format!("--bits must be at least {}", PrecisionCtx::MIN_BITS)));
    }
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(Error::Usage("--tol must lie in (0, 1)".into()));
    }
    let convention: Convention = cli.convention.parse()?;
    let c = Ctx { ctx: PrecisionCtx::new(cli.bits, cli.tol)?, format: cli.format };
    let ok = |s: String| Ok((s, Status::Ok));
    match &cli.command {
        Command::Moments(a) => {
            let p = c.params(&a.alpha, &a.t)?;
            let mut mus = Vec::with_capacity(a.count);
            for j in a.j..a.j + a.count.max(1) {
                mus.push(moment(j, &p)?);
            }
            if c.csv() {
                let mut out = String::from("j,mu\n");
                for (k, m) in mus.iter().enumerate() {
                    out.push_str(&format!("{},{}\n", a.j + k, fmt_real(m)));
                }
                ok(out)
            } else if mus.len() == 1 {
                ok(json_doc(json!({ "mu": fmt_real(&mus[0]) })))
            } else {
                ok(json_doc(json!({ "j0": a.j, "mu": reals(&mus) })))
            }
        }
        Command::Hankel(a) => {
            let p = c.params(&a.alpha, &a.t)?;
            let d = hankel_det(a.n, &p)?;
            if c.csv() {
                ok(format!("n,log_det\n{},{}\n", a.n, fmt_real(&d.log_value)))
            } else {
                ok(json_doc(json!({ "n": a.n, "log_det": fmt_real(&d.log_value), "sign": d.sign })))
            }
        }
        Command::Recurrence(a) => {
            let p = c.params(&a.alpha, &a.t)?;
            let r = recurrence_coeffs(a.n, &p)?;
            if c.csv() {
                let mut out = String::from("j,h,alpha,beta\n");
                for j in 0..r.n {
                    out.push_str(&format!(
                        "{j},{},{},{}\n",
                        fmt_real(&r.h[j]),
                        fmt_real(&r.a[j]),
                        fmt_real(&r.b[j])
                    ));
                }
                ok(out)
            } else {
                ok(json_doc(json!({ "n": r.n, "h": reals(&r.h), "alpha": reals(&r.a), "beta": reals(&r.b) })))
            }
        }
        Command::Ode(a) => {
            let alpha = c.real(&a.alpha, "alpha")?;
            let s_max = c.real(&a.s_max, "s-max")?;
            let sol = solve_c(&alpha, &s_max, a.ode_tol, &c.ctx)?;
            if c.format == Some(Format::Json) {
                let rows: Vec<Value> = (0..sol.grid.len())
                    .map(|i| {
                        json!([
                            fmt_real(&sol.grid[i]),
                            fmt_real(&sol.c[i]),
                            fmt_real(&sol.cp[i]),
                            fmt_real(&sol.log_delta[i]),
                            fmt_real(&sol.hcal[i])
                        ])
                    })
                    .collect();
                ok(json_doc(json!({
                    "header": sol.header_json(),
                    "columns": ["s", "C", "Cp", "lnDelta", "Hcal"],
                    "rows": rows,
                })))
            } else {
                ok(format!("# {}\n{}", sol.header_json(), sol.to_csv()))
            }
        }
        Command::Series(a) => {
            let alpha = c.alpha(&a.alpha)?;
            let origin = match a.origin {
                OriginArg::Zero => Origin::Zero,
                OriginArg::Infinity => Origin::Infinity,
            };
            let ser = build_series(a.kind, origin, &alpha, a.terms)?;
            let value = match &a.s {
                Some(s) => {
                    let sv = c.real(s, "s")?;
                    let v = series::eval_series(&ser, &sv, &c.ctx)?;
                    Some((fmt_real(&v.value), fmt_real(&v.truncation)))
                }
                None => None,
            };
            if c.csv() {
                let mut out = String::from("exponent_num,exponent_den,coeff\n");
                for t in &ser.terms {
                    let coeff = match t.coeff.as_rational() {
                        Some(q) => q.to_string(),
                        None => fmt_real(&t.coeff.to_real(c.ctx.bits())),
                    };
                    out.push_str(&format!("{},{},{}\n", t.exponent.numer(), t.exponent.denom(), coeff));
                }
                ok(out)
            } else {
                let mut doc = ser.to_json();
                if let Some((v, tr)) = value {
                    doc["value"] = json!(v);
                    doc["truncation"] = json!(tr);
                }
                ok(json_doc(doc))
            }
        }
        Command::Fluid(a) => {
            let p = c.params(&a.alpha, &a.t)?;
            let ep = solve_endpoints_with(a.n, &p, convention)?;
            if c.csv() {
                ok(density_csv(&ep, a.points))
            } else {
                let qctx = c.ctx.with_tol(c.ctx.target_tol().max(1e-30));
                let mass = total_mass(&ep, &qctx)?;
                let (r1, r2) = ep.equation_residuals();
                ok(json_doc(json!({
                    "convention": convention.to_string(),
                    "a": fmt_real(&ep.a),
                    "b": fmt_real(&ep.b),
                    "X": fmt_real(&ep.x),
                    "mass": fmt_real(&mass),
                    "endpoint_residuals": [fmt_real(&r1), fmt_real(&r2)],
                })))
            }
        }
        Command::Asymptotics(a) => {
            let alpha = c.real(&a.alpha, "alpha")?;
            let s = c.real(&a.s, "s")?;
            let mut rows = Vec::with_capacity(a.n.len());
            for &n in &a.n {
                rows.push(pn0_ratio_check(n, &s, &alpha, &c.ctx)?);
            }
            if c.csv() {
                ok(convergence_csv(&rows))
            } else {
                let c1 = c1_conjectured(&alpha, &c.ctx)?;
                let c2 = c2_constant(&alpha, &c.ctx)?;
                let mut out_rows = Vec::new();
                for r in &rows {
                    // Coulomb-fluid evaluation at the same t, in the 2n + alpha convention
                    let t = &s / (&alpha + (2 * r.n as i64 + 1));
                    let o = origin_asymptotics(r.n, &WeightParams::new(alpha.clone(), t, c.ctx)?)?;
                    out_rows.push(json!({
                        "n": r.n,
                        "exact": fmt_real(&r.exact),
                        "asymptotic": fmt_real(&r.asymptotic),
                        "corollary": fmt_real(&r.corollary),
                        "difference": fmt_real(&r.difference()),
                        "log_exp_mS1": fmt_real(&o.log_exp_ms1),
                        "log_exp_mS2": fmt_real(&o.log_exp_ms2),
                        "log_pn0": fmt_real(&o.log_pn0),
                    }));
                }
                ok(json_doc(json!({
                    "alpha": fmt_real(&alpha),
                    "s": fmt_real(&s),
                    "c1_conjectured": fmt_real(&c1),
                    "c2": fmt_real(&c2),
                    "rows": out_rows,
                })))
            }
        }
        Command::Verify(a) => {
            let alpha: Rational = match c.alpha(&a.alpha)? {
                AlphaValue::Exact(q) => q,
                AlphaValue::Approx(_) => return Err(Error::Usage("--alpha must be rational for verify".into())),
            };
            if alpha <= 0 {
                return Err(Error::Usage("--alpha must be positive".into()));
            }
            let cfg = VerifyConfig { ctx: c.ctx, alpha };
            let reports = if a.criteria.is_empty() {
                run_all(&cfg)
            } else {
                for id in &a.criteria {
                    if !CRITERIA.iter().any(|c| c.0 == *id) {
                        return Err(Error::Usage(format!("unknown criterion {id}")));
                    }
                }
                a.criteria.iter().map(|&id| run_criterion(id, &cfg)).collect()
            };
            for r in &reports {
                eprintln!("{}", r.summary());
            }
            let all = reports.iter().all(|r| r.passed());
            let status = if all { Status::Ok } else { Status::Failure };
            let doc = if c.csv() {
                let mut out = String::from("criterion,check,value,bound,passed\n");
                for r in &reports {
                    for ch in &r.checks {
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.id,
                            csv_field(&ch.name),
                            csv_field(&ch.value),
                            csv_field(&ch.bound),
                            ch.passed
                        ));
                    }
                }
                out
            } else {
                json_doc(json!({
                    "passed": all,
                    "criteria": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                }))
            };
            Ok((doc, status))
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn build_series(kind: SeriesKind, origin: Origin, alpha: &AlphaValue, m: usize) -> Result<PuiseuxSeries> {
    match (kind, origin) {
        (SeriesKind::C, Origin::Zero) => series::c_small_series(alpha, m),
        (SeriesKind::C, Origin::Infinity) => series::c_large_series(alpha, m),
        (SeriesKind::H, Origin::Zero) => series::h_small_series(alpha, m),
        (SeriesKind::H, Origin::Infinity) => series::h_large_series(alpha, m),
        (SeriesKind::Delta, Origin::Zero) => series::delta_log_small_series(alpha, m),
        (SeriesKind::Delta, Origin::Infinity) => series::delta_log_large_series(alpha, m),
        (SeriesKind::Ctilde, o) => series::ctilde_series(alpha, m, o),
        (SeriesKind::Ratio, Origin::Infinity) => series::ratio_expansion(alpha, m),
        (SeriesKind::Ratio, Origin::Zero) => {
            Err(Error::Usage("the ratio expansion exists only at infinity".into()))
        }
    }
}

/// Parses `args`, runs the command and writes the document. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Status::Usage as i32 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((doc, status)) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &doc).map_err(|e| e.to_string()),
                None => std::io::stdout().write_all(doc.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => status as i32,
                Err(e) => {
                    eprintln!("error: cannot write output: {e}");
                    Status::Failure as i32
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => Status::Usage as i32,
                _ => Status::Failure as i32,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<(String, Status)> {
        let mut v = vec!["laguerre-p3"];
        v.extend_from_slice(args);
        execute(&Cli::try_parse_from(v).expect("parse"))
    }

    #[test]
    fn moments_example() {
        let (doc, st) = exec(&["moments", "--alpha", "1", "--t", "0", "--j", "2"]).unwrap();
        assert_eq!(st, Status::Ok);
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v, json!({ "mu": "6" }));
    }

    #[test]
    fn fmt_real_trims() {
        let c = PrecisionCtx::default();
        assert_eq!(fmt_real(&c.int(6)), "6");
        assert_eq!(fmt_real(&c.real(0.5)), "0.5");
        assert_eq!(fmt_real(&c.zero()), "0");
        assert_eq!(fmt_real(&c.real(-0.015625)), "-0.015625");
        assert_eq!(fmt_real(&c.real(1e-30)).split('e').nth(1), Some("-30"));
        assert_eq!(fmt_real(&c.int(1200)), "1200");
        let x = c.pi();
        let back = c.parse(&fmt_real(&x)).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn ode_csv_header() {
        let (doc, _) = exec(&["ode", "--alpha", "0.5", "--s-max", "2", "--ode-tol", "1e-12"]).unwrap();
        let mut lines = doc.lines();
        let header: Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
        assert!(header.get("s0").is_some() && header.get("seed_order").is_some());
        assert_eq!(lines.next().unwrap(), "s,C,Cp,lnDelta,Hcal");
    }

    #[test]
    fn deterministic_output() {
        let args = ["series", "--kind", "delta", "--origin", "infinity", "--alpha", "7/2", "--terms", "5"];
        assert_eq!(exec(&args).unwrap().0, exec(&args).unwrap().0);
    }

    #[test]
    fn error_statuses() {
        assert_eq!(run(["laguerre-p3", "moments", "--alpha"]), 2);
        assert_eq!(run(["laguerre-p3", "hankel", "--alpha=-1", "--t", "0", "--n", "3"]), 1);
        assert_eq!(run(["laguerre-p3", "--bits", "8", "moments", "--alpha", "1", "--t", "0"]), 2);
        assert_eq!(run(["laguerre-p3", "--convention", "x", "moments", "--alpha", "1", "--t", "0"]), 2);
        assert_eq!(run(["laguerre-p3", "series", "--kind", "ratio", "--alpha", "1", "--terms", "3"]), 2);
    }

    #[test]
    fn fluid_json_and_csv() {
        let (doc, _) = exec(&["fluid", "--alpha", "0.5", "--t", "0.5", "--n", "20"]).unwrap();
        let v: Value = serde_json::from_str(&doc).unwrap();
        let mass: f64 = v["mass"].as_str().unwrap().parse().unwrap();
        assert!((mass - 20.0).abs() < 1e-10);
        let (doc, _) = exec(&["--format", "csv", "fluid", "--alpha", "0.5", "--t", "0.5", "--n", "20", "--points", "5"]).unwrap();
        assert_eq!(doc.lines().count(), 6);
    }

    #[test]
    fn verify_single_criterion() {
        let (doc, st) = exec(&["verify", "--criteria", "1,2"]).unwrap();
        assert_eq!(st, Status::Ok);
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["criteria"].as_array().unwrap().len(), 2);
        assert!(exec(&["verify", "--criteria", "12"]).is_err());
    }
}
