//! Plain-text newform coefficient files.
//!
//! ```text
//! # weight=8 level=2 label=2.8.a.a
//! 1	1
//! 2	-8
//! ```
//!
//! Rows are `n<TAB>a_n` with `n` running through `1, 2, 3, ...`. A coefficient is an
//! integer, a fraction `p/q`, or a decimal; any decimal marks the form approximate.
//! An optional `rel_tol=` header key fixes the tolerance of an approximate form.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::modforms::{check_multiplicativity, deligne_spot_check, Eigenform, Precision};
use crate::series::{QSeries, Rational};

/// Primes up to this bound are checked against Deligne's bound on ingestion.
pub const DELIGNE_CHECK_PRIMES: u64 = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct NewformFile {
    pub weight: u32,
    pub level: u64,
    pub label: String,
    pub rel_tol: Option<f64>,
    pub rows: Vec<(usize, Coefficient)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Exact(Rational),
    /// A decimal literal, kept exactly, with its relative rounding `0.5 · 10^{1-digits}`.
    Decimal { value: Rational, rel_rounding: f64 },
}

impl Coefficient {
    pub fn value(&self) -> &Rational {
        match self {
            Coefficient::Exact(v) | Coefficient::Decimal { value: v, .. } => v,
        }
    }
}

fn parse_coefficient(s: &str) -> std::result::Result<Coefficient, String> {
    if s.contains(['.', 'e', 'E']) {
        return parse_decimal(s);
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.parse().map_err(|_| format!("bad numerator '{p}'"))?;
        let q: BigInt = q.parse().map_err(|_| format!("bad denominator '{q}'"))?;
        if q.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(Coefficient::Exact(Rational::new(p, q)));
    }
    let v: BigInt = s.parse().map_err(|_| format!("bad coefficient '{s}'"))?;
    Ok(Coefficient::Exact(Rational::from_integer(v)))
}

/// Exact value of a decimal literal such as `-1.25e3`.
fn parse_decimal(s: &str) -> std::result::Result<Coefficient, String> {
    let bad = || format!("bad decimal '{s}'");
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exp - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    value *= num_traits::pow::Pow::pow(&ten, shift);
    if neg {
        value = -value;
    }
    let significant = digits.trim_start_matches('0').len().max(1) as i32;
    let rel_rounding = 0.5 * 10f64.powi(1 - significant);
    Ok(Coefficient::Decimal { value, rel_rounding })
}

impl NewformFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut weight = None;
        let mut level = None;
        let mut label = None;
        let mut rel_tol = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else { continue };
                    match k {
                        "weight" => weight = Some(v.parse().map_err(|_| perr(format!("bad weight '{v}'")))?),
                        "level" => level = Some(v.parse().map_err(|_| perr(format!("bad level '{v}'")))?),
                        "label" => label = Some(v.to_string()),
                        "rel_tol" => rel_tol = Some(v.parse().map_err(|_| perr(format!("bad rel_tol '{v}'")))?),
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(perr(format!("expected 'n<TAB>a_n', found {} fields", fields.len())));
            }
            let n: usize = fields[0].parse().map_err(|_| perr(format!("bad index '{}'", fields[0])))?;
            let a = parse_coefficient(fields[1]).map_err(perr)?;
            rows.push((n, a));
        }
        let missing = |what: &str| Error::Parse { line: 1, msg: format!("header lacks {what}") };
        Ok(NewformFile {
            weight: weight.ok_or_else(|| missing("weight"))?,
            level: level.ok_or_else(|| missing("level"))?,
            label: label.unwrap_or_default(),
            rel_tol,
            rows,
        })
    }

    /// Validates the rows and builds the eigenform.
    pub fn into_eigenform(self) -> Result<Eigenform> {
        if self.rows.is_empty() {
            return Err(Error::Validation("no coefficient rows".into()));
        }
        for (i, (n, _)) in self.rows.iter().enumerate() {
            if *n != i + 1 {
                return Err(Error::Validation(format!(
                    "row {} has n = {n}; indices must run 1, 2, 3, ... without gaps",
                    i + 1
                )));
            }
        }
        if !self.rows[0].1.value().is_one() {
            return Err(Error::Validation(format!("a(1) = {}, expected 1", self.rows[0].1.value())));
        }
        let decimal_rounding = self
            .rows
            .iter()
            .filter_map(|(_, a)| match a {
                Coefficient::Decimal { rel_rounding, .. } => Some(*rel_rounding),
                Coefficient::Exact(_) => None,
            })
            .reduce(f64::max);
        let precision = match (self.rel_tol, decimal_rounding) {
            (Some(t), _) => Precision::Approximate { rel_tol: t },
            (None, Some(t)) => Precision::Approximate { rel_tol: t },
            (None, None) => Precision::Exact,
        };
        let mut coeffs = vec![Rational::zero()];
        coeffs.extend(self.rows.into_iter().map(|(_, a)| match a {
            Coefficient::Exact(v) | Coefficient::Decimal { value: v, .. } => v,
        }));
        let f = Eigenform::new(self.weight, self.level, QSeries::new(coeffs), self.label, precision)?;
        if let Err(v) = check_multiplicativity(&f, f.order()) {
            return Err(Error::Validation(format!(
                "{}: Hecke multiplicativity fails for (m, n) = ({}, {})",
                f.label(),
                v.m,
                v.n
            )));
        }
        deligne_spot_check(&f, DELIGNE_CHECK_PRIMES)?;
        Ok(f)
    }
}

/// Reads and validates a newform file.
pub fn ingest_newform(path: impl AsRef<Path>) -> Result<Eigenform> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    NewformFile::parse(&text)?.into_eigenform()
}

/// Text form of an eigenform; `NewformFile::parse(..).into_eigenform()` inverts it exactly.
pub fn serialize_newform(f: &Eigenform) -> String {
    let mut s = format!("# weight={} level={} label={}", f.weight(), f.level(), f.label());
    if let Precision::Approximate { rel_tol } = f.precision() {
        let _ = write!(s, " rel_tol={rel_tol:e}");
    }
    s.push('\n');
    for n in 1..=f.order() {
        let a = f.a(n);
        if a.is_integer() {
            let _ = writeln!(s, "{n}\t{}", a.numer());
        } else {
            let _ = writeln!(s, "{n}\t{}/{}", a.numer(), a.denom());
        }
    }
    s
}

pub fn write_newform(f: &Eigenform, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize_newform(f))?;
    Ok(())
}
