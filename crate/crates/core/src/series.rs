//! Exact truncated q-expansions.
//!
//! A [`QSeries`] holds the coefficients `c_0, ..., c_M` of `Σ c_n q^n` together
//! with its truncation order `M`: coefficients past `M` are unknown, and every
//! operation returns the largest order it can honestly vouch for.
//!
//! Products are computed on integer numerators by Kronecker substitution, so
//! expansions with ten thousand coefficients of a few hundred bits multiply in
//! milliseconds instead of minutes.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::error::{invalid, Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Truncated power series in `q` with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<Rational>,
}

impl QSeries {
    /// Builds a series known through `q^(coeffs.len() - 1)`.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        QSeries { coeffs }
    }

    pub fn from_integers<T: Into<BigInt>>(coeffs: impl IntoIterator<Item = T>) -> Self {
        Self::new(coeffs.into_iter().map(|c| Rational::from_integer(c.into())).collect())
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Rational) -> Self {
        Self::new((0..=order).map(f).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![Rational::zero(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The truncation order `M`; coefficients of `q^0..=q^M` are known.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Option<&Rational> {
        self.coeffs.get(n)
    }

    /// Index of the first nonzero coefficient, if any is known.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        Self::new(self.coeffs[..=order].to_vec())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs)
    }

    /// `f(q^d)`, known through `q^(d(M+1) - 1)`.
    pub fn substitute_power(&self, d: usize) -> Self {
        assert!(d >= 1);
        let order = d * (self.order() + 1) - 1;
        let mut out = vec![Rational::zero(); order + 1];
        for (n, c) in self.coeffs.iter().enumerate() {
            out[n * d] = c.clone();
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = QSeries::one(self.order());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Multiplicative inverse; requires an invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return invalid("series with zero constant term is not invertible");
        }
        let m = self.order();
        let inv0 = c0.recip();
        let mut out: Vec<Rational> = Vec::with_capacity(m + 1);
        out.push(inv0.clone());
        for n in 1..=m {
            let mut acc = Rational::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &out[n - k];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(Self::new(out))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// Integer coefficients, if every coefficient is integral.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    fn known_through(&self) -> usize {
        self.order()
    }

    fn effective_valuation(&self) -> usize {
        self.valuation().unwrap_or(self.order() + 1)
    }
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QSeries(")?;
        let shown = self.coeffs.len().min(8);
        for (i, c) in self.coeffs[..shown].iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        if shown < self.coeffs.len() {
            write!(f, ", ...")?;
        }
        write!(f, "; O(q^{}))", self.order() + 1)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // scale both parts down to keep them in range
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

impl<'a> Add<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        let m = self.known_through().min(rhs.known_through());
        QSeries::from_fn(m, |n| &self.coeffs[n] + &rhs.coeffs[n])
    }
}

impl<'a> Sub<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        let m = self.known_through().min(rhs.known_through());
        QSeries::from_fn(m, |n| &self.coeffs[n] - &rhs.coeffs[n])
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl<'a> Mul<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        // a known mod q^(Ma+1) and b = q^vb·(...) give a·b known mod q^(Ma+vb+1)
        let m = (self.order() + rhs.effective_valuation())
            .min(rhs.order() + self.effective_valuation());
        let (na, da) = to_common_denominator(&self.coeffs);
        let (nb, db) = to_common_denominator(&rhs.coeffs);
        let prod = mul_integer_polys(&na, &nb, m + 1);
        let den = da * db;
        QSeries::new(
            prod.into_iter()
                .map(|c| Rational::new(c, den.clone()))
                .collect(),
        )
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QSeries> for QSeries {
            type Output = QSeries;
            fn $m(self, rhs: QSeries) -> QSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn to_common_denominator(coeffs: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let den = coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let nums = if den.is_one() {
        coeffs.iter().map(|c| c.numer().clone()).collect()
    } else {
        coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect()
    };
    (nums, den)
}

const SCHOOLBOOK_LIMIT: usize = 48;

/// Product of two integer polynomials, truncated to `n_out` coefficients
/// (zero-padded when the operands are too short to fill it).
pub(crate) fn mul_integer_polys(a: &[BigInt], b: &[BigInt], n_out: usize) -> Vec<BigInt> {
    let a = &a[..a.len().min(n_out)];
    let b = &b[..b.len().min(n_out)];
    let mut out = if a.len().min(b.len()) <= SCHOOLBOOK_LIMIT {
        schoolbook(a, b, n_out)
    } else {
        kronecker(a, b, n_out)
    };
    out.resize(n_out, BigInt::zero());
    out
}

fn schoolbook(a: &[BigInt], b: &[BigInt], n_out: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n_out];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n_out.saturating_sub(i)) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn split_signs(v: &[BigInt]) -> (Vec<BigUint>, Vec<BigUint>) {
    let mut pos = Vec::with_capacity(v.len());
    let mut neg = Vec::with_capacity(v.len());
    for c in v {
        match c.sign() {
            Sign::Minus => {
                pos.push(BigUint::zero());
                neg.push(c.magnitude().clone());
            }
            _ => {
                pos.push(c.magnitude().clone());
                neg.push(BigUint::zero());
            }
        }
    }
    (pos, neg)
}

fn pack(v: &[BigUint], slot_words: usize) -> BigUint {
    let mut words = vec![0u32; v.len() * slot_words];
    for (i, c) in v.iter().enumerate() {
        for (k, w) in c.iter_u32_digits().enumerate() {
            words[i * slot_words + k] = w;
        }
    }
    BigUint::new(words)
}

fn unpack(p: &BigUint, slot_words: usize, n: usize) -> Vec<BigInt> {
    let words = p.to_u32_digits();
    (0..n)
        .map(|i| {
            let lo = (i * slot_words).min(words.len());
            let hi = ((i + 1) * slot_words).min(words.len());
            BigInt::from_biguint(Sign::Plus, BigUint::from_slice(&words[lo..hi]))
        })
        .collect()
}

/// Kronecker substitution: pack each polynomial into one big integer with
/// slots wide enough that no carries cross slot boundaries.
fn kronecker(a: &[BigInt], b: &[BigInt], n_out: usize) -> Vec<BigInt> {
    let bits = |v: &[BigInt]| v.iter().map(|c| c.bits()).max().unwrap_or(0);
    let len_bits = (a.len().min(b.len()) as u64 + 1).next_power_of_two().trailing_zeros() as u64;
    let slot_bits = bits(a) + bits(b) + len_bits + 1;
    let slot_words = slot_bits.div_ceil(32) as usize;
    let (ap, an) = split_signs(a);
    let (bp, bn) = split_signs(b);
    let a_has_neg = a.iter().any(|c| c.is_negative());
    let b_has_neg = b.iter().any(|c| c.is_negative());
    let n = n_out.min(a.len() + b.len() - 1);

    let mut out = unpack(&(pack(&ap, slot_words) * pack(&bp, slot_words)), slot_words, n);
    let mut accumulate = |x: &[BigUint], y: &[BigUint], sign: i32| {
        let prod = unpack(&(pack(x, slot_words) * pack(y, slot_words)), slot_words, n);
        for (o, p) in out.iter_mut().zip(prod) {
            if sign > 0 {
                *o += p;
            } else {
                *o -= p;
            }
        }
    };
    if b_has_neg {
        accumulate(&ap, &bn, -1);
    }
    if a_has_neg {
        accumulate(&an, &bp, -1);
    }
    if a_has_neg && b_has_neg {
        accumulate(&an, &bn, 1);
    }
    out
}

/// `Π_{n≥1} (1 - q^n)` through `q^order`, from Euler's pentagonal number theorem.
pub fn euler_product(order: usize) -> QSeries {
    let mut c = vec![BigInt::zero(); order + 1];
    c[0] = BigInt::one();
    let mut k: i64 = 1;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let p1 = (k * (3 * k - 1) / 2) as usize;
        let p2 = (k * (3 * k + 1) / 2) as usize;
        if p1 > order {
            break;
        }
        c[p1] += sign;
        if p2 <= order {
            c[p2] += sign;
        }
        k += 1;
    }
    QSeries::from_integers(c)
}

/// `q^v Π_d Π_{n≥1} (1 - q^{dn})^{e_d}` with `v = Σ d·e_d / 24`, through `q^order`.
pub fn eta_quotient(exponents: &[(u64, i64)], order: usize) -> Result<QSeries> {
    if exponents.iter().any(|&(d, _)| d == 0) {
        return invalid("eta quotient levels must be positive");
    }
    let val24: i64 = exponents.iter().map(|&(d, e)| d as i64 * e).sum();
    if val24 < 0 || val24 % 24 != 0 {
        return invalid(format!(
            "q-valuation {val24}/24 of the eta quotient is not a non-negative integer"
        ));
    }
    let val = (val24 / 24) as usize;
    if val > order {
        return Ok(QSeries::zero(order));
    }
    let inner = order - val;
    let mut acc = QSeries::one(inner);
    for &(d, e) in exponents {
        if e == 0 {
            continue;
        }
        let d = d as usize;
        let base = euler_product(inner / d).substitute_power(d).truncate(inner);
        let base = if e < 0 { base.inverse()? } else { base };
        acc = &acc * &base.pow(e.unsigned_abs() as u32);
    }
    Ok(acc.shift(val))
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`) from `Σ_{j=0}^{m} C(m+1, j) B_j = 0`.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for m in 1..=n {
        let mut acc = Rational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from_integer(arith::binomial(m as u32 + 1, j as u32)) * bj;
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b
}

pub fn bernoulli_number(n: usize) -> Rational {
    bernoulli_numbers(n).pop().expect("nonempty")
}

/// Bernoulli polynomial `B_n(x) = Σ_j C(n, j) B_j x^{n-j}`.
pub fn bernoulli_polynomial(n: usize, x: &Rational) -> Rational {
    let b = bernoulli_numbers(n);
    let mut acc = Rational::zero();
    for (j, bj) in b.iter().enumerate() {
        let c = Rational::from_integer(arith::binomial(n as u32, j as u32));
        acc += c * bj * pow_rat(x, (n - j) as u32);
    }
    acc
}

pub fn pow_rat(x: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl TryFrom<&QSeries> for Vec<i64> {
    type Error = Error;
    fn try_from(s: &QSeries) -> Result<Self> {
        s.coeffs
            .iter()
            .map(|c| {
                if c.is_integer() {
                    c.to_integer()
                        .to_i64()
                        .ok_or_else(|| Error::InvalidInput("coefficient overflows i64".into()))
                } else {
                    Err(Error::InvalidInput(format!("non-integral coefficient {c}")))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &QSeries) -> Vec<i64> {
        Vec::try_from(s).unwrap()
    }

    #[test]
    fn identity_and_difference_of_squares() {
        let s = QSeries::from_integers([3, -1, 4, 1, -5]);
        assert_eq!(&QSeries::one(4) * &s, s);
        let a = QSeries::from_integers([1, 1, 0]);
        let b = QSeries::from_integers([1, -1, 0]);
        assert_eq!(ints(&(&a * &b)), vec![1, 0, -1]);
    }

    #[test]
    fn product_order_tracks_valuations() {
        let a = QSeries::from_integers([0, 1, 2]); // q + 2q^2 + O(q^3)
        let b = QSeries::from_integers([0, 0, 1, 1]); // q^2 + q^3 + O(q^4)
        let p = &a * &b;
        // min(2 + 2, 3 + 1) = 4
        assert_eq!(p.order(), 4);
        assert_eq!(ints(&p), vec![0, 0, 0, 1, 3]);
    }

    #[test]
    fn kronecker_matches_schoolbook() {
        let a: Vec<BigInt> = (0..200i64).map(|i| BigInt::from((i * 7919) % 211 - 105).pow(5)).collect();
        let b: Vec<BigInt> = (0..150i64).map(|i| BigInt::from((i * 104729) % 97 - 48).pow(9)).collect();
        assert_eq!(kronecker(&a, &b, 349), schoolbook(&a, &b, 349));
        assert_eq!(kronecker(&a, &b, 120), schoolbook(&a, &b, 120));
    }

    #[test]
    fn eta_quotient_examples() {
        let delta = eta_quotient(&[(1, 24)], 3).unwrap();
        assert_eq!(ints(&delta), vec![0, 1, -24, 252]);
        let f8 = eta_quotient(&[(1, 8), (2, 8)], 3).unwrap();
        assert_eq!(ints(&f8), vec![0, 1, -8, 12]);
        assert_eq!(ints(&eta_quotient(&[(1, 0)], 5).unwrap()), vec![1, 0, 0, 0, 0, 0]);
        assert!(eta_quotient(&[(1, 1)], 5).is_err());
        assert!(eta_quotient(&[(1, -24)], 5).is_err());
    }

    #[test]
    fn eta_with_negative_exponent() {
        // η(2τ)^16/η(τ)^8 = q Π(1+q^n)^8 Π(1-q^{2n})^8
        let s = eta_quotient(&[(1, -8), (2, 16)], 4).unwrap();
        assert_eq!(ints(&s), vec![0, 1, 8, 28, 64]);
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli_number(0), rat(1, 1));
        assert_eq!(bernoulli_number(1), rat(-1, 2));
        assert_eq!(bernoulli_number(2), rat(1, 6));
        assert_eq!(bernoulli_number(8), rat(-1, 30));
        assert_eq!(bernoulli_number(12), rat(-691, 2730));
        for n in (3..30).step_by(2) {
            assert!(bernoulli_number(n).is_zero());
        }
        assert_eq!(bernoulli_polynomial(2, &rat(1, 3)), rat(1, 9) - rat(1, 3) + rat(1, 6));
    }

    #[test]
    fn inverse_round_trip() {
        let s = QSeries::from_integers([2, 3, -1, 7, 0, 5]);
        let p = &s * &s.inverse().unwrap();
        assert_eq!(p, QSeries::one(5));
        assert!(QSeries::from_integers([0, 1]).inverse().is_err());
    }
}
