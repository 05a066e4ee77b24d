//! Rankin–Selberg L-functions `L(s, f ⊗ ḡ)` of two eigenforms whose weights
//! differ by 8: truncated Dirichlet series and Euler products with rigorous
//! tail bounds, the closed form of the unfolded integral, and a
//! non-vanishing certificate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::modforms::{self, Eigenform, Precision};
use crate::series::{bernoulli_number, rational_to_f64};

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
const SUM_CHUNK: usize = 256;

/// A value with a rigorous bound on its distance from the true value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certified {
    pub value: Complex64,
    pub error_bound: f64,
}

impl Certified {
    pub fn new(value: Complex64, error_bound: f64) -> Self {
        Certified { value, error_bound }
    }

    pub fn real(value: f64, error_bound: f64) -> Self {
        Certified { value: Complex64::new(value, 0.0), error_bound }
    }

    pub fn exact(value: f64) -> Self {
        Self::real(value, 0.0)
    }

    /// `|self - other| ≤ self.error_bound + other.error_bound`.
    pub fn agrees_with(&self, other: &Certified) -> bool {
        (self.value - other.value).norm() <= self.error_bound + other.error_bound
    }

    pub fn relative_error(&self) -> f64 {
        self.error_bound / self.value.norm()
    }

    /// The certified value is bounded away from zero.
    pub fn is_nonzero(&self) -> bool {
        self.value.norm() > self.error_bound
    }

    pub fn scale(&self, c: f64) -> Certified {
        let v = self.value * c;
        Certified::new(v, self.error_bound * c.abs() + UNIT_ROUNDOFF * v.norm())
    }

    pub fn mul(&self, other: &Certified) -> Certified {
        let v = self.value * other.value;
        let err = self.value.norm() * other.error_bound
            + other.value.norm() * self.error_bound
            + self.error_bound * other.error_bound
            + 4.0 * UNIT_ROUNDOFF * v.norm();
        Certified::new(v, err)
    }
}

/// `ζ(σ)` for real `σ > 1` by Euler–Maclaurin summation.
///
/// The remainder after the last Bernoulli term is bounded by the first
/// omitted term, which holds for real `σ` because every derivative of
/// `x^{-σ}` is monotone of constant sign.
pub fn zeta(sigma: f64) -> Result<Certified> {
    if !(sigma > 1.0) {
        return invalid(format!("zeta needs σ > 1, got {sigma}"));
    }
    const N: usize = 20;
    const TERMS: usize = 8;
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|n| (n as f64).powf(-sigma)).sum();
    sum += nf.powf(1.0 - sigma) / (sigma - 1.0) + nf.powf(-sigma) / 2.0;
    let correction = |j: usize| {
        // B_{2j}/(2j)! · σ(σ+1)...(σ+2j-2) · N^{-σ-2j+1}
        let b = rational_to_f64(&bernoulli_number(2 * j));
        let mut c = b;
        for i in 0..2 * j - 1 {
            c *= (sigma + i as f64) / (i as f64 + 1.0);
        }
        c / (2 * j) as f64 * nf.powf(-sigma - 2.0 * j as f64 + 1.0)
    };
    for j in 1..=TERMS {
        sum += correction(j);
    }
    let err = correction(TERMS + 1).abs() + 64.0 * UNIT_ROUNDOFF * sum;
    Ok(Certified::real(sum, err))
}

/// A pair `(f, g)` with `weight(g) = weight(f) + 8` on the same level.
#[derive(Clone, Debug)]
pub struct RankinSpec {
    f: Eigenform,
    g: Eigenform,
}

impl RankinSpec {
    pub fn new(f: Eigenform, g: Eigenform) -> Result<Self> {
        if g.weight() != f.weight() + 8 {
            return invalid(format!(
                "weights must differ by 8: got {} and {}",
                f.weight(),
                g.weight()
            ));
        }
        if f.level() != g.level() {
            return invalid(format!("levels differ: {} and {}", f.level(), g.level()));
        }
        if f.weight() % 2 == 1 {
            return invalid("weights must be even");
        }
        if !arith::is_squarefree(f.level()) {
            return invalid(format!("level {} is not squarefree", f.level()));
        }
        modforms::deligne_spot_check(&f, 100)?;
        modforms::deligne_spot_check(&g, 100)?;
        Ok(RankinSpec { f, g })
    }

    pub fn f(&self) -> &Eigenform {
        &self.f
    }

    pub fn g(&self) -> &Eigenform {
        &self.g
    }

    /// Half the weight of `f`.
    pub fn k(&self) -> u32 {
        self.f.weight() / 2
    }

    pub fn level(&self) -> u64 {
        self.f.level()
    }

    /// Largest `n` for which both coefficient lists are available.
    pub fn order(&self) -> usize {
        self.f.order().min(self.g.order())
    }

    fn coefficient_tolerance(&self) -> f64 {
        let tol = |e: &Eigenform| match e.precision() {
            Precision::Exact => 0.0,
            Precision::Approximate { rel_tol } => rel_tol,
        };
        tol(&self.f) + tol(&self.g)
    }

    /// `λ_f(n) λ_g(n)` with `λ(n) = a(n) n^{-(w-1)/2}`, for `n = 1..=m`.
    fn normalized_products(&self, m: usize) -> Vec<f64> {
        let (wf, wg) = (self.f.weight() as f64, self.g.weight() as f64);
        (1..=m)
            .into_par_iter()
            .map(|n| {
                let nf = n as f64;
                let lf = self.f.a_f64(n) / nf.powf((wf - 1.0) / 2.0);
                let lg = self.g.a_f64(n) / nf.powf((wg - 1.0) / 2.0);
                lf * lg
            })
            .collect()
    }

    /// Local factor `L_p(s)` at a prime `p ‖ N` where both forms are
    /// Steinberg at `p`: `(1 - p^{-2s})^{-1} (1 - ε_f ε_g p^{-1-s})^{-1}`.
    pub fn steinberg_local_factor(&self, p: u64, s: f64) -> Result<Complex64> {
        let ef = modforms::atkin_lehner_sign(&self.f, p)?;
        let eg = modforms::atkin_lehner_sign(&self.g, p)?;
        let pf = p as f64;
        let x = pf.powf(-s);
        let sign = (ef * eg) as f64;
        Ok(Complex64::new(1.0 / ((1.0 - x * x) * (1.0 - sign * x / pf)), 0.0))
    }
}

/// Deterministic chunked sum with its floating-point error bound
/// `(chunk + #chunks + 2) · u · Σ|t|`.
fn chunked_sum(terms: &[f64]) -> (f64, f64) {
    let partial: Vec<(f64, f64)> = terms
        .par_chunks(SUM_CHUNK)
        .map(|c| (c.iter().sum::<f64>(), c.iter().map(|t| t.abs()).sum::<f64>()))
        .collect();
    let sum: f64 = partial.iter().map(|p| p.0).sum();
    let abs: f64 = partial.iter().map(|p| p.1).sum();
    let depth = SUM_CHUNK.min(terms.len()) + partial.len() + 2;
    (sum, depth as f64 * UNIT_ROUNDOFF * abs)
}

/// Rigorous bound on `Σ_{n>M} d(n)^2 n^{-σ}` for `σ > 1`, `M ≥ 1`.
///
/// Two integral comparisons are used and the smaller result is returned:
/// `d(n)^2 ≤ C_δ n^δ` (with the exact product constant for `d^2`), and
/// `d(n)^2 ≤ d_4(n)` with `Σ_{n≤x} d_4(n) ≤ x (1 + log x)^3` and partial summation.
pub fn divisor_square_tail(m: usize, sigma: f64) -> f64 {
    assert!(sigma > 1.0 && m >= 1);
    let mf = m as f64;
    // partial summation: ≤ σ ∫_M^∞ (1 + log x)^3 x^{-σ} dx
    let t = sigma - 1.0;
    let l = mf.ln();
    let mut poly = 0.0;
    let mut fact = 1.0;
    for j in 0..=3 {
        poly += fact * (1.0 + l).powi(3 - j) / t.powi(j + 1);
        fact *= (3 - j) as f64;
    }
    let via_d4 = sigma * (-t * l).exp() * poly;

    let mut best = via_d4;
    for step in 1..40 {
        let delta = t * step as f64 / 40.0;
        if delta > 2.0 {
            break;
        }
        let c = divisor_square_constant(delta);
        // Σ_{n>M} n^{δ-σ} ≤ ∫_M^∞ x^{δ-σ} dx
        let bound = c * mf.powf(delta - t) / (t - delta);
        best = best.min(bound);
    }
    best * (1.0 + 1e-12)
}

/// Smallest `C` with `d(n)^2 ≤ C n^δ` for all `n`.
fn divisor_square_constant(delta: f64) -> f64 {
    // (a+1)^2 ≤ 4^a, so primes with p^δ ≥ 4 contribute a factor 1
    let limit = 4f64.powf(1.0 / delta).ceil();
    if limit > 1e7 {
        return f64::INFINITY;
    }
    arith::primes_up_to(limit as u64)
        .into_iter()
        .map(|p| {
            let pd = (p as f64).powf(delta);
            let mut best = 1.0f64;
            let mut a = 1;
            loop {
                let v = ((a + 1) * (a + 1)) as f64 / pd.powi(a);
                best = best.max(v);
                if v < 1.0 && a as f64 * delta * (p as f64).ln() > 4.0 {
                    break;
                }
                a += 1;
            }
            best
        })
        .product()
}

fn check_truncation(spec: &RankinSpec, m: usize) -> Result<()> {
    if m == 0 {
        return invalid("truncation M must be at least 1");
    }
    if m > spec.order() {
        return Err(Error::Truncation { needed: m, available: spec.order() });
    }
    Ok(())
}

/// `Σ_{n≤M} λ_f(n)λ_g(n) n^{-s}` with a bound covering the tail, rounding
/// and any coefficient tolerance.
fn partial_rankin_sum(spec: &RankinSpec, s: f64, m: usize) -> Certified {
    let prods = spec.normalized_products(m);
    let terms: Vec<f64> = prods
        .iter()
        .enumerate()
        .map(|(i, p)| p * ((i + 1) as f64).powf(-s))
        .collect();
    let (sum, round) = chunked_sum(&terms);
    let abs: f64 = terms.iter().map(|t| t.abs()).sum();
    // each term carries a few roundings from the power and quotient evaluations
    let per_term = 16.0 * UNIT_ROUNDOFF * abs;
    let coeff = 4.0 * spec.coefficient_tolerance() * abs;
    let tail = divisor_square_tail(m, s);
    Certified::real(sum, tail + round + per_term + coeff)
}

/// `L(s, f ⊗ ḡ) ≈ ζ(2s) Σ_{n≤M} a(n) b̄(n) n^{-(s+2k+3)}`.
///
/// The tail uses Deligne's bound `|a(n)b(n)| ≤ d(n)^2 n^{(w_f+w_g-2)/2}`.
pub fn rankin_dirichlet(spec: &RankinSpec, s: f64, m: usize) -> Result<Certified> {
    if !(s > 1.0) {
        return invalid(format!("the Dirichlet series needs s > 1, got {s}"));
    }
    check_truncation(spec, m)?;
    let z = zeta(2.0 * s)?;
    Ok(z.mul(&partial_rankin_sum(spec, s, m)))
}

/// Finite Euler product `Π_{p≤P} Π_{i,j} (1 - α_i(p) β_j(p) p^{-s})^{-1}`.
///
/// Ramified primes `p ≤ P` must be given a local factor value in
/// `ramified`; the tail over `p > P` satisfies
/// `|log L_p| ≤ 4 p^{-s}/(1 - p^{-s})`.
pub fn rankin_euler(
    spec: &RankinSpec,
    s: f64,
    p_max: u64,
    ramified: &[(u64, Complex64)],
) -> Result<Certified> {
    if !(s > 1.0) {
        return invalid(format!("the Euler product needs s > 1, got {s}"));
    }
    let primes = arith::primes_up_to(p_max);
    if let Some(&p) = primes.last() {
        if p as usize > spec.order() {
            return Err(Error::Truncation { needed: p as usize, available: spec.order() });
        }
    }
    let mut factors = Vec::with_capacity(primes.len());
    for &p in &primes {
        if spec.level() % p == 0 {
            match ramified.iter().find(|(q, _)| *q == p) {
                Some((_, v)) => factors.push(*v),
                None => {
                    return invalid(format!("no local factor supplied for ramified prime {p}"))
                }
            }
            continue;
        }
        let sf = modforms::satake_params(&spec.f, p)?;
        let sg = modforms::satake_params(&spec.g, p)?;
        let x = (p as f64).powf(-s);
        let mut denom = Complex64::new(1.0, 0.0);
        for a in [sf.alpha, sf.beta] {
            for b in [sg.alpha, sg.beta] {
                denom *= Complex64::new(1.0, 0.0) - a * b * x;
            }
        }
        factors.push(denom.inv());
    }
    let value: Complex64 = factors.iter().product();
    let n = factors.len() as f64;
    // per factor: Satake roots carry ~4u error each, the four-fold product
    // and inverse ~12u more; the running product adds u per step
    let satake_tol = spec.coefficient_tolerance();
    let rounding = (n * (24.0 * UNIT_ROUNDOFF + 4.0 * satake_tol) + n * UNIT_ROUNDOFF) * value.norm();
    let big_p = p_max.max(1) as f64;
    let x = big_p.powf(-s);
    let log_tail = 4.0 / (1.0 - x) * big_p.powf(1.0 - s) / (s - 1.0);
    let tail = value.norm() * log_tail.exp_m1();
    Ok(Certified::new(value, tail + rounding * (1.0 + log_tail.exp_m1())))
}

/// `(4π)^{-(2k+7)} Γ(2k+7) Σ_{n≤M} a(n) b̄(n) n^{-(2k+7)}`, the value of the
/// unfolded integral of `f ḡ E_8 y^{2k+8}` over the fundamental domain.
pub fn closed_form_a(spec: &RankinSpec, m: usize) -> Result<Certified> {
    check_truncation(spec, m)?;
    let k = spec.k();
    // a(n)b(n) n^{-(2k+7)} = λ_f λ_g n^{-4}
    let sum = partial_rankin_sum(spec, 4.0, m);
    Ok(sum.scale(gamma_factor(k)))
}

/// `(4π)^{-(2k+7)} (2k+6)!`, with the factorial taken exactly before rounding.
pub fn gamma_factor(k: u32) -> f64 {
    let fact = rational_to_f64(&crate::series::int(arith::factorial(2 * k + 6)));
    let four_pi = 4.0 * std::f64::consts::PI;
    (fact.ln() - (2 * k + 7) as f64 * four_pi.ln()).exp()
}

/// `[SL_2(Z_p) : K_0(p)]^{-1} p^4 = p^4 / (p + 1)`, the ramified normalization
/// attached to a prime dividing a squarefree level.
pub fn ramified_normalization(p: u64) -> f64 {
    (p as f64).powi(4) / (p as f64 + 1.0)
}

/// Outcome of a non-vanishing certification.
#[derive(Clone, Debug, Serialize)]
pub struct NonvanishingReport {
    pub s: f64,
    pub terms: usize,
    pub value: Certified,
    /// `|value| - error_bound`; positive exactly when the certificate succeeds.
    pub margin: f64,
    pub nonzero: bool,
    pub diagnostic: Option<String>,
}

/// Certifies `L(s, f ⊗ ḡ) ≠ 0` from the Dirichlet series using all stored
/// coefficients (at most `10^4`).
pub fn certify_nonvanishing(spec: &RankinSpec, s: f64) -> Result<NonvanishingReport> {
    certify_nonvanishing_with(spec, s, spec.order().min(10_000))
}

pub fn certify_nonvanishing_with(spec: &RankinSpec, s: f64, m: usize) -> Result<NonvanishingReport> {
    let value = rankin_dirichlet(spec, s, m)?;
    let margin = value.value.norm() - value.error_bound;
    let nonzero = margin > 0.0;
    let diagnostic = (!nonzero).then(|| {
        format!(
            "inconclusive: error bound {:e} is not below |value| = {:e} with {m} terms",
            value.error_bound,
            value.value.norm()
        )
    });
    Ok(NonvanishingReport { s, terms: m, value, margin, nonzero, diagnostic })
}
