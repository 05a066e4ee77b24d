//! Elliptic modular forms: Eisenstein series, level-one Hecke eigenforms,
//! Hecke operators, Satake parameters and the symmetrized local polynomial.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::series::{self, bernoulli_number, int, rational_to_f64, QSeries, Rational};

/// How far an eigenform's stored coefficients can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Precision {
    Exact,
    /// Coefficients are rational approximations; `rel_tol` bounds the relative
    /// residual of the defining eigenvector equation.
    Approximate { rel_tol: f64 },
}

/// A normalized Hecke eigenform `Σ a(n) q^n` with `a(1) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenform {
    weight: u32,
    level: u64,
    coeffs: QSeries,
    label: String,
    precision: Precision,
}

impl Eigenform {
    pub fn new(
        weight: u32,
        level: u64,
        coeffs: QSeries,
        label: impl Into<String>,
        precision: Precision,
    ) -> Result<Self> {
        if level == 0 {
            return invalid("level must be positive");
        }
        if coeffs.order() < 1 {
            return invalid("an eigenform needs at least a(1)");
        }
        if !coeffs.coeffs()[0].is_zero() {
            return invalid("eigenform must be cuspidal (a(0) = 0)");
        }
        if !coeffs.coeffs()[1].is_one() {
            return invalid(format!("eigenform not normalized: a(1) = {}", coeffs.coeffs()[1]));
        }
        Ok(Eigenform { weight, level, coeffs, label: label.into(), precision })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision == Precision::Exact
    }

    pub fn coeffs(&self) -> &QSeries {
        &self.coeffs
    }

    /// Largest `n` with `a(n)` stored.
    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    pub fn a(&self, n: usize) -> &Rational {
        &self.coeffs.coeffs()[n]
    }

    pub fn a_f64(&self, n: usize) -> f64 {
        rational_to_f64(self.a(n))
    }

    pub fn truncate(&self, order: usize) -> Eigenform {
        Eigenform { coeffs: self.coeffs.truncate(order), ..self.clone() }
    }
}

fn check_even_weight(k: u32) -> Result<()> {
    if k < 4 || k % 2 == 1 {
        return invalid(format!("weight must be even and at least 4, got {k}"));
    }
    Ok(())
}

/// Normalized level-one Eisenstein series `1 - (2k/B_k) Σ σ_{k-1}(n) q^n`.
pub fn eisenstein_q(k: u32, order: usize) -> Result<QSeries> {
    check_even_weight(k)?;
    let factor = -int(2 * k as i64) / bernoulli_number(k as usize);
    let sigma = arith::divisor_sums(k - 1, order);
    Ok(QSeries::from_fn(order, |n| {
        if n == 0 {
            Rational::one()
        } else {
            &factor * Rational::from_integer(sigma[n].clone())
        }
    }))
}

/// `Δ = (E4^3 - E6^2) / 1728`.
pub fn delta_q(order: usize) -> QSeries {
    let e4 = eisenstein_q(4, order).expect("weight 4");
    let e6 = eisenstein_q(6, order).expect("weight 6");
    (&e4.pow(3) - &e6.pow(2)).scale(&series::rat(1, 1728))
}

/// Dimension of the space of level-one cusp forms of even weight `k`.
pub fn cusp_dimension_level1(k: u32) -> usize {
    if k % 2 == 1 || k < 12 {
        return 0;
    }
    let d = (k / 12) as usize;
    if k % 12 == 2 {
        d - 1
    } else {
        d
    }
}

/// `E_4^a E_6^b` of weight `w` (w = 0 or w ≥ 4 even, w ≠ 2).
fn eisenstein_monomial(w: u32, order: usize) -> QSeries {
    if w == 0 {
        return QSeries::one(order);
    }
    let (a, b) = if w % 4 == 0 { (w / 4, 0) } else { ((w - 6) / 4, 1) };
    let e4 = eisenstein_q(4, order).expect("weight 4");
    let e6 = eisenstein_q(6, order).expect("weight 6");
    &e4.pow(a) * &e6.pow(b)
}

/// Reduced row echelon form of a list of series, seen as coefficient vectors.
/// Returns the reduced rows and their pivot exponents.
pub fn echelon(basis: &[QSeries]) -> Result<(Vec<QSeries>, Vec<usize>)> {
    let order = basis.iter().map(QSeries::order).min().unwrap_or(0);
    let mut rows: Vec<Vec<Rational>> =
        basis.iter().map(|s| s.coeffs()[..=order].to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..=order {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for c in col..=order {
                    let t = &rows[r][c] * &f;
                    rows[i][c] -= t;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if r < rows.len() {
        return invalid("basis series are linearly dependent at the available order");
    }
    Ok((rows.into_iter().map(QSeries::new).collect(), pivots))
}

/// `T_p` on a q-expansion of weight `weight` and level `level` (requires `p ∤ level`).
pub fn hecke_apply(weight: u32, p: u64, s: &QSeries, level: u64) -> Result<QSeries> {
    if !arith::is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if level % p == 0 {
        return invalid(format!("T_{p} requires p not dividing the level {level}"));
    }
    let p = p as usize;
    let out_order = s.order() / p;
    if out_order < 1 {
        return Err(Error::Truncation { needed: p, available: s.order() });
    }
    let pk = int(BigInt::from(p).pow(weight - 1));
    let c = s.coeffs();
    Ok(QSeries::from_fn(out_order, |n| {
        let mut v = c[p * n].clone();
        if n % p == 0 {
            v += &pk * &c[n / p];
        }
        v
    }))
}

/// Matrix of `T_p` on the span of echelonized `rows`: `T_p(rows[i]) = Σ_j M[i][j] rows[j]`.
pub fn hecke_matrix(
    rows: &[QSeries],
    pivots: &[usize],
    weight: u32,
    p: u64,
    level: u64,
) -> Result<Matrix> {
    let mut m = Vec::with_capacity(rows.len());
    for row in rows {
        let t = hecke_apply(weight, p, row, level)?;
        if pivots.iter().any(|&c| c > t.order()) {
            return Err(Error::Truncation {
                needed: p as usize * pivots.iter().max().copied().unwrap_or(0),
                available: row.order(),
            });
        }
        let coords: Vec<Rational> = pivots.iter().map(|&c| t.coeffs()[c].clone()).collect();
        // the image must lie in the span
        let mut back = QSeries::zero(t.order());
        for (c, r) in coords.iter().zip(rows) {
            back = &back + &r.truncate(t.order()).scale(c);
        }
        if back != t {
            return Err(Error::Validation(format!("T_{p} does not preserve the given span")));
        }
        m.push(coords);
    }
    Ok(m)
}

fn label_suffix(i: usize) -> String {
    let mut s = String::new();
    let mut i = i;
    loop {
        s.insert(0, (b'a' + (i % 26) as u8) as char);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s
}

const EIGEN_BITS: usize = 320;
const EIGEN_TOL: f64 = 1e-20;

/// Normalized Hecke eigenforms of level one and the given weight, through `q^order`.
///
/// The cusp space is spanned by `Δ^i E_{k-12i}`; after echelonizing, the
/// coordinates of a form are its first `d` coefficients, and eigenforms are
/// eigenvectors of the transposed `T_2` matrix. One-dimensional spaces are
/// handled exactly; larger ones use Newton-refined roots of the exact
/// characteristic polynomial and carry [`Precision::Approximate`].
pub fn level1_eigenforms(weight: u32, order: usize) -> Result<Vec<Eigenform>> {
    if weight % 2 == 1 || weight < 4 {
        return invalid(format!("weight must be even and at least 4, got {weight}"));
    }
    let d = cusp_dimension_level1(weight);
    if d == 0 {
        return Ok(Vec::new());
    }
    let work = order.max(2 * d).max(2);
    let delta = delta_q(work);
    let mut basis = Vec::with_capacity(d);
    let mut dpow = delta.clone();
    for i in 1..=d {
        basis.push(&dpow * &eisenstein_monomial(weight - 12 * i as u32, work));
        dpow = &dpow * &delta;
    }
    let (rows, pivots) = echelon(&basis)?;
    debug_assert_eq!(pivots, (1..=d).collect::<Vec<_>>());

    if d == 1 {
        let f = rows.into_iter().next().expect("one row").truncate(order);
        return Ok(vec![Eigenform::new(
            weight,
            1,
            f,
            format!("1.{weight}.a"),
            Precision::Exact,
        )?]);
    }

    let m = hecke_matrix(&rows, &pivots, weight, 2, 1)?;
    let mt = linalg::transpose(&m);
    let poly = linalg::charpoly(&mt);
    let mut approx: Vec<f64> = linalg::roots_f64(&poly).iter().map(|z| z.re).collect();
    approx.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));

    let mut forms = Vec::with_capacity(d);
    for (idx, start) in approx.into_iter().enumerate() {
        let lambda = linalg::newton_refine(&poly, start, EIGEN_BITS)
            .ok_or_else(|| Error::Certification("Newton refinement failed".into()))?;
        let shifted: Matrix = mt
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, x)| if i == j { x - &lambda } else { x.clone() })
                    .collect()
            })
            .collect();
        // fix v_1 = a(1) = 1 and solve the remaining rows
        let sub: Matrix = shifted[1..].iter().map(|r| r[1..].to_vec()).collect();
        let rhs: Vec<Rational> = shifted[1..].iter().map(|r| -r[0].clone()).collect();
        let tail = linalg::solve(&sub, &rhs)
            .ok_or_else(|| Error::Certification("singular eigenvector system".into()))?;
        let mut v = vec![Rational::one()];
        v.extend(tail.iter().map(|x| linalg::round_to_bits(x, EIGEN_BITS)));

        let residual = shifted
            .iter()
            .map(|r| {
                let s = r.iter().zip(&v).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
                rational_to_f64(&s.abs())
            })
            .fold(0.0, f64::max);
        let scale = mt
            .iter()
            .map(|r| r.iter().map(|x| rational_to_f64(&x.abs())).sum::<f64>())
            .fold(0.0, f64::max)
            * v.iter().map(|x| rational_to_f64(&x.abs())).fold(0.0, f64::max);
        let rel = residual / scale.max(f64::MIN_POSITIVE);
        if rel > EIGEN_TOL {
            return Err(Error::Certification(format!(
                "eigenvector residual {rel:e} exceeds {EIGEN_TOL:e}"
            )));
        }
        let mut f = QSeries::zero(order);
        for (c, r) in v.iter().zip(&rows) {
            f = &f + &r.truncate(order).scale(c);
        }
        forms.push(Eigenform::new(
            weight,
            1,
            f,
            format!("1.{weight}.{}", label_suffix(idx)),
            Precision::Approximate { rel_tol: EIGEN_TOL },
        )?);
    }
    Ok(forms)
}

/// Checks `T_p f = a(p) f` for every prime `p ≤ max_p` with `p ∤ N`, using the
/// stored range of `f`.
pub fn certify_hecke(f: &Eigenform, max_p: u64) -> Result<()> {
    for p in arith::primes_up_to(max_p) {
        if f.level() % p == 0 || (p as usize) > f.order() / 2 {
            continue;
        }
        let t = hecke_apply(f.weight(), p, f.coeffs(), f.level())?;
        let ap = f.a(p as usize);
        for n in 0..=t.order() {
            let lhs = &t.coeffs()[n];
            let rhs = ap * f.a(n);
            let ok = match f.precision() {
                Precision::Exact => *lhs == rhs,
                Precision::Approximate { rel_tol } => {
                    let diff = rational_to_f64(&(lhs - &rhs).abs());
                    let pk = (p as f64).powi(f.weight() as i32 - 1);
                    let mut scale = rational_to_f64(&f.a(p as usize * n).abs());
                    if n % p as usize == 0 {
                        scale += pk * rational_to_f64(&f.a(n / p as usize).abs());
                    }
                    scale += rational_to_f64(&rhs.abs());
                    diff <= 1e3 * rel_tol * scale.max(1.0)
                }
            };
            if !ok {
                return Err(Error::Validation(format!(
                    "{}: T_{p} eigen-relation fails at q^{n}",
                    f.label()
                )));
            }
        }
    }
    Ok(())
}

/// A violated multiplicativity relation `a(mn) = a(m) a(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativityViolation {
    pub m: usize,
    pub n: usize,
}

/// Checks `a(mn) = a(m)a(n)` for coprime `m, n ≥ 2` with `mn ≤ limit`
/// (skipping pairs that share a prime with the level), and the prime-power
/// recursion `a(p^{l+1}) = a(p)a(p^l) - p^{w-1}a(p^{l-1})` for `p ∤ N`.
/// Approximate forms are compared with their relative tolerance.
pub fn check_multiplicativity(
    f: &Eigenform,
    limit: usize,
) -> std::result::Result<(), MultiplicativityViolation> {
    let limit = limit.min(f.order());
    let level = f.level() as i64;
    let close = |lhs: &Rational, rhs: &Rational, scale: f64| match f.precision() {
        Precision::Exact => lhs == rhs,
        Precision::Approximate { rel_tol } => {
            rational_to_f64(&(lhs - rhs).abs()) <= 1e3 * rel_tol * scale.max(1.0)
        }
    };
    for m in 2..=limit {
        if arith::gcd(m as i64, level) != 1 {
            continue;
        }
        for n in m + 1..=limit / m {
            if arith::gcd(m as i64, n as i64) != 1 || arith::gcd(n as i64, level) != 1 {
                continue;
            }
            let rhs = f.a(m) * f.a(n);
            let scale = rational_to_f64(&rhs.abs()) + f.a_f64(m * n).abs();
            if !close(f.a(m * n), &rhs, scale) {
                return Err(MultiplicativityViolation { m, n });
            }
        }
    }
    for p in arith::primes_up_to(limit as u64) {
        if f.level() % p == 0 {
            continue;
        }
        let p = p as usize;
        let pk = int(BigInt::from(p).pow(f.weight() - 1));
        let mut q = p;
        while q * p <= limit {
            let rhs = f.a(p) * f.a(q) - &pk * f.a(q / p);
            let scale = rational_to_f64(&(f.a(p) * f.a(q)).abs())
                + rational_to_f64(&(&pk * f.a(q / p)).abs());
            if !close(f.a(q * p), &rhs, scale) {
                return Err(MultiplicativityViolation { m: p, n: q });
            }
            q *= p;
        }
    }
    Ok(())
}

/// Deligne's bound `|a(p)| ≤ 2 p^{(w-1)/2}` for unramified primes up to `max_p`.
pub fn deligne_spot_check(f: &Eigenform, max_p: u64) -> Result<()> {
    for p in arith::primes_up_to(max_p.min(f.order() as u64)) {
        if f.level() % p == 0 {
            continue;
        }
        let bound = 2.0 * (p as f64).powf((f.weight() as f64 - 1.0) / 2.0);
        let ap = f.a_f64(p as usize).abs();
        if ap > bound * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "{}: |a({p})| = {ap:e} exceeds the Deligne bound {bound:e}",
                f.label()
            )));
        }
    }
    Ok(())
}

/// Eisenstein series of weight `k` attached to the cusp ∞ of `Γ0(N)`, `N` squarefree.
///
/// Built by applying `F ↦ (p^k F(pτ) - F(τ)) / (p^k - 1)` to `E_k` for each `p | N`.
pub fn gamma0_eisenstein_infty(k: u32, level: u64, order: usize) -> Result<QSeries> {
    check_even_weight(k)?;
    if !arith::is_squarefree(level) {
        return invalid(format!("level {level} is not squarefree"));
    }
    let mut e = eisenstein_q(k, order)?;
    for (p, _) in arith::factorize(level) {
        let pk = int(BigInt::from(p).pow(k));
        let lifted = e.substitute_power(p as usize).truncate(order);
        e = (&lifted.scale(&pk) - &e).scale(&(pk - Rational::one()).recip());
    }
    Ok(e)
}

/// Roots `α, β` of `X^2 - a(p) p^{-(w-1)/2} X + 1` at an unramified prime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SatakePair {
    pub p: u64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

pub fn satake_params(f: &Eigenform, p: u64) -> Result<SatakePair> {
    if !arith::is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if f.level() % p == 0 {
        return invalid(format!("p = {p} is ramified for level {}", f.level()));
    }
    if p as usize > f.order() {
        return Err(Error::Truncation { needed: p as usize, available: f.order() });
    }
    let t = f.a_f64(p as usize) / (p as f64).powf((f.weight() as f64 - 1.0) / 2.0);
    let (alpha, beta) = if t.abs() <= 2.0 {
        // complex-conjugate pair on the unit circle; αβ = (t^2 + 4 - t^2)/4 = 1
        let a = Complex64::new(t / 2.0, (1.0 - t * t / 4.0).max(0.0).sqrt());
        (a, a.conj())
    } else {
        let a = Complex64::new((t + t.signum() * (t * t - 4.0).sqrt()) / 2.0, 0.0);
        (a, a.inv())
    };
    Ok(SatakePair { p, alpha, beta })
}

/// `Σ_{j=0}^{v} α^{v-2j}`: the symmetrized local polynomial `X^{-v} + X^{-v+2} + ... + X^v`.
pub fn tilde_f(v: u32, alpha: Complex64) -> Complex64 {
    assert!(alpha != Complex64::zero(), "alpha must be nonzero");
    (0..=v).map(|j| alpha.powi(v as i32 - 2 * j as i32)).sum()
}

/// The unique normalized newform in `S_8(Γ0(2))`, `η(τ)^8 η(2τ)^8`.
pub fn level2_weight8_newform(order: usize) -> Result<Eigenform> {
    let f = series::eta_quotient(&[(1, 8), (2, 8)], order)?;
    Eigenform::new(8, 2, f, "2.8.a.a", Precision::Exact)
}

/// The unique normalized newform in `S_16(Γ0(2))`.
///
/// `S_16(Γ0(2)) = f_8 · M_8(Γ0(2))` is spanned by `f_8 E_8(τ)`, `f_8 E_8(2τ)` and
/// `f_8^2`. The oldforms carry the `T_3`-eigenvalue of the level-one weight-16
/// eigenform twice; the newform is the eigenvector for the remaining root.
pub fn level2_weight16_newform(order: usize) -> Result<Eigenform> {
    let work = order.max(12);
    let f8 = level2_weight8_newform(work)?.coeffs().clone();
    let e8 = eisenstein_q(8, work)?;
    let e8_2 = e8.substitute_power(2).truncate(work);
    let basis = [&f8 * &e8, &f8 * &e8_2, &f8 * &f8];
    let (rows, pivots) = echelon(&basis)?;
    let m = hecke_matrix(&rows, &pivots, 16, 3, 2)?;
    let mt = linalg::transpose(&m);
    let poly = linalg::charpoly(&mt);

    let old = level1_eigenforms(16, 3)?;
    let lambda_old = old[0].a(3).clone();
    let (q1, r1) = linalg::poly_div_linear(&poly, &lambda_old);
    let (q2, r2) = linalg::poly_div_linear(&q1, &lambda_old);
    if !r1.is_zero() || !r2.is_zero() || q2.len() != 2 {
        return Err(Error::Validation(
            "T_3 on S_16(Γ0(2)) lacks the expected double old eigenvalue".into(),
        ));
    }
    let lambda_new = -&q2[0] / &q2[1];
    if lambda_new == lambda_old {
        return Err(Error::Validation("new and old T_3 eigenvalues coincide".into()));
    }
    let n = mt.len();
    let shifted: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { &mt[i][j] - &lambda_new } else { mt[i][j].clone() })
                .collect()
        })
        .collect();
    if pivots[0] != 1 {
        return Err(Error::Validation("unexpected echelon pivots".into()));
    }
    let sub: Matrix = shifted[1..].iter().map(|r| r[1..].to_vec()).collect();
    let rhs: Vec<Rational> = shifted[1..].iter().map(|r| -r[0].clone()).collect();
    let tail = linalg::solve(&sub, &rhs)
        .ok_or_else(|| Error::Validation("singular newform eigenvector system".into()))?;
    let mut v = vec![Rational::one()];
    v.extend(tail);
    let mut g = QSeries::zero(order);
    for (c, r) in v.iter().zip(&rows) {
        g = &g + &r.truncate(order).scale(c);
    }
    Eigenform::new(16, 2, g, "2.16.a.a", Precision::Exact)
}

/// Atkin–Lehner sign at `p ‖ N` of a newform, read off from `a(p) = -ε p^{w/2-1}`.
pub fn atkin_lehner_sign(f: &Eigenform, p: u64) -> Result<i32> {
    if f.level() % p != 0 || (f.level() / p) % p == 0 {
        return invalid(format!("{p} does not exactly divide the level {}", f.level()));
    }
    let ap = f.a(p as usize);
    let pk = int(BigInt::from(p).pow(f.weight() / 2 - 1));
    if *ap == pk {
        Ok(-1)
    } else if *ap == -pk {
        Ok(1)
    } else {
        Err(Error::Validation(format!(
            "{}: a({p}) = {ap} is not ±p^(w/2-1); not a newform with p ‖ N",
            f.label()
        )))
    }
}
