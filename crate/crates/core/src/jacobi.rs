//! Index-one Jacobi forms, Cohen numbers, the Saito–Kurokawa (Maass) lift to
//! degree-2 Siegel forms, and the Rankin convolution over reduced binary forms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::binary;
use crate::error::{invalid, Error, Result};
use crate::lattice::{self, Builtin};
use crate::lseries::Certified;
use crate::modforms::eisenstein_q;
use crate::series::{bernoulli_number, bernoulli_polynomial, int, rat, rational_to_f64, QSeries, Rational};

/// `H(r, N)`: `ζ(1-2r)` at `N = 0`, zero unless `(-1)^r N ≡ 0, 1 (mod 4)`, and
/// otherwise `L(1-r, χ_{D0}) Σ_{d|f} μ(d) χ_{D0}(d) d^{r-1} σ_{2r-1}(f/d)` where
/// `(-1)^r N = D0 f^2` with `D0` a fundamental discriminant.
pub fn cohen_h(r: u32, n: u64) -> Result<Rational> {
    if r < 2 {
        return invalid(format!("Cohen numbers are implemented for r ≥ 2, got {r}"));
    }
    if n == 0 {
        return Ok(-bernoulli_number(2 * r as usize) / int(2 * r as i64));
    }
    let disc = if r % 2 == 0 { n as i64 } else { -(n as i64) };
    if disc.rem_euclid(4) > 1 {
        return Ok(Rational::zero());
    }
    let (d0, f) = arith::fundamental_discriminant(disc);
    let l = dirichlet_l_negative(r, d0);
    let mut sum = BigInt::zero();
    for d in arith::divisors(f) {
        let mu = arith::moebius(d);
        if mu == 0 {
            continue;
        }
        let chi = arith::kronecker(d0, d);
        if chi == 0 {
            continue;
        }
        let sigma: BigInt = arith::divisors(f / d)
            .into_iter()
            .map(|e| BigInt::from(e).pow(2 * r - 1))
            .sum();
        sum += BigInt::from(mu * chi) * BigInt::from(d).pow(r - 1) * sigma;
    }
    Ok(l * Rational::from_integer(sum))
}

/// `L(1-r, χ_D) = -B_{r,χ}/r` with `B_{r,χ} = |D|^{r-1} Σ_{a=1}^{|D|} χ(a) B_r(a/|D|)`.
fn dirichlet_l_negative(r: u32, d: i64) -> Rational {
    let m = d.unsigned_abs();
    let mut acc = Rational::zero();
    for a in 1..=m {
        let chi = arith::kronecker(d, a);
        if chi != 0 {
            acc += bernoulli_polynomial(r as usize, &rat(a as i64, m as i64)) * int(chi);
        }
    }
    let b = acc * int(BigInt::from(m).pow(r - 1));
    -b / int(r as i64)
}

/// Index-one Jacobi form `Σ c(4n - r^2) q^n ζ^r`, stored by discriminant.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiForm1 {
    weight: u32,
    coeffs: Vec<Rational>,
}

impl JacobiForm1 {
    /// `coeffs[D]` for `0 ≤ D ≤ max_D`; entries at `D ≡ 1, 2 (mod 4)` must vanish.
    pub fn new(weight: u32, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("a Jacobi form needs c(0)");
        }
        for (d, c) in coeffs.iter().enumerate() {
            if d % 4 == 1 || d % 4 == 2 {
                if !c.is_zero() {
                    return invalid(format!("c({d}) must vanish for D ≡ 1, 2 mod 4"));
                }
            }
        }
        Ok(JacobiForm1 { weight, coeffs })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn max_d(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c(D)`, zero for `D < 0`.
    pub fn c(&self, d: i64) -> Result<Rational> {
        if d < 0 {
            return Ok(Rational::zero());
        }
        self.coeffs
            .get(d as usize)
            .cloned()
            .ok_or(Error::Truncation { needed: d as usize, available: self.max_d() })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Product with an elliptic form `Σ a(m) q^m` of weight `w`:
    /// the coefficient at `D` is `Σ_m a(m) c(D - 4m)`.
    pub fn mul_elliptic(&self, f: &QSeries, w: u32) -> Result<JacobiForm1> {
        let max_d = self.max_d();
        if f.order() < max_d / 4 {
            return Err(Error::Truncation { needed: max_d / 4, available: f.order() });
        }
        let coeffs = (0..=max_d)
            .map(|d| {
                let mut acc = Rational::zero();
                for m in 0..=d / 4 {
                    acc += &f.coeffs()[m] * &self.coeffs[d - 4 * m];
                }
                acc
            })
            .collect();
        Ok(JacobiForm1 { weight: self.weight + w, coeffs })
    }

    fn combine(&self, other: &JacobiForm1, a: &Rational, b: &Rational) -> Result<JacobiForm1> {
        if self.weight != other.weight {
            return invalid("weights differ");
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|d| a * &self.coeffs[d] + b * &other.coeffs[d]).collect();
        Ok(JacobiForm1 { weight: self.weight, coeffs })
    }

    pub fn scale(&self, a: &Rational) -> JacobiForm1 {
        JacobiForm1 { weight: self.weight, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }
}

/// `E_{k,1}` for `k ∈ {4, 6}`: `c(D) = H(k-1, D) / H(k-1, 0)`.
pub fn jacobi_eisenstein(k: u32, max_d: usize) -> Result<JacobiForm1> {
    if k != 4 && k != 6 {
        return invalid(format!("Jacobi Eisenstein series shipped for k = 4, 6; got {k}"));
    }
    let h0 = cohen_h(k - 1, 0)?;
    let coeffs = (0..=max_d as u64)
        .map(|d| Ok(cohen_h(k - 1, d)? / &h0))
        .collect::<Result<Vec<_>>>()?;
    JacobiForm1::new(k, coeffs)
}

/// The `E8` theta series with elliptic variable along a root `v`:
/// `c(4n - r^2) = #{x : x·x = 2n, x·v = r}`.
///
/// Every representative `(n, r)`, `|r| ≤ 3`, of each discriminant within range
/// is counted and required to agree.
pub fn jacobi_theta_e8(max_d: usize) -> Result<JacobiForm1> {
    let e8 = lattice::builtin_gram(Builtin::E8)?;
    const R_MAX: i64 = 3;
    let n_max = (max_d as i64 + R_MAX * R_MAX) / 4;
    let mut v = vec![0i64; 8];
    v[0] = 1;
    let mut counts: HashMap<(i64, i64), u64> = HashMap::new();
    for (x, norm) in lattice::short_vectors(&e8, 2 * n_max)? {
        let r = e8.inner(&x, &v);
        *counts.entry((norm / 2, r)).or_insert(0) += 1;
        if norm != 0 {
            *counts.entry((norm / 2, -r)).or_insert(0) += 1;
        }
    }
    let mut coeffs: Vec<Option<u64>> = vec![None; max_d + 1];
    for n in 0..=n_max {
        for r in -R_MAX..=R_MAX {
            let d = 4 * n - r * r;
            if d < 0 {
                if counts.get(&(n, r)).copied().unwrap_or(0) != 0 {
                    return Err(Error::Validation(format!("vectors found at negative discriminant ({n}, {r})")));
                }
                continue;
            }
            if d as usize > max_d {
                continue;
            }
            let c = counts.get(&(n, r)).copied().unwrap_or(0);
            match coeffs[d as usize] {
                None => coeffs[d as usize] = Some(c),
                Some(prev) if prev != c => {
                    return Err(Error::Validation(format!(
                        "theta coefficient at D = {d} depends on the representative: {prev} vs {c} at ({n}, {r})"
                    )))
                }
                _ => {}
            }
        }
    }
    JacobiForm1::new(4, coeffs.into_iter().map(|c| int(c.unwrap_or(0))).collect())
}

/// The normalized index-one Jacobi cusp forms `φ_{10,1}`, `φ_{12,1}` with `c(3) = 1`:
/// `(E6 E_{4,1} - E4 E_{6,1})/144` and `(E4^2 E_{4,1} - E6 E_{6,1})/144`.
pub fn jacobi_cusp_form(k: u32, max_d: usize) -> Result<JacobiForm1> {
    let order = max_d / 4 + 1;
    let e41 = jacobi_eisenstein(4, max_d)?;
    let e61 = jacobi_eisenstein(6, max_d)?;
    let e4 = eisenstein_q(4, order)?;
    let e6 = eisenstein_q(6, order)?;
    let phi = match k {
        10 => e41.mul_elliptic(&e6, 6)?.combine(&e61.mul_elliptic(&e4, 4)?, &Rational::one(), &-Rational::one())?,
        12 => e41
            .mul_elliptic(&e4.pow(2), 8)?
            .combine(&e61.mul_elliptic(&e6, 6)?, &Rational::one(), &-Rational::one())?,
        _ => return invalid(format!("Jacobi cusp forms shipped for k = 10, 12; got {k}")),
    };
    if !phi.coeffs[0].is_zero() {
        return Err(Error::Validation("constructed form is not cuspidal".into()));
    }
    if max_d < 3 {
        return Ok(phi);
    }
    let c3 = phi.coeffs[3].clone();
    if c3.is_zero() {
        return Err(Error::Validation("c(3) vanishes; cannot normalize".into()));
    }
    Ok(phi.scale(&c3.recip()))
}

/// Degree-2 Siegel form with Fourier coefficients `A(T)` on reduced positive `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelDeg2Form {
    pub weight: u32,
    pub det_bound: i64,
    pub coeffs: BTreeMap<(i64, i64, i64), Rational>,
}

impl SiegelDeg2Form {
    /// `A(T)` for any positive definite `T = (n, r, m)` with `det T ≤ det_bound`.
    pub fn get(&self, n: i64, r: i64, m: i64) -> Result<Rational> {
        let key = binary::reduce(n, r, m);
        if binary::discriminant(key) > 4 * self.det_bound {
            return invalid(format!("({n}, {r}, {m}) lies beyond det bound {}", self.det_bound));
        }
        Ok(self.coeffs.get(&key).cloned().unwrap_or_else(Rational::zero))
    }

    /// Lines `n r m numerator/denominator`, after a `# weight=.. det_bound=..` header.
    pub fn to_text(&self) -> String {
        let mut s = format!("# weight={} det_bound={}\n", self.weight, self.det_bound);
        for ((n, r, m), a) in &self.coeffs {
            let _ = writeln!(s, "{n} {r} {m} {}/{}", a.numer(), a.denom());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut weight = None;
        let mut det_bound = None;
        let mut coeffs = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("weight", v)) => weight = Some(v.parse().map_err(|_| perr(format!("bad weight '{v}'")))?),
                        Some(("det_bound", v)) => {
                            det_bound = Some(v.parse().map_err(|_| perr(format!("bad det_bound '{v}'")))?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(perr(format!("expected 4 fields, found {}", parts.len())));
            }
            let num = |s: &str| s.parse::<i64>().map_err(|_| perr(format!("bad integer '{s}'")));
            let (n, r, m) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            let a: Rational = parts[3].parse().map_err(|_| perr(format!("bad rational '{}'", parts[3])))?;
            coeffs.insert((n, r, m), a);
        }
        Ok(SiegelDeg2Form {
            weight: weight.ok_or(Error::Parse { line: 1, msg: "missing weight header".into() })?,
            det_bound: det_bound.ok_or(Error::Parse { line: 1, msg: "missing det_bound header".into() })?,
            coeffs,
        })
    }
}

/// `A(n, r, m) = Σ_{d | gcd(n, r, m)} d^{k-1} c((4nm - r^2)/d^2)` for any `T`.
pub fn maass_coefficient(phi: &JacobiForm1, n: i64, r: i64, m: i64) -> Result<Rational> {
    let g = arith::gcd(arith::gcd(n, r), m).unsigned_abs();
    let disc = 4 * n * m - r * r;
    let mut acc = Rational::zero();
    for d in arith::divisors(g) {
        let d = d as i64;
        acc += int(BigInt::from(d).pow(phi.weight - 1)) * phi.c(disc / (d * d))?;
    }
    Ok(acc)
}

/// Saito–Kurokawa lift of an index-one Jacobi cusp form, on every reduced
/// positive `T` with `det T ≤ det_bound`.
pub fn sk_lift(phi: &JacobiForm1, det_bound: i64) -> Result<SiegelDeg2Form> {
    if !phi.coeffs[0].is_zero() {
        return invalid("the lift needs a cusp form (c(0) = 0)");
    }
    if phi.max_d() < 4 * det_bound as usize {
        return Err(Error::Truncation { needed: 4 * det_bound as usize, available: phi.max_d() });
    }
    let mut coeffs = BTreeMap::new();
    for (n, r, m) in reduced_triples(det_bound) {
        coeffs.insert((n, r, m), maass_coefficient(phi, n, r, m)?);
    }
    Ok(SiegelDeg2Form { weight: phi.weight, det_bound, coeffs })
}

/// Saito–Kurokawa lift of `φ_{k,1}` for `k ∈ {10, 12}`.
pub fn sk_lift_weight(k: u32, det_bound: i64) -> Result<SiegelDeg2Form> {
    let phi = jacobi_cusp_form(k, 4 * det_bound as usize)?;
    sk_lift(&phi, det_bound)
}

/// Reduced `(n, r, m)`, `0 ≤ r ≤ n ≤ m`, with `0 < 4nm - r^2 ≤ 4 det_bound`.
fn reduced_triples(det_bound: i64) -> Vec<(i64, i64, i64)> {
    let lim = 4 * det_bound;
    let mut out = Vec::new();
    let mut n = 1;
    while 3 * n * n <= lim {
        for r in 0..=n {
            let mut m = n;
            while 4 * n * m - r * r <= lim {
                out.push((n, r, m));
                m += 1;
            }
        }
        n += 1;
    }
    out
}

/// A reduced positive definite form with its automorphism count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedForm {
    pub n: i64,
    pub r: i64,
    pub m: i64,
    pub epsilon: u32,
}

impl ReducedForm {
    /// `det T = (4nm - r^2) / 4`.
    pub fn det(&self) -> f64 {
        binary::discriminant((self.n, self.r, self.m)) as f64 / 4.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedFormTable {
    pub det_bound: i64,
    pub forms: Vec<ReducedForm>,
}

/// All reduced positive `T` with `det T ≤ det_bound` and their `ε(T)`.
pub fn reduced_forms(det_bound: i64) -> Result<ReducedFormTable> {
    if det_bound < 1 {
        return invalid("det bound must be at least 1");
    }
    let forms = reduced_triples(det_bound)
        .into_par_iter()
        .map(|(n, r, m)| Ok(ReducedForm { n, r, m, epsilon: automorphism_count(n, r, m)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReducedFormTable { det_bound, forms })
}

type Mat2 = [[i64; 2]; 2];

/// `ε(T) = #{U ∈ GL_2(Z) : U T U^t = T}` by exhaustive search over
/// `|entries| ≤ 4·⌈m/n⌉`, doubled once if a solution touches the boundary.
pub fn automorphism_count(n: i64, r: i64, m: i64) -> Result<u32> {
    if n <= 0 || 4 * n * m - r * r <= 0 {
        return invalid(format!("({n}, {r}, {m}) is not positive definite"));
    }
    let base = 4 * ((m + n - 1) / n);
    for bound in [base, 2 * base] {
        let found = automorphisms_in_box(n, r, m, bound);
        let touches = found.iter().any(|u| u.iter().flatten().any(|e| e.abs() == bound));
        if touches {
            continue;
        }
        check_group(&found, (n, r, m))?;
        return Ok(found.len() as u32);
    }
    Err(Error::Certification(format!(
        "automorphism search for ({n}, {r}, {m}) keeps hitting the box boundary"
    )))
}

/// Integer vectors `(a, b)` in the box with `n a^2 + r a b + m b^2 = t`.
///
/// Rows are found exactly: for each `b` the quadratic in `a` is solved in
/// integers, which visits every box point that could satisfy the equation.
fn representations(n: i64, r: i64, m: i64, t: i64, bound: i64) -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    for b in -bound..=bound {
        // n a^2 + (r b) a + (m b^2 - t) = 0
        let disc = r * r * b * b - 4 * n * (m * b * b - t);
        if disc < 0 {
            continue;
        }
        let s = disc.isqrt();
        if s * s != disc {
            continue;
        }
        for root in [-r * b + s, -r * b - s] {
            if root % (2 * n) == 0 {
                let a = root / (2 * n);
                if a.abs() <= bound && !out.contains(&[a, b]) {
                    out.push([a, b]);
                }
            }
        }
    }
    out
}

fn automorphisms_in_box(n: i64, r: i64, m: i64, bound: i64) -> Vec<Mat2> {
    let first = representations(n, r, m, n, bound);
    let second = representations(n, r, m, m, bound);
    let mut out = Vec::new();
    for u0 in &first {
        for u1 in &second {
            let u = [*u0, *u1];
            let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
            if det.abs() == 1 && binary::transform((n, r, m), u) == (n, r, m) {
                out.push(u);
            }
        }
    }
    out.sort();
    out
}

fn mat_mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn check_group(found: &[Mat2], t: (i64, i64, i64)) -> Result<()> {
    let set: BTreeSet<Mat2> = found.iter().copied().collect();
    let fail = |msg: &str| Err(Error::Certification(format!("automorphisms of {t:?}: {msg}")));
    if !set.contains(&[[1, 0], [0, 1]]) || !set.contains(&[[-1, 0], [0, -1]]) {
        return fail("±identity missing");
    }
    for a in &set {
        // inverse of a unimodular 2x2 matrix
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [[a[1][1] * det, -a[0][1] * det], [-a[1][0] * det, a[0][0] * det]];
        if !set.contains(&inv) {
            return fail("not closed under inversion");
        }
        for b in &set {
            if !set.contains(&mat_mul2(a, b)) {
                return fail("not closed under multiplication");
            }
        }
    }
    Ok(())
}

/// Truncated Rankin convolution with its stabilization estimate.
#[derive(Clone, Debug, Serialize)]
pub struct RankinConvolution {
    pub s: f64,
    pub det_bound: i64,
    pub terms: usize,
    /// `error_bound` is `|R(B) - R(B/2)|` plus rounding: a heuristic, not a proof.
    pub value: Certified,
    pub half_bound_value: f64,
    pub heuristic: bool,
}

/// `Σ_{T reduced, det T ≤ B} a_F(T) conj(a_G(T)) / (ε(T) det(T)^s)`.
pub fn rankin_convolution(
    f: &SiegelDeg2Form,
    g: &SiegelDeg2Form,
    s: f64,
    det_bound: i64,
) -> Result<RankinConvolution> {
    if f.weight != g.weight {
        return invalid(format!("weights differ: {} and {}", f.weight, g.weight));
    }
    if det_bound > f.det_bound || det_bound > g.det_bound {
        return Err(Error::Truncation {
            needed: det_bound as usize,
            available: f.det_bound.min(g.det_bound) as usize,
        });
    }
    let table = reduced_forms(det_bound)?;
    let terms: Vec<(f64, f64)> = table
        .forms
        .par_iter()
        .map(|t| {
            let a = f.get(t.n, t.r, t.m)?;
            let b = g.get(t.n, t.r, t.m)?;
            let term = rational_to_f64(&(a * b)) / (t.epsilon as f64 * t.det().powf(s));
            Ok((t.det(), term))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = terms.iter().map(|t| t.1).sum();
    let half: f64 = terms.iter().filter(|t| t.0 <= (det_bound / 2) as f64).map(|t| t.1).sum();
    let abs: f64 = terms.iter().map(|t| t.1.abs()).sum();
    let rounding = (terms.len() as f64 + 16.0) * f64::EPSILON * abs;
    Ok(RankinConvolution {
        s,
        det_bound,
        terms: terms.len(),
        value: Certified::real(total, (total - half).abs() + rounding),
        half_bound_value: half,
        heuristic: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cohen_numbers() {
        assert_eq!(cohen_h(3, 0).unwrap(), rat(-1, 252));
        assert_eq!(cohen_h(3, 1).unwrap(), Rational::zero());
        assert_eq!(cohen_h(3, 2).unwrap(), Rational::zero());
        assert_eq!(cohen_h(3, 3).unwrap(), rat(-2, 9));
        assert_eq!(cohen_h(3, 4).unwrap(), rat(-1, 2));
        assert_eq!(cohen_h(5, 3).unwrap(), rat(2, 3));
        assert_eq!(cohen_h(5, 4).unwrap(), rat(5, 2));
        assert!(cohen_h(1, 3).is_err());
    }

    #[test]
    fn eisenstein_matches_e8_theta() {
        let e = jacobi_eisenstein(4, 40).unwrap();
        let t = jacobi_theta_e8(40).unwrap();
        assert_eq!(e.c(0).unwrap(), Rational::one());
        assert_eq!(e.c(2).unwrap(), Rational::zero());
        assert_eq!(t.c(3).unwrap(), int(56));
        assert_eq!(t.c(4).unwrap(), int(126));
        assert_eq!(e, t);
        assert_eq!(jacobi_eisenstein(6, 3).unwrap().c(3).unwrap(), int(-88));
        assert!(jacobi_eisenstein(8, 3).is_err());
    }

    /// `η^18 θ_1(τ, z)^2` as coefficients `c(n, r)`.
    fn eta_theta_oracle(n_max: i64) -> HashMap<(i64, i64), BigInt> {
        // q^{3/4} Π (1 - q^k)^18
        let p = crate::series::euler_product(n_max as usize).pow(18);
        let mut out: HashMap<(i64, i64), BigInt> = HashMap::new();
        let lim = 2 * n_max + 2;
        for a in -lim..=lim {
            for b in -lim..=lim {
                let e = 1 + (a * (a + 1) + b * (b + 1)) / 2;
                if e > n_max {
                    continue;
                }
                let sign = if (a + b).rem_euclid(2) == 0 { 1 } else { -1 };
                for mm in 0..=(n_max - e) {
                    let c = &p.coeffs()[mm as usize];
                    let entry = out.entry((e + mm, a + b + 1)).or_insert_with(BigInt::zero);
                    *entry += c.numer() * BigInt::from(sign);
                }
            }
        }
        out
    }

    #[test]
    fn phi10_matches_eta_theta_product() {
        let phi = jacobi_cusp_form(10, 60).unwrap();
        assert_eq!(phi.c(3).unwrap(), Rational::one());
        assert_eq!(phi.c(4).unwrap(), int(-2));
        let oracle = eta_theta_oracle(15);
        for ((n, r), c) in &oracle {
            let d = 4 * n - r * r;
            if d as usize > phi.max_d() {
                continue;
            }
            assert_eq!(phi.c(d).unwrap(), Rational::from_integer(c.clone()), "(n, r) = ({n}, {r})");
        }
        let phi12 = jacobi_cusp_form(12, 8).unwrap();
        assert_eq!(phi12.c(4).unwrap(), int(10));
    }

    #[test]
    fn lift_examples() {
        let phi = jacobi_cusp_form(10, 48).unwrap();
        let f = sk_lift(&phi, 12).unwrap();
        assert_eq!(f.get(1, 1, 1).unwrap(), phi.c(3).unwrap());
        assert_eq!(f.get(1, 0, 1).unwrap(), phi.c(4).unwrap());
        let expected = phi.c(12).unwrap() + int(512) * phi.c(3).unwrap();
        assert_eq!(f.get(2, 2, 2).unwrap(), expected);
        assert!(sk_lift(&jacobi_eisenstein(4, 48).unwrap(), 12).is_err());
        let round = SiegelDeg2Form::from_text(&f.to_text()).unwrap();
        assert_eq!(round, f);
    }

    static LIFT10: std::sync::LazyLock<(JacobiForm1, SiegelDeg2Form)> = std::sync::LazyLock::new(|| {
        let phi = jacobi_cusp_form(10, 80).unwrap();
        let f = sk_lift(&phi, 20).unwrap();
        (phi, f)
    });

    proptest! {
        #[test]
        fn lift_is_class_invariant(
            idx in 0usize..60, a in -2i64..3, b in -2i64..3, c in -2i64..3,
        ) {
            let (phi, f) = &*LIFT10;
            let keys: Vec<_> = f.coeffs.keys().copied().collect();
            let t = keys[idx % keys.len()];
            let u = binary::transform(binary::transform(t, [[1 + a * b, a], [b, 1]]), [[1, 0], [c, 1]]);
            prop_assert_eq!(maass_coefficient(phi, u.0, u.1, u.2).unwrap(), f.coeffs[&t].clone());
        }
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphism_count(1, 0, 1).unwrap(), 8);
        assert_eq!(automorphism_count(1, 1, 1).unwrap(), 12);
        assert_eq!(automorphism_count(1, 0, 2).unwrap(), 4);
        assert_eq!(automorphism_count(2, 1, 3).unwrap(), 2);
        assert!(automorphism_count(1, 2, 1).is_err());
        let table = reduced_forms(30).unwrap();
        assert!(table.forms.iter().all(|f| f.epsilon >= 2));
    }

    #[test]
    fn convolution_behaviour() {
        let f = sk_lift_weight(10, 40).unwrap();
        // one reduced form with det ≤ 3/4
        let single = rankin_convolution(&f, &f, 16.0, 0);
        assert!(single.is_err());
        let one = {
            let table = reduced_forms(1).unwrap();
            let mut expected = 0.0;
            for t in &table.forms {
                let a = rational_to_f64(&f.get(t.n, t.r, t.m).unwrap());
                expected += a * a / (t.epsilon as f64 * t.det().powf(16.0));
            }
            (expected, rankin_convolution(&f, &f, 16.0, 1).unwrap())
        };
        assert!((one.0 - one.1.value.value.re).abs() < 1e-15 * one.0);
        let mut last = 0.0;
        for b in [5, 10, 20, 40] {
            let r = rankin_convolution(&f, &f, 16.0, b).unwrap();
            assert!(r.value.value.re >= last && r.value.value.re > 0.0);
            last = r.value.value.re;
        }
        let g = sk_lift_weight(12, 10).unwrap();
        assert!(rankin_convolution(&f, &g, 16.0, 5).is_err());
    }
}
