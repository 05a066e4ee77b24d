//! Dense linear algebra and polynomial helpers over exact rationals.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::series::{rational_to_f64, Rational};

pub type Matrix = Vec<Vec<Rational>>;

pub fn transpose(a: &Matrix) -> Matrix {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Rational::zero();
                    for t in 0..k {
                        acc += &a[i][t] * &b[t][j];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Characteristic polynomial `det(xI - A)`, coefficients from `x^0` up to the
/// leading `x^n` (which is 1), by the Faddeev–LeVerrier recursion.
pub fn charpoly(a: &Matrix) -> Vec<Rational> {
    let n = a.len();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut m = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = next;
        let am = mat_mul(a, &m);
        let trace = (0..n).fold(Rational::zero(), |acc, i| acc + &am[i][i]);
        coeffs[n - k] = -trace / Rational::from_integer((k as i64).into());
    }
    coeffs
}

pub fn poly_eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

pub fn poly_derivative(p: &[Rational]) -> Vec<Rational> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
        .collect()
}

/// Divides `p` by `(x - r)`; returns the quotient and the remainder `p(r)`.
pub fn poly_div_linear(p: &[Rational], r: &Rational) -> (Vec<Rational>, Rational) {
    let n = p.len() - 1;
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (0..=n).rev() {
        let v = &p[i] + &carry * r;
        if i == 0 {
            return (q, v);
        }
        q[i - 1] = v.clone();
        carry = v;
    }
    unreachable!()
}

/// All complex roots of a polynomial by Durand–Kerner iteration in f64.
pub fn roots_f64(p: &[Rational]) -> Vec<Complex64> {
    let lead = rational_to_f64(p.last().expect("nonempty"));
    let c: Vec<f64> = p.iter().map(|x| rational_to_f64(x) / lead).collect();
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * radius).collect();
    let eval = |x: Complex64| c.iter().rev().fold(Complex64::zero(), |acc, &ci| acc * x + ci);
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::one();
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm() / (1.0 + z[i].norm()));
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Rounds `x` to the nearest multiple of `2^-bits`.
pub fn round_to_bits(x: &Rational, bits: usize) -> Rational {
    let scale = num_bigint::BigInt::one() << bits;
    let scaled = (x * Rational::from_integer(scale.clone())).round();
    scaled / Rational::from_integer(scale)
}

/// Refines an approximate simple root of `p` by Newton steps in exact
/// arithmetic, rounding every iterate to `bits` binary digits.
pub fn newton_refine(p: &[Rational], start: f64, bits: usize) -> Option<Rational> {
    let dp = poly_derivative(p);
    let mut x = Rational::from_float(start)?;
    for _ in 0..64 {
        let d = poly_eval(&dp, &x);
        if d.is_zero() {
            return None;
        }
        let step = poly_eval(p, &x) / d;
        let next = round_to_bits(&(&x - &step), bits);
        let settled = step.abs() * Rational::from_integer(num_bigint::BigInt::one() << bits)
            <= Rational::one();
        x = next;
        if settled {
            return Some(x);
        }
    }
    Some(x)
}

/// Solves `A x = b` for square nonsingular `A`; `None` when singular.
pub fn solve(a: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let t = &m[col][c] * &f;
                    m[r][c] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn charpoly_of_small_matrices() {
        let a = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)]];
        // x^2 - 5x + 5
        assert_eq!(charpoly(&a), vec![rat(5, 1), rat(-5, 1), rat(1, 1)]);
        let b = vec![
            vec![rat(1, 1), rat(2, 1), rat(0, 1)],
            vec![rat(0, 1), rat(3, 1), rat(1, 2)],
            vec![rat(4, 1), rat(0, 1), rat(-1, 1)],
        ];
        let p = charpoly(&b);
        // det(B) = -p(0) for odd size
        let det = rat(1, 1) * (rat(-3, 1) - rat(0, 1)) - rat(2, 1) * (rat(0, 1) - rat(2, 1));
        assert_eq!(-p[0].clone(), det);
    }

    #[test]
    fn newton_converges_to_sqrt2() {
        let p = vec![rat(-2, 1), rat(0, 1), rat(1, 1)];
        let r = newton_refine(&p, 1.4, 200).unwrap();
        let err = poly_eval(&p, &r).abs();
        assert!(err < rat(1, 1) / Rational::from_integer(num_bigint::BigInt::one() << 190));
        let roots = roots_f64(&p);
        assert!(roots.iter().any(|z| (z.re - 2f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn division_by_linear_factor() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let p = vec![rat(6, 1), rat(-7, 1), rat(0, 1), rat(1, 1)];
        let (q, r) = poly_div_linear(&p, &rat(2, 1));
        assert!(r.is_zero());
        assert_eq!(q, vec![rat(-3, 1), rat(2, 1), rat(1, 1)]);
    }

    #[test]
    fn linear_solve() {
        let a = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)]];
        let x = solve(&a, &[rat(3, 1), rat(5, 1)]).unwrap();
        assert_eq!(x, vec![rat(4, 5), rat(7, 5)]);
        let sing = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        assert!(solve(&sing, &[rat(1, 1), rat(1, 1)]).is_none());
    }
}
