//! Small elementary number theory helpers shared by the other modules.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Primes up to and including `n`, by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as `(p, e)` pairs in increasing order of `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn num_divisors(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

pub fn moebius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// p-adic valuation of a positive integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Exact divisor power sums `sigma_e(n)` for `0 <= n <= m` (entry 0 is zero).
pub fn divisor_sums(e: u32, m: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); m + 1];
    for d in 1..=m {
        let pw = BigInt::from(d).pow(e);
        let mut j = d;
        while j <= m {
            out[j] += &pw;
            j += d;
        }
    }
    out
}

/// Kronecker symbol `(d / n)` for a discriminant `d` and `n >= 1`.
pub fn kronecker(d: i64, n: u64) -> i64 {
    let mut result = 1i64;
    for (p, e) in factorize(n) {
        let chi = if p == 2 {
            if d % 2 == 0 {
                0
            } else {
                match d.rem_euclid(8) {
                    1 | 7 => 1,
                    _ => -1,
                }
            }
        } else {
            legendre(d, p)
        };
        if e % 2 == 1 {
            result *= chi;
        } else if chi == 0 {
            result = 0;
        }
    }
    result
}

fn legendre(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let r = mod_pow(a, (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128;
    let mut base = (b % m) as u128;
    let m128 = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    r as u64
}

/// Splits a discriminant `d` (`d ≡ 0, 1 mod 4`, nonzero) as `d0 * f^2` with `d0` fundamental.
pub fn fundamental_discriminant(d: i64) -> (i64, u64) {
    assert!(d != 0 && d.rem_euclid(4) <= 1, "not a discriminant: {d}");
    let mut f = 1u64;
    let mut core = d.signum();
    for (p, e) in factorize(d.unsigned_abs()) {
        f *= p.pow(e / 2);
        if e % 2 == 1 {
            core *= p as i64;
        }
    }
    if core.rem_euclid(4) == 1 {
        (core, f)
    } else {
        // squarefree part ≡ 2, 3 mod 4: the fundamental discriminant is 4·core
        debug_assert!(f % 2 == 0);
        (4 * core, f / 2)
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Smallest constant `C` with `d(n) <= C * n^delta` for all `n >= 1`.
///
/// The product runs over primes `p < 2^(1/delta)`; larger primes contribute a factor 1.
pub fn divisor_bound_constant(delta: f64) -> f64 {
    assert!(delta > 0.0 && delta <= 1.0);
    let limit = 2f64.powf(1.0 / delta).ceil() as u64;
    primes_up_to(limit)
        .into_iter()
        .map(|p| {
            let pd = (p as f64).powf(delta);
            let mut best = 1.0f64;
            let mut a = 1u32;
            loop {
                let v = (a as f64 + 1.0) / pd.powi(a as i32);
                if v > best {
                    best = v;
                } else if a as f64 * delta * (p as f64).ln() > 2.0 {
                    break;
                }
                a += 1;
            }
            best
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_and_factorization() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(num_divisors(720), 30);
        assert!(is_squarefree(30) && !is_squarefree(12));
    }

    #[test]
    fn kronecker_symbols() {
        // chi_{-3}: 1, -1, 0 pattern
        assert_eq!(kronecker(-3, 1), 1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-3, 3), 0);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-8, 3), 1);
    }

    #[test]
    fn fundamental_parts() {
        assert_eq!(fundamental_discriminant(-3), (-3, 1));
        assert_eq!(fundamental_discriminant(-4), (-4, 1));
        assert_eq!(fundamental_discriminant(-12), (-3, 2));
        assert_eq!(fundamental_discriminant(-16), (-4, 2));
        assert_eq!(fundamental_discriminant(-32), (-8, 2));
        assert_eq!(fundamental_discriminant(-27), (-3, 3));
    }

    #[test]
    fn divisor_constant_is_an_upper_bound() {
        let c = divisor_bound_constant(0.25);
        for n in 1..20000u64 {
            assert!(num_divisors(n) as f64 <= c * (n as f64).powf(0.25) + 1e-12);
        }
    }
}
