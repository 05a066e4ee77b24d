//! Binary quadratic forms `[n, r/2; r/2, m]`, stored as the integer triple `(n, r, m)`.

/// `GL_2(Z)`-reduced representative of a positive semi-definite binary form:
/// the unique `(n, r, m)` with `0 ≤ r ≤ n ≤ m`.
pub fn reduce(n: i64, r: i64, m: i64) -> (i64, i64, i64) {
    assert!(n >= 0 && m >= 0 && 4 * n * m - r * r >= 0, "form ({n}, {r}, {m}) is not semi-definite");
    let (mut a, mut b, mut c) = (n, r, m);
    loop {
        if a > c {
            std::mem::swap(&mut a, &mut c);
        }
        if a == 0 || b.abs() <= a {
            break;
        }
        // x -> x - k y with k the nearest integer to b / 2a
        let k = div_round(b, 2 * a);
        let nb = b - 2 * a * k;
        c = a * k * k - b * k + c;
        b = nb;
    }
    (a, b.abs(), c)
}

fn div_round(x: i64, y: i64) -> i64 {
    // y > 0
    (2 * x + y).div_euclid(2 * y)
}

/// `U T U^t` for `U = [[u00, u01], [u10, u11]]`.
pub fn transform(t: (i64, i64, i64), u: [[i64; 2]; 2]) -> (i64, i64, i64) {
    let (n, r, m) = t;
    // work with 2T = [[2n, r], [r, 2m]]
    let g = [[2 * n, r], [r, 2 * m]];
    let mut ug = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            ug[i][j] = u[i][0] * g[0][j] + u[i][1] * g[1][j];
        }
    }
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = ug[i][0] * u[j][0] + ug[i][1] * u[j][1];
        }
    }
    (out[0][0] / 2, out[0][1], out[1][1] / 2)
}

/// `4 det T = 4nm - r^2`.
pub fn discriminant(t: (i64, i64, i64)) -> i64 {
    4 * t.0 * t.2 - t.1 * t.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduces_known_forms() {
        assert_eq!(reduce(1, 0, 1), (1, 0, 1));
        assert_eq!(reduce(1, -1, 1), (1, 1, 1));
        assert_eq!(reduce(3, 5, 3), (1, 1, 3));
        assert_eq!(reduce(2, 0, 1), (1, 0, 2));
        assert_eq!(reduce(1, 2, 1), (0, 0, 1));
        assert_eq!(reduce(5, 0, 0), (0, 0, 5));
    }

    proptest! {
        #[test]
        fn reduction_is_a_class_invariant(
            n in 1i64..8, r in -8i64..8, m in 1i64..8,
            a in -3i64..4, b in -3i64..4, c in -3i64..4,
        ) {
            prop_assume!(4 * n * m - r * r > 0);
            // build a unimodular U from elementary moves
            let u = [[1 + a * b, a], [b, 1]];
            let u2 = [[1, 0], [c, 1]];
            let t1 = transform((n, r, m), u);
            let t2 = transform(t1, u2);
            let t3 = transform(t2, [[0, 1], [1, 0]]);
            let red = reduce(n, r, m);
            prop_assert_eq!(reduce(t1.0, t1.1, t1.2), red);
            prop_assert_eq!(reduce(t3.0, t3.1, t3.2), red);
            prop_assert_eq!(discriminant(t3), discriminant((n, r, m)));
            let (x, y, z) = red;
            prop_assert!(0 <= y && y <= x && x <= z);
        }
    }
}
