//! Positive definite integral lattices given by Gram matrices, short-vector
//! enumeration, and theta series of degree one and two.
//!
//! Enumeration follows Fincke–Pohst: a floating-point Cholesky factor prunes
//! the search tree (with a padded radius), while every reported norm is the
//! exact integer `x^T G x`. Floats can therefore only make the search wider,
//! never drop a vector.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::binary;
use crate::error::{invalid, Error, Result};
use crate::series::{QSeries, Rational};

/// Default cap on the number of vectors [`short_vectors`] may return.
pub const DEFAULT_VECTOR_CAP: usize = 20_000_000;

const RADIUS_PAD: f64 = 1e-9;

/// An integral symmetric positive definite Gram matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct GramLattice {
    gram: Vec<Vec<i64>>,
}

impl fmt::Debug for GramLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GramLattice({})", self.dim())?;
        for row in &self.gram {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

impl GramLattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let n = gram.len();
        if n == 0 {
            return invalid("empty Gram matrix");
        }
        if gram.iter().any(|r| r.len() != n) {
            return invalid("Gram matrix is not square");
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return invalid(format!("Gram matrix not symmetric at ({i}, {j})"));
                }
            }
        }
        for k in 1..=n {
            let minor: Vec<Vec<i64>> = gram[..k].iter().map(|r| r[..k].to_vec()).collect();
            if !determinant(&minor).is_positive() {
                return invalid(format!("Gram matrix not positive definite (leading minor {k})"));
            }
        }
        Ok(GramLattice { gram })
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn determinant(&self) -> BigInt {
        determinant(&self.gram)
    }

    pub fn is_even(&self) -> bool {
        (0..self.dim()).all(|i| self.gram[i][i] % 2 == 0)
    }

    pub fn inner(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut acc = 0;
        for (i, row) in self.gram.iter().enumerate() {
            if x[i] == 0 {
                continue;
            }
            let s: i64 = row.iter().zip(y).map(|(g, b)| g * b).sum();
            acc += x[i] * s;
        }
        acc
    }

    pub fn norm(&self, x: &[i64]) -> i64 {
        self.inner(x, x)
    }

    /// Orthogonal direct sum.
    pub fn block_sum(&self, other: &GramLattice) -> GramLattice {
        let (a, b) = (self.dim(), other.dim());
        let mut g = vec![vec![0; a + b]; a + b];
        for i in 0..a {
            g[i][..a].copy_from_slice(&self.gram[i]);
        }
        for i in 0..b {
            g[a + i][a..].copy_from_slice(&other.gram[i]);
        }
        GramLattice { gram: g }
    }

    /// Parses "dimension, then one whitespace-separated row per line".
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, first) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing dimension line".into() })?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::Parse { line: ln, msg: format!("bad dimension '{first}'") })?;
        let mut gram = Vec::with_capacity(n);
        for (ln, line) in lines {
            let row: std::result::Result<Vec<i64>, _> =
                line.split_whitespace().map(i64::from_str).collect();
            let row = row.map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
            if row.len() != n {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {n} entries, found {}", row.len()),
                });
            }
            gram.push(row);
        }
        if gram.len() != n {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {n} rows, found {}", gram.len()),
            });
        }
        GramLattice::new(gram)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim());
        for row in &self.gram {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(a: &[Vec<i64>]) -> BigInt {
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> =
        a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &m[n - 1][n - 1]
    }
}

/// Named lattices shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// The rank-8 form attached to the integral Cayley numbers.
    V,
    E8,
    E8E8,
    D16Plus,
}

impl FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "V" => Ok(Builtin::V),
            "E8" => Ok(Builtin::E8),
            "E8E8" => Ok(Builtin::E8E8),
            "D16PLUS" | "D16+" => Ok(Builtin::D16Plus),
            _ => invalid(format!("unknown lattice '{s}'")),
        }
    }
}

const V_GRAM: [[i64; 8]; 8] = [
    [2, 0, 0, 0, 0, -1, -1, -1],
    [0, 2, 0, 0, 1, -1, 1, 0],
    [0, 0, 2, 0, 1, 0, -1, 1],
    [0, 0, 0, 2, 1, 1, 0, -1],
    [0, 1, 1, 1, 2, 0, 0, 0],
    [-1, -1, 0, 1, 0, 2, 0, 0],
    [-1, 1, -1, 0, 0, 0, 2, 0],
    [-1, 0, 1, -1, 0, 0, 0, 2],
];

fn e8_gram() -> Vec<Vec<i64>> {
    // Cartan matrix, Bourbaki numbering: 1-3-4-5-6-7-8 with 2 attached to 4
    let edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)];
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    for (a, b) in edges {
        g[a - 1][b - 1] = -1;
        g[b - 1][a - 1] = -1;
    }
    g
}

/// `D16⁺ = D16 ∪ (D16 + (1/2)^16)`.
///
/// Basis, in doubled coordinates: `e_i - e_{i+1}` (i = 1..7), `e_7 + e_8`
/// (these eight span a `D8`), then `e_i - e_{i+1}` (i = 8..14) and the glue
/// vector `h`. Writing `2h` in the `D16` basis gives `e_15 - e_16` coefficient
/// `-1`, so swapping that root for `h` yields a basis of `D16⁺`.
fn d16_plus_gram() -> Result<Vec<Vec<i64>>> {
    let root = |i: usize| {
        let mut v = vec![0i64; 16];
        v[i] = 2;
        v[i + 1] = -2;
        v
    };
    let mut basis: Vec<Vec<i64>> = (0..7).map(root).collect();
    let mut s = vec![0i64; 16];
    s[6] = 2;
    s[7] = 2;
    basis.push(s);
    basis.extend((7..14).map(root));
    basis.push(vec![1i64; 16]);
    let mut g = vec![vec![0i64; 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            let dot: i64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
            if dot % 4 != 0 {
                return Err(Error::Validation("D16+ Gram matrix is not integral".into()));
            }
            g[i][j] = dot / 4;
        }
    }
    Ok(g)
}

pub fn builtin_gram(which: Builtin) -> Result<GramLattice> {
    match which {
        Builtin::V => GramLattice::new(V_GRAM.iter().map(|r| r.to_vec()).collect()),
        Builtin::E8 => GramLattice::new(e8_gram()),
        Builtin::E8E8 => {
            let e8 = GramLattice::new(e8_gram())?;
            Ok(e8.block_sum(&e8))
        }
        Builtin::D16Plus => GramLattice::new(d16_plus_gram()?),
    }
}

pub fn builtin_by_name(name: &str) -> Result<GramLattice> {
    builtin_gram(name.parse()?)
}

pub fn is_even_unimodular(l: &GramLattice) -> bool {
    l.is_even() && l.determinant().is_one()
}

/// Fincke–Pohst enumerator for `y = den·x + key`, `x ∈ Z^n`, with
/// `y^T G y ≤ bound` (all quantities exact integers).
struct Enumerator<'a> {
    gram: &'a [Vec<i64>],
    qdiag: Vec<f64>,
    /// mu[i][j] for j > i
    mu: Vec<Vec<f64>>,
    den: i64,
    key: Vec<i64>,
    shift: Vec<f64>,
    bound: i64,
    float_bound: f64,
}

impl<'a> Enumerator<'a> {
    fn new(gram: &'a [Vec<i64>], den: i64, key: &[i64], bound: i64) -> Self {
        let n = gram.len();
        // G = R^T R, R upper triangular
        let mut r = vec![vec![0.0f64; n]; n];
        for j in 0..n {
            for i in 0..=j {
                let mut s = gram[i][j] as f64;
                for k in 0..i {
                    s -= r[k][i] * r[k][j];
                }
                if i == j {
                    r[i][i] = s.max(0.0).sqrt();
                } else {
                    r[i][j] = s / r[i][i];
                }
            }
        }
        let qdiag = (0..n).map(|i| r[i][i] * r[i][i]).collect();
        let mu = (0..n)
            .map(|i| (0..n).map(|j| if j > i { r[i][j] / r[i][i] } else { 0.0 }).collect())
            .collect();
        let d2 = (den * den) as f64;
        let fb = bound as f64 / d2;
        Enumerator {
            gram,
            qdiag,
            mu,
            den,
            key: key.to_vec(),
            shift: key.iter().map(|&k| k as f64 / den as f64).collect(),
            bound,
            float_bound: fb * (1.0 + RADIUS_PAD) + RADIUS_PAD,
        }
    }

    fn dim(&self) -> usize {
        self.gram.len()
    }

    fn range(&self, level: usize, s: f64, rem: f64) -> Option<(i64, i64)> {
        if rem < 0.0 {
            return None;
        }
        let center = -self.shift[level] - s;
        let half = (rem / self.qdiag[level]).sqrt() * (1.0 + RADIUS_PAD) + RADIUS_PAD;
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        (lo <= hi).then_some((lo, hi))
    }

    /// Candidate values of the last coordinate, for stratified parallel runs.
    fn top_values(&self) -> Vec<i64> {
        let top = self.dim() - 1;
        match self.range(top, 0.0, self.float_bound) {
            Some((lo, hi)) => (lo..=hi).collect(),
            None => Vec::new(),
        }
    }

    /// Visits every vector whose last coordinate equals `top`.
    fn run_stratum(&self, top: i64, visit: &mut impl FnMut(&[i64], i64)) {
        let n = self.dim();
        let mut x = vec![0i64; n];
        let mut lin = vec![vec![0i64; n]; n];
        let mut sums = vec![vec![0.0f64; n]; n];
        self.descend(n - 1, Some(top), 0, self.float_bound, &mut x, &mut lin, &mut sums, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        level: usize,
        fixed: Option<i64>,
        exact_above: i64,
        rem: f64,
        x: &mut [i64],
        lin: &mut [Vec<i64>],
        sums: &mut [Vec<f64>],
        visit: &mut impl FnMut(&[i64], i64),
    ) {
        let s = sums[level][level];
        let Some((lo, hi)) = self.range(level, s, rem) else {
            return;
        };
        let (lo, hi) = match fixed {
            Some(v) if v < lo || v > hi => return,
            Some(v) => (v, v),
            None => (lo, hi),
        };
        let g = self.gram;
        for xi in lo..=hi {
            let z = xi as f64 + self.shift[level];
            let d = z + s;
            let new_rem = rem - self.qdiag[level] * d * d;
            if new_rem < -RADIUS_PAD * (1.0 + self.float_bound) {
                continue;
            }
            let y = self.den * xi + self.key[level];
            let exact = exact_above + g[level][level] * y * y + 2 * y * lin[level][level];
            x[level] = xi;
            if level == 0 {
                if exact <= self.bound {
                    visit(x, exact);
                }
                continue;
            }
            let (upper, lower) = lin.split_at_mut(level);
            let cur = &lower[0];
            let next = &mut upper[level - 1];
            for k in 0..level {
                next[k] = cur[k] + g[k][level] * y;
            }
            let (upper, lower) = sums.split_at_mut(level);
            let cur = &lower[0];
            let next = &mut upper[level - 1];
            for k in 0..level {
                next[k] = cur[k] + self.mu[k][level] * z;
            }
            self.descend(level - 1, None, exact, new_rem.max(0.0), x, lin, sums, visit);
        }
    }

    /// Runs all strata in parallel; results come back in stratum order.
    fn par_map<T: Send>(
        &self,
        init: impl Fn() -> T + Sync,
        visit: impl Fn(&mut T, &[i64], i64) + Sync,
    ) -> Vec<T> {
        self.top_values()
            .into_par_iter()
            .map(|top| {
                let mut acc = init();
                self.run_stratum(top, &mut |x, nrm| visit(&mut acc, x, nrm));
                acc
            })
            .collect()
    }
}

/// All `x` with `x^T G x ≤ bound`, one of each `±x` pair (the one whose last
/// nonzero coordinate is positive) plus the zero vector, sorted by norm and
/// then lexicographically.
pub fn short_vectors(l: &GramLattice, bound: i64) -> Result<Vec<(Vec<i64>, i64)>> {
    short_vectors_capped(l, bound, DEFAULT_VECTOR_CAP)
}

pub fn short_vectors_capped(
    l: &GramLattice,
    bound: i64,
    cap: usize,
) -> Result<Vec<(Vec<i64>, i64)>> {
    if bound < 0 {
        return invalid("norm bound must be non-negative");
    }
    let n = l.dim();
    let zero = vec![0i64; n];
    let en = Enumerator::new(l.gram(), 1, &zero, bound);
    let count = AtomicUsize::new(0);
    let parts = en.par_map(Vec::new, |acc: &mut Vec<(Vec<i64>, i64)>, x, nrm| {
        let positive = x.iter().rev().find(|&&c| c != 0).map_or(true, |&c| c > 0);
        if positive && count.fetch_add(1, Ordering::Relaxed) < cap {
            acc.push((x.to_vec(), nrm));
        }
    });
    let total = count.load(Ordering::Relaxed);
    if total > cap {
        return Err(Error::EnumerationCap { cap, bound });
    }
    let mut out: Vec<(Vec<i64>, i64)> = parts.into_iter().flatten().collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// All vectors (both signs) of norm exactly `norm`.
pub fn vectors_of_norm(l: &GramLattice, norm: i64) -> Result<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    for (v, n) in short_vectors(l, norm)? {
        if n == norm {
            if n != 0 {
                out.push(v.iter().map(|c| -c).collect());
            }
            out.push(v);
        }
    }
    out.sort();
    Ok(out)
}

/// Degree-one theta series `Σ_x q^{x^T G x / 2}` through `q^order`.
///
/// Lattices of rank at least 12 are split as `Z^k ⊕ Z^{n-k}` along the basis:
/// the vectors over a fixed outer part `w` form a coset of the first block,
/// whose norm distribution depends only on the class of `G11^{-1} G12 w`
/// modulo `Z^k`. Those finitely many coset distributions are enumerated once
/// and combined with an enumeration of the projected outer lattice.
pub fn theta_deg1(l: &GramLattice, order: usize) -> Result<QSeries> {
    if !l.is_even() {
        return invalid("theta series requires an even lattice");
    }
    let counts = if l.dim() >= 12 { theta_counts_split(l, order)? } else { theta_counts_direct(l, order) };
    Ok(QSeries::from_integers(counts))
}

fn theta_counts_direct(l: &GramLattice, order: usize) -> Vec<u64> {
    let bound = 2 * order as i64;
    let zero = vec![0i64; l.dim()];
    let en = Enumerator::new(l.gram(), 1, &zero, bound);
    let parts = en.par_map(
        || vec![0u64; order + 1],
        |acc, _x, nrm| acc[(nrm / 2) as usize] += 1,
    );
    merge_histograms(parts, order + 1)
}

fn merge_histograms(parts: Vec<Vec<u64>>, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for p in parts {
        for (o, c) in out.iter_mut().zip(p) {
            *o += c;
        }
    }
    out
}

/// Integer adjugate of a nonsingular integer matrix: `adj = det · A^{-1}`.
fn adjugate(a: &[Vec<i64>]) -> Result<(Vec<Vec<i64>>, i64)> {
    let n = a.len();
    let det = determinant(a);
    let det_i = det
        .to_i64()
        .ok_or_else(|| Error::Unsupported("sublattice determinant too large".into()))?;
    let mut adj = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ji
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| a[r][c]).collect())
                .collect();
            let c = if minor.is_empty() { BigInt::one() } else { determinant(&minor) };
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[i][j] = sign * c.to_i64().ok_or_else(|| Error::Unsupported("cofactor overflow".into()))?;
        }
    }
    Ok((adj, det_i))
}

fn theta_counts_split(l: &GramLattice, order: usize) -> Result<Vec<u64>> {
    let n = l.dim();
    let k = n / 2;
    let g = l.gram();
    let g11: Vec<Vec<i64>> = g[..k].iter().map(|r| r[..k].to_vec()).collect();
    let (adj, d) = adjugate(&g11)?;
    // A = adj · G12  (k × (n-k))
    let a: Vec<Vec<i64>> = (0..k)
        .map(|i| {
            (k..n)
                .map(|j| (0..k).map(|t| adj[i][t] * g[t][j]).sum())
                .collect()
        })
        .collect();
    // P = d·G22 − G21·A, so that d·Q_proj(w) = w^T P w
    let p: Vec<Vec<i64>> = (k..n)
        .map(|i| {
            (k..n)
                .map(|j| d * g[i][j] - (0..k).map(|t| g[t][i] * a[t][j - k]).sum::<i64>())
                .collect()
        })
        .collect();
    let key_of = |w: &[i64]| -> Vec<i64> {
        (0..k)
            .map(|i| a[i].iter().zip(w).map(|(x, y)| x * y).sum::<i64>().rem_euclid(d))
            .collect()
    };

    // classes reachable as G11^{-1} G12 w mod Z^k
    let mut classes: HashSet<Vec<i64>> = HashSet::new();
    let mut frontier = vec![vec![0i64; k]];
    classes.insert(vec![0i64; k]);
    while let Some(c) = frontier.pop() {
        for j in 0..n - k {
            let next: Vec<i64> = (0..k).map(|i| (c[i] + a[i][j]).rem_euclid(d)).collect();
            if classes.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    let mut classes: Vec<Vec<i64>> = classes.into_iter().collect();
    classes.sort();

    let bound = 2 * order as i64;
    let scaled_len = (d * bound) as usize + 1;
    // coset histograms indexed by d·Q1(u + key/d)
    let hist: HashMap<Vec<i64>, Vec<u64>> = classes
        .par_iter()
        .map(|key| {
            let en = Enumerator::new(&g11, d, key, d * d * bound);
            let parts = en.par_map(
                || vec![0u64; scaled_len],
                |acc, _x, nrm| {
                    debug_assert_eq!(nrm % d, 0);
                    acc[(nrm / d) as usize] += 1
                },
            );
            (key.clone(), merge_histograms(parts, scaled_len))
        })
        .collect();

    let outer = Enumerator::new(&p, 1, &vec![0i64; n - k], d * bound);
    let parts = outer.par_map(
        || vec![0u64; order + 1],
        |acc, w, pn| {
            let h = &hist[&key_of(w)];
            let first = (pn + 2 * d - 1) / (2 * d);
            for j in first as usize..=order {
                let t = (2 * d * j as i64 - pn) as usize;
                acc[j] += h[t];
            }
        },
    );
    Ok(merge_histograms(parts, order + 1))
}

/// Degree-two theta coefficients keyed by reduced `(n, r, m)`, `0 ≤ r ≤ n ≤ m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deg2ThetaTable {
    pub trace_bound: i64,
    pub counts: BTreeMap<(i64, i64, i64), u64>,
}

impl Deg2ThetaTable {
    /// Count for any (not necessarily reduced) semi-definite `(n, r, m)` within range.
    pub fn get(&self, n: i64, r: i64, m: i64) -> Option<u64> {
        let key = binary::reduce(n, r, m);
        if key.0 + key.2 > self.trace_bound {
            return None;
        }
        Some(self.counts.get(&key).copied().unwrap_or(0))
    }
}

/// Counts ordered pairs `(x, y)` with `x·x = 2n`, `y·y = 2m`, `x·y = r` for every
/// reduced `(n, r, m)` with `n + m ≤ trace_bound`.
pub fn theta_deg2(l: &GramLattice, trace_bound: i64) -> Result<Deg2ThetaTable> {
    if !is_even_unimodular(l) {
        return invalid("degree-2 theta table requires an even unimodular lattice");
    }
    if trace_bound < 0 {
        return invalid("trace bound must be non-negative");
    }
    let short_x = all_vectors(l, 2 * (trace_bound / 2))?;
    // G x, precomputed for the inner products
    let gx: Vec<(Vec<i64>, i64)> = short_x
        .iter()
        .map(|(x, nx)| {
            let v = l.gram().iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
            (v, nx / 2)
        })
        .collect();
    let zero = vec![0i64; l.dim()];
    let en = Enumerator::new(l.gram(), 1, &zero, 2 * trace_bound);
    let parts = en.par_map(BTreeMap::new, |acc: &mut BTreeMap<(i64, i64, i64), u64>, y, ny| {
        let m = ny / 2;
        for (v, n) in &gx {
            let n = *n;
            if n > m || n + m > trace_bound {
                continue;
            }
            let r: i64 = v.iter().zip(y).map(|(a, b)| a * b).sum();
            if (0..=n).contains(&r) {
                *acc.entry((n, r, m)).or_insert(0) += 1;
            }
        }
    });
    let mut counts = BTreeMap::new();
    for part in parts {
        for (k, c) in part {
            *counts.entry(k).or_insert(0) += c;
        }
    }
    Ok(Deg2ThetaTable { trace_bound, counts })
}

fn all_vectors(l: &GramLattice, bound: i64) -> Result<Vec<(Vec<i64>, i64)>> {
    let mut out = Vec::new();
    for (v, n) in short_vectors(l, bound)? {
        if n != 0 {
            out.push((v.iter().map(|c| -c).collect(), n));
        }
        out.push((v, n));
    }
    Ok(out)
}

/// Number of ordered pairs with Gram matrix exactly `[2n, r; r, 2m]`, by direct search.
pub fn count_pairs(l: &GramLattice, n: i64, r: i64, m: i64) -> Result<u64> {
    let xs = vectors_of_norm(l, 2 * n)?;
    let ys = vectors_of_norm(l, 2 * m)?;
    let count = xs
        .par_iter()
        .map(|x| ys.iter().filter(|y| l.inner(x, y) == r).count() as u64)
        .sum();
    Ok(count)
}

/// Rational numbers of the form `x·y` for the chosen norm data, used by tests.
pub fn theta_as_rationals(t: &[u64]) -> Vec<Rational> {
    t.iter().map(|&c| Rational::from_integer(c.into())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modforms::eisenstein_q;

    /// Box search over all coordinates within the Cholesky radii.
    fn naive_count(l: &GramLattice, bound: i64) -> Vec<u64> {
        let n = l.dim();
        // |x_i| ≤ sqrt(bound · (G^{-1})_{ii}); use a generous integer box
        let inv_diag: Vec<f64> = {
            let g: Vec<Vec<f64>> = l.gram().iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
            (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    gauss_solve(&g, &e)[i]
                })
                .collect()
        };
        let r: Vec<i64> = inv_diag.iter().map(|d| (bound as f64 * d).sqrt().floor() as i64 + 1).collect();
        let mut counts = vec![0u64; bound as usize + 1];
        let mut x: Vec<i64> = r.iter().map(|v| -v).collect();
        loop {
            let nrm = l.norm(&x);
            if nrm <= bound {
                counts[nrm as usize] += 1;
            }
            let mut i = 0;
            loop {
                if i == n {
                    return counts;
                }
                x[i] += 1;
                if x[i] > r[i] {
                    x[i] = -r[i];
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| {
            let mut r = r.clone();
            r.push(v);
            r
        }).collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap()).unwrap();
            m.swap(c, p);
            for i in 0..n {
                if i != c {
                    let f = m[i][c] / m[c][c];
                    for j in c..=n {
                        m[i][j] -= f * m[c][j];
                    }
                }
            }
        }
        (0..n).map(|i| m[i][n] / m[i][i]).collect()
    }

    #[test]
    fn builtins_are_even_unimodular() {
        let v = builtin_gram(Builtin::V).unwrap();
        assert_eq!(v.gram()[0], vec![2, 0, 0, 0, 0, -1, -1, -1]);
        assert_eq!(v.determinant(), BigInt::one());
        for b in [Builtin::V, Builtin::E8, Builtin::E8E8, Builtin::D16Plus] {
            let l = builtin_gram(b).unwrap();
            assert!(is_even_unimodular(&l), "{b:?}");
        }
        let id = GramLattice::new((0..8).map(|i| (0..8).map(|j| (i == j) as i64).collect()).collect()).unwrap();
        assert!(!is_even_unimodular(&id));
        assert!("Leech".parse::<Builtin>().is_err());
    }

    #[test]
    fn rejects_bad_gram() {
        assert!(GramLattice::new(vec![vec![1, 2], vec![2, 1]]).is_err());
        assert!(GramLattice::new(vec![vec![2, 1], vec![0, 2]]).is_err());
        assert!(GramLattice::from_text("2\n2 1\n1").is_err());
    }

    #[test]
    fn text_round_trip() {
        let l = builtin_gram(Builtin::E8).unwrap();
        assert_eq!(GramLattice::from_text(&l.to_text()).unwrap(), l);
    }

    #[test]
    fn short_vector_examples() {
        let e8 = builtin_gram(Builtin::E8).unwrap();
        assert_eq!(short_vectors(&e8, 0).unwrap(), vec![(vec![0; 8], 0)]);
        let sv = short_vectors(&e8, 2).unwrap();
        assert_eq!(sv.len(), 121);
        assert!(sv[1..].iter().all(|(_, n)| *n == 2));
        let rank1 = GramLattice::new(vec![vec![2]]).unwrap();
        assert_eq!(
            short_vectors(&rank1, 8).unwrap(),
            vec![(vec![0], 0), (vec![1], 2), (vec![2], 8)]
        );
        assert!(matches!(
            short_vectors_capped(&e8, 4, 100),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn enumeration_matches_box_search() {
        // D4 root lattice: 24 roots, 24 vectors of norm 4
        let d4 = GramLattice::new(vec![
            vec![2, -1, 0, 0],
            vec![-1, 2, -1, -1],
            vec![0, -1, 2, 0],
            vec![0, -1, 0, 2],
        ])
        .unwrap();
        let naive = naive_count(&d4, 8);
        assert_eq!((naive[2], naive[4]), (24, 24));
        let theta = theta_counts_direct(&d4, 4);
        assert_eq!(theta, (0..=4).map(|j| naive[2 * j]).collect::<Vec<_>>());

        let odd = GramLattice::new(vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 5]]).unwrap();
        let naive = naive_count(&odd, 12);
        let mut ours = vec![0u64; 13];
        for (_, n) in short_vectors(&odd, 12).unwrap() {
            ours[n as usize] += if n == 0 { 1 } else { 2 };
        }
        assert_eq!(ours, naive);
    }

    #[test]
    fn theta_examples() {
        let e8 = builtin_gram(Builtin::E8).unwrap();
        assert_eq!(theta_deg1(&e8, 2).unwrap(), QSeries::from_integers([1, 240, 2160]));
        assert_eq!(theta_deg1(&e8, 0).unwrap(), QSeries::one(0));
        let e8e8 = builtin_gram(Builtin::E8E8).unwrap();
        assert_eq!(theta_deg1(&e8e8, 1).unwrap(), QSeries::from_integers([1, 480]));
        let odd = GramLattice::new(vec![vec![1]]).unwrap();
        assert!(theta_deg1(&odd, 3).is_err());
    }

    #[test]
    fn theta_e8_and_v_equal_e4() {
        let e4 = eisenstein_q(4, 8).unwrap();
        for b in [Builtin::E8, Builtin::V] {
            assert_eq!(theta_deg1(&builtin_gram(b).unwrap(), 8).unwrap(), e4);
        }
    }

    #[test]
    fn split_path_agrees_with_direct_path() {
        let l = builtin_gram(Builtin::D16Plus).unwrap();
        assert_eq!(theta_counts_split(&l, 3).unwrap(), theta_counts_direct(&l, 3));
        let l = builtin_gram(Builtin::E8E8).unwrap();
        assert_eq!(theta_counts_split(&l, 2).unwrap(), theta_counts_direct(&l, 2));
    }

    #[test]
    fn deg2_small_keys() {
        let e8 = builtin_gram(Builtin::E8).unwrap();
        let t = theta_deg2(&e8, 2).unwrap();
        assert_eq!(t.get(0, 0, 0), Some(1));
        assert_eq!(t.get(1, 0, 0), Some(240));
        assert_eq!(t.get(0, 0, 2), Some(2160));
        // x, y roots with x·y = 1: each root has 56 roots at inner product 1
        assert_eq!(t.get(1, 1, 1), Some(240 * 56));
        assert_eq!(t.get(1, -1, 1), Some(240 * 56));
        assert_eq!(t.get(2, 0, 2), None);
        assert!(theta_deg2(&GramLattice::new(vec![vec![2]]).unwrap(), 2).is_err());
    }

    #[test]
    fn deg2_reduction_invariance() {
        let e8 = builtin_gram(Builtin::E8).unwrap();
        let t = theta_deg2(&e8, 3).unwrap();
        for (key, u) in [
            ((1, 1, 1), [[1, 1], [0, 1]]),
            ((1, 0, 1), [[1, -1], [1, 0]]),
            ((1, 1, 2), [[1, 1], [0, 1]]),
            ((1, 0, 2), [[1, 0], [1, 1]]),
        ] {
            let tr = binary::transform(key, u);
            let direct = count_pairs(&e8, tr.0, tr.1, tr.2).unwrap();
            assert_eq!(Some(direct), t.get(key.0, key.1, key.2), "{key:?} -> {tr:?}");
        }
    }
}
