//! Pointwise evaluation of q-expansions and Petersson-type integrals over
//! `Γ0(N)\H`, computed as sums over coset representatives of integrals over
//! the standard fundamental domain `F`.
//!
//! For a representative `γ`, the integrand `F(γτ)` is evaluated through the
//! expansion of each form at the cusp `γ∞`. At prime level `p` the cusp `0`
//! expansions come from Atkin–Lehner signs (newforms) or from the explicit
//! slash of the Eisenstein series attached to `∞`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::lseries::Certified;
use crate::modforms::{self, Eigenform, Precision};
use crate::series::{bernoulli_number, rational_to_f64, QSeries};

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Default lower limit on `Im τ` accepted by [`eval_form`].
pub const DEFAULT_Y_MIN: f64 = 0.5;

/// `|c_n| ≤ constant · n^exponent` for every `n` beyond the stored range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Growth {
    pub constant: f64,
    pub exponent: f64,
}

/// `Σ c_n e^{2πinτ/width}` with stored `c_0..c_M` and a growth bound for the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    coeffs: Vec<f64>,
    width: u64,
    growth: Growth,
}

impl Expansion {
    pub fn new(coeffs: Vec<f64>, width: u64, growth: Growth) -> Result<Self> {
        if coeffs.is_empty() || width == 0 {
            return invalid("an expansion needs at least c_0 and a positive width");
        }
        Ok(Expansion { coeffs, width, growth })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `K` with `Σ_{n>M} |c_n| r^n ≤ K r^{M+1}` for all `0 ≤ r ≤ r_max < 1`.
    fn tail_coefficient(&self, r_max: f64) -> f64 {
        let Growth { constant, exponent } = self.growth;
        if constant == 0.0 {
            return 0.0;
        }
        let m1 = self.coeffs.len() as f64;
        // consecutive-term ratio ((n+1)/n)^γ r is largest at n = M+1
        let rho = ((m1 + 1.0) / m1).powf(exponent.max(0.0)) * r_max;
        if rho >= 1.0 {
            return f64::INFINITY;
        }
        constant * m1.powf(exponent) / (1.0 - rho)
    }

    /// Bound on `Σ_{n>M} |c_n| r^n`.
    fn tail(&self, r: f64) -> f64 {
        let k = self.tail_coefficient(r);
        if k == 0.0 {
            0.0
        } else {
            k * r.powf(self.coeffs.len() as f64)
        }
    }

    /// Evaluates at `τ + shift` in the local variable `e^{2πi(τ+shift)/width}`.
    fn eval(&self, tau: Complex64, shift: i64) -> Certified {
        let z = (tau + shift as f64) / self.width as f64;
        let r = (-TWO_PI * z.im).exp();
        let q = Complex64::from_polar(r, TWO_PI * z.re);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        let mut err = 0.0;
        let mut rn = 1.0;
        for (n, &c) in self.coeffs.iter().enumerate() {
            if n == 0 {
                // c_0 · 1 + 0 is exact
                acc += c;
            } else if c != 0.0 {
                acc += qn * c;
                // q^n by repeated products, plus the product and the addition
                err += (4.0 * n as f64 + 8.0) * UNIT_ROUNDOFF * c.abs() * rn;
            }
            qn *= q;
            rn *= r;
        }
        Certified::new(acc, err + self.tail(r))
    }
}

/// A modular form on `Γ0(N)` (`N = 1` or prime) given by its expansions at
/// the cusps `∞` and, for prime level, `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormEvaluator {
    weight: u32,
    level: u64,
    label: String,
    infinity: Expansion,
    zero: Option<Expansion>,
}

fn qseries_f64(q: &QSeries, order: usize) -> Result<Vec<f64>> {
    if q.order() < order {
        return Err(Error::Truncation { needed: order, available: q.order() });
    }
    Ok(q.coeffs()[..=order].iter().map(rational_to_f64).collect())
}

/// `|2k/B_k| ζ(k-1)`: with `σ_{k-1}(n) ≤ ζ(k-1) n^{k-1}`, the growth constant of `E_k`.
fn eisenstein_growth(k: u32) -> f64 {
    let b = rational_to_f64(&bernoulli_number(k as usize)).abs();
    // ζ(k-1) ≤ 1 + 1/(k-2) + 2^{1-k}... use the simple integral bound 1 + 1/(k-2)
    2.0 * k as f64 / b * (1.0 + 1.0 / (k as f64 - 2.0))
}

fn cusp_form_growth(f: &Eigenform, scale: f64) -> Growth {
    // Deligne: |a(n)| ≤ d(n) n^{(w-1)/2} ≤ 2 n^{w/2}
    let slack = match f.precision() {
        Precision::Exact => 1.0,
        Precision::Approximate { rel_tol } => 1.0 + 1e3 * rel_tol,
    };
    Growth { constant: 2.0 * scale * slack, exponent: f.weight() as f64 / 2.0 }
}

impl FormEvaluator {
    /// The constant function `value`, weight 0, valid at every level.
    pub fn constant(value: f64) -> Self {
        let e = Expansion { coeffs: vec![value], width: 1, growth: Growth { constant: 0.0, exponent: 0.0 } };
        FormEvaluator { weight: 0, level: 1, label: format!("const({value})"), infinity: e, zero: None }
    }

    /// Level-one form from its exact expansion and a growth bound.
    pub fn level1(q: &QSeries, weight: u32, order: usize, growth: Growth, label: &str) -> Result<Self> {
        Ok(FormEvaluator {
            weight,
            level: 1,
            label: label.to_string(),
            infinity: Expansion::new(qseries_f64(q, order)?, 1, growth)?,
            zero: None,
        })
    }

    pub fn level1_eisenstein(k: u32, order: usize) -> Result<Self> {
        let q = modforms::eisenstein_q(k, order)?;
        let growth = Growth { constant: eisenstein_growth(k), exponent: k as f64 - 1.0 };
        Self::level1(&q, k, order, growth, &format!("E{k}"))
    }

    /// A level-one cusp form, or a newform of prime level `p` whose
    /// expansion at `0` is `ε p^{-w/2} f(τ/p)` with `ε` its Atkin–Lehner sign.
    pub fn cusp_form(f: &Eigenform, order: usize) -> Result<Self> {
        let coeffs = qseries_f64(f.coeffs(), order)?;
        let infinity = Expansion::new(coeffs.clone(), 1, cusp_form_growth(f, 1.0))?;
        let zero = match f.level() {
            1 => None,
            p if arith::is_prime(p) => {
                let eps = modforms::atkin_lehner_sign(f, p)? as f64;
                let scale = (p as f64).powf(-(f.weight() as f64) / 2.0);
                let c = coeffs.iter().map(|a| eps * scale * a).collect();
                Some(Expansion::new(c, p, cusp_form_growth(f, scale))?)
            }
            n => return Err(Error::Unsupported(format!("cusp charts for composite level {n}"))),
        };
        Ok(FormEvaluator { weight: f.weight(), level: f.level(), label: f.label().into(), infinity, zero })
    }

    /// The weight-`k` Eisenstein series attached to the cusp `∞` of `Γ0(p)`.
    ///
    /// At `0` it equals `(E_k(τ/p) - E_k(τ)) / (p^k - 1)`.
    pub fn gamma0_eisenstein(k: u32, level: u64, order: usize) -> Result<Self> {
        if level == 1 {
            return Self::level1_eisenstein(k, order);
        }
        if !arith::is_prime(level) {
            return Err(Error::Unsupported(format!("cusp charts for composite level {level}")));
        }
        let p = level;
        let pk = (p as f64).powi(k as i32);
        let base = eisenstein_growth(k);
        let e_inf = modforms::gamma0_eisenstein_infty(k, p, order)?;
        let growth_inf = Growth { constant: base * (p as f64 + 1.0) / (pk - 1.0), exponent: k as f64 - 1.0 };
        let ek = modforms::eisenstein_q(k, order)?;
        let ek = qseries_f64(&ek, order)?;
        let zero: Vec<f64> = (0..=order)
            .map(|n| {
                let sub = if n % p as usize == 0 { ek[n / p as usize] } else { 0.0 };
                (ek[n] - sub) / (pk - 1.0)
            })
            .collect();
        let growth_zero = Growth {
            constant: base * (1.0 + (p as f64).powi(1 - k as i32)) / (pk - 1.0),
            exponent: k as f64 - 1.0,
        };
        Ok(FormEvaluator {
            weight: k,
            level: p,
            label: format!("E{k}^(∞, Γ0({p}))"),
            infinity: Expansion::new(qseries_f64(&e_inf, order)?, 1, growth_inf)?,
            zero: Some(Expansion::new(zero, p, growth_zero)?),
        })
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

    pub fn infinity(&self) -> &Expansion {
        &self.infinity
    }

    /// Expansion and shift describing `f|γ` for a coset representative `γ`.
    fn chart(&self, rep: &CosetRep) -> Result<(&Expansion, i64)> {
        if self.level == 1 {
            return Ok((&self.infinity, 0));
        }
        let p = self.level as i64;
        let (c, d) = (rep.matrix[1][0], rep.matrix[1][1]);
        if c.rem_euclid(p) == 0 {
            return Ok((&self.infinity, 0));
        }
        // γ ∈ Γ0(p) · S T^j with j ≡ d / c (mod p)
        let j = (d * mod_inverse(c, p)).rem_euclid(p);
        let zero = self.zero.as_ref().ok_or_else(|| Error::Unsupported("missing cusp-0 chart".into()))?;
        Ok((zero, j))
    }
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m)
}

/// Evaluates the expansion at `∞`, requiring `Im τ ≥ 0.5`.
pub fn eval_form(e: &FormEvaluator, tau: Complex64) -> Result<Certified> {
    eval_form_with(e, tau, DEFAULT_Y_MIN)
}

pub fn eval_form_with(e: &FormEvaluator, tau: Complex64, y_min: f64) -> Result<Certified> {
    if !(tau.im >= y_min) {
        return invalid(format!("Im τ = {} is below the evaluation threshold {y_min}", tau.im));
    }
    Ok(e.infinity.eval(tau, 0))
}

/// `Σ_{γ∈Γ∞\Γ0(N)} j(γ,τ)^{-k} = ½ Σ_{(c,d)=1, N|c} (cτ+d)^{-k}` over
/// `|c|, |d| ≤ 100`, with the tail bound `4 λ^{-k/2} C^{2-k}/(k-2)`.
pub fn eisenstein_direct_eval(k: u32, level: u64, tau: Complex64) -> Result<Certified> {
    eisenstein_direct_eval_with(k, level, tau, 100)
}

/// As [`eisenstein_direct_eval`] with box size `c_max`.
///
/// Here `λ` is the smallest eigenvalue of `[[|τ|², x], [x, 1]]`, so that
/// `|cτ + d|² ≥ λ (c² + d²)`; there are at most `8m` pairs with `max(|c|,|d|) = m`.
pub fn eisenstein_direct_eval_with(k: u32, level: u64, tau: Complex64, c_max: i64) -> Result<Certified> {
    if k < 4 || k % 2 == 1 {
        return invalid(format!("weight must be even and at least 4, got {k}"));
    }
    if level == 0 || !(tau.im > 0.0) {
        return invalid("need positive level and Im τ > 0");
    }
    let n = level as i64;
    let rows: Vec<i64> = (0..=c_max).filter(|c| c % n == 0).collect();
    let parts: Vec<(Complex64, f64)> = rows
        .par_iter()
        .map(|&c| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut abs = 0.0;
            // c = 0 contributes d = ±1; for c > 0 count (c, d) and (-c, -d) together
            let ds: Vec<i64> = if c == 0 { vec![1] } else { (-c_max..=c_max).collect() };
            for d in ds {
                if arith::gcd(c, d) != 1 {
                    continue;
                }
                let t = (tau * c as f64 + d as f64).powi(-(k as i32));
                acc += t;
                abs += t.norm();
            }
            (acc, abs)
        })
        .collect();
    let value: Complex64 = parts.iter().map(|p| p.0).sum();
    let abs: f64 = parts.iter().map(|p| p.1).sum();
    let count = (2 * c_max + 1) as f64;
    let rounding = (2.0 * k as f64 + 8.0 + count) * UNIT_ROUNDOFF * abs;
    let tail = if c_max == 0 {
        f64::INFINITY
    } else {
        let a = tau.norm_sqr();
        let x = tau.re;
        let lambda = ((a + 1.0) - ((a - 1.0).powi(2) + 4.0 * x * x).sqrt()) / 2.0;
        let kf = k as f64;
        4.0 * lambda.powf(-kf / 2.0) * (c_max as f64).powf(2.0 - kf) / (kf - 2.0)
    };
    Ok(Certified::new(value, rounding + tail))
}

/// A representative of `Γ0(N)\SL_2(Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CosetRep {
    pub matrix: [[i64; 2]; 2],
}

/// Representatives of `Γ0(N)\SL_2(Z)`, one per point of `P^1(Z/N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetReps {
    pub level: u64,
    pub reps: Vec<CosetRep>,
}

impl CosetReps {
    pub fn new(level: u64) -> Result<Self> {
        if level == 0 || level > 10_000 {
            return invalid(format!("unsupported level {level}"));
        }
        let n = level as i64;
        let units: Vec<i64> = (1..=n).filter(|&u| arith::gcd(u, n) == 1).collect();
        let mut points = std::collections::BTreeSet::new();
        for c in 0..n {
            for d in 0..n {
                if arith::gcd(arith::gcd(c, d), n) != 1 {
                    continue;
                }
                let canon = units
                    .iter()
                    .map(|u| ((u * c) % n, (u * d) % n))
                    .min()
                    .expect("1 is a unit");
                points.insert(canon);
            }
        }
        let mut reps = Vec::with_capacity(points.len());
        for (c, d) in points {
            let (c, d) = if n == 1 { (0, 1) } else { (c, d) };
            let mut d_lift = if c == 0 { 1 } else { d };
            while arith::gcd(c, d_lift) != 1 {
                d_lift += n;
            }
            // a d - b c = 1
            let (a, b) = if c == 0 {
                (1, 0)
            } else {
                let a = mod_inverse(d_lift, c);
                (a, (a * d_lift - 1) / c)
            };
            reps.push(CosetRep { matrix: [[a, b], [c, d_lift]] });
        }
        Ok(CosetReps { level, reps })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// `[SL_2(Z) : Γ0(N)] = N Π_{p|N} (1 + 1/p)`.
    pub fn expected_index(level: u64) -> u64 {
        arith::factorize(level)
            .into_iter()
            .fold(level, |acc, (p, _)| acc / p * (p + 1))
    }

    /// Pairwise `Γ0(N)`-inequivalence: `c_1 d_2 - d_1 c_2 ≢ 0 (mod N)`.
    pub fn pairwise_inequivalent(&self) -> bool {
        let n = self.level as i64;
        let r = &self.reps;
        (0..r.len()).all(|i| {
            (i + 1..r.len()).all(|j| {
                let (a, b) = (r[i].matrix[1], r[j].matrix[1]);
                (a[0] * b[1] - a[1] * b[0]).rem_euclid(n) != 0
            }) && {
                let m = r[i].matrix;
                m[0][0] * m[1][1] - m[0][1] * m[1][0] == 1
            }
        })
    }
}

/// Resolution of the compact-part quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadConfig {
    pub x_panels: usize,
    pub y_panels: usize,
    pub nodes: usize,
    /// Height of the compact part, in units of the widest cusp chart.
    pub y1_per_width: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { x_panels: 4, y_panels: 12, nodes: 20, y1_per_width: 6.0 }
    }
}

/// Components of a Petersson integral evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct PeterssonResult {
    pub certified: Certified,
    pub coarse: Complex64,
    pub fine: Complex64,
    /// `|fine - coarse|`, the (heuristic) quadrature error estimate.
    pub quadrature_estimate: f64,
    pub tail_bound: f64,
    pub evaluation_error: f64,
    pub cosets: usize,
}

/// `∫_{Γ0(N)\H} f(τ) conj(g(τ)) e(τ) y^{ypow} dx dy / y^2`.
pub fn petersson_integral(
    f: &FormEvaluator,
    g: &FormEvaluator,
    e: &FormEvaluator,
    ypow: f64,
    level: u64,
) -> Result<Certified> {
    Ok(petersson_integral_detailed(f, g, e, ypow, level, QuadConfig::default())?.certified)
}

pub fn petersson_integral_detailed(
    f: &FormEvaluator,
    g: &FormEvaluator,
    e: &FormEvaluator,
    ypow: f64,
    level: u64,
    config: QuadConfig,
) -> Result<PeterssonResult> {
    if f.weight + e.weight != g.weight || (ypow - g.weight as f64).abs() > 0.0 {
        return invalid(format!(
            "integrand is not Γ0(N)-invariant: weights {} + {} vs {} with y^{ypow}",
            f.weight, e.weight, g.weight
        ));
    }
    for form in [f, g, e] {
        if form.level != 1 && form.level != level {
            return invalid(format!("{} has level {}, not dividing {level}", form.label, form.level));
        }
    }
    let reps = CosetReps::new(level)?;
    let mut charts = Vec::with_capacity(reps.len());
    for rep in &reps.reps {
        charts.push([f.chart(rep)?, g.chart(rep)?, e.chart(rep)?]);
    }
    let width = charts
        .iter()
        .flat_map(|c| c.iter().map(|(x, _)| x.width))
        .max()
        .unwrap_or(1);
    let y1 = config.y1_per_width * width as f64;

    let fine_cfg = QuadConfig { x_panels: 2 * config.x_panels, y_panels: 2 * config.y_panels, ..config };
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut fine = Complex64::new(0.0, 0.0);
    let mut eval_err = 0.0;
    let mut tail = 0.0;
    let mut exact_tail = Complex64::new(0.0, 0.0);
    for chart in &charts {
        coarse += compact_integral(chart, ypow, y1, &config).0;
        let (v, err) = compact_integral(chart, ypow, y1, &fine_cfg);
        fine += v;
        eval_err += err;
        let (exact, bound) = cusp_tail(chart, ypow, y1)?;
        exact_tail += exact;
        tail += bound;
    }
    let quad = (fine - coarse).norm();
    let value = fine + exact_tail;
    let rounding = 64.0 * UNIT_ROUNDOFF * value.norm();
    Ok(PeterssonResult {
        certified: Certified::new(value, quad + tail + eval_err + rounding),
        coarse: coarse + exact_tail,
        fine: value,
        quadrature_estimate: quad,
        tail_bound: tail,
        evaluation_error: eval_err,
        cosets: reps.len(),
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

type Chart<'a> = [(&'a Expansion, i64); 3];

/// Integral over `|x| ≤ 1/2`, `√(1-x²) ≤ y ≤ y1` and the accumulated evaluation error.
fn compact_integral(chart: &Chart<'_>, ypow: f64, y1: f64, cfg: &QuadConfig) -> (Complex64, f64) {
    let gl = gauss_legendre(cfg.nodes);
    let mut xs = Vec::new();
    let hx = 1.0 / cfg.x_panels as f64;
    for panel in 0..cfg.x_panels {
        let a = -0.5 + panel as f64 * hx;
        for &(t, w) in &gl {
            xs.push((a + hx * (t + 1.0) / 2.0, w * hx / 2.0));
        }
    }
    let per_x: Vec<(Complex64, f64)> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let y0 = (1.0 - x * x).sqrt();
            let ratio = (y1 / y0).ln() / cfg.y_panels as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut err = 0.0;
            for panel in 0..cfg.y_panels {
                let lo = y0 * (ratio * panel as f64).exp();
                let hi = y0 * (ratio * (panel + 1) as f64).exp();
                for &(t, w) in &gl {
                    let y = lo + (hi - lo) * (t + 1.0) / 2.0;
                    let wy = w * (hi - lo) / 2.0;
                    let tau = Complex64::new(x, y);
                    let [(fe, fs), (ge, gs), (ee, es)] = *chart;
                    let fv = fe.eval(tau, fs);
                    let mut gv = ge.eval(tau, gs);
                    gv.value = gv.value.conj();
                    let ev = ee.eval(tau, es);
                    let prod = fv.mul(&gv).mul(&ev);
                    let measure = y.powf(ypow - 2.0) * wy;
                    acc += prod.value * measure;
                    err += prod.error_bound * measure;
                }
            }
            (acc * wx, err * wx)
        })
        .collect();
    let value = per_x.iter().map(|p| p.0).sum();
    let err = per_x.iter().map(|p| p.1).sum();
    (value, err)
}

/// `∫_Y^∞ e^{-c y} y^a dy`, exact for integer `a ≥ 0` and bounded above otherwise.
fn tail_moment(c: f64, a: f64, big_y: f64) -> f64 {
    if a < 0.0 {
        return big_y.powf(a) * (-c * big_y).exp() / c;
    }
    // y ≥ Y ≥ 1 lets a non-integer exponent be raised to the next integer
    let n = a.ceil() as i32;
    let mut sum = 0.0;
    let mut falling = 1.0;
    for j in 0..=n {
        sum += falling * big_y.powi(n - j) / c.powi(j + 1);
        falling *= (n - j) as f64;
    }
    (-c * big_y).exp() * sum
}

/// Integral above `y1`: the constant-term product exactly, everything else
/// bounded in absolute value by integrating the product of absolute
/// coefficient series term by term.
fn cusp_tail(chart: &Chart<'_>, ypow: f64, y1: f64) -> Result<(Complex64, f64)> {
    let w = chart.iter().map(|(e, _)| e.width).max().unwrap_or(1);
    let r1 = (-TWO_PI * y1 / w as f64).exp();
    // |expansion| as a series in r = e^{-2πy/w}; index n·(w/width), plus one
    // monomial K r^{M+1} (in the local variable) that dominates the tail on y ≥ y1
    let abs_series = |e: &Expansion| -> Vec<f64> {
        let step = (w / e.width) as usize;
        let m1 = e.coeffs.len();
        let mut v = vec![0.0; (m1 + 1) * step];
        for (n, c) in e.coeffs.iter().enumerate() {
            v[n * step] = c.abs();
        }
        v[m1 * step] += e.tail_coefficient(r1.powi(step as i32));
        v
    };
    let (a, b, c) = (abs_series(chart[0].0), abs_series(chart[1].0), abs_series(chart[2].0));
    let ab = convolve(&a, &b);
    let abc = convolve(&ab, &c);
    let constant = chart[0].0.coeffs[0] * chart[1].0.coeffs[0] * chart[2].0.coeffs[0];
    let mut exact = Complex64::new(0.0, 0.0);
    if constant != 0.0 {
        if ypow >= 1.0 {
            return invalid("integrand does not decay at a cusp (non-cuspidal with y^ypow, ypow ≥ 1)");
        }
        exact = Complex64::new(constant * y1.powf(ypow - 1.0) / (1.0 - ypow), 0.0);
    }
    let mut bound = 0.0;
    for (n, coef) in abc.iter().enumerate().skip(1) {
        if *coef == 0.0 {
            continue;
        }
        let cn = TWO_PI * n as f64 / w as f64;
        bound += coef * tail_moment(cn, ypow - 2.0, y1);
    }
    Ok((exact, bound * (1.0 + 1e-10)))
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lseries::{closed_form_a, RankinSpec};
    use crate::modforms::{level1_eigenforms, level2_weight16_newform, level2_weight8_newform};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(10);
        let total: f64 = gl.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x18: f64 = gl.iter().map(|(x, w)| w * x.powi(18)).sum();
        assert!((x18 - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn constant_evaluation() {
        let one = FormEvaluator::constant(1.0);
        let v = eval_form(&one, Complex64::new(0.3, 0.7)).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        assert_eq!(v.error_bound, 0.0);
        assert!(eval_form(&one, Complex64::new(0.0, 0.2)).is_err());
    }

    #[test]
    fn delta_at_i_matches_eta_product() {
        let delta = level1_eigenforms(12, 40).unwrap().remove(0);
        let ev = FormEvaluator::cusp_form(&delta, 40).unwrap();
        let v = eval_form(&ev, Complex64::new(0.0, 1.0)).unwrap();
        // q Π (1 - q^n)^24 with 80 factors; the omitted factors change it by < 1e-200
        let q = (-TWO_PI).exp();
        let prod: f64 = (1..=80).map(|n| (1.0 - q.powi(n)).powi(24)).product();
        let eta = q * prod;
        assert!((v.value.re - eta).abs() <= v.error_bound + 1e-13 * eta, "{v:?} {eta}");
        assert!(v.value.im.abs() < 1e-20);
    }

    #[test]
    fn e4_at_i_is_sharp() {
        let e4 = FormEvaluator::level1_eisenstein(4, 40).unwrap();
        let v = eval_form(&e4, Complex64::new(0.0, 1.0)).unwrap();
        assert!(v.error_bound < 1e-12);
        // E4(i) = 3 Γ(1/4)^8 / (2π)^6
        let g = 3.625_609_908_221_908_3f64;
        let exact = 3.0 * g.powi(8) / TWO_PI.powi(6);
        assert!((v.value.re - exact).abs() < 1e-12, "{} {exact}", v.value.re);
    }

    #[test]
    fn direct_eisenstein_sums() {
        let i = Complex64::new(0.0, 1.0);
        let lead = eisenstein_direct_eval_with(8, 1, i, 0).unwrap();
        assert_eq!(lead.value, Complex64::new(1.0, 0.0));
        let e8 = FormEvaluator::level1_eisenstein(8, 40).unwrap();
        let direct = eisenstein_direct_eval(8, 1, i).unwrap();
        let series = eval_form(&e8, i).unwrap();
        assert!((direct.value - series.value).norm() < 1e-8);
        assert!(direct.agrees_with(&series));
    }

    #[test]
    fn level2_eisenstein_agrees_with_lattice_sum() {
        let e = FormEvaluator::gamma0_eisenstein(8, 2, 60).unwrap();
        for tau in [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(1.0 / 3.0, 1.0)] {
            let a = eval_form(&e, tau).unwrap();
            let b = eisenstein_direct_eval(8, 2, tau).unwrap();
            assert!((a.value - b.value).norm() < 1e-8, "{tau}: {a:?} {b:?}");
            assert!(a.agrees_with(&b));
        }
        // the slash to cusp 0 agrees with the lattice sum at S τ
        let tau = Complex64::new(0.1, 1.2);
        let s_tau = -tau.inv();
        let direct = eisenstein_direct_eval(8, 2, s_tau).unwrap().value * tau.powi(-8);
        let chart = e.zero.as_ref().unwrap().eval(tau, 0);
        assert!((direct - chart.value).norm() < 1e-9, "{direct} {:?}", chart);
    }

    #[test]
    fn newform_chart_at_zero() {
        // f|S(τ) = τ^{-k} f(-1/τ) against the chart, for the level-2 weight-8 newform
        let f = level2_weight8_newform(120).unwrap();
        let ev = FormEvaluator::cusp_form(&f, 120).unwrap();
        let tau = Complex64::new(0.2, 1.1);
        let lhs = ev.infinity.eval(-tau.inv(), 0).value * tau.powi(-8);
        let rhs = ev.zero.as_ref().unwrap().eval(tau, 0).value;
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1e-30) + 1e-25, "{lhs} {rhs}");
    }

    #[test]
    fn coset_reps() {
        for n in [1u64, 2, 3, 5, 6, 10, 30] {
            let reps = CosetReps::new(n).unwrap();
            assert_eq!(reps.len() as u64, CosetReps::expected_index(n), "N={n}");
            assert!(reps.pairwise_inequivalent());
        }
        assert_eq!(CosetReps::expected_index(2), 3);
    }

    #[test]
    fn volume_and_coset_completeness() {
        let one = FormEvaluator::constant(1.0);
        let v = petersson_integral(&one, &one, &one, 0.0, 1).unwrap();
        let third_pi = std::f64::consts::PI / 3.0;
        assert!((v.value.re - third_pi).abs() < 1e-10);
        assert!(v.error_bound < 1e-6);
        for n in [2u64, 6] {
            let v = petersson_integral(&one, &one, &one, 0.0, n).unwrap();
            let idx = CosetReps::expected_index(n) as f64;
            assert!((v.value.re - idx * third_pi).abs() < 1e-9 * idx);
        }
    }

    #[test]
    fn rejects_non_invariant_integrands() {
        let one = FormEvaluator::constant(1.0);
        let e8 = FormEvaluator::level1_eisenstein(8, 20).unwrap();
        assert!(petersson_integral(&one, &one, &e8, 8.0, 1).is_err());
        assert!(petersson_integral(&one, &one, &one, 1.0, 1).is_err());
    }

    #[test]
    fn unfolding_level_one() {
        let f = level1_eigenforms(12, 2000).unwrap().remove(0);
        let g = level1_eigenforms(20, 2000).unwrap().remove(0);
        let fe = FormEvaluator::cusp_form(&f, 80).unwrap();
        let ge = FormEvaluator::cusp_form(&g, 80).unwrap();
        let ee = FormEvaluator::level1_eisenstein(8, 80).unwrap();
        let res = petersson_integral_detailed(&fe, &ge, &ee, 20.0, 1, QuadConfig::default()).unwrap();
        let closed = closed_form_a(&RankinSpec::new(f, g).unwrap(), 2000).unwrap();
        let int = res.certified;
        assert!(int.agrees_with(&closed), "{res:?} {closed:?}");
        assert!(int.relative_error() < 1e-6 && closed.relative_error() < 1e-6);
        assert!(res.quadrature_estimate <= int.error_bound);
        assert!(int.value.im.abs() < 1e-6 * int.value.re.abs());
    }

    #[test]
    fn unfolding_level_two() {
        let f = level2_weight8_newform(2000).unwrap();
        let g = level2_weight16_newform(2000).unwrap();
        let fe = FormEvaluator::cusp_form(&f, 150).unwrap();
        let ge = FormEvaluator::cusp_form(&g, 150).unwrap();
        let ee = FormEvaluator::gamma0_eisenstein(8, 2, 150).unwrap();
        let int = petersson_integral(&fe, &ge, &ee, 16.0, 2).unwrap();
        let closed = closed_form_a(&RankinSpec::new(f, g).unwrap(), 2000).unwrap();
        assert!(int.agrees_with(&closed), "{int:?} {closed:?}");
        assert!(int.relative_error() < 1e-5 && closed.relative_error() < 1e-5);
        assert!(int.is_nonzero());
    }
}
