//! The fixed registry of verification checks.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use super::newform_file::{ingest_newform, NewformFile};
use super::report::Report;
use crate::error::{invalid, Error, Result};
use crate::jacobi::{automorphism_count, rankin_convolution, sk_lift_weight};
use crate::lattice::{builtin_gram, theta_deg1, theta_deg2, Builtin};
use crate::lseries::{certify_nonvanishing_with, closed_form_a, rankin_euler, RankinSpec};
use crate::modforms::{eisenstein_q, level1_eigenforms, Eigenform};
use crate::quadrature::{eisenstein_direct_eval, eval_form, petersson_integral, FormEvaluator};
use crate::series::QSeries;

pub const CHECK_NAMES: [&str; 9] = [
    "theta-e8",
    "theta-v",
    "theta-16",
    "deg2-genus",
    "eisenstein-n",
    "unfold-level1",
    "unfold-gamma0",
    "nonvanishing",
    "sk-rankin",
];

#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    ThetaE8,
    ThetaV,
    Theta16,
    Deg2Genus,
    EisensteinN { level: u64 },
    UnfoldLevel1 { k: u32 },
    UnfoldGamma0 { level: u64 },
    Nonvanishing { s: f64 },
    SkRankin { weight: u32, s: f64, det_bound: i64 },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::ThetaE8 => "theta-e8",
            Check::ThetaV => "theta-v",
            Check::Theta16 => "theta-16",
            Check::Deg2Genus => "deg2-genus",
            Check::EisensteinN { .. } => "eisenstein-n",
            Check::UnfoldLevel1 { .. } => "unfold-level1",
            Check::UnfoldGamma0 { .. } => "unfold-gamma0",
            Check::Nonvanishing { .. } => "nonvanishing",
            Check::SkRankin { .. } => "sk-rankin",
        }
    }
}

/// Options shared by every check. `order` and `tol` override each check's default
/// truncation and tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub data_dir: PathBuf,
}

impl Settings {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Settings { order: None, tol: None, data_dir: data_dir.into() }
    }
}

/// `$MVERIFY_DATA`, or the fixtures shipped with the crate.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os("MVERIFY_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data"))
}

struct Outcome {
    inputs: serde_json::Value,
    value: String,
    error_bound: Option<f64>,
    pass: bool,
    notes: Option<String>,
}

pub fn run_check(check: &Check, settings: &Settings) -> Result<Report> {
    let start = Instant::now();
    let out = match check {
        Check::ThetaE8 => theta_e8(settings),
        Check::ThetaV => theta_v(settings),
        Check::Theta16 => theta_16(settings),
        Check::Deg2Genus => deg2_genus(settings),
        Check::EisensteinN { level } => eisenstein_n(*level, settings),
        Check::UnfoldLevel1 { k } => unfold_level1(*k, settings),
        Check::UnfoldGamma0 { level } => unfold_gamma0(*level, settings),
        Check::Nonvanishing { s } => nonvanishing(*s, settings),
        Check::SkRankin { weight, s, det_bound } => sk_rankin(*weight, *s, *det_bound, settings),
    }?;
    Ok(Report {
        check_name: check.name().to_string(),
        inputs: out.inputs,
        value: out.value,
        error_bound: out.error_bound,
        pass: out.pass,
        runtime_ms: start.elapsed().as_millis() as u64,
        notes: out.notes,
    })
}

fn first_difference(a: &QSeries, b: &QSeries) -> Option<usize> {
    let n = a.order().min(b.order());
    (0..=n).find(|&i| a.coeffs()[i] != b.coeffs()[i])
}

fn equality_value(a: &QSeries, b: &QSeries, order: usize, what: &str) -> (String, bool) {
    match first_difference(a, b) {
        None => (format!("exact equality through q^{order}"), true),
        Some(i) => (format!("{what} differ at q^{i}: {} vs {}", a.coeffs()[i], b.coeffs()[i]), false),
    }
}

fn theta_e8(st: &Settings) -> Result<Outcome> {
    let order = st.order.unwrap_or(20);
    let theta = theta_deg1(&builtin_gram(Builtin::E8)?, order)?;
    let (value, pass) = equality_value(&theta, &eisenstein_q(4, order)?, order, "θ_E8 and E4");
    Ok(Outcome { inputs: json!({ "order": order }), value, error_bound: None, pass, notes: None })
}

fn theta_v(st: &Settings) -> Result<Outcome> {
    let order = st.order.unwrap_or(20);
    let v = builtin_gram(Builtin::V)?;
    let det = v.determinant();
    let even = v.is_even();
    let theta_v = theta_deg1(&v, order)?;
    let theta_e8 = theta_deg1(&builtin_gram(Builtin::E8)?, order)?;
    let (eq, same) = equality_value(&theta_v, &theta_e8, order, "θ_V and θ_E8");
    let pass = same && even && det == 1.into();
    Ok(Outcome {
        inputs: json!({ "order": order, "det": det.to_string(), "even": even }),
        value: format!("det(V) = {det}, even diagonal: {even}; {eq}"),
        error_bound: None,
        pass,
        notes: None,
    })
}

fn theta_16(st: &Settings) -> Result<Outcome> {
    let order = st.order.unwrap_or(20);
    let e8 = eisenstein_q(8, order)?;
    let a = theta_deg1(&builtin_gram(Builtin::E8E8)?, order)?;
    let b = theta_deg1(&builtin_gram(Builtin::D16Plus)?, order)?;
    let (v1, p1) = equality_value(&a, &e8, order, "θ_{E8⊕E8} and E8");
    let (v2, p2) = equality_value(&b, &e8, order, "θ_{D16+} and E8");
    let value = if p1 && p2 { format!("{v1} for both lattices") } else { format!("{v1}; {v2}") };
    Ok(Outcome { inputs: json!({ "order": order }), value, error_bound: None, pass: p1 && p2, notes: None })
}

fn deg2_genus(st: &Settings) -> Result<Outcome> {
    let trace = st.order.unwrap_or(3) as i64;
    let a = theta_deg2(&builtin_gram(Builtin::E8E8)?, trace)?;
    let b = theta_deg2(&builtin_gram(Builtin::D16Plus)?, trace)?;
    let pass = a.counts == b.counts;
    let value = if pass {
        format!("{} reduced keys with n + m ≤ {trace} have identical counts", a.counts.len())
    } else {
        let bad = a
            .counts
            .iter()
            .find(|(k, v)| b.counts.get(k) != Some(v))
            .map(|(k, v)| format!("{k:?}: {v} vs {:?}", b.counts.get(k)))
            .unwrap_or_else(|| "key sets differ".into());
        format!("tables differ at {bad}")
    };
    Ok(Outcome {
        inputs: json!({ "trace_bound": trace }),
        value,
        error_bound: None,
        pass,
        notes: Some("two-class form: equal tables make the mass-weighted average of the genus equal to each class".into()),
    })
}

fn eisenstein_n(level: u64, st: &Settings) -> Result<Outcome> {
    const K: u32 = 8;
    let order = st.order.unwrap_or(60);
    let tol = st.tol.unwrap_or(1e-8);
    let e = FormEvaluator::gamma0_eisenstein(K, level, order)?;
    let points = [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(1.0 / 3.0, 1.0)];
    let mut worst: f64 = 0.0;
    let mut bound: f64 = 0.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for tau in points {
        let a = eval_form(&e, tau)?;
        let b = eisenstein_direct_eval(K, level, tau)?;
        let diff = (a.value - b.value).norm();
        worst = worst.max(diff);
        bound = bound.max(a.error_bound + b.error_bound);
        pass &= diff <= tol && a.agrees_with(&b);
        parts.push(format!("τ = {tau}: {:.15e}", a.value.re));
    }
    Ok(Outcome {
        inputs: json!({ "N": level, "k": K, "order": order, "tol": tol }),
        value: format!("{}; max |q-expansion − lattice sum| = {worst:.3e}", parts.join(", ")),
        error_bound: Some(bound),
        pass,
        notes: None,
    })
}

const QUADRATURE_NOTE: &str =
    "the quadrature part of the integral's bound is a two-resolution estimate; tail and rounding parts are rigorous";

/// Quadrature and closed-form evaluation of the unfolded integral, with both
/// relative bounds at most `tol`.
fn compare_unfolding(
    f: Eigenform,
    g: Eigenform,
    e: FormEvaluator,
    chart_order: usize,
    terms: usize,
    tol: f64,
) -> Result<(String, f64, bool)> {
    let level = f.level();
    let fe = FormEvaluator::cusp_form(&f, chart_order)?;
    let ge = FormEvaluator::cusp_form(&g, chart_order)?;
    let ypow = g.weight() as f64;
    let int = petersson_integral(&fe, &ge, &e, ypow, level)?;
    let closed = closed_form_a(&RankinSpec::new(f, g)?, terms)?;
    let diff = (int.value - closed.value).norm();
    let pass = int.agrees_with(&closed)
        && int.relative_error() <= tol
        && closed.relative_error() <= tol
        && int.is_nonzero()
        && closed.is_nonzero();
    let margin = int.error_bound + closed.error_bound - diff;
    let value = format!(
        "integral {:.15e} ± {:.2e}, closed form {:.15e} ± {:.2e}, margin {margin:.2e}",
        int.value.re, int.error_bound, closed.value.re, closed.error_bound
    );
    Ok((value, int.error_bound + closed.error_bound, pass))
}

fn unfold_level1(k: u32, st: &Settings) -> Result<Outcome> {
    let terms = st.order.unwrap_or(2000);
    let tol = st.tol.unwrap_or(1e-6);
    let mut fs = level1_eigenforms(2 * k, terms)?;
    let mut gs = level1_eigenforms(2 * k + 8, terms)?;
    if fs.is_empty() || gs.is_empty() {
        return invalid(format!("S_{} or S_{} is zero at level one", 2 * k, 2 * k + 8));
    }
    let mut notes = QUADRATURE_NOTE.to_string();
    if fs.len() > 1 || gs.len() > 1 {
        notes += &format!("; using the first eigenform of each space ({} and {} available)", fs.len(), gs.len());
    }
    let (f, g) = (fs.remove(0), gs.remove(0));
    let labels = (f.label().to_string(), g.label().to_string());
    let e = FormEvaluator::level1_eisenstein(8, 80)?;
    let (value, bound, pass) = compare_unfolding(f, g, e, 80, terms, tol)?;
    Ok(Outcome {
        inputs: json!({ "k": k, "f": labels.0, "g": labels.1, "terms": terms, "tol": tol }),
        value,
        error_bound: Some(bound),
        pass,
        notes: Some(notes),
    })
}

/// The fixture pair of level `N` with weights `w` and `w + 8`, smallest `w` first.
pub fn fixture_pair(dir: &Path, level: u64) -> Result<(Eigenform, Eigenform)> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut found = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "tsv") {
            let text = std::fs::read_to_string(&path)?;
            let head = NewformFile::parse(text.lines().next().unwrap_or(""))?;
            if head.level == level {
                found.push((head.weight, path));
            }
        }
    }
    found.sort();
    for (w, p) in &found {
        if let Some((_, q)) = found.iter().find(|(w2, _)| *w2 == w + 8) {
            return Ok((ingest_newform(p)?, ingest_newform(q)?));
        }
    }
    Err(Error::Io(format!(
        "no newform fixtures of level {level} with weights w and w + 8 in {}",
        dir.display()
    )))
}

fn unfold_gamma0(level: u64, st: &Settings) -> Result<Outcome> {
    let tol = st.tol.unwrap_or(1e-5);
    let (f, g) = fixture_pair(&st.data_dir, level)?;
    let terms = st.order.unwrap_or(f.order().min(g.order()));
    let labels = (f.label().to_string(), g.label().to_string());
    let e = FormEvaluator::gamma0_eisenstein(8, level, 150)?;
    let (value, bound, pass) = compare_unfolding(f, g, e, 150, terms, tol)?;
    Ok(Outcome {
        inputs: json!({ "N": level, "f": labels.0, "g": labels.1, "terms": terms, "tol": tol }),
        value,
        error_bound: Some(bound),
        pass,
        notes: Some(format!("{QUADRATURE_NOTE}; the adelic normalizing constant C' is not reproduced")),
    })
}

fn nonvanishing(s: f64, st: &Settings) -> Result<Outcome> {
    let terms = st.order.unwrap_or(10_000);
    let tol = st.tol.unwrap_or(1e-8);
    let f = level1_eigenforms(12, terms)?.remove(0);
    let g = level1_eigenforms(20, terms)?.remove(0);
    let labels = (f.label().to_string(), g.label().to_string());
    let spec = RankinSpec::new(f, g)?;
    let dirichlet = certify_nonvanishing_with(&spec, s, terms)?;
    let euler = rankin_euler(&spec, s, terms as u64, &[])?;
    let d = &dirichlet.value;
    let combined = d.error_bound + euler.error_bound;
    let rel = combined / d.value.norm();
    let ratio = dirichlet.margin / d.error_bound;
    let pass = dirichlet.nonzero && ratio >= 1e3 && d.agrees_with(&euler) && rel <= tol;
    Ok(Outcome {
        inputs: json!({ "s": s, "f": labels.0, "g": labels.1, "terms": terms, "primes_up_to": terms, "tol": tol }),
        value: format!(
            "Dirichlet {:.15e} ± {:.2e}, Euler {:.15e} ± {:.2e}; margin {:.3e} = {ratio:.2e} × bound",
            d.value.re, d.error_bound, euler.value.re, euler.error_bound, dirichlet.margin
        ),
        error_bound: Some(d.error_bound),
        pass,
        notes: dirichlet.diagnostic,
    })
}

fn sk_rankin(weight: u32, s: f64, det_bound: i64, st: &Settings) -> Result<Outcome> {
    let tol = st.tol.unwrap_or(1e-6);
    let f = sk_lift_weight(weight, det_bound)?;
    let r = rankin_convolution(&f, &f, s, det_bound)?;
    let full = r.value.value.re;
    let rel = (full - r.half_bound_value).abs() / full.abs();
    let eps: Vec<u32> =
        [(1, 0, 1), (1, 1, 1), (1, 0, 2)].iter().map(|&(n, r, m)| automorphism_count(n, r, m)).collect::<Result<_>>()?;
    let pass = full > 0.0 && rel < tol && eps == [8, 12, 4];
    Ok(Outcome {
        inputs: json!({ "weight": weight, "s": s, "det_bound": det_bound, "tol": tol }),
        value: format!(
            "R = {full:.15e} over {} forms, R(det ≤ {}) = {:.15e}, relative change {rel:.2e}; ε(I, hexagonal, diag(1,2)) = {eps:?}",
            r.terms,
            det_bound / 2,
            r.half_bound_value
        ),
        error_bound: Some(r.value.error_bound),
        pass,
        notes: Some(
            "F = G (lift paired with itself): the shipped weights have one Jacobi cusp form each; \
             the error bound is the doubling estimate, heuristic"
                .into(),
        ),
    })
}
