//! The ten acceptance criteria, each at its stated tolerance and time limit.
//! The summary lines go straight to stdout, so they show even when output is captured.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use mverify::app::newform_file::{ingest_newform, NewformFile};
use mverify::app::serialize_newform;
use mverify::jacobi::{automorphism_count, jacobi_eisenstein, jacobi_theta_e8, rankin_convolution, sk_lift_weight};
use mverify::lattice::{builtin_gram, theta_deg1, theta_deg2, Builtin};
use mverify::lseries::{certify_nonvanishing, closed_form_a, rankin_dirichlet, rankin_euler, Certified, RankinSpec};
use mverify::modforms::{
    check_multiplicativity, eisenstein_q, level1_eigenforms, level2_weight16_newform, level2_weight8_newform,
    satake_params, tilde_f, Eigenform,
};
use mverify::quadrature::{
    eisenstein_direct_eval, eval_form, petersson_integral, FormEvaluator,
};
use num_complex::Complex64;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn fixtures() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn theta_identities() -> Outcome {
    const Q: usize = 20;
    let e8 = theta_deg1(&builtin_gram(Builtin::E8).map_err(e)?, Q).map_err(e)?;
    ensure(e8 == eisenstein_q(4, Q).map_err(e)?, "θ_E8 ≠ E4")?;
    let v = theta_deg1(&builtin_gram(Builtin::V).map_err(e)?, Q).map_err(e)?;
    ensure(v == e8, "θ_V ≠ θ_E8")?;
    let eight = eisenstein_q(8, Q).map_err(e)?;
    ensure(theta_deg1(&builtin_gram(Builtin::E8E8).map_err(e)?, Q).map_err(e)? == eight, "θ_{E8⊕E8} ≠ E8")?;
    ensure(theta_deg1(&builtin_gram(Builtin::D16Plus).map_err(e)?, Q).map_err(e)? == eight, "θ_{D16+} ≠ E8")?;
    Ok(format!("θ_E8 = θ_V = E4 and θ_{{E8⊕E8}} = θ_{{D16+}} = E8 through q^{Q}"))
}

fn unimodularity_of_v() -> Outcome {
    let v = builtin_gram(Builtin::V).map_err(e)?;
    let det = v.determinant();
    ensure(det == 1.into(), format!("det(V) = {det}"))?;
    ensure(v.is_even(), "V has an odd diagonal entry")?;
    Ok(format!("det(V) = {det}, diagonal even"))
}

fn unfolding_comparison(int: &Certified, closed: &Certified, rel: f64) -> Outcome {
    ensure(int.agrees_with(closed), format!("integral {int:?} and closed form {closed:?} disagree"))?;
    ensure(int.relative_error() <= rel, format!("integral bound {:e} relative", int.relative_error()))?;
    ensure(closed.relative_error() <= rel, format!("closed-form bound {:e} relative", closed.relative_error()))?;
    ensure(int.is_nonzero(), "integral not certified nonzero")?;
    Ok(format!(
        "integral {:.12e} ± {:.1e}, closed form {:.12e} ± {:.1e}",
        int.value.re, int.error_bound, closed.value.re, closed.error_bound
    ))
}

fn unfolding_level1() -> Outcome {
    let f = level1_eigenforms(12, 2000).map_err(e)?.remove(0);
    let g = level1_eigenforms(20, 2000).map_err(e)?.remove(0);
    let fe = FormEvaluator::cusp_form(&f, 80).map_err(e)?;
    let ge = FormEvaluator::cusp_form(&g, 80).map_err(e)?;
    let ee = FormEvaluator::level1_eisenstein(8, 80).map_err(e)?;
    let int = petersson_integral(&fe, &ge, &ee, 20.0, 1).map_err(e)?;
    let closed = closed_form_a(&RankinSpec::new(f, g).map_err(e)?, 2000).map_err(e)?;
    unfolding_comparison(&int, &closed, 1e-6)
}

fn nonvanishing_at_four() -> Outcome {
    let f = level1_eigenforms(12, 10_000).map_err(e)?.remove(0);
    let g = level1_eigenforms(20, 10_000).map_err(e)?.remove(0);
    let spec = RankinSpec::new(f, g).map_err(e)?;
    let report = certify_nonvanishing(&spec, 4.0).map_err(e)?;
    ensure(report.nonzero, "not certified nonzero")?;
    ensure(report.terms == 10_000, format!("used {} terms", report.terms))?;
    let ratio = report.margin / report.value.error_bound;
    ensure(ratio >= 1e3, format!("margin only {ratio:e} × bound"))?;
    let dirichlet = rankin_dirichlet(&spec, 4.0, 10_000).map_err(e)?;
    let euler = rankin_euler(&spec, 4.0, 10_000, &[]).map_err(e)?;
    ensure(dirichlet.agrees_with(&euler), format!("{dirichlet:?} vs {euler:?}"))?;
    let rel = (dirichlet.error_bound + euler.error_bound) / dirichlet.value.norm();
    ensure(rel <= 1e-8, format!("combined bound {rel:e} relative"))?;
    Ok(format!(
        "L(4) = {:.12e}, margin {ratio:.1e} × bound, Euler/Dirichlet combined bound {rel:.1e} relative",
        dirichlet.value.re
    ))
}

fn unfolding_gamma0() -> Outcome {
    let f = ingest_newform(fixtures().join("2.8.a.a.tsv")).map_err(e)?;
    let g = ingest_newform(fixtures().join("2.16.a.a.tsv")).map_err(e)?;
    let fe = FormEvaluator::cusp_form(&f, 150).map_err(e)?;
    let ge = FormEvaluator::cusp_form(&g, 150).map_err(e)?;
    let ee = FormEvaluator::gamma0_eisenstein(8, 2, 150).map_err(e)?;
    let int = petersson_integral(&fe, &ge, &ee, 16.0, 2).map_err(e)?;
    let closed = closed_form_a(&RankinSpec::new(f, g).map_err(e)?, 2000).map_err(e)?;
    unfolding_comparison(&int, &closed, 1e-5)
}

fn eisenstein_cross_check() -> Outcome {
    let ev = FormEvaluator::gamma0_eisenstein(8, 2, 60).map_err(e)?;
    let mut worst: f64 = 0.0;
    for tau in [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(1.0 / 3.0, 1.0)] {
        let a = eval_form(&ev, tau).map_err(e)?;
        let b = eisenstein_direct_eval(8, 2, tau).map_err(e)?;
        let diff = (a.value - b.value).norm();
        ensure(diff <= 1e-8, format!("τ = {tau}: difference {diff:e}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("max difference {worst:.1e} at τ ∈ {{i, 2i, 1/3 + i}}"))
}

fn degree2_genus() -> Outcome {
    let a = theta_deg2(&builtin_gram(Builtin::E8E8).map_err(e)?, 3).map_err(e)?;
    let b = theta_deg2(&builtin_gram(Builtin::D16Plus).map_err(e)?, 3).map_err(e)?;
    ensure(a.counts == b.counts, "degree-2 tables differ")?;
    ensure(!a.counts.is_empty(), "empty table")?;
    Ok(format!("{} reduced keys with n + m ≤ 3 identical", a.counts.len()))
}

fn jacobi_oracle() -> Outcome {
    let eis = jacobi_eisenstein(4, 40).map_err(e)?;
    let theta = jacobi_theta_e8(40).map_err(e)?;
    ensure(eis == theta, "E_{4,1} and the E8 theta differ")?;
    Ok("E_{4,1} = θ_{E8} Jacobi form for all D ≤ 40".into())
}

fn rankin_convolution_check() -> Outcome {
    let f = sk_lift_weight(10, 100).map_err(e)?;
    let r50 = rankin_convolution(&f, &f, 16.0, 50).map_err(e)?.value.value.re;
    let r100 = rankin_convolution(&f, &f, 16.0, 100).map_err(e)?.value.value.re;
    let rel = (r100 - r50).abs() / r100.abs();
    ensure(r100 > 0.0, "R is not positive")?;
    ensure(rel < 1e-6, format!("relative change {rel:e}"))?;
    let eps: Vec<u32> = [(1, 0, 1), (1, 1, 1), (1, 0, 2)]
        .iter()
        .map(|&(n, r, m)| automorphism_count(n, r, m))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    ensure(eps == [8, 12, 4], format!("ε = {eps:?}"))?;
    Ok(format!("R(16) = {r100:.12e}, change 50 → 100 {rel:.1e}, ε = {eps:?}"))
}

fn satake_identity(f: &Eigenform, limit: usize) -> Result<f64, String> {
    let w = f.weight() as f64;
    let mut worst: f64 = 0.0;
    for n in 1..=limit {
        if mverify::arith::gcd(n as i64, f.level() as i64) != 1 {
            continue;
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for (p, v) in mverify::arith::factorize(n as u64) {
            let alpha = satake_params(f, p).map_err(e)?.alpha;
            prod *= tilde_f(v, alpha);
        }
        let rhs = f.a_f64(n) / (n as f64).powf((w - 1.0) / 2.0);
        let err = (prod - rhs).norm() / rhs.abs().max(1.0);
        ensure(err <= 1e-10, format!("{} at N = {n}: {prod} vs {rhs}", f.label()))?;
        worst = worst.max(err);
    }
    Ok(worst)
}

fn property_suites() -> Outcome {
    // every eigenform the crate ships: level one through weight 28, and the two level-2 newforms
    let mut forms = Vec::new();
    for w in (12..=28).step_by(2) {
        forms.extend(level1_eigenforms(w, 2500).map_err(e)?);
    }
    let f8 = ingest_newform(fixtures().join("2.8.a.a.tsv")).map_err(e)?;
    let f16 = ingest_newform(fixtures().join("2.16.a.a.tsv")).map_err(e)?;
    forms.push(level2_weight8_newform(2500).map_err(e)?);
    forms.push(level2_weight16_newform(2500).map_err(e)?);
    for f in &forms {
        check_multiplicativity(f, 2500).map_err(|v| format!("{}: a({}·{}) fails", f.label(), v.m, v.n))?;
    }
    let mut worst: f64 = 0.0;
    for f in &forms {
        worst = worst.max(satake_identity(f, 500)?);
    }

    let one = FormEvaluator::constant(1.0);
    let vol = petersson_integral(&one, &one, &one, 0.0, 1).map_err(e)?;
    let vol_err = (vol.value.re - std::f64::consts::PI / 3.0).abs();
    ensure(vol_err <= 1e-6, format!("volume off by {vol_err:e}"))?;

    ensure(f8 == level2_weight8_newform(2000).map_err(e)?, "weight-8 fixture differs from regeneration")?;
    ensure(f16 == level2_weight16_newform(2000).map_err(e)?, "weight-16 fixture differs from regeneration")?;
    for f in &forms {
        let back = NewformFile::parse(&serialize_newform(f)).and_then(|p| p.into_eigenform()).map_err(e)?;
        ensure(&back == f, format!("{} does not round-trip", f.label()))?;
    }
    Ok(format!(
        "multiplicativity on {} eigenforms, Satake identity to {worst:.1e}, volume error {vol_err:.1e}, round trips exact",
        forms.len()
    ))
}

fn report(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("theta identities", Duration::from_secs(60), theta_identities),
        ("unimodularity of V", Duration::from_secs(5), unimodularity_of_v),
        ("unfolding at level 1", Duration::from_secs(120), unfolding_level1),
        ("non-vanishing at s = 4", Duration::from_secs(60), nonvanishing_at_four),
        ("Γ0(2) unfolding", Duration::from_secs(300), unfolding_gamma0),
        ("Eisenstein cross-check", Duration::from_secs(60), eisenstein_cross_check),
        ("degree-2 genus identity", Duration::from_secs(600), degree2_genus),
        ("Jacobi oracle equivalence", Duration::from_secs(120), jacobi_oracle),
        ("Rankin convolution", Duration::from_secs(300), rankin_convolution_check),
        ("property suites", Duration::from_secs(300), property_suites),
    ];
    let mut failures = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= *limit {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {elapsed:.1?}, limit {limit:?}"))
            }
        });
        match &outcome {
            Ok(msg) => report(format!("criterion {:>2} PASS  {name}: {msg} [{elapsed:.2?}]", i + 1)),
            Err(msg) => {
                report(format!("criterion {:>2} FAIL  {name}: {msg} [{elapsed:.2?}]", i + 1));
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
