//! One test per acceptance criterion. Each writes a single PASS/FAIL line to
//! stderr (unbuffered, so it shows even when libtest captures output).

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewspec::density::{density_table, edge_bounds, DensityOptions, TABLE_NS};
use skewspec::eigensolve::{eigenvalues_bisect, eigenvalues_ql, sturm_count, SymTridiagonal};
use skewspec::greens::resonance_grid;
use skewspec::operator::ModelParams;
use skewspec::perturb::{toy_induction_step, trace_curve, ToyStepConfig, TraceOptions};
use skewspec::suite;

fn report(name: &str, pass: bool, detail: String) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] {name}: {detail}");
    pass
}

const EXPECTED_DELTA: [f64; 8] = [
    0.291089, 0.231054, 0.174700, 0.139430, 0.063408, 0.025548, 0.013934, 0.009152,
];

#[test]
fn density_table_reproduction() {
    let start = Instant::now();
    let rows = density_table(&TABLE_NS, &ModelParams::square_root_two_model(), &DensityOptions::default())
        .expect("density table");
    let elapsed = start.elapsed().as_secs_f64();
    let mut misses = Vec::new();
    for (i, (r, want)) in rows.iter().zip(EXPECTED_DELTA).enumerate() {
        let ok = if i < 4 {
            (r.delta - want).abs() <= 2e-3
        } else {
            (r.delta - want).abs() <= 0.15 * want
        };
        if !ok {
            misses.push(format!("N={} delta={:.6e} want {want}", r.n, r.delta));
        }
    }
    let monotone = rows.windows(2).all(|w| w[1].delta <= w[0].delta);
    let fast = elapsed <= 900.0;
    let pass = report(
        "density table (8 sizes, abs 2e-3 / rel 15%, nonincreasing, <= 15 min)",
        misses.is_empty() && monotone && fast,
        format!(
            "{} of 8 sizes off; nonincreasing={monotone}; {elapsed:.0}s; first miss: {}",
            misses.len(),
            misses.first().map_or("-", String::as_str)
        ),
    );
    assert!(pass, "{misses:?}");
}

#[test]
fn spectral_edges() {
    let mut lines = Vec::new();
    let mut pass = true;
    for h in [0.1, 0.5] {
        let p = ModelParams::cosine_skew(2.0, h).unwrap();
        let r = edge_bounds(&p, 2000, 1e-3).unwrap();
        let top = r.emax >= r.max_f + h - 1e-3 && r.emax <= r.max_f + 2.0 * h;
        let bottom = r.emin >= r.min_f - 2.0 * h && r.emin <= r.min_f - h + 1e-3;
        let rayleigh = (r.rayleigh_top - (p.f.eval(r.y_top) + h)).abs() <= 1e-12;
        pass &= top && bottom && rayleigh;
        lines.push(format!("h={h}: max {:.6} min {:.6} rayleigh {:.3e}", r.emax, r.emin, r.rayleigh_top - r.max_f - h));
    }
    assert!(report("edges (h = 0.1, 0.5; N = 2000)", pass, lines.join("; ")));
}

#[test]
fn eigensolver_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut count_misses) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let l = rng.gen_range(1..=12);
        let d: Vec<f64> = (0..l).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let e: Vec<f64> = (1..l).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let t = SymTridiagonal::new(d.clone(), e.clone()).unwrap();
        let m = DMatrix::from_fn(l, l, |i, j| match (i as i64 - j as i64).abs() {
            0 => d[i],
            1 => e[i.min(j)],
            _ => 0.0,
        });
        let mut oracle: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        for ours in [eigenvalues_ql(&t, 0.0), eigenvalues_bisect(&t, 0.0)] {
            assert_eq!(ours.len(), l);
            for (a, b) in ours.iter().zip(&oracle) {
                worst = worst.max((a - b).abs());
            }
        }
        for _ in 0..200 {
            let s = rng.gen_range(-5.0..5.0);
            if sturm_count(&t, s) != oracle.iter().filter(|&&v| v < s).count() {
                count_misses += 1;
            }
        }
    }
    assert!(report(
        "eigensolver vs dense oracle (1000 instances, 200 shifts each)",
        worst <= 1e-10 && count_misses == 0,
        format!("max eigenvalue error {worst:.2e}; Sturm count mismatches {count_misses}"),
    ));
}

#[test]
fn perturbation_lemma() {
    let r = suite::perturbation_suite(1, 100).unwrap();
    let failures = r.iter().filter(|c| !c.all_hold() || c.vector_deviation > 8.0 * c.t).count();
    let ratio = r.iter().map(|c| c.vector_deviation / (8.0 * c.t)).fold(0.0, f64::max);
    assert!(report(
        "perturbation lemma (100 instances)",
        failures == 0 && r.len() == 100,
        format!("{failures} failures; worst deviation / 8t = {ratio:.3}"),
    ));
}

#[test]
fn hellmann_feynman() {
    let r = suite::derivative_suite(1, 100).unwrap();
    let worst = r.iter().map(|c| c.rel_err()).fold(0.0, f64::max);
    assert!(report(
        "Hellmann-Feynman vs finite differences (100 configurations, rel 1e-6)",
        worst <= 1e-6 && r.len() == 100,
        format!("worst relative error {worst:.2e}"),
    ));
}

#[test]
fn suitability_stability() {
    let r = suite::stability_suite(1, 100).unwrap();
    let failures = r.iter().filter(|c| !c.suitable_after).count();
    let margin = r.iter().map(|c| c.margin_after).fold(f64::INFINITY, f64::min);
    assert!(report(
        "suitability stability (100 perturbed instances)",
        failures == 0 && r.len() == 100,
        format!("{failures} failures; smallest remaining margin {margin:.3e}"),
    ));
}

#[test]
fn fast_variable_bound() {
    let cases = suite::fastvar_suite(1, 50, 8, 4000, 64).unwrap();
    let failures = cases.iter().filter(|c| !c.report.pass).count();
    let mismatches: usize = cases.iter().map(|c| c.branch_mismatches.len()).sum();
    let max_r = cases.iter().map(|c| c.report.r).max().unwrap();
    assert!(report(
        "fast-variable resonant measure (50 configurations, R <= 8; branches l <= 64)",
        failures == 0 && mismatches == 0 && max_r <= 8,
        format!("{failures} bound failures; {mismatches} branch count mismatches"),
    ));
}

#[test]
fn curve_tracing() {
    let p = ModelParams::cosine_skew(2.0, 0.1).unwrap();
    let xs: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
    let opts = TraceOptions {
        y0: 0.25,
        ..Default::default()
    };
    let c = trace_curve(&p, -1, 1, 0.0, &xs, 0.25, 0.02, &opts).unwrap();
    let within = c
        .residuals
        .iter()
        .zip(&c.accepted)
        .filter(|(r, &a)| a && r.abs() <= 1e-10)
        .count();
    let frac = within as f64 / xs.len() as f64;
    assert!(report(
        "curve tracing (window [-1,1], h = 0.1, E0 = 0, 500 points)",
        frac >= 0.9,
        format!("{:.1}% of samples with residual <= 1e-10", 100.0 * frac),
    ));
}

#[test]
fn resonance_figure() {
    let p = ModelParams::unit_cosine_skew(0.1).unwrap();
    let g = resonance_grid(&p, 0.0, 1, 0.01, 400, 400).unwrap();
    let frac = g.column_fraction_near(0.25, 0.02);
    assert!(report(
        "resonance grid (h = 0.1, 400x400, tol 0.01)",
        frac >= 0.5,
        format!("{:.1}% of columns marked within 0.02 of y = 0.25", 100.0 * frac),
    ));
}

#[test]
fn gluing_bounds() {
    let r = suite::glue_suite(1, 50).unwrap();
    let failures = r.iter().filter(|s| !s.bounds_hold()).count();
    let ratio = r.iter().map(|s| s.measure_ratio()).fold(f64::INFINITY, f64::min);
    assert!(report(
        "gluing (50 interval families)",
        failures == 0 && r.len() == 50,
        format!("{failures} failures; smallest selected measure ratio {ratio:.3}"),
    ));
}

#[test]
fn toy_induction_step_runs() {
    let log = toy_induction_step(&ModelParams::cosine_skew(2.0, 1e-3).unwrap(), ToyStepConfig::default()).unwrap();
    let failed: Vec<String> = log
        .checks
        .iter()
        .filter(|c| c.required && !c.holds)
        .map(|c| format!("{}:{}", c.stage, c.name))
        .collect();
    assert!(report(
        "toy inductive step",
        log.passed(),
        format!("{} checks logged; failed required: {failed:?}", log.checks.len()),
    ));
}
