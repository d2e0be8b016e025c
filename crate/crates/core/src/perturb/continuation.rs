use serde::Serialize;

use super::curve::{clamp_extend, trace_curve, TraceOptions};
use super::glue::{glue_curves, GlueStats};
use super::initial::{good_x_set, mask_arcs};
use super::isolation::{closed_count, hellmann_feynman, ExtensionBudget};
use crate::circle::{CircleCurve, CircleInterval, PeriodicCurve};
use crate::eigensolve::{eigenpair_nearest, nearest_eigenvalue, EigenPair};
use crate::error::{Error, Result};
use crate::greens::{is_suitable, SuitabilityParams};
use crate::operator::{aligned_distance, build_restriction, weighted_norm, ModelParams, SiteVector};

/// One logged inequality `value <= bound` (or `>=`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub stage: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub relation: &'static str,
    pub holds: bool,
    /// False for quantities that are only reported.
    pub required: bool,
}

impl Check {
    pub fn at_most(stage: &'static str, name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            stage,
            name,
            value,
            bound,
            relation: "<=",
            holds: value <= bound,
            required: true,
        }
    }

    pub fn at_least(stage: &'static str, name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            stage,
            name,
            value,
            bound,
            relation: ">=",
            holds: value >= bound,
            required: true,
        }
    }

    pub fn reported(mut self) -> Self {
        self.required = false;
        self
    }
}

fn required_hold<'a>(checks: impl Iterator<Item = &'a Check>) -> bool {
    checks.filter(|c| c.required).all(|c| c.holds)
}

/// Scales and constants of a single-eigenvalue continuation from
/// `[-M, M]` to `[-R, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuationConfig {
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "N")]
    pub n: i64,
    #[serde(rename = "R")]
    pub r: i64,
    pub gamma: f64,
    pub epsilon: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationReport {
    pub config: ContinuationConfig,
    pub lambda0: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub checks: Vec<Check>,
}

impl ContinuationReport {
    pub fn hypotheses_hold(&self) -> bool {
        required_hold(self.checks.iter().filter(|c| c.stage == "hypothesis"))
    }

    pub fn conclusions_hold(&self) -> bool {
        required_hold(self.checks.iter().filter(|c| c.stage == "conclusion"))
    }
}

/// Centres `n` of `[-R, R]` outside `[-M/10, M/10]` whose window
/// `n + [-N, N]` fits inside, paired with suitability of that window.
fn suitability_failures(params: &ModelParams, cfg: &ContinuationConfig) -> Result<(usize, f64)> {
    let sp = SuitabilityParams::new(cfg.gamma, cfg.gamma * cfg.n as f64, 1)?;
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for c in -cfg.r + cfg.n..=cfg.r - cfg.n {
        if 10 * c.abs() <= cfg.m {
            continue;
        }
        let op = build_restriction(params, c - cfg.n, c + cfg.n)?;
        let v = is_suitable(&op, cfg.e0, &sp)?;
        worst = worst.min(v.worst_margin);
        failures += usize::from(!v.suitable);
    }
    Ok((failures, worst))
}

/// Measure every hypothesis and conclusion of the continuation theorem
/// for `H = H_{h,x,y}` at `params.phase`. Conclusions are evaluated even
/// when a hypothesis fails.
pub fn verify_continuation(params: &ModelParams, cfg: ContinuationConfig) -> Result<ContinuationReport> {
    if !(cfg.r >= cfg.m && cfg.m >= cfg.n && cfg.n >= 1) {
        return Err(Error::validation("need R >= M >= N >= 1"));
    }
    if !(cfg.gamma > 0.0 && cfg.epsilon > 0.0) {
        return Err(Error::validation("gamma and epsilon must be positive"));
    }
    let (gm, eps, e0) = (cfg.gamma * cfg.m as f64, cfg.epsilon, cfg.e0);
    let mut checks = Vec::new();

    let (failures, worst) = suitability_failures(params, &cfg)?;
    checks.push(Check::at_most("hypothesis", "unsuitable_windows", failures as f64, 0.0));
    checks.push(Check::at_least("hypothesis", "worst_suitability_margin", worst, 0.0).reported());
    checks.push(Check::at_most("hypothesis", "epsilon_lower", 40.0 * (-gm / 5.0).exp(), eps));
    checks.push(Check::at_most(
        "hypothesis",
        "epsilon_upper",
        eps,
        (-3.0 * cfg.gamma * cfg.n as f64).exp(),
    ));
    let small = build_restriction(params, -cfg.m, cfg.m)?;
    let (count_m, _) = closed_count(&small, e0 - eps, e0 + eps);
    checks.push(Check::at_most("hypothesis", "eigenvalues_in_window_M", count_m as f64, 1.0));
    checks.push(Check::at_least("hypothesis", "eigenvalues_in_window_M_min", count_m as f64, 1.0));
    let (lambda0, _) = nearest_eigenvalue(&small, e0);
    checks.push(Check::at_most("hypothesis", "lambda0_offset", (lambda0 - e0).abs(), eps / 100.0));

    let big = build_restriction(params, -cfg.r, cfg.r)?;
    let (count_r, _) = closed_count(&big, e0 - eps / 2.0, e0 + eps / 2.0);
    let (e, _) = nearest_eigenvalue(&big, e0);
    checks.push(Check::at_most("conclusion", "eigenvalues_in_half_window_R", count_r as f64, 1.0));
    checks.push(Check::at_least("conclusion", "eigenvalues_in_half_window_R_min", count_r as f64, 1.0));
    checks.push(Check::at_most("conclusion", "shift_from_lambda0", (e - lambda0).abs(), 2.0 * (-gm / 5.0).exp()));
    checks.push(Check::at_most("conclusion", "shift_from_E0", (e - e0).abs(), eps / 10.0));
    let phi = eigenpair_nearest(&small, lambda0, 1e-12)?.psi;
    let psi = eigenpair_nearest(&big, e, 1e-12)?.psi;
    let tail = (-gm / 10.0).exp();
    checks.push(Check::at_most(
        "conclusion",
        "eigenvector_distance",
        aligned_distance(&phi, &psi, SiteVector::norm),
        2.0 * tail,
    ));
    // Expectations of two bounded operators: the potential and the projection onto site 0.
    let diag = big.diag();
    let expect = |v: &SiteVector, w: &dyn Fn(i64) -> f64| -> f64 {
        (v.a()..=v.b()).map(|n| w(n) * v.get(n).powi(2)).sum()
    };
    let pot = |n: i64| diag[(n + cfg.r) as usize];
    let pot_norm = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(Check::at_most(
        "conclusion",
        "potential_expectation_shift",
        (expect(&psi, &pot) - expect(&phi, &pot)).abs(),
        4.0 * pot_norm * tail,
    ));
    let proj = |n: i64| if n == 0 { 1.0 } else { 0.0 };
    checks.push(Check::at_most(
        "conclusion",
        "origin_weight_shift",
        (expect(&psi, &proj) - expect(&phi, &proj)).abs(),
        4.0 * tail,
    ));
    Ok(ContinuationReport {
        config: cfg,
        lambda0,
        e,
        checks,
    })
}

/// Scan seeded random phases, taking `E0` to be the eigenvalue of
/// `H^{[-M, M]}` nearest `f(y)`, until every hypothesis holds.
pub fn find_continuation_instance(
    params: &ModelParams,
    m: i64,
    n: i64,
    r: i64,
    gamma: f64,
    epsilon: f64,
    seed: u64,
    tries: usize,
) -> Result<(ModelParams, ContinuationReport)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..tries {
        let p = params.with_phase(rng.gen(), rng.gen());
        let small = build_restriction(&p, -m, m)?;
        let (e0, _) = nearest_eigenvalue(&small, p.potential(0));
        let cfg = ContinuationConfig {
            m,
            n,
            r,
            gamma,
            epsilon,
            e0,
        };
        let report = verify_continuation(&p, cfg)?;
        if report.hypotheses_hold() {
            return Ok((p, report));
        }
    }
    Err(Error::Hypothesis(format!("no phase among {tries} satisfies the hypotheses")))
}

/// Parameters of one toy-scale induction step `0 -> M1 -> R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToyStepConfig {
    pub y0: f64,
    #[serde(rename = "M1")]
    pub m1: i64,
    #[serde(rename = "R")]
    pub r: i64,
    pub nx: usize,
    /// Slope bound passed to the curve tracer at both scales.
    pub trace_delta: f64,
    /// Number of equal arcs the circle is cut into before gluing.
    pub q: usize,
}

impl Default for ToyStepConfig {
    fn default() -> Self {
        Self {
            y0: 0.25,
            m1: 1,
            r: 4,
            nx: 400,
            trace_delta: 0.05,
            q: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyStepLog {
    pub config: ToyStepConfig,
    pub h: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub checks: Vec<Check>,
    pub selected_arcs: Vec<CircleInterval>,
    pub glue: Option<GlueStats>,
}

impl ToyStepLog {
    pub fn passed(&self) -> bool {
        required_hold(self.checks.iter())
    }
}

fn fraction(mask: &[bool]) -> f64 {
    mask.iter().filter(|&&b| b).count() as f64 / mask.len().max(1) as f64
}

/// Whether the isolated eigenvalue of the small window extends to the big
/// one: an eigenvalue within `eta`, alone in `[E0 - eps, E0 + eps]`, with
/// eigenvectors within `eta` in the weighted norm.
fn extends(small: &SiteVector, big_params: &ModelParams, a: i64, b: i64, e0: f64, eps: f64, eta: f64) -> Result<(bool, f64)> {
    let op = build_restriction(big_params, a, b)?;
    let (count, _) = closed_count(&op, e0 - eps, e0 + eps);
    let (lam, _) = nearest_eigenvalue(&op, e0);
    let pair: EigenPair = eigenpair_nearest(&op, lam, 1e-12)?;
    let w = aligned_distance(small, &pair.psi, weighted_norm);
    Ok((count == 1 && (lam - e0).abs() <= eta && w <= eta, w))
}

/// One inductive step at toy scale: the initial parametrization on
/// `[-M1, M1]` built from `xi_0 = y0`, then its extension to `[-R, R]`
/// via re-tracing on `Q` arcs and gluing. Every inequality is logged;
/// those unreachable at toy scale are marked as reported only.
pub fn toy_induction_step(params: &ModelParams, cfg: ToyStepConfig) -> Result<ToyStepLog> {
    if !(cfg.m1 >= 1 && cfg.r > cfg.m1 && cfg.nx >= 8 && cfg.q >= 1) {
        return Err(Error::validation("toy step needs M1 >= 1, R > M1, nx >= 8, Q >= 1"));
    }
    let h = params.h;
    let base = params.with_phase(0.0, cfg.y0);
    let e0 = base.f.eval(cfg.y0);
    let xs: Vec<f64> = (0..cfg.nx).map(|i| (i as f64 + 0.5) / cfg.nx as f64).collect();
    let mut checks = Vec::new();

    // Scale 0: the 1x1 window has E0 = f(y0) exactly.
    let scale0 = SiteVector::basis(0, 0, 0);
    let op0 = build_restriction(&base, 0, 0)?;
    checks.push(Check::at_most("scale0", "residual", op0.residual_norm(&scale0, e0)?, 0.0));

    let budget = ExtensionBudget::new(&params.f, cfg.y0);
    checks.push(Check::at_most("scale0", "h_three_halves_vs_budget", h.powf(1.5), budget.d.powi(5) / (10.0 * budget.c1)).reported());

    // Initial condition on [-M1, M1] at (x, y0).
    let good = good_x_set(&base, e0, cfg.m1, cfg.nx)?;
    checks.push(Check::at_least("initial", "good_x_measure", good.measure, 0.5).reported());
    let eps1 = h.powf(1.0 / 500.0);
    let eta1 = h.powf(0.25);
    let mut x1_mask = vec![false; cfg.nx];
    let mut worst_w = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        if !good.contains(x) {
            continue;
        }
        let (ok, w) = extends(&scale0, &base.with_phase(x, cfg.y0), -cfg.m1, cfg.m1, e0, eps1, eta1)?;
        x1_mask[i] = ok;
        worst_w = worst_w.max(w);
    }
    let x1_measure = fraction(&x1_mask);
    checks.push(Check::at_most("initial", "good_x_not_extending", good.measure - x1_measure, 1.0 / cfg.nx as f64));
    checks.push(Check::at_most("initial", "eigenvector_w_distance", worst_w, eta1));
    checks.push(Check::at_least("initial", "x1_measure", x1_measure, 1000.0 / (cfg.m1 as f64).sqrt()).reported());

    // The curve xi_1 on [-M1, M1].
    let opts = TraceOptions {
        y0: cfg.y0,
        ..Default::default()
    };
    let xi1 = trace_curve(params, -cfg.m1, cfg.m1, e0, &xs, cfg.trace_delta, eps1, &opts)?;
    let on1: Vec<bool> = (0..cfg.nx).map(|i| xi1.accepted[i] && x1_mask[i]).collect();
    checks.push(Check::at_least("initial", "traced_fraction_of_x1", fraction(&on1), 0.9 * x1_measure));
    let ext_delta = h.powf(0.1);
    let mut dev = 0.0f64;
    let mut vec_dev = 0.0f64;
    let mut dx_max = 0.0f64;
    let mut dy_min = f64::INFINITY;
    for i in (0..cfg.nx).filter(|&i| on1[i]) {
        let p = params.with_phase(xs[i], xi1.xis[i]);
        dev = dev.max((xi1.xis[i] - cfg.y0).abs());
        let hf = hellmann_feynman(&p, -cfg.m1, cfg.m1, e0, eps1)?;
        vec_dev = vec_dev.max(aligned_distance(&scale0, &hf.pair.psi, weighted_norm));
        dx_max = dx_max.max(hf.dlam_dx.abs());
        dy_min = dy_min.min(hf.dlam_dy.abs());
    }
    checks.push(Check::at_most("initial", "xi1_minus_y0", dev, ext_delta));
    checks.push(Check::at_most("initial", "xi1_slope", xi1.max_accepted_slope(), ext_delta));
    checks.push(Check::at_most("initial", "xi1_eigenvector_w_distance", vec_dev, ext_delta));
    checks.push(Check::at_most("initial", "dlambda_dx", dx_max, 0.25 * budget.d.powi(5)));
    checks.push(Check::at_least("initial", "dlambda_dy", dy_min, 4.0 * budget.d));
    checks.push(Check::at_most("initial", "xi1_slope_third", xi1.max_accepted_slope() + eps1, 1.0 / 3.0).reported());

    // Extension to [-R, R] along xi_1.
    let eps_r = eps1 / 1000.0;
    let eta_r = h.sqrt();
    let mut xt_mask = vec![false; cfg.nx];
    for i in (0..cfg.nx).filter(|&i| on1[i]) {
        let small_params = params.with_phase(xs[i], xi1.xis[i]);
        let small = build_restriction(&small_params, -cfg.m1, cfg.m1)?;
        let phi = eigenpair_nearest(&small, nearest_eigenvalue(&small, e0).0, 1e-12)?.psi;
        xt_mask[i] = extends(&phi, &small_params, -cfg.r, cfg.r, e0, eps_r, eta_r)?.0;
    }
    let xt_measure = fraction(&xt_mask);
    checks.push(Check::at_least("scale_R", "extending_fraction", xt_measure, 0.5 * fraction(&on1)));

    let xi_r = trace_curve(params, -cfg.r, cfg.r, e0, &xs, cfg.trace_delta, eps_r, &opts)?;
    let base_pts: (Vec<f64>, Vec<f64>) = (0..cfg.nx)
        .filter(|&i| xi1.accepted[i])
        .map(|i| (xs[i], xi1.xis[i]))
        .unzip();
    let base_curve = PeriodicCurve::new(base_pts.0, base_pts.1)?;
    let glue_eps = 1.0 / cfg.q as f64;
    let glue_delta = eta_r;
    let l0 = 2.0 * cfg.trace_delta;
    let mut locals: Vec<(CircleInterval, Box<dyn CircleCurve>)> = Vec::new();
    let mut dropped = 0usize;
    for q in 0..cfg.q {
        let arc = CircleInterval::new(q as f64 * glue_eps, glue_eps)?;
        let Ok(local) = clamp_extend(&xi_r, arc.start, arc.end()) else {
            dropped += 1;
            continue;
        };
        let ok = (0..=200).all(|k| {
            let x = arc.start + arc.len * k as f64 / 200.0;
            (local.value(x) - base_curve.value(x)).abs() < glue_delta
        });
        if ok {
            locals.push((arc, Box::new(local)));
        } else {
            dropped += 1;
        }
    }
    checks.push(Check::at_most("scale_R", "dropped_arcs", dropped as f64, cfg.q as f64 / 2.0).reported());
    let frak_x = mask_arcs(&xt_mask);
    let glued = glue_curves(Box::new(base_curve), locals, glue_eps, glue_delta, l0, &frak_x)?;
    let stats = glued.stats;
    checks.push(Check::at_most("glue", "slope", stats.max_slope, stats.slope_bound * (1.0 + 1e-9)));
    checks.push(Check::at_most("glue", "deviation", stats.sup_deviation, stats.deviation_bound));
    checks.push(Check::at_least("glue", "measure_ratio", stats.measure_ratio(), 1.0 / 3.0 - 1e-12));
    let selected_arcs: Vec<CircleInterval> = glued.curve.pieces().copied().collect();
    let mut sel_dev = 0.0f64;
    let mut sel_w = 0.0f64;
    for i in (0..cfg.nx).filter(|&i| xt_mask[i] && xi_r.accepted[i]) {
        if !selected_arcs.iter().any(|a| a.contains(xs[i])) {
            continue;
        }
        sel_dev = sel_dev.max((glued.curve.value(xs[i]) - xi1.xis[i]).abs());
        let p1 = params.with_phase(xs[i], xi1.xis[i]);
        let pr = params.with_phase(xs[i], glued.curve.value(xs[i]));
        let small = build_restriction(&p1, -cfg.m1, cfg.m1)?;
        let bigop = build_restriction(&pr, -cfg.r, cfg.r)?;
        let u = eigenpair_nearest(&small, nearest_eigenvalue(&small, e0).0, 1e-12)?.psi;
        let v = eigenpair_nearest(&bigop, nearest_eigenvalue(&bigop, e0).0, 1e-12)?.psi;
        sel_w = sel_w.max(aligned_distance(&u, &v, weighted_norm));
    }
    checks.push(Check::at_most("scale_R", "glued_minus_xi1", sel_dev, 2.0 * eta_r));
    checks.push(Check::at_most("scale_R", "eigenvector_w_distance", sel_w, 2.0 * eta_r));
    Ok(ToyStepLog {
        config: cfg,
        h,
        e0,
        checks,
        selected_arcs,
        glue: Some(stats),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuation_on_a_feasible_instance() {
        let p = ModelParams::cosine_skew(2.0, 1e-4).unwrap();
        let (_, r) = find_continuation_instance(&p, 40, 2, 60, 3.0, 5e-9, 81, 200).unwrap();
        for c in &r.checks {
            assert!(c.holds || !c.required, "{c:?}");
        }
        assert!(r.conclusions_hold());
    }

    #[test]
    fn continuation_flags_bad_epsilon() {
        let p = ModelParams::cosine_skew(2.0, 1e-3).unwrap();
        let cfg = ContinuationConfig {
            m: 10,
            n: 2,
            r: 20,
            gamma: 3.0,
            epsilon: 0.1,
            e0: p.potential(0),
        };
        let r = verify_continuation(&p, cfg).unwrap();
        assert!(!r.hypotheses_hold());
        let upper = r.checks.iter().find(|c| c.name == "epsilon_upper").unwrap();
        assert!(!upper.holds);
    }

    #[test]
    fn toy_step_runs_end_to_end() {
        let p = ModelParams::cosine_skew(2.0, 1e-3).unwrap();
        let log = toy_induction_step(&p, ToyStepConfig { nx: 200, ..Default::default() }).unwrap();
        for c in &log.checks {
            assert!(c.holds || !c.required, "{c:?}");
        }
        assert!(!log.selected_arcs.is_empty());
        assert!(log.checks.iter().any(|c| !c.required));
    }
}
