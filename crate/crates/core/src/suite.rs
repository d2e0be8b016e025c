//! Seeded randomized harnesses that exercise the perturbation, derivative,
//! suitability, gluing and fast-variable statements on many instances.
//! Each returns one record per instance; callers decide what passes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circle::{CircleCurve, CircleInterval, TrigCurve};
use crate::dynamics::{Frequency, PotentialForm, SamplingFunction, TorusPoint};
use crate::eigensolve::{eigenvalues_all, kth_eigenvalue};
use crate::error::{Error, Result};
use crate::fastvar::{branch_inverses, resonant_measure, FastVarConfig, RectUnion, ResonantReport, TorusRect, TorusSet};
use crate::greens::{is_suitable, SuitabilityParams};
use crate::operator::{build_restriction, ModelParams, WindowOperator};
use crate::perturb::{glue_curves, hellmann_feynman, verify_perturbation_bound, GlueStats, PerturbationReport};

/// Give up after this many rejected draws per requested instance.
const MAX_DRAWS_PER_CASE: usize = 1000;

fn random_skew(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        SamplingFunction::cosine(2.0),
        Frequency::sqrt2(),
        rng.gen_range(0.05..0.5),
        TorusPoint::new(rng.gen(), rng.gen()),
        PotentialForm::Skew,
    )
    .expect("h is positive")
}

/// Distance from the `k`-th eigenvalue to its neighbours.
fn local_gap(ev: &[f64], k: usize) -> f64 {
    let below = if k > 0 { ev[k] - ev[k - 1] } else { f64::INFINITY };
    let above = if k + 1 < ev.len() { ev[k + 1] - ev[k] } else { f64::INFINITY };
    below.min(above)
}

fn exhausted(name: &str) -> Error {
    Error::Hypothesis(format!("{name}: too many rejected draws"))
}

/// Pairs `A = H^{[-n,n]}`, `B = A + diag(d)` with `|d| <= t eps`, where
/// `A` has an `eps`-isolated eigenvalue within `eps/4` of `E0`.
pub fn perturbation_suite(seed: u64, count: usize) -> Result<Vec<PerturbationReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > MAX_DRAWS_PER_CASE * count.max(1) {
            return Err(exhausted("perturbation suite"));
        }
        let p = random_skew(&mut rng);
        let n = rng.gen_range(1..=6);
        let a = build_restriction(&p, -n, n)?;
        let ev = eigenvalues_all(&a, 0.0).eigenvalues;
        let k = rng.gen_range(0..ev.len());
        let gap = local_gap(&ev, k);
        let eps = if gap.is_finite() { rng.gen_range(0.3..0.9) * gap } else { 1.0 };
        let e0 = ev[k] + rng.gen_range(-0.25..0.25) * eps;
        let t = rng.gen_range(0.01..0.24);
        let size = t * eps;
        let d: Vec<f64> = (0..a.len()).map(|_| rng.gen_range(-size..=size)).collect();
        let b = a.perturbed(&d, a.h())?;
        match verify_perturbation_bound(&a, &b, e0, eps, t) {
            Ok(r) => out.push(r),
            Err(Error::Hypothesis(_)) | Err(Error::NotIsolated { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Eigenvalue derivatives from expectations against central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCase {
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub n: i64,
    pub index: usize,
    pub dlam_dx: f64,
    pub fd_dx: f64,
    pub dlam_dy: f64,
    pub fd_dy: f64,
}

/// Relative error floor: derivatives below this size are compared in
/// absolute terms.
pub const DERIVATIVE_FLOOR: f64 = 1e-3;

impl DerivativeCase {
    pub fn rel_err(&self) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(DERIVATIVE_FLOOR);
        rel(self.dlam_dx, self.fd_dx).max(rel(self.dlam_dy, self.fd_dy))
    }
}

/// Richardson-extrapolated central difference of `g` at 0.
fn central_difference(g: impl Fn(f64) -> f64, s: f64) -> f64 {
    let d = |s: f64| (g(s) - g(-s)) / (2.0 * s);
    (4.0 * d(0.5 * s) - d(s)) / 3.0
}

pub fn derivative_suite(seed: u64, count: usize) -> Result<Vec<DerivativeCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > MAX_DRAWS_PER_CASE * count.max(1) {
            return Err(exhausted("derivative suite"));
        }
        let p = random_skew(&mut rng);
        let n = rng.gen_range(1..=5);
        let op = build_restriction(&p, -n, n)?;
        let ev = eigenvalues_all(&op, 0.0).eigenvalues;
        let k = rng.gen_range(0..ev.len());
        let gap = local_gap(&ev, k);
        if gap < 1e-3 {
            continue;
        }
        let hf = hellmann_feynman(&p, -n, n, ev[k], 0.5 * gap.min(1.0))?;
        let (x, y) = (p.phase.x, p.phase.y);
        let lam = |x: f64, y: f64| -> f64 {
            let op = build_restriction(&p.with_phase(x, y), -n, n).expect("window is valid");
            kth_eigenvalue(&op, hf.index, 0.0)
        };
        let s = 1e-6;
        out.push(DerivativeCase {
            x,
            y,
            h: p.h,
            n,
            index: hf.index,
            dlam_dx: hf.dlam_dx,
            fd_dx: central_difference(|d| lam(x + d, y), s),
            dlam_dy: hf.dlam_dy,
            fd_dy: central_difference(|d| lam(x, y + d), s),
        });
    }
    Ok(out)
}

/// A `(gamma, Gamma, p + 1)`-suitable window perturbed by at most
/// `2^{-(p+2)} e^{-3 gamma N}` on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCase {
    #[serde(rename = "N")]
    pub n: i64,
    pub gamma: f64,
    pub big_gamma: f64,
    pub p: u32,
    pub energy: f64,
    pub perturbation: f64,
    pub margin_before: f64,
    pub margin_after: f64,
    pub suitable_after: bool,
}

pub fn stability_suite(seed: u64, count: usize) -> Result<Vec<StabilityCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > MAX_DRAWS_PER_CASE * count.max(1) {
            return Err(exhausted("stability suite"));
        }
        let n = rng.gen_range(2..=6i64);
        let h = rng.gen_range(0.001..0.1);
        let gamma = rng.gen_range(0.5..2.0);
        let p = rng.gen_range(0..4u32);
        let big_gamma = (gamma * n as f64).max(1.01);
        let strong = SuitabilityParams::new(gamma, big_gamma, p + 1)?;
        let weak = SuitabilityParams::new(gamma, big_gamma, p)?;
        let diag = (0..2 * n + 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let op = WindowOperator::from_parts(-n, diag, h)?;
        let e = rng.gen_range(-2.0..2.0);
        let before = is_suitable(&op, e, &strong)?;
        if !before.suitable {
            continue;
        }
        let size = 2f64.powi(-(p as i32 + 2)) * (-3.0 * gamma * n as f64).exp();
        // push every entry to the edge of the allowed ball
        let d: Vec<f64> = (0..op.len()).map(|_| if rng.gen() { size } else { -size }).collect();
        let after = is_suitable(&op.perturbed(&d, h)?, e, &weak)?;
        out.push(StabilityCase {
            n,
            gamma,
            big_gamma,
            p,
            energy: e,
            perturbation: size,
            margin_before: before.worst_margin,
            margin_after: after.worst_margin,
            suitable_after: after.suitable,
        });
    }
    Ok(out)
}

/// Random families of local curves within `delta` of a trigonometric base,
/// glued with separation `eps`.
pub fn glue_suite(seed: u64, count: usize) -> Result<Vec<GlueStats>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let base = TrigCurve {
            c0: rng.gen(),
            terms: vec![(rng.gen_range(1..4), rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02))],
        };
        let eps = rng.gen_range(0.02..0.08);
        let delta = rng.gen_range(0.002..0.02);
        let mut locals: Vec<(CircleInterval, Box<dyn CircleCurve>)> = Vec::new();
        let mut l0 = base.slope_bound();
        let mut x = rng.gen_range(0.0..0.1);
        loop {
            let len = rng.gen_range(eps..3.0 * eps);
            if x + len > 0.99 {
                break;
            }
            let k = rng.gen_range(1..6);
            let amp = rng.gen_range(0.0..0.9) * delta;
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let bump = TrigCurve {
                c0: 0.0,
                terms: vec![(k, amp * phase.cos(), amp * phase.sin())],
            };
            l0 = l0.max(base.slope_bound() + bump.slope_bound());
            let mut local = base.clone();
            local.terms.extend(bump.terms);
            locals.push((CircleInterval::new(x, len)?, Box::new(local)));
            x += len + rng.gen_range(0.0..0.05);
        }
        if locals.is_empty() {
            continue;
        }
        let frak_x: Vec<CircleInterval> = (0..rng.gen_range(1..4))
            .map(|j| CircleInterval::new(j as f64 / 3.0 + rng.gen_range(0.0..0.1), rng.gen_range(0.05..0.3)))
            .collect::<Result<_>>()?;
        out.push(glue_curves(Box::new(base), locals, eps, delta, l0, &frak_x)?.stats);
    }
    Ok(out)
}

/// One synthetic-`U` resonant-measure scan plus branch counts at every
/// `l <= max_branch_ell`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FastVarCase {
    pub report: ResonantReport,
    pub rectangles: usize,
    /// `(l, number of preimages)` pairs that differed from `l`.
    pub branch_mismatches: Vec<(i64, usize)>,
}

pub fn fastvar_suite(seed: u64, count: usize, max_r: i64, nx: usize, max_branch_ell: i64) -> Result<Vec<FastVarCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(1..=max_r);
            let k = rng.gen_range(1..4);
            let s = 0.3 / (std::f64::consts::TAU * k as f64);
            let u: f64 = rng.gen();
            let xi = TrigCurve {
                c0: rng.gen(),
                terms: vec![(k, s * u, s * (1.0 - u))],
            };
            let rects = (0..rng.gen_range(1..=4))
                .map(|_| {
                    let side = 10f64.powf(rng.gen_range(-4.0..-1.3));
                    TorusRect::new(rng.gen(), rng.gen(), side, side * rng.gen_range(0.5..2.0))
                })
                .collect::<Result<Vec<_>>>()?;
            let set = RectUnion::new(rects);
            let m = set.max_section_intervals().max(1);
            let cfg = FastVarConfig::new(Box::new(xi), Frequency::sqrt2(), r, m)?;
            let report = resonant_measure(&cfg, &set, nx)?;
            let y: f64 = rng.gen();
            let mut branch_mismatches = Vec::new();
            for ell in 1..=max_branch_ell {
                let found = branch_inverses(&cfg, ell, y).map(|v| v.len()).unwrap_or(0);
                if found != ell as usize {
                    branch_mismatches.push((ell, found));
                }
            }
            Ok(FastVarCase {
                report,
                rectangles: set.rects.len(),
                branch_mismatches,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_reproducible_and_pass() {
        let a = perturbation_suite(1, 10).unwrap();
        assert_eq!(a, perturbation_suite(1, 10).unwrap());
        assert!(a.iter().all(PerturbationReport::all_hold));
        let d = derivative_suite(2, 10).unwrap();
        assert!(d.iter().all(|c| c.rel_err() <= 1e-6), "{d:?}");
        let s = stability_suite(3, 10).unwrap();
        assert!(s.iter().all(|c| c.suitable_after));
        let g = glue_suite(4, 5).unwrap();
        assert!(g.iter().all(|s| s.bounds_hold() && s.measure_ratio() >= 1.0 / 3.0));
        let f = fastvar_suite(5, 3, 3, 500, 8).unwrap();
        assert!(f.iter().all(|c| c.report.pass && c.branch_mismatches.is_empty()));
    }
}
