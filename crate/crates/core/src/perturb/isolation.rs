use serde::Serialize;

use crate::dynamics::SamplingFunction;
use crate::eigensolve::{eigenpair_nearest, kth_eigenvalue, sturm_count, EigenPair};
use crate::error::{Error, Result};
use crate::operator::{
    aligned_distance, build_restriction, derivative_diagonal, Direction, ModelParams, SiteVector,
    WindowOperator,
};

/// Witness that `[E0 - epsilon, E0 + epsilon]` contains exactly one
/// eigenvalue `lambda` of the restriction to `[a, b]`, optionally with
/// `|lambda - E0| <= eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsolationCertificate {
    #[serde(rename = "E0")]
    pub e0: f64,
    pub epsilon: f64,
    pub eta: Option<f64>,
    pub lambda: f64,
    /// 0-based position of `lambda` in the spectrum.
    pub index: usize,
    pub a: i64,
    pub b: i64,
}

/// Number of eigenvalues in the closed interval `[lo, hi]` and the count below `lo`.
pub(crate) fn closed_count(op: &WindowOperator, lo: f64, hi: f64) -> (usize, usize) {
    let below = sturm_count(op, lo);
    (sturm_count(op, hi.next_up()) - below, below)
}

pub fn check_isolated(
    op: &WindowOperator,
    e0: f64,
    epsilon: f64,
    eta: Option<f64>,
) -> Result<IsolationCertificate> {
    if !(epsilon > 0.0) {
        return Err(Error::validation("epsilon must be positive"));
    }
    if let Some(eta) = eta {
        if !(eta >= 0.0 && eta < epsilon) {
            return Err(Error::validation("eta must lie in [0, epsilon)"));
        }
    }
    let (lo, hi) = (e0 - epsilon, e0 + epsilon);
    let (count, below) = closed_count(op, lo, hi);
    if count != 1 {
        return Err(Error::NotIsolated { lo, hi, count });
    }
    let lambda = kth_eigenvalue(op, below, 0.0);
    if let Some(eta) = eta {
        if (lambda - e0).abs() > eta {
            return Err(Error::Hypothesis(format!(
                "isolated eigenvalue {lambda} is {:e} from E0, more than eta = {eta:e}",
                (lambda - e0).abs()
            )));
        }
    }
    Ok(IsolationCertificate {
        e0,
        epsilon,
        eta,
        lambda,
        index: below,
        a: op.a(),
        b: op.b(),
    })
}

/// `d = max(|f'(y0)|, 1) / 10`, `C1 = 10 ||f'||_inf` and the extension
/// threshold `d^5 / (2 C1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionBudget {
    pub d: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub delta_cap: f64,
}

impl ExtensionBudget {
    pub fn new(f: &SamplingFunction, y0: f64) -> Self {
        let d = 0.1 * f.eval_deriv(y0).abs().max(1.0);
        let c1 = 10.0 * f.deriv_sup_norm();
        Self {
            d,
            c1,
            delta_cap: d.powi(5) / (2.0 * c1),
        }
    }
}

/// Measured conclusions of the perturbation lemma for a pair `A`, `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub t: f64,
    pub epsilon: f64,
    /// Max row sum of `A - B`.
    pub distance: f64,
    pub eigenvalue_a: f64,
    pub eigenvalue_b: f64,
    /// `|lambda - E|` against the bound `t epsilon`.
    pub shift: f64,
    /// Whether `B` has exactly one eigenvalue in `[E0 - 3 eps / 4, E0 + 3 eps / 4]`.
    pub unique: bool,
    /// `min_a ||phi - a psi||` against the bound `8 t`.
    pub vector_deviation: f64,
}

impl PerturbationReport {
    pub fn shift_holds(&self) -> bool {
        self.shift <= self.t * self.epsilon * (1.0 + 1e-12) + 1e-14
    }

    pub fn vector_holds(&self) -> bool {
        self.vector_deviation <= 8.0 * self.t
    }

    pub fn all_hold(&self) -> bool {
        self.shift_holds() && self.unique && self.vector_holds()
    }
}

/// Max row sum of the tridiagonal difference `A - B`.
pub fn operator_distance(a: &WindowOperator, b: &WindowOperator) -> Result<f64> {
    if a.a() != b.a() || a.len() != b.len() {
        return Err(Error::WindowMismatch {
            expected_a: a.a(),
            expected_b: a.b(),
            got_a: b.a(),
            got_b: b.b(),
        });
    }
    let n = a.len();
    let dh = (a.h() - b.h()).abs();
    Ok((0..n)
        .map(|i| {
            let couplings = (i > 0) as u8 + (i + 1 < n) as u8;
            (a.diag()[i] - b.diag()[i]).abs() + couplings as f64 * dh
        })
        .fold(0.0, f64::max))
}

/// Check the hypotheses of the perturbation lemma for `A`, `B`, then measure
/// its three conclusions.
pub fn verify_perturbation_bound(
    a: &WindowOperator,
    b: &WindowOperator,
    e0: f64,
    epsilon: f64,
    t: f64,
) -> Result<PerturbationReport> {
    if !(t > 0.0 && t < 0.25) {
        return Err(Error::Hypothesis(format!("t = {t} not in (0, 1/4)")));
    }
    let cert = check_isolated(a, e0, epsilon, None)
        .map_err(|e| Error::Hypothesis(format!("A has no isolated eigenvalue: {e}")))?;
    if (cert.lambda - e0).abs() > 0.25 * epsilon {
        return Err(Error::Hypothesis("|E - E0| exceeds epsilon / 4".into()));
    }
    let distance = operator_distance(a, b)?;
    if distance > t * epsilon {
        return Err(Error::Hypothesis(format!(
            "||A - B|| = {distance:e} exceeds t epsilon = {:e}",
            t * epsilon
        )));
    }
    let tol = 1e-12;
    let pa = eigenpair_nearest(a, cert.lambda, tol)?;
    let pb = eigenpair_nearest(b, cert.lambda, tol)?;
    let (count, _) = closed_count(b, e0 - 0.75 * epsilon, e0 + 0.75 * epsilon);
    let unique = count == 1 && (pb.lambda - e0).abs() <= 0.75 * epsilon;
    Ok(PerturbationReport {
        t,
        epsilon,
        distance,
        eigenvalue_a: pa.lambda,
        eigenvalue_b: pb.lambda,
        shift: (pb.lambda - pa.lambda).abs(),
        unique,
        vector_deviation: aligned_distance(&pb.psi, &pa.psi, SiteVector::norm),
    })
}

/// Derivatives of an isolated eigenvalue in the torus phases.
#[derive(Debug, Clone, PartialEq)]
pub struct HellmannFeynman {
    pub lambda: f64,
    pub index: usize,
    pub dlam_dx: f64,
    pub dlam_dy: f64,
    pub pair: EigenPair,
}

fn expectation(psi: &SiteVector, diag: &[f64]) -> f64 {
    psi.values().iter().zip(diag).map(|(v, d)| d * v * v).sum()
}

/// `<psi, dV/dx psi>` and `<psi, dV/dy psi>` for the eigenvalue of
/// `H^{[a,b]}_{h,x,y}` isolated in `[E0 - eps, E0 + eps]`, at `params.phase`.
pub fn hellmann_feynman(
    params: &ModelParams,
    a: i64,
    b: i64,
    e0: f64,
    epsilon: f64,
) -> Result<HellmannFeynman> {
    let op = build_restriction(params, a, b)?;
    let cert = check_isolated(&op, e0, epsilon, None)?;
    let pair = eigenpair_nearest(&op, cert.lambda, 1e-12)?;
    let dx = derivative_diagonal(params, a, b, Direction::X)?;
    let dy = derivative_diagonal(params, a, b, Direction::Y)?;
    Ok(HellmannFeynman {
        lambda: pair.lambda,
        index: pair.index,
        dlam_dx: expectation(&pair.psi, &dx),
        dlam_dy: expectation(&pair.psi, &dy),
        pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Frequency, PotentialForm, TorusPoint};
    use crate::eigensolve::{eigenvalues_all, kth_eigenvalue};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free(n: usize) -> WindowOperator {
        WindowOperator::from_parts(-(n as i64 / 2), vec![0.0; n], 1.0).unwrap()
    }

    fn params(h: f64, x: f64, y: f64) -> ModelParams {
        ModelParams::new(
            SamplingFunction::cosine(2.0),
            Frequency::sqrt2(),
            h,
            TorusPoint::new(x, y),
            PotentialForm::Skew,
        )
        .unwrap()
    }

    #[test]
    fn scalar_certificate() {
        let p = params(0.3, 0.1, 0.2);
        let op = build_restriction(&p, 0, 0).unwrap();
        let e0 = p.f.eval(0.2);
        let c = check_isolated(&op, e0, 5.0, Some(0.0)).unwrap();
        assert_eq!(c.lambda, e0);
    }

    #[test]
    fn free_certificates() {
        let c = check_isolated(&free(5), 0.0, 0.4, None).unwrap();
        assert!(c.lambda.abs() < 1e-15);
        assert_eq!(c.index, 2);
        match check_isolated(&free(5), 0.0, 1.5, None) {
            Err(Error::NotIsolated { count, .. }) => assert_eq!(count, 3),
            other => panic!("{other:?}"),
        }
        // The closed window catches eigenvalues sitting on its edge.
        match check_isolated(&free(5), 0.0, 1.0, None) {
            Err(Error::NotIsolated { count, .. }) => assert_eq!(count, 3),
            other => panic!("{other:?}"),
        }
        assert!(check_isolated(&free(5), 0.5, 0.4, Some(0.1)).is_err());
        assert!(check_isolated(&free(5), 0.0, 0.4, Some(0.5)).is_err());
    }

    #[test]
    fn certificates_agree_with_dense_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let mut issued = 0;
        for _ in 0..300 {
            let n = rng.gen_range(1..=50);
            let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let op = WindowOperator::from_parts(0, diag, rng.gen_range(0.01..0.5)).unwrap();
            let e0 = rng.gen_range(-2.0..2.0);
            let eps = rng.gen_range(0.001..0.2);
            let m = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    op.diag()[i]
                } else if i.abs_diff(j) == 1 {
                    op.h()
                } else {
                    0.0
                }
            });
            let dense = m.symmetric_eigenvalues();
            let inside = dense.iter().filter(|l| (*l - e0).abs() <= eps).count();
            match check_isolated(&op, e0, eps, None) {
                Ok(c) => {
                    issued += 1;
                    assert_eq!(inside, 1);
                    assert!(dense.iter().any(|l| (l - c.lambda).abs() < 1e-10));
                }
                Err(Error::NotIsolated { count, .. }) => assert_eq!(count, inside),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(issued > 20);
    }

    #[test]
    fn identity_perturbation() {
        let op = build_restriction(&params(0.1, 0.3, 0.25), -3, 3).unwrap();
        let e = kth_eigenvalue(&op, 3, 0.0);
        let gap = eigenvalues_all(&op, 0.0).min_gap();
        let r = verify_perturbation_bound(&op, &op, e, gap / 4.0, 0.1).unwrap();
        assert_eq!(r.shift, 0.0);
        assert!(r.unique);
        assert!(r.vector_deviation < 1e-12);
    }

    #[test]
    fn hypotheses_are_checked() {
        let op = free(5);
        assert!(matches!(
            verify_perturbation_bound(&op, &op, 0.0, 0.4, 0.3),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            verify_perturbation_bound(&op, &op, 0.15, 0.4, 0.1),
            Err(Error::Hypothesis(_))
        ));
        let far = op.perturbed(&[0.1; 5], 1.0).unwrap();
        assert!(matches!(
            verify_perturbation_bound(&op, &far, 0.0, 0.4, 0.1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn scalar_hellmann_feynman() {
        let p = params(0.2, 0.37, 0.11);
        let hf = hellmann_feynman(&p, 0, 0, p.f.eval(0.11), 1.0).unwrap();
        assert_eq!(hf.dlam_dx, 0.0);
        assert_eq!(hf.dlam_dy, p.f.eval_deriv(0.11));
    }

    #[test]
    fn hellmann_feynman_sup_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let fp = SamplingFunction::cosine(2.0).deriv_sup_norm();
        for _ in 0..30 {
            let p = params(0.1, rng.gen(), rng.gen());
            let op = build_restriction(&p, -4, 4).unwrap();
            let k = rng.gen_range(0..9);
            let lam = kth_eigenvalue(&op, k, 0.0);
            if let Ok(hf) = hellmann_feynman(&p, -4, 4, lam, 1e-6) {
                assert!(hf.dlam_dx.abs() <= 4.0 * fp + 1e-12);
                assert!(hf.dlam_dy.abs() <= fp + 1e-12);
            }
        }
    }

    #[test]
    fn budget_constants() {
        let f = SamplingFunction::cosine(2.0);
        let b = ExtensionBudget::new(&f, 0.25);
        assert!((b.d - 0.4 * std::f64::consts::PI).abs() < 1e-12);
        assert!((b.c1 - 40.0 * std::f64::consts::PI).abs() < 1e-6);
        assert!((b.delta_cap - b.d.powi(5) / (2.0 * b.c1)).abs() < 1e-18);
        assert_eq!(ExtensionBudget::new(&f, 0.0).d, 0.1);
    }
}
