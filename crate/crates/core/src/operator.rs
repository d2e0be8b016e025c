//! Finite restrictions `H^{[a,b]} = h Delta + V` with Dirichlet boundary,
//! vectors on a window of absolute sites, and the diagonal derivative
//! operators `d/dx V` and `d/dy V`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{phase_at, Frequency, PotentialForm, SamplingFunction, TorusPoint};
use crate::error::{Error, Result};

/// Everything needed to generate the potential and the operator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub f: SamplingFunction,
    pub alpha: Frequency,
    pub h: f64,
    pub phase: TorusPoint,
    pub form: PotentialForm,
}

impl ModelParams {
    pub fn new(
        f: SamplingFunction,
        alpha: Frequency,
        h: f64,
        phase: TorusPoint,
        form: PotentialForm,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::validation(format!("coupling h must be positive, got {h}")));
        }
        Ok(Self {
            f,
            alpha,
            h,
            phase,
            form,
        })
    }

    /// `V(n) = 2 cos(2 pi sqrt(2) n^2)` with `h = 1`.
    pub fn square_root_two_model() -> Self {
        Self {
            f: SamplingFunction::cosine(2.0),
            alpha: Frequency::sqrt2(),
            h: 1.0,
            phase: TorusPoint::new(0.0, 0.0),
            form: PotentialForm::Square,
        }
    }

    /// `V_{x,y}(n) = cos(2 pi (sqrt(2) n (n-1) + n x + y))` at coupling `h`.
    pub fn unit_cosine_skew(h: f64) -> Result<Self> {
        Self::cosine_skew(1.0, h)
    }

    /// Skew-shift potential sampled from `amplitude * cos(2 pi t)`, `alpha = sqrt 2`.
    pub fn cosine_skew(amplitude: f64, h: f64) -> Result<Self> {
        Self::new(
            SamplingFunction::cosine(amplitude),
            Frequency::sqrt2(),
            h,
            TorusPoint::new(0.0, 0.0),
            PotentialForm::Skew,
        )
    }

    pub fn with_phase(&self, x: f64, y: f64) -> Self {
        Self {
            phase: TorusPoint::new(x, y),
            ..self.clone()
        }
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.f.clone(), self.alpha, h, self.phase, self.form)
    }

    pub fn phase_at(&self, n: i64) -> f64 {
        phase_at(&self.alpha, self.phase, n, self.form)
    }

    pub fn potential(&self, n: i64) -> f64 {
        self.f.eval(self.phase_at(n))
    }

    /// `H^{[a,b]}` for these parameters.
    pub fn restriction(&self, a: i64, b: i64) -> Result<WindowOperator> {
        build_restriction(self, a, b)
    }
}

/// A symmetric tridiagonal restriction to the sites `a..=b`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOperator {
    a: i64,
    diag: Vec<f64>,
    h: f64,
}

/// Build `H^{[a,b]}`: `diag[i] = V(a + i)`, coupling `h`, couplings that
/// leave the window dropped.
pub fn build_restriction(params: &ModelParams, a: i64, b: i64) -> Result<WindowOperator> {
    if b < a {
        return Err(Error::validation(format!("empty window [{a},{b}]")));
    }
    let diag = (a..=b).map(|n| params.potential(n)).collect();
    WindowOperator::from_parts(a, diag, params.h)
}

impl WindowOperator {
    pub fn from_parts(a: i64, diag: Vec<f64>, h: f64) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::validation("window must contain at least one site"));
        }
        if !(h >= 0.0 && h.is_finite()) || diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::validation("operator entries must be finite, h >= 0"));
        }
        Ok(Self { a, diag, h })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.a + self.diag.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.a..=self.b()
    }

    pub fn contains_site(&self, n: i64) -> bool {
        n >= self.a && n <= self.b()
    }

    /// Copy with `diag[site - a]` replaced.
    pub fn with_diag_entry(&self, site: i64, value: f64) -> Self {
        let mut out = self.clone();
        out.diag[(site - self.a) as usize] = value;
        out
    }

    /// Copy with `delta[i]` added to each diagonal entry.
    pub fn perturbed(&self, delta: &[f64], h: f64) -> Result<Self> {
        if delta.len() != self.len() {
            return Err(Error::validation("perturbation length does not match window"));
        }
        let diag = self.diag.iter().zip(delta).map(|(d, e)| d + e).collect();
        Self::from_parts(self.a, diag, h)
    }

    /// Maximum absolute row sum, `||H||_1 = ||H||_inf`.
    pub fn norm1(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let couplings = (i > 0) as u8 + (i + 1 < n) as u8;
                self.diag[i].abs() + couplings as f64 * self.h
            })
            .fold(0.0, f64::max)
    }

    /// `(Hv)(n) = h (v(n+1) + v(n-1)) + V(n) v(n)` with zero outside the window.
    pub fn apply(&self, v: &SiteVector) -> Result<SiteVector> {
        self.check_window(v)?;
        Ok(SiteVector {
            a: self.a,
            values: self.apply_slice(&v.values),
        })
    }

    pub(crate) fn apply_slice(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < n { v[i + 1] } else { 0.0 };
                self.h * (left + right) + self.diag[i] * v[i]
            })
            .collect()
    }

    /// `<v, Hv> / <v, v>`.
    pub fn rayleigh_quotient(&self, v: &SiteVector) -> Result<f64> {
        self.check_window(v)?;
        let nn = v.dot(v);
        if nn == 0.0 {
            return Err(Error::validation("Rayleigh quotient of the zero vector"));
        }
        let hv = self.apply_slice(&v.values);
        Ok(v.values.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>() / nn)
    }

    /// `||(H - e) v||`.
    pub fn residual_norm(&self, v: &SiteVector, e: f64) -> Result<f64> {
        self.check_window(v)?;
        let hv = self.apply_slice(&v.values);
        Ok(hv
            .iter()
            .zip(&v.values)
            .map(|(a, b)| (a - e * b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    fn check_window(&self, v: &SiteVector) -> Result<()> {
        if v.a != self.a || v.len() != self.len() {
            return Err(Error::WindowMismatch {
                expected_a: self.a,
                expected_b: self.b(),
                got_a: v.a,
                got_b: v.b(),
            });
        }
        Ok(())
    }

    /// `site,diag` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,diag\n");
        for (n, d) in self.sites().zip(&self.diag) {
            let _ = writeln!(out, "{n},{}", crate::format::sig12(*d));
        }
        out
    }
}

/// A real vector indexed by the absolute sites `a..a+len`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SiteVector {
    a: i64,
    values: Vec<f64>,
}

impl SiteVector {
    pub fn new(a: i64, values: Vec<f64>) -> Self {
        Self { a, values }
    }

    pub fn zeros(a: i64, b: i64) -> Self {
        Self::new(a, vec![0.0; (b - a + 1).max(0) as usize])
    }

    /// The standard basis vector `e_site` on `[a, b]`.
    pub fn basis(a: i64, b: i64, site: i64) -> Self {
        let mut v = Self::zeros(a, b);
        v.set(site, 1.0);
        v
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.a + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at the absolute site `n`; zero outside the window.
    pub fn get(&self, n: i64) -> f64 {
        if n < self.a || n > self.b() {
            0.0
        } else {
            self.values[(n - self.a) as usize]
        }
    }

    pub fn set(&mut self, n: i64, value: f64) {
        self.values[(n - self.a) as usize] = value;
    }

    pub fn dot(&self, other: &SiteVector) -> f64 {
        let lo = self.a.max(other.a);
        let hi = self.b().min(other.b());
        (lo..=hi).map(|n| self.get(n) * other.get(n)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<SiteVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::validation("cannot normalize the zero vector"));
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, s: f64) -> SiteVector {
        SiteVector::new(self.a, self.values.iter().map(|v| v * s).collect())
    }

    /// The same vector viewed on `[a, b]`: zero-extended or truncated.
    pub fn on_window(&self, a: i64, b: i64) -> SiteVector {
        SiteVector::new(a, (a..=b).map(|n| self.get(n)).collect())
    }

    /// `self - other` on the union of both windows.
    pub fn sub(&self, other: &SiteVector) -> SiteVector {
        let a = self.a.min(other.a);
        let b = self.b().max(other.b());
        SiteVector::new(a, (a..=b).map(|n| self.get(n) - other.get(n)).collect())
    }
}

/// `||v||_W = (sum_n (1 + n^2) |v(n)|^2)^{1/2}` over absolute sites.
pub fn weighted_norm(v: &SiteVector) -> f64 {
    (v.a..)
        .zip(&v.values)
        .map(|(n, x)| (1.0 + (n as f64).powi(2)) * x * x)
        .sum::<f64>()
        .sqrt()
}

/// `min_{|a| = 1} ||u - a v||` in a chosen norm, real phases `a = +-1`.
/// The phase is `a = sign <u, v>`.
pub fn aligned_distance(u: &SiteVector, v: &SiteVector, norm: impl Fn(&SiteVector) -> f64) -> f64 {
    let s = if u.dot(v) >= 0.0 { 1.0 } else { -1.0 };
    norm(&u.sub(&v.scaled(s)))
}

/// Variable with respect to which the potential is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// Diagonal of `d/dx V` (`n f'(phase(n))`) or `d/dy V` (`f'(phase(n))`)
/// on the sites `a..=b`.
pub fn derivative_diagonal(
    params: &ModelParams,
    a: i64,
    b: i64,
    which: Direction,
) -> Result<Vec<f64>> {
    if params.form != PotentialForm::Skew {
        return Err(Error::Unsupported("x-derivatives need the skew-shift form"));
    }
    if b < a {
        return Err(Error::validation(format!("empty window [{a},{b}]")));
    }
    Ok((a..=b)
        .map(|n| {
            let fp = params.f.eval_deriv(params.phase_at(n));
            match which {
                Direction::X => n as f64 * fp,
                Direction::Y => fp,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SamplingFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free(h: f64, a: i64, b: i64) -> WindowOperator {
        let params = ModelParams::new(
            SamplingFunction::constant(0.0),
            Frequency::sqrt2(),
            h,
            TorusPoint::new(0.0, 0.0),
            PotentialForm::Skew,
        )
        .unwrap();
        build_restriction(&params, a, b).unwrap()
    }

    fn skew_params(h: f64, x: f64, y: f64) -> ModelParams {
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
    fn single_site_is_multiplication_by_f_y() {
        let p = skew_params(0.3, 0.17, 0.42);
        let op = build_restriction(&p, 0, 0).unwrap();
        assert_eq!(op.diag(), &[p.f.eval(0.42)]);
    }

    #[test]
    fn free_laplacian_column() {
        let op = free(1.0, -1, 1);
        let e0 = SiteVector::basis(-1, 1, 0);
        assert_eq!(op.apply(&e0).unwrap().values(), &[1.0, 0.0, 1.0]);
        let z = SiteVector::zeros(-1, 1);
        assert_eq!(op.apply(&z).unwrap(), z);
        let bad = SiteVector::zeros(0, 2);
        assert!(matches!(op.apply(&bad), Err(Error::WindowMismatch { .. })));
    }

    #[test]
    fn square_model_diag_reconstructs() {
        let p = ModelParams::square_root_two_model();
        let op = build_restriction(&p, -320, 320).unwrap();
        assert_eq!(op.len(), 641);
        for n in [-320i64, -17, 0, 5, 320] {
            let v = crate::dynamics::potential_value(&p.f, &p.alpha, p.phase, n, p.form);
            assert_eq!(op.diag()[(n + 320) as usize], v);
        }
    }

    #[test]
    fn weighted_norm_examples() {
        assert_eq!(weighted_norm(&SiteVector::basis(-3, 3, 0)), 1.0);
        assert!((weighted_norm(&SiteVector::basis(-3, 3, 3)) - 10f64.sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = SiteVector::new(-4, (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect());
        assert!(weighted_norm(&v) >= v.norm());
    }

    #[test]
    fn rayleigh_quotients() {
        let p = skew_params(0.2, 0.0, 0.0);
        let op = build_restriction(&p, -3, 3).unwrap();
        let e0 = SiteVector::basis(-3, 3, 0);
        assert_eq!(op.rayleigh_quotient(&e0).unwrap(), op.diag()[3]);
        assert!(op.rayleigh_quotient(&SiteVector::zeros(-3, 3)).is_err());
    }

    #[test]
    fn derivative_diagonals_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (x, y) = (rng.gen::<f64>(), rng.gen::<f64>());
            let p = skew_params(0.1, x, y);
            let dx = derivative_diagonal(&p, -6, 6, Direction::X).unwrap();
            let dy = derivative_diagonal(&p, -6, 6, Direction::Y).unwrap();
            assert_eq!(dx[6], 0.0);
            let s = 1e-6;
            let op = |x: f64, y: f64| build_restriction(&p.with_phase(x, y), -6, 6).unwrap();
            let (xp, xm) = (op(x + s, y), op(x - s, y));
            let (yp, ym) = (op(x, y + s), op(x, y - s));
            for i in 0..13 {
                let n = i as i64 - 6;
                let fdx = (xp.diag()[i] - xm.diag()[i]) / (2.0 * s);
                let fdy = (yp.diag()[i] - ym.diag()[i]) / (2.0 * s);
                assert!((fdy - dy[i]).abs() < 1e-8 * dy[i].abs().max(1.0));
                assert!((fdx - dx[i]).abs() < 1e-8 * (n.abs().max(1) as f64) * dx[i].abs().max(1.0));
            }
        }
        let sq = ModelParams::square_root_two_model();
        assert!(derivative_diagonal(&sq, 0, 3, Direction::X).is_err());
    }

    #[test]
    fn self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = skew_params(0.7, 0.3, 0.9);
        let op = build_restriction(&p, -10, 10).unwrap();
        for _ in 0..50 {
            let u = SiteVector::new(-10, (0..21).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let v = SiteVector::new(-10, (0..21).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let lhs = u.dot(&op.apply(&v).unwrap());
            let rhs = op.apply(&u).unwrap().dot(&v);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_export() {
        let op = free(1.0, -1, 0);
        assert_eq!(op.to_csv(), "site,diag\n-1,0\n0,0\n");
    }
}
