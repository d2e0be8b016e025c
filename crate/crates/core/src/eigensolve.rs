//! Symmetric tridiagonal eigensolvers: Sturm counts, bisection, implicit QL
//! for whole spectra and inverse iteration for individual eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{SiteVector, WindowOperator};

/// A real symmetric tridiagonal matrix.
pub trait Tridiagonal: Sync {
    fn dim(&self) -> usize;
    fn diagonal(&self) -> &[f64];
    /// Coupling between rows `i` and `i + 1`.
    fn offdiag(&self, i: usize) -> f64;

    fn norm1(&self) -> f64 {
        let n = self.dim();
        let d = self.diagonal();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag(i - 1).abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiag(i).abs() } else { 0.0 };
                d[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let d = self.diagonal();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag(i - 1).abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag(i).abs() } else { 0.0 };
            lo = lo.min(d[i] - left - right);
            hi = hi.max(d[i] + left + right);
        }
        (lo, hi)
    }
}

impl Tridiagonal for WindowOperator {
    fn dim(&self) -> usize {
        self.len()
    }
    fn diagonal(&self) -> &[f64] {
        self.diag()
    }
    fn offdiag(&self, _i: usize) -> f64 {
        self.h()
    }
    fn norm1(&self) -> f64 {
        WindowOperator::norm1(self)
    }
}

/// Symmetric tridiagonal matrix with per-row couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::validation("need n >= 1 diagonal and n-1 off-diagonal entries"));
        }
        Ok(Self { diag, off })
    }
}

impl Tridiagonal for SymTridiagonal {
    fn dim(&self) -> usize {
        self.diag.len()
    }
    fn diagonal(&self) -> &[f64] {
        &self.diag
    }
    fn offdiag(&self, i: usize) -> f64 {
        self.off[i]
    }
}

/// `1e-10 * max(1, ||H||_1)`.
pub fn default_tol<T: Tridiagonal + ?Sized>(t: &T) -> f64 {
    1e-10 * t.norm1().max(1.0)
}

fn pivot_floor<T: Tridiagonal + ?Sized>(t: &T) -> f64 {
    (f64::EPSILON * t.norm1()).max(f64::MIN_POSITIVE)
}

/// Number of eigenvalues strictly below `e`, from the signs of the `LDL^T`
/// pivots of `H - e`. Pivots smaller than `omega = eps ||H||_1` keep their
/// sign and are raised to `omega`; an exact zero becomes `+omega`.
pub fn sturm_count<T: Tridiagonal + ?Sized>(t: &T, e: f64) -> usize {
    sturm_count_with(t, e, pivot_floor(t))
}

fn sturm_count_with<T: Tridiagonal + ?Sized>(t: &T, e: f64, omega: f64) -> usize {
    let d = t.diagonal();
    let mut count = 0;
    let mut q = d[0] - e;
    if q.abs() < omega {
        q = omega.copysign(q);
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let b = t.offdiag(i - 1);
        q = d[i] - e - (b / q) * b;
        if q.abs() < omega {
            q = omega.copysign(q);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Sorted eigenvalues of a window operator with the accuracy they were
/// requested at.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub a: i64,
    pub b: i64,
    pub eigenvalues: Vec<f64>,
    pub tol: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// The `k`-th smallest eigenvalue (0-based) by bisection to width `tol`,
/// or to a few ulps when `tol` is zero.
pub fn kth_eigenvalue<T: Tridiagonal + ?Sized>(t: &T, k: usize, tol: f64) -> f64 {
    assert!(k < t.dim(), "eigenvalue index {k} out of range");
    if t.dim() == 1 {
        return t.diagonal()[0];
    }
    let (glo, ghi) = t.gershgorin();
    let omega = pivot_floor(t);
    let pad = 2.0 * omega + f64::EPSILON * glo.abs().max(ghi.abs());
    bisect_index(t, k, glo - pad, ghi + pad, tol, omega)
}

fn bisect_index<T: Tridiagonal + ?Sized>(
    t: &T,
    k: usize,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    omega: f64,
) -> f64 {
    // Invariant: count(lo) <= k < count(hi).
    loop {
        let mid = 0.5 * (lo + hi);
        let floor = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
        if hi - lo <= tol.max(floor) || mid <= lo || mid >= hi {
            return mid;
        }
        if sturm_count_with(t, mid, omega) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// All eigenvalues in ascending order by implicit-shift QL.
pub fn eigenvalues_all(op: &WindowOperator, tol: f64) -> Spectrum {
    Spectrum {
        a: op.a(),
        b: op.b(),
        eigenvalues: eigenvalues_ql(op, tol),
        tol,
    }
}

/// Implicit-shift QL without eigenvectors, `O(n^2)`. Falls back to
/// bisection should the iteration stall.
pub fn eigenvalues_ql<T: Tridiagonal + ?Sized>(t: &T, tol: f64) -> Vec<f64> {
    let n = t.dim();
    let mut d = t.diagonal().to_vec();
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { t.offdiag(i) } else { 0.0 }).collect();
    if ql_implicit(&mut d, &mut e).is_err() {
        return eigenvalues_bisect(t, tol);
    }
    d.sort_by(f64::total_cmp);
    d
}

fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> std::result::Result<(), ()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(());
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues by independent bisections, in parallel over indices.
pub fn eigenvalues_bisect<T: Tridiagonal + ?Sized>(t: &T, tol: f64) -> Vec<f64> {
    (0..t.dim())
        .into_par_iter()
        .map(|k| kth_eigenvalue(t, k, tol))
        .collect()
}

/// Eigenvalues in `[lo, hi]`, padded by `tol` at both ends.
pub fn eigenvalues_in_interval<T: Tridiagonal + ?Sized>(
    t: &T,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Vec<f64> {
    let k0 = sturm_count(t, lo - tol);
    let k1 = sturm_count(t, hi + tol);
    (k0..k1).map(|k| kth_eigenvalue(t, k, tol.min(1e-3))).collect()
}

/// Eigenvalue nearest `e0` to full precision, with its 0-based index.
pub fn nearest_eigenvalue<T: Tridiagonal + ?Sized>(t: &T, e0: f64) -> (f64, usize) {
    let c = sturm_count(t, e0);
    let mut best: Option<(f64, usize)> = None;
    for k in [c.wrapping_sub(1), c] {
        if k < t.dim() {
            let lam = kth_eigenvalue(t, k, 0.0);
            if best.map_or(true, |(b, _)| (lam - e0).abs() < (b - e0).abs()) {
                best = Some((lam, k));
            }
        }
    }
    best.expect("nonempty matrix")
}

/// Distance from `e` to the spectrum.
pub fn spectral_distance<T: Tridiagonal + ?Sized>(t: &T, e: f64) -> f64 {
    (nearest_eigenvalue(t, e).0 - e).abs()
}

/// A unit eigenvector with its eigenvalue and residual `||(H - lambda) psi||`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub index: usize,
    pub psi: SiteVector,
    pub residual: f64,
}

const START_SEED: u64 = 0x5eed_cafe;

/// Eigenpair for the eigenvalue nearest `e0`. The vector comes from at most
/// five inverse-iteration steps and is signed so its largest entry is positive.
pub fn eigenpair_nearest(op: &WindowOperator, e0: f64, tol: f64) -> Result<EigenPair> {
    let (lambda, index) = nearest_eigenvalue(op, e0);
    let target = tol * (op.norm1() + lambda.abs());
    let n = op.len();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut x);
    let lu = TridiagLu::factor_shifted(op, lambda, true)?;
    let mut residual = f64::INFINITY;
    for _ in 0..5 {
        lu.solve_in_place(&mut x);
        if !normalize(&mut x) {
            return Err(Error::NoConvergence {
                residual: f64::NAN,
                target,
            });
        }
        let hx = op.apply_slice(&x);
        residual = hx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= target {
            break;
        }
    }
    if residual > target {
        return Err(Error::NoConvergence { residual, target });
    }
    let imax = (0..n)
        .max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
        .unwrap();
    if x[imax] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(EigenPair {
        lambda,
        index,
        psi: SiteVector::new(op.a(), x),
        residual,
    })
}

fn normalize(x: &mut [f64]) -> bool {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= scale);
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
    true
}

/// LU factorization of `T - sigma` with partial pivoting (row interchanges
/// give a second superdiagonal).
#[derive(Debug, Clone)]
pub(crate) struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// Factor `T - sigma`. With `perturb_zero_pivots` an exactly zero pivot
    /// is replaced by `eps ||T||_1`, as inverse iteration wants; otherwise
    /// it is reported as singular.
    pub(crate) fn factor_shifted<T: Tridiagonal + ?Sized>(
        t: &T,
        sigma: f64,
        perturb_zero_pivots: bool,
    ) -> Result<Self> {
        let n = t.dim();
        let mut d: Vec<f64> = t.diagonal().iter().map(|v| v - sigma).collect();
        let mut dl: Vec<f64> = (0..n.saturating_sub(1)).map(|i| t.offdiag(i)).collect();
        let mut du = dl.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = pivot_floor(t);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    // dl[i] is zero as well; the column is already reduced.
                    dl[i] = 0.0;
                    continue;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for (i, p) in d.iter_mut().enumerate() {
            if *p == 0.0 {
                if perturb_zero_pivots {
                    *p = tiny;
                } else {
                    return Err(Error::Singular {
                        energy: sigma,
                        distance: 0.0,
                    });
                }
            }
            let _ = i;
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
