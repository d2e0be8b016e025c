//! Green's functions `G(E, k, l) = <e_k, (H - E)^{-1} e_l>`, resolvent norms,
//! the `(gamma, Gamma, p)` suitability predicate and sampled sets on the torus.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::PotentialForm;
use crate::eigensolve::{nearest_eigenvalue, TridiagLu};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::operator::{build_restriction, ModelParams, WindowOperator};

/// Relative distance to the spectrum below which `E` is treated as an eigenvalue.
pub const SINGULAR_REL: f64 = 1e-13;

fn check_regular(op: &WindowOperator, e: f64) -> Result<f64> {
    let dist = (nearest_eigenvalue(op, e).0 - e).abs();
    if dist <= SINGULAR_REL * op.norm1().max(f64::MIN_POSITIVE) {
        return Err(Error::Singular { energy: e, distance: dist });
    }
    Ok(dist)
}

fn site_index(op: &WindowOperator, n: i64) -> Result<usize> {
    if !op.contains_site(n) {
        return Err(Error::validation(format!(
            "site {n} outside window [{}, {}]",
            op.a(),
            op.b()
        )));
    }
    Ok((n - op.a()) as usize)
}

/// Column `(H - E)^{-1} e_l` of the resolvent, `l` an absolute site.
pub fn greens_column(op: &WindowOperator, e: f64, l: i64) -> Result<Vec<f64>> {
    let j = site_index(op, l)?;
    check_regular(op, e)?;
    let lu = TridiagLu::factor_shifted(op, e, false)?;
    let mut g = vec![0.0; op.len()];
    g[j] = 1.0;
    lu.solve_in_place(&mut g);
    Ok(g)
}

/// `G(E, k, l)` for absolute sites `k`, `l`.
pub fn greens_entry(op: &WindowOperator, e: f64, k: i64, l: i64) -> Result<f64> {
    let i = site_index(op, k)?;
    Ok(greens_column(op, e, l)?[i])
}

/// `||(H - E)^{-1}|| = 1 / dist(E, sigma(H))`.
pub fn resolvent_norm(op: &WindowOperator, e: f64) -> Result<f64> {
    Ok(1.0 / check_regular(op, e)?)
}

/// Hilbert-Schmidt norm of `(H - E)^{-1}`, one solve per column.
pub fn hs_norm(op: &WindowOperator, e: f64) -> Result<f64> {
    check_regular(op, e)?;
    let lu = TridiagLu::factor_shifted(op, e, false)?;
    let n = op.len();
    let mut sum = 0.0;
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[j] = 1.0;
        lu.solve_in_place(&mut col);
        sum += col.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityParams {
    pub gamma: f64,
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub p: u32,
}

impl SuitabilityParams {
    pub fn new(gamma: f64, big_gamma: f64, p: u32) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::validation(format!("gamma must be positive, got {gamma}")));
        }
        if !(big_gamma > 1.0 && big_gamma.is_finite()) {
            return Err(Error::validation(format!("Gamma must exceed 1, got {big_gamma}")));
        }
        Ok(Self { gamma, big_gamma, p })
    }

    fn log_scale(&self) -> f64 {
        -(self.p as f64) * std::f64::consts::LN_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Size,
    Resolvent,
    Decay,
}

/// Outcome of a suitability check. `worst_margin` is the smallest
/// `ln(bound / actual)` over all checked inequalities; it is negative
/// exactly when some condition fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityVerdict {
    pub suitable: bool,
    pub failed_condition: Option<Condition>,
    pub worst_margin: f64,
}

impl SuitabilityVerdict {
    fn from_margins(margins: &[(Condition, f64)]) -> Self {
        let failed = margins.iter().find(|(_, m)| !(*m >= 0.0)).map(|(c, _)| *c);
        let worst = margins
            .iter()
            .map(|(_, m)| *m)
            .fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NEG_INFINITY } else { a.min(b) });
        Self {
            suitable: failed.is_none(),
            failed_condition: failed,
            worst_margin: worst,
        }
    }
}

fn half_width(op: &WindowOperator) -> Result<i64> {
    let len = op.len() as i64;
    if len % 2 == 0 {
        return Err(Error::validation("suitability needs a window n + [-N, N] of odd length"));
    }
    Ok(len / 2)
}

/// Worst decay margin over `k` at both window ends and `|l| <= 2N/3`
/// (relative to the window centre).
fn decay_margin(op: &WindowOperator, e: f64, gamma: f64, log_scale: f64) -> Result<f64> {
    let n = half_width(op)?;
    let lu = TridiagLu::factor_shifted(op, e, false)?;
    let lmax = 2 * n / 3;
    let mut worst = f64::INFINITY;
    for kk in [0usize, op.len() - 1] {
        let mut g = vec![0.0; op.len()];
        g[kk] = 1.0;
        lu.solve_in_place(&mut g);
        let k = kk as i64 - n;
        for l in -lmax..=lmax {
            let actual = g[(l + n) as usize].abs();
            let bound = log_scale - gamma * (k - l).abs() as f64;
            let m = if actual == 0.0 { f64::INFINITY } else { bound - actual.ln() };
            worst = worst.min(m);
        }
    }
    Ok(worst)
}

/// Definition-style suitability of a window `n + [-N, N]` for `H - E`.
pub fn is_suitable(op: &WindowOperator, e: f64, sp: &SuitabilityParams) -> Result<SuitabilityVerdict> {
    let n = half_width(op)?;
    let size = (sp.gamma * n as f64).ln() - sp.big_gamma.ln();
    let dist = (nearest_eigenvalue(op, e).0 - e).abs();
    if dist <= SINGULAR_REL * op.norm1() {
        return Ok(SuitabilityVerdict::from_margins(&[
            (Condition::Size, size),
            (Condition::Resolvent, f64::NEG_INFINITY),
        ]));
    }
    let resolvent = sp.log_scale() + sp.big_gamma + dist.ln();
    let decay = decay_margin(op, e, sp.gamma, sp.log_scale())?;
    Ok(SuitabilityVerdict::from_margins(&[
        (Condition::Size, size),
        (Condition::Resolvent, resolvent),
        (Condition::Decay, decay),
    ]))
}

/// Hilbert-Schmidt variant used for the section-structure experiment: the
/// potential is truncated to Fourier degree `N^2` and the window is
/// unsuitable when `||(H_R - E)^{-1}||_HS > 2^{-p} e^{gamma N / 2}` or the decay
/// condition fails.
pub fn is_suitable_hs(
    params: &ModelParams,
    center: i64,
    n: i64,
    e: f64,
    sp: &SuitabilityParams,
) -> Result<SuitabilityVerdict> {
    let r = (n * n) as usize;
    let truncated = ModelParams {
        f: params.f.truncate(r).0,
        ..params.clone()
    };
    let op = build_restriction(&truncated, center - n, center + n)?;
    let hs = match hs_norm(&op, e) {
        Ok(v) => v,
        Err(Error::Singular { .. }) => {
            return Ok(SuitabilityVerdict::from_margins(&[(
                Condition::Resolvent,
                f64::NEG_INFINITY,
            )]))
        }
        Err(err) => return Err(err),
    };
    let resolvent = sp.log_scale() + 0.5 * sp.gamma * n as f64 - hs.ln();
    let decay = decay_margin(&op, e, sp.gamma, sp.log_scale())?;
    Ok(SuitabilityVerdict::from_margins(&[
        (Condition::Resolvent, resolvent),
        (Condition::Decay, decay),
    ]))
}

/// A boolean mask on an `nx x ny` grid of cell centres of the torus,
/// row-major with rows indexed by `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
}

impl TorusGrid {
    /// Evaluate `marked` at every cell centre `((i + 1/2)/nx, (j + 1/2)/ny)`.
    pub fn evaluate<F>(nx: usize, ny: usize, marked: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<bool> + Sync,
    {
        if nx == 0 || ny == 0 {
            return Err(Error::validation("grid dimensions must be positive"));
        }
        let rows: Result<Vec<Vec<bool>>> = (0..ny)
            .into_par_iter()
            .map(|j| {
                let y = (j as f64 + 0.5) / ny as f64;
                (0..nx)
                    .map(|i| marked((i as f64 + 0.5) / nx as f64, y))
                    .collect()
            })
            .collect();
        Ok(Self {
            nx,
            ny,
            mask: rows?.concat(),
        })
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            (i as f64 + 0.5) / self.nx as f64,
            (j as f64 + 0.5) / self.ny as f64,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx + i]
    }

    pub fn row(&self, j: usize) -> &[bool] {
        &self.mask[j * self.nx..(j + 1) * self.nx]
    }

    /// Fraction of marked cells.
    pub fn measure(&self) -> f64 {
        self.mask.iter().filter(|&&b| b).count() as f64 / self.mask.len() as f64
    }

    /// Whether the cell containing `(x, y)` is marked.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let i = ((x.rem_euclid(1.0) * self.nx as f64) as usize).min(self.nx - 1);
        let j = ((y.rem_euclid(1.0) * self.ny as f64) as usize).min(self.ny - 1);
        self.get(i, j)
    }

    /// Fraction of columns with a marked cell whose centre is within
    /// `radius` of height `y`.
    pub fn column_fraction_near(&self, y: f64, radius: f64) -> f64 {
        let rows: Vec<usize> = (0..self.ny)
            .filter(|&j| crate::dynamics::dist_to_int(self.cell_center(0, j).1 - y) < radius)
            .collect();
        let hit = (0..self.nx).filter(|&i| rows.iter().any(|&j| self.get(i, j))).count();
        hit as f64 / self.nx as f64
    }

    /// Binary PGM: 255 marks, 0 elsewhere; the first image row is `y` near 1.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.nx, self.ny).into_bytes();
        for j in (0..self.ny).rev() {
            out.extend(self.row(j).iter().map(|&b| if b { 255u8 } else { 0 }));
        }
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_pgm())?;
        Ok(())
    }

    /// `x,y,<column>` rows with the given column name; `1` for marked cells.
    pub fn to_csv(&self, column: &str, invert: bool) -> String {
        let mut out = format!("x,y,{column}\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.cell_center(i, j);
                let v = self.get(i, j) != invert;
                let _ = writeln!(out, "{},{},{}", sig12(x), sig12(y), v as u8);
            }
        }
        out
    }
}

/// Number of maximal runs of `true` in a circular row.
pub fn circular_runs(row: &[bool]) -> usize {
    let n = row.len();
    if row.iter().all(|&b| b) {
        return usize::from(n > 0);
    }
    (0..n).filter(|&i| row[i] && !row[(i + n - 1) % n]).count()
}

/// Which predicate defines unsuitability on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predicate {
    #[default]
    Definition,
    HilbertSchmidt,
}

/// Sampled unsuitability set of `[-N, N]` for `H_{h,x,y} - E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnsuitabilityGrid {
    #[serde(rename = "N")]
    pub n: i64,
    #[serde(rename = "E")]
    pub e: f64,
    pub params: SuitabilityParams,
    pub predicate: Predicate,
    pub grid: TorusGrid,
    pub measure_estimate: f64,
}

impl UnsuitabilityGrid {
    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    /// CSV with `x,y,suitable`.
    pub fn to_csv(&self) -> String {
        self.grid.to_csv("suitable", true)
    }
}

pub fn unsuitability_grid(
    params: &ModelParams,
    e: f64,
    n: i64,
    sp: &SuitabilityParams,
    nx: usize,
    ny: usize,
) -> Result<UnsuitabilityGrid> {
    unsuitability_grid_with(params, e, n, sp, nx, ny, Predicate::Definition)
}

pub fn unsuitability_grid_with(
    params: &ModelParams,
    e: f64,
    n: i64,
    sp: &SuitabilityParams,
    nx: usize,
    ny: usize,
    predicate: Predicate,
) -> Result<UnsuitabilityGrid> {
    if params.form != PotentialForm::Skew {
        return Err(Error::Unsupported("unsuitability sets live on the skew-shift torus"));
    }
    if n < 1 {
        return Err(Error::validation("N must be at least 1"));
    }
    let grid = TorusGrid::evaluate(nx, ny, |x, y| {
        let p = params.with_phase(x, y);
        let verdict = match predicate {
            Predicate::Definition => is_suitable(&build_restriction(&p, -n, n)?, e, sp)?,
            Predicate::HilbertSchmidt => is_suitable_hs(&p, 0, n, e, sp)?,
        };
        Ok(!verdict.suitable)
    })?;
    let measure_estimate = grid.measure();
    Ok(UnsuitabilityGrid {
        n,
        e,
        params: *sp,
        predicate,
        grid,
        measure_estimate,
    })
}

/// Number of intervals making up the horizontal section in row `row`.
pub fn section_interval_count(grid: &UnsuitabilityGrid, row: usize) -> Result<usize> {
    if row >= grid.ny() {
        return Err(Error::validation(format!("row {row} out of range 0..{}", grid.ny())));
    }
    Ok(circular_runs(grid.grid.row(row)))
}

/// Cells where `dist(E, sigma(H^{[-w, w]}_{h,x,y})) < tol`.
pub fn resonance_grid(
    params: &ModelParams,
    e: f64,
    w: i64,
    tol: f64,
    nx: usize,
    ny: usize,
) -> Result<TorusGrid> {
    if params.form != PotentialForm::Skew {
        return Err(Error::Unsupported("resonance grids live on the skew-shift torus"));
    }
    if w < 0 || !(tol > 0.0) {
        return Err(Error::validation("need window half-width >= 0 and tol > 0"));
    }
    TorusGrid::evaluate(nx, ny, |x, y| {
        let op = build_restriction(&params.with_phase(x, y), -w, w)?;
        Ok((nearest_eigenvalue(&op, e).0 - e).abs() < tol)
    })
}

/// `G` by the minor formula `G(k, l) = (-1)^{k+l} h^{|k-l|} det_<(min) det_>(max) / det`,
/// which is exact algebra but loses accuracy on long windows.
#[cfg(test)]
pub(crate) fn greens_by_minors(op: &WindowOperator, e: f64, k: usize, l: usize) -> f64 {
    let d = op.diag();
    let h = op.h();
    let n = d.len();
    // theta[i] = det of leading i x i block of H - E, phi[i] = det of trailing block from i.
    let mut theta = vec![1.0; n + 1];
    theta[1] = d[0] - e;
    for i in 2..=n {
        theta[i] = (d[i - 1] - e) * theta[i - 1] - h * h * theta[i - 2];
    }
    let mut phi = vec![1.0; n + 2];
    phi[n - 1] = d[n - 1] - e;
    for i in (0..n.saturating_sub(1)).rev() {
        phi[i] = (d[i] - e) * phi[i + 1] - h * h * phi[i + 2];
    }
    let (i, j) = (k.min(l), k.max(l));
    let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
    sign * h.powi((j - i) as i32) * theta[i] * phi[j + 1] / theta[n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Frequency, SamplingFunction, TorusPoint};
    use crate::eigensolve::eigenvalues_all;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_shifted(op: &WindowOperator, e: f64) -> DMatrix<f64> {
        let n = op.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                op.diag()[i] - e
            } else if i.abs_diff(j) == 1 {
                op.h()
            } else {
                0.0
            }
        })
    }

    fn random_op(rng: &mut ChaCha8Rng, n: usize, h: f64) -> WindowOperator {
        let diag = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        WindowOperator::from_parts(-(n as i64 / 2), diag, h).unwrap()
    }

    fn free(n: i64, h: f64) -> WindowOperator {
        WindowOperator::from_parts(-n, vec![0.0; (2 * n + 1) as usize], h).unwrap()
    }

    #[test]
    fn scalar_resolvent() {
        let op = WindowOperator::from_parts(0, vec![0.5], 1.0).unwrap();
        assert_eq!(greens_entry(&op, 2.0, 0, 0).unwrap(), 1.0 / (0.5 - 2.0));
        assert!((resolvent_norm(&op, 2.0).unwrap() - 1.0 / 1.5).abs() < 1e-15);
        assert!((hs_norm(&op, 2.0).unwrap() - 1.0 / 1.5).abs() < 1e-15);
        assert!(matches!(greens_entry(&op, 0.5, 0, 0), Err(Error::Singular { .. })));
    }

    #[test]
    fn free_three_site_entry() {
        let op = free(1, 1.0);
        let inv = dense_shifted(&op, 5.0).try_inverse().unwrap();
        let g = greens_entry(&op, 5.0, -1, 1).unwrap();
        assert!((g - inv[(0, 2)]).abs() < 1e-12);
    }

    #[test]
    fn entries_match_dense_inverse_and_minors() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..40 {
            let n = rng.gen_range(1..=50);
            let h = rng.gen_range(0.05..1.0);
            let op = random_op(&mut rng, n, h);
            let e = rng.gen_range(-3.0..3.0);
            let inv = dense_shifted(&op, e).try_inverse().unwrap();
            let scale = inv.amax();
            for _ in 0..10 {
                let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let (k, l) = (op.a() + i as i64, op.a() + j as i64);
                let g = greens_entry(&op, e, k, l).unwrap();
                assert!((g - inv[(i, j)]).abs() <= 1e-10 * scale.max(1.0));
                assert!((g - greens_entry(&op, e, l, k).unwrap()).abs() <= 1e-12 * scale.max(1.0));
                if n <= 12 {
                    let m = greens_by_minors(&op, e, i, j);
                    assert!((g - m).abs() <= 1e-9 * scale.max(1.0));
                }
            }
        }
    }

    #[test]
    fn resolvent_and_hs_norms_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let op = random_op(&mut rng, 10, 0.5);
            let e = rng.gen_range(-3.0..3.0);
            let inv = dense_shifted(&op, e).try_inverse().unwrap();
            let two = inv.clone().singular_values().max();
            let r = resolvent_norm(&op, e).unwrap();
            assert!((r - two).abs() <= 1e-10 * two);
            let hs = hs_norm(&op, e).unwrap();
            assert!((hs - inv.norm()).abs() <= 1e-10 * hs);
            assert!(r <= hs * (1.0 + 1e-12) && hs <= 10.0 * r * (1.0 + 1e-12));
        }
        let op = random_op(&mut rng, 10, 0.5);
        let s = eigenvalues_all(&op, 1e-14).eigenvalues;
        let mid = 0.5 * (s[3] + s[4]);
        let r = resolvent_norm(&op, mid).unwrap();
        assert!((r - 2.0 / (s[4] - s[3])).abs() <= 1e-8 * r);
    }

    #[test]
    fn free_operator_is_suitable_far_from_spectrum() {
        let op = free(20, 0.01);
        let sp = SuitabilityParams::new(1.0, 10.0, 2).unwrap();
        let v = is_suitable(&op, 1.0, &sp).unwrap();
        assert!(v.suitable, "{v:?}");
        assert!(v.worst_margin > 0.0);
    }

    #[test]
    fn failures_report_their_condition() {
        let op = free(20, 0.01);
        let sp = SuitabilityParams::new(1.0, 21.0, 2).unwrap();
        let v = is_suitable(&op, 1.0, &sp).unwrap();
        assert_eq!(v.failed_condition, Some(Condition::Size));

        let one = WindowOperator::from_parts(0, vec![0.3], 0.2).unwrap();
        let sp = SuitabilityParams::new(5.0, 1.5, 0).unwrap();
        let s = eigenvalues_all(&free(3, 0.5), 1e-14).eigenvalues;
        let v = is_suitable(&free(3, 0.5), s[2], &sp).unwrap();
        assert_eq!(v.failed_condition, Some(Condition::Resolvent));
        assert_eq!(v.worst_margin, f64::NEG_INFINITY);
        assert_eq!(is_suitable(&one, 0.0, &sp).unwrap().failed_condition, Some(Condition::Size));
        assert!(is_suitable(&free(2, 0.5).with_diag_entry(0, 0.0), 0.0, &sp).is_ok());
        assert!(is_suitable(&WindowOperator::from_parts(0, vec![0.0; 4], 0.5).unwrap(), 3.0, &sp).is_err());
    }

    #[test]
    fn decay_condition_bites() {
        // Strong hopping relative to the gap: the Green's function decays slowly.
        let op = free(10, 1.0);
        let sp = SuitabilityParams::new(3.0, 2.0, 0).unwrap();
        let v = is_suitable(&op, 2.5, &sp).unwrap();
        assert_eq!(v.failed_condition, Some(Condition::Decay));
    }

    #[test]
    fn stability_under_small_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut tested = 0;
        while tested < 30 {
            let n = rng.gen_range(2..6i64);
            let h = rng.gen_range(0.001..0.05);
            let gamma = rng.gen_range(0.5..2.0);
            let p = rng.gen_range(0..4u32);
            let sp1 = SuitabilityParams::new(gamma, (gamma * n as f64).max(1.01), p + 1).unwrap();
            let sp = SuitabilityParams { p, ..sp1 };
            let diag = (0..2 * n + 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let op = WindowOperator::from_parts(-n, diag, h).unwrap();
            let e = rng.gen_range(-2.0..2.0);
            if !is_suitable(&op, e, &sp1).unwrap().suitable {
                continue;
            }
            tested += 1;
            let size = 2f64.powi(-(p as i32 + 2)) * (-3.0 * gamma * n as f64).exp();
            let delta: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-size..size)).collect();
            let op2 = op.perturbed(&delta, h).unwrap();
            assert!(is_suitable(&op2, e, &sp).unwrap().suitable);
        }
    }

    fn cos_model(h: f64) -> ModelParams {
        ModelParams::new(
            SamplingFunction::cosine(1.0),
            Frequency::sqrt2(),
            h,
            TorusPoint::new(0.0, 0.0),
            PotentialForm::Skew,
        )
        .unwrap()
    }

    #[test]
    fn diagonally_dominant_grid_is_empty() {
        let sp = SuitabilityParams::new(1.0, 4.0, 2).unwrap();
        let g = unsuitability_grid(&cos_model(1e-6), 2.0, 8, &sp, 50, 50).unwrap();
        assert_eq!(g.measure_estimate, 0.0);
        for row in 0..50 {
            assert_eq!(section_interval_count(&g, row).unwrap(), 0);
        }
    }

    #[test]
    fn resonant_rows_are_marked_and_p_is_monotone() {
        let m = cos_model(0.1);
        let sp = SuitabilityParams::new(1.0, 3.0, 1).unwrap();
        let sp_hi = SuitabilityParams { p: 3, ..sp };
        let g = unsuitability_grid(&m, 0.0, 6, &sp, 24, 40).unwrap();
        let g_hi = unsuitability_grid(&m, 0.0, 6, &sp_hi, 24, 40).unwrap();
        // cos(2 pi y) = 0 at y = 1/4: the n = 0 site resonates.
        let row = (0.25 * 40.0) as usize;
        assert!(g.grid.row(row).iter().any(|&b| b));
        for (lo, hi) in g.grid.mask.iter().zip(&g_hi.grid.mask) {
            assert!(!lo || *hi);
        }
        let again = unsuitability_grid(&m, 0.0, 6, &sp, 24, 40).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn hs_predicate_runs() {
        let sp = SuitabilityParams::new(2.0, 3.0, 0).unwrap();
        let g = unsuitability_grid_with(&cos_model(0.05), 0.3, 4, &sp, 20, 20, Predicate::HilbertSchmidt)
            .unwrap();
        assert!(g.measure_estimate > 0.0 && g.measure_estimate < 1.0);
    }

    #[test]
    fn run_counting() {
        assert_eq!(circular_runs(&[false; 8]), 0);
        assert_eq!(circular_runs(&[true; 8]), 1);
        assert_eq!(circular_runs(&[true, false, true, false, true, false, true, false]), 4);
        assert_eq!(circular_runs(&[true, false, false, true]), 1);
        assert_eq!(circular_runs(&[false, true, true, false]), 1);
    }

    #[test]
    fn pgm_layout() {
        let g = TorusGrid {
            nx: 2,
            ny: 2,
            mask: vec![true, false, false, false],
        };
        assert_eq!(g.to_pgm(), b"P5\n2 2\n255\n\x00\x00\xff\x00".to_vec());
        assert_eq!(g.to_csv("suitable", true).lines().nth(1), Some("0.25,0.25,0"));
        assert!(g.contains(0.1, 0.2) && !g.contains(0.6, 0.2));
        assert_eq!(g.column_fraction_near(0.25, 0.1), 0.5);
        assert_eq!(g.column_fraction_near(0.75, 0.1), 0.0);
    }

    #[test]
    fn skew_form_required() {
        let sp = SuitabilityParams::new(1.0, 3.0, 1).unwrap();
        let sq = ModelParams::square_root_two_model();
        assert!(unsuitability_grid(&sq, 0.0, 3, &sp, 4, 4).is_err());
        assert!(SuitabilityParams::new(1.0, 1.0, 0).is_err());
    }
}
