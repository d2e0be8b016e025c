use serde::Serialize;

use crate::circle::CircleInterval;
use crate::eigensolve::{eigenpair_nearest, nearest_eigenvalue};
use crate::error::{Error, Result};
use crate::operator::{build_restriction, ModelParams, SiteVector};

/// `h^{1/1000}`: the smallest allowed gap `|V(n) - E0|` at non-central sites.
pub fn resonance_guard(h: f64) -> f64 {
    h.powf(1e-3)
}

/// The three-site trial vector and its quality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Psi0Report {
    /// Unit vector on `[-M, M]`.
    pub psi: SiteVector,
    /// `||(H - E0) psi|| / ||psi||`, i.e. for the normalized vector.
    pub residual: f64,
    /// `sqrt(6) h^{1 - 1/1000}`.
    pub residual_bound: f64,
    /// Norm before normalization (central entry 1).
    pub raw_norm: f64,
    /// `1 + h^{2 - 1/500}`.
    pub norm_bound: f64,
}

impl Psi0Report {
    pub fn residual_holds(&self) -> bool {
        self.residual <= self.residual_bound
    }

    pub fn norm_holds(&self) -> bool {
        (1.0..=self.norm_bound).contains(&self.raw_norm)
    }
}

/// First-order approximate eigenvector `1` at the origin and
/// `h / (E0 - V(+-1))` at its neighbours, on the window `[-M, M]`.
pub fn psi0_approx(params: &ModelParams, e0: f64, m: i64) -> Result<Psi0Report> {
    if m < 0 {
        return Err(Error::validation("window half-width M must be nonnegative"));
    }
    let h = params.h;
    let guard = resonance_guard(h);
    let mut psi = SiteVector::basis(-m, m, 0);
    if m >= 1 {
        for site in [-1, 1] {
            let gap = e0 - params.potential(site);
            if gap.abs() < guard {
                return Err(Error::ResonantSite {
                    site,
                    gap: gap.abs(),
                    guard,
                });
            }
            psi.set(site, h / gap);
        }
    }
    let raw_norm = psi.norm();
    let psi = psi.normalized()?;
    let op = build_restriction(params, -m, m)?;
    Ok(Psi0Report {
        residual: op.residual_norm(&psi, e0)?,
        residual_bound: 6f64.sqrt() * h.powf(1.0 - 1e-3),
        raw_norm,
        norm_bound: 1.0 + h.powf(2.0 - 2e-3),
        psi,
    })
}

/// `1 - |<phi_l, psi>|^2` for unit `psi`, where `phi_l` is the eigenvector of
/// `H^{[-M, M]}` nearest `E0`: the weight of `psi` on all other eigenvectors.
pub fn overlap_defect(params: &ModelParams, e0: f64, m: i64, psi: &SiteVector) -> Result<f64> {
    let op = build_restriction(params, -m, m)?;
    let (lam, _) = nearest_eigenvalue(&op, e0);
    let pair = eigenpair_nearest(&op, lam, 1e-12)?;
    let c = pair.psi.dot(psi) / psi.norm();
    Ok((1.0 - c * c).max(0.0))
}

/// Sampled set of `x` (at `y = params.phase.y`) where every site `n != 0` of
/// `[-M, M]` keeps `|V(n) - E0| >= h^{1/1000}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodXSet {
    pub arcs: Vec<CircleInterval>,
    pub measure: f64,
    pub guard: f64,
    pub nx: usize,
}

impl GoodXSet {
    pub fn half_measure_holds(&self) -> bool {
        self.measure >= 0.5
    }

    pub fn contains(&self, x: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(x))
    }
}

/// Maximal circular runs of `true` cells, as arcs of cell edges.
pub(crate) fn mask_arcs(mask: &[bool]) -> Vec<CircleInterval> {
    let n = mask.len();
    if n == 0 {
        return vec![];
    }
    if mask.iter().all(|&b| b) {
        return vec![CircleInterval { start: 0.0, len: 1.0 }];
    }
    let cell = 1.0 / n as f64;
    let mut arcs = Vec::new();
    for i in (0..n).filter(|&i| mask[i] && !mask[(i + n - 1) % n]) {
        let mut len = 0;
        while mask[(i + len) % n] {
            len += 1;
        }
        arcs.push(CircleInterval {
            start: i as f64 * cell,
            len: len as f64 * cell,
        });
    }
    arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
    arcs
}

pub fn good_x_set(params: &ModelParams, e0: f64, m: i64, nx: usize) -> Result<GoodXSet> {
    if nx == 0 || m < 0 {
        return Err(Error::validation("need nx >= 1 and M >= 0"));
    }
    let guard = resonance_guard(params.h);
    let y0 = params.phase.y;
    let mask: Vec<bool> = (0..nx)
        .map(|i| {
            let p = params.with_phase((i as f64 + 0.5) / nx as f64, y0);
            (-m..=m)
                .filter(|&n| n != 0)
                .all(|n| (p.potential(n) - e0).abs() >= guard)
        })
        .collect();
    let measure = mask.iter().filter(|&&b| b).count() as f64 / nx as f64;
    Ok(GoodXSet {
        arcs: mask_arcs(&mask),
        measure,
        guard,
        nx,
    })
}
