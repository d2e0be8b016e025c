//! Density of the spectrum from 6-eigenvalue spans of a finite restriction,
//! and bounds on the spectral edges.
//!
//! A restriction `H^{[-N,N]}` differs from the full-line operator by a
//! rank 4 perturbation once the two half-lines are attached, so any interval
//! holding more than 5 eigenvalues of the restriction meets the full
//! spectrum.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{frac, PotentialForm, TorusPoint};
use crate::eigensolve::{eigenvalues_all, kth_eigenvalue, Spectrum};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::operator::{build_restriction, ModelParams, SiteVector, WindowOperator};

/// Eigenvalue count that certifies an interval.
pub const CERTIFY_COUNT: usize = 6;

/// The window sizes of the published density table.
pub const TABLE_NS: [i64; 8] = [320, 640, 1280, 2560, 5120, 10240, 20480, 40960];

/// `min_j (E_{j+5} - E_j)` over the sorted spectrum.
pub fn delta_density(spec: &Spectrum) -> Result<f64> {
    delta_density_with(spec, CERTIFY_COUNT)
}

/// Smallest width of `count` consecutive eigenvalues.
pub fn delta_density_with(spec: &Spectrum, count: usize) -> Result<f64> {
    span_extreme(spec, count, f64::min, f64::INFINITY)
}

/// `max_j (E_{j+5} - E_j)`: the widest 6-eigenvalue span.
pub fn max_span(spec: &Spectrum) -> Result<f64> {
    span_extreme(spec, CERTIFY_COUNT, f64::max, 0.0)
}

fn span_extreme(spec: &Spectrum, count: usize, pick: fn(f64, f64) -> f64, init: f64) -> Result<f64> {
    if count < 2 || spec.len() < count {
        return Err(Error::validation(format!(
            "need a span count >= 2 and at least that many eigenvalues, got {count} and {}",
            spec.len()
        )));
    }
    Ok(spec
        .eigenvalues
        .windows(count)
        .map(|w| w[count - 1] - w[0])
        .fold(init, pick))
}

/// Whether `[a, b]` holds at least 6 eigenvalues of the restriction, which
/// forces it to meet the spectrum of the full-line operator.
pub fn certify_interval(spec: &Spectrum, a: f64, b: f64) -> bool {
    certify_interval_with(spec, a, b, CERTIFY_COUNT)
}

/// [`certify_interval`] with a different eigenvalue threshold.
pub fn certify_interval_with(spec: &Spectrum, a: f64, b: f64, count: usize) -> bool {
    if a > b {
        return false;
    }
    let ev = &spec.eigenvalues;
    let lo = ev.partition_point(|&e| e < a);
    let hi = ev.partition_point(|&e| e <= b);
    hi - lo >= count
}

/// One row of the density table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    #[serde(rename = "N")]
    pub n: i64,
    pub delta: f64,
    /// The spectrum is `delta`-dense in `[e_low, e_high]`.
    pub range: [f64; 2],
    pub runtime_s: f64,
    /// `delta` with the potential phase `alpha * n^2` formed in plain doubles.
    pub delta_naive: Option<f64>,
    pub max_span: f64,
}

impl DensityReport {
    pub const CSV_HEADER: &'static str = "N,delta,E_low,E_high,runtime_s,delta_naive,max_span";

    pub fn e_low(&self) -> f64 {
        self.range[0]
    }

    pub fn e_high(&self) -> f64 {
        self.range[1]
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            sig12(self.delta),
            sig12(self.e_low()),
            sig12(self.e_high()),
            sig12(self.runtime_s),
            self.delta_naive.map(sig12).unwrap_or_default(),
            sig12(self.max_span)
        )
    }
}

pub fn density_csv(reports: &[DensityReport]) -> String {
    let mut out = format!("{}\n", DensityReport::CSV_HEADER);
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// The square-form restriction with `alpha * n^2` rounded once in double
/// precision before reduction mod 1.
fn naive_square_restriction(params: &ModelParams, n: i64) -> Result<WindowOperator> {
    let alpha = params.alpha.alpha();
    let diag = (-n..=n)
        .map(|k| params.f.eval(frac(params.phase.y + frac(alpha * (k * k) as f64))))
        .collect();
    WindowOperator::from_parts(-n, diag, params.h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityOptions {
    /// Eigenvalue tolerance handed to the solver.
    pub tol: f64,
    /// Also compute the plain-double phase variant (square form only).
    pub naive: bool,
    /// Eigenvalues per certifying span; 6 is the rank-4 count.
    pub count: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            naive: false,
            count: CERTIFY_COUNT,
        }
    }
}

/// Density report for `H^{[-N,N]}`.
pub fn density_report(params: &ModelParams, n: i64, opts: &DensityOptions) -> Result<DensityReport> {
    if n < 3 {
        return Err(Error::validation("N must be at least 3"));
    }
    let start = Instant::now();
    let spec = eigenvalues_all(&build_restriction(params, -n, n)?, opts.tol);
    let delta = delta_density_with(&spec, opts.count)?;
    let ev = &spec.eigenvalues;
    // E_{-N+4} and E_{N-4} in the symmetric labelling -N..=N
    let range = [ev[4], ev[ev.len() - 5]];
    let delta_naive = if opts.naive && params.form == PotentialForm::Square {
        let spec = eigenvalues_all(&naive_square_restriction(params, n)?, opts.tol);
        Some(delta_density_with(&spec, opts.count)?)
    } else {
        None
    };
    Ok(DensityReport {
        n,
        delta,
        range,
        runtime_s: start.elapsed().as_secs_f64(),
        delta_naive,
        max_span: max_span(&spec)?,
    })
}

/// One report per `N`, computed in parallel and returned in input order.
pub fn density_table(ns: &[i64], params: &ModelParams, opts: &DensityOptions) -> Result<Vec<DensityReport>> {
    // largest windows first so the pool is not left waiting on one straggler
    let mut order: Vec<usize> = (0..ns.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(ns[i]));
    let mut done: Vec<(usize, DensityReport)> = order
        .into_par_iter()
        .with_max_len(1)
        .map(|i| density_report(params, ns[i], opts).map(|r| (i, r)))
        .collect::<Result<_>>()?;
    done.sort_by_key(|(i, _)| *i);
    Ok(done.into_iter().map(|(_, r)| r).collect())
}

/// Extreme eigenvalues of `H^{[-N,N]}_{h,0,y0}` against the band estimates
/// `max f + h <= E_+ <= max f + 2h` and `min f - 2h <= E_- <= min f - h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub h: f64,
    #[serde(rename = "N")]
    pub n: i64,
    pub max_f: f64,
    pub min_f: f64,
    #[serde(rename = "emax_N")]
    pub emax: f64,
    #[serde(rename = "emin_N")]
    pub emin: f64,
    /// Argmax of `f`, the phase of the top-edge window.
    pub y_top: f64,
    /// Argmin of `f`, the phase of the bottom-edge window.
    pub y_bottom: f64,
    /// Rayleigh quotient of `(delta_0 + delta_1)/sqrt 2` at `y_top`.
    pub rayleigh_top: f64,
    /// Rayleigh quotient of `(delta_0 - delta_1)/sqrt 2` at `y_bottom`.
    pub rayleigh_bottom: f64,
    pub slack: f64,
}

impl EdgeReport {
    pub fn top_holds(&self) -> bool {
        self.emax >= self.max_f + self.h - self.slack && self.emax <= self.max_f + 2.0 * self.h
    }

    pub fn bottom_holds(&self) -> bool {
        self.emin <= self.min_f - self.h + self.slack && self.emin >= self.min_f - 2.0 * self.h
    }

    /// Both trial vectors reproduce `f(y0) +- h` to `tol`.
    pub fn rayleigh_holds(&self, tol: f64) -> bool {
        (self.rayleigh_top - (self.max_f + self.h)).abs() <= tol
            && (self.rayleigh_bottom - (self.min_f - self.h)).abs() <= tol
    }

    pub const CSV_HEADER: &'static str = "h,N,max_f,min_f,emax_N,emin_N,rayleigh_top,rayleigh_bottom,top_holds,bottom_holds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            sig12(self.h),
            self.n,
            sig12(self.max_f),
            sig12(self.min_f),
            sig12(self.emax),
            sig12(self.emin),
            sig12(self.rayleigh_top),
            sig12(self.rayleigh_bottom),
            self.top_holds(),
            self.bottom_holds()
        )
    }
}

pub fn edge_csv(reports: &[EdgeReport]) -> String {
    let mut out = format!("{}\n", EdgeReport::CSV_HEADER);
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Edge eigenvalues of the skew-shift window with `x = 0`, where sites 0 and
/// 1 share the phase `y0` and a two-site trial vector reaches `f(y0) +- h`.
/// `slack` loosens the inner bound of each edge.
pub fn edge_bounds(params: &ModelParams, n: i64, slack: f64) -> Result<EdgeReport> {
    if n < 1 {
        return Err(Error::validation("N must be at least 1"));
    }
    let (y_top, max_f) = params.f.argmax();
    let (y_bottom, min_f) = params.f.argmin();
    let window = |y: f64| -> Result<WindowOperator> {
        let p = ModelParams {
            phase: TorusPoint::new(0.0, y),
            form: PotentialForm::Skew,
            ..params.clone()
        };
        build_restriction(&p, -n, n)
    };
    let top = window(y_top)?;
    let bottom = window(y_bottom)?;
    let emax = kth_eigenvalue(&top, top.len() - 1, 0.0);
    let emin = kth_eigenvalue(&bottom, 0, 0.0);
    let trial = |sign: f64| {
        let mut v = SiteVector::zeros(-n, n);
        v.set(0, std::f64::consts::FRAC_1_SQRT_2);
        v.set(1, sign * std::f64::consts::FRAC_1_SQRT_2);
        v
    };
    Ok(EdgeReport {
        h: params.h,
        n,
        max_f,
        min_f,
        emax,
        emin,
        y_top,
        y_bottom,
        rayleigh_top: top.rayleigh_quotient(&trial(1.0))?,
        rayleigh_bottom: bottom.rayleigh_quotient(&trial(-1.0))?,
        slack,
    })
}
