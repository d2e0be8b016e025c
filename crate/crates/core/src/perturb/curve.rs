use std::fmt::Write as _;

use serde::Serialize;

use super::isolation::{check_isolated, hellmann_feynman};
use crate::circle::ClampedCurve;
use crate::eigensolve::{eigenpair_nearest, kth_eigenvalue, nearest_eigenvalue};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::operator::{build_restriction, derivative_diagonal, Direction, ModelParams};

/// Sampled level curve `lambda_k(x, xi(x)) = E0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub xs: Vec<f64>,
    pub xis: Vec<f64>,
    pub residuals: Vec<f64>,
    pub accepted: Vec<bool>,
    /// The slope bound `delta` the trace was run with.
    pub deriv_bound: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub epsilon: f64,
    /// Spectral index of the traced eigenvalue at the anchor.
    pub index: usize,
    /// Spectral index followed at each sample (the one nearest `E0` at the
    /// predicted point); it changes across avoided crossings.
    pub indices: Vec<usize>,
    pub anchor: usize,
    pub a: i64,
    pub b: i64,
}

impl CurveSample {
    pub fn accepted_fraction(&self) -> f64 {
        self.accepted.iter().filter(|&&b| b).count() as f64 / self.xs.len() as f64
    }

    /// Largest difference quotient between consecutive accepted samples.
    pub fn max_accepted_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.accepted_points().collect();
        pts.windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }

    pub fn accepted_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.xs.len())
            .filter(|&i| self.accepted[i])
            .map(|i| (self.xs[i], self.xis[i]))
    }

    /// `x,xi,residual,accepted` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,xi,residual,accepted\n");
        for i in 0..self.xs.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                sig12(self.xs[i]),
                sig12(self.xis[i]),
                sig12(self.residuals[i]),
                self.accepted[i] as u8
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Index into `xs` of the anchor; `None` picks the first admissible one.
    pub anchor: Option<usize>,
    /// Centre of the anchor search bracket in `y`.
    pub y0: f64,
    /// Half-width of the anchor search bracket.
    pub anchor_radius: f64,
    pub residual_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            anchor: None,
            y0: 0.0,
            anchor_radius: 0.05,
            residual_tol: 1e-10,
        }
    }
}

struct Branch<'a> {
    params: &'a ModelParams,
    a: i64,
    b: i64,
    k: usize,
    e0: f64,
}

impl Branch<'_> {
    fn op(&self, x: f64, y: f64) -> Result<crate::operator::WindowOperator> {
        build_restriction(&self.params.with_phase(x, y), self.a, self.b)
    }

    fn g(&self, x: f64, y: f64) -> Result<f64> {
        Ok(kth_eigenvalue(&self.op(x, y)?, self.k, 0.0) - self.e0)
    }

    fn dg_dy(&self, x: f64, y: f64) -> Result<f64> {
        let p = self.params.with_phase(x, y);
        let op = build_restriction(&p, self.a, self.b)?;
        let lam = kth_eigenvalue(&op, self.k, 0.0);
        let pair = eigenpair_nearest(&op, lam, 1e-12)?;
        let dy = derivative_diagonal(&p, self.a, self.b, Direction::Y)?;
        Ok(pair
            .psi
            .values()
            .iter()
            .zip(&dy)
            .map(|(v, d)| d * v * v)
            .sum())
    }

    /// Root of `g(x, .)` in `[lo, hi]` by Newton steps kept inside a shrinking
    /// bracket, bisecting whenever a step leaves it. `None` without a sign change.
    fn root(&self, x: f64, start: f64, lo: f64, hi: f64, tol: f64) -> Result<Option<(f64, f64)>> {
        let g0 = self.g(x, start)?;
        if g0 == 0.0 {
            return Ok(Some((start, 0.0)));
        }
        let (mut lo, mut hi) = (lo, hi);
        let (glo, ghi) = (self.g(x, lo)?, self.g(x, hi)?);
        if glo == 0.0 {
            return Ok(Some((lo, 0.0)));
        }
        if ghi == 0.0 {
            return Ok(Some((hi, 0.0)));
        }
        if glo.signum() == ghi.signum() {
            return Ok(None);
        }
        let lo_negative = glo < 0.0;
        let mut y = start.clamp(lo, hi);
        let mut gy = if y == start { g0 } else { self.g(x, y)? };
        for _ in 0..100 {
            if gy == 0.0 || hi - lo <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
                break;
            }
            if (gy < 0.0) == lo_negative {
                lo = y;
            } else {
                hi = y;
            }
            let slope = self.dg_dy(x, y)?;
            let newton = y - gy / slope;
            y = if slope != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            gy = self.g(x, y)?;
            if gy.abs() <= 1e-3 * tol {
                break;
            }
        }
        Ok(Some((y, gy.abs())))
    }
}

/// Anchor conditions: `|dlambda/dy| >= 2 delta` and `|dlambda/dx| <= delta^2 / 2`.
/// The sign of `dlambda/dy` only fixes the orientation of the curve.
fn anchor_ok(dx: f64, dy: f64, delta: f64) -> bool {
    dy.abs() >= 2.0 * delta && dx.abs() <= 0.5 * delta * delta
}

/// Trace `xi` with `lambda(x, xi(x)) = E0` over the increasing sample points
/// `xs`, outward from an anchor in both directions. Each root is searched in
/// `[xi_prev - 2 delta dx, xi_prev + 2 delta dx]` around the last accepted sample.
#[allow(clippy::too_many_arguments)]
pub fn trace_curve(
    params: &ModelParams,
    a: i64,
    b: i64,
    e0: f64,
    xs: &[f64],
    delta: f64,
    epsilon: f64,
    opts: &TraceOptions,
) -> Result<CurveSample> {
    if xs.is_empty() || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::validation("sample points must be nonempty and increasing"));
    }
    if !(delta > 0.0 && epsilon > 0.0) {
        return Err(Error::validation("delta and epsilon must be positive"));
    }
    let candidates: Vec<usize> = match opts.anchor {
        Some(i) if i < xs.len() => vec![i],
        Some(i) => return Err(Error::validation(format!("anchor {i} out of range"))),
        None => (0..xs.len()).collect(),
    };
    let mut last_err = None;
    for i in candidates {
        match anchor_at(params, a, b, e0, xs[i], delta, epsilon, opts) {
            Ok((k, y)) => return trace_from(params, a, b, e0, xs, delta, epsilon, opts, i, k, y),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

#[allow(clippy::too_many_arguments)]
fn anchor_at(
    params: &ModelParams,
    a: i64,
    b: i64,
    e0: f64,
    x: f64,
    delta: f64,
    epsilon: f64,
    opts: &TraceOptions,
) -> Result<(usize, f64)> {
    let op = build_restriction(&params.with_phase(x, opts.y0), a, b)?;
    let (_, k) = nearest_eigenvalue(&op, e0);
    let branch = Branch { params, a, b, k, e0 };
    let r = opts.anchor_radius;
    let (y, res) = branch
        .root(x, opts.y0, opts.y0 - r, opts.y0 + r, opts.residual_tol)?
        .ok_or_else(|| Error::Bracket(format!("no anchor root within {r} of y0 at x = {x}")))?;
    if res > opts.residual_tol {
        return Err(Error::Hypothesis(format!("anchor residual {res:e} too large")));
    }
    let hf = hellmann_feynman(&params.with_phase(x, y), a, b, e0, epsilon)?;
    if hf.index != k || !anchor_ok(hf.dlam_dx, hf.dlam_dy, delta) {
        return Err(Error::Hypothesis(format!(
            "anchor slope conditions fail at x = {x}: dx = {:e}, dy = {:e}",
            hf.dlam_dx, hf.dlam_dy
        )));
    }
    Ok((k, y))
}

#[allow(clippy::too_many_arguments)]
fn trace_from(
    params: &ModelParams,
    a: i64,
    b: i64,
    e0: f64,
    xs: &[f64],
    delta: f64,
    epsilon: f64,
    opts: &TraceOptions,
    anchor: usize,
    k: usize,
    y_anchor: f64,
) -> Result<CurveSample> {
    let n = xs.len();
    let mut xis = vec![f64::NAN; n];
    let mut residuals = vec![f64::NAN; n];
    let mut accepted = vec![false; n];
    let mut indices = vec![k; n];
    xis[anchor] = y_anchor;
    residuals[anchor] = Branch { params, a, b, k, e0 }.g(xs[anchor], y_anchor)?.abs();
    accepted[anchor] = true;
    let forward: Vec<usize> = (anchor + 1..n).collect();
    let backward: Vec<usize> = (0..anchor).rev().collect();
    for order in [forward, backward] {
        let (mut x_prev, mut y_prev) = (xs[anchor], y_anchor);
        for i in order {
            let x = xs[i];
            let w = 2.0 * delta * (x - x_prev).abs() + 1e-14;
            let (_, k) = nearest_eigenvalue(&build_restriction(&params.with_phase(x, y_prev), a, b)?, e0);
            indices[i] = k;
            let branch = Branch { params, a, b, k, e0 };
            match branch.root(x, y_prev, y_prev - w, y_prev + w, opts.residual_tol)? {
                Some((y, res)) => {
                    xis[i] = y;
                    residuals[i] = res;
                    let isolated = check_isolated(&branch.op(x, y)?, e0, epsilon, None)
                        .map(|c| c.index == k)
                        .unwrap_or(false);
                    if res <= opts.residual_tol && isolated {
                        accepted[i] = true;
                        x_prev = x;
                        y_prev = y;
                    }
                }
                None => {
                    xis[i] = y_prev;
                    residuals[i] = branch.g(x, y_prev)?.abs();
                }
            }
        }
    }
    Ok(CurveSample {
        xs: xs.to_vec(),
        xis,
        residuals,
        accepted,
        deriv_bound: delta,
        e0,
        epsilon,
        index: k,
        indices,
        anchor,
        a,
        b,
    })
}

/// `xi` on `[a, b]` from the accepted samples there, extended by constants.
pub fn clamp_extend(sample: &CurveSample, a: f64, b: f64) -> Result<ClampedCurve> {
    if !(a <= b) {
        return Err(Error::validation("clamp interval needs a <= b"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = sample
        .accepted_points()
        .filter(|&(x, _)| x >= a && x <= b)
        .unzip();
    if xs.is_empty() {
        return Err(Error::validation("no accepted samples inside the clamp interval"));
    }
    ClampedCurve::new(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::CircleCurve;
    use crate::dynamics::{Frequency, PotentialForm, SamplingFunction, TorusPoint};

    fn model(h: f64) -> ModelParams {
        ModelParams::new(
            SamplingFunction::cosine(2.0),
            Frequency::sqrt2(),
            h,
            TorusPoint::new(0.0, 0.0),
            PotentialForm::Skew,
        )
        .unwrap()
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn scale_zero_curve_is_constant() {
        let p = model(0.1);
        let y0 = 0.3;
        let e0 = p.f.eval(y0);
        let opts = TraceOptions {
            y0,
            ..Default::default()
        };
        let c = trace_curve(&p, 0, 0, e0, &grid(50), 0.2, 0.5, &opts).unwrap();
        assert!(c.accepted.iter().all(|&b| b));
        assert!(c.xis.iter().all(|&y| y == y0));
        assert!(c.residuals.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn three_site_curve() {
        let p = model(0.1);
        let opts = TraceOptions {
            y0: 0.25,
            ..Default::default()
        };
        let xs = grid(200);
        let c = trace_curve(&p, -1, 1, 0.0, &xs, 0.3, 0.02, &opts).unwrap();
        // Two folds of the level set near y = 0.25 cut out about 13% of x.
        assert!(c.accepted_fraction() > 0.75, "{}", c.accepted_fraction());
        for (i, (x, y)) in c.accepted_points().enumerate() {
            let op = build_restriction(&p.with_phase(x, y), -1, 1).unwrap();
            let k = c.indices[c.xs.iter().position(|&v| v == x).unwrap()];
            assert!(kth_eigenvalue(&op, k, 0.0).abs() <= 1e-10, "sample {i}");
        }
        assert!(c.max_accepted_slope() <= 2.0 * 0.3 + 1e-9);
        // Monotone in y near the anchor.
        let (xa, ya) = (c.xs[c.anchor], c.xis[c.anchor]);
        let s = 1e-4;
        let lam = |y: f64| {
            kth_eigenvalue(&build_restriction(&p.with_phase(xa, y), -1, 1).unwrap(), c.index, 0.0)
        };
        assert!((lam(ya + s) - lam(ya - s)).abs() >= (2.0 / 3.0) * 0.3 * 2.0 * s);
        assert!(c.to_csv().starts_with("x,xi,residual,accepted\n"));
    }

    #[test]
    fn anchor_failure_is_reported() {
        let p = model(0.1);
        let opts = TraceOptions {
            y0: 0.0,
            anchor: Some(0),
            anchor_radius: 0.01,
            ..Default::default()
        };
        // f(y) = 2 cos(2 pi y) stays near 2 on [-0.01, 0.01]: no root for E0 = 0.
        assert!(trace_curve(&p, -1, 1, 0.0, &grid(10), 0.3, 0.02, &opts).is_err());
    }

    #[test]
    fn clamping() {
        let c = CurveSample {
            xs: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            xis: vec![0.0, 0.01, 0.02, 0.03, 0.04],
            residuals: vec![0.0; 5],
            accepted: vec![true; 5],
            deriv_bound: 0.2,
            e0: 0.0,
            epsilon: 0.1,
            index: 0,
            indices: vec![0; 5],
            anchor: 0,
            a: 0,
            b: 0,
        };
        let k = clamp_extend(&c, 0.1, 0.3).unwrap();
        assert_eq!(k.value(0.0), 0.01);
        assert_eq!(k.value(0.5), 0.03);
        assert!((k.slope(0.2) - 0.1).abs() < 1e-12);
        assert_eq!(k.slope(0.05), 0.0);
        assert!(clamp_extend(&c, 0.41, 0.5).is_err());
    }
}
