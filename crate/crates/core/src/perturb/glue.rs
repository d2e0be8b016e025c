use serde::Serialize;

use crate::circle::{covered_length, max_slope, sup_distance, CircleCurve, CircleInterval};
use crate::error::{Error, Result};

const GEOM_SLACK: f64 = 1e-12;

fn sorted_order(intervals: &[CircleInterval], eps: f64) -> Result<Vec<usize>> {
    for (i, iv) in intervals.iter().enumerate() {
        if iv.len + GEOM_SLACK < eps {
            return Err(Error::validation(format!(
                "interval {i} has length {} below eps = {eps}",
                iv.len
            )));
        }
    }
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&i, &j| intervals[i].start.total_cmp(&intervals[j].start));
    let q = order.len();
    if q > 1 {
        let overlaps = (0..q).any(|w| {
            let next = &intervals[order[(w + 1) % q]];
            let turn = if w + 1 == q { 1.0 } else { 0.0 };
            next.start + turn - intervals[order[w]].end() < -GEOM_SLACK
        });
        if overlaps {
            return Err(Error::validation("intervals overlap"));
        }
    }
    Ok(order)
}

/// Select pairwise `eps`-separated intervals carrying at least a third of
/// the total length. Returns input indices in circular order.
pub fn select_separated(intervals: &[CircleInterval], eps: f64) -> Result<Vec<usize>> {
    let w: Vec<f64> = intervals.iter().map(|i| i.len).collect();
    select_separated_weighted(intervals, eps, &w)
}

/// As [`select_separated`] with the third measured by `weights`. Candidates
/// are the even and odd positions in circular order, plus the last interval
/// alone when the count is odd; ties prefer that order.
pub fn select_separated_weighted(
    intervals: &[CircleInterval],
    eps: f64,
    weights: &[f64],
) -> Result<Vec<usize>> {
    if weights.len() != intervals.len() {
        return Err(Error::validation("one weight per interval required"));
    }
    let order = sorted_order(intervals, eps)?;
    let q = order.len();
    if q == 0 {
        return Ok(vec![]);
    }
    // 1-based positions 2p, 2p - 1 (excluding q when odd), and {q} when odd.
    let even: Vec<usize> = (1..q).step_by(2).collect();
    let odd_limit = if q % 2 == 1 { q - 1 } else { q };
    let odd: Vec<usize> = (0..odd_limit).step_by(2).collect();
    let last: Vec<usize> = if q % 2 == 1 { vec![q - 1] } else { vec![] };
    let weight = |class: &[usize]| class.iter().map(|&p| weights[order[p]]).sum::<f64>();
    let mut best = even;
    for class in [odd, last] {
        if weight(&class) > weight(&best) {
            best = class;
        }
    }
    Ok(best.into_iter().map(|p| order[p]).collect())
}

/// `base + eta`, where `eta = xi_q - base` on each selected interval and a
/// cubic `eta_b + (eta_a - eta_b)(3t^2 - 2t^3)` across each gap.
pub struct GluedCurve {
    base: Box<dyn CircleCurve>,
    pieces: Vec<(CircleInterval, Box<dyn CircleCurve>)>,
}

impl GluedCurve {
    fn offset_at_end(&self, p: usize) -> f64 {
        let (iv, c) = &self.pieces[p];
        c.value(iv.end()) - self.base.value(iv.end())
    }

    fn offset_at_start(&self, p: usize) -> f64 {
        let (iv, c) = &self.pieces[p];
        c.value(iv.start) - self.base.value(iv.start)
    }

    pub fn pieces(&self) -> impl Iterator<Item = &CircleInterval> {
        self.pieces.iter().map(|(iv, _)| iv)
    }
}

impl CircleCurve for GluedCurve {
    fn value(&self, x: f64) -> f64 {
        if self.pieces.is_empty() {
            return self.base.value(x);
        }
        for (iv, c) in &self.pieces {
            if iv.contains(x) {
                return c.value(iv.lift(x));
            }
        }
        let n = self.pieces.len();
        let (prev, d) = (0..n)
            .map(|p| (p, (x - self.pieces[p].0.end()).rem_euclid(1.0)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let next = (prev + 1) % n;
        let gap = (self.pieces[next].0.start - self.pieces[prev].0.end()).rem_euclid(1.0);
        let gap = if n == 1 { 1.0 - self.pieces[0].0.len } else { gap };
        let t = (d / gap).clamp(0.0, 1.0);
        let (eb, ea) = (self.offset_at_end(prev), self.offset_at_start(next));
        self.base.value(x) + eb + (ea - eb) * t * t * (3.0 - 2.0 * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlueStats {
    pub max_slope: f64,
    pub slope_bound: f64,
    pub sup_deviation: f64,
    pub deviation_bound: f64,
    pub selected_measure: f64,
    pub total_measure: f64,
}

impl GlueStats {
    pub fn measure_ratio(&self) -> f64 {
        if self.total_measure == 0.0 {
            1.0
        } else {
            self.selected_measure / self.total_measure
        }
    }

    pub fn bounds_hold(&self) -> bool {
        self.max_slope <= self.slope_bound * (1.0 + 1e-9)
            && self.sup_deviation <= self.deviation_bound
            && self.measure_ratio() >= 1.0 / 3.0 - 1e-12
    }
}

pub struct GlueResult {
    pub selected: Vec<usize>,
    pub curve: GluedCurve,
    pub stats: GlueStats,
}

/// Grid used for precondition checks and the reported statistics.
pub const GLUE_GRID: usize = 10_000;

/// Glue local curves `xi_q` on disjoint intervals into one curve on the
/// circle that agrees with `xi_q` on an `eps`-separated selection of them.
pub fn glue_curves(
    base: Box<dyn CircleCurve>,
    locals: Vec<(CircleInterval, Box<dyn CircleCurve>)>,
    eps: f64,
    delta: f64,
    l0: f64,
    frak_x: &[CircleInterval],
) -> Result<GlueResult> {
    if !(eps > 0.0 && delta > 0.0 && l0 >= 0.0) {
        return Err(Error::validation("eps, delta must be positive and L0 nonnegative"));
    }
    for (q, (iv, c)) in locals.iter().enumerate() {
        let m = 200;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=m {
            let x = iv.start + iv.len * i as f64 / m as f64;
            let (v, b) = (c.value(x), base.value(x));
            if !((v - b).abs() < delta) {
                return Err(Error::Hypothesis(format!(
                    "local curve {q} deviates {:e} from the base at x = {x}",
                    (v - b).abs()
                )));
            }
            if let Some((px, pv)) = prev {
                let s = ((v - pv) / (x - px)).abs();
                if s > l0 * (1.0 + 1e-6) + 1e-9 {
                    return Err(Error::Hypothesis(format!(
                        "local curve {q} has slope {s} above L0 = {l0}"
                    )));
                }
            }
            prev = Some((x, v));
        }
    }
    let intervals: Vec<CircleInterval> = locals.iter().map(|(iv, _)| *iv).collect();
    let weights: Vec<f64> = intervals.iter().map(|iv| covered_length(iv, frak_x)).collect();
    let selected = select_separated_weighted(&intervals, eps, &weights)?;
    let total_measure: f64 = weights.iter().sum();
    let selected_measure: f64 = selected.iter().map(|&q| weights[q]).sum();

    let mut keep = vec![false; locals.len()];
    selected.iter().for_each(|&q| keep[q] = true);
    let mut pieces: Vec<(CircleInterval, Box<dyn CircleCurve>)> = locals
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    pieces.sort_by(|a, b| a.0.start.total_cmp(&b.0.start));
    let curve = GluedCurve { base, pieces };
    let stats = GlueStats {
        max_slope: max_slope(&curve, GLUE_GRID),
        slope_bound: l0 + 3.0 * delta / eps,
        sup_deviation: sup_distance(&curve, &curve.base, GLUE_GRID),
        deviation_bound: 5.0 * delta,
        selected_measure,
        total_measure,
    };
    Ok(GlueResult {
        selected,
        curve,
        stats,
    })
}
