//! Coordinates `T^l(x, xi(x)) = (phi_l(x), psi_l(x))` along a curve, the
//! inverse branches of `psi_l`, and a grid harness for the measure of
//! `x` whose orbit hits a set `U` at some time `R <= l <= 2R`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{max_slope, CircleCurve};
use crate::dynamics::{frac, Frequency, CIRCLE_GRID};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::greens::{circular_runs, TorusGrid, UnsuitabilityGrid};

/// Slope ceiling for `xi`.
pub const MAX_XI_SLOPE: f64 = 1.0 / 3.0;

pub struct FastVarConfig {
    xi: Box<dyn CircleCurve>,
    alpha: Frequency,
    r: i64,
    m_intervals: usize,
    xi_slope: f64,
}

impl FastVarConfig {
    /// Checks `|xi'| <= 1/3` by difference quotients on a fine grid; these
    /// never exceed the true sup, so the slack only absorbs rounding.
    pub fn new(xi: Box<dyn CircleCurve>, alpha: Frequency, r: i64, m_intervals: usize) -> Result<Self> {
        if r < 1 {
            return Err(Error::validation("R must be at least 1"));
        }
        if m_intervals < 1 {
            return Err(Error::validation("the section interval bound M must be at least 1"));
        }
        let xi_slope = max_slope(xi.as_ref(), CIRCLE_GRID);
        if xi_slope > MAX_XI_SLOPE + 1e-9 {
            return Err(Error::Hypothesis(format!("|xi'| reaches {xi_slope}, above 1/3")));
        }
        Ok(Self {
            xi,
            alpha,
            r,
            m_intervals,
            xi_slope,
        })
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn m_intervals(&self) -> usize {
        self.m_intervals
    }

    pub fn alpha(&self) -> &Frequency {
        &self.alpha
    }

    /// Largest sampled `|xi'|`.
    pub fn xi_slope(&self) -> f64 {
        self.xi_slope
    }

    pub fn xi(&self, x: f64) -> f64 {
        self.xi.value(x)
    }

    /// The range `R..=2R`.
    pub fn times(&self) -> std::ops::RangeInclusive<i64> {
        self.r..=2 * self.r
    }

    /// The lift `xi(x) + l x + {l (l-1) alpha}` of `psi_l`, increasing with
    /// `g(x + 1) = g(x) + l`.
    fn psi_lift(&self, ell: i64, x: f64) -> f64 {
        self.xi.value(x) + ell as f64 * x + self.alpha.mul_mod1(ell * (ell - 1))
    }
}

/// `(phi_l(x), psi_l(x)) = (x + 2 l alpha, xi(x) + l x + l (l-1) alpha)` mod 1,
/// for `R <= l <= 2R`.
pub fn fast_coords(cfg: &FastVarConfig, x: f64, ell: i64) -> Result<(f64, f64)> {
    if !cfg.times().contains(&ell) {
        return Err(Error::validation(format!(
            "l = {ell} outside [{}, {}]",
            cfg.r,
            2 * cfg.r
        )));
    }
    let phi = frac(x + cfg.alpha.mul_mod1(2 * ell));
    let psi = frac(frac(cfg.xi.value(x)) + frac(ell as f64 * x) + cfg.alpha.mul_mod1(ell * (ell - 1)));
    Ok((phi, psi))
}

/// The real `x` with `xi(x) + l x + {l (l-1) alpha} = t`; differentiating
/// in `t` gives the branch derivatives `theta_{l,p}'`.
pub fn psi_lift_inverse(cfg: &FastVarConfig, ell: i64, t: f64) -> Result<f64> {
    if ell < 1 {
        return Err(Error::validation("l must be at least 1"));
    }
    let g = |x: f64| cfg.psi_lift(ell, x) - t;
    let guess = (t - cfg.psi_lift(ell, 0.0)) / ell as f64;
    let (mut lo, mut hi) = (guess.floor() - 1.0, guess.floor() + 2.0);
    if !(g(lo) <= 0.0 && g(hi) >= 0.0) {
        return Err(Error::Bracket(format!("psi_{ell} lift does not bracket {t}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let res = g(x).abs();
    if res > 1e-10 {
        return Err(Error::Bracket(format!("psi_{ell} inverse residual {res:e} at t = {t}")));
    }
    Ok(x)
}

/// `theta_{l,p}(y)` for `p = 1..=l`: the branches are numbered from the lift
/// value `psi_l(0)`, so `theta_{l,1}(y)` is the first root at or after 0.
pub fn theta(cfg: &FastVarConfig, ell: i64, p: i64, y: f64) -> Result<f64> {
    if !(1..=ell).contains(&p) {
        return Err(Error::validation(format!("branch p = {p} outside 1..={ell}")));
    }
    let g0 = cfg.psi_lift(ell, 0.0);
    let t = y + (g0 - y).ceil() + (p - 1) as f64;
    Ok(frac(psi_lift_inverse(cfg, ell, t)?))
}

/// `eta_{l,p}(y) = phi_l(theta_{l,p}(y))`.
pub fn eta(cfg: &FastVarConfig, ell: i64, p: i64, y: f64) -> Result<f64> {
    Ok(frac(theta(cfg, ell, p, y)? + cfg.alpha.mul_mod1(2 * ell)))
}

/// All `x` in `[0, 1)` with `psi_l(x) = y` mod 1, in increasing order. The
/// count is checked to be exactly `l`.
pub fn branch_inverses(cfg: &FastVarConfig, ell: i64, y: f64) -> Result<Vec<f64>> {
    if ell < 1 {
        return Err(Error::validation("l must be at least 1"));
    }
    // a non-monotone lift means the slope hypothesis failed somewhere
    let probes = 32 * ell as usize;
    let mut prev = cfg.psi_lift(ell, 0.0);
    for i in 1..=probes {
        let v = cfg.psi_lift(ell, i as f64 / probes as f64);
        if v <= prev {
            return Err(Error::Bracket(format!("psi_{ell} is not increasing near x = {}", i as f64 / probes as f64)));
        }
        prev = v;
    }
    let mut xs = (1..=ell)
        .map(|p| theta(cfg, ell, p, y))
        .collect::<Result<Vec<f64>>>()?;
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    if xs.len() != ell as usize {
        return Err(Error::Bracket(format!("found {} preimages of psi_{ell}, expected {ell}", xs.len())));
    }
    Ok(xs)
}

/// A subset of the torus that can be probed pointwise.
pub trait TorusSet: Sync {
    fn contains(&self, x: f64, y: f64) -> bool;

    /// `|U|`, exact or grid-estimated.
    fn measure(&self) -> f64;

    /// Largest number of intervals in a horizontal section `U(y)`.
    fn max_section_intervals(&self) -> usize;
}

impl TorusSet for TorusGrid {
    fn contains(&self, x: f64, y: f64) -> bool {
        TorusGrid::contains(self, x, y)
    }

    fn measure(&self) -> f64 {
        TorusGrid::measure(self)
    }

    fn max_section_intervals(&self) -> usize {
        (0..self.ny).map(|j| circular_runs(self.row(j))).max().unwrap_or(0)
    }
}

impl TorusSet for UnsuitabilityGrid {
    fn contains(&self, x: f64, y: f64) -> bool {
        self.grid.contains(x, y)
    }

    fn measure(&self) -> f64 {
        self.grid.measure()
    }

    fn max_section_intervals(&self) -> usize {
        self.grid.max_section_intervals()
    }
}

/// The closed rectangle `[x0, x0 + w] x [y0, y0 + h]` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusRect {
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
    pub h: f64,
}

impl TorusRect {
    pub fn new(x0: f64, y0: f64, w: f64, h: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&w) && (0.0..=1.0).contains(&h)) {
            return Err(Error::validation("rectangle sides must lie in [0, 1]"));
        }
        Ok(Self {
            x0: frac(x0),
            y0: frac(y0),
            w,
            h,
        })
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        frac(x - self.x0) <= self.w && frac(y - self.y0) <= self.h
    }

    /// Pieces inside the unit square, as `(x_lo, x_hi, y_lo, y_hi)`.
    fn unwrapped(&self) -> Vec<[f64; 4]> {
        let split = |s: f64, len: f64| -> Vec<(f64, f64)> {
            if s + len <= 1.0 {
                vec![(s, s + len)]
            } else {
                vec![(s, 1.0), (0.0, s + len - 1.0)]
            }
        };
        let mut out = Vec::new();
        for (xa, xb) in split(self.x0, self.w) {
            for (ya, yb) in split(self.y0, self.h) {
                out.push([xa, xb, ya, yb]);
            }
        }
        out
    }
}

/// A finite union of torus rectangles (synthetic `U`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectUnion {
    pub rects: Vec<TorusRect>,
}

impl RectUnion {
    pub fn new(rects: Vec<TorusRect>) -> Self {
        Self { rects }
    }

    pub fn full() -> Self {
        Self::new(vec![TorusRect {
            x0: 0.0,
            y0: 0.0,
            w: 1.0,
            h: 1.0,
        }])
    }

    fn pieces(&self) -> Vec<[f64; 4]> {
        self.rects.iter().flat_map(TorusRect::unwrapped).collect()
    }

    fn sorted_breaks(pieces: &[[f64; 4]], lo: usize, hi: usize) -> Vec<f64> {
        let mut v: Vec<f64> = pieces.iter().flat_map(|p| [p[lo], p[hi]]).chain([0.0, 1.0]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Merged `x`-intervals of the pieces covering height `y`.
    fn section(pieces: &[[f64; 4]], y: f64) -> Vec<(f64, f64)> {
        let mut iv: Vec<(f64, f64)> = pieces
            .iter()
            .filter(|p| p[2] <= y && y <= p[3])
            .map(|p| (p[0], p[1]))
            .collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged
    }
}

impl TorusSet for RectUnion {
    fn contains(&self, x: f64, y: f64) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
    }

    fn measure(&self) -> f64 {
        let pieces = self.pieces();
        let ys = Self::sorted_breaks(&pieces, 2, 3);
        ys.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let width: f64 = Self::section(&pieces, mid).iter().map(|(a, b)| b - a).sum();
                width * (w[1] - w[0])
            })
            .sum()
    }

    fn max_section_intervals(&self) -> usize {
        let pieces = self.pieces();
        let ys = Self::sorted_breaks(&pieces, 2, 3);
        // sections change only at the y-breaks; probe the breaks and the gaps
        let probes = ys.iter().copied().chain(ys.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        probes
            .map(|y| {
                let s = Self::section(&pieces, y);
                let wraps = s.len() > 1 && s[0].0 == 0.0 && s[s.len() - 1].1 == 1.0;
                s.len() - usize::from(wraps)
            })
            .max()
            .unwrap_or(0)
    }
}

/// Outcome of one resonant-measure scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonantReport {
    #[serde(rename = "R")]
    pub r: i64,
    pub u_measure: f64,
    /// Fraction of grid points `x` with `T^l(x, xi(x))` in `U` for some `l`.
    pub measured: f64,
    /// `120 R^4 sqrt|U| + 2M/R`.
    pub bound: f64,
    pub pass: bool,
    pub nx: usize,
    pub max_section_intervals: usize,
    pub m_intervals: usize,
}

impl ResonantReport {
    pub const CSV_HEADER: &'static str = "R,U_measure,measured,bound,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.r,
            sig12(self.u_measure),
            sig12(self.measured),
            sig12(self.bound),
            self.pass
        )
    }
}

pub fn resonant_csv(reports: &[ResonantReport]) -> String {
    let mut out = format!("{}\n", ResonantReport::CSV_HEADER);
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Scan `nx` cell centres and mark `x` when `T^l(x, xi(x))` lies in `U`
/// for some `R <= l <= 2R`. Passes when the marked fraction is at most
/// the bound plus `2 / nx`.
pub fn resonant_measure(cfg: &FastVarConfig, u: &dyn TorusSet, nx: usize) -> Result<ResonantReport> {
    if nx == 0 {
        return Err(Error::validation("nx must be positive"));
    }
    let sections = u.max_section_intervals();
    if sections > cfg.m_intervals {
        return Err(Error::Hypothesis(format!(
            "U has sections with {sections} intervals, more than M = {}",
            cfg.m_intervals
        )));
    }
    let hits = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) / nx as f64;
            for ell in cfg.times() {
                let (phi, psi) = fast_coords(cfg, x, ell)?;
                if u.contains(phi, psi) {
                    return Ok(1usize);
                }
            }
            Ok(0)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    let r = cfg.r as f64;
    let u_measure = u.measure();
    let measured = hits as f64 / nx as f64;
    let bound = 120.0 * r.powi(4) * u_measure.sqrt() + 2.0 * cfg.m_intervals as f64 / r;
    Ok(ResonantReport {
        r: cfg.r,
        u_measure,
        measured,
        bound,
        pass: measured <= bound + 2.0 / nx as f64,
        nx,
        max_section_intervals: sections,
        m_intervals: cfg.m_intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{ConstantCurve, TrigCurve};
    use crate::dynamics::{skew_shift_iterate, skew_shift_step, TorusPoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(xi: Box<dyn CircleCurve>, alpha: f64, r: i64, m: usize) -> FastVarConfig {
        FastVarConfig::new(xi, Frequency::new(alpha).unwrap(), r, m).unwrap()
    }

    fn random_xi(rng: &mut ChaCha8Rng) -> TrigCurve {
        // slope_bound = 2 pi k (|a| + |b|) = 0.3
        let k = rng.gen_range(1..4);
        let s = 0.3 / (std::f64::consts::TAU * k as f64);
        let u: f64 = rng.gen();
        TrigCurve {
            c0: rng.gen(),
            terms: vec![(k, s * u, s * (1.0 - u))],
        }
    }

    #[test]
    fn coordinates_closed_forms() {
        let c = cfg(Box::new(ConstantCurve(0.0)), 0.0, 1, 1);
        let (p, q) = fast_coords(&c, 0.3, 1).unwrap();
        assert!((p - 0.3).abs() < 1e-15 && (q - 0.3).abs() < 1e-15);
        assert!(fast_coords(&c, 0.3, 3).is_err());

        let y0 = 0.37;
        let c = FastVarConfig::new(Box::new(ConstantCurve(y0)), Frequency::sqrt2(), 4, 1).unwrap();
        let a = Frequency::sqrt2().alpha();
        let (p, q) = fast_coords(&c, 0.0, 6).unwrap();
        assert!((p - frac(12.0 * a)).abs() < 1e-12);
        assert!((q - frac(y0 + 30.0 * a)).abs() < 1e-12);
    }

    #[test]
    fn coordinates_match_the_skew_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let xi = random_xi(&mut rng);
            let r = rng.gen_range(1..9);
            let c = FastVarConfig::new(Box::new(xi.clone()), Frequency::sqrt2(), r, 1).unwrap();
            let x: f64 = rng.gen();
            for ell in c.times() {
                let (p, q) = fast_coords(&c, x, ell).unwrap();
                let start = TorusPoint::new(x, xi.value(x));
                let it = skew_shift_iterate(start, c.alpha(), ell);
                let mut stepped = start;
                for _ in 0..ell {
                    stepped = skew_shift_step(stepped, c.alpha());
                }
                let target = TorusPoint::new(p, q);
                assert!(target.torus_dist(&it) < 1e-12);
                assert!(target.torus_dist(&stepped) < 1e-12);
            }
        }
    }

    #[test]
    fn steep_curve_is_rejected() {
        let xi = TrigCurve {
            c0: 0.0,
            terms: vec![(1, 0.1, 0.0)],
        };
        assert!(matches!(
            FastVarConfig::new(Box::new(xi), Frequency::sqrt2(), 2, 1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn linear_three_to_one() {
        let c = cfg(Box::new(ConstantCurve(0.0)), 0.0, 1, 1);
        let xs = branch_inverses(&c, 3, 0.0).unwrap();
        assert_eq!(xs.len(), 3);
        for (x, want) in xs.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0]) {
            assert!((x - want).abs() < 1e-14, "{xs:?}");
        }
    }

    #[test]
    fn branches_count_round_trip_and_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let xi = random_xi(&mut rng);
            let c = FastVarConfig::new(Box::new(xi), Frequency::sqrt2(), 1, 1).unwrap();
            let y: f64 = rng.gen();
            let ell = rng.gen_range(1..=64);
            let xs = branch_inverses(&c, ell, y).unwrap();
            assert_eq!(xs.len(), ell as usize);
            for &x in &xs {
                let back = frac(c.psi_lift(ell, x));
                assert!(dist(back, y) < 1e-10);
            }
            let s = 1e-5;
            let t = y + ell as f64 * rng.gen::<f64>();
            let d = (psi_lift_inverse(&c, ell, t + s).unwrap() - psi_lift_inverse(&c, ell, t - s).unwrap()) / (2.0 * s);
            let l = ell as f64;
            assert!(d >= 1.0 / (l + 1.0 / 3.0) - 1e-6 && d <= 1.0 / (l - 1.0 / 3.0) + 1e-6, "{d}");
        }
    }

    fn dist(a: f64, b: f64) -> f64 {
        crate::dynamics::dist_to_int(a - b)
    }

    #[test]
    fn theta_inverts_psi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = FastVarConfig::new(Box::new(random_xi(&mut rng)), Frequency::sqrt2(), 2, 1).unwrap();
        for ell in c.times() {
            let y: f64 = rng.gen();
            for p in 1..=ell {
                let x = theta(&c, ell, p, y).unwrap();
                let (_, q) = fast_coords(&c, x, ell).unwrap();
                assert!(dist(q, y) < 1e-10);
                let e = eta(&c, ell, p, y).unwrap();
                assert!(dist(e, x + c.alpha().mul_mod1(2 * ell)) < 1e-12);
            }
            assert!(theta(&c, ell, ell + 1, y).is_err());
        }
    }

    #[test]
    fn collision_derivative_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in 1..=8i64 {
            let c = FastVarConfig::new(Box::new(random_xi(&mut rng)), Frequency::sqrt2(), r, 1).unwrap();
            let floor = 1.0 / (20.0 * (r * r) as f64);
            for _ in 0..20 {
                let l1 = rng.gen_range(r..2 * r);
                let l2 = rng.gen_range(l1 + 1..=2 * r);
                let t1 = rng.gen::<f64>() * l1 as f64;
                let t2 = rng.gen::<f64>() * l2 as f64;
                let s = 1e-5;
                let d = |ell: i64, t: f64| {
                    (psi_lift_inverse(&c, ell, t + s).unwrap() - psi_lift_inverse(&c, ell, t - s).unwrap()) / (2.0 * s)
                };
                // g(y) = eta_{l1,p1}(y) - eta_{l2,p2}(y) differentiates to theta' - theta'
                let g = d(l1, t1) - d(l2, t2);
                assert!(g.abs() >= floor, "R = {r}: |g'| = {g}");
            }
        }
    }

    #[test]
    fn rectangle_union_geometry() {
        let u = RectUnion::new(vec![
            TorusRect::new(0.9, 0.0, 0.2, 0.5).unwrap(),
            TorusRect::new(0.3, 0.25, 0.1, 0.5).unwrap(),
        ]);
        assert!((u.measure() - 0.15).abs() < 1e-12);
        assert_eq!(u.max_section_intervals(), 2);
        assert!(u.contains(0.95, 0.1) && u.contains(0.05, 0.1) && !u.contains(0.5, 0.1));
        let overlap = RectUnion::new(vec![
            TorusRect::new(0.0, 0.0, 0.5, 0.5).unwrap(),
            TorusRect::new(0.25, 0.25, 0.5, 0.5).unwrap(),
        ]);
        assert!((overlap.measure() - 0.4375).abs() < 1e-12);
        assert_eq!(overlap.max_section_intervals(), 1);
        assert_eq!(RectUnion::full().max_section_intervals(), 1);
    }

    #[test]
    fn trivial_sets() {
        let c = cfg(Box::new(ConstantCurve(0.2)), Frequency::sqrt2().alpha(), 3, 1);
        let empty = RectUnion::new(vec![]);
        let r = resonant_measure(&c, &empty, 1000).unwrap();
        assert_eq!(r.measured, 0.0);
        assert!(r.pass);
        let r = resonant_measure(&c, &RectUnion::full(), 1000).unwrap();
        assert_eq!(r.measured, 1.0);
        assert!(r.bound >= 120.0 * 81.0 && r.pass);
    }

    #[test]
    fn too_many_sections_is_a_precondition_error() {
        let c = cfg(Box::new(ConstantCurve(0.2)), Frequency::sqrt2().alpha(), 2, 1);
        let u = RectUnion::new(vec![
            TorusRect::new(0.1, 0.1, 0.1, 0.1).unwrap(),
            TorusRect::new(0.5, 0.1, 0.1, 0.1).unwrap(),
        ]);
        assert!(matches!(resonant_measure(&c, &u, 100), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn tiny_rectangles_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let y0: f64 = rng.gen();
        let c = FastVarConfig::new(Box::new(ConstantCurve(y0)), Frequency::sqrt2(), 5, 1).unwrap();
        for _ in 0..50 {
            let u = RectUnion::new(vec![TorusRect::new(rng.gen(), rng.gen(), 1e-5, 1e-5).unwrap()]);
            let r = resonant_measure(&c, &u, 2000).unwrap();
            assert!(r.pass && r.measured < 0.1 * r.bound, "{r:?}");
        }
    }

    #[test]
    fn grid_sets_are_torus_sets() {
        let g = TorusGrid::evaluate(8, 4, |x, _| Ok(x < 0.25 || (0.5..0.75).contains(&x))).unwrap();
        assert_eq!(TorusSet::max_section_intervals(&g), 2);
        assert_eq!(TorusSet::measure(&g), 0.5);
        let csv = resonant_csv(&[ResonantReport {
            r: 2,
            u_measure: 0.5,
            measured: 0.25,
            bound: 1.0,
            pass: true,
            nx: 10,
            max_section_intervals: 2,
            m_intervals: 2,
        }]);
        assert_eq!(csv, "R,U_measure,measured,bound,pass\n2,0.5,0.25,1,true\n");
    }
}
