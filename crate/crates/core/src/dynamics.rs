//! Torus arithmetic, the skew-shift and its iterates, and trigonometric
//! sampling functions.
//!
//! All phases live on the circle `T = R/Z` and are stored reduced into
//! `[0, 1)`. Products `k * alpha` with large `k` are reduced through
//! error-free transformations so that the potential at site `n ~ 4e4`
//! (phase argument `alpha * n^2 ~ 1.7e9`) keeps its fractional part to
//! a few ulp.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of denominators checked by [`Frequency::with_diophantine`].
pub const DEFAULT_Q_CHECK: u64 = 10_000;

/// Grid resolution used for sup-norm estimates on the circle.
pub const CIRCLE_GRID: usize = 10_000;

/// Reduce `x` into `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed distance to the nearest integer, `||x||` in absolute value.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    let r = frac(x);
    r.min(1.0 - r)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Sum values that are each already reduced mod 1, carrying the rounding
/// error of every partial sum separately.
fn sum_mod1(terms: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut comp = 0.0;
    for &t in terms {
        let (s, e) = two_sum(acc, t);
        comp += e;
        acc = s - s.floor();
    }
    frac(acc + comp)
}

/// Exact-split products of a nonnegative integer `m < 2^62` with `alpha`,
/// each reduced mod 1.
fn split_product_terms(alpha: f64, m: u64) -> [f64; 4] {
    const SHIFT: u32 = 31;
    const SCALE: f64 = (1u64 << SHIFT) as f64;
    let hi = (m >> SHIFT) as f64;
    let lo = (m & ((1u64 << SHIFT) - 1)) as f64;
    // hi*alpha = p1 + e1 and lo*alpha = p0 + e0 exactly
    let (p1, e1) = two_prod(hi, alpha);
    let (p0, e0) = two_prod(lo, alpha);
    // scaling by a power of two is exact, and so is x - floor(x)
    [frac(p1 * SCALE), frac(e1 * SCALE), frac(p0), frac(e0)]
}

/// `k * alpha mod 1` for `|k| < 2^62`, accurate to a few ulp of 1.0.
///
/// `k` is split into two 31-bit halves; each partial product is formed
/// exactly as a pair of doubles with an FMA, every double is reduced mod 1
/// (an exact operation), and the reduced pieces are summed with
/// compensation.
pub fn mod1_int_mult(alpha: f64, k: i64) -> f64 {
    debug_assert!(k.unsigned_abs() < (1u64 << 62), "|k| must be below 2^62");
    if k == 0 {
        return 0.0;
    }
    let r = sum_mod1(&split_product_terms(alpha, k.unsigned_abs()));
    if k < 0 {
        frac(-r)
    } else {
        r
    }
}

/// Rotation number `alpha` of the skew-shift, optionally carried in
/// double-double precision (`alpha + tail`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    alpha: f64,
    #[serde(default)]
    tail: f64,
    #[serde(default)]
    dioph_c: Option<f64>,
}

impl Frequency {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_tail(alpha, 0.0)
    }

    /// `alpha + tail` with `|tail|` below one ulp of `alpha`.
    pub fn with_tail(alpha: f64, tail: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) || !tail.is_finite() {
            return Err(Error::validation(format!(
                "frequency alpha must lie in [0,1), got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            tail,
            dioph_c: None,
        })
    }

    /// `sqrt(2) mod 1` to roughly 32 significant digits.
    pub fn sqrt2() -> Self {
        Self {
            alpha: 0.414_213_562_373_095_03,
            tail: 1.434_936_932_798_652_3e-17,
            dioph_c: None,
        }
    }

    /// Attach a Diophantine constant after checking `||q alpha|| >= c / q^2`
    /// for `1 <= q <= q_check`.
    pub fn with_diophantine(mut self, c: f64, q_check: u64) -> Result<Self> {
        if c <= 0.0 {
            return Err(Error::validation("Diophantine constant must be positive"));
        }
        if let Some(q) = self.diophantine_violation(c, q_check) {
            return Err(Error::validation(format!(
                "||q alpha|| < c/q^2 at q = {q} (c = {c})"
            )));
        }
        self.dioph_c = Some(c);
        Ok(self)
    }

    /// First `q <= q_check` violating the Diophantine condition, if any.
    pub fn diophantine_violation(&self, c: f64, q_check: u64) -> Option<u64> {
        (1..=q_check).find(|&q| {
            let qf = q as f64;
            dist_to_int(self.mul_mod1(q as i64)) < c / (qf * qf)
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn dioph_c(&self) -> Option<f64> {
        self.dioph_c
    }

    /// `k * alpha mod 1` including the tail.
    pub fn mul_mod1(&self, k: i64) -> f64 {
        let head = mod1_int_mult(self.alpha, k);
        if self.tail == 0.0 {
            head
        } else {
            sum_mod1(&[head, frac(k as f64 * self.tail)])
        }
    }
}

/// A point of the two-torus, coordinates reduced into `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x: frac(x),
            y: frac(y),
        }
    }

    /// Coordinatewise distance on the torus (max of the circle distances).
    pub fn torus_dist(&self, other: &TorusPoint) -> f64 {
        dist_to_int(self.x - other.x).max(dist_to_int(self.y - other.y))
    }
}

/// One step of the skew-shift, `(x, y) -> (x + 2 alpha, x + y)`.
pub fn skew_shift_step(p: TorusPoint, alpha: &Frequency) -> TorusPoint {
    TorusPoint::new(p.x + alpha.mul_mod1(2), p.x + p.y)
}

/// Closed-form `n`-th iterate `(x + 2 n alpha, y + n x + n (n-1) alpha)`.
///
/// Requires `|n| < 2^31` so that `n (n-1)` fits the exact reduction.
pub fn skew_shift_iterate(p: TorusPoint, alpha: &Frequency, n: i64) -> TorusPoint {
    if n == 0 {
        return p;
    }
    let x = sum_mod1(&[p.x, alpha.mul_mod1(2 * n)]);
    let y = sum_mod1(&[p.y, mod1_int_mult(p.x, n), alpha.mul_mod1(n * (n - 1))]);
    TorusPoint { x, y }
}

/// Which orbit generates the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PotentialForm {
    /// `V(n) = f(y + n x + n (n-1) alpha)`.
    #[default]
    Skew,
    /// `V(n) = f(y + alpha n^2)`, with `x` ignored.
    Square,
}

impl std::str::FromStr for PotentialForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skew" => Ok(PotentialForm::Skew),
            "square" => Ok(PotentialForm::Square),
            other => Err(Error::validation(format!("unknown potential form '{other}'"))),
        }
    }
}

/// Phase argument (in `[0,1)`) at which the sampling function is evaluated
/// for site `n`.
pub fn phase_at(alpha: &Frequency, p: TorusPoint, n: i64, form: PotentialForm) -> f64 {
    match form {
        PotentialForm::Skew => skew_shift_iterate(p, alpha, n).y,
        PotentialForm::Square => sum_mod1(&[p.y, alpha.mul_mod1(n * n)]),
    }
}

/// `V(n)` for the given orbit type.
pub fn potential_value(
    f: &SamplingFunction,
    alpha: &Frequency,
    p: TorusPoint,
    n: i64,
    form: PotentialForm,
) -> f64 {
    f.eval(phase_at(alpha, p, n, form))
}

/// A real trigonometric polynomial `f(t) = sum_k c_k e(k t)` with
/// `c_{-k} = conj(c_k)`.
///
/// Only the coefficients with `k >= 0` are stored; the real-valuedness
/// invariant is checked when the full coefficient list is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingFunction {
    /// `pos[k] = c_k` for `0 <= k <= deg`.
    pos: Vec<Complex64>,
    loja_f: f64,
    loja_exp: f64,
}

/// Wire format of a sampling function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingFunctionJson {
    /// `[k, re, im]` triples.
    pub coeffs: Vec<(i64, f64, f64)>,
    #[serde(rename = "loja_F")]
    pub loja_f: f64,
    pub loja_exp: f64,
}

const HERMITIAN_TOL: f64 = 1e-14;

impl SamplingFunction {
    /// Build from `(k, c_k)` pairs. A missing `-k` partner is filled in with
    /// the conjugate; a present but inconsistent partner is rejected.
    pub fn from_coefficients(
        coeffs: &[(i64, Complex64)],
        loja_f: f64,
        loja_exp: f64,
    ) -> Result<Self> {
        if !(loja_f > 0.0 && loja_exp > 0.0) {
            return Err(Error::validation("loja_F and loja_exp must be positive"));
        }
        let deg = coeffs.iter().map(|(k, _)| k.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut pos: Vec<Option<Complex64>> = vec![None; deg + 1];
        let mut neg: Vec<Option<Complex64>> = vec![None; deg + 1];
        for &(k, c) in coeffs {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::validation(format!("non-finite coefficient at k = {k}")));
            }
            let slot = if k >= 0 {
                &mut pos[k as usize]
            } else {
                &mut neg[k.unsigned_abs() as usize]
            };
            if slot.is_some() {
                return Err(Error::validation(format!("duplicate coefficient at k = {k}")));
            }
            *slot = Some(c);
        }
        let mut out = Vec::with_capacity(deg + 1);
        for k in 0..=deg {
            let c = match (pos[k], neg[k]) {
                (Some(p), Some(n)) => {
                    if (p - n.conj()).norm() > HERMITIAN_TOL * (1.0 + p.norm()) {
                        return Err(Error::validation(format!(
                            "coefficients at k = {k} and k = -{k} are not conjugate"
                        )));
                    }
                    p
                }
                (Some(p), None) => p,
                (None, Some(n)) => n.conj(),
                (None, None) => Complex64::new(0.0, 0.0),
            };
            out.push(c);
        }
        if out[0].im.abs() > HERMITIAN_TOL * (1.0 + out[0].re.abs()) {
            return Err(Error::validation("constant coefficient must be real"));
        }
        out[0].im = 0.0;
        while out.len() > 1 && out.last().is_some_and(|c| c.norm() == 0.0) {
            out.pop();
        }
        Ok(Self {
            pos: out,
            loja_f,
            loja_exp,
        })
    }

    /// `amplitude * cos(2 pi t)`; Lojasiewicz data `F = 2`, exponent `1/2`.
    pub fn cosine(amplitude: f64) -> Self {
        let half = Complex64::new(0.5 * amplitude, 0.0);
        Self {
            pos: vec![Complex64::new(0.0, 0.0), half],
            loja_f: 2.0,
            loja_exp: 0.5,
        }
    }

    /// The constant function.
    pub fn constant(value: f64) -> Self {
        Self {
            pos: vec![Complex64::new(value, 0.0)],
            loja_f: 1.0,
            loja_exp: 1.0,
        }
    }

    pub fn degree(&self) -> usize {
        self.pos.len() - 1
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.pos.get(idx) {
            Some(c) if k >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn loja_f(&self) -> f64 {
        self.loja_f
    }

    pub fn loja_exp(&self) -> f64 {
        self.loja_exp
    }

    /// `f(t)`; `t` is reduced mod 1 first.
    pub fn eval(&self, t: f64) -> f64 {
        let t = frac(t);
        let mut acc = self.pos[0].re;
        for (k, c) in self.pos.iter().enumerate().skip(1) {
            let (s, co) = (TAU * k as f64 * t).sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        acc
    }

    /// `f'(t)`.
    pub fn eval_deriv(&self, t: f64) -> f64 {
        let t = frac(t);
        let mut acc = 0.0;
        for (k, c) in self.pos.iter().enumerate().skip(1) {
            let kf = k as f64;
            let (s, co) = (TAU * kf * t).sin_cos();
            // d/dt Re(c e(kt)) = -2 pi k Im(c e(kt))
            acc -= 2.0 * TAU * kf * (c.re * s + c.im * co);
        }
        acc
    }

    /// Drop every coefficient with `|k| > r`; returns the truncation and
    /// its sup-norm distance to `self` on a uniform grid.
    pub fn truncate(&self, r: usize) -> (SamplingFunction, f64) {
        if r >= self.degree() {
            return (self.clone(), 0.0);
        }
        let trunc = SamplingFunction {
            pos: self.pos[..=r].to_vec(),
            loja_f: self.loja_f,
            loja_exp: self.loja_exp,
        };
        let err = (0..CIRCLE_GRID)
            .map(|i| {
                let t = i as f64 / CIRCLE_GRID as f64;
                (self.eval(t) - trunc.eval(t)).abs()
            })
            .fold(0.0, f64::max);
        (trunc, err)
    }

    /// `sup |f'|` on a uniform grid.
    pub fn deriv_sup_norm(&self) -> f64 {
        (0..CIRCLE_GRID)
            .map(|i| self.eval_deriv(i as f64 / CIRCLE_GRID as f64).abs())
            .fold(0.0, f64::max)
    }

    /// `sum_k 2 pi |k| |c_k|`, a rigorous upper bound for `sup |f'|`.
    pub fn deriv_bound(&self) -> f64 {
        self.pos
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| 2.0 * TAU * k as f64 * c.norm())
            .sum()
    }

    /// Location and value of the maximum of `f`, refined by golden-section
    /// search around the best grid point.
    pub fn argmax(&self) -> (f64, f64) {
        self.extremum(1.0)
    }

    /// Location and value of the minimum of `f`.
    pub fn argmin(&self) -> (f64, f64) {
        let (t, v) = self.extremum(-1.0);
        (t, v)
    }

    fn extremum(&self, sign: f64) -> (f64, f64) {
        let g = |t: f64| sign * self.eval(t);
        let n = CIRCLE_GRID;
        let h = 1.0 / n as f64;
        let best = (0..n)
            .map(|i| i as f64 * h)
            .max_by(|a, b| g(*a).total_cmp(&g(*b)))
            .unwrap_or(0.0);
        // golden-section on the values, then bisection on f' where it
        // changes sign (values alone resolve the location only to ~1e-8)
        let (mut a, mut b) = (best - h, best + h);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        while b - a > 1e-7 {
            if g(c) > g(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - inv_phi * (b - a);
            d = a + inv_phi * (b - a);
        }
        let dg = |t: f64| sign * self.eval_deriv(t);
        let (mut lo, mut hi) = (a - 1e-7, b + 1e-7);
        if dg(lo) > 0.0 && dg(hi) < 0.0 {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if dg(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let t = frac(0.5 * (lo + hi));
        (t, self.eval(t))
    }

    /// Largest ratio `|{x : |f(x) - E| < eps}| / (F eps^exp)` over the
    /// given energies and tolerances, measured on a uniform grid. A value
    /// `<= 1` means the stored Lojasiewicz data is consistent.
    pub fn sublevel_ratio(&self, energies: &[f64], epsilons: &[f64], grid: usize) -> f64 {
        let values: Vec<f64> = (0..grid)
            .map(|i| self.eval((i as f64 + 0.5) / grid as f64))
            .collect();
        let mut worst = 0.0f64;
        for &e in energies {
            for &eps in epsilons {
                let hits = values.iter().filter(|v| (*v - e).abs() < eps).count();
                let measure = hits as f64 / grid as f64;
                worst = worst.max(measure / (self.loja_f * eps.powf(self.loja_exp)));
            }
        }
        worst
    }

    pub fn to_json(&self) -> SamplingFunctionJson {
        let mut coeffs = Vec::new();
        let deg = self.degree() as i64;
        for k in -deg..=deg {
            let c = self.coefficient(k);
            if c.norm() != 0.0 || k == 0 {
                coeffs.push((k, c.re, c.im));
            }
        }
        SamplingFunctionJson {
            coeffs,
            loja_f: self.loja_f,
            loja_exp: self.loja_exp,
        }
    }

    pub fn from_json(json: &SamplingFunctionJson) -> Result<Self> {
        let coeffs: Vec<(i64, Complex64)> = json
            .coeffs
            .iter()
            .map(|&(k, re, im)| (k, Complex64::new(re, im)))
            .collect();
        Self::from_coefficients(&coeffs, json.loja_f, json.loja_exp)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("sampling function serializes")
    }
}

impl Serialize for SamplingFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SamplingFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = SamplingFunctionJson::deserialize(d)?;
        SamplingFunction::from_json(&json).map_err(serde::de::Error::custom)
    }
}
