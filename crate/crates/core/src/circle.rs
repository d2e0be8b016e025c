//! Real-valued functions on the circle (lifts of curves `xi: T -> T`) and
//! arcs of the circle.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// A function on the circle, evaluated at any real `x` with period 1.
pub trait CircleCurve: Send + Sync {
    fn value(&self, x: f64) -> f64;

    fn slope(&self, x: f64) -> f64 {
        let s = 1e-6;
        (self.value(x + s) - self.value(x - s)) / (2.0 * s)
    }
}

impl<T: CircleCurve + ?Sized> CircleCurve for Box<T> {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (**self).slope(x)
    }
}

/// Largest difference quotient over `n` equally spaced points.
pub fn max_slope(c: &dyn CircleCurve, n: usize) -> f64 {
    let v: Vec<f64> = (0..=n).map(|i| c.value(i as f64 / n as f64)).collect();
    v.windows(2)
        .map(|w| (w[1] - w[0]).abs() * n as f64)
        .fold(0.0, f64::max)
}

/// `max |a - b|` over `n` equally spaced points.
pub fn sup_distance(a: &dyn CircleCurve, b: &dyn CircleCurve, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (a.value(x) - b.value(x)).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCurve(pub f64);

impl CircleCurve for ConstantCurve {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }
    fn slope(&self, _x: f64) -> f64 {
        0.0
    }
}

/// `c0 + sum_k (a_k cos(2 pi k x) + b_k sin(2 pi k x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCurve {
    pub c0: f64,
    pub terms: Vec<(i64, f64, f64)>,
}

impl TrigCurve {
    /// Sup bound on the derivative, `sum 2 pi |k| (|a_k| + |b_k|)`.
    pub fn slope_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|&(k, a, b)| TAU * k.abs() as f64 * (a.abs() + b.abs()))
            .sum()
    }
}

impl CircleCurve for TrigCurve {
    fn value(&self, x: f64) -> f64 {
        self.c0
            + self
                .terms
                .iter()
                .map(|&(k, a, b)| {
                    let t = TAU * (k as f64) * x;
                    a * t.cos() + b * t.sin()
                })
                .sum::<f64>()
    }
    fn slope(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, a, b)| {
                let w = TAU * k as f64;
                let t = w * x;
                w * (b * t.cos() - a * t.sin())
            })
            .sum()
    }
}

/// Periodic piecewise-linear interpolation of values at `i / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    values: Vec<f64>,
}

impl SampledCurve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("sampled curve needs at least one value"));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| f(i as f64 / n as f64)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl CircleCurve for SampledCurve {
    fn value(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = x.rem_euclid(1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let w = t - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[(i + 1) % n]
    }
}

/// Periodic piecewise-linear interpolation through `(xs, ys)`, `xs`
/// increasing inside `[0, 1)`; the last segment wraps to `xs[0] + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PeriodicCurve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::validation("periodic curve needs matching, nonempty samples"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs[0] < 0.0 || *xs.last().unwrap() >= 1.0 {
            return Err(Error::validation("sample abscissae must increase inside [0, 1)"));
        }
        Ok(Self { xs, ys })
    }
}

impl CircleCurve for PeriodicCurve {
    fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let t = x.rem_euclid(1.0);
        let j = self.xs.partition_point(|&v| v <= t);
        let (i0, i1) = if j == 0 || j == n { (n - 1, 0) } else { (j - 1, j) };
        let x0 = self.xs[i0];
        let mut x1 = self.xs[i1];
        let mut tt = t;
        if i1 <= i0 {
            x1 += 1.0;
            if tt < x0 {
                tt += 1.0;
            }
        }
        if x1 == x0 {
            return self.ys[i0];
        }
        let w = (tt - x0) / (x1 - x0);
        (1.0 - w) * self.ys[i0] + w * self.ys[i1]
    }
}

/// Piecewise-linear curve through `(xs, ys)` with constant extension past
/// both ends. Not periodic: `x` is clamped to `[xs[0], xs[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl ClampedCurve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::validation("clamped curve needs matching, nonempty samples"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("sample abscissae must increase"));
        }
        Ok(Self { xs, ys })
    }

    pub fn start(&self) -> f64 {
        self.xs[0]
    }

    pub fn end(&self) -> f64 {
        *self.xs.last().unwrap()
    }
}

impl CircleCurve for ClampedCurve {
    fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let j = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let w = (x - x0) / (x1 - x0);
        (1.0 - w) * self.ys[j - 1] + w * self.ys[j]
    }

    fn slope(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 || x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let j = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        (self.ys[j] - self.ys[j - 1]) / (self.xs[j] - self.xs[j - 1])
    }
}

/// The closed arc `[start, start + len]` of the circle, `start` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CircleInterval {
    pub start: f64,
    pub len: f64,
}

impl CircleInterval {
    pub fn new(start: f64, len: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&len) || !start.is_finite() {
            return Err(Error::validation(format!("invalid arc start {start} length {len}")));
        }
        Ok(Self {
            start: start.rem_euclid(1.0),
            len,
        })
    }

    pub fn end(&self) -> f64 {
        self.start + self.len
    }

    /// Offset of `x` from `start`, in `[0, 1)`.
    pub fn offset(&self, x: f64) -> f64 {
        (x - self.start).rem_euclid(1.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.offset(x) <= self.len
    }

    /// `x` lifted into `[start, start + 1)`.
    pub fn lift(&self, x: f64) -> f64 {
        self.start + self.offset(x)
    }

    /// Length of the intersection with another arc.
    pub fn overlap(&self, other: &CircleInterval) -> f64 {
        let mut total = 0.0;
        for shift in [-1.0, 0.0, 1.0] {
            let lo = self.start.max(other.start + shift);
            let hi = self.end().min(other.end() + shift);
            total += (hi - lo).max(0.0);
        }
        total.min(self.len.min(other.len))
    }

    /// Circular gap between two disjoint arcs.
    pub fn distance(&self, other: &CircleInterval) -> f64 {
        if self.overlap(other) > 0.0 {
            return 0.0;
        }
        let gap_ab = (other.start - self.end()).rem_euclid(1.0);
        let gap_ba = (self.start - other.end()).rem_euclid(1.0);
        gap_ab.min(gap_ba)
    }
}

/// Total length of `arc` covered by a union of disjoint arcs.
pub fn covered_length(arc: &CircleInterval, set: &[CircleInterval]) -> f64 {
    set.iter().map(|s| arc.overlap(s)).sum()
}
