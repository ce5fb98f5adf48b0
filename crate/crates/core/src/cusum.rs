//! CUSUM target function on a sub-interval and the break-location estimator.
//!
//! For an interval `[l1, l2]` of `[0, 1]` the data used are observations
//! `η(l1)..=ξ(l2)` and, at every grid fraction `z = j/T` inside the interval,
//!
//! ```text
//! |A(z)| = D̂ · (ξ(z) - η(l1) + 1) / n · |ρ̂[η(l1), ξ(z)] - ρ̂[η(l1), ξ(l2)]|
//! ```
//!
//! with `n = ξ(l2) - η(l1) + 1`. The sub-sample statistic is
//! `√n · max_z |A(z)|`; on `[0, 1]` it is the fluctuation statistic
//! `D̂ · max_j j/√n |ρ̂_j - ρ̂_n|` computed on observations `1..=T-1`.

use serde::{Deserialize, Serialize};

use crate::lrv::{dhat, HacConfig};
use crate::moments::{pearson, SegmentMoments, SeriesPair};
use crate::{Error, Result};

/// Sub-interval `[l1, l2]` of the unit interval, in sample fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    l1: f64,
    l2: f64,
}

impl Interval {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&l1) || !(l2 > l1 && l2 <= 1.0) {
            return Err(Error::InvalidParameter(format!("interval [{l1}, {l2}] is not inside [0, 1]")));
        }
        Ok(Self { l1, l2 })
    }

    pub fn full() -> Self {
        Self { l1: 0.0, l2: 1.0 }
    }

    /// The interval whose data run from just after break index `prev` to
    /// `next` (0 and `T` standing for the sample ends).
    pub fn between(prev: usize, next: usize, t: usize) -> Result<Self> {
        let l1 = if prev == 0 { 0.0 } else { (prev + 1) as f64 / t as f64 };
        let l2 = if next >= t { 1.0 } else { next as f64 / t as f64 };
        Self::new(l1, l2)
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }
}

/// `floor(z·T)` with fractions built as `j/T` mapping back to exactly `j`.
fn scaled_floor(z: f64, t: usize) -> usize {
    let v = z * t as f64;
    let r = v.round();
    let k = if (v - r).abs() <= 1e-9 * (t as f64).max(1.0) { r } else { v.floor() };
    k.max(0.0) as usize
}

fn scaled_ceil(z: f64, t: usize) -> usize {
    let v = z * t as f64;
    let r = v.round();
    let k = if (v - r).abs() <= 1e-9 * (t as f64).max(1.0) { r } else { v.ceil() };
    k.max(0.0) as usize
}

/// `η(z) = min(max(floor(zT), 1), T - 1)`.
pub fn eta(z: f64, t: usize) -> usize {
    scaled_floor(z, t).max(1).min(t - 1)
}

/// `ξ(z) = max(η(z), η(l1) + 1)`.
pub fn xi(z: f64, l1: f64, t: usize) -> usize {
    eta(z, t).max(eta(l1, t) + 1)
}

/// `|A(z)|` sampled on the grid of an interval, with its maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CusumProfile {
    pub interval: Interval,
    /// Sample size of the full series.
    pub t: usize,
    /// First observation used, `η(l1)`.
    pub start: usize,
    /// Last observation used, `ξ(l2)`.
    pub end: usize,
    /// Grid fractions `j/T` inside the interval.
    pub grid: Vec<f64>,
    /// `ξ(z)` for each grid fraction.
    pub indices: Vec<usize>,
    /// `|A(z)|` for each grid fraction.
    pub values: Vec<f64>,
    pub dhat: f64,
    /// Smallest grid fraction attaining the maximum.
    pub argmax_fraction: f64,
    pub argmax_position: usize,
    /// `√n · max |A(z)|`.
    pub statistic: f64,
    /// Prefixes with zero variance, whose value was set to 0.
    pub degenerate_prefixes: usize,
}

impl CusumProfile {
    /// Number of observations used.
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Builds a profile from already evaluated grid values, filling in the
    /// argmax and the statistic.
    pub fn from_values(interval: Interval, t: usize, grid: Vec<f64>, values: Vec<f64>, dhat: f64) -> Result<Self> {
        if grid.len() != values.len() || grid.is_empty() {
            return Err(Error::InvalidParameter("grid and values must be nonempty and aligned".into()));
        }
        let start = eta(interval.l1, t);
        let end = xi(interval.l2, interval.l1, t);
        let indices = grid.iter().map(|&z| xi(z, interval.l1, t)).collect();
        let argmax_position = smallest_argmax(&values);
        let statistic = ((end - start + 1) as f64).sqrt() * values[argmax_position];
        Ok(Self {
            interval,
            t,
            start,
            end,
            argmax_fraction: grid[argmax_position],
            grid,
            indices,
            values,
            dhat,
            argmax_position,
            statistic,
            degenerate_prefixes: 0,
        })
    }
}

/// Position of the first maximum; ties resolve to the smallest position.
pub fn smallest_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Evaluates `|A(z)|` on every multiple of `1/T` inside `iv`.
///
/// Returns [`Error::TooShort`] when fewer than `min_len` observations fall
/// in the interval; degenerate and nonpositive-variance errors from `D̂`
/// propagate. Prefixes with zero variance contribute a value of 0.
pub fn profile(pair: &SeriesPair, iv: Interval, hac: &HacConfig, min_len: usize) -> Result<CusumProfile> {
    let t = pair.len();
    let (l1, l2) = (iv.l1, iv.l2);
    let a = eta(l1, t);
    let b = xi(l2, l1, t);
    let n = b - a + 1;
    if n < min_len {
        return Err(Error::TooShort { a, b, min: min_len });
    }
    let scale = dhat(pair, a, b, hac)?.dhat;

    // ρ̂[a, e] for e = a..=b, index e - a; None marks a degenerate prefix.
    let mut prefix = Vec::with_capacity(n);
    let mut acc = SegmentMoments::new();
    for e in a..=b {
        let (x, y) = pair.at(e);
        acc.push(x, y);
        prefix.push(pearson(&acc).ok());
    }
    let full = prefix[n - 1].ok_or(Error::Degenerate { a, b })?;

    let j_lo = scaled_ceil(l1, t);
    let j_hi = scaled_floor(l2, t).min(t);
    let mut grid = Vec::with_capacity(j_hi + 1 - j_lo);
    let mut indices = Vec::with_capacity(grid.capacity());
    let mut values = Vec::with_capacity(grid.capacity());
    let mut degenerate = 0;
    for j in j_lo..=j_hi {
        let z = j as f64 / t as f64;
        let e = eta(z, t).max(a + 1);
        let v = match prefix[e - a] {
            Some(r) => scale * (e - a + 1) as f64 / n as f64 * (r - full).abs(),
            None => {
                degenerate += 1;
                0.0
            }
        };
        grid.push(z);
        indices.push(e);
        values.push(v);
    }
    if degenerate > 0 {
        log::debug!("{degenerate} degenerate prefixes in [{a}, {b}] set to zero");
    }

    let argmax_position = smallest_argmax(&values);
    Ok(CusumProfile {
        interval: iv,
        t,
        start: a,
        end: b,
        argmax_fraction: grid[argmax_position],
        statistic: (n as f64).sqrt() * values[argmax_position],
        grid,
        indices,
        values,
        dhat: scale,
        argmax_position,
        degenerate_prefixes: degenerate,
    })
}

/// Break index `ξ(ẑ*)`: the last observation before the estimated change.
pub fn estimate_changepoint(profile: &CusumProfile, t: usize) -> usize {
    xi(profile.argmax_fraction, profile.interval.l1, t)
}
