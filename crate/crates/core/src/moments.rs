//! Segment moments and Pearson correlations.
//!
//! Sums are accumulated with Neumaier compensation and centred only when a
//! correlation or variance is read, so that adjacent segments can be merged
//! exactly and prefixes can be extended one observation at a time.

use crate::{Error, Result};

/// Aligned observations `(x_t, y_t)`, `t = 1..=T`, with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    x: Vec<f64>,
    y: Vec<f64>,
    timestamps: Option<Vec<String>>,
}

impl SeriesPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
        }
        if x.len() < 2 {
            return Err(Error::TooFewObservations(x.len()));
        }
        if let Some(i) = x.iter().zip(&y).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::NonFinite(i + 1));
        }
        Ok(Self { x, y, timestamps: None })
    }

    pub fn with_timestamps(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.x.len() {
            return Err(Error::TimestampLength { expected: self.x.len(), got: labels.len() });
        }
        self.timestamps = Some(labels);
        Ok(self)
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    /// Label of the 1-based observation `t`, if labels are present.
    pub fn timestamp(&self, t: usize) -> Option<&str> {
        self.timestamps.as_ref().and_then(|ts| ts.get(t.wrapping_sub(1))).map(String::as_str)
    }

    /// The pair with the roles of the two series exchanged.
    pub fn swapped(&self) -> Self {
        Self { x: self.y.clone(), y: self.x.clone(), timestamps: self.timestamps.clone() }
    }

    /// Applies `x -> ax * x + bx`, `y -> ay * y + by`.
    pub fn affine(&self, ax: f64, bx: f64, ay: f64, by: f64) -> Self {
        Self {
            x: self.x.iter().map(|v| ax * v + bx).collect(),
            y: self.y.iter().map(|v| ay * v + by).collect(),
            timestamps: self.timestamps.clone(),
        }
    }

    /// Checks that `[a, b]` is a valid 1-based inclusive segment.
    pub fn check_range(&self, a: usize, b: usize) -> Result<()> {
        if a < 1 || a > b || b > self.len() {
            return Err(Error::Range { a, b, len: self.len() });
        }
        Ok(())
    }

    /// Observation `t` (1-based).
    #[inline]
    pub(crate) fn at(&self, t: usize) -> (f64, f64) {
        (self.x[t - 1], self.y[t - 1])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }
}

/// Sufficient statistics of a contiguous segment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SegmentMoments {
    n: usize,
    sx: CompensatedSum,
    sy: CompensatedSum,
    sxx: CompensatedSum,
    syy: CompensatedSum,
    sxy: CompensatedSum,
}

/// Relative size below which a variance is treated as zero.
const DEGENERATE_RTOL: f64 = 1e-12;

impl SegmentMoments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        self.sx.add(x);
        self.sy.add(y);
        self.sxx.add(x * x);
        self.syy.add(y * y);
        self.sxy.add(x * y);
    }

    /// Moments of the union of two disjoint segments.
    pub fn merge(&self, other: &SegmentMoments) -> SegmentMoments {
        let mut out = *self;
        out.n += other.n;
        out.sx.merge(&other.sx);
        out.sy.merge(&other.sy);
        out.sxx.merge(&other.sxx);
        out.syy.merge(&other.syy);
        out.sxy.merge(&other.sxy);
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn sum_x(&self) -> f64 {
        self.sx.value()
    }
    pub fn sum_y(&self) -> f64 {
        self.sy.value()
    }
    pub fn sum_xx(&self) -> f64 {
        self.sxx.value()
    }
    pub fn sum_yy(&self) -> f64 {
        self.syy.value()
    }
    pub fn sum_xy(&self) -> f64 {
        self.sxy.value()
    }

    pub fn mean_x(&self) -> f64 {
        self.sum_x() / self.n as f64
    }

    pub fn mean_y(&self) -> f64 {
        self.sum_y() / self.n as f64
    }

    /// `mean(x²) - mean(x)²`, the divide-by-n variance.
    pub fn var_x(&self) -> f64 {
        let m = self.mean_x();
        self.sum_xx() / self.n as f64 - m * m
    }

    pub fn var_y(&self) -> f64 {
        let m = self.mean_y();
        self.sum_yy() / self.n as f64 - m * m
    }

    pub fn cov_xy(&self) -> f64 {
        self.sum_xy() / self.n as f64 - self.mean_x() * self.mean_y()
    }

    /// True when either variance vanishes relative to the raw second moment.
    pub fn is_degenerate(&self) -> bool {
        if self.n < 2 {
            return true;
        }
        let n = self.n as f64;
        let (vx, vy) = (self.var_x(), self.var_y());
        vx <= DEGENERATE_RTOL * (self.sum_xx() / n) || vy <= DEGENERATE_RTOL * (self.sum_yy() / n)
    }
}

/// Sums over observations `a..=b` (1-based, inclusive).
pub fn accumulate(pair: &SeriesPair, a: usize, b: usize) -> Result<SegmentMoments> {
    pair.check_range(a, b)?;
    let mut m = SegmentMoments::new();
    for (&x, &y) in pair.x()[a - 1..b].iter().zip(&pair.y()[a - 1..b]) {
        m.push(x, y);
    }
    Ok(m)
}

/// Pearson correlation with divide-by-n moments.
///
/// Returns [`Error::Degenerate`] when either variance is zero; the segment
/// bounds in the error are reported as `[1, n]` since the moments carry no
/// position.
pub fn pearson(m: &SegmentMoments) -> Result<f64> {
    if m.is_degenerate() {
        return Err(Error::Degenerate { a: 1, b: m.n() });
    }
    Ok(m.cov_xy() / (m.var_x() * m.var_y()).sqrt())
}

/// Pearson correlation of observations `a..=b`, with positional errors.
pub fn segment_correlation(pair: &SeriesPair, a: usize, b: usize) -> Result<f64> {
    let m = accumulate(pair, a, b)?;
    pearson(&m).map_err(|_| Error::Degenerate { a, b })
}
