//! Binary segmentation for correlation breaks.
//!
//! 1. Test the full sample; stop if the statistic does not exceed the
//!    critical value at level `α₀`.
//! 2. Split at the estimated break and retest every segment, round after
//!    round, until no segment rejects. Segments are visited left to right and
//!    each is tested at `α_k`, `k` being the number of breaks accepted so far.
//! 3. With more than one break, re-estimate each break on the window spanning
//!    its two neighbours; drop breaks that are no longer significant and move
//!    the others to the window's argmax, until a pass changes nothing.
//! 4. Report the correlation of every final segment.
//!
//! Critical values are quantiles of the supremum of the absolute value of a
//! standard Brownian bridge (the Kolmogorov distribution).

use serde::{Deserialize, Serialize};

use crate::cusum::{estimate_changepoint, profile, CusumProfile, Interval};
use crate::lrv::HacConfig;
use crate::moments::{segment_correlation, SeriesPair};
use crate::{Error, Result};

/// `P(sup |B(t)| ≤ x)` for a standard Brownian bridge `B`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut k = 1u32;
    loop {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-14 || k > 100_000 {
            break;
        }
        k += 1;
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Upper `alpha` quantile of the Kolmogorov distribution, by bisection.
pub fn critical_value(alpha: f64) -> f64 {
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.3_f64, 4.0_f64);
    while hi - lo >= 1e-10 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-test level after `k` breaks so that `(1 - α_k)^(k+1) = 1 - α₀`.
pub fn alpha_schedule(alpha0: f64, k: usize) -> f64 {
    1.0 - (1.0 - alpha0).powf(1.0 / (k as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub alpha0: f64,
    /// Segments with fewer observations are not tested.
    pub n_min: usize,
    /// Upper bound on the number of breaks; `None` means `T / n_min`.
    pub max_changepoints: Option<usize>,
    pub hac: HacConfig,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self { alpha0: 0.05, n_min: 20, max_changepoints: None, hac: HacConfig::default() }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0 < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha0 = {} not in (0, 1)", self.alpha0)));
        }
        if self.n_min < 10 {
            return Err(Error::InvalidParameter(format!("n_min = {} is below 10", self.n_min)));
        }
        Ok(())
    }

    fn cap(&self, t: usize) -> usize {
        self.max_changepoints.unwrap_or(t / self.n_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Detect,
    Refine,
}

/// One test performed by the procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: Step,
    /// Round within the step, starting at 1.
    pub round: usize,
    /// First and last observation of the tested data.
    pub interval: [usize; 2],
    pub statistic: f64,
    pub alpha: f64,
    pub critical_value: f64,
    pub significant: bool,
    pub candidate_index: usize,
    /// Position of the matching profile in [`Trace::profiles`].
    pub profile_id: usize,
}

/// A segment that could not be tested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSegment {
    pub step: Step,
    pub round: usize,
    pub interval: [usize; 2],
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaLevel {
    pub k: usize,
    pub alpha: f64,
    pub critical_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointReport {
    pub t: usize,
    /// Last observation before each break, strictly increasing.
    pub changepoints: Vec<usize>,
    pub fractions: Vec<f64>,
    /// Pearson correlation of each final segment; `None` if degenerate.
    pub segment_correlations: Vec<Option<f64>>,
    /// First and last observation of each final segment.
    pub segments: Vec<[usize; 2]>,
    pub iterations: Vec<IterationRecord>,
    pub skipped: Vec<SkippedSegment>,
    pub alpha_schedule_used: Vec<AlphaLevel>,
    /// Whether the refinement pass cap was hit before convergence.
    pub refinement_capped: bool,
}

impl ChangePointReport {
    pub fn count(&self) -> usize {
        self.changepoints.len()
    }
}

/// Report plus every profile computed along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub report: ChangePointReport,
    pub profiles: Vec<CusumProfile>,
}

struct Run<'a> {
    pair: &'a SeriesPair,
    cfg: &'a SegmentationConfig,
    t: usize,
    levels: Vec<AlphaLevel>,
    iterations: Vec<IterationRecord>,
    skipped: Vec<SkippedSegment>,
    profiles: Vec<CusumProfile>,
}

enum Outcome {
    Tested { significant: bool, candidate: usize },
    Untestable,
}

impl<'a> Run<'a> {
    fn level(&mut self, k: usize) -> (f64, f64) {
        if let Some(l) = self.levels.iter().find(|l| l.k == k) {
            return (l.alpha, l.critical_value);
        }
        let alpha = alpha_schedule(self.cfg.alpha0, k);
        let cv = critical_value(alpha);
        self.levels.push(AlphaLevel { k, alpha, critical_value: cv });
        (alpha, cv)
    }

    /// Tests the data between breaks `prev` and `next` at level `α_k`.
    fn test(&mut self, step: Step, round: usize, prev: usize, next: usize, k: usize) -> Result<Outcome> {
        let iv = Interval::between(prev, next, self.t)?;
        match profile(self.pair, iv, &self.cfg.hac, self.cfg.n_min) {
            Ok(p) => {
                let (alpha, cv) = self.level(k);
                let candidate = estimate_changepoint(&p, self.t);
                let significant = p.statistic > cv;
                self.iterations.push(IterationRecord {
                    step,
                    round,
                    interval: [p.start, p.end],
                    statistic: p.statistic,
                    alpha,
                    critical_value: cv,
                    significant,
                    candidate_index: candidate,
                    profile_id: self.profiles.len(),
                });
                self.profiles.push(p);
                Ok(Outcome::Tested { significant, candidate })
            }
            Err(e) if e.is_untestable() => {
                let (a, b) = segment_bounds(prev, next, self.t);
                if !matches!(e, Error::TooShort { .. }) {
                    log::warn!("segment [{a}, {b}] skipped: {e}");
                }
                self.skipped.push(SkippedSegment { step, round, interval: [a, b], reason: e.to_string() });
                Ok(Outcome::Untestable)
            }
            Err(e) => Err(e),
        }
    }
}

fn segment_bounds(prev: usize, next: usize, t: usize) -> (usize, usize) {
    let a = if prev == 0 { 1 } else { prev + 1 };
    let b = next.min(t - 1).max(a);
    (a, b)
}

/// Runs the procedure and returns the report.
pub fn detect(pair: &SeriesPair, cfg: &SegmentationConfig) -> Result<ChangePointReport> {
    detect_traced(pair, cfg).map(|t| t.report)
}

/// Runs the procedure, keeping every computed profile.
pub fn detect_traced(pair: &SeriesPair, cfg: &SegmentationConfig) -> Result<Trace> {
    cfg.validate()?;
    let t = pair.len();
    if t < 2 * cfg.n_min {
        return Err(Error::InvalidParameter(format!(
            "series of length {t} is shorter than 2 * n_min = {}",
            2 * cfg.n_min
        )));
    }
    let cap = cfg.cap(t);
    let mut run =
        Run { pair, cfg, t, levels: Vec::new(), iterations: Vec::new(), skipped: Vec::new(), profiles: Vec::new() };

    // Step 1.
    let mut points: Vec<usize> = Vec::new();
    if let Outcome::Tested { significant: true, candidate } = run.test(Step::Detect, 1, 0, t, 0)? {
        if cap > 0 {
            points.push(candidate);
        }
    }

    // Step 2. `found` only grows, so levels never relax within a run.
    let mut found = points.len();
    let mut round = 1;
    while !points.is_empty() && found < cap {
        round += 1;
        let bounds: Vec<usize> = std::iter::once(0).chain(points.iter().copied()).chain([t]).collect();
        let mut new_points = Vec::new();
        for w in bounds.windows(2) {
            if found >= cap {
                break;
            }
            if let Outcome::Tested { significant: true, candidate } =
                run.test(Step::Detect, round, w[0], w[1], found)?
            {
                new_points.push(candidate);
                found += 1;
            }
        }
        if new_points.is_empty() {
            break;
        }
        points.extend(new_points);
        points.sort_unstable();
        points.dedup();
    }

    // Step 3.
    let mut refinement_capped = false;
    if points.len() > 1 {
        let max_passes = 10 * points.len();
        let mut passes = 0;
        loop {
            passes += 1;
            let mut changed = false;
            let mut k = 0;
            while k < points.len() {
                let prev = if k == 0 { 0 } else { points[k - 1] };
                let next = if k + 1 == points.len() { t } else { points[k + 1] };
                match run.test(Step::Refine, passes, prev, next, found)? {
                    Outcome::Tested { significant: false, .. } => {
                        points.remove(k);
                        changed = true;
                        break;
                    }
                    Outcome::Tested { significant: true, candidate } => {
                        if candidate != points[k] && candidate > prev && candidate < next {
                            points[k] = candidate;
                            changed = true;
                        }
                        k += 1;
                    }
                    Outcome::Untestable => k += 1,
                }
            }
            if !changed {
                break;
            }
            if passes >= max_passes {
                refinement_capped = true;
                log::warn!("refinement stopped after {passes} passes without converging");
                break;
            }
        }
    }

    // Step 4.
    let bounds: Vec<usize> = std::iter::once(0).chain(points.iter().copied()).chain([t]).collect();
    let segments: Vec<[usize; 2]> = bounds.windows(2).map(|w| [w[0] + 1, w[1]]).collect();
    let segment_correlations = segments.iter().map(|&[a, b]| segment_correlation(pair, a, b).ok()).collect();

    run.levels.sort_by_key(|l| l.k);
    let report = ChangePointReport {
        t,
        fractions: points.iter().map(|&p| p as f64 / t as f64).collect(),
        changepoints: points,
        segment_correlations,
        segments,
        iterations: run.iterations,
        skipped: run.skipped,
        alpha_schedule_used: run.levels,
        refinement_capped,
    };
    Ok(Trace { report, profiles: run.profiles })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_tail_and_origin() {
        assert_eq!(kolmogorov_cdf(0.0), 0.0);
        assert_eq!(kolmogorov_cdf(-1.0), 0.0);
        assert!((kolmogorov_cdf(5.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_long_partial_sum() {
        let x: f64 = 0.5;
        let mut s = 0.0;
        for k in 1..=1_000_000u64 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            s += if k % 2 == 1 { term } else { -term };
        }
        let oracle = 1.0 - 2.0 * s;
        assert!((kolmogorov_cdf(x) - oracle).abs() < 1e-13);
    }

    #[test]
    fn five_percent_critical_value() {
        let c = critical_value(0.05);
        assert!((c - 1.358).abs() < 1e-3, "{c}");
        assert!((kolmogorov_cdf(1.358) - 0.95).abs() < 1e-3);
    }

    #[test]
    fn critical_value_round_trip_and_monotone() {
        let a1 = alpha_schedule(0.05, 1);
        let c1 = critical_value(a1);
        assert!((kolmogorov_cdf(c1) - (1.0 - a1)).abs() < 1e-8);
        let mut last = 0.0;
        for alpha in [0.2, 0.1, 0.05, 0.025, 0.01, 0.001] {
            let c = critical_value(alpha);
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn schedule_values() {
        assert!((alpha_schedule(0.05, 0) - 0.05).abs() < 1e-15);
        assert!((alpha_schedule(0.05, 1) - 0.025).abs() < 5e-4);
        assert!((alpha_schedule(0.05, 2) - 0.017).abs() < 5e-4);
        for k in 0..6 {
            let a = alpha_schedule(0.05, k);
            assert!(((1.0 - a).powi(k as i32 + 1) - 0.95).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SegmentationConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.alpha0 = 1.0;
        assert!(cfg.validate().is_err());
        cfg.alpha0 = 0.05;
        cfg.n_min = 5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn short_series_rejected() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).cos()).collect();
        let pair = SeriesPair::new(x, y).unwrap();
        assert!(matches!(detect(&pair, &SegmentationConfig::default()), Err(Error::InvalidParameter(_))));
    }
}
