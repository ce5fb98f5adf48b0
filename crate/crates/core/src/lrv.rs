//! Long-run variance scale `D̂` of the sample correlation.
//!
//! The correlation is a smooth function of the five first and second moments
//! `(x², y², x, y, xy)`. `D̂₁` is a Bartlett-weighted long-run covariance of
//! the demeaned moment vectors, `Ê` maps it to the covariance of
//! `(σ̂x², σ̂y², σ̂xy)`, and `D̂₃` is the gradient of the correlation with
//! respect to those three quantities. The result is
//! `D̂ = (D̂₃' Ê D̂₃)^(-1/2)`, the inverse long-run standard deviation.
//!
//! Every quantity is computed from the sub-sample `[a, b]` alone: means,
//! variances and the bandwidth all use `n = b - a + 1`.

use serde::{Deserialize, Serialize};

use crate::moments::{accumulate, SeriesPair};
use crate::{Error, Result};

/// Shortest sub-sample for which `D̂` is computed at all.
pub const MIN_DHAT_LEN: usize = 10;

/// Bandwidth rule for the Bartlett kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "h")]
pub enum Bandwidth {
    /// `max(1, floor(ln n))`.
    #[default]
    LogFloor,
    Fixed(usize),
}

impl Bandwidth {
    pub fn for_len(self, n: usize) -> usize {
        match self {
            Bandwidth::LogFloor => ((n as f64).ln().floor() as usize).max(1),
            Bandwidth::Fixed(h) => h.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Bartlett,
}

impl Kernel {
    /// Weight of a lag at `x = lag / bandwidth`.
    #[inline]
    pub fn weight(self, x: f64) -> f64 {
        match self {
            Kernel::Bartlett => {
                let a = x.abs();
                if a <= 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HacConfig {
    pub bandwidth: Bandwidth,
    pub kernel: Kernel,
}

impl HacConfig {
    pub fn fixed(h: usize) -> Self {
        Self { bandwidth: Bandwidth::Fixed(h), kernel: Kernel::Bartlett }
    }
}

/// Intermediate matrices of the `D̂` computation on one sub-sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DhatComponents {
    /// Kernel-weighted long-run covariance of the moment vectors.
    pub d1: [[f64; 5]; 5],
    /// Long-run covariance of `(σ̂x², σ̂y², σ̂xy)`.
    pub e: [[f64; 3]; 3],
    /// Gradient of the correlation with respect to `(σ̂x², σ̂y², σ̂xy)`.
    pub d3: [f64; 3],
    /// `D̂₃' Ê`.
    pub f: [f64; 3],
    pub dhat: f64,
    /// Bandwidth actually used.
    pub bandwidth: usize,
}

/// Sub-sample summary needed by both the moment vectors and `D̂₃`.
struct SubsampleMoments {
    mean_xx: f64,
    mean_yy: f64,
    mean_x: f64,
    mean_y: f64,
    mean_xy: f64,
    var_x: f64,
    var_y: f64,
    cov_xy: f64,
}

fn subsample_moments(pair: &SeriesPair, a: usize, b: usize) -> Result<SubsampleMoments> {
    let m = accumulate(pair, a, b)?;
    if m.n() < 2 || m.is_degenerate() {
        return Err(Error::Degenerate { a, b });
    }
    let n = m.n() as f64;
    Ok(SubsampleMoments {
        mean_xx: m.sum_xx() / n,
        mean_yy: m.sum_yy() / n,
        mean_x: m.mean_x(),
        mean_y: m.mean_y(),
        mean_xy: m.sum_xy() / n,
        var_x: m.var_x(),
        var_y: m.var_y(),
        cov_xy: m.cov_xy(),
    })
}

fn moment_vectors(pair: &SeriesPair, a: usize, b: usize, s: &SubsampleMoments) -> Vec<[f64; 5]> {
    (a..=b)
        .map(|t| {
            let (x, y) = pair.at(t);
            [x * x - s.mean_xx, y * y - s.mean_yy, x - s.mean_x, y - s.mean_y, x * y - s.mean_xy]
        })
        .collect()
}

/// Moment vectors `(x²,y²,x,y,xy)` on `[a, b]`, each demeaned by its
/// sub-sample mean.
pub fn demeaned_vectors(pair: &SeriesPair, a: usize, b: usize) -> Result<Vec<[f64; 5]>> {
    pair.check_range(a, b)?;
    let s = subsample_moments(pair, a, b)?;
    Ok(moment_vectors(pair, a, b, &s))
}

/// `Σ_t Σ_u k((t-u)/γ) V_t V_u'` with `V_t = U_t / √n`, restricted to the
/// lags where the kernel is nonzero.
fn long_run_covariance(u: &[[f64; 5]], gamma: usize, kernel: Kernel) -> [[f64; 5]; 5] {
    let n = u.len();
    let mut d1 = [[0.0; 5]; 5];
    let max_lag = gamma.min(n.saturating_sub(1));
    for lag in 0..=max_lag {
        let w = kernel.weight(lag as f64 / gamma as f64);
        if w == 0.0 {
            continue;
        }
        let mut g = [[0.0; 5]; 5];
        for t in lag..n {
            let (ut, us) = (&u[t], &u[t - lag]);
            for i in 0..5 {
                for j in 0..5 {
                    g[i][j] += ut[i] * us[j];
                }
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                d1[i][j] += if lag == 0 { w * g[i][j] } else { w * (g[i][j] + g[j][i]) };
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for row in d1.iter_mut() {
        for v in row.iter_mut() {
            *v *= inv_n;
        }
    }
    d1
}

/// Delta-method map from the moment covariance to the covariance of
/// `(σ̂x², σ̂y², σ̂xy)`.
fn variance_covariance(d1: &[[f64; 5]; 5], mx: f64, my: f64) -> [[f64; 3]; 3] {
    // 1-based access to match the component numbering (x², y², x, y, xy).
    let d = |i: usize, j: usize| d1[i - 1][j - 1];
    let e11 = d(1, 1) - 4.0 * mx * d(1, 3) + 4.0 * mx * mx * d(3, 3);
    let e12 = d(1, 2) - 2.0 * mx * d(2, 3) - 2.0 * my * d(1, 4) + 4.0 * mx * my * d(3, 4);
    let e22 = d(2, 2) - 4.0 * my * d(2, 4) + 4.0 * my * my * d(4, 4);
    let e13 =
        -my * d(1, 3) + 2.0 * mx * my * d(3, 3) - mx * d(1, 4) + 2.0 * mx * mx * d(3, 4) + d(1, 5) - 2.0 * mx * d(3, 5);
    let e23 =
        -my * d(2, 3) + 2.0 * mx * my * d(4, 4) - mx * d(2, 4) + 2.0 * my * my * d(3, 4) + d(2, 5) - 2.0 * my * d(4, 5);
    let e33 = my * my * d(3, 3) + 2.0 * mx * my * d(3, 4) - 2.0 * my * d(3, 5) + mx * mx * d(4, 4) + d(5, 5)
        - 2.0 * mx * d(4, 5);
    [[e11, e12, e13], [e12, e22, e23], [e13, e23, e33]]
}

/// `D̂` and its components on observations `a..=b`.
pub fn dhat(pair: &SeriesPair, a: usize, b: usize, cfg: &HacConfig) -> Result<DhatComponents> {
    pair.check_range(a, b)?;
    let n = b - a + 1;
    let gamma = cfg.bandwidth.for_len(n);
    let min = (gamma + 1).max(MIN_DHAT_LEN);
    if n < min {
        return Err(Error::TooShort { a, b, min });
    }
    let s = subsample_moments(pair, a, b)?;
    let u = moment_vectors(pair, a, b, &s);
    let d1 = long_run_covariance(&u, gamma, cfg.kernel);
    let e = variance_covariance(&d1, s.mean_x, s.mean_y);

    let (sx, sy) = (s.var_x.sqrt(), s.var_y.sqrt());
    let d3 = [-0.5 * s.cov_xy / sy * sx.powi(-3), -0.5 * s.cov_xy / sx * sy.powi(-3), 1.0 / (sx * sy)];
    let mut f = [0.0; 3];
    for (j, fj) in f.iter_mut().enumerate() {
        *fj = (0..3).map(|i| d3[i] * e[i][j]).sum();
    }
    let quad: f64 = f.iter().zip(&d3).map(|(a, b)| a * b).sum();
    if !(quad > 0.0 && quad.is_finite()) {
        return Err(Error::NonPositiveVariance { a, b, value: quad });
    }
    Ok(DhatComponents { d1, e, d3, f, dhat: quad.powf(-0.5), bandwidth: gamma })
}
