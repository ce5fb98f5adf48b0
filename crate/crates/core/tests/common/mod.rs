//! Reference computations that share no code with the library paths they
//! check: two-pass correlations, the full O(n²) kernel double sum and a
//! matrix-product delta method.

#![allow(dead_code)]

use corrbreak::cusum::{eta, xi};
use corrbreak::simulate::{gen_var1, BreakSchedule, Var1Spec};
use corrbreak::SeriesPair;

/// Two-pass Pearson correlation of 1-based observations `a..=b`.
pub fn naive_corr(x: &[f64], y: &[f64], a: usize, b: usize) -> Option<f64> {
    let xs = &x[a - 1..b];
    let ys = &y[a - 1..b];
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (u, v) in xs.iter().zip(ys) {
        sxy += (u - mx) * (v - my);
        sxx += (u - mx) * (u - mx);
        syy += (v - my) * (v - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// `D̂` on `a..=b` with bandwidth `gamma`, from the unrestricted double sum.
pub fn naive_dhat(x: &[f64], y: &[f64], a: usize, b: usize, gamma: usize) -> f64 {
    let xs = &x[a - 1..b];
    let ys = &y[a - 1..b];
    let n = xs.len();
    let nf = n as f64;
    let mean = |f: &dyn Fn(usize) -> f64| (0..n).map(f).sum::<f64>() / nf;
    let mxx = mean(&|i| xs[i] * xs[i]);
    let myy = mean(&|i| ys[i] * ys[i]);
    let mx = mean(&|i| xs[i]);
    let my = mean(&|i| ys[i]);
    let mxy = mean(&|i| xs[i] * ys[i]);
    let v: Vec<[f64; 5]> = (0..n)
        .map(|i| {
            let s = 1.0 / nf.sqrt();
            [
                (xs[i] * xs[i] - mxx) * s,
                (ys[i] * ys[i] - myy) * s,
                (xs[i] - mx) * s,
                (ys[i] - my) * s,
                (xs[i] * ys[i] - mxy) * s,
            ]
        })
        .collect();
    let mut d1 = [[0.0; 5]; 5];
    for t in 0..n {
        for u in 0..n {
            let x = (t as f64 - u as f64) / gamma as f64;
            let k = if x.abs() <= 1.0 { 1.0 - x.abs() } else { 0.0 };
            if k == 0.0 {
                continue;
            }
            for i in 0..5 {
                for j in 0..5 {
                    d1[i][j] += k * v[t][i] * v[u][j];
                }
            }
        }
    }
    let jac = [[1.0, 0.0, -2.0 * mx, 0.0, 0.0], [0.0, 1.0, 0.0, -2.0 * my, 0.0], [0.0, 0.0, -my, -mx, 1.0]];
    let mut e = [[0.0; 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            for i in 0..5 {
                for j in 0..5 {
                    e[r][s] += jac[r][i] * d1[i][j] * jac[s][j];
                }
            }
        }
    }
    let sx2 = mxx - mx * mx;
    let sy2 = myy - my * my;
    let sxy = mxy - mx * my;
    let (sx, sy) = (sx2.sqrt(), sy2.sqrt());
    let d3 = [-0.5 * sxy / (sy * sx.powi(3)), -0.5 * sxy / (sx * sy.powi(3)), 1.0 / (sx * sy)];
    let mut q = 0.0;
    for r in 0..3 {
        for s in 0..3 {
            q += d3[r] * e[r][s] * d3[s];
        }
    }
    q.powf(-0.5)
}

/// `|A(z)|` on every grid fraction of `[l1, l2]`, each correlation
/// recomputed from scratch.
pub fn naive_profile(pair: &SeriesPair, l1: f64, l2: f64, gamma: usize) -> Vec<f64> {
    let t = pair.len();
    let (x, y) = (pair.x(), pair.y());
    let a = eta(l1, t);
    let b = xi(l2, l1, t);
    let n = (b - a + 1) as f64;
    let d = naive_dhat(x, y, a, b, gamma);
    let full = naive_corr(x, y, a, b).unwrap();
    let lo = (l1 * t as f64 - 1e-9).ceil() as usize;
    let hi = (l2 * t as f64 + 1e-9).floor() as usize;
    (lo..=hi)
        .map(|j| {
            let e = xi(j as f64 / t as f64, l1, t);
            match naive_corr(x, y, a, e) {
                Some(r) => d * (e - a + 1) as f64 / n * (r - full).abs(),
                None => 0.0,
            }
        })
        .collect()
}

/// Fluctuation statistic `D̂ max_{2≤j≤n} j/√n |ρ̂_j − ρ̂_n|` on the first
/// `n` observations.
pub fn fluctuation_statistic(pair: &SeriesPair, n: usize, gamma: usize) -> f64 {
    let (x, y) = (pair.x(), pair.y());
    let d = naive_dhat(x, y, 1, n, gamma);
    let full = naive_corr(x, y, 1, n).unwrap();
    let best = (2..=n).filter_map(|j| naive_corr(x, y, 1, j).map(|r| j as f64 * (r - full).abs())).fold(0.0, f64::max);
    d * best / (n as f64).sqrt()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// iid bivariate normal sample with correlation `rho` and mean zero.
pub fn iid_normal(rho: f64, t: usize, seed: u64) -> SeriesPair {
    let mut spec = Var1Spec::new(0.0, BreakSchedule::constant(rho), t, seed);
    spec.mean = [0.0, 0.0];
    spec.burn_in = 0;
    gen_var1(&spec).unwrap()
}

/// iid bivariate normal sample whose correlation steps through `levels`.
pub fn iid_breaks(breaks: &[f64], levels: &[f64], t: usize, seed: u64) -> SeriesPair {
    let mut spec = Var1Spec::new(0.0, BreakSchedule::new(breaks.to_vec(), levels.to_vec()).unwrap(), t, seed);
    spec.mean = [0.0, 0.0];
    spec.burn_in = 0;
    gen_var1(&spec).unwrap()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
