//! Seeded generators for bivariate series with correlation breaks.
//!
//! Two families are provided: a VAR(1) with diagonal autoregression and
//! Gaussian innovations whose correlation follows a step function, and a
//! DCC model with GARCH(1,1) marginal variances and an autoregressive
//! conditional correlation whose intercept follows a step function.
//!
//! Regimes are indexed by the sample fraction `t/T` of observation
//! `t = 1..=T`, so with a break at `z` the new regime starts at observation
//! `ceil(zT)`. Burn-in draws use the first regime.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::moments::SeriesPair;
use crate::{Error, Result};

/// Step function on `[0, 1]`: `levels[i]` on `[z_i, z_{i+1})`, with
/// `z_0 = 0`, `z_{ℓ+1} = 1` and the last level also taken at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakSchedule {
    breaks: Vec<f64>,
    levels: Vec<f64>,
}

impl BreakSchedule {
    /// `breaks` are the interior boundaries `z_1 < … < z_ℓ` in `(0, 1)`.
    pub fn new(breaks: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        let s = Self { breaks, levels };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(level: f64) -> Self {
        Self { breaks: Vec::new(), levels: vec![level] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.len() != self.breaks.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} breaks need {} levels, got {}",
                self.breaks.len(),
                self.breaks.len() + 1,
                self.levels.len()
            )));
        }
        let mut last = 0.0;
        for &z in &self.breaks {
            if !(z > last && z < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "break fractions must increase strictly inside (0, 1): {:?}",
                    self.breaks
                )));
            }
            last = z;
        }
        if self.levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("schedule levels must be finite".into()));
        }
        Ok(())
    }

    fn validate_correlations(&self) -> Result<()> {
        self.validate()?;
        if let Some(r) = self.levels.iter().find(|r| r.abs() >= 1.0) {
            return Err(Error::InvalidParameter(format!("correlation level {r} outside (-1, 1)")));
        }
        Ok(())
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Boundaries including the endpoints 0 and 1.
    pub fn boundaries(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.breaks.iter().copied()).chain([1.0]).collect()
    }

    /// `g(z)`.
    pub fn level_at(&self, z: f64) -> f64 {
        let regime = self.breaks.partition_point(|&b| b <= z);
        self.levels[regime]
    }

    /// `∫_0^z g(u) du`, for `z` in `[0, 1]`.
    pub fn integral(&self, z: f64) -> f64 {
        let bounds = self.boundaries();
        let mut acc = 0.0;
        for (i, w) in bounds.windows(2).enumerate() {
            if z <= w[0] {
                break;
            }
            acc += self.levels[i] * (z.min(w[1]) - w[0]);
        }
        acc
    }

    /// Correlation of observation `t` in a sample of length `n`.
    fn at_observation(&self, t: usize, n: usize) -> f64 {
        self.level_at(t as f64 / n as f64)
    }
}

fn default_mean() -> [f64; 2] {
    [0.5, 0.5]
}

fn default_burn_in() -> usize {
    200
}

/// VAR(1): `(Z_t - μ_t) = φ (Z_{t-1} - μ_{t-1}) + ε_t`, `ε_t` bivariate
/// standard normal with correlation from `schedule`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Var1Spec {
    pub phi: f64,
    #[serde(default = "default_mean")]
    pub mean: [f64; 2],
    pub schedule: BreakSchedule,
    /// Common mean level of both series; overrides `mean` when present.
    #[serde(default)]
    pub mean_schedule: Option<BreakSchedule>,
    pub t: usize,
    pub seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

impl Var1Spec {
    pub fn new(phi: f64, schedule: BreakSchedule, t: usize, seed: u64) -> Self {
        Self { phi, mean: default_mean(), schedule, mean_schedule: None, t, seed, burn_in: default_burn_in() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi.is_nan() || self.phi.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!("|phi| = {} is not below 1", self.phi.abs())));
        }
        if self.t < 2 {
            return Err(Error::TooFewObservations(self.t));
        }
        if !self.mean.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidParameter("mean must be finite".into()));
        }
        self.schedule.validate_correlations()?;
        if let Some(m) = &self.mean_schedule {
            m.validate()?;
        }
        Ok(())
    }

    fn mean_at(&self, t: usize) -> [f64; 2] {
        match &self.mean_schedule {
            Some(s) => {
                let m = s.at_observation(t, self.t);
                [m, m]
            }
            None => self.mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Garch {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Garch {
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.omega > 0.0 && self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta < 1.0;
        if !ok {
            return Err(Error::InvalidParameter(format!("GARCH parameters {self:?} are not stationary")));
        }
        Ok(())
    }
}

fn default_garch_x() -> Garch {
    Garch { omega: 1e-4, alpha: 0.1, beta: 0.85 }
}

fn default_garch_y() -> Garch {
    Garch { omega: 1e-4, alpha: 0.15, beta: 0.8 }
}

fn default_theta1() -> f64 {
    0.95
}

fn default_theta2() -> f64 {
    0.03
}

/// Source of the `ψ_{t-1}` term in the conditional correlation recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PsiTerm {
    /// `ψ_{t-1} = R_{t-1}`: the correlation relaxes geometrically towards
    /// the current regime level at rate `1 - θ₁ - θ₂`.
    #[default]
    LaggedCorrelation,
    /// Tse–Tsui: uncentred correlation of the last `window` standardized
    /// residual pairs.
    RollingResiduals { window: usize },
}

/// DCC model with GARCH(1,1) variances and conditional correlation
/// `R_t = (1 - θ₁ - θ₂) ρ_t + θ₁ R_{t-1} + θ₂ ψ_{t-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DccSpec {
    #[serde(default = "default_garch_x")]
    pub garch_x: Garch,
    #[serde(default = "default_garch_y")]
    pub garch_y: Garch,
    #[serde(default = "default_theta1")]
    pub theta1: f64,
    #[serde(default = "default_theta2")]
    pub theta2: f64,
    #[serde(default)]
    pub psi: PsiTerm,
    pub schedule: BreakSchedule,
    pub t: usize,
    pub seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

impl DccSpec {
    pub fn new(schedule: BreakSchedule, t: usize, seed: u64) -> Self {
        Self {
            garch_x: default_garch_x(),
            garch_y: default_garch_y(),
            theta1: default_theta1(),
            theta2: default_theta2(),
            psi: PsiTerm::default(),
            schedule,
            t,
            seed,
            burn_in: default_burn_in(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.garch_x.validate()?;
        self.garch_y.validate()?;
        if !(self.theta1 >= 0.0 && self.theta2 >= 0.0 && self.theta1 + self.theta2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta1 + theta2 = {} must be below 1 with both nonnegative",
                self.theta1 + self.theta2
            )));
        }
        if self.psi == (PsiTerm::RollingResiduals { window: 0 }) {
            return Err(Error::InvalidParameter("psi window must be at least 1".into()));
        }
        if self.t < 2 {
            return Err(Error::TooFewObservations(self.t));
        }
        self.schedule.validate_correlations()
    }
}

/// Either generator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SimulationSpec {
    Var1(Var1Spec),
    Dcc(DccSpec),
}

impl SimulationSpec {
    pub fn t(&self) -> usize {
        match self {
            SimulationSpec::Var1(s) => s.t,
            SimulationSpec::Dcc(s) => s.t,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SimulationSpec::Var1(s) => s.seed,
            SimulationSpec::Dcc(s) => s.seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            SimulationSpec::Var1(s) => s.seed = seed,
            SimulationSpec::Dcc(s) => s.seed = seed,
        }
        out
    }

    pub fn schedule(&self) -> &BreakSchedule {
        match self {
            SimulationSpec::Var1(s) => &s.schedule,
            SimulationSpec::Dcc(s) => &s.schedule,
        }
    }

    pub fn generate(&self) -> Result<SeriesPair> {
        match self {
            SimulationSpec::Var1(s) => gen_var1(s),
            SimulationSpec::Dcc(s) => gen_dcc(s),
        }
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pair of standard normals with correlation `rho`.
fn correlated_normals(rng: &mut ChaCha8Rng, rho: f64) -> (f64, f64) {
    let e1: f64 = StandardNormal.sample(rng);
    let e2: f64 = StandardNormal.sample(rng);
    (e1, rho * e1 + (1.0 - rho * rho).sqrt() * e2)
}

pub fn gen_var1(spec: &Var1Spec) -> Result<SeriesPair> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let phi = spec.phi;
    let rho0 = spec.schedule.levels()[0];
    // Deviations from the mean follow the AR recursion; start at zero and
    // let the burn-in forget the initial value.
    let (mut dx, mut dy) = (0.0, 0.0);
    for _ in 0..spec.burn_in {
        let (e1, e2) = correlated_normals(&mut rng, rho0);
        dx = phi * dx + e1;
        dy = phi * dy + e2;
    }
    let mut x = Vec::with_capacity(spec.t);
    let mut y = Vec::with_capacity(spec.t);
    for t in 1..=spec.t {
        let rho = spec.schedule.at_observation(t, spec.t);
        let (e1, e2) = correlated_normals(&mut rng, rho);
        dx = phi * dx + e1;
        dy = phi * dy + e2;
        let mu = spec.mean_at(t);
        x.push(mu[0] + dx);
        y.push(mu[1] + dy);
    }
    SeriesPair::new(x, y)
}

/// Conditional variances and correlations behind a DCC sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DccPath {
    pub h_x: Vec<f64>,
    pub h_y: Vec<f64>,
    pub r: Vec<f64>,
    /// Observations at which the correlation had to be clamped.
    pub clamped: usize,
}

const R_BOUND: f64 = 1.0 - 1e-6;

pub fn gen_dcc(spec: &DccSpec) -> Result<SeriesPair> {
    gen_dcc_path(spec).map(|(pair, _)| pair)
}

/// Like [`gen_dcc`] but also returns the conditional moments.
pub fn gen_dcc_path(spec: &DccSpec) -> Result<(SeriesPair, DccPath)> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let (gx, gy) = (spec.garch_x, spec.garch_y);
    let w = match spec.psi {
        PsiTerm::RollingResiduals { window } => window,
        PsiTerm::LaggedCorrelation => 0,
    };
    let c = 1.0 - spec.theta1 - spec.theta2;

    let mut hx = gx.unconditional_variance();
    let mut hy = gy.unconditional_variance();
    let (mut x2_prev, mut y2_prev) = (hx, hy);
    let mut r_prev = spec.schedule.levels()[0];
    // Ring of the last `w` standardized residual pairs.
    let mut resid: std::collections::VecDeque<(f64, f64)> = std::collections::VecDeque::with_capacity(w);

    let total = spec.burn_in + spec.t;
    let mut x = Vec::with_capacity(spec.t);
    let mut y = Vec::with_capacity(spec.t);
    let mut path = DccPath {
        h_x: Vec::with_capacity(spec.t),
        h_y: Vec::with_capacity(spec.t),
        r: Vec::with_capacity(spec.t),
        clamped: 0,
    };
    for s in 0..total {
        let t = s.checked_sub(spec.burn_in).map(|i| i + 1);
        let rho = match t {
            Some(t) => spec.schedule.at_observation(t, spec.t),
            None => spec.schedule.levels()[0],
        };
        hx = gx.omega + gx.alpha * x2_prev + gx.beta * hx;
        hy = gy.omega + gy.alpha * y2_prev + gy.beta * hy;

        let psi = match spec.psi {
            PsiTerm::LaggedCorrelation => r_prev,
            PsiTerm::RollingResiduals { .. } => window_correlation(&resid, w).unwrap_or(rho),
        };
        let mut r = c * rho + spec.theta1 * r_prev + spec.theta2 * psi;
        if r.abs() > R_BOUND {
            log::warn!("conditional correlation {r} clamped");
            r = r.clamp(-R_BOUND, R_BOUND);
            if t.is_some() {
                path.clamped += 1;
            }
        }

        let (u1, u2) = correlated_normals(&mut rng, r);
        let (xv, yv) = (hx.sqrt() * u1, hy.sqrt() * u2);
        if w > 0 {
            if resid.len() == w {
                resid.pop_front();
            }
            resid.push_back((u1, u2));
        }
        x2_prev = xv * xv;
        y2_prev = yv * yv;
        r_prev = r;

        if t.is_some() {
            x.push(xv);
            y.push(yv);
            path.h_x.push(hx);
            path.h_y.push(hy);
            path.r.push(r);
        }
    }
    Ok((SeriesPair::new(x, y)?, path))
}

/// `Σ u₁u₂ / √(Σ u₁² Σ u₂²)` over a full window, as in Tse and Tsui (2002).
fn window_correlation(resid: &std::collections::VecDeque<(f64, f64)>, w: usize) -> Option<f64> {
    if resid.len() < w {
        return None;
    }
    let (mut s12, mut s11, mut s22) = (0.0, 0.0, 0.0);
    for &(a, b) in resid {
        s12 += a * b;
        s11 += a * a;
        s22 += b * b;
    }
    let d = (s11 * s22).sqrt();
    (d > 0.0).then(|| s12 / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceShape {
    /// `A*` vanishes on the whole interval.
    Constant,
    Unique,
    Multiple,
}

/// `|A*(z)|` on an even grid, with its maximizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AStarProfile {
    pub l1: f64,
    pub l2: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub max_value: f64,
    pub maximizers: Vec<f64>,
    pub shape: DominanceShape,
}

/// `A*(z) = ∫_{l1}^z g - (z - l1)/(l2 - l1) ∫_{l1}^{l2} g`, signed.
pub fn a_star(g: &BreakSchedule, l1: f64, l2: f64, z: f64) -> f64 {
    let g1 = g.integral(l1);
    let total = g.integral(l2) - g1;
    (g.integral(z) - g1) - (z - l1) / (l2 - l1) * total
}

const MAX_TOL: f64 = 1e-12;

/// Samples `|A*|` at `grid_size` evenly spaced points of `[l1, l2]`.
pub fn a_star_profile(g: &BreakSchedule, l1: f64, l2: f64, grid_size: usize) -> Result<AStarProfile> {
    g.validate()?;
    if grid_size < 2 {
        return Err(Error::InvalidParameter("grid_size must be at least 2".into()));
    }
    if !(0.0 <= l1 && l1 < l2 && l2 <= 1.0) {
        return Err(Error::InvalidParameter(format!("interval [{l1}, {l2}] is not inside [0, 1]")));
    }
    let steps = (grid_size - 1) as f64;
    let grid: Vec<f64> =
        (0..grid_size).map(|i| if i + 1 == grid_size { l2 } else { l1 + (l2 - l1) * (i as f64 / steps) }).collect();
    let values: Vec<f64> = grid.iter().map(|&z| a_star(g, l1, l2, z).abs()).collect();
    let max_value = values.iter().copied().fold(0.0, f64::max);
    let (maximizers, shape) = if max_value <= MAX_TOL {
        (grid.clone(), DominanceShape::Constant)
    } else {
        let m: Vec<f64> =
            grid.iter().zip(&values).filter(|(_, &v)| max_value - v <= MAX_TOL).map(|(&z, _)| z).collect();
        let shape = if m.len() == 1 { DominanceShape::Unique } else { DominanceShape::Multiple };
        (m, shape)
    };
    Ok(AStarProfile { l1, l2, grid, values, max_value, maximizers, shape })
}
