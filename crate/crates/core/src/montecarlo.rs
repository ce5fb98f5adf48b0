//! Monte Carlo harness for detection frequencies and location accuracy.
//!
//! Replication `r` of cell `c` draws its series with seed
//! `derive_seed(master_seed, c, r)`, so results do not depend on the number
//! of worker threads, and growing the replication count keeps the draws of
//! the earlier replications.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::segmentation::{detect, SegmentationConfig};
use crate::simulate::{BreakSchedule, DccSpec, SimulationSpec, Var1Spec};
use crate::{Error, Result};

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` in cell `cell`.
pub fn derive_seed(master: u64, cell: usize, rep: usize) -> u64 {
    mix(mix(mix(master) ^ cell as u64) ^ rep as u64)
}

/// One parameter combination of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    /// Generator; its own seed is ignored.
    pub spec: SimulationSpec,
}

impl Cell {
    pub fn true_breaks(&self) -> &[f64] {
        self.spec.schedule().breaks()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub cells: Vec<Cell>,
    pub replications: usize,
    pub master_seed: u64,
    pub segmentation: SegmentationConfig,
    /// Counts at or above this value are pooled; `None` means one above the
    /// true number of breaks.
    pub pool_from: Option<usize>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Experiment {
    pub fn new(name: impl Into<String>, cells: Vec<Cell>, replications: usize, master_seed: u64) -> Self {
        Self {
            name: name.into(),
            cells,
            replications,
            master_seed,
            segmentation: SegmentationConfig::default(),
            pool_from: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        self.segmentation.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountFrequency {
    /// `"2"` for exactly two breaks, `">=3"` for the pooled tail.
    pub category: String,
    pub count: usize,
    pub frequency: f64,
    /// Two-standard-error binomial band around `frequency`.
    pub band: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationSummary {
    pub true_fraction: f64,
    pub median: f64,
    /// Median absolute deviation about the median, unscaled.
    pub mad: f64,
    /// Replications entering the summary.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub label: String,
    pub t: usize,
    pub true_breaks: Vec<f64>,
    pub replications: usize,
    pub frequencies: Vec<CountFrequency>,
    /// Location summaries over replications detecting exactly the true
    /// number of breaks; empty for cells without breaks.
    pub locations: Vec<LocationSummary>,
    /// Replications where generation or detection failed.
    pub failures: usize,
    pub first_seed: u64,
}

impl CellSummary {
    pub fn frequency(&self, category: &str) -> Option<f64> {
        self.frequencies.iter().find(|f| f.category == category).map(|f| f.frequency)
    }

    /// Share of replications with at least one detected break.
    pub fn rejection_rate(&self) -> f64 {
        1.0 - self.frequency("0").unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub replications: usize,
    pub master_seed: u64,
    pub alpha0: f64,
    pub cells: Vec<CellSummary>,
    pub wall_time_secs: f64,
}

/// Outcome of one replication: detected fractions, or `None` on failure.
type Replication = Option<Vec<f64>>;

fn replicate(cell: &Cell, cfg: &SegmentationConfig, seed: u64) -> Replication {
    let pair = match cell.spec.with_seed(seed).generate() {
        Ok(p) => p,
        Err(e) => {
            log::warn!("{}: generation failed for seed {seed}: {e}", cell.label);
            return None;
        }
    };
    match detect(&pair, cfg) {
        Ok(report) => Some(report.fractions),
        Err(e) => {
            log::warn!("{}: detection failed for seed {seed}: {e}", cell.label);
            None
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mad(values: &[f64]) -> f64 {
    let m = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

fn summarize(cell: &Cell, index: usize, exp: &Experiment, outcomes: &[Replication]) -> CellSummary {
    let true_breaks = cell.true_breaks().to_vec();
    let pool = exp.pool_from.unwrap_or(true_breaks.len() + 1).max(1);
    let ok: Vec<&Vec<f64>> = outcomes.iter().flatten().collect();
    let failures = outcomes.len() - ok.len();
    let n = ok.len().max(1) as f64;

    let mut counts = vec![0usize; pool + 1];
    for f in &ok {
        counts[f.len().min(pool)] += 1;
    }
    let frequencies = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let p = c as f64 / n;
            let se = (p * (1.0 - p) / n).sqrt();
            CountFrequency {
                category: if k == pool { format!(">={k}") } else { k.to_string() },
                count: c,
                frequency: p,
                band: [(p - 2.0 * se).max(0.0), (p + 2.0 * se).min(1.0)],
            }
        })
        .collect();

    let exact: Vec<&&Vec<f64>> = ok.iter().filter(|f| f.len() == true_breaks.len()).collect();
    let locations = if exact.is_empty() {
        Vec::new()
    } else {
        true_breaks
            .iter()
            .enumerate()
            .map(|(j, &z)| {
                let est: Vec<f64> = exact.iter().map(|f| f[j]).collect();
                LocationSummary { true_fraction: z, median: median(&est), mad: mad(&est), n: est.len() }
            })
            .collect()
    };

    CellSummary {
        label: cell.label.clone(),
        t: cell.spec.t(),
        true_breaks,
        replications: outcomes.len(),
        frequencies,
        locations,
        failures,
        first_seed: derive_seed(exp.master_seed, index, 0),
    }
}

fn run_cells(exp: &Experiment) -> Vec<CellSummary> {
    exp.cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let outcomes: Vec<Replication> = (0..exp.replications)
                .into_par_iter()
                .map(|r| replicate(cell, &exp.segmentation, derive_seed(exp.master_seed, c, r)))
                .collect();
            summarize(cell, c, exp, &outcomes)
        })
        .collect()
}

pub fn run(exp: &Experiment) -> Result<ExperimentSummary> {
    exp.validate()?;
    let started = Instant::now();
    let cells = match exp.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| run_cells(exp)),
        None => run_cells(exp),
    };
    Ok(ExperimentSummary {
        name: exp.name.clone(),
        replications: exp.replications,
        master_seed: exp.master_seed,
        alpha0: exp.segmentation.alpha0,
        cells,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Cell grids of the standard simulation designs.
pub mod designs {
    use super::*;

    pub const VAR_PHIS: [f64; 3] = [-0.5, 0.0, 0.8];
    pub const VAR_SIZES: [usize; 5] = [200, 500, 1000, 2000, 3000];
    pub const DCC_SIZES: [usize; 5] = [500, 1000, 2000, 3000, 4000];

    fn var_cell(label: String, phi: f64, schedule: BreakSchedule, t: usize) -> Cell {
        Cell { label, spec: SimulationSpec::Var1(Var1Spec::new(phi, schedule, t, 0)) }
    }

    fn dcc_cell(label: String, schedule: BreakSchedule, t: usize) -> Cell {
        Cell { label, spec: SimulationSpec::Dcc(DccSpec::new(schedule, t, 0)) }
    }

    /// VAR(1) without breaks.
    pub fn var_null(phis: &[f64], rhos: &[f64], sizes: &[usize]) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &phi in phis {
            for &rho in rhos {
                for &t in sizes {
                    cells.push(var_cell(
                        format!("var1 phi={phi} rho={rho} T={t}"),
                        phi,
                        BreakSchedule::constant(rho),
                        t,
                    ));
                }
            }
        }
        cells
    }

    /// VAR(1) with correlation levels `levels` switching at `breaks`.
    pub fn var_breaks(phis: &[f64], breaks: &[f64], levels: &[f64], sizes: &[usize]) -> Result<Vec<Cell>> {
        let schedule = BreakSchedule::new(breaks.to_vec(), levels.to_vec())?;
        let mut cells = Vec::new();
        for &phi in phis {
            for &t in sizes {
                cells.push(var_cell(
                    format!("var1 phi={phi} z={breaks:?} rho={levels:?} T={t}"),
                    phi,
                    schedule.clone(),
                    t,
                ));
            }
        }
        Ok(cells)
    }

    /// As [`var_breaks`], with the common mean moving through `means` at
    /// the same fractions.
    pub fn var_breaks_with_mean(
        phis: &[f64],
        breaks: &[f64],
        levels: &[f64],
        means: &[f64],
        sizes: &[usize],
    ) -> Result<Vec<Cell>> {
        let mean_schedule = BreakSchedule::new(breaks.to_vec(), means.to_vec())?;
        let mut cells = var_breaks(phis, breaks, levels, sizes)?;
        for c in &mut cells {
            if let SimulationSpec::Var1(s) = &mut c.spec {
                s.mean_schedule = Some(mean_schedule.clone());
            }
            c.label.push_str(&format!(" mean={means:?}"));
        }
        Ok(cells)
    }

    pub fn dcc_null(rhos: &[f64], sizes: &[usize]) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &rho in rhos {
            for &t in sizes {
                cells.push(dcc_cell(format!("dcc rho={rho} T={t}"), BreakSchedule::constant(rho), t));
            }
        }
        cells
    }

    pub fn dcc_breaks(breaks: &[f64], levels: &[f64], sizes: &[usize]) -> Result<Vec<Cell>> {
        let schedule = BreakSchedule::new(breaks.to_vec(), levels.to_vec())?;
        Ok(sizes
            .iter()
            .map(|&t| dcc_cell(format!("dcc z={breaks:?} rho={levels:?} T={t}"), schedule.clone(), t))
            .collect())
    }

    /// Named designs, restricted to `sizes` when given. Single-break designs
    /// move the correlation from 0.25 to -0.25, 0.15 or 0.5 (VAR) and from
    /// 0.5 to 0.6, 0.7 or 0.8 (DCC).
    pub fn by_name(name: &str, sizes: Option<&[usize]>) -> Result<Vec<Cell>> {
        let var_t = sizes.unwrap_or(&VAR_SIZES);
        let dcc_t = sizes.unwrap_or(&DCC_SIZES);
        let mut cells = Vec::new();
        match name {
            "var-null" => cells = var_null(&VAR_PHIS, &[-0.5, 0.0, 0.5], var_t),
            "var-break-early" | "var-break-mid" | "var-break-late" => {
                let z = match name {
                    "var-break-early" => 0.25,
                    "var-break-mid" => 0.5,
                    _ => 0.75,
                };
                for rho1 in [-0.25, 0.15, 0.5] {
                    cells.extend(var_breaks(&VAR_PHIS, &[z], &[0.25, rho1], var_t)?);
                }
            }
            "var-two-breaks" => {
                for levels in [[0.25, -0.25, 0.25], [0.25, 0.5, 0.0], [0.25, 0.0, 0.25]] {
                    cells.extend(var_breaks(&VAR_PHIS, &[0.25, 0.75], &levels, var_t)?);
                }
            }
            "var-two-breaks-mean" => {
                for levels in [[0.25, -0.25, 0.25], [0.25, 0.5, 0.0], [0.25, 0.0, 0.25]] {
                    cells.extend(var_breaks_with_mean(&VAR_PHIS, &[0.25, 0.75], &levels, &[0.5, 1.0, 0.5], var_t)?);
                }
            }
            "dcc-null" => cells = dcc_null(&[0.0, 0.5, 0.8], dcc_t),
            "dcc-break" => {
                for z in [0.25, 0.5, 0.75] {
                    for rho1 in [0.6, 0.7, 0.8] {
                        cells.extend(dcc_breaks(&[z], &[0.5, rho1], dcc_t)?);
                    }
                }
            }
            "dcc-two-breaks" => {
                for levels in [[0.5, 0.7, 0.5], [0.5, 0.7, 0.6], [0.5, 0.6, 0.7]] {
                    cells.extend(dcc_breaks(&[0.25, 0.75], &levels, dcc_t)?);
                }
            }
            other => return Err(Error::InvalidParameter(format!("unknown design '{other}'"))),
        }
        Ok(cells)
    }

    pub const NAMES: [&str; 9] = [
        "var-null",
        "var-break-early",
        "var-break-mid",
        "var-break-late",
        "var-two-breaks",
        "var-two-breaks-mean",
        "dcc-null",
        "dcc-break",
        "dcc-two-breaks",
    ];
}
