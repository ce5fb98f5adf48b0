//! `corrbreak mc`: named Monte Carlo designs.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use corrbreak::montecarlo::{designs, run as run_experiment, Experiment, ExperimentSummary};
use corrbreak::SegmentationConfig;

use crate::text::sig6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum McFormat {
    Text,
    Json,
    Csv,
}

pub struct McArgs {
    pub design: String,
    pub reps: usize,
    pub seed: u64,
    pub sizes: Option<Vec<usize>>,
    pub threads: Option<usize>,
    pub config: SegmentationConfig,
    pub format: McFormat,
    pub out: Option<PathBuf>,
}

pub fn run(args: &McArgs) -> Result<()> {
    let cells = designs::by_name(&args.design, args.sizes.as_deref())?;
    let mut exp = Experiment::new(args.design.clone(), cells, args.reps, args.seed);
    exp.segmentation = args.config;
    exp.threads = args.threads;
    let summary = run_experiment(&exp)?;
    let body = match args.format {
        McFormat::Text => text(&summary),
        McFormat::Json => {
            let mut s = serde_json::to_string_pretty(&summary)?;
            s.push('\n');
            s
        }
        McFormat::Csv => csv_rows(&summary)?,
    };
    match &args.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn text(s: &ExperimentSummary) -> String {
    let mut out = format!(
        "{}: {} replications, seed {}, alpha0 = {}, {} s\n",
        s.name,
        s.replications,
        s.master_seed,
        s.alpha0,
        sig6(s.wall_time_secs)
    );
    for c in &s.cells {
        out.push_str(&format!("\n{}\n", c.label));
        let freqs: Vec<String> =
            c.frequencies.iter().map(|f| format!("{}: {}", f.category, sig6(f.frequency))).collect();
        out.push_str(&format!("  frequencies  {}\n", freqs.join("  ")));
        for l in &c.locations {
            out.push_str(&format!(
                "  z = {}  median {}  MAD {}  (n = {})\n",
                sig6(l.true_fraction),
                sig6(l.median),
                sig6(l.mad),
                l.n
            ));
        }
        if c.failures > 0 {
            out.push_str(&format!("  failed replications: {}\n", c.failures));
        }
    }
    out
}

/// One row per cell and count category.
fn csv_rows(s: &ExperimentSummary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cell", "t", "category", "count", "frequency", "band_low", "band_high"])?;
    for c in &s.cells {
        for f in &c.frequencies {
            w.write_record([
                c.label.clone(),
                c.t.to_string(),
                f.category.clone(),
                f.count.to_string(),
                f.frequency.to_string(),
                f.band[0].to_string(),
                f.band[1].to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
