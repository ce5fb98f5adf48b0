//! `corrbreak simulate` and `corrbreak astar`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use corrbreak::simulate::{a_star_profile, BreakSchedule, DccSpec, SimulationSpec, Var1Spec};

use crate::ingest::InputError;
use crate::text::sig6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Model {
    Var1,
    Dcc,
}

pub struct SimulateArgs {
    pub config: Option<PathBuf>,
    pub model: Model,
    pub phi: f64,
    pub t: usize,
    pub breaks: Vec<f64>,
    pub levels: Vec<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn load_spec(path: &Path) -> Result<SimulationSpec> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let spec = toml::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

pub fn spec_from(args: &SimulateArgs) -> Result<SimulationSpec> {
    let spec = match &args.config {
        Some(path) => {
            let spec = load_spec(path)?;
            match args.seed {
                Some(seed) => spec.with_seed(seed),
                None => spec,
            }
        }
        None => {
            let schedule = BreakSchedule::new(args.breaks.clone(), args.levels.clone())?;
            let seed = args.seed.unwrap_or(0);
            match args.model {
                Model::Var1 => SimulationSpec::Var1(Var1Spec::new(args.phi, schedule, args.t, seed)),
                Model::Dcc => SimulationSpec::Dcc(DccSpec::new(schedule, args.t, seed)),
            }
        }
    };
    Ok(spec)
}

/// Writes `t,x,y` rows; `t` is the 1-based observation number.
pub fn run(args: &SimulateArgs) -> Result<()> {
    let spec = spec_from(args)?;
    let pair = spec.generate()?;
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["t", "x", "y"])?;
    for (i, (x, y)) in pair.x().iter().zip(pair.y()).enumerate() {
        w.write_record([(i + 1).to_string(), x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub struct AstarArgs {
    pub breaks: Vec<f64>,
    pub levels: Vec<f64>,
    pub l1: f64,
    pub l2: f64,
    pub grid: usize,
    pub out: Option<PathBuf>,
}

pub fn run_astar(args: &AstarArgs) -> Result<()> {
    let g = BreakSchedule::new(args.breaks.clone(), args.levels.clone())?;
    let p = a_star_profile(&g, args.l1, args.l2, args.grid)?;
    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["z", "abs_A_star"])?;
        for (z, v) in p.grid.iter().zip(&p.values) {
            w.write_record([z.to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    let maximizers: Vec<String> = p.maximizers.iter().map(|&z| sig6(z)).collect();
    println!("interval [{}, {}], {} grid points", sig6(p.l1), sig6(p.l2), p.grid.len());
    println!("shape: {:?}", p.shape);
    println!("max |A*|: {}", sig6(p.max_value));
    if p.maximizers.len() <= 10 {
        println!("maximizers: {}", maximizers.join(", "));
    } else {
        println!("maximizers: {} grid points", p.maximizers.len());
    }
    Ok(())
}
