//! `corrbreak detect`: run the segmentation on a CSV file and write the
//! report, optional profile curves and a text summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use corrbreak::segmentation::{detect_traced, IterationRecord, Step};
use corrbreak::{ChangePointReport, CusumProfile, SegmentationConfig, SeriesPair};
use serde::{Deserialize, Serialize};

use crate::ingest::{ingest_csv, InputError};
use crate::text::sig6;

/// One row of the iteration table: interval, statistic, candidate break.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub step: Step,
    pub round: usize,
    pub interval: [usize; 2],
    pub statistic: f64,
    pub critical_value: f64,
    pub significant: bool,
    pub change_point: usize,
    pub time_point: f64,
    pub date: Option<String>,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectOutput {
    pub input: String,
    pub columns: [String; 2],
    pub config: SegmentationConfig,
    pub report: ChangePointReport,
    pub changepoint_dates: Option<Vec<String>>,
    pub table: Vec<TableRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

pub struct DetectArgs {
    pub input: PathBuf,
    pub out: PathBuf,
    pub config: SegmentationConfig,
    pub formats: Formats,
    pub emit_profiles: bool,
}

fn date(pair: &SeriesPair, t: usize) -> Option<String> {
    pair.timestamp(t).map(str::to_string)
}

fn table(pair: &SeriesPair, iterations: &[IterationRecord]) -> Vec<TableRow> {
    let t = pair.len();
    iterations
        .iter()
        .map(|it| TableRow {
            step: it.step,
            round: it.round,
            interval: it.interval,
            statistic: it.statistic,
            critical_value: it.critical_value,
            significant: it.significant,
            change_point: it.candidate_index,
            time_point: it.candidate_index as f64 / t as f64,
            date: date(pair, it.candidate_index),
        })
        .collect()
}

pub fn build_output(
    input: &str,
    columns: [String; 2],
    pair: &SeriesPair,
    cfg: SegmentationConfig,
    report: ChangePointReport,
) -> DetectOutput {
    let changepoint_dates =
        pair.timestamps().map(|_| report.changepoints.iter().filter_map(|&c| date(pair, c)).collect());
    let table = table(pair, &report.iterations);
    DetectOutput { input: input.to_string(), columns, config: cfg, report, changepoint_dates, table }
}

pub fn run(args: &DetectArgs) -> Result<()> {
    let data = ingest_csv(&args.input)?;
    let pair = &data.pair;
    let need = 2 * args.config.n_min;
    if pair.len() < need {
        return Err(InputError(format!(
            "{}: {} rows, need at least {need} (twice --n-min)",
            args.input.display(),
            pair.len()
        ))
        .into());
    }
    let trace = detect_traced(pair, &args.config)?;
    let output = build_output(
        &args.input.display().to_string(),
        [data.x_name.clone(), data.y_name.clone()],
        pair,
        args.config,
        trace.report,
    );

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    if args.formats.json {
        let path = args.out.join("report.json");
        let mut body = serde_json::to_string_pretty(&output)?;
        body.push('\n');
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.formats.csv {
        write_tables(&args.out, pair, &output)?;
    }
    if args.emit_profiles {
        write_profiles(&args.out.join("profiles"), &output.report.iterations, &trace.profiles)?;
    }
    print!("{}", summary(&output, data.label_name.is_some()));
    Ok(())
}

fn write_tables(dir: &Path, pair: &SeriesPair, out: &DetectOutput) -> Result<()> {
    let report = &out.report;
    let opt = |s: Option<String>| s.unwrap_or_default();

    let mut w = csv::Writer::from_path(dir.join("changepoints.csv"))?;
    w.write_record(["index", "fraction", "date"])?;
    for (&c, &f) in report.changepoints.iter().zip(&report.fractions) {
        w.write_record([c.to_string(), f.to_string(), opt(date(pair, c))])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("segments.csv"))?;
    w.write_record(["start", "end", "start_date", "end_date", "correlation"])?;
    for (seg, r) in report.segments.iter().zip(&report.segment_correlations) {
        w.write_record([
            seg[0].to_string(),
            seg[1].to_string(),
            opt(date(pair, seg[0])),
            opt(date(pair, seg[1])),
            r.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("iterations.csv"))?;
    w.write_record([
        "step",
        "round",
        "start",
        "end",
        "statistic",
        "critical_value",
        "significant",
        "change_point",
        "time_point",
        "date",
    ])?;
    for row in &out.table {
        w.write_record([
            step_name(row.step).to_string(),
            row.round.to_string(),
            row.interval[0].to_string(),
            row.interval[1].to_string(),
            row.statistic.to_string(),
            row.critical_value.to_string(),
            row.significant.to_string(),
            row.change_point.to_string(),
            row.time_point.to_string(),
            opt(row.date.clone()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_profiles(dir: &Path, iterations: &[IterationRecord], profiles: &[CusumProfile]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for it in iterations {
        let p = &profiles[it.profile_id];
        let name = format!(
            "{:03}_{}{}_{}-{}.csv",
            it.profile_id,
            step_name(it.step),
            it.round,
            it.interval[0],
            it.interval[1]
        );
        let mut w = csv::Writer::from_path(dir.join(name))?;
        w.write_record(["index", "fraction", "abs_A_T"])?;
        for ((i, z), v) in p.indices.iter().zip(&p.grid).zip(&p.values) {
            w.write_record([i.to_string(), z.to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn step_name(step: Step) -> &'static str {
    match step {
        Step::Detect => "detect",
        Step::Refine => "refine",
    }
}

/// Iteration table in the layout of a printed results table: one block
/// per step, `(*)` after significant statistics.
pub fn summary(out: &DetectOutput, dated: bool) -> String {
    let report = &out.report;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} vs {}: T = {}, alpha0 = {}, n_min = {}",
        out.columns[0], out.columns[1], report.t, out.config.alpha0, out.config.n_min
    );
    let mut last: Option<(Step, usize)> = None;
    for row in &out.table {
        let key = (row.step, row.round);
        if last != Some(key) {
            let header = match key {
                (Step::Detect, 1) => Some("Step 1"),
                (Step::Detect, _) if last.is_some_and(|l| l.1 == 1) => Some("Step 2"),
                (Step::Refine, _) if last.is_some_and(|l| l.0 == Step::Detect) => Some("Step 3"),
                _ => None,
            };
            match header {
                Some(h) => {
                    let _ = writeln!(s, "\n{h}");
                    let _ = writeln!(
                        s,
                        "{:<16} {:>14} {:>9} {:>13} {:>12}{}",
                        "interval",
                        "Q_T",
                        "critical",
                        "change point",
                        "time point",
                        if dated { "  date" } else { "" }
                    );
                }
                None => s.push('\n'),
            }
            last = Some(key);
        }
        let q = format!("{}{}", sig6(row.statistic), if row.significant { " (*)" } else { "" });
        let _ = write!(
            s,
            "{:<16} {:>14} {:>9} {:>13} {:>12}",
            format!("[{}, {}]", row.interval[0], row.interval[1]),
            q,
            sig6(row.critical_value),
            row.change_point,
            sig6(row.time_point)
        );
        if let Some(d) = &row.date {
            let _ = write!(s, "  {d}");
        }
        s.push('\n');
    }

    let _ = writeln!(s, "\nchange points: {}", report.count());
    for (k, (&c, &f)) in report.changepoints.iter().zip(&report.fractions).enumerate() {
        let d = out.changepoint_dates.as_ref().and_then(|v| v.get(k)).map(|d| format!("  {d}")).unwrap_or_default();
        let _ = writeln!(s, "  {c} ({}){d}", sig6(f));
    }
    let _ = writeln!(s, "segment correlations:");
    for (seg, r) in report.segments.iter().zip(&report.segment_correlations) {
        let r = r.map(sig6).unwrap_or_else(|| "undefined".into());
        let _ = writeln!(s, "  [{}, {}]  {r}", seg[0], seg[1]);
    }
    if !report.skipped.is_empty() {
        let _ = writeln!(s, "untested segments: {}", report.skipped.len());
    }
    if report.refinement_capped {
        let _ = writeln!(s, "warning: refinement stopped at its pass limit");
    }
    s
}
