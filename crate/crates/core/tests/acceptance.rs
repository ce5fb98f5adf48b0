//! Desk-scale acceptance run. Prints one line per criterion and exits
//! non-zero if any of them fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use corrbreak::cusum::{profile, CusumProfile, Interval};
use corrbreak::lrv::{dhat, Bandwidth, HacConfig};
use corrbreak::montecarlo::{designs, run, CellSummary, Experiment};
use corrbreak::segmentation::{alpha_schedule, critical_value, detect, kolmogorov_cdf, SegmentationConfig};
use corrbreak::simulate::{a_star, a_star_profile, BreakSchedule, DominanceShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn single_cell(cells: Vec<corrbreak::montecarlo::Cell>, label: &str, reps: usize) -> CellSummary {
    assert_eq!(cells.len(), 1, "{label}: expected one cell");
    let exp = Experiment::new(label, cells, reps, SEED);
    run(&exp).expect("experiment runs").cells.remove(0)
}

fn critical_value_check() -> Outcome {
    let c = critical_value(0.05);
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.025, 0.05, 0.1] {
        worst = worst.max((kolmogorov_cdf(critical_value(p)) - (1.0 - p)).abs());
    }
    outcome((c - 1.358).abs() <= 0.001 && worst <= 1e-8, format!("c(0.05) = {c:.6}, max CDF error {worst:.1e}"))
}

fn alpha_schedule_check() -> Outcome {
    let a1 = alpha_schedule(0.05, 1);
    let a2 = alpha_schedule(0.05, 2);
    let exact = (a1 - (1.0 - 0.95f64.sqrt())).abs() < 1e-15 && (a2 - (1.0 - 0.95f64.cbrt())).abs() < 1e-15;
    let pass = exact && (a1 - 0.0253).abs() < 5e-5 && (a2 - 0.0170).abs() < 5e-5;
    outcome(pass, format!("alpha_1 = {a1:.5}, alpha_2 = {a2:.5}"))
}

fn null_size() -> Outcome {
    let cell = single_cell(designs::var_null(&[0.0], &[0.0], &[1000]), "null", 500);
    let r = cell.rejection_rate();
    outcome((0.02..=0.08).contains(&r), format!("rejection rate {r:.3} over 500 replications"))
}

fn oversize() -> Outcome {
    let cell = single_cell(designs::var_null(&[0.8], &[0.0], &[500]), "oversize", 300);
    let r = cell.rejection_rate();
    outcome((0.10..=0.24).contains(&r), format!("rejection rate {r:.3} over 300 replications"))
}

fn single_break() -> Outcome {
    let cells = designs::var_breaks(&[0.0], &[0.5], &[0.25, -0.25], &[1000]).unwrap();
    let cell = single_cell(cells, "single break", 300);
    let f = cell.frequency("1").unwrap_or(0.0);
    let loc = &cell.locations[0];
    let pass = (0.91..=0.99).contains(&f) && (loc.median - 0.5).abs() <= 0.02 && loc.mad <= 0.02;
    outcome(pass, format!("one-change frequency {f:.3}, median {:.4}, MAD {:.4}", loc.median, loc.mad))
}

fn two_breaks() -> Outcome {
    let cells = designs::var_breaks(&[0.0], &[0.25, 0.75], &[0.25, 0.5, 0.0], &[2000]).unwrap();
    let cell = single_cell(cells, "two breaks", 200);
    let f = cell.frequency("2").unwrap_or(0.0);
    let (m1, m2) = (cell.locations[0].median, cell.locations[1].median);
    let pass = (0.90..=1.0).contains(&f) && (m1 - 0.25).abs() <= 0.03 && (m2 - 0.75).abs() <= 0.03;
    outcome(pass, format!("two-change frequency {f:.3}, medians {m1:.4} / {m2:.4}"))
}

fn dcc_break() -> Outcome {
    let cells = designs::dcc_breaks(&[0.5], &[0.5, 0.8], &[1000]).unwrap();
    let cell = single_cell(cells, "dcc break", 200);
    let f = cell.frequency("1").unwrap_or(0.0);
    outcome((0.85..=0.99).contains(&f), format!("one-change frequency {f:.3} over 200 replications"))
}

fn dhat_closed_form() -> Outcome {
    let median_dhat = |rho: f64, t: usize| {
        let v: Vec<f64> =
            (0..50).map(|s| dhat(&iid_normal(rho, t, SEED + s), 1, t, &HacConfig::default()).unwrap().dhat).collect();
        median(&v)
    };
    let d0 = median_dhat(0.0, 5000);
    let d1 = median_dhat(0.25, 10_000);
    let target = (1.0 - 0.75 * 0.25 + 0.125 * 0.125f64).powf(-0.5);
    let pass = (d0 - 1.0).abs() <= 0.1 && (d1 - target).abs() <= 0.1;
    outcome(pass, format!("rho=0: {d0:.4} (target 1), rho=0.25: {d1:.4} (target {target:.4})"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst_d, mut worst_a) = (0.0f64, 0.0f64);
    for case in 0..100u64 {
        let t = rng.random_range(80..=400);
        let z = rng.random_range(0.2..0.8);
        let p = iid_breaks(&[z], &[rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)], t, SEED + case);
        let a = rng.random_range(1..=t / 4);
        let b = rng.random_range(a + 30..=t);
        let c = dhat(&p, a, b, &HacConfig::default()).unwrap();
        worst_d = worst_d.max(rel_diff(c.dhat, naive_dhat(p.x(), p.y(), a, b, c.bandwidth)));

        let l1 = rng.random_range(0..t / 3) as f64 / t as f64;
        let l2 = rng.random_range(t / 3 + 40..=t) as f64 / t as f64;
        let prof = profile(&p, Interval::new(l1, l2).unwrap(), &HacConfig::default(), 20).unwrap();
        let oracle = naive_profile(&p, l1, l2, Bandwidth::LogFloor.for_len(prof.len()));
        if oracle.len() != prof.values.len() {
            return outcome(false, format!("case {case}: profile lengths differ"));
        }
        for (v, o) in prof.values.iter().zip(&oracle) {
            worst_a = worst_a.max((v - o).abs() / o.abs().max(1e-3));
        }
    }
    outcome(worst_d <= 1e-10 && worst_a <= 1e-10, format!("max rel. error: D-hat {worst_d:.1e}, A_T {worst_a:.1e}"))
}

fn properties() -> Outcome {
    let mut failures = Vec::new();
    let cfg = SegmentationConfig::default();
    let hac = HacConfig::default();

    // Affine invariance and swap symmetry of the statistic and of detection.
    let p = iid_breaks(&[0.4, 0.7], &[0.6, -0.2, 0.3], 1200, SEED);
    let base = profile(&p, Interval::full(), &hac, 20).unwrap().statistic;
    let report = detect(&p, &cfg).unwrap();
    for (name, q) in [("affine", p.affine(3.0, 7.0, 0.5, -2.0)), ("swap", p.swapped())] {
        let s = profile(&q, Interval::full(), &hac, 20).unwrap().statistic;
        if rel_diff(base, s) > 1e-8 {
            failures.push(format!("{name} statistic {base} vs {s}"));
        }
        if detect(&q, &cfg).unwrap().changepoints != report.changepoints {
            failures.push(format!("{name} changepoints differ"));
        }
    }

    // Ties resolve to the smallest maximizer.
    let grid: Vec<f64> = (0..=8).map(|j| j as f64 / 8.0).collect();
    let tent = vec![0.0, 0.1, 0.3, 0.2, 0.1, 0.2, 0.3, 0.1, 0.0];
    let prof = CusumProfile::from_values(Interval::full(), 8, grid, tent, 1.0).unwrap();
    if prof.argmax_fraction != 0.25 {
        failures.push(format!("tie resolved to {}", prof.argmax_fraction));
    }

    // A* is linear between breaks and vanishes at both ends.
    let g = BreakSchedule::new(vec![0.5, 0.75], vec![0.5, 0.7, 0.6]).unwrap();
    for (lo, hi) in [(0.0, 0.5), (0.5, 0.75), (0.75, 1.0)] {
        let mid = a_star(&g, 0.0, 1.0, 0.5 * (lo + hi));
        let chord = 0.5 * (a_star(&g, 0.0, 1.0, lo) + a_star(&g, 0.0, 1.0, hi));
        if (mid - chord).abs() > 1e-14 {
            failures.push(format!("A* not linear on [{lo}, {hi}]"));
        }
    }
    if a_star(&g, 0.0, 1.0, 0.0).abs() > 1e-15 || a_star(&g, 0.0, 1.0, 1.0).abs() > 1e-15 {
        failures.push("A* does not vanish at the endpoints".into());
    }
    let unique = a_star_profile(&g, 0.0, 1.0, 101).unwrap();
    if unique.shape != DominanceShape::Unique || unique.maximizers != [0.5] || (unique.max_value - 0.0375).abs() > 1e-14
    {
        failures.push(format!("unique example: {:?} at {}", unique.maximizers, unique.max_value));
    }
    let sym = BreakSchedule::new(vec![0.25, 0.75], vec![0.5, 0.7, 0.5]).unwrap();
    let pair = a_star_profile(&sym, 0.0, 1.0, 101).unwrap();
    if pair.shape != DominanceShape::Multiple
        || pair.maximizers != [0.25, 0.75]
        || (pair.max_value - 0.025).abs() > 1e-14
    {
        failures.push(format!("symmetric example: {:?} at {}", pair.maximizers, pair.max_value));
    }

    // Determinism of detection and of Monte Carlo regardless of thread count.
    if detect(&p, &cfg).unwrap() != report {
        failures.push("detect is not deterministic".into());
    }
    let cells = designs::var_breaks(&[0.0], &[0.5], &[0.25, -0.25], &[500]).unwrap();
    let mut one = Experiment::new("determinism", cells, 40, SEED);
    one.threads = Some(1);
    let mut four = one.clone();
    four.threads = Some(4);
    let (a, b) = (run(&one).unwrap(), run(&four).unwrap());
    if a.cells != b.cells {
        failures.push("Monte Carlo summaries depend on thread count".into());
    }

    let detail = if failures.is_empty() { "all properties hold".to_string() } else { failures.join("; ") };
    outcome(failures.is_empty(), detail)
}

fn performance(suite_start: Instant) -> Outcome {
    let p = iid_breaks(&[0.3, 0.6], &[0.5, 0.0, 0.4], 5000, SEED);
    detect(&p, &SegmentationConfig::default()).unwrap();
    let start = Instant::now();
    let report = detect(&p, &SegmentationConfig::default()).unwrap();
    let took = start.elapsed();
    let suite = suite_start.elapsed();
    let pass = took < Duration::from_secs(1) && suite < Duration::from_secs(15 * 60);
    outcome(
        pass,
        format!(
            "detect(T=5000) {:.1} ms ({} breaks), suite {:.1} s",
            took.as_secs_f64() * 1e3,
            report.count(),
            suite.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let suite_start = Instant::now();
    let checks: [Check; 10] = [
        ("critical value", critical_value_check),
        ("alpha schedule", alpha_schedule_check),
        ("null size, VAR(1) phi=0, T=1000", null_size),
        ("oversize, VAR(1) phi=0.8, T=500", oversize),
        ("single break, .25 -> -.25 at 0.5, T=1000", single_break),
        ("two breaks, (.25, .5, 0), T=2000", two_breaks),
        ("DCC break, .5 -> .8 at 0.5, T=1000", dcc_break),
        ("D-hat closed form", dhat_closed_form),
        ("oracle equivalence", oracle_equivalence),
        ("property suite", properties),
    ];
    let mut failed = 0;
    let mut report = |i: usize, name: &str, o: Outcome, secs: f64| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {i:>2} {tag}  {name}: {} [{secs:.1} s]", o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        report(i + 1, name, o, start.elapsed().as_secs_f64());
    }
    let start = Instant::now();
    let o = performance(suite_start);
    report(11, "performance", o, start.elapsed().as_secs_f64());

    if failed == 0 {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 11 criteria failed");
        ExitCode::FAILURE
    }
}
