use crate::config::ExperimentConfig;
use crate::mmio;
use crate::report::{Report, Summary, Timing, TrialOutcome, TrialRecord, REPORT_SCHEMA};
use anyhow::{Context, Result};
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use torvar::homotopy::{cube_homotopy_with, disk_homotopy_with, torus_homotopy_with};
use torvar::{
    eth, gen_member, gen_perturbation, variety_defect, HomotopyOptions, MatrixTuple, TuplePath,
    VarietyKind,
};

/// Per-trial seeds derived from the experiment seed: a Weyl step keeps the
/// streams distinct and independent of execution order.
pub fn trial_seeds(base: u64, trial: usize) -> (u64, u64) {
    let s = base.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (s, s ^ 0xD1B5_4A32_D192_ED03)
}

fn build(
    cfg: &ExperimentConfig,
    x: &MatrixTuple,
    y: &MatrixTuple,
) -> torvar::Result<(TuplePath, torvar::HomotopyCertificate)> {
    let opts = HomotopyOptions {
        samples_per_segment: cfg.samples_per_segment,
        ..Default::default()
    };
    match cfg.variety {
        VarietyKind::Cube => cube_homotopy_with(x, y, cfg.delta, cfg.k_m, &opts),
        VarietyKind::Disk => disk_homotopy_with(x, y, cfg.delta, cfg.k_m, &opts),
        VarietyKind::Torus => torus_homotopy_with(x, y, cfg.delta, cfg.k_m, &opts),
    }
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> TrialRecord {
    let (seed_x, seed_y) = trial_seeds(cfg.seed, trial);
    let mut record = TrialRecord {
        trial,
        seed_x,
        seed_y,
        outcome: TrialOutcome::Error,
        error: None,
        x_mm: Vec::new(),
        y_mm: Vec::new(),
        certificate: None,
        path: None,
    };
    let x = match gen_member(cfg.variety, cfg.n, cfg.m, seed_x) {
        Ok(x) => x,
        Err(e) => {
            record.error = Some(format!("generating start tuple: {e}"));
            return record;
        }
    };
    record.x_mm = mmio::tuple_to_strings(&x);
    let y = match gen_perturbation(&x, cfg.variety, cfg.effective_pair_radius(), seed_y) {
        Ok(y) => y,
        Err(e) => {
            record.error = Some(format!("generating end tuple: {e}"));
            return record;
        }
    };
    record.y_mm = mmio::tuple_to_strings(&y);
    match build(cfg, &x, &y) {
        Ok((path, cert)) => {
            record.outcome = if cert.passed {
                TrialOutcome::Pass
            } else {
                TrialOutcome::Fail
            };
            record.certificate = Some(cert);
            record.path = Some(path);
        }
        Err(e) => {
            record.error = Some(format!("building homotopy: {e}"));
        }
    }
    record
}

/// Run every trial (concurrently when threads are available), write
/// `report.json` and any traces under `cfg.out`, and return the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Report, PathBuf)> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    let started_unix_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let t0 = Instant::now();
    // collect() keeps records ordered by trial index
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial))
        .collect();
    let summary = Summary::from_records(&records, t0.elapsed().as_secs_f64(), cfg.delta);
    let report = Report {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        trials: records,
        summary,
        timing: Timing { started_unix_ms },
    };
    let report_path = cfg.out.join("report.json");
    let file = File::create(&report_path)
        .with_context(|| format!("creating {}", report_path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &report).context("writing report")?;
    if cfg.trace {
        for rec in &report.trials {
            if let (Some(path), Some(_)) = (&rec.path, &rec.certificate) {
                let x = mmio::tuple_from_strings(&rec.x_mm)?;
                let csv = cfg.out.join(format!("trial_{}_trace.csv", rec.trial));
                write_trace(&csv, path, &x, cfg.variety, cfg.samples_per_segment)?;
            }
        }
    }
    Ok((report, report_path))
}

/// Membership defect and eth deviation along the path, one CSV row per
/// sample point.
fn write_trace(
    csv: &Path,
    path: &TuplePath,
    x: &MatrixTuple,
    kind: VarietyKind,
    samples_per_segment: usize,
) -> Result<()> {
    let segments = path
        .components
        .first()
        .map(|c| c.segments.len())
        .unwrap_or(1);
    let samples = (samples_per_segment.max(1) * segments).max(2);
    let file = File::create(csv).with_context(|| format!("creating {}", csv.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "t,defect,deviation")?;
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let at = path.eval(t)?;
        let defect = variety_defect(&at, kind);
        let deviation = eth(&at, x)?;
        writeln!(out, "{t:.17e},{defect:.17e},{deviation:.17e}")?;
    }
    Ok(())
}

/// One experiment per dimension; per-n artifacts land in `out/n<k>/` and
/// `out/sweep.csv` gets one summary row per n.
pub fn run_sweep(cfg: &ExperimentConfig, ns: &[usize]) -> Result<(Vec<(usize, Summary)>, PathBuf)> {
    anyhow::ensure!(!ns.is_empty(), "n-sweep needs at least one dimension");
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    let mut rows = Vec::new();
    for &n in ns {
        let sub = ExperimentConfig {
            n,
            out: cfg.out.join(format!("n{n}")),
            ..cfg.clone()
        };
        let (report, _) = run_experiment(&sub)?;
        rows.push((n, report.summary));
    }
    let csv_path = cfg.out.join("sweep.csv");
    let file =
        File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(
        out,
        "n,trials,passed,pass_rate,max_eps_hat,median_eps_hat,max_ratio,median_ratio,wall_seconds"
    )?;
    for (n, s) in &rows {
        writeln!(
            out,
            "{n},{},{},{},{},{},{},{},{}",
            s.trials,
            s.passed,
            s.pass_rate,
            s.max_eps_hat.map_or(String::new(), |v| v.to_string()),
            s.median_eps_hat.map_or(String::new(), |v| v.to_string()),
            s.max_ratio.map_or(String::new(), |v| v.to_string()),
            s.median_ratio.map_or(String::new(), |v| v.to_string()),
            s.wall_seconds,
        )?;
    }
    Ok((rows, csv_path))
}
