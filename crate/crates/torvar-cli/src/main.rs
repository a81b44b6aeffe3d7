use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use torvar::{Complex64, GridSpec, VarietyKind};
use torvar_cli::{reverify_report, run_experiment, run_sweep, ExperimentConfig};

#[derive(Parser)]
#[command(name = "torvar", version, about = "Certified homotopy experiments on matrix varieties")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run seeded homotopy trials and emit a JSON report
    Run(RunArgs),
    /// Write a seeded variety member (and optional nearby partner) as Matrix Market files
    Gen(GenArgs),
    /// Re-verify the certificates in an emitted report from its embedded artifacts
    Verify(VerifyArgs),
    /// Rasterize a pseudospectrum membership mask to CSV (and optionally PGM)
    Mask(MaskArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON config; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    variety: Option<VarietyKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "k-m")]
    k_m: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// verification samples per path segment
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// eth radius for the generated pairs (default: delta; delta/2 on the disk)
    #[arg(long)]
    pair_radius: Option<f64>,
    /// write per-trial defect/deviation traces as CSV
    #[arg(long)]
    trace: bool,
    /// comma-separated dimensions; runs the experiment once per n and emits
    /// one summary row per n
    #[arg(long = "n-sweep", value_delimiter = ',')]
    n_sweep: Option<Vec<usize>>,
}

impl RunArgs {
    fn into_config(self) -> Result<(ExperimentConfig, Option<Vec<usize>>)> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.variety {
            cfg.variety = v;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if let Some(k) = self.k_m {
            cfg.k_m = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.samples {
            cfg.samples_per_segment = s;
        }
        if let Some(o) = self.out {
            cfg.out = o;
        }
        if let Some(r) = self.pair_radius {
            cfg.pair_radius = Some(r);
        }
        if self.trace {
            cfg.trace = true;
        }
        cfg.validate()?;
        Ok((cfg, self.n_sweep))
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    variety: VarietyKind,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// also write a second tuple within this eth radius of the first
    #[arg(long)]
    pair_radius: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// report.json emitted by `torvar run`
    #[arg(long)]
    report: PathBuf,
    /// override the per-certificate sample count
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct MaskArgs {
    /// Matrix Market file holding the matrix
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    center_re: f64,
    #[arg(long, default_value_t = 0.0)]
    center_im: f64,
    /// side length of the square sampling window
    #[arg(long, default_value_t = 2.4)]
    side: f64,
    /// lattice points per axis
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// CSV output path (re, im, inside)
    #[arg(long)]
    csv_out: PathBuf,
    /// optional PGM raster of the mask
    #[arg(long)]
    pgm_out: Option<PathBuf>,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let (cfg, sweep) = args.into_config()?;
    match sweep {
        None => {
            let (report, path) = run_experiment(&cfg)?;
            let s = &report.summary;
            println!(
                "{} n={} m={} delta={}: {}/{} passed ({} errored), max eps-hat {}, median {}, median eps-hat/delta {}, {:.1} s",
                cfg.variety,
                cfg.n,
                cfg.m,
                cfg.delta,
                s.passed,
                s.trials,
                s.errored,
                s.max_eps_hat.map_or("-".into(), |v| format!("{v:.4}")),
                s.median_eps_hat.map_or("-".into(), |v| format!("{v:.4}")),
                s.median_ratio.map_or("-".into(), |v| format!("{v:.3}")),
                s.wall_seconds,
            );
            println!("report: {}", path.display());
            Ok(if s.passed == s.trials {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Some(ns) => {
            let (rows, csv) = run_sweep(&cfg, &ns)?;
            let mut all_pass = true;
            for (n, s) in &rows {
                all_pass &= s.passed == s.trials;
                println!(
                    "n={n}: {}/{} passed, max eps-hat {}, median {}, median eps-hat/delta {}, {:.1} s",
                    s.passed,
                    s.trials,
                    s.max_eps_hat.map_or("-".into(), |v| format!("{v:.4}")),
                    s.median_eps_hat.map_or("-".into(), |v| format!("{v:.4}")),
                    s.median_ratio.map_or("-".into(), |v| format!("{v:.3}")),
                    s.wall_seconds,
                );
            }
            println!("sweep table: {}", csv.display());
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;
    let x = torvar::gen_member(args.variety, args.n, args.m, args.seed)?;
    let mut files = torvar_cli::mmio::write_tuple(&args.out, "x", &x)?;
    if let Some(radius) = args.pair_radius {
        let y = torvar::gen_perturbation(&x, args.variety, radius, args.seed ^ 0xD1B5_4A32)?;
        files.extend(torvar_cli::mmio::write_tuple(&args.out, "y", &y)?);
        println!("eth(x, y) = {:.6e}", torvar::eth(&x, &y)?);
    }
    for f in files {
        println!("{}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let outcome = reverify_report(&args.report, args.samples)?;
    if outcome.all_good() {
        println!(
            "{}: {} certificate(s) re-verified",
            args.report.display(),
            outcome.trials_checked
        );
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &outcome.failures {
            eprintln!("{f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_mask(args: MaskArgs) -> Result<ExitCode> {
    let a = torvar_cli::mmio::mm_read(&args.input)?;
    let grid = GridSpec::square(
        Complex64::new(args.center_re, args.center_im),
        args.side,
        args.resolution,
    );
    let mask = torvar::pseudospectrum_mask(&a, args.epsilon, &grid)?;
    let csv = std::fs::File::create(&args.csv_out)
        .with_context(|| format!("creating {}", args.csv_out.display()))?;
    mask.write_csv(std::io::BufWriter::new(csv))?;
    println!("{}", args.csv_out.display());
    if let Some(pgm_path) = &args.pgm_out {
        let pgm = std::fs::File::create(pgm_path)
            .with_context(|| format!("creating {}", pgm_path.display()))?;
        mask.write_pgm(std::io::BufWriter::new(pgm))?;
        println!("{}", pgm_path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Mask(args) => cmd_mask(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
