use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use volkov_spin::dirac::{PacketSpec, SpinLabel};
use volkov_spin::experiment::ClassicalModel;
use volkov_spin::pulse::PulseParams;
use volkov_spin::runner::{self, ExperimentConfig, OutputFormat};
use volkov_spin::spin::SpinOperatorKind;
use volkov_spin::verify::{self, Level};

/// Electron spin dynamics in short laser pulses.
#[derive(Debug, Parser)]
#[command(name = "volkov-spin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment config
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Number of optical cycles N_c
    #[arg(long, global = true, value_name = "X")]
    nc: Option<f64>,
    /// Initial longitudinal momentum p_z [a.u.]
    #[arg(long, global = true, value_name = "X")]
    pz: Option<f64>,
    /// Peak field E* [a.u.]
    #[arg(long, global = true, value_name = "X")]
    estar: Option<f64>,
    /// Carrier frequency ω [a.u.]
    #[arg(long, global = true, value_name = "X")]
    omega: Option<f64>,
    /// Momentum width Δq of the packet [a.u.]
    #[arg(long, global = true, value_name = "X")]
    dq: Option<f64>,
    /// Spin operators, comma separated (PAULI, FW, FRENKEL, PRYCE, BOOST_REST_FRAME)
    #[arg(long, global = true, value_name = "NAME[,NAME...]", value_delimiter = ',')]
    operator: Option<Vec<SpinOperatorKind>>,
    /// Worker threads for parameter scans
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// S_E, σ_E and unipolarity against N_c
    Area {
        /// Grid step when --nc is not given
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Classical trajectory and spin: Larmor, T-BMT and closed forms
    Classical,
    /// Volkov wave packet and relativistic spin operators
    Quantum,
    /// Config-driven parameter sweep
    Scan,
    /// Acceptance checks
    Verify {
        #[arg(value_enum, default_value = "fast")]
        level: VerifyLevel,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Fast,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn base_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::single(PulseParams::new(10.0, 1.0, 0.5), PacketSpec::new([0.0; 3], SpinLabel::Up, 0.01)),
    };
    if let Some(x) = c.estar {
        cfg.pulse.e_star = x;
    }
    if let Some(x) = c.omega {
        cfg.pulse.omega = x;
    }
    if let Some(x) = c.nc {
        cfg.pulse.n_c = x;
    }
    if let Some(x) = c.pz {
        cfg.packet.p[2] = x;
    }
    if let Some(x) = c.dq {
        cfg.packet.dq = x;
    }
    if let Some(ops) = &c.operator {
        cfg.operators = ops.clone();
    }
    Ok(cfg)
}

fn output_target(c: &Common, cfg: &ExperimentConfig) -> (Option<PathBuf>, OutputFormat) {
    let from_cfg = cfg.output.as_ref();
    let path = c.out.clone().or_else(|| from_cfg.map(|o| o.path.clone()));
    let format = c.format.map(OutputFormat::from).or_else(|| from_cfg.map(|o| o.format)).unwrap_or_default();
    (path, format)
}

fn run_config(c: &Common, cfg: ExperimentConfig) -> Result<bool> {
    let out = runner::run(&cfg)?;
    for w in &out.summary.warnings {
        eprintln!("warning: {w}");
    }
    let (path, format) = output_target(c, &cfg);
    let mut w = sink(path.as_deref())?;
    out.write(format, &mut w)?;
    w.flush()?;
    eprintln!(
        "{} point(s), config {}, max norm error {:.2e}, max tail mass {:.2e}",
        out.summary.points, out.summary.config_hash, out.summary.max_norm_error, out.summary.max_tail_mass
    );
    for v in &out.summary.violations {
        eprintln!("diagnostic threshold exceeded: {v}");
    }
    Ok(out.summary.ok())
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Area { step } => {
            let cfg = base_config(c)?;
            let n_cs: Vec<f64> = match (c.nc, &cfg.scan) {
                (Some(n), _) => vec![n],
                (None, Some(s)) if c.config.is_some() => s.points()?,
                _ => {
                    if !(step > 0.0 && step <= 2.0) {
                        bail!("--step must lie in (0, 2]");
                    }
                    let n = (2.0 / step + 1e-9).floor() as usize;
                    (1..=n).map(|k| k as f64 * step).collect()
                }
            };
            let rows = runner::area_rows(cfg.pulse.e_star, cfg.pulse.omega, cfg.pulse.c, &n_cs)?;
            let (path, format) = output_target(c, &cfg);
            let mut w = sink(path.as_deref())?;
            runner::write_area(&rows, format, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Classical => {
            let mut cfg = base_config(c)?;
            cfg.scan = None;
            cfg.operators.clear();
            if cfg.classical_models.is_empty() {
                cfg.classical_models = ClassicalModel::ALL.to_vec();
            }
            run_config(c, cfg)
        }
        Command::Quantum => {
            let mut cfg = base_config(c)?;
            cfg.scan = None;
            if cfg.operators.is_empty() {
                cfg.operators = SpinOperatorKind::ALL.to_vec();
            }
            if cfg.classical_models.is_empty() {
                cfg.classical_models = vec![ClassicalModel::Tbmt];
            }
            run_config(c, cfg)
        }
        Command::Scan => {
            if c.config.is_none() {
                bail!("scan needs --config PATH");
            }
            let cfg = base_config(c)?;
            if cfg.scan.is_none() {
                bail!("config has no [scan] section");
            }
            run_config(c, cfg)
        }
        Command::Verify { level } => {
            let level = match level {
                VerifyLevel::Fast => Level::Fast,
                VerifyLevel::Full => Level::Full,
            };
            let mut report = verify::verify(level);
            if level == Level::Full {
                report.criteria.push(verify::negative_control());
            }
            let mut w = sink(c.out.as_deref())?;
            match c.format {
                Some(Format::Json) => {
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
                _ => {
                    for r in &report.criteria {
                        writeln!(w, "{}", r.line())?;
                    }
                }
            }
            w.flush()?;
            Ok(report.passed())
        }
    }
}
