//! Config-driven single runs and parameter scans.
//!
//! A config is a TOML document:
//!
//! ```toml
//! operators = ["FW", "PAULI"]
//! classical_models = ["TBMT", "ANALYTIC_REL"]
//!
//! [pulse]
//! e_star = 10.0
//! omega = 1.0
//! n_c = 0.5
//!
//! [packet]
//! p = [0.0, 0.0, 0.0]
//! s = 1
//! dq = 0.01
//!
//! [scan]
//! variable = "n_c"
//! start = 0.25
//! stop = 2.0
//! step = 0.25
//!
//! [output]
//! path = "scan.csv"
//! format = "csv"
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::{delta_pz_estimate, OdeOptions};
use crate::dirac::{PacketSpec, QuantumOptions};
use crate::error::{Error, Result};
use crate::experiment::{initial_spin, run_classical, run_quantum, ClassicalModel};
use crate::numerics::QuadratureSpec;
use crate::pulse::{Pulse, PulseParams};
use crate::spin::SpinOperatorKind;

/// Bumped whenever the column set or order changes.
pub const FORMAT_VERSION: u32 = 1;

/// Rows whose norm error exceeds this make the run fail.
pub const NORM_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanVariable {
    #[serde(rename = "n_c", alias = "N_c", alias = "nc")]
    NC,
    #[serde(rename = "p_z", alias = "pz")]
    PZ,
    #[serde(rename = "dq")]
    Dq,
    #[serde(rename = "omega")]
    Omega,
}

impl ScanVariable {
    pub fn name(self) -> &'static str {
        match self {
            ScanVariable::NC => "n_c",
            ScanVariable::PZ => "p_z",
            ScanVariable::Dq => "dq",
            ScanVariable::Omega => "omega",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub variable: ScanVariable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl ScanSpec {
    /// Explicit values, or start, start+step, … up to stop inclusive.
    pub fn points(&self) -> Result<Vec<f64>> {
        let bad = |m: String| Err(Error::Config(m));
        match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return bad("scan.values must not be empty".into());
                }
                if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                    return bad(format!("scan.values contains non-finite value {x}"));
                }
                Ok(v.clone())
            }
            (None, Some(a), Some(b), Some(h)) => {
                if !(a.is_finite() && b.is_finite()) {
                    return bad("scan.start and scan.stop must be finite".into());
                }
                if !(h > 0.0 && h.is_finite()) {
                    return bad(format!("scan.step must be finite and > 0, got {h}"));
                }
                if b < a {
                    return bad(format!("scan.stop ({b}) is below scan.start ({a})"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                if n > 1_000_000 {
                    return bad(format!("scan has {} points; refusing more than 1e6", n + 1));
                }
                Ok((0..=n).map(|k| a + k as f64 * h).collect())
            }
            _ => bad("scan needs either `values` or all of `start`, `stop`, `step`".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown output format '{s}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub quadrature: QuadratureSpec,
    pub quantum: QuantumOptions,
    pub ode: OdeOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pulse: PulseParams,
    pub packet: PacketSpec,
    /// Quantum spin operators to evaluate; empty skips the Dirac pipeline.
    #[serde(default)]
    pub operators: Vec<SpinOperatorKind>,
    #[serde(default)]
    pub classical_models: Vec<ClassicalModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    /// Not part of the config hash.
    #[serde(default, skip_serializing)]
    pub output: Option<OutputSpec>,
    /// Accept N_c outside (0, 2] with a warning instead of an error.
    #[serde(default)]
    pub allow_out_of_range: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Minimal single-point config.
    pub fn single(pulse: PulseParams, packet: PacketSpec) -> Self {
        Self {
            pulse,
            packet,
            operators: Vec::new(),
            classical_models: Vec::new(),
            scan: None,
            numerics: NumericsConfig::default(),
            output: None,
            allow_out_of_range: false,
        }
    }

    /// SHA-256 of the canonical JSON form, first 16 hex digits.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Parameter points with the scan variable applied; returns warnings.
    pub fn points(&self) -> Result<(Vec<(Option<f64>, PulseParams, PacketSpec)>, Vec<String>)> {
        let mut warnings = Vec::new();
        self.numerics.quadrature.validate().map_err(|e| Error::Config(format!("numerics.quadrature: {e}")))?;
        let values = match &self.scan {
            Some(s) => s.points()?.into_iter().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::with_capacity(values.len());
        for v in values {
            let mut pulse = self.pulse;
            let mut packet = self.packet;
            if let (Some(x), Some(scan)) = (v, &self.scan) {
                match scan.variable {
                    ScanVariable::NC => pulse.n_c = x,
                    ScanVariable::PZ => packet.p[2] = x,
                    ScanVariable::Dq => packet.dq = x,
                    ScanVariable::Omega => pulse.omega = x,
                }
            }
            let at = |e: Error| match v {
                Some(x) => Error::Config(format!("{} = {x}: {e}", self.scan.as_ref().unwrap().variable.name())),
                None => Error::Config(e.to_string()),
            };
            pulse.validate().map_err(|e| at(Error::Config(format!("pulse: {e}"))))?;
            packet.validate().map_err(|e| at(Error::Config(format!("packet: {e}"))))?;
            if !(pulse.n_c > 0.0 && pulse.n_c <= 2.0) {
                let msg = format!("pulse.n_c = {} lies outside (0, 2]", pulse.n_c);
                if self.allow_out_of_range {
                    warnings.push(msg);
                } else {
                    return Err(Error::Config(format!("{msg}; set allow_out_of_range = true to proceed")));
                }
            }
            out.push((v, pulse, packet));
        }
        Ok((out, warnings))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config_hash: String,
    pub scan_variable: Option<ScanVariable>,
    pub scan_value: Option<f64>,
    pub e_star: f64,
    pub omega: f64,
    pub n_c: f64,
    pub p_z: f64,
    pub dq: f64,
    pub s_e: f64,
    pub sigma_e: f64,
    pub theta0: f64,
    pub delta_pz_estimate: f64,
    pub delta_pz_classical: Option<f64>,
    pub delta_pz_quantum: Option<f64>,
    pub classical: Vec<(ClassicalModel, [f64; 3])>,
    pub quantum: Vec<(SpinOperatorKind, [f64; 3])>,
    pub norm_error: Option<f64>,
    pub tail_mass: Option<f64>,
}

impl ResultRow {
    pub fn classical_ds(&self, model: ClassicalModel) -> Option<[f64; 3]> {
        self.classical.iter().find(|(m, _)| *m == model).map(|(_, d)| *d)
    }

    pub fn quantum_ds(&self, kind: SpinOperatorKind) -> Option<[f64; 3]> {
        self.quantum.iter().find(|(k, _)| *k == kind).map(|(_, d)| *d)
    }

    /// Cells in [`columns`] order; `None` is an empty cell.
    pub fn cells(&self) -> Vec<Cell> {
        let mut c = vec![
            Cell::Text(self.config_hash.clone()),
            Cell::Text(self.scan_variable.map(|v| v.name().to_string()).unwrap_or_default()),
            Cell::opt(self.scan_value),
            Cell::Num(self.e_star),
            Cell::Num(self.omega),
            Cell::Num(self.n_c),
            Cell::Num(self.p_z),
            Cell::Num(self.dq),
            Cell::Num(self.s_e),
            Cell::Num(self.sigma_e),
            Cell::Num(self.theta0),
            Cell::Num(self.delta_pz_estimate),
            Cell::opt(self.delta_pz_classical),
            Cell::opt(self.delta_pz_quantum),
        ];
        for m in ClassicalModel::ALL {
            let d = self.classical_ds(m);
            c.extend((0..3).map(|k| Cell::opt(d.map(|d| d[k]))));
        }
        for k in SpinOperatorKind::ALL {
            let d = self.quantum_ds(k);
            c.extend((0..3).map(|i| Cell::opt(d.map(|d| d[i]))));
        }
        c.push(Cell::opt(self.norm_error));
        c.push(Cell::opt(self.tail_mass));
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Empty,
}

impl Cell {
    fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => format!("{x:e}"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Text(s) if s.is_empty() => serde_json::Value::Null,
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// The fixed output header.
pub fn columns() -> Vec<String> {
    let mut c: Vec<String> = [
        "config_hash",
        "scan_variable",
        "scan_value",
        "e_star",
        "omega",
        "n_c",
        "p_z",
        "dq",
        "s_e",
        "sigma_e",
        "theta0",
        "delta_pz_estimate",
        "delta_pz_classical",
        "delta_pz_quantum",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let lower = |s: &str| s.to_ascii_lowercase();
    for m in ClassicalModel::ALL {
        c.extend(["x", "y", "z"].map(|k| format!("{}_ds{k}", lower(m.name()))));
    }
    for op in SpinOperatorKind::ALL {
        c.extend(["x", "y", "z"].map(|k| format!("q_{}_ds{k}", lower(op.name()))));
    }
    c.push("norm_error".into());
    c.push("tail_mass".into());
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub points: usize,
    pub warnings: Vec<String>,
    pub max_norm_error: f64,
    pub max_tail_mass: f64,
    /// Diagnostics above threshold, one message per offending row.
    pub violations: Vec<String>,
}

impl Summary {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn write(&self, format: OutputFormat, w: impl Write) -> std::io::Result<()> {
        match format {
            OutputFormat::Csv => write_csv(&self.rows, w),
            OutputFormat::Json => write_json(&self.rows, w),
        }
    }
}

pub fn write_csv(rows: &[ResultRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "# format_version = {FORMAT_VERSION}")?;
    writeln!(w, "{}", columns().join(","))?;
    for r in rows {
        let line: Vec<String> = r.cells().iter().map(Cell::csv).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_json(rows: &[ResultRow], mut w: impl Write) -> std::io::Result<()> {
    let cols = columns();
    let rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            let obj: serde_json::Map<String, serde_json::Value> =
                cols.iter().cloned().zip(r.cells().iter().map(Cell::json)).collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    let doc = serde_json::json!({ "format_version": FORMAT_VERSION, "columns": cols, "rows": rows });
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)
}

fn point_label(var: Option<ScanVariable>, value: Option<f64>, pulse: &PulseParams, packet: &PacketSpec) -> String {
    match (var, value) {
        (Some(v), Some(x)) => format!("{} = {x}", v.name()),
        _ => format!("n_c = {}, p_z = {}, omega = {}, dq = {}", pulse.n_c, packet.p[2], pulse.omega, packet.dq),
    }
}

/// Computes one row.
pub fn run_point(
    config: &ExperimentConfig,
    hash: &str,
    scan_value: Option<f64>,
    params: PulseParams,
    packet: PacketSpec,
) -> Result<ResultRow> {
    let var = config.scan.as_ref().map(|s| s.variable);
    let label = point_label(var, scan_value, &params, &packet);
    let inner = || -> Result<ResultRow> {
        let pulse = Pulse::new(params)?;
        let c = pulse.c();
        let s0 = initial_spin(packet.p, packet.s, c);
        let mut row = ResultRow {
            config_hash: hash.to_string(),
            scan_variable: var,
            scan_value,
            e_star: params.e_star,
            omega: params.omega,
            n_c: params.n_c,
            p_z: packet.p[2],
            dq: packet.dq,
            s_e: pulse.area(),
            sigma_e: pulse.sigma(),
            theta0: s0[0].atan2(s0[2]),
            delta_pz_estimate: delta_pz_estimate(packet.p[2], pulse.area(), c),
            delta_pz_classical: None,
            delta_pz_quantum: None,
            classical: Vec::new(),
            quantum: Vec::new(),
            norm_error: None,
            tail_mass: None,
        };
        if !config.classical_models.is_empty() {
            let cl = run_classical(&pulse, packet.p, packet.s, &config.classical_models, &config.numerics.ode)?;
            row.delta_pz_classical = Some(cl.delta_pz);
            row.classical = cl.ds;
        }
        if !config.operators.is_empty() {
            let mut opts = config.numerics.quantum;
            opts.ode = config.numerics.ode;
            let q = run_quantum(&pulse, &packet, &config.operators, &opts)?;
            row.delta_pz_quantum = Some(q.delta_pz());
            row.quantum = q.reports.iter().map(|r| (r.operator, r.ds)).collect();
            row.norm_error = Some(q.norm_error);
            row.tail_mass = Some(q.tail_mass);
        }
        Ok(row)
    };
    inner().map_err(|e| e.at(label))
}

/// Runs every scan point in parallel; rows come back in input order.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let (points, warnings) = config.points()?;
    let hash = config.hash();
    let rows: Vec<ResultRow> = points
        .par_iter()
        .map(|(v, pulse, packet)| run_point(config, &hash, *v, *pulse, *packet))
        .collect::<Result<_>>()?;
    let mut summary = Summary {
        config_hash: hash,
        points: rows.len(),
        warnings,
        max_norm_error: 0.0,
        max_tail_mass: 0.0,
        violations: Vec::new(),
    };
    let tail_tol = config.numerics.quantum.tail_tol;
    for r in &rows {
        let label = point_label(r.scan_variable, r.scan_value, &config.pulse, &config.packet);
        if let Some(n) = r.norm_error {
            summary.max_norm_error = summary.max_norm_error.max(n);
            if n > NORM_THRESHOLD {
                summary.violations.push(format!("{label}: norm error {n:.3e} > {NORM_THRESHOLD:e}"));
            }
        }
        if let Some(t) = r.tail_mass {
            summary.max_tail_mass = summary.max_tail_mass.max(t);
            if t > tail_tol {
                summary.violations.push(format!("{label}: tail mass {t:.3e} > {tail_tol:e}"));
            }
        }
    }
    Ok(RunOutput { rows, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaRow {
    pub n_c: f64,
    pub s_e: f64,
    pub sigma_e: f64,
    /// Undefined when the field vanishes.
    pub unipolarity: Option<f64>,
}

/// S_E, σ_E and unipolarity over a list of N_c values.
pub fn area_rows(e_star: f64, omega: f64, c: f64, n_cs: &[f64]) -> Result<Vec<AreaRow>> {
    n_cs.par_iter()
        .map(|&n_c| {
            let pulse = Pulse::new(PulseParams { c, ..PulseParams::new(e_star, omega, n_c) })
                .map_err(|e| e.at(format!("n_c = {n_c}")))?;
            let unipolarity = match pulse.unipolarity() {
                Ok(u) => Some(u),
                Err(Error::DegeneratePulse(_)) => None,
                Err(e) => return Err(e.at(format!("n_c = {n_c}"))),
            };
            Ok(AreaRow { n_c, s_e: pulse.area(), sigma_e: pulse.sigma(), unipolarity })
        })
        .collect()
}

pub fn write_area(rows: &[AreaRow], format: OutputFormat, mut w: impl Write) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "# format_version = {FORMAT_VERSION}")?;
            writeln!(w, "n_c,s_e,sigma_e,unipolarity")?;
            for r in rows {
                let u = r.unipolarity.map(|u| format!("{u:e}")).unwrap_or_default();
                writeln!(w, "{:e},{:e},{:e},{u}", r.n_c, r.s_e, r.sigma_e)?;
            }
            Ok(())
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({ "format_version": FORMAT_VERSION, "rows": rows });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)
        }
    }
}
