//! `tempogauge <audit|spectrum|sweep> --config <file> [--out <dir>] [--format json|csv|both]`
//!
//! The config file is one flat JSON object: every lattice field plus the
//! run-level keys `command`, `chi`, `companion`, `sweep`, `out_dir` and
//! `format`. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::audit::{
    fit_sweep, render_text, run_audit, run_spectrum, sweep, write_claims_csv, write_sweep_csv, AuditError, AuditReport,
    SpectrumReport, SweepSpec, SCHEMA_VERSION,
};
use crate::config::{BosonBasis, Coupling, LatticeConfig};
use crate::constraint::calibrate_epsilon_r;
use crate::gauge::ChiSpec;
use crate::model::{build_model, Lattice, ModelOperators};

#[derive(Parser, Debug)]
#[command(name = "tempogauge", version, about = "Claim-check auditor for temporal-gauge lattice QED on a small periodic chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Run the CC-01 … CC-19 catalog and write report.json / report.txt / claims.csv.
    Audit(RunArgs),
    /// Physical ground level, Ω-pair energies and the two-state mixing.
    Spectrum(RunArgs),
    /// Audit a parameter grid in parallel; writes sweep.csv and fits.json.
    Sweep(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Both,
}

impl Format {
    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Audit,
    Spectrum,
    Sweep,
}

/// Second variant audited side by side with the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Companion {
    pub boson_basis: BosonBasis,
    pub coupling: Coupling,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub command: Option<CommandName>,
    pub chi: ChiSpec,
    pub companion: Option<Companion>,
    pub sweep: Option<SweepSpec>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    DimensionCap(String),
    #[error("output: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Violation(_) => 2,
            CliError::DimensionCap(_) => 3,
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        if e.is_violation() {
            CliError::Violation(e.to_string())
        } else if e.is_dimension_cap() {
            CliError::DimensionCap(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

fn field_error<E: std::fmt::Display>(field: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Config(format!("{field}: {e}"))
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::Config("top level must be a JSON object".into()));
    };
    let mut take = |key: &str| map.remove(key);
    let command = take("command").map(serde_json::from_value).transpose().map_err(field_error("command"))?;
    let chi = take("chi").map(serde_json::from_value).transpose().map_err(field_error("chi"))?.unwrap_or_default();
    let companion = take("companion").map(serde_json::from_value).transpose().map_err(field_error("companion"))?;
    let sweep = take("sweep").map(serde_json::from_value).transpose().map_err(field_error("sweep"))?;
    let out_dir = take("out_dir").map(serde_json::from_value).transpose().map_err(field_error("out_dir"))?;
    let format = take("format").map(serde_json::from_value).transpose().map_err(field_error("format"))?;
    let lattice: LatticeConfig =
        serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))?;
    lattice.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = RunConfig { lattice, command, chi, companion, sweep, out_dir, format };
    if let Some(c) = &cfg.companion {
        cfg.companion_lattice(c).validate().map_err(|e| CliError::Config(format!("companion: {e}")))?;
    }
    Ok(cfg)
}

impl RunConfig {
    fn companion_lattice(&self, c: &Companion) -> LatticeConfig {
        LatticeConfig { boson_basis: c.boson_basis.clone(), coupling: c.coupling, ..self.lattice.clone() }
    }

    /// The primary lattice and, when given, its companion variant.
    pub fn lattices(&self) -> Vec<LatticeConfig> {
        let mut out = vec![self.lattice.clone()];
        out.extend(self.companion.as_ref().map(|c| self.companion_lattice(c)));
        out
    }

    /// Fully resolved flat form, suitable for re-running.
    pub fn to_json(&self) -> Value {
        let mut map: Map<String, Value> = match serde_json::to_value(&self.lattice) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        };
        let mut put = |k: &str, v: Value| {
            map.insert(k.to_string(), v);
        };
        put("chi", serde_json::to_value(&self.chi).unwrap_or(Value::Null));
        if let Some(c) = self.command {
            put("command", serde_json::to_value(c).unwrap_or(Value::Null));
        }
        if let Some(c) = &self.companion {
            put("companion", serde_json::to_value(c).unwrap_or(Value::Null));
        }
        if let Some(s) = &self.sweep {
            put("sweep", serde_json::to_value(s).unwrap_or(Value::Null));
        }
        Value::Object(map)
    }
}

/// Two passes: `ε_R` from the unshifted constrained ground energy, then the
/// shifted model.
pub fn prepare(cfg: &LatticeConfig) -> Result<(Lattice, ModelOperators), CliError> {
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let lat = Lattice::new(cfg).map_err(AuditError::from)?;
    let epsilon_r = calibrate_epsilon_r(&lat).map_err(AuditError::from)?;
    let model = build_model(&lat, epsilon_r);
    Ok((lat, model))
}

pub fn audit_reports(cfg: &RunConfig) -> Result<Vec<AuditReport>, CliError> {
    cfg.lattices()
        .iter()
        .map(|lattice| {
            let (lat, model) = prepare(lattice)?;
            let chi = cfg
                .chi
                .resolve(lattice.n_sites, lattice.spacing, lattice.seed)
                .map_err(field_error("chi"))?;
            Ok(run_audit(&lat, &model, &chi)?)
        })
        .collect()
}

pub fn spectrum_reports(cfg: &RunConfig) -> Result<Vec<SpectrumReport>, CliError> {
    cfg.lattices()
        .iter()
        .map(|lattice| {
            let (lat, model) = prepare(lattice)?;
            let chi = cfg
                .chi
                .resolve(lattice.n_sites, lattice.spacing, lattice.seed)
                .map_err(field_error("chi"))?;
            Ok(run_spectrum(&lat, &model, &chi)?)
        })
        .collect()
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| CliError::Io(e.to_string()))
}

fn csv_bytes(result: csv::Result<()>, buf: Vec<u8>) -> Result<Vec<u8>, CliError> {
    result.map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

pub fn execute(command: CommandName, args: &RunArgs) -> Result<Vec<PathBuf>, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let cfg = parse_run_config(&text)?;
    if let Some(c) = cfg.command {
        if c != command {
            return Err(CliError::Config(format!("command: config says {c:?} but {command:?} was requested")));
        }
    }
    let out = args.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let format = args.format.or(cfg.format).unwrap_or_default();
    fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: Vec<u8>| -> Result<(), CliError> {
        let path = out.join(name);
        write(&path, contents)?;
        written.push(path);
        Ok(())
    };

    match command {
        CommandName::Audit => {
            let reports = audit_reports(&cfg)?;
            if format.json() {
                let doc = serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "run_config": cfg.to_json(),
                    "reports": reports,
                });
                emit("report.json", to_pretty(&doc)?.into_bytes())?;
                emit("report.txt", render_text(&reports).into_bytes())?;
            }
            if format.csv() {
                let mut buf = Vec::new();
                let r = write_claims_csv(&reports, &mut buf);
                emit("claims.csv", csv_bytes(r, buf)?)?;
            }
        }
        CommandName::Spectrum => {
            let reports = spectrum_reports(&cfg)?;
            if format.json() {
                let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "reports": reports });
                emit("spectrum.json", to_pretty(&doc)?.into_bytes())?;
            }
            if format.csv() {
                let mut buf = Vec::new();
                let r = write_spectrum_csv(&reports, &mut buf);
                emit("spectrum.csv", csv_bytes(r, buf)?)?;
            }
        }
        CommandName::Sweep => {
            let spec = cfg.sweep.clone().ok_or_else(|| CliError::Config("sweep: missing sweep grid".into()))?;
            if spec.is_empty() {
                return Err(CliError::Config("sweep: every range must be nonempty".into()));
            }
            let rows = sweep(&cfg.lattice, &spec);
            let mut buf = Vec::new();
            let r = write_sweep_csv(&rows, cfg.lattice.bch_order, &mut buf);
            emit("sweep.csv", csv_bytes(r, buf)?)?;
            emit("fits.json", to_pretty(&fit_sweep(&rows, cfg.lattice.bch_order))?.into_bytes())?;
        }
    }
    Ok(written)
}

fn write_spectrum_csv<W: std::io::Write>(reports: &[SpectrumReport], out: W) -> csv::Result<()> {
    use crate::audit::format_float;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variant", "quantity", "value"])?;
    for r in reports {
        let mut rows: Vec<(&str, f64)> = vec![
            ("epsilon_r", r.epsilon_r),
            ("e_min", r.ground.e_min),
            ("gap", r.ground.gap),
            ("e1", r.omega_pair.e1),
            ("e2", r.omega_pair.e2),
            ("mirror_residual", r.omega_pair.mirror_residual),
            ("premise_bound", r.omega_pair.premise_bound),
            ("coupling_residual_norm", r.coupling_residual_norm),
        ];
        if let Some(m) = &r.mix {
            rows.extend([("e_mixed", m.e_mixed), ("e_upper", m.e_upper), ("coupling_abs", m.coupling.norm())]);
        }
        for (k, v) in rows {
            w.write_record([r.variant.as_str(), k, &format_float(v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parses arguments, runs, and maps failures to the documented exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, args) = match &cli.command {
        Command::Audit(a) => (CommandName::Audit, a),
        Command::Spectrum(a) => (CommandName::Spectrum, a),
        Command::Sweep(a) => (CommandName::Sweep, a),
    };
    match execute(name, args) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_config_splits_into_lattice_and_run_keys() {
        let cfg = parse_run_config(
            r#"{"n_sites": 2, "boson_basis": {"kind": "electric", "flux_cutoff": 1}, "coupling": "covariant",
                "command": "audit", "chi": {"kind": "bump", "site": 1, "height": 0.2}}"#,
        )
        .unwrap();
        assert_eq!(cfg.lattice, LatticeConfig::electric(2, 1));
        assert_eq!(cfg.command, Some(CommandName::Audit));
        assert_eq!(cfg.chi, ChiSpec::Bump { site: 1, height: 0.2 });
        let again = parse_run_config(&cfg.to_json().to_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn config_errors_name_the_field() {
        let unknown = parse_run_config(
            r#"{"n_sites": 2, "boson_basis": {"kind": "electric", "flux_cutoff": 1}, "coupling": "covariant", "colour": 1}"#,
        )
        .unwrap_err();
        assert!(unknown.to_string().contains("colour"));
        let single = parse_run_config(
            r#"{"n_sites": 1, "boson_basis": {"kind": "electric", "flux_cutoff": 1}, "coupling": "covariant"}"#,
        )
        .unwrap_err();
        assert!(single.to_string().contains("n_sites ≥ 2"));
        assert_eq!(single.exit_code(), 1);
        let bad_chi = parse_run_config(
            r#"{"n_sites": 2, "boson_basis": {"kind": "electric", "flux_cutoff": 1}, "coupling": "covariant", "chi": {"kind": "wave"}}"#,
        )
        .unwrap_err();
        assert!(bad_chi.to_string().starts_with("config: chi"));
    }

    #[test]
    fn companion_runs_second_variant() {
        let cfg = parse_run_config(
            r#"{"n_sites": 2, "boson_basis": {"kind": "electric", "flux_cutoff": 1}, "coupling": "covariant",
                "companion": {"boson_basis": {"kind": "oscillator", "n_max": 2}, "coupling": "linear"}}"#,
        )
        .unwrap();
        let reports = audit_reports(&cfg).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[1].variant, "linear/oscillator");
    }

    #[test]
    fn dimension_cap_maps_to_exit_three() {
        let mut cfg = LatticeConfig::electric(2, 1);
        cfg.dim_cap = 10;
        assert_eq!(prepare(&cfg).unwrap_err().exit_code(), 3);
    }
}
