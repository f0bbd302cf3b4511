//! Command-line front end: config parsing, orchestration and report output.

mod commands;
mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{
    left_eigenrow_defect, random_amplitudes, run, spectrum, sweep_sub_n, ths_checks, ths_verify, RunOptions,
};
pub use config::{parse_config, parse_config_value, Checks, Format, OutputConfig, RunConfig, SolverConfig};
pub use report::{
    write_atomic, AmplitudeRow, CheckStatus, Defect, ErrorReport, RunReport, SpectrumComparison, SweepRow,
    SCHEMA_VERSION,
};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ccm-ths", version, about = "Coupled-cluster ground states with metric-operator checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir` from the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Enable oracle cross-checks.
    #[arg(long)]
    pub verify: bool,
    /// Seed for randomized verification draws.
    #[arg(long, default_value_t = 0, value_name = "N")]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the ket and bra equations and run the configured checks.
    Solve(CommonArgs),
    /// Solve at every SUB-n level and tabulate errors against the exact energy.
    SweepSubn(CommonArgs),
    /// Metric, re-Hermitization, doublet and dictionary checks.
    ThsVerify {
        #[command(flatten)]
        common: CommonArgs,
        /// Reuse the amplitudes of an earlier `solve` report instead of solving.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Exact spectrum of the model Hamiltonian.
    Spectrum(CommonArgs),
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    Ok(parse_config(&text)?)
}

/// Execute a parsed command line; returns the report and the exit code.
pub fn execute(cli: &Cli) -> Result<(RunReport, i32, PathBuf, RunConfig)> {
    let (common, previous) = match &cli.command {
        Command::Solve(c) | Command::SweepSubn(c) | Command::Spectrum(c) => (c, None),
        Command::ThsVerify { common, report } => (common, report.as_ref()),
    };
    let config = load_config(&common.config)?;
    let opts = RunOptions {
        verify: common.verify,
        seed: common.seed,
    };
    let mut report = match &cli.command {
        Command::Solve(_) => run(&config, &opts),
        Command::SweepSubn(_) => sweep_sub_n(&config, &opts),
        Command::Spectrum(_) => spectrum(&config, &opts),
        Command::ThsVerify { .. } => {
            let prev = match previous {
                Some(p) => Some(serde_json::from_str::<RunReport>(&fs::read_to_string(p)?)?),
                None => None,
            };
            ths_verify(&config, &opts, prev.as_ref())
        }
    };
    let code = report.finish();
    let dir = common.out.clone().unwrap_or_else(|| config.output.dir.clone());
    Ok((report, code, dir, config))
}

/// Write the JSON report and the CSV tables requested by the config.
pub fn write_outputs(report: &RunReport, dir: &Path, output: &OutputConfig) -> Result<Vec<PathBuf>> {
    let stem = report.command.replace('-', "_");
    let mut written = Vec::new();
    if output.wants(Format::Json) {
        let p = dir.join(format!("{stem}.json"));
        write_atomic(&p, report.to_json_string().as_bytes())?;
        written.push(p);
    }
    if output.wants(Format::Csv) {
        for (name, body) in csv_tables(report) {
            let p = dir.join(name);
            write_atomic(&p, body.as_bytes())?;
            written.push(p);
        }
    }
    Ok(written)
}

fn csv_tables(r: &RunReport) -> Vec<(String, String)> {
    use report::{csv, opt};
    let mut out = Vec::new();
    if let Some(e) = &r.energy {
        out.push((
            "energy.csv".into(),
            csv(
                &["model", "dimension", "energy", "energy_imag", "exact_energy", "newton_steps"],
                &[vec![
                    format!("\"{}\"", r.model),
                    r.dimension.to_string(),
                    e.value.to_string(),
                    e.imaginary.to_string(),
                    opt(r.exact_energy),
                    opt(r.newton_steps),
                ]],
            ),
        ));
    }
    if !r.ket_amplitudes.is_empty() {
        let rows: Vec<Vec<String>> = r
            .ket_amplitudes
            .iter()
            .zip(&r.bra_amplitudes)
            .map(|(k, b)| {
                vec![
                    k.ordinal.to_string(),
                    format!("\"{}\"", k.label),
                    k.level.to_string(),
                    k.value[0].to_string(),
                    k.value[1].to_string(),
                    b.value[0].to_string(),
                    b.value[1].to_string(),
                ]
            })
            .collect();
        out.push((
            "amplitudes.csv".into(),
            csv(&["ordinal", "label", "level", "ket_re", "ket_im", "bra_re", "bra_im"], &rows),
        ));
    }
    if !r.sweep.is_empty() {
        let rows: Vec<Vec<String>> = r
            .sweep
            .iter()
            .map(|s| {
                vec![
                    s.n.to_string(),
                    s.size.to_string(),
                    opt(s.energy),
                    opt(s.error),
                    opt(s.iterations),
                    s.failure.as_ref().map(|f| f.kind.clone()).unwrap_or_else(|| "ok".into()),
                ]
            })
            .collect();
        out.push((
            "sweep.csv".into(),
            csv(&["n", "amplitudes", "energy", "abs_error", "newton_steps", "status"], &rows),
        ));
    }
    if !r.spectrum.is_empty() {
        let rows: Vec<Vec<String>> = r
            .spectrum
            .iter()
            .enumerate()
            .map(|(k, e)| vec![k.to_string(), e.to_string()])
            .collect();
        out.push(("spectrum.csv".into(), csv(&["index", "eigenvalue"], &rows)));
    }
    out
}

/// Short human-readable summary.
pub fn summary(report: &RunReport) -> String {
    let mut s = format!("{} [{}] {} (D={})\n", report.command, report.status, report.model, report.dimension);
    if let Some(e) = &report.error {
        s += &format!("  error {}: {}\n", e.kind, e.message);
    }
    if let Some(e) = &report.energy {
        s += &format!("  E = {:.12}", e.value);
        if let Some(x) = report.exact_energy {
            s += &format!("   exact {:.12}   |ΔE| = {:.2e}", x, (e.value - x).abs());
        }
        s += "\n";
    }
    if !report.sweep.is_empty() {
        s += &format!("  {:>3} {:>6} {:>20} {:>10} {:>6}\n", "n", "size", "E_n", "|ΔE|", "steps");
        for row in &report.sweep {
            s += &format!(
                "  {:>3} {:>6} {:>20} {:>10} {:>6}\n",
                row.n,
                row.size,
                row.energy.map(|e| format!("{e:.12}")).unwrap_or_else(|| "-".into()),
                row.error.map(|e| format!("{e:.2e}")).unwrap_or_else(|| "-".into()),
                row.iterations.map(|e| e.to_string()).unwrap_or_else(|| {
                    row.failure.as_ref().map(|f| f.kind.clone()).unwrap_or_default()
                }),
            );
        }
    }
    if !report.spectrum.is_empty() {
        let shown: Vec<String> = report.spectrum.iter().take(6).map(|e| format!("{e:.10}")).collect();
        s += &format!("  lowest eigenvalues: {}\n", shown.join(", "));
    }
    for d in &report.defects {
        let status = match d.status {
            CheckStatus::Passed => "pass",
            CheckStatus::Failed => "FAIL",
            CheckStatus::Skipped => "skip",
        };
        let value = d.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        s += &format!("  [{status}] {:<32} {:>10} (tol {:.0e})", d.name, value, d.tolerance);
        if let Some(n) = &d.note {
            if d.status != CheckStatus::Passed {
                s += &format!("  {n}");
            }
        }
        s += "\n";
    }
    for c in &report.spectra {
        let status = if c.status == CheckStatus::Passed { "pass" } else { "FAIL" };
        s += &format!(
            "  [{status}] spectrum {:<23} {:>10.3e} (tol {:.0e})\n",
            c.name, c.max_deviation, c.tolerance
        );
    }
    s
}

/// Binary entry point; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((report, code, dir, config)) => {
            print!("{}", summary(&report));
            match write_outputs(&report, &dir, &config.output) {
                Ok(paths) => {
                    for p in paths {
                        println!("  wrote {}", p.display());
                    }
                    code
                }
                Err(e) => {
                    eprintln!("error: cannot write outputs: {e}");
                    1
                }
            }
        }
        Err(Error::Schema(e)) => {
            eprintln!("error: invalid configuration at `{}`: {}", e.path, e.reason);
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
