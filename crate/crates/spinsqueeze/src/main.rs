//! Command-line front end: protocol reports, scaling sweeps, the validation
//! suite, Monte-Carlo sampling experiments, and moment-table dumps.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinsqueeze::channel::ChannelParams;
use spinsqueeze::estimation::{log_spaced_grid, protocol_report, sweep};
use spinsqueeze::moments::{
    oat_table, output_moments, roat_moments, rotate_moments, SqueezingConfig,
};
use spinsqueeze::oracle::{mc_experiment, SamplePath};
use spinsqueeze::validate::{run_checks, run_checks_with_moment_override, ValidateOptions};

/// Environment variable naming the default output directory.
const OUTPUT_DIR_ENV: &str = "SPINSQUEEZE_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "spinsqueeze",
    version,
    about = "Joint phase and dephasing-strength estimation with twisted spin-squeezed probes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SqueezeArgs {
    /// Number of qubits.
    #[arg(long)]
    n: u64,
    /// Squeezing strength in radians (0 <= chi < pi/2).
    #[arg(long, conflicts_with = "p")]
    chi: Option<f64>,
    /// Scaling exponent: chi = n^p ("inf" encodes chi = 0).
    #[arg(long, value_parser = parse_exponent, conflicts_with = "chi", allow_hyphen_values = true)]
    p: Option<f64>,
}

impl SqueezeArgs {
    fn config(&self) -> Result<SqueezingConfig, spinsqueeze::Error> {
        match (self.chi, self.p) {
            (Some(chi), None) => SqueezingConfig::new(self.n, chi),
            (None, Some(p)) => SqueezingConfig::from_scaling(self.n, p),
            _ => Err(spinsqueeze::Error::InvalidParam(
                "exactly one of --chi and --p is required".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the full protocol at one parameter point (JSON report).
    Protocol {
        #[command(flatten)]
        squeeze: SqueezeArgs,
        /// Dephasing strength in [0, 1].
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Normalized-variance curves over a log-spaced grid of system sizes (CSV).
    Sweep {
        #[arg(long, default_value_t = 0.8)]
        eta: f64,
        /// Colon-separated exponents, e.g. "inf:-0.6667:-0.75:-0.8333".
        #[arg(long, default_value = "inf:-0.6667:-0.75:-0.8333", value_parser = parse_exponent_list, allow_hyphen_values = true)]
        p: ExponentList,
        #[arg(long, default_value_t = 100)]
        n_min: u64,
        #[arg(long, default_value_t = 100_000_000)]
        n_max: u64,
        /// Grid points per curve (log-spaced).
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Output format: csv (default) or json.
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the cross-module consistency suite (JSON; exit 1 on failure).
    Validate {
        /// Largest oracle size (<= 12).
        #[arg(long, default_value_t = 8)]
        n_max: u64,
        /// Absolute tolerance for moment comparisons.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Harness sanity fixture: corrupt one moment, e.g. "xx=1e-6".
        #[arg(long, hide = true, value_parser = parse_corruption)]
        inject_moment_error: Option<(String, f64)>,
    },
    /// Seeded Monte-Carlo estimation experiment (JSON).
    Sample {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        chi: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: usize,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dump an exact moment table (JSON).
    Moments {
        #[command(flatten)]
        squeeze: SqueezeArgs,
        /// Table frame: oat, roat, or output.
        #[arg(long, default_value = "roat")]
        frame: String,
        /// Required for the output frame.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        /// Rotation angle override for the oat frame (radians).
        #[arg(long)]
        rotate: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone)]
struct ExponentList(Vec<f64>);

fn parse_exponent(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| e.to_string())
            .and_then(|p| {
                if p > 0.0 {
                    Err(format!("scaling exponent must be <= 0, got {p}"))
                } else {
                    Ok(p)
                }
            }),
    }
}

fn parse_exponent_list(s: &str) -> Result<ExponentList, String> {
    let list = s
        .split(':')
        .map(parse_exponent)
        .collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err("empty exponent list".into());
    }
    Ok(ExponentList(list))
}

fn parse_corruption(s: &str) -> Result<(String, f64), String> {
    let (word, delta) = s.split_once('=').ok_or("expected WORD=DELTA")?;
    Ok((
        word.to_string(),
        delta.parse::<f64>().map_err(|e| e.to_string())?,
    ))
}

/// Format the exponent column: the chi = 0 sentinel is recorded literally.
fn format_exponent(p: f64) -> String {
    if p == f64::NEG_INFINITY {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

/// Write to the given path, the `SPINSQUEEZE_OUTPUT_DIR` default, or stdout.
fn emit(output: Option<&PathBuf>, default_name: &str, content: &str) -> std::io::Result<()> {
    let target = output.cloned().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(default_name))
    });
    match target {
        Some(path) => std::fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn run() -> Result<u8, Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::Protocol {
            squeeze,
            eta,
            output,
        } => {
            let config = squeeze.config().map_err(usage)?;
            ChannelParams::new(eta, 0.0).map_err(usage)?;
            let report = protocol_report(&config, eta)?;
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            emit(output.as_ref(), "protocol.json", &json)?;
            Ok(0)
        }
        Command::Sweep {
            eta,
            p,
            n_min,
            n_max,
            points,
            format,
            output,
        } => {
            if !(0.0..=1.0).contains(&eta) || n_min < 2 || n_max < n_min || points < 2 {
                return Err(usage(spinsqueeze::Error::InvalidParam(
                    "sweep needs eta in [0,1], n_max >= n_min >= 2, points >= 2".into(),
                ))
                .into());
            }
            let grid = log_spaced_grid(n_min, n_max, points);
            let records = sweep(eta, &p.0, &grid)?;
            match format.as_str() {
                "csv" => {
                    let mut csv = format!("# spinsqueeze {}\n", env!("CARGO_PKG_VERSION"));
                    csv.push_str("n,p,chi,eta,norm_var_eta,norm_var_phi\n");
                    for r in &records {
                        csv.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            r.n,
                            format_exponent(r.p),
                            r.chi,
                            r.eta,
                            r.norm_var_eta,
                            r.norm_var_phi
                        ));
                    }
                    emit(output.as_ref(), "sweep.csv", &csv)?;
                }
                "json" => {
                    let body = serde_json::json!({
                        "version": env!("CARGO_PKG_VERSION"),
                        "records": records,
                    });
                    let mut json = serde_json::to_string_pretty(&body)?;
                    json.push('\n');
                    emit(output.as_ref(), "sweep.json", &json)?;
                }
                other => {
                    return Err(usage(spinsqueeze::Error::InvalidParam(format!(
                        "unknown format {other:?} (expected csv or json)"
                    )))
                    .into())
                }
            }
            Ok(0)
        }
        Command::Validate {
            n_max,
            tol,
            output,
            inject_moment_error,
        } => {
            if !(4..=12).contains(&n_max) {
                return Err(usage(spinsqueeze::Error::InvalidParam(format!(
                    "--n-max must be in 4..=12, got {n_max}"
                )))
                .into());
            }
            let opts = ValidateOptions { n_max, tol };
            let report = match inject_moment_error {
                None => run_checks(opts)?,
                Some((word, delta)) => {
                    let target = spinsqueeze::moments::PauliWord::parse(&word).map_err(usage)?;
                    run_checks_with_moment_override(opts, &move |w, v| {
                        if *w == target {
                            v + delta
                        } else {
                            v
                        }
                    })?
                }
            };
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            emit(output.as_ref(), "validate.json", &json)?;
            if report.pass {
                Ok(0)
            } else {
                for check in report.failing() {
                    eprintln!(
                        "FAIL {}: max error {:.3e} exceeds {:.1e}",
                        check.name, check.max_error, check.tolerance
                    );
                }
                Ok(1)
            }
        }
        Command::Sample {
            n,
            chi,
            eta,
            phi,
            shots,
            reps,
            seed,
            output,
        } => {
            if n > 16 {
                return Err(usage(spinsqueeze::Error::InvalidParam(format!(
                    "--n must be at most 16 (got {n})"
                )))
                .into());
            }
            let params = ChannelParams::new(eta, phi).map_err(usage)?;
            let result = mc_experiment(n, chi, params, shots, reps, seed, SamplePath::Auto)?;
            let mut json = serde_json::to_string_pretty(&result)?;
            json.push('\n');
            emit(output.as_ref(), "sample.json", &json)?;
            Ok(0)
        }
        Command::Moments {
            squeeze,
            frame,
            eta,
            phi,
            rotate,
            output,
        } => {
            let config = squeeze.config().map_err(usage)?;
            let table = match frame.as_str() {
                "oat" => {
                    let t = oat_table(config.n(), config.chi());
                    match rotate {
                        Some(theta) => rotate_moments(&t, theta)?,
                        None => t,
                    }
                }
                "roat" => roat_moments(&config),
                "output" => {
                    let eta = eta.ok_or_else(|| {
                        usage(spinsqueeze::Error::InvalidParam(
                            "--eta is required for the output frame".into(),
                        ))
                    })?;
                    let params = ChannelParams::new(eta, phi).map_err(usage)?;
                    output_moments(&roat_moments(&config), params)?
                }
                other => {
                    return Err(usage(spinsqueeze::Error::InvalidParam(format!(
                        "unknown frame {other:?} (expected oat, roat, or output)"
                    )))
                    .into())
                }
            };
            let mut json = serde_json::to_string_pretty(&table.to_json())?;
            json.push('\n');
            emit(output.as_ref(), "moments.json", &json)?;
            Ok(0)
        }
    }
}

/// Marker for argument errors that must exit with the usage code.
#[derive(Debug)]
struct UsageError(spinsqueeze::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: spinsqueeze::Error) -> UsageError {
    UsageError(e)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
