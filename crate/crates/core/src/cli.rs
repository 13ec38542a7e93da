//! Command-line front end.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::exec::Execution;
use crate::lifshitz::{casimir_energy, casimir_force};
use crate::materials::MaterialSystem;
use crate::quadrature::QuadratureSpec;
use crate::retarded::{force_retarded, psi, psi_exact_series};
use crate::sign_atlas::{
    border_m3, border_scan, log_grid, sweep, write_sweep_csv, write_sweep_json, BorderOptions,
    BorderPoint, Classification, DEFAULT_M3_RANGE,
};
use crate::verify::{run_all, SuiteSizes};

pub const THREADS_ENV: &str = "CASIMIR_ANISO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "casimir-aniso",
    version,
    about = "Casimir force between isotropic plates across a uniaxial gap"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MaterialArgs {
    /// Material system JSON file.
    #[arg(long, conflicts_with_all = ["eps1", "eps2", "eps3x", "eps3z"])]
    pub material: Option<PathBuf>,
    /// Static permittivity of plate 1.
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Static permittivity of plate 2.
    #[arg(long)]
    pub eps2: Option<f64>,
    /// Static in-plane permittivity of the gap.
    #[arg(long)]
    pub eps3x: Option<f64>,
    /// Static out-of-plane permittivity of the gap.
    #[arg(long)]
    pub eps3z: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Method {
    /// Full imaginary-frequency integral.
    #[default]
    Lifshitz,
    /// Large-separation asymptote (static permittivities only).
    Retarded,
}

#[derive(Debug, Args)]
pub struct Ratios {
    #[arg(long)]
    pub m1: f64,
    #[arg(long)]
    pub m2: f64,
    #[arg(long)]
    pub m3: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Force per unit area (N/m^2, positive = attractive).
    #[command(allow_negative_numbers = true)]
    Force {
        #[command(flatten)]
        material: MaterialArgs,
        /// Separation(s) in metres, comma separated.
        #[arg(
            long = "a",
            required = true,
            value_delimiter = ',',
            num_args = 1,
            allow_hyphen_values = true
        )]
        separations: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Method::Lifshitz)]
        method: Method,
    },
    /// Energy per unit area (J/m^2).
    #[command(allow_negative_numbers = true)]
    Energy {
        #[command(flatten)]
        material: MaterialArgs,
        /// Separation(s) in metres, comma separated.
        #[arg(
            long = "a",
            required = true,
            value_delimiter = ',',
            num_args = 1,
            allow_hyphen_values = true
        )]
        separations: Vec<f64>,
    },
    /// Large-separation factor psi and its TE/TM parts.
    #[command(allow_negative_numbers = true)]
    Psi {
        #[command(flatten)]
        ratios: Ratios,
        /// Use the exact polylogarithm series instead of the leading term.
        #[arg(long)]
        exact: bool,
    },
    /// Table of psi over M2 and M3 grids at fixed M1.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        m1: f64,
        /// M2 values, comma separated.
        #[arg(long, required = true, value_delimiter = ',', num_args = 1)]
        m2: Vec<f64>,
        /// Explicit M3 values, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with_all = ["m3_min", "m3_max", "m3_points"])]
        m3: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_M3_RANGE.0)]
        m3_min: f64,
        #[arg(long, default_value_t = DEFAULT_M3_RANGE.1)]
        m3_max: f64,
        #[arg(long, default_value_t = 40)]
        m3_points: usize,
    },
    /// Points of the psi = 0 border in M3.
    #[command(allow_negative_numbers = true)]
    Border {
        #[arg(long)]
        m1: f64,
        /// M2 values, comma separated.
        #[arg(long, required = true, value_delimiter = ',', num_args = 1)]
        m2: Vec<f64>,
        /// Bisect inside this bracket instead of scanning.
        #[arg(long, value_delimiter = ',', num_args = 1, value_name = "LO,HI")]
        bracket: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_M3_RANGE.0)]
        m3_min: f64,
        #[arg(long, default_value_t = DEFAULT_M3_RANGE.1)]
        m3_max: f64,
        #[arg(long, default_value_t = 60)]
        scan_points: usize,
    },
    /// Run the cross-check suites; exit 0 iff all pass.
    Verify,
}

/// Failure to run: usage (exit 2) or computation (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute { kind: &'static str, message: String },
}

impl Failure {
    fn compute(kind: &'static str, e: impl std::fmt::Display) -> Self {
        Failure::Compute {
            kind,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute { .. } => 1,
        }
    }
}

fn load_material(m: &MaterialArgs) -> Result<MaterialSystem, Failure> {
    if let Some(path) = &m.material {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        return MaterialSystem::from_json(&text)
            .map_err(|e| Failure::Usage(format!("invalid material file {}: {e}", path.display())));
    }
    match (m.eps1, m.eps2, m.eps3x, m.eps3z) {
        (Some(e1), Some(e2), Some(e3x), Some(e3z)) => {
            Ok(MaterialSystem::constant(e1, e2, e3x, e3z))
        }
        _ => Err(Failure::Usage(
            "material needs --material FILE or all of --eps1 --eps2 --eps3x --eps3z".into(),
        )),
    }
}

fn quadrature(common: &Common, execution: Execution) -> Result<QuadratureSpec, Failure> {
    let mut spec = QuadratureSpec::default().with_execution(execution);
    if let Some(r) = common.rel_tol {
        spec.rel_tol = r;
    }
    if let Some(a) = common.abs_tol {
        spec.abs_tol = a;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

#[derive(Serialize)]
struct QuantityRow {
    value: f64,
    error_estimate: f64,
    separation: f64,
    converged: bool,
    units: &'static str,
}

fn emit_quantities(
    rows: &[QuantityRow],
    quantity: &str,
    units: &'static str,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::compute("io", e);
    match format {
        Format::Csv => {
            writeln!(
                out,
                "# units: separation in m, {quantity} and error_estimate in {units}"
            )
            .map_err(io)?;
            writeln!(out, "separation,{quantity},error_estimate,converged").map_err(io)?;
            for r in rows {
                writeln!(
                    out,
                    "{:e},{:e},{:e},{}",
                    r.separation, r.value, r.error_estimate, r.converged
                )
                .map_err(io)?;
            }
        }
        Format::Json => {
            let text = if rows.len() == 1 {
                serde_json::to_string_pretty(&rows[0])
            } else {
                serde_json::to_string_pretty(rows)
            }
            .map_err(|e| Failure::compute("io", e))?;
            writeln!(out, "{text}").map_err(io)?;
        }
    }
    Ok(())
}

fn not_converged(rows: &[QuantityRow]) -> Result<(), Failure> {
    match rows.iter().find(|r| !r.converged) {
        Some(r) => Err(Failure::compute(
            "non_convergence",
            format!(
                "quadrature did not reach tolerance at separation {}",
                r.separation
            ),
        )),
        None => Ok(()),
    }
}

fn run_command(cli: &Cli, execution: Execution, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = quadrature(&cli.common, execution)?;
    let format = cli.common.format;
    let io = |e: std::io::Error| Failure::compute("io", e);
    match &cli.command {
        Command::Force {
            material,
            separations,
            method,
        } => {
            let sys = load_material(material)?;
            let mut rows = Vec::new();
            for &a in separations {
                let f =
                    match method {
                        Method::Lifshitz => casimir_force(&sys, a, &spec)
                            .map_err(|e| Failure::compute("domain", e))?,
                        Method::Retarded => force_retarded(&sys, a, &spec)
                            .map_err(|e| Failure::compute("domain", e))?,
                    };
                rows.push(QuantityRow {
                    value: f.value,
                    error_estimate: f.error_estimate,
                    separation: f.separation,
                    converged: f.converged,
                    units: "N/m^2",
                });
            }
            emit_quantities(&rows, "force", "N/m^2", format, out)?;
            not_converged(&rows)
        }
        Command::Energy {
            material,
            separations,
        } => {
            let sys = load_material(material)?;
            let mut rows = Vec::new();
            for &a in separations {
                let e =
                    casimir_energy(&sys, a, &spec).map_err(|e| Failure::compute("domain", e))?;
                rows.push(QuantityRow {
                    value: e.value,
                    error_estimate: e.error_estimate,
                    separation: e.separation,
                    converged: e.converged,
                    units: "J/m^2",
                });
            }
            emit_quantities(&rows, "energy", "J/m^2", format, out)?;
            not_converged(&rows)
        }
        Command::Psi { ratios, exact } => {
            let Ratios { m1, m2, m3 } = *ratios;
            let b = if *exact {
                psi_exact_series(m1, m2, m3, &spec)
            } else {
                psi(m1, m2, m3, &spec)
            }
            .map_err(|e| Failure::compute("domain", e))?;
            let label = Classification::from_breakdown(&b).label.as_str();
            match format {
                Format::Csv => {
                    writeln!(out, "# units: all columns dimensionless").map_err(io)?;
                    writeln!(out, "m1,m2,m3,psi,psi1,psi2,label,error_estimate").map_err(io)?;
                    writeln!(
                        out,
                        "{m1},{m2},{m3},{:e},{:e},{:e},{label},{:e}",
                        b.psi, b.psi1, b.psi2, b.error_estimate
                    )
                    .map_err(io)?;
                }
                Format::Json => {
                    let v = json!({
                        "m1": m1, "m2": m2, "m3": m3,
                        "psi": b.psi, "psi1": b.psi1, "psi2": b.psi2,
                        "label": label, "error_estimate": b.error_estimate,
                        "units": "dimensionless",
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap()).map_err(io)?;
                }
            }
            if b.converged {
                Ok(())
            } else {
                Err(Failure::compute(
                    "non_convergence",
                    "psi quadrature did not reach tolerance",
                ))
            }
        }
        Command::Sweep {
            m1,
            m2,
            m3,
            m3_min,
            m3_max,
            m3_points,
        } => {
            let m3_grid = match m3 {
                Some(v) => v.clone(),
                None => log_grid(*m3_min, *m3_max, *m3_points)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
            };
            let result = sweep(*m1, m2, &m3_grid, &spec, execution)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            match format {
                Format::Csv => write_sweep_csv(&result, &mut *out),
                Format::Json => write_sweep_json(&result, &mut *out),
            }
            .map_err(|e| Failure::compute("io", e))?;
            match result.rows.iter().find_map(|r| r.error.clone()) {
                Some(msg) => Err(Failure::compute(
                    "row_failure",
                    format!("{} sweep rows failed; first: {msg}", result.failed()),
                )),
                None => Ok(()),
            }
        }
        Command::Border {
            m1,
            m2,
            bracket,
            m3_min,
            m3_max,
            scan_points,
        } => {
            let opts = BorderOptions::default();
            if let Some(b) = bracket {
                if b.len() != 2 {
                    return Err(Failure::Usage(format!(
                        "--bracket needs LO,HI, got {} values",
                        b.len()
                    )));
                }
            }
            let mut points: Vec<BorderPoint> = Vec::new();
            for &m2 in m2 {
                let found = match bracket {
                    Some(b) => vec![border_m3(*m1, m2, (b[0], b[1]), &spec, &opts)
                        .map_err(|e| Failure::compute("domain", e))?],
                    None => border_scan(
                        *m1,
                        m2,
                        (*m3_min, *m3_max),
                        *scan_points,
                        &spec,
                        &opts,
                        execution,
                    )
                    .map_err(|e| Failure::compute("domain", e))?,
                };
                points.extend(found);
            }
            write_border(&points, format, out)
        }
        Command::Verify => {
            let reports = run_all(&SuiteSizes::default(), &spec);
            let all = reports.iter().all(|r| r.passed);
            match format {
                Format::Csv => {
                    writeln!(
                        out,
                        "# units: worst and threshold are relative discrepancies (dimensionless)"
                    )
                    .map_err(io)?;
                    writeln!(out, "suite,status,samples,worst,threshold,detail").map_err(io)?;
                    for r in &reports {
                        let status = if r.passed { "PASS" } else { "FAIL" };
                        writeln!(
                            out,
                            "{},{status},{},{:e},{:e},{}",
                            r.name, r.samples, r.worst, r.threshold, r.detail
                        )
                        .map_err(io)?;
                    }
                }
                Format::Json => {
                    let v = json!({ "passed": all, "suites": reports, "units": "dimensionless" });
                    writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap()).map_err(io)?;
                }
            }
            if all {
                Ok(())
            } else {
                Err(Failure::compute(
                    "verification",
                    "one or more suites failed",
                ))
            }
        }
    }
}

fn write_border(
    points: &[BorderPoint],
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::compute("io", e);
    match format {
        Format::Csv => {
            writeln!(out, "# units: all columns dimensionless").map_err(io)?;
            let mut w = csv::Writer::from_writer(&mut *out);
            for p in points {
                w.serialize(p).map_err(|e| Failure::compute("io", e))?;
            }
            w.flush().map_err(io)?;
        }
        Format::Json => {
            let rows: Vec<_> = points
                .iter()
                .map(|p| {
                    let mut v = serde_json::to_value(p).unwrap();
                    v["units"] = json!("dimensionless");
                    v
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap()).map_err(io)?;
        }
    }
    Ok(())
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(cap: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    match cap {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::compute("threads", e))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(_cap: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    Ok(f())
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::to_string(&json!({ "error": { "kind": kind, "message": message } })).unwrap()
}

/// Runs the CLI on `args` (including the program name), writing results to
/// `stdout` or `--output` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let format = cli.common.format;
    let outcome = thread_cap().and_then(|cap| {
        let execution = Execution::default();
        let mut buf: Vec<u8> = Vec::new();
        let res = with_threads(cap, || run_command(&cli, execution, &mut buf))?;
        Ok((buf, res))
    });
    let (buf, res) = match outcome {
        Ok(v) => v,
        Err(f) => (Vec::new(), Err(f)),
    };

    let write_target = |bytes: &[u8], stdout: &mut dyn Write| -> Result<(), Failure> {
        match &cli.common.output {
            Some(path) => fs::write(path, bytes)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
            None => stdout
                .write_all(bytes)
                .map_err(|e| Failure::compute("io", e)),
        }
    };

    let res = match res {
        Ok(()) => write_target(&buf, stdout),
        Err(f) => {
            if !buf.is_empty() {
                let _ = write_target(&buf, stdout);
            }
            Err(f)
        }
    };
    match res {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                }
                Failure::Compute { kind, message } => {
                    let _ = writeln!(stderr, "error: {message}");
                    if format == Format::Json {
                        let _ = writeln!(stdout, "{}", error_json(kind, message));
                    }
                }
            }
            f.exit_code()
        }
    }
}
