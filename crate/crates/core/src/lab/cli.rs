//! Command-line front end. Exit status: 0 when every gating check passes,
//! 1 when a check fails, 2 for usage and input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::ambient::AmbientModel;
use crate::embedding::{is_symplectic_embedding, Embedding};
use crate::error::{Error, Result};
use crate::io::{load_embedding, load_grid_field, read_embedding_header, save_embedding};
use crate::moser::{MoserDiagnostics, MoserOptions};
use crate::surface::{AreaForm, TorusGrid};

use super::scenario::{load_scenario, AmbientSpec};
use super::{emit_report, Lab};

#[derive(Debug, Serialize)]
struct MoserSummary {
    residual: f64,
    converged: bool,
    tol: f64,
    diagnostics: MoserDiagnostics,
    embedding: PathBuf,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "symsurf", version, about = "Symplectic forms on embedded tori: verification runs and Moser normalisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the suites of a scenario and write a JSON report.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the tolerance multiplier.
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// Reparametrise an embedding so that it pulls ω back to σ.
    Moser {
        #[arg(long)]
        embedding: PathBuf,
        /// `unit`, a positive constant, or a grid-field file.
        #[arg(long)]
        sigma: String,
        /// Ambient model as JSON (`{"n": …, "omega": …, "eta": […]}`); standard if omitted.
        #[arg(long)]
        ambient: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Output embedding (header path; the payload goes next to it).
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON summary of the run.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Describe an embedding file.
    Info {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        ambient: Option<PathBuf>,
        /// `unit` (default), a positive constant, or a grid-field file.
        #[arg(long)]
        sigma: Option<String>,
    },
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Run {
            scenario,
            out: report_path,
            seed,
            tolerance_scale,
        } => {
            let mut sc = load_scenario(&scenario)?;
            if let Some(s) = seed {
                sc.fields.seed = s;
            }
            if let Some(t) = tolerance_scale {
                sc.tolerances.scale = t;
            }
            let base = scenario.parent().unwrap_or(Path::new("."));
            let report = Lab::new(sc, base)?.run();
            emit_report(&report, &report_path)?;
            write!(out, "{}", report.summary())?;
            Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Moser {
            embedding,
            sigma,
            ambient,
            steps,
            tol,
            out: target,
            report,
        } => {
            let f = load_with_model(&embedding, ambient.as_deref())?;
            let sigma = parse_sigma(&sigma, f.grid())?;
            let opts = MoserOptions {
                steps,
                tol,
                ..MoserOptions::default()
            };
            let r = crate::moser::moser_reparametrize_with(&f, &sigma, &opts)?;
            save_embedding(&r.embedding, &target)?;
            if let Some(path) = report {
                let summary = MoserSummary {
                    residual: r.residual,
                    converged: r.converged,
                    tol,
                    diagnostics: r.diagnostics,
                    embedding: target.clone(),
                };
                fs::write(path, serde_json::to_string_pretty(&summary)?)?;
            }
            writeln!(
                out,
                "residual {:e}, min jacobian {:.6}, {}",
                r.residual,
                r.diagnostics.min_jacobian,
                if r.converged { "converged" } else { "not converged" }
            )?;
            Ok(if r.converged { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Info {
            embedding,
            ambient,
            sigma,
        } => {
            let f = load_with_model(&embedding, ambient.as_deref())?;
            let sigma = parse_sigma(sigma.as_deref().unwrap_or("unit"), f.grid())?;
            writeln!(out, "{}", describe(&f, &sigma)?)?;
            Ok(EXIT_PASS)
        }
    }
}

/// Classification of `f` relative to `σ` on the first line, pullback
/// statistics on the second.
pub fn describe(f: &Embedding, sigma: &AreaForm) -> Result<String> {
    let check = is_symplectic_embedding(f, sigma, 1e-8)?;
    let s = f.pullback_density();
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stats = format!(
        "pullback density: min {}, max {}, mean {}; grid {}x{}; winding {:?}",
        f.min_pullback(),
        max,
        crate::surface::mean(s),
        f.grid().nx(),
        f.grid().ny(),
        f.winding()
    );
    let class = if check.is_symplectic {
        format!("symplectic embedding, residual {}", check.residual)
    } else if f.min_pullback() > 0.0 {
        format!("symplectic immersion with f*ω ≠ σ, residual {}", check.residual)
    } else {
        format!("immersion, not symplectic, min pullback density {}", f.min_pullback())
    };
    Ok(format!("{class}\n{stats}"))
}

fn load_with_model(path: &Path, ambient: Option<&Path>) -> Result<Embedding> {
    let model = match ambient {
        Some(p) => {
            let spec: AmbientSpec = serde_json::from_str(&fs::read_to_string(p)?)?;
            spec.build()?
        }
        None => AmbientModel::standard(read_embedding_header(path)?.n)?,
    };
    load_embedding(path, Arc::new(model))
}

fn parse_sigma(text: &str, grid: &TorusGrid) -> Result<AreaForm> {
    if text == "unit" {
        return Ok(AreaForm::unit(grid));
    }
    if let Ok(c) = text.parse::<f64>() {
        return AreaForm::constant(grid, c);
    }
    let (g, comps) = load_grid_field(Path::new(text))?;
    if &g != grid || comps.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "{text}: expected one component on a {}×{} grid",
            grid.nx(),
            grid.ny()
        )));
    }
    AreaForm::new(grid, comps.into_iter().next().expect("one component"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("symsurf").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["run"]).0, EXIT_USAGE);
        assert_eq!(call(&["info", "--embedding", "/no/such/file.json"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_PASS);
    }

    #[test]
    fn info_on_flat_embedding() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f0.json");
        let g = TorusGrid::square(16).unwrap();
        let f = Embedding::flat(Arc::new(AmbientModel::standard(2).unwrap()), &g).unwrap();
        save_embedding(&f, &path).unwrap();
        let (code, out, _) = call(&["info", "--embedding", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_PASS);
        assert_eq!(out.lines().next().unwrap(), "symplectic embedding, residual 0");
        assert!(out.contains("pullback density: min 1"));
        let (_, out, _) = call(&["info", "--embedding", path.to_str().unwrap(), "--sigma", "2"]);
        assert!(out.starts_with("symplectic immersion"));
    }

    #[test]
    fn moser_subcommand_normalises_sheared_embedding() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fa.json");
        let out_path = dir.path().join("g.json");
        let g = TorusGrid::square(32).unwrap();
        let f = Embedding::sheared(Arc::new(AmbientModel::standard(2).unwrap()), &g, 0.3).unwrap();
        save_embedding(&f, &path).unwrap();
        let (code, out, err) = call(&[
            "moser",
            "--embedding",
            path.to_str().unwrap(),
            "--sigma",
            "unit",
            "--tol",
            "1e-3",
            "--out",
            out_path.to_str().unwrap(),
            "--report",
            dir.path().join("r.json").to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_PASS, "{out}{err}");
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
        assert_eq!(summary["converged"], true);
        let (_, info, _) = call(&["info", "--embedding", out_path.to_str().unwrap()]);
        assert!(info.contains("immersion") || info.contains("embedding"));
        let (code, _, err) = call(&[
            "moser",
            "--embedding",
            path.to_str().unwrap(),
            "--sigma",
            "2.0",
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("area"), "{err}");
    }
}
