//! Scenario-driven verification runs.
//!
//! A [`Scenario`] names an ambient model, grid, area form, embedding and a
//! list of suites. [`Lab::run`] executes the suites and collects a
//! [`RunReport`] of per-check residuals against the scenario tolerances.

pub mod cli;
pub mod probe;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod suites;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::ambient::{AmbientModel, FourierTerm, OneFormTerm};
use crate::embedding::{is_symplectic_embedding, Embedding};
use crate::error::Result;
use crate::surface::{AreaForm, TorusGrid};

pub use report::{emit_report, load_report, Bound, CheckRecord, Environment, LemmaTag, Observation, RunReport, SuiteReport};
pub use scenario::{load_scenario, save_scenario, Scenario, Tolerances, ALL_SUITES};

/// Everything a suite needs, built once from a scenario.
pub struct Lab {
    pub scenario: Scenario,
    pub model: Arc<AmbientModel>,
    pub grid: TorusGrid,
    pub f: Embedding,
    pub sigma: AreaForm,
    /// Tolerances after applying `scale`.
    pub tol: Tolerances,
    /// `‖f*ω − σ‖∞` of the scenario pair.
    pub symplectic_residual: f64,
}

impl Lab {
    /// Relative file references resolve against `base_dir`.
    pub fn new(scenario: Scenario, base_dir: &Path) -> Result<Self> {
        scenario.validate()?;
        let model = Arc::new(scenario.ambient.build()?);
        let grid = scenario.grid.build()?;
        let f = scenario.embedding.build(model.clone(), &grid, base_dir)?;
        let sigma = scenario.sigma.build(&grid, &f, base_dir)?;
        let symplectic_residual = is_symplectic_embedding(&f, &sigma, 0.0)?.residual;
        let tol = scenario.tolerances.scaled();
        Ok(Self {
            scenario,
            model,
            grid,
            f,
            sigma,
            tol,
            symplectic_residual,
        })
    }

    pub fn seed(&self) -> u64 {
        self.scenario.fields.seed
    }

    /// The scenario model, or the base form with a built-in `η` when the
    /// scenario model is constant.
    pub fn perturbed_model(&self) -> Result<Arc<AmbientModel>> {
        if !self.model.is_constant() {
            return Ok(self.model.clone());
        }
        let n = self.model.half_dim();
        let dim = 2 * n;
        let eps = self.scenario.numerics.fallback_eta;
        let mut k = vec![0; dim];
        k[0] = 1;
        let mut k2 = vec![0; dim];
        k2[1] = 1;
        k2[2] = 1;
        let eta = vec![
            OneFormTerm::new(dim - 1, FourierTerm::sine(k, eps / (2.0 * std::f64::consts::PI))),
            OneFormTerm::new(0, FourierTerm::cosine(k2, eps / (4.0 * std::f64::consts::PI))),
        ];
        Ok(Arc::new(self.model.with_perturbation(eta)?))
    }

    pub fn environment(&self) -> Environment {
        Environment {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            nx: self.grid.nx(),
            ny: self.grid.ny(),
            n: self.model.half_dim(),
            seed: self.seed(),
            tolerance_scale: self.scenario.tolerances.scale,
        }
    }

    /// Runs one suite; failures to complete become a failed suite report.
    pub fn run_suite(&self, name: &str) -> SuiteReport {
        suites::run(self, name)
    }

    /// Runs every requested suite (in parallel, reported in scenario order).
    pub fn run(&self) -> RunReport {
        let suites: Vec<SuiteReport> = self.scenario.suites.par_iter().map(|s| self.run_suite(s)).collect();
        let pass = suites.iter().all(|s| s.pass || !s.gating);
        RunReport {
            schema_version: report::REPORT_SCHEMA_VERSION,
            scenario_digest: self.scenario.digest(),
            environment: self.environment(),
            suites,
            pass,
        }
    }
}

/// Loads, validates and runs a scenario file.
pub fn run_scenario_file(path: &Path) -> Result<RunReport> {
    let scenario = load_scenario(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    Ok(Lab::new(scenario, &base)?.run())
}
