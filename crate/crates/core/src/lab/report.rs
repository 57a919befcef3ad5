//! Machine-readable run reports.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scenario::hex;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The statement a check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaTag {
    /// `ω_S = 2ω^D` on exact × closed pairs.
    ExactCoincidence,
    /// The `ω_S` integrand vanishes against tangential fields.
    TangentialDegeneracy,
    /// Hamiltonian restrictions have exact `α`.
    HamiltonianIsExact,
    /// Exact fields pair to zero with σ-Hamiltonian tangential fields.
    ExactPairsToZero,
    /// ω-orthogonal fields have exact (zero) `α`.
    OrthogonalIsExact,
    /// Report-only search for counterexamples to the converse.
    ConverseProbe,
    SplittingReconstruction,
    SplittingOrthogonality,
    SplittingIdempotence,
    /// Tangential coefficients of closed fields preserve `σ`.
    TangentialCoefficientsPreserveArea,
    Tamedness,
    Compatibility,
    /// `ω^D` is unchanged by σ-preserving reparametrisation.
    ReparametrizationInvariance,
    /// `ω^D` is unchanged by ambient Hamiltonian flows.
    HamiltonianInvariance,
    /// A non-area-preserving reparametrisation breaks `f*ω = σ`.
    NonSymplecticReparametrization,
    /// The reduced pairing ignores σ-Hamiltonian tangential additions.
    ReductionWellDefined,
    /// `∫{ψ₁, ψ₂}σ = 0`.
    BracketIntegral,
    /// The reduced `ω_S` is twice the reduced `ω^D`.
    ReducedFactorTwo,
    CauchyRiemann,
    JPreservesTangentPlane,
    JPreservesOrthogonality,
    JCommutesWithSplitting,
    /// Holomorphic symplectomorphisms keep `f` symplectic and holomorphic.
    HolomorphicComposition,
    /// `ω^D(ξ, J̃ξ) > 0` for nonzero orthogonal parts.
    OrthogonalPositivity,
    /// `J̃` maps holomorphic variations to holomorphic variations.
    HolomorphicVariationClosure,
    /// Finite-difference `dω^D` decays at second order.
    Closedness,
    MoserNormalization,
    MoserOracle,
    MoserAreaObstruction,
    MoserIdempotence,
}

/// How a residual is compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "comparison", rename_all = "snake_case")]
pub enum Bound {
    AtMost { tolerance: f64 },
    GreaterThan { threshold: f64 },
    Within { low: f64, high: f64 },
}

impl Bound {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            Bound::AtMost { tolerance } => value <= tolerance,
            Bound::GreaterThan { threshold } => value > threshold,
            Bound::Within { low, high } => (low..=high).contains(&value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub tag: LemmaTag,
    pub check: String,
    /// Digest of the labels and seed that determine the inputs.
    pub inputs_digest: String,
    pub residual: f64,
    #[serde(flatten)]
    pub bound: Bound,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(tag: LemmaTag, check: impl Into<String>, inputs: &str, residual: f64, bound: Bound) -> Self {
        Self {
            tag,
            check: check.into(),
            inputs_digest: inputs_digest(inputs),
            residual,
            pass: bound.holds(residual),
            bound,
        }
    }
}

pub fn inputs_digest(inputs: &str) -> String {
    hex(&Sha256::digest(inputs.as_bytes())[..8])
}

/// A value reported without a pass/fail judgement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub label: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Observation {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    /// Non-gating suites never affect the exit status.
    pub gating: bool,
    pub records: Vec<CheckRecord>,
    pub observations: Vec<Observation>,
    /// Set when the suite could not run to completion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: &str, gating: bool) -> Self {
        Self {
            suite: suite.into(),
            gating,
            records: Vec::new(),
            observations: Vec::new(),
            error: None,
            pass: true,
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn observe(&mut self, obs: Observation) {
        self.observations.push(obs);
    }

    /// Sets `pass` from the records and error state.
    pub fn finish(mut self) -> Self {
        self.pass = self.error.is_none() && self.records.iter().all(|r| r.pass);
        self
    }

    pub fn failed(suite: &str, gating: bool, error: String) -> Self {
        let mut r = Self::new(suite, gating);
        r.error = Some(error);
        r.finish()
    }

    /// Largest residual of the records carrying `tag`.
    pub fn worst(&self, tag: LemmaTag) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.tag == tag)
            .map(|r| r.residual)
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
    }

    pub fn tagged(&self, tag: LemmaTag) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(move |r| r.tag == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    #[serde(rename = "N_x")]
    pub nx: usize,
    #[serde(rename = "N_y")]
    pub ny: usize,
    pub n: usize,
    pub seed: u64,
    pub tolerance_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario_digest: String,
    pub environment: Environment,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
}

impl RunReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One line per suite.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let status = match (s.pass, s.gating) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "fail (not gating)",
            };
            let failed = s.records.iter().filter(|r| !r.pass).count();
            out.push_str(&format!(
                "{:<20} {:<18} {} checks, {} failed{}\n",
                s.suite,
                status,
                s.records.len(),
                failed,
                s.error.as_ref().map(|e| format!(", error: {e}")).unwrap_or_default()
            ));
        }
        out.push_str(if self.pass { "overall: pass\n" } else { "overall: FAIL\n" });
        out
    }
}

/// Writes `report` as pretty JSON.
pub fn emit_report(report: &RunReport, path: &std::path::Path) -> crate::error::Result<()> {
    std::fs::write(path, report.to_json())?;
    Ok(())
}

pub fn load_report(path: &std::path::Path) -> crate::error::Result<RunReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
