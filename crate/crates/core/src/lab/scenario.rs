//! Scenario files: a versioned JSON description of the ambient model, grid,
//! area form, embedding, random-field generators, tolerances and suites.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ambient::{standard_form, AmbientModel, OneFormTerm};
use crate::embedding::{Embedding, LiftTerm};
use crate::error::{Error, Result};
use crate::io::{load_embedding, load_grid_field};
use crate::surface::{AreaForm, TorusGrid};

pub const SCHEMA_VERSION: u32 = 1;

/// Every suite the runner knows, in report order.
pub const ALL_SUITES: [&str; 11] = [
    "exact_coincidence",
    "tangency",
    "vanish",
    "probe_converse",
    "splitting",
    "compat",
    "invariance",
    "reduction",
    "holomorphic",
    "closedness",
    "moser",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub ambient: AmbientSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub sigma: SigmaSpec,
    pub embedding: EmbeddingSpec,
    #[serde(default)]
    pub fields: FieldSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub numerics: Numerics,
    pub suites: Vec<String>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub n: usize,
    #[serde(default)]
    pub omega: OmegaSpec,
    #[serde(default)]
    pub eta: Vec<OneFormTerm>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    #[default]
    #[serde(with = "standard_tag")]
    Standard,
    /// Row-major entries of `Ω`.
    Matrix(Vec<Vec<f64>>),
}

mod standard_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("standard")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "standard" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("unknown form {s:?}")))
        }
    }
}

impl AmbientSpec {
    pub fn build(&self) -> Result<AmbientModel> {
        if self.n < 2 {
            return Err(Error::Scenario(format!("ambient half-dimension n = {} must be ≥ 2", self.n)));
        }
        let dim = 2 * self.n;
        let base = match &self.omega {
            OmegaSpec::Standard => standard_form(self.n),
            OmegaSpec::Matrix(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Scenario(format!("omega must be {dim}×{dim}")));
                }
                DMatrix::from_fn(dim, dim, |i, j| rows[i][j])
            }
        };
        AmbientModel::new(base, self.eta.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Square {
        #[serde(rename = "N")]
        n: usize,
    },
    Rect {
        #[serde(rename = "N_x")]
        nx: usize,
        #[serde(rename = "N_y")]
        ny: usize,
    },
}

impl GridSpec {
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            GridSpec::Square { n } => (n, n),
            GridSpec::Rect { nx, ny } => (nx, ny),
        }
    }

    pub fn build(&self) -> Result<TorusGrid> {
        let (nx, ny) = self.shape();
        TorusGrid::new(nx, ny)
    }
}

/// One Fourier term of a density on `T²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityTerm {
    pub frequency: [i64; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKeyword {
    /// `ρ ≡ 1`.
    #[default]
    Unit,
    /// `σ = f*ω`, which makes `f` a symplectic embedding.
    Pullback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Keyword(SigmaKeyword),
    Constant(f64),
    Fourier {
        base: f64,
        terms: Vec<DensityTerm>,
    },
    File {
        file: PathBuf,
    },
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Keyword(SigmaKeyword::Unit)
    }
}

impl SigmaSpec {
    pub fn build(&self, grid: &TorusGrid, f: &Embedding, base_dir: &Path) -> Result<AreaForm> {
        match self {
            SigmaSpec::Keyword(SigmaKeyword::Unit) => Ok(AreaForm::unit(grid)),
            SigmaSpec::Keyword(SigmaKeyword::Pullback) => f.pullback_area_form(),
            SigmaSpec::Constant(c) => AreaForm::constant(grid, *c),
            SigmaSpec::Fourier { base, terms } => {
                let tau = 2.0 * std::f64::consts::PI;
                AreaForm::new(
                    grid,
                    grid.sample(|x, y| {
                        base + terms
                            .iter()
                            .map(|t| {
                                let p = tau * (t.frequency[0] as f64 * x + t.frequency[1] as f64 * y);
                                t.cos * p.cos() + t.sin * p.sin()
                            })
                            .sum::<f64>()
                    }),
                )
            }
            SigmaSpec::File { file } => {
                let (g, comps) = load_grid_field(&base_dir.join(file))?;
                if &g != grid || comps.len() != 1 {
                    return Err(Error::Scenario(format!(
                        "{}: expected one component on a {}×{} grid",
                        file.display(),
                        grid.nx(),
                        grid.ny()
                    )));
                }
                AreaForm::new(grid, comps.into_iter().next().expect("one component"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmbeddingSpec {
    /// Shorthand `"flat"`.
    Named(FamilyName),
    Family(Family),
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `(x, y, 0, …)`.
    Flat,
    /// `(x + (a/2π) sin 2πx, y, 0, …)`.
    Sheared { a: f64 },
    /// `W p + offset`.
    Linear {
        winding: Vec<[i64; 2]>,
        #[serde(default)]
        offset: Vec<f64>,
    },
    /// `(x, y, 0, …)` plus Fourier terms.
    Perturbed { terms: Vec<LiftTerm> },
}

impl EmbeddingSpec {
    pub fn build(&self, model: Arc<AmbientModel>, grid: &TorusGrid, base_dir: &Path) -> Result<Embedding> {
        let dim = model.dim();
        match self {
            EmbeddingSpec::Named(FamilyName::Flat) | EmbeddingSpec::Family(Family::Flat) => Embedding::flat(model, grid),
            EmbeddingSpec::Family(Family::Sheared { a }) => Embedding::sheared(model, grid, *a),
            EmbeddingSpec::Family(Family::Linear { winding, offset }) => {
                let offset = if offset.is_empty() { vec![0.0; dim] } else { offset.clone() };
                Embedding::linear(model, grid, winding.clone(), &offset)
            }
            EmbeddingSpec::Family(Family::Perturbed { terms }) => Embedding::from_terms(
                model,
                grid,
                crate::embedding::standard_winding(dim),
                &vec![0.0; dim],
                terms,
            ),
            EmbeddingSpec::File { file } => {
                let f = load_embedding(&base_dir.join(file), model)?;
                if f.grid() != grid {
                    return Err(Error::Scenario(format!(
                        "{}: grid {}×{} differs from scenario grid {}×{}",
                        file.display(),
                        f.grid().nx(),
                        f.grid().ny(),
                        grid.nx(),
                        grid.ny()
                    )));
                }
                Ok(f)
            }
        }
    }
}

/// Random band-limited field generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    /// Largest `|k|` per axis of surface Fourier modes.
    pub bandwidth: usize,
    /// Sup-norm of generated scalar fields.
    pub amplitude: f64,
    pub seed: u64,
    /// Samples per randomized check.
    pub samples: usize,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            bandwidth: 3,
            amplitude: 0.5,
            seed: 20240917,
            samples: 50,
        }
    }
}

/// Acceptance tolerances; every entry is multiplied by `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub scale: f64,
    /// Exact fixture values.
    pub fixture: f64,
    /// `|ω_S − 2ω^D| ≤ coincidence·(1 + |ω^D|)`.
    pub coincidence: f64,
    /// Pointwise identities (integrands, orthogonality, J-invariance).
    pub pointwise: f64,
    /// Recovered potential versus `H∘f`.
    pub potential: f64,
    /// Pairings that must vanish.
    pub pairing: f64,
    /// `∫{ψ₁, ψ₂}σ`.
    pub bracket: f64,
    /// `τ + ξ = v`.
    pub reconstruction: f64,
    /// `d(ι_X σ)` for split coefficients of closed fields.
    pub area_preservation: f64,
    /// `ω^D(J̃v₁, J̃v₂) = ω^D(v₁, v₂)`.
    pub compatibility: f64,
    pub ratio_low: f64,
    pub ratio_high: f64,
    /// Finite-difference closedness on constant models.
    pub constant_closedness: f64,
    pub moser: f64,
    pub moser_idempotence: f64,
    /// Surface reparametrisation invariance of `ω^D`.
    pub reparametrization: f64,
    /// `C` in `C·steps⁻⁴ + C′·N⁻²`.
    pub ham_c: f64,
    /// `C′` in `C·steps⁻⁴ + C′·N⁻²`.
    pub ham_c_prime: f64,
    /// Smallest accepted convergence order when steps double.
    pub ham_order: f64,
    pub cauchy_riemann: f64,
    pub holomorphic: f64,
    /// Classification thresholds (not scaled).
    pub classify_closed: f64,
    pub classify_exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            scale: 1.0,
            fixture: 1e-10,
            coincidence: 1e-8,
            pointwise: 1e-10,
            potential: 1e-8,
            pairing: 1e-8,
            bracket: 1e-10,
            reconstruction: 1e-14,
            area_preservation: 1e-8,
            compatibility: 1e-8,
            ratio_low: 3.5,
            ratio_high: 4.5,
            constant_closedness: 1e-12,
            moser: 1e-4,
            moser_idempotence: 1e-6,
            reparametrization: 1e-6,
            ham_c: 1e-2,
            ham_c_prime: 1e-4,
            ham_order: 3.5,
            cauchy_riemann: 1e-12,
            holomorphic: 1e-10,
            classify_closed: 1e-8,
            classify_exact: 1e-8,
        }
    }
}

impl Tolerances {
    /// Residual bounds multiplied by `scale`; ratio windows, orders and
    /// classification thresholds are left alone.
    pub fn scaled(&self) -> Self {
        let s = self.scale;
        Self {
            fixture: self.fixture * s,
            coincidence: self.coincidence * s,
            pointwise: self.pointwise * s,
            potential: self.potential * s,
            pairing: self.pairing * s,
            bracket: self.bracket * s,
            reconstruction: self.reconstruction * s,
            area_preservation: self.area_preservation * s,
            compatibility: self.compatibility * s,
            constant_closedness: self.constant_closedness * s,
            moser: self.moser * s,
            moser_idempotence: self.moser_idempotence * s,
            reparametrization: self.reparametrization * s,
            ham_c: self.ham_c * s,
            ham_c_prime: self.ham_c_prime * s,
            cauchy_riemann: self.cauchy_riemann * s,
            holomorphic: self.holomorphic * s,
            ..*self
        }
    }
}

/// Step counts and family parameters of the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// RK4 steps of surface flows in the invariance suite.
    pub flow_steps: usize,
    /// Ambient flow step counts for the Hamiltonian-invariance study (each doubles the last).
    pub ham_steps: Vec<usize>,
    pub ham_time: f64,
    /// Largest finite-difference step; it is halved `fd_halvings` times.
    pub fd_h: f64,
    pub fd_halvings: usize,
    /// Strength of the built-in `η` used when the scenario model is constant.
    pub fallback_eta: f64,
    pub moser_a: f64,
    #[serde(rename = "moser_N")]
    pub moser_n: usize,
    pub moser_steps: usize,
    /// Tangential σ-Hamiltonian partners per Hamiltonian restriction.
    pub partners: usize,
    /// Randomized samples for the tamedness check.
    pub tamedness_samples: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            flow_steps: 200,
            ham_steps: vec![4, 8, 16],
            ham_time: 0.0625,
            fd_h: 1e-2,
            fd_halvings: 3,
            fallback_eta: 0.5,
            moser_a: 0.3,
            moser_n: 64,
            moser_steps: 50,
            partners: 20,
            tamedness_samples: 100,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Scenario(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let (nx, ny) = self.grid.shape();
        let limit = nx.min(ny) / 4;
        if self.fields.bandwidth >= limit {
            return Err(Error::Scenario(format!(
                "bandwidth {} must be < N/4 = {limit}",
                self.fields.bandwidth
            )));
        }
        if self.fields.samples == 0 {
            return Err(Error::Scenario("fields.samples must be ≥ 1".into()));
        }
        if !(self.tolerances.scale >= 0.0) {
            return Err(Error::Scenario("tolerances.scale must be ≥ 0".into()));
        }
        if self.numerics.ham_steps.len() < 2 || self.numerics.ham_steps.contains(&0) {
            return Err(Error::Scenario("numerics.ham_steps needs at least two positive entries".into()));
        }
        if self.suites.is_empty() {
            return Err(Error::Scenario("no suites requested".into()));
        }
        for s in &self.suites {
            if !ALL_SUITES.contains(&s.as_str()) {
                return Err(Error::Scenario(format!("unknown suite {s:?}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the canonical serialisation.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario serialises");
        hex(&Sha256::digest(canonical))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    Scenario::from_json(&fs::read_to_string(path)?)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    fs::write(path, scenario.to_json()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "ambient": {"n": 2, "omega": "standard"},
        "grid": {"N": 32},
        "sigma": 1.0,
        "embedding": "flat",
        "suites": ["exact_coincidence"]
    }"#;

    #[test]
    fn minimal_scenario_loads() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.grid.shape(), (32, 32));
        assert_eq!(s.sigma, SigmaSpec::Constant(1.0));
        assert_eq!(s.embedding, EmbeddingSpec::Named(FamilyName::Flat));
        assert_eq!(s.ambient.omega, OmegaSpec::Standard);
        let model = s.ambient.build().unwrap();
        assert!(model.is_constant());
    }

    #[test]
    fn bandwidth_rule() {
        let text = MINIMAL.replace(r#""embedding": "flat","#, r#""embedding": "flat", "fields": {"bandwidth": 20},"#);
        assert!(matches!(Scenario::from_json(&text), Err(Error::Scenario(_))));
        let text = MINIMAL.replace(r#""embedding": "flat","#, r#""embedding": "flat", "fields": {"bandwidth": 7},"#);
        assert!(Scenario::from_json(&text).is_ok());
        let text = MINIMAL.replace(r#""embedding": "flat","#, r#""embedding": "flat", "fields": {"bandwidth": 8},"#);
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace(r#""suites""#, r#""colour": 3, "suites""#);
        assert!(Scenario::from_json(&text).is_err());
        let text = MINIMAL.replace(r#""exact_coincidence""#, r#""no_such_suite""#);
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let text = r#"{
            "ambient": {"n": 2, "eta": [{"component": 3, "frequency": [1, 0, 0, 0], "sin": 0.05}]},
            "grid": {"N_x": 32, "N_y": 16},
            "sigma": "pullback",
            "embedding": {"family": "perturbed", "terms": [{"component": 2, "frequency": [1, 1], "cos": 0.05}]},
            "suites": ["tangency", "moser"]
        }"#;
        let s = Scenario::from_json(text).unwrap();
        let again = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.digest(), again.digest());
        assert_eq!(s.sigma, SigmaSpec::Keyword(SigmaKeyword::Pullback));
    }

    #[test]
    fn other_specs_parse() {
        let sheared: EmbeddingSpec = serde_json::from_str(r#"{"family": "sheared", "a": 0.3}"#).unwrap();
        assert_eq!(sheared, EmbeddingSpec::Family(Family::Sheared { a: 0.3 }));
        let file: EmbeddingSpec = serde_json::from_str(r#"{"file": "f.json"}"#).unwrap();
        assert!(matches!(file, EmbeddingSpec::File { .. }));
        let sigma: SigmaSpec =
            serde_json::from_str(r#"{"base": 1.0, "terms": [{"frequency": [1, 0], "cos": 0.2}]}"#).unwrap();
        assert!(matches!(sigma, SigmaSpec::Fourier { .. }));
        let omega: OmegaSpec = serde_json::from_str("[[0,1,0,0],[-1,0,0,0],[0,0,0,1],[0,0,-1,0]]").unwrap();
        assert!(matches!(omega, OmegaSpec::Matrix(_)));
        assert!(serde_json::from_str::<OmegaSpec>(r#""weird""#).is_err());
    }
}
