//! Experiment configuration: TOML blocks, dotted-key overrides, validation
//! and a content hash echoed by every output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::carleman::{linear_s_grid, max_admissible_s, BoundaryFunctionalParams};
use crate::discretization::{GridDims, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
use crate::mfg::{ManufacturedCase, SolverOptions, CATALOGUE};
use crate::uc::{PairSource, QrOptions, UcOptions};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "CARLEMAN_MFG_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub dimension: usize,
    pub extents: Vec<f64>,
    pub gamma_faces: Vec<Face>,
    pub epsilon_core: f64,
    pub lambda: f64,
    pub beta: Option<f64>,
    pub r_fraction: f64,
    pub t0: f64,
    pub delta: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            extents: vec![1.0],
            gamma_faces: vec![Face::Left],
            epsilon_core: 0.5,
            lambda: 1.0,
            beta: None,
            r_fraction: 0.5,
            t0: 1.0,
            delta: 0.5,
        }
    }
}

impl GeometryConfig {
    pub fn domain(&self) -> DomainSpec {
        DomainSpec {
            dimension: self.dimension,
            extents: self.extents.clone(),
            gamma_faces: self.gamma_faces.clone(),
            epsilon_core: self.epsilon_core,
        }
    }

    pub fn weight_params(&self) -> WeightParams {
        WeightParams {
            lambda: self.lambda,
            beta: self.beta,
            r_fraction: self.r_fraction,
            t0: self.t0,
            delta: self.delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
    pub nt: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n1: 33,
            n2: 1,
            nt: 33,
        }
    }
}

impl GridConfig {
    pub fn dims(&self, dimension: usize) -> GridDims {
        if dimension == 1 {
            GridDims::new_1d(self.n1, self.nt)
        } else {
            GridDims::new_2d(self.n1, self.n2, self.nt)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MfgConfig {
    pub case_id: String,
    pub max_inner: usize,
    pub tol_inner: f64,
    /// Spatial node counts of the `mms` ladder; each level uses `tau = h^2`.
    pub mms_levels: Vec<usize>,
}

impl Default for MfgConfig {
    fn default() -> Self {
        Self {
            case_id: "1d-nonlinear".into(),
            max_inner: 100,
            tol_inner: 1e-10,
            mms_levels: vec![17, 33, 65],
        }
    }
}

impl MfgConfig {
    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            max_inner: self.max_inner,
            tol_inner: self.tol_inner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    Lemma1K1,
    Lemma1K2,
    Theorem2,
}

/// Input field of a single-equation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaField {
    /// Smooth bump supported inside the space-time box.
    Bump,
    /// The `u` of the manufactured case.
    CaseU,
    /// The `v` of the manufactured case.
    CaseV,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarlemanConfig {
    pub estimate: EstimateKind,
    pub field: LemmaField,
    /// Feed `f(x, 2 t0 - t)` instead of `f`.
    pub time_reversed: bool,
    pub s_min: f64,
    /// Upper end of the sweep; defaults to the overflow guard.
    pub s_max: Option<f64>,
    pub s_steps: usize,
    #[serde(rename = "C_B", alias = "c_b")]
    pub c_b: f64,
    pub include_terms: [bool; 3],
    pub complement_phi_weighted: bool,
    pub pair_source: PairSource,
    pub perturbation: f64,
    pub residual_tol: f64,
}

impl Default for CarlemanConfig {
    fn default() -> Self {
        Self {
            estimate: EstimateKind::Theorem2,
            field: LemmaField::Bump,
            time_reversed: false,
            s_min: 1.0,
            s_max: None,
            s_steps: 40,
            c_b: 0.0,
            include_terms: [true; 3],
            complement_phi_weighted: false,
            pair_source: PairSource::Sampled,
            perturbation: 100.0,
            residual_tol: 0.05,
        }
    }
}

impl CarlemanConfig {
    pub fn boundary(&self) -> BoundaryFunctionalParams {
        BoundaryFunctionalParams {
            c_b: self.c_b,
            include: self.include_terms,
            complement_phi_weighted: self.complement_phi_weighted,
        }
    }

    pub fn s_grid(&self, cfg: &WeightConfig) -> Vec<f64> {
        linear_s_grid(
            self.s_min,
            self.s_max.unwrap_or_else(|| max_admissible_s(cfg)),
            self.s_steps,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SGridConfig {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UcConfig {
    /// Must agree with `[geometry]` when given.
    pub epsilon_core: Option<f64>,
    /// Must agree with `[geometry]` when given.
    pub r_fraction: Option<f64>,
    pub s_grid: SGridConfig,
    /// Cauchy penalty of the reconstruction; defaults to `1e3 s^4`.
    pub rho: Option<f64>,
    pub tol_gamma: f64,
    /// For solved pairs the Gamma tolerance grows by `gamma_slack (h^2 + tau)`.
    pub gamma_slack: f64,
    pub slack_constant: f64,
    pub noise_levels: Vec<f64>,
    pub pair_source: PairSource,
    pub perturbation: f64,
    /// Parameter `s` of the reconstruction functional.
    pub s_reconstruct: f64,
    pub cg_rtol: f64,
    pub cg_max_iter: usize,
    /// Global horizon `T` of the `t0` sweep.
    pub horizon: f64,
    pub n_t0: usize,
}

impl Default for UcConfig {
    fn default() -> Self {
        Self {
            epsilon_core: None,
            r_fraction: None,
            s_grid: SGridConfig {
                min: 1.0,
                max: 50.0,
                steps: 491,
            },
            rho: None,
            tol_gamma: 1e-10,
            gamma_slack: 20.0,
            slack_constant: 1.0,
            noise_levels: vec![0.1, 0.01, 0.001],
            pair_source: PairSource::Solved,
            perturbation: 100.0,
            s_reconstruct: 1.0,
            cg_rtol: 1e-8,
            cg_max_iter: 200_000,
            horizon: 3.0,
            n_t0: 5,
        }
    }
}

impl UcConfig {
    pub fn options(&self, grid: &SpaceTimeGrid) -> UcOptions {
        let tol_gamma = match self.pair_source {
            PairSource::Sampled => self.tol_gamma,
            PairSource::Solved => {
                let h = grid.h_max();
                self.tol_gamma + self.gamma_slack * (h * h + grid.tau())
            }
        };
        UcOptions {
            s_grid: linear_s_grid(self.s_grid.min, self.s_grid.max, self.s_grid.steps),
            tol_gamma,
            slack_constant: self.slack_constant,
        }
    }

    pub fn qr(&self) -> QrOptions {
        QrOptions {
            s: self.s_reconstruct,
            rho: self.rho,
            rtol: self.cg_rtol,
            max_iter: self.cg_max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub mfg: MfgConfig,
    pub carleman: CarlemanConfig,
    pub uc: UcConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            workers: 4,
            geometry: GeometryConfig::default(),
            grid: GridConfig::default(),
            mfg: MfgConfig::default(),
            carleman: CarlemanConfig::default(),
            uc: UcConfig::default(),
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Apply `key.path=value` to a TOML table. Values are parsed as TOML and
/// fall back to bare strings.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        Error::Config(format!(
            "override `{assignment}` is not of the form key=value"
        ))
    })?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a table")))?;
    }
    node.insert(path[path.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    /// Parse TOML text, then apply the output-dir environment override and
    /// the `--set` style overrides, in that order.
    pub fn from_toml_with(
        text: &str,
        env_output_dir: Option<&str>,
        overrides: &[String],
    ) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        if let Some(dir) = env_output_dir {
            table.insert("output_dir".into(), toml::Value::String(dir.into()));
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file (or start from defaults when `path` is `None`),
    /// honouring the output-dir environment variable.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        let env = std::env::var(OUTPUT_DIR_ENV).ok();
        Self::from_toml_with(&text, env.as_deref(), overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, excluding `output_dir` and
    /// `workers`, which do not affect results.
    pub fn hash(&self) -> String {
        let canonical = Self {
            output_dir: PathBuf::new(),
            workers: 0,
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()[..16]
            .to_string()
    }

    pub fn domain(&self) -> DomainSpec {
        self.geometry.domain()
    }

    pub fn weight(&self) -> Result<WeightConfig> {
        WeightConfig::for_domain(&self.domain(), &self.geometry.weight_params())
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::new(
            &self.domain(),
            self.grid.dims(self.geometry.dimension),
            &self.weight()?,
        )
    }

    pub fn case(&self) -> Result<ManufacturedCase> {
        ManufacturedCase::get(&self.mfg.case_id, self.geometry.t0)
    }

    /// Cross-block checks run before any experiment.
    pub fn validate(&self) -> Result<()> {
        let cfg = self.weight()?;
        self.grid()?;
        let case_dim = if self.mfg.case_id.starts_with("2d") {
            Some(2)
        } else if self.mfg.case_id == "zero" {
            None
        } else {
            Some(1)
        };
        if !CATALOGUE.contains(&self.mfg.case_id.as_str()) {
            return Err(Error::UnknownCase(self.mfg.case_id.clone()));
        }
        if case_dim.is_some_and(|d| d != self.geometry.dimension) {
            return Err(Error::Config(format!(
                "case `{}` does not match dimension {}",
                self.mfg.case_id, self.geometry.dimension
            )));
        }
        if self.mfg.max_inner == 0 || !(self.mfg.tol_inner > 0.0) {
            return Err(Error::Config(
                "[mfg] max_inner and tol_inner must be positive".into(),
            ));
        }
        if self.mfg.mms_levels.iter().any(|&n| n < 3) {
            return Err(Error::Config(
                "[mfg] mms_levels need at least 3 nodes each".into(),
            ));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }

        let c = &self.carleman;
        self.carleman.boundary().validate()?;
        if c.s_steps == 0 {
            return Err(Error::EmptySGrid);
        }
        let guard = max_admissible_s(&cfg);
        let s_max = c.s_max.unwrap_or(guard);
        if !(c.s_min > 0.0) || !(s_max >= c.s_min) {
            return Err(Error::Config(format!(
                "[carleman] need 0 < s_min <= s_max, got {} and {s_max}",
                c.s_min
            )));
        }
        if s_max > guard {
            return Err(Error::OverflowGuard {
                s: s_max,
                max_s: guard,
            });
        }
        if !(c.residual_tol > 0.0) {
            return Err(Error::Config(
                "[carleman] residual_tol must be positive".into(),
            ));
        }

        let u = &self.uc;
        if u.epsilon_core
            .is_some_and(|e| e != self.geometry.epsilon_core)
        {
            return Err(Error::Config(
                "[uc] epsilon_core disagrees with [geometry]".into(),
            ));
        }
        if u.r_fraction.is_some_and(|r| r != self.geometry.r_fraction) {
            return Err(Error::Config(
                "[uc] r_fraction disagrees with [geometry]".into(),
            ));
        }
        if u.s_grid.steps == 0 {
            return Err(Error::EmptySGrid);
        }
        if !(u.s_grid.min > 0.0) || !(u.s_grid.max >= u.s_grid.min) {
            return Err(Error::Config("[uc] s_grid needs 0 < min <= max".into()));
        }
        if u.noise_levels.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::Config(
                "[uc] noise levels must be non-negative".into(),
            ));
        }
        if !(u.s_reconstruct > 0.0) || u.rho.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::Config(
                "[uc] s_reconstruct and rho must be positive".into(),
            ));
        }
        if !(u.tol_gamma >= 0.0) || !(u.gamma_slack >= 0.0) || !(u.slack_constant >= 0.0) {
            return Err(Error::Config("[uc] tolerances must be non-negative".into()));
        }
        if !(u.horizon > 2.0 * self.geometry.delta) {
            return Err(Error::Horizon {
                horizon: u.horizon,
                delta: self.geometry.delta,
            });
        }
        if u.n_t0 == 0 {
            return Err(Error::Config("[uc] n_t0 must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
        let round: ExperimentConfig = ExperimentConfig::default()
            .to_toml()
            .parse::<toml::Table>()
            .unwrap()
            .try_into()
            .unwrap();
        assert_eq!(round, ExperimentConfig::default());
    }

    #[test]
    fn overrides_and_env() {
        let text = "[grid]\nn1 = 17\n";
        let cfg = ExperimentConfig::from_toml_with(
            text,
            Some("/tmp/x"),
            &[
                "grid.nt=9".into(),
                "carleman.estimate=lemma1-k2".into(),
                "uc.noise_levels=[0.5]".into(),
            ],
        )
        .unwrap();
        assert_eq!((cfg.grid.n1, cfg.grid.nt), (17, 9));
        assert_eq!(cfg.carleman.estimate, EstimateKind::Lemma1K2);
        assert_eq!(cfg.uc.noise_levels, vec![0.5]);
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/x"));
        let later =
            ExperimentConfig::from_toml_with(text, Some("/tmp/x"), &["output_dir=/tmp/y".into()])
                .unwrap();
        assert_eq!(later.output_dir, PathBuf::from("/tmp/y"));
    }

    #[test]
    fn hash_tracks_results_only() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig {
            output_dir: "elsewhere".into(),
            workers: 9,
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig {
            seed: 1,
            ..a.clone()
        };
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = |o: &str| ExperimentConfig::from_toml_with("", None, &[o.into()]).unwrap_err();
        assert!(matches!(bad("uc.horizon=0.9"), Error::Horizon { .. }));
        assert!(matches!(
            bad("carleman.s_max=1000.0"),
            Error::OverflowGuard { .. }
        ));
        assert!(matches!(bad("mfg.case_id=nope"), Error::UnknownCase(_)));
        assert!(matches!(
            bad("geometry.extents=[1.0, 1.0]"),
            Error::InvalidGeometry(_)
        ));
        assert!(matches!(bad("grid.n1=2"), Error::DegenerateGrid(_)));
        assert!(matches!(bad("mfg.case_id=2d-smooth"), Error::Config(_)));
        assert!(matches!(bad("uc.epsilon_core=0.3"), Error::Config(_)));
        assert!(matches!(bad("bogus=1"), Error::Config(_)));
        assert!(matches!(bad("novalue"), Error::Config(_)));
        for e in [bad("uc.horizon=0.9"), bad("bogus=1")] {
            assert_eq!(e.exit_code(), 2);
        }
    }
}
