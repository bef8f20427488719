//! Experiment configuration files (TOML).
//!
//! [`validate_config`] checks a document in three passes: unknown keys
//! anywhere in the tree, typed deserialization, then semantic checks. Every
//! problem is reported with its dotted key path. [`ExperimentConfig::materialize`]
//! fills all defaults so the echoed `effective_config.toml` is self-contained.

use std::fmt;
use std::path::PathBuf;

use qfluct_core::dynamics::{Amplitude, DriveTerm, LindbladModel, DEFAULT_DT};
use qfluct_core::models::{build_three_level, ThreeLevelParams};
use qfluct_core::operator::{
    validate_density, ComplexMatrix, DensityMatrix, C64, DEFAULT_DEGENERACY_TOL,
    DEFAULT_VALIDATION_TOL,
};
use qfluct_core::protocols::DEFAULT_MERGE_TOL;
use qfluct_core::Protocol;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::quantity::Quantity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "fig2a")]
    Fig2a,
    #[serde(rename = "fig2b")]
    Fig2b,
    #[serde(rename = "figS1")]
    FigS1,
    #[serde(rename = "figS2")]
    FigS2,
    #[serde(rename = "sweep")]
    Sweep,
    #[serde(rename = "custom")]
    Custom,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Fig2a,
        ExperimentKind::Fig2b,
        ExperimentKind::FigS1,
        ExperimentKind::FigS2,
        ExperimentKind::Sweep,
        ExperimentKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig2a => "fig2a",
            ExperimentKind::Fig2b => "fig2b",
            ExperimentKind::FigS1 => "figS1",
            ExperimentKind::FigS2 => "figS2",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::Fig2a => {
                "relative coherence contribution to the EPM second moment, with the least and most coherent states marked"
            }
            ExperimentKind::Fig2b => {
                "EPM minus TPM Shannon entropy, for the dephased and the full initial state"
            }
            ExperimentKind::FigS1 => {
                "undriven model: MLL minus EPM second moment and the coherence term of the EPM second moment"
            }
            ExperimentKind::FigS2 => "EPM minus MLL and EPM minus TPM Shannon entropy",
            ExperimentKind::Sweep => "user-selected quantities on the three-level model",
            ExperimentKind::Custom => {
                "user-selected quantities on any model, optionally from explicit initial states"
            }
        }
    }

    /// Fixed output quantities, or `None` when the user picks them.
    pub fn fixed_quantities(self) -> Option<&'static [Quantity]> {
        use Quantity::*;
        match self {
            ExperimentKind::Fig2a => Some(&[
                CoherenceL1,
                RelCohSecondMoment,
                RelCohSecondMomentMinCl1,
                RelCohSecondMomentMaxCl1,
            ]),
            ExperimentKind::Fig2b => Some(&[
                CoherenceL1,
                EntropyEpmDephasedMinusTpm,
                EntropyEpmMinusTpm,
            ]),
            ExperimentKind::FigS1 => Some(&[
                CoherenceL1,
                SecondMomentMllMinusEpm,
                SecondMomentCoherence,
            ]),
            ExperimentKind::FigS2 => Some(&[CoherenceL1, EntropyEpmMinusMll, EntropyEpmMinusTpm]),
            ExperimentKind::Sweep | ExperimentKind::Custom => None,
        }
    }

    pub fn default_count(self) -> usize {
        match self {
            ExperimentKind::Fig2a | ExperimentKind::Fig2b => 1000,
            _ => 100,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense complex matrix as row-major real and (optional) imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixSpec {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        let im: Vec<Vec<f64>> = rows(|z| z.im);
        Self {
            re: rows(|z| z.re),
            im: im.iter().flatten().any(|&x| x != 0.0).then_some(im),
        }
    }

    pub fn to_matrix(&self, dim: usize) -> Result<ComplexMatrix, String> {
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
        if !shape_ok(&self.re) {
            return Err(format!("re must be {dim}x{dim}"));
        }
        if let Some(im) = &self.im {
            if !shape_ok(im) {
                return Err(format!("im must be {dim}x{dim}"));
            }
        }
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
            C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err("entries must be finite".into());
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub operator: MatrixSpec,
    pub amplitude: Amplitude,
}

/// Model given by explicit matrices; jump operators carry their rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericModel {
    pub dim: usize,
    pub hamiltonian: MatrixSpec,
    #[serde(default)]
    pub drive: Vec<DriveSpec>,
    #[serde(default)]
    pub jumps: Vec<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    ThreeLevel(ThreeLevelParams),
    Generic(GenericModel),
}

impl ModelConfig {
    pub fn dim(&self) -> usize {
        match self {
            ModelConfig::ThreeLevel(_) => 3,
            ModelConfig::Generic(g) => g.dim,
        }
    }

    pub fn build(&self) -> Result<LindbladModel, String> {
        match self {
            ModelConfig::ThreeLevel(p) => build_three_level(p).map_err(|e| e.to_string()),
            ModelConfig::Generic(g) => {
                let h = g.hamiltonian.to_matrix(g.dim)?;
                let drive = g
                    .drive
                    .iter()
                    .map(|d| {
                        Ok(DriveTerm {
                            operator: d.operator.to_matrix(g.dim)?,
                            amplitude: d.amplitude.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                let jumps = g
                    .jumps
                    .iter()
                    .map(|j| j.to_matrix(g.dim))
                    .collect::<Result<Vec<_>, String>>()?;
                for d in &drive {
                    d.amplitude.validate().map_err(|e| e.to_string())?;
                }
                LindbladModel::new(h, drive, jumps).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_i: f64,
    pub t_f: f64,
    pub n_snapshots: usize,
    pub dt: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_i: 0.0,
            t_f: 50.0,
            n_snapshots: 500,
            dt: DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_merge_tol() -> f64 {
    DEFAULT_MERGE_TOL
}

fn default_degeneracy_tol() -> f64 {
    DEFAULT_DEGENERACY_TOL
}

fn default_validation_tol() -> f64 {
    DEFAULT_VALIDATION_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocols: Option<Vec<Protocol>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantities: Option<Vec<String>>,
    #[serde(default = "default_merge_tol")]
    pub merge_tol: f64,
    #[serde(default = "default_degeneracy_tol")]
    pub degeneracy_tol: f64,
    #[serde(default = "default_validation_tol")]
    pub validation_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_states: Option<Vec<MatrixSpec>>,
}

/// One problem found while validating a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const TOP_KEYS: &[&str] = &[
    "experiment",
    "output_dir",
    "protocols",
    "beta_reference",
    "quantities",
    "merge_tol",
    "degeneracy_tol",
    "validation_tol",
    "model",
    "time",
    "ensemble",
    "initial_states",
];
const TIME_KEYS: &[&str] = &["t_i", "t_f", "n_snapshots", "dt"];
const ENSEMBLE_KEYS: &[&str] = &["dim", "count", "seed"];
const THREE_LEVEL_KEYS: &[&str] = &[
    "kind",
    "omega1",
    "gamma",
    "betas",
    "drive_g",
    "drive_f",
    "include_drive",
    "occupation",
];
const GENERIC_KEYS: &[&str] = &["kind", "dim", "hamiltonian", "drive", "jumps"];
const MATRIX_KEYS: &[&str] = &["re", "im"];
const DRIVE_KEYS: &[&str] = &["operator", "amplitude"];

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn check_keys(table: &Table, path: &str, allowed: &[&str], issues: &mut Vec<ConfigIssue>) {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            issues.push(ConfigIssue::new(join(path, key), "unknown key"));
        }
    }
}

fn amplitude_keys(kind: Option<&str>) -> &'static [&'static str] {
    match kind {
        Some("constant") => &["kind", "value"],
        Some("sin_squared") | Some("cos_squared") => &["kind", "amplitude", "frequency"],
        Some("tabulated") => &["kind", "times", "values"],
        _ => &["kind", "value", "amplitude", "frequency", "times", "values"],
    }
}

fn walk_amplitude(value: &Value, path: &str, issues: &mut Vec<ConfigIssue>) {
    if let Some(t) = value.as_table() {
        let kind = t.get("kind").and_then(Value::as_str);
        check_keys(t, path, amplitude_keys(kind), issues);
    }
}

fn walk_matrix(value: &Value, path: &str, issues: &mut Vec<ConfigIssue>) {
    if let Some(t) = value.as_table() {
        check_keys(t, path, MATRIX_KEYS, issues);
    }
}

fn walk_array(value: &Value, path: &str, issues: &mut Vec<ConfigIssue>, f: fn(&Value, &str, &mut Vec<ConfigIssue>)) {
    if let Some(items) = value.as_array() {
        for (i, item) in items.iter().enumerate() {
            f(item, &format!("{path}[{i}]"), issues);
        }
    }
}

fn walk_drive(value: &Value, path: &str, issues: &mut Vec<ConfigIssue>) {
    if let Some(t) = value.as_table() {
        check_keys(t, path, DRIVE_KEYS, issues);
        if let Some(op) = t.get("operator") {
            walk_matrix(op, &join(path, "operator"), issues);
        }
        if let Some(a) = t.get("amplitude") {
            walk_amplitude(a, &join(path, "amplitude"), issues);
        }
    }
}

fn walk_model(model: &Table, issues: &mut Vec<ConfigIssue>) {
    match model.get("kind").and_then(Value::as_str) {
        Some("three_level") => {
            check_keys(model, "model", THREE_LEVEL_KEYS, issues);
            for key in ["drive_g", "drive_f"] {
                if let Some(a) = model.get(key) {
                    walk_amplitude(a, &join("model", key), issues);
                }
            }
        }
        Some("generic") => {
            check_keys(model, "model", GENERIC_KEYS, issues);
            if let Some(h) = model.get("hamiltonian") {
                walk_matrix(h, "model.hamiltonian", issues);
            }
            if let Some(d) = model.get("drive") {
                walk_array(d, "model.drive", issues, walk_drive);
            }
            if let Some(j) = model.get("jumps") {
                walk_array(j, "model.jumps", issues, walk_matrix);
            }
        }
        Some(other) => issues.push(ConfigIssue::new(
            "model.kind",
            format!("unknown model kind `{other}`, expected `three_level` or `generic`"),
        )),
        None => issues.push(ConfigIssue::new("model.kind", "missing")),
    }
}

/// Unknown-key pass over the raw document.
fn structural_issues(doc: &Table) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    if !doc.contains_key("experiment") {
        issues.push(ConfigIssue::new("experiment", "missing"));
    }
    check_keys(doc, "", TOP_KEYS, &mut issues);
    if let Some(t) = doc.get("time").and_then(Value::as_table) {
        check_keys(t, "time", TIME_KEYS, &mut issues);
    }
    if let Some(t) = doc.get("ensemble").and_then(Value::as_table) {
        check_keys(t, "ensemble", ENSEMBLE_KEYS, &mut issues);
    }
    if let Some(t) = doc.get("model").and_then(Value::as_table) {
        walk_model(t, &mut issues);
    }
    if let Some(v) = doc.get("initial_states") {
        walk_array(v, "initial_states", &mut issues, walk_matrix);
    }
    if doc.get("experiment").and_then(Value::as_str) == Some("figS1")
        && doc
            .get("model")
            .and_then(|m| m.get("include_drive"))
            .and_then(Value::as_bool)
            == Some(true)
    {
        issues.push(ConfigIssue::new(
            "model.include_drive",
            "figS1 uses the undriven model",
        ));
    }
    issues
}

fn path_string(path: &serde_path_to_error::Path) -> String {
    let s = path.to_string();
    if s == "." {
        String::new()
    } else {
        s
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl ExperimentConfig {
    pub fn model_or_default(&self) -> ModelConfig {
        self.model.clone().unwrap_or_else(|| {
            let mut params = ThreeLevelParams::paper();
            if self.experiment == ExperimentKind::FigS1 {
                params.include_drive = false;
            }
            ModelConfig::ThreeLevel(params)
        })
    }

    pub fn protocols_or_default(&self) -> Vec<Protocol> {
        self.protocols.clone().unwrap_or_else(|| Protocol::ALL.to_vec())
    }

    /// Output quantities, parsed. Invalid names must have been rejected by
    /// [`validate_config`].
    pub fn quantity_list(&self) -> Vec<Quantity> {
        match self.experiment.fixed_quantities() {
            Some(q) => q.to_vec(),
            None => self
                .quantities
                .iter()
                .flatten()
                .filter_map(|s| s.parse().ok())
                .collect(),
        }
    }

    pub fn output_dir_or_default(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("results/{}", self.experiment)))
    }

    /// Copy with every default written out.
    pub fn materialize(&self) -> ExperimentConfig {
        let mut out = self.clone();
        let mut model = self.model_or_default();
        if let (ExperimentKind::FigS1, ModelConfig::ThreeLevel(p)) = (self.experiment, &mut model) {
            p.include_drive = false;
        }
        out.output_dir = Some(self.output_dir_or_default());
        out.protocols = Some(self.protocols_or_default());
        if self.experiment.fixed_quantities().is_none() {
            out.quantities = Some(self.quantity_list().iter().map(|q| q.name().to_string()).collect());
        }
        if self.initial_states.is_none() {
            let ensemble = self.ensemble.clone().unwrap_or_default();
            out.ensemble = Some(EnsembleConfig {
                dim: Some(ensemble.dim.unwrap_or(model.dim())),
                count: Some(ensemble.count.unwrap_or(self.experiment.default_count())),
                seed: ensemble.seed,
            });
        }
        out.model = Some(model);
        out
    }

    pub fn seed(&self) -> Option<u64> {
        self.ensemble.as_ref().map(|e| e.seed)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Explicit initial states, validated against `validation_tol`.
    pub fn explicit_states(&self, dim: usize) -> Result<Option<Vec<DensityMatrix>>, Vec<ConfigIssue>> {
        let Some(specs) = &self.initial_states else {
            return Ok(None);
        };
        let mut issues = Vec::new();
        let mut states = Vec::new();
        for (i, spec) in specs.iter().enumerate() {
            let path = format!("initial_states[{i}]");
            match spec.to_matrix(dim) {
                Ok(m) => match validate_density(m, self.validation_tol) {
                    Ok(rho) => states.push(rho),
                    Err(diag) => issues.push(ConfigIssue::new(path, format!("not a density matrix: {diag}"))),
                },
                Err(msg) => issues.push(ConfigIssue::new(path, msg)),
            }
        }
        if issues.is_empty() {
            Ok(Some(states))
        } else {
            Err(issues)
        }
    }

    fn semantic_issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let t = &self.time;
        if !t.t_i.is_finite() {
            issues.push(ConfigIssue::new("time.t_i", "must be finite"));
        }
        if !(t.t_f.is_finite() && t.t_f > t.t_i) {
            issues.push(ConfigIssue::new("time.t_f", format!("must be finite and greater than t_i = {}", t.t_i)));
        }
        if t.n_snapshots == 0 {
            issues.push(ConfigIssue::new("time.n_snapshots", "must be at least 1"));
        }
        if !positive(t.dt) {
            issues.push(ConfigIssue::new("time.dt", format!("must be positive, got {}", t.dt)));
        } else if t.t_f > t.t_i && t.dt > t.t_f - t.t_i {
            issues.push(ConfigIssue::new("time.dt", "exceeds the time span"));
        }
        for (name, v) in [
            ("merge_tol", self.merge_tol),
            ("degeneracy_tol", self.degeneracy_tol),
            ("validation_tol", self.validation_tol),
        ] {
            if !positive(v) {
                issues.push(ConfigIssue::new(name, format!("must be positive, got {v}")));
            }
        }
        if let Some(beta) = self.beta_reference {
            if !positive(beta) {
                issues.push(ConfigIssue::new("beta_reference", format!("must be positive, got {beta}")));
            }
        }

        let model = self.model_or_default();
        let dim = model.dim();
        if dim == 0 {
            issues.push(ConfigIssue::new("model.dim", "must be at least 1"));
        } else if let Err(msg) = model.build() {
            issues.push(ConfigIssue::new("model", msg));
        }
        if self.experiment == ExperimentKind::Sweep && !matches!(model, ModelConfig::ThreeLevel(_)) {
            issues.push(ConfigIssue::new("model.kind", "sweep runs on the three_level model"));
        }

        match (&self.initial_states, &self.ensemble) {
            (Some(_), Some(_)) => issues.push(ConfigIssue::new(
                "initial_states",
                "give either initial_states or ensemble, not both",
            )),
            (Some(states), None) => {
                if states.is_empty() {
                    issues.push(ConfigIssue::new("initial_states", "must not be empty"));
                } else if dim > 0 {
                    if let Err(mut more) = self.explicit_states(dim) {
                        issues.append(&mut more);
                    }
                }
            }
            (None, Some(e)) => {
                if e.dim.is_some_and(|d| d != dim) {
                    issues.push(ConfigIssue::new("ensemble.dim", format!("must match the model dimension {dim}")));
                }
                if e.count == Some(0) {
                    issues.push(ConfigIssue::new("ensemble.count", "must be at least 1"));
                }
            }
            (None, None) => {}
        }

        let protocols = self.protocols_or_default();
        if protocols.is_empty() {
            issues.push(ConfigIssue::new("protocols", "must not be empty"));
        }
        match (self.experiment.fixed_quantities(), &self.quantities) {
            (Some(_), Some(_)) => issues.push(ConfigIssue::new(
                "quantities",
                format!("{} has a fixed set of quantities", self.experiment),
            )),
            (None, None) => issues.push(ConfigIssue::new(
                "quantities",
                format!("required for {}", self.experiment),
            )),
            (None, Some(list)) if list.is_empty() => {
                issues.push(ConfigIssue::new("quantities", "must not be empty"))
            }
            _ => {}
        }
        if let Some(list) = &self.quantities {
            for (i, name) in list.iter().enumerate() {
                let path = format!("quantities[{i}]");
                match name.parse::<Quantity>() {
                    Ok(q) if q.needs_beta() && self.beta_reference.is_none() => {
                        issues.push(ConfigIssue::new(path, format!("`{name}` needs beta_reference")))
                    }
                    Ok(_) => {}
                    Err(msg) => issues.push(ConfigIssue::new(path, msg)),
                }
            }
        }
        let mut missing: Vec<Protocol> = self
            .quantity_list()
            .iter()
            .flat_map(|q| q.protocols().iter().copied())
            .filter(|p| !protocols.contains(p))
            .collect();
        missing.sort();
        missing.dedup();
        if !missing.is_empty() {
            let names: Vec<&str> = missing.iter().map(|p| p.name()).collect();
            issues.push(ConfigIssue::new(
                "protocols",
                format!("the requested quantities also need {}", names.join(", ")),
            ));
        }
        issues
    }
}

/// Parses and checks a configuration document, reporting every problem found.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let doc: Table = raw
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![ConfigIssue::new("", e.message().trim())]))?;
    let mut issues = structural_issues(&doc);
    if !issues.is_empty() {
        return Err(ConfigErrors(issues));
    }
    let config: ExperimentConfig =
        serde_path_to_error::deserialize(Value::Table(doc)).map_err(|e| {
            ConfigErrors(vec![ConfigIssue::new(path_string(e.path()), e.inner().to_string())])
        })?;
    issues = config.semantic_issues();
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(issues))
    }
}
