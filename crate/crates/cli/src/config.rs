//! Run configuration as read from JSON. Unknown keys are rejected at every level.

use std::fmt;
use std::path::{Path, PathBuf};

use qfi_core::models::QrfStateSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Example1,
    Example2,
    Example3,
    Custom,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::Example3 => "example3",
            Self::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `points` values from `start` to `stop` inclusive, evenly spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Named real parameters. Integer-valued ones (`N`, `truncation`, `n_max`)
/// must be integral.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_sq: Option<f64>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_fraction: Option<f64>,
}

impl Params {
    /// Names in output column order.
    pub const NAMES: [&'static str; 11] = [
        "N",
        "alpha_sq",
        "mean_energy",
        "x_fraction",
        "truncation",
        "omega",
        "kappa",
        "n_max",
        "z",
        "lambda",
        "cluster_tol",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut Option<f64>> {
        Some(match name {
            "omega" => &mut self.omega,
            "kappa" => &mut self.kappa,
            "z" => &mut self.z,
            "alpha_sq" => &mut self.alpha_sq,
            "N" => &mut self.n,
            "lambda" => &mut self.lambda,
            "cluster_tol" => &mut self.cluster_tol,
            "truncation" => &mut self.truncation,
            "n_max" => &mut self.n_max,
            "mean_energy" => &mut self.mean_energy,
            "x_fraction" => &mut self.x_fraction,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "omega" => self.omega,
            "kappa" => self.kappa,
            "z" => self.z,
            "alpha_sq" => self.alpha_sq,
            "N" => self.n,
            "lambda" => self.lambda,
            "cluster_tol" => self.cluster_tol,
            "truncation" => self.truncation,
            "n_max" => self.n_max,
            "mean_energy" => self.mean_energy,
            "x_fraction" => self.x_fraction,
            _ => None,
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> CliResult<()> {
        let slot = self
            .slot(name)
            .ok_or_else(|| CliError::validation(format!("unknown parameter `{name}`")))?;
        *slot = Some(value);
        Ok(())
    }

    /// Present parameters in column order.
    pub fn present(&self) -> Vec<(&'static str, f64)> {
        Self::NAMES
            .iter()
            .filter_map(|&n| self.get(n).map(|v| (n, v)))
            .collect()
    }

    pub fn integer(&self, name: &str) -> CliResult<Option<usize>> {
        self.get(name).map(|v| as_count(name, v)).transpose()
    }
}

pub(crate) fn as_count(name: &str, v: f64) -> CliResult<usize> {
    let r = v.round();
    if !v.is_finite() || r < 0.0 || (v - r).abs() > 1e-9 {
        return Err(CliError::validation(format!(
            "parameter `{name}` must be a non-negative integer, got {v}"
        )));
    }
    Ok(r as usize)
}

/// Complex number as `[re, im]`.
pub type JsonComplex = [f64; 2];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Defaults to `custom` when the custom-scenario fields are present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qrf: Option<QrfStateSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Row-major, `dim * dim` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_matrix: Option<Vec<JsonComplex>>,
    /// Row-major, `dim * dim` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_matrix: Option<Vec<JsonComplex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0: Option<Vec<JsonComplex>>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
            .map_err(|e| CliError::parse(format!("{}: {}", path.display(), e.message)))
    }

    fn has_custom_fields(&self) -> bool {
        self.dim.is_some()
            || self.k_matrix.is_some()
            || self.g_matrix.is_some()
            || self.psi0.is_some()
    }

    pub fn kind(&self) -> CliResult<ScenarioKind> {
        match self.scenario {
            Some(k) => Ok(k),
            None if self.has_custom_fields() => Ok(ScenarioKind::Custom),
            None => Err(CliError::validation("`scenario` is required")),
        }
    }

    /// Sweep values, or a single point when there is no sweep.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values().into_iter().map(Some).collect(),
            None => vec![None],
        }
    }

    /// Parameters at one sweep point.
    pub fn params_at(&self, value: Option<f64>) -> CliResult<Params> {
        let mut p = self.params.clone();
        if let (Some(s), Some(v)) = (&self.sweep, value) {
            p.set(&s.variable, v)?;
        }
        Ok(p)
    }

    /// Structural checks that do not need any numerics.
    pub fn validate(&self) -> CliResult<()> {
        let kind = self.kind()?;
        if let Some(s) = &self.sweep {
            if s.points < 1 {
                return Err(CliError::validation("sweep needs at least one point"));
            }
            if !s.start.is_finite() || !s.stop.is_finite() {
                return Err(CliError::validation("sweep bounds must be finite"));
            }
            if !Params::NAMES.contains(&s.variable.as_str()) {
                return Err(CliError::validation(format!(
                    "unknown sweep variable `{}`",
                    s.variable
                )));
            }
            if !sweepable(kind, self.qrf.is_some()).contains(&s.variable.as_str()) {
                return Err(CliError::validation(format!(
                    "`{}` cannot be swept for scenario {kind}",
                    s.variable
                )));
            }
        }
        if kind != ScenarioKind::Custom && self.has_custom_fields() {
            return Err(CliError::validation(format!(
                "dim, k_matrix, g_matrix and psi0 only apply to the custom scenario, not {kind}"
            )));
        }
        if self.qrf.is_some() && kind != ScenarioKind::Example1 {
            return Err(CliError::validation(format!(
                "`qrf` does not apply to scenario {kind}"
            )));
        }
        for v in self.points() {
            let p = self.params_at(v)?;
            for (name, x) in p.present() {
                if !x.is_finite() {
                    return Err(CliError::validation(format!(
                        "parameter `{name}` is not finite"
                    )));
                }
            }
            if let Some(t) = p.cluster_tol {
                if !(t > 0.0) {
                    return Err(CliError::validation("cluster_tol must be positive"));
                }
            }
            required_params(kind, self.qrf.is_some(), &p)?;
        }
        Ok(())
    }
}

fn sweepable(kind: ScenarioKind, has_qrf: bool) -> &'static [&'static str] {
    match kind {
        ScenarioKind::Example1 if has_qrf => &["lambda", "truncation"],
        ScenarioKind::Example1 => &[
            "N",
            "alpha_sq",
            "mean_energy",
            "x_fraction",
            "lambda",
            "truncation",
        ],
        ScenarioKind::Example2 => &["N", "lambda", "omega", "kappa"],
        ScenarioKind::Example3 => &["z", "lambda"],
        ScenarioKind::Custom => &["lambda"],
    }
}

fn required_params(kind: ScenarioKind, has_qrf: bool, p: &Params) -> CliResult<()> {
    let missing =
        |name: &str| CliError::validation(format!("scenario {kind} needs parameter `{name}`"));
    let unused = |name: &str| {
        CliError::validation(format!(
            "parameter `{name}` does not apply to scenario {kind}"
        ))
    };
    let allowed: &[&str] = match kind {
        ScenarioKind::Example1 => &[
            "N",
            "alpha_sq",
            "mean_energy",
            "x_fraction",
            "truncation",
            "lambda",
            "cluster_tol",
        ],
        ScenarioKind::Example2 => &["N", "omega", "kappa", "n_max", "lambda", "cluster_tol"],
        ScenarioKind::Example3 => &["z", "lambda", "cluster_tol"],
        ScenarioKind::Custom => &["lambda", "cluster_tol"],
    };
    if let Some((name, _)) = p.present().into_iter().find(|(n, _)| !allowed.contains(n)) {
        return Err(unused(name));
    }
    match kind {
        ScenarioKind::Example1 => {
            let sources = [p.n.is_some(), p.alpha_sq.is_some(), p.mean_energy.is_some()]
                .iter()
                .filter(|&&b| b)
                .count();
            if has_qrf {
                if sources > 0 || p.x_fraction.is_some() {
                    return Err(CliError::validation(
                        "give the QRF state either as `qrf` or through N, alpha_sq or mean_energy, not both",
                    ));
                }
            } else if sources != 1 {
                return Err(CliError::validation(
                    "example1 needs `qrf` or exactly one of N, alpha_sq, mean_energy",
                ));
            } else if p.mean_energy.is_some() && p.x_fraction.is_none() {
                return Err(missing("x_fraction"));
            } else if p.mean_energy.is_none() && p.x_fraction.is_some() {
                return Err(unused("x_fraction"));
            }
            if let Some(n) = p.integer("N")? {
                if n < 1 {
                    return Err(CliError::validation("N must be at least 1"));
                }
            }
            p.integer("truncation")?;
        }
        ScenarioKind::Example2 => {
            let n = p.integer("N")?.ok_or_else(|| missing("N"))?;
            if n < 2 {
                return Err(CliError::validation("example2 needs N >= 2"));
            }
            if let Some(m) = p.integer("n_max")? {
                if m < n {
                    return Err(CliError::validation(format!(
                        "n_max = {m} is below N = {n}"
                    )));
                }
            }
        }
        ScenarioKind::Example3 => {
            let z = p.z.ok_or_else(|| missing("z"))?;
            if !(-1.0..=1.0).contains(&z) {
                return Err(CliError::validation(format!(
                    "z must lie in [-1, 1], got {z}"
                )));
            }
        }
        ScenarioKind::Custom => {}
    }
    Ok(())
}
