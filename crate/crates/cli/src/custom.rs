//! User-supplied scenarios: `dim`, row-major `k_matrix` and `g_matrix`, and
//! `psi0`, with complex entries as `[re, im]`.

use std::path::Path;

use qfi_core::{c64, CMatrix, CVector, HermitianOperator, Scenario, StateVector};

use crate::config::{JsonComplex, Params, RunConfig, ScenarioKind};
use crate::error::{invalid, CliError, CliResult};

/// Largest allowed `|<psi0|psi0> - 1|`; custom states are not silently rescaled.
pub const CUSTOM_NORM_TOL: f64 = 1e-10;

fn matrix(name: &str, dim: usize, entries: &[JsonComplex]) -> CliResult<HermitianOperator> {
    if entries.len() != dim * dim {
        return Err(CliError::validation(format!(
            "{name} has {} entries, expected dim^2 = {}",
            entries.len(),
            dim * dim
        )));
    }
    let m = CMatrix::from_fn(dim, dim, |r, c| {
        let [re, im] = entries[r * dim + c];
        c64(re, im)
    });
    HermitianOperator::new(m).map_err(|e| CliError::validation(format!("{name}: {e}")))
}

/// Builds the scenario described by the custom fields of `cfg`.
pub fn custom_scenario(cfg: &RunConfig, params: &Params) -> CliResult<Scenario> {
    let missing = |f: &str| CliError::validation(format!("custom scenario needs `{f}`"));
    let dim = cfg.dim.ok_or_else(|| missing("dim"))?;
    if dim == 0 {
        return Err(CliError::validation("dim must be positive"));
    }
    let k = matrix(
        "k_matrix",
        dim,
        cfg.k_matrix.as_deref().ok_or_else(|| missing("k_matrix"))?,
    )?;
    let g = matrix(
        "g_matrix",
        dim,
        cfg.g_matrix.as_deref().ok_or_else(|| missing("g_matrix"))?,
    )?;
    let psi = cfg.psi0.as_deref().ok_or_else(|| missing("psi0"))?;
    if psi.len() != dim {
        return Err(CliError::validation(format!(
            "psi0 has {} entries, expected dim = {dim}",
            psi.len()
        )));
    }
    let v = CVector::from_iterator(dim, psi.iter().map(|&[re, im]| c64(re, im)));
    let norm_sq = v.norm_squared();
    if !((norm_sq - 1.0).abs() <= CUSTOM_NORM_TOL) {
        return Err(CliError::validation(format!(
            "psi0 is not normalized: |psi0|^2 = {norm_sq}"
        )));
    }
    let psi = StateVector::new(v).map_err(invalid)?;
    Scenario::new(psi, k, g, params.lambda.unwrap_or(0.0)).map_err(invalid)
}

/// Reads and validates a custom scenario file. The file may carry any other
/// run-config fields; `scenario`, if present, must be `custom`.
pub fn load_custom(path: &Path) -> CliResult<Scenario> {
    let cfg = RunConfig::from_path(path)?;
    if cfg.scenario.is_some_and(|k| k != ScenarioKind::Custom) {
        return Err(CliError::validation(format!(
            "{}: expected a custom scenario",
            path.display()
        )));
    }
    let params = cfg.params_at(None)?;
    custom_scenario(&cfg, &params)
        .map_err(|e| CliError::new(e.kind, format!("{}: {}", path.display(), e.message)))
}

fn entries(m: &CMatrix) -> Vec<JsonComplex> {
    let n = m.nrows();
    (0..n * n)
        .map(|i| {
            let z = m[(i / n, i % n)];
            [z.re, z.im]
        })
        .collect()
}

/// The custom-scenario config for `s`; floats are written in shortest
/// round-trip form so that loading it back is bit-exact.
pub fn custom_config(s: &Scenario) -> RunConfig {
    RunConfig {
        scenario: Some(ScenarioKind::Custom),
        params: Params {
            lambda: Some(s.lambda()),
            ..Params::default()
        },
        dim: Some(s.dim()),
        k_matrix: Some(entries(s.k().matrix())),
        g_matrix: Some(entries(s.g().matrix())),
        psi0: Some(
            s.fiducial()
                .amplitudes()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        ),
        ..RunConfig::default()
    }
}

pub fn save_custom(path: &Path, s: &Scenario) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(&custom_config(s))
        .map_err(|e| CliError::numerical(format!("cannot serialize scenario: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
