//! Turns one sweep point of a validated config into a scenario plus the
//! parameter columns that describe it.

use qfi_core::models::{
    example1_scenario, example2_system, example3_scenario, mean_energy, qrf_amplitudes,
    Example2System, QrfStateSpec, DEFAULT_KAPPA, DEFAULT_OMEGA,
};
use qfi_core::{Error, Scenario, DEFAULT_CLUSTER_TOL};

use crate::config::{as_count, Params, RunConfig, ScenarioKind};
use crate::custom::custom_scenario;
use crate::error::{invalid, CliResult};
use crate::output::Value;

pub struct Point {
    pub scenario: Scenario,
    pub cluster_tol: f64,
    /// Resolved parameters, in output column order.
    pub columns: Vec<(String, Value)>,
}

/// Builds scenarios across a sweep, reusing the normal-mode system of the
/// coupled-oscillator model while its parameters stay fixed.
#[derive(Default)]
pub struct Builder {
    oscillators: Option<((u64, u64, usize, u64), Example2System)>,
}

const INTEGER_PARAMS: [&str; 3] = ["N", "truncation", "n_max"];

fn columns(p: &Params) -> Vec<(String, Value)> {
    p.present()
        .into_iter()
        .map(|(name, v)| {
            let value = if INTEGER_PARAMS.contains(&name) {
                Value::Int(v.round() as u64)
            } else {
                Value::Real(v)
            };
            (name.to_string(), value)
        })
        .collect()
}

fn qrf_spec(cfg: &RunConfig, p: &Params) -> CliResult<QrfStateSpec> {
    if let Some(spec) = &cfg.qrf {
        return Ok(spec.clone());
    }
    if let Some(n) = p.integer("N")? {
        return Ok(QrfStateSpec::UniformSuperposition { n });
    }
    if let Some(a2) = p.alpha_sq {
        if a2 < 0.0 {
            return Err(crate::error::CliError::validation(format!(
                "alpha_sq must be non-negative, got {a2}"
            )));
        }
        return Ok(QrfStateSpec::Coherent { alpha: a2.sqrt() });
    }
    let e = p.mean_energy.expect("validated: one QRF source is present");
    let x = p
        .x_fraction
        .expect("validated: x_fraction accompanies mean_energy");
    QrfStateSpec::from_energy_fraction(e, x).map_err(invalid)
}

/// Smallest truncation whose discarded tail is within tolerance (at least 2 levels).
fn auto_truncation(spec: &QrfStateSpec) -> CliResult<usize> {
    match qrf_amplitudes(spec, 1) {
        Ok(_) => Ok(2),
        Err(Error::InsufficientTruncation { required, .. }) => Ok(required.max(2)),
        Err(e) => Err(invalid(e)),
    }
}

impl Builder {
    pub fn point(&mut self, cfg: &RunConfig, value: Option<f64>) -> CliResult<Point> {
        let kind = cfg.kind()?;
        let mut p = cfg.params_at(value)?;
        let cluster_tol = *p.cluster_tol.get_or_insert(DEFAULT_CLUSTER_TOL);
        let lambda = *p.lambda.get_or_insert(0.0);
        let mut extra = Vec::new();
        let scenario = match kind {
            ScenarioKind::Example1 => {
                let spec = qrf_spec(cfg, &p)?;
                let truncation = match p.truncation {
                    Some(t) => as_count("truncation", t)?,
                    None => auto_truncation(&spec)?,
                };
                p.truncation = Some(truncation as f64);
                let qrf = qrf_amplitudes(&spec, truncation).map_err(invalid)?;
                extra.push((
                    "qrf_mean_energy".to_string(),
                    Value::Real(mean_energy(&qrf)),
                ));
                example1_scenario(&qrf, lambda).map_err(invalid)?
            }
            ScenarioKind::Example2 => {
                let omega = *p.omega.get_or_insert(DEFAULT_OMEGA);
                let kappa = *p.kappa.get_or_insert(DEFAULT_KAPPA);
                let n = p.integer("N")?.expect("validated: N is present");
                let n_max = p.integer("n_max")?.unwrap_or(n);
                p.n_max = Some(n_max as f64);
                let key = (
                    omega.to_bits(),
                    kappa.to_bits(),
                    n_max,
                    cluster_tol.to_bits(),
                );
                if self.oscillators.as_ref().map_or(true, |(k, _)| *k != key) {
                    let sys = example2_system(omega, kappa, n_max, cluster_tol).map_err(invalid)?;
                    self.oscillators = Some((key, sys));
                }
                let (_, sys) = self.oscillators.as_ref().expect("just built");
                sys.scenario(n, lambda).map_err(invalid)?
            }
            ScenarioKind::Example3 => {
                let z = p.z.expect("validated: z is present");
                let rest = (1.0 - z * z).max(0.0).sqrt();
                example3_scenario([rest, 0.0, z], lambda).map_err(invalid)?
            }
            ScenarioKind::Custom => custom_scenario(cfg, &p)?,
        };
        let mut columns = columns(&p);
        columns.extend(extra);
        Ok(Point {
            scenario,
            cluster_tol,
            columns,
        })
    }
}
