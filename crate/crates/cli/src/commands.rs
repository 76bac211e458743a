use std::fmt::Write as _;
use std::path::PathBuf;

use qfi_core::metrology::{audit, report_with, Audit, QfiReport, DEFAULT_CONDITION_TOL};
use qfi_core::models::coherent_qfi_hypergeometric;
use qfi_core::probeopt::{optimize_probe, EnergyConstraint, OptProblem, OptResult};
use qfi_core::Error;

use crate::config::{Format, RunConfig, ScenarioKind};
use crate::error::{numerical, CliError, CliResult};
use crate::output::{emit, Table, Value};
use crate::scenarios::{Builder, Point};

/// Flags shared by every subcommand; they override the matching config fields.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Options {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for the probe optimizer's random starts.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative gap below which eigenvalues of G are treated as degenerate.
    #[arg(long)]
    pub cluster_tol: Option<f64>,
    /// Suppress informational messages on stderr.
    #[arg(long)]
    pub quiet: bool,
}

impl Options {
    fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::from_path(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.rng_seed = Some(seed);
        }
        if let Some(t) = self.cluster_tol {
            cfg.params.cluster_tol = Some(t);
        }
        Ok(cfg)
    }

    fn format(&self, cfg: &RunConfig) -> Format {
        self.format
            .or_else(|| cfg.output.as_ref().map(|o| o.format))
            .unwrap_or_default()
    }

    fn out(&self, cfg: &RunConfig) -> Option<PathBuf> {
        self.out
            .clone()
            .or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()))
    }

    fn finish(&self, cfg: &RunConfig, text: &str, records: usize) -> CliResult<()> {
        let out = self.out(cfg);
        emit(text, out.as_deref())?;
        if let (Some(p), false) = (out, self.quiet) {
            eprintln!("wrote {records} record(s) to {}", p.display());
        }
        Ok(())
    }
}

/// Evaluates one point; refuses to return a report outside `0 <= bob <= alice`.
fn evaluate(point: &Point) -> CliResult<QfiReport> {
    let p = point
        .scenario
        .projectors(point.cluster_tol)
        .map_err(numerical)?;
    let r = report_with(&point.scenario, &p).map_err(numerical)?;
    if !(r.bob_qfi >= 0.0 && r.bob_qfi <= r.alice_qfi + 1e-9) {
        return Err(CliError::numerical(format!(
            "bob_qfi {} is outside [0, alice_qfi = {}]",
            r.bob_qfi, r.alice_qfi
        )));
    }
    Ok(r)
}

fn report_columns(r: &QfiReport) -> Vec<(String, Value)> {
    vec![
        ("alice_qfi".into(), Value::Real(r.alice_qfi)),
        ("bob_qfi".into(), Value::Real(r.bob_qfi)),
        ("loss".into(), Value::Real(r.loss)),
        ("no_loss".into(), Value::Bool(r.no_loss)),
        ("max_loss".into(), Value::Bool(r.max_loss)),
        ("cov_gk".into(), Value::Real(r.cov_gk)),
        (
            "mean_commutator_re".into(),
            Value::Real(r.mean_commutator.re),
        ),
        (
            "mean_commutator_im".into(),
            Value::Real(r.mean_commutator.im),
        ),
    ]
}

/// Evaluates every sweep point in order.
pub fn run_table(cfg: &RunConfig) -> CliResult<Table> {
    cfg.validate()?;
    let mut builder = Builder::default();
    let mut table = Table::default();
    for (i, v) in cfg.points().into_iter().enumerate() {
        let point = builder.point(cfg, v)?;
        let report = evaluate(&point)?;
        let mut row = vec![("point".to_string(), Value::Int(i as u64))];
        row.extend(point.columns);
        row.extend(report_columns(&report));
        table.push(row)?;
    }
    Ok(table)
}

pub fn run(opts: &Options) -> CliResult<()> {
    let cfg = opts.load()?;
    let table = run_table(&cfg)?;
    opts.finish(&cfg, &table.render(opts.format(&cfg)), table.len())
}

/// Condition audit of a single-point config.
pub fn check_audit(cfg: &RunConfig) -> CliResult<(Point, Audit)> {
    cfg.validate()?;
    if cfg.sweep.is_some() {
        return Err(CliError::validation(
            "check takes a single point; remove `sweep`",
        ));
    }
    let point = Builder::default().point(cfg, None)?;
    evaluate(&point)?;
    let p = point
        .scenario
        .projectors(point.cluster_tol)
        .map_err(numerical)?;
    let a = audit(&point.scenario, &p, DEFAULT_CONDITION_TOL).map_err(numerical)?;
    Ok((point, a))
}

fn clause(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

pub fn check_text(kind: ScenarioKind, point: &Point, a: &Audit) -> String {
    let r = &a.report;
    let mut s = String::new();
    let _ = writeln!(s, "scenario={kind}");
    for (name, v) in &point.columns {
        let _ = writeln!(s, "{name}={}", display(v));
    }
    let _ = writeln!(s, "alice_qfi={:.16e}", r.alice_qfi);
    let _ = writeln!(s, "bob_qfi={:.16e}", r.bob_qfi);
    let _ = writeln!(s, "loss={:.16e}", r.loss);
    let _ = writeln!(s, "no_loss={}", r.no_loss);
    let _ = writeln!(s, "max_loss={}", r.max_loss);
    let _ = writeln!(s, "cov_gk={:.16e}", r.cov_gk);
    let _ = writeln!(
        s,
        "mean_commutator=[{:.16e}, {:.16e}]",
        r.mean_commutator.re, r.mean_commutator.im
    );
    let _ = writeln!(
        s,
        "clause no_loss (Im<psi|P_i|dpsi> = c p_i for all i): {}, max residual {:.3e}, tol {:.1e}",
        clause(a.no_loss.holds),
        a.no_loss.max_residual,
        a.no_loss.tol
    );
    let _ = writeln!(
        s,
        "clause max_loss (Re<psi|P_i|dpsi> = 0 and <phi_j|dpsi> = 0): {}, max residual {:.3e}, tol {:.1e}",
        clause(a.max_loss.holds),
        a.max_loss.max_residual,
        a.max_loss.tol
    );
    let _ = writeln!(
        s,
        "necessary no_loss => cov_gk = 0: {}",
        clause(a.no_loss_implication)
    );
    let _ = writeln!(
        s,
        "necessary max_loss => <[G,K]> = 0: {}",
        clause(a.max_loss_implication)
    );
    s
}

fn display(v: &Value) -> String {
    match v {
        Value::Real(x) => format!("{x:.16e}"),
        Value::Int(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(t) => t.clone(),
    }
}

pub fn check_json(kind: ScenarioKind, point: &Point, a: &Audit) -> String {
    let r = &a.report;
    let params: serde_json::Map<String, serde_json::Value> = point
        .columns
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::to_value(v).expect("scalar")))
        .collect();
    let condition = |c: &qfi_core::metrology::ConditionCheck| {
        serde_json::json!({
            "holds": c.holds,
            "max_residual": c.max_residual,
            "residuals": c.residuals,
            "tol": c.tol,
        })
    };
    let value = serde_json::json!({
        "scenario": kind.to_string(),
        "params": params,
        "alice_qfi": r.alice_qfi,
        "bob_qfi": r.bob_qfi,
        "loss": r.loss,
        "no_loss": condition(&a.no_loss),
        "max_loss": condition(&a.max_loss),
        "cov_gk": r.cov_gk,
        "mean_commutator": [r.mean_commutator.re, r.mean_commutator.im],
        "no_loss_implies_zero_covariance": a.no_loss_implication,
        "max_loss_implies_zero_mean_commutator": a.max_loss_implication,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("json value serializes");
    s.push('\n');
    s
}

pub fn check(opts: &Options) -> CliResult<()> {
    let cfg = opts.load()?;
    let (point, a) = check_audit(&cfg)?;
    let kind = cfg.kind()?;
    let text = match opts.format(&cfg) {
        Format::Json => check_json(kind, &point, &a),
        Format::Csv => check_text(kind, &point, &a),
    };
    opts.finish(&cfg, &text, 1)
}

/// Number of Fock levels and the energy grid for `optimize`.
fn optimize_inputs(cfg: &RunConfig) -> CliResult<(usize, Vec<f64>)> {
    if cfg.kind()? != ScenarioKind::Example1 {
        return Err(CliError::validation(
            "optimize applies to scenario example1 only",
        ));
    }
    if cfg.qrf.is_some() {
        return Err(CliError::validation(
            "optimize chooses the QRF state itself; remove `qrf`",
        ));
    }
    let p = &cfg.params;
    if let Some((name, _)) = p
        .present()
        .into_iter()
        .find(|(n, _)| !["N", "mean_energy"].contains(n))
    {
        return Err(CliError::validation(format!(
            "parameter `{name}` does not apply to optimize"
        )));
    }
    let n = p.integer("N")?.ok_or_else(|| {
        CliError::validation("optimize needs parameter `N` (number of Fock levels)")
    })?;
    let energies =
        match (&cfg.sweep, p.mean_energy) {
            (Some(s), None) if s.variable == "mean_energy" => {
                if s.points < 1 {
                    return Err(CliError::validation("sweep needs at least one point"));
                }
                s.values()
            }
            (None, Some(e)) => vec![e],
            _ => return Err(CliError::validation(
                "optimize needs either a `mean_energy` sweep or a single `mean_energy` parameter",
            )),
        };
    Ok((n, energies))
}

fn solve(n: usize, constraint: EnergyConstraint, seed: u64) -> CliResult<OptResult> {
    let mut problem = OptProblem::new(n, constraint);
    problem.rng_seed = seed;
    optimize_probe(&problem).map_err(|e| match e {
        Error::Infeasible(_) | Error::InvalidParameter(_) => CliError::validation(e.to_string()),
        other => numerical(other),
    })
}

/// Optimal, coherent and uniform-superposition QFI across the energy grid.
pub fn optimize_table(cfg: &RunConfig) -> CliResult<Table> {
    let (n, energies) = optimize_inputs(cfg)?;
    let seed = cfg.rng_seed.unwrap_or(0);
    let free = solve(n, EnergyConstraint::NormalizationOnly, seed)?;
    let mut table = Table::default();
    for e in energies {
        let fixed = solve(n, EnergyConstraint::FixedMeanEnergy(e), seed)?;
        let coherent = coherent_qfi_hypergeometric(e).map_err(numerical)?;
        table.push(vec![
            ("mean_energy".into(), Value::Real(e)),
            ("qfi_uniform".into(), Value::Real(2.0 * e / (2.0 * e + 1.0))),
            ("qfi_coherent".into(), Value::Real(coherent)),
            ("qfi_optimal".into(), Value::Real(fixed.qfi)),
            ("qfi_optimal_free".into(), Value::Real(free.qfi)),
            ("free_mean_energy".into(), Value::Real(free.mean_energy)),
        ])?;
    }
    Ok(table)
}

pub fn optimize(opts: &Options) -> CliResult<()> {
    let cfg = opts.load()?;
    let table = optimize_table(&cfg)?;
    opts.finish(&cfg, &table.render(opts.format(&cfg)), table.len())
}

/// Validates a config and builds every scenario it describes without
/// evaluating them. Configs meant for `optimize` are recognized as such.
pub fn load_summary(cfg: &RunConfig) -> CliResult<String> {
    if let Err(e) = cfg.validate() {
        return match optimize_inputs(cfg) {
            Ok((n, energies)) => Ok(format!(
                "valid for optimize: N={n} energies={}\n",
                energies.len()
            )),
            Err(_) => Err(e),
        };
    }
    let mut builder = Builder::default();
    let points = cfg.points();
    let mut dim = 0;
    for v in &points {
        dim = builder.point(cfg, *v)?.scenario.dim();
    }
    Ok(format!(
        "valid: scenario={} dim={dim} points={}\n",
        cfg.kind()?,
        points.len()
    ))
}

pub fn load(opts: &Options) -> CliResult<()> {
    let cfg = opts.load()?;
    let summary = load_summary(&cfg)?;
    if !opts.quiet {
        emit(&summary, opts.out(&cfg).as_deref())?;
    }
    Ok(())
}
