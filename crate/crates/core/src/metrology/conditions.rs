use crate::channels::ProjectorSet;
use crate::error::{Error, Result};
use crate::hilbert::{c64, check_dim, sym_covariance, CVector, C64};

use super::{report_with, sectors, QfiReport, Scenario, PROBABILITY_FLOOR};

/// Default tolerance on the residuals of the loss conditions.
pub const DEFAULT_CONDITION_TOL: f64 = 1e-8;

/// Outcome of one algebraic loss condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub holds: bool,
    /// Absolute residuals, one per clause.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
}

impl ConditionCheck {
    fn new(residuals: Vec<f64>, tol: f64) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Self {
            holds: max_residual <= tol,
            residuals,
            max_residual,
            tol,
        }
    }
}

/// `|Im <psi|P_i|dpsi> - c p_i| / sqrt(p_i)` with `c = Im <psi|dpsi>`.
/// The loss equals four times the squared norm of this vector.
pub fn no_loss_residuals(s: &Scenario, p: &ProjectorSet) -> Result<Vec<f64>> {
    let enc = s.encode()?;
    let c = enc.psi.inner(&enc.dpsi).im;
    Ok(sectors(&enc, p)?
        .into_iter()
        .filter(|sec| sec.p >= PROBABILITY_FLOOR)
        .map(|sec| ((sec.overlap.im - c * sec.p) / sec.p.sqrt()).abs())
        .collect())
}

/// `|Re <psi_i|dpsi>|` for each populated sector, then `|<phi_j|dpsi>|` for a
/// Gram–Schmidt completion `{phi_j}` of the sector states. Bob's QFI equals four
/// times the squared norm of this vector.
pub fn max_loss_residuals(s: &Scenario, p: &ProjectorSet) -> Result<Vec<f64>> {
    check_dim(p.dim(), s.dim())?;
    let enc = s.encode()?;
    let psi = enc.psi.amplitudes();
    let mut states = Vec::new();
    let mut residuals = Vec::new();
    for i in 0..p.len() {
        let ppsi = p.project(i, psi);
        let pi = ppsi.norm_squared();
        if pi < PROBABILITY_FLOOR {
            continue;
        }
        let psi_i = ppsi * c64(1.0 / pi.sqrt(), 0.0);
        residuals.push(psi_i.dotc(&enc.dpsi).re.abs());
        states.push(psi_i);
    }
    for phi in complete_basis(states, s.dim())? {
        residuals.push(phi.dotc(&enc.dpsi).norm());
    }
    Ok(residuals)
}

/// Extends an orthonormal family to a basis of the whole space with modified
/// Gram–Schmidt (two passes) over the standard basis; returns only the new vectors.
fn complete_basis(mut basis: Vec<CVector>, dim: usize) -> Result<Vec<CVector>> {
    let given = basis.len();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[k] = c64(1.0, 0.0);
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dotc(&v);
                v -= q * coeff;
            }
        }
        let norm = v.norm();
        if norm > 1e-3 {
            basis.push(v / c64(norm, 0.0));
        }
    }
    if basis.len() != dim {
        return Err(Error::Inconsistent(format!(
            "Gram-Schmidt completion produced {} of {dim} vectors",
            basis.len()
        )));
    }
    Ok(basis.split_off(given))
}

/// Whether the twirl leaves the QFI unchanged.
pub fn check_no_loss(s: &Scenario, p: &ProjectorSet, tol: f64) -> Result<bool> {
    Ok(ConditionCheck::new(no_loss_residuals(s, p)?, tol).holds)
}

/// Whether the twirl destroys all information about the parameter.
pub fn check_max_loss(s: &Scenario, p: &ProjectorSet, tol: f64) -> Result<bool> {
    Ok(ConditionCheck::new(max_loss_residuals(s, p)?, tol).holds)
}

/// Necessary (not sufficient) indicators for the two extreme cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecessaryConditions {
    /// `Cov(G, K)`, zero whenever nothing is lost.
    pub cov_gk: f64,
    /// `<[G, K]>`, zero whenever everything is lost.
    pub mean_commutator: C64,
}

pub fn necessary_conditions(s: &Scenario) -> Result<NecessaryConditions> {
    let enc = s.encode()?;
    let psi = enc.psi.amplitudes();
    let cov_gk = sym_covariance(s.g(), s.k(), &enc.psi)?;
    let gpsi = s.g().apply(psi);
    let kpsi = s.k().apply(psi);
    // <G psi|K psi> - <K psi|G psi> = 2i Im <G psi|K psi>
    let mean_commutator = c64(0.0, 2.0 * gpsi.dotc(&kpsi).im);
    Ok(NecessaryConditions {
        cov_gk,
        mean_commutator,
    })
}

/// Everything the `check` command prints.
#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub report: QfiReport,
    pub no_loss: ConditionCheck,
    pub max_loss: ConditionCheck,
    pub necessary: NecessaryConditions,
    /// No loss implies `Cov(G, K) = 0`; false only if that implication is violated.
    pub no_loss_implication: bool,
    /// Max loss implies `<[G, K]> = 0`; false only if that implication is violated.
    pub max_loss_implication: bool,
}

pub fn audit(s: &Scenario, p: &ProjectorSet, tol: f64) -> Result<Audit> {
    let report = report_with(s, p)?;
    let no_loss = ConditionCheck::new(no_loss_residuals(s, p)?, tol);
    let max_loss = ConditionCheck::new(max_loss_residuals(s, p)?, tol);
    let necessary = necessary_conditions(s)?;
    let implication_tol = 1e-6;
    Ok(Audit {
        no_loss_implication: !no_loss.holds || necessary.cov_gk.abs() <= implication_tol,
        max_loss_implication: !max_loss.holds
            || necessary.mean_commutator.norm() <= implication_tol,
        report: QfiReport {
            no_loss: no_loss.holds,
            max_loss: max_loss.holds,
            ..report
        },
        no_loss,
        max_loss,
        necessary,
    })
}
