//! Fisher-information quantities for a unitary family observed through the twirl.

mod conditions;
mod mixed;
mod pure;

use std::sync::OnceLock;

use crate::channels::{spectral_projectors, twirl, twirl_operator, ProjectorSet};
use crate::error::{Error, Result};
use crate::hilbert::{
    c64, check_dim, commutator, eigh, max_abs, outer, CMatrix, CVector, DensityMatrix, Eigh,
    HermitianOperator, StateVector, C64,
};

pub use conditions::{
    audit, check_max_loss, check_no_loss, max_loss_residuals, necessary_conditions,
    no_loss_residuals, Audit, ConditionCheck, NecessaryConditions, DEFAULT_CONDITION_TOL,
};
pub use mixed::{
    classical_fisher, classical_fisher_with_curvature, optimal_povm, qfi_mixed, sld_mixed,
    sld_residuals, SldResiduals,
};
pub use pure::{
    loss_covariance_form, qfi_anticommutator_form, qfi_commuting_form, qfi_covariance_form,
    qfi_eigenvector_form, qfi_from_eigenbasis, qfi_loss, qfi_pure, qfi_sector_sum,
    qfi_twirled_pure, qfi_unitary, sld_twirled,
};

/// Sector populations below this are treated as empty.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Largest `|[K, G]|` entry for which the generators count as commuting.
pub const COMMUTING_TOL: f64 = 1e-9;

/// A fiducial state, encoding generator `K`, noise generator `G` and parameter value.
#[derive(Debug, Clone)]
pub struct Scenario {
    fiducial: StateVector,
    k: HermitianOperator,
    g: HermitianOperator,
    lambda: f64,
    k_eigen: OnceLock<Eigh>,
}

/// `psi_lambda = exp(-i K lambda) psi_0` and its exact derivative `-i K psi_lambda`.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub psi: StateVector,
    pub dpsi: CVector,
}

impl Encoded {
    /// `|psi><psi|`
    pub fn rho(&self) -> DensityMatrix {
        self.psi.density()
    }

    /// `|dpsi><psi| + |psi><dpsi|`
    pub fn drho(&self) -> CMatrix {
        let psi = self.psi.amplitudes();
        outer(&self.dpsi, psi) + outer(psi, &self.dpsi)
    }
}

impl Scenario {
    pub fn new(
        fiducial: StateVector,
        k: HermitianOperator,
        g: HermitianOperator,
        lambda: f64,
    ) -> Result<Self> {
        check_dim(fiducial.dim(), k.dim())?;
        check_dim(fiducial.dim(), g.dim())?;
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self {
            fiducial,
            k,
            g,
            lambda,
            k_eigen: OnceLock::new(),
        })
    }

    /// Same system at a different parameter value; reuses the cached spectrum of `K`.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.fiducial.dim()
    }

    pub fn fiducial(&self) -> &StateVector {
        &self.fiducial
    }

    pub fn k(&self) -> &HermitianOperator {
        &self.k
    }

    pub fn g(&self) -> &HermitianOperator {
        &self.g
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn k_eigen(&self) -> Result<&Eigh> {
        if let Some(e) = self.k_eigen.get() {
            return Ok(e);
        }
        let e = eigh(&self.k)?;
        Ok(self.k_eigen.get_or_init(|| e))
    }

    /// State at `lambda` (or at any other parameter value via [`Scenario::state_at`]).
    pub fn encode(&self) -> Result<Encoded> {
        self.state_at(self.lambda)
    }

    pub fn state_at(&self, lambda: f64) -> Result<Encoded> {
        let psi = self.k_eigen()?.evolve(&self.fiducial, lambda);
        let norm_drift = (psi.amplitudes().norm_squared() - 1.0).abs();
        if norm_drift > 1e-10 {
            return Err(Error::Inconsistent(format!(
                "encoded state lost normalization by {norm_drift:.3e}"
            )));
        }
        let dpsi = self.k.apply(psi.amplitudes()) * c64(0.0, -1.0);
        Ok(Encoded { psi, dpsi })
    }

    pub fn rho(&self) -> Result<DensityMatrix> {
        Ok(self.encode()?.rho())
    }

    pub fn drho(&self) -> Result<CMatrix> {
        Ok(self.encode()?.drho())
    }

    /// `d^2 rho / d lambda^2`, from `d^2 psi = -K^2 psi`.
    pub fn d2rho(&self) -> Result<CMatrix> {
        let enc = self.encode()?;
        let psi = enc.psi.amplitudes();
        let d2psi = -self.k.apply(&self.k.apply(psi));
        Ok(outer(&d2psi, psi) + outer(psi, &d2psi) + outer(&enc.dpsi, &enc.dpsi) * c64(2.0, 0.0))
    }

    pub fn projectors(&self, cluster_tol: f64) -> Result<ProjectorSet> {
        spectral_projectors(&self.g, cluster_tol)
    }

    /// `max |[K, G]|`
    pub fn commutator_norm(&self) -> f64 {
        max_abs(&commutator(&self.k, &self.g).expect("dimensions checked at construction"))
    }

    /// Twirled state and its derivative, `(G[rho], G[d rho])`.
    pub fn twirled(&self, p: &ProjectorSet) -> Result<(DensityMatrix, CMatrix)> {
        let enc = self.encode()?;
        let rho_b = twirl(&enc.rho(), p)?;
        let drho_b = twirl_operator(&enc.drho(), p)?;
        Ok((rho_b, drho_b))
    }

    /// `G[d^2 rho]`
    pub fn twirled_curvature(&self, p: &ProjectorSet) -> Result<CMatrix> {
        twirl_operator(&self.d2rho()?, p)
    }
}

/// Per-sector overlaps `a_i = V_i^dagger psi`, `b_i = V_i^dagger dpsi`.
pub(crate) struct Sector {
    pub p: f64,
    pub overlap: C64,
}

pub(crate) fn sectors(enc: &Encoded, p: &ProjectorSet) -> Result<Vec<Sector>> {
    check_dim(p.dim(), enc.psi.dim())?;
    Ok(p.blocks()
        .iter()
        .map(|v| {
            let a = v.adjoint() * enc.psi.amplitudes();
            let b = v.adjoint() * &enc.dpsi;
            Sector {
                p: a.norm_squared(),
                overlap: a.dotc(&b),
            }
        })
        .collect())
}

/// `4 sum ||P_i dpsi||^2` over sectors with no population. Where a sector
/// population touches zero the SLD formula drops this term, while the
/// pure-state forms return the limit from either side.
fn vanished_sector_term(enc: &Encoded, p: &ProjectorSet) -> f64 {
    p.blocks()
        .iter()
        .filter(|v| 2.0 * (v.adjoint() * enc.psi.amplitudes()).norm_squared() <= PROBABILITY_FLOOR)
        .map(|v| 4.0 * (v.adjoint() * &enc.dpsi).norm_squared())
        .sum()
}

/// Every scalar quantity of interest for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiReport {
    pub alice_qfi: f64,
    pub bob_qfi: f64,
    pub loss: f64,
    pub no_loss: bool,
    pub max_loss: bool,
    pub cov_gk: f64,
    pub mean_commutator: C64,
}

/// Relative tolerance between independent formulas before a report is refused.
pub const REPORT_AGREEMENT_TOL: f64 = 1e-6;

/// Computes all report fields and cross-checks every available formula for
/// Bob's QFI and for the loss against each other.
pub fn report(s: &Scenario, cluster_tol: f64) -> Result<QfiReport> {
    let p = s.projectors(cluster_tol)?;
    report_with(s, &p)
}

pub fn report_with(s: &Scenario, p: &ProjectorSet) -> Result<QfiReport> {
    let enc = s.encode()?;
    let alice = qfi_pure(&enc.psi, &enc.dpsi)?;
    let alice_u = qfi_unitary(&enc.psi, s.k())?;

    let bob = qfi_twirled_pure(s, p)?;
    let (rho_b, drho_b) = s.twirled(p)?;
    let mut candidates = vec![
        ("unitary", alice_u, alice),
        ("anticommutator", qfi_anticommutator_form(s, p)?, bob),
        ("covariance", qfi_covariance_form(s, p)?, bob),
        ("eigenvector", qfi_from_eigenbasis(s, p.blocks())?, bob),
        (
            "mixed",
            qfi_mixed(&rho_b, &drho_b)? + vanished_sector_term(&enc, p),
            bob,
        ),
        ("loss", qfi_loss(s, p)?, alice - bob),
        ("loss covariance", loss_covariance_form(s, p)?, alice - bob),
    ];
    if s.commutator_norm() <= COMMUTING_TOL {
        candidates.push(("commuting", qfi_commuting_form(s, p)?, bob));
        candidates.push(("sector sum", qfi_sector_sum(s, p)?, bob));
    }
    for (name, value, reference) in candidates {
        if (value - reference).abs() > REPORT_AGREEMENT_TOL * (1.0 + alice) {
            return Err(Error::Inconsistent(format!(
                "{name} form gives {value}, expected {reference}"
            )));
        }
    }

    let alice_qfi = alice.max(0.0);
    let bob_qfi = bob.max(0.0);
    let nc = necessary_conditions(s)?;
    Ok(QfiReport {
        alice_qfi,
        bob_qfi,
        loss: alice_qfi - bob_qfi,
        no_loss: check_no_loss(s, p, DEFAULT_CONDITION_TOL)?,
        max_loss: check_max_loss(s, p, DEFAULT_CONDITION_TOL)?,
        cov_gk: nc.cov_gk,
        mean_commutator: nc.mean_commutator,
    })
}
