use crate::channels::{spectral_projectors, ProjectorSet};
use crate::error::{Error, Result};
use crate::hilbert::{
    c64, check_dim, outer, variance, CMatrix, CVector, HermitianOperator, StateVector,
};

use super::{sectors, Scenario, COMMUTING_TOL, PROBABILITY_FLOOR};

/// `4 <dpsi|dpsi> - 4 |<psi|dpsi>|^2` for a pure family.
pub fn qfi_pure(psi: &StateVector, dpsi: &CVector) -> Result<f64> {
    check_dim(psi.dim(), dpsi.len())?;
    let overlap = psi.inner(dpsi);
    if overlap.re.abs() > 1e-9 * (1.0 + overlap.im.abs()) {
        return Err(Error::Precondition(format!(
            "<psi|dpsi> must be purely imaginary, real part is {:.3e}",
            overlap.re
        )));
    }
    Ok(4.0 * dpsi.norm_squared() - 4.0 * overlap.norm_sqr())
}

/// `4 Var(K)`, the QFI of the noiseless unitary family.
pub fn qfi_unitary(psi: &StateVector, k: &HermitianOperator) -> Result<f64> {
    check_dim(k.dim(), psi.dim())?;
    let amps = psi.amplitudes();
    let kpsi = k.apply(amps);
    let mean = amps.dotc(&kpsi).re;
    Ok(4.0 * (kpsi.norm_squared() - mean * mean))
}

/// Bob's QFI: `4 <dpsi|dpsi> - 4 sum_i (Im <psi|P_i|dpsi>)^2 / p_i`.
pub fn qfi_twirled_pure(s: &Scenario, p: &ProjectorSet) -> Result<f64> {
    check_dim(p.dim(), s.dim())?;
    let enc = s.encode()?;
    let psi = enc.psi.amplitudes();
    let mut sum = 0.0;
    for i in 0..p.len() {
        let ppsi = p.project(i, psi);
        let pi = ppsi.norm_squared();
        if pi < PROBABILITY_FLOOR {
            continue;
        }
        let im = psi.dotc(&p.project(i, &enc.dpsi)).im;
        sum += im * im / pi;
    }
    Ok(4.0 * enc.dpsi.norm_squared() - 4.0 * sum)
}

/// `4 <K^2> - sum_i <{P_i, K}>^2 / p_i`
pub fn qfi_anticommutator_form(s: &Scenario, p: &ProjectorSet) -> Result<f64> {
    check_dim(p.dim(), s.dim())?;
    let enc = s.encode()?;
    let psi = enc.psi.amplitudes();
    let kpsi = s.k().apply(psi);
    let mut sum = 0.0;
    for v in p.blocks() {
        let a = v.adjoint() * psi;
        let pi = a.norm_squared();
        if pi < PROBABILITY_FLOOR {
            continue;
        }
        let anti = 2.0 * a.dotc(&(v.adjoint() * &kpsi)).re;
        sum += anti * anti / pi;
    }
    Ok(4.0 * kpsi.norm_squared() - sum)
}

/// Sector populations and `Cov(P_i, K)` on `psi_lambda`.
fn projector_covariances(s: &Scenario, p: &ProjectorSet) -> Result<Vec<(f64, f64)>> {
    check_dim(p.dim(), s.dim())?;
    let enc = s.encode()?;
    let psi = enc.psi.amplitudes();
    let kpsi = s.k().apply(psi);
    let mean_k = psi.dotc(&kpsi).re;
    Ok(p.blocks()
        .iter()
        .map(|v| {
            let a = v.adjoint() * psi;
            let pi = a.norm_squared();
            // 1/2 <{P, K}> - <P><K>
            let cov = a.dotc(&(v.adjoint() * &kpsi)).re - pi * mean_k;
            (pi, cov)
        })
        .collect())
}

/// `4 Var(K) - 4 sum_i p_i Cov(P_i / p_i, K)^2`
pub fn qfi_covariance_form(s: &Scenario, p: &ProjectorSet) -> Result<f64> {
    let var = variance(s.k(), &s.encode()?.psi)?;
    let sum: f64 = projector_covariances(s, p)?
        .into_iter()
        .filter(|&(pi, _)| pi >= PROBABILITY_FLOOR)
        .map(|(pi, cov)| pi * (cov / pi).powi(2))
        .sum();
    Ok(4.0 * var - 4.0 * sum)
}

/// Commuting-generator form, evaluated on the fiducial state:
/// `4 <K^2>_0 - 4 sum_i <P_i K>_0^2 / p_i`.
pub fn qfi_commuting_form(s: &Scenario, p: &ProjectorSet) -> Result<f64> {
    check_dim(p.dim(), s.dim())?;
    let defect = s.commutator_norm();
    if defect > COMMUTING_TOL {
        return Err(Error::NonCommuting(defect));
    }
    let psi = s.fiducial().amplitudes();
    let kpsi = s.k().apply(psi);
    let mut sum = 0.0;
    for v in p.blocks() {
        let a = v.adjoint() * psi;
        let pi = a.norm_squared();
        if pi < PROBABILITY_FLOOR {
            continue;
        }
        let pk = a.dotc(&(v.adjoint() * &kpsi)).re;
        sum += pk * pk / pi;
    }
    Ok(4.0 * kpsi.norm_squared() - 4.0 * sum)
}

/// `sum_i p_i H_U(rho_i)` with `rho_i` the normalized sector components of the fiducial.
pub fn qfi_sector_sum(s: &Scenario, p: &ProjectorSet) -> Result<f64> {
    check_dim(p.dim(), s.dim())?;
    let defect = s.commutator_norm();
    if defect > COMMUTING_TOL {
        return Err(Error::NonCommuting(defect));
    }
    let psi = s.fiducial().amplitudes();
    let mut total = 0.0;
    for i in 0..p.len() {
        let component = p.project(i, psi);
        let pi = component.norm_squared();
        if pi < PROBABILITY_FLOOR {
            continue;
        }
        let psi_i = StateVector::new(component)?;
        total += pi * qfi_unitary(&psi_i, s.k())?;
    }
    Ok(total)
}

/// Bob's QFI from an eigenbasis of `G`, clustered with `cluster_tol`.
pub fn qfi_eigenvector_form(s: &Scenario, g: &HermitianOperator, cluster_tol: f64) -> Result<f64> {
    let p = spectral_projectors(g, cluster_tol)?;
    qfi_from_eigenbasis(s, p.blocks())
}

/// `4 (<dpsi|dpsi> - sum_i (Im <<a_i|b_i>>)^2 / ||a_i||^2)` for any orthonormal
/// basis `blocks[i]` of each eigenspace.
pub fn qfi_from_eigenbasis(s: &Scenario, blocks: &[CMatrix]) -> Result<f64> {
    let enc = s.encode()?;
    let mut sum = 0.0;
    for v in blocks {
        check_dim(s.dim(), v.nrows())?;
        let a = v.adjoint() * enc.psi.amplitudes();
        let b = v.adjoint() * &enc.dpsi;
        let norm_a = a.norm_squared();
        if norm_a < PROBABILITY_FLOOR {
            continue;
        }
        sum += a.dotc(&b).im.powi(2) / norm_a;
    }
    Ok(4.0 * (enc.dpsi.norm_squared() - sum))
}

/// `4 (sum_i (Im <psi|P_i|dpsi>)^2 / p_i - |<psi|dpsi>|^2)`
pub fn qfi_loss(s: &Scenario, p: &ProjectorSet) -> Result<f64> {
    check_dim(p.dim(), s.dim())?;
    let enc = s.encode()?;
    let total = enc.psi.inner(&enc.dpsi);
    let sum: f64 = sectors(&enc, p)?
        .into_iter()
        .filter(|sec| sec.p >= PROBABILITY_FLOOR)
        .map(|sec| sec.overlap.im.powi(2) / sec.p)
        .sum();
    Ok(4.0 * (sum - total.norm_sqr()))
}

/// `4 sum_i Cov(P_i, K)^2 / p_i`
pub fn loss_covariance_form(s: &Scenario, p: &ProjectorSet) -> Result<f64> {
    Ok(4.0
        * projector_covariances(s, p)?
            .into_iter()
            .filter(|&(pi, _)| pi >= PROBABILITY_FLOOR)
            .map(|(pi, cov)| cov * cov / pi)
            .sum::<f64>())
}

/// SLD of the twirled state, `sum_i |phi_i><psi_i| + h.c.` with
/// `psi_i = P_i psi / sqrt(p_i)` and
/// `phi_i = (2 P_i dpsi - <psi_i|dpsi> psi_i) / sqrt(p_i)`.
/// Zero on the orthogonal complement of the span of all `psi_i`, `phi_i`.
pub fn sld_twirled(s: &Scenario, p: &ProjectorSet) -> Result<HermitianOperator> {
    check_dim(p.dim(), s.dim())?;
    let enc = s.encode()?;
    let n = s.dim();
    let mut l = CMatrix::zeros(n, n);
    for i in 0..p.len() {
        let ppsi = p.project(i, enc.psi.amplitudes());
        let pi = ppsi.norm_squared();
        if pi < PROBABILITY_FLOOR {
            continue;
        }
        let scale = c64(1.0 / pi.sqrt(), 0.0);
        let psi_i = ppsi * scale;
        let overlap = psi_i.dotc(&enc.dpsi);
        let phi_i = (p.project(i, &enc.dpsi) * c64(2.0, 0.0) - &psi_i * overlap) * scale;
        l += outer(&phi_i, &psi_i) + outer(&psi_i, &phi_i);
    }
    HermitianOperator::new(l)
}
