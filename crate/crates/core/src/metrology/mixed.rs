use crate::channels::{spectral_projectors, ProjectorSet};
use crate::error::{Error, Result};
use crate::hilbert::{
    c64, check_dim, eigh, hermitian_defect, max_abs, CMatrix, DensityMatrix, HermitianOperator,
};

use super::PROBABILITY_FLOOR;

const SLD_TOL: f64 = 1e-8;

fn check_derivative(rho: &DensityMatrix, drho: &CMatrix) -> Result<()> {
    check_dim(rho.dim(), drho.nrows())?;
    check_dim(rho.dim(), drho.ncols())?;
    let scale = 1.0 + max_abs(drho);
    let defect = hermitian_defect(drho);
    if defect > 1e-9 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let tr = drho.trace();
    if tr.norm() > 1e-9 * scale {
        return Err(Error::Precondition(format!(
            "state derivative must be traceless, trace is {:.3e}",
            tr.norm()
        )));
    }
    Ok(())
}

/// QFI and SLD from the eigendecomposition of `rho`, skipping pairs with
/// `p_i + p_j <= 1e-12`.
fn decompose(rho: &DensityMatrix, drho: &CMatrix) -> Result<(f64, CMatrix)> {
    check_derivative(rho, drho)?;
    let eig = eigh(&rho.as_operator())?;
    let v = &eig.vectors;
    let d = v.adjoint() * drho * v;
    let n = rho.dim();
    let mut h = 0.0;
    let mut l_eig = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = eig.values[i] + eig.values[j];
            if s <= PROBABILITY_FLOOR {
                continue;
            }
            h += 2.0 * d[(i, j)].norm_sqr() / s;
            l_eig[(i, j)] = d[(i, j)] * c64(2.0 / s, 0.0);
        }
    }
    let l = v * l_eig * v.adjoint();
    Ok((h, l))
}

/// Residuals of the SLD contracts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SldResiduals {
    /// `|Tr(d rho L) - H|`
    pub trace_gap: f64,
    /// Largest entry of `2 d rho - (L rho + rho L)`, in the eigenbasis of `rho`,
    /// over pairs that are not both in the kernel.
    pub equation: f64,
}

impl SldResiduals {
    pub fn within(&self, tol: f64) -> bool {
        self.trace_gap <= tol && self.equation <= tol
    }
}

/// Checks `H = Tr(d rho L)` and `2 d rho = L rho + rho L` on the support of `rho`.
pub fn sld_residuals(
    rho: &DensityMatrix,
    drho: &CMatrix,
    l: &HermitianOperator,
    qfi: f64,
) -> Result<SldResiduals> {
    check_derivative(rho, drho)?;
    check_dim(rho.dim(), l.dim())?;
    let trace = (drho * l.matrix()).trace();
    let trace_gap = (trace.re - qfi).abs().max(trace.im.abs());
    let r = drho * c64(2.0, 0.0) - l.matrix() * rho.matrix() - rho.matrix() * l.matrix();
    let eig = eigh(&rho.as_operator())?;
    let r_eig = eig.vectors.adjoint() * r * &eig.vectors;
    let n = rho.dim();
    let mut equation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if eig.values[i] + eig.values[j] > PROBABILITY_FLOOR {
                equation = equation.max(r_eig[(i, j)].norm());
            }
        }
    }
    Ok(SldResiduals {
        trace_gap,
        equation,
    })
}

/// `2 sum_ij |<i|d rho|j>|^2 / (p_i + p_j)`, verified against the SLD contracts.
pub fn qfi_mixed(rho: &DensityMatrix, drho: &CMatrix) -> Result<f64> {
    Ok(sld_and_qfi(rho, drho)?.1)
}

/// `2 sum_ij <i|d rho|j> / (p_i + p_j) |i><j|`
pub fn sld_mixed(rho: &DensityMatrix, drho: &CMatrix) -> Result<HermitianOperator> {
    Ok(sld_and_qfi(rho, drho)?.0)
}

fn sld_and_qfi(rho: &DensityMatrix, drho: &CMatrix) -> Result<(HermitianOperator, f64)> {
    let (h, l) = decompose(rho, drho)?;
    let l = HermitianOperator::new(l)?;
    let res = sld_residuals(rho, drho, &l, h)?;
    let scale = 1.0 + h;
    if res.trace_gap > SLD_TOL * scale || res.equation > SLD_TOL * scale {
        return Err(Error::Inconsistent(format!(
            "SLD contracts violated: trace gap {:.3e}, equation residual {:.3e}",
            res.trace_gap, res.equation
        )));
    }
    Ok((l, h))
}

/// Eigenprojectors of the SLD, which form a Fisher-optimal measurement.
pub fn optimal_povm(sld: &HermitianOperator, cluster_tol: f64) -> Result<ProjectorSet> {
    spectral_projectors(sld, cluster_tol)
}

fn check_povm(povm: &[HermitianOperator], n: usize) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::InvalidPovm("no outcomes".into()));
    }
    let mut total = CMatrix::zeros(n, n);
    for (x, o) in povm.iter().enumerate() {
        check_dim(n, o.dim())?;
        let min = eigh(o)?.values[0];
        if min < -1e-10 {
            return Err(Error::InvalidPovm(format!(
                "element {x} has negative eigenvalue {min:.3e}"
            )));
        }
        total += o.matrix();
    }
    let defect = max_abs(&(total - CMatrix::identity(n, n)));
    if defect > 1e-9 {
        return Err(Error::InvalidPovm(format!(
            "elements sum to identity only within {defect:.3e}"
        )));
    }
    Ok(())
}

/// `sum_x Tr(O_x d rho)^2 / Tr(O_x rho)` over outcomes with non-negligible probability.
pub fn classical_fisher(
    povm: &[HermitianOperator],
    rho: &DensityMatrix,
    drho: &CMatrix,
) -> Result<f64> {
    check_derivative(rho, drho)?;
    check_povm(povm, rho.dim())?;
    Ok(povm
        .iter()
        .map(|o| {
            let prob = (o.matrix() * rho.matrix()).trace().re;
            let dprob = (o.matrix() * drho).trace().re;
            (prob, dprob)
        })
        .filter(|&(prob, _)| prob > PROBABILITY_FLOOR)
        .map(|(prob, dprob)| dprob * dprob / prob)
        .sum())
}

/// Classical Fisher information continued through outcomes whose probability
/// touches zero: there `p = p' = 0`, and `p'^2 / p` tends to `2 p''`.
pub fn classical_fisher_with_curvature(
    povm: &[HermitianOperator],
    rho: &DensityMatrix,
    drho: &CMatrix,
    d2rho: &CMatrix,
) -> Result<f64> {
    check_derivative(rho, drho)?;
    check_derivative(rho, d2rho)?;
    check_povm(povm, rho.dim())?;
    Ok(povm
        .iter()
        .map(|o| {
            let prob = (o.matrix() * rho.matrix()).trace().re;
            let dprob = (o.matrix() * drho).trace().re;
            if prob > PROBABILITY_FLOOR {
                dprob * dprob / prob
            } else {
                2.0 * (o.matrix() * d2rho).trace().re.max(0.0)
            }
        })
        .sum())
}
