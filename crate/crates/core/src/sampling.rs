//! Random test instances: Haar states, GUE-like Hermitian operators, random
//! unitaries and full scenarios. Used by the fuzz-style tests, the acceptance
//! suite and the benchmarks; every generator is driven by a caller-supplied RNG.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hilbert::{c64, CMatrix, CVector, DensityMatrix, HermitianOperator, StateVector, C64};
use crate::metrology::Scenario;

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64(re, im)
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian_c64(rng));
        if let Ok(psi) = StateVector::new(v) {
            return psi;
        }
    }
}

/// Hermitian matrix with independent Gaussian entries, scaled so the spectrum is O(`scale`).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> HermitianOperator {
    let m = CMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    let s = scale / (2.0 * (dim as f64).sqrt());
    HermitianOperator::from_matrix_unchecked((&m + m.adjoint()) * c64(s, 0.0))
}

/// Full-rank mixed state `W W^dagger / Tr(W W^dagger)` from a Ginibre `W`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let w = CMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    let m = &w * w.adjoint();
    let tr = m.trace().re;
    let m = m * c64(1.0 / tr, 0.0);
    DensityMatrix::from_matrix_unchecked((&m + m.adjoint()) * c64(0.5, 0.0))
}

/// Haar-random unitary via QR of a Ginibre matrix (with the phase fix on R's diagonal).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    CMatrix::from_fn(dim, dim, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c64(1.0, 0.0)
        };
        q[(i, j)] * phase
    })
}

/// `U diag(values) U^dagger` for a Haar-random `U`.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, values: &[f64]) -> HermitianOperator {
    let dim = values.len();
    let u = random_unitary(rng, dim);
    let d = CVector::from_iterator(dim, values.iter().map(|&x| c64(x, 0.0)));
    HermitianOperator::from_matrix_unchecked(&u * CMatrix::from_diagonal(&d) * u.adjoint())
}

/// Random spectrum with every nonzero gap at least `min_gap`. With `degenerate`
/// set, eigenvalues are drawn from fewer levels than `dim` so that clusters of
/// multiplicity > 1 occur.
pub fn separated_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    min_gap: f64,
    degenerate: bool,
) -> Vec<f64> {
    let levels = if degenerate && dim > 1 {
        rng.random_range(1..dim)
    } else {
        dim
    };
    let mut level_values = Vec::with_capacity(levels);
    let mut x = rng.random_range(-1.0..0.0);
    for _ in 0..levels {
        level_values.push(x);
        x += min_gap + rng.random_range(0.0..1.0);
    }
    let mut values: Vec<f64> = (0..dim)
        .map(|i| {
            if i < levels {
                level_values[i]
            } else {
                level_values[rng.random_range(0..levels)]
            }
        })
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values
}

/// Random `outcomes`-element POVM: `O_x = S^{-1/2} A_x S^{-1/2}` with Wishart
/// `A_x` and `S = sum_x A_x`.
pub fn random_povm<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    outcomes: usize,
) -> Vec<HermitianOperator> {
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let w = CMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
            &w * w.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, a| acc + a);
    let eig = crate::hilbert::eigh(&HermitianOperator::from_matrix_unchecked(
        (&total + total.adjoint()) * c64(0.5, 0.0),
    ))
    .expect("Wishart sum is well conditioned");
    let d = CVector::from_iterator(dim, eig.values.iter().map(|&x| c64(1.0 / x.sqrt(), 0.0)));
    let inv_sqrt = &eig.vectors * CMatrix::from_diagonal(&d) * eig.vectors.adjoint();
    raw.iter()
        .map(|a| {
            let o = &inv_sqrt * a * &inv_sqrt;
            HermitianOperator::from_matrix_unchecked((&o + o.adjoint()) * c64(0.5, 0.0))
        })
        .collect()
}

/// Random scenario: Haar fiducial, random `K`, noise generator with a
/// well-separated (optionally degenerate) spectrum, `lambda` in `[-pi, pi]`.
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, dim: usize, degenerate: bool) -> Scenario {
    let psi = random_state(rng, dim);
    let k = random_hermitian(rng, dim, 2.0);
    let spectrum = separated_spectrum(rng, dim, 0.25, degenerate);
    let g = hermitian_with_spectrum(rng, &spectrum);
    let lambda = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Scenario::new(psi, k, g, lambda).expect("dimensions agree by construction")
}
