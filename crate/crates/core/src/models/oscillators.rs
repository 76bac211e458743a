//! Two coupled oscillators `H = w (a^dag a + b^dag b) + k (a^dag b + b^dag a)`
//! where the Hamiltonian itself plays the noise generator and `K = a^dag a`.
//!
//! Everything lives on the block of total excitation number `<= n_max`, which
//! `H`, `K` and the twirl all preserve.

use crate::channels::cluster_spectrum;
use crate::error::{Error, Result};
use crate::hilbert::{c64, CMatrix, CVector, HermitianOperator, StateVector};
use crate::metrology::Scenario;

use super::special::{binomial, ln_factorial};

/// Default couplings; the irrational ratio keeps normal-mode energies distinct.
pub const DEFAULT_OMEGA: f64 = 1.0;
pub const DEFAULT_KAPPA: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone)]
pub struct Example2System {
    pub omega: f64,
    pub kappa: f64,
    pub n_max: usize,
    /// Fock labels `(m, n)` of the basis, ordered by total number then `m`.
    pub basis: Vec<(usize, usize)>,
    pub h: HermitianOperator,
    pub k: HermitianOperator,
    pub total: HermitianOperator,
}

/// Builds the model on the sector `m + n <= n_max` and rejects parameter
/// values whose normal-mode energies collide within `cluster_tol`.
pub fn example2_system(
    omega: f64,
    kappa: f64,
    n_max: usize,
    cluster_tol: f64,
) -> Result<Example2System> {
    if !(omega > kappa && kappa > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need omega > kappa > 0, got omega={omega}, kappa={kappa}"
        )));
    }
    let basis: Vec<(usize, usize)> = (0..=n_max)
        .flat_map(|s| (0..=s).map(move |m| (m, s - m)))
        .collect();
    let dim = basis.len();
    let index = |m: usize, n: usize| {
        let s = m + n;
        s * (s + 1) / 2 + m
    };
    let mut h = CMatrix::zeros(dim, dim);
    let mut k = vec![0.0; dim];
    let mut total = vec![0.0; dim];
    for (i, &(m, n)) in basis.iter().enumerate() {
        h[(i, i)] = c64(omega * (m + n) as f64, 0.0);
        k[i] = m as f64;
        total[i] = (m + n) as f64;
        if n > 0 {
            // a^dag b |m, n> = sqrt((m + 1) n) |m + 1, n - 1>
            let j = index(m + 1, n - 1);
            let amp = c64(kappa * (((m + 1) * n) as f64).sqrt(), 0.0);
            h[(j, i)] += amp;
            h[(i, j)] += amp;
        }
    }

    let mut energies: Vec<f64> = basis
        .iter()
        .map(|&(m, n)| normal_mode_energy(omega, kappa, m, n))
        .collect();
    energies.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let clusters = cluster_spectrum(&energies, cluster_tol);
    if clusters.len() != dim {
        return Err(Error::DegenerateSpectrum(format!(
            "normal-mode energies collide for omega={omega}, kappa={kappa} below {n_max} excitations"
        )));
    }

    Ok(Example2System {
        omega,
        kappa,
        n_max,
        basis,
        h: HermitianOperator::new(h)?,
        k: HermitianOperator::from_real_diagonal(&k),
        total: HermitianOperator::from_real_diagonal(&total),
    })
}

/// `(w + k) m + (w - k) n` for normal-mode occupations `(m, n)`.
pub fn normal_mode_energy(omega: f64, kappa: f64, m: usize, n: usize) -> f64 {
    (omega + kappa) * m as f64 + (omega - kappa) * n as f64
}

impl Example2System {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, m: usize, n: usize) -> Option<usize> {
        (m + n <= self.n_max).then(|| {
            let s = m + n;
            s * (s + 1) / 2 + m
        })
    }

    /// `(|0> + |1>)/sqrt(2)` on mode `a` times `sum_{n<N} |n> / sqrt(N)` on mode `b`.
    pub fn fiducial(&self, n_states: usize) -> Result<StateVector> {
        if n_states == 0 || n_states > self.n_max {
            return Err(Error::InvalidParameter(format!(
                "fiducial needs 1 <= N <= n_max = {}, got {n_states}",
                self.n_max
            )));
        }
        let mut v = CVector::zeros(self.dim());
        for m in 0..2 {
            for n in 0..n_states {
                let i = self.index_of(m, n).expect("within n_max");
                v[i] = c64(1.0, 0.0);
            }
        }
        StateVector::new(v)
    }

    pub fn scenario(&self, n_states: usize, lambda: f64) -> Result<Scenario> {
        Scenario::new(
            self.fiducial(n_states)?,
            self.k.clone(),
            self.h.clone(),
            lambda,
        )
    }

    /// Normal-mode eigenstate `|m~, n~>` expanded in Fock states:
    /// `sum_{k,l} C(m,k) C(n,l) (-1)^(n-l)
    ///   sqrt((k+l)! (m+n-k-l)! / (2^(m+n) m! n!)) |k+l, m+n-k-l>`.
    pub fn normal_mode_state(&self, m: usize, n: usize) -> Result<CVector> {
        if m + n > self.n_max {
            return Err(Error::InvalidParameter(format!(
                "normal mode ({m}, {n}) exceeds n_max = {}",
                self.n_max
            )));
        }
        let s = m + n;
        let mut v = CVector::zeros(self.dim());
        for k in 0..=m {
            for l in 0..=n {
                let sign = if (n - l) % 2 == 0 { 1.0 } else { -1.0 };
                let ln_mag = 0.5
                    * (ln_factorial(k + l) + ln_factorial(s - k - l)
                        - s as f64 * std::f64::consts::LN_2
                        - ln_factorial(m)
                        - ln_factorial(n));
                let amp = sign * binomial(m, k) * binomial(n, l) * ln_mag.exp();
                let i = self.index_of(k + l, s - k - l).expect("same sector");
                v[i] += c64(amp, 0.0);
            }
        }
        Ok(v)
    }
}

fn c_coefficient(m: usize, n: usize) -> f64 {
    let diff = m as f64 - n as f64;
    let s = m + n;
    (ln_factorial(s - 1)
        - (s + 1) as f64 * std::f64::consts::LN_2
        - ln_factorial(m)
        - ln_factorial(n))
    .exp()
        * diff
        * diff
}

fn d_coefficient(m: usize, n: usize, lambda: f64) -> f64 {
    let s = (m + n) as f64;
    let d2 = (m as f64 - n as f64).powi(2);
    if d2 == s {
        return 0.5;
    }
    let sin2 = lambda.sin().powi(2);
    let num = s * (d2 + s) * sin2;
    if num == 0.0 {
        return 0.0;
    }
    num / ((d2 - s).powi(2) + 4.0 * s * d2 * sin2)
}

/// Closed-form Bob QFI of the coupled-oscillator model for a uniform
/// superposition of `N` Fock states: `2 - (8/N)(S1 + S2 - S3)`.
pub fn example2_qfi_closed_form(n_states: usize, lambda: f64) -> Result<f64> {
    if n_states < 2 {
        return Err(Error::InvalidParameter(format!(
            "need N >= 2, got {n_states}"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let big_n = n_states;
    let half = big_n / 2;
    let mut s1 = 0.0;
    for m in 1..=half {
        for n in 0..m {
            s1 += c_coefficient(m, n) * (1.0 - d_coefficient(m, n, lambda));
        }
    }
    let mut s2 = 0.0;
    for m in half + 1..=big_n {
        for n in 0..=big_n - m {
            s2 += c_coefficient(m, n);
        }
    }
    let mut s3 = 0.0;
    for m in half + 1..big_n {
        for n in 0..big_n - m {
            s3 += c_coefficient(m, n) * d_coefficient(m, n, lambda);
        }
    }
    Ok(2.0 - 8.0 / big_n as f64 * (s1 + s2 - s3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::DEFAULT_CLUSTER_TOL;
    use crate::hilbert::{commutator, eigh, max_abs};
    use crate::metrology::{qfi_twirled_pure, report};
    use std::f64::consts::PI;

    fn system(n_max: usize) -> Example2System {
        example2_system(DEFAULT_OMEGA, DEFAULT_KAPPA, n_max, DEFAULT_CLUSTER_TOL).unwrap()
    }

    #[test]
    fn spectrum_matches_normal_modes() {
        let sys = system(2);
        let eig = eigh(&sys.h).unwrap();
        let (w, k) = (DEFAULT_OMEGA, DEFAULT_KAPPA);
        let mut expected = vec![0.0, w - k, w + k, 2.0 * (w - k), 2.0 * w, 2.0 * (w + k)];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
        let sys = system(6);
        let eig = eigh(&sys.h).unwrap();
        let mut expected: Vec<f64> = sys
            .basis
            .iter()
            .map(|&(m, n)| normal_mode_energy(w, k, m, n))
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_mode_states_are_orthonormal_eigenvectors() {
        let sys = system(7);
        let mut vs = Vec::new();
        for s in 0..=7 {
            for m in 0..=s {
                let n = s - m;
                let v = sys.normal_mode_state(m, n).unwrap();
                let e = normal_mode_energy(sys.omega, sys.kappa, m, n);
                let hv = sys.h.apply(&v);
                assert!((hv - &v * c64(e, 0.0)).norm() < 1e-10, "({m},{n})");
                vs.push(v);
            }
        }
        let gram = CMatrix::from_fn(vs.len(), vs.len(), |i, j| vs[i].dotc(&vs[j]));
        assert!(max_abs(&(gram - CMatrix::identity(vs.len(), vs.len()))) < 1e-12);
    }

    #[test]
    fn encoding_does_not_commute_with_h_but_with_total_number() {
        let sys = system(4);
        assert!(max_abs(&commutator(&sys.k, &sys.h).unwrap()) > 0.1);
        assert!(max_abs(&commutator(&sys.k, &sys.total).unwrap()) == 0.0);
        // [K, H] = k (a^dag b - b^dag a)
        let c = commutator(&sys.k, &sys.h).unwrap();
        for (i, &(m, n)) in sys.basis.iter().enumerate() {
            if n > 0 {
                let j = sys.index_of(m + 1, n - 1).unwrap();
                let expected = sys.kappa * (((m + 1) * n) as f64).sqrt();
                assert!((c[(j, i)].re - expected).abs() < 1e-12);
                assert!((c[(i, j)].re + expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_couplings_and_collisions() {
        assert!(example2_system(1.0, 1.5, 3, DEFAULT_CLUSTER_TOL).is_err());
        assert!(example2_system(1.0, 0.0, 3, DEFAULT_CLUSTER_TOL).is_err());
        // w = 3k makes (w + k) = 2 (w - k).
        assert!(matches!(
            example2_system(3.0, 1.0, 3, DEFAULT_CLUSTER_TOL),
            Err(Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn d_vanishes_at_zero_lambda() {
        for m in 1..8 {
            for n in 0..m {
                let d = d_coefficient(m, n, 0.0);
                let s = (m + n) as f64;
                let d2 = (m as f64 - n as f64).powi(2);
                if d2 == s {
                    assert_eq!(d, 0.5);
                } else {
                    assert_eq!(d, 0.0);
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_pipeline() {
        for n_states in 2..=6 {
            let sys = system(n_states);
            for i in 0..=8 {
                let lambda = -PI + 2.0 * PI * i as f64 / 8.0;
                let s = sys.scenario(n_states, lambda).unwrap();
                let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
                let pipeline = qfi_twirled_pure(&s, &p).unwrap();
                let closed = example2_qfi_closed_form(n_states, lambda).unwrap();
                assert!(
                    (pipeline - closed).abs() < 1e-6,
                    "N={n_states} lambda={lambda}"
                );
            }
        }
    }

    #[test]
    fn qfi_below_one_and_covariance_quarter_omega() {
        for n_states in [4usize, 9] {
            let sys = system(n_states);
            for &lambda in &[0.0, 0.4, PI / 2.0, 2.0] {
                let r = report(
                    &sys.scenario(n_states, lambda).unwrap(),
                    DEFAULT_CLUSTER_TOL,
                )
                .unwrap();
                assert!((r.cov_gk - 0.25).abs() < 1e-9);
                assert!(r.bob_qfi < 1.0);
            }
        }
    }

    #[test]
    fn mean_commutator_scales_like_root_n() {
        let sys = system(9);
        let r = report(&sys.scenario(9, PI / 2.0).unwrap(), DEFAULT_CLUSTER_TOL).unwrap();
        let approx = 2.0 * sys.kappa / 3.0 * 3.0;
        assert!(r.mean_commutator.re.abs() < 1e-12);
        assert!((r.mean_commutator.im.abs() - approx).abs() <= 0.15 * approx);
    }

    #[test]
    fn extremes_at_quarter_and_half_turns() {
        let grid: Vec<f64> = (0..41).map(|i| -PI + 2.0 * PI * i as f64 / 40.0).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&l| example2_qfi_closed_form(4, l).unwrap())
            .collect();
        let max = values.iter().copied().fold(f64::MIN, f64::max);
        let min = values.iter().copied().fold(f64::MAX, f64::min);
        for (l, v) in grid.iter().zip(&values) {
            if (v - max).abs() < 1e-12 {
                assert!((l.abs() - PI / 2.0).abs() < 1e-12, "max at {l}");
            }
            if (v - min).abs() < 1e-12 {
                assert!(
                    l.abs() < 1e-12 || (l.abs() - PI).abs() < 1e-12,
                    "min at {l}"
                );
            }
        }
    }
}
