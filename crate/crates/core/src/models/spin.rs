//! Spin-1/2 rotated about an axis `n` while the frame noise rotates about `z`.

use crate::error::{Error, Result};
use crate::hilbert::{pauli, StateVector};
use crate::metrology::{Scenario, PROBABILITY_FLOOR};

/// `K = n.sigma / 2`, `G = sigma_z / 2`, fiducial `|0>`.
pub fn example3_scenario(axis: [f64; 3], lambda: f64) -> Result<Scenario> {
    let [x, y, z] = axis;
    let norm = x * x + y * y + z * z;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "rotation axis must be a unit vector, |n|^2 = {norm}"
        )));
    }
    let k = pauli::x()
        .scaled(0.5 * x)
        .add(&pauli::y().scaled(0.5 * y))?
        .add(&pauli::z().scaled(0.5 * z))?;
    let g = pauli::z().scaled(0.5);
    Scenario::new(StateVector::basis(2, 0)?, k, g, lambda)
}

/// `1 - z^2`
pub fn example3_alice_qfi(z: f64) -> f64 {
    1.0 - z * z
}

/// `(1 - z^2) / (1 + z^2 tan^2(lambda/2))`, written as
/// `(1 - z^2) cos^2 / (cos^2 + z^2 sin^2)` so it stays finite at `lambda = pi`.
pub fn example3_bob_qfi(z: f64, lambda: f64) -> f64 {
    let (s, c) = (0.5 * lambda).sin_cos();
    if z == 0.0 {
        return 1.0;
    }
    let denom = c * c + z * z * s * s;
    if denom == 0.0 {
        return 0.0;
    }
    (1.0 - z * z) * c * c / denom
}

/// Diagonal SLD entries `(L_00, L_11)` of the twirled state; `L_11` is `None`
/// when `|1>` carries no population.
pub fn example3_sld_diagonal(z: f64, lambda: f64) -> (f64, Option<f64>) {
    let (s, c) = (0.5 * lambda).sin_cos();
    let l00 = (z * z - 1.0) * s * c / (c * c + z * z * s * s);
    let p1 = (1.0 - z * z) * s * s;
    (l00, (p1 > PROBABILITY_FLOOR).then(|| c / s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{twirl, DEFAULT_CLUSTER_TOL};
    use crate::hilbert::{c64, max_abs, CMatrix, CVector};
    use crate::metrology::{qfi_twirled_pure, qfi_unitary, sld_twirled};
    use std::f64::consts::PI;

    fn axis_with_z(z: f64) -> [f64; 3] {
        let rest = (1.0 - z * z).max(0.0).sqrt();
        [rest * 0.6, rest * 0.8, z]
    }

    #[test]
    fn rejects_non_unit_axis() {
        assert!(example3_scenario([1.0, 1.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn closed_forms_match_pipeline() {
        for zi in 0..=10 {
            let z = zi as f64 / 10.0;
            for li in 1..20 {
                let lambda = -PI + 2.0 * PI * li as f64 / 20.0;
                let s = example3_scenario(axis_with_z(z), lambda).unwrap();
                let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
                assert!(
                    (qfi_unitary(s.fiducial(), s.k()).unwrap() - example3_alice_qfi(z)).abs()
                        < 1e-12
                );
                let bob = qfi_twirled_pure(&s, &p).unwrap();
                assert!(
                    (bob - example3_bob_qfi(z, lambda)).abs() < 1e-12,
                    "z={z} l={lambda}"
                );
                assert!(bob <= example3_alice_qfi(z) + 1e-12);
            }
        }
    }

    #[test]
    fn tangent_form_and_limits() {
        let z = 1.0 / 2f64.sqrt();
        assert!((example3_bob_qfi(z, PI / 2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(example3_bob_qfi(0.5, PI) < 1e-30);
        assert_eq!(example3_bob_qfi(0.0, PI), 1.0);
        assert_eq!(example3_bob_qfi(1.0, 0.7), 0.0);
        for &(z, l) in &[(0.3, 1.1), (0.9, -2.5)] {
            let t = (0.5f64 * l).tan();
            let tangent = (1.0 - z * z) / (1.0 + z * z * t * t);
            assert!((example3_bob_qfi(z, l) - tangent).abs() < 1e-14);
        }
    }

    #[test]
    fn twirled_states_for_reference_axes() {
        let lambda: f64 = 1.234;
        let (s2, c2) = ((0.5 * lambda).sin().powi(2), (0.5 * lambda).cos().powi(2));
        let cases = [
            ([1.0, 0.0, 0.0], [c2, s2]),
            (
                [0.0, 0.5f64.sqrt(), 0.5f64.sqrt()],
                [1.0 - 0.5 * s2, 0.5 * s2],
            ),
        ];
        for (axis, diag) in cases {
            let s = example3_scenario(axis, lambda).unwrap();
            let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
            let rho_b = twirl(&s.rho().unwrap(), &p).unwrap();
            let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![
                c64(diag[0], 0.0),
                c64(diag[1], 0.0),
            ]));
            assert!(max_abs(&(rho_b.matrix() - expected)) < 1e-14);
        }
    }

    #[test]
    fn sld_is_diagonal_with_closed_entries() {
        for &(z, lambda) in &[(0.5, PI / 3.0), (0.2, -2.0), (0.0, 1.0)] {
            let s = example3_scenario(axis_with_z(z), lambda).unwrap();
            let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
            let l = sld_twirled(&s, &p).unwrap();
            let m = l.matrix();
            let (l00, l11) = example3_sld_diagonal(z, lambda);
            assert!(m[(0, 1)].norm() < 1e-14 && m[(1, 0)].norm() < 1e-14);
            assert!((m[(0, 0)].re - l00).abs() < 1e-12);
            assert!((m[(1, 1)].re - l11.unwrap()).abs() < 1e-12);
        }
        assert!(example3_sld_diagonal(1.0, 0.3).1.is_none());
        assert!(example3_sld_diagonal(0.4, 0.0).1.is_none());
    }
}
