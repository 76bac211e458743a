//! Qutrit whose encoding commutes with a non-degenerate noise generator.
//! `Cov(G, K)` vanishes, yet the twirl erases all information about `lambda`.

use crate::error::Result;
use crate::hilbert::{HermitianOperator, StateVector};
use crate::metrology::Scenario;

/// `G = diag(6, 3, 4)`, `K = |2><2|`, `psi_0 = (1/sqrt 6, 1/sqrt 3, 1/sqrt 2)`.
pub fn counterexample_scenario(lambda: f64) -> Result<Scenario> {
    let psi = StateVector::from_real(&[1.0 / 6f64.sqrt(), 1.0 / 3f64.sqrt(), 1.0 / 2f64.sqrt()])?;
    let g = HermitianOperator::from_real_diagonal(&[6.0, 3.0, 4.0]);
    let k = HermitianOperator::from_real_diagonal(&[0.0, 0.0, 1.0]);
    Scenario::new(psi, k, g, lambda)
}
