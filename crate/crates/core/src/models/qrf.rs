//! Reference-frame oscillator states and the qubit-plus-oscillator model
//! (a two-level probe sharing a phase reference with an oscillator QRF).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c64, tensor, CVector, HermitianOperator, StateVector, C64};
use crate::metrology::Scenario;

use super::fock::number_operator;
use super::special::{hermite_normalized, kummer_m, ln_factorial};

/// Discarded probability allowed when truncating a QRF state.
pub const TAIL_TOL: f64 = 1e-10;

/// Oscillator state carried as a reference frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QrfStateSpec {
    /// `sum_{n<N} |n> / sqrt(N)`
    UniformSuperposition {
        #[serde(rename = "N")]
        n: usize,
    },
    /// Coherent state with real displacement `alpha >= 0`.
    Coherent { alpha: f64 },
    /// Displaced squeezed vacuum with real `alpha >= 0` and squeezing `r >= 0`.
    SqueezedDisplaced { alpha: f64, r: f64 },
    /// Explicit amplitudes as `[re, im]` pairs.
    Explicit { amplitudes: Vec<[f64; 2]> },
}

impl QrfStateSpec {
    /// Squeezed-displaced state with mean energy `E` split as `alpha^2 = x E`,
    /// `sinh^2 r = (1 - x) E`.
    pub fn from_energy_fraction(mean_energy: f64, x_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x_fraction) {
            return Err(Error::InvalidParameter(format!(
                "x_fraction must lie in [0, 1], got {x_fraction}"
            )));
        }
        if !(mean_energy >= 0.0) || !mean_energy.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mean energy must be non-negative, got {mean_energy}"
            )));
        }
        let alpha = (x_fraction * mean_energy).sqrt();
        let r = ((1.0 - x_fraction) * mean_energy).sqrt().asinh();
        Ok(Self::SqueezedDisplaced { alpha, r })
    }

    /// Mean photon number of the untruncated state, where defined.
    pub fn nominal_mean_energy(&self) -> Option<f64> {
        match *self {
            Self::UniformSuperposition { n } => Some((n as f64 - 1.0) / 2.0),
            Self::Coherent { alpha } => Some(alpha * alpha),
            Self::SqueezedDisplaced { alpha, r } => Some(alpha * alpha + r.sinh().powi(2)),
            Self::Explicit { .. } => None,
        }
    }
}

fn coherent_amplitude(alpha: f64, n: usize) -> f64 {
    if alpha == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ln = -0.5 * alpha * alpha + n as f64 * alpha.ln() - 0.5 * ln_factorial(n);
    ln.exp()
}

/// Real amplitudes of an analytic state for `n < len`.
fn analytic_amplitudes(alpha: f64, r: f64, len: usize) -> Vec<f64> {
    if r == 0.0 {
        return (0..len).map(|n| coherent_amplitude(alpha, n)).collect();
    }
    let t = r.tanh();
    let gamma = alpha * r.exp();
    let arg = gamma / (2.0 * r).sinh().sqrt();
    let prefactor = (-0.5 * alpha * alpha * (1.0 + t)).exp() / r.cosh().sqrt();
    let h = hermite_normalized(len, arg);
    let sqrt_t = t.sqrt();
    let mut power = 1.0;
    h.into_iter()
        .map(|hn| {
            let c = prefactor * power * hn;
            power *= sqrt_t;
            c
        })
        .collect()
}

fn check_tail(probabilities: &[f64], truncation: usize) -> Result<()> {
    let tail: f64 = probabilities[truncation.min(probabilities.len())..]
        .iter()
        .sum();
    if tail >= TAIL_TOL {
        let mut remaining = tail;
        let mut required = truncation;
        while remaining >= TAIL_TOL && required < probabilities.len() {
            remaining -= probabilities[required];
            required += 1;
        }
        return Err(Error::InsufficientTruncation {
            given: truncation,
            required,
            tail,
        });
    }
    Ok(())
}

/// Truncated amplitudes `c_n`, `n < truncation`, renormalized after
/// checking that the discarded probability is below [`TAIL_TOL`].
pub fn qrf_amplitudes(spec: &QrfStateSpec, truncation: usize) -> Result<StateVector> {
    if truncation == 0 {
        return Err(Error::InvalidParameter(
            "truncation must be positive".into(),
        ));
    }
    match *spec {
        QrfStateSpec::UniformSuperposition { n } => {
            if n == 0 {
                return Err(Error::InvalidParameter(
                    "uniform superposition needs N >= 1".into(),
                ));
            }
            if truncation < n {
                return Err(Error::InsufficientTruncation {
                    given: truncation,
                    required: n,
                    tail: (n - truncation) as f64 / n as f64,
                });
            }
            let amp = 1.0 / (n as f64).sqrt();
            let v: Vec<f64> = (0..truncation)
                .map(|k| if k < n { amp } else { 0.0 })
                .collect();
            StateVector::from_real(&v)
        }
        QrfStateSpec::Coherent { alpha } => analytic(alpha, 0.0, truncation),
        QrfStateSpec::SqueezedDisplaced { alpha, r } => analytic(alpha, r, truncation),
        QrfStateSpec::Explicit { ref amplitudes } => {
            if amplitudes.is_empty() {
                return Err(Error::InvalidParameter(
                    "explicit amplitudes are empty".into(),
                ));
            }
            let c: Vec<C64> = amplitudes.iter().map(|&[re, im]| c64(re, im)).collect();
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "explicit amplitudes have norm^2 {norm}, expected 1"
                )));
            }
            let probabilities: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
            check_tail(&probabilities, truncation)?;
            let v = CVector::from_iterator(
                truncation,
                (0..truncation).map(|k| c.get(k).copied().unwrap_or(c64(0.0, 0.0))),
            );
            StateVector::new(v)
        }
    }
}

fn analytic(alpha: f64, r: f64, truncation: usize) -> Result<StateVector> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "squeezing r must be >= 0, got {r}"
        )));
    }
    let mean = alpha * alpha + r.sinh().powi(2);
    let len = truncation.max((20.0 * (mean + 1.0)) as usize + 200);
    let c = analytic_amplitudes(alpha, r, len);
    let probabilities: Vec<f64> = c.iter().map(|x| x * x).collect();
    check_tail(&probabilities, truncation)?;
    StateVector::from_real(&c[..truncation])
}

/// `sum_n n |c_n|^2`
pub fn mean_energy(state: &StateVector) -> f64 {
    state
        .probabilities()
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

/// Qubit `(|0> + |1>)/sqrt(2)` next to the QRF state; `K` counts the qubit
/// excitation and `G` is the total excitation number.
pub fn example1_scenario(qrf: &StateVector, lambda: f64) -> Result<Scenario> {
    let levels = qrf.dim();
    let plus = StateVector::from_real(&[1.0, 1.0])?;
    let psi0 = tensor(&plus, qrf);
    let n_qubit = number_operator(2);
    let id_q = HermitianOperator::identity(2);
    let id_r = HermitianOperator::identity(levels);
    let k = tensor(&n_qubit, &id_r);
    let g = k.add(&tensor(&id_q, &number_operator(levels)))?;
    Scenario::new(psi0, k, g, lambda)
}

/// Closed-form Bob QFI for the qubit-plus-oscillator model from QRF amplitudes.
pub fn example1_qfi_closed_form(c: &[C64]) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::InvalidParameter("amplitude list is empty".into()));
    }
    let q: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
    let norm: f64 = q.iter().sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "amplitudes have norm^2 {norm}, expected 1"
        )));
    }
    Ok(example1_qfi_from_probabilities(&q))
}

/// The same closed form in terms of `q_n = |c_n|^2`:
/// `2 - 2 (sum_{n<N-1} q_n^2 / (q_n + q_{n+1}) + q_{N-1})`.
pub fn example1_qfi_from_probabilities(q: &[f64]) -> f64 {
    let n = q.len();
    let mut sum = q[n - 1];
    for w in q.windows(2) {
        let s = w[0] + w[1];
        if s > 0.0 {
            sum += w[0] * w[0] / s;
        }
    }
    2.0 - 2.0 * sum
}

/// Bob's QFI for a coherent QRF with `alpha_sq = |alpha|^2`:
/// `2 x / (1 + x) M(1, 2 + x, -x)`.
pub fn coherent_qfi_hypergeometric(alpha_sq: f64) -> Result<f64> {
    if !(alpha_sq >= 0.0) || !alpha_sq.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha_sq must be non-negative, got {alpha_sq}"
        )));
    }
    let x = alpha_sq;
    Ok(2.0 * x / (1.0 + x) * kummer_m(2.0 + x, -x)?)
}
