//! Truncated harmonic-oscillator ladder operators.
//!
//! On `n` levels `[a, a^dagger] = 1` everywhere except the top-right corner,
//! where the truncation gives `1 - n` instead of `1`.

use crate::error::{Error, Result};
use crate::hilbert::{c64, tensor, CMatrix, HermitianOperator};

#[derive(Debug, Clone)]
pub struct FockOps {
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub number: HermitianOperator,
}

pub fn fock_ops(n_levels: usize) -> Result<FockOps> {
    if n_levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "a Fock space needs at least 2 levels, got {n_levels}"
        )));
    }
    let mut a = CMatrix::zeros(n_levels, n_levels);
    for n in 1..n_levels {
        a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    Ok(FockOps {
        a,
        a_dag,
        number: number_operator(n_levels),
    })
}

/// `diag(0, 1, ..., n_levels - 1)`
pub fn number_operator(n_levels: usize) -> HermitianOperator {
    let diag: Vec<f64> = (0..n_levels).map(|n| n as f64).collect();
    HermitianOperator::from_real_diagonal(&diag)
}

/// One or two oscillator modes, each truncated to `n_levels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OscillatorSpace {
    n_levels: usize,
    modes: usize,
}

impl OscillatorSpace {
    pub fn new(n_levels: usize, modes: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_levels must be at least 2, got {n_levels}"
            )));
        }
        if !(1..=2).contains(&modes) {
            return Err(Error::InvalidParameter(format!(
                "modes must be 1 or 2, got {modes}"
            )));
        }
        Ok(Self { n_levels, modes })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.n_levels.pow(self.modes as u32)
    }

    /// Number operator of `mode` embedded in the full space.
    pub fn mode_number(&self, mode: usize) -> Result<HermitianOperator> {
        if mode >= self.modes {
            return Err(Error::InvalidParameter(format!("no mode {mode}")));
        }
        let n = number_operator(self.n_levels);
        if self.modes == 1 {
            return Ok(n);
        }
        let id = HermitianOperator::identity(self.n_levels);
        Ok(if mode == 0 {
            tensor(&n, &id)
        } else {
            tensor(&id, &n)
        })
    }

    /// Total excitation number.
    pub fn total_number(&self) -> HermitianOperator {
        let mut total = HermitianOperator::zeros(self.dim());
        for m in 0..self.modes {
            total = total
                .add(&self.mode_number(m).expect("mode in range"))
                .expect("same dimension");
        }
        total
    }
}
