//! Special functions needed by the model systems.

use crate::error::{Error, Result};

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite_h(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_k(x) / sqrt(2^k k!)` for `k < len`. Stays finite where `H_k` itself overflows.
pub fn hermite_normalized(len: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(len);
    if len == 0 {
        return h;
    }
    h.push(1.0);
    if len > 1 {
        h.push(std::f64::consts::SQRT_2 * x);
    }
    for n in 1..len.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * h[n] - (nf / (nf + 1.0)).sqrt() * h[n - 1];
        h.push(next);
    }
    h
}

const KUMMER_MAX_TERMS: usize = 1_000_000;

/// Kummer's function `M(1, b, z) = sum_k z^k / (b)_k`, summed with Neumaier
/// compensation until a term drops below `1e-16` of the partial sum.
pub fn kummer_m(b: f64, z: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kummer_m needs b > 0 and finite z, got b={b}, z={z}"
        )));
    }
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut term = 1.0;
    for k in 0..KUMMER_MAX_TERMS {
        term *= z / (b + k as f64);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        if term.abs() < 1e-16 * (sum + comp).abs() || term == 0.0 {
            return Ok(sum + comp);
        }
    }
    Err(Error::SeriesNonConvergence(KUMMER_MAX_TERMS))
}

/// `ln(n!)`, exact product up to 20 and log-gamma beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= 20 {
        (2..=n).map(|k| k as f64).product::<f64>().ln()
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// `n choose k` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        let mut acc = 1.0;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        acc.round()
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}
