//! The twirl (pinching) channel built from the spectral projectors of a noise
//! generator, plus a brute-force time-average used as a test oracle.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::hilbert::{
    c64, check_dim, eigh, max_abs, CMatrix, CVector, DensityMatrix, HermitianOperator, C64,
};

/// Relative gap below which neighbouring eigenvalues are merged.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

const ORTHONORMALITY_TOL: f64 = 1e-9;

/// Complete set of orthogonal projectors, stored as isometries `V_i` with
/// `P_i = V_i V_i^dagger`.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    blocks: Vec<CMatrix>,
    eigenvalues: Vec<f64>,
    dim: usize,
}

impl ProjectorSet {
    /// The trivial set `{1}`.
    pub fn identity(dim: usize) -> Self {
        Self {
            blocks: vec![CMatrix::identity(dim, dim)],
            eigenvalues: vec![0.0],
            dim,
        }
    }

    /// Builds a set from isometries whose columns jointly form an orthonormal basis.
    pub fn from_blocks(blocks: Vec<CMatrix>, eigenvalues: Vec<f64>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter(
                "projector set must be non-empty".into(),
            ));
        }
        check_dim(blocks.len(), eigenvalues.len())?;
        if eigenvalues.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "projector eigenvalues must be strictly increasing".into(),
            ));
        }
        let dim = blocks[0].nrows();
        let mut all = CMatrix::zeros(dim, 0);
        for b in &blocks {
            check_dim(dim, b.nrows())?;
            if b.ncols() == 0 {
                return Err(Error::InvalidParameter("empty projector block".into()));
            }
            let start = all.ncols();
            all = all.insert_columns(start, b.ncols(), c64(0.0, 0.0));
            all.columns_mut(start, b.ncols()).copy_from(b);
        }
        check_dim(dim, all.ncols())?;
        let defect = max_abs(&(all.adjoint() * &all - CMatrix::identity(dim, dim)));
        if defect > ORTHONORMALITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "projector blocks are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self {
            blocks,
            eigenvalues,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal basis `V_i` of the `i`-th eigenspace.
    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.ncols()).collect()
    }

    /// Dense `P_i`.
    pub fn projector(&self, i: usize) -> HermitianOperator {
        let v = &self.blocks[i];
        HermitianOperator::from_matrix_unchecked(v * v.adjoint())
    }

    pub fn projectors(&self) -> Vec<HermitianOperator> {
        (0..self.len()).map(|i| self.projector(i)).collect()
    }

    /// `P_i v` without forming `P_i`.
    pub fn project(&self, i: usize, v: &CVector) -> CVector {
        let b = &self.blocks[i];
        b * (b.adjoint() * v)
    }

    /// Largest violation among idempotence, mutual orthogonality and completeness.
    pub fn invariant_defect(&self) -> f64 {
        let ps: Vec<CMatrix> = self
            .projectors()
            .into_iter()
            .map(|p| p.into_matrix())
            .collect();
        let mut worst: f64 = 0.0;
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for (i, p) in ps.iter().enumerate() {
            worst = worst.max(max_abs(&(p * p - p)));
            for q in &ps[i + 1..] {
                worst = worst.max(max_abs(&(p * q)));
            }
            sum += p;
        }
        worst.max(max_abs(&(sum - CMatrix::identity(self.dim, self.dim))))
    }

    pub fn check_invariants(&self) -> Result<()> {
        let defect = self.invariant_defect();
        if defect > ORTHONORMALITY_TOL {
            return Err(Error::Inconsistent(format!(
                "projector set violates its invariants by {defect:.3e}"
            )));
        }
        Ok(())
    }
}

/// Groups an ascending spectrum into clusters: a value joins the current
/// cluster when it lies within `tol * (1 + range)` of its predecessor.
pub fn cluster_spectrum(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    if values.is_empty() {
        return Vec::new();
    }
    let range = values[values.len() - 1] - values[0];
    let gap = tol * (1.0 + range);
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        if values[i] - values[i - 1] > gap {
            clusters.push(start..i);
            start = i;
        }
    }
    clusters.push(start..values.len());
    clusters
}

/// Spectral projectors of `g`, merging eigenvalues closer than the cluster tolerance.
pub fn spectral_projectors(g: &HermitianOperator, cluster_tol: f64) -> Result<ProjectorSet> {
    if !(cluster_tol > 0.0) || !cluster_tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cluster tolerance must be positive, got {cluster_tol}"
        )));
    }
    let eig = eigh(g)?;
    let clusters = cluster_spectrum(&eig.values, cluster_tol);
    let mut blocks = Vec::with_capacity(clusters.len());
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    for c in clusters {
        let n = c.len() as f64;
        eigenvalues.push(eig.values[c.clone()].iter().sum::<f64>() / n);
        blocks.push(eig.vectors.columns(c.start, c.len()).into_owned());
    }
    Ok(ProjectorSet {
        blocks,
        eigenvalues,
        dim: g.dim(),
    })
}

fn pinch(m: &CMatrix, p: &ProjectorSet) -> CMatrix {
    let mut out = CMatrix::zeros(p.dim, p.dim);
    for v in &p.blocks {
        let inner = v.adjoint() * m * v;
        out += v * inner * v.adjoint();
    }
    out
}

/// `sum_i P_i rho P_i`
pub fn twirl(rho: &DensityMatrix, p: &ProjectorSet) -> Result<DensityMatrix> {
    check_dim(p.dim, rho.dim())?;
    Ok(DensityMatrix::from_matrix_unchecked(pinch(rho.matrix(), p)))
}

/// The same pinching applied to an arbitrary operator (e.g. a state derivative).
pub fn twirl_operator(m: &CMatrix, p: &ProjectorSet) -> Result<CMatrix> {
    check_dim(p.dim, m.nrows())?;
    check_dim(p.dim, m.ncols())?;
    Ok(pinch(m, p))
}

/// Trapezoidal average of `exp(-iGt) rho exp(iGt)` over `t` in `[0, t_max]`
/// with `steps` uniform intervals.
pub fn finite_time_average(
    rho: &DensityMatrix,
    g: &HermitianOperator,
    t_max: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    check_dim(g.dim(), rho.dim())?;
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "steps must be >= 2, got {steps}"
        )));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let eig = eigh(g)?;
    let v = &eig.vectors;
    let mut r = v.adjoint() * rho.matrix() * v;
    let h = t_max / steps as f64;
    for j in 0..r.nrows() {
        for k in 0..r.ncols() {
            let delta = eig.values[j] - eig.values[k];
            r[(j, k)] *= trapezoid_phase_average(delta, h, steps);
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(v * r * v.adjoint()))
}

/// Trapezoidal estimate of `(1/T) int_0^T exp(-i delta t) dt` on `steps`
/// intervals of width `h`, summing the geometric series in closed form.
fn trapezoid_phase_average(delta: f64, h: f64, steps: usize) -> C64 {
    let t_max = h * steps as f64;
    if (delta * t_max).abs() < 1e-12 {
        return c64(1.0, 0.0);
    }
    let theta = delta * h;
    let m = steps as f64;
    // 1 - exp(-i a) written without cancellation.
    let one_minus = |a: f64| c64(2.0 * (0.5 * a).sin().powi(2), a.sin());
    let denom = one_minus(theta);
    let sum = if denom.norm() < 1e-6 {
        (0..=steps).fold(c64(0.0, 0.0), |acc, n| {
            acc + C64::from_polar(1.0, -theta * n as f64)
        })
    } else {
        one_minus(theta * (m + 1.0)) / denom
    };
    let ends = 0.5 * (c64(1.0, 0.0) + C64::from_polar(1.0, -theta * m));
    (sum - ends) / m
}
