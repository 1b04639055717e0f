//! PCA projection baseline, fitted by power iteration with deflation.

use rayon::prelude::*;
use thiserror::Error;

use crate::matrix::dot;
use crate::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum PcaError {
    #[error("component {component} did not converge within {iterations} iterations")]
    ConvergenceFailure { component: usize, iterations: usize },
    #[error("expected {expected} columns, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("cannot extract {requested} components from {rows} × {cols} data")]
    InvalidDimension { requested: usize, rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// `[d_out × D]`, orthonormal rows.
    pub components: Matrix,
    pub mean: Vec<f64>,
    /// Variance of the data along each component, non-increasing.
    pub explained_variance: Vec<f64>,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 20_000;

/// Fixed start vector: `1 + frac((j + 1)·φ)` per coordinate.
fn start_vector(dim: usize) -> Vec<f64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    (0..dim).map(|j| 1.0 + ((j + 1) as f64 * PHI).fract()).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes keep the result orthogonal to machine precision
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, bj)| *x -= p * bj);
        }
    }
}

fn mat_vec(cov: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    cov.iter().map(|row| dot(row, v)).collect()
}

/// First basis vector not lying in the span of `basis`, used when the fixed
/// start vector has no component outside the span.
fn fallback_start(dim: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    for j in 0..dim {
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        orthogonalize(&mut v, basis);
        if normalize(&mut v) > 1e-6 {
            return v;
        }
    }
    vec![0.0; dim]
}

/// Top `d_out` principal directions of the mean-centered rows.
///
/// Covariance uses the `1/S` normalization. Each component is found by power
/// iteration on the covariance restricted to the orthogonal complement of the
/// components already found; iteration stops when the eigen-residual
/// `‖Cv − λv‖` falls below `tol · max(1, trace C)`.
pub fn pca_fit(matrix: &Matrix, d_out: usize, tol: f64, max_iters: usize) -> Result<PcaModel, PcaError> {
    let (s, dim) = matrix.shape();
    if d_out == 0 || d_out > s.min(dim) {
        return Err(PcaError::InvalidDimension { requested: d_out, rows: s, cols: dim });
    }
    let mut mean = vec![0.0; dim];
    for row in matrix.iter_rows() {
        mean.iter_mut().zip(row).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= s as f64);

    let mut cov = vec![vec![0.0; dim]; dim];
    let mut centered = vec![0.0; dim];
    for row in matrix.iter_rows() {
        centered.iter_mut().zip(row.iter().zip(&mean)).for_each(|(c, (x, m))| *c = x - m);
        for (a, cov_row) in cov.iter_mut().enumerate() {
            let ca = centered[a];
            cov_row.iter_mut().zip(&centered).for_each(|(v, cb)| *v += ca * cb);
        }
    }
    cov.iter_mut().flatten().for_each(|v| *v /= s as f64);
    let scale = (0..dim).map(|i| cov[i][i]).sum::<f64>().max(1.0);

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(d_out);
    let mut variances = Vec::with_capacity(d_out);
    for component in 0..d_out {
        let mut v = start_vector(dim);
        orthogonalize(&mut v, &components);
        if normalize(&mut v) < 1e-6 {
            v = fallback_start(dim, &components);
        }
        let mut converged = false;
        let mut lambda = 0.0;
        for _ in 0..max_iters {
            let mut w = mat_vec(&cov, &v);
            orthogonalize(&mut w, &components);
            lambda = dot(&v, &w);
            let residual: f64 = w.iter().zip(&v).map(|(wi, vi)| (wi - lambda * vi).powi(2)).sum::<f64>().sqrt();
            if residual <= tol * scale {
                converged = true;
                break;
            }
            if normalize(&mut w) == 0.0 {
                // v lies in the null space of the deflated covariance
                converged = true;
                lambda = 0.0;
                break;
            }
            v = w;
        }
        if !converged {
            return Err(PcaError::ConvergenceFailure { component, iterations: max_iters });
        }
        orthogonalize(&mut v, &components);
        normalize(&mut v);
        // sign convention: largest-magnitude coordinate positive
        let lead = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        variances.push(lambda.max(0.0));
        components.push(v);
    }
    // power iteration can return near-equal eigenvalues slightly out of order
    for i in 1..variances.len() {
        if variances[i] > variances[i - 1] {
            variances[i] = variances[i - 1];
        }
    }
    Ok(PcaModel {
        components: Matrix::from_rows(&components),
        mean,
        explained_variance: variances,
    })
}

/// `(x − mean) · componentsᵀ` for every row.
pub fn pca_transform(model: &PcaModel, matrix: &Matrix) -> Result<Matrix, PcaError> {
    let dim = model.mean.len();
    if matrix.cols() != dim {
        return Err(PcaError::DimMismatch { expected: dim, got: matrix.cols() });
    }
    let d_out = model.components.rows();
    let mut out = Matrix::zeros(matrix.rows(), d_out);
    out.as_mut_slice().par_chunks_mut(d_out.max(1)).enumerate().for_each(|(i, dst)| {
        let centered: Vec<f64> = matrix.row(i).iter().zip(&model.mean).map(|(x, m)| x - m).collect();
        for (c, d) in dst.iter_mut().enumerate() {
            *d = dot(&centered, model.components.row(c));
        }
    });
    Ok(out)
}

impl PcaModel {
    pub fn transform(&self, matrix: &Matrix) -> Result<Matrix, PcaError> {
        pca_transform(self, matrix)
    }

    /// `componentsᵀ · y + mean` for every row.
    pub fn inverse_transform(&self, projected: &Matrix) -> Result<Matrix, PcaError> {
        let d_out = self.components.rows();
        if projected.cols() != d_out {
            return Err(PcaError::DimMismatch { expected: d_out, got: projected.cols() });
        }
        let dim = self.mean.len();
        let mut out = Matrix::zeros(projected.rows(), dim);
        for i in 0..projected.rows() {
            let dst = out.row_mut(i);
            dst.copy_from_slice(&self.mean);
            for (c, &y) in projected.row(i).iter().enumerate() {
                dst.iter_mut().zip(self.components.row(c)).for_each(|(d, w)| *d += y * w);
            }
        }
        Ok(out)
    }
}
