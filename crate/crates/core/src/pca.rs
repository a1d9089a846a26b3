//! Principal component analysis on small dense matrices, backed by a cyclic
//! Jacobi eigensolver for symmetric matrices. Component signs are fixed by
//! making each component's largest-magnitude loading positive, so projections
//! are fully deterministic.

use thiserror::Error;

use crate::matrix::RowMatrix;
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum PcaError {
    #[error("need at least 2 rows and 2 columns, got {rows}x{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("requested {requested} components from {available} dimensions")]
    TooManyComponents { requested: usize, available: usize },
    #[error("input has zero variance (rank 0)")]
    RankZero,
    #[error("matrix is not square")]
    NotSquare,
}

/// Eigenvalues in descending order with matching unit-length eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn symmetric_eigen<T: Real>(mat: &[Vec<T>]) -> Result<EigenDecomposition<T>, PcaError> {
    let n = mat.len();
    if mat.iter().any(|row| row.len() != n) {
        return Err(PcaError::NotSquare);
    }
    let mut a: Vec<Vec<T>> = mat.to_vec();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();

    let eps = T::epsilon();
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        let scale = (0..n).fold(T::zero(), |acc, i| acc + a[i][i] * a[i][i]);
        if off.sqrt() <= eps * (scale.sqrt() + T::one()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (T::from_f64(2.0) * apq);
                let t = {
                    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
                    sign / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<T>> =
        order.iter().map(|&col| (0..n).map(|row| v[row][col]).collect()).collect();
    Ok(EigenDecomposition { values, vectors })
}

/// Result of a PCA projection.
#[derive(Clone, Debug)]
pub struct PcaProjection<T> {
    /// `n x out_dim` projected coordinates.
    pub coords: RowMatrix<T>,
    /// All eigenvalues of the sample covariance, descending.
    pub eigenvalues: Vec<T>,
    /// `out_dim` principal directions (rows), sign-fixed.
    pub components: Vec<Vec<T>>,
    /// Column means subtracted before projection.
    pub mean: Vec<T>,
}

/// Mean-center and project onto the top `out_dim` principal directions of the
/// sample covariance (denominator `n - 1`). Eigenvalues are sorted
/// descending; each component's largest-magnitude loading is made positive.
pub fn pca_project<T: Real>(
    data: &RowMatrix<T>,
    out_dim: usize,
) -> Result<PcaProjection<T>, PcaError> {
    let n = data.rows();
    let k = data.cols();
    if n < 2 || k < 2 {
        return Err(PcaError::TooSmall { rows: n, cols: k });
    }
    if out_dim > k {
        return Err(PcaError::TooManyComponents { requested: out_dim, available: k });
    }

    let mean = data.col_means();
    let denom = T::from_f64((n - 1) as f64);
    let mut cov = vec![vec![T::zero(); k]; k];
    for row in data.iter_rows() {
        let centered: Vec<T> = row.iter().zip(&mean).map(|(&x, &m)| x - m).collect();
        for (i, &ci) in centered.iter().enumerate() {
            for (j, &cj) in centered.iter().enumerate().skip(i) {
                cov[i][j] += ci * cj;
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }

    let eigen = symmetric_eigen(&cov)?;
    let scale = data.as_flat().iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    let floor = (T::epsilon() * (T::one() + scale) * T::from_f64(64.0)).powi(2);
    if !(eigen.values[0] > floor) {
        return Err(PcaError::RankZero);
    }

    let mut components: Vec<Vec<T>> = eigen.vectors[..out_dim].to_vec();
    for comp in &mut components {
        let lead = comp
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if comp[lead] < T::zero() {
            comp.iter_mut().for_each(|x| *x = -*x);
        }
    }

    let mut coords = RowMatrix::zeros(n, out_dim);
    for (r, row) in data.iter_rows().enumerate() {
        let out = coords.row_mut(r);
        for (c, comp) in components.iter().enumerate() {
            out[c] = row
                .iter()
                .zip(&mean)
                .zip(comp)
                .fold(T::zero(), |acc, ((&x, &m), &w)| acc + (x - m) * w);
        }
    }
    Ok(PcaProjection { coords, eigenvalues: eigen.values, components, mean })
}
