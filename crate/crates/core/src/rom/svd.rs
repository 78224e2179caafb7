//! Left singular vectors and singular values of a snapshot matrix.
//!
//! Wide matrices (`cols >= M`) go through the method of snapshots: the
//! symmetric eigenproblem of the `M x M` Gram matrix `X X^T`, with
//! `sigma = sqrt(lambda)`. Tall matrices use a direct SVD.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Column block size for Gram accumulation. Fixed so that the summation
/// order, and therefore the result, does not depend on the schedule.
const GRAM_BLOCK: usize = 2048;

/// Singular values in nonincreasing order with matching left vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdSpectrum {
    pub singular_values: Vec<f64>,
    /// `M x min(M, cols)`, column `i` pairs with `singular_values[i]`.
    pub left_vectors: DMatrix<f64>,
}

/// `X X^T` accumulated over fixed column blocks.
pub fn gram_matrix(data: &DMatrix<f64>, execution: Execution) -> DMatrix<f64> {
    let m = data.nrows();
    let cols = data.ncols();
    let starts: Vec<usize> = (0..cols).step_by(GRAM_BLOCK).collect();
    let partials = execution.map(starts, |start| {
        let width = GRAM_BLOCK.min(cols - start);
        let block = data.columns(start, width);
        let mut g = DMatrix::zeros(m, m);
        g.gemm(1.0, &block, &block.transpose(), 0.0);
        g
    });
    let mut gram = DMatrix::zeros(m, m);
    for p in partials {
        gram += p;
    }
    // exact symmetry
    for i in 0..m {
        for j in 0..i {
            let avg = 0.5 * (gram[(i, j)] + gram[(j, i)]);
            gram[(i, j)] = avg;
            gram[(j, i)] = avg;
        }
    }
    gram
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
pub fn orient_columns(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

pub fn compute_svd_spectrum(data: &DMatrix<f64>, execution: Execution) -> Result<SvdSpectrum> {
    let (m, cols) = data.shape();
    if m == 0 || cols == 0 {
        return Err(Error::invalid("snapshot matrix is empty"));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("snapshot matrix has non-finite entries".into()));
    }
    let (singular_values, mut left_vectors) = if cols >= m {
        from_gram(&gram_matrix(data, execution))?
    } else {
        direct(data)?
    };
    orient_columns(&mut left_vectors);
    Ok(SvdSpectrum { singular_values, left_vectors })
}

fn from_gram(gram: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = gram.nrows();
    let eig = SymmetricEigen::try_new(gram.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Gram eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]].max(0.0);
    let floor = -1e-10 * largest.max(f64::MIN_POSITIVE) * m as f64;
    let smallest = eig.eigenvalues[order[m - 1]];
    if smallest < floor {
        return Err(Error::Numerical(format!(
            "Gram matrix is not positive semidefinite: eigenvalue {smallest:e} vs largest {largest:e}"
        )));
    }
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn direct(data: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let k = data.nrows().min(data.ncols());
    let svd = nalgebra::SVD::try_new(data.clone(), true, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD returned no left vectors".into()))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = DMatrix::from_fn(data.nrows(), k, |r, c| u[(r, order[c])]);
    Ok((values, vectors))
}
