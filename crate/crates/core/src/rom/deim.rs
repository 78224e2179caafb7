//! Discrete empirical interpolation: greedy index selection and the
//! interpolatory projector `Y (P^T Y)^{-1} P^T`.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};

/// Greedy DEIM indices for the columns of `y` (ties go to the lowest row).
pub fn deim_indices(y: &DMatrix<f64>) -> Result<Vec<usize>> {
    let (m, n) = y.shape();
    if n == 0 || n > m {
        return Err(Error::invalid(format!("DEIM needs 1..={m} basis columns, got {n}")));
    }
    let mut indices = Vec::with_capacity(n);
    indices.push(argmax_abs(y.column(0).iter().copied()));
    for l in 1..n {
        let col = y.column(l);
        let pty = DMatrix::from_fn(l, l, |i, j| y[(indices[i], j)]);
        let rhs = DVector::from_fn(l, |i, _| col[indices[i]]);
        let c = pty.lu().solve(&rhs).ok_or_else(|| {
            Error::Numerical(format!("singular interpolation system at DEIM step {l}"))
        })?;
        let residual = col - y.columns(0, l) * c;
        let best = argmax_abs(residual.iter().copied());
        if residual[best].abs() <= 1e-12 * col.norm() {
            return Err(Error::Numerical(format!(
                "DEIM column {l} is linearly dependent on the previous columns"
            )));
        }
        indices.push(best);
    }
    Ok(indices)
}

fn argmax_abs(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v.abs() > best_val {
            best = i;
            best_val = v.abs();
        }
    }
    best
}

/// DEIM basis, interpolation indices and the factorized `P^T Y`.
#[derive(Debug, Clone)]
pub struct DeimOperator {
    basis: DMatrix<f64>,
    indices: Vec<usize>,
    sampled: DMatrix<f64>,
    factor: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl PartialEq for DeimOperator {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis && self.indices == other.indices
    }
}

impl DeimOperator {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let indices = deim_indices(&basis)?;
        Self::with_indices(basis, indices)
    }

    /// Rebuilds the operator for known indices (e.g. loaded from disk).
    pub fn with_indices(basis: DMatrix<f64>, indices: Vec<usize>) -> Result<Self> {
        let (m, n) = basis.shape();
        if indices.len() != n {
            return Err(Error::DimensionMismatch(format!("{} indices for {n} basis columns", indices.len())));
        }
        let mut seen = vec![false; m];
        for &i in &indices {
            if i >= m || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("DEIM index {i} is out of range or repeated")));
            }
        }
        let sampled = DMatrix::from_fn(n, n, |i, j| basis[(indices[i], j)]);
        let factor = sampled.clone().lu();
        if !factor.is_invertible() {
            return Err(Error::Numerical("P^T Y is singular".into()));
        }
        Ok(DeimOperator { basis, indices, sampled, factor })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// `P^T Y`.
    pub fn sampled_basis(&self) -> &DMatrix<f64> {
        &self.sampled
    }

    /// Coefficients `c` with `(P^T Y) c = rhs`.
    pub fn solve_sampled(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(rhs).expect("factor is invertible by construction")
    }

    /// `(P^T Y)^{-1}` applied from the right: returns `lhs (P^T Y)^{-1}`.
    pub fn right_solve(&self, lhs: &DMatrix<f64>) -> DMatrix<f64> {
        // X (P^T Y) = lhs  <=>  (P^T Y)^T X^T = lhs^T
        let transposed = self.sampled.transpose().lu();
        transposed
            .solve(&lhs.transpose())
            .expect("factor is invertible by construction")
            .transpose()
    }

    /// `Y (P^T Y)^{-1} P^T f`.
    pub fn reconstruct(&self, f: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_iterator(self.size(), self.indices.iter().map(|&i| f[i]));
        let c = self.solve_sampled(&rhs);
        (&self.basis * c).iter().copied().collect()
    }

    /// 2-norm condition number of `P^T Y`.
    pub fn condition_number(&self) -> f64 {
        let s = self.sampled.clone().singular_values();
        let max = s.iter().copied().fold(0.0, f64::max);
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(m: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v
    }

    #[test]
    fn single_column_picks_its_peak() {
        let mut y = DMatrix::from_element(10, 1, 0.1);
        y[(5, 0)] = -0.9;
        assert_eq!(deim_indices(&y).unwrap(), vec![5]);
    }

    #[test]
    fn identity_columns_trace() {
        // step 1: argmax |e2| = 2; step 2: residual of e7 after interpolating
        // at row 2 is e7 itself, so argmax = 7
        let y = DMatrix::from_columns(&[unit(10, 2), unit(10, 7)]);
        assert_eq!(deim_indices(&y).unwrap(), vec![2, 7]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let y = DMatrix::from_element(4, 1, 0.5);
        assert_eq!(deim_indices(&y).unwrap(), vec![0]);
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let c = DVector::from_vec(vec![0.1, 0.7, -0.2, 0.3]);
        let y = DMatrix::from_columns(&[c.clone(), c * 2.0]);
        assert!(deim_indices(&y).is_err());
    }

    #[test]
    fn reconstruction_is_exact_on_the_span() {
        let raw = DMatrix::from_fn(40, 5, |i, j| ((i as f64 + 1.0) * (j as f64 + 0.5) * 0.21).cos());
        let q = raw.qr().q();
        let deim = DeimOperator::new(q.clone()).unwrap();
        let coeffs = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, -0.25]);
        let f: Vec<f64> = (&q * coeffs).iter().copied().collect();
        let rec = deim.reconstruct(&f);
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = f.iter().zip(&rec).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * norm);
        assert!(deim.condition_number().is_finite());
    }

    #[test]
    fn right_solve_inverts_sampled_block() {
        let raw = DMatrix::from_fn(12, 3, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0 + 0.1 * j as f64);
        let deim = DeimOperator::new(raw.qr().q()).unwrap();
        let lhs = DMatrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64);
        let x = deim.right_solve(&lhs);
        assert!((x * deim.sampled_basis() - lhs).abs().max() < 1e-12);
    }

    #[test]
    fn rejects_repeated_indices() {
        let y = DMatrix::identity(4, 2);
        assert!(DeimOperator::with_indices(y, vec![1, 1]).is_err());
    }
}
