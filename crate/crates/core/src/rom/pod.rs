use nalgebra::DMatrix;

use super::rank::{select_rank, RankRule};
use super::svd::{compute_svd_spectrum, SvdSpectrum};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Truncated left singular basis of a snapshot matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    /// `M x r`, orthonormal columns.
    pub vectors: DMatrix<f64>,
    /// Full spectrum the rank was chosen from.
    pub singular_values: Vec<f64>,
    pub rule: Option<RankRule>,
    /// False when the rank rule fell back to the full spectrum length.
    pub rule_satisfied: bool,
}

impl PodBasis {
    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Keeps the leading `rank` vectors of a spectrum.
    pub fn truncate(spectrum: &SvdSpectrum, rank: usize) -> Result<Self> {
        let available = spectrum.left_vectors.ncols();
        if rank == 0 || rank > available {
            return Err(Error::invalid(format!("rank {rank} outside 1..={available}")));
        }
        Ok(PodBasis {
            vectors: spectrum.left_vectors.columns(0, rank).into_owned(),
            singular_values: spectrum.singular_values.clone(),
            rule: None,
            rule_satisfied: true,
        })
    }

    /// Wraps an externally supplied orthonormal basis (e.g. the identity).
    pub fn from_orthonormal(vectors: DMatrix<f64>) -> Result<Self> {
        let r = vectors.ncols();
        if r == 0 || r > vectors.nrows() {
            return Err(Error::invalid("basis must have between 1 and M columns"));
        }
        let defect = (vectors.transpose() * &vectors - DMatrix::identity(r, r)).abs().max();
        if defect > 1e-10 {
            return Err(Error::Numerical(format!("basis is not orthonormal (defect {defect:e})")));
        }
        Ok(PodBasis {
            vectors,
            singular_values: Vec::new(),
            rule: None,
            rule_satisfied: true,
        })
    }

    /// `max |U^T U - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.rank();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(r, r)).abs().max()
    }
}

/// SVD, rank selection and truncation in one go.
pub fn compute_pod_basis(data: &DMatrix<f64>, rule: RankRule, execution: Execution) -> Result<PodBasis> {
    rule.validate()?;
    let spectrum = compute_svd_spectrum(data, execution)?;
    let selection = select_rank(&spectrum.singular_values, rule)?;
    let mut basis = PodBasis::truncate(&spectrum, selection.rank)?;
    basis.rule = Some(rule);
    basis.rule_satisfied = selection.satisfied;
    Ok(basis)
}

/// Summed squared residuals of projecting every column onto the basis.
pub fn projection_residual(data: &DMatrix<f64>, basis: &DMatrix<f64>) -> f64 {
    let coeffs = basis.transpose() * data;
    let residual = data - basis * coeffs;
    residual.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_column_space() {
        let modes = DMatrix::from_fn(20, 3, |i, j| ((i + 1) as f64 * (j + 1) as f64 * 0.3).sin());
        let weights = DMatrix::from_fn(3, 40, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let data = &modes * weights;
        let basis = compute_pod_basis(&data, RankRule::CumulativeSigma { threshold: 1e-9 }, Execution::Sequential)
            .unwrap();
        assert!(basis.rank() >= 3);
        assert!(basis.orthonormality_defect() < 1e-12);
        assert!(projection_residual(&data, &basis.vectors) < 1e-18 * data.norm_squared().max(1.0) * 1e6);
    }

    #[test]
    fn eckart_young_on_small_random_matrix() {
        let data = DMatrix::from_fn(12, 30, |i, j| (((i * 13 + j * 29) % 17) as f64 - 8.0) / (1.0 + i as f64));
        let spectrum = compute_svd_spectrum(&data, Execution::Sequential).unwrap();
        for r in [1, 4, 8] {
            let basis = PodBasis::truncate(&spectrum, r).unwrap();
            let lhs = projection_residual(&data, &basis.vectors);
            let rhs: f64 = spectrum.singular_values[r..].iter().map(|s| s * s).sum();
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300), "r={r}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn rejects_bad_rank_and_non_orthonormal() {
        let spectrum = compute_svd_spectrum(&DMatrix::identity(3, 3), Execution::Sequential).unwrap();
        assert!(PodBasis::truncate(&spectrum, 0).is_err());
        assert!(PodBasis::truncate(&spectrum, 4).is_err());
        assert!(PodBasis::from_orthonormal(DMatrix::from_element(3, 2, 1.0)).is_err());
        assert_eq!(PodBasis::from_orthonormal(DMatrix::identity(4, 4)).unwrap().rank(), 4);
    }
}
