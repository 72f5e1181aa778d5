use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::space::TensorSpace;
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, hermitian_deviation, trace, CMatrix, VALIDITY_TOL};

/// Hermitian, positive, unit-trace operator over a tensor space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub struct DensityOperator {
    space: TensorSpace,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity (all at 1e-10).
    pub fn new(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(space, matrix);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(space: TensorSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), space.total_dim());
        Self { space, matrix }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.space.total_dim();
        if self.matrix.nrows() != dim || self.matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.matrix.nrows() });
        }
        let deviation = hermitian_deviation(&self.matrix);
        if deviation > VALIDITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -VALIDITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// 1/d on the whole space.
    pub fn maximally_mixed(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self { matrix: CMatrix::identity(d, d).unscale(d as f64), space }
    }

    /// Σ_k w_k ρ_k for weights on the simplex.
    pub fn mixture(weights: &[f64], components: &[DensityOperator]) -> Result<Self> {
        if weights.len() != components.len() || components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs one weight per component".into()));
        }
        crate::entanglement::check_simplex(weights)?;
        let space = components[0].space.clone();
        let d = space.total_dim();
        let mut matrix = CMatrix::zeros(d, d);
        for (w, rho) in weights.iter().zip(components) {
            if rho.space != space {
                return Err(Error::SpaceMismatch { left: space.to_string(), right: rho.space.to_string() });
            }
            matrix += rho.matrix.scale(*w);
        }
        Self::new(space, matrix)
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(Complex64::norm_sqr).sum()
    }

    /// Spectrum in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    space: TensorSpace,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<DensityRepr> for DensityOperator {
    type Error = Error;

    fn try_from(value: DensityRepr) -> Result<Self> {
        let d = value.space.total_dim();
        if value.matrix.len() != d || value.matrix.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: value.matrix.len() });
        }
        let matrix = CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = value.matrix[i][j];
            Complex64::new(re, im)
        });
        DensityOperator::new(value.space, matrix)
    }
}

impl From<DensityOperator> for DensityRepr {
    fn from(value: DensityOperator) -> Self {
        let d = value.dim();
        let matrix = (0..d).map(|i| (0..d).map(|j| [value.matrix[(i, j)].re, value.matrix[(i, j)].im]).collect()).collect();
        DensityRepr { space: value.space, matrix }
    }
}
