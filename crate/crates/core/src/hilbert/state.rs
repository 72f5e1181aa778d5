use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityOperator;
use super::space::TensorSpace;
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, CVector, VALIDITY_TOL};

/// Complex amplitude vector over a labeled tensor space.
///
/// The global phase is stored as given; compare with [`StateVector::ray_equal`]
/// to ignore it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct StateVector {
    space: TensorSpace,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(space: TensorSpace, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), found: amplitudes.len() });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn from_complex(space: TensorSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(space, CVector::from_vec(amplitudes))
    }

    pub fn from_reals(space: TensorSpace, amplitudes: &[f64]) -> Result<Self> {
        Self::new(space, CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&x| Complex64::new(x, 0.0))))
    }

    /// Computational basis vector `index`.
    pub fn basis(space: TensorSpace, index: usize) -> Result<Self> {
        let dim = space.total_dim();
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range for dimension {dim}")));
        }
        Ok(Self { space, amplitudes: basis_vector(dim, index) })
    }

    /// All computational basis vectors of `space`.
    pub fn computational_basis(space: &TensorSpace) -> Vec<StateVector> {
        (0..space.total_dim())
            .map(|k| StateVector { space: space.clone(), amplitudes: basis_vector(space.total_dim(), k) })
            .collect()
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.amplitudes.norm_squared() - 1.0).abs() <= VALIDITY_TOL
    }

    pub fn check_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { space: self.space.clone(), amplitudes: self.amplitudes.unscale(norm) })
    }

    pub(crate) fn check_same_space(&self, other: &TensorSpace) -> Result<()> {
        if self.dim() != other.total_dim() {
            return Err(Error::DimensionMismatch { expected: other.total_dim(), found: self.dim() });
        }
        if &self.space != other {
            return Err(Error::SpaceMismatch { left: self.space.to_string(), right: other.to_string() });
        }
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        other.check_same_space(&self.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Equality up to a global phase factor.
    pub fn ray_equal(&self, other: &StateVector, tol: f64) -> bool {
        if self.space != other.space {
            return false;
        }
        let overlap = self.amplitudes.dotc(&other.amplitudes).norm();
        let (na, nb) = (self.norm(), other.norm());
        (na - nb).abs() <= tol && (na * nb - overlap).abs() <= tol
    }

    /// |⟨self|other⟩|² for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// |ψ⟩⟨ψ| for a normalized state.
    pub fn density(&self) -> Result<DensityOperator> {
        self.check_normalized()?;
        Ok(DensityOperator::from_matrix_unchecked(self.space.clone(), &self.amplitudes * self.amplitudes.adjoint()))
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: CVector) -> Self {
        debug_assert_eq!(amplitudes.len(), self.dim());
        Self { space: self.space.clone(), amplitudes }
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    space: TensorSpace,
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<StateRepr> for StateVector {
    type Error = Error;

    fn try_from(value: StateRepr) -> Result<Self> {
        StateVector::from_complex(value.space, value.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
    }
}

impl From<StateVector> for StateRepr {
    fn from(value: StateVector) -> Self {
        StateRepr { amplitudes: value.amplitudes.iter().map(|z| [z.re, z.im]).collect(), space: value.space }
    }
}
