use super::space::TensorSpace;
use super::state::StateVector;
use super::{born_probability, StateRef};
use crate::error::{Error, Result};
use crate::linalg::{check_hermitian, gram_deviation, outer, trace, CMatrix, VALIDITY_TOL};

/// Hermitian operator, optionally carrying the eigensystem it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    space: TensorSpace,
    matrix: CMatrix,
    eigensystem: Option<(Vec<StateVector>, Vec<f64>)>,
}

impl Observable {
    pub fn new(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        check_hermitian(&matrix)?;
        Ok(Self { space, matrix, eigensystem: None })
    }

    pub fn identity(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self { space, matrix: CMatrix::identity(d, d), eigensystem: None }
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Basis {|n⟩} and scale {a_n} when built by [`build_observable`].
    pub fn eigensystem(&self) -> Option<(&[StateVector], &[f64])> {
        self.eigensystem.as_ref().map(|(b, a)| (b.as_slice(), a.as_slice()))
    }
}

/// Checks that `basis` is an orthonormal, complete family on one space.
pub fn check_complete_basis(basis: &[StateVector]) -> Result<TensorSpace> {
    let first = basis.first().ok_or(Error::BasisIncomplete { expected: 1, found: 0 })?;
    let space = first.space().clone();
    for v in basis {
        v.check_same_space(&space)?;
    }
    let vectors: Vec<_> = basis.iter().map(|v| v.amplitudes().clone()).collect();
    let deviation = gram_deviation(&vectors);
    if deviation > VALIDITY_TOL {
        return Err(Error::BasisNotOrthonormal { deviation });
    }
    let d = space.total_dim();
    if basis.len() != d {
        return Err(Error::BasisIncomplete { expected: d, found: basis.len() });
    }
    let sum = vectors.iter().fold(CMatrix::zeros(d, d), |acc, v| acc + outer(v, v));
    let deviation = crate::linalg::max_abs(&(sum - CMatrix::identity(d, d)));
    if deviation > VALIDITY_TOL {
        return Err(Error::BasisNotOrthonormal { deviation });
    }
    Ok(space)
}

/// A = Σ |n⟩ a_n ⟨n| over a complete orthonormal basis.
///
/// With `scale[n] = δ_{n n0}` the result is the yes–no projector onto `|n0⟩`.
pub fn build_observable(basis: &[StateVector], scale: &[f64]) -> Result<Observable> {
    if basis.len() != scale.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: scale.len() });
    }
    let space = check_complete_basis(basis)?;
    let d = space.total_dim();
    let mut matrix = CMatrix::zeros(d, d);
    for (v, &a) in basis.iter().zip(scale) {
        matrix += outer(v.amplitudes(), v.amplitudes()).scale(a);
    }
    Ok(Observable { space, matrix, eigensystem: Some((basis.to_vec(), scale.to_vec())) })
}

/// ⟨A⟩ on a pure state (Σ p_n a_n when the eigensystem is known) or
/// tr(Aρ)/tr(ρ) on a density operator.
pub fn expectation<'a>(a: &Observable, state: impl Into<StateRef<'a>>) -> Result<f64> {
    match state.into() {
        StateRef::Pure(psi) => {
            psi.check_same_space(&a.space)?;
            match &a.eigensystem {
                Some((basis, scale)) => {
                    let mut total = 0.0;
                    for (n, an) in basis.iter().zip(scale) {
                        total += born_probability(n, psi)? * an;
                    }
                    Ok(total)
                }
                None => {
                    psi.check_normalized()?;
                    let amps = psi.amplitudes();
                    Ok(amps.dotc(&(&a.matrix * amps)).re)
                }
            }
        }
        StateRef::Mixed(rho) => {
            if rho.space() != &a.space {
                return Err(Error::SpaceMismatch { left: a.space.to_string(), right: rho.space().to_string() });
            }
            Ok(trace(&(&a.matrix * rho.matrix())).re / rho.trace())
        }
    }
}
