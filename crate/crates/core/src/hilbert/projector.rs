use super::space::TensorSpace;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, max_abs, outer, trace, CMatrix, VALIDITY_TOL};

/// Hermitian idempotent operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    space: TensorSpace,
    matrix: CMatrix,
}

impl Projector {
    pub fn new(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        let herm = hermitian_deviation(&matrix);
        if herm > VALIDITY_TOL {
            return Err(Error::InvalidProjectorSet(format!("projector not Hermitian (deviation {herm:e})")));
        }
        let idem = max_abs(&(&matrix * &matrix - &matrix));
        if idem > VALIDITY_TOL {
            return Err(Error::InvalidProjectorSet(format!("projector not idempotent (deviation {idem:e})")));
        }
        Ok(Self { space, matrix })
    }

    /// Projector onto the span of orthonormal `vectors`.
    pub fn onto(vectors: &[StateVector]) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| Error::InvalidProjectorSet("empty span".into()))?;
        let space = first.space().clone();
        let d = space.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for v in vectors {
            v.check_same_space(&space)?;
            m += outer(v.amplitudes(), v.amplitudes());
        }
        Self::new(space, m)
    }

    pub fn identity(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self { space, matrix: CMatrix::identity(d, d) }
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        trace(&self.matrix).re.round() as usize
    }

    pub(crate) fn from_matrix_unchecked(space: TensorSpace, matrix: CMatrix) -> Self {
        Self { space, matrix }
    }
}

/// Family {P_n} of mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    projectors: Vec<Projector>,
    labels: Vec<String>,
}

impl ProjectorSet {
    pub fn new(projectors: Vec<Projector>, labels: Vec<String>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidProjectorSet("empty set".into()));
        }
        if labels.len() != projectors.len() {
            return Err(Error::InvalidProjectorSet(format!("{} labels for {} projectors", labels.len(), projectors.len())));
        }
        let space = projectors[0].space.clone();
        let d = space.total_dim();
        let mut sum = CMatrix::zeros(d, d);
        for (i, p) in projectors.iter().enumerate() {
            if p.space != space {
                return Err(Error::SpaceMismatch { left: space.to_string(), right: p.space.to_string() });
            }
            for q in &projectors[..i] {
                let overlap = max_abs(&(&p.matrix * &q.matrix));
                if overlap > VALIDITY_TOL {
                    return Err(Error::InvalidProjectorSet(format!("projectors not orthogonal (overlap {overlap:e})")));
                }
            }
            sum += &p.matrix;
        }
        let dev = max_abs(&(sum - CMatrix::identity(d, d)));
        if dev > VALIDITY_TOL {
            return Err(Error::InvalidProjectorSet(format!("projectors do not sum to identity (deviation {dev:e})")));
        }
        Ok(Self { projectors, labels })
    }

    /// Rank-one projectors |n⟩⟨n| of a complete orthonormal basis, labeled by index.
    pub fn from_basis(basis: &[StateVector]) -> Result<Self> {
        let projectors = basis.iter().map(|v| Projector::onto(std::slice::from_ref(v))).collect::<Result<Vec<_>>>()?;
        let labels = (0..basis.len()).map(|k| k.to_string()).collect();
        Self::new(projectors, labels)
    }

    /// Computational-basis projectors of `label`, extended by identity on the
    /// other subsystems of `space`.
    pub fn local_computational(space: &TensorSpace, label: &str) -> Result<Self> {
        let local = TensorSpace::single(label, space.dim_of(label)?)?;
        let mut projectors = Vec::new();
        for v in StateVector::computational_basis(&local) {
            let m = outer(v.amplitudes(), v.amplitudes());
            projectors.push(Projector::new(space.clone(), super::embed_operator(space, &m, &[label])?)?);
        }
        let labels = (0..projectors.len()).map(|k| format!("{label}={k}")).collect();
        Self::new(projectors, labels)
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn space(&self) -> &TensorSpace {
        &self.projectors[0].space
    }

    /// Same family conjugated by `u`: P_n → u P_n u†.
    pub(crate) fn conjugated(&self, u: &CMatrix) -> Self {
        let projectors = self
            .projectors
            .iter()
            .map(|p| Projector::from_matrix_unchecked(p.space.clone(), u * &p.matrix * u.adjoint()))
            .collect();
        Self { projectors, labels: self.labels.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_set_axioms() {
        let space = TensorSpace::single("q", 3).unwrap();
        let basis = StateVector::computational_basis(&space);
        let set = ProjectorSet::from_basis(&basis).unwrap();
        assert_eq!(set.len(), 3);
        let p01 = Projector::onto(&basis[..2]).unwrap();
        let p1 = Projector::onto(&basis[1..2]).unwrap();
        let p2 = Projector::onto(&basis[2..]).unwrap();
        assert_eq!(p01.rank(), 2);
        assert!(ProjectorSet::new(vec![p01.clone(), p2.clone()], vec!["a".into(), "b".into()]).is_ok());
        assert!(ProjectorSet::new(vec![p01.clone(), p1], vec!["a".into(), "b".into()]).is_err());
        assert!(ProjectorSet::new(vec![p01], vec!["a".into()]).is_err());
        let not_idem = CMatrix::identity(3, 3).scale(0.5);
        assert!(Projector::new(space, not_idem).is_err());
    }

    #[test]
    fn local_projectors_cover_the_space() {
        let space = TensorSpace::new([("s", 2), ("e", 3)]).unwrap();
        let set = ProjectorSet::local_computational(&space, "s").unwrap();
        assert_eq!(set.projectors()[0].rank(), 3);
    }
}
