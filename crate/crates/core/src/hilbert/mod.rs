//! State vectors, density operators and observables on labeled tensor-product
//! spaces, with tensor products and partial traces.

mod density;
mod observable;
mod projector;
mod space;
mod state;

pub use density::DensityOperator;
pub use observable::{build_observable, check_complete_basis, expectation, Observable};
pub use projector::{Projector, ProjectorSet};
pub use space::TensorSpace;
pub use state::StateVector;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, ZERO};

/// Either kind of state, borrowed.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityOperator),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(value: &'a StateVector) -> Self {
        StateRef::Pure(value)
    }
}

impl<'a> From<&'a DensityOperator> for StateRef<'a> {
    fn from(value: &'a DensityOperator) -> Self {
        StateRef::Mixed(value)
    }
}

/// Either kind of state, owned.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl State {
    pub fn as_ref(&self) -> StateRef<'_> {
        match self {
            State::Pure(v) => StateRef::Pure(v),
            State::Mixed(r) => StateRef::Mixed(r),
        }
    }

    pub fn into_pure(self) -> Option<StateVector> {
        match self {
            State::Pure(v) => Some(v),
            State::Mixed(_) => None,
        }
    }

    pub fn into_mixed(self) -> Option<DensityOperator> {
        match self {
            State::Mixed(r) => Some(r),
            State::Pure(_) => None,
        }
    }
}

impl StateRef<'_> {
    pub fn space(&self) -> &TensorSpace {
        match self {
            StateRef::Pure(v) => v.space(),
            StateRef::Mixed(r) => r.space(),
        }
    }
}

/// a ⊗ b over the concatenated space.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let space = a.space().concat(b.space())?;
    StateVector::new(space, a.amplitudes().kronecker(b.amplitudes()))
}

/// Tensor product of several states, in order.
pub fn tensor_all(parts: &[&StateVector]) -> Result<StateVector> {
    let (first, rest) = parts.split_first().ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, p| tensor(&acc, p))
}

pub fn tensor_density(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let space = a.space().concat(b.space())?;
    Ok(DensityOperator::from_matrix_unchecked(space, a.matrix().kronecker(b.matrix())))
}

/// |⟨outcome|state⟩|² for normalized states on the same space.
pub fn born_probability(outcome: &StateVector, state: &StateVector) -> Result<f64> {
    state.check_same_space(outcome.space())?;
    outcome.check_normalized()?;
    state.check_normalized()?;
    Ok(outcome.amplitudes().dotc(state.amplitudes()).norm_sqr().min(1.0))
}

/// Index tables mapping (group index, rest index) to flat indices.
struct Split {
    flat_of: Vec<usize>,
    group_dim: usize,
    rest_dim: usize,
}

fn split(space: &TensorSpace, labels: &[&str]) -> Result<Split> {
    let mut positions = Vec::with_capacity(labels.len());
    for l in labels {
        let p = space.position(l)?;
        if positions.contains(&p) {
            return Err(Error::LabelCollision(l.to_string()));
        }
        positions.push(p);
    }
    let (g_idx, r_idx, group_dim, rest_dim) = space.split_indices(&positions);
    let mut flat_of = vec![0; group_dim * rest_dim];
    for (flat, (g, r)) in g_idx.into_iter().zip(r_idx).enumerate() {
        flat_of[g * rest_dim + r] = flat;
    }
    Ok(Split { flat_of, group_dim, rest_dim })
}

/// Reduced density operator on the `keep` subsystems (declared order kept).
///
/// The result satisfies tr{A ρ_keep} = ⟨A ⊗ 1⟩ for every local observable A.
pub fn partial_trace<'a>(state: impl Into<StateRef<'a>>, keep: &[&str]) -> Result<DensityOperator> {
    let state = state.into();
    let space = state.space();
    if keep.is_empty() {
        return Err(Error::InvalidBipartition("nothing kept".into()));
    }
    let reduced_space = space.restrict(keep)?;
    if reduced_space.len() == space.len() {
        return Err(Error::InvalidBipartition("all subsystems kept; nothing to trace out".into()));
    }
    // order the kept labels as declared so the result matches `reduced_space`
    let ordered: Vec<&str> = reduced_space.labels().collect();
    let Split { flat_of, group_dim: dk, rest_dim: de } = split(space, &ordered)?;
    let mut out = CMatrix::zeros(dk, dk);
    match state {
        StateRef::Pure(psi) => {
            psi.check_normalized()?;
            let amps = psi.amplitudes();
            let m = CMatrix::from_fn(dk, de, |k, e| amps[flat_of[k * de + e]]);
            out = &m * m.adjoint();
        }
        StateRef::Mixed(rho) => {
            let r = rho.matrix();
            for k1 in 0..dk {
                for k2 in 0..dk {
                    let mut acc = ZERO;
                    for e in 0..de {
                        acc += r[(flat_of[k1 * de + e], flat_of[k2 * de + e])];
                    }
                    out[(k1, k2)] = acc;
                }
            }
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(reduced_space, out))
}

/// Full-space matrix of `op ⊗ 1`, where `op` acts on `labels` in the given order.
pub fn embed_operator(space: &TensorSpace, op: &CMatrix, labels: &[&str]) -> Result<CMatrix> {
    let Split { flat_of, group_dim, rest_dim } = split(space, labels)?;
    if op.nrows() != group_dim || op.ncols() != group_dim {
        return Err(Error::DimensionMismatch { expected: group_dim, found: op.nrows() });
    }
    let d = space.total_dim();
    let mut full = CMatrix::zeros(d, d);
    for r in 0..rest_dim {
        for g1 in 0..group_dim {
            for g2 in 0..group_dim {
                full[(flat_of[g1 * rest_dim + r], flat_of[g2 * rest_dim + r])] = op[(g1, g2)];
            }
        }
    }
    Ok(full)
}

/// (op ⊗ 1)|ψ⟩ without forming the full matrix.
pub fn apply_local(state: &StateVector, op: &CMatrix, labels: &[&str]) -> Result<StateVector> {
    let Split { flat_of, group_dim, rest_dim } = split(state.space(), labels)?;
    if op.nrows() != group_dim || op.ncols() != group_dim {
        return Err(Error::DimensionMismatch { expected: group_dim, found: op.nrows() });
    }
    let amps = state.amplitudes();
    let mut out = CVector::zeros(amps.len());
    let mut local = CVector::zeros(group_dim);
    for r in 0..rest_dim {
        for g in 0..group_dim {
            local[g] = amps[flat_of[g * rest_dim + r]];
        }
        let mapped = op * &local;
        for g in 0..group_dim {
            out[flat_of[g * rest_dim + r]] = mapped[g];
        }
    }
    Ok(state.with_amplitudes(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};

    fn qubit(label: &str) -> TensorSpace {
        TensorSpace::single(label, 2).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = StateVector::basis(qubit("a"), 0).unwrap();
        let b = StateVector::basis(qubit("b"), 0).unwrap();
        let ab = tensor(&a, &b).unwrap();
        assert_eq!(ab.amplitudes(), StateVector::basis(ab.space().clone(), 0).unwrap().amplitudes());
        let s = 0.5_f64.sqrt();
        let plus = StateVector::from_reals(qubit("a"), &[s, s]).unwrap();
        let v = tensor(&plus, &b).unwrap();
        assert_eq!(v.amplitudes().iter().map(|z| z.re).collect::<Vec<_>>(), vec![s, 0.0, s, 0.0]);
        assert!(matches!(tensor(&a, &a), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn born_probability_examples() {
        let space = TensorSpace::single("s", 3).unwrap();
        let basis = StateVector::computational_basis(&space);
        assert_eq!(born_probability(&basis[1], &basis[1]).unwrap(), 1.0);
        let s = 0.5_f64.sqrt();
        let sup = StateVector::from_reals(space.clone(), &[0.0, s, s]).unwrap();
        assert!((born_probability(&basis[1], &sup).unwrap() - 0.5).abs() < 1e-15);
        let minus = StateVector::from_reals(space.clone(), &[0.0, s, -s]).unwrap();
        assert!(born_probability(&sup, &minus).unwrap() < 1e-30);
        let other = StateVector::basis(TensorSpace::single("s", 2).unwrap(), 0).unwrap();
        assert!(matches!(born_probability(&other, &sup), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bell_state_reduces_to_identity_over_two() {
        let space = TensorSpace::new([("a", 2), ("b", 2)]).unwrap();
        let s = 0.5_f64.sqrt();
        let bell = StateVector::from_reals(space, &[s, 0.0, 0.0, s]).unwrap();
        let rho = partial_trace(&bell, &["a"]).unwrap();
        let expected = CMatrix::identity(2, 2).scale(0.5);
        assert!(max_abs(&(rho.matrix() - expected)) < 1e-15);
        rho.validate().unwrap();
    }

    #[test]
    fn product_state_reduces_to_pure_factor() {
        let a = StateVector::from_reals(qubit("a"), &[0.6, 0.8]).unwrap();
        let b = StateVector::from_complex(qubit("b"), vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let ab = tensor(&a, &b).unwrap();
        let rho_a = partial_trace(&ab, &["a"]).unwrap();
        assert!(max_abs(&(rho_a.matrix() - a.density().unwrap().matrix())) < 1e-15);
        assert!((rho_a.purity() - 1.0).abs() < 1e-15);
        // density input gives the same result
        let rho_a2 = partial_trace(&ab.density().unwrap(), &["a"]).unwrap();
        assert!(max_abs(&(rho_a.matrix() - rho_a2.matrix())) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_trivial_keeps() {
        let space = TensorSpace::new([("a", 2), ("b", 2)]).unwrap();
        let v = StateVector::basis(space, 0).unwrap();
        assert!(matches!(partial_trace(&v, &[]), Err(Error::InvalidBipartition(_))));
        assert!(matches!(partial_trace(&v, &["a", "b"]), Err(Error::InvalidBipartition(_))));
        assert!(matches!(partial_trace(&v, &["x"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn apply_local_matches_embedded_matrix() {
        let space = TensorSpace::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let amps: Vec<_> = (0..12).map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let psi = StateVector::from_complex(space.clone(), amps).unwrap();
        let op = CMatrix::from_fn(4, 4, |i, j| c((i * 4 + j) as f64, (i as f64) - (j as f64)));
        let full = embed_operator(&space, &op, &["c", "a"]).unwrap();
        let direct = apply_local(&psi, &op, &["c", "a"]).unwrap();
        assert!((full * psi.amplitudes() - direct.amplitudes()).norm() < 1e-12);
    }
}
