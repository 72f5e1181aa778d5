//! Unitary Schrödinger and von Neumann propagation, stochastic collapse in a
//! measurement basis, and Lüders projection.
//!
//! Units: ℏ = 1, so `t` is measured in inverse energy units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_complete_basis, embed_operator, DensityOperator, Projector, State, StateRef, StateVector, TensorSpace};
use crate::linalg::{c, check_hermitian, eigh, CMatrix, I, ONE};

/// Outcomes whose Born weight falls below this are never sampled.
pub const OUTCOME_CUTOFF: f64 = 1e-14;

/// Hermitian generator of time evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    space: TensorSpace,
    matrix: CMatrix,
    note: Option<String>,
}

impl Hamiltonian {
    pub fn new(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        check_hermitian(&matrix)?;
        Ok(Self { space, matrix, note: None })
    }

    /// H = 0: trivial dynamics.
    pub fn zero(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self { space, matrix: CMatrix::zeros(d, d), note: None }
    }

    /// Σ_k h_k ⊗ 1, each term acting on the listed subsystems.
    pub fn from_local_terms(space: TensorSpace, terms: &[(CMatrix, Vec<&str>)]) -> Result<Self> {
        let d = space.total_dim();
        let mut matrix = CMatrix::zeros(d, d);
        for (h, labels) in terms {
            check_hermitian(h)?;
            matrix += embed_operator(&space, h, labels)?;
        }
        Ok(Self { space, matrix, note: Some("sum of local terms".into()) })
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    /// exp(−iHt) from the spectral decomposition of H.
    pub fn propagator(&self, t: f64) -> Result<CMatrix> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite time {t}")));
        }
        let (energies, vectors) = eigh(&self.matrix);
        let mut phased = vectors.clone();
        for (k, e) in energies.iter().enumerate() {
            let phase = c(0.0, -e * t).exp();
            for z in phased.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        Ok(phased * vectors.adjoint())
    }

    /// One Cayley (Crank–Nicolson) step (1 + iH dt/2)⁻¹(1 − iH dt/2).
    ///
    /// Exactly unitary; local error O(dt³).
    pub fn cayley_step(&self, dt: f64) -> Result<CMatrix> {
        let d = self.matrix.nrows();
        let half = self.matrix.map(|z| z * I * (dt / 2.0));
        let id = CMatrix::identity(d, d);
        let lhs = &id + &half;
        let rhs = &id - &half;
        lhs.lu().solve(&rhs).ok_or_else(|| Error::InvalidArgument("singular Cayley system".into()))
    }

    fn check_space(&self, space: &TensorSpace) -> Result<()> {
        if self.space.total_dim() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: space.total_dim() });
        }
        if &self.space != space {
            return Err(Error::SpaceMismatch { left: self.space.to_string(), right: space.to_string() });
        }
        Ok(())
    }
}

/// How to integrate the Schrödinger equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagation {
    /// Exact matrix exponential via eigendecomposition.
    #[default]
    Exact,
    /// Fixed-step Cayley integrator with the given number of steps.
    CrankNicolson { steps: usize },
}

/// exp(−iHt)|ψ⟩.
pub fn schrodinger_evolve(h: &Hamiltonian, psi: &StateVector, t: f64) -> Result<StateVector> {
    schrodinger_evolve_with(h, psi, t, Propagation::Exact)
}

pub fn schrodinger_evolve_with(h: &Hamiltonian, psi: &StateVector, t: f64, method: Propagation) -> Result<StateVector> {
    h.check_space(psi.space())?;
    if t == 0.0 {
        return Ok(psi.clone());
    }
    let amps = match method {
        Propagation::Exact => h.propagator(t)? * psi.amplitudes(),
        Propagation::CrankNicolson { steps } => {
            if steps == 0 {
                return Err(Error::InvalidArgument("zero integrator steps".into()));
            }
            let step = h.cayley_step(t / steps as f64)?;
            let mut amps = psi.amplitudes().clone();
            for _ in 0..steps {
                amps = &step * amps;
            }
            amps
        }
    };
    Ok(psi.with_amplitudes(amps))
}

/// U ρ U† with U = exp(−iHt), the solution of i dρ/dt = [H, ρ].
pub fn von_neumann_evolve(h: &Hamiltonian, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
    h.check_space(rho.space())?;
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let u = h.propagator(t)?;
    Ok(conjugate(rho, &u))
}

pub(crate) fn conjugate(rho: &DensityOperator, u: &CMatrix) -> DensityOperator {
    let m = u * rho.matrix() * u.adjoint();
    // re-symmetrize so rounding never breaks Hermiticity
    let m = (&m + m.adjoint()).scale(0.5);
    DensityOperator::from_matrix_unchecked(rho.space().clone(), m)
}

/// Result of one stochastic reduction Σ c_n|n⟩ → |n₀⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseRecord {
    pub outcome_index: usize,
    pub outcome_probability: f64,
    pub pre_state: StateVector,
    pub post_state: StateVector,
    pub rng_seed: u64,
}

/// Born weights |⟨n|ψ⟩|²/‖ψ‖² in a complete basis.
pub fn outcome_probabilities(psi: &StateVector, basis: &[StateVector]) -> Result<Vec<f64>> {
    let space = check_complete_basis(basis)?;
    psi.check_same_space(&space)?;
    let norm2 = psi.amplitudes().norm_squared();
    if norm2 == 0.0 || !norm2.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(basis.iter().map(|n| n.amplitudes().dotc(psi.amplitudes()).norm_sqr() / norm2).collect())
}

/// Samples an outcome with probability |c_n|² and returns the basis vector.
///
/// The same seed always produces the same record.
pub fn collapse(psi: &StateVector, basis: &[StateVector], seed: u64) -> Result<CollapseRecord> {
    let probabilities = outcome_probabilities(psi, basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = sample_outcome(&probabilities, &mut rng);
    Ok(CollapseRecord {
        outcome_index: outcome,
        outcome_probability: probabilities[outcome],
        pre_state: psi.normalize()?,
        post_state: basis[outcome].clone(),
        rng_seed: seed,
    })
}

/// Inverse-CDF sampling over the outcomes above [`OUTCOME_CUTOFF`].
pub(crate) fn sample_outcome<R: Rng>(probabilities: &[f64], rng: &mut R) -> usize {
    let eligible: Vec<usize> = (0..probabilities.len()).filter(|&k| probabilities[k] >= OUTCOME_CUTOFF).collect();
    let total: f64 = eligible.iter().map(|&k| probabilities[k]).sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for &k in &eligible {
        acc += probabilities[k];
        if u < acc {
            return k;
        }
    }
    *eligible.last().expect("a normalized state has an outcome above the cutoff")
}

/// P|ψ⟩/‖P|ψ⟩‖ with probability ‖P|ψ⟩‖².
pub fn luders_project_pure(psi: &StateVector, p: &Projector) -> Result<(StateVector, f64)> {
    psi.check_same_space(p.space())?;
    psi.check_normalized()?;
    let projected = p.matrix() * psi.amplitudes();
    let prob = projected.norm_squared();
    if prob < OUTCOME_CUTOFF {
        return Err(Error::ZeroProbabilityProjection);
    }
    Ok((psi.with_amplitudes(projected.unscale(prob.sqrt())), prob))
}

/// PρP/tr(PρP) with probability tr(PρP).
pub fn luders_project_density(rho: &DensityOperator, p: &Projector) -> Result<(DensityOperator, f64)> {
    if rho.space() != p.space() {
        return Err(Error::SpaceMismatch { left: rho.space().to_string(), right: p.space().to_string() });
    }
    let m = p.matrix() * rho.matrix() * p.matrix();
    let prob = crate::linalg::trace(&m).re;
    if prob < OUTCOME_CUTOFF {
        return Err(Error::ZeroProbabilityProjection);
    }
    Ok((DensityOperator::from_matrix_unchecked(rho.space().clone(), m.unscale(prob)), prob))
}

/// Lüders projection of either kind of state.
pub fn luders_project<'a>(state: impl Into<StateRef<'a>>, p: &Projector) -> Result<(State, f64)> {
    match state.into() {
        StateRef::Pure(psi) => luders_project_pure(psi, p).map(|(s, q)| (State::Pure(s), q)),
        StateRef::Mixed(rho) => luders_project_density(rho, p).map(|(s, q)| (State::Mixed(s), q)),
    }
}

/// Pauli matrices, handy for qubit Hamiltonians.
pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), ONE, ONE, c(0.0, 0.0)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}
