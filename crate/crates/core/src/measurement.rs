//! Unitary measurement models: von Neumann pre-measurement, multi-link
//! observational chains, and the three-step branch/recohere evolution.
//!
//! Every interaction here is a unitary on the joint space, so global purity
//! is preserved exactly; decoherence shows up only in reduced states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{apply_local, check_complete_basis, partial_trace, tensor, StateVector, TensorSpace};
use crate::linalg::{
    basis_vector, c, check_unitary, gram_deviation, isometry_completion, outer, psd_sqrt, CMatrix, CVector, VALIDITY_TOL,
};

/// Ready state |Φ₀⟩ and pointer states |Φ_n⟩ of a measuring device.
#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusModel {
    pointer_ready: StateVector,
    pointer_states: Vec<StateVector>,
    overlap_matrix: CMatrix,
}

impl ApparatusModel {
    pub fn new(pointer_ready: StateVector, pointer_states: Vec<StateVector>) -> Result<Self> {
        pointer_ready.check_normalized()?;
        if pointer_states.is_empty() {
            return Err(Error::PointerCountMismatch { pointers: 0, outcomes: 1 });
        }
        for p in &pointer_states {
            p.check_same_space(pointer_ready.space())?;
            p.check_normalized()?;
        }
        let n = pointer_states.len();
        let overlap_matrix =
            CMatrix::from_fn(n, n, |m, k| pointer_states[m].amplitudes().dotc(pointer_states[k].amplitudes()));
        Ok(Self { pointer_ready, pointer_states, overlap_matrix })
    }

    /// `n_outcomes` pointer states with pairwise real overlap `g`, living in a
    /// (n+1)-dimensional device whose ready state |0⟩ is orthogonal to all of them.
    ///
    /// The pointers are the columns of the square root of the Gram matrix
    /// (1−overlap)·1 + overlap·J, so ⟨Φ_m|Φ_n⟩ = overlap exactly for m ≠ n.
    pub fn with_overlap(label: &str, n_outcomes: usize, overlap: f64) -> Result<Self> {
        if n_outcomes < 1 {
            return Err(Error::InvalidArgument("apparatus needs at least one outcome".into()));
        }
        let lower = if n_outcomes > 1 { -1.0 / (n_outcomes as f64 - 1.0) } else { -1.0 };
        if !(lower..=1.0).contains(&overlap) {
            return Err(Error::InvalidArgument(format!(
                "overlap {overlap} outside [{lower}, 1] for {n_outcomes} pointer states"
            )));
        }
        let gram = CMatrix::from_fn(n_outcomes, n_outcomes, |i, j| if i == j { c(1.0, 0.0) } else { c(overlap, 0.0) });
        // exact identity for orthogonal pointers, so coherences vanish exactly
        let root = if overlap == 0.0 { CMatrix::identity(n_outcomes, n_outcomes) } else { psd_sqrt(&gram) };
        let space = TensorSpace::single(label, n_outcomes + 1)?;
        let ready = StateVector::basis(space.clone(), 0)?;
        let pointers = (0..n_outcomes)
            .map(|k| {
                let mut v = CVector::zeros(n_outcomes + 1);
                v.rows_mut(1, n_outcomes).copy_from(&root.column(k));
                StateVector::new(space.clone(), v)?.normalize()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ready, pointers)
    }

    /// Device whose pointer states are its own basis vectors and whose ready
    /// state is pointer 0 (a CNOT-type record for two outcomes).
    pub fn orthogonal_in_place(label: &str, n_outcomes: usize) -> Result<Self> {
        let space = TensorSpace::single(label, n_outcomes)?;
        let pointers = StateVector::computational_basis(&space);
        Self::new(pointers[0].clone(), pointers)
    }

    pub fn pointer_ready(&self) -> &StateVector {
        &self.pointer_ready
    }

    pub fn pointer_states(&self) -> &[StateVector] {
        &self.pointer_states
    }

    /// ⟨Φ_m|Φ_n⟩.
    pub fn overlap_matrix(&self) -> &CMatrix {
        &self.overlap_matrix
    }

    pub fn space(&self) -> &TensorSpace {
        self.pointer_ready.space()
    }

    pub fn n_outcomes(&self) -> usize {
        self.pointer_states.len()
    }

    fn labels(&self) -> Vec<&str> {
        self.space().labels().collect()
    }

    /// V_n with V_n|Φ₀⟩ = |Φ_n⟩, completed by Gram–Schmidt on the complement.
    fn shift(&self, n: usize) -> Result<CMatrix> {
        let d = self.space().total_dim();
        isometry_completion(
            std::slice::from_ref(self.pointer_ready.amplitudes()),
            std::slice::from_ref(self.pointer_states[n].amplitudes()),
            d,
        )
    }

    /// U = Σ_n |n'⟩⟨n| ⊗ V_n on system ⊗ apparatus, with n' = n for an ideal
    /// measurement or the given post-measurement system states otherwise.
    pub fn interaction(&self, basis: &[StateVector], post_states: Option<&[StateVector]>) -> Result<CMatrix> {
        check_complete_basis(basis)?;
        if self.n_outcomes() != basis.len() {
            return Err(Error::PointerCountMismatch { pointers: self.n_outcomes(), outcomes: basis.len() });
        }
        let targets = match post_states {
            Some(post) => {
                if post.len() != basis.len() {
                    return Err(Error::DimensionMismatch { expected: basis.len(), found: post.len() });
                }
                let vectors: Vec<CVector> = post.iter().map(|v| v.amplitudes().clone()).collect();
                let deviation = gram_deviation(&vectors);
                if deviation > VALIDITY_TOL {
                    return Err(Error::BasisNotOrthonormal { deviation });
                }
                post
            }
            None => basis,
        };
        let ds = basis[0].dim();
        let da = self.space().total_dim();
        let mut u = CMatrix::zeros(ds * da, ds * da);
        for (n, (from, to)) in basis.iter().zip(targets).enumerate() {
            u += outer(to.amplitudes(), from.amplitudes()).kronecker(&self.shift(n)?);
        }
        check_unitary(&u)?;
        Ok(u)
    }
}

/// Fidelity of the `labels` subsystems of `joint` with the pure state `target`.
fn subsystem_fidelity(joint: &StateVector, labels: &[&str], target: &StateVector) -> Result<f64> {
    if labels.len() == joint.space().len() {
        return joint.fidelity(target);
    }
    let rho = partial_trace(joint, labels)?;
    let t = target.amplitudes();
    Ok(t.dotc(&(rho.matrix() * t)).re)
}

/// (Σ c_n|n⟩)|Φ₀⟩ → Σ c_n|n⟩|Φ_n⟩ for an ideal measurement in `basis`.
pub fn premeasure(system: &StateVector, app: &ApparatusModel, basis: &[StateVector]) -> Result<StateVector> {
    premeasure_with(system, app, basis, None)
}

/// Pre-measurement with optional non-ideal system post-states |n'⟩.
pub fn premeasure_with(
    system: &StateVector,
    app: &ApparatusModel,
    basis: &[StateVector],
    post_states: Option<&[StateVector]>,
) -> Result<StateVector> {
    system.check_normalized()?;
    let space = check_complete_basis(basis)?;
    system.check_same_space(&space)?;
    let joint = tensor(system, app.pointer_ready())?;
    let sys_labels: Vec<&str> = space.labels().collect();
    couple(&joint, app, basis, &sys_labels, post_states)
}

/// Applies the measurement interaction to an existing joint state whose
/// apparatus factor must be in the ready state.
pub fn premeasure_joint(
    joint: &StateVector,
    app: &ApparatusModel,
    basis: &[StateVector],
    system_labels: &[&str],
) -> Result<StateVector> {
    couple(joint, app, basis, system_labels, None)
}

fn couple(
    joint: &StateVector,
    app: &ApparatusModel,
    basis: &[StateVector],
    system_labels: &[&str],
    post_states: Option<&[StateVector]>,
) -> Result<StateVector> {
    joint.check_normalized()?;
    let app_labels = app.labels();
    let fidelity = subsystem_fidelity(joint, &app_labels, app.pointer_ready())?;
    if fidelity < 1.0 - VALIDITY_TOL {
        return Err(Error::ApparatusNotReady { fidelity });
    }
    let u = app.interaction(basis, post_states)?;
    let mut labels = system_labels.to_vec();
    labels.extend(app_labels);
    apply_local(joint, &u, &labels)
}

/// System basis, K links and an optional final observer.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub system_basis: Vec<StateVector>,
    pub links: Vec<ApparatusModel>,
    pub observer: Option<ApparatusModel>,
    /// Link indices in the order they interact; the observer always comes last.
    pub activation_order: Vec<usize>,
}

impl ChainSpec {
    /// Links activated in index order.
    pub fn new(system_basis: Vec<StateVector>, links: Vec<ApparatusModel>, observer: Option<ApparatusModel>) -> Self {
        let activation_order = (0..links.len()).collect();
        Self { system_basis, links, observer, activation_order }
    }

    /// `n_links` identical-overlap links labeled `link1, link2, ...`.
    pub fn uniform(system_basis: Vec<StateVector>, n_links: usize, overlap: f64, observer: bool) -> Result<Self> {
        let n = system_basis.len();
        let links = (1..=n_links)
            .map(|i| ApparatusModel::with_overlap(&format!("link{i}"), n, overlap))
            .collect::<Result<Vec<_>>>()?;
        let observer = if observer { Some(ApparatusModel::with_overlap("observer", n, 0.0)?) } else { None };
        Ok(Self::new(system_basis, links, observer))
    }

    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.links.len()];
        for &k in &self.activation_order {
            let slot = seen
                .get_mut(k)
                .ok_or_else(|| Error::InvalidArgument(format!("activation order names missing link {k}")))?;
            if *slot {
                return Err(Error::LinkActivatedTwice(k));
            }
            *slot = true;
        }
        Ok(())
    }

    /// System ⊗ all devices in their ready states.
    pub fn initial_state(&self, system: &StateVector) -> Result<StateVector> {
        let mut joint = system.clone();
        for app in self.links.iter().chain(&self.observer) {
            joint = tensor(&joint, app.pointer_ready())?;
        }
        Ok(joint)
    }
}

/// Joint states after each link of the chain (in activation order) and,
/// when present, after the observer.
///
/// Every device couples to the system's measurement basis, so in the
/// eigenstate case the n-th branch carries |χ_n⟩ in every activated link
/// regardless of the pointer overlaps.
pub fn chain_propagate(spec: &ChainSpec, initial_system: &StateVector) -> Result<Vec<StateVector>> {
    spec.validate()?;
    let space = check_complete_basis(&spec.system_basis)?;
    initial_system.check_same_space(&space)?;
    initial_system.check_normalized()?;
    let sys_labels: Vec<&str> = space.labels().collect();
    let mut joint = spec.initial_state(initial_system)?;
    let mut states = Vec::with_capacity(spec.activation_order.len() + 1);
    let stages = spec.activation_order.iter().map(|&k| &spec.links[k]).chain(&spec.observer);
    for app in stages {
        joint = premeasure_joint(&joint, app, &spec.system_basis, &sys_labels)?;
        states.push(joint.clone());
    }
    Ok(states)
}

/// The three designated unitaries of the branch/recohere evolution, each
/// acting on the listed subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchModel {
    space: TensorSpace,
    steps: [(CMatrix, Vec<String>); 3],
    ready_apparatus: StateVector,
}

impl BranchModel {
    pub fn new(space: TensorSpace, steps: [(CMatrix, Vec<String>); 3], ready_apparatus: StateVector) -> Result<Self> {
        for (u, labels) in &steps {
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let local = space.restrict(&refs)?;
            if u.nrows() != local.total_dim() {
                return Err(Error::DimensionMismatch { expected: local.total_dim(), found: u.nrows() });
            }
            check_unitary(u)?;
        }
        ready_apparatus.check_normalized()?;
        Ok(Self { space, steps, ready_apparatus })
    }

    /// Ideal model for `n_outcomes` system states.
    ///
    /// Subsystems `system` (n), `apparatus` (n+1, ready |0⟩, pointer k at |k+1⟩)
    /// and `environment` (`env_dim` ≥ n, ready |0⟩, record k at |k⟩).
    /// 1. the apparatus reads the system: |k⟩|φ₀⟩ → |k⟩|φ_k⟩;
    /// 2. the environment reads the apparatus: |φ_k⟩|χ₀⟩ → |φ_k⟩|χ_k⟩;
    /// 3. the apparatus is reset against the environment record:
    ///    |φ_k⟩|χ_k⟩ → |φ₀⟩|χ_k⟩, leaving only a system–environment correlation.
    pub fn ideal(n_outcomes: usize, env_dim: usize) -> Result<Self> {
        if n_outcomes < 2 {
            return Err(Error::NothingToMeasure(format!("{n_outcomes} outcome(s)")));
        }
        if env_dim < n_outcomes {
            return Err(Error::EnvironmentTooSmall { needed: n_outcomes, got: env_dim });
        }
        let n = n_outcomes;
        let da = n + 1;
        let space = TensorSpace::new([("system", n), ("apparatus", da), ("environment", env_dim)])?;
        let sys_basis = StateVector::computational_basis(&TensorSpace::single("system", n)?);
        let app = ApparatusModel::new(
            StateVector::basis(TensorSpace::single("apparatus", da)?, 0)?,
            (1..=n).map(|k| StateVector::basis(TensorSpace::single("apparatus", da)?, k)).collect::<Result<_>>()?,
        )?;
        let step1 = app.interaction(&sys_basis, None)?;

        // step 2: controlled on the pointer basis {φ₀, φ_1..φ_n}
        let mut step2 = CMatrix::zeros(da * env_dim, da * env_dim);
        for a in 0..da {
            let shift = if a == 0 {
                CMatrix::identity(env_dim, env_dim)
            } else {
                isometry_completion(&[basis_vector(env_dim, 0)], &[basis_vector(env_dim, a - 1)], env_dim)?
            };
            step2 += outer(&basis_vector(da, a), &basis_vector(da, a)).kronecker(&shift);
        }

        let ins: Vec<CVector> =
            (0..n).map(|k| basis_vector(da, k + 1).kronecker(&basis_vector(env_dim, k))).collect();
        let outs: Vec<CVector> = (0..n).map(|k| basis_vector(da, 0).kronecker(&basis_vector(env_dim, k))).collect();
        let step3 = isometry_completion(&ins, &outs, da * env_dim)?;

        let l = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Self::new(
            space,
            [(step1, l(&["system", "apparatus"])), (step2, l(&["apparatus", "environment"])), (step3, l(&["apparatus", "environment"]))],
            app.pointer_ready().clone(),
        )
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    /// (Σ c_k|k⟩)|φ₀⟩|χ₀⟩ for the ideal model's subsystems.
    pub fn initial_state(&self, system: &StateVector) -> Result<StateVector> {
        let rest: Vec<&str> = self.space.complement(&system.space().labels().collect::<Vec<_>>());
        let mut joint = tensor(system, &self.ready_apparatus)?;
        for label in rest {
            if !joint.space().contains(label) {
                let ready = StateVector::basis(TensorSpace::single(label, self.space.dim_of(label)?)?, 0)?;
                joint = tensor(&joint, &ready)?;
            }
        }
        if joint.space() != &self.space {
            return Err(Error::SpaceMismatch { left: self.space.to_string(), right: joint.space().to_string() });
        }
        Ok(joint)
    }

    pub fn ready_apparatus(&self) -> &StateVector {
        &self.ready_apparatus
    }
}

/// The three joint states of the branch/recohere evolution.
pub fn branch_and_recohere(model: &BranchModel, initial: &StateVector) -> Result<[StateVector; 3]> {
    initial.check_same_space(&model.space)?;
    initial.check_normalized()?;
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(3);
    for (u, labels) in &model.steps {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        state = apply_local(&state, u, &refs)?;
        out.push(state.clone());
    }
    Ok(out.try_into().expect("three steps"))
}

/// One row of the per-step chain report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStepReport {
    pub step: usize,
    pub off_diagonal: f64,
    pub linear_entropy: f64,
    pub global_purity: f64,
}

/// Largest system coherence, system linear entropy and global purity after
/// each chain step.
pub fn chain_report(spec: &ChainSpec, states: &[StateVector]) -> Result<Vec<ChainStepReport>> {
    let space = check_complete_basis(&spec.system_basis)?;
    let labels: Vec<&str> = space.labels().collect();
    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rho = partial_trace(s, &labels)?;
            let f = crate::entanglement::decoherence_factor(&rho, &spec.system_basis)?;
            Ok(ChainStepReport {
                step: i + 1,
                off_diagonal: f.max_off_diagonal(),
                linear_entropy: crate::entanglement::linear_entropy(&rho),
                global_purity: s.amplitudes().norm_squared().powi(2),
            })
        })
        .collect()
}
