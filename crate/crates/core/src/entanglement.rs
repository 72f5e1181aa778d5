//! Schmidt decomposition, entanglement entropies and pointer-basis coherences.

use std::f64::consts::LN_2;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{check_complete_basis, DensityOperator, StateVector, TensorSpace};
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::output::fmt_f64;

/// Coefficients below this are treated as rank-deficient noise.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Relative gap under which neighbouring Schmidt coefficients count as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}

/// Checks nonnegative entries summing to one (1e-10).
pub fn check_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbability("empty vector".into()));
    }
    if let Some((i, &x)) = p.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidProbability(format!("entry {i} = {x}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidProbability(format!("entries sum to {total}")));
    }
    Ok(())
}

/// −Σ p ln p with 0 ln 0 = 0.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    // an eigenvalue a rounding error above 1 would otherwise give -2e-16
    if s > 0.0 { s } else { 0.0 }
}

/// Single-sum form Σ_k √p_k |φ_k^sys⟩|φ_k^env⟩ of a bipartite pure state.
#[derive(Debug, Clone, Serialize)]
pub struct SchmidtDecomposition {
    /// √p_k in descending order.
    pub coefficients: Vec<f64>,
    pub system_vectors: Vec<StateVector>,
    pub environment_vectors: Vec<StateVector>,
    pub system_labels: Vec<String>,
    pub environment_labels: Vec<String>,
    /// Set when two coefficients coincide; the vectors inside such a block
    /// are one arbitrary choice of basis for the spanned subspaces.
    pub degenerate: bool,
    #[serde(skip)]
    source_space: TensorSpace,
}

impl SchmidtDecomposition {
    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|s| s * s).collect()
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Σ p_k(1 − p_k), the linear entropy of either reduced state.
    pub fn linear_entropy(&self) -> f64 {
        self.probabilities().iter().map(|p| p * (1.0 - p)).sum()
    }

    pub fn entanglement_entropy(&self) -> f64 {
        shannon_entropy(&self.probabilities())
    }

    /// Rebuilds the global state in the original subsystem order.
    pub fn reconstruct(&self) -> Result<StateVector> {
        let space = &self.source_space;
        let positions: Vec<usize> =
            self.system_labels.iter().map(|l| space.position(l)).collect::<Result<_>>()?;
        let (g_idx, r_idx, _, _) = space.split_indices(&positions);
        let mut amps = CVector::zeros(space.total_dim());
        for ((s, u), v) in self.coefficients.iter().zip(&self.system_vectors).zip(&self.environment_vectors) {
            let (u, v) = (u.amplitudes(), v.amplitudes());
            for flat in 0..amps.len() {
                amps[flat] += u[g_idx[flat]] * v[r_idx[flat]] * *s;
            }
        }
        StateVector::new(space.clone(), amps)
    }
}

fn bipartition(space: &TensorSpace, system_labels: &[&str]) -> Result<(TensorSpace, TensorSpace)> {
    if system_labels.is_empty() {
        return Err(Error::InvalidBipartition("empty system".into()));
    }
    let sys = space.restrict(system_labels)?;
    if sys.len() == space.len() {
        return Err(Error::InvalidBipartition("empty environment".into()));
    }
    let sys_labels: Vec<&str> = sys.labels().collect();
    let env = space.restrict(&space.complement(&sys_labels))?;
    Ok((sys, env))
}

/// Schmidt decomposition from the singular values of the amplitude matrix
/// reshaped by the (system, environment) split.
pub fn schmidt_decompose(psi: &StateVector, system_labels: &[&str]) -> Result<SchmidtDecomposition> {
    psi.check_normalized()?;
    let space = psi.space();
    let (sys, env) = bipartition(space, system_labels)?;
    let sys_labels: Vec<&str> = sys.labels().collect();
    let positions: Vec<usize> = sys_labels.iter().map(|l| space.position(l)).collect::<Result<_>>()?;
    let (g_idx, r_idx, ds, de) = space.split_indices(&positions);
    let mut m = CMatrix::from_element(ds, de, ZERO);
    for (flat, z) in psi.amplitudes().iter().enumerate() {
        m[(g_idx[flat], r_idx[flat])] = *z;
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut coefficients = Vec::new();
    let mut system_vectors = Vec::new();
    let mut environment_vectors = Vec::new();
    for k in order {
        let s = svd.singular_values[k];
        if s < SCHMIDT_CUTOFF {
            continue;
        }
        coefficients.push(s);
        system_vectors.push(StateVector::new(sys.clone(), u.column(k).into_owned())?);
        environment_vectors.push(StateVector::new(env.clone(), v_t.row(k).transpose())?);
    }
    let degenerate = coefficients.windows(2).any(|w| (w[0] - w[1]).abs() <= DEGENERACY_TOL * w[0]);
    Ok(SchmidtDecomposition {
        coefficients,
        system_vectors,
        environment_vectors,
        system_labels: sys_labels.iter().map(|s| s.to_string()).collect(),
        environment_labels: env.labels().map(str::to_string).collect(),
        degenerate,
        source_space: space.clone(),
    })
}

/// S_lin = tr(ρ − ρ²) = 1 − tr ρ².
pub fn linear_entropy(rho: &DensityOperator) -> f64 {
    (1.0 - rho.purity()).max(0.0)
}

/// Eigenvalues below this are diagonalization noise; each one would add
/// up to ~3e-13 nats to a pure state's entropy.
const SPECTRAL_FLOOR: f64 = 1e-14;

/// −tr ρ ln ρ in nats.
pub fn ensemble_entropy(rho: &DensityOperator) -> f64 {
    let spectrum: Vec<f64> =
        rho.eigenvalues().into_iter().map(|x| if x < SPECTRAL_FLOOR { 0.0 } else { x }).collect();
    shannon_entropy(&spectrum)
}

/// Populations and coherence magnitudes of a reduced state in a pointer basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceFactors {
    /// ⟨n|ρ|n⟩.
    pub populations: Vec<f64>,
    /// |⟨m|ρ|n⟩| for m ≠ n; zero on the diagonal.
    pub off_diagonal: Vec<Vec<f64>>,
}

impl DecoherenceFactors {
    pub fn max_off_diagonal(&self) -> f64 {
        self.off_diagonal.iter().flatten().fold(0.0, |a, &b| a.max(b))
    }
}

pub fn decoherence_factor(rho_sys: &DensityOperator, basis: &[StateVector]) -> Result<DecoherenceFactors> {
    let space = check_complete_basis(basis)?;
    if rho_sys.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch { expected: space.total_dim(), found: rho_sys.dim() });
    }
    if rho_sys.space() != &space {
        return Err(Error::SpaceMismatch { left: space.to_string(), right: rho_sys.space().to_string() });
    }
    let r = rho_sys.matrix();
    let images: Vec<CVector> = basis.iter().map(|n| r * n.amplitudes()).collect();
    let d = basis.len();
    let mut populations = vec![0.0; d];
    let mut off_diagonal = vec![vec![0.0; d]; d];
    for (m, bm) in basis.iter().enumerate() {
        for (n, img) in images.iter().enumerate() {
            let element = bm.amplitudes().dotc(img);
            if m == n {
                populations[m] = element.re;
            } else {
                off_diagonal[m][n] = element.norm();
            }
        }
    }
    Ok(DecoherenceFactors { populations, off_diagonal })
}

/// One sample of an entropy-vs-time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySample {
    pub time: f64,
    pub linear: f64,
    pub ensemble: f64,
}

impl EntropySample {
    pub fn of(time: f64, rho: &DensityOperator) -> Self {
        Self { time, linear: linear_entropy(rho), ensemble: ensemble_entropy(rho) }
    }
}

/// CSV with header `time,S_lin,S_ensemble_nats,S_ensemble_bits`.
pub fn write_entropy_csv<W: Write>(out: W, series: &[EntropySample]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "S_lin", "S_ensemble_nats", "S_ensemble_bits"])?;
    for s in series {
        w.write_record([fmt_f64(s.time), fmt_f64(s.linear), fmt_f64(s.ensemble), fmt_f64(nats_to_bits(s.ensemble))])?;
    }
    w.flush()
}
