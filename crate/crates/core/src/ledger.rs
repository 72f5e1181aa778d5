//! Entropy bookkeeping for measurement: the classical copy/observe/reset
//! cycle, quantum collapse split into decoherence plus selection, and
//! purely unitary branching.
//!
//! "Physical" entropy is the sum of marginal entropies over a declared
//! partition. The Bennett column leaves out any block containing the
//! measured system, since that ensemble is not counted as physical there.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entanglement::{check_simplex, ensemble_entropy, nats_to_bits, shannon_entropy};
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, ProjectorSet, StateVector, TensorSpace};
use crate::histories::decohere_projectors;
use crate::measurement::{branch_and_recohere, premeasure, ApparatusModel, BranchModel};
use crate::output::fmt_f64;

const TABLE_TOL: f64 = 1e-12;
const SYSTEM: &str = "system";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub step: String,
    pub s_ensemble: f64,
    pub s_physical: f64,
    pub s_physical_bennett: f64,
    pub information: f64,
    /// Entropy of each block of the partition used for this row.
    pub marginals: Vec<(String, f64)>,
}

impl LedgerRow {
    fn new(step: &str, s_ensemble: f64, marginals: Vec<(String, f64)>, information: f64) -> Self {
        let s_physical = marginals.iter().map(|(_, s)| s).sum();
        let s_physical_bennett =
            marginals.iter().filter(|(name, _)| !name.split('+').any(|l| l == SYSTEM)).map(|(_, s)| s).sum();
        Self { step: step.to_string(), s_ensemble, s_physical, s_physical_bennett, information, marginals }
    }

    pub fn s_ensemble_bits(&self) -> f64 {
        nats_to_bits(self.s_ensemble)
    }

    pub fn marginal(&self, block: &str) -> Option<f64> {
        self.marginals.iter().find(|(name, _)| name == block).map(|(_, s)| *s)
    }
}

/// Probability table over (system value, memory state, environment state).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalJoint {
    dims: [usize; 3],
    table: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(dims: [usize; 3], table: Vec<f64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total == 0 || table.len() != total {
            return Err(Error::DimensionMismatch { expected: total, found: table.len() });
        }
        if table.iter().any(|p| !p.is_finite() || *p < 0.0) || (table.iter().sum::<f64>() - 1.0).abs() > TABLE_TOL {
            return Err(Error::InvalidProbability(format!("table sums to {}", table.iter().sum::<f64>())));
        }
        Ok(Self { dims, table })
    }

    /// System distributed as `p`, memory and environment in state 0.
    pub fn prepared(p_system: &[f64], memory_dim: usize, env_dim: usize) -> Result<Self> {
        check_simplex(p_system)?;
        let dims = [p_system.len(), memory_dim, env_dim];
        let mut table = vec![0.0; dims.iter().product()];
        for (s, &p) in p_system.iter().enumerate() {
            table[s * memory_dim * env_dim] = p;
        }
        Self::new(dims, table)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn get(&self, s: usize, m: usize, e: usize) -> f64 {
        self.table[(s * self.dims[1] + m) * self.dims[2] + e]
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.table)
    }

    /// Marginal over one axis: 0 system, 1 memory, 2 environment.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims[axis]];
        for s in 0..self.dims[0] {
            for m in 0..self.dims[1] {
                for e in 0..self.dims[2] {
                    out[[s, m, e][axis]] += self.get(s, m, e);
                }
            }
        }
        out
    }

    fn marginal_rows(&self) -> Vec<(String, f64)> {
        ["system", "memory", "environment"]
            .iter()
            .enumerate()
            .map(|(axis, name)| (name.to_string(), shannon_entropy(&self.marginal(axis))))
            .collect()
    }

    /// Deterministic dynamics; `map` must be a bijection of the label triples.
    pub fn permute(&self, map: impl Fn(usize, usize, usize) -> (usize, usize, usize)) -> Result<Self> {
        let [ds, dm, de] = self.dims;
        let mut table = vec![0.0; self.table.len()];
        let mut hit = vec![false; self.table.len()];
        for s in 0..ds {
            for m in 0..dm {
                for e in 0..de {
                    let (s2, m2, e2) = map(s, m, e);
                    if s2 >= ds || m2 >= dm || e2 >= de {
                        return Err(Error::InvalidArgument("map leaves the label sets".into()));
                    }
                    let idx = (s2 * dm + m2) * de + e2;
                    if hit[idx] {
                        return Err(Error::InvalidArgument("map is not injective".into()));
                    }
                    hit[idx] = true;
                    table[idx] = self.get(s, m, e);
                }
            }
        }
        Ok(Self { dims: self.dims, table })
    }

    /// The sub-ensemble with memory value `m`, renormalized, with its weight.
    pub fn condition_on_memory(&self, m: usize) -> Option<(f64, Self)> {
        let weight = self.marginal(1)[m];
        if weight <= 0.0 {
            return None;
        }
        let mut table = vec![0.0; self.table.len()];
        for s in 0..self.dims[0] {
            for e in 0..self.dims[2] {
                let idx = (s * self.dims[1] + m) * self.dims[2] + e;
                table[idx] = self.table[idx] / weight;
            }
        }
        Some((weight, Self { dims: self.dims, table }))
    }
}

type BlockEntropies = Vec<(String, f64)>;

/// (weight, block entropies, ensemble entropy) per branch.
fn weighted(branches: &[(f64, BlockEntropies, f64)]) -> (f64, BlockEntropies) {
    let s_ens = branches.iter().map(|(w, _, s)| w * s).sum();
    let mut marginals: Vec<(String, f64)> = branches[0].1.iter().map(|(n, _)| (n.clone(), 0.0)).collect();
    for (w, rows, _) in branches {
        for (acc, (_, s)) in marginals.iter_mut().zip(rows) {
            acc.1 += w * s;
        }
    }
    (s_ens, marginals)
}

/// Rows: initial, measured (memory copies system), observed (after the
/// "or", branch averages), reset (memory swapped into the environment).
pub fn classical_ledger(p_system: &[f64]) -> Result<Vec<LedgerRow>> {
    check_simplex(p_system)?;
    if p_system.iter().filter(|&&p| p > 0.0).count() < 2 {
        return Err(Error::NothingToMeasure("distribution has a single possible outcome".into()));
    }
    let n = p_system.len();
    let initial = ClassicalJoint::prepared(p_system, n, n)?;
    let measured = initial.permute(|s, m, e| (s, (m + s) % n, e))?;
    let information = shannon_entropy(p_system);

    let branches: Vec<_> = (0..n)
        .filter_map(|m| measured.condition_on_memory(m))
        .map(|(w, b)| (w, b.marginal_rows(), b.entropy()))
        .collect();
    let (observed_s, observed_marginals) = weighted(&branches);

    // erasing the record needs somewhere to put it: swap memory and environment
    let reset = measured.permute(|s, m, e| (s, e, m))?;

    Ok(vec![
        LedgerRow::new("initial", initial.entropy(), initial.marginal_rows(), 0.0),
        LedgerRow::new("measured", measured.entropy(), measured.marginal_rows(), 0.0),
        LedgerRow::new("observed", observed_s, observed_marginals, information),
        LedgerRow::new("reset", reset.entropy(), reset.marginal_rows(), 0.0),
    ])
}

fn checked_amplitudes(amplitudes: &[Complex64]) -> Result<StateVector> {
    if amplitudes.len() < 2 {
        return Err(Error::NothingToMeasure(format!("{} amplitude(s)", amplitudes.len())));
    }
    let space = TensorSpace::single(SYSTEM, amplitudes.len())?;
    let psi = StateVector::from_complex(space, amplitudes.to_vec())?;
    if psi.norm() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    psi.check_normalized()?;
    Ok(psi)
}

fn block_entropies(psi: &StateVector, blocks: &[&[&str]]) -> Result<Vec<(String, f64)>> {
    blocks
        .iter()
        .map(|block| {
            let s = if block.len() == psi.space().len() { 0.0 } else { ensemble_entropy(&partial_trace(psi, block)?) };
            Ok((block.join("+"), s))
        })
        .collect()
}

/// Rows: initial pure, premeasured (entangled), mixture (decohered in the
/// pointer basis), observed (one branch selected).
pub fn quantum_collapse_ledger(amplitudes: &[Complex64]) -> Result<Vec<LedgerRow>> {
    let psi = checked_amplitudes(amplitudes)?;
    let n = amplitudes.len();
    let app = ApparatusModel::orthogonal_in_place("apparatus", n)?;
    let basis = StateVector::computational_basis(psi.space());
    let joint0 = crate::hilbert::tensor(&psi, app.pointer_ready())?;
    let joint = premeasure(&psi, &app, &basis)?;
    let blocks: [&[&str]; 2] = [&[SYSTEM], &["apparatus"]];

    let pointer_set = ProjectorSet::local_computational(joint.space(), "apparatus")?;
    let mixture = decohere_projectors(&joint.density()?, &pointer_set)?;
    let probs: Vec<f64> = amplitudes.iter().map(|z| z.norm_sqr()).collect();
    let information = shannon_entropy(&probs);
    let branch_marginals = vec![(SYSTEM.to_string(), 0.0), ("apparatus".to_string(), 0.0)];

    Ok(vec![
        LedgerRow::new("initial", 0.0, block_entropies(&joint0, &blocks)?, 0.0),
        LedgerRow::new("premeasured", 0.0, block_entropies(&joint, &blocks)?, 0.0),
        LedgerRow::new("mixture", ensemble_entropy(&mixture), block_entropies(&joint, &blocks)?, 0.0),
        LedgerRow::new("observed", 0.0, branch_marginals, information),
    ])
}

/// Rows for the unitary branch model: initial, after each of its three
/// steps. The partition coarsens as correlations are declared irrelevant:
/// system and apparatus are one block until the apparatus is reset.
pub fn branching_ledger(amplitudes: &[Complex64], env_dim: usize) -> Result<Vec<LedgerRow>> {
    let psi = checked_amplitudes(amplitudes)?;
    let model = BranchModel::ideal(amplitudes.len(), env_dim)?;
    let initial = model.initial_state(&psi)?;
    let [s1, s2, s3] = branch_and_recohere(&model, &initial)?;
    let joint: [&[&str]; 2] = [&[SYSTEM, "apparatus"], &["environment"]];
    let split: [&[&str]; 3] = [&[SYSTEM], &["apparatus"], &["environment"]];
    let pure = |s: &StateVector| ensemble_entropy(&s.density().expect("normalized"));
    Ok(vec![
        LedgerRow::new("initial", pure(&initial), block_entropies(&initial, &split)?, 0.0),
        LedgerRow::new("apparatus_reads", pure(&s1), block_entropies(&s1, &joint)?, 0.0),
        LedgerRow::new("environment_reads", pure(&s2), block_entropies(&s2, &joint)?, 0.0),
        LedgerRow::new("apparatus_reset", pure(&s3), block_entropies(&s3, &split)?, 0.0),
    ])
}

/// CSV with header
/// `step,S_ensemble_nats,S_physical_nats,I_nats,S_bits,S_physical_bennett_nats`.
pub fn write_ledger_csv<W: Write>(out: W, rows: &[LedgerRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "S_ensemble_nats", "S_physical_nats", "I_nats", "S_bits", "S_physical_bennett_nats"])?;
    for r in rows {
        w.write_record([
            r.step.clone(),
            fmt_f64(r.s_ensemble),
            fmt_f64(r.s_physical),
            fmt_f64(r.information),
            fmt_f64(r.s_ensemble_bits()),
            fmt_f64(r.s_physical_bennett),
        ])?;
    }
    w.flush()
}
