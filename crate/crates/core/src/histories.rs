//! Coarse-grained stochastic layer: projector decoherence, the Pauli-type
//! master equation ṗ_n = Σ_m A_nm (p_m − p_n), probabilities of projector
//! histories, and the squared norm of Born-deviant branches.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::Hamiltonian;
use crate::entanglement::check_simplex;
use crate::error::{Error, Result};
use crate::hilbert::{DensityOperator, ProjectorSet};
use crate::linalg::{trace, CMatrix};
use crate::output::fmt_f64;

pub use crate::hilbert::Projector;

/// ρ → Σ_n P_n ρ P_n.
pub fn decohere_projectors(rho: &DensityOperator, set: &ProjectorSet) -> Result<DensityOperator> {
    if rho.space() != set.space() {
        return Err(Error::SpaceMismatch { left: rho.space().to_string(), right: set.space().to_string() });
    }
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for p in set.projectors() {
        out += p.matrix() * rho.matrix() * p.matrix();
    }
    let out = (&out + out.adjoint()).scale(0.5);
    Ok(DensityOperator::from_matrix_unchecked(rho.space().clone(), out))
}

/// Nonnegative transition rates A_nm (1/time), m → n, with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    rates: DMatrix<f64>,
}

impl RateMatrix {
    /// Rejects negative entries, a nonzero diagonal, and rate matrices whose
    /// row and column sums differ (those would not conserve Σ p).
    pub fn new(rates: DMatrix<f64>) -> Result<Self> {
        if !rates.is_square() || rates.nrows() == 0 {
            return Err(Error::InvalidArgument("rate matrix must be square and nonempty".into()));
        }
        let n = rates.nrows();
        for row in 0..n {
            for col in 0..n {
                let value = rates[(row, col)];
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::NegativeRate { row, col, value });
                }
                if row == col && value != 0.0 {
                    return Err(Error::InvalidArgument(format!("diagonal rate A[{row}][{row}] = {value} must be 0")));
                }
            }
        }
        let scale = rates.max().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (row, col) = (rates.row(k).sum(), rates.column(k).sum());
            if (row - col).abs() > 1e-12 * scale * n as f64 {
                return Err(Error::UnbalancedRates(format!("state {k}: row sum {row} vs column sum {col}")));
            }
        }
        Ok(Self { rates })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("rate matrix rows must all have length n".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Every pair connected with rate γ.
    pub fn uniform(n: usize, gamma: f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { gamma }))
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.nrows() == 0
    }

    /// G with ṗ = G p: G_nm = A_nm off the diagonal, G_nn = −Σ_m A_nm.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut g = self.rates.clone();
        for n in 0..g.nrows() {
            g[(n, n)] = -self.rates.row(n).sum();
        }
        g
    }
}

/// p(t) = exp(G t) p(0); only forward times are accepted.
pub fn pauli_master_evolve(p0: &[f64], rates: &RateMatrix, t: f64) -> Result<Vec<f64>> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if p0.len() != rates.len() {
        return Err(Error::DimensionMismatch { expected: rates.len(), found: p0.len() });
    }
    check_simplex(p0)?;
    if t == 0.0 {
        return Ok(p0.to_vec());
    }
    let propagator = (rates.generator() * t).exp();
    Ok((propagator * DVector::from_column_slice(p0)).iter().copied().collect())
}

/// Time-ordered projector families with the dynamics between them.
#[derive(Debug, Clone)]
pub struct HistorySpec {
    pub t0: f64,
    pub initial: DensityOperator,
    pub hamiltonian: Hamiltonian,
    pub times: Vec<f64>,
    pub sets: Vec<ProjectorSet>,
}

impl HistorySpec {
    pub fn new(
        t0: f64,
        initial: DensityOperator,
        hamiltonian: Hamiltonian,
        times: Vec<f64>,
        sets: Vec<ProjectorSet>,
    ) -> Result<Self> {
        if times.len() != sets.len() || times.is_empty() {
            return Err(Error::InvalidArgument(format!("{} times for {} projector sets", times.len(), sets.len())));
        }
        if times.iter().any(|t| !t.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidArgument("non-finite time".into()));
        }
        if times[0] < t0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("times must increase strictly and start at or after t0".into()));
        }
        for s in &sets {
            if s.space() != initial.space() {
                return Err(Error::SpaceMismatch { left: initial.space().to_string(), right: s.space().to_string() });
            }
        }
        if hamiltonian.space() != initial.space() {
            return Err(Error::SpaceMismatch {
                left: initial.space().to_string(),
                right: hamiltonian.space().to_string(),
            });
        }
        initial.validate()?;
        Ok(Self { t0, initial, hamiltonian, times, sets })
    }

    pub fn slices(&self) -> usize {
        self.times.len()
    }

    /// Outcome counts per slice.
    pub fn shape(&self) -> Vec<usize> {
        self.sets.iter().map(ProjectorSet::len).collect()
    }

    /// P_n(t) = U†(t−t0) P_n U(t−t0) for every slice.
    fn heisenberg(&self) -> Result<Vec<Vec<CMatrix>>> {
        self.times
            .iter()
            .zip(&self.sets)
            .map(|(t, set)| {
                let u = self.hamiltonian.propagator(t - self.t0)?;
                Ok(set.conjugated(&u.adjoint()).projectors().iter().map(|p| p.matrix().clone()).collect())
            })
            .collect()
    }

    /// All outcome tuples in lexicographic order.
    pub fn histories(&self) -> Vec<Vec<usize>> {
        let shape = self.shape();
        let total: usize = shape.iter().product();
        (0..total)
            .map(|mut idx| {
                let mut h = vec![0; shape.len()];
                for (slot, n) in h.iter_mut().zip(&shape).rev() {
                    *slot = idx % n;
                    idx /= n;
                }
                h
            })
            .collect()
    }
}

/// Heisenberg projectors precomputed once for repeated queries.
pub struct HistoryEvaluator<'a> {
    spec: &'a HistorySpec,
    projectors: Vec<Vec<CMatrix>>,
}

impl<'a> HistoryEvaluator<'a> {
    pub fn new(spec: &'a HistorySpec) -> Result<Self> {
        Ok(Self { projectors: spec.heisenberg()?, spec })
    }

    fn check(&self, history: &[usize]) -> Result<()> {
        if history.len() != self.spec.slices() {
            return Err(Error::HistoryLength { expected: self.spec.slices(), found: history.len() });
        }
        for (k, (&n, set)) in history.iter().zip(&self.projectors).enumerate() {
            if n >= set.len() {
                return Err(Error::InvalidArgument(format!("outcome {n} out of range at slice {k}")));
            }
        }
        Ok(())
    }

    /// C = P_{n_k}(t_k) ⋯ P_{n_1}(t_1), with optional merged outcomes per slice.
    fn class_operator(&self, slices: &[Vec<usize>]) -> CMatrix {
        let d = self.spec.initial.dim();
        let mut c = CMatrix::identity(d, d);
        for (outcomes, set) in slices.iter().zip(&self.projectors) {
            let mut p = CMatrix::zeros(d, d);
            for &n in outcomes {
                p += &set[n];
            }
            c = p * c;
        }
        c
    }

    fn chain_probability(&self, slices: &[Vec<usize>]) -> f64 {
        let c = self.class_operator(slices);
        trace(&(&c * self.spec.initial.matrix() * c.adjoint())).re
    }

    /// tr{C ρ C†}, real and nonnegative.
    pub fn probability(&self, history: &[usize]) -> Result<f64> {
        self.check(history)?;
        let slices: Vec<Vec<usize>> = history.iter().map(|&n| vec![n]).collect();
        Ok(self.chain_probability(&slices))
    }

    /// tr{C ρ}, the single-sided trace; complex in general.
    pub fn raw_trace(&self, history: &[usize]) -> Result<Complex64> {
        self.check(history)?;
        let slices: Vec<Vec<usize>> = history.iter().map(|&n| vec![n]).collect();
        Ok(trace(&(self.class_operator(&slices) * self.spec.initial.matrix())))
    }

    /// D(α, β) = tr{C_α ρ C_β†}.
    pub fn decoherence_functional(&self, alpha: &[usize], beta: &[usize]) -> Result<Complex64> {
        self.check(alpha)?;
        self.check(beta)?;
        let a: Vec<Vec<usize>> = alpha.iter().map(|&n| vec![n]).collect();
        let b: Vec<Vec<usize>> = beta.iter().map(|&n| vec![n]).collect();
        Ok(trace(&(self.class_operator(&a) * self.spec.initial.matrix() * self.class_operator(&b).adjoint())))
    }

    /// Largest |p(union) − Σ p(members)| over all single-slice coarse-grainings.
    pub fn consistency_defect(&self) -> f64 {
        let shape = self.spec.shape();
        let histories = self.spec.histories();
        let mut worst = 0.0_f64;
        for (s, &n_out) in shape.iter().enumerate() {
            if !(2..=16).contains(&n_out) {
                // TODO: sample subsets instead of skipping slices with more than 16 outcomes
                continue;
            }
            let subsets: Vec<Vec<usize>> = (1u32..(1 << n_out))
                .filter(|m| m.count_ones() >= 2)
                .map(|m| (0..n_out).filter(|&i| m & (1 << i) != 0).collect())
                .collect();
            let contexts: Vec<&Vec<usize>> = histories.iter().filter(|h| h[s] == 0).collect();
            let slice_worst = contexts
                .par_iter()
                .map(|h| {
                    let mut local = 0.0_f64;
                    for subset in &subsets {
                        let mut merged: Vec<Vec<usize>> = h.iter().map(|&n| vec![n]).collect();
                        merged[s] = subset.clone();
                        let union = self.chain_probability(&merged);
                        let members: f64 = subset
                            .iter()
                            .map(|&n| {
                                merged[s] = vec![n];
                                self.chain_probability(&merged)
                            })
                            .sum();
                        local = local.max((union - members).abs());
                    }
                    local
                })
                .reduce(|| 0.0, f64::max);
            worst = worst.max(slice_worst);
        }
        worst
    }
}

/// Lüders-chain probability tr{P_{n_k}⋯P_{n_1} ρ P_{n_1}⋯P_{n_k}} with
/// Heisenberg-picture projectors.
pub fn history_probability(spec: &HistorySpec, history: &[usize]) -> Result<f64> {
    HistoryEvaluator::new(spec)?.probability(history)
}

/// The single-sided trace tr{P_{n_k}⋯P_{n_1} ρ}.
pub fn history_raw_trace(spec: &HistorySpec, history: &[usize]) -> Result<Complex64> {
    HistoryEvaluator::new(spec)?.raw_trace(history)
}

/// Every history with its Lüders-chain probability.
pub fn all_history_probabilities(spec: &HistorySpec) -> Result<Vec<(Vec<usize>, f64)>> {
    let eval = HistoryEvaluator::new(spec)?;
    spec.histories()
        .into_par_iter()
        .map(|h| {
            let p = eval.probability(&h)?;
            Ok((h, p))
        })
        .collect()
}

pub fn consistency_defect(spec: &HistorySpec) -> Result<f64> {
    Ok(HistoryEvaluator::new(spec)?.consistency_defect())
}

/// CSV with header `history,probability,raw_trace_re,raw_trace_im,defect`;
/// the defect of the whole family is repeated on every row.
pub fn write_histories_csv<W: Write>(out: W, spec: &HistorySpec) -> Result<()> {
    let eval = HistoryEvaluator::new(spec)?;
    let defect = eval.consistency_defect();
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(["history", "probability", "raw_trace_re", "raw_trace_im", "defect"]).map_err(io)?;
    for h in spec.histories() {
        let p = eval.probability(&h)?;
        let raw = eval.raw_trace(&h)?;
        let tuple = h.iter().map(usize::to_string).collect::<Vec<_>>().join("-");
        w.write_record([tuple, fmt_f64(p), fmt_f64(raw.re), fmt_f64(raw.im), fmt_f64(defect)]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

/// Frequencies within this distance of the threshold count as deviant, so
/// exact ties like k/N − p = ε are not decided by rounding.
const TIE_TOL: f64 = 1e-12;

/// Above this N the tail is accumulated entirely in the log domain.
const LOG_DOMAIN_N: u64 = 1000;

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut table = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Squared norm of all branches of the N-fold product state whose outcome
/// frequencies deviate from `born_p` by at least `epsilon` in some component.
///
/// Branch weights are multinomial coefficients times Π p_i^{k_i}; the sum is
/// exact up to floating rounding.
pub fn graham_deviant_norm(born_p: &[f64], n_trials: u64, epsilon: f64) -> Result<f64> {
    check_simplex(born_p)?;
    if born_p.len() < 2 {
        return Err(Error::NothingToMeasure("a single outcome has no deviant branches".into()));
    }
    if n_trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let n = n_trials;
    let lnf = ln_factorials(n);
    let ln_p: Vec<f64> = born_p.iter().map(|p| p.ln()).collect();
    let mut log_terms = Vec::new();
    let mut counts = vec![0u64; born_p.len()];
    enumerate_compositions(n, &mut counts, 0, &mut |k| {
        let deviant = k.iter().zip(born_p).any(|(&ki, &pi)| (ki as f64 / n as f64 - pi).abs() >= epsilon - TIE_TOL);
        if !deviant {
            return;
        }
        let mut lw = lnf[n as usize];
        for (&ki, &lp) in k.iter().zip(&ln_p) {
            lw -= lnf[ki as usize];
            if ki > 0 {
                lw += ki as f64 * lp;
            }
        }
        log_terms.push(lw);
    });
    if log_terms.is_empty() {
        return Ok(0.0);
    }
    if n > LOG_DOMAIN_N {
        Ok(log_sum_exp(&log_terms).exp())
    } else {
        Ok(log_terms.iter().map(|t| t.exp()).sum::<f64>().min(1.0))
    }
}

fn enumerate_compositions(remaining: u64, counts: &mut Vec<u64>, slot: usize, visit: &mut impl FnMut(&[u64])) {
    if slot == counts.len() - 1 {
        counts[slot] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[slot] = k;
        enumerate_compositions(remaining - k, counts, slot + 1, visit);
    }
}
