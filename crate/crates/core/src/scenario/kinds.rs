//! Parameter blocks and runners for each scenario kind.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Artifact, Diagnostic, RunError};
use crate::dynamics::{collapse, Hamiltonian};
use crate::entanglement::{
    check_simplex, decoherence_factor, ensemble_entropy, linear_entropy, nats_to_bits, schmidt_decompose,
};
use crate::hilbert::{partial_trace, ProjectorSet, StateVector, TensorSpace};
use crate::histories::{all_history_probabilities, graham_deviant_norm, write_histories_csv, HistoryEvaluator};
use crate::histories::{pauli_master_evolve, HistorySpec, RateMatrix};
use crate::ledger::{branching_ledger, classical_ledger, quantum_collapse_ledger, write_ledger_csv, LedgerRow};
use crate::linalg::{CMatrix, VALIDITY_TOL};
use crate::measurement::{branch_and_recohere, chain_propagate, chain_report, premeasure, ApparatusModel, BranchModel, ChainSpec};
use crate::output::fmt_f64;
use crate::wigner::{gaussian_packet, marginals, oscillator_eigenstate, wigner_transform, Grid, GridState, BOUNDARY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Premeasurement,
    Chain,
    BranchRecohere,
    CollapseMc,
    Wigner,
    Schmidt,
    Master,
    Histories,
    Graham,
    LedgerClassical,
    LedgerQuantum,
    LedgerBranching,
}

impl Kind {
    pub const ALL: [Kind; 12] = [
        Kind::Premeasurement,
        Kind::Chain,
        Kind::BranchRecohere,
        Kind::CollapseMc,
        Kind::Wigner,
        Kind::Schmidt,
        Kind::Master,
        Kind::Histories,
        Kind::Graham,
        Kind::LedgerClassical,
        Kind::LedgerQuantum,
        Kind::LedgerBranching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Premeasurement => "premeasurement",
            Kind::Chain => "chain",
            Kind::BranchRecohere => "branch_recohere",
            Kind::CollapseMc => "collapse_mc",
            Kind::Wigner => "wigner",
            Kind::Schmidt => "schmidt",
            Kind::Master => "master",
            Kind::Histories => "histories",
            Kind::Graham => "graham",
            Kind::LedgerClassical => "ledger_classical",
            Kind::LedgerQuantum => "ledger_quantum",
            Kind::LedgerBranching => "ledger_branching",
        }
    }
}

impl FromStr for Kind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

pub(super) trait Job {
    fn run(&self, seed: u64) -> Result<Vec<Artifact>, RunError>;
}

trait Checked {
    fn diagnostics(&self) -> Vec<Diagnostic>;
}

pub(super) fn prepare(kind: Kind, params: &Value) -> Result<Box<dyn Job>, Vec<Diagnostic>> {
    match kind {
        Kind::Premeasurement => build::<Premeasurement>(params),
        Kind::Chain => build::<Chain>(params),
        Kind::BranchRecohere => build::<BranchRecohere>(params),
        Kind::CollapseMc => build::<CollapseMc>(params),
        Kind::Wigner => build::<Wigner>(params),
        Kind::Schmidt => build::<Schmidt>(params),
        Kind::Master => build::<Master>(params),
        Kind::Histories => build::<Histories>(params),
        Kind::Graham => build::<Graham>(params),
        Kind::LedgerClassical => build::<LedgerClassical>(params),
        Kind::LedgerQuantum => build::<LedgerQuantum>(params),
        Kind::LedgerBranching => build::<LedgerBranching>(params),
    }
}

fn build<P: DeserializeOwned + Checked + Job + 'static>(params: &Value) -> Result<Box<dyn Job>, Vec<Diagnostic>> {
    let p: P = serde_json::from_value(params.clone()).map_err(|e| vec![Diagnostic::new("params", e.to_string())])?;
    let diags = p.diagnostics();
    if diags.is_empty() {
        Ok(Box::new(p))
    } else {
        Err(diags)
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(re) => Complex64::new(re, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

fn complex(amps: &[Amplitude]) -> Vec<Complex64> {
    amps.iter().map(|a| a.value()).collect()
}

fn default_plus() -> Vec<Amplitude> {
    let s = 0.5_f64.sqrt();
    vec![Amplitude::Real(s), Amplitude::Real(s)]
}

/// Normalized state over one subsystem, or diagnostics explaining why not.
fn state_from(
    field: &str,
    label: &str,
    amps: &[Amplitude],
    min_len: usize,
    diags: &mut Vec<Diagnostic>,
) -> Option<StateVector> {
    if amps.len() < min_len {
        diags.push(Diagnostic::new(field, format!("need at least {min_len} amplitudes, found {}", amps.len())));
        return None;
    }
    let values = complex(amps);
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        diags.push(Diagnostic::new(field, "non-finite amplitude"));
        return None;
    }
    let psi = TensorSpace::single(label, values.len()).and_then(|s| StateVector::from_complex(s, values));
    match psi {
        Ok(psi) => {
            let norm = psi.norm();
            if norm == 0.0 {
                diags.push(Diagnostic::new(field, "all amplitudes are zero"));
                None
            } else if (norm - 1.0).abs() > VALIDITY_TOL {
                diags.push(Diagnostic::new(field, format!("amplitudes not normalized (norm = {})", fmt_f64(norm))));
                None
            } else {
                Some(psi)
            }
        }
        Err(e) => {
            diags.push(Diagnostic::new(field, e.to_string()));
            None
        }
    }
}

fn simplex_field(field: &str, p: &[f64], diags: &mut Vec<Diagnostic>) {
    for (i, x) in p.iter().enumerate() {
        if !x.is_finite() || *x < 0.0 {
            diags.push(Diagnostic::new(format!("{field}[{i}]"), format!("invalid probability {x}")));
        }
    }
    if let Err(e) = check_simplex(p) {
        if diags.iter().all(|d| !d.field.starts_with(field)) {
            diags.push(Diagnostic::new(field, e.to_string()));
        }
    }
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), RunError> {
    if ok {
        Ok(())
    } else {
        Err(RunError::Invariant(what()))
    }
}

fn csv_artifact(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<Artifact, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| RunError::Invariant(format!("writing {name}: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::Invariant(format!("writing {name}: {e}")))?;
    Ok(Artifact::new(name, bytes))
}

fn matrix_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn check_norm(psi: &StateVector, what: &str) -> Result<f64, RunError> {
    let purity = psi.norm().powi(4);
    ensure((purity - 1.0).abs() <= VALIDITY_TOL, || format!("{what}: global purity {purity} drifted from 1"))?;
    Ok(purity)
}

// premeasurement

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Premeasurement {
    #[serde(default = "default_plus")]
    amplitudes: Vec<Amplitude>,
    #[serde(default)]
    overlap: f64,
}

impl Checked for Premeasurement {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        state_from("params.amplitudes", "system", &self.amplitudes, 2, &mut d);
        if let Err(e) = ApparatusModel::with_overlap("apparatus", self.amplitudes.len().max(1), self.overlap) {
            d.push(Diagnostic::new("params.overlap", e.to_string()));
        }
        d
    }
}

impl Job for Premeasurement {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let psi = state_from("", "system", &self.amplitudes, 2, &mut Vec::new()).expect("checked");
        let app = ApparatusModel::with_overlap("apparatus", psi.dim(), self.overlap)?;
        let basis = StateVector::computational_basis(psi.space());
        let joint = premeasure(&psi, &app, &basis)?;
        let purity = check_norm(&joint, "premeasurement")?;
        let rho = partial_trace(&joint, &["system"])?;
        let factors = decoherence_factor(&rho, &basis)?;
        let summary = json!({
            "global_purity": purity,
            "pointer_overlap": self.overlap,
            "populations": factors.populations,
            "max_off_diagonal": factors.max_off_diagonal(),
            "system_linear_entropy": linear_entropy(&rho),
            "system_entropy_nats": ensemble_entropy(&rho),
            "system_density": matrix_json(rho.matrix()),
        });
        Ok(vec![Artifact::json("premeasurement.json", &summary)?])
    }
}

// chain

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Chain {
    #[serde(default = "default_plus")]
    amplitudes: Vec<Amplitude>,
    links: usize,
    overlap: f64,
    #[serde(default)]
    observer: bool,
}

impl Checked for Chain {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        state_from("params.amplitudes", "system", &self.amplitudes, 2, &mut d);
        if let Err(e) = ApparatusModel::with_overlap("link", self.amplitudes.len().max(1), self.overlap) {
            d.push(Diagnostic::new("params.overlap", e.to_string()));
        }
        // joint dimension n·(n+1)^K must stay tractable
        let n = self.amplitudes.len().max(1) as f64;
        let stages = self.links + usize::from(self.observer);
        if n.ln() + stages as f64 * (n + 1.0).ln() > ((1u64 << 22) as f64).ln() {
            d.push(Diagnostic::new("params.links", format!("{} devices make the joint space too large", stages)));
        }
        d
    }
}

impl Job for Chain {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let psi = state_from("", "system", &self.amplitudes, 2, &mut Vec::new()).expect("checked");
        let basis = StateVector::computational_basis(psi.space());
        let spec = ChainSpec::uniform(basis, self.links, self.overlap, self.observer)?;
        let states = chain_propagate(&spec, &psi)?;
        let report = chain_report(&spec, &states)?;
        let mut rows = Vec::new();
        for r in &report {
            ensure((r.global_purity - 1.0).abs() <= VALIDITY_TOL, || format!("step {}: purity {}", r.step, r.global_purity))?;
            rows.push(vec![r.step.to_string(), fmt_f64(r.off_diagonal), fmt_f64(r.linear_entropy), fmt_f64(r.global_purity)]);
        }
        Ok(vec![csv_artifact("chain.csv", &["step", "off_diagonal", "S_lin_system", "global_purity"], rows)?])
    }
}

// branch_recohere

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchRecohere {
    #[serde(default = "default_plus")]
    amplitudes: Vec<Amplitude>,
    env_dim: Option<usize>,
}

impl BranchRecohere {
    fn env_dim(&self) -> usize {
        self.env_dim.unwrap_or(self.amplitudes.len())
    }
}

impl Checked for BranchRecohere {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        state_from("params.amplitudes", "system", &self.amplitudes, 2, &mut d);
        if self.env_dim() < self.amplitudes.len() {
            d.push(Diagnostic::new(
                "params.env_dim",
                format!("{} is smaller than the {} outcomes", self.env_dim(), self.amplitudes.len()),
            ));
        }
        d
    }
}

impl Job for BranchRecohere {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let psi = state_from("", "system", &self.amplitudes, 2, &mut Vec::new()).expect("checked");
        let model = BranchModel::ideal(psi.dim(), self.env_dim())?;
        let initial = model.initial_state(&psi)?;
        let [s1, s2, s3] = branch_and_recohere(&model, &initial)?;
        let mut rows = Vec::new();
        for (step, s) in [&initial, &s1, &s2, &s3].into_iter().enumerate() {
            let purity = check_norm(s, "branch_recohere")?;
            let app = partial_trace(s, &["apparatus"])?;
            let ready = model.ready_apparatus().amplitudes();
            let fidelity = ready.dotc(&(app.matrix() * ready)).re;
            let entropy = |label: &str| partial_trace(s, &[label]).map(|r| ensemble_entropy(&r));
            rows.push(vec![
                step.to_string(),
                fmt_f64(purity),
                fmt_f64(fidelity),
                fmt_f64(entropy("system")?),
                fmt_f64(entropy("apparatus")?),
                fmt_f64(entropy("environment")?),
            ]);
        }
        let header =
            ["step", "global_purity", "apparatus_ready_fidelity", "S_system_nats", "S_apparatus_nats", "S_environment_nats"];
        Ok(vec![csv_artifact("branch_recohere.csv", &header, rows)?])
    }
}

// collapse_mc

fn default_trials() -> u64 {
    10_000
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollapseMc {
    amplitudes: Vec<Amplitude>,
    #[serde(default = "default_trials")]
    trials: u64,
    #[serde(default = "yes")]
    repeat: bool,
}

impl Checked for CollapseMc {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        state_from("params.amplitudes", "system", &self.amplitudes, 2, &mut d);
        if self.trials == 0 || self.trials > 10_000_000 {
            d.push(Diagnostic::new("params.trials", format!("{} is outside 1..=10^7", self.trials)));
        }
        d
    }
}

#[derive(Serialize)]
struct CollapseSummary {
    trials: u64,
    seed: u64,
    chi_square: f64,
    degrees_of_freedom: usize,
    repeat_checked: bool,
    repeat_mismatches: u64,
}

impl Job for CollapseMc {
    fn run(&self, seed: u64) -> Result<Vec<Artifact>, RunError> {
        let psi = state_from("", "system", &self.amplitudes, 2, &mut Vec::new()).expect("checked");
        let basis = StateVector::computational_basis(psi.space());
        let born: Vec<f64> = self.amplitudes.iter().map(|a| a.value().norm_sqr()).collect();
        let mut seeds = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; basis.len()];
        let mut mismatches = 0;
        for _ in 0..self.trials {
            let record = collapse(&psi, &basis, seeds.next_u64())?;
            counts[record.outcome_index] += 1;
            if self.repeat {
                let again = collapse(&record.post_state, &basis, seeds.next_u64())?;
                if again.outcome_index != record.outcome_index {
                    mismatches += 1;
                }
            }
        }
        ensure(mismatches == 0, || format!("{mismatches} repeated measurements changed outcome"))?;
        let t = self.trials as f64;
        let mut chi_square = 0.0;
        let mut dof = 0usize;
        for (&c, &p) in counts.iter().zip(&born) {
            if p > 0.0 {
                chi_square += (c as f64 - t * p).powi(2) / (t * p);
                dof += 1;
            } else {
                ensure(c == 0, || "an outcome of zero probability occurred".to_string())?;
            }
        }
        let rows = counts
            .iter()
            .zip(&born)
            .enumerate()
            .map(|(n, (&c, &p))| vec![n.to_string(), fmt_f64(p), c.to_string(), fmt_f64(c as f64 / t)])
            .collect();
        let summary = CollapseSummary {
            trials: self.trials,
            seed,
            chi_square,
            degrees_of_freedom: dof.saturating_sub(1),
            repeat_checked: self.repeat,
            repeat_mismatches: mismatches,
        };
        Ok(vec![
            csv_artifact("collapse_counts.csv", &["outcome", "born_probability", "count", "frequency"], rows)?,
            Artifact::json("collapse_summary.json", &summary)?,
        ])
    }
}

// wigner

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum WignerState {
    Oscillator {
        n: usize,
    },
    Packet {
        center: f64,
        #[serde(default)]
        momentum: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// Packets at ±offset, superposed or (with `mixture`) mixed.
    Cat {
        offset: f64,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default)]
        mixture: bool,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WignerFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wigner {
    state: WignerState,
    #[serde(default)]
    grid: Option<Grid>,
    #[serde(default)]
    format: WignerFormat,
}

impl Wigner {
    fn grid(&self) -> crate::Result<Grid> {
        match self.grid {
            Some(g) => Grid::new(g.q_min, g.q_max, g.n_points),
            None => Ok(Grid::standard()),
        }
    }

    fn state(&self) -> crate::Result<GridState> {
        let grid = self.grid()?;
        match self.state {
            WignerState::Oscillator { n } => oscillator_eigenstate(grid, n),
            WignerState::Packet { center, momentum, sigma } => gaussian_packet(grid, center, momentum, sigma),
            WignerState::Cat { offset, sigma, mixture } => {
                let left = gaussian_packet(grid, -offset, 0.0, sigma)?;
                let right = gaussian_packet(grid, offset, 0.0, sigma)?;
                if mixture {
                    GridState::mixture(&[(0.5, &left), (0.5, &right)])
                } else {
                    // same profile as gaussian_packet, so mixture and superposition share widths
                    let g = |x: f64| (-(x * x) / (2.0 * sigma * sigma)).exp();
                    GridState::from_fn(grid, |q| Complex64::new(g(q - offset) + g(q + offset), 0.0))
                }
            }
        }
    }
}

impl Checked for Wigner {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if let Err(e) = self.grid() {
            d.push(Diagnostic::new("params.grid", e.to_string()));
            return d;
        }
        match self.state() {
            Ok(s) if s.boundary_amplitude() > BOUNDARY_TOL => d.push(Diagnostic::new(
                "params.state",
                format!("state reaches the grid edge (|value| = {:e}); widen the grid", s.boundary_amplitude()),
            )),
            Ok(_) => {}
            Err(e) => d.push(Diagnostic::new("params.state", e.to_string())),
        }
        d
    }
}

impl Job for Wigner {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let state = self.state()?;
        let w = wigner_transform(&state)?;
        let normalization = w.normalization();
        ensure((normalization - 1.0).abs() <= 1e-6, || format!("Wigner normalization {normalization}"))?;
        let rho = state.density_matrix();
        let (position, _) = marginals(&w);
        let position_error =
            position.iter().enumerate().map(|(i, m)| (m - rho[(i, i)].re).abs()).fold(0.0, f64::max);
        ensure(position_error <= 1e-6, || format!("position marginal off by {position_error}"))?;
        let summary = json!({
            "grid": w.grid,
            "normalization": normalization,
            "purity_from_wigner": w.purity(),
            "state_purity": state.purity(),
            "min": w.min(),
            "max": w.max(),
            "value_at_origin": w.value(0.0, 0.0),
            "max_imaginary": w.max_imaginary,
            "position_marginal_error": position_error,
        });
        let mut bytes = Vec::new();
        let name = match self.format {
            WignerFormat::Csv => {
                w.write_csv(&mut bytes).map_err(|e| RunError::Io(e.to_string()))?;
                "wigner.csv"
            }
            WignerFormat::Binary => {
                w.write_binary(&mut bytes).map_err(|e| RunError::Io(e.to_string()))?;
                "wigner.bin"
            }
        };
        Ok(vec![Artifact::new(name, bytes), Artifact::json("wigner_summary.json", &summary)?])
    }
}

// schmidt

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Schmidt {
    dims: [usize; 2],
    amplitudes: Vec<Amplitude>,
}

impl Schmidt {
    fn state(&self, d: &mut Vec<Diagnostic>) -> Option<StateVector> {
        let [da, db] = self.dims;
        if da == 0 || db == 0 {
            d.push(Diagnostic::new("params.dims", "dimensions must be positive"));
            return None;
        }
        if self.amplitudes.len() != da * db {
            d.push(Diagnostic::new(
                "params.amplitudes",
                format!("expected {} amplitudes for dims {da}×{db}, found {}", da * db, self.amplitudes.len()),
            ));
            return None;
        }
        let flat = state_from("params.amplitudes", "flat", &self.amplitudes, 1, d)?;
        let space = TensorSpace::new([("A", da), ("B", db)]).ok()?;
        StateVector::new(space, flat.into_amplitudes()).ok()
    }
}

impl Checked for Schmidt {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        self.state(&mut d);
        d
    }
}

impl Job for Schmidt {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let psi = self.state(&mut Vec::new()).expect("checked");
        let s = schmidt_decompose(&psi, &["A"])?;
        let back = s.reconstruct()?;
        let error = (back.amplitudes() - psi.amplitudes()).norm();
        ensure(error <= VALIDITY_TOL, || format!("Schmidt reconstruction error {error}"))?;
        let rho_a = partial_trace(&psi, &["A"])?;
        let entropy = s.entanglement_entropy();
        let summary = json!({
            "coefficients": s.coefficients,
            "probabilities": s.probabilities(),
            "rank": s.rank(),
            "degenerate": s.degenerate,
            "entanglement_entropy_nats": entropy,
            "entanglement_entropy_bits": nats_to_bits(entropy),
            "linear_entropy": s.linear_entropy(),
            "reduced_entropy_nats": ensemble_entropy(&rho_a),
            "reconstruction_error": error,
        });
        Ok(vec![Artifact::json("schmidt.json", &summary)?])
    }
}

// master

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Master {
    rates: Vec<Vec<f64>>,
    p0: Vec<f64>,
    times: Vec<f64>,
}

impl Checked for Master {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        let n = self.rates.len();
        let mut entries_ok = n > 0;
        for (i, row) in self.rates.iter().enumerate() {
            if row.len() != n {
                d.push(Diagnostic::new(format!("params.rates[{i}]"), format!("expected {n} entries, found {}", row.len())));
                entries_ok = false;
                continue;
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    d.push(Diagnostic::new(format!("params.rates[{i}][{j}]"), format!("negative rate {v}")));
                    entries_ok = false;
                } else if i == j && v != 0.0 {
                    d.push(Diagnostic::new(format!("params.rates[{i}][{j}]"), format!("diagonal rate {v} must be 0")));
                    entries_ok = false;
                }
            }
        }
        if n == 0 {
            d.push(Diagnostic::new("params.rates", "empty rate matrix"));
        }
        if entries_ok {
            if let Err(e) = RateMatrix::from_rows(&self.rates) {
                d.push(Diagnostic::new("params.rates", e.to_string()));
            }
        }
        if self.p0.len() != n {
            d.push(Diagnostic::new("params.p0", format!("expected {n} probabilities, found {}", self.p0.len())));
        } else {
            simplex_field("params.p0", &self.p0, &mut d);
        }
        for (k, &t) in self.times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                d.push(Diagnostic::new(format!("params.times[{k}]"), format!("time {t} must be finite and ≥ 0")));
            } else if k > 0 && t <= self.times[k - 1] {
                d.push(Diagnostic::new(format!("params.times[{k}]"), format!("time {t} does not follow {}", self.times[k - 1])));
            }
        }
        if self.times.is_empty() {
            d.push(Diagnostic::new("params.times", "no output times"));
        }
        d
    }
}

impl Job for Master {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let rates = RateMatrix::from_rows(&self.rates)?;
        let mut rows = Vec::new();
        for &t in &self.times {
            let p = pauli_master_evolve(&self.p0, &rates, t)?;
            let total: f64 = p.iter().sum();
            ensure((total - 1.0).abs() <= VALIDITY_TOL, || format!("t = {t}: total probability {total}"))?;
            ensure(p.iter().all(|&x| x >= -VALIDITY_TOL), || format!("t = {t}: negative probability in {p:?}"))?;
            let mut row = vec![fmt_f64(t)];
            row.extend(p.iter().map(|&x| fmt_f64(x)));
            row.push(fmt_f64(total));
            rows.push(row);
        }
        let mut header = vec!["time".to_string()];
        header.extend((0..self.p0.len()).map(|n| format!("p{n}")));
        header.push("total".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        Ok(vec![csv_artifact("master.csv", &header, rows)?])
    }
}

// histories

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Slice {
    time: f64,
    basis: Vec<Vec<Amplitude>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Histories {
    initial: Vec<Amplitude>,
    #[serde(default)]
    hamiltonian: Option<Vec<Vec<Amplitude>>>,
    #[serde(default)]
    t0: f64,
    slices: Vec<Slice>,
}

impl Histories {
    fn spec(&self, d: &mut Vec<Diagnostic>) -> Option<HistorySpec> {
        let psi = state_from("params.initial", "system", &self.initial, 1, d)?;
        let space = psi.space().clone();
        let n = psi.dim();
        let hamiltonian = match &self.hamiltonian {
            None => Some(Hamiltonian::zero(space.clone())),
            Some(rows) if rows.len() != n || rows.iter().any(|r| r.len() != n) => {
                d.push(Diagnostic::new("params.hamiltonian", format!("expected a {n}×{n} matrix")));
                None
            }
            Some(rows) => {
                let m = CMatrix::from_fn(n, n, |i, j| rows[i][j].value());
                Hamiltonian::new(space.clone(), m)
                    .map_err(|e| d.push(Diagnostic::new("params.hamiltonian", e.to_string())))
                    .ok()
            }
        };
        let mut sets = Vec::new();
        for (k, slice) in self.slices.iter().enumerate() {
            let field = format!("params.slices[{k}].basis");
            let vectors: Vec<StateVector> = slice
                .basis
                .iter()
                .enumerate()
                .filter_map(|(i, v)| {
                    if v.len() != n {
                        d.push(Diagnostic::new(format!("{field}[{i}]"), format!("expected {n} amplitudes")));
                        return None;
                    }
                    state_from(&format!("{field}[{i}]"), "system", v, 1, d)
                })
                .collect();
            if vectors.len() != slice.basis.len() {
                continue;
            }
            match ProjectorSet::from_basis(&vectors) {
                Ok(s) => sets.push(s),
                Err(e) => d.push(Diagnostic::new(field, e.to_string())),
            }
        }
        if self.slices.is_empty() {
            d.push(Diagnostic::new("params.slices", "no time slices"));
        }
        if sets.len() != self.slices.len() {
            return None;
        }
        let rho = psi.density().ok()?;
        let times = self.slices.iter().map(|s| s.time).collect();
        HistorySpec::new(self.t0, rho, hamiltonian?, times, sets)
            .map_err(|e| d.push(Diagnostic::new("params.slices", e.to_string())))
            .ok()
    }
}

impl Checked for Histories {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        self.spec(&mut d);
        d
    }
}

impl Job for Histories {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let spec = self.spec(&mut Vec::new()).expect("checked");
        let probs = all_history_probabilities(&spec)?;
        let total: f64 = probs.iter().map(|(_, p)| p).sum();
        ensure((total - 1.0).abs() <= VALIDITY_TOL, || format!("history probabilities sum to {total}"))?;
        ensure(probs.iter().all(|(_, p)| *p >= -VALIDITY_TOL), || "negative history probability".into())?;
        let defect = HistoryEvaluator::new(&spec)?.consistency_defect();
        let mut csv_bytes = Vec::new();
        write_histories_csv(&mut csv_bytes, &spec)?;
        let summary = json!({
            "slices": spec.slices(),
            "histories": probs.len(),
            "total_probability": total,
            "consistency_defect": defect,
        });
        Ok(vec![Artifact::new("histories.csv", csv_bytes), Artifact::json("histories_summary.json", &summary)?])
    }
}

// graham

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Probabilities {
    Binary(f64),
    Vector(Vec<f64>),
}

impl Probabilities {
    fn vector(&self) -> Vec<f64> {
        match self {
            Probabilities::Binary(p) => vec![*p, 1.0 - p],
            Probabilities::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Counts {
    One(u64),
    Many(Vec<u64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Graham {
    p: Probabilities,
    n: Counts,
    epsilon: f64,
}

impl Graham {
    fn counts(&self) -> Vec<u64> {
        match &self.n {
            Counts::One(n) => vec![*n],
            Counts::Many(v) => v.clone(),
        }
    }
}

impl Checked for Graham {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        let p = self.p.vector();
        simplex_field("params.p", &p, &mut d);
        if p.len() < 2 {
            d.push(Diagnostic::new("params.p", "need at least two outcomes"));
        }
        let counts = self.counts();
        if counts.is_empty() {
            d.push(Diagnostic::new("params.n", "no trial counts"));
        }
        // compositions of N into m parts: keep the enumeration bounded
        for (k, &n) in counts.iter().enumerate() {
            let size = (1..p.len()).fold(1.0_f64, |acc, j| acc * (n as f64 + j as f64) / j as f64);
            if n == 0 || size > 5e7 {
                d.push(Diagnostic::new(format!("params.n[{k}]"), format!("N = {n} is outside the enumerable range")));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            d.push(Diagnostic::new("params.epsilon", format!("{} must be positive", self.epsilon)));
        }
        d
    }
}

impl Job for Graham {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let p = self.p.vector();
        let mut rows = Vec::new();
        for n in self.counts() {
            let norm = graham_deviant_norm(&p, n, self.epsilon)?;
            ensure((0.0..=1.0 + VALIDITY_TOL).contains(&norm), || format!("N = {n}: deviant norm {norm}"))?;
            rows.push(vec![n.to_string(), fmt_f64(self.epsilon), fmt_f64(norm)]);
        }
        Ok(vec![csv_artifact("graham.csv", &["N", "epsilon", "deviant_norm"], rows)?])
    }
}

// ledgers

fn ledger_artifacts(rows: &[LedgerRow]) -> Result<Vec<Artifact>, RunError> {
    for r in rows {
        ensure(r.s_physical >= r.s_ensemble - 1e-12, || format!("{}: S_physical < S_ensemble", r.step))?;
        ensure(r.information >= 0.0, || format!("{}: negative information", r.step))?;
    }
    let mut bytes = Vec::new();
    write_ledger_csv(&mut bytes, rows).map_err(|e| RunError::Io(e.to_string()))?;
    Ok(vec![Artifact::new("ledger.csv", bytes), Artifact::json("ledger.json", rows)?])
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LedgerClassical {
    p: Probabilities,
}

impl Checked for LedgerClassical {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        let p = self.p.vector();
        simplex_field("params.p", &p, &mut d);
        if d.is_empty() && p.iter().filter(|&&x| x > 0.0).count() < 2 {
            d.push(Diagnostic::new("params.p", "a single possible outcome leaves nothing to measure"));
        }
        d
    }
}

impl Job for LedgerClassical {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        ledger_artifacts(&classical_ledger(&self.p.vector())?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LedgerQuantum {
    #[serde(default = "default_plus")]
    amplitudes: Vec<Amplitude>,
}

impl Checked for LedgerQuantum {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        state_from("params.amplitudes", "system", &self.amplitudes, 2, &mut d);
        d
    }
}

impl Job for LedgerQuantum {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        ledger_artifacts(&quantum_collapse_ledger(&complex(&self.amplitudes))?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LedgerBranching {
    #[serde(default = "default_plus")]
    amplitudes: Vec<Amplitude>,
    env_dim: Option<usize>,
}

impl Checked for LedgerBranching {
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        state_from("params.amplitudes", "system", &self.amplitudes, 2, &mut d);
        if let Some(e) = self.env_dim {
            if e < self.amplitudes.len() {
                d.push(Diagnostic::new("params.env_dim", format!("{e} is smaller than the {} outcomes", self.amplitudes.len())));
            }
        }
        d
    }
}

impl Job for LedgerBranching {
    fn run(&self, _seed: u64) -> Result<Vec<Artifact>, RunError> {
        let env = self.env_dim.unwrap_or(self.amplitudes.len());
        ledger_artifacts(&branching_ledger(&complex(&self.amplitudes), env)?)
    }
}
