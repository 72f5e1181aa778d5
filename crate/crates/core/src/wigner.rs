//! Discretized Wigner transform of one-dimensional states,
//!
//! ```text
//! W(p, q) = (1/π) ∫ e^{2ipx} ρ(q+x, q−x) dx ,
//! ```
//!
//! evaluated on a uniform position grid with an FFT over x, plus the
//! phase-space kernel Σ_{p,q}(z, z') whose contraction with ρ gives the same
//! numbers.
//!
//! Grid points are `q_i = q_min + i·Δq` for `i < n` with `Δq = (q_max − q_min)/n`
//! (the right endpoint is excluded). The momentum grid is the reciprocal one,
//! `p_k = (k − n/2)·π/(n·Δq)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, CMatrix, ZERO};
use crate::output::fmt_f64;

/// Largest boundary amplitude accepted by [`wigner_transform`].
pub const BOUNDARY_TOL: f64 = 1e-8;
const NORMALIZATION_TOL: f64 = 1e-6;
const ALIGN_TOL: f64 = 1e-9;

/// Uniform position grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub q_min: f64,
    pub q_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(q_min: f64, q_max: f64, n_points: usize) -> Result<Self> {
        if !(q_min.is_finite() && q_max.is_finite()) || q_max <= q_min {
            return Err(Error::InvalidGrid(format!("empty interval [{q_min}, {q_max}]")));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("{n_points} points is not a power of two ≥ 2")));
        }
        Ok(Self { q_min, q_max, n_points })
    }

    /// q ∈ [−8, 8] with 256 points.
    pub fn standard() -> Self {
        Self { q_min: -8.0, q_max: 8.0, n_points: 256 }
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.n_points as f64
    }

    pub fn dp(&self) -> f64 {
        PI / (self.n_points as f64 * self.dq())
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) * self.dp()
    }

    pub fn q_points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.q(i)).collect()
    }

    pub fn p_points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.p(k)).collect()
    }

    /// Fractional grid coordinate of `q`, or `None` when `q` is off the lattice.
    fn lattice_coordinate(&self, q: f64) -> Option<i64> {
        let x = (q - self.q_min) / self.dq();
        let r = x.round();
        ((x - r).abs() <= ALIGN_TOL * x.abs().max(1.0)).then_some(r as i64)
    }

    /// Index of the grid point at `q`, if `q` lies on the grid.
    pub fn index_of(&self, q: f64) -> Option<usize> {
        self.lattice_coordinate(q).filter(|&i| i >= 0 && (i as usize) < self.n_points).map(|i| i as usize)
    }
}

/// Samples of a wave function, or a position-representation density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum GridValues {
    Wavefunction(Vec<Complex64>),
    /// ρ(z_a, z_b) at `[(a, b)]`.
    Matrix(CMatrix),
}

/// A one-dimensional continuous-variable state sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    grid: Grid,
    values: GridValues,
}

impl GridState {
    /// Validates Σ|ψ(q_i)|²·Δq = 1 ± 1e-6.
    pub fn wavefunction(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        let s = Self::wavefunction_unnormalized(grid, samples)?;
        s.check_normalization()?;
        Ok(s)
    }

    /// Samples `f` on the grid and normalizes the result.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = grid.q_points().into_iter().map(f).collect();
        Self::wavefunction_unnormalized(grid, samples)?.normalized()
    }

    fn wavefunction_unnormalized(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::DimensionMismatch { expected: grid.n_points, found: samples.len() });
        }
        Ok(Self { grid, values: GridValues::Wavefunction(samples) })
    }

    /// Validates ρ(z,z') = ρ(z',z)* (1e-10) and Σ ρ(q_i,q_i)·Δq = 1 ± 1e-6.
    pub fn density(grid: Grid, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != grid.n_points || matrix.ncols() != grid.n_points {
            return Err(Error::DimensionMismatch { expected: grid.n_points, found: matrix.nrows() });
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
        let s = Self { grid, values: GridValues::Matrix(matrix) };
        s.check_normalization()?;
        Ok(s)
    }

    /// Convex combination Σ w_k ρ_k as a density-matrix state.
    pub fn mixture(components: &[(f64, &GridState)]) -> Result<Self> {
        let (_, first) = components.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let grid = first.grid;
        let weights: Vec<f64> = components.iter().map(|(w, _)| *w).collect();
        crate::entanglement::check_simplex(&weights)?;
        let n = grid.n_points;
        let mut m = CMatrix::zeros(n, n);
        for (w, s) in components {
            if s.grid != grid {
                return Err(Error::InvalidGrid("mixture components on different grids".into()));
            }
            m += s.density_matrix().scale(*w);
        }
        Self::density(grid, m)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &GridValues {
        &self.values
    }

    /// Σ ρ(q_i, q_i)·Δq.
    pub fn norm(&self) -> f64 {
        let dq = self.grid.dq();
        match &self.values {
            GridValues::Wavefunction(v) => v.iter().map(Complex64::norm_sqr).sum::<f64>() * dq,
            GridValues::Matrix(m) => m.diagonal().iter().map(|z| z.re).sum::<f64>() * dq,
        }
    }

    fn check_normalization(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let values = match &self.values {
            GridValues::Wavefunction(v) => GridValues::Wavefunction(v.iter().map(|z| z / norm.sqrt()).collect()),
            GridValues::Matrix(m) => GridValues::Matrix(m.unscale(norm)),
        };
        Ok(Self { grid: self.grid, values })
    }

    /// ρ(z_a, z_b) = ψ(z_a)ψ*(z_b) for wave functions.
    pub fn density_matrix(&self) -> CMatrix {
        match &self.values {
            GridValues::Wavefunction(v) => {
                let n = v.len();
                CMatrix::from_fn(n, n, |a, b| v[a] * v[b].conj())
            }
            GridValues::Matrix(m) => m.clone(),
        }
    }

    /// ρ(z_a, z_b), zero outside the grid.
    fn element(&self, a: i64, b: i64) -> Complex64 {
        let n = self.grid.n_points as i64;
        if a < 0 || b < 0 || a >= n || b >= n {
            return ZERO;
        }
        let (a, b) = (a as usize, b as usize);
        match &self.values {
            GridValues::Wavefunction(v) => v[a] * v[b].conj(),
            GridValues::Matrix(m) => m[(a, b)],
        }
    }

    /// Largest |ψ| at the two grid ends (√ρ(z,z) for matrices).
    pub fn boundary_amplitude(&self) -> f64 {
        let last = self.grid.n_points - 1;
        match &self.values {
            GridValues::Wavefunction(v) => v[0].norm().max(v[last].norm()),
            GridValues::Matrix(m) => m[(0, 0)].norm().sqrt().max(m[(last, last)].norm().sqrt()),
        }
    }

    /// tr ρ² = Σ |ρ(z_a, z_b)|² Δq².
    pub fn purity(&self) -> f64 {
        let dq = self.grid.dq();
        match &self.values {
            GridValues::Wavefunction(_) => self.norm().powi(2),
            GridValues::Matrix(m) => m.iter().map(Complex64::norm_sqr).sum::<f64>() * dq * dq,
        }
    }
}

/// Harmonic-oscillator eigenstate n (m = ω = 1) via the Hermite recurrence.
pub fn oscillator_eigenstate(grid: Grid, n: usize) -> Result<GridState> {
    GridState::from_fn(grid, |q| {
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25) * (-q * q / 2.0).exp();
        for k in 0..n {
            let next = (2.0 / (k as f64 + 1.0)).sqrt() * q * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        Complex64::new(cur, 0.0)
    })
}

/// Gaussian packet of width `sigma` centred at `center` with phase e^{i·momentum·q}.
pub fn gaussian_packet(grid: Grid, center: f64, momentum: f64, sigma: f64) -> Result<GridState> {
    GridState::from_fn(grid, |q| {
        let x = (q - center) / sigma;
        Complex64::from_polar((-x * x / 2.0).exp(), momentum * q)
    })
}

/// W(p, q) on the reciprocal phase-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub grid: Grid,
    /// `values[(k, i)] = W(p_k, q_i)`.
    pub values: nalgebra::DMatrix<f64>,
    /// Largest imaginary part discarded by the transform.
    pub max_imaginary: f64,
}

impl WignerGrid {
    pub fn q_points(&self) -> Vec<f64> {
        self.grid.q_points()
    }

    pub fn p_points(&self) -> Vec<f64> {
        self.grid.p_points()
    }

    /// W at grid point (p_k, q_i).
    pub fn at(&self, k: usize, i: usize) -> f64 {
        self.values[(k, i)]
    }

    /// W(p, q) for on-grid coordinates.
    pub fn value(&self, p: f64, q: f64) -> Option<f64> {
        let i = self.grid.index_of(q)?;
        let kf = p / self.grid.dp() + (self.grid.n_points / 2) as f64;
        let k = kf.round();
        if (kf - k).abs() > 1e-9 || k < 0.0 || k as usize >= self.grid.n_points {
            return None;
        }
        Some(self.values[(k as usize, i)])
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// Σ W Δp Δq.
    pub fn normalization(&self) -> f64 {
        self.values.sum() * self.grid.dp() * self.grid.dq()
    }

    /// 2π Σ W² Δp Δq, which equals tr ρ².
    pub fn purity(&self) -> f64 {
        2.0 * PI * self.values.iter().map(|w| w * w).sum::<f64>() * self.grid.dp() * self.grid.dq()
    }

    /// Long-format CSV with header `q,p,W`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "p", "W"])?;
        let (qs, ps) = (self.q_points(), self.p_points());
        for (i, q) in qs.iter().enumerate() {
            for (k, p) in ps.iter().enumerate() {
                w.write_record([fmt_f64(*q), fmt_f64(*p), fmt_f64(self.values[(k, i)])])?;
            }
        }
        w.flush()
    }

    /// One JSON header line (grid metadata, terminated by `\n`) followed by
    /// `n_p × n_q` little-endian f64 values, row-major with p as the row index.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = BinaryHeader {
            format: "decolab-wigner-f64le".into(),
            layout: "row-major[p][q]".into(),
            q_min: self.grid.q_min,
            dq: self.grid.dq(),
            n_q: self.grid.n_points,
            p_min: self.grid.p(0),
            dp: self.grid.dp(),
            n_p: self.grid.n_points,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for k in 0..self.values.nrows() {
            for i in 0..self.values.ncols() {
                out.write_all(&self.values[(k, i)].to_le_bytes())?;
            }
        }
        out.flush()
    }
}

/// Header of the binary Wigner dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryHeader {
    pub format: String,
    pub layout: String,
    pub q_min: f64,
    pub dq: f64,
    pub n_q: usize,
    pub p_min: f64,
    pub dp: f64,
    pub n_p: usize,
}

/// Wigner function on the reciprocal grid via one FFT per q column.
///
/// With `q_i` on the grid, the x integral becomes
/// `W(p_k, q_i) = (Δq/π) Σ_j e^{2 i p_k j Δq} ρ(q_{i+j}, q_{i−j})`,
/// a length-n inverse DFT over j. Columns are independent, so the result
/// does not depend on how they are scheduled across threads.
pub fn wigner_transform(state: &GridState) -> Result<WignerGrid> {
    if let GridValues::Matrix(m) = &state.values {
        let deviation = hermitian_deviation(m);
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
    }
    let boundary = state.boundary_amplitude();
    if boundary > BOUNDARY_TOL {
        return Err(Error::GridTooNarrow { value: boundary });
    }
    let grid = state.grid;
    let n = grid.n_points;
    let half = (n / 2) as i64;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let scale = grid.dq() / PI;
    let columns: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut buf = vec![ZERO; n];
            for j in -half..half {
                buf[j.rem_euclid(n as i64) as usize] = state.element(i as i64 + j, i as i64 - j);
            }
            fft.process(&mut buf);
            let mut column = vec![0.0; n];
            let mut imag = 0.0_f64;
            for (k, slot) in column.iter_mut().enumerate() {
                // p index k ↔ frequency k − n/2
                let freq = (k as i64 - half).rem_euclid(n as i64) as usize;
                let z = buf[freq] * scale;
                *slot = z.re;
                imag = imag.max(z.im.abs());
            }
            (column, imag)
        })
        .collect();
    let mut values = nalgebra::DMatrix::zeros(n, n);
    let mut max_imaginary = 0.0_f64;
    for (i, (column, imag)) in columns.into_iter().enumerate() {
        values.set_column(i, &nalgebra::DVector::from_vec(column));
        max_imaginary = max_imaginary.max(imag);
    }
    Ok(WignerGrid { grid, values, max_imaginary })
}

/// Σ_{p,q}(z, z') = (1/2π) e^{ip(z−z')} δ(q − (z+z')/2) on the grid.
///
/// Pair midpoints (z+z')/2 of grid points fall on a lattice of spacing Δq/2,
/// so δ is a Kronecker symbol divided by Δq/2. `q`, `z` and `z'` must be grid
/// points.
pub fn pauli_kernel_value(grid: &Grid, p: f64, q: f64, z: f64, z_prime: f64) -> Result<Complex64> {
    let (Some(a), Some(b), Some(i)) =
        (grid.lattice_coordinate(z), grid.lattice_coordinate(z_prime), grid.lattice_coordinate(q))
    else {
        return Err(Error::OffGridMidpoint);
    };
    if a + b != 2 * i {
        return Ok(ZERO);
    }
    let delta = 2.0 / grid.dq();
    Ok(Complex64::from_polar(delta / (2.0 * PI), p * (z - z_prime)))
}

/// W(p, q_i) as the full contraction Σ_{a,b} Δq² Σ_{p,q}(z_a, z_b) ρ(z_a, z_b).
///
/// Quadratic in the grid size per point; meant for checks, not production.
pub fn wigner_via_kernel(state: &GridState, p: f64, q_index: usize) -> Result<f64> {
    let grid = state.grid;
    let q = grid.q(q_index);
    let dq = grid.dq();
    let n = grid.n_points;
    let mut acc = ZERO;
    for a in 0..n {
        for b in 0..n {
            let k = pauli_kernel_value(&grid, p, q, grid.q(a), grid.q(b))?;
            if k != ZERO {
                acc += k * state.element(a as i64, b as i64);
            }
        }
    }
    Ok((acc * dq * dq).re)
}

/// Position density ∫W dp and momentum density ∫W dq.
///
/// With ρ(z,z') = ψ(z)ψ*(z') and the e^{+2ipx} kernel, the momentum density
/// is |ψ̃(−p)|² for ψ̃(p) = (2π)^{-1/2}∫e^{−ipq}ψ(q)dq.
pub fn marginals(w: &WignerGrid) -> (Vec<f64>, Vec<f64>) {
    let (dp, dq) = (w.grid.dp(), w.grid.dq());
    let position = (0..w.values.ncols()).map(|i| w.values.column(i).sum() * dp).collect();
    let momentum = (0..w.values.nrows()).map(|k| w.values.row(k).sum() * dq).collect();
    (position, momentum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(-1.0, 1.0, 100).is_err());
        assert!(Grid::new(1.0, -1.0, 128).is_err());
        let g = Grid::standard();
        assert_eq!(g.dq(), 0.0625);
        assert_eq!(g.q(128), 0.0);
        assert_eq!(g.p(128), 0.0);
        assert_eq!(g.index_of(0.0), Some(128));
        assert_eq!(g.index_of(0.03), None);
    }

    #[test]
    fn kernel_on_and_off_peak() {
        let g = Grid::standard();
        let on = pauli_kernel_value(&g, 1.3, 0.5, 0.5, 0.5).unwrap();
        assert!((on - Complex64::new(1.0 / (PI * g.dq()), 0.0)).norm() < 1e-12);
        assert_eq!(pauli_kernel_value(&g, 1.3, 0.5, 0.5, 0.625).unwrap(), ZERO);
        let phase = pauli_kernel_value(&g, 2.0, 0.0, 0.25, -0.25).unwrap();
        assert!((phase.arg() - 1.0).abs() < 1e-12);
        assert_eq!(pauli_kernel_value(&g, 0.0, 0.0, 0.01, 0.0), Err(Error::OffGridMidpoint));
    }

    #[test]
    fn too_narrow_grid_rejected() {
        let g = Grid::new(-2.0, 2.0, 64).unwrap();
        let s = oscillator_eigenstate(g, 0).unwrap();
        assert!(matches!(wigner_transform(&s), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn non_hermitian_matrix_rejected() {
        let g = Grid::new(-8.0, 8.0, 16).unwrap();
        let mut m = CMatrix::identity(16, 16).unscale(g.dq() * 16.0);
        m[(1, 2)] = Complex64::new(0.1, 0.0);
        assert!(matches!(GridState::density(g, m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn binary_dump_has_header_then_payload() {
        let g = Grid::new(-8.0, 8.0, 32).unwrap();
        let w = wigner_transform(&oscillator_eigenstate(g, 0).unwrap()).unwrap();
        let mut buf = Vec::new();
        w.write_binary(&mut buf).unwrap();
        let split = buf.iter().position(|&b| b == b'\n').unwrap();
        let header: BinaryHeader = serde_json::from_slice(&buf[..split]).unwrap();
        assert_eq!(header.n_q, 32);
        let payload = &buf[split + 1..];
        assert_eq!(payload.len(), 32 * 32 * 8);
        let first = f64::from_le_bytes(payload[..8].try_into().unwrap());
        assert_eq!(first, w.at(0, 0));
    }
}
