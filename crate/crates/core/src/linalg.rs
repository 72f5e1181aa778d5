//! Dense complex linear-algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Validity tolerance for Hermiticity, trace, normalization and positivity.
pub const VALIDITY_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of |M − M†|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Largest entry of |U†U − 1|.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    let deviation = hermitian_deviation(m);
    if deviation > VALIDITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    let deviation = unitary_deviation(u);
    if deviation > VALIDITY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
///
/// The input is symmetrized first so rounding-level anti-Hermitian noise does
/// not leak into the spectrum.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// f(M) for Hermitian M, through its spectral decomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let fk = f(lambda);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= fk;
        }
    }
    scaled * vectors.adjoint()
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().copied().sum()
}

/// Largest entry of |G − 1| for the Gram matrix of `vectors`.
pub fn gram_deviation(vectors: &[CVector]) -> f64 {
    let mut dev = 0.0_f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((a.dotc(b) - target).norm());
        }
    }
    dev
}

/// Extends an orthonormal family to an orthonormal basis of C^dim by
/// Gram–Schmidt over the standard basis vectors, in index order.
pub fn complete_basis(vectors: &[CVector], dim: usize) -> Result<Vec<CVector>> {
    let deviation = gram_deviation(vectors);
    if deviation > VALIDITY_TOL {
        return Err(Error::BasisNotOrthonormal { deviation });
    }
    let mut basis: Vec<CVector> = vectors.to_vec();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = basis_vector(dim, k);
        // two passes keep the completion orthonormal to rounding
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v.unscale(norm));
        }
    }
    Ok(basis)
}

/// Unitary U with U|in_k⟩ = |out_k⟩, completed on the orthogonal complements
/// by [`complete_basis`].
pub fn isometry_completion(inputs: &[CVector], outputs: &[CVector], dim: usize) -> Result<CMatrix> {
    if inputs.len() != outputs.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), found: outputs.len() });
    }
    for v in inputs.iter().chain(outputs) {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
    }
    let ins = complete_basis(inputs, dim)?;
    let outs = complete_basis(outputs, dim)?;
    let mut u = CMatrix::zeros(dim, dim);
    for (i, o) in ins.iter().zip(&outs) {
        u += outer(o, i);
    }
    Ok(u)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |x| c(x.max(0.0).sqrt(), 0.0))
}
