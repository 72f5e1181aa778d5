#![allow(dead_code)]

use decolab::hilbert::{DensityOperator, StateVector, TensorSpace};
use decolab::linalg::{hermitian_function, CMatrix, CVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut TestRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_state(rng: &mut TestRng, space: &TensorSpace) -> StateVector {
    let d = space.total_dim();
    let v = CVector::from_fn(d, |_, _| random_complex(rng));
    StateVector::new(space.clone(), v).unwrap().normalize().unwrap()
}

pub fn random_hermitian(rng: &mut TestRng, d: usize) -> CMatrix {
    let x = CMatrix::from_fn(d, d, |_, _| random_complex(rng));
    (&x + x.adjoint()).scale(0.5)
}

pub fn random_unitary(rng: &mut TestRng, d: usize) -> CMatrix {
    let h = random_hermitian(rng, d);
    hermitian_function(&h, |x| Complex64::from_polar(1.0, 3.0 * x))
}

/// Mixture of `rank` random pure states with random weights.
pub fn random_density(rng: &mut TestRng, space: &TensorSpace, rank: usize) -> DensityOperator {
    let raw: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let comps: Vec<DensityOperator> = (0..rank).map(|_| random_state(rng, space).density().unwrap()).collect();
    DensityOperator::mixture(&weights, &comps).unwrap()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
