mod common;

use common::*;
use decolab::dynamics::Hamiltonian;
use decolab::entanglement::{ensemble_entropy, shannon_entropy};
use decolab::hilbert::{DensityOperator, ProjectorSet, StateVector, TensorSpace};
use decolab::histories::{
    all_history_probabilities, decohere_projectors, graham_deviant_norm, pauli_master_evolve, HistoryEvaluator,
    HistorySpec, RateMatrix,
};
use decolab::ledger::{classical_ledger, quantum_collapse_ledger, ClassicalJoint};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn random_simplex(rng: &mut TestRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Symmetric rates are always balanced.
fn random_rates(rng: &mut TestRng, n: usize) -> RateMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = rng.random_range(0.0..2.0);
            m[(i, j)] = r;
            m[(j, i)] = r;
        }
    }
    RateMatrix::new(m).unwrap()
}

fn random_history_spec(rng: &mut TestRng, d: usize, slices: usize) -> HistorySpec {
    let space = TensorSpace::single("s", d).unwrap();
    let initial = random_density(rng, &space, 2);
    let hamiltonian = Hamiltonian::new(space.clone(), random_hermitian(rng, d)).unwrap();
    let times: Vec<f64> = (0..slices)
        .scan(0.0, |t, _| {
            *t += rng.random_range(0.2..1.0);
            Some(*t)
        })
        .collect();
    let sets = (0..slices)
        .map(|_| {
            let u = random_unitary(rng, d);
            let basis: Vec<StateVector> =
                (0..d).map(|k| StateVector::new(space.clone(), u.column(k).into_owned()).unwrap()).collect();
            ProjectorSet::from_basis(&basis).unwrap()
        })
        .collect();
    HistorySpec::new(0.0, initial, hamiltonian, times, sets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decoherence_never_purifies(seed in any::<u64>(), d in 2usize..6, rank in 1usize..4) {
        let mut rng = rng(seed);
        let space = TensorSpace::single("s", d).unwrap();
        let rho = random_density(&mut rng, &space, rank);
        let set = ProjectorSet::local_computational(&space, "s").unwrap();
        let out = decohere_projectors(&rho, &set).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-12);
        prop_assert!(out.purity() <= rho.purity() + 1e-12);
        prop_assert!(ensemble_entropy(&out) >= ensemble_entropy(&rho) - 1e-10);
        // decohering twice changes nothing
        let again = decohere_projectors(&out, &set).unwrap();
        prop_assert!(max_abs_diff(again.matrix(), out.matrix()) <= 1e-14);
    }

    #[test]
    fn master_equation_stays_on_simplex(seed in any::<u64>(), n in 2usize..7, t in 0.0f64..5.0) {
        let mut rng = rng(seed);
        let rates = random_rates(&mut rng, n);
        let p0 = random_simplex(&mut rng, n);
        let p = pauli_master_evolve(&p0, &rates, t).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
        // symmetric rates: entropy cannot decrease
        prop_assert!(shannon_entropy(&p.iter().map(|x| x.max(0.0)).collect::<Vec<_>>()) >= shannon_entropy(&p0) - 1e-10);
    }

    #[test]
    fn master_equation_is_a_semigroup(seed in any::<u64>(), n in 2usize..6, s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let mut rng = rng(seed);
        let rates = random_rates(&mut rng, n);
        let p0 = random_simplex(&mut rng, n);
        let direct = pauli_master_evolve(&p0, &rates, s + t).unwrap();
        let stepped = pauli_master_evolve(&pauli_master_evolve(&p0, &rates, s).unwrap(), &rates, t).unwrap();
        for (a, b) in direct.iter().zip(&stepped) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn history_probabilities_sum_to_one(seed in any::<u64>(), d in 2usize..4, slices in 1usize..4) {
        let mut rng = rng(seed);
        let spec = random_history_spec(&mut rng, d, slices);
        let probs = all_history_probabilities(&spec).unwrap();
        prop_assert_eq!(probs.len(), d.pow(slices as u32));
        prop_assert!(probs.iter().all(|(_, p)| *p >= -1e-14));
        prop_assert!((probs.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() <= 1e-10);
        // diagonal of the decoherence functional is the probability
        let eval = HistoryEvaluator::new(&spec).unwrap();
        let (h, p) = &probs[probs.len() / 2];
        prop_assert!((eval.decoherence_functional(h, h).unwrap() - Complex64::new(*p, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn deviant_norm_shrinks_with_tolerance(p in 0.05f64..0.95, n in 1u64..200, e1 in 0.01f64..0.5, e2 in 0.01f64..0.5) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let a = graham_deviant_norm(&[p, 1.0 - p], n, lo).unwrap();
        let b = graham_deviant_norm(&[p, 1.0 - p], n, hi).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn relabelling_conserves_ensemble_entropy(seed in any::<u64>(), n in 2usize..5, shift in 0usize..5) {
        let mut rng = rng(seed);
        let joint = ClassicalJoint::prepared(&random_simplex(&mut rng, n), n, n).unwrap();
        let moved = joint
            .permute(|s, m, e| ((s + shift) % n, (m + s) % n, (e + m) % n))
            .unwrap();
        prop_assert!((moved.entropy() - joint.entropy()).abs() <= 1e-12);
    }

    #[test]
    fn classical_ledger_balances(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng(seed);
        let p = random_simplex(&mut rng, n);
        let h = shannon_entropy(&p);
        let rows = classical_ledger(&p).unwrap();
        let (initial, measured, observed, reset) = (&rows[0], &rows[1], &rows[2], &rows[3]);
        prop_assert!((measured.s_ensemble - initial.s_ensemble).abs() <= 1e-12);
        prop_assert!((measured.s_ensemble - observed.s_ensemble - observed.information).abs() <= 1e-12);
        prop_assert!((observed.information - h).abs() <= 1e-12);
        prop_assert!(reset.s_physical - observed.s_physical >= h - 1e-12);
        for r in &rows {
            prop_assert!(r.s_physical >= r.s_ensemble - 1e-12);
        }
    }

    #[test]
    fn quantum_ledger_mixture_matches_decohered_system(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = rng(seed);
        let psi = random_state(&mut rng, &TensorSpace::single("s", n).unwrap());
        let c: Vec<Complex64> = psi.amplitudes().iter().copied().collect();
        let rows = quantum_collapse_ledger(&c).unwrap();
        // the premeasured-then-decohered ensemble has the entropy of the system decohered on its own
        let set = ProjectorSet::local_computational(psi.space(), "s").unwrap();
        let alone = decohere_projectors(&psi.density().unwrap(), &set).unwrap();
        prop_assert!((rows[2].s_ensemble - ensemble_entropy(&alone)).abs() <= 1e-10);
        prop_assert!((rows[3].information - rows[2].s_ensemble).abs() <= 1e-10);
    }
}

#[test]
fn unbalanced_rates_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    assert!(RateMatrix::new(m).is_err());
}

#[test]
fn maximally_mixed_start_is_stationary() {
    let mut rng = rng(7);
    let rates = random_rates(&mut rng, 4);
    let p = pauli_master_evolve(&[0.25; 4], &rates, 3.0).unwrap();
    assert!(p.iter().all(|x| (x - 0.25).abs() <= 1e-12));
    let rho = DensityOperator::maximally_mixed(TensorSpace::single("s", 4).unwrap());
    let set = ProjectorSet::local_computational(rho.space(), "s").unwrap();
    assert!(max_abs_diff(decohere_projectors(&rho, &set).unwrap().matrix(), rho.matrix()) <= 1e-15);
}
