mod common;

use common::*;
use decolab::dynamics::{
    luders_project_pure, outcome_probabilities, schrodinger_evolve, schrodinger_evolve_with, Hamiltonian, Propagation,
};
use decolab::entanglement::{decoherence_factor, ensemble_entropy, linear_entropy, schmidt_decompose};
use decolab::hilbert::{
    born_probability, build_observable, expectation, partial_trace, tensor, DensityOperator, Observable, Projector,
    StateVector, TensorSpace,
};
use decolab::linalg::{basis_vector, outer, trace, CMatrix};
use decolab::measurement::{
    chain_propagate, chain_report, premeasure, ApparatusModel, ChainSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn bipartite(da: usize, db: usize) -> TensorSpace {
    TensorSpace::new([("sys", da), ("env", db)]).unwrap()
}

fn random_basis(rng: &mut TestRng, space: &TensorSpace) -> Vec<StateVector> {
    let u = random_unitary(rng, space.total_dim());
    (0..space.total_dim()).map(|k| StateVector::new(space.clone(), u.column(k).into_owned()).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>(), da in 1usize..5, db in 1usize..5, rank in 1usize..4) {
        let mut rng = rng(seed);
        let rho = random_density(&mut rng, &bipartite(da, db), rank);
        for keep in [["sys"], ["env"]] {
            let r = partial_trace(&rho, &keep).unwrap();
            prop_assert!((r.trace() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_is_linear(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, w in 0.0f64..1.0) {
        let mut rng = rng(seed);
        let space = bipartite(da, db);
        let (a, b) = (random_density(&mut rng, &space, 2), random_density(&mut rng, &space, 1));
        let mixed = DensityOperator::mixture(&[w, 1.0 - w], &[a.clone(), b.clone()]).unwrap();
        let lhs = partial_trace(&mixed, &["sys"]).unwrap();
        let rhs = partial_trace(&a, &["sys"]).unwrap().matrix().scale(w)
            + partial_trace(&b, &["sys"]).unwrap().matrix().scale(1.0 - w);
        prop_assert!(max_abs_diff(lhs.matrix(), &rhs) <= 1e-12);
    }

    #[test]
    fn pure_state_marginals_share_spectrum(seed in any::<u64>(), da in 1usize..6, db in 1usize..6) {
        let mut rng = rng(seed);
        let psi = random_state(&mut rng, &bipartite(da, db));
        let nonzero = |r: DensityOperator| {
            let mut v: Vec<f64> = r.eigenvalues().into_iter().filter(|x| *x > 1e-10).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        };
        let (a, b) = (nonzero(partial_trace(&psi, &["sys"]).unwrap()), nonzero(partial_trace(&psi, &["env"]).unwrap()));
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn observable_expectation_matches_spectral_sum(seed in any::<u64>(), d in 2usize..7) {
        let mut rng = rng(seed);
        let space = TensorSpace::single("s", d).unwrap();
        let basis = random_basis(&mut rng, &space);
        let scale: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let a = build_observable(&basis, &scale).unwrap();
        let psi = random_state(&mut rng, &space);
        let spectral: f64 = basis.iter().zip(&scale).map(|(n, an)| born_probability(n, &psi).unwrap() * an).sum();
        let direct = psi.amplitudes().dotc(&(a.matrix() * psi.amplitudes())).re;
        let e = expectation(&a, &psi).unwrap();
        prop_assert!((e - spectral).abs() <= 1e-12);
        prop_assert!((direct - spectral).abs() <= 1e-12);
    }

    #[test]
    fn born_probabilities_sum_to_one(seed in any::<u64>(), d in 1usize..9) {
        let mut rng = rng(seed);
        let space = TensorSpace::single("s", d).unwrap();
        let psi = random_state(&mut rng, &space);
        let total: f64 = random_basis(&mut rng, &space).iter().map(|n| born_probability(n, &psi).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn evolution_preserves_inner_products(seed in any::<u64>(), d in 2usize..12, t in 0.0f64..10.0) {
        let mut rng = rng(seed);
        let space = TensorSpace::single("s", d).unwrap();
        let h = Hamiltonian::new(space.clone(), random_hermitian(&mut rng, d)).unwrap();
        let (phi, psi) = (random_state(&mut rng, &space), random_state(&mut rng, &space));
        let before = phi.inner(&psi).unwrap();
        let after = schrodinger_evolve(&h, &phi, t).unwrap().inner(&schrodinger_evolve(&h, &psi, t).unwrap()).unwrap();
        prop_assert!((before - after).norm() <= 1e-10);
    }

    #[test]
    fn evolution_conserves_energy(seed in any::<u64>(), d in 2usize..12, t in 0.0f64..10.0) {
        let mut rng = rng(seed);
        let space = TensorSpace::single("s", d).unwrap();
        let m = random_hermitian(&mut rng, d);
        let h = Hamiltonian::new(space.clone(), m.clone()).unwrap();
        let energy = Observable::new(space.clone(), m).unwrap();
        let psi = random_state(&mut rng, &space);
        let e0 = expectation(&energy, &psi).unwrap();
        let e1 = expectation(&energy, &schrodinger_evolve(&h, &psi, t).unwrap()).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-10);
        // the implicit scheme is unitary too, so it conserves energy at any step size
        let cn = schrodinger_evolve_with(&h, &psi, t, Propagation::CrankNicolson { steps: 7 }).unwrap();
        prop_assert!((expectation(&energy, &cn).unwrap() - e0).abs() <= 1e-10);
    }

    #[test]
    fn luders_projection_is_idempotent(seed in any::<u64>(), d in 2usize..7, rank in 1usize..3) {
        let mut rng = rng(seed);
        let space = TensorSpace::single("s", d).unwrap();
        let basis = random_basis(&mut rng, &space);
        let p = Projector::onto(&basis[..rank.min(d - 1)]).unwrap();
        let psi = random_state(&mut rng, &space);
        let (once, prob) = luders_project_pure(&psi, &p).unwrap();
        prop_assume!(prob > 1e-6);
        let (twice, again) = luders_project_pure(&once, &p).unwrap();
        prop_assert!((again - 1.0).abs() <= 1e-12);
        prop_assert!((once.amplitudes() - twice.amplitudes()).norm() <= 1e-12);
    }

    #[test]
    fn schmidt_entropies_agree_on_both_sides(seed in any::<u64>(), da in 1usize..6, db in 1usize..6) {
        let mut rng = rng(seed);
        let psi = random_state(&mut rng, &bipartite(da, db));
        let s_sys = ensemble_entropy(&partial_trace(&psi, &["sys"]).unwrap());
        let s_env = ensemble_entropy(&partial_trace(&psi, &["env"]).unwrap());
        prop_assert!((s_sys - s_env).abs() <= 1e-10);
        let schmidt = schmidt_decompose(&psi, &["sys"]).unwrap();
        prop_assert!((schmidt.entanglement_entropy() - s_sys).abs() <= 1e-10);
        prop_assert!((schmidt.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn entropies_vanish_together(seed in any::<u64>(), da in 2usize..5, db in 2usize..5, entangled in any::<bool>()) {
        let mut rng = rng(seed);
        let psi = if entangled {
            // maximally entangled along the diagonal
            let k = da.min(db);
            let amps: Vec<f64> = (0..da * db).map(|i| if i % db == i / db && i / db < k { 1.0 } else { 0.0 }).collect();
            StateVector::from_reals(bipartite(da, db), &amps).unwrap().normalize().unwrap()
        } else {
            let a = random_state(&mut rng, &TensorSpace::single("sys", da).unwrap());
            let b = random_state(&mut rng, &TensorSpace::single("env", db).unwrap());
            tensor(&a, &b).unwrap()
        };
        let r = partial_trace(&psi, &["sys"]).unwrap();
        let (lin, ens) = (linear_entropy(&r), ensemble_entropy(&r));
        if entangled {
            prop_assert!(lin > 1e-10 && ens > 1e-10);
        } else {
            prop_assert!(lin <= 1e-10 && ens <= 1e-10);
        }
    }

    #[test]
    fn orthogonal_links_leave_no_coherence(seed in any::<u64>(), n in 2usize..4, links in 1usize..3) {
        let mut rng = rng(seed);
        let psi = random_state(&mut rng, &TensorSpace::single("system", n).unwrap());
        let basis = StateVector::computational_basis(psi.space());
        let spec = ChainSpec::uniform(basis.clone(), links, 0.0, false).unwrap();
        let states = chain_propagate(&spec, &psi).unwrap();
        for s in &states {
            let f = decoherence_factor(&partial_trace(s, &["system"]).unwrap(), &basis).unwrap();
            prop_assert_eq!(f.max_off_diagonal(), 0.0);
        }
    }

    #[test]
    fn coherence_never_grows_along_a_chain(seed in any::<u64>(), gs in proptest::collection::vec(0.0f64..=1.0, 1..5)) {
        let mut rng = rng(seed);
        let psi = random_state(&mut rng, &TensorSpace::single("system", 2).unwrap());
        let basis = StateVector::computational_basis(psi.space());
        let links = gs.iter().enumerate()
            .map(|(i, &g)| ApparatusModel::with_overlap(&format!("link{i}"), 2, g).unwrap())
            .collect();
        let spec = ChainSpec::new(basis.clone(), links, None);
        let report = chain_report(&spec, &chain_propagate(&spec, &psi).unwrap()).unwrap();
        let initial = decoherence_factor(&psi.density().unwrap(), &basis).unwrap().max_off_diagonal();
        let mut prev = initial;
        for row in &report {
            prop_assert!(row.off_diagonal <= prev + 1e-14);
            prev = row.off_diagonal;
        }
    }

    #[test]
    fn chained_populations_are_born_probabilities(seed in any::<u64>(), n in 2usize..4, links in 1usize..3, g in 0.0f64..1.0) {
        let mut rng = rng(seed);
        let psi = random_state(&mut rng, &TensorSpace::single("system", n).unwrap());
        let basis = StateVector::computational_basis(psi.space());
        let spec = ChainSpec::uniform(basis.clone(), links, g, true).unwrap();
        let last = chain_propagate(&spec, &psi).unwrap().pop().unwrap();
        let pops = decoherence_factor(&partial_trace(&last, &["system"]).unwrap(), &basis).unwrap().populations;
        let born = outcome_probabilities(&psi, &basis).unwrap();
        for (a, b) in pops.iter().zip(&born) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn record_conditioned_dynamics_never_recoheres(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = rng(seed);
        let psi = random_state(&mut rng, &TensorSpace::single("system", n).unwrap());
        let basis = StateVector::computational_basis(psi.space());
        let app = ApparatusModel::with_overlap("apparatus", n, 0.0).unwrap();
        let joint = premeasure(&psi, &app, &basis).unwrap();
        let env = random_state(&mut rng, &TensorSpace::single("env", 3).unwrap());
        let joint = tensor(&joint, &env).unwrap();
        // Σ_k |φ_k⟩⟨φ_k| ⊗ W_k on apparatus ⊗ env, identity on the ready state
        let da = n + 1;
        let mut u = CMatrix::zeros(da * 3, da * 3);
        u += outer(&basis_vector(da, 0), &basis_vector(da, 0)).kronecker(&CMatrix::identity(3, 3));
        for k in 1..da {
            let w = random_unitary(&mut rng, 3) * Complex64::from_polar(1.0, rng.random_range(0.0..6.0));
            u += outer(&basis_vector(da, k), &basis_vector(da, k)).kronecker(&w);
        }
        let after = decolab::hilbert::apply_local(&joint, &u, &["apparatus", "env"]).unwrap();
        let f = decoherence_factor(&partial_trace(&after, &["system"]).unwrap(), &basis).unwrap();
        prop_assert!(f.max_off_diagonal() <= 1e-12);
        prop_assert!((after.norm() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn reduced_trace_of_density_matches_trace_helper() {
    let mut rng = rng(5);
    let rho = random_density(&mut rng, &bipartite(3, 2), 2);
    let r = partial_trace(&rho, &["env"]).unwrap();
    assert!((trace(r.matrix()).re - r.trace()).abs() < 1e-15);
}
