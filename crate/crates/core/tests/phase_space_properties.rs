use decolab::linalg::CMatrix;
use decolab::wigner::{gaussian_packet, oscillator_eigenstate, wigner_transform, Grid, GridState};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(-8.0, 8.0, 128).unwrap()
}

fn cat(offset: f64) -> GridState {
    let g = |x: f64| (-x * x / 2.0).exp();
    GridState::from_fn(grid(), |q| Complex64::new(g(q - offset) + g(q + offset), 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wigner_is_real_for_hermitian_input(center in -1.0f64..1.0, momentum in -3.0f64..3.0, sigma in 0.6f64..1.0) {
        let state = gaussian_packet(grid(), center, momentum, sigma).unwrap();
        let w = wigner_transform(&state).unwrap();
        prop_assert!(w.max_imaginary < 1e-10);
    }

    #[test]
    fn wigner_is_linear_in_the_state(a in -1.5f64..1.5, b in -1.5f64..1.5, weight in 0.0f64..1.0) {
        let left = gaussian_packet(grid(), a, 0.5, 1.0).unwrap();
        let right = gaussian_packet(grid(), b, -1.0, 0.8).unwrap();
        let mix = GridState::mixture(&[(weight, &left), (1.0 - weight, &right)]).unwrap();
        let (wm, wl, wr) = (wigner_transform(&mix).unwrap(), wigner_transform(&left).unwrap(), wigner_transform(&right).unwrap());
        let combo = &wl.values * weight + &wr.values * (1.0 - weight);
        let err = (&wm.values - combo).abs().max();
        prop_assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn purity_identity_holds(center in -1.0f64..1.0, sigma in 0.6f64..1.0, weight in 0.0f64..1.0, n in 0usize..4) {
        let packet = gaussian_packet(grid(), center, 0.0, sigma).unwrap();
        let eigen = oscillator_eigenstate(grid(), n).unwrap();
        let mix = GridState::mixture(&[(weight, &packet), (1.0 - weight, &eigen)]).unwrap();
        for s in [&packet, &eigen, &mix] {
            let w = wigner_transform(s).unwrap();
            prop_assert!((w.purity() - s.purity()).abs() <= 1e-5, "{} vs {}", w.purity(), s.purity());
        }
    }

    #[test]
    fn superposition_fringes_go_negative_but_mixture_does_not(offset in 1.2f64..1.8) {
        let sup = wigner_transform(&cat(offset)).unwrap();
        prop_assert!(sup.min() < -1e-3, "superposition min {}", sup.min());
        let left = gaussian_packet(grid(), -offset, 0.0, 1.0).unwrap();
        let right = gaussian_packet(grid(), offset, 0.0, 1.0).unwrap();
        let mix = wigner_transform(&GridState::mixture(&[(0.5, &left), (0.5, &right)]).unwrap()).unwrap();
        prop_assert!(mix.min() >= -1e-9 * mix.max(), "mixture min {}", mix.min());
    }
}

#[test]
fn fringe_minimum_sits_between_the_peaks() {
    let offset = 1.5;
    let w = wigner_transform(&cat(offset)).unwrap();
    let mut at = (0, 0);
    for k in 0..w.values.nrows() {
        for i in 0..w.values.ncols() {
            if w.at(k, i) < w.at(at.0, at.1) {
                at = (k, i);
            }
        }
    }
    let (p, q) = (w.grid.p(at.0), w.grid.q(at.1));
    assert!(q.abs() < 0.2, "minimum at q = {q}");
    // first fringe trough at |p| = π/(2·offset)
    assert!((p.abs() - std::f64::consts::PI / (2.0 * offset)).abs() < 0.2, "minimum at p = {p}");
}

#[test]
fn non_hermitian_density_rejected() {
    let mut m = CMatrix::zeros(128, 128);
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    assert!(GridState::density(grid(), m).is_err());
}
