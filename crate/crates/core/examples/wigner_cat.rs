//! Interference fringes of a cat state versus the corresponding mixture.

use decolab::wigner::{gaussian_packet, marginals, wigner_transform, Grid, GridState};
use decolab::Result;
use num_complex::Complex64;

fn main() -> Result<()> {
    let grid = Grid::standard();
    let offset = 1.5;
    let left = gaussian_packet(grid, -offset, 0.0, 1.0)?;
    let right = gaussian_packet(grid, offset, 0.0, 1.0)?;

    let cat = GridState::from_fn(grid, |q| {
        let g = |x: f64| (-x * x / 2.0).exp();
        Complex64::new(g(q - offset) + g(q + offset), 0.0)
    })?;
    let mixture = GridState::mixture(&[(0.5, &left), (0.5, &right)])?;

    for (name, state) in [("superposition", &cat), ("mixture", &mixture)] {
        let w = wigner_transform(state)?;
        let (pq, _) = marginals(&w);
        let dq = grid.dq();
        let norm: f64 = pq.iter().sum::<f64>() * dq;
        println!("{name}");
        println!("  min W        {:+.6}", w.min());
        println!("  max W        {:+.6}", w.max());
        println!("  W(0, 0)      {:+.6}", w.value(0.0, 0.0).unwrap_or(f64::NAN));
        println!("  purity       {:.6} (from W) vs {:.6}", w.purity(), state.purity());
        println!("  ∫ P(q) dq    {norm:.6}");
    }
    Ok(())
}
