use decolab::entanglement::schmidt_decompose;
use decolab::hilbert::{StateVector, TensorSpace};
use decolab::Result;

fn main() -> Result<()> {
    // a qubit entangled with a qutrit, amplitudes row-major over (a, b)
    let space = TensorSpace::new([("a", 2), ("b", 3)])?;
    let psi = StateVector::from_reals(space, &[0.5, 0.1, 0.3, -0.2, 0.6, 0.4])?.normalize()?;

    let schmidt = schmidt_decompose(&psi, &["a"])?;
    println!("rank {}", schmidt.rank());
    for (k, p) in schmidt.probabilities().iter().enumerate() {
        println!("  p_{k} = {p:.6}");
    }
    println!("entanglement entropy {:.6} nats", schmidt.entanglement_entropy());
    println!("linear entropy       {:.6}", schmidt.linear_entropy());

    let back = schmidt.reconstruct()?;
    let err = (back.amplitudes() - psi.amplitudes()).norm();
    println!("reconstruction error {err:.2e}");
    Ok(())
}
