use decolab::entanglement::shannon_entropy;
use decolab::histories::{pauli_master_evolve, RateMatrix};
use decolab::Result;

fn main() -> Result<()> {
    // balanced rates: every row sum equals the matching column sum
    let rates = RateMatrix::from_rows(&[
        vec![0.0, 1.0, 0.5],
        vec![1.0, 0.0, 0.2],
        vec![0.5, 0.2, 0.0],
    ])?;
    let p0 = [1.0, 0.0, 0.0];

    println!("   t     p0       p1       p2       H (nats)");
    for k in 0..=10 {
        let t = 0.25 * k as f64;
        let p = pauli_master_evolve(&p0, &rates, t)?;
        println!("{t:5.2}  {:.5}  {:.5}  {:.5}  {:.5}", p[0], p[1], p[2], shannon_entropy(&p));
    }
    println!("ln 3 = {:.5}", 3f64.ln());
    Ok(())
}
