//! Weight of the "deviant" branches whose frequencies stray from Born
//! probabilities, as the number of trials grows.

use decolab::histories::graham_deviant_norm;
use decolab::Result;

fn main() -> Result<()> {
    let born = [0.3, 0.7];
    println!("      N   eps=0.2       eps=0.1       eps=0.05");
    for n in [10u64, 100, 1_000, 10_000] {
        let row: Vec<String> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&eps| graham_deviant_norm(&born, n, eps).map(|v| format!("{v:.4e}")))
            .collect::<Result<_>>()?;
        println!("{n:>7}   {}", row.join("    "));
    }
    Ok(())
}
