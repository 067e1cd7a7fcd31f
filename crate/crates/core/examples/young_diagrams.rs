//! Diagram enumeration, irrep dimensions and Kostka numbers.

use ramsey_spectrum::young::{dimension, dimension_su, enumerate_diagrams, kostka, removable_boxes};
use ramsey_spectrum::YoungDiagram;

fn main() -> ramsey_spectrum::Result<()> {
    let (n, d) = (6, 3);
    println!("{:>10} {:>6} {:>6} {:>12}", "lambda", "dim S", "dim U", "K(lambda,1^6)");
    let mut total = 0u64;
    for lambda in enumerate_diagrams(n, d) {
        let ds = dimension(&lambda).to_u64().unwrap();
        let du = dimension_su(&lambda, d)?.to_u64().unwrap();
        let k = kostka(&lambda, &[1; 6])?.to_u64().unwrap();
        total += ds * du;
        println!("{:>10} {ds:>6} {du:>6} {k:>12}", lambda.to_string());
    }
    // Schur–Weyl: the isotypic blocks fill (C^d)^{⊗n}.
    println!("sum dim S * dim U = {total} = {d}^{n} = {}", (d as u64).pow(n as u32));

    let lambda = YoungDiagram::new(vec![4, 2, 1])?;
    print!("removable boxes of {lambda}:");
    for (r, minus) in removable_boxes(&lambda) {
        print!(" row {r} -> {minus}");
    }
    println!();
    Ok(())
}
