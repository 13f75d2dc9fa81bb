//! Spectra of sentences over addition and the sparse sequences built from
//! the game parameters.

use efgame::logic::parse_formula;
use efgame::presburger::{check_semilinear, compute_spectrum, generate_q, SparseSetup};
use efgame::structure::Signature;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sig = Signature::new().with_plus();
    // "the largest element is even", with the order on {0..N}
    let even = parse_formula("(E x (E y (and (A z (or (< z y) (= z y))) (+ x x y))))", &sig)?;
    let cert = compute_spectrum(&even, 24)?;
    let bits: String = cert.spectrum.iter().map(|&b| if b { '1' } else { '0' }).collect();
    println!("spectrum {bits}");
    println!("empirical {:?}, semilinear within bounds: {:?}", cert.empirical, check_semilinear(&cert));

    for (i, q) in generate_q(3)?.iter().enumerate() {
        println!("q{i} = {q}");
    }
    let setup = SparseSetup::least_above(1, 0.into(), 4)?;
    println!("level-1 sparse prefix {:?}", setup.p);
    Ok(())
}
