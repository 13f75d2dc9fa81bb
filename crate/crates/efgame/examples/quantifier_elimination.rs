//! Quantifier elimination over the dense order, with the result as a
//! region relation over the cuts.

use efgame::logic::{literals, parse_formula};
use efgame::representation::{eliminate_quantifiers, print_region, qe_normalize};
use efgame::structure::Signature;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let texts = ["(E y (and (< x y) (< y 5)))", "(A y (or (< y x) (< 3 y)))", "(E z (and (< x z) (< z w)))"];
    for text in texts {
        let f = parse_formula(text, &Signature::new())?;
        let cuts = literals(&f);
        println!("{f}\n  => {}", eliminate_quantifiers(&f, &cuts)?);
        let vars: Vec<String> = efgame::logic::free_vars(&f).into_iter().collect();
        print!("{}", print_region(&qe_normalize(&f, &vars, &cuts)?));
    }
    Ok(())
}
