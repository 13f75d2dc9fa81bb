//! Encodes a dense-order database as a finite structure over its canonical
//! cuts, decodes it again, and moves a sentence across the encoding.

use efgame::logic::parse_formula;
use efgame::representation::{
    apply_interpretation, canonical_cuts, evaluate_dense, family_sizes, interpretation_phi, parse_dense,
    rep_structure, rewrite_sentence,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = parse_dense("efgame-dense 1\nrelation R 2\nconstant c 2\ndefine R x y : (and (< x y) (< y 5))\n")?;
    println!("canonical cuts {:?}", canonical_cuts(&a));
    let rep = rep_structure(&a)?;
    for (family, n) in family_sizes(&rep).into_iter().filter(|(_, n)| *n > 0) {
        println!("  {family}: {n} tuples");
    }

    let phi = interpretation_phi(&a.signature)?;
    let encoded = rep.to_dense()?;
    println!("decodes back: {}", apply_interpretation(&phi, &encoded)?.same_as(&a));

    let chi = parse_formula("(E x (E y (and (rel R x y) (< c y))))", &a.signature)?;
    let moved = rewrite_sentence(&phi, &chi)?;
    println!("{chi}: {} directly, {} on the encoding", evaluate_dense(&chi, &a, &[])?, evaluate_dense(&moved, &encoded, &[])?);
    Ok(())
}
