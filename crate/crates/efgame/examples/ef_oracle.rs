//! Decides Ehrenfeucht-Fraisse games on small linear orders and plays one
//! out between minimax players.

use efgame::game::{duplicator_wins_oracle, k_type, play_ef_game, MinimaxDuplicator, MinimaxSpoiler, Oracle};
use efgame::structure::OrderedStructure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Orders of length p and q agree on r rounds iff p = q or both reach 2^r - 1.
    for r in 1..=3 {
        let row: Vec<String> = (1..=8)
            .map(|n| {
                let win = duplicator_wins_oracle(&OrderedStructure::linear_order(n), &OrderedStructure::linear_order(8), r)?;
                Ok(if win { "=".to_string() } else { ".".to_string() })
            })
            .collect::<Result<_, efgame::game::GameError>>()?;
        println!("r={r}  n=1..8 vs 8: {}", row.join(""));
    }

    let (a, b) = (OrderedStructure::linear_order(3), OrderedStructure::linear_order(4));
    println!("2-types equal: {}", k_type(&a, 2)? == k_type(&b, 2)?);
    let oracle = Oracle::default();
    let t = play_ef_game(&a, &b, 2, &mut MinimaxSpoiler { oracle }, &mut MinimaxDuplicator { oracle })?;
    println!("{}", t.to_json());
    Ok(())
}
