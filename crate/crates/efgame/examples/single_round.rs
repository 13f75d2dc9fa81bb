//! The single-round variant: the spoiler names all r points at once.

use efgame::game::{
    play_single_round_game, single_round_oracle, ExhaustiveSingleRoundDuplicator,
    ExhaustiveSingleRoundSpoiler,
};
use efgame::structure::OrderedStructure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (p, q) in [(2, 3), (3, 4), (4, 6)] {
        let (a, b) = (OrderedStructure::linear_order(p), OrderedStructure::linear_order(q));
        let t = play_single_round_game(&a, &b, 2, &mut ExhaustiveSingleRoundSpoiler, &mut ExhaustiveSingleRoundDuplicator)?;
        println!(
            "{p} vs {q}, 2 points: oracle {} / played {}",
            single_round_oracle(&a, &b, 2)?,
            t.duplicator_won
        );
    }
    Ok(())
}
