//! Single-round strategy translation against an arbitrary context, checked
//! by the exhaustive spoiler and the single-round oracle.

use efgame::game::{play_single_round_game, single_round_oracle, ExhaustiveSingleRoundSpoiler};
use efgame::ramsey::{translate_strategy_bcefo, ArbContext};
use efgame::structure::parse_structure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = parse_structure("efgame-structure 1\nrelation R 1\nuniverse points 0 3 5\ntuples R\n0\n3\nend\n")?;
    let ctx = ArbContext::new(0, 30).with_predicate("P", 1, [vec![7]])?;
    let t = translate_strategy_bcefo(&a, &a, 1, &ctx)?;
    println!("special positions {:?}, virtual moves {}", t.positions.points, t.r);
    let mut du = t.duplicator.clone();
    let play = play_single_round_game(&t.a, &t.b, 1, &mut ExhaustiveSingleRoundSpoiler, &mut du)?;
    println!("duplicator won {} (oracle {})", play.duplicator_won, single_round_oracle(&t.a, &t.b, 1)?);
    Ok(())
}
