//! Lifts a winning strategy on (N, <, R) to one on (N, <, +, R') where R'
//! places the database on a sparse sequence, then checks it against every
//! relevant spoiler move.

use efgame::game::{play_ef_game, sweep, RandomSpoiler};
use efgame::presburger::{relevant_moves, translate_strategy_plus, SparseSetup};
use efgame::structure::parse_structure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = parse_structure("efgame-structure 1\nrelation R 1\nuniverse points 0 3 5\ntuples R\n0\n3\nend\n")?;
    let b = parse_structure("efgame-structure 1\nrelation R 1\nuniverse points 1 9\ntuples R\n1\n9\nend\n")?;
    let setup = SparseSetup::least_above(1, 0.into(), 4)?;
    let t = translate_strategy_plus(&a, &b, 1, &setup)?;
    println!("sparse prefix {:?}, spoiler window {}", t.duplicator.start.p, t.spoiler_window);

    let mut du = t.duplicator.clone();
    let mut moves = relevant_moves(t.duplicator.clone(), t.spoiler_window.clone());
    let rep = sweep(&t.a, &t.b, 1, &mut du, &mut moves, 1 << 24)?;
    println!("{} spoiler lines, lost: {}", rep.plays, rep.loss.is_some());

    let play = play_ef_game(&t.a, &t.b, 1, &mut RandomSpoiler::new(5), &mut t.duplicator.clone())?;
    println!("{}", play.to_json());
    Ok(())
}
