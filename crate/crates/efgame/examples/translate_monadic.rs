//! Strategy translation against a monadic context: the database moves onto
//! uniform positions of the context predicate.

use efgame::game::{all_moves, sweep, Oracle};
use efgame::ramsey::{translate_strategy_monadic, MonadicContext, PredicateSpec};
use efgame::structure::parse_structure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = parse_structure("efgame-structure 1\nrelation R 1\nuniverse points 0 3 5\ntuples R\n0\n3\nend\n")?;
    let b = parse_structure("efgame-structure 1\nrelation R 1\nuniverse points 1 9\ntuples R\n1\n9\nend\n")?;
    let ctx = MonadicContext::new(0, 40).with_predicate("P", &PredicateSpec::Progression { offset: 2, stride: 3 })?;
    let t = translate_strategy_monadic(&a, &b, 2, &ctx)?;
    println!("special positions {:?}", t.positions.points);
    let mut du = t.duplicator.clone();
    let rep = sweep(&t.a, &t.b, 2, &mut du, &mut all_moves(Oracle::default()), 1 << 24)?;
    println!("{} spoiler lines, lost: {}", rep.plays, rep.loss.is_some());
    Ok(())
}
