//! Game parameters for addition, the anchor conditions, and one round of
//! the duplicator strategy that keeps them.

use efgame::game::Side;
use efgame::presburger::{check_conditions_plain, params, Bounds, CheckMode, StrategyContext};
use num_bigint::BigInt;

fn ints(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for k in 1..=2 {
        let p = params(k)?;
        println!("k={k}: m={} l={} c={} g={}", p.m, p.l, p.c, p.g);
    }
    let level1 = Bounds::level(1)?;
    for (a, b) in [(vec![0, 40], vec![0, 52]), (vec![0, 40], vec![0, 41]), (vec![0, 3], vec![0, 5])] {
        let rep = check_conditions_plain(&ints(&a), &ints(&b), &level1, CheckMode::default())?;
        println!("{a:?} ~ {b:?}: {}", if rep.holds { "conditions hold" } else { "violated" });
    }

    // Level-2 anchors congruent modulo m(2), far apart.
    let m2 = params(2)?.m.require_exact()?;
    let a = vec![BigInt::from(0), BigInt::from(20_000)];
    let b = vec![BigInt::from(0), BigInt::from(20_000) + m2];
    let mut ctx = StrategyContext::plain(2, &a, &b)?;
    let x = BigInt::from(10_000);
    let y = ctx.answer(Side::A, &x)?;
    println!("spoiler {x} in A, duplicator answers {y} in B");
    for (x, y) in ctx.fixed_pairs() {
        println!("  {x} <-> {y}");
    }
    Ok(())
}
