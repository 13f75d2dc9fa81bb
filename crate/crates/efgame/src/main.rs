use clap::Parser;
use efgame::cli::{run, RunConfig};

fn main() {
    let report = run(&RunConfig::parse());
    print!("{}", report.output);
    std::process::exit(report.code);
}
