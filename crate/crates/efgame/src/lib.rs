//! Ehrenfeucht-Fraisse games on ordered structures, winning strategies for
//! Presburger-style embeddings, Ramsey-based collapse strategies and
//! finite representations of dense-order databases.

pub mod cli;
pub mod game;
pub mod logic;
pub mod presburger;
pub mod ramsey;
pub mod representation;
pub mod structure;
