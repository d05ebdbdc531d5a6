//! Security strategies for finite-horizon zero-sum stochastic games in which
//! player 1 privately observes a Markov state that only player 1's actions
//! drive.

pub mod cli;
pub mod error;
pub mod game;
pub mod informed;
pub mod lp;
pub mod uninformed;
pub mod verify;
pub mod sim;

pub use error::{Error, Result};
