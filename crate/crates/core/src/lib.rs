//! Switching between a certified go policy and Q-learning under time-window
//! temporal logic tasks.

pub mod harness;
pub mod model;
pub mod product;
pub mod reachability;
pub mod switching;
pub mod twtl;
