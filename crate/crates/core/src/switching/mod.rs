//! Wilson-score switching between the go policy and tabular Q-learning.

pub mod qlearn;
pub mod stats;
pub mod train;
pub mod wilson;

pub use qlearn::{ExploreSchedule, QTable, DEFAULT_ALPHA, DEFAULT_GAMMA};
pub use stats::{switch_probability, StateStats, SwitchStats, DEFAULT_N_SAMPLE, DEFAULT_Z};
pub use train::{
    certification_report, certify, reachable_mdp_states, train, EpisodeRecord, Mode,
    TrainConfig, TrainError, TrainOutput, Uncertified,
};
pub use wilson::wilson_bounds;
