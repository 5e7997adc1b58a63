//! Labeled MDPs, the agent's partial knowledge of them, and the grid world.

mod grid;
mod mdp;

pub use grid::{
    build_gridworld, Cell, GridConfig, GridWorld, LabelCell, RewardCell, ACTIONS, STAY,
};
pub use mdp::{KnowledgeModel, LabeledMdp, ModelError, SUM_TOLERANCE};
