use std::path::{Path, PathBuf};

use crate::model::{build_gridworld, GridConfig, GridWorld, KnowledgeModel, LabeledMdp};
use crate::product::{build_product, ProductMdp};
use crate::reachability::{Analysis, BoundKind, BoundTable};
use crate::twtl::{load_fsa_json, parse_twtl, translate_to_fsa, Fsa};

use super::HarnessError;

/// Where the task automaton comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskSource {
    Formula(String),
    /// Automaton JSON plus the episode length, which a bare automaton lacks.
    Fsa { path: PathBuf, horizon: u64 },
}

/// Grid world, task automaton, product and derived analysis for one setting.
#[derive(Debug, Clone)]
pub struct Instance {
    pub world: GridWorld,
    pub mdp: LabeledMdp,
    pub knowledge: KnowledgeModel,
    pub fsa: Fsa,
    pub product: ProductMdp,
    pub analysis: Analysis,
    pub horizon: u64,
}

pub fn load_task(task: &TaskSource) -> Result<(Fsa, u64), HarnessError> {
    match task {
        TaskSource::Formula(text) => {
            let ast = parse_twtl(text)?;
            let fsa = translate_to_fsa(&ast)?;
            Ok((fsa, ast.time_bound()))
        }
        TaskSource::Fsa { path, horizon } => {
            let text = read(path)?;
            let (fsa, warnings) = load_fsa_json(&text)?;
            for w in warnings {
                log::warn!("{}: {w:?}", path.display());
            }
            Ok((fsa, *horizon))
        }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

impl Instance {
    /// Builds everything from a grid description, overriding its agent
    /// uncertainty with `epsilon` when given.
    pub fn build(
        grid: &GridConfig,
        task: &TaskSource,
        epsilon: Option<f64>,
    ) -> Result<Self, HarnessError> {
        let (fsa, horizon) = load_task(task)?;
        Self::from_fsa(grid, fsa, horizon, epsilon)
    }

    pub fn from_fsa(
        grid: &GridConfig,
        fsa: Fsa,
        horizon: u64,
        epsilon: Option<f64>,
    ) -> Result<Self, HarnessError> {
        let mut grid = grid.clone();
        if let Some(eps) = epsilon {
            grid.epsilon_agent = eps;
        }
        let (world, mdp, knowledge) = build_gridworld(&grid)?;
        let fsa = fsa.with_alphabet(mdp.ap().iter().map(String::as_str))?;
        let product = build_product(&mdp, &knowledge, &fsa)?;
        let analysis = Analysis::new(&product)?;
        Ok(Instance {
            world,
            mdp,
            knowledge,
            fsa,
            product,
            analysis,
            horizon,
        })
    }

    pub fn bounds(&self, kind: BoundKind) -> Result<BoundTable, HarnessError> {
        Ok(self.analysis.bounds(&self.product, kind, self.horizon)?)
    }

    /// Initial product state for an episode starting at the grid's start cell.
    pub fn start_p0(&self) -> usize {
        self.product.initial_for(self.world.start_state())
    }
}
