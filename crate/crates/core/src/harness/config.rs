use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::instance::{read, TaskSource};
use super::HarnessError;
use crate::model::GridConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    Closed,
    Recursive,
    Both,
}

/// One instance of a timing sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub name: String,
    pub formula: String,
    /// Grid for this instance; defaults to the experiment grid.
    #[serde(default)]
    pub grid: Option<PathBuf>,
}

fn default_z() -> f64 {
    2.58
}
fn default_episodes() -> u64 {
    1000
}
fn default_n_sample() -> u64 {
    30
}
fn default_runs() -> u64 {
    10
}
fn default_method() -> BoundMethod {
    BoundMethod::Both
}
fn default_window() -> usize {
    50
}
fn default_mc_trials() -> u64 {
    100_000
}
fn default_true() -> bool {
    true
}

/// Experiment description as stored in the bundled case files. Relative
/// paths are resolved against the directory of the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: PathBuf,
    #[serde(default)]
    pub formula: Option<String>,
    #[serde(default)]
    pub fsa: Option<PathBuf>,
    /// Episode length when the task is given as an automaton.
    #[serde(default)]
    pub horizon: Option<u64>,
    pub pr_des: f64,
    pub epsilon_agent: f64,
    #[serde(default = "default_z")]
    pub z: f64,
    #[serde(default = "default_episodes")]
    pub episodes: u64,
    #[serde(default = "default_n_sample")]
    pub n_sample: u64,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub bound_method: BoundMethod,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Moving-window width for the training curves.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_true")]
    pub train: bool,
    #[serde(default)]
    pub force: bool,
    #[serde(default)]
    pub count_rl_episodes: bool,
    #[serde(default = "default_true")]
    pub mc_validation: bool,
    #[serde(default = "default_mc_trials")]
    pub mc_trials: u64,
    /// Cells whose initial product state goes into the bound report; empty
    /// means every initial state.
    #[serde(default)]
    pub report_cells: Vec<String>,
    /// Budgets for the bound report; empty means the episode length.
    #[serde(default)]
    pub report_k: Vec<u64>,
    #[serde(default)]
    pub sweep: Vec<SweepEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.pr_des > 0.0 && self.pr_des <= 1.0) {
            return bad(format!("pr_des {} outside (0, 1]", self.pr_des));
        }
        if !(0.0..1.0).contains(&self.epsilon_agent) {
            return bad(format!("epsilon_agent {} outside [0, 1)", self.epsilon_agent));
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.window == 0 {
            return bad("window must be at least 1".into());
        }
        match (&self.formula, &self.fsa) {
            (Some(_), None) => {}
            (None, Some(_)) if self.horizon.is_some() => {}
            (None, Some(_)) => return bad("an automaton task needs a horizon".into()),
            _ => return bad("give exactly one of formula and fsa".into()),
        }
        Ok(())
    }

    /// Checks that referenced files exist.
    pub fn check_files(&self) -> Result<(), HarnessError> {
        let mut files = vec![self.resolve(&self.grid)];
        if let Some(f) = &self.fsa {
            files.push(self.resolve(f));
        }
        for s in &self.sweep {
            if let Some(g) = &s.grid {
                files.push(self.resolve(g));
            }
        }
        for f in files {
            if !f.is_file() {
                return Err(HarnessError::Config(format!("missing file {}", f.display())));
            }
        }
        Ok(())
    }

    pub fn grid_config(&self) -> Result<GridConfig, HarnessError> {
        Ok(GridConfig::load(&self.resolve(&self.grid))?)
    }

    pub fn task(&self) -> TaskSource {
        match (&self.formula, &self.fsa) {
            (Some(f), _) => TaskSource::Formula(f.clone()),
            (None, Some(path)) => TaskSource::Fsa {
                path: self.resolve(path),
                horizon: self.horizon.unwrap_or(0),
            },
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.output {
            Some(p) => p.clone(),
            None => PathBuf::from("out").join(&self.name),
        }
    }
}
