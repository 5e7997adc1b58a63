//! Distances, the go policy and lower bounds on satisfying the task in time.

pub mod closed_form;
pub mod distance;
pub mod montecarlo;
pub mod policy;
pub mod recursive;

pub use closed_form::{closed_form_lb, compute_delta_max, walk_oracle, DeltaMax};
pub use distance::{distance_to_accepting, DistanceTable, UNREACHABLE};
pub use montecarlo::{mc_hit_histogram, mc_satisfaction, HitHistogram, McEstimate};
pub use policy::{compute_pi_go, min_likely_distance, GoPolicy};
pub use recursive::{recursive_lb, solve_worst_case_lp};

use crate::product::ProductMdp;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error("{0}")]
    Domain(String),
    #[error("product state {state} has finite distance but no action with a likely successor")]
    NoLikelyAction { state: usize },
    #[error("worst-case LP infeasible ({likely} likely children at eps = {eps}, state {state:?}, action {action:?})")]
    InfeasibleLp {
        state: Option<usize>,
        action: Option<usize>,
        likely: usize,
        eps: f64,
    },
    #[error("closed-form bound unavailable: {count} transitions leave the region with finite distance, first {first:?}")]
    AssumptionViolated {
        count: usize,
        first: (usize, usize, usize),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Closed,
    Recursive,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Closed => "closed",
            BoundKind::Recursive => "recursive",
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    /// `values[k * n + p]`.
    Dense(Vec<f64>),
    /// The closed form depends on `p` only through its distance, so only
    /// one row per distance is kept: `rows[d - 1][k]`.
    ByDistance { dist: Vec<u32>, rows: Vec<Vec<f64>> },
}

/// Lower bound on reaching the accepting set from `p` within `k` steps, for
/// `k` in `0..=horizon`.
#[derive(Debug, Clone)]
pub struct BoundTable {
    kind: BoundKind,
    horizon: u64,
    epsilon: f64,
    delta_max: Option<u64>,
    num_states: usize,
    storage: Storage,
}

impl BoundTable {
    /// Dense table laid out as `values[k * num_states + p]`.
    pub fn new(
        kind: BoundKind,
        horizon: u64,
        epsilon: f64,
        delta_max: Option<u64>,
        num_states: usize,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(values.len(), (horizon as usize + 1) * num_states);
        BoundTable {
            kind,
            horizon,
            epsilon,
            delta_max,
            num_states,
            storage: Storage::Dense(values),
        }
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta_max(&self) -> Option<u64> {
        self.delta_max
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Bound for budget `k`; budgets past the horizon are clamped to it.
    #[inline]
    pub fn get(&self, k: u64, p: usize) -> f64 {
        let k = k.min(self.horizon) as usize;
        match &self.storage {
            Storage::Dense(values) => values[k * self.num_states + p],
            Storage::ByDistance { dist, rows } => match dist[p] {
                0 => 1.0,
                UNREACHABLE => 0.0,
                d => rows[d as usize - 1][k],
            },
        }
    }

    pub fn layer(&self, k: u64) -> Vec<f64> {
        (0..self.num_states).map(|p| self.get(k, p)).collect()
    }
}

/// Closed-form bound for every product state and budget.
pub fn closed_form_table(
    pm: &ProductMdp,
    dist: &DistanceTable,
    delta: &DeltaMax,
    horizon: u64,
) -> Result<BoundTable, BoundError> {
    if let Some(&first) = delta.violations.first() {
        return Err(BoundError::AssumptionViolated {
            count: delta.violations.len(),
            first,
        });
    }
    let eps = pm.epsilon();
    let dm = delta.effective();
    let max_d = u64::from(dist.max_finite().unwrap_or(0));
    let rows = closed_form::closed_form_rows(max_d, horizon, eps, dm)?;
    Ok(BoundTable {
        kind: BoundKind::Closed,
        horizon,
        epsilon: eps,
        delta_max: Some(dm),
        num_states: pm.num_states(),
        storage: Storage::ByDistance {
            dist: (0..dist.len()).map(|p| dist.raw(p)).collect(),
            rows,
        },
    })
}

/// Everything derived from a product that the bounds and the trainer need.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub distances: DistanceTable,
    pub policy: GoPolicy,
    pub delta_max: DeltaMax,
}

impl Analysis {
    pub fn new(pm: &ProductMdp) -> Result<Self, BoundError> {
        let distances = distance_to_accepting(pm);
        let policy = compute_pi_go(pm, &distances)?;
        let delta_max = compute_delta_max(pm, &distances);
        Ok(Analysis {
            distances,
            policy,
            delta_max,
        })
    }

    pub fn closed_form(&self, pm: &ProductMdp, horizon: u64) -> Result<BoundTable, BoundError> {
        closed_form_table(pm, &self.distances, &self.delta_max, horizon)
    }

    pub fn recursive(&self, pm: &ProductMdp, horizon: u64) -> Result<BoundTable, BoundError> {
        recursive_lb(pm, &self.distances, &self.policy, horizon)
    }

    pub fn bounds(&self, pm: &ProductMdp, kind: BoundKind, horizon: u64) -> Result<BoundTable, BoundError> {
        match kind {
            BoundKind::Closed => self.closed_form(pm, horizon),
            BoundKind::Recursive => self.recursive(pm, horizon),
        }
    }
}
