use rand::Rng;

use crate::twtl::{PropSet, MAX_PROPS};

/// Tolerance for "distribution sums to one".
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("state {state}, action {action}: probabilities sum to {sum}")]
    NotADistribution {
        state: usize,
        action: usize,
        sum: f64,
    },
    #[error("state {state}, action {action}: invalid probability {p} towards {to}")]
    BadProbability {
        state: usize,
        action: usize,
        to: usize,
        p: f64,
    },
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("label {0:?} is not a declared proposition")]
    UnknownLabel(String),
    #[error("too many propositions")]
    TooManyProps,
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("invalid grid configuration: {0}")]
    Grid(String),
    #[error("uncertainty {0} outside [0, 1)")]
    BadEpsilon(f64),
}

/// Labeled MDP with sparse transition distributions.
///
/// States and actions are dense indices. Action order doubles as the
/// tie-breaking order used by policies built on top of the model.
#[derive(Debug, Clone)]
pub struct LabeledMdp {
    num_states: usize,
    action_names: Vec<String>,
    idle_action: usize,
    // indexed by state * num_actions + action
    transitions: Vec<Vec<(usize, f64)>>,
    cumulative: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    ap: Vec<String>,
    labels: Vec<PropSet>,
}

impl LabeledMdp {
    /// `transitions[s][a]` lists `(s', probability)` pairs; `labels[s]` names
    /// propositions from `ap`. `idle_action` is what policies pick when there is
    /// nothing left to do.
    pub fn new(
        action_names: Vec<String>,
        idle_action: usize,
        transitions: Vec<Vec<Vec<(usize, f64)>>>,
        rewards: Vec<f64>,
        ap: Vec<String>,
        labels: Vec<Vec<String>>,
    ) -> Result<Self, ModelError> {
        let n = transitions.len();
        let na = action_names.len();
        if idle_action >= na {
            return Err(ModelError::Shape {
                expected: na,
                got: idle_action,
            });
        }
        if rewards.len() != n {
            return Err(ModelError::Shape {
                expected: n,
                got: rewards.len(),
            });
        }
        if labels.len() != n {
            return Err(ModelError::Shape {
                expected: n,
                got: labels.len(),
            });
        }
        if ap.len() > MAX_PROPS {
            return Err(ModelError::TooManyProps);
        }
        let mut flat = Vec::with_capacity(n * na);
        for (s, per_action) in transitions.into_iter().enumerate() {
            if per_action.len() != na {
                return Err(ModelError::Shape {
                    expected: na,
                    got: per_action.len(),
                });
            }
            for (a, mut dist) in per_action.into_iter().enumerate() {
                dist.retain(|&(_, p)| p != 0.0);
                dist.sort_by_key(|&(to, _)| to);
                let mut sum = 0.0;
                for &(to, p) in &dist {
                    if to >= n {
                        return Err(ModelError::UnknownState(to));
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return Err(ModelError::BadProbability {
                            state: s,
                            action: a,
                            to,
                            p,
                        });
                    }
                    sum += p;
                }
                if dist.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(ModelError::Grid(format!(
                        "state {s}, action {a}: successor listed twice"
                    )));
                }
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    return Err(ModelError::NotADistribution {
                        state: s,
                        action: a,
                        sum,
                    });
                }
                flat.push(dist);
            }
        }
        let cumulative = flat
            .iter()
            .map(|dist| {
                let mut acc = 0.0;
                dist.iter()
                    .map(|&(_, p)| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        let mut masks = Vec::with_capacity(n);
        for names in &labels {
            let mut m = PropSet::EMPTY;
            for name in names {
                let idx = ap
                    .iter()
                    .position(|p| p == name)
                    .ok_or_else(|| ModelError::UnknownLabel(name.clone()))?;
                m = m.union(PropSet::singleton(idx));
            }
            masks.push(m);
        }
        Ok(LabeledMdp {
            num_states: n,
            action_names,
            idle_action,
            transitions: flat,
            cumulative,
            rewards,
            ap,
            labels: masks,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn idle_action(&self) -> usize {
        self.idle_action
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    /// Labels of `s` as a mask over [`LabeledMdp::ap`].
    pub fn label(&self, s: usize) -> PropSet {
        self.labels[s]
    }

    pub fn label_names(&self, s: usize) -> Vec<&str> {
        self.labels[s]
            .iter()
            .map(|i| self.ap[i].as_str())
            .collect()
    }

    pub fn reward(&self, s: usize) -> f64 {
        self.rewards[s]
    }

    pub fn distribution(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.transitions[s * self.action_names.len() + a]
    }

    pub fn probability(&self, s: usize, a: usize, to: usize) -> f64 {
        self.distribution(s, a)
            .iter()
            .find(|&&(t, _)| t == to)
            .map_or(0.0, |&(_, p)| p)
    }

    /// Samples a successor; the reward is the one of the state entered.
    pub fn step<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> (usize, f64) {
        let idx = s * self.action_names.len() + a;
        let dist = &self.transitions[idx];
        let cum = &self.cumulative[idx];
        let u: f64 = rng.gen();
        let pick = cum.iter().position(|&c| u < c).unwrap_or(dist.len() - 1);
        let next = dist[pick].0;
        (next, self.rewards[next])
    }
}

/// What the agent knows about the dynamics: which successors are possible and
/// which are likely (probability at least `1 - epsilon`).
#[derive(Debug, Clone)]
pub struct KnowledgeModel {
    epsilon: f64,
    num_actions: usize,
    support: Vec<Vec<usize>>,
    likely: Vec<Vec<usize>>,
}

impl KnowledgeModel {
    /// Derives the knowledge sets from the true dynamics.
    pub fn from_mdp(mdp: &LabeledMdp, epsilon: f64) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(ModelError::BadEpsilon(epsilon));
        }
        let threshold = 1.0 - epsilon - SUM_TOLERANCE;
        let mut support = Vec::with_capacity(mdp.transitions.len());
        let mut likely = Vec::with_capacity(mdp.transitions.len());
        for dist in &mdp.transitions {
            support.push(dist.iter().map(|&(t, _)| t).collect());
            likely.push(
                dist.iter()
                    .filter(|&&(_, p)| p >= threshold)
                    .map(|&(t, _)| t)
                    .collect(),
            );
        }
        Ok(KnowledgeModel {
            epsilon,
            num_actions: mdp.num_actions(),
            support,
            likely,
        })
    }

    /// Knowledge given directly as sets, `support[s][a]` and `likely[s][a]`.
    pub fn from_sets(
        epsilon: f64,
        support: Vec<Vec<Vec<usize>>>,
        likely: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(ModelError::BadEpsilon(epsilon));
        }
        let num_actions = support.first().map_or(0, Vec::len);
        let mut sup_flat = Vec::new();
        let mut lik_flat = Vec::new();
        for (s, (sup, lik)) in support.into_iter().zip(likely).enumerate() {
            if sup.len() != num_actions || lik.len() != num_actions {
                return Err(ModelError::Shape {
                    expected: num_actions,
                    got: sup.len().min(lik.len()),
                });
            }
            for (mut a_sup, mut a_lik) in sup.into_iter().zip(lik) {
                a_sup.sort_unstable();
                a_sup.dedup();
                a_lik.sort_unstable();
                a_lik.dedup();
                if a_lik.iter().any(|t| a_sup.binary_search(t).is_err()) {
                    return Err(ModelError::Grid(format!(
                        "state {s}: likely successor outside the support"
                    )));
                }
                sup_flat.push(a_sup);
                lik_flat.push(a_lik);
            }
        }
        Ok(KnowledgeModel {
            epsilon,
            num_actions,
            support: sup_flat,
            likely: lik_flat,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn num_states(&self) -> usize {
        self.support.len().checked_div(self.num_actions).unwrap_or(0)
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn support(&self, s: usize, a: usize) -> &[usize] {
        &self.support[s * self.num_actions + a]
    }

    pub fn likely(&self, s: usize, a: usize) -> &[usize] {
        &self.likely[s * self.num_actions + a]
    }
}
