use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::qlearn::{ExploreSchedule, QTable, DEFAULT_ALPHA, DEFAULT_GAMMA};
use super::stats::{SwitchStats, DEFAULT_N_SAMPLE, DEFAULT_Z};
use crate::model::LabeledMdp;
use crate::product::ProductMdp;
use crate::reachability::{BoundTable, GoPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "GO")]
    Go,
    #[serde(rename = "RL")]
    Rl,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Go => "GO",
            Mode::Rl => "RL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub pr_des: f64,
    pub episodes: u64,
    /// Episode length.
    pub horizon: u64,
    pub n_sample: u64,
    pub z: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub explore_initial: f64,
    pub explore_final: f64,
    pub seed: u64,
    /// Also count RL episodes in the switching statistics.
    pub count_rl_episodes: bool,
    /// Skip the certification check.
    pub force: bool,
    /// MDP state of the first episode.
    pub start_state: usize,
}

impl TrainConfig {
    pub fn new(pr_des: f64, episodes: u64, horizon: u64, start_state: usize, seed: u64) -> Self {
        TrainConfig {
            pr_des,
            episodes,
            horizon,
            n_sample: DEFAULT_N_SAMPLE,
            z: DEFAULT_Z,
            alpha: DEFAULT_ALPHA,
            gamma: DEFAULT_GAMMA,
            explore_initial: 0.7,
            explore_final: 0.0001,
            seed,
            count_rl_episodes: false,
            force: false,
            start_state,
        }
    }

    pub fn schedule(&self) -> ExploreSchedule {
        ExploreSchedule {
            initial: self.explore_initial,
            final_rate: self.explore_final,
            episodes: self.episodes,
        }
    }

    fn validate(&self, mdp: &LabeledMdp) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if !(self.pr_des > 0.0 && self.pr_des <= 1.0) {
            return bad("pr_des must be in (0, 1]");
        }
        if !(self.z > 0.0) {
            return bad("z must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.gamma) {
            return bad("alpha and gamma must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.explore_initial)
            || !(0.0..=1.0).contains(&self.explore_final)
            || self.explore_final > self.explore_initial
        {
            return bad("exploration rates must satisfy 0 <= final <= initial <= 1");
        }
        if self.start_state >= mdp.num_states() {
            return bad("start state out of range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub p0: usize,
    pub mode: Mode,
    pub satisfied: bool,
    pub reward: f64,
    pub steps_to_accept: Option<u64>,
    pub explore_rate: f64,
}

/// Initial product state whose lower bound falls short of the target.
#[derive(Debug, Clone, PartialEq)]
pub struct Uncertified {
    pub p0: usize,
    pub lb: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("no bound table given for certification (use force to skip)")]
    NoCertificate,
    #[error("bound horizon {table} is shorter than the episode length {episode}")]
    ShortCertificate { table: u64, episode: u64 },
    #[error("{} initial states below the target {pr_des}: {}", .failures.len(), format_failures(.failures))]
    NotCertified {
        pr_des: f64,
        failures: Vec<Uncertified>,
    },
    #[error("non-finite Q value at state {state}, action {action}")]
    NonFiniteQ { state: usize, action: usize },
}

fn format_failures(f: &[Uncertified]) -> String {
    f.iter()
        .take(8)
        .map(|u| format!("p{}={:.4}", u.p0, u.lb))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub qtable: QTable,
    pub stats: SwitchStats,
    pub episodes: Vec<EpisodeRecord>,
}

/// MDP states reachable from `start` through support edges of any action.
pub fn reachable_mdp_states(pm: &ProductMdp, start: usize) -> Vec<bool> {
    let km = pm.knowledge();
    let mut seen = vec![false; km.num_states()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(s) = queue.pop_front() {
        for a in 0..km.num_actions() {
            for &t in km.support(s, a) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    seen
}

/// Initial product states an episode chain from `start` can begin in, with
/// their bound at budget `horizon`.
pub fn certification_report(
    pm: &ProductMdp,
    table: &BoundTable,
    start: usize,
    horizon: u64,
) -> Vec<(usize, f64)> {
    let reach = reachable_mdp_states(pm, start);
    let mut p0s: Vec<usize> = reach
        .iter()
        .enumerate()
        .filter(|&(_, &r)| r)
        .map(|(s, _)| pm.initial_for(s))
        .collect();
    p0s.sort_unstable();
    p0s.dedup();
    p0s.into_iter().map(|p| (p, table.get(horizon, p))).collect()
}

pub fn certify(
    pm: &ProductMdp,
    table: &BoundTable,
    start: usize,
    horizon: u64,
    pr_des: f64,
) -> Result<(), TrainError> {
    if table.horizon() < horizon {
        return Err(TrainError::ShortCertificate {
            table: table.horizon(),
            episode: horizon,
        });
    }
    let failures: Vec<Uncertified> = certification_report(pm, table, start, horizon)
        .into_iter()
        .filter(|&(_, lb)| lb < pr_des)
        .map(|(p0, lb)| Uncertified { p0, lb })
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(TrainError::NotCertified { pr_des, failures })
    }
}

/// Switching-based learning: each episode either follows the go policy until
/// the task is met (then keeps learning) or runs epsilon-greedy Q-learning
/// throughout, chosen per initial state from the switching statistics.
pub fn train(
    mdp: &LabeledMdp,
    pm: &ProductMdp,
    policy: &GoPolicy,
    certificate: Option<&BoundTable>,
    cfg: &TrainConfig,
) -> Result<TrainOutput, TrainError> {
    cfg.validate(mdp)?;
    if !cfg.force {
        let table = certificate.ok_or(TrainError::NoCertificate)?;
        certify(pm, table, cfg.start_state, cfg.horizon, cfg.pr_des)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut q = QTable::new(mdp.num_states(), mdp.num_actions(), cfg.alpha, cfg.gamma);
    let mut stats = SwitchStats::new(cfg.z, cfg.pr_des, cfg.n_sample);
    let schedule = cfg.schedule();
    let mut records = Vec::with_capacity(cfg.episodes as usize);
    let mut s = cfg.start_state;

    for episode in 0..cfg.episodes {
        let p0 = pm.initial_for(s);
        let mode = if stats.needs_samples(p0) || rng.gen::<f64>() < stats.pr_switch(p0) {
            Mode::Go
        } else {
            Mode::Rl
        };
        let explore_rate = schedule.rate(episode);
        let mut p = p0;
        let mut reward = 0.0;
        let mut accepted_at = pm.is_accepting(p).then_some(0u64);
        for t in 0..cfg.horizon {
            let go = mode == Mode::Go && accepted_at.is_none();
            let a = if go {
                policy.action(p)
            } else {
                q.choose(s, explore_rate, &mut rng)
            };
            let (next, r) = mdp.step(s, a, &mut rng);
            if !go && !q.update(s, a, r, next).is_finite() {
                return Err(TrainError::NonFiniteQ {
                    state: s,
                    action: a,
                });
            }
            reward += r;
            s = next;
            p = pm.successor(p, next);
            if accepted_at.is_none() && pm.is_accepting(p) {
                accepted_at = Some(t + 1);
            }
        }
        let satisfied = accepted_at.is_some();
        if mode == Mode::Go || cfg.count_rl_episodes {
            stats.update(p0, satisfied);
        }
        records.push(EpisodeRecord {
            episode,
            p0,
            mode,
            satisfied,
            reward,
            steps_to_accept: accepted_at,
            explore_rate,
        });
    }
    Ok(TrainOutput {
        qtable: q,
        stats,
        episodes: records,
    })
}
