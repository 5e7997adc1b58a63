//! Monte-Carlo estimate of the probability that the go policy reaches the
//! accepting set in time, run on the true dynamics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::policy::GoPolicy;
use crate::model::LabeledMdp;
use crate::product::ProductMdp;

const BLOCK: u64 = 4096;

/// Counts of first-hit times `0..=horizon` over `trials` rollouts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitHistogram {
    pub hits: Vec<u64>,
    pub trials: u64,
}

impl HitHistogram {
    pub fn horizon(&self) -> u64 {
        self.hits.len() as u64 - 1
    }

    /// Number of rollouts that hit within `k` steps.
    pub fn hits_within(&self, k: u64) -> u64 {
        let k = (k.min(self.horizon())) as usize;
        self.hits[..=k].iter().sum()
    }

    pub fn estimate(&self, k: u64) -> McEstimate {
        let p = if self.trials == 0 {
            0.0
        } else {
            self.hits_within(k) as f64 / self.trials as f64
        };
        McEstimate {
            probability: p,
            stderr: if self.trials == 0 {
                0.0
            } else {
                (p * (1.0 - p) / self.trials as f64).sqrt()
            },
            trials: self.trials,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub probability: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// First step at which a rollout from `start` is accepting, if within `horizon`.
fn rollout(
    mdp: &LabeledMdp,
    pm: &ProductMdp,
    policy: &GoPolicy,
    start: usize,
    horizon: u64,
    rng: &mut ChaCha8Rng,
) -> Option<u64> {
    let mut p = start;
    for t in 0..=horizon {
        if pm.is_accepting(p) {
            return Some(t);
        }
        if t == horizon {
            break;
        }
        let (s, _) = pm.split(p);
        let (next, _) = mdp.step(s, policy.action(p), rng);
        p = pm.successor(p, next);
    }
    None
}

/// Histogram of first-hit times under the go policy from product state `start`.
///
/// Trials are split into fixed blocks, each with its own stream of a seeded
/// ChaCha8 generator, so the result does not depend on the thread count.
pub fn mc_hit_histogram(
    mdp: &LabeledMdp,
    pm: &ProductMdp,
    policy: &GoPolicy,
    start: usize,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> HitHistogram {
    let blocks = trials.div_ceil(BLOCK);
    let hits = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n = BLOCK.min(trials - b * BLOCK);
            let mut local = vec![0u64; horizon as usize + 1];
            for _ in 0..n {
                if let Some(t) = rollout(mdp, pm, policy, start, horizon, &mut rng) {
                    local[t as usize] += 1;
                }
            }
            local
        })
        .reduce(
            || vec![0u64; horizon as usize + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    HitHistogram { hits, trials }
}

pub fn mc_satisfaction(
    mdp: &LabeledMdp,
    pm: &ProductMdp,
    policy: &GoPolicy,
    start: usize,
    k: u64,
    trials: u64,
    seed: u64,
) -> McEstimate {
    mc_hit_histogram(mdp, pm, policy, start, k, trials, seed).estimate(k)
}
