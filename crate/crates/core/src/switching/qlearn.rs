use rand::Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_GAMMA: f64 = 0.95;

/// Tabular action values over MDP states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub num_states: usize,
    pub num_actions: usize,
    pub alpha: f64,
    pub gamma: f64,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(num_states: usize, num_actions: usize, alpha: f64, gamma: f64) -> Self {
        QTable {
            num_states,
            num_actions,
            alpha,
            gamma,
            values: vec![0.0; num_states * num_actions],
        }
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action; ties go to the lowest action index.
    pub fn greedy(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    /// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))`.
    /// Returns the new value.
    pub fn update(&mut self, s: usize, a: usize, r: f64, next: usize) -> f64 {
        let target = r + self.gamma * self.max_value(next);
        let i = s * self.num_actions + a;
        self.values[i] = (1.0 - self.alpha) * self.values[i] + self.alpha * target;
        self.values[i]
    }

    pub fn choose<R: Rng + ?Sized>(&self, s: usize, explore_rate: f64, rng: &mut R) -> usize {
        if rng.gen::<f64>() < explore_rate {
            rng.gen_range(0..self.num_actions)
        } else {
            self.greedy(s)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exploration rate decaying geometrically from `initial` at the first
/// episode to `final_rate` at the last.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExploreSchedule {
    pub initial: f64,
    pub final_rate: f64,
    pub episodes: u64,
}

impl ExploreSchedule {
    pub fn rate(&self, episode: u64) -> f64 {
        if self.episodes <= 1 {
            return self.initial;
        }
        let frac = episode.min(self.episodes - 1) as f64 / (self.episodes - 1) as f64;
        let r = self.initial * (self.final_rate / self.initial).powf(frac);
        r.clamp(self.final_rate.min(self.initial), self.initial)
    }
}

impl Default for ExploreSchedule {
    fn default() -> Self {
        ExploreSchedule {
            initial: 0.7,
            final_rate: 0.0001,
            episodes: 1000,
        }
    }
}
