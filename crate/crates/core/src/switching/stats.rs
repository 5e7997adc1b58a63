use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::wilson::wilson_bounds;

pub const DEFAULT_Z: f64 = 2.58;
pub const DEFAULT_N_SAMPLE: u64 = 30;

/// Outcome counts and switching probability for one initial product state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateStats {
    pub n: u64,
    pub n_s: u64,
    pub n_f: u64,
    pub pr_low: f64,
    pub pr_up: f64,
    pub pr_switch: f64,
}

impl Default for StateStats {
    fn default() -> Self {
        StateStats {
            n: 0,
            n_s: 0,
            n_f: 0,
            pr_low: 0.0,
            pr_up: 1.0,
            pr_switch: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchStats {
    pub z: f64,
    pub pr_des: f64,
    pub n_sample: u64,
    pub states: BTreeMap<usize, StateStats>,
}

/// `min(1, pr_des / pr_low)`, or 1 while the estimate is not yet trusted.
pub fn switch_probability(pr_low: f64, pr_des: f64, n: u64, n_sample: u64) -> f64 {
    if n < n_sample || pr_low <= 0.0 {
        1.0
    } else {
        (pr_des / pr_low).min(1.0)
    }
}

impl SwitchStats {
    pub fn new(z: f64, pr_des: f64, n_sample: u64) -> Self {
        SwitchStats {
            z,
            pr_des,
            n_sample,
            states: BTreeMap::new(),
        }
    }

    pub fn get(&self, p0: usize) -> StateStats {
        self.states.get(&p0).copied().unwrap_or_default()
    }

    /// Whether the next episode from `p0` must follow the go policy regardless
    /// of the switching probability.
    pub fn needs_samples(&self, p0: usize) -> bool {
        self.get(p0).n < self.n_sample
    }

    pub fn pr_switch(&self, p0: usize) -> f64 {
        self.get(p0).pr_switch
    }

    pub fn update(&mut self, p0: usize, success: bool) {
        let (z, pr_des, n_sample) = (self.z, self.pr_des, self.n_sample);
        let st = self.states.entry(p0).or_default();
        st.n += 1;
        if success {
            st.n_s += 1;
        } else {
            st.n_f += 1;
        }
        let (low, up) = wilson_bounds(st.n_s, st.n_f, z);
        st.pr_low = low;
        st.pr_up = up;
        st.pr_switch = switch_probability(low, pr_des, st.n, n_sample);
    }
}
