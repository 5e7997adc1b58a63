use super::distance::{DistanceTable, UNREACHABLE};
use super::BoundError;
use crate::product::ProductMdp;

/// Stationary policy that steers towards the accepting set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoPolicy {
    actions: Vec<usize>,
}

impl GoPolicy {
    pub fn from_actions(actions: Vec<usize>) -> Self {
        GoPolicy { actions }
    }

    #[inline]
    pub fn action(&self, p: usize) -> usize {
        self.actions[p]
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Smallest distance among the likely successors of `(p, a)`, if any.
pub fn min_likely_distance(pm: &ProductMdp, dist: &DistanceTable, p: usize, a: usize) -> Option<u32> {
    pm.likely(p, a).map(|next| dist.raw(next)).min()
}

/// Picks, per state, the action whose best likely successor is closest to the
/// accepting set. Ties go to the earliest action; states already accepting or
/// with no likely path get the idle action.
pub fn compute_pi_go(pm: &ProductMdp, dist: &DistanceTable) -> Result<GoPolicy, BoundError> {
    let mut actions = Vec::with_capacity(pm.num_states());
    for p in 0..pm.num_states() {
        let d = dist.raw(p);
        if d == 0 || d == UNREACHABLE {
            actions.push(pm.idle_action());
            continue;
        }
        let mut best: Option<(u32, usize)> = None;
        for a in 0..pm.num_actions() {
            let Some(m) = min_likely_distance(pm, dist, p, a) else {
                continue;
            };
            if best.is_none_or(|(bd, _)| m < bd) {
                best = Some((m, a));
            }
        }
        match best {
            Some((_, a)) => actions.push(a),
            None => return Err(BoundError::NoLikelyAction { state: p }),
        }
    }
    Ok(GoPolicy { actions })
}
