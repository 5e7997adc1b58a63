use std::collections::VecDeque;

use crate::product::ProductMdp;

/// Marker for "no likely path to the accepting set".
pub const UNREACHABLE: u32 = u32::MAX;

/// Minimum number of likely transitions from each product state to the
/// accepting set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    dist: Vec<u32>,
}

impl DistanceTable {
    pub fn from_raw(dist: Vec<u32>) -> Self {
        DistanceTable { dist }
    }

    pub fn get(&self, p: usize) -> Option<u32> {
        let d = self.dist[p];
        (d != UNREACHABLE).then_some(d)
    }

    pub fn raw(&self, p: usize) -> u32 {
        self.dist[p]
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn is_finite(&self, p: usize) -> bool {
        self.dist[p] != UNREACHABLE
    }

    pub fn max_finite(&self) -> Option<u32> {
        self.dist.iter().copied().filter(|&d| d != UNREACHABLE).max()
    }
}

/// Multi-source BFS backwards from the accepting set over likely edges of
/// every action.
pub fn distance_to_accepting(pm: &ProductMdp) -> DistanceTable {
    let n = pm.num_states();
    let mut reverse_start = vec![0usize; n + 1];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for p in 0..n {
        for a in 0..pm.num_actions() {
            for next in pm.likely(p, a) {
                edges.push((next, p));
            }
        }
    }
    for &(to, _) in &edges {
        reverse_start[to + 1] += 1;
    }
    for i in 0..n {
        reverse_start[i + 1] += reverse_start[i];
    }
    let mut fill = reverse_start.clone();
    let mut reverse = vec![0usize; edges.len()];
    for &(to, from) in &edges {
        reverse[fill[to]] = from;
        fill[to] += 1;
    }

    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    for (p, d) in dist.iter_mut().enumerate() {
        if pm.is_accepting(p) {
            *d = 0;
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        let next_d = dist[p] + 1;
        for &prev in &reverse[reverse_start[p]..reverse_start[p + 1]] {
            if dist[prev] == UNREACHABLE {
                dist[prev] = next_d;
                queue.push_back(prev);
            }
        }
    }
    DistanceTable { dist }
}
