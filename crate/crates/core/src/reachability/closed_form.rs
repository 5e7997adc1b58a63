//! Closed-form lower bound on reaching the accepting set.
//!
//! Under the go policy every step either moves one likely transition closer to
//! the accepting set (probability at least `1 - eps`) or, in the worst case,
//! moves `delta_max` further away. The bound is the probability that this
//! walk, started `d` away, hits zero within `k` steps, obtained from the
//! first-passage decomposition
//!
//! ```text
//! P(T_m) = P(S_m = d) - sum_{m' < m} P(S_{m-m'} = 0) P(T_{m'})
//! ```
//!
//! where `T_m` is "first hit at step m" and `S_j` the sum of `j` steps.

use super::distance::DistanceTable;
use super::BoundError;
use crate::product::ProductMdp;

/// `C(m, n)` as a float; zero unless `0 <= n <= m`.
#[cfg(test)]
fn binomial(m: u64, n: u64) -> f64 {
    if n > m {
        return 0.0;
    }
    let n = n.min(m - n);
    let mut c = 1.0f64;
    for i in 0..n {
        c = c * (m - i) as f64 / (i + 1) as f64;
    }
    c
}

fn check_args(eps: f64, delta_max: u64) -> Result<(), BoundError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(BoundError::Domain(format!("eps = {eps} outside [0, 1)")));
    }
    if delta_max == 0 {
        return Err(BoundError::Domain("delta_max must be at least 1".into()));
    }
    Ok(())
}

/// Tables shared by every start distance for one `(horizon, eps, delta_max)`.
struct Walk {
    stride: usize,
    // ln m! for m in 0..=horizon
    ln_fact: Vec<f64>,
    eps_pow: Vec<f64>,
    keep_pow: Vec<f64>,
    // zero[j] = P(S_j = 0)
    zero: Vec<f64>,
}

impl Walk {
    fn new(horizon: u64, eps: f64, delta_max: u64) -> Self {
        let k = horizon as usize;
        let mut ln_fact = Vec::with_capacity(k + 1);
        let mut acc = 0.0f64;
        ln_fact.push(0.0);
        for i in 1..=k {
            acc += (i as f64).ln();
            ln_fact.push(acc);
        }
        let mut eps_pow = vec![1.0f64; k + 1];
        let mut keep_pow = vec![1.0f64; k + 1];
        for i in 1..=k {
            eps_pow[i] = eps_pow[i - 1] * eps;
            keep_pow[i] = keep_pow[i - 1] * (1.0 - eps);
        }
        let mut walk = Walk {
            stride: 1 + delta_max as usize,
            ln_fact,
            eps_pow,
            keep_pow,
            zero: Vec::new(),
        };
        walk.zero = (0..=k).map(|j| walk.sum_probability(j, 0)).collect();
        walk
    }

    /// Probability that `steps` walk steps sum to exactly `target`, where a
    /// step is `+1` w.p. `1 - eps` and `-delta_max` w.p. `eps`.
    #[inline]
    fn sum_probability(&self, steps: usize, target: usize) -> f64 {
        if steps < target {
            return 0.0;
        }
        let span = steps - target;
        // the number of backward steps must be a nonnegative integer; zero is allowed
        if !span.is_multiple_of(self.stride) {
            return 0.0;
        }
        let back = span / self.stride;
        let forward = steps - back;
        let weight = self.eps_pow[back] * self.keep_pow[forward];
        if weight == 0.0 {
            return 0.0;
        }
        let ln_binom = self.ln_fact[steps] - self.ln_fact[back] - self.ln_fact[forward];
        ln_binom.exp() * weight
    }

    /// Cumulative hitting probabilities `P(T <= m)` for `m` in `0..=horizon`.
    fn cumulative(&self, d: usize) -> Vec<f64> {
        let k = self.zero.len() - 1;
        let mut hit = vec![0.0; k + 1];
        let mut row = vec![0.0; k + 1];
        let mut acc = 0.0;
        for m in 1..=k {
            // P(S_m = d) is nonzero only on this residue class, and so is P(T_m)
            if m >= d && (m - d).is_multiple_of(self.stride) {
                let mut value = self.sum_probability(m, d);
                let mut gap = self.stride;
                while gap < m {
                    value -= self.zero[gap] * hit[m - gap];
                    gap += self.stride;
                }
                hit[m] = value;
                acc += value;
            }
            row[m] = acc;
        }
        row
    }
}

/// Lower bound on reaching the accepting set within `k` steps from distance `d`.
pub fn closed_form_lb(d: u64, k: u64, eps: f64, delta_max: u64) -> Result<f64, BoundError> {
    check_args(eps, delta_max)?;
    if d == 0 {
        return Err(BoundError::Domain("distance must be positive".into()));
    }
    let total = Walk::new(k, eps, delta_max).cumulative(d as usize)[k as usize];
    debug_assert!(
        (-1e-9..=1.0 + 1e-9).contains(&total),
        "closed-form bound {total} outside [0, 1]"
    );
    Ok(total.clamp(0.0, 1.0))
}

/// Exact hitting probability of the same walk by dynamic programming over
/// (step, progress). Independent of the closed form; used to check it.
pub fn walk_oracle(d: u64, k: u64, eps: f64, delta_max: u64) -> f64 {
    let d = d as i64;
    let low = -(k as i64) * delta_max as i64;
    let width = (d - low) as usize;
    // mass[i] = probability of being at progress low + i without having hit d
    let mut mass = vec![0.0f64; width];
    mass[(0 - low) as usize] = 1.0;
    let mut absorbed = 0.0;
    for _ in 0..k {
        let mut next = vec![0.0f64; width];
        for (i, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let x = low + i as i64;
            let up = x + 1;
            if up >= d {
                absorbed += m * (1.0 - eps);
            } else {
                next[(up - low) as usize] += m * (1.0 - eps);
            }
            let down = x - delta_max as i64;
            if down >= low {
                next[(down - low) as usize] += m * eps;
            }
        }
        mass = next;
    }
    absorbed
}

/// Worst single-step increase of the distance over every support transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaMax {
    /// Largest finite increase (zero if distances never grow).
    pub value: u32,
    /// `(p, a, p')` where `p` has finite distance but `p'` has none.
    pub violations: Vec<(usize, usize, usize)>,
}

impl DeltaMax {
    pub fn assumption_holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// The value used by the closed-form bound, which needs at least one.
    pub fn effective(&self) -> u64 {
        u64::from(self.value.max(1))
    }
}

pub fn compute_delta_max(pm: &ProductMdp, dist: &DistanceTable) -> DeltaMax {
    let mut value = 0u32;
    let mut violations = Vec::new();
    for p in 0..pm.num_states() {
        let Some(d) = dist.get(p) else { continue };
        for a in 0..pm.num_actions() {
            for next in pm.support(p, a) {
                match dist.get(next) {
                    Some(d2) => value = value.max(d2.saturating_sub(d)),
                    None => violations.push((p, a, next)),
                }
            }
        }
    }
    DeltaMax { value, violations }
}

/// Closed-form bounds for every distance `1..=max_distance` and every budget
/// `0..=horizon`; `rows[d - 1][k]`.
pub(crate) fn closed_form_rows(
    max_distance: u64,
    horizon: u64,
    eps: f64,
    delta_max: u64,
) -> Result<Vec<Vec<f64>>, BoundError> {
    check_args(eps, delta_max)?;
    let walk = Walk::new(horizon, eps, delta_max);
    Ok((1..=max_distance as usize)
        .map(|d| {
            let mut row = walk.cumulative(d);
            for v in &mut row {
                *v = v.clamp(0.0, 1.0);
            }
            row
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step() {
        for dm in 1..4 {
            assert!((closed_form_lb(1, 1, 0.1, dm).unwrap() - 0.9).abs() < 1e-12);
        }
    }

    #[test]
    fn two_away_four_steps() {
        let v = closed_form_lb(2, 4, 0.1, 1).unwrap();
        assert!((v - 0.9558).abs() < 1e-12, "{v}");
        assert!((walk_oracle(2, 4, 0.1, 1) - 0.9558).abs() < 1e-12);
    }

    #[test]
    fn deterministic_walk() {
        for d in 1..6 {
            for k in 0..12 {
                let expected = if k >= d { 1.0 } else { 0.0 };
                assert_eq!(closed_form_lb(d, k, 0.0, 2).unwrap(), expected);
            }
        }
    }

    #[test]
    fn exact_budget() {
        assert!((walk_oracle(3, 3, 0.1, 2) - 0.729).abs() < 1e-12);
        assert!((closed_form_lb(3, 3, 0.1, 2).unwrap() - 0.729).abs() < 1e-12);
    }

    #[test]
    fn oracle_monotone_in_budget() {
        for dm in 1..4 {
            let mut prev = 0.0;
            for k in 0..30 {
                let v = walk_oracle(4, k, 0.2, dm);
                assert!(v + 1e-15 >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(closed_form_lb(0, 3, 0.1, 1).is_err());
        assert!(closed_form_lb(2, 3, 1.0, 1).is_err());
        assert!(closed_form_lb(2, 3, 0.1, 0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 5), 0.0);
        assert_eq!(binomial(30, 15), 155117520.0);
    }
}
