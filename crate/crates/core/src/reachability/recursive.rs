use super::distance::DistanceTable;
use super::policy::GoPolicy;
use super::{BoundError, BoundKind, BoundTable};
use crate::product::ProductMdp;

const FEASIBILITY_SLACK: f64 = 1e-12;

/// Optimum of the worst-case transition LP given its sufficient statistics:
/// the number of likely children, the sum of their values, and the smallest
/// value among all children.
#[inline]
fn worst_case_value(likely: usize, likely_sum: f64, min_child: f64, eps: f64) -> Option<f64> {
    let floor = 1.0 - eps;
    let residual = 1.0 - likely as f64 * floor;
    if residual < -FEASIBILITY_SLACK {
        return None;
    }
    Some(floor * likely_sum + residual.max(0.0) * min_child)
}

/// Minimises `sum_i v_i * x_i` over distributions `x` where each likely child
/// gets at least `1 - eps` and every other child gets a share in `[0, 1]`.
///
/// Likely children sit at their floor and the residual mass goes to the child
/// with the smallest value. The open lower bound on non-likely children is
/// taken as closed, which yields the infimum.
pub fn solve_worst_case_lp(likely: &[f64], other: &[f64], eps: f64) -> Result<f64, BoundError> {
    if likely.is_empty() && other.is_empty() {
        return Err(BoundError::Domain("LP has no children".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(BoundError::Domain(format!("eps = {eps} outside [0, 1)")));
    }
    let min_child = likely
        .iter()
        .chain(other)
        .copied()
        .fold(f64::INFINITY, f64::min);
    worst_case_value(likely.len(), likely.iter().sum(), min_child, eps).ok_or(
        BoundError::InfeasibleLp {
            state: None,
            action: None,
            likely: likely.len(),
            eps,
        },
    )
}

/// Layer-by-layer worst-case bound under the go policy.
pub fn recursive_lb(
    pm: &ProductMdp,
    dist: &DistanceTable,
    policy: &GoPolicy,
    horizon: u64,
) -> Result<BoundTable, BoundError> {
    let n = pm.num_states();
    let eps = pm.epsilon();
    let layers = horizon as usize + 1;
    let mut values = vec![0.0f64; layers * n];
    for p in 0..n {
        if pm.is_accepting(p) {
            values[p] = 1.0;
        }
    }
    for k in 1..layers {
        let (done, rest) = values.split_at_mut(k * n);
        let prev = &done[(k - 1) * n..];
        let layer = &mut rest[..n];
        for p in 0..n {
            if pm.is_accepting(p) {
                layer[p] = 1.0;
                continue;
            }
            match dist.get(p) {
                Some(d) if (d as usize) <= k => {}
                _ => continue,
            }
            let a = policy.action(p);
            let (s, _) = pm.split(p);
            let likely_mdp = pm.knowledge().likely(s, a);
            let mut likely = 0usize;
            let mut likely_sum = 0.0;
            let mut min_child = f64::INFINITY;
            for &to in pm.knowledge().support(s, a) {
                let v = prev[pm.successor(p, to)];
                if likely_mdp.contains(&to) {
                    likely += 1;
                    likely_sum += v;
                }
                min_child = min_child.min(v);
            }
            layer[p] = worst_case_value(likely, likely_sum, min_child, eps).ok_or(
                BoundError::InfeasibleLp {
                    state: Some(p),
                    action: Some(a),
                    likely,
                    eps,
                },
            )?;
        }
    }
    Ok(BoundTable::new(
        BoundKind::Recursive,
        horizon,
        eps,
        None,
        n,
        values,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_children() {
        let v = solve_worst_case_lp(&[0.8], &[0.1], 0.1).unwrap();
        assert!((v - 0.73).abs() < 1e-12);
    }

    #[test]
    fn residual_to_likely_child() {
        let v = solve_worst_case_lp(&[0.2], &[0.9], 0.1).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
    }

    #[test]
    fn other_only() {
        let v = solve_worst_case_lp(&[], &[0.5, 0.7], 0.1).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_forced_child() {
        let v = solve_worst_case_lp(&[0.37], &[], 0.1).unwrap();
        assert!((v - 0.37).abs() < 1e-12);
    }

    #[test]
    fn infeasible() {
        assert!(matches!(
            solve_worst_case_lp(&[0.5, 0.5], &[], 0.1),
            Err(BoundError::InfeasibleLp { .. })
        ));
        assert!(solve_worst_case_lp(&[0.5, 0.5], &[], 0.5).is_ok());
        assert!(solve_worst_case_lp(&[], &[], 0.1).is_err());
    }
}
