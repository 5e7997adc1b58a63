//! Product of the agent's knowledge model with a task automaton.

use std::collections::VecDeque;

use crate::model::{KnowledgeModel, LabeledMdp};
use crate::twtl::{Fsa, FsaError, PropSet};

#[derive(Debug, thiserror::Error)]
pub enum ProductError {
    #[error("MDP proposition {0:?} is not in the automaton alphabet")]
    UnknownProposition(String),
    #[error("knowledge model has {km} states/{km_actions} actions but the MDP has {mdp}/{mdp_actions}")]
    Mismatch {
        km: usize,
        km_actions: usize,
        mdp: usize,
        mdp_actions: usize,
    },
    #[error(transparent)]
    Fsa(#[from] FsaError),
}

/// Automaton successor of `q` on the observation `obs`.
pub fn advance(fsa: &Fsa, q: usize, obs: PropSet) -> Result<usize, FsaError> {
    fsa.advance(q, obs)
}

/// The state whose label the automaton reads on a move `from -> to`.
///
/// By default the automaton consumes the label of the state being entered,
/// which makes the initial-state rule a special case of the step rule.
#[inline]
pub fn label_source(from: usize, to: usize) -> usize {
    if cfg!(feature = "current-state-labels") {
        from
    } else {
        let _ = from;
        to
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProductStats {
    pub states: usize,
    pub initial: usize,
    pub accepting: usize,
    pub reachable: usize,
    pub fsa_states_reached: usize,
}

/// Product MDP over dense indices `p = s * |Q| + q`.
///
/// Only the support and likely-successor structure is kept; true transition
/// probabilities stay with the simulator.
#[derive(Debug, Clone)]
pub struct ProductMdp {
    num_mdp_states: usize,
    num_fsa_states: usize,
    num_actions: usize,
    idle_action: usize,
    action_names: Vec<String>,
    knowledge: KnowledgeModel,
    // next_q[q * |S| + s] = advance(q, l(s))
    next_q: Vec<usize>,
    fsa_accepting: Vec<bool>,
    fsa_initial: usize,
    initial_of: Vec<usize>,
    initial: Vec<usize>,
    rewards: Vec<f64>,
    warnings: Vec<String>,
}

impl ProductMdp {
    pub fn num_states(&self) -> usize {
        self.num_mdp_states * self.num_fsa_states
    }

    pub fn num_mdp_states(&self) -> usize {
        self.num_mdp_states
    }

    pub fn num_fsa_states(&self) -> usize {
        self.num_fsa_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn idle_action(&self) -> usize {
        self.idle_action
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn epsilon(&self) -> f64 {
        self.knowledge.epsilon()
    }

    pub fn knowledge(&self) -> &KnowledgeModel {
        &self.knowledge
    }

    #[inline]
    pub fn index(&self, s: usize, q: usize) -> usize {
        s * self.num_fsa_states + q
    }

    #[inline]
    pub fn split(&self, p: usize) -> (usize, usize) {
        (p / self.num_fsa_states, p % self.num_fsa_states)
    }

    #[inline]
    pub fn is_accepting(&self, p: usize) -> bool {
        self.fsa_accepting[p % self.num_fsa_states]
    }

    pub fn fsa_is_accepting(&self, q: usize) -> bool {
        self.fsa_accepting[q]
    }

    pub fn fsa_initial(&self) -> usize {
        self.fsa_initial
    }

    /// Automaton state after the MDP moves `from -> to` while in `q`.
    #[inline]
    pub fn fsa_successor(&self, q: usize, from: usize, to: usize) -> usize {
        self.next_q[q * self.num_mdp_states + label_source(from, to)]
    }

    /// Product successor of `p` when the MDP lands in `to`.
    #[inline]
    pub fn successor(&self, p: usize, to: usize) -> usize {
        let (s, q) = self.split(p);
        self.index(to, self.fsa_successor(q, s, to))
    }

    /// Distinct initial product states.
    pub fn initial_states(&self) -> &[usize] {
        &self.initial
    }

    /// Initial product state of an episode starting in MDP state `s`.
    pub fn initial_for(&self, s: usize) -> usize {
        self.initial_of[s]
    }

    pub fn reward(&self, p: usize) -> f64 {
        self.rewards[p / self.num_fsa_states]
    }

    pub fn support(&self, p: usize, a: usize) -> impl Iterator<Item = usize> + '_ {
        let (s, _) = self.split(p);
        self.knowledge
            .support(s, a)
            .iter()
            .map(move |&to| self.successor(p, to))
    }

    pub fn likely(&self, p: usize, a: usize) -> impl Iterator<Item = usize> + '_ {
        let (s, _) = self.split(p);
        self.knowledge
            .likely(s, a)
            .iter()
            .map(move |&to| self.successor(p, to))
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Product states reachable from the initial set through support edges.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue: VecDeque<usize> = self.initial.iter().copied().collect();
        for &p in &self.initial {
            seen[p] = true;
        }
        while let Some(p) = queue.pop_front() {
            for a in 0..self.num_actions {
                for next in self.support(p, a) {
                    if !seen[next] {
                        seen[next] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
        seen
    }

    pub fn stats(&self) -> ProductStats {
        let reach = self.reachable();
        let mut fsa_seen = vec![false; self.num_fsa_states];
        for (p, &r) in reach.iter().enumerate() {
            if r {
                fsa_seen[self.split(p).1] = true;
            }
        }
        ProductStats {
            states: self.num_states(),
            initial: self.initial.len(),
            accepting: (0..self.num_states())
                .filter(|&p| self.is_accepting(p))
                .count(),
            reachable: reach.iter().filter(|&&r| r).count(),
            fsa_states_reached: fsa_seen.iter().filter(|&&r| r).count(),
        }
    }
}

/// Composes the knowledge model with the automaton.
///
/// Every MDP proposition must be part of the automaton alphabet; see
/// [`Fsa::with_alphabet`] for widening an automaton that ignores some labels.
pub fn build_product(
    mdp: &LabeledMdp,
    km: &KnowledgeModel,
    fsa: &Fsa,
) -> Result<ProductMdp, ProductError> {
    if km.num_states() != mdp.num_states() || km.num_actions() != mdp.num_actions() {
        return Err(ProductError::Mismatch {
            km: km.num_states(),
            km_actions: km.num_actions(),
            mdp: mdp.num_states(),
            mdp_actions: mdp.num_actions(),
        });
    }
    // translate MDP label masks into the automaton alphabet
    let mut remap = Vec::with_capacity(mdp.ap().len());
    for name in mdp.ap() {
        let idx = fsa
            .prop_index(name)
            .ok_or_else(|| ProductError::UnknownProposition(name.clone()))?;
        remap.push(idx);
    }
    let n = mdp.num_states();
    let labels: Vec<PropSet> = (0..n)
        .map(|s| {
            mdp.label(s)
                .iter()
                .fold(PropSet::EMPTY, |m, i| m.union(PropSet::singleton(remap[i])))
        })
        .collect();
    let nq = fsa.num_states();
    let mut next_q = vec![0; nq * n];
    for q in 0..nq {
        for s in 0..n {
            next_q[q * n + s] = advance(fsa, q, labels[s])?;
        }
    }
    let fsa_accepting: Vec<bool> = (0..nq).map(|q| fsa.is_accepting(q)).collect();
    let initial_of: Vec<usize> = (0..n)
        .map(|s| s * nq + next_q[fsa.initial() * n + s])
        .collect();
    let mut initial = initial_of.clone();
    initial.sort_unstable();
    initial.dedup();

    let mut product = ProductMdp {
        num_mdp_states: n,
        num_fsa_states: nq,
        num_actions: mdp.num_actions(),
        idle_action: mdp.idle_action(),
        action_names: mdp.action_names().to_vec(),
        knowledge: km.clone(),
        next_q,
        fsa_accepting,
        fsa_initial: fsa.initial(),
        initial_of,
        initial,
        rewards: (0..n).map(|s| mdp.reward(s)).collect(),
        warnings: Vec::new(),
    };
    let reach = product.reachable();
    let mut fsa_seen = vec![false; nq];
    for (p, &r) in reach.iter().enumerate() {
        if r {
            fsa_seen[p % nq] = true;
        }
    }
    for (q, seen) in fsa_seen.iter().enumerate() {
        if !seen {
            let msg = format!("automaton state {q} is unreachable in the product");
            log::warn!("{msg}");
            product.warnings.push(msg);
        }
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_gridworld, Cell, GridConfig, LabelCell};
    use crate::twtl::{parse_twtl, translate_to_fsa};

    fn store_mdp() -> LabeledMdp {
        LabeledMdp::new(
            vec!["Move".into(), "Stay".into()],
            1,
            vec![
                vec![vec![(1, 0.8), (2, 0.2)], vec![(0, 1.0)]],
                vec![vec![(0, 0.9), (2, 0.1)], vec![(1, 1.0)]],
                vec![vec![(0, 0.5), (1, 0.5)], vec![(2, 1.0)]],
            ],
            vec![0.0; 3],
            vec!["Store".into(), "Home".into(), "Charging".into()],
            vec![
                vec!["Store".into()],
                vec!["Home".into()],
                vec!["Charging".into()],
            ],
        )
        .unwrap()
    }

    fn fsa_for(text: &str, extra: &[String]) -> Fsa {
        translate_to_fsa(&parse_twtl(text).unwrap())
            .unwrap()
            .with_alphabet(extra.iter().map(String::as_str))
            .unwrap()
    }

    #[test]
    fn store_state_starts_accepted() {
        let mdp = store_mdp();
        let km = KnowledgeModel::from_mdp(&mdp, 0.2).unwrap();
        let fsa = fsa_for("H^0 Store", mdp.ap());
        let pm = build_product(&mdp, &km, &fsa).unwrap();
        let p0 = pm.initial_for(0);
        assert!(pm.is_accepting(p0));
        assert_eq!(pm.split(p0).0, 0);
        assert!(!pm.is_accepting(pm.initial_for(1)));
        assert!(pm.num_states() <= mdp.num_states() * fsa.num_states());
    }

    #[test]
    fn unknown_proposition() {
        let mdp = store_mdp();
        let km = KnowledgeModel::from_mdp(&mdp, 0.2).unwrap();
        let fsa = fsa_for("H^0 Store", &[]);
        assert!(matches!(
            build_product(&mdp, &km, &fsa),
            Err(ProductError::UnknownProposition(_))
        ));
    }

    #[test]
    fn advance_on_holds() {
        let f = fsa_for("H^0 A", &[]);
        let a = f.mask(["A"]).unwrap();
        let q0 = f.initial();
        let acc = advance(&f, q0, a).unwrap();
        assert!(f.is_accepting(acc));
        assert_eq!(advance(&f, q0, PropSet::EMPTY).unwrap(), q0);
        assert_eq!(advance(&f, acc, PropSet::EMPTY).unwrap(), acc);
        assert_eq!(advance(&f, acc, a).unwrap(), acc);

        let f = fsa_for("H^1 A", &[]);
        let q1 = advance(&f, f.initial(), a).unwrap();
        assert!(f.is_accepting(advance(&f, q1, a).unwrap()));
        assert_eq!(advance(&f, q1, PropSet::EMPTY).unwrap(), f.initial());
    }

    #[test]
    fn product_relations() {
        let cfg = GridConfig {
            description: String::new(),
            width: 4,
            height: 3,
            obstacles: vec![Cell(1, 1)],
            labels: vec![
                LabelCell {
                    cell: Cell(3, 2),
                    prop: "A".into(),
                },
                LabelCell {
                    cell: Cell(0, 2),
                    prop: "B".into(),
                },
            ],
            rewards: vec![],
            intended_probability: 0.9,
            epsilon_agent: 0.1,
            start: Cell(0, 0),
        };
        let (_, mdp, km) = build_gridworld(&cfg).unwrap();
        let fsa = fsa_for("H^1 A . H^0 B", mdp.ap());
        let pm = build_product(&mdp, &km, &fsa).unwrap();
        let labels: Vec<PropSet> = (0..mdp.num_states())
            .map(|s| fsa.mask(mdp.label_names(s)).unwrap())
            .collect();
        for p in 0..pm.num_states() {
            let (s, q) = pm.split(p);
            assert_eq!(pm.reward(p), mdp.reward(s));
            assert_eq!(
                pm.is_accepting(p),
                fsa.is_accepting(q),
                "accepting set is S x F"
            );
            for a in 0..pm.num_actions() {
                let succ: Vec<usize> = pm.support(p, a).collect();
                assert_eq!(succ.len(), km.support(s, a).len());
                for (&s2, &p2) in km.support(s, a).iter().zip(&succ) {
                    assert_eq!(pm.split(p2), (s2, fsa.advance(q, labels[s2]).unwrap()));
                }
                // each likely MDP successor maps to exactly one product state
                let likely: Vec<usize> = pm.likely(p, a).collect();
                assert_eq!(likely.len(), km.likely(s, a).len());
            }
        }
        for s in 0..mdp.num_states() {
            let p = pm.initial_for(s);
            assert_eq!(
                pm.split(p),
                (s, fsa.advance(fsa.initial(), labels[s]).unwrap())
            );
        }
        let stats = pm.stats();
        assert_eq!(stats.states, mdp.num_states() * fsa.num_states());
        assert_eq!(stats.accepting, mdp.num_states());
        assert!(stats.reachable <= stats.states);
    }
}
