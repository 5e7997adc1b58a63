use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Maximum number of atomic propositions an automaton can mention.
pub const MAX_PROPS: usize = 64;

/// A set of atomic propositions, as a bitmask over an automaton's alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PropSet(pub u64);

impl PropSet {
    pub const EMPTY: PropSet = PropSet(0);

    pub fn singleton(index: usize) -> Self {
        PropSet(1 << index)
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn union(self, other: PropSet) -> PropSet {
        PropSet(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: PropSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: PropSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_PROPS).filter(move |i| self.contains(*i))
    }
}

/// Transition label: every `require` proposition observed, no `forbid` proposition observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Guard {
    pub require: PropSet,
    pub forbid: PropSet,
}

impl Guard {
    pub const TRUE: Guard = Guard {
        require: PropSet::EMPTY,
        forbid: PropSet::EMPTY,
    };

    pub fn new(require: PropSet, forbid: PropSet) -> Self {
        Guard { require, forbid }
    }

    pub fn matches(&self, obs: PropSet) -> bool {
        self.require.is_subset(obs) && self.forbid.is_disjoint(obs)
    }

    pub fn is_satisfiable(&self) -> bool {
        self.require.is_disjoint(self.forbid)
    }

    /// Conjunction, or `None` when the two guards exclude each other.
    pub fn and(&self, other: &Guard) -> Option<Guard> {
        let g = Guard {
            require: self.require.union(other.require),
            forbid: self.forbid.union(other.forbid),
        };
        g.is_satisfiable().then_some(g)
    }

    pub fn overlaps(&self, other: &Guard) -> bool {
        self.and(other).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub guard: Guard,
    pub to: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum FsaError {
    #[error("state {state}: guards matching {obs:?} lead to both {first} and {second}")]
    Nondeterministic {
        state: usize,
        obs: Option<u64>,
        first: usize,
        second: usize,
    },
    #[error("state {0} does not exist")]
    UnknownState(usize),
    #[error("proposition {0:?} is not in the automaton alphabet")]
    UnknownProposition(String),
    #[error("alphabet exceeds {MAX_PROPS} propositions")]
    AlphabetTooLarge,
    #[error("automaton exceeds the state cap of {0}")]
    TooManyStates(usize),
    #[error("malformed automaton document: {0}")]
    Schema(String),
    #[error("dangling state reference {0}")]
    DanglingState(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Deterministic finite-state automaton over sets of atomic propositions.
///
/// Transitions carry [`Guard`]s instead of explicit letters of `2^AP`. An input
/// with no matching guard leaves the state unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsa {
    ap: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    edges: Vec<Vec<Edge>>,
}

impl Fsa {
    /// Builds an automaton and checks the structural invariants.
    pub fn new(
        ap: Vec<String>,
        initial: usize,
        accepting: Vec<bool>,
        edges: Vec<Vec<Edge>>,
    ) -> Result<Self, FsaError> {
        if ap.len() > MAX_PROPS {
            return Err(FsaError::AlphabetTooLarge);
        }
        let n = edges.len();
        if initial >= n {
            return Err(FsaError::UnknownState(initial));
        }
        if accepting.len() != n {
            return Err(FsaError::Schema(format!(
                "{} accepting flags for {} states",
                accepting.len(),
                n
            )));
        }
        for list in &edges {
            for e in list {
                if e.to >= n {
                    return Err(FsaError::UnknownState(e.to));
                }
            }
        }
        let fsa = Fsa {
            ap,
            initial,
            accepting,
            edges,
        };
        fsa.check_deterministic()?;
        Ok(fsa)
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter_map(|(q, &acc)| acc.then_some(q))
    }

    pub fn edges(&self, q: usize) -> &[Edge] {
        &self.edges[q]
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.ap.iter().position(|p| p == name)
    }

    /// Converts proposition names to a mask over this automaton's alphabet.
    pub fn mask<'a, I>(&self, names: I) -> Result<PropSet, FsaError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut mask = PropSet::EMPTY;
        for name in names {
            let idx = self
                .prop_index(name)
                .ok_or_else(|| FsaError::UnknownProposition(name.to_string()))?;
            mask = mask.union(PropSet::singleton(idx));
        }
        Ok(mask)
    }

    /// Successor of `q` on observation `obs`; `q` itself when no guard matches.
    pub fn advance(&self, q: usize, obs: PropSet) -> Result<usize, FsaError> {
        let list = self.edges.get(q).ok_or(FsaError::UnknownState(q))?;
        let mut next: Option<usize> = None;
        for e in list {
            if e.guard.matches(obs) {
                match next {
                    None => next = Some(e.to),
                    Some(prev) if prev != e.to => {
                        return Err(FsaError::Nondeterministic {
                            state: q,
                            obs: Some(obs.0),
                            first: prev,
                            second: e.to,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(next.unwrap_or(q))
    }

    /// Runs the automaton over a word and returns the first index at which an
    /// accepting state is entered.
    pub fn first_acceptance(&self, word: &[PropSet]) -> Result<Option<usize>, FsaError> {
        let mut q = self.initial;
        for (t, obs) in word.iter().enumerate() {
            q = self.advance(q, *obs)?;
            if self.accepting[q] {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    /// Copy of the automaton whose alphabet also lists `extra` propositions.
    /// Guards are untouched, so the accepted language over the old
    /// propositions does not change.
    pub fn with_alphabet<'a, I>(&self, extra: I) -> Result<Fsa, FsaError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut ap = self.ap.clone();
        for name in extra {
            if !ap.iter().any(|p| p == name) {
                ap.push(name.to_string());
            }
        }
        if ap.len() > MAX_PROPS {
            return Err(FsaError::AlphabetTooLarge);
        }
        Ok(Fsa { ap, ..self.clone() })
    }

    fn check_deterministic(&self) -> Result<(), FsaError> {
        for (q, list) in self.edges.iter().enumerate() {
            for (i, a) in list.iter().enumerate() {
                for b in &list[i + 1..] {
                    if a.to != b.to && a.guard.overlaps(&b.guard) {
                        return Err(FsaError::Nondeterministic {
                            state: q,
                            obs: None,
                            first: a.to,
                            second: b.to,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Accepting states whose only behaviour is an unconditional self-loop.
    pub fn is_absorbing(&self, q: usize) -> bool {
        let list = &self.edges[q];
        list.iter().all(|e| e.to == q) && list.iter().any(|e| e.guard == Guard::TRUE)
    }

    fn guard_label(&self, g: &Guard) -> String {
        let mut parts = Vec::new();
        for i in g.require.iter() {
            parts.push(self.ap[i].clone());
        }
        for i in g.forbid.iter() {
            parts.push(format!("!{}", self.ap[i]));
        }
        if parts.is_empty() {
            "true".to_string()
        } else {
            parts.join(" & ")
        }
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph fsa {\n  rankdir=LR;\n  init [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.accepting[q] {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  q{q} [shape={shape}];");
        }
        let _ = writeln!(out, "  init -> q{};", self.initial);
        for (q, list) in self.edges.iter().enumerate() {
            for e in list {
                let _ = writeln!(
                    out,
                    "  q{q} -> q{} [label=\"{}\"];",
                    e.to,
                    self.guard_label(&e.guard)
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

/// State reference inside an automaton document: an integer or a name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Id(u64),
    Name(String),
}

impl std::fmt::Display for StateRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateRef::Id(n) => write!(f, "{n}"),
            StateRef::Name(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: StateRef,
    #[serde(default)]
    pub require: Vec<String>,
    #[serde(default)]
    pub forbid: Vec<String>,
    pub to: StateRef,
}

/// JSON form of an automaton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsaDocument {
    pub states: Vec<StateRef>,
    pub initial: StateRef,
    pub accepting: Vec<StateRef>,
    pub ap: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
}

/// Something worth telling the user about a loaded document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FsaWarning {
    /// The accepting state had other behaviour and was made absorbing.
    AbsorbingCompleted { state: String },
}

impl std::fmt::Display for FsaWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FsaWarning::AbsorbingCompleted { state } => write!(
                f,
                "accepting state {state} was not absorbing; replaced its transitions with an unconditional self-loop"
            ),
        }
    }
}

pub fn save_fsa(fsa: &Fsa) -> FsaDocument {
    let names = |mask: PropSet| mask.iter().map(|i| fsa.ap[i].clone()).collect::<Vec<_>>();
    FsaDocument {
        states: (0..fsa.num_states() as u64).map(StateRef::Id).collect(),
        initial: StateRef::Id(fsa.initial as u64),
        accepting: fsa.accepting_states().map(|q| StateRef::Id(q as u64)).collect(),
        ap: fsa.ap.clone(),
        transitions: fsa
            .edges
            .iter()
            .enumerate()
            .flat_map(|(q, list)| {
                list.iter().map(move |e| (q, e))
            })
            .map(|(q, e)| TransitionDoc {
                from: StateRef::Id(q as u64),
                require: names(e.guard.require),
                forbid: names(e.guard.forbid),
                to: StateRef::Id(e.to as u64),
            })
            .collect(),
    }
}

pub fn save_fsa_json(fsa: &Fsa) -> String {
    serde_json::to_string_pretty(&save_fsa(fsa)).expect("automaton documents always serialize")
}

/// Validates a document and converts it into an automaton.
pub fn load_fsa(doc: &FsaDocument) -> Result<(Fsa, Vec<FsaWarning>), FsaError> {
    if doc.ap.len() > MAX_PROPS {
        return Err(FsaError::AlphabetTooLarge);
    }
    let mut ap_index = HashMap::new();
    for (i, p) in doc.ap.iter().enumerate() {
        if ap_index.insert(p.as_str(), i).is_some() {
            return Err(FsaError::Schema(format!("proposition {p:?} listed twice")));
        }
    }
    let mut index = HashMap::new();
    for (i, s) in doc.states.iter().enumerate() {
        if index.insert(s.clone(), i).is_some() {
            return Err(FsaError::Schema(format!("state {s} listed twice")));
        }
    }
    let lookup = |s: &StateRef| {
        index
            .get(s)
            .copied()
            .ok_or_else(|| FsaError::DanglingState(s.to_string()))
    };
    let mask = |names: &[String]| -> Result<PropSet, FsaError> {
        let mut m = PropSet::EMPTY;
        for n in names {
            let i = ap_index
                .get(n.as_str())
                .ok_or_else(|| FsaError::UnknownProposition(n.clone()))?;
            m = m.union(PropSet::singleton(*i));
        }
        Ok(m)
    };

    let n = doc.states.len();
    let initial = lookup(&doc.initial)?;
    let mut accepting = vec![false; n];
    for s in &doc.accepting {
        accepting[lookup(s)?] = true;
    }
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new(); n];
    for t in &doc.transitions {
        let from = lookup(&t.from)?;
        let to = lookup(&t.to)?;
        let guard = Guard::new(mask(&t.require)?, mask(&t.forbid)?);
        if !guard.is_satisfiable() {
            return Err(FsaError::Schema(format!(
                "transition from {} requires and forbids the same proposition",
                t.from
            )));
        }
        edges[from].push(Edge { guard, to });
    }

    let mut warnings = Vec::new();
    for q in 0..n {
        if !accepting[q] {
            continue;
        }
        let absorbing = edges[q].iter().all(|e| e.to == q)
            && edges[q].iter().any(|e| e.guard == Guard::TRUE);
        if !absorbing {
            edges[q].clear();
            edges[q].push(Edge {
                guard: Guard::TRUE,
                to: q,
            });
            let w = FsaWarning::AbsorbingCompleted {
                state: doc.states[q].to_string(),
            };
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let fsa = Fsa::new(doc.ap.clone(), initial, accepting, edges)?;
    Ok((fsa, warnings))
}

pub fn load_fsa_json(text: &str) -> Result<(Fsa, Vec<FsaWarning>), FsaError> {
    let doc: FsaDocument = serde_json::from_str(text)?;
    load_fsa(&doc)
}

/// Propositions used in at least one guard.
pub fn used_props(fsa: &Fsa) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for list in &fsa.edges {
        for e in list {
            for i in e.guard.require.union(e.guard.forbid).iter() {
                out.insert(fsa.ap[i].clone());
            }
        }
    }
    out
}
