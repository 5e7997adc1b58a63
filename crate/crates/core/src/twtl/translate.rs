//! Formula-to-automaton translation.
//!
//! Each sub-formula compiles to a complete automaton with a single absorbing
//! accepting state. Windows are relaxed: a sub-task may start at any time after
//! the window opens, and the episode horizon is what enforces the deadline.

use std::collections::{HashMap, VecDeque};

use super::ast::{AstError, Symbol, TwtlAst};
use super::fsa::{Edge, Fsa, FsaError, Guard, PropSet, MAX_PROPS};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum TranslateError {
    #[error(transparent)]
    Invalid(#[from] AstError),
    #[error("formula mentions more than {MAX_PROPS} propositions")]
    AlphabetTooLarge,
    #[error("automaton exceeds the state cap of {0}")]
    TooManyStates(usize),
    #[error(transparent)]
    Fsa(#[from] FsaError),
}

/// Automaton under construction with exactly one accepting state.
struct Piece {
    edges: Vec<Vec<Edge>>,
    initial: usize,
    accept: usize,
}

impl Piece {
    fn len(&self) -> usize {
        self.edges.len()
    }
}

struct Translator<'a> {
    props: &'a [String],
    cap: usize,
}

fn push(list: &mut Vec<Edge>, guard: Option<Guard>, to: usize) {
    if let Some(guard) = guard {
        list.push(Edge { guard, to });
    }
}

impl Translator<'_> {
    fn check_cap(&self, n: usize) -> Result<(), TranslateError> {
        if n > self.cap {
            Err(TranslateError::TooManyStates(self.cap))
        } else {
            Ok(())
        }
    }

    /// Guards for "the hold condition is observed" and its complement.
    fn hold_guards(&self, symbol: &Symbol, negated: bool) -> (Option<Guard>, Option<Guard>) {
        let (pos, neg) = match symbol {
            Symbol::True => (Some(Guard::TRUE), None),
            Symbol::Atom(name) => {
                let idx = self
                    .props
                    .iter()
                    .position(|p| p == name)
                    .expect("alphabet collected from the formula");
                let m = PropSet::singleton(idx);
                (
                    Some(Guard::new(m, PropSet::EMPTY)),
                    Some(Guard::new(PropSet::EMPTY, m)),
                )
            }
        };
        if negated {
            (neg, pos)
        } else {
            (pos, neg)
        }
    }

    fn build(&self, ast: &TwtlAst) -> Result<Piece, TranslateError> {
        let piece = match ast {
            TwtlAst::Hold {
                duration,
                symbol,
                negated,
            } => {
                let (hit, miss) = self.hold_guards(symbol, *negated);
                self.hold(*duration as usize, hit, miss)?
            }
            TwtlAst::Not(child) => match child.as_ref() {
                TwtlAst::Hold {
                    duration,
                    symbol,
                    negated,
                } => {
                    let (hit, miss) = self.hold_guards(symbol, *negated);
                    self.broken_hold(*duration as usize, hit, miss)?
                }
                _ => return Err(AstError::NegatedComposite.into()),
            },
            TwtlAst::Within { child, start, .. } => {
                let body = self.build(child)?;
                self.delay(body, *start as usize)?
            }
            TwtlAst::Concat(l, r) => {
                let left = self.build(l)?;
                let right = self.build(r)?;
                self.concat(left, right)?
            }
            TwtlAst::And(l, r) => {
                let left = self.build(l)?;
                let right = self.build(r)?;
                self.product(&left, &right, |a, b| a && b)?
            }
            TwtlAst::Or(l, r) => {
                let left = self.build(l)?;
                let right = self.build(r)?;
                self.product(&left, &right, |a, b| a || b)?
            }
        };
        self.check_cap(piece.len())?;
        Ok(piece)
    }

    /// Counts consecutive observations of the hold condition; a miss restarts the count.
    fn hold(
        &self,
        d: usize,
        hit: Option<Guard>,
        miss: Option<Guard>,
    ) -> Result<Piece, TranslateError> {
        self.check_cap(d + 2)?;
        let accept = d + 1;
        let mut edges = vec![Vec::new(); d + 2];
        for (k, list) in edges.iter_mut().enumerate().take(accept) {
            push(list, hit, k + 1);
            push(list, miss, 0);
        }
        edges[accept].push(Edge {
            guard: Guard::TRUE,
            to: accept,
        });
        Ok(Piece {
            edges,
            initial: 0,
            accept,
        })
    }

    /// Accepts once `d + 1` observations have been consumed and at least one
    /// window of that length contains a miss.
    fn broken_hold(
        &self,
        d: usize,
        hit: Option<Guard>,
        miss: Option<Guard>,
    ) -> Result<Piece, TranslateError> {
        // clean_k = k consumed, no miss yet (k = 0..=d, clean_d saturates)
        // dirty_k = k consumed, miss seen (k = 1..=d)
        let n = 2 * d + 2;
        self.check_cap(n)?;
        let accept = 2 * d + 1;
        let clean = |k: usize| k;
        let dirty = |k: usize| d + k;
        let mut edges = vec![Vec::new(); n];
        for k in 0..d {
            push(&mut edges[clean(k)], hit, clean(k + 1));
            push(&mut edges[clean(k)], miss, dirty(k + 1));
        }
        push(&mut edges[clean(d)], hit, clean(d));
        push(&mut edges[clean(d)], miss, accept);
        for k in 1..=d {
            let next = if k == d { accept } else { dirty(k + 1) };
            edges[dirty(k)].push(Edge {
                guard: Guard::TRUE,
                to: next,
            });
        }
        edges[accept].push(Edge {
            guard: Guard::TRUE,
            to: accept,
        });
        Ok(Piece {
            edges,
            initial: 0,
            accept,
        })
    }

    /// Prepends `steps` unconditional waiting states.
    fn delay(&self, body: Piece, steps: usize) -> Result<Piece, TranslateError> {
        if steps == 0 {
            return Ok(body);
        }
        self.check_cap(body.len() + steps)?;
        let mut edges: Vec<Vec<Edge>> = (0..steps)
            .map(|k| {
                let to = if k + 1 < steps {
                    k + 1
                } else {
                    steps + body.initial
                };
                vec![Edge {
                    guard: Guard::TRUE,
                    to,
                }]
            })
            .collect();
        for list in body.edges {
            edges.push(
                list.into_iter()
                    .map(|e| Edge {
                        guard: e.guard,
                        to: e.to + steps,
                    })
                    .collect(),
            );
        }
        Ok(Piece {
            edges,
            initial: 0,
            accept: body.accept + steps,
        })
    }

    /// Identifies the left accepting state with the right initial state.
    fn concat(&self, left: Piece, right: Piece) -> Result<Piece, TranslateError> {
        self.check_cap(left.len() + right.len() - 1)?;
        // left states keep their index except the accepting one, which is removed
        let left_index = |q: usize| if q < left.accept { q } else { q - 1 };
        let offset = left.len() - 1;
        let right_index = |q: usize| q + offset;
        let mut edges = Vec::with_capacity(left.len() + right.len() - 1);
        for (q, list) in left.edges.iter().enumerate() {
            if q == left.accept {
                continue;
            }
            edges.push(
                list.iter()
                    .map(|e| Edge {
                        guard: e.guard,
                        to: if e.to == left.accept {
                            right_index(right.initial)
                        } else {
                            left_index(e.to)
                        },
                    })
                    .collect(),
            );
        }
        for list in &right.edges {
            edges.push(
                list.iter()
                    .map(|e| Edge {
                        guard: e.guard,
                        to: right_index(e.to),
                    })
                    .collect(),
            );
        }
        let initial = if left.initial == left.accept {
            right_index(right.initial)
        } else {
            left_index(left.initial)
        };
        Ok(Piece {
            edges,
            initial,
            accept: right_index(right.accept),
        })
    }

    /// Synchronous product; every accepting pair collapses into one state.
    fn product(
        &self,
        left: &Piece,
        right: &Piece,
        accepts: impl Fn(bool, bool) -> bool,
    ) -> Result<Piece, TranslateError> {
        let accepting = |a: usize, b: usize| accepts(a == left.accept, b == right.accept);
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Vec<Edge>> = vec![vec![]];
        // state 0 is the collapsed accepting state
        edges[0].push(Edge {
            guard: Guard::TRUE,
            to: 0,
        });
        let start = (left.initial, right.initial);
        let initial = if accepting(start.0, start.1) {
            0
        } else {
            index.insert(start, 1);
            edges.push(Vec::new());
            1
        };
        let mut queue = VecDeque::new();
        if initial != 0 {
            queue.push_back(start);
        }
        while let Some((a, b)) = queue.pop_front() {
            let from = index[&(a, b)];
            let mut out: Vec<Edge> = Vec::new();
            for ea in &left.edges[a] {
                for eb in &right.edges[b] {
                    let Some(guard) = ea.guard.and(&eb.guard) else {
                        continue;
                    };
                    let to = if accepting(ea.to, eb.to) {
                        0
                    } else if let Some(&id) = index.get(&(ea.to, eb.to)) {
                        id
                    } else {
                        let id = edges.len();
                        self.check_cap(id + 1)?;
                        index.insert((ea.to, eb.to), id);
                        edges.push(Vec::new());
                        queue.push_back((ea.to, eb.to));
                        id
                    };
                    out.push(Edge { guard, to });
                }
            }
            edges[from] = out;
        }
        Ok(Piece {
            edges,
            initial,
            accept: 0,
        })
    }
}

/// Translates a formula into an automaton, with a cap on the number of states.
pub fn translate_with_cap(ast: &TwtlAst, cap: usize) -> Result<Fsa, TranslateError> {
    ast.validate()?;
    let props: Vec<String> = ast.propositions().into_iter().collect();
    if props.len() > MAX_PROPS {
        return Err(TranslateError::AlphabetTooLarge);
    }
    let piece = Translator {
        props: &props,
        cap,
    }
    .build(ast)?;
    let mut accepting = vec![false; piece.len()];
    accepting[piece.accept] = true;
    Ok(Fsa::new(props, piece.initial, accepting, piece.edges)?)
}

pub fn translate_to_fsa(ast: &TwtlAst) -> Result<Fsa, TranslateError> {
    translate_with_cap(ast, DEFAULT_STATE_CAP)
}
