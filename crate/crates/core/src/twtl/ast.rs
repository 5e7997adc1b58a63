use std::collections::BTreeSet;
use std::fmt;

/// The proposition observed by a hold operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    True,
    Atom(String),
}

impl Symbol {
    pub fn atom(name: impl Into<String>) -> Self {
        Symbol::Atom(name.into())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::True => f.write_str("true"),
            Symbol::Atom(name) => f.write_str(name),
        }
    }
}

/// Syntax tree of a formula in the supported TWTL fragment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TwtlAst {
    /// `H^d s` (or `H^d !s` when `negated`).
    Hold {
        duration: u32,
        symbol: Symbol,
        negated: bool,
    },
    And(Box<TwtlAst>, Box<TwtlAst>),
    Or(Box<TwtlAst>, Box<TwtlAst>),
    /// Negation; only a `Hold` child is accepted by [`TwtlAst::validate`].
    Not(Box<TwtlAst>),
    Concat(Box<TwtlAst>, Box<TwtlAst>),
    /// `[child]^[start,end]`.
    Within {
        child: Box<TwtlAst>,
        start: u32,
        end: u32,
    },
}

/// A structural problem with an otherwise well-formed tree.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AstError {
    #[error("window [{start},{end}] has start after end")]
    InvertedWindow { start: u32, end: u32 },
    #[error("window [{start},{end}] is shorter than its body's time bound {bound}")]
    WindowTooShort { start: u32, end: u32, bound: u64 },
    #[error("negation is only supported directly over a hold operator")]
    NegatedComposite,
    #[error("a within operator may not directly wrap another within operator")]
    NestedWithin,
}

impl TwtlAst {
    pub fn hold(duration: u32, symbol: impl Into<String>) -> Self {
        TwtlAst::Hold {
            duration,
            symbol: Symbol::Atom(symbol.into()),
            negated: false,
        }
    }

    pub fn hold_not(duration: u32, symbol: impl Into<String>) -> Self {
        TwtlAst::Hold {
            duration,
            symbol: Symbol::Atom(symbol.into()),
            negated: true,
        }
    }

    pub fn within(child: TwtlAst, start: u32, end: u32) -> Self {
        TwtlAst::Within {
            child: Box::new(child),
            start,
            end,
        }
    }

    pub fn concat(left: TwtlAst, right: TwtlAst) -> Self {
        TwtlAst::Concat(Box::new(left), Box::new(right))
    }

    pub fn and(left: TwtlAst, right: TwtlAst) -> Self {
        TwtlAst::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: TwtlAst, right: TwtlAst) -> Self {
        TwtlAst::Or(Box::new(left), Box::new(right))
    }

    pub fn not(child: TwtlAst) -> Self {
        TwtlAst::Not(Box::new(child))
    }

    /// Maximum number of steps (after the first) needed to satisfy the formula.
    pub fn time_bound(&self) -> u64 {
        match self {
            TwtlAst::Hold { duration, .. } => u64::from(*duration),
            TwtlAst::Within { end, .. } => u64::from(*end),
            TwtlAst::And(l, r) | TwtlAst::Or(l, r) => l.time_bound().max(r.time_bound()),
            TwtlAst::Not(child) => child.time_bound(),
            TwtlAst::Concat(l, r) => l.time_bound() + r.time_bound() + 1,
        }
    }

    /// Checks window ordering, window length and the fragment restrictions.
    pub fn validate(&self) -> Result<(), AstError> {
        match self {
            TwtlAst::Hold { .. } => Ok(()),
            TwtlAst::And(l, r) | TwtlAst::Or(l, r) | TwtlAst::Concat(l, r) => {
                l.validate()?;
                r.validate()
            }
            TwtlAst::Not(child) => match child.as_ref() {
                TwtlAst::Hold { .. } => Ok(()),
                _ => Err(AstError::NegatedComposite),
            },
            TwtlAst::Within { child, start, end } => {
                if start > end {
                    return Err(AstError::InvertedWindow {
                        start: *start,
                        end: *end,
                    });
                }
                if matches!(child.as_ref(), TwtlAst::Within { .. }) {
                    return Err(AstError::NestedWithin);
                }
                let bound = child.time_bound();
                if bound > u64::from(*end) {
                    return Err(AstError::WindowTooShort {
                        start: *start,
                        end: *end,
                        bound,
                    });
                }
                child.validate()
            }
        }
    }

    /// Atomic propositions mentioned anywhere in the formula.
    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        match self {
            TwtlAst::Hold { symbol, .. } => {
                if let Symbol::Atom(name) = symbol {
                    out.insert(name.clone());
                }
            }
            TwtlAst::And(l, r) | TwtlAst::Or(l, r) | TwtlAst::Concat(l, r) => {
                l.collect_props(out);
                r.collect_props(out);
            }
            TwtlAst::Not(child) | TwtlAst::Within { child, .. } => child.collect_props(out),
        }
    }
}

impl fmt::Display for TwtlAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwtlAst::Hold {
                duration,
                symbol,
                negated,
            } => {
                let bang = if *negated { "!" } else { "" };
                write!(f, "H^{duration} {bang}{symbol}")
            }
            TwtlAst::And(l, r) => write!(f, "({l} & {r})"),
            TwtlAst::Or(l, r) => write!(f, "({l} | {r})"),
            TwtlAst::Not(child) => write!(f, "!{child}"),
            TwtlAst::Concat(l, r) => write!(f, "({l} . {r})"),
            TwtlAst::Within { child, start, end } => write!(f, "[{child}]^[{start},{end}]"),
        }
    }
}
