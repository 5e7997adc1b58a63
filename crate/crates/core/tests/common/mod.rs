//! Shared oracles and fixtures for the integration and acceptance tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use tlswitch::harness::{Instance, TaskSource};
use tlswitch::model::GridConfig;
use tlswitch::twtl::{Fsa, PropSet, Symbol, TwtlAst};

pub const PROPS: [&str; 2] = ["A", "B"];

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

pub fn case_grid() -> GridConfig {
    GridConfig::load(&configs_dir().join("grid8x8.json")).unwrap()
}

pub const CASE_FORMULA: &str =
    "[H^1 P]^[0,20] . ([H^1 D1]^[0,20] | [H^1 D2]^[0,20]) . [H^1 Base]^[0,20]";
pub const TABLE_FORMULA: &str = "[H^1 P]^[0,8] . [H^1 D1]^[0,8]";

pub fn case_instance(formula: &str, eps: f64) -> Instance {
    Instance::build(&case_grid(), &TaskSource::Formula(formula.into()), Some(eps)).unwrap()
}

/// One-dimensional corridor `0 - 1 - ... - (len-1)` with the goal label at
/// the far end; `Right` moves forward w.p. `forward`, else stays.
pub fn corridor_json(len: i32, forward: f64) -> String {
    format!(
        r#"{{"width":{len},"height":1,"labels":[{{"cell":[{},0],"prop":"A"}}],
            "start":[0,0],"intended_probability":{forward},"epsilon_agent":0.1}}"#,
        len - 1
    )
}

// ---------------------------------------------------------------------------
// TWTL semantics oracle
//
// A word is a sequence of observations, each a bitmask over PROPS. For a
// formula and a start index i the oracle computes E(phi, i): the set of end
// positions j (number of symbols consumed) at which phi, started at i, has
// been met. Windows and holds are "eventually" obligations: a hold may start
// at any index at or after the point it becomes active.

type Mask = u32;

fn holds(symbol: &Symbol, negated: bool, obs: u8) -> bool {
    let v = match symbol {
        Symbol::True => true,
        Symbol::Atom(name) => {
            let bit = PROPS.iter().position(|p| p == name).expect("test alphabet");
            obs & (1 << bit) != 0
        }
    };
    v != negated
}

/// All end positions at or after the smallest one in `m`.
fn up_close(m: Mask, n: usize) -> Mask {
    if m == 0 {
        return 0;
    }
    let low = m.trailing_zeros();
    let all = if n + 1 >= 32 { Mask::MAX } else { (1 << (n + 1)) - 1 };
    all & !((1 << low) - 1)
}

/// `E(phi, i)` for every start `i` in `0..=n`, as bitmasks over end
/// positions `0..=n`.
fn end_sets(ast: &TwtlAst, word: &[u8]) -> Vec<Mask> {
    let n = word.len();
    match ast {
        TwtlAst::Hold {
            duration,
            symbol,
            negated,
        } => {
            let d = *duration as usize;
            (0..=n)
                .map(|i| {
                    let mut m = 0;
                    for t in i..n {
                        if t + d >= n {
                            break;
                        }
                        if (t..=t + d).all(|u| holds(symbol, *negated, word[u])) {
                            m |= 1 << (t + d + 1);
                        }
                    }
                    m
                })
                .collect()
        }
        TwtlAst::Not(child) => {
            let TwtlAst::Hold {
                duration,
                symbol,
                negated,
            } = child.as_ref()
            else {
                panic!("fragment only negates holds")
            };
            let d = *duration as usize;
            (0..=n)
                .map(|i| {
                    let mut m = 0;
                    for t in i..n {
                        if t + d >= n {
                            break;
                        }
                        if (t..=t + d).any(|u| !holds(symbol, *negated, word[u])) {
                            m |= 1 << (t + d + 1);
                        }
                    }
                    m
                })
                .collect()
        }
        TwtlAst::Within { child, start, .. } => {
            let inner = end_sets(child, word);
            (0..=n)
                .map(|i| {
                    let from = i + *start as usize;
                    (from..=n).fold(0, |acc, t| acc | inner[t])
                })
                .collect()
        }
        TwtlAst::Concat(l, r) => {
            let left = end_sets(l, word);
            let right = end_sets(r, word);
            (0..=n)
                .map(|i| {
                    let mut m = 0;
                    for (j, r) in right.iter().enumerate() {
                        if left[i] & (1 << j) != 0 {
                            m |= r;
                        }
                    }
                    m
                })
                .collect()
        }
        TwtlAst::And(l, r) => {
            let left = end_sets(l, word);
            let right = end_sets(r, word);
            (0..=n)
                .map(|i| up_close(left[i], n) & up_close(right[i], n))
                .collect()
        }
        TwtlAst::Or(l, r) => {
            let left = end_sets(l, word);
            let right = end_sets(r, word);
            (0..=n).map(|i| left[i] | right[i]).collect()
        }
    }
}

/// Number of symbols consumed when the formula is first met on `word`.
pub fn semantic_first_acceptance(ast: &TwtlAst, word: &[u8]) -> Option<usize> {
    assert!(word.len() < 31);
    let m = end_sets(ast, word)[0];
    (m != 0).then(|| m.trailing_zeros() as usize)
}

/// Observation bitmask over PROPS translated into the automaton alphabet.
pub fn to_propset(fsa: &Fsa, obs: u8) -> PropSet {
    let mut set = PropSet::EMPTY;
    for (bit, name) in PROPS.iter().enumerate() {
        if obs & (1 << bit) != 0 {
            if let Some(i) = fsa.prop_index(name) {
                set = set.union(PropSet::singleton(i));
            }
        }
    }
    set
}

/// Compares automaton and semantics on every word of length `len` over the
/// first `props` propositions. Returns the first disagreeing word.
pub fn check_all_words(ast: &TwtlAst, fsa: &Fsa, len: usize, props: usize) -> Result<u64, Vec<u8>> {
    let letters = 1u8 << props;
    let mut word = vec![0u8; len];
    let mut count = 0u64;
    loop {
        let propsets: Vec<PropSet> = word.iter().map(|&o| to_propset(fsa, o)).collect();
        let from_fsa = fsa.first_acceptance(&propsets).unwrap().map(|t| t + 1);
        if from_fsa != semantic_first_acceptance(ast, &word) {
            return Err(word);
        }
        count += 1;
        // next word in lexicographic order
        let mut pos = 0;
        loop {
            if pos == len {
                return Ok(count);
            }
            word[pos] += 1;
            if word[pos] < letters {
                break;
            }
            word[pos] = 0;
            pos += 1;
        }
    }
}

fn random_symbol<R: Rng>(rng: &mut R, props: usize) -> Symbol {
    let k = rng.gen_range(0..=props);
    if k == props {
        Symbol::True
    } else {
        Symbol::atom(PROPS[k])
    }
}

fn random_node<R: Rng>(rng: &mut R, depth: u32, props: usize) -> TwtlAst {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        let hold = TwtlAst::Hold {
            duration: rng.gen_range(0..=2),
            symbol: random_symbol(rng, props),
            negated: rng.gen_bool(0.25),
        };
        return if rng.gen_bool(0.15) {
            TwtlAst::not(hold)
        } else {
            hold
        };
    }
    match rng.gen_range(0..4) {
        0 => {
            let child = random_node(rng, depth - 1, props);
            let child = if matches!(child, TwtlAst::Within { .. }) {
                TwtlAst::hold(0, PROPS[0])
            } else {
                child
            };
            let start = rng.gen_range(0..=2);
            let end = start.max(child.time_bound() as u32) + rng.gen_range(0..=2);
            TwtlAst::within(child, start, end)
        }
        1 => TwtlAst::concat(
            random_node(rng, depth - 1, props),
            random_node(rng, depth - 1, props),
        ),
        2 => TwtlAst::and(
            random_node(rng, depth - 1, props),
            random_node(rng, depth - 1, props),
        ),
        _ => TwtlAst::or(
            random_node(rng, depth - 1, props),
            random_node(rng, depth - 1, props),
        ),
    }
}

/// Random valid formula in the fragment with time bound at most `max_bound`
/// over at most `props` propositions.
pub fn random_formula<R: Rng>(rng: &mut R, max_bound: u64, props: usize) -> TwtlAst {
    loop {
        let f = random_node(rng, 3, props);
        if f.validate().is_ok() && f.time_bound() <= max_bound {
            return f;
        }
    }
}

// ---------------------------------------------------------------------------
// LP oracle

/// Minimum of `sum v_i x_i` over the lattice of distributions in steps of
/// `1/units`, with likely children at least `floor_units/units`.
///
/// All but the last two shares are enumerated exhaustively; the objective is
/// linear along the remaining segment, so its two end points are checked.
pub fn brute_force_lp(likely: &[f64], other: &[f64], floor_units: i64, units: i64) -> Option<f64> {
    let values: Vec<f64> = likely.iter().chain(other).copied().collect();
    let lows: Vec<i64> = (0..values.len())
        .map(|i| if i < likely.len() { floor_units } else { 0 })
        .collect();
    let n = values.len();
    if n == 0 || lows.iter().sum::<i64>() > units {
        return None;
    }
    let mut best = f64::INFINITY;
    let mut shares = vec![0i64; n];
    fn rec(
        i: usize,
        left: i64,
        values: &[f64],
        lows: &[i64],
        shares: &mut Vec<i64>,
        units: i64,
        best: &mut f64,
    ) {
        let n = values.len();
        let rest_low: i64 = lows[i..].iter().sum();
        if left < rest_low {
            return;
        }
        let eval = |shares: &[i64]| -> f64 {
            shares
                .iter()
                .zip(values)
                .map(|(&s, v)| s as f64 / units as f64 * v)
                .sum()
        };
        if i == n - 1 {
            if left <= units {
                shares[i] = left;
                *best = best.min(eval(shares));
            }
            return;
        }
        if i == n - 2 {
            // x_{n-2} + x_{n-1} = left, both within their bounds
            let lo = lows[i].max(left - units);
            let hi = units.min(left - lows[n - 1]);
            if lo > hi {
                return;
            }
            for x in [lo, hi] {
                shares[i] = x;
                shares[i + 1] = left - x;
                *best = best.min(eval(shares));
            }
            return;
        }
        for x in lows[i]..=units.min(left - lows[i + 1..].iter().sum::<i64>()) {
            shares[i] = x;
            rec(i + 1, left - x, values, lows, shares, units, best);
        }
    }
    rec(0, units, &values, &lows, &mut shares, units, &mut best);
    best.is_finite().then_some(best)
}
