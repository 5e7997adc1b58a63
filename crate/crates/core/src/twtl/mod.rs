//! TWTL front end: parsing, time bounds, and translation to automata.

mod ast;
mod fsa;
mod parser;
mod translate;

pub use ast::{AstError, Symbol, TwtlAst};
pub use fsa::{
    load_fsa, load_fsa_json, save_fsa, save_fsa_json, used_props, Edge, Fsa, FsaDocument,
    FsaError, FsaWarning, Guard, PropSet, StateRef, TransitionDoc, MAX_PROPS,
};
pub use parser::{parse_twtl, ParseError};
pub use translate::{translate_to_fsa, translate_with_cap, TranslateError, DEFAULT_STATE_CAP};

pub fn time_bound(ast: &TwtlAst) -> u64 {
    ast.time_bound()
}
