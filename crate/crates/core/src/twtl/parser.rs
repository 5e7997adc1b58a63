//! Recursive-descent parser for the ASCII rendering of TWTL.
//!
//! ```text
//! formula := boolean ('.' boolean)*
//! boolean := unary (('&' | '|') unary)*
//! unary   := '!' unary | primary
//! primary := 'H' '^' INT ['!'] SYMBOL
//!          | '[' formula ']' '^' '[' INT ',' INT ']'
//!          | '(' formula ')'
//! ```

use super::ast::{AstError, Symbol, TwtlAst};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unexpected character {found:?} at offset {pos}")]
    Lexical { pos: usize, found: char },
    #[error("expected {expected} at offset {pos}, found {found}")]
    Syntax {
        pos: usize,
        expected: &'static str,
        found: String,
    },
    #[error("integer at offset {pos} is out of range")]
    IntegerOverflow { pos: usize },
    #[error("invalid formula: {0}")]
    Invalid(#[from] AstError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Hold,
    Ident(String),
    Int(u32),
    Caret,
    Dot,
    Amp,
    Pipe,
    Bang,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Hold => "'H'".into(),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Caret => "'^'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Bang => "'!'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        let simple = match c {
            '^' => Some(Tok::Caret),
            '.' => Some(Tok::Dot),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            '!' => Some(Tok::Bang),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((pos, tok));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].1.is_ascii_digit() {
                i += 1;
            }
            let digits: String = bytes[start..i].iter().map(|(_, c)| c).collect();
            let value = digits
                .parse::<u32>()
                .map_err(|_| ParseError::IntegerOverflow { pos })?;
            out.push((pos, Tok::Int(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_ascii_alphanumeric() || bytes[i].1 == '_') {
                i += 1;
            }
            let word: String = bytes[start..i].iter().map(|(_, c)| c).collect();
            // `H` is a keyword only when it introduces `^`.
            let next = bytes[i..].iter().find(|(_, c)| !c.is_whitespace());
            if word == "H" && matches!(next, Some((_, '^'))) {
                out.push((pos, Tok::Hold));
            } else {
                out.push((pos, Tok::Ident(word)));
            }
        } else {
            return Err(ParseError::Lexical { pos, found: c });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn int(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Tok::Int(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => Err(self.error("integer")),
        }
    }

    fn formula(&mut self) -> Result<TwtlAst, ParseError> {
        let mut left = self.boolean()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let right = self.boolean()?;
            left = TwtlAst::concat(left, right);
        }
        Ok(left)
    }

    fn boolean(&mut self) -> Result<TwtlAst, ParseError> {
        let mut left = self.unary()?;
        loop {
            match self.peek() {
                Tok::Amp => {
                    self.bump();
                    left = TwtlAst::and(left, self.unary()?);
                }
                Tok::Pipe => {
                    self.bump();
                    left = TwtlAst::or(left, self.unary()?);
                }
                _ => return Ok(left),
            }
        }
    }

    fn unary(&mut self) -> Result<TwtlAst, ParseError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            let child = self.unary()?;
            if !matches!(child, TwtlAst::Hold { .. }) {
                return Err(AstError::NegatedComposite.into());
            }
            return Ok(TwtlAst::not(child));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<TwtlAst, ParseError> {
        match self.peek().clone() {
            Tok::Hold => {
                self.bump();
                self.expect(Tok::Caret, "'^' after H")?;
                let duration = self.int()?;
                let negated = if *self.peek() == Tok::Bang {
                    self.bump();
                    true
                } else {
                    false
                };
                let symbol = match self.bump() {
                    Tok::Ident(name) if name == "true" => Symbol::True,
                    Tok::Ident(name) => Symbol::Atom(name),
                    _ => {
                        self.at -= 1;
                        return Err(self.error("proposition"));
                    }
                };
                Ok(TwtlAst::Hold {
                    duration,
                    symbol,
                    negated,
                })
            }
            Tok::LBracket => {
                self.bump();
                let child = self.formula()?;
                self.expect(Tok::RBracket, "']'")?;
                self.expect(Tok::Caret, "'^' after ']'")?;
                self.expect(Tok::LBracket, "'[' opening the window")?;
                let start = self.int()?;
                self.expect(Tok::Comma, "','")?;
                let end = self.int()?;
                self.expect(Tok::RBracket, "']' closing the window")?;
                let node = TwtlAst::within(child, start, end);
                node.validate()?;
                Ok(node)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(self.error("'H^', '[', '(' or '!'")),
        }
    }
}

/// Parses a formula and validates it against the supported fragment.
pub fn parse_twtl(text: &str) -> Result<TwtlAst, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let ast = parser.formula()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("end of input"));
    }
    ast.validate()?;
    Ok(ast)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE_STUDY: &str =
        "[H^1 P]^[0,20] . ( [H^1 D1]^[0,20] | [H^1 D2]^[0,20] ) . [H^1 Base]^[0,20]";

    #[test]
    fn parses_case_study_formula() {
        let ast = parse_twtl(CASE_STUDY).unwrap();
        let expected = TwtlAst::concat(
            TwtlAst::concat(
                TwtlAst::within(TwtlAst::hold(1, "P"), 0, 20),
                TwtlAst::or(
                    TwtlAst::within(TwtlAst::hold(1, "D1"), 0, 20),
                    TwtlAst::within(TwtlAst::hold(1, "D2"), 0, 20),
                ),
            ),
            TwtlAst::within(TwtlAst::hold(1, "Base"), 0, 20),
        );
        assert_eq!(ast, expected);
        assert_eq!(ast.time_bound(), 62);
    }

    #[test]
    fn parses_table_formula() {
        let ast = parse_twtl("[H^1 P]^[0,8] . [H^1 D1]^[0,8]").unwrap();
        assert_eq!(
            ast,
            TwtlAst::concat(
                TwtlAst::within(TwtlAst::hold(1, "P"), 0, 8),
                TwtlAst::within(TwtlAst::hold(1, "D1"), 0, 8),
            )
        );
        assert_eq!(ast.time_bound(), 17);
    }

    #[test]
    fn single_leaf() {
        assert_eq!(parse_twtl("H^0 A").unwrap(), TwtlAst::hold(0, "A"));
        assert_eq!(parse_twtl("H^3 A").unwrap().time_bound(), 3);
        assert_eq!(parse_twtl("H^2 !A").unwrap(), TwtlAst::hold_not(2, "A"));
        assert_eq!(
            parse_twtl("!H^2 A").unwrap(),
            TwtlAst::not(TwtlAst::hold(2, "A"))
        );
        // identifiers starting with H are still propositions
        assert_eq!(parse_twtl("H^1 Home").unwrap(), TwtlAst::hold(1, "Home"));
        assert_eq!(
            parse_twtl("H^0 true").unwrap(),
            TwtlAst::Hold {
                duration: 0,
                symbol: Symbol::True,
                negated: false
            }
        );
    }

    #[test]
    fn precedence() {
        // ! binds tighter than &, which binds tighter than .
        let ast = parse_twtl("!H^0 A & H^0 B . H^0 C").unwrap();
        assert_eq!(
            ast,
            TwtlAst::concat(
                TwtlAst::and(TwtlAst::not(TwtlAst::hold(0, "A")), TwtlAst::hold(0, "B")),
                TwtlAst::hold(0, "C"),
            )
        );
        let ast = parse_twtl("H^0 A | H^0 B & H^0 C").unwrap();
        assert_eq!(
            ast,
            TwtlAst::and(
                TwtlAst::or(TwtlAst::hold(0, "A"), TwtlAst::hold(0, "B")),
                TwtlAst::hold(0, "C"),
            )
        );
    }

    #[test]
    fn lexical_error_reports_position() {
        assert_eq!(
            parse_twtl("H^1 A # B"),
            Err(ParseError::Lexical { pos: 6, found: '#' })
        );
    }

    #[test]
    fn window_errors() {
        assert_eq!(
            parse_twtl("[H^1 A]^[5,2]"),
            Err(ParseError::Invalid(AstError::InvertedWindow { start: 5, end: 2 }))
        );
        assert!(matches!(
            parse_twtl("[H^4 A]^[0,3]"),
            Err(ParseError::Invalid(AstError::WindowTooShort { .. }))
        ));
        assert_eq!(
            parse_twtl("[[H^0 A]^[0,3]]^[0,5]"),
            Err(ParseError::Invalid(AstError::NestedWithin))
        );
    }

    #[test]
    fn fragment_violation() {
        assert_eq!(
            parse_twtl("!(H^0 A . H^0 B)"),
            Err(ParseError::Invalid(AstError::NegatedComposite))
        );
        assert_eq!(
            parse_twtl("![H^0 A]^[0,2]"),
            Err(ParseError::Invalid(AstError::NegatedComposite))
        );
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse_twtl("H^1"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_twtl("H^1 A H^1 B"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_twtl("(H^1 A"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_twtl("H^99999999999 A"),
            Err(ParseError::IntegerOverflow { pos: 2 })
        ));
    }
}
