use thiserror::Error;

use super::ast::{Action, Cond, KarelAst, Sensor, Stmt, MAX_REPEAT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    BadChar { ch: char, pos: usize },
    #[error("expected {expected} at byte {pos}, found {found:?}")]
    Expected {
        expected: &'static str,
        found: String,
        pos: usize,
    },
    #[error("unexpected end of input, expected {expected}")]
    Eof { expected: &'static str },
    #[error("repeat count {count} at byte {pos} is outside 0..=19")]
    RepeatRange { count: u64, pos: usize },
    #[error("trailing input {found:?} at byte {pos}")]
    Trailing { found: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub text: String,
    pub pos: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if "():;{}".contains(ch) {
            chars.next();
            out.push(Token {
                text: ch.to_string(),
                pos,
            });
        } else if ch.is_ascii_alphanumeric() || ch == '_' {
            let mut text = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    text.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token { text, pos });
        } else {
            return Err(ParseError::BadChar { ch, pos });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.at)
    }

    fn next(&mut self, expected: &'static str) -> Result<Token, ParseError> {
        let tok = self
            .toks
            .get(self.at)
            .cloned()
            .ok_or(ParseError::Eof { expected })?;
        self.at += 1;
        Ok(tok)
    }

    fn expect(&mut self, text: &'static str) -> Result<(), ParseError> {
        let tok = self.next(text)?;
        if tok.text == text {
            Ok(())
        } else {
            Err(ParseError::Expected {
                expected: text,
                found: tok.text,
                pos: tok.pos,
            })
        }
    }

    fn at_text(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.text == text)
    }

    fn program(&mut self) -> Result<KarelAst, ParseError> {
        self.expect("def")?;
        self.expect("run")?;
        self.expect("(")?;
        self.expect(")")?;
        self.expect(":")?;
        let mut body = Vec::new();
        if self.peek().is_some() {
            self.sequence(&mut body)?;
        }
        if let Some(tok) = self.peek() {
            return Err(ParseError::Trailing {
                found: tok.text.clone(),
                pos: tok.pos,
            });
        }
        Ok(KarelAst { body })
    }

    /// `s1; s2; ...` appended to `out`. Braced groups are flattened.
    fn sequence(&mut self, out: &mut Vec<Stmt>) -> Result<(), ParseError> {
        self.item(out)?;
        while self.at_text(";") {
            self.at += 1;
            self.item(out)?;
        }
        Ok(())
    }

    fn item(&mut self, out: &mut Vec<Stmt>) -> Result<(), ParseError> {
        if self.at_text("{") {
            self.at += 1;
            if !self.at_text("}") {
                self.sequence(out)?;
            }
            self.expect("}")
        } else {
            out.push(self.statement()?);
            Ok(())
        }
    }

    fn body(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut out = Vec::new();
        self.item(&mut out)?;
        Ok(out)
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let tok = self.next("statement")?;
        match tok.text.as_str() {
            "if" => {
                let cond = self.paren_cond()?;
                self.expect(":")?;
                Ok(Stmt::If(cond, self.body()?))
            }
            "ifelse" => {
                let cond = self.paren_cond()?;
                self.expect(":")?;
                let then = self.body()?;
                self.expect("else")?;
                self.expect(":")?;
                Ok(Stmt::IfElse(cond, then, self.body()?))
            }
            "while" => {
                let cond = self.paren_cond()?;
                self.expect(":")?;
                Ok(Stmt::While(cond, self.body()?))
            }
            "repeat" => {
                self.expect("(")?;
                let num = self.next("repeat count")?;
                let count: u64 = num.text.parse().map_err(|_| ParseError::Expected {
                    expected: "repeat count",
                    found: num.text.clone(),
                    pos: num.pos,
                })?;
                if count > u64::from(MAX_REPEAT) {
                    return Err(ParseError::RepeatRange {
                        count,
                        pos: num.pos,
                    });
                }
                self.expect(")")?;
                self.expect(":")?;
                Ok(Stmt::Repeat(count as u8, self.body()?))
            }
            word => match Action::from_keyword(word) {
                Some(action) => {
                    self.expect("(")?;
                    self.expect(")")?;
                    Ok(Stmt::Action(action))
                }
                None => Err(ParseError::Expected {
                    expected: "statement",
                    found: tok.text,
                    pos: tok.pos,
                }),
            },
        }
    }

    fn paren_cond(&mut self) -> Result<Cond, ParseError> {
        self.expect("(")?;
        let cond = self.cond()?;
        self.expect(")")?;
        Ok(cond)
    }

    fn cond(&mut self) -> Result<Cond, ParseError> {
        let tok = self.next("condition")?;
        if tok.text == "not" {
            // Both `not(b)` and `not b` are accepted.
            if self.at_text("(") {
                return Ok(self.paren_cond()?.not());
            }
            return Ok(self.cond()?.not());
        }
        match Sensor::from_keyword(&tok.text) {
            Some(sensor) => {
                self.expect("(")?;
                self.expect(")")?;
                Ok(Cond::Sensor(sensor))
            }
            None => Err(ParseError::Expected {
                expected: "condition",
                found: tok.text,
                pos: tok.pos,
            }),
        }
    }
}

/// Parse Karel source text into an AST.
pub fn parse_karel(src: &str) -> Result<KarelAst, ParseError> {
    let toks = tokenize(src)?;
    Parser { toks, at: 0 }.program()
}

impl std::str::FromStr for KarelAst {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_karel(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_program() {
        let p = parse_karel("def run(): move()").unwrap();
        assert_eq!(p.body, vec![Stmt::Action(Action::Move)]);
    }

    #[test]
    fn repeat_count_above_nineteen_is_rejected() {
        let err = parse_karel("def run(): repeat(20): move()").unwrap_err();
        assert!(matches!(err, ParseError::RepeatRange { count: 20, .. }));
        assert!(parse_karel("def run(): repeat(19): move()").is_ok());
        assert!(parse_karel("def run(): repeat(0): move()").is_ok());
    }

    #[test]
    fn ifelse_has_two_arms() {
        let p = parse_karel("def run(): ifelse(markersPresent()): pickMarker() else: putMarker()")
            .unwrap();
        assert_eq!(
            p.body,
            vec![Stmt::IfElse(
                Cond::Sensor(Sensor::MarkersPresent),
                vec![Stmt::Action(Action::PickMarker)],
                vec![Stmt::Action(Action::PutMarker)],
            )]
        );
    }

    #[test]
    fn body_binds_a_single_statement() {
        let p = parse_karel("def run(): while(frontIsClear()): move(); turnLeft()").unwrap();
        assert_eq!(p.body.len(), 2);
        let q = parse_karel("def run(): while(frontIsClear()): { move(); turnLeft() }").unwrap();
        assert_eq!(q.body.len(), 1);
    }

    #[test]
    fn negation_forms() {
        let a = parse_karel("def run(): if(not(frontIsClear())): turnLeft()").unwrap();
        let b = parse_karel("def run(): if(not frontIsClear()): turnLeft()").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_program_and_bodies() {
        let p = parse_karel("def run(): {}").unwrap();
        assert!(p.body.is_empty());
        assert_eq!(parse_karel("def run():").unwrap(), p);
        assert_eq!(p.pretty(), "def run(): {}");
        let q = parse_karel("def run(): while(frontIsClear()): {}").unwrap();
        assert_eq!(parse_karel(&q.pretty()).unwrap(), q);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_karel("def run(): jump()").unwrap_err() {
            ParseError::Expected { pos, .. } => assert_eq!(pos, 11),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse_karel("def run(): move() move()").unwrap_err(),
            ParseError::Trailing { pos: 18, .. }
        ));
        assert!(matches!(
            parse_karel("def run(): move(").unwrap_err(),
            ParseError::Eof { .. }
        ));
        assert!(matches!(
            parse_karel("def run(): move()!").unwrap_err(),
            ParseError::BadChar { ch: '!', .. }
        ));
    }

    #[test]
    fn nested_pretty_round_trip() {
        let src = "def run(): repeat(3): { ifelse(not(leftIsClear())): { move(); putMarker() } else: turnLeft(); pickMarker() }; move()";
        let p = parse_karel(src).unwrap();
        let printed = p.pretty();
        assert_eq!(parse_karel(&printed).unwrap(), p);
        assert_eq!(printed, src);
    }
}
