//! Karel program syntax.
//!
//! The concrete syntax follows the grammar
//!
//! ```text
//! prog := def run(): s
//! s    := while(b): s | repeat(r): s | s1; s2 | a
//!       | if(b): s | ifelse(b): s1 else: s2
//! b    := frontIsClear() | leftIsClear() | rightIsClear()
//!       | markersPresent() | noMarkersPresent() | not b
//! a    := move() | turnRight() | turnLeft() | pickMarker() | putMarker()
//! r    := 0 | 1 | ... | 19
//! ```
//!
//! A compound statement's body is a single statement. Multi-statement
//! bodies are grouped with braces, `while(frontIsClear()): { move(); putMarker() }`,
//! and `{}` denotes the empty body. The top level of `def run():` is a
//! `;`-separated sequence running to the end of the input.

use std::fmt;

/// Largest repeat count accepted by the grammar.
pub const MAX_REPEAT: u8 = 19;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Move,
    TurnRight,
    TurnLeft,
    PickMarker,
    PutMarker,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Move,
        Action::TurnRight,
        Action::TurnLeft,
        Action::PickMarker,
        Action::PutMarker,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Action::Move => "move",
            Action::TurnRight => "turnRight",
            Action::TurnLeft => "turnLeft",
            Action::PickMarker => "pickMarker",
            Action::PutMarker => "putMarker",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.keyword() == word)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sensor {
    FrontIsClear,
    LeftIsClear,
    RightIsClear,
    MarkersPresent,
    NoMarkersPresent,
}

impl Sensor {
    pub const ALL: [Sensor; 5] = [
        Sensor::FrontIsClear,
        Sensor::LeftIsClear,
        Sensor::RightIsClear,
        Sensor::MarkersPresent,
        Sensor::NoMarkersPresent,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Sensor::FrontIsClear => "frontIsClear",
            Sensor::LeftIsClear => "leftIsClear",
            Sensor::RightIsClear => "rightIsClear",
            Sensor::MarkersPresent => "markersPresent",
            Sensor::NoMarkersPresent => "noMarkersPresent",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Sensor> {
        Sensor::ALL.into_iter().find(|s| s.keyword() == word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cond {
    Sensor(Sensor),
    Not(Box<Cond>),
}

impl Cond {
    pub fn not(self) -> Cond {
        Cond::Not(Box::new(self))
    }

    /// Every condition of size one or two: the five sensors and their negations.
    pub fn basic() -> Vec<Cond> {
        let mut out: Vec<Cond> = Sensor::ALL.into_iter().map(Cond::Sensor).collect();
        out.extend(Sensor::ALL.into_iter().map(|s| Cond::Sensor(s).not()));
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Cond::Sensor(_) => 1,
            Cond::Not(inner) => 1 + inner.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stmt {
    Action(Action),
    If(Cond, Vec<Stmt>),
    IfElse(Cond, Vec<Stmt>, Vec<Stmt>),
    While(Cond, Vec<Stmt>),
    Repeat(u8, Vec<Stmt>),
}

impl Stmt {
    /// Node count used for size-ordered enumeration: every statement and
    /// condition node counts one; repeat counts are leaves of the repeat node.
    pub fn size(&self) -> usize {
        match self {
            Stmt::Action(_) => 1,
            Stmt::If(c, body) | Stmt::While(c, body) => 1 + c.size() + block_size(body),
            Stmt::IfElse(c, then, other) => 1 + c.size() + block_size(then) + block_size(other),
            Stmt::Repeat(_, body) => 1 + block_size(body),
        }
    }

    /// Number of branch sites in this statement, nested ones included.
    pub fn branch_sites(&self) -> usize {
        match self {
            Stmt::Action(_) => 0,
            Stmt::If(_, body) | Stmt::While(_, body) | Stmt::Repeat(_, body) => {
                2 + block_sites(body)
            }
            Stmt::IfElse(_, then, other) => 2 + block_sites(then) + block_sites(other),
        }
    }

    /// Nesting depth of control structures; actions have depth zero.
    pub fn depth(&self) -> usize {
        match self {
            Stmt::Action(_) => 0,
            Stmt::If(_, body) | Stmt::While(_, body) | Stmt::Repeat(_, body) => {
                1 + block_depth(body)
            }
            Stmt::IfElse(_, then, other) => 1 + block_depth(then).max(block_depth(other)),
        }
    }
}

pub fn block_size(block: &[Stmt]) -> usize {
    block.iter().map(Stmt::size).sum()
}

pub fn block_sites(block: &[Stmt]) -> usize {
    block.iter().map(Stmt::branch_sites).sum()
}

pub fn block_depth(block: &[Stmt]) -> usize {
    block.iter().map(Stmt::depth).max().unwrap_or(0)
}

/// A complete Karel program, `def run(): body`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KarelAst {
    pub body: Vec<Stmt>,
}

impl KarelAst {
    pub fn new(body: Vec<Stmt>) -> Self {
        KarelAst { body }
    }

    pub fn size(&self) -> usize {
        block_size(&self.body)
    }

    pub fn branch_sites(&self) -> usize {
        block_sites(&self.body)
    }

    pub fn depth(&self) -> usize {
        block_depth(&self.body)
    }

    /// Canonical text. `parse_karel(&p.pretty())` returns `p`.
    pub fn pretty(&self) -> String {
        let mut out = String::from("def run():");
        if self.body.is_empty() {
            out.push_str(" {}");
        } else {
            out.push(' ');
            write_seq(&mut out, &self.body);
        }
        out
    }

    /// Whitespace-separated token stream of the canonical text.
    pub fn tokens(&self) -> Vec<String> {
        super::parse::tokenize(&self.pretty())
            .map(|toks| toks.into_iter().map(|t| t.text).collect())
            .unwrap_or_default()
    }
}

impl fmt::Display for KarelAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

fn write_seq(out: &mut String, seq: &[Stmt]) {
    for (i, stmt) in seq.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        write_stmt(out, stmt);
    }
}

fn write_body(out: &mut String, body: &[Stmt]) {
    match body {
        [single] => write_stmt(out, single),
        _ if body.is_empty() => out.push_str("{}"),
        _ => {
            out.push_str("{ ");
            write_seq(out, body);
            out.push_str(" }");
        }
    }
}

fn write_cond(out: &mut String, cond: &Cond) {
    match cond {
        Cond::Sensor(s) => {
            out.push_str(s.keyword());
            out.push_str("()");
        }
        Cond::Not(inner) => {
            out.push_str("not(");
            write_cond(out, inner);
            out.push(')');
        }
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt) {
    match stmt {
        Stmt::Action(a) => {
            out.push_str(a.keyword());
            out.push_str("()");
        }
        Stmt::If(c, body) => {
            out.push_str("if(");
            write_cond(out, c);
            out.push_str("): ");
            write_body(out, body);
        }
        Stmt::IfElse(c, then, other) => {
            out.push_str("ifelse(");
            write_cond(out, c);
            out.push_str("): ");
            write_body(out, then);
            out.push_str(" else: ");
            write_body(out, other);
        }
        Stmt::While(c, body) => {
            out.push_str("while(");
            write_cond(out, c);
            out.push_str("): ");
            write_body(out, body);
        }
        Stmt::Repeat(r, body) => {
            out.push_str("repeat(");
            out.push_str(&r.to_string());
            out.push_str("): ");
            write_body(out, body);
        }
    }
}
