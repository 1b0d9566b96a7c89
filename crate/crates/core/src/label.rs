//! Arc labels.
//!
//! Labels are plain integers so they serialize directly into the text graph
//! format. Vocabulary tokens use ids `1..=n`, which are also their emission
//! columns; column 0 is the blank. Everything else lives in the negatives:
//!
//! | symbol        | id        |
//! |---------------|-----------|
//! | epsilon       | `-1`      |
//! | blank `<b>`   | `0`       |
//! | token `t`     | `t`       |
//! | star `<s>`    | `-2`      |
//! | `<s>\t`       | `-2 - t`  |

use std::fmt;

/// Vocabulary token id, always `>= 1`.
pub type Token = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(i32);

/// Decoded view of a [`Label`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Epsilon,
    Blank,
    Token(Token),
    Star,
    /// Star minus one token.
    NotToken(Token),
}

impl Label {
    pub const EPSILON: Label = Label(-1);
    pub const BLANK: Label = Label(0);
    pub const STAR: Label = Label(-2);

    pub fn token(t: Token) -> Label {
        assert!(t >= 1 && t <= i32::MAX as u32 / 2, "token id {t} out of range");
        Label(t as i32)
    }

    pub fn not_token(t: Token) -> Label {
        assert!(t >= 1 && t <= i32::MAX as u32 / 2, "token id {t} out of range");
        Label(-2 - t as i32)
    }

    pub fn from_id(id: i32) -> Label {
        Label(id)
    }

    pub fn id(self) -> i32 {
        self.0
    }

    pub fn is_epsilon(self) -> bool {
        self == Label::EPSILON
    }

    pub fn symbol(self) -> Symbol {
        match self.0 {
            -1 => Symbol::Epsilon,
            0 => Symbol::Blank,
            -2 => Symbol::Star,
            id if id > 0 => Symbol::Token(id as Token),
            id => Symbol::NotToken((-2 - id) as Token),
        }
    }

    /// Human-readable name, using `name` for vocabulary tokens.
    pub fn display_with(self, name: &dyn Fn(Token) -> String) -> String {
        match self.symbol() {
            Symbol::Epsilon => "ε".to_string(),
            Symbol::Blank => "<b>".to_string(),
            Symbol::Star => "<s>".to_string(),
            Symbol::Token(t) => name(t),
            Symbol::NotToken(t) => format!("<s>\\{}", name(t)),
        }
    }
}

impl From<Symbol> for Label {
    fn from(s: Symbol) -> Label {
        match s {
            Symbol::Epsilon => Label::EPSILON,
            Symbol::Blank => Label::BLANK,
            Symbol::Star => Label::STAR,
            Symbol::Token(t) => Label::token(t),
            Symbol::NotToken(t) => Label::not_token(t),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&|t| t.to_string()))
    }
}

/// Names tokens `1..=26` as `a..=z`, anything else by number.
pub fn letter_name(t: Token) -> String {
    if (1..=26).contains(&t) {
        char::from(b'a' + (t - 1) as u8).to_string()
    } else {
        t.to_string()
    }
}

/// Parses a token written as a decimal id or a single letter `a..=z`.
pub fn parse_token(s: &str) -> Option<Token> {
    if let Ok(id) = s.parse::<Token>() {
        return (id >= 1).then_some(id);
    }
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c @ 'a'..='z'), None) => Some(c as Token - 'a' as Token + 1),
        _ => None,
    }
}
