//! Formula syntax trees over the full alphabet, used for rule bodies and
//! query evidence. Unlike circuit nodes these may mention defined atoms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::program::{Alphabet, AtomId, Literal, ProgramError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(AtomId),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

/// Kleene truth value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    False,
    Unknown,
    True,
}

impl Truth {
    /// From a (lower, upper) pair of two-valued bounds.
    pub fn from_bounds(lower: bool, upper: bool) -> Self {
        match (lower, upper) {
            (true, _) => Truth::True,
            (false, true) => Truth::Unknown,
            (false, false) => Truth::False,
        }
    }

    pub fn bounds(self) -> (bool, bool) {
        match self {
            Truth::True => (true, true),
            Truth::Unknown => (false, true),
            Truth::False => (false, false),
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        std::cmp::min_by_key(self, other, |t| t.rank())
    }

    pub fn or(self, other: Truth) -> Truth {
        std::cmp::max_by_key(self, other, |t| t.rank())
    }

    fn rank(self) -> u8 {
        match self {
            Truth::False => 0,
            Truth::Unknown => 1,
            Truth::True => 2,
        }
    }
}

impl Formula {
    pub fn literal(l: Literal) -> Formula {
        if l.positive {
            Formula::Atom(l.atom)
        } else {
            Formula::not(Formula::Atom(l.atom))
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Two-valued evaluation.
    pub fn eval(&self, value: &impl Fn(AtomId) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => value(*a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
        }
    }

    /// Kleene three-valued evaluation.
    pub fn eval3(&self, value: &impl Fn(AtomId) -> Truth) -> Truth {
        match self {
            Formula::True => Truth::True,
            Formula::False => Truth::False,
            Formula::Atom(a) => value(*a),
            Formula::Not(f) => f.eval3(value).negate(),
            Formula::And(fs) => fs.iter().fold(Truth::True, |acc, f| acc.and(f.eval3(value))),
            Formula::Or(fs) => fs.iter().fold(Truth::False, |acc, f| acc.or(f.eval3(value))),
        }
    }

    pub fn atoms(&self, out: &mut Vec<AtomId>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                if !out.contains(a) {
                    out.push(*a)
                }
            }
            Formula::Not(f) => f.atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.atoms(out)),
        }
    }

    /// Parses evidence syntax: atoms, `true`, `false`, `!`, `&`, `|` and
    /// parentheses, with the usual precedence (`!` > `&` > `|`).
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Formula, ProgramError> {
        let mut p = EvidenceParser {
            chars: text.chars().collect(),
            pos: 0,
            alphabet,
        };
        let f = p.disjunction()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(f)
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        FormulaDisplay {
            formula: self,
            alphabet,
        }
    }
}

struct FormulaDisplay<'a> {
    formula: &'a Formula,
    alphabet: &'a Alphabet,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(x: &Formula, a: &Alphabet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match x {
                Formula::True => f.write_str("true"),
                Formula::False => f.write_str("false"),
                Formula::Atom(id) => f.write_str(a.name(*id)),
                Formula::Not(g) => {
                    f.write_str("!")?;
                    go(g, a, f)
                }
                Formula::And(gs) | Formula::Or(gs) => {
                    let (op, empty) = match x {
                        Formula::And(_) => (" & ", "true"),
                        _ => (" | ", "false"),
                    };
                    if gs.is_empty() {
                        return f.write_str(empty);
                    }
                    f.write_str("(")?;
                    for (i, g) in gs.iter().enumerate() {
                        if i > 0 {
                            f.write_str(op)?;
                        }
                        go(g, a, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        go(self.formula, self.alphabet, f)
    }
}

struct EvidenceParser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl EvidenceParser<'_> {
    fn err(&self, message: &str) -> ProgramError {
        ProgramError::Syntax {
            line: 1,
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ProgramError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat('|') {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Formula, ProgramError> {
        let mut parts = vec![self.unary()?];
        while self.eat('&') {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula, ProgramError> {
        if self.eat('!') {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat('(') {
            let f = self.disjunction()?;
            if !self.eat(')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(f);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ProgramError> {
        self.skip_ws();
        let start = self.pos;
        let ident = |c: char| c.is_alphanumeric() || c == '_' || c == '\'';
        while self.pos < self.chars.len() && ident(self.chars[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an atom"));
        }
        let mut name: String = self.chars[start..self.pos].iter().collect();
        if self.chars.get(self.pos) == Some(&'(') {
            self.pos += 1;
            name.push('(');
            let mut first = true;
            loop {
                self.skip_ws();
                let s = self.pos;
                while self.pos < self.chars.len() && ident(self.chars[self.pos]) {
                    self.pos += 1;
                }
                if s == self.pos {
                    return Err(self.err("expected a term"));
                }
                if !first {
                    name.push(',');
                }
                first = false;
                name.extend(&self.chars[s..self.pos]);
                if self.eat(',') {
                    continue;
                }
                if self.eat(')') {
                    break;
                }
                return Err(self.err("expected `,` or `)`"));
            }
            name.push(')');
        }
        match name.as_str() {
            "true" => return Ok(Formula::True),
            "false" => return Ok(Formula::False),
            _ => {}
        }
        self.alphabet
            .lookup(&name)
            .map(Formula::Atom)
            .ok_or(ProgramError::UnknownAtom(name))
    }
}
