//! Parametrised logic programs: surface syntax, alphabet partition and
//! finite-domain grounding.
//!
//! A program is read from a small ASP-like language:
//!
//! ```text
//! % smokers
//! #domain a b c.
//! smokes(X) :- stress(X).
//! smokes(X) :- fr(X,Y), smokes(Y).
//! ```
//!
//! Every predicate that occurs in a rule head is *defined*; every other atom
//! is a *parameter*. `#defined p.` forces an atom into the defined part (it is
//! then false when no rule derives it) and `#param p.` declares a parameter
//! explicitly, which is useful to keep alphabets aligned between programs.

mod ground;
mod parse;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::Formula;

pub use parse::parse_program;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("atom `{0}` occurs in a rule head and cannot be declared a parameter")]
    DefinedAtomDeclaredParam(String),
    #[error("duplicate declaration: {0}")]
    DuplicateDeclaration(String),
    #[error("variable `{var}` in `{rule}` is not bound by any domain")]
    UnboundVariable { var: String, rule: String },
    #[error("rule head `{0}` is not a defined atom")]
    HeadNotDefined(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
}

/// Dense identifier of a ground atom in an [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomId(pub u32);

impl AtomId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Parameter,
    Defined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct AtomInfo {
    name: String,
    kind: AtomKind,
}

/// Symbol table of ground atoms with the parameter/defined partition.
///
/// Atoms are numbered in first-mention order. Defined atoms additionally get
/// a dense position `0..defined().len()` used by symbolic interpretations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    atoms: Vec<AtomInfo>,
    by_name: HashMap<String, AtomId>,
    defined: Vec<AtomId>,
    parameters: Vec<AtomId>,
    position: Vec<usize>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an atom, or returns the existing id if the name is known and has
    /// the same kind.
    pub fn insert(&mut self, name: &str, kind: AtomKind) -> Result<AtomId, ProgramError> {
        if let Some(&id) = self.by_name.get(name) {
            if self.kind(id) != kind {
                return Err(ProgramError::DuplicateDeclaration(format!(
                    "`{name}` declared both as parameter and as defined atom"
                )));
            }
            return Ok(id);
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(AtomInfo {
            name: name.to_string(),
            kind,
        });
        self.by_name.insert(name.to_string(), id);
        match kind {
            AtomKind::Defined => {
                self.position.push(self.defined.len());
                self.defined.push(id);
            }
            AtomKind::Parameter => {
                self.position.push(self.parameters.len());
                self.parameters.push(id);
            }
        }
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.atoms[id.index()].name
    }

    pub fn kind(&self, id: AtomId) -> AtomKind {
        self.atoms[id.index()].kind
    }

    pub fn is_defined(&self, id: AtomId) -> bool {
        self.kind(id) == AtomKind::Defined
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.by_name.get(name).copied()
    }

    pub fn contains(&self, id: AtomId) -> bool {
        id.index() < self.atoms.len()
    }

    /// Defined atoms in first-mention order.
    pub fn defined(&self) -> &[AtomId] {
        &self.defined
    }

    /// Parameter atoms in first-mention order.
    pub fn parameters(&self) -> &[AtomId] {
        &self.parameters
    }

    /// Position of a defined atom among [`Alphabet::defined`].
    pub fn defined_position(&self, id: AtomId) -> Option<usize> {
        (self.contains(id) && self.is_defined(id)).then(|| self.position[id.index()])
    }

    /// Position of a parameter atom among [`Alphabet::parameters`].
    pub fn parameter_position(&self, id: AtomId) -> Option<usize> {
        (self.contains(id) && !self.is_defined(id)).then(|| self.position[id.index()])
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.atoms.len() as u32).map(AtomId)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) | Term::Var(c) => f.write_str(c),
        }
    }
}

/// A possibly non-ground atom `pred(t1, ..., tn)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomPattern {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl AtomPattern {
    pub fn signature(&self) -> (&str, usize) {
        (&self.predicate, self.args.len())
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for AtomPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BodyLiteral {
    pub atom: AtomPattern,
    pub positive: bool,
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// `head :- body.` with all variables implicitly quantified over the domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: AtomPattern,
    pub body: Vec<BodyLiteral>,
}

impl Rule {
    /// Variables in order of first appearance, head first.
    pub fn variables(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        let all = std::iter::once(&self.head).chain(self.body.iter().map(|l| &l.atom));
        for atom in all {
            for v in atom.variables() {
                if !seen.iter().any(|s| s == v) {
                    seen.push(v.to_string());
                }
            }
        }
        seen
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Domain(Vec<String>),
    Defined(AtomPattern),
    Param(AtomPattern),
    Rule(Rule),
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Domain(cs) => {
                f.write_str("#domain")?;
                for c in cs {
                    write!(f, " {c}")?;
                }
                f.write_str(".")
            }
            Statement::Defined(a) => write!(f, "#defined {a}."),
            Statement::Param(a) => write!(f, "#param {a}."),
            Statement::Rule(r) => write!(f, "{r}"),
        }
    }
}

/// A parsed, possibly non-ground program. Statement order is preserved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn parse(text: &str) -> Result<Self, ProgramError> {
        parse_program(text)
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Rule(r) => Some(r),
            _ => None,
        })
    }

    pub fn domain(&self) -> Option<&[String]> {
        self.statements.iter().find_map(|s| match s {
            Statement::Domain(d) => Some(d.as_slice()),
            _ => None,
        })
    }

    /// Predicate signatures `(name, arity)` of the defined part.
    pub fn defined_predicates(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for s in &self.statements {
            let a = match s {
                Statement::Rule(r) => &r.head,
                Statement::Defined(a) => a,
                _ => continue,
            };
            let sig = (a.predicate.clone(), a.args.len());
            if !out.contains(&sig) {
                out.push(sig);
            }
        }
        out
    }

    /// Predicate signatures that only occur in bodies or `#param` lines.
    pub fn parameter_predicates(&self) -> Vec<(String, usize)> {
        let defined = self.defined_predicates();
        let heads: Vec<(String, usize)> = self
            .rules()
            .map(|r| (r.head.predicate.clone(), r.head.args.len()))
            .collect();
        let mut out: Vec<(String, usize)> = Vec::new();
        for s in &self.statements {
            let atoms: Vec<&AtomPattern> = match s {
                Statement::Rule(r) => r.body.iter().map(|l| &l.atom).collect(),
                Statement::Param(a) => vec![a],
                _ => continue,
            };
            for a in atoms {
                let sig = (a.predicate.clone(), a.args.len());
                let is_head = heads.contains(&sig);
                let is_decl = defined.contains(&sig)
                    && self.statements.iter().any(|s| {
                        matches!(s, Statement::Defined(d) if d.signature() == a.signature()
                            && d.args.iter().all(|t| matches!(t, Term::Var(_))))
                    });
                if !is_head && !is_decl && !out.contains(&sig) {
                    out.push(sig);
                }
            }
        }
        out
    }

    /// Grounds over the program's own `#domain` (empty if absent).
    pub fn ground(&self) -> Result<GroundProgram, ProgramError> {
        let domain: Vec<String> = self.domain().map(|d| d.to_vec()).unwrap_or_default();
        ground::ground(self, &domain)
    }

    /// Grounds over an explicit domain, ignoring any `#domain` line.
    pub fn ground_with(&self, domain: &[String]) -> Result<GroundProgram, ProgramError> {
        ground::ground(self, domain)
    }

    /// Replaces (or adds) the `#domain` statement.
    pub fn with_domain(&self, domain: &[String]) -> Program {
        let mut statements: Vec<Statement> = self
            .statements
            .iter()
            .filter(|s| !matches!(s, Statement::Domain(_)))
            .cloned()
            .collect();
        statements.insert(0, Statement::Domain(domain.to_vec()));
        Program { statements }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: AtomId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: AtomId) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: AtomId) -> Self {
        Literal { atom, positive: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: AtomId,
    pub body: Vec<Literal>,
}

/// A ground parametrised program. Rules are kept in textual order with
/// duplicates removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundProgram {
    alphabet: Alphabet,
    rules: Vec<GroundRule>,
    by_head: Vec<Vec<usize>>,
}

impl GroundProgram {
    pub fn new(alphabet: Alphabet, rules: Vec<GroundRule>) -> Result<Self, ProgramError> {
        let mut by_head = vec![Vec::new(); alphabet.defined().len()];
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::with_capacity(rules.len());
        for rule in rules {
            for l in &rule.body {
                if !alphabet.contains(l.atom) {
                    return Err(ProgramError::UnknownAtom(format!("#{}", l.atom.0)));
                }
            }
            let pos = alphabet
                .defined_position(rule.head)
                .ok_or_else(|| ProgramError::HeadNotDefined(alphabet_name(&alphabet, rule.head)))?;
            if seen.insert(rule.clone()) {
                by_head[pos].push(kept.len());
                kept.push(rule);
            }
        }
        Ok(GroundProgram {
            alphabet,
            rules: kept,
            by_head,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    /// Rules whose head is the defined atom at `position`.
    pub fn rules_for(&self, position: usize) -> impl Iterator<Item = &GroundRule> {
        self.by_head[position].iter().map(move |&i| &self.rules[i])
    }

    pub fn is_positive(&self) -> bool {
        self.rules.iter().all(|r| r.body.iter().all(|l| l.positive))
    }

    /// `φ_p`: per defined atom, the disjunction of its rule bodies.
    pub fn body_formulas(&self) -> Vec<Formula> {
        (0..self.alphabet.defined().len())
            .map(|pos| self.body_formula(pos))
            .collect()
    }

    pub fn body_formula(&self, position: usize) -> Formula {
        Formula::Or(
            self.rules_for(position)
                .map(|r| Formula::And(r.body.iter().map(|&l| Formula::literal(l)).collect()))
                .collect(),
        )
    }

    /// A copy without the rule at `index`; the alphabet is kept unchanged.
    pub fn without_rule(&self, index: usize) -> GroundProgram {
        let mut rules = self.rules.clone();
        rules.remove(index);
        GroundProgram::new(self.alphabet.clone(), rules).expect("subset of a valid program")
    }

    pub fn dump(&self) -> GroundProgramDump {
        let a = &self.alphabet;
        GroundProgramDump {
            atoms: a
                .ids()
                .map(|id| AtomDump {
                    id: id.0,
                    name: a.name(id).to_string(),
                    kind: a.kind(id),
                })
                .collect(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleDump {
                    head: a.name(r.head).to_string(),
                    body: r
                        .body
                        .iter()
                        .map(|l| LiteralDump {
                            atom: a.name(l.atom).to_string(),
                            positive: l.positive,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

fn alphabet_name(a: &Alphabet, id: AtomId) -> String {
    if a.contains(id) {
        a.name(id).to_string()
    } else {
        format!("#{}", id.0)
    }
}

/// Prints the ground program in the surface syntax. Atoms that occur in no
/// rule are emitted as declarations so the alphabet survives a re-parse.
impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.alphabet;
        let mut used = vec![false; a.len()];
        for r in &self.rules {
            used[r.head.index()] = true;
            for l in &r.body {
                used[l.atom.index()] = true;
            }
        }
        for id in a.ids() {
            if !used[id.index()] {
                match a.kind(id) {
                    AtomKind::Defined => writeln!(f, "#defined {}.", a.name(id))?,
                    AtomKind::Parameter => writeln!(f, "#param {}.", a.name(id))?,
                }
            }
        }
        for r in &self.rules {
            write!(f, "{}", a.name(r.head))?;
            if !r.body.is_empty() {
                f.write_str(" :- ")?;
                for (i, l) in r.body.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if !l.positive {
                        f.write_str("not ")?;
                    }
                    f.write_str(a.name(l.atom))?;
                }
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroundProgramDump {
    pub atoms: Vec<AtomDump>,
    pub rules: Vec<RuleDump>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AtomDump {
    pub id: u32,
    pub name: String,
    pub kind: AtomKind,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RuleDump {
    pub head: String,
    pub body: Vec<LiteralDump>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LiteralDump {
    pub atom: String,
    pub positive: bool,
}
