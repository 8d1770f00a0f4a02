use std::collections::HashSet;

use super::{AtomPattern, BodyLiteral, Program, ProgramError, Rule, Statement, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Directive(String),
    Not,
    LParen,
    RParen,
    Comma,
    Dot,
    If,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ProgramError {
    ProgramError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, ProgramError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |tok, out: &mut Vec<Spanned>| {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    column,
                })
            };
            match c {
                '%' => break,
                c if c.is_whitespace() => i += 1,
                '(' => {
                    push(Tok::LParen, &mut out);
                    i += 1;
                }
                ')' => {
                    push(Tok::RParen, &mut out);
                    i += 1;
                }
                ',' => {
                    push(Tok::Comma, &mut out);
                    i += 1;
                }
                '.' => {
                    push(Tok::Dot, &mut out);
                    i += 1;
                }
                ':' => {
                    if chars.get(i + 1) == Some(&'-') {
                        push(Tok::If, &mut out);
                        i += 2;
                    } else {
                        return Err(syntax(line_no, column, "expected `:-`"));
                    }
                }
                '#' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && chars[j].is_alphabetic() {
                        j += 1;
                    }
                    let word: String = chars[start..j].iter().collect();
                    if word.is_empty() {
                        return Err(syntax(line_no, column, "expected a directive after `#`"));
                    }
                    push(Tok::Directive(word), &mut out);
                    i = j;
                }
                c if is_ident_char(c) => {
                    let start = i;
                    while i < chars.len() && is_ident_char(chars[i]) {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    let tok = if word == "not" {
                        Tok::Not
                    } else if c.is_uppercase() || c == '_' {
                        Tok::Var(word)
                    } else {
                        Tok::Ident(word)
                    };
                    push(tok, &mut out);
                }
                other => {
                    return Err(syntax(line_no, column, format!("unexpected character `{other}`")));
                }
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.eof)
    }

    fn err(&self, message: impl Into<String>) -> ProgramError {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ProgramError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn atom(&mut self) -> Result<AtomPattern, ProgramError> {
        let predicate = match self.peek() {
            Some(Tok::Ident(name)) => name.clone(),
            Some(Tok::Var(_)) => return Err(self.err("predicate names must start in lowercase")),
            _ => return Err(self.err("expected an atom")),
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                match self.next() {
                    Some(Tok::Ident(c)) => args.push(Term::Const(c)),
                    Some(Tok::Var(v)) => args.push(Term::Var(v)),
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected a term"));
                    }
                }
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
        }
        Ok(AtomPattern { predicate, args })
    }

    fn literal(&mut self) -> Result<BodyLiteral, ProgramError> {
        let positive = if self.peek() == Some(&Tok::Not) {
            self.pos += 1;
            false
        } else {
            true
        };
        Ok(BodyLiteral {
            atom: self.atom()?,
            positive,
        })
    }

    fn statement(&mut self) -> Result<Statement, ProgramError> {
        if let Some(Tok::Directive(d)) = self.peek().cloned() {
            let at = self.here();
            self.pos += 1;
            let stmt = match d.as_str() {
                "domain" => {
                    let mut consts = Vec::new();
                    while let Some(Tok::Ident(c)) = self.peek() {
                        consts.push(c.clone());
                        self.pos += 1;
                    }
                    Statement::Domain(consts)
                }
                "defined" => Statement::Defined(self.atom()?),
                "param" => Statement::Param(self.atom()?),
                other => return Err(syntax(at.0, at.1, format!("unknown directive `#{other}`"))),
            };
            self.expect(&Tok::Dot, "`.`")?;
            return Ok(stmt);
        }
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::If) {
            self.pos += 1;
            body.push(self.literal()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                body.push(self.literal()?);
            }
        }
        self.expect(&Tok::Dot, "`.`")?;
        Ok(Statement::Rule(Rule { head, body }))
    }
}

/// Parses program text and checks declarations against rule heads.
pub fn parse_program(text: &str) -> Result<Program, ProgramError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1);
    let last_len = text.lines().last().map(|l| l.chars().count()).unwrap_or(0);
    let mut p = Parser {
        toks,
        pos: 0,
        eof: (lines, last_len + 1),
    };
    let mut statements = Vec::new();
    while p.peek().is_some() {
        statements.push(p.statement()?);
    }
    let program = Program { statements };
    check_declarations(&program)?;
    Ok(program)
}

fn check_declarations(p: &Program) -> Result<(), ProgramError> {
    let heads: HashSet<(String, usize)> = p
        .rules()
        .map(|r| (r.head.predicate.clone(), r.head.args.len()))
        .collect();
    let mut declared: HashSet<String> = HashSet::new();
    let mut domains = 0;
    for s in &p.statements {
        match s {
            Statement::Domain(_) => {
                domains += 1;
                if domains > 1 {
                    return Err(ProgramError::DuplicateDeclaration("#domain".into()));
                }
            }
            Statement::Defined(a) | Statement::Param(a) => {
                if matches!(s, Statement::Param(_)) && heads.contains(&(a.predicate.clone(), a.args.len())) {
                    return Err(ProgramError::DefinedAtomDeclaredParam(a.to_string()));
                }
                if !declared.insert(a.to_string()) {
                    return Err(ProgramError::DuplicateDeclaration(a.to_string()));
                }
            }
            Statement::Rule(_) => {}
        }
    }
    Ok(())
}
