#![allow(dead_code)]

use rand::Rng;
use wfc_core::concrete::{well_founded, Interpretation};
use wfc_core::formula::FormulaRef;
use wfc_core::program::{Alphabet, AtomKind, GroundRule, Literal, Program};
use wfc_core::{Formula, GroundProgram, Session};

pub fn ground(text: &str) -> GroundProgram {
    Program::parse(text).unwrap().ground().unwrap()
}

pub fn session(text: &str) -> Session {
    Session::new(ground(text))
}

/// A circuit for evidence-syntax text over parameters.
pub fn circuit(s: &mut Session, text: &str) -> FormulaRef {
    let phi = Formula::parse(text, s.program().alphabet()).unwrap();
    let b = s.bottom();
    let (t, p) = s.sym_eval(&phi, &b);
    assert_eq!(t, p, "{text} mentions a defined atom");
    t
}

pub fn position(s: &Session, atom: &str) -> usize {
    let a = s.program().alphabet();
    a.defined_position(a.lookup(atom).unwrap()).unwrap()
}

/// Random ground program with `1..=max_params` parameters and
/// `1..=max_defined` defined atoms. Without `negation` all bodies are
/// positive.
pub fn random_program(rng: &mut impl Rng, max_params: usize, max_defined: usize, negation: bool) -> GroundProgram {
    let mut a = Alphabet::new();
    let np = rng.random_range(1..=max_params);
    let nd = rng.random_range(1..=max_defined);
    let params: Vec<_> = (0..np)
        .map(|i| a.insert(&format!("p{i}"), AtomKind::Parameter).unwrap())
        .collect();
    let defined: Vec<_> = (0..nd)
        .map(|i| a.insert(&format!("d{i}"), AtomKind::Defined).unwrap())
        .collect();
    let all: Vec<_> = params.iter().chain(&defined).copied().collect();
    let mut rules = Vec::new();
    for _ in 0..rng.random_range(1..=2 * nd + 1) {
        let head = defined[rng.random_range(0..nd)];
        let body = (0..rng.random_range(0..=3))
            .map(|_| {
                let atom = all[rng.random_range(0..all.len())];
                if negation && rng.random_bool(0.35) {
                    Literal::neg(atom)
                } else {
                    Literal::pos(atom)
                }
            })
            .collect();
        rules.push(GroundRule { head, body });
    }
    GroundProgram::new(a, rules).unwrap()
}

/// Random formula over the given atoms.
pub fn random_formula(rng: &mut impl Rng, atoms: &[wfc_core::program::AtomId], depth: usize) -> Formula {
    if depth == 0 || atoms.is_empty() || rng.random_bool(0.3) {
        return match rng.random_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ if atoms.is_empty() => Formula::True,
            _ => {
                let f = Formula::Atom(atoms[rng.random_range(0..atoms.len())]);
                if rng.random_bool(0.4) {
                    Formula::not(f)
                } else {
                    f
                }
            }
        };
    }
    let kids = (0..rng.random_range(1..=3))
        .map(|_| random_formula(rng, atoms, depth - 1))
        .collect();
    let f = if rng.random_bool(0.5) {
        Formula::And(kids)
    } else {
        Formula::Or(kids)
    };
    if rng.random_bool(0.2) {
        Formula::not(f)
    } else {
        f
    }
}

/// Whether the well-founded model is exact for every parameter assignment.
pub fn exact_for_all(p: &GroundProgram) -> bool {
    let a = p.alphabet();
    (0..1u64 << a.parameters().len()).all(|k| well_founded(p, &Interpretation::parameters_from_index(a, k)).is_exact())
}
