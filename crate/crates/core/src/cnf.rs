//! Tseitin encoding of circuits and DIMACS output.

use std::collections::HashMap;
use std::fmt::Write;

use crate::formula::{FormulaRef, FormulaStore, Node};
use crate::program::{Alphabet, AtomId};

/// A clause is a list of non-zero DIMACS literals.
pub type Clause = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
    /// CNF variable (1-based) of each input atom, in variable order.
    pub atom_vars: Vec<(AtomId, i64)>,
}

impl Cnf {
    /// Variables introduced for gates rather than atoms.
    pub fn auxiliary(&self) -> impl Iterator<Item = i64> + '_ {
        (self.atom_vars.len() as i64 + 1)..=(self.num_vars as i64)
    }

    pub fn to_dimacs(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for &(atom, v) in &self.atom_vars {
            let _ = writeln!(out, "c varmap {} {}", alphabet.name(atom), v);
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Equisatisfiable CNF of `x`. Atoms get the first variables (ascending atom
/// id), then one variable per And/Or gate. Negation is pushed into literals
/// and needs no variable. The root literal is asserted.
pub fn to_cnf(store: &FormulaStore, x: FormulaRef) -> Cnf {
    match store.node(x) {
        Node::True => {
            return Cnf {
                num_vars: 0,
                clauses: Vec::new(),
                atom_vars: Vec::new(),
            }
        }
        Node::False => {
            return Cnf {
                num_vars: 0,
                clauses: vec![Vec::new()],
                atom_vars: Vec::new(),
            }
        }
        _ => {}
    }
    let order = store.reachable(&[x]);
    let mut atom_vars = Vec::new();
    let mut lit: HashMap<FormulaRef, i64> = HashMap::new();
    let mut atoms: Vec<(AtomId, FormulaRef)> = order
        .iter()
        .filter_map(|&f| match store.node(f) {
            Node::Var(a) => Some((*a, f)),
            _ => None,
        })
        .collect();
    atoms.sort();
    for (i, (a, f)) in atoms.into_iter().enumerate() {
        let v = i as i64 + 1;
        atom_vars.push((a, v));
        lit.insert(f, v);
    }
    let mut next = atom_vars.len() as i64;
    let mut clauses = Vec::new();
    for &f in &order {
        match store.node(f) {
            Node::Var(_) => {}
            // constants can only occur below a gate if the store holds
            // unnormalised nodes; encode them with a fixed variable anyway
            Node::True | Node::False => {
                next += 1;
                let v = next;
                clauses.push(vec![if matches!(store.node(f), Node::True) { v } else { -v }]);
                lit.insert(f, v);
            }
            Node::Not(c) => {
                let l = -lit[c];
                lit.insert(f, l);
            }
            Node::And(cs) | Node::Or(cs) => {
                next += 1;
                let g = next;
                let kids: Vec<i64> = cs.iter().map(|c| lit[c]).collect();
                if matches!(store.node(f), Node::And(_)) {
                    // g -> k_i, (all k_i) -> g
                    for &k in &kids {
                        clauses.push(vec![-g, k]);
                    }
                    let mut c: Clause = kids.iter().map(|k| -k).collect();
                    c.push(g);
                    clauses.push(c);
                } else {
                    // k_i -> g, g -> (some k_i)
                    for &k in &kids {
                        clauses.push(vec![-k, g]);
                    }
                    let mut c: Clause = kids.clone();
                    c.push(-g);
                    clauses.push(c);
                }
                lit.insert(f, g);
            }
        }
    }
    clauses.push(vec![lit[&x]]);
    Cnf {
        num_vars: next as usize,
        clauses,
        atom_vars,
    }
}
