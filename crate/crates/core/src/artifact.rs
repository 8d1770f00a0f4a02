//! A JSON form of a compiled state, so it can be stored and validated later.
//!
//! Nodes are listed children first; `lower` and `upper` hold node indices
//! per defined atom.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{FormulaRef, FormulaStore, Node};
use crate::program::GroundProgram;
use crate::symbolic::SymbolicState;

pub const FORMAT: &str = "wfc-artifact/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ArtifactNode {
    False,
    True,
    Var { atom: String },
    Not { arg: usize },
    And { args: Vec<usize> },
    Or { args: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactAtom {
    pub atom: String,
    pub lower: usize,
    pub upper: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub format: String,
    pub parameters: Vec<String>,
    pub nodes: Vec<ArtifactNode>,
    pub atoms: Vec<ArtifactAtom>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArtifactError {
    #[error("unsupported artifact format {0:?}")]
    Format(String),
    #[error("node {node} refers to node {child}, which is not listed before it")]
    DanglingChild { node: usize, child: usize },
    #[error("atom {0:?} is not a parameter of the program")]
    UnknownParameter(String),
    #[error("atom {0:?} is not a defined atom of the program")]
    UnknownDefined(String),
    #[error("defined atom {0:?} has no entry")]
    MissingDefined(String),
    #[error("defined atom {0:?} is listed twice")]
    DuplicateDefined(String),
    #[error("atom entry {atom:?} refers to node {node}, which does not exist")]
    BadRoot { atom: String, node: usize },
}

impl Artifact {
    pub fn export(program: &GroundProgram, store: &FormulaStore, state: &SymbolicState) -> Self {
        let a = program.alphabet();
        let nodes = store.reachable(&state.roots());
        let index: HashMap<FormulaRef, usize> = nodes.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let out_nodes = nodes
            .iter()
            .map(|&f| match store.node(f) {
                Node::False => ArtifactNode::False,
                Node::True => ArtifactNode::True,
                Node::Var(x) => ArtifactNode::Var {
                    atom: a.name(*x).to_string(),
                },
                Node::Not(c) => ArtifactNode::Not { arg: index[c] },
                Node::And(cs) => ArtifactNode::And {
                    args: cs.iter().map(|c| index[c]).collect(),
                },
                Node::Or(cs) => ArtifactNode::Or {
                    args: cs.iter().map(|c| index[c]).collect(),
                },
            })
            .collect();
        let atoms = a
            .defined()
            .iter()
            .enumerate()
            .map(|(k, &d)| ArtifactAtom {
                atom: a.name(d).to_string(),
                lower: index[&state.lower[k]],
                upper: index[&state.upper[k]],
            })
            .collect();
        Artifact {
            format: FORMAT.to_string(),
            parameters: a.parameters().iter().map(|&p| a.name(p).to_string()).collect(),
            nodes: out_nodes,
            atoms,
        }
    }

    /// Rebuilds the state in `store`, which must belong to `program`.
    pub fn import(&self, program: &GroundProgram, store: &mut FormulaStore) -> Result<SymbolicState, ArtifactError> {
        if self.format != FORMAT {
            return Err(ArtifactError::Format(self.format.clone()));
        }
        let a = program.alphabet();
        let mut refs: Vec<FormulaRef> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let child = |c: usize| {
                refs.get(c)
                    .copied()
                    .ok_or(ArtifactError::DanglingChild { node: i, child: c })
            };
            let f = match node {
                ArtifactNode::False => FormulaRef::FALSE,
                ArtifactNode::True => FormulaRef::TRUE,
                ArtifactNode::Var { atom } => {
                    let id = a
                        .lookup(atom)
                        .filter(|&x| !a.is_defined(x))
                        .ok_or_else(|| ArtifactError::UnknownParameter(atom.clone()))?;
                    store.mk_var(id).expect("a parameter")
                }
                ArtifactNode::Not { arg } => {
                    let c = child(*arg)?;
                    store.mk_not(c)
                }
                ArtifactNode::And { args } => {
                    let cs = args.iter().map(|&c| child(c)).collect::<Result<Vec<_>, _>>()?;
                    store.mk_and(cs)
                }
                ArtifactNode::Or { args } => {
                    let cs = args.iter().map(|&c| child(c)).collect::<Result<Vec<_>, _>>()?;
                    store.mk_or(cs)
                }
            };
            refs.push(f);
        }
        let n = a.defined().len();
        let mut lower = vec![None; n];
        let mut upper = vec![None; n];
        for entry in &self.atoms {
            let pos = a
                .lookup(&entry.atom)
                .and_then(|x| a.defined_position(x))
                .ok_or_else(|| ArtifactError::UnknownDefined(entry.atom.clone()))?;
            if lower[pos].is_some() {
                return Err(ArtifactError::DuplicateDefined(entry.atom.clone()));
            }
            let get = |node: usize| {
                refs.get(node).copied().ok_or_else(|| ArtifactError::BadRoot {
                    atom: entry.atom.clone(),
                    node,
                })
            };
            lower[pos] = Some(get(entry.lower)?);
            upper[pos] = Some(get(entry.upper)?);
        }
        let missing = |k: usize| ArtifactError::MissingDefined(a.name(a.defined()[k]).to_string());
        Ok(SymbolicState {
            lower: lower
                .into_iter()
                .enumerate()
                .map(|(k, f)| f.ok_or_else(|| missing(k)))
                .collect::<Result<_, _>>()?,
            upper: upper.into_iter().map(|f| f.expect("set together with lower")).collect(),
        })
    }
}
