//! Trace summaries as JSON and circuits as Graphviz DOT.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Backend, Session, StepKind, Trace};
use crate::formula::{FormulaRef, Node};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TraceJson {
    pub backend: Backend,
    pub partial: bool,
    pub defined: usize,
    pub parameters: usize,
    pub steps: Vec<StepJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StepJson {
    pub i: usize,
    pub kind: StepKind,
    /// Known only with the BDD backend.
    pub strict: Option<bool>,
    pub inner_rounds: usize,
    pub store_nodes: usize,
    pub lower_nodes: usize,
    pub upper_nodes: usize,
    pub atoms: Vec<AtomStepJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AtomStepJson {
    pub atom: String,
    pub lower_nodes: usize,
    pub upper_nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper: Option<String>,
}

/// Per-step sizes; with `with_formulas` also the formulas as text.
pub fn trace_json(session: &Session, trace: &Trace, with_formulas: bool) -> TraceJson {
    let a = session.program().alphabet();
    let store = session.store();
    let steps = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, step)| {
            let s = &step.state;
            let atoms = a
                .defined()
                .iter()
                .enumerate()
                .map(|(k, &d)| AtomStepJson {
                    atom: a.name(d).to_string(),
                    lower_nodes: store.stats(s.lower[k]).nodes,
                    upper_nodes: store.stats(s.upper[k]).nodes,
                    lower: with_formulas.then(|| store.display(s.lower[k], a).to_string()),
                    upper: with_formulas.then(|| store.display(s.upper[k], a).to_string()),
                })
                .collect();
            StepJson {
                i,
                kind: step.kind,
                strict: step.strict,
                inner_rounds: step.inner_rounds,
                store_nodes: step.watermark,
                lower_nodes: store.stats_many(&s.lower).nodes,
                upper_nodes: store.stats_many(&s.upper).nodes,
                atoms,
            }
        })
        .collect();
    TraceJson {
        backend: trace.backend,
        partial: trace.partial,
        defined: a.defined().len(),
        parameters: a.parameters().len(),
        steps,
    }
}

/// DOT rendering of the circuits below `roots`. Nodes are grouped into one
/// cluster per trace step that created them (using the steps' store marks);
/// nodes created after the last step, such as the equivalences of a theory
/// and its defined-atom inputs, form a final cluster. Defined atoms are
/// drawn as boxes.
pub fn to_dot(session: &Session, trace: &Trace, roots: &[(String, FormulaRef)]) -> String {
    let a = session.program().alphabet();
    let store = session.store();
    let refs: Vec<FormulaRef> = roots.iter().map(|r| r.1).collect();
    let nodes = store.reachable(&refs);
    let marks: Vec<(String, usize)> = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let kind = match s.kind {
                StepKind::Initial => "initial",
                StepKind::Application => "application",
                StepKind::Unfoundedness => "unfoundedness",
                StepKind::Canonicalize => "canonical",
            };
            (format!("step {i}: {kind}"), s.watermark)
        })
        .collect();
    let layer_of = |f: FormulaRef| marks.iter().position(|(_, m)| f.index() < *m).unwrap_or(marks.len());

    let mut out = String::new();
    out.push_str("digraph circuit {\n  rankdir=BT;\n  node [fontname=\"Helvetica\"];\n");
    let node_line = |f: FormulaRef| -> String {
        let id = f.index();
        match store.node(f) {
            Node::False => format!("  n{id} [label=\"false\", shape=plaintext];\n"),
            Node::True => format!("  n{id} [label=\"true\", shape=plaintext];\n"),
            Node::Var(atom) => {
                let shape = if a.is_defined(*atom) { "box" } else { "ellipse" };
                format!("  n{id} [label=\"{}\", shape={shape}];\n", a.name(*atom))
            }
            Node::Not(_) => format!("  n{id} [label=\"¬\", shape=circle];\n"),
            Node::And(_) => format!("  n{id} [label=\"∧\", shape=circle];\n"),
            Node::Or(_) => format!("  n{id} [label=\"∨\", shape=circle];\n"),
        }
    };
    for layer in 0..=marks.len() {
        let members: Vec<FormulaRef> = nodes.iter().copied().filter(|&f| layer_of(f) == layer).collect();
        if members.is_empty() {
            continue;
        }
        let label = marks.get(layer).map(|m| m.0.as_str()).unwrap_or("theory");
        let _ = writeln!(out, "  subgraph cluster_{layer} {{\n    label=\"{label}\";");
        for f in members {
            out.push_str("  ");
            out.push_str(&node_line(f));
        }
        out.push_str("  }\n");
    }
    for &f in &nodes {
        for c in store.node(f).children() {
            let _ = writeln!(out, "  n{} -> n{};", c.index(), f.index());
        }
    }
    for (k, (name, f)) in roots.iter().enumerate() {
        let _ = writeln!(
            out,
            "  root{k} [label=\"{}\", shape=doubleoctagon];\n  n{} -> root{k};",
            name.replace('"', "\\\""),
            f.index()
        );
    }
    out.push_str("}\n");
    out
}
