//! Browser bindings for the compiler. The `*_json` functions do the work and
//! return JSON text; the `#[wasm_bindgen]` wrappers only convert errors.

use serde_json::json;
use wasm_bindgen::prelude::*;

use wfc_core::inference::{check_equivalence, Model};
use wfc_core::symbolic::export::{to_dot, trace_json};
use wfc_core::{Backend, CompileOptions, Formula, GroundProgram, Program, Session, WeightFunction};

fn parse(text: &str) -> Result<GroundProgram, String> {
    Program::parse(text).and_then(|p| p.ground()).map_err(|e| e.to_string())
}

fn options(backend: &str) -> Result<CompileOptions, String> {
    match backend {
        "circuit" => Ok(CompileOptions::circuit()),
        "bdd" => Ok(CompileOptions::bdd()),
        other => Err(format!("unknown backend `{other}`")),
    }
}

/// Compiles a program and returns its trace (with formulas), the final
/// bounds per atom and a DOT rendering of the theory.
pub fn compile_json(program: &str, backend: &str) -> Result<String, String> {
    let mut session = Session::new(parse(program)?);
    let trace = session.compile(&options(backend)?);
    let fin = trace.final_state().clone();
    let exact = !trace.partial && session.is_exact(&fin);
    let roots = if exact {
        vec![("theory".to_string(), session.theory_of(&fin.lower))]
    } else {
        let (lo, hi) = session.theory_bounds(&fin);
        vec![("lower theory".to_string(), lo), ("upper theory".to_string(), hi)]
    };
    let dot = to_dot(&session, &trace, &roots);
    let value = json!({
        "exact": exact,
        "trace": trace_json(&session, &trace, true),
        "dot": dot,
    });
    Ok(value.to_string())
}

/// Lower and upper WMC of `evidence` after every refinement. An empty
/// weight text means weight 1 for both literals of every parameter.
pub fn bounds_json(program: &str, weights: &str, evidence: &str) -> Result<String, String> {
    let p = parse(program)?;
    let w = if weights.trim().is_empty() {
        WeightFunction::uniform(p.alphabet())
    } else {
        WeightFunction::parse(weights, p.alphabet(), true)
            .map_err(|e| e.to_string())?
            .0
    };
    let ev = if evidence.trim().is_empty() {
        None
    } else {
        Some(Formula::parse(evidence, p.alphabet()).map_err(|e| e.to_string())?)
    };
    let mut m = Model::compile(p, &CompileOptions::circuit());
    let steps = m.wmc_bounds(ev.as_ref(), &w).map_err(|e| e.to_string())?;
    let kinds: Vec<_> = m.trace.steps.iter().map(|s| s.kind).collect();
    let steps: Vec<_> = steps
        .iter()
        .map(|b| json!({ "i": b.i, "kind": kinds[b.i], "lo": b.lo, "hi": b.hi }))
        .collect();
    Ok(json!({ "steps": steps }).to_string())
}

/// Whether two programs over the same alphabet have the same models.
pub fn equivalence_json(left: &str, right: &str) -> Result<String, String> {
    let eq = check_equivalence(
        parse(left)?,
        parse(right)?,
        &CompileOptions {
            backend: Backend::Circuit,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    serde_json::to_string(&eq).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn compile(program: &str, backend: &str) -> Result<String, JsError> {
    compile_json(program, backend).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bounds(program: &str, weights: &str, evidence: &str) -> Result<String, JsError> {
    bounds_json(program, weights, evidence).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn equivalence(left: &str, right: &str) -> Result<String, JsError> {
    equivalence_json(left, right).map_err(|e| JsError::new(&e))
}
