//! Queries on compiled programs: equivalence, model counting and
//! enumeration, weighted model counting and anytime WMC bounds.
//!
//! Counting works over the parameters only. When the compiled model is
//! exact every parameter assignment extends to exactly one model, so the
//! defined atoms can be substituted by their formulas.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bdd::{BddError, BddRef, BoolOp, WeightValue};
use crate::concrete::Interpretation;
use crate::formula::{EvalPlan, FormulaRef};
use crate::program::{AtomId, GroundProgram};
use crate::symbolic::{CompileOptions, Session, SymbolicState, Trace, VarOrder};
use crate::syntax::Formula;
use crate::weights::WeightFunction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error("the compiled model{} is not exact; three-valued atoms: {}", program_label(.program), .atoms.join(", "))]
    NonExactModel {
        program: Option<String>,
        atoms: Vec<String>,
    },
    #[error("the programs do not share an alphabet: {0}")]
    AlphabetMismatch(String),
    #[error("weights: {0}")]
    Weights(#[from] BddError),
}

fn program_label(p: &Option<String>) -> String {
    p.as_ref().map(|n| format!(" of {n}")).unwrap_or_default()
}

/// A compiled program.
pub struct Model {
    pub session: Session,
    pub trace: Trace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundStep {
    pub i: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactBoundStep {
    pub i: usize,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Model {
    pub fn compile(program: GroundProgram, opts: &CompileOptions) -> Self {
        Self::compile_with_order(program, VarOrder::default(), opts)
    }

    pub fn compile_with_order(program: GroundProgram, order: VarOrder, opts: &CompileOptions) -> Self {
        let mut session = Session::with_order(program, order);
        let trace = session.compile(opts);
        Model { session, trace }
    }

    pub fn program(&self) -> &GroundProgram {
        self.session.program()
    }

    pub fn state(&self) -> &SymbolicState {
        self.trace.final_state()
    }

    pub fn is_exact(&mut self) -> bool {
        let s = self.trace.final_state().clone();
        self.session.is_exact(&s)
    }

    /// Defined atoms whose final lower and upper bounds differ.
    pub fn three_valued_atoms(&mut self) -> Vec<String> {
        let s = self.trace.final_state().clone();
        let a = self.session.program().alphabet().clone();
        self.session
            .three_valued_atoms(&s)
            .into_iter()
            .map(|d| a.name(d).to_string())
            .collect()
    }

    /// The compiled formula of every defined atom, if the model is exact.
    pub fn exact_formulas(&mut self) -> Result<Vec<FormulaRef>, InferenceError> {
        if self.trace.partial || !self.is_exact() {
            return Err(InferenceError::NonExactModel {
                program: None,
                atoms: self.three_valued_atoms(),
            });
        }
        Ok(self.trace.final_state().lower.clone())
    }

    /// Evidence over the whole alphabet as a BDD over the parameters, with
    /// every defined atom replaced by its compiled formula.
    fn evidence_bdd(&mut self, evidence: Option<&Formula>) -> Result<BddRef, InferenceError> {
        let a = self.exact_formulas()?;
        let Some(phi) = evidence else {
            return Ok(self.session.bdd().one());
        };
        let (t, _) = self.session.sym_eval(phi, &SymbolicState::exact(a));
        Ok(self.session.bdd_of(t))
    }

    /// Number of models `J ⊨wf P` that satisfy the evidence.
    pub fn count(&mut self, evidence: Option<&Formula>) -> Result<BigUint, InferenceError> {
        let b = self.evidence_bdd(evidence)?;
        Ok(self.session.bdd().count_models(b)?)
    }

    pub fn wmc(&mut self, evidence: Option<&Formula>, w: &WeightFunction) -> Result<f64, InferenceError> {
        let b = self.evidence_bdd(evidence)?;
        Ok(self.session.bdd().wmc(b, w)?)
    }

    pub fn wmc_exact(&mut self, evidence: Option<&Formula>, w: &WeightFunction) -> Result<BigRational, InferenceError> {
        let b = self.evidence_bdd(evidence)?;
        Ok(self.session.bdd().wmc_exact(b, w)?)
    }

    /// Up to `limit` models satisfying the evidence, ordered
    /// lexicographically by the parameters in variable order (false first).
    pub fn enumerate(
        &mut self,
        evidence: Option<&Formula>,
        limit: usize,
    ) -> Result<Vec<Interpretation>, InferenceError> {
        let b = self.evidence_bdd(evidence)?;
        let formulas = self.exact_formulas()?;
        let vars = self.session.bdd().variables().to_vec();
        let plan = EvalPlan::new(self.session.store(), &formulas);
        let a = self.session.program().alphabet();
        let defined = a.defined();
        let models = self.session.bdd().enumerate_models(b, limit)?;
        Ok(models
            .into_iter()
            .map(|bits| {
                let params = Interpretation::from_atoms(a, vars.iter().zip(&bits).filter(|(_, &v)| v).map(|(&p, _)| p));
                let values = plan.eval(&|x| params.contains(x));
                let mut model = params.clone();
                for (k, &d) in defined.iter().enumerate() {
                    model.set(d, values[k]);
                }
                model
            })
            .collect())
    }

    /// Lower and upper WMC of the evidence at every trace step. The bounds
    /// come from evaluating the evidence three-valued in the step's state,
    /// so they hold for any evidence, including negated defined atoms.
    pub fn wmc_bounds(
        &mut self,
        evidence: Option<&Formula>,
        w: &WeightFunction,
    ) -> Result<Vec<BoundStep>, InferenceError> {
        let table = self.session.bdd().weight_table(w, |lw| (lw.w_true, lw.w_false))?;
        Ok(self
            .bounds_generic(evidence, &table)?
            .into_iter()
            .map(|(i, lo, hi)| BoundStep { i, lo, hi })
            .collect())
    }

    pub fn wmc_bounds_exact(
        &mut self,
        evidence: Option<&Formula>,
        w: &WeightFunction,
    ) -> Result<Vec<ExactBoundStep>, InferenceError> {
        let table = self
            .session
            .bdd()
            .weight_table(w, |lw| (lw.exact_true.clone(), lw.exact_false.clone()))?;
        Ok(self
            .bounds_generic(evidence, &table)?
            .into_iter()
            .map(|(i, lo, hi)| ExactBoundStep { i, lo, hi })
            .collect())
    }

    fn bounds_generic<T: WeightValue>(
        &mut self,
        evidence: Option<&Formula>,
        table: &[(T, T)],
    ) -> Result<Vec<(usize, T, T)>, InferenceError> {
        let phi = evidence.cloned().unwrap_or(Formula::True);
        let states: Vec<SymbolicState> = self.trace.steps.iter().map(|s| s.state.clone()).collect();
        let mut out = Vec::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            let (t, p) = self.session.sym_eval(&phi, s);
            let (bt, bp) = (self.session.bdd_of(t), self.session.bdd_of(p));
            let lo = self.session.bdd().wmc_generic(bt, table)?;
            let hi = self.session.bdd().wmc_generic(bp, table)?;
            out.push((i, lo, hi));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// A parameter assignment on which two programs disagree, with both
/// programs' (unique) models.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub parameters: Vec<String>,
    pub atom: String,
    pub left: bool,
    pub right: bool,
    pub left_model: Vec<String>,
    pub right_model: Vec<String>,
}

/// Whether two programs define the same defined atoms for every parameter
/// assignment, i.e. whether their compiled theories are equivalent.
pub fn check_equivalence(
    p1: GroundProgram,
    p2: GroundProgram,
    opts: &CompileOptions,
) -> Result<Equivalence, InferenceError> {
    let a1 = p1.alphabet().clone();
    let a2 = p2.alphabet().clone();
    let names = |a: &crate::program::Alphabet, ids: &[AtomId]| {
        let mut v: Vec<String> = ids.iter().map(|&i| a.name(i).to_string()).collect();
        v.sort();
        v
    };
    if names(&a1, a1.parameters()) != names(&a2, a2.parameters()) {
        return Err(InferenceError::AlphabetMismatch("parameters differ".into()));
    }
    if names(&a1, a1.defined()) != names(&a2, a2.defined()) {
        return Err(InferenceError::AlphabetMismatch("defined atoms differ".into()));
    }
    let mut m1 = Model::compile(p1, opts);
    let mut m2 = Model::compile(p2, opts);
    let f1 = m1.exact_formulas().map_err(|e| label(e, "the first program"))?;
    let f2 = m2.exact_formulas().map_err(|e| label(e, "the second program"))?;

    // bring the second program's formulas into the first session
    let rename = |x: AtomId| a1.lookup(a2.name(x));
    let mut imported = vec![FormulaRef::FALSE; f1.len()];
    for (k2, &d2) in a2.defined().iter().enumerate() {
        let d1 = a1.lookup(a2.name(d2)).expect("same defined atoms");
        let k1 = a1.defined_position(d1).expect("defined");
        imported[k1] = m1
            .session
            .store_mut()
            .import(m2.session.store(), f2[k2], rename)
            .expect("same parameters");
    }
    for (k, &d) in a1.defined().iter().enumerate() {
        let b1 = m1.session.bdd_of(f1[k]);
        let b2 = m1.session.bdd_of(imported[k]);
        if b1 == b2 {
            continue;
        }
        let diff = m1.session.bdd_mut().apply(BoolOp::Xor, b1, b2)?;
        let bits = m1.session.bdd().enumerate_models(diff, 1)?.remove(0);
        let vars = m1.session.bdd().variables().to_vec();
        let params = Interpretation::from_atoms(&a1, vars.iter().zip(&bits).filter(|(_, &v)| v).map(|(&p, _)| p));
        let model_of = |formulas: &[FormulaRef]| {
            let plan = EvalPlan::new(m1.session.store(), formulas);
            let values = plan.eval(&|x| params.contains(x));
            let mut model = params.clone();
            for (j, &dd) in a1.defined().iter().enumerate() {
                model.set(dd, values[j]);
            }
            model
        };
        let left = model_of(&f1);
        let right = model_of(&imported);
        return Ok(Equivalence {
            equivalent: false,
            witness: Some(Witness {
                parameters: params.names(&a1),
                atom: a1.name(d).to_string(),
                left: left.contains(d),
                right: right.contains(d),
                left_model: left.names(&a1),
                right_model: right.names(&a1),
            }),
        });
    }
    Ok(Equivalence {
        equivalent: true,
        witness: None,
    })
}

fn label(e: InferenceError, name: &str) -> InferenceError {
    match e {
        InferenceError::NonExactModel { atoms, .. } => InferenceError::NonExactModel {
            program: Some(name.to_string()),
            atoms,
        },
        other => other,
    }
}
