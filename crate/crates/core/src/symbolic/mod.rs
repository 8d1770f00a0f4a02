//! Symbolic three-valued evaluation and the parametrised operators.
//!
//! A [`SymbolicState`] assigns every defined atom a pair of circuits over the
//! parameters. Evaluating a rule body in such a state gives again a pair of
//! circuits; the parametrised operators apply this to every defined atom.

mod compile;
pub mod export;
mod schedule;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bdd::{BddManager, BddRef};
use crate::concrete::{Interpretation, PartialInterpretation};
use crate::formula::{EvalPlan, FormulaRef, FormulaStore};
use crate::program::{AtomId, GroundProgram};
use crate::syntax::Formula;

pub use compile::{CompileOptions, StepKind, Trace, TraceStep};
pub use schedule::random_compile;

/// Map from each defined atom (by defined position) to a circuit.
pub type SymbolicInterpretation = Vec<FormulaRef>;

/// Lower and upper circuits per defined atom, by defined position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolicState {
    pub lower: SymbolicInterpretation,
    pub upper: SymbolicInterpretation,
}

impl SymbolicState {
    pub fn exact(a: SymbolicInterpretation) -> Self {
        SymbolicState {
            lower: a.clone(),
            upper: a,
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// All circuits, lower bounds first.
    pub fn roots(&self) -> Vec<FormulaRef> {
        self.lower.iter().chain(&self.upper).copied().collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Plain circuits; phases are bounded by counting, never by equivalence.
    #[default]
    Circuit,
    /// Every formula is rebuilt from its BDD, so equal handles mean equal
    /// functions and fixpoints are detected exactly.
    Bdd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarOrder {
    /// Parameters in order of first mention in the program.
    #[default]
    FirstMention,
    Lexicographic,
}

/// How much of the upper bound an unfoundedness refinement recomputes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnfoundedScope {
    /// The least fixpoint over all defined atoms: the most precise
    /// unfoundedness refinement.
    #[default]
    Maximal,
    /// The least fixpoint over the lowest strongly connected component of
    /// the dependency graph where it makes progress, other atoms kept; falls
    /// back to the maximal refinement when no component does. Needs the BDD
    /// backend to detect progress; with plain circuits it acts as
    /// [`UnfoundedScope::Maximal`].
    Stratified,
}

/// A ground program together with the circuit store and BDD manager used to
/// compile it.
pub struct Session {
    program: GroundProgram,
    bodies: Vec<Formula>,
    store: FormulaStore,
    bdd: BddManager,
    canon: HashMap<u32, FormulaRef>,
    components: Vec<Vec<usize>>,
}

impl Session {
    pub fn new(program: GroundProgram) -> Self {
        Self::with_order(program, VarOrder::default())
    }

    pub fn with_order(program: GroundProgram, order: VarOrder) -> Self {
        let a = program.alphabet();
        let mut vars = a.parameters().to_vec();
        if order == VarOrder::Lexicographic {
            vars.sort_by(|x, y| a.name(*x).cmp(a.name(*y)));
        }
        Session {
            bodies: program.body_formulas(),
            store: FormulaStore::new(a),
            bdd: BddManager::new(vars),
            canon: HashMap::new(),
            components: dependency_components(&program),
            program,
        }
    }

    pub fn program(&self) -> &GroundProgram {
        &self.program
    }

    pub fn store(&self) -> &FormulaStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut FormulaStore {
        &mut self.store
    }

    pub fn bdd(&self) -> &BddManager {
        &self.bdd
    }

    pub fn bdd_mut(&mut self) -> &mut BddManager {
        &mut self.bdd
    }

    /// `φ_p` of the defined atom at `position`.
    pub fn body(&self, position: usize) -> &Formula {
        &self.bodies[position]
    }

    pub fn num_defined(&self) -> usize {
        self.bodies.len()
    }

    /// `(⊥, ⊤)`: every defined atom unknown.
    pub fn bottom(&self) -> SymbolicState {
        let n = self.num_defined();
        SymbolicState {
            lower: vec![FormulaRef::FALSE; n],
            upper: vec![FormulaRef::TRUE; n],
        }
    }

    /// Symbolic evaluation of `phi` in `s`: parameters map to themselves,
    /// defined atoms to their bounds, connectives act componentwise and
    /// negation swaps the bounds.
    pub fn sym_eval(&mut self, phi: &Formula, s: &SymbolicState) -> (FormulaRef, FormulaRef) {
        sym_eval(&mut self.store, &self.program, phi, s)
    }

    /// The parametrised immediate consequence operator.
    pub fn sym_tp(&mut self, a: &[FormulaRef]) -> SymbolicInterpretation {
        let s = SymbolicState::exact(a.to_vec());
        (0..self.num_defined())
            .map(|pos| sym_eval(&mut self.store, &self.program, &self.bodies[pos], &s).0)
            .collect()
    }

    /// The parametrised three-valued operator.
    pub fn sym_psi(&mut self, s: &SymbolicState) -> SymbolicState {
        let n = self.num_defined();
        let mut out = SymbolicState {
            lower: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
        };
        for pos in 0..n {
            let (t, p) = sym_eval(&mut self.store, &self.program, &self.bodies[pos], s);
            out.lower.push(t);
            out.upper.push(p);
        }
        out
    }

    /// Upper component of the operator with the lower bound fixed.
    fn psi_upper(&mut self, lower: &[FormulaRef], y: &[FormulaRef]) -> Vec<FormulaRef> {
        let s = SymbolicState {
            lower: lower.to_vec(),
            upper: y.to_vec(),
        };
        (0..self.num_defined())
            .map(|pos| sym_eval(&mut self.store, &self.program, &self.bodies[pos], &s).1)
            .collect()
    }

    /// Maximal unfoundedness refinement: the upper bound is replaced by the
    /// least fixpoint of `y ↦ Ψ(lower, y)₂`, iterated from all-false. With
    /// the circuit backend the iteration runs at most `|Σd|` rounds (which
    /// reaches the fixpoint for every parameter assignment); with the BDD
    /// backend it stops at the first repeated state.
    pub fn unfoundedness_refine(&mut self, s: &SymbolicState, backend: Backend) -> (SymbolicState, usize) {
        let all: Vec<usize> = (0..self.num_defined()).collect();
        self.unfoundedness_refine_scoped(s, &all, backend)
    }

    /// Like [`Session::unfoundedness_refine`] but only the atoms at the
    /// defined positions in `scope` are recomputed; the others keep their
    /// current upper bound.
    pub fn unfoundedness_refine_scoped(
        &mut self,
        s: &SymbolicState,
        scope: &[usize],
        backend: Backend,
    ) -> (SymbolicState, usize) {
        let mut y = s.upper.clone();
        for &i in scope {
            y[i] = FormulaRef::FALSE;
        }
        let limit = scope.len();
        let mut rounds = 0;
        loop {
            if backend == Backend::Circuit && rounds == limit {
                break;
            }
            let full = self.psi_upper(&s.lower, &y);
            let mut next = y.clone();
            for &i in scope {
                next[i] = if backend == Backend::Bdd {
                    self.canonical(full[i])
                } else {
                    full[i]
                };
            }
            if next == y {
                break;
            }
            y = next;
            rounds += 1;
        }
        (
            SymbolicState {
                lower: s.lower.clone(),
                upper: y,
            },
            rounds,
        )
    }

    /// Strongly connected components of the positive-and-negative
    /// dependency graph over defined positions, dependencies first.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// BDD of a circuit in this session's manager.
    pub fn bdd_of(&mut self, f: FormulaRef) -> BddRef {
        self.bdd
            .from_formula(&self.store, f)
            .expect("session circuits only mention parameters")
    }

    /// The circuit rebuilt from `f`'s BDD; semantically equal circuits get
    /// the same handle.
    pub fn canonical(&mut self, f: FormulaRef) -> FormulaRef {
        let b = self.bdd_of(f);
        let g = self
            .bdd
            .to_formula(b, &mut self.store, &mut self.canon)
            .expect("same manager");
        self.bdd.remember(&self.store, g, b).expect("same manager");
        g
    }

    pub fn canonical_all(&mut self, fs: &[FormulaRef]) -> Vec<FormulaRef> {
        fs.iter().map(|&f| self.canonical(f)).collect()
    }

    pub fn canonical_state(&mut self, s: &SymbolicState) -> SymbolicState {
        SymbolicState {
            lower: self.canonical_all(&s.lower),
            upper: self.canonical_all(&s.upper),
        }
    }

    pub fn equivalent(&mut self, f: FormulaRef, g: FormulaRef) -> bool {
        f == g || self.bdd_of(f) == self.bdd_of(g)
    }

    pub fn entails(&mut self, f: FormulaRef, g: FormulaRef) -> bool {
        let (bf, bg) = (self.bdd_of(f), self.bdd_of(g));
        self.bdd.entails(bf, bg).expect("same manager")
    }

    /// Lower and upper bound agree for every atom.
    pub fn is_exact(&mut self, s: &SymbolicState) -> bool {
        (0..s.len()).all(|i| self.equivalent(s.lower[i], s.upper[i]))
    }

    /// Defined atoms whose bounds differ semantically.
    pub fn three_valued_atoms(&mut self, s: &SymbolicState) -> Vec<AtomId> {
        let defined = self.program.alphabet().defined().to_vec();
        (0..s.len())
            .filter(|&i| !self.equivalent(s.lower[i], s.upper[i]))
            .map(|i| defined[i])
            .collect()
    }

    /// Every lower bound entails its upper bound.
    pub fn is_consistent(&mut self, s: &SymbolicState) -> bool {
        (0..s.len()).all(|i| self.entails(s.lower[i], s.upper[i]))
    }

    /// Semantic precision order: `a` is at most as precise as `b`.
    pub fn leq_p(&mut self, a: &SymbolicState, b: &SymbolicState) -> bool {
        (0..a.len()).all(|i| self.entails(a.lower[i], b.lower[i]) && self.entails(b.upper[i], a.upper[i]))
    }

    pub fn semantically_equal(&mut self, a: &SymbolicState, b: &SymbolicState) -> bool {
        (0..a.len()).all(|i| self.equivalent(a.lower[i], b.lower[i]) && self.equivalent(a.upper[i], b.upper[i]))
    }

    /// The partial interpretation obtained by evaluating every circuit at
    /// the parameter assignment `params`.
    pub fn concretise(&self, s: &SymbolicState, params: &Interpretation) -> PartialInterpretation {
        concretise(&self.store, &self.program, s, params)
    }

    /// `⋀_d d ⇔ A(d)`, with the defined atoms as circuit inputs.
    pub fn theory_of(&mut self, a: &[FormulaRef]) -> FormulaRef {
        let defined = self.program.alphabet().defined().to_vec();
        let parts: Vec<FormulaRef> = defined
            .iter()
            .zip(a)
            .map(|(&d, &f)| {
                let v = self.store.mk_atom(d).expect("defined atom of this program");
                self.store.mk_iff(v, f)
            })
            .collect();
        self.store.mk_and(parts)
    }

    pub fn theory_bounds(&mut self, s: &SymbolicState) -> (FormulaRef, FormulaRef) {
        (self.theory_of(&s.lower), self.theory_of(&s.upper))
    }

    /// Iterates the parametrised immediate consequence operator from all-false
    /// until it is stationary up to equivalence.
    pub fn tp_fixpoint(&mut self) -> SymbolicInterpretation {
        let mut a = vec![FormulaRef::FALSE; self.num_defined()];
        loop {
            let next = self.sym_tp(&a);
            let next = self.canonical_all(&next);
            if next == a {
                return a;
            }
            a = next;
        }
    }
}

fn dependency_components(program: &GroundProgram) -> Vec<Vec<usize>> {
    let a = program.alphabet();
    let n = a.defined().len();
    let edges: Vec<Vec<usize>> = (0..n)
        .map(|pos| {
            let mut out: Vec<usize> = program
                .rules_for(pos)
                .flat_map(|r| r.body.iter().filter_map(|l| a.defined_position(l.atom)))
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    // Tarjan; components come out after everything they depend on
    struct Tarjan<'a> {
        edges: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for k in 0..self.edges[v].len() {
                let w = self.edges[v][k];
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                self.out.push(comp);
            }
        }
    }
    let mut t = Tarjan {
        edges: &edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    t.out
}

pub(crate) fn sym_eval(
    store: &mut FormulaStore,
    program: &GroundProgram,
    phi: &Formula,
    s: &SymbolicState,
) -> (FormulaRef, FormulaRef) {
    match phi {
        Formula::True => (FormulaRef::TRUE, FormulaRef::TRUE),
        Formula::False => (FormulaRef::FALSE, FormulaRef::FALSE),
        Formula::Atom(a) => match program.alphabet().defined_position(*a) {
            Some(pos) => (s.lower[pos], s.upper[pos]),
            None => {
                let v = store.mk_var(*a).expect("parameter of this program");
                (v, v)
            }
        },
        Formula::Not(f) => {
            let (t, p) = sym_eval(store, program, f, s);
            (store.mk_not(p), store.mk_not(t))
        }
        Formula::And(fs) | Formula::Or(fs) => {
            let (ts, ps): (Vec<_>, Vec<_>) = fs.iter().map(|f| sym_eval(store, program, f, s)).unzip();
            if matches!(phi, Formula::And(_)) {
                (store.mk_and(ts), store.mk_and(ps))
            } else {
                (store.mk_or(ts), store.mk_or(ps))
            }
        }
    }
}

pub(crate) fn concretise(
    store: &FormulaStore,
    program: &GroundProgram,
    s: &SymbolicState,
    params: &Interpretation,
) -> PartialInterpretation {
    let plan = EvalPlan::new(store, &s.roots());
    concretise_with(&plan, program, s.len(), params)
}

/// Concretisation with a precomputed plan over `state.roots()`.
pub(crate) fn concretise_with(
    plan: &EvalPlan,
    program: &GroundProgram,
    n: usize,
    params: &Interpretation,
) -> PartialInterpretation {
    let a = program.alphabet();
    let values = plan.eval(&|atom| params.contains(atom));
    let mut out = PartialInterpretation {
        lower: Interpretation::empty(a),
        upper: Interpretation::empty(a),
    };
    for (i, &d) in a.defined().iter().enumerate().take(n) {
        out.lower.set(d, values[i]);
        out.upper.set(d, values[n + i]);
    }
    out
}
