//! The compile driver: a deterministic well-founded induction over symbolic
//! states, application refinements first.

use serde::{Deserialize, Serialize};

use super::{Backend, Session, SymbolicState, UnfoundedScope};
use crate::formula::FormulaStats;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompileOptions {
    pub backend: Backend,
    /// Maximum number of refinements; the trace is marked partial when the
    /// budget runs out before the induction terminates.
    pub budget: Option<usize>,
    /// Rebuild the final formulas from their BDDs.
    pub canonicalize: bool,
    pub unfounded: UnfoundedScope,
}

impl CompileOptions {
    pub fn bdd() -> Self {
        CompileOptions {
            backend: Backend::Bdd,
            ..Self::default()
        }
    }

    pub fn circuit() -> Self {
        Self::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Initial,
    Application,
    Unfoundedness,
    /// Final canonicalisation pass; semantically a no-op.
    Canonicalize,
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub kind: StepKind,
    pub state: SymbolicState,
    /// Store size right after this step; nodes below it and above the
    /// previous step's mark were created by this step.
    pub watermark: usize,
    /// Whether the step changed the state semantically. Only known with the
    /// BDD backend, where every recorded step is strict.
    pub strict: Option<bool>,
    /// Iterations of the inner least-fixpoint loop (unfoundedness steps).
    pub inner_rounds: usize,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub backend: Backend,
    pub steps: Vec<TraceStep>,
    /// The budget ran out before the induction terminated.
    pub partial: bool,
}

impl Trace {
    pub fn final_state(&self) -> &SymbolicState {
        &self.steps.last().expect("a trace starts with its initial state").state
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.steps.iter().filter(|s| s.kind == kind).count()
    }

    /// Reachable circuit size of a step's lower and upper bounds.
    pub fn step_stats(&self, session: &Session, i: usize) -> (FormulaStats, FormulaStats) {
        let s = &self.steps[i].state;
        (
            session.store().stats_many(&s.lower),
            session.store().stats_many(&s.upper),
        )
    }
}

impl Session {
    /// Runs the induction from `(⊥, ⊤)`. Application refinements are applied
    /// until the state stops changing, then one unfoundedness refinement;
    /// this repeats until an unfoundedness refinement changes nothing or the
    /// state is exact.
    ///
    /// With [`Backend::Circuit`] a state "stops changing" when the circuit
    /// handles repeat, and each phase is additionally cut off by the
    /// counting bounds: `|Σd|` applications per phase and `|Σd|`
    /// unfoundedness refinements overall. No equivalence check is made.
    pub fn compile(&mut self, opts: &CompileOptions) -> Trace {
        let nd = self.num_defined();
        let bdd = opts.backend == Backend::Bdd;
        let strict = if bdd { Some(true) } else { None };
        let mut trace = Trace {
            backend: opts.backend,
            steps: vec![TraceStep {
                kind: StepKind::Initial,
                state: self.bottom(),
                watermark: self.store().len(),
                strict,
                inner_rounds: 0,
            }],
            partial: false,
        };
        let mut cur = self.bottom();
        let mut used = 0usize;
        let mut unf_rounds = 0usize;
        let out_of_budget = |used: usize| opts.budget.is_some_and(|b| used >= b);
        'outer: loop {
            let mut apps = 0;
            loop {
                if is_exact_by_handle(&cur) {
                    break 'outer;
                }
                if !bdd && apps == nd {
                    break;
                }
                if out_of_budget(used) {
                    trace.partial = true;
                    break 'outer;
                }
                let mut next = self.sym_psi(&cur);
                if bdd {
                    next = self.canonical_state(&next);
                }
                if next == cur {
                    break;
                }
                used += 1;
                apps += 1;
                cur = next;
                trace.steps.push(TraceStep {
                    kind: StepKind::Application,
                    state: cur.clone(),
                    watermark: self.store().len(),
                    strict,
                    inner_rounds: 0,
                });
            }
            if is_exact_by_handle(&cur) || (!bdd && unf_rounds == nd) {
                break;
            }
            if out_of_budget(used) {
                trace.partial = true;
                break;
            }
            let (next, rounds) = self.next_unfoundedness(&cur, opts);
            if next == cur {
                break;
            }
            used += 1;
            unf_rounds += 1;
            cur = next;
            trace.steps.push(TraceStep {
                kind: StepKind::Unfoundedness,
                state: cur.clone(),
                watermark: self.store().len(),
                strict,
                inner_rounds: rounds,
            });
        }
        if opts.canonicalize && !bdd {
            let canon = self.canonical_state(&cur);
            if canon != cur {
                trace.steps.push(TraceStep {
                    kind: StepKind::Canonicalize,
                    state: canon,
                    watermark: self.store().len(),
                    strict: Some(false),
                    inner_rounds: 0,
                });
            }
        }
        trace
    }
}

impl Session {
    fn next_unfoundedness(&mut self, cur: &SymbolicState, opts: &CompileOptions) -> (SymbolicState, usize) {
        if opts.unfounded == UnfoundedScope::Stratified && opts.backend == Backend::Bdd {
            let components = self.components().to_vec();
            for comp in &components {
                if comp.iter().all(|&i| cur.lower[i] == cur.upper[i]) {
                    continue;
                }
                let (next, rounds) = self.unfoundedness_refine_scoped(cur, comp, opts.backend);
                if next != *cur {
                    return (next, rounds);
                }
            }
        }
        self.unfoundedness_refine(cur, opts.backend)
    }
}

fn is_exact_by_handle(s: &SymbolicState) -> bool {
    s.lower == s.upper
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::formula::FormulaRef;
    use crate::program::Program;
    use crate::syntax::Formula;

    fn session(text: &str) -> Session {
        Session::new(Program::parse(text).unwrap().ground().unwrap())
    }

    fn f(s: &mut Session, text: &str) -> FormulaRef {
        let phi = Formula::parse(text, s.program().alphabet()).unwrap();
        let b = s.bottom();
        s.sym_eval(&phi, &b).0
    }

    fn pos(s: &Session, atom: &str) -> usize {
        let a = s.program().alphabet();
        a.defined_position(a.lookup(atom).unwrap()).unwrap()
    }

    #[test]
    fn gear_wheels_maximal_trace() {
        for backend in [Backend::Circuit, Backend::Bdd] {
            let mut s = session(bundled::GEAR_WHEELS);
            let trace = s.compile(&CompileOptions {
                backend,
                ..Default::default()
            });
            let kinds: Vec<StepKind> = trace.steps.iter().map(|t| t.kind).collect();
            assert_eq!(
                kinds,
                [
                    StepKind::Initial,
                    StepKind::Unfoundedness,
                    StepKind::Application,
                    StepKind::Application,
                ],
                "{backend:?}"
            );
            let t1 = pos(&s, "turns1(1)");
            let both = f(&mut s, "button1(0) | button2(0)");
            assert!(s.equivalent(trace.steps[1].state.upper[t1], both));
            assert!(s.is_exact(trace.final_state()));
            assert!(s.equivalent(trace.final_state().lower[t1], both));
            assert!(!trace.partial);
        }
    }

    #[test]
    fn gear_wheels_stratified_trace() {
        let mut s = session(bundled::GEAR_WHEELS);
        let trace = s.compile(&CompileOptions {
            backend: Backend::Bdd,
            unfounded: UnfoundedScope::Stratified,
            ..Default::default()
        });
        let kinds: Vec<StepKind> = trace.steps.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [
                StepKind::Initial,
                StepKind::Unfoundedness,
                StepKind::Application,
                StepKind::Application,
                StepKind::Unfoundedness
            ]
        );
        let t1 = pos(&s, "turns1(1)");
        let b1 = f(&mut s, "button1(0)");
        let both = f(&mut s, "button1(0) | button2(0)");
        let st = &trace.steps;
        assert!(s.equivalent(st[1].state.lower[t1], FormulaRef::FALSE));
        assert!(s.equivalent(st[1].state.upper[t1], FormulaRef::TRUE));
        assert!(s.equivalent(st[2].state.lower[t1], b1));
        assert!(s.equivalent(st[3].state.lower[t1], both));
        assert!(s.equivalent(st[3].state.upper[t1], FormulaRef::TRUE));
        assert!(s.equivalent(st[4].state.upper[t1], both));
        assert!(s.is_exact(trace.final_state()));
    }

    #[test]
    fn budget_marks_partial() {
        let mut s = session(bundled::SMOKERS);
        let trace = s.compile(&CompileOptions {
            budget: Some(1),
            ..Default::default()
        });
        assert!(trace.partial);
        assert_eq!(trace.steps.len(), 2);
    }

    #[test]
    fn empty_program() {
        let mut s = session("");
        let trace = s.compile(&CompileOptions::default());
        assert_eq!(trace.steps.len(), 1);
        assert!(s.is_exact(trace.final_state()));
    }

    #[test]
    fn canonicalize_pass_keeps_semantics() {
        let mut s = session(bundled::DEF);
        let trace = s.compile(&CompileOptions {
            canonicalize: true,
            ..Default::default()
        });
        let d = pos(&s, "d");
        assert_eq!(trace.final_state().lower[d], FormulaRef::FALSE);
    }
}
