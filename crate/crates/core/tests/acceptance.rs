//! Acceptance gate. Prints one line per criterion and exits non-zero if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use wfc_core::bundled;
use wfc_core::concrete::{fitting_step, kripke_kleene, well_founded, well_founded_random, well_founded_run};
use wfc_core::formula::FormulaRef;
use wfc_core::inference::{check_equivalence, Model};
use wfc_core::oracle::{validate, OracleOptions};
use wfc_core::program::Program;
use wfc_core::symbolic::{random_compile, StepKind, UnfoundedScope};
use wfc_core::weights::LiteralWeights;
use wfc_core::{
    Backend, CompileOptions, Formula, GroundProgram, Interpretation, Session, SymbolicState, Truth, WeightFunction,
};

const CASES: usize = 1000;
const FLOAT_TOL: f64 = 1e-9;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 reference values", Duration::from_secs(1), reference_values),
        ("2 oracle equivalence", Duration::from_secs(30), oracle_equivalence),
        ("3 program equivalence", Duration::from_secs(30), program_equivalence),
        ("4 polynomial growth", Duration::from_secs(60), polynomial_growth),
        ("5 anytime bounds", Duration::from_secs(60), anytime_bounds),
        ("6 property suites", Duration::from_secs(120), property_suites),
        ("7 exactness bridge", Duration::from_secs(30), exactness_bridge),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let result = result.and_then(|detail| {
            if took <= limit {
                Ok(detail)
            } else {
                Err(format!("took {took:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(detail) => println!("criterion {name}: PASS ({took:.2?}; {detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({took:.2?}; {why})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn reference_values() -> Check {
    // smokers: the five-disjunct formula for smokes(a)
    for backend in [Backend::Circuit, Backend::Bdd] {
        let mut s = session(bundled::SMOKERS);
        let t = s.compile(&CompileOptions {
            backend,
            ..Default::default()
        });
        let expected = circuit(
            &mut s,
            "stress(a) | (stress(b) & fr(a,b)) | (stress(c) & fr(a,c)) \
             | (stress(c) & fr(b,c) & fr(a,b)) | (stress(b) & fr(c,b) & fr(a,c))",
        );
        let k = position(&s, "smokes(a)");
        let fin = t.final_state().clone();
        ensure(s.is_exact(&fin), || "smokers not exact".into())?;
        ensure(s.equivalent(fin.lower[k], expected), || {
            format!("smokes(a) differs ({backend:?})")
        })?;
    }

    // gear wheels: S0 -> S1 -> S2 -> S3 -> A_w
    let mut s = session(bundled::GEAR_WHEELS);
    let t = s.compile(&CompileOptions {
        backend: Backend::Bdd,
        unfounded: UnfoundedScope::Stratified,
        ..Default::default()
    });
    let b1 = circuit(&mut s, "button1(0)");
    let b2 = circuit(&mut s, "button2(0)");
    let both = circuit(&mut s, "button1(0) | button2(0)");
    let (f, tt) = (FormulaRef::FALSE, FormulaRef::TRUE);
    // (turns1(0), turns2(0), turns1(1), turns2(1)) as (lower, upper)
    let expected: [[(FormulaRef, FormulaRef); 4]; 5] = [
        [(f, tt), (f, tt), (f, tt), (f, tt)],
        [(f, f), (f, f), (f, tt), (f, tt)],
        [(f, f), (f, f), (b1, tt), (b2, tt)],
        [(f, f), (f, f), (both, tt), (both, tt)],
        [(f, f), (f, f), (both, both), (both, both)],
    ];
    ensure(t.steps.len() == 5, || {
        format!("gear wheels: {} states instead of 5", t.steps.len())
    })?;
    let names = ["turns1(0)", "turns2(0)", "turns1(1)", "turns2(1)"];
    for (i, row) in expected.iter().enumerate() {
        let st = t.steps[i].state.clone();
        for (name, &(lo, hi)) in names.iter().zip(row) {
            let k = position(&s, name);
            ensure(s.equivalent(st.lower[k], lo) && s.equivalent(st.upper[k], hi), || {
                format!("gear wheels S{i}({name}) differs")
            })?;
        }
    }

    // P_NT: a, b unknown; c in (e, t); d in (f, !e)
    for backend in [Backend::Circuit, Backend::Bdd] {
        let mut s = session(bundled::NT);
        let t = s.compile(&CompileOptions {
            backend,
            ..Default::default()
        });
        let e = circuit(&mut s, "e");
        let ne = circuit(&mut s, "!e");
        let fin = t.final_state().clone();
        for (name, lo, hi) in [("a", f, tt), ("b", f, tt), ("c", e, tt), ("d", f, ne)] {
            let k = position(&s, name);
            ensure(s.equivalent(fin.lower[k], lo) && s.equivalent(fin.upper[k], hi), || {
                format!("P_NT({name}) differs ({backend:?})")
            })?;
        }
    }

    // P_def
    for backend in [Backend::Circuit, Backend::Bdd] {
        let mut s = session(bundled::DEF);
        let t = s.compile(&CompileOptions {
            backend,
            ..Default::default()
        });
        let fin = t.final_state().clone();
        ensure(s.is_exact(&fin), || "P_def not exact".into())?;
        for (name, text) in [("b", "!a"), ("c", "a | e"), ("d", "false")] {
            let k = position(&s, name);
            let want = circuit(&mut s, text);
            ensure(s.equivalent(fin.lower[k], want), || format!("P_def({name}) differs"))?;
        }
    }

    // transitive closure: r(a,b) through the immediate consequence operator
    let mut s = session(bundled::TC_LEFT);
    let k = position(&s, "r(a,b)");
    let steps = [
        circuit(&mut s, "false"),
        circuit(&mut s, "e(a,b)"),
        circuit(&mut s, "e(a,b) | (e(a,c) & e(c,b))"),
    ];
    let mut a = vec![FormulaRef::FALSE; s.num_defined()];
    for (i, &want) in steps.iter().enumerate() {
        ensure(s.equivalent(a[k], want), || {
            format!("r(a,b) differs after {i} applications")
        })?;
        a = s.sym_tp(&a);
    }
    let fixpoint = s.tp_fixpoint();
    ensure(s.equivalent(fixpoint[k], steps[2]), || "r(a,b) fixpoint differs".into())?;
    Ok("smokers, gear wheels S0..A_w, P_NT, P_def, r(a,b) match".into())
}

fn ground_with(text: &str, size: Option<usize>) -> GroundProgram {
    let p = Program::parse(text).unwrap();
    match size {
        Some(n) => p.ground_with(&bundled::domain(n)).unwrap(),
        None => p.ground().unwrap(),
    }
}

fn oracle_equivalence() -> Check {
    let cases: [(&str, &str, Option<usize>, u64); 9] = [
        ("smokers", bundled::SMOKERS, None, 4096),
        ("gear wheels", bundled::GEAR_WHEELS, None, 4),
        ("gear wheels 2", bundled::GEAR_WHEELS_2, None, 16),
        ("tc left n=3", bundled::TC_LEFT, Some(3), 1 << 9),
        ("tc left n=4", bundled::TC_LEFT, Some(4), 1 << 16),
        ("tc double n=3", bundled::TC_DOUBLE, Some(3), 1 << 9),
        ("tc double n=4", bundled::TC_DOUBLE, Some(4), 1 << 16),
        ("P_NT", bundled::NT, None, 2),
        ("P_def", bundled::DEF, None, 4),
    ];
    let mut total = 0;
    for (name, text, size, count) in cases {
        for backend in [Backend::Circuit, Backend::Bdd] {
            let mut s = Session::new(ground_with(text, size));
            let t = s.compile(&CompileOptions {
                backend,
                ..Default::default()
            });
            let r = validate(s.program(), s.store(), t.final_state(), &OracleOptions::default());
            ensure(r.exhaustive && r.checked == count, || {
                format!("{name}: checked {} assignments, expected {count}", r.checked)
            })?;
            if let Some(m) = r.mismatch {
                return Err(format!("{name} ({backend:?}): mismatch {m:?}"));
            }
            total += r.checked;
        }
    }
    Ok(format!("{total} assignments agree"))
}

fn program_equivalence() -> Check {
    for n in 3..=5 {
        let left = ground_with(bundled::TC_LEFT, Some(n));
        let double = ground_with(bundled::TC_DOUBLE, Some(n));
        let eq =
            check_equivalence(left.clone(), double.clone(), &CompileOptions::circuit()).map_err(|e| e.to_string())?;
        ensure(eq.equivalent, || format!("n={n}: reported different"))?;

        // drop the base rule for r(n0,n1)
        let a = double.alphabet();
        let idx = double
            .rules()
            .iter()
            .position(|r| a.name(r.head) == "r(n0,n1)" && r.body.len() == 1)
            .ok_or("base rule not found")?;
        let mutated = double.without_rule(idx);
        let eq =
            check_equivalence(left.clone(), mutated.clone(), &CompileOptions::circuit()).map_err(|e| e.to_string())?;
        let w = eq.witness.ok_or_else(|| format!("n={n}: mutant reported equivalent"))?;
        // verify the witness concretely
        let params = Interpretation::from_atoms(a, w.parameters.iter().map(|p| a.lookup(p).unwrap()));
        let atom = a.lookup(&w.atom).unwrap();
        let l = well_founded(&left, &params).value(atom);
        let r = well_founded(&mutated, &params).value(atom);
        ensure(l != r && l == truth(w.left) && r == truth(w.right), || {
            format!("n={n}: witness {w:?} does not separate the programs")
        })?;
    }
    Ok("equivalent for n=3..5, mutants separated by verified witnesses".into())
}

fn truth(b: bool) -> Truth {
    if b {
        Truth::True
    } else {
        Truth::False
    }
}

fn polynomial_growth() -> Check {
    let mut sizes = Vec::new();
    for n in 3..=8 {
        let mut s = session(&bundled::chain_tc(n));
        let t = s.compile(&CompileOptions::circuit());
        let fin = t.final_state().clone();
        ensure(fin.lower == fin.upper, || format!("n={n}: not exact by handle"))?;
        sizes.push(s.store().stats_many(&fin.lower).nodes);
    }
    for (i, w) in sizes.windows(2).enumerate() {
        let ratio = w[1] as f64 / w[0] as f64;
        ensure(ratio < 4.0, || {
            format!("n={}: ratio {ratio:.2} with sizes {sizes:?}", i + 3)
        })?;
    }
    // for reference only: all n^2 edges as parameters
    let mut complete = Vec::new();
    for n in 3..=6 {
        let mut s = Session::new(ground_with(bundled::TC_LEFT, Some(n)));
        let t = s.compile(&CompileOptions::circuit());
        complete.push(s.store().stats_many(&t.final_state().lower).nodes);
    }
    Ok(format!(
        "chain node counts n=3..8: {sizes:?}; complete-graph n=3..6, not gated: {complete:?}"
    ))
}

fn anytime_bounds() -> Check {
    let program = ground(bundled::SMOKERS);
    let a = program.alphabet().clone();
    let mut w = WeightFunction::new();
    for &p in a.parameters() {
        let lw = if a.name(p).starts_with("stress") {
            LiteralWeights::parse("0.2", "0.8")
        } else {
            LiteralWeights::parse("0.1", "0.9")
        };
        w.set(p, lw.unwrap());
    }
    let smokes_a = a.lookup("smokes(a)").unwrap();

    // exhaustive sweep with the concrete well-founded model
    let mut exact = BigRational::zero();
    for k in 0..1u64 << a.parameters().len() {
        let params = Interpretation::parameters_from_index(&a, k);
        if well_founded(&program, &params).value(smokes_a) == Truth::True {
            let mut weight = BigRational::from_integer(1.into());
            for &p in a.parameters() {
                let lw = w.get(p).unwrap();
                weight *= if params.contains(p) {
                    &lw.exact_true
                } else {
                    &lw.exact_false
                };
            }
            exact += weight;
        }
    }
    let exact_f = exact.to_f64().unwrap();

    let evidence = Formula::Atom(smokes_a);
    let mut steps = 0;
    for backend in [Backend::Circuit, Backend::Bdd] {
        let mut m = Model::compile(
            program.clone(),
            &CompileOptions {
                backend,
                ..Default::default()
            },
        );
        let rational = m.wmc_bounds_exact(Some(&evidence), &w).map_err(|e| e.to_string())?;
        let float = m.wmc_bounds(Some(&evidence), &w).map_err(|e| e.to_string())?;
        steps = rational.len();
        for (i, b) in rational.iter().enumerate() {
            ensure(b.lo <= exact && exact <= b.hi, || {
                format!("step {i}: {} <= {exact} <= {} fails", b.lo, b.hi)
            })?;
            if i > 0 {
                ensure(rational[i - 1].lo <= b.lo && b.hi <= rational[i - 1].hi, || {
                    format!("step {i}: rational bounds not monotone")
                })?;
            }
        }
        for (i, b) in float.iter().enumerate() {
            ensure(b.lo <= exact_f + FLOAT_TOL && exact_f <= b.hi + FLOAT_TOL, || {
                format!("step {i}: float bounds {b:?} miss {exact_f}")
            })?;
            if i > 0 {
                ensure(
                    float[i - 1].lo <= b.lo + FLOAT_TOL && b.hi <= float[i - 1].hi + FLOAT_TOL,
                    || format!("step {i}: float bounds not monotone"),
                )?;
            }
        }
        let last = rational.last().unwrap();
        ensure(last.lo == exact && last.hi == exact, || {
            "final bounds are not tight".into()
        })?;
    }
    Ok(format!("{steps} steps bracket WMC = {exact_f:.6}"))
}

/// Consistent states `s ≤p t` over the parameters of `sess`.
fn random_chain(sess: &mut Session, rng: &mut ChaCha8Rng) -> (SymbolicState, SymbolicState) {
    let params = sess.program().alphabet().parameters().to_vec();
    let n = sess.num_defined();
    let mut s = SymbolicState {
        lower: vec![],
        upper: vec![],
    };
    let mut t = s.clone();
    let bottom = sess.bottom();
    for _ in 0..n {
        let r: Vec<FormulaRef> = (0..5)
            .map(|_| {
                let phi = random_formula(rng, &params, 2);
                sess.sym_eval(&phi, &bottom).0
            })
            .collect();
        let st = sess.store_mut();
        let l = st.mk_and([r[0], r[1], r[2]]);
        let l2 = st.mk_and2(r[0], r[1]);
        let u2 = st.mk_or2(r[0], r[3]);
        let u = st.mk_or([r[0], r[3], r[4]]);
        s.lower.push(l);
        s.upper.push(u);
        t.lower.push(l2);
        t.upper.push(u2);
    }
    (s, t)
}

fn random_state(sess: &mut Session, rng: &mut ChaCha8Rng) -> SymbolicState {
    let params = sess.program().alphabet().parameters().to_vec();
    let bottom = sess.bottom();
    let mut s = SymbolicState {
        lower: vec![],
        upper: vec![],
    };
    for _ in 0..sess.num_defined() {
        let l = random_formula(rng, &params, 2);
        let u = random_formula(rng, &params, 2);
        s.lower.push(sess.sym_eval(&l, &bottom).0);
        s.upper.push(sess.sym_eval(&u, &bottom).0);
    }
    s
}

fn all_params(p: &GroundProgram) -> Vec<Interpretation> {
    let a = p.alphabet();
    (0..1u64 << a.parameters().len())
        .map(|k| Interpretation::parameters_from_index(a, k))
        .collect()
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut done = Vec::new();

    // operator monotonicity and consistency
    for case in 0..CASES {
        let mut sess = Session::new(random_program(&mut rng, 4, 5, true));
        let (s, t) = random_chain(&mut sess, &mut rng);
        let (ps, pt) = (sess.sym_psi(&s), sess.sym_psi(&t));
        ensure(sess.leq_p(&ps, &pt), || format!("monotonicity case {case}"))?;
        ensure(sess.is_consistent(&pt), || format!("consistency case {case}"))?;
    }
    done.push("monotonicity");

    // projection commutes with the operator
    for case in 0..CASES {
        let mut sess = Session::new(random_program(&mut rng, 4, 5, true));
        let s = random_state(&mut sess, &mut rng);
        let ps = sess.sym_psi(&s);
        for params in all_params(sess.program()) {
            let lhs = fitting_step(sess.program(), &params, &sess.concretise(&s, &params));
            ensure(lhs == sess.concretise(&ps, &params), || {
                format!("projection case {case}")
            })?;
        }
    }
    done.push("projection");

    // evaluation commutes with projection
    for case in 0..CASES {
        let mut sess = Session::new(random_program(&mut rng, 4, 5, true));
        let (s, _) = random_chain(&mut sess, &mut rng);
        let atoms: Vec<_> = sess.program().alphabet().ids().collect();
        let phi = random_formula(&mut rng, &atoms, 3);
        let (t, p) = sess.sym_eval(&phi, &s);
        for params in all_params(sess.program()) {
            let conc = sess.concretise(&s, &params);
            let a = sess.program().alphabet();
            let want = phi.eval3(&|x| {
                if a.is_defined(x) {
                    conc.value(x)
                } else {
                    truth(params.contains(x))
                }
            });
            let got = Truth::from_bounds(
                sess.store().eval(t, |x| params.contains(x)),
                sess.store().eval(p, |x| params.contains(x)),
            );
            ensure(want == got, || format!("evaluation case {case}"))?;
        }
    }
    done.push("evaluation");

    // positive programs compile to the least fixpoint of the consequence operator
    for case in 0..CASES {
        let program = random_program(&mut rng, 4, 5, false);
        for backend in [Backend::Circuit, Backend::Bdd] {
            let mut sess = Session::new(program.clone());
            let t = sess.compile(&CompileOptions {
                backend,
                ..Default::default()
            });
            let fin = t.final_state().clone();
            let lfp = sess.tp_fixpoint();
            ensure(sess.semantically_equal(&fin, &SymbolicState::exact(lfp)), || {
                format!("positive case {case} ({backend:?})")
            })?;
        }
    }
    done.push("positive shortcut");

    // schedule independence, symbolic and concrete
    for case in 0..CASES {
        let program = random_program(&mut rng, 4, 5, true);
        let mut sess = Session::new(program.clone());
        let t = sess.compile(&CompileOptions::bdd());
        let fin = t.final_state().clone();
        let (other, _) = random_compile(&mut sess, &mut rng);
        ensure(sess.semantically_equal(&fin, &other), || {
            format!("symbolic schedule case {case}")
        })?;
        for params in all_params(&program) {
            let wf = well_founded(&program, &params);
            ensure(well_founded_random(&program, &params, &mut rng) == wf, || {
                format!("concrete schedule case {case}")
            })?;
        }
    }
    done.push("schedule independence");

    // Kripke-Kleene is at most as precise as well-founded
    for case in 0..CASES {
        let program = random_program(&mut rng, 4, 5, true);
        for params in all_params(&program) {
            let kk = kripke_kleene(&program, &params);
            let wf = well_founded(&program, &params);
            ensure(kk.leq_p(&wf), || format!("KK <=p WF case {case}"))?;
        }
    }
    done.push("KK <=p WF");

    // refinement counts
    for case in 0..CASES {
        let program = random_program(&mut rng, 4, 5, true);
        let nd = program.alphabet().defined().len();
        for params in all_params(&program) {
            let run = well_founded_run(&program, &params);
            ensure(run.applications + run.unfoundedness <= nd, || {
                format!("concrete count case {case}")
            })?;
        }
        let mut sess = Session::new(program);
        let t = sess.compile(&CompileOptions::bdd());
        ensure(t.count(StepKind::Unfoundedness) <= nd, || {
            format!("unfoundedness count case {case}")
        })?;
        let mut run = 0;
        for step in &t.steps {
            match step.kind {
                StepKind::Application => run += 1,
                _ => run = 0,
            }
            ensure(run <= nd, || format!("application run case {case}"))?;
        }
    }
    done.push("refinement counts");
    Ok(format!("{CASES} cases each: {}", done.join(", ")))
}

fn exactness_bridge() -> Check {
    let mut seen = Vec::new();
    for (name, text) in bundled::ALL {
        let program = ground(text);
        let concrete = exact_for_all(&program);
        for backend in [Backend::Circuit, Backend::Bdd] {
            let mut sess = Session::new(program.clone());
            let t = sess.compile(&CompileOptions {
                backend,
                ..Default::default()
            });
            let fin = t.final_state().clone();
            ensure(sess.is_exact(&fin) == concrete, || format!("{name} ({backend:?})"))?;
        }
        seen.push(format!("{name}={concrete}"));
    }
    Ok(seen.join(" "))
}
