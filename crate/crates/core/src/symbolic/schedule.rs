//! A randomised well-founded induction, used to check that the final state
//! does not depend on the refinement schedule.

use rand::Rng;

use super::{Backend, Session, SymbolicState};

/// Runs a well-founded induction from `(⊥, ⊤)` that picks, at every step, a
/// random strict refinement: a full application, an application restricted
/// to a random subset of the atoms it changes, or the maximal unfoundedness
/// refinement (only when its result lies below the current upper bound).
/// Stops when no strict refinement exists. States are kept canonical, so
/// strictness is semantic. Returns the final state and the number of
/// refinements taken.
pub fn random_compile(session: &mut Session, rng: &mut impl Rng) -> (SymbolicState, usize) {
    let mut cur = session.bottom();
    let mut steps = 0;
    loop {
        let app = session.sym_psi(&cur);
        let app = session.canonical_state(&app);
        let app_strict = app != cur && session.leq_p(&cur, &app);
        let (unf, _) = session.unfoundedness_refine(&cur, Backend::Bdd);
        let unf_strict = unf != cur && (0..cur.len()).all(|i| session.entails(unf.upper[i], cur.upper[i]));
        let take_unf = match (app_strict, unf_strict) {
            (false, false) => return (cur, steps),
            (true, true) => rng.random_bool(0.3),
            (false, true) => true,
            (true, false) => false,
        };
        steps += 1;
        if take_unf {
            cur = unf;
            continue;
        }
        if rng.random_bool(0.5) {
            cur = app;
            continue;
        }
        let changed: Vec<usize> = (0..cur.len())
            .filter(|&i| app.lower[i] != cur.lower[i] || app.upper[i] != cur.upper[i])
            .collect();
        let keep = changed[rng.random_range(0..changed.len())];
        for i in changed {
            if i == keep || rng.random_bool(0.5) {
                if rng.random_bool(0.5) || i == keep {
                    cur.lower[i] = app.lower[i];
                    cur.upper[i] = app.upper[i];
                } else {
                    // move only one bound
                    if rng.random_bool(0.5) {
                        cur.lower[i] = app.lower[i];
                    } else {
                        cur.upper[i] = app.upper[i];
                    }
                }
            }
        }
    }
}
