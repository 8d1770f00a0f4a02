//! Validation of a compiled state against the concrete well-founded model,
//! parameter assignment by parameter assignment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concrete::{well_founded, Interpretation};
use crate::formula::{EvalPlan, FormulaStore};
use crate::program::GroundProgram;
use crate::symbolic::{concretise_with, SymbolicState};
use crate::syntax::Truth;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    /// Check every assignment when there are at most this many.
    pub threshold: u64,
    /// Number of random assignments checked otherwise.
    pub samples: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            threshold: 1 << 20,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub parameters: Vec<String>,
    pub atom: String,
    pub expected: Truth,
    pub got: Truth,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub parameters: usize,
    pub exhaustive: bool,
    pub checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<Mismatch>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Compares `state` with the well-founded model for every parameter
/// assignment (or a seeded sample of them). Reports the first mismatch in
/// enumeration order.
pub fn validate(
    program: &GroundProgram,
    store: &FormulaStore,
    state: &SymbolicState,
    opts: &OracleOptions,
) -> OracleReport {
    let a = program.alphabet();
    let np = a.parameters().len();
    let plan = EvalPlan::new(store, &state.roots());
    let total = if np < 64 { Some(1u64 << np) } else { None };
    let exhaustive = total.is_some_and(|t| t <= opts.threshold);
    let assignments: Vec<Interpretation> = if exhaustive {
        Vec::new()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.samples)
            .map(|_| Interpretation::random_parameters(a, &mut rng))
            .collect()
    };
    let check = |params: &Interpretation| -> Option<Mismatch> {
        let got = concretise_with(&plan, program, state.len(), params);
        let expected = well_founded(program, params);
        a.defined().iter().find_map(|&d| {
            let (e, g) = (expected.value(d), got.value(d));
            (e != g).then(|| Mismatch {
                parameters: params.names(a),
                atom: a.name(d).to_string(),
                expected: e,
                got: g,
            })
        })
    };
    let checked = if exhaustive {
        total.unwrap()
    } else {
        assignments.len() as u64
    };
    let mismatch = if exhaustive {
        let n = total.unwrap();
        first_mismatch(n, |k| check(&Interpretation::parameters_from_index(a, k)))
    } else {
        first_mismatch(assignments.len() as u64, |k| check(&assignments[k as usize]))
    };
    OracleReport {
        parameters: np,
        exhaustive,
        checked,
        mismatch,
    }
}

#[cfg(feature = "parallel")]
fn first_mismatch(n: u64, f: impl Fn(u64) -> Option<Mismatch> + Sync + Send) -> Option<Mismatch> {
    use rayon::prelude::*;
    (0..n).into_par_iter().find_map_first(f)
}

#[cfg(not(feature = "parallel"))]
fn first_mismatch(n: u64, f: impl Fn(u64) -> Option<Mismatch>) -> Option<Mismatch> {
    (0..n).find_map(f)
}
