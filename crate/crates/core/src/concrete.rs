//! Two- and three-valued semantics of ground programs for one fixed
//! assignment of the parameters. This is the reference the symbolic
//! compiler is checked against.

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::program::{Alphabet, AtomId, GroundProgram, GroundRule};
use crate::syntax::Truth;

/// A set of true atoms, indexed by atom id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interpretation(FixedBitSet);

impl Interpretation {
    pub fn empty(alphabet: &Alphabet) -> Self {
        Interpretation(FixedBitSet::with_capacity(alphabet.len()))
    }

    pub fn from_atoms(alphabet: &Alphabet, atoms: impl IntoIterator<Item = AtomId>) -> Self {
        let mut i = Self::empty(alphabet);
        for a in atoms {
            i.set(a, true);
        }
        i
    }

    /// All defined atoms true.
    pub fn all_defined(alphabet: &Alphabet) -> Self {
        Self::from_atoms(alphabet, alphabet.defined().iter().copied())
    }

    /// The parameter assignment numbered `index`: parameter `k` (in
    /// alphabet order) is true iff bit `k` of `index` is set.
    pub fn parameters_from_index(alphabet: &Alphabet, index: u64) -> Self {
        let mut i = Self::empty(alphabet);
        for (k, &p) in alphabet.parameters().iter().enumerate() {
            if k < 64 && index >> k & 1 == 1 {
                i.set(p, true);
            }
        }
        i
    }

    pub fn random_parameters(alphabet: &Alphabet, rng: &mut impl Rng) -> Self {
        let mut i = Self::empty(alphabet);
        for &p in alphabet.parameters() {
            i.set(p, rng.random());
        }
        i
    }

    pub fn contains(&self, a: AtomId) -> bool {
        self.0.contains(a.index())
    }

    pub fn set(&mut self, a: AtomId, value: bool) {
        self.0.set(a.index(), value)
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.ones().map(|i| AtomId(i as u32))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.0.clone();
        s.union_with(&other.0);
        Interpretation(s)
    }

    pub fn names(&self, alphabet: &Alphabet) -> Vec<String> {
        self.atoms().map(|a| alphabet.name(a).to_string()).collect()
    }
}

/// `(lower, upper)` over the defined atoms: an atom is true if in `lower`,
/// false if not in `upper`, unknown otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialInterpretation {
    pub lower: Interpretation,
    pub upper: Interpretation,
}

impl PartialInterpretation {
    /// The least precise pair `(∅, Σd)`.
    pub fn bottom(alphabet: &Alphabet) -> Self {
        PartialInterpretation {
            lower: Interpretation::empty(alphabet),
            upper: Interpretation::all_defined(alphabet),
        }
    }

    pub fn exact(i: Interpretation) -> Self {
        PartialInterpretation {
            lower: i.clone(),
            upper: i,
        }
    }

    pub fn value(&self, a: AtomId) -> Truth {
        Truth::from_bounds(self.lower.contains(a), self.upper.contains(a))
    }

    pub fn is_consistent(&self) -> bool {
        self.lower.is_subset(&self.upper)
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// Precision order: `self` is at most as precise as `other`.
    pub fn leq_p(&self, other: &Self) -> bool {
        self.lower.is_subset(&other.lower) && other.upper.is_subset(&self.upper)
    }

    /// Defined atoms whose value is unknown.
    pub fn unknown(&self, alphabet: &Alphabet) -> Vec<AtomId> {
        alphabet
            .defined()
            .iter()
            .copied()
            .filter(|&d| self.value(d) == Truth::Unknown)
            .collect()
    }
}

/// Bounds of a rule body, evaluated componentwise so that pairs with
/// `lower ⊄ upper` (which occur inside unfoundedness steps) are handled.
fn body_bounds(
    rule: &GroundRule,
    alphabet: &Alphabet,
    params: &Interpretation,
    s: &PartialInterpretation,
) -> (bool, bool) {
    let (mut lo, mut hi) = (true, true);
    for l in &rule.body {
        let (a_lo, a_hi) = if alphabet.is_defined(l.atom) {
            (s.lower.contains(l.atom), s.upper.contains(l.atom))
        } else {
            let v = params.contains(l.atom);
            (v, v)
        };
        let (l_lo, l_hi) = if l.positive { (a_lo, a_hi) } else { (!a_hi, !a_lo) };
        lo &= l_lo;
        hi &= l_hi;
    }
    (lo, hi)
}

/// One application of the immediate consequence operator with the
/// parameters fixed to `params`; `j` supplies the defined atoms.
pub fn tp_step(p: &GroundProgram, params: &Interpretation, j: &Interpretation) -> Interpretation {
    let s = PartialInterpretation::exact(j.clone());
    fitting_step(p, params, &s).lower
}

/// One application of Fitting's three-valued operator.
pub fn fitting_step(p: &GroundProgram, params: &Interpretation, s: &PartialInterpretation) -> PartialInterpretation {
    let a = p.alphabet();
    let mut out = PartialInterpretation {
        lower: Interpretation::empty(a),
        upper: Interpretation::empty(a),
    };
    for (pos, &d) in a.defined().iter().enumerate() {
        let (lo, hi) = p
            .rules_for(pos)
            .map(|r| body_bounds(r, a, params, s))
            .fold((false, false), |(l, h), (bl, bh)| (l || bl, h || bh));
        out.lower.set(d, lo);
        out.upper.set(d, hi);
    }
    out
}

/// The ≤p-least fixpoint of [`fitting_step`], iterated from the bottom pair.
pub fn kripke_kleene(p: &GroundProgram, params: &Interpretation) -> PartialInterpretation {
    let mut s = PartialInterpretation::bottom(p.alphabet());
    loop {
        let next = fitting_step(p, params, &s);
        if next == s {
            return s;
        }
        s = next;
    }
}

/// Largest unfoundedness refinement of `s`: the least fixpoint of
/// `y ↦ fitting_step(lower, y).upper`, iterated from the empty set.
pub fn unfoundedness_step(
    p: &GroundProgram,
    params: &Interpretation,
    s: &PartialInterpretation,
) -> PartialInterpretation {
    let a = p.alphabet();
    let mut y = Interpretation::empty(a);
    loop {
        let probe = PartialInterpretation {
            lower: s.lower.clone(),
            upper: y.clone(),
        };
        let next = fitting_step(p, params, &probe).upper;
        if next == y {
            return PartialInterpretation {
                lower: s.lower.clone(),
                upper: y,
            };
        }
        y = next;
    }
}

/// Result of a well-founded induction together with its refinement counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellFoundedRun {
    pub model: PartialInterpretation,
    pub applications: usize,
    pub unfoundedness: usize,
}

/// The well-founded model: maximal application refinements until
/// stationary, then one maximal unfoundedness refinement, repeated until
/// neither is strict.
pub fn well_founded(p: &GroundProgram, params: &Interpretation) -> PartialInterpretation {
    well_founded_run(p, params).model
}

pub fn well_founded_run(p: &GroundProgram, params: &Interpretation) -> WellFoundedRun {
    let mut s = PartialInterpretation::bottom(p.alphabet());
    let mut applications = 0;
    let mut unfoundedness = 0;
    loop {
        loop {
            let next = fitting_step(p, params, &s);
            if next == s {
                break;
            }
            s = next;
            applications += 1;
        }
        let next = unfoundedness_step(p, params, &s);
        if next == s {
            return WellFoundedRun {
                model: s,
                applications,
                unfoundedness,
            };
        }
        s = next;
        unfoundedness += 1;
    }
}

/// A well-founded induction with a random legal schedule: at every step it
/// picks a strict refinement among full application, application to a
/// random subset of the changing atoms, and maximal unfoundedness.
pub fn well_founded_random(p: &GroundProgram, params: &Interpretation, rng: &mut impl Rng) -> PartialInterpretation {
    let a = p.alphabet();
    let mut s = PartialInterpretation::bottom(a);
    loop {
        let app = fitting_step(p, params, &s);
        let app_strict = app != s && s.leq_p(&app);
        // an unfoundedness refinement needs its result below the current
        // upper bound
        let unf = unfoundedness_step(p, params, &s);
        let unf_strict = unf != s && unf.upper.is_subset(&s.upper);
        match (app_strict, unf_strict) {
            (false, false) => return s,
            (true, true) if rng.random_bool(0.3) => s = unf,
            (false, true) => s = unf,
            _ => {
                if rng.random_bool(0.5) {
                    s = app;
                } else {
                    let changed: Vec<AtomId> = a
                        .defined()
                        .iter()
                        .copied()
                        .filter(|&d| app.value(d) != s.value(d))
                        .collect();
                    let keep = changed[rng.random_range(0..changed.len())];
                    for d in changed {
                        if d == keep || rng.random_bool(0.5) {
                            s.lower.set(d, app.lower.contains(d));
                            s.upper.set(d, app.upper.contains(d));
                        }
                    }
                }
            }
        }
    }
}

/// All Σ-interpretations `J` with `J ⊨wf P`: one per parameter assignment
/// whose well-founded model is exact. `None` when there are more than
/// `2^max_params` parameter assignments.
pub fn models_wf(p: &GroundProgram, max_params: usize) -> Option<Vec<Interpretation>> {
    let a = p.alphabet();
    let n = a.parameters().len();
    if n > max_params || n >= 64 {
        return None;
    }
    Some(
        (0..1u64 << n)
            .filter_map(|k| {
                let params = Interpretation::parameters_from_index(a, k);
                let wf = well_founded(p, &params);
                wf.is_exact().then(|| params.union(&wf.lower))
            })
            .collect(),
    )
}
