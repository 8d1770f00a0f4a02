//! Literal weights for weighted model counting.
//!
//! File format: one `atom w_true w_false` entry per line, `#` starts a
//! comment. Weights are parsed from their decimal text both as `f64` and as
//! exact rationals, so `0.1` in exact mode really is one tenth.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::program::{Alphabet, AtomId, AtomKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown atom `{atom}`")]
    UnknownAtom { line: usize, atom: String },
    #[error("line {line}: `{atom}` is a defined atom; only parameters carry weights")]
    DefinedAtom { line: usize, atom: String },
    #[error("line {line}: `{atom}` has more than one weight entry")]
    Duplicate { line: usize, atom: String },
    #[error("no weights for parameter(s) {}", .0.join(", "))]
    Missing(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiteralWeights {
    pub w_true: f64,
    pub w_false: f64,
    pub exact_true: BigRational,
    pub exact_false: BigRational,
}

impl LiteralWeights {
    pub fn neutral() -> Self {
        LiteralWeights {
            w_true: 1.0,
            w_false: 1.0,
            exact_true: One::one(),
            exact_false: One::one(),
        }
    }

    /// Weights from decimal strings such as `0.25` or `3`.
    pub fn parse(w_true: &str, w_false: &str) -> Option<Self> {
        let (t, tf) = parse_decimal(w_true)?;
        let (f, ff) = parse_decimal(w_false)?;
        Some(LiteralWeights {
            w_true: tf,
            w_false: ff,
            exact_true: t,
            exact_false: f,
        })
    }

    /// Weights given as floats; the exact form is the float's binary value.
    pub fn from_f64(w_true: f64, w_false: f64) -> Option<Self> {
        if !(w_true.is_finite() && w_false.is_finite() && w_true >= 0.0 && w_false >= 0.0) {
            return None;
        }
        Some(LiteralWeights {
            w_true,
            w_false,
            exact_true: BigRational::from_float(w_true)?,
            exact_false: BigRational::from_float(w_false)?,
        })
    }
}

fn parse_decimal(text: &str) -> Option<(BigRational, f64)> {
    let f: f64 = text.parse().ok()?;
    if !f.is_finite() || f < 0.0 {
        return None;
    }
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    let digits = digits.trim_start_matches('+');
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some((value, f))
}

/// Weights of parameter atoms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightFunction {
    weights: HashMap<AtomId, LiteralWeights>,
}

impl WeightFunction {
    pub fn new() -> Self {
        Self::default()
    }

    /// All parameters weighted `(1, 1)`, so weighted counts are plain counts.
    pub fn uniform(alphabet: &Alphabet) -> Self {
        let mut w = Self::new();
        for &p in alphabet.parameters() {
            w.set(p, LiteralWeights::neutral());
        }
        w
    }

    pub fn set(&mut self, atom: AtomId, weights: LiteralWeights) {
        self.weights.insert(atom, weights);
    }

    pub fn get(&self, atom: AtomId) -> Option<&LiteralWeights> {
        self.weights.get(&atom)
    }

    /// Parses a weight file. Parameters without an entry are an error unless
    /// `default_missing` is set, in which case they get `(1, 1)` and their
    /// names are returned as warnings.
    pub fn parse(text: &str, alphabet: &Alphabet, default_missing: bool) -> Result<(Self, Vec<String>), WeightError> {
        let mut w = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [atom, wt, wf] = fields[..] else {
                return Err(WeightError::Syntax {
                    line,
                    message: "expected `atom w_true w_false`".into(),
                });
            };
            let id = alphabet.lookup(atom).ok_or_else(|| WeightError::UnknownAtom {
                line,
                atom: atom.to_string(),
            })?;
            if alphabet.kind(id) == AtomKind::Defined {
                return Err(WeightError::DefinedAtom {
                    line,
                    atom: atom.to_string(),
                });
            }
            let lw = LiteralWeights::parse(wt, wf).ok_or_else(|| WeightError::Syntax {
                line,
                message: "weights must be finite non-negative numbers".into(),
            })?;
            if w.weights.insert(id, lw).is_some() {
                return Err(WeightError::Duplicate {
                    line,
                    atom: atom.to_string(),
                });
            }
        }
        let missing: Vec<String> = alphabet
            .parameters()
            .iter()
            .filter(|p| !w.weights.contains_key(p))
            .map(|&p| alphabet.name(p).to_string())
            .collect();
        if !missing.is_empty() {
            if !default_missing {
                return Err(WeightError::Missing(missing));
            }
            for &p in alphabet.parameters() {
                w.weights.entry(p).or_insert_with(LiteralWeights::neutral);
            }
        }
        Ok((w, missing))
    }
}
