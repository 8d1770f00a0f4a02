//! Knowledge compilation of parametrised logic programs under the
//! well-founded semantics.
//!
//! A program's alphabet is split into parameters and defined atoms. The
//! compiler runs a well-founded induction *symbolically*: every defined atom
//! carries a pair of Boolean circuits over the parameters (a lower and an
//! upper bound), refined by three-valued application and unfoundedness steps
//! until nothing changes. When both bounds coincide the result is a
//! propositional theory equivalent to the program, which can be turned into
//! a BDD or CNF and queried.
//!
//! ```
//! use wfc_core::{bundled, CompileOptions, Program, Session};
//!
//! let program = Program::parse(bundled::SMOKERS)?.ground()?;
//! let mut session = Session::new(program);
//! let trace = session.compile(&CompileOptions::default());
//! assert!(session.is_exact(trace.final_state()));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod artifact;
pub mod bdd;
pub mod bundled;
pub mod cnf;
pub mod concrete;
pub mod formula;
pub mod inference;
pub mod oracle;
pub mod program;
pub mod symbolic;
pub mod syntax;
pub mod weights;

pub use bdd::{BddManager, BddRef};
pub use concrete::{Interpretation, PartialInterpretation};
pub use formula::{FormulaRef, FormulaStore};
pub use program::{GroundProgram, Program, ProgramError};
pub use symbolic::{Backend, CompileOptions, Session, SymbolicState, Trace, VarOrder};
pub use syntax::{Formula, Truth};
pub use weights::WeightFunction;
