use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use wfc_core::artifact::Artifact;
use wfc_core::cnf::to_cnf;
use wfc_core::inference::{check_equivalence, InferenceError, Model};
use wfc_core::oracle::{validate, OracleOptions};
use wfc_core::symbolic::export::{to_dot, trace_json};
use wfc_core::symbolic::{StepKind, UnfoundedScope};
use wfc_core::{Backend, CompileOptions, Formula, GroundProgram, Program, Session, Trace, VarOrder, WeightFunction};

const PARSE_ERROR: u8 = 2;
const NOT_EXACT: u8 = 3;
const VALIDATION_FAILED: u8 = 4;

/// Compiles logic programs under the well-founded semantics into circuits,
/// CNF or BDDs and answers queries on the result.
#[derive(Parser)]
#[command(name = "wfcompile", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a program and write its theory.
    Compile(CompileArgs),
    /// Check a compiled program against the concrete well-founded model.
    Oracle(OracleArgs),
    /// Answer a query on a compiled program.
    Query(QueryArgs),
}

#[derive(Args)]
struct ProgramArgs {
    /// Program file.
    program: PathBuf,
    /// Comma-separated constants replacing the program's `#domain`.
    #[arg(long, value_delimiter = ',')]
    domain: Option<Vec<String>>,
}

#[derive(Args, Clone)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Circuit)]
    backend: BackendArg,
    /// Maximum number of refinements.
    #[arg(long)]
    budget: Option<usize>,
    /// Rebuild the final formulas from their BDDs.
    #[arg(long)]
    canonicalize: bool,
    #[arg(long, value_enum, default_value_t = ScopeArg::Maximal)]
    unfounded: ScopeArg,
    /// BDD variable order.
    #[arg(long, value_enum, default_value_t = OrderArg::FirstMention)]
    order: OrderArg,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    program: ProgramArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Which bound to write when the result is not exact.
    #[arg(long, value_enum)]
    bound: Option<Bound>,
    /// Write the output here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write the stats block here instead of stderr.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Also save the compiled state as a JSON artifact.
    #[arg(long)]
    artifact: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    program: ProgramArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Validate this artifact instead of compiling.
    #[arg(long)]
    artifact: Option<PathBuf>,
    /// Largest number of assignments checked exhaustively.
    #[arg(long, default_value_t = 1 << 20)]
    threshold: u64,
    /// Sample size above the threshold.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct QueryArgs {
    #[command(subcommand)]
    query: Query,
}

#[derive(Args)]
struct QueryCommon {
    #[command(flatten)]
    program: ProgramArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Evidence formula, e.g. "smokes(a) & !stress(b)".
    #[arg(long)]
    evidence: Option<String>,
}

#[derive(Args)]
struct WeightArgs {
    /// Weight file with `atom w_true w_false` lines.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Give parameters without a weight entry the weights (1, 1).
    #[arg(long)]
    default_weights: bool,
}

#[derive(Subcommand)]
enum Query {
    /// Number of models satisfying the evidence.
    Count(QueryCommon),
    /// Weighted model count of the evidence.
    Wmc {
        #[command(flatten)]
        common: QueryCommon,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Lower and upper WMC of the evidence after every refinement.
    Bounds {
        #[command(flatten)]
        common: QueryCommon,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// List models satisfying the evidence.
    Enumerate {
        #[command(flatten)]
        common: QueryCommon,
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Whether two programs have the same models.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_delimiter = ',')]
        domain: Option<Vec<String>>,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum BackendArg {
    Circuit,
    Bdd,
}

#[derive(Copy, Clone, ValueEnum)]
enum ScopeArg {
    Maximal,
    Stratified,
}

#[derive(Copy, Clone, ValueEnum)]
enum OrderArg {
    FirstMention,
    Lexicographic,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Cnf,
    Json,
    Text,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Bound {
    Lower,
    Upper,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: 1,
            error: e.into(),
        }
    }
}

fn fail(code: u8, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        error: error.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(args) => compile(args),
        Command::Oracle(args) => oracle(args),
        Command::Query(args) => query(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

impl EngineArgs {
    fn options(&self) -> CompileOptions {
        CompileOptions {
            backend: match self.backend {
                BackendArg::Circuit => Backend::Circuit,
                BackendArg::Bdd => Backend::Bdd,
            },
            budget: self.budget,
            canonicalize: self.canonicalize,
            unfounded: match self.unfounded {
                ScopeArg::Maximal => UnfoundedScope::Maximal,
                ScopeArg::Stratified => UnfoundedScope::Stratified,
            },
        }
    }

    fn order(&self) -> VarOrder {
        match self.order {
            OrderArg::FirstMention => VarOrder::FirstMention,
            OrderArg::Lexicographic => VarOrder::Lexicographic,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::from)
}

fn load_program(path: &Path, domain: Option<&[String]>) -> Result<GroundProgram, Failure> {
    let text = read(path)?;
    let parsed = Program::parse(&text).map_err(|e| fail(PARSE_ERROR, anyhow!("{}: {e}", path.display())))?;
    let ground = match domain {
        Some(d) => parsed.ground_with(d),
        None => parsed.ground(),
    };
    ground.map_err(|e| fail(PARSE_ERROR, anyhow!("{}: {e}", path.display())))
}

fn parse_evidence(text: Option<&str>, program: &GroundProgram) -> Result<Option<Formula>, Failure> {
    text.map(|t| Formula::parse(t, program.alphabet()).map_err(|e| fail(PARSE_ERROR, anyhow!("evidence: {e}"))))
        .transpose()
}

fn load_weights(args: &WeightArgs, program: &GroundProgram) -> Result<WeightFunction, Failure> {
    let Some(path) = &args.weights else {
        return Ok(WeightFunction::uniform(program.alphabet()));
    };
    let text = read(path)?;
    let (w, defaulted) = WeightFunction::parse(&text, program.alphabet(), args.default_weights)
        .map_err(|e| fail(PARSE_ERROR, anyhow!("{}: {e}", path.display())))?;
    if !defaulted.is_empty() {
        eprintln!("warning: weights (1, 1) used for {}", defaulted.join(", "));
    }
    Ok(w)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct StepStats {
    kind: StepKind,
    lower_nodes: usize,
    upper_nodes: usize,
    store_nodes: usize,
}

#[derive(Serialize)]
struct Stats {
    backend: Backend,
    exact: bool,
    partial: bool,
    applications: usize,
    unfoundedness: usize,
    steps: Vec<StepStats>,
    store_nodes: usize,
    wall_ms: f64,
}

fn stats(session: &Session, trace: &Trace, exact: bool, wall_ms: f64) -> Stats {
    Stats {
        backend: trace.backend,
        exact,
        partial: trace.partial,
        applications: trace.count(StepKind::Application),
        unfoundedness: trace.count(StepKind::Unfoundedness),
        steps: (0..trace.steps.len())
            .map(|i| {
                let (lo, hi) = trace.step_stats(session, i);
                StepStats {
                    kind: trace.steps[i].kind,
                    lower_nodes: lo.nodes,
                    upper_nodes: hi.nodes,
                    store_nodes: trace.steps[i].watermark,
                }
            })
            .collect(),
        store_nodes: session.store().len(),
        wall_ms,
    }
}

fn compile(args: CompileArgs) -> Outcome {
    let program = load_program(&args.program.program, args.program.domain.as_deref())?;
    let start = Instant::now();
    let mut session = Session::with_order(program, args.engine.order());
    let trace = session.compile(&args.engine.options());
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let fin = trace.final_state().clone();
    let exact = !trace.partial && session.is_exact(&fin);
    let a = session.program().alphabet().clone();

    if args.format == Format::Cnf && !exact && args.bound.is_none() {
        return Err(fail(
            NOT_EXACT,
            anyhow!("the compiled model is not exact; choose a theory with --bound lower|upper"),
        ));
    }
    if let Some(path) = &args.artifact {
        let art = Artifact::export(session.program(), session.store(), &fin);
        fs::write(path, to_json(&art)).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let theories: Vec<(String, wfc_core::FormulaRef)> = if exact {
        vec![("theory".into(), session.theory_of(&fin.lower))]
    } else {
        let (lo, hi) = session.theory_bounds(&fin);
        match args.bound {
            Some(Bound::Lower) => vec![("lower theory".into(), lo)],
            Some(Bound::Upper) => vec![("upper theory".into(), hi)],
            None => vec![("lower theory".into(), lo), ("upper theory".into(), hi)],
        }
    };
    let three_valued: Vec<String> = if exact {
        Vec::new()
    } else {
        session
            .three_valued_atoms(&fin)
            .into_iter()
            .map(|d| a.name(d).to_string())
            .collect()
    };

    let out = match args.format {
        Format::Text => {
            let mut s = String::new();
            for (k, &d) in a.defined().iter().enumerate() {
                let store = session.store();
                if exact {
                    s += &format!("{} = {}\n", a.name(d), store.display(fin.lower[k], &a));
                } else {
                    s += &format!(
                        "{} in ({}, {})\n",
                        a.name(d),
                        store.display(fin.lower[k], &a),
                        store.display(fin.upper[k], &a)
                    );
                }
            }
            if !exact {
                s += &format!("not exact: {}\n", three_valued.join(", "));
            }
            s
        }
        Format::Dot => to_dot(&session, &trace, &theories),
        Format::Cnf => {
            let mut s = String::new();
            for (name, f) in &theories {
                s += &format!("c {name}\n");
                s += &to_cnf(session.store(), *f).to_dimacs(&a);
            }
            s
        }
        Format::Json => {
            let atoms: Vec<_> = a
                .defined()
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    let store = session.store();
                    json!({
                        "atom": a.name(d),
                        "lower": store.display(fin.lower[k], &a).to_string(),
                        "upper": store.display(fin.upper[k], &a).to_string(),
                    })
                })
                .collect();
            to_json(&json!({
                "exact": exact,
                "three_valued": three_valued,
                "atoms": atoms,
                "trace": trace_json(&session, &trace, false),
            }))
        }
    };
    write_output(args.output.as_deref(), &out)?;
    let block = to_json(&stats(&session, &trace, exact, wall_ms));
    match &args.stats {
        Some(p) => fs::write(p, block).with_context(|| format!("cannot write {}", p.display()))?,
        None => eprint!("{block}"),
    }
    if exact || args.bound.is_some() {
        Ok(0)
    } else {
        if trace.partial {
            eprintln!("warning: budget exhausted before the induction terminated");
        } else {
            eprintln!("warning: not exact: {}", three_valued.join(", "));
        }
        Ok(NOT_EXACT)
    }
}

fn oracle(args: OracleArgs) -> Outcome {
    let program = load_program(&args.program.program, args.program.domain.as_deref())?;
    let mut session = Session::with_order(program, args.engine.order());
    let state = match &args.artifact {
        Some(path) => {
            let text = read(path)?;
            let art: Artifact =
                serde_json::from_str(&text).map_err(|e| fail(PARSE_ERROR, anyhow!("{}: {e}", path.display())))?;
            let program = session.program().clone();
            art.import(&program, session.store_mut())
                .map_err(|e| fail(PARSE_ERROR, anyhow!("{}: {e}", path.display())))?
        }
        None => session.compile(&args.engine.options()).final_state().clone(),
    };
    let opts = OracleOptions {
        threshold: args.threshold,
        samples: args.samples,
        seed: args.seed,
    };
    let report = validate(session.program(), session.store(), &state, &opts);
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    print!("{}", to_json(&json!({ "result": verdict, "report": report })));
    Ok(if report.passed() { 0 } else { VALIDATION_FAILED })
}

fn inference_failure(e: InferenceError) -> Failure {
    match e {
        InferenceError::NonExactModel { .. } => fail(NOT_EXACT, e),
        other => fail(1, other),
    }
}

fn model(common: &QueryCommon) -> Result<(Model, Option<Formula>), Failure> {
    let program = load_program(&common.program.program, common.program.domain.as_deref())?;
    let evidence = parse_evidence(common.evidence.as_deref(), &program)?;
    let m = Model::compile_with_order(program, common.engine.order(), &common.engine.options());
    Ok((m, evidence))
}

fn query(args: QueryArgs) -> Outcome {
    let out = match args.query {
        Query::Count(common) => {
            let (mut m, ev) = model(&common)?;
            let n = m.count(ev.as_ref()).map_err(inference_failure)?;
            json!({ "query": "count", "count": n.to_string() })
        }
        Query::Wmc { common, weights } => {
            let (mut m, ev) = model(&common)?;
            let w = load_weights(&weights, m.program())?;
            let f = m.wmc(ev.as_ref(), &w).map_err(inference_failure)?;
            let q = m.wmc_exact(ev.as_ref(), &w).map_err(inference_failure)?;
            json!({ "query": "wmc", "wmc": f, "wmc_exact": q.to_string() })
        }
        Query::Bounds { common, weights } => {
            let (mut m, ev) = model(&common)?;
            let w = load_weights(&weights, m.program())?;
            let bounds = m.wmc_bounds(ev.as_ref(), &w).map_err(inference_failure)?;
            let exact = m.wmc_bounds_exact(ev.as_ref(), &w).map_err(inference_failure)?;
            let steps: Vec<_> = bounds
                .iter()
                .zip(&exact)
                .map(|(b, e)| {
                    json!({
                        "i": b.i,
                        "kind": m.trace.steps[b.i].kind,
                        "lo": b.lo,
                        "hi": b.hi,
                        "lo_exact": e.lo.to_string(),
                        "hi_exact": e.hi.to_string(),
                    })
                })
                .collect();
            json!({ "query": "bounds", "partial": m.trace.partial, "steps": steps })
        }
        Query::Enumerate { common, limit } => {
            let (mut m, ev) = model(&common)?;
            let models = m.enumerate(ev.as_ref(), limit).map_err(inference_failure)?;
            let a = m.program().alphabet();
            let models: Vec<Vec<String>> = models.iter().map(|i| i.names(a)).collect();
            json!({ "query": "enumerate", "models": models })
        }
        Query::Equiv {
            left,
            right,
            domain,
            engine,
        } => {
            let p1 = load_program(&left, domain.as_deref())?;
            let p2 = load_program(&right, domain.as_deref())?;
            let eq = check_equivalence(p1, p2, &engine.options()).map_err(inference_failure)?;
            json!({ "query": "equiv", "equivalent": eq.equivalent, "witness": eq.witness })
        }
    };
    print!("{}", to_json(&out));
    Ok(0)
}
