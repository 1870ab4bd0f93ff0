//! `tbn`: stable-configuration queries, CNF export, enumeration and
//! instance generation for thermodynamic binding networks.
//!
//! Exit codes: 0 success (or "yes"), 1 "no" for yes/no queries, 2 bad input,
//! 3 undecided (solver budget exhausted, enumeration refused), 4 solver or
//! I/O failure.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tbn_core::encoder::{parse_dimacs, AmoEncoding, EncodeOptions, Role};
use tbn_core::oracle::{self, Filter};
use tbn_core::par::Parallelism;
use tbn_core::parser::{emit_result_json, parse_tbn, serialize_tbn};
use tbn_core::queries::{
    encode_query, min_polymers_query, stable_polymer_count, stably_free, stably_free_batch,
    stably_free_direct, Backend, QueryOptions, QueryResult, SearchMode,
};
use tbn_core::reductions::{
    exact_cover_to_tbn, graph_mis_to_tbn, tree_tbn, tree_tbn_shuffled, vc_member_to_mis_member,
    ExactCoverInstance, Graph,
};
use tbn_core::sat::{self, SolverCommand, SolverConfig, Verdict};
use tbn_core::{OracleError, QueryError, SatError, Tbn};

#[derive(Parser)]
#[command(
    name = "tbn",
    version,
    about = "Stable configurations of thermodynamic binding networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the stable polymer count and a stable configuration.
    Solve(SolveArgs),
    /// Decide whether a monomer is free in some stable configuration.
    StablyFree(StablyFreeArgs),
    /// Write the CNF for "at least k polymers" as DIMACS.
    Encode(EncodeArgs),
    /// Enumerate configurations exhaustively (small instances only).
    Enumerate(EnumerateArgs),
    /// Generate an instance from one of the reduction families.
    Gen(GenArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// `embedded`, or an external command template containing `{file}`.
    #[arg(long, env = "TBN_SOLVER", default_value = "embedded")]
    solver: String,
    /// Seed for the embedded solver's tie-breaking.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Conflict budget per embedded solver call (0 = unlimited).
    #[arg(long, default_value_t = sat::DEFAULT_CONFLICT_BUDGET)]
    budget: u64,
    /// At-most-one encoding.
    #[arg(long, value_enum, default_value_t = Amo::Pairwise)]
    amo: Amo,
    /// Query every bound at once instead of binary search.
    #[arg(long)]
    batch: bool,
    /// Use a fresh solver per query instead of one incremental solver.
    #[arg(long)]
    no_incremental: bool,
    /// Run batch queries on the calling thread only.
    #[arg(long)]
    sequential: bool,
    /// Emit the JSON result document on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Amo {
    Pairwise,
    Sequential,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Ask only whether some saturated configuration has at least this many polymers.
    #[arg(long, value_name = "K")]
    min_polymers: Option<usize>,
    /// Treat FILE as DIMACS CNF and report satisfiability.
    #[arg(long)]
    from_dimacs: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FreeMethod {
    TwoQuery,
    Direct,
    Batch,
}

#[derive(Args)]
struct StablyFreeArgs {
    file: PathBuf,
    /// Monomer label or 0-based index.
    #[arg(long, short)]
    monomer: String,
    #[arg(long, value_enum, default_value_t = FreeMethod::TwoQuery)]
    method: FreeMethod,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct EncodeArgs {
    file: PathBuf,
    /// Polymer bound, 1 <= k <= number of monomers.
    #[arg(short)]
    k: usize,
    /// Also require this monomer (label or index) to be free.
    #[arg(long)]
    free: Option<String>,
    #[arg(long, value_enum, default_value_t = Amo::Pairwise)]
    amo: Amo,
    /// Output file; stdout when omitted.
    #[arg(short)]
    o: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    All,
    Saturated,
}

#[derive(Args)]
struct EnumerateArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = FilterArg::All)]
    filter: FilterArg,
    /// Print at most this many configurations.
    #[arg(long, default_value_t = 0)]
    limit: usize,
    /// Refuse instances with more matchings than this.
    #[arg(long, default_value_t = oracle::DEFAULT_BOUND)]
    bound: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
    /// Output file; stdout when omitted.
    #[arg(short, global = true)]
    o: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Family {
    /// j-1 copies of the exact-cover gadget, e.g. --sets "a,b;b,c;c".
    ExactCover {
        #[arg(long)]
        sets: String,
        #[arg(short, default_value_t = 2)]
        j: usize,
    },
    /// Template TBN of a graph, e.g. --edges "a-b,b-c".
    GraphMis {
        #[arg(long)]
        edges: String,
    },
    /// Doubled graph with a vertex that is in a maximum independent set iff
    /// the target is in a minimum vertex cover, emitted as its template TBN.
    VcTransform {
        #[arg(long)]
        edges: String,
        #[arg(long)]
        target: String,
    },
    /// Binary tree family with 2^n - 1 monomers.
    Tree {
        #[arg(short)]
        n: usize,
        /// List monomers in a random order drawn from this seed.
        #[arg(long)]
        shuffle: Option<u64>,
    },
}

/// An error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::Model(_) | QueryError::Encode(_) => 2,
            QueryError::Unknown => 3,
            QueryError::Sat(_) | QueryError::Internal(_) => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SatError> for Failure {
    fn from(e: SatError) -> Self {
        let code = if matches!(e, SatError::BadCommand(_)) {
            2
        } else {
            4
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::BoundExceeded { .. } => 3,
            OracleError::Model(_) => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::StablyFree(a) => cmd_stably_free(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("tbn: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

/// Reads a whole input file; `-` is stdin.
fn read(path: &Path) -> Result<String, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        fs::read_to_string(path)
    };
    text.map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Tbn, Failure> {
    parse_tbn(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_out(o: Option<&Path>, text: &str) -> Result<(), Failure> {
    match o {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: 4,
            message: format!("{}: {e}", p.display()),
        }),
        None => {
            emit(text);
            Ok(())
        }
    }
}

fn amo(a: Amo) -> AmoEncoding {
    match a {
        Amo::Pairwise => AmoEncoding::Pairwise,
        Amo::Sequential => AmoEncoding::Sequential,
    }
}

fn query_options(a: &SolverArgs) -> Result<QueryOptions, Failure> {
    let backend = if a.solver.trim() == "embedded" {
        Backend::Embedded(SolverConfig {
            max_conflicts: (a.budget > 0).then_some(a.budget),
            time_limit: None,
            seed: a.seed,
        })
    } else {
        Backend::External(SolverCommand::parse(&a.solver)?)
    };
    Ok(QueryOptions {
        backend,
        encode: EncodeOptions {
            amo: amo(a.amo),
            ..EncodeOptions::default()
        },
        search: if a.batch {
            SearchMode::Batch
        } else {
            SearchMode::Binary
        },
        incremental: !a.no_incremental,
        parallelism: if a.sequential {
            Parallelism::Sequential
        } else {
            Parallelism::Parallel
        },
    })
}

fn cmd_solve(a: SolveArgs) -> Result<u8, Failure> {
    if a.from_dimacs {
        return solve_dimacs(&a);
    }
    let t = load(&a.file)?;
    let opts = query_options(&a.solver)?;
    let r = match a.min_polymers {
        Some(k) => min_polymers_query(&t, k, None, &opts)?,
        None => stable_polymer_count(&t, &opts)?,
    };
    if a.solver.json {
        emit(&(emit_result_json(&t, &r) + "\n"));
    } else {
        emit(&render(&t, &r));
    }
    Ok(match r.min_polymers {
        Some(_) if r.witness.is_none() => 1,
        _ => 0,
    })
}

fn solve_dimacs(a: &SolveArgs) -> Result<u8, Failure> {
    let file = parse_dimacs(&read(&a.file)?)
        .map_err(|e| Failure::input(format!("{}: {e}", a.file.display())))?;
    let opts = query_options(&a.solver)?;
    let out = match &opts.backend {
        Backend::Embedded(cfg) => sat::solve(&file.cnf, &[], cfg)?,
        Backend::External(cmd) => sat::solve_external(&file.cnf, &[], cmd)?,
    };
    match out.verdict {
        Verdict::Unknown => Err(Failure {
            code: 3,
            message: "solver budget exhausted before reaching a verdict".into(),
        }),
        Verdict::Unsat => {
            emit("s UNSATISFIABLE\n");
            Ok(1)
        }
        Verdict::Sat => {
            let mut text = String::from("s SATISFIABLE\n");
            let model = out.model.unwrap_or_default();
            for (var, role) in &file.legend {
                if let Role::Pair(s, t) = role {
                    if model.get(*var as usize - 1) == Some(&true) {
                        let _ = writeln!(text, "pair {s} {t}");
                    }
                }
            }
            emit(&text);
            Ok(0)
        }
    }
}

fn cmd_stably_free(a: StablyFreeArgs) -> Result<u8, Failure> {
    let t = load(&a.file)?;
    let m = t.find_monomer(&a.monomer).map_err(Failure::input)?;
    let opts = query_options(&a.solver)?;
    let r = match a.method {
        FreeMethod::TwoQuery => stably_free(&t, m, &opts)?,
        FreeMethod::Direct => stably_free_direct(&t, m, &opts)?,
        FreeMethod::Batch => stably_free_batch(&t, m, &opts)?,
    };
    if a.solver.json {
        emit(&(emit_result_json(&t, &r) + "\n"));
    } else {
        emit(&render(&t, &r));
    }
    Ok(if r.free_verdict == Some(true) { 0 } else { 1 })
}

/// Human-readable report: the count, the verdict if any, and the polymers
/// of the witness.
fn render(t: &Tbn, r: &QueryResult) -> String {
    let mut s = String::new();
    match (r.min_polymers, r.free_verdict) {
        (Some(k), _) => {
            let _ = writeln!(
                s,
                "at least {k} polymers: {}",
                if r.witness.is_some() { "yes" } else { "no" }
            );
        }
        (None, Some(free)) => {
            let name = t.monomer_name(r.monomer.expect("verdict has a monomer"));
            let _ = writeln!(s, "stable polymer count: {}", r.stable_polymer_count);
            let _ = writeln!(s, "monomer {name} stably free: {free}");
        }
        (None, None) => {
            let _ = writeln!(s, "stable polymer count: {}", r.stable_polymer_count);
        }
    }
    if let Some(w) = &r.witness {
        let polymers = t.polymers(w);
        let _ = writeln!(s, "witness ({} polymers):", polymers.len());
        for group in polymers.groups() {
            let names: Vec<String> = group.iter().map(|&m| t.monomer(m).to_string()).collect();
            let _ = writeln!(s, "  {}", names.join(" "));
        }
    }
    s
}

fn cmd_encode(a: EncodeArgs) -> Result<u8, Failure> {
    let t = load(&a.file)?;
    if a.k == 0 || a.k > t.len() {
        return Err(Failure::input(format!(
            "bound k = {} out of range 1..={} for this TBN",
            a.k,
            t.len()
        )));
    }
    let free = match &a.free {
        Some(sel) => Some(t.find_monomer(sel).map_err(Failure::input)?),
        None => None,
    };
    let opts = EncodeOptions {
        amo: amo(a.amo),
        ..EncodeOptions::default()
    };
    let enc = encode_query(&t, a.k, free, &opts).map_err(Failure::input)?;
    write_out(a.o.as_deref(), &enc.to_dimacs())?;
    Ok(0)
}

fn cmd_enumerate(a: EnumerateArgs) -> Result<u8, Failure> {
    let t = load(&a.file)?;
    let filter = match a.filter {
        FilterArg::All => Filter::All,
        FilterArg::Saturated => Filter::Saturated,
    };
    let report = oracle::enumeration_report(&t, filter, a.bound, a.limit)?;
    let mut text = format!("{report}\n");
    for (i, c) in report.configurations.iter().enumerate() {
        let pairs: Vec<String> = c.pairs.iter().map(|(x, y)| format!("{x}-{y}")).collect();
        let _ = writeln!(
            text,
            "#{i} polymers={} saturated={} pairs=[{}]",
            c.polymers,
            c.saturated,
            pairs.join(" ")
        );
    }
    emit(&text);
    Ok(0)
}

fn cmd_gen(a: GenArgs) -> Result<u8, Failure> {
    let t = match a.family {
        Family::ExactCover { sets, j } => {
            let x = ExactCoverInstance::parse(&sets).map_err(Failure::input)?;
            exact_cover_to_tbn(&x, j).map_err(Failure::input)?
        }
        Family::GraphMis { edges } => {
            let g = Graph::parse_edges(&edges).map_err(Failure::input)?;
            graph_mis_to_tbn(&g).map_err(Failure::input)?.0
        }
        Family::VcTransform { edges, target } => {
            let g = Graph::parse_edges(&edges).map_err(Failure::input)?;
            let v = g.vertex(&target).map_err(Failure::input)?;
            let (h, extra) = vc_member_to_mis_member(&g, v).map_err(Failure::input)?;
            let (t, ids) = graph_mis_to_tbn(&h).map_err(Failure::input)?;
            eprintln!("query monomer: {}", t.monomer_name(ids[extra]));
            t
        }
        Family::Tree { n, shuffle } => match shuffle {
            Some(seed) => tree_tbn_shuffled(n, seed),
            None => tree_tbn(n),
        }
        .map_err(Failure::input)?,
    };
    write_out(a.o.as_deref(), &serialize_tbn(&t))?;
    Ok(0)
}
