//! Command line front end. Exit status: 0 on success, 1 when the inputs are
//! well formed but rejected (or the verification suite fails), 2 for usage
//! errors and unreadable or malformed files.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::io::{self, FormatError};
use crate::radon::{radon_forward, radon_invert, radon_measure, reconstruct_measure};
use crate::rational::{parse_rational, Rational};
use crate::transport::{
    extend_from_dirac, interpolate, is_cyclically_monotone, optimal_plan, CycleLength, EXHAUSTIVE_LIMIT,
};
use crate::tree::{Geodesic, Tree};
use crate::verify::{gen_tree, run_suite, SuiteConfig, TreeMode};

#[derive(Parser, Debug)]
#[command(name = "treeot", version, about = "Exact optimal transport and Radon transforms on metric trees")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random tree
    GenTree(GenTreeArgs),
    /// Transform a vertex function into its flag table
    Radon(RadonArgs),
    /// Recover a vertex function from its flag table and total
    Invert(InvertArgs),
    /// Squared Wasserstein distance and an optimal plan
    W2(W2Args),
    /// Check a plan file for cyclical monotonicity
    Plan(PlanArgs),
    /// Point of the Wasserstein geodesic from mu to nu at time t
    Interpolate(InterpolateArgs),
    /// Recover a measure from its projections onto geodesics
    Reconstruct(ReconstructArgs),
    /// Run the randomized property suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output file (written atomically); standard output if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenTreeArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_vertices: usize,
    #[arg(long, default_value_t = 1)]
    min_vertices: usize,
    #[arg(long, default_value_t = 3)]
    min_valency: usize,
    #[arg(long, default_value_t = 5)]
    max_valency: usize,
    #[arg(long, default_value_t = 12)]
    denom_bound: u32,
    /// finite or complete
    #[arg(long, default_value = "complete")]
    mode: TreeMode,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct RadonArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Vertex function file
    #[arg(long)]
    h: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct InvertArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Flag table file
    #[arg(long)]
    table: PathBuf,
    /// Sum of the vertex function over all vertices, as p/q
    #[arg(long, value_parser = parse_rational)]
    total: Rational,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct W2Args {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Plan file as written by `w2`
    #[arg(long)]
    plan: PathBuf,
    /// Longest cycle to test; 0 tests every cycle (small plans only)
    #[arg(long, default_value_t = 2)]
    cycle_length: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct InterpolateArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    /// Time as p/q; values above 1 need a Dirac mu and a complete tree
    #[arg(long, value_parser = parse_rational)]
    t: Rational,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Hidden measure; only its projections are shown to the reconstruction
    #[arg(long)]
    mu: PathBuf,
    /// Comma separated candidate edges; all edges if omitted
    #[arg(long, value_parser = io::parse_skeleton)]
    skeleton: Option<std::collections::BTreeSet<crate::tree::EdgeId>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = SuiteConfig::default().trials)]
    trials: usize,
    #[arg(long, default_value_t = SuiteConfig::default().max_vertices)]
    max_vertices: usize,
    #[arg(long, default_value_t = SuiteConfig::default().max_valency)]
    max_valency: usize,
    #[arg(long, default_value_t = SuiteConfig::default().max_atoms)]
    max_atoms: usize,
    #[arg(long, default_value_t = SuiteConfig::default().denom_bound)]
    denom_bound: u32,
    /// Corrupt one property on purpose; the run must then fail
    #[arg(long)]
    inject_fault: bool,
    /// Include the wall-clock duration in the report
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Rejected(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Rejected(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Malformed { .. } => Failure::Usage(e.to_string()),
            FormatError::Invalid(inner) => Failure::Rejected(inner.to_string()),
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Rejected(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<Tree, Failure> {
    Ok(io::read_tree(&read(path)?)?)
}

/// Writes via a temporary file in the same directory and a rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}

fn emit(output: &Output, contents: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => write_atomic(path, contents)
            .map_err(|e| Failure::Rejected(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct MonotonicityReport {
    #[serde(with = "crate::rational::serde_str")]
    w2_squared: Rational,
    cycle_length: String,
    cyclically_monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<ViolationRecord>,
}

#[derive(Serialize)]
struct ViolationRecord {
    cycle: Vec<io::PointRecord>,
    #[serde(with = "crate::rational::serde_str")]
    cost: Rational,
    #[serde(with = "crate::rational::serde_str")]
    shifted_cost: Rational,
}

fn execute(command: Command) -> Result<i32, Failure> {
    match command {
        Command::GenTree(a) => {
            let config = SuiteConfig {
                seed: a.seed,
                min_vertices: a.min_vertices,
                max_vertices: a.max_vertices,
                min_valency: a.min_valency,
                max_valency: a.max_valency,
                denom_bound: a.denom_bound,
                ..SuiteConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let tree = gen_tree(&config, &mut rng, a.mode)?;
            emit(&a.output, &io::write_tree(&tree))?;
        }
        Command::Radon(a) => {
            let tree = load_tree(&a.tree)?;
            let h = io::read_vertex_function(&tree, &read(&a.h)?)?;
            emit(&a.output, &io::write_flag_table(&tree, &radon_forward(&tree, &h)))?;
        }
        Command::Invert(a) => {
            let tree = load_tree(&a.tree)?;
            let table = io::read_flag_table(&tree, &read(&a.table)?)?;
            let h = radon_invert(&tree, &table, &a.total)?;
            emit(&a.output, &io::write_vertex_function(&tree, &h))?;
        }
        Command::W2(a) => {
            let tree = load_tree(&a.tree)?;
            let mu = io::read_measure(&tree, &read(&a.mu)?)?;
            let nu = io::read_measure(&tree, &read(&a.nu)?)?;
            emit(&a.output, &io::write_plan(&tree, &optimal_plan(&tree, &mu, &nu)?))?;
        }
        Command::Plan(a) => {
            let tree = load_tree(&a.tree)?;
            let plan = io::read_plan(&tree, &read(&a.plan)?)?;
            let mode = match a.cycle_length {
                0 if plan.couplings().len() > EXHAUSTIVE_LIMIT => {
                    return Err(Failure::Rejected(format!(
                        "exhaustive cycle search supports at most {EXHAUSTIVE_LIMIT} couplings"
                    )))
                }
                0 => CycleLength::Exhaustive,
                k => CycleLength::Max(k),
            };
            let found = is_cyclically_monotone(&tree, &plan, mode)?;
            let report = MonotonicityReport {
                w2_squared: plan.squared_cost().clone(),
                cycle_length: if a.cycle_length == 0 { "all".into() } else { a.cycle_length.to_string() },
                cyclically_monotone: found.is_none(),
                violation: found.map(|v| ViolationRecord {
                    cycle: v.cycle.iter().flat_map(|c| [io::PointRecord::from_point(&tree, &c.src), io::PointRecord::from_point(&tree, &c.dst)]).collect(),
                    cost: v.cost,
                    shifted_cost: v.shifted_cost,
                }),
            };
            emit(&a.output, &io::write_json(&report))?;
        }
        Command::Interpolate(a) => {
            let tree = load_tree(&a.tree)?;
            let mu = io::read_measure(&tree, &read(&a.mu)?)?;
            let nu = io::read_measure(&tree, &read(&a.nu)?)?;
            let out = if a.t > Rational::from_integer(1.into()) && mu.is_dirac() {
                extend_from_dirac(&tree, &mu.atoms()[0].point, &nu, &a.t)?
            } else {
                interpolate(&tree, &optimal_plan(&tree, &mu, &nu)?, &a.t)?
            };
            emit(&a.output, &io::write_measure(&tree, &out))?;
        }
        Command::Reconstruct(a) => {
            let tree = load_tree(&a.tree)?;
            let hidden = io::read_measure(&tree, &read(&a.mu)?)?;
            let skeleton = a.skeleton.unwrap_or_else(|| tree.edge_ids().collect());
            let oracle = |g: &Geodesic| radon_measure(&tree, &hidden, g);
            let rec = reconstruct_measure(&tree, oracle, &skeleton)?;
            emit(&a.output, &io::write_reconstruction(&tree, &rec))?;
        }
        Command::Verify(a) => {
            let config = SuiteConfig {
                seed: a.seed,
                trials: a.trials,
                max_vertices: a.max_vertices,
                max_valency: a.max_valency,
                max_atoms: a.max_atoms,
                denom_bound: a.denom_bound,
                inject_fault: a.inject_fault,
                ..SuiteConfig::default()
            };
            config.validate()?;
            let mut report = run_suite(&config);
            if !a.timing {
                report.duration_ms = None;
            }
            emit(&a.output, &io::write_json(&report))?;
            if !report.all_passed() {
                for p in report.properties.iter().filter(|p| p.failed > 0) {
                    eprintln!("FAILED {}: {} of {} trials", p.name, p.failed, p.trials);
                }
                return Ok(1);
            }
        }
    }
    Ok(0)
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Rejected(m) => eprintln!("error: {m}"),
            }
            f.code()
        }
    }
}
