//! The `hpkit` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on capacity, integrity
//! and I/O errors. Every output ends with a newline.

pub mod codec;
pub mod stats;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::cores::{CoreDatabase, CoreLimits, CoresError};
use crate::lattice::LatticeKind;
use crate::model::{energy, validate_structure, HpSequence, ModelKind, Structure};
use crate::oracle::{brute_force_optimal, OracleError, OracleLimits, OracleOptions};
use crate::predict::{predict, PredictError, PredictMode, PredictOptions, PredictionResult, Status};
use crate::solver::{Count, SearchStats};

/// Environment variable naming the default core database.
pub const DB_ENV: &str = "HPKIT_COREDB";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Capacity(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<CoresError> for CliError {
    fn from(e: CoresError) -> Self {
        match e {
            CoresError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Capacity(e.to_string()),
        }
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::LatticeMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Capacity(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Capacity { .. } => CliError::Capacity(e.to_string()),
            OracleError::InvalidStructure { .. } => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hpkit", version, about = "Exact structure prediction in the HP lattice protein model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal energy, degeneracy and structures of a sequence.
    Predict(PredictArgs),
    /// One representative structure per equivalence class of optima.
    Represent(PredictArgs),
    /// Build or inspect an H-core database.
    #[command(subcommand)]
    Coredb(CoredbCommand),
    /// Exhaustive ground truth for short chains.
    Oracle(OracleArgs),
    /// Degeneracy statistics over random sequences.
    Stats(StatsArgs),
    /// Validate a structure and report its energy.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum ModeArg {
    First,
    Count,
    Enumerate,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum OutArg {
    Json,
    Text,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Lattice: cubic, fcc or sqr.
    #[arg(short = 'l', long = "lattice", default_value = "cubic")]
    lattice: LatticeKind,
    /// Model: bb (backbone) or sc (side chain).
    #[arg(short = 'm', long = "model", default_value = "bb")]
    model: ModelKind,
}

#[derive(Args, Debug, Clone)]
struct DbArgs {
    /// Core database file; defaults to $HPKIT_COREDB, else cores are built in memory.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Layers to build when no database file is given.
    #[arg(long, default_value_t = 4)]
    layers: usize,
    /// Raise the largest core size accepted for in-memory builds.
    #[arg(long)]
    max_nh: Option<usize>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(short = 's', long = "sequence")]
    sequence: String,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    db: DbArgs,
    #[arg(long, value_enum, default_value = "first")]
    mode: ModeArg,
    /// Stop counting after this many optimal structures.
    #[arg(long, default_value_t = 1_000_000)]
    cutoff: u64,
    #[arg(long, value_enum, default_value = "json")]
    out: OutArg,
    /// Count structures up to translation only.
    #[arg(long)]
    no_symmetry_dedup: bool,
}

#[derive(Subcommand, Debug)]
enum CoredbCommand {
    /// Enumerate core layers and write the database file.
    Build(BuildArgs),
    /// Summarize a database file.
    Info(InfoArgs),
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(short = 'l', long = "lattice", default_value = "cubic")]
    lattice: LatticeKind,
    #[arg(long, default_value_t = 1)]
    nh_min: usize,
    #[arg(long)]
    nh_max: usize,
    #[arg(long, default_value_t = 4)]
    layers: usize,
    /// Cap on core bounding-box volume (0: none).
    #[arg(long, default_value_t = 0)]
    volume_cap: u64,
    #[arg(long)]
    max_nh: Option<usize>,
    /// Output file.
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    out: OutArg,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(short = 's', long = "sequence")]
    sequence: String,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    no_symmetry_dedup: bool,
    #[arg(long, value_enum, default_value = "json")]
    out: OutArg,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    count: usize,
    #[arg(long)]
    length: usize,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    db: DbArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    cutoff: u64,
    #[arg(long)]
    no_symmetry_dedup: bool,
    /// Worker threads (0: one per available core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value = "csv")]
    out: OutArg,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(short = 's', long = "sequence")]
    sequence: String,
    #[command(flatten)]
    common: Common,
    /// Structure as a move string.
    #[arg(short = 'x', long = "structure")]
    structure: String,
    #[arg(long, value_enum, default_value = "json")]
    out: OutArg,
}

/// Runs the command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Predict(a) => cmd_predict(a, None),
        Command::Represent(a) => cmd_predict(a, Some(PredictMode::Enumerate)),
        Command::Coredb(CoredbCommand::Build(a)) => cmd_build(a),
        Command::Coredb(CoredbCommand::Info(a)) => cmd_info(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Check(a) => cmd_check(a),
    }
}

fn parse_sequence(text: &str) -> Result<HpSequence, CliError> {
    HpSequence::parse(text).map_err(|e| CliError::Usage(format!("invalid sequence: {e}")))
}

fn limits_for(lattice: LatticeKind, max_nh: Option<usize>) -> CoreLimits {
    let mut limits = CoreLimits::default();
    if let Some(m) = max_nh {
        match lattice {
            LatticeKind::Cubic => limits.max_nh_cubic = m,
            LatticeKind::Fcc => limits.max_nh_fcc = m,
            LatticeKind::Sqr => limits.max_nh_sqr = m,
        }
    }
    limits
}

fn db_path(explicit: &Option<PathBuf>) -> Option<PathBuf> {
    explicit.clone().or_else(|| std::env::var_os(DB_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// Loads the database file, or builds the requested sizes in memory.
/// Sizes the in-memory build refuses are left out unless `strict`.
fn obtain_db(
    args: &DbArgs,
    lattice: LatticeKind,
    sizes: impl IntoIterator<Item = usize>,
    strict: bool,
) -> Result<CoreDatabase, CliError> {
    if let Some(path) = db_path(&args.db) {
        return Ok(CoreDatabase::load(&path)?);
    }
    let limits = limits_for(lattice, args.max_nh);
    let mut sizes: Vec<usize> = sizes.into_iter().filter(|&n| n > 0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let report = CoreDatabase::build(lattice, sizes, args.layers, &limits)?;
    match report.refused.into_iter().next() {
        Some((_, e)) if strict => Err(e.into()),
        _ => Ok(report.db),
    }
}

#[derive(Serialize)]
struct CountJson {
    value: u64,
    exact: bool,
}

fn count_json(c: Option<Count>) -> Option<CountJson> {
    c.map(|c| CountJson { value: c.value(), exact: c.is_exact() })
}

#[derive(Serialize)]
struct PredictJson {
    sequence: String,
    lattice: String,
    model: String,
    status: Status,
    energy: i32,
    certified: bool,
    structure: Option<String>,
    degeneracy: Option<CountJson>,
    core_degeneracy: Option<CountJson>,
    representatives: Option<Vec<String>>,
    threaded_core_count: usize,
    layers_descended: usize,
    layer_contacts: Option<u32>,
    stats: SearchStats,
}

fn encode_all(structures: &[Structure], lattice: LatticeKind) -> Vec<String> {
    structures.iter().map(|s| codec::encode(s, lattice).expect("predicted structures are valid")).collect()
}

fn count_text(c: Option<Count>) -> String {
    match c {
        None => "not computed".into(),
        Some(Count::Exact(v)) => v.to_string(),
        Some(Count::AtLeast(v)) => format!(">= {v}"),
    }
}

fn cmd_predict(a: PredictArgs, force: Option<PredictMode>) -> Result<String, CliError> {
    let seq = parse_sequence(&a.sequence)?;
    let lattice = a.common.lattice;
    let db = obtain_db(&a.db, lattice, [seq.n_h()], true)?;
    let mode = force.unwrap_or(match a.mode {
        ModeArg::First => PredictMode::First,
        ModeArg::Count => PredictMode::Count,
        ModeArg::Enumerate => PredictMode::Enumerate,
    });
    let options = PredictOptions {
        mode,
        cutoff: a.cutoff,
        symmetry_dedup: !a.no_symmetry_dedup,
        ..PredictOptions::default()
    };
    let r: PredictionResult = predict(&seq, lattice, a.common.model, &db, options)?;
    let structure = r.structure.as_ref().map(|s| encode_all(std::slice::from_ref(s), lattice).remove(0));
    let reps = r.representatives.as_ref().map(|v| encode_all(v, lattice));
    match a.out {
        OutArg::Json => {
            let j = PredictJson {
                sequence: seq.to_string(),
                lattice: lattice.to_string(),
                model: a.common.model.to_string(),
                status: r.status,
                energy: r.energy.value(),
                certified: r.certified,
                structure,
                degeneracy: count_json(r.degeneracy),
                core_degeneracy: count_json(r.core_degeneracy),
                representatives: reps,
                threaded_core_count: r.threaded_core_count,
                layers_descended: r.layers_descended,
                layer_contacts: r.layer_contacts,
                stats: r.stats,
            };
            Ok(serde_json::to_string_pretty(&j).expect("serializable") + "\n")
        }
        OutArg::Text | OutArg::Csv => {
            let mut t = format!(
                "sequence {}\nlattice {} model {}\nstatus {:?}\nenergy {}\ncertified {}\n",
                seq, lattice, a.common.model, r.status, r.energy.value(), r.certified
            );
            if let Some(s) = structure {
                t.push_str(&format!("structure {s}\n"));
            }
            if mode != PredictMode::First {
                t.push_str(&format!("degeneracy {}\n", count_text(r.degeneracy)));
                t.push_str(&format!("core_degeneracy {}\n", count_text(r.core_degeneracy)));
            }
            for rep in reps.unwrap_or_default() {
                t.push_str(&format!("representative {rep}\n"));
            }
            t.push_str(&format!(
                "threaded_cores {} layer {} nodes {}\n",
                r.threaded_core_count, r.layers_descended, r.stats.nodes_expanded
            ));
            Ok(t)
        }
    }
}

fn cmd_build(a: BuildArgs) -> Result<String, CliError> {
    if a.nh_min == 0 || a.nh_min > a.nh_max {
        return Err(CliError::Usage(format!("empty core size range {}..={}", a.nh_min, a.nh_max)));
    }
    let mut limits = limits_for(a.lattice, a.max_nh);
    limits.volume_cap = a.volume_cap;
    let report = CoreDatabase::build_to_file(a.lattice, a.nh_min..=a.nh_max, a.layers, &limits, &a.output)?;
    let mut t = format!("wrote {}\n", a.output.display());
    t.push_str(&info_text(&report.db));
    for (n, e) in &report.refused {
        t.push_str(&format!("refused nH {n}: {e}\n"));
    }
    if let Some((_, e)) = report.refused.first() {
        // Partial results are on disk; the refusal is still a capacity error.
        return Err(CliError::Capacity(format!("{t}{e}")));
    }
    Ok(t)
}

fn info_text(db: &CoreDatabase) -> String {
    let mut t = format!("lattice {} bound {}\n", db.lattice(), db.volume_cap());
    for n in db.sizes() {
        let layers = db.layers(n).unwrap_or_default();
        let counts: Vec<String> = layers.iter().map(|l| format!("{}:{}", l.contacts, l.cores.len())).collect();
        t.push_str(&format!("nH {n} layers {} contacts:cores {}\n", layers.len(), counts.join(" ")));
    }
    t
}

#[derive(Serialize)]
struct InfoJson {
    lattice: String,
    bound: u64,
    sizes: Vec<SizeJson>,
}

#[derive(Serialize)]
struct SizeJson {
    n_h: usize,
    layers: Vec<(u32, usize)>,
}

fn cmd_info(a: InfoArgs) -> Result<String, CliError> {
    let path = db_path(&a.db).ok_or_else(|| CliError::Usage(format!("no database given (--db or {DB_ENV})")))?;
    let db = CoreDatabase::load(&path)?;
    Ok(match a.out {
        OutArg::Json => {
            let j = InfoJson {
                lattice: db.lattice().to_string(),
                bound: db.volume_cap(),
                sizes: db
                    .sizes()
                    .map(|n| SizeJson {
                        n_h: n,
                        layers: db.layers(n).unwrap_or_default().iter().map(|l| (l.contacts, l.cores.len())).collect(),
                    })
                    .collect(),
            };
            serde_json::to_string_pretty(&j).expect("serializable") + "\n"
        }
        _ => info_text(&db),
    })
}

#[derive(Serialize)]
struct ClassJson {
    key: Vec<[i32; 3]>,
    size: u64,
    member: String,
}

#[derive(Serialize)]
struct OracleJson {
    sequence: String,
    lattice: String,
    model: String,
    optimal_energy: i32,
    degeneracy: u64,
    core_degeneracy: u64,
    classes: Vec<ClassJson>,
}

fn cmd_oracle(a: OracleArgs) -> Result<String, CliError> {
    let seq = parse_sequence(&a.sequence)?;
    let lattice = a.common.lattice;
    let r = brute_force_optimal(
        &seq,
        lattice,
        a.common.model,
        OracleOptions { symmetry_reduce: !a.no_symmetry_dedup },
        &OracleLimits::default(),
    )?;
    let classes: Vec<ClassJson> = r
        .classes
        .iter()
        .map(|c| ClassJson {
            key: c.key.iter().map(|p| [p.x, p.y, p.z]).collect(),
            size: c.size,
            member: codec::encode(&c.member, lattice).expect("oracle structures are valid"),
        })
        .collect();
    Ok(match a.out {
        OutArg::Json => {
            let j = OracleJson {
                sequence: seq.to_string(),
                lattice: lattice.to_string(),
                model: a.common.model.to_string(),
                optimal_energy: r.optimal_energy.value(),
                degeneracy: r.degeneracy,
                core_degeneracy: r.core_degeneracy,
                classes,
            };
            serde_json::to_string_pretty(&j).expect("serializable") + "\n"
        }
        _ => {
            let mut t = format!(
                "sequence {seq}\noptimal_energy {}\ndegeneracy {}\ncore_degeneracy {}\n",
                r.optimal_energy.value(),
                r.degeneracy,
                r.core_degeneracy
            );
            for c in classes {
                t.push_str(&format!("class size {} member {}\n", c.size, c.member));
            }
            t
        }
    })
}

fn cmd_stats(a: StatsArgs) -> Result<String, CliError> {
    if a.length == 0 {
        return Err(CliError::Usage("length must be positive".into()));
    }
    let lattice = a.common.lattice;
    let seqs = stats::random_sequences(a.seed, a.count, a.length);
    let db = obtain_db(&a.db, lattice, seqs.iter().map(|s| s.n_h()), false)?;
    let threads = if a.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        a.threads
    };
    let config = stats::StatsConfig {
        count: a.count,
        length: a.length,
        lattice,
        model: a.common.model,
        seed: a.seed,
        options: PredictOptions {
            cutoff: a.cutoff,
            symmetry_dedup: !a.no_symmetry_dedup,
            ..PredictOptions::default()
        },
        threads,
    };
    let report = stats::run_stats(&config, &db);
    Ok(match a.out {
        OutArg::Csv => report.to_csv().map_err(|e| CliError::Io(e.to_string()))?,
        OutArg::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
        OutArg::Text => report.to_text(),
    })
}

#[derive(Serialize)]
struct CheckJson {
    valid: bool,
    violations: Vec<String>,
    energy: Option<i32>,
}

fn cmd_check(a: CheckArgs) -> Result<String, CliError> {
    let seq = parse_sequence(&a.sequence)?;
    let lattice = a.common.lattice;
    let (valid, violations, e) = match codec::decode(&a.structure, lattice, a.common.model) {
        Ok(s) => {
            let report = validate_structure(&seq, &s, lattice.lattice());
            if report.is_ok() {
                let e = energy(&seq, &s, lattice.lattice()).map_err(|e| CliError::Usage(e.to_string()))?;
                (true, Vec::new(), Some(e.value()))
            } else {
                (false, report.violations.iter().map(|v| v.to_string()).collect(), None)
            }
        }
        Err(codec::CodecError::Invalid(report)) => {
            (false, report.violations.iter().map(|v| v.to_string()).collect(), None)
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    Ok(match a.out {
        OutArg::Json => serde_json::to_string_pretty(&CheckJson { valid, violations, energy: e }).expect("serializable") + "\n",
        _ => match e {
            Some(e) => format!("valid\nenergy {e}\n"),
            None => format!("invalid\n{}\n", violations.join("\n")),
        },
    })
}
