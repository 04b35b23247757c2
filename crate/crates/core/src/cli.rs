//! The `maskcert` command line: certify, validate, generate, oracle.
//!
//! Exit codes are a stable contract: `0` = certified / verdict positive /
//! full agreement, `1` = negative verdict (indeterminate, dependent, no
//! fit, unverified), `2` = usage or input error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::certifier::{self, Certificate, CertificateKind, Engine, Options};
use crate::geometry::{self, SubspaceBasis, DEFAULT_FIT_TOL};
use crate::io::{self, MaskedMatrix};
use crate::mask::{split_oversized, ObservationPattern};
use crate::oracle;
use crate::synth::{self, AssignmentMode, GenSpec, MaskProperty};

#[derive(Parser)]
#[command(name = "maskcert", version, about = "Certificates for observation masks of partially observed data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a combinatorial certificate for a mask file.
    Certify(CertifyArgs),
    /// Check whether masked data verifiably lies in a candidate subspace.
    Validate(ValidateArgs),
    /// Generate a reproducible arrangement, data and mask.
    Generate(GenerateArgs),
    /// Cross-check engines on a mask, or run numeric agreement trials.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// All-of-a-kind certificate (witness of size d - r + 1).
    T1,
    /// Uniqueness certificate (witness of size d - r).
    T2,
    /// Independence of the full column selection.
    Independence,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum EngineArg {
    #[default]
    Brute,
    Matching,
    Both,
}

impl From<EngineArg> for Engine {
    fn from(value: EngineArg) -> Self {
        match value {
            EngineArg::Brute => Engine::Brute,
            EngineArg::Matching => Engine::Matching,
            EngineArg::Both => Engine::Both,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    T1,
    T2Only,
    FailsBoth,
    Explicit,
}

impl From<PropertyArg> for MaskProperty {
    fn from(value: PropertyArg) -> Self {
        match value {
            PropertyArg::T1 => MaskProperty::SatisfiesT1,
            PropertyArg::T2Only => MaskProperty::SatisfiesT2Only,
            PropertyArg::FailsBoth => MaskProperty::FailsBoth,
            PropertyArg::Explicit => MaskProperty::Explicit,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum AssignmentArg {
    #[default]
    AllSame,
    Mixed,
}

impl From<AssignmentArg> for AssignmentMode {
    fn from(value: AssignmentArg) -> Self {
        match value {
            AssignmentArg::AllSame => AssignmentMode::AllSame,
            AssignmentArg::Mixed => AssignmentMode::Mixed,
        }
    }
}

#[derive(Args)]
struct CertifyArgs {
    /// Mask file: grid of 'x'/'.' rows, or the JSON pattern form.
    mask: PathBuf,
    /// Subspace dimension r.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    rank: u64,
    #[arg(long, value_enum, default_value = "t1")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "brute")]
    engine: EngineArg,
    /// Override the brute-force subset enumeration cap.
    #[arg(long)]
    cap: Option<u64>,
    /// Replace oversized columns by their sliding windows.
    #[arg(long)]
    split_oversized: bool,
    /// Drop undersized columns with a warning instead of failing.
    #[arg(long)]
    drop_undersized: bool,
    /// Emit the certificate as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Masked data matrix (CSV with '.' or JSON with null for missing).
    data: PathBuf,
    /// Candidate subspace basis, d x r matrix (CSV or JSON).
    subspace: PathBuf,
    /// Mask file describing the observation pattern of the data.
    mask: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    rank: u64,
    /// Relative fit tolerance.
    #[arg(long, default_value_t = DEFAULT_FIT_TOL)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    d: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    r: u64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "t1")]
    property: PropertyArg,
    #[arg(long, value_enum, default_value = "all-same")]
    assignment: AssignmentArg,
    /// Mask file to use verbatim (required with --property explicit).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Output directory; created if absent.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Cross-check engines over all subsets of this mask file.
    #[arg(long, conflicts_with = "trials")]
    mask: Option<PathBuf>,
    /// Rank for grid mask files.
    #[arg(long)]
    rank: Option<u64>,
    /// Run this many seeded agreement trials instead.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 8)]
    d: u64,
    #[arg(long, default_value_t = 2)]
    r: u64,
    #[arg(long, default_value_t = 2)]
    k: u64,
    #[arg(long, default_value_t = 8)]
    n: u64,
    /// Trial seed; required with --trials, never taken from the clock.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "all-same")]
    assignment: AssignmentArg,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Certify(args) => cmd_certify(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Oracle(args) => cmd_oracle(&args),
    }
    .unwrap_or_else(|message| {
        eprintln!("error: {message}");
        2
    })
}

/// Loads a mask file and reconciles it with the structural assumptions,
/// applying the requested repairs. Uncovered rows only warn: they bound
/// every subset's row count, so the margin arithmetic reports them as
/// INDETERMINATE on its own.
fn load_pattern(
    path: &Path,
    rank: usize,
    split_oversized_columns: bool,
    drop_undersized_columns: bool,
) -> Result<ObservationPattern, String> {
    let pattern = io::read_pattern(path, rank).map_err(|e| e.to_string())?;
    if pattern.rank() != rank {
        return Err(format!("mask file has r = {}, but --rank {} was given", pattern.rank(), rank));
    }
    let report = pattern.validate_assumptions();
    let undersized = report.undersized_columns();
    let oversized = report.oversized_columns();
    if !undersized.is_empty() && !drop_undersized_columns {
        return Err(format!(
            "columns {undersized:?} observe fewer than r + 1 = {} rows; such columns fit any subspace and carry no information (pass --drop-undersized to discard them)",
            rank + 1
        ));
    }
    if !oversized.is_empty() && !split_oversized_columns {
        return Err(format!(
            "columns {oversized:?} observe more than r + 1 = {} rows (pass --split-oversized to window them)",
            rank + 1
        ));
    }
    let mut columns: Vec<Vec<usize>> = Vec::new();
    for (idx, set) in pattern.sets().iter().enumerate() {
        let column = idx + 1;
        if set.len() < rank + 1 {
            eprintln!("warning: dropping undersized column {column} ({} rows)", set.len());
            continue;
        }
        if set.len() > rank + 1 {
            let windows = split_oversized(set, rank).map_err(|e| e.to_string())?;
            eprintln!("note: column {column} split into {} windows", windows.len());
            columns.extend(windows.sets().iter().map(|s| s.indices().to_vec()));
        } else {
            columns.push(set.indices().to_vec());
        }
    }
    if columns.is_empty() {
        return Err("no usable columns remain after dropping undersized ones".into());
    }
    let pattern =
        ObservationPattern::from_columns(&columns, pattern.ambient_dim(), rank).map_err(|e| e.to_string())?;
    let report = pattern.validate_assumptions();
    if !report.passes() {
        eprintln!("warning: {report}");
    }
    Ok(pattern)
}

#[derive(Serialize, Deserialize)]
struct IndependenceReport {
    kind: String,
    witness: Vec<usize>,
    r: usize,
    d: usize,
}

fn cmd_certify(args: &CertifyArgs) -> Result<i32, String> {
    let rank = args.rank as usize;
    let pattern = load_pattern(&args.mask, rank, args.split_oversized, args.drop_undersized)?;
    let mut opts = Options::with_engine(args.engine.into());
    if let Some(cap) = args.cap {
        opts.subset_cap = cap;
    }
    match args.mode {
        Mode::Independence => {
            let verdict =
                certifier::is_independent(&pattern, &pattern.all_columns(), &opts).map_err(|e| e.to_string())?;
            let report = IndependenceReport {
                kind: if verdict.independent { "INDEPENDENT".into() } else { "DEPENDENT".into() },
                witness: verdict.violating_subset.clone().unwrap_or_default(),
                r: pattern.rank(),
                d: pattern.ambient_dim(),
            };
            if args.json {
                println!("{}", serde_json::to_string(&report).expect("report serialization"));
            } else if verdict.independent {
                println!("verdict: INDEPENDENT (all {} columns)", pattern.len());
            } else {
                println!("verdict: DEPENDENT, violating subset {:?}", report.witness);
            }
            Ok(if verdict.independent { 0 } else { 1 })
        }
        Mode::T1 | Mode::T2 => {
            let certificate = match args.mode {
                Mode::T1 => certifier::certify_all_of_a_kind(&pattern, &opts),
                _ => certifier::certify_uniqueness(&pattern, &opts),
            }
            .map_err(|e| e.to_string())?;
            if args.json {
                println!("{}", certificate.to_json());
            } else {
                print!("{certificate}");
            }
            let certified = match args.mode {
                Mode::T1 => certificate.kind == CertificateKind::AllOfAKind,
                _ => certificate.kind == CertificateKind::Unique,
            };
            Ok(if certified { 0 } else { 1 })
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ValidationOutcome {
    verdict: String,
    fit_failures: Vec<usize>,
    certificate: Certificate,
}

fn cmd_validate(args: &ValidateArgs) -> Result<i32, String> {
    let rank = args.rank as usize;
    // oversized mask columns are windowed for the certificate check; the
    // fit check below reads the original observation sets either way
    let pattern = load_pattern(&args.mask, rank, true, false)?;
    let raw_pattern = io::read_pattern(&args.mask, rank).map_err(|e| e.to_string())?;
    let data = io::read_masked_matrix(&args.data).map_err(|e| e.to_string())?;
    let subspace = io::read_masked_matrix(&args.subspace).map_err(|e| e.to_string())?;
    let subspace = subspace.to_dense().ok_or("subspace file has missing entries")?;
    let d = raw_pattern.ambient_dim();
    if data.rows() != d || data.cols() != raw_pattern.len() {
        return Err(format!(
            "data is {} x {}, but the mask describes {} x {}",
            data.rows(),
            data.cols(),
            d,
            raw_pattern.len()
        ));
    }
    if subspace.nrows() != d || subspace.ncols() != rank {
        return Err(format!("subspace is {} x {}, expected {} x {}", subspace.nrows(), subspace.ncols(), d, rank));
    }
    let basis = SubspaceBasis::new(subspace).map_err(|e| e.to_string())?;
    let mut fit_failures = Vec::new();
    for (idx, set) in raw_pattern.sets().iter().enumerate() {
        let mut vector = DVector::zeros(d);
        for &j in set.indices() {
            vector[j - 1] = data.get(j - 1, idx).ok_or_else(|| {
                format!("data is missing entry (row {j}, column {}) that the mask marks observed", idx + 1)
            })?;
        }
        if !geometry::fits(&basis, &vector, set, args.tol).map_err(|e| e.to_string())? {
            fit_failures.push(idx + 1);
        }
    }
    let certificate =
        certifier::certify_all_of_a_kind(&pattern, &Options::default()).map_err(|e| e.to_string())?;
    let verdict = if !fit_failures.is_empty() {
        "NO_FIT"
    } else if certificate.kind == CertificateKind::AllOfAKind {
        "LIES_IN_S"
    } else {
        "UNVERIFIED"
    };
    let outcome = ValidationOutcome { verdict: verdict.into(), fit_failures, certificate };
    if args.json {
        println!("{}", serde_json::to_string(&outcome).expect("outcome serialization"));
    } else {
        println!("verdict: {verdict}");
        if !outcome.fit_failures.is_empty() {
            println!("columns failing the fit: {:?}", outcome.fit_failures);
        }
        println!("mask certificate: {}", outcome.certificate.kind);
    }
    Ok(if verdict == "LIES_IN_S" { 0 } else { 1 })
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    spec: &'a GenSpec,
}

fn cmd_generate(args: &GenerateArgs) -> Result<i32, String> {
    let spec = GenSpec {
        ambient_dim: args.d as usize,
        rank: args.r as usize,
        subspace_count: args.k as usize,
        column_count: args.n as usize,
        seed: args.seed,
        mask_property: args.property.into(),
        assignment_mode: args.assignment.into(),
    };
    let pattern = match spec.mask_property {
        MaskProperty::Explicit => {
            let path = args.mask.as_ref().ok_or("--property explicit requires --mask <file>")?;
            let pattern = io::read_pattern(path, spec.rank).map_err(|e| e.to_string())?;
            if pattern.len() != spec.column_count || pattern.ambient_dim() != spec.ambient_dim {
                return Err(format!(
                    "explicit mask is {} x {}, spec wants {} x {}",
                    pattern.ambient_dim(),
                    pattern.len(),
                    spec.ambient_dim,
                    spec.column_count
                ));
            }
            pattern
        }
        _ => synth::random_mask(&spec).map_err(|e| e.to_string())?,
    };
    let arrangement = synth::random_arrangement(&spec).map_err(|e| e.to_string())?;
    // data coefficients use a stream derived from the seed so they do not
    // replay the basis entries
    let (data, _) =
        synth::sample_columns(&arrangement, spec.column_count, spec.assignment_mode, spec.seed ^ 0x5eed_da7a);
    let masked = MaskedMatrix::masked_by(&data, &pattern);

    std::fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    let write = |name: &str, content: String| -> Result<(), String> {
        io::write_text(&args.out.join(name), &content).map_err(|e| e.to_string())
    };
    let manifest = Manifest { tool: "maskcert", version: env!("CARGO_PKG_VERSION"), spec: &spec };
    write("manifest.json", format!("{}\n", serde_json::to_string(&manifest).expect("manifest serialization")))?;
    write("mask.txt", pattern.render_grid())?;
    write("mask.json", format!("{}\n", pattern.to_json()))?;
    write("arrangement.json", format!("{}\n", io::arrangement_to_json(&arrangement)))?;
    write("data.csv", MaskedMatrix::from_dense(&data).to_csv())?;
    write("data_masked.csv", masked.to_csv())?;
    for name in ["manifest.json", "mask.txt", "mask.json", "arrangement.json", "data.csv", "data_masked.csv"] {
        println!("{}", args.out.join(name).display());
    }
    Ok(0)
}

fn cmd_oracle(args: &OracleArgs) -> Result<i32, String> {
    if let Some(mask_path) = &args.mask {
        let rank = args.rank.ok_or("--mask needs --rank")? as usize;
        let pattern = load_pattern(mask_path, rank, false, false)?;
        if pattern.len() > 12 {
            return Err(format!("subset cross-check caps at 12 columns, mask has {}", pattern.len()));
        }
        let columns = pattern.all_columns();
        let mut disagreements = 0usize;
        for mask_bits in 0u32..(1 << columns.len()) {
            let selection: Vec<usize> =
                (0..columns.len()).filter(|i| mask_bits >> i & 1 == 1).map(|i| columns[i]).collect();
            let naive = oracle::brute_force_independent(&pattern, &selection).map_err(|e| e.to_string())?;
            let brute = certifier::is_independent(&pattern, &selection, &Options::with_engine(Engine::Brute))
                .map_err(|e| e.to_string())?;
            let matching =
                certifier::is_independent(&pattern, &selection, &Options::with_engine(Engine::Matching))
                    .map_err(|e| e.to_string())?;
            let agree = naive == brute.independent && brute.independent == matching.independent;
            if !agree {
                disagreements += 1;
            }
            println!(
                "{}",
                serde_json::json!({
                    "selection": selection,
                    "oracle": naive,
                    "brute": brute.independent,
                    "matching": matching.independent,
                    "agree": agree,
                })
            );
        }
        eprintln!("{} subsets checked, {} disagreements", 1u64 << columns.len(), disagreements);
        return Ok(if disagreements == 0 { 0 } else { 1 });
    }
    let trials = args.trials.ok_or("pass --mask <file> or --trials <count>")?;
    let seed = args.seed.ok_or("randomized trials require an explicit --seed")?;
    let mode: AssignmentMode = args.assignment.into();
    let spec = GenSpec {
        ambient_dim: args.d as usize,
        rank: args.r as usize,
        subspace_count: args.k as usize,
        column_count: args.n as usize,
        seed,
        mask_property: match mode {
            AssignmentMode::AllSame => MaskProperty::FailsBoth, // unused for uniform draws
            AssignmentMode::Mixed => MaskProperty::SatisfiesT1,
        },
        assignment_mode: mode,
    };
    let report = oracle::agreement_trial(&spec, trials).map_err(|e| e.to_string())?;
    print!("{}", report.to_json_lines());
    eprintln!("{}/{} trials agree", report.passes, trials);
    Ok(if report.all_pass() { 0 } else { 1 })
}
