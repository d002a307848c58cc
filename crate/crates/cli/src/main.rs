//! Command-line workbench: age-class checks, limit and universal-hom stage
//! construction, clone decomposition, bracket closure, and standalone
//! re-verification of any emitted certificate.
//!
//! Exit codes: 0 all claimed verdicts verified, 1 verification failure,
//! 2 parse/configuration error, 3 cap or budget exhaustion (partial
//! artifacts are still written, flagged in the manifest).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use forge_core::age::AgeSpec;
use forge_core::cert::{bracket_closure_certificate, verify_certificate, Certificate};
use forge_core::checks::{
    check_amalg_ext, check_ap, check_hap, check_hp, check_jep, check_strict_ap,
};
use forge_core::clone::{
    build_eps_chain, decompose_polymorphism, polymorphisms, CloneFragment, OpTable,
    StagedRetraction,
};
use forge_core::comma::{build_universal_hom, verify_universality, Scenario};
use forge_core::fraisse::{saturate_limit, verify_extension_property};
use forge_core::report::CheckReport;
use forge_core::{Caps, Error as CoreError, RelStructure};

const EXIT_VERIFY: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CAPS: u8 = 3;

#[derive(Parser)]
#[command(name = "forge", version, about = "Finite structure and clone workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Resource caps, repeatable: --caps enumeration=100000 --caps depth=8
    #[arg(long = "caps", value_name = "KEY=VAL")]
    caps: Vec<String>,
    /// Output directory; certificates print to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized instance selection
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run all age-class checks (HP/JEP/AP/strict AP/HAP/amalgamated
    /// extension) on a class description
    CheckAge {
        /// Class description file (JSON)
        #[arg(long)]
        spec: PathBuf,
        /// Member-size bound for every check
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Saturate a stage chain for the class and verify the extension
    /// property of the last stage
    BuildLimit {
        #[arg(long)]
        spec: PathBuf,
        /// Size bound on the big side of extension tasks
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Maximum number of stages
        #[arg(long, default_value_t = 64)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Saturate a colored stage chain over a fixed target and verify
    /// universality of the last stage
    BuildUniversalHom {
        #[arg(long)]
        spec: PathBuf,
        /// Target structure file (JSON)
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Re-check a certificate using only map- and table-level verification
    Verify {
        /// Certificate file (JSON)
        cert: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decompose polymorphisms of a staged retraction through its pairing
    /// chain
    CloneDecompose {
        /// Staged-retraction scenario file (JSON): {"small","big","r","eps"}
        /// with an optional "operations" list; binary polymorphisms are
        /// searched when the list is absent
        #[arg(long)]
        spec: PathBuf,
        /// Pairing-chain depth
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Maximum number of searched operations to decompose
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the least bracket level covering a target set of operations
    BracketClosure {
        /// Generator file (JSON): {"q", "generators", optional "target"};
        /// the target defaults to every k-ary operation
        #[arg(long)]
        spec: PathBuf,
        /// Bracket arity
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Failure {
        Failure { code, msg: msg.into() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Failure {
        let code = match e {
            CoreError::CarrierCap { .. }
            | CoreError::CanonicalCap { .. }
            | CoreError::EnumerationCap { .. }
            | CoreError::ExtensionSlotCap { .. } => EXIT_CAPS,
            CoreError::Parse(_) | CoreError::Config(_) => EXIT_PARSE,
            _ => EXIT_VERIFY,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() {
    std::process::exit(run() as i32);
}

fn run() -> u8 {
    if let Ok(v) = std::env::var("FORGE_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: FORGE_THREADS must be a positive integer, got `{v}`");
                return EXIT_PARSE;
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::CheckAge { spec, k, common } => cmd_check_age(&spec, k, &common),
        Cmd::BuildLimit { spec, k, budget, common } => cmd_build_limit(&spec, k, budget, &common),
        Cmd::BuildUniversalHom { spec, target, k, budget, common } => {
            cmd_build_universal_hom(&spec, &target, k, budget, &common)
        }
        Cmd::Verify { cert, common } => cmd_verify(&cert, &common),
        Cmd::CloneDecompose { spec, k, budget, common } => {
            cmd_clone_decompose(&spec, k, budget, &common)
        }
        Cmd::BracketClosure { spec, k, common } => cmd_bracket_closure(&spec, k, &common),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn parse_caps(common: &Common) -> Result<Caps, Failure> {
    let mut caps = Caps::default();
    for entry in &common.caps {
        let Some((key, val)) = entry.split_once('=') else {
            return Err(Failure::new(EXIT_PARSE, format!("expected KEY=VAL in --caps, got `{entry}`")));
        };
        let v: u64 = val
            .parse()
            .map_err(|e| Failure::new(EXIT_PARSE, format!("--caps {key}: {e}")))?;
        caps.set(key, v).map_err(Failure::from)?;
    }
    Ok(caps)
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::new(
            EXIT_PARSE,
            format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()),
        )
    })
}

/// Writes `value` to `dir/name` atomically: the file appears complete or
/// not at all.
fn write_atomic<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::new(EXIT_VERIFY, format!("{}: {e}", dir.display())))?;
    let tmp = dir.join(format!(".{name}.tmp"));
    let path = dir.join(name);
    let data = serde_json::to_vec_pretty(value)
        .map_err(|e| Failure::new(EXIT_VERIFY, e.to_string()))?;
    fs::write(&tmp, &data)
        .map_err(|e| Failure::new(EXIT_VERIFY, format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, &path)
        .map_err(|e| Failure::new(EXIT_VERIFY, format!("{}: {e}", path.display())))?;
    Ok(())
}

fn report_line(r: &CheckReport) {
    println!(
        "{}: {} ({} instances checked at bound {})",
        r.property,
        serde_json::to_string(&r.verdict).unwrap_or_else(|_| "?".into()),
        r.instances_checked,
        r.bound
    );
}

/// Verifies the certificate, writes or prints it, and maps the outcome to
/// an exit code.
fn finish(
    cert: &Certificate,
    name: &str,
    common: &Common,
    caps: &Caps,
    exhausted: bool,
) -> Result<u8, Failure> {
    let outcome = verify_certificate(cert, caps)?;
    if let Some(dir) = &common.out {
        write_atomic(dir, name, cert)?;
        println!("wrote {}", dir.join(name).display());
    } else {
        let text = serde_json::to_string(cert)
            .map_err(|e| Failure::new(EXIT_VERIFY, e.to_string()))?;
        println!("{text}");
    }
    if !outcome.ok() {
        for f in &outcome.failures {
            eprintln!("verification failure: {f}");
        }
        return Ok(EXIT_VERIFY);
    }
    println!("certificate verified: {} claims checked", outcome.checked);
    if exhausted {
        eprintln!("warning: budget or cap exhausted, artifacts are partial");
        return Ok(EXIT_CAPS);
    }
    Ok(0)
}

fn cmd_check_age(spec_path: &Path, k: usize, common: &Common) -> Result<u8, Failure> {
    let spec: AgeSpec = load_json(spec_path)?;
    let caps = parse_caps(common)?;
    let reports = vec![
        check_hp(&spec, k, &caps)?,
        check_jep(&spec, k, &caps)?,
        check_ap(&spec, k, &caps)?,
        check_strict_ap(&spec, k, k, &caps)?,
        check_hap(&spec, k, &caps)?,
        check_amalg_ext(&spec, k, &caps)?,
    ];
    for r in &reports {
        report_line(r);
    }
    let cert = Certificate::age_check(spec, k, reports);
    finish(&cert, "age_check.json", common, &caps, false)
}

fn cmd_build_limit(
    spec_path: &Path,
    k: usize,
    budget: usize,
    common: &Common,
) -> Result<u8, Failure> {
    let spec: AgeSpec = load_json(spec_path)?;
    let caps = parse_caps(common)?;
    let build = saturate_limit(&spec, k, budget, &caps)?;
    let exhausted = build.manifest.open_tasks > 0 || build.manifest.queue_capped;
    let report = verify_extension_property(build.last_stage(), &spec, k, &caps)?;
    report_line(&report);
    if let Some(dir) = &common.out {
        for stage in &build.stages {
            write_atomic(dir, &format!("stage_{:03}.json", stage.index), stage)?;
        }
        write_atomic(dir, "manifest.json", &build.manifest)?;
    }
    let cert = Certificate::limit(spec, k, budget, build.stages, build.manifest, report);
    finish(&cert, "limit.json", common, &caps, exhausted)
}

fn cmd_build_universal_hom(
    spec_path: &Path,
    target_path: &Path,
    k: usize,
    budget: usize,
    common: &Common,
) -> Result<u8, Failure> {
    let spec: AgeSpec = load_json(spec_path)?;
    let target: RelStructure = load_json(target_path)?;
    let caps = parse_caps(common)?;
    let scenario = Scenario::new(spec.clone(), target.clone(), k, budget)?;
    let build = build_universal_hom(&scenario, &caps, None)?;
    let exhausted = build.manifest.open_tasks > 0 || build.manifest.queue_capped;
    let report = verify_universality(build.last_stage(), &scenario, k, &caps)?;
    report_line(&report);
    if let Some(dir) = &common.out {
        for stage in &build.stages {
            write_atomic(dir, &format!("stage_{:03}.json", stage.index), stage)?;
        }
        write_atomic(dir, "manifest.json", &build.manifest)?;
    }
    let cert = Certificate::universal_hom(spec, target, k, budget, build.stages, report);
    finish(&cert, "universal_hom.json", common, &caps, exhausted)
}

fn cmd_verify(cert_path: &Path, common: &Common) -> Result<u8, Failure> {
    let cert: Certificate = load_json(cert_path)?;
    let caps = parse_caps(common)?;
    let outcome = verify_certificate(&cert, &caps)?;
    if outcome.ok() {
        println!("{}: verified, {} claims checked", cert.kind_name(), outcome.checked);
        Ok(0)
    } else {
        for f in &outcome.failures {
            eprintln!("verification failure: {f}");
        }
        Ok(EXIT_VERIFY)
    }
}

/// Input scenario for `clone-decompose`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposeInput {
    small: RelStructure,
    big: RelStructure,
    r: Vec<usize>,
    eps: Vec<usize>,
    #[serde(default)]
    operations: Vec<OpTable>,
}

fn cmd_clone_decompose(
    spec_path: &Path,
    k: usize,
    budget: usize,
    common: &Common,
) -> Result<u8, Failure> {
    let input: DecomposeInput = load_json(spec_path)?;
    let caps = parse_caps(common)?;
    let sr = StagedRetraction::new(input.small, input.big, input.r, input.eps, &caps)?;
    let chain = build_eps_chain(&sr, k)?;
    let ops: Vec<OpTable> = if input.operations.is_empty() {
        // the seed skips over a prefix of the enumeration order
        let offset = (common.seed as usize) % 16;
        let found = polymorphisms(&sr.big, 2, &caps, Some(budget + offset))?;
        let mut all: Vec<OpTable> = found.ops.into_iter().collect();
        if all.len() > budget {
            all.drain(..all.len() - budget);
        }
        all
    } else {
        input.operations
    };
    if ops.is_empty() {
        return Err(Failure::new(EXIT_VERIFY, "no operations to decompose"));
    }
    let mut decompositions = Vec::new();
    for op in ops {
        let d = decompose_polymorphism(&op, &sr, &chain, &caps)?;
        println!(
            "decomposed arity-{} operation on {} tracked points",
            op.arity, d.checked_points
        );
        decompositions.push((op, d));
    }
    let cert = Certificate::clone_decompose(sr, k, decompositions);
    finish(&cert, "clone_decompose.json", common, &caps, false)
}

/// Input generators for `bracket-closure`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BracketInput {
    q: usize,
    generators: Vec<OpTable>,
    #[serde(default)]
    target: Vec<OpTable>,
}

/// Every k-ary operation table on {0..q-1}, in table order.
fn all_tables(q: usize, k: usize, caps: &Caps) -> Result<Vec<OpTable>, Failure> {
    let rows = q.checked_pow(k as u32).ok_or_else(|| {
        Failure::new(EXIT_CAPS, "table row count overflows".to_string())
    })?;
    let count = (q as u64).checked_pow(rows as u32).filter(|&c| c <= caps.enumeration_cap);
    let Some(count) = count else {
        return Err(Failure::from(CoreError::EnumerationCap {
            got: u64::MAX,
            cap: caps.enumeration_cap,
        }));
    };
    let mut out = Vec::with_capacity(count as usize);
    let mut table = vec![0usize; rows];
    loop {
        out.push(OpTable::new(q, k, table.clone())?);
        let mut pos = rows;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            table[pos] += 1;
            if table[pos] < q {
                break;
            }
            table[pos] = 0;
        }
    }
}

fn cmd_bracket_closure(spec_path: &Path, k: usize, common: &Common) -> Result<u8, Failure> {
    let input: BracketInput = load_json(spec_path)?;
    let caps = parse_caps(common)?;
    let generators = CloneFragment::new(input.q, input.generators)?;
    let target = if input.target.is_empty() {
        all_tables(input.q, k, &caps)?
    } else {
        input.target
    };
    let cert = bracket_closure_certificate(&generators, k, &target, &caps)?;
    if let Certificate::BracketClosure { depth, .. } = &cert {
        println!("depth: {}", serde_json::to_string(depth).unwrap_or_else(|_| "?".into()));
    }
    finish(&cert, "bracket_closure.json", common, &caps, false)
}
