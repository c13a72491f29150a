use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use multiegs::cache::ChainCache;
use multiegs::chain::DEFAULT_DEGREE_GUARD;
use multiegs::lab::{CheckReport, Lab, Part, Verdict, DEFAULT_SEARCH_DEPTH, DEFAULT_STAR_SAMPLES};
use multiegs::suite::{self, SuiteConfig, DEFAULT_SEED};
use multiegs::{Error, GroupWord, Guards, NumericalDatum, OrderResult};

const EXIT_FAILURE: u8 = 1;
const EXIT_GUARD: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "multiegs")]
#[command(about = "Congruence quotients and finite-level checks for multi-EGS groups")]
#[command(version)]
struct Cli {
    /// Largest permutation degree p^n a quotient may have
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE_GUARD)]
    modulus_guard: u64,

    /// Directory for cached subgroup chains
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Seed for sampled elements
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Also write the report as JSON to this path
    #[arg(long, global = true)]
    json_report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a datum
    Classify {
        #[arg(long)]
        datum: PathBuf,
    },
    /// Orders of the congruence quotients up to a level
    Quotient {
        #[arg(long)]
        datum: PathBuf,
        #[arg(long)]
        level: u32,
    },
    /// Run one statement check
    Check {
        #[arg(long)]
        datum: PathBuf,
        /// Statement id, e.g. key or branch-derived
        #[arg(long)]
        statement: String,
        #[arg(long)]
        level: u32,
        /// Level of the quotient for witness checks (default level + 2)
        #[arg(long)]
        m: Option<u32>,
        /// Element for normal-closure and full-section
        #[arg(long)]
        word: Option<String>,
        /// Kernel level for kernel-in-derived and kernel-in-gamma3
        #[arg(long)]
        kernel: Option<u32>,
        /// Search depth for full-section
        #[arg(long, default_value_t = DEFAULT_SEARCH_DEPTH)]
        depth: u32,
    },
    /// Order of a word
    Order {
        #[arg(long)]
        datum: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1 << 20)]
        cap: u64,
    },
    /// Build a witness: no-csp, exceptional or full-section
    Witness {
        #[arg(long)]
        datum: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_DEPTH)]
        depth: u32,
    },
    /// Run the full check matrix and criterion summary
    Suite,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::DegreeGuard { .. }) { EXIT_GUARD } else { EXIT_INPUT };
        Failure { code, msg: e.to_string() }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if cli.modulus_guard == 0 {
        return Err(input("--modulus-guard must be positive"));
    }
    let lab = || -> Result<Lab, Failure> {
        let lab = Lab::new(cli.modulus_guard);
        Ok(match &cli.cache_dir {
            Some(dir) => lab.with_cache(ChainCache::new(dir)?),
            None => lab,
        })
    };
    match &cli.command {
        Command::Classify { datum } => {
            let d = load_datum(datum)?;
            let cls = d.classify();
            println!("datum: {}", d.short());
            println!("hash: {}", d.hash());
            println!("summary: {}", summary(&d));
            println!("dim V: {}", cls.dim_v);
            println!("torsion: {}", cls.torsion);
            println!("csp: {}", cls.csp);
            println!("reasons:");
            for r in &cls.reasons {
                println!("  - {r}");
            }
            write_json(cli, &cls)?;
            Ok(0)
        }
        Command::Quotient { datum, level } => {
            let d = load_datum(datum)?;
            let q = lab()?.quotient(&d, *level)?;
            let rows = q.layer_table();
            println!("datum: {}", d.short());
            println!("level  log_p|Q|  log_p layer  |Q|");
            for row in &rows {
                println!("{:<6} {:<9} {:<12} {}", row.level, row.log_order, row.layer, row.order(d.p()));
            }
            write_json(cli, &rows)?;
            Ok(0)
        }
        Command::Check { datum, statement, level, m, word, kernel, depth } => {
            let d = load_datum(datum)?;
            let m = m.unwrap_or(level + 2);
            let report = statement_report(&lab()?, &d, statement, *level, m, word.as_deref(), *kernel, *depth, cli.seed)?;
            emit(cli, &report)
        }
        Command::Order { datum, word, cap } => {
            let d = load_datum(datum)?;
            let w = GroupWord::parse(word, &d)?;
            let result = w.order(&d, *cap, Guards::default());
            match result {
                OrderResult::Order(k) => println!("order: {k}"),
                OrderResult::ExceedsCap => println!("order: exceeds cap {cap}"),
                OrderResult::GuardExceeded => println!("order: recursion guard exceeded"),
            }
            write_json(cli, &result)?;
            Ok(if result == OrderResult::GuardExceeded { EXIT_GUARD } else { 0 })
        }
        Command::Witness { datum, kind, level, m, word, depth } => {
            if !matches!(kind.as_str(), "no-csp" | "exceptional" | "full-section") {
                return Err(input(format!("unknown witness kind `{kind}`")));
            }
            let d = load_datum(datum)?;
            let m = m.unwrap_or(level + 2);
            let report = statement_report(&lab()?, &d, kind, *level, m, word.as_deref(), None, *depth, cli.seed)?;
            emit(cli, &report)
        }
        Command::Suite => {
            let config = SuiteConfig { seed: cli.seed, guard: cli.modulus_guard, cache_dir: cli.cache_dir.clone() };
            let report = suite::run(&config)?;
            print!("{}", report.to_text());
            write_json(cli, &report)?;
            let failed = !report.failed_checks().is_empty() || !report.failed_criteria().is_empty();
            Ok(if failed { EXIT_FAILURE } else { 0 })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn statement_report(
    lab: &Lab,
    d: &NumericalDatum,
    id: &str,
    n: u32,
    m: u32,
    word: Option<&str>,
    kernel: Option<u32>,
    depth: u32,
    seed: u64,
) -> Result<CheckReport, Failure> {
    let word = || -> Result<GroupWord, Failure> {
        let text = word.ok_or_else(|| input(format!("statement `{id}` needs --word")))?;
        Ok(GroupWord::parse(text, d)?)
    };
    let kernel = || kernel.ok_or_else(|| input(format!("statement `{id}` needs --kernel")));
    let report = match id {
        "branch-derived" => lab.check_branch_over_derived(d, n)?,
        "branch-gamma3" => lab.check_branch_over_gamma3(d, n)?,
        "key" => lab.check_key(d, n)?,
        "subdirect" => lab.check_subdirect(d, n)?,
        "second-derived" => lab.check_second_derived(d, n)?,
        "csp-positive" => lab.check_csp_positive(d, n)?,
        "kernel-in-derived" => lab.check_kernel_containment(d, n, kernel()?, Part::Derived)?,
        "kernel-in-gamma3" => lab.check_kernel_containment(d, n, kernel()?, Part::Gamma3)?,
        "no-csp" => lab.csp_witness_dependent(d, n, m)?,
        "exceptional" => lab.csp_witness_exceptional(d, n, m)?,
        "fractality" => lab.check_fractality(d, n)?,
        "full-section" => lab.find_full_section_vertex(d, &word()?, depth, m)?,
        "normal-closure" => lab.check_normal_closure(d, &word()?, m)?,
        "weak-csp" => lab.check_weak_csp(d, n)?,
        "constant-vector" => lab.constant_vector_analysis(d, n, seed, DEFAULT_STAR_SAMPLES)?,
        _ => return Err(input(format!("unknown statement id `{id}`"))),
    };
    Ok(report)
}

fn emit(cli: &Cli, report: &CheckReport) -> Result<u8, Failure> {
    print!("{}", report.to_text());
    write_json(cli, report)?;
    Ok(if report.is_failure() {
        EXIT_FAILURE
    } else if report.verdict == Verdict::GuardExceeded {
        EXIT_GUARD
    } else {
        0
    })
}

fn summary(d: &NumericalDatum) -> String {
    let cls = d.classify();
    let mut parts = Vec::new();
    if cls.in_g_class {
        parts.push("class G".to_string());
    }
    if cls.in_e_class {
        parts.push("class E".to_string());
    }
    parts.push(
        if cls.branch_over_derived {
            "branch over G'"
        } else if cls.branch_over_gamma3_only {
            "branch over gamma3 only"
        } else {
            "not branch"
        }
        .to_string(),
    );
    if cls.torsion {
        parts.push("torsion".to_string());
    }
    parts.push(match cls.csp {
        multiegs::CspStatus::OutsideTheoremScope => "outside theorem scope".to_string(),
        other => other.to_string(),
    });
    parts.join(", ")
}

fn load_datum(path: &Path) -> Result<NumericalDatum, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(NumericalDatum::parse(&text)?)
}

fn write_json<T: Serialize>(cli: &Cli, value: &T) -> Result<(), Failure> {
    if let Some(path) = &cli.json_report {
        let text = serde_json::to_string_pretty(value).map_err(|e| input(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
