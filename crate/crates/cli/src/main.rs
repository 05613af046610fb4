use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use relapprox::chaining::build_chain;
use relapprox::halving::{certified_halving, iterated_halving_with, TraceBound};
use relapprox::harness::{self, CalibrationSuite, ExperimentSpec, Family, GeneratorSpec};
use relapprox::packing::{greedy_maximal_packing, verify_packing};
use relapprox::sampling::{self, uniform_sample, ApproxParams, ConstantsFile, Formula, ReplacementMode, Sample};
use relapprox::set_system::{self, DEFAULT_MAX_VC};
use relapprox::{Error, RangeSpace, SetSystem, VcDimension};

#[derive(Parser)]
#[command(name = "relapprox", version, about = "Build and verify relative (ε, δ)-approximations of set systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Basic,
    Main,
    Halving,
    Chaining,
}

impl From<FormulaArg> for Formula {
    fn from(f: FormulaArg) -> Self {
        match f {
            FormulaArg::Basic => Formula::Basic,
            FormulaArg::Main => Formula::Main,
            FormulaArg::Halving => Formula::Halving,
            FormulaArg::Chaining => Formula::Chaining,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Without,
    With,
}

impl From<ModeArg> for ReplacementMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Without => ReplacementMode::Without,
            ModeArg::With => ReplacementMode::With,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated set system as JSON.
    Generate {
        /// intervals, power_set, random, halfplanes or rectangles
        #[arg(long)]
        family: String,
        /// Ground set size (number of random points for geometric families).
        #[arg(long)]
        n: usize,
        /// Number of random sets (random family).
        #[arg(long)]
        m: Option<usize>,
        /// Membership probability (random family).
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check whether a sample is a relative (ε, δ)-approximation.
    Verify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Draw a uniform sample sized by one of the sample-size formulas.
    Sample {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum)]
        formula: FormulaArg,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// VC dimension; computed from the system when omitted.
        #[arg(long)]
        d: Option<u32>,
        /// Constants file; built-in defaults when omitted.
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "without")]
        mode: ModeArg,
    },
    /// Iterated halving, retried until the output verifies.
    Halve {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        seed: u64,
        /// Write the per-level record here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the sample here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        max_retries: usize,
        /// Size levels by the growth bound with this dimension instead of exact trace counts.
        #[arg(long)]
        sauer_shelah: Option<u32>,
    },
    /// Greedy maximal packing under symmetric-difference distance.
    Packing {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chain decomposition summary (JSON, or CSV when the output ends in .csv).
    Chain {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo failure-rate sweep.
    Montecarlo {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; overrides the spec.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Calibrate the sample-size constants on a suite.
    Calibrate {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    /// The object was built or loaded but did not verify.
    Verification(String),
    Usage(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RetriesExhausted { .. } => Failure::Verification(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_system(path: &Path) -> Result<SetSystem, Error> {
    let loaded = set_system::load(path)?;
    if loaded.deduplicated {
        eprintln!("note: duplicate sets were dropped");
    }
    Ok(loaded.system)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, value)?;
    writeln!(lock)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn dimension(f: &SetSystem, given: Option<u32>) -> Result<u32, Error> {
    if let Some(d) = given {
        return Ok(d);
    }
    match f.vc_dimension(DEFAULT_MAX_VC) {
        VcDimension::Exact(d) => Ok(d as u32),
        VcDimension::EmptyFamily => Ok(0),
        VcDimension::AtLeast(d) => Err(Error::InvalidArgument(format!(
            "VC dimension is at least {d}; pass --d"
        ))),
    }
}

fn generate(family: &str, n: usize, m: Option<usize>, p: Option<f64>, seed: u64, out: &Path) -> Outcome {
    let spec = GeneratorSpec {
        family: family.parse::<Family>()?,
        n,
        m,
        p,
        seed,
        implicit: false,
    };
    let f = spec.generate()?;
    f.save(out)?;
    eprintln!("{} sets on {} elements", f.len(), f.n());
    Ok(())
}

fn verify(system: &Path, sample: &Path, eps: f64, delta: f64) -> Outcome {
    // γ plays no role here
    params(eps, delta, 0.5)?;
    let f = load_system(system)?;
    let a = Sample::load(sample)?;
    let report = sampling::relative_error(&f, &a, eps)?;
    let passes = report.passes(delta);
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        report: &'a sampling::ApproximationReport,
        delta: f64,
        passes: bool,
    }
    print_json(&Out {
        report: &report,
        delta,
        passes,
    })?;
    if passes {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "worst ratio {} exceeds delta {delta} (set {})",
            report.worst_ratio, report.worst_set_index
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn sample(
    system: &Path,
    formula: Formula,
    params: ApproxParams,
    seed: u64,
    out: &Path,
    d: Option<u32>,
    constants: Option<&Path>,
    mode: ReplacementMode,
) -> Outcome {
    let f = load_system(system)?;
    let constants = match constants {
        Some(p) => ConstantsFile::load(p)?,
        None => ConstantsFile::default(),
    };
    if formula != Formula::Basic && !constants.is_calibrated() {
        eprintln!("note: using uncalibrated constants");
    }
    let d = match formula {
        Formula::Basic => 0,
        _ => dimension(&f, d)?,
    };
    let requested = formula.sample_size(&params, d, f.family_size(), &constants.constants);
    let t = match mode {
        ReplacementMode::Without if requested > f.n() as u64 => {
            eprintln!("note: formula asks for {requested} > n = {}; taking the whole ground set", f.n());
            f.n() as u64
        }
        _ => requested,
    };
    let a = uniform_sample(f.n(), t as usize, seed, mode)?;
    a.save(out)?;
    #[derive(Serialize)]
    struct Out {
        formula: Formula,
        requested: u64,
        t: u64,
        distinct: usize,
        n: usize,
    }
    print_json(&Out {
        formula,
        requested,
        t: a.t(),
        distinct: a.members().len(),
        n: f.n(),
    })?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn halve(
    system: &Path,
    params: ApproxParams,
    seed: u64,
    trace: Option<&Path>,
    out: Option<&Path>,
    max_retries: usize,
    sauer_shelah: Option<u32>,
) -> Outcome {
    let f = load_system(system)?;
    let (a, record) = match sauer_shelah {
        None => certified_halving(&f, &params, seed, max_retries)?,
        Some(d) => {
            let (a, record) = iterated_halving_with(&f, &params, seed, TraceBound::SauerShelah { d })?;
            if !sampling::is_relative_approx(&f, &a, &params)? {
                return Err(Failure::Verification("growth-bound run did not verify".into()));
            }
            (a, record)
        }
    };
    if let Some(path) = trace {
        write_json(path, &record)?;
    }
    if let Some(path) = out {
        a.save(path)?;
    }
    #[derive(Serialize)]
    struct Out {
        t: u64,
        n: usize,
        depth: usize,
        worst_ratio: f64,
    }
    print_json(&Out {
        t: a.t(),
        n: f.n(),
        depth: record.depth(),
        worst_ratio: sampling::relative_error(&f, &a, params.eps)?.worst_ratio,
    })?;
    Ok(())
}

fn packing(system: &Path, alpha: f64, out: &Path) -> Outcome {
    let f = load_system(system)?;
    let p = greedy_maximal_packing(&f, alpha)?;
    verify_packing(&f, &p)?;
    write_json(out, &p)?;
    eprintln!("{} members at alpha {alpha}", p.len());
    Ok(())
}

fn chain(system: &Path, eps: f64, delta: f64, out: &Path) -> Outcome {
    let f = load_system(system)?;
    let c = build_chain(&f, eps, delta)?;
    if let Err(e) = c.verify() {
        return Err(Failure::Verification(e.to_string()));
    }
    let summary = c.summary();
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        summary.write_csv(BufWriter::new(File::create(out)?))?;
    } else {
        write_json(out, &summary)?;
    }
    Ok(())
}

fn montecarlo(spec_path: &Path, out: &Path, threads: Option<usize>) -> Outcome {
    let spec = ExperimentSpec::load(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let table = harness::run_experiment(&spec, base, threads)?;
    table.write_csv(BufWriter::new(File::create(out)?))?;
    Ok(())
}

fn calibrate(suite_path: &Path, out: &Path) -> Outcome {
    let suite = CalibrationSuite::load(suite_path)?;
    let base = suite_path.parent().unwrap_or(Path::new("."));
    match harness::calibrate_constants(&suite, base) {
        Ok(file) => {
            file.save(out)?;
            print_json(&file.constants)?;
            Ok(())
        }
        Err(e @ Error::Calibration(_)) => Err(Failure::Verification(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn params(eps: f64, delta: f64, gamma: f64) -> Result<ApproxParams, Error> {
    ApproxParams::new(eps, delta, gamma)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Generate { family, n, m, p, seed, out } => generate(&family, n, m, p, seed, &out),
        Command::Verify { system, sample, eps, delta } => verify(&system, &sample, eps, delta),
        Command::Sample {
            system,
            formula,
            eps,
            delta,
            gamma,
            seed,
            out,
            d,
            constants,
            mode,
        } => sample(
            &system,
            formula.into(),
            params(eps, delta, gamma)?,
            seed,
            &out,
            d,
            constants.as_deref(),
            mode.into(),
        ),
        Command::Halve {
            system,
            eps,
            delta,
            gamma,
            seed,
            trace,
            out,
            max_retries,
            sauer_shelah,
        } => halve(
            &system,
            params(eps, delta, gamma)?,
            seed,
            trace.as_deref(),
            out.as_deref(),
            max_retries,
            sauer_shelah,
        ),
        Command::Packing { system, alpha, out } => packing(&system, alpha, &out),
        Command::Chain { system, eps, delta, out } => chain(&system, eps, delta, &out),
        Command::Montecarlo { spec, out, threads } => montecarlo(&spec, &out, threads),
        Command::Calibrate { suite, out } => calibrate(&suite, &out),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
