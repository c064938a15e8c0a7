//! Command-line surface: descriptor ingestion, computation dispatch, and
//! table/chart/SVG emission.
//!
//! Exit codes are part of the contract: 0 success, 3 collapse hypothesis
//! failed, 4 unsupported ideal shape, 5 truncation exceeded, 1 anything else
//! (2 is reserved for argument errors).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kuenneth::algebra::AlgebraError;
use kuenneth::chart::render_chart;
use kuenneth::comparison::{lift_ring_map, ComparisonError};
use kuenneth::descriptor::{builtin, load_path, DescriptorError, RingSpectrumDescriptor};
use kuenneth::koszul::KoszulError;
use kuenneth::pipeline::{
    check_realizability, compute_dl_action, compute_smash_homotopy, difference_class_catalog,
    tor_computation, PipelineError,
};
use kuenneth::resolution::{
    carrier_map_from_json_str, resolution_from_path, ResolutionError,
};
use kuenneth::steenrod::{conjugate_compositions, conjugate_tau, conjugate_xi, SteenrodError};

/// Environment variable supplying the default truncation (`--max-degree`).
const MAX_DEGREE_ENV: &str = "KUENNETH_MAX_DEGREE";
const MIN_TRUNCATION: u32 = 4;

#[derive(Parser)]
#[command(
    name = "kuenneth",
    version,
    about = "Koszul Tor tables, Dyer-Lashof action tables, and realizability obstructions for regular-quotient ring spectra"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Chart,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModuleChoice {
    Trivial,
    /// The Hurewicz-image module H_*(R; F_p) (family descriptors only).
    Hurewicz,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConjugateMethod {
    Recursive,
    Compositions,
}

#[derive(Args)]
struct RingArgs {
    /// Builtin ring name (ku, ell, BP2, MU).
    #[arg(long, conflicts_with = "descriptor")]
    ring: Option<String>,
    /// Path to a descriptor file (TOML, or JSON with a .json extension).
    #[arg(long)]
    descriptor: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    prime: u32,
    /// Internal-degree truncation; defaults to KUENNETH_MAX_DEGREE, then the
    /// descriptor's own default.
    #[arg(long)]
    max_degree: Option<u32>,
    #[arg(long, value_enum, default_value_t = ModuleChoice::Trivial)]
    module: ModuleChoice,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Plain-ASCII labels (2b, v1b) instead of barred Unicode ones.
    #[arg(long)]
    ascii_safe: bool,
    /// Write to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Bigraded Tor table of the descriptor's module.
    Tor(RingArgs),
    /// Dyer-Lashof action table on pi_*(HF_p smash_R HF_p).
    DlAction(RingArgs),
    /// Realizability check for a regular ideal of MU_*.
    Realizable {
        /// Comma-separated generators, e.g. "2,x1".
        #[arg(long)]
        ideal: String,
        #[arg(long, default_value_t = 2)]
        prime: u32,
        /// Declare that the ideal contains infinitely many of the x_{p^k-1}.
        #[arg(long)]
        xfamily_infinite: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// The Tor_1 <-> I/I^2 difference-class catalog.
    DifferenceClasses(RingArgs),
    /// Antipode of a Milnor generator, as an element string.
    Conjugate {
        /// Index of xi_i.
        #[arg(long, conflicts_with = "tau")]
        xi: Option<u32>,
        /// Index of tau_j (odd primes).
        #[arg(long)]
        tau: Option<u32>,
        #[arg(long, default_value_t = 2)]
        prime: u32,
        #[arg(long, value_enum, default_value_t = ConjugateMethod::Recursive)]
        method: ConjugateMethod,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lift a carrier map through two free resolutions, degree by degree.
    Lift {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// JSON file with carrier generator images.
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        max_degree: Option<u32>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum AppError {
    Pipeline(PipelineError),
    Descriptor(DescriptorError),
    Resolution(ResolutionError),
    Steenrod(SteenrodError),
    Io(std::io::Error),
    Msg(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Pipeline(e) => write!(f, "{e}"),
            AppError::Descriptor(e) => write!(f, "{e}"),
            AppError::Resolution(e) => write!(f, "{e}"),
            AppError::Steenrod(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "{e}"),
            AppError::Msg(m) => write!(f, "{m}"),
        }
    }
}

macro_rules! from_err {
    ($variant:ident, $ty:ty) => {
        impl From<$ty> for AppError {
            fn from(e: $ty) -> Self {
                AppError::$variant(e)
            }
        }
    };
}
from_err!(Pipeline, PipelineError);
from_err!(Descriptor, DescriptorError);
from_err!(Resolution, ResolutionError);
from_err!(Steenrod, SteenrodError);
from_err!(Io, std::io::Error);

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Pipeline(PipelineError::CollapseHypothesisFailed { .. }) => 3,
            AppError::Pipeline(PipelineError::UnsupportedIdealShape(_)) => 4,
            _ if self.is_truncation() => 5,
            _ => 1,
        }
    }

    fn is_truncation(&self) -> bool {
        fn algebra(e: &AlgebraError) -> bool {
            matches!(e, AlgebraError::BeyondTruncation(..))
        }
        fn koszul(e: &KoszulError) -> bool {
            match e {
                KoszulError::TruncationExceeded(..) => true,
                KoszulError::Algebra(a) => algebra(a),
                _ => false,
            }
        }
        fn comparison(e: &ComparisonError) -> bool {
            match e {
                ComparisonError::TruncationExceeded(..) => true,
                ComparisonError::Algebra(a) => algebra(a),
                _ => false,
            }
        }
        match self {
            AppError::Pipeline(PipelineError::Koszul(e)) => koszul(e),
            AppError::Pipeline(PipelineError::Algebra(a)) => algebra(a),
            AppError::Descriptor(DescriptorError::Algebra(a)) => algebra(a),
            AppError::Resolution(ResolutionError::Comparison(e)) => comparison(e),
            _ => false,
        }
    }
}

fn env_max_degree() -> Result<Option<u32>, AppError> {
    match std::env::var(MAX_DEGREE_ENV) {
        Err(_) => Ok(None),
        Ok(v) => v
            .parse::<u32>()
            .map(Some)
            .map_err(|_| AppError::Msg(format!("{MAX_DEGREE_ENV}=`{v}` is not a number"))),
    }
}

fn resolve_truncation(flag: Option<u32>) -> Result<Option<u32>, AppError> {
    let t = match flag {
        Some(t) => Some(t),
        None => env_max_degree()?,
    };
    if let Some(t) = t {
        if t < MIN_TRUNCATION {
            return Err(AppError::Msg(format!(
                "truncation must be at least {MIN_TRUNCATION} (got {t})"
            )));
        }
    }
    Ok(t)
}

fn load_descriptor(args: &RingArgs) -> Result<(RingSpectrumDescriptor, u32), AppError> {
    let trunc = resolve_truncation(args.max_degree)?;
    let mut desc = match (&args.ring, &args.descriptor) {
        (Some(name), None) => builtin(name, args.prime, trunc)?,
        (None, Some(path)) => load_path(path, args.prime, trunc)?,
        _ => {
            return Err(AppError::Msg(
                "exactly one of --ring or --descriptor is required".into(),
            ))
        }
    };
    if args.module == ModuleChoice::Hurewicz {
        desc.module = desc.hurewicz_module()?;
    }
    let t_max = desc.ring.truncation_degree();
    Ok((desc, t_max))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), AppError> {
    match output {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => Ok(std::fs::write(path, format!("{text}\n"))?),
    }
}

fn emit_json<T: Serialize>(output: &Option<PathBuf>, value: &T) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Msg(format!("serialization failed: {e}")))?;
    emit(output, &text)
}

fn run_tor(args: &RingArgs) -> Result<(), AppError> {
    let (desc, t_max) = load_descriptor(args)?;
    let comp = tor_computation(&desc, t_max)?;
    match args.format {
        Format::Json => emit_json(&args.output, &comp.table),
        Format::Chart | Format::Svg => {
            let title = format!("{} at p = {}", desc.name, desc.prime);
            let doc = render_chart(&title, &comp.table.classes, None, args.ascii_safe);
            let text =
                if args.format == Format::Svg { doc.to_svg() } else { doc.to_ascii() };
            emit(&args.output, &text)
        }
    }
}

fn run_dl_action(args: &RingArgs) -> Result<(), AppError> {
    let (desc, t_max) = load_descriptor(args)?;
    let table = compute_dl_action(&desc, t_max)?;
    match args.format {
        Format::Json => emit_json(&args.output, &table),
        Format::Chart | Format::Svg => {
            let smash = compute_smash_homotopy(&desc, t_max)?;
            let title = format!("{} at p = {}: Dyer-Lashof action", desc.name, desc.prime);
            let doc = render_chart(&title, &smash.classes, Some(&table), args.ascii_safe);
            let text =
                if args.format == Format::Svg { doc.to_svg() } else { doc.to_ascii() };
            emit(&args.output, &text)
        }
    }
}

#[derive(Serialize)]
struct DifferenceClassesOut {
    ring: String,
    prime: u32,
    t_max: u32,
    catalog: Vec<DifferenceClassOut>,
}

#[derive(Serialize)]
struct DifferenceClassOut {
    element: String,
    class: String,
    total_degree: u32,
}

fn run_difference_classes(args: &RingArgs) -> Result<(), AppError> {
    let (desc, t_max) = load_descriptor(args)?;
    let catalog = difference_class_catalog(&desc, t_max)?;
    let out = DifferenceClassesOut {
        ring: desc.name.clone(),
        prime: desc.prime,
        t_max,
        catalog: catalog
            .iter()
            .map(|(element, class)| DifferenceClassOut {
                element: element.clone(),
                class: class.label.clone(),
                total_degree: class.total,
            })
            .collect(),
    };
    emit_json(&args.output, &out)
}

#[derive(Serialize)]
struct RealizableOut {
    ideal: Vec<String>,
    prime: u32,
    xfamily_infinite: bool,
    #[serde(flatten)]
    report: kuenneth::pipeline::ObstructionReport,
}

fn run_realizable(
    ideal: &str,
    prime: u32,
    xfamily_infinite: bool,
    output: &Option<PathBuf>,
) -> Result<(), AppError> {
    let gens: Vec<String> = ideal
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let report = check_realizability(&gens, prime, xfamily_infinite)?;
    emit_json(output, &RealizableOut { ideal: gens, prime, xfamily_infinite, report })
}

fn run_conjugate(
    xi: Option<u32>,
    tau: Option<u32>,
    prime: u32,
    method: ConjugateMethod,
    output: &Option<PathBuf>,
) -> Result<(), AppError> {
    let element = match (xi, tau) {
        (Some(i), None) => match method {
            ConjugateMethod::Recursive => conjugate_xi(prime, i)?,
            ConjugateMethod::Compositions => conjugate_compositions(prime, i)?,
        },
        (None, Some(j)) => conjugate_tau(prime, j)?,
        _ => return Err(AppError::Msg("exactly one of --xi or --tau is required".into())),
    };
    emit(output, &element.display())
}

#[derive(Serialize)]
struct LiftOut {
    t_max: u32,
    certified: bool,
    slices: Vec<LiftSliceOut>,
}

#[derive(Serialize)]
struct LiftSliceOut {
    degree: u32,
    dims: Vec<usize>,
    maps: Vec<kuenneth::fp::FpMatrix>,
}

fn run_lift(
    source: &PathBuf,
    target: &PathBuf,
    map: &PathBuf,
    max_degree: Option<u32>,
    output: &Option<PathBuf>,
) -> Result<(), AppError> {
    let f = resolution_from_path(source)?;
    let g = resolution_from_path(target)?;
    let map_src = std::fs::read_to_string(map)?;
    let phi = carrier_map_from_json_str(&map_src, &f, &g)?;
    let t_max = match resolve_truncation(max_degree)? {
        Some(t) => t,
        None => f.ring().truncation_degree().min(g.ring().truncation_degree()),
    };
    let slices = lift_ring_map(&phi, &f, &g, t_max)
        .map_err(|e| AppError::Resolution(ResolutionError::Comparison(e)))?;
    let out = LiftOut {
        t_max,
        certified: slices.iter().all(|s| s.lift.certified),
        slices: slices
            .into_iter()
            .map(|s| LiftSliceOut {
                degree: s.degree,
                dims: s.lift.maps.iter().map(|m| m.cols).collect(),
                maps: s.lift.maps,
            })
            .collect(),
    };
    emit_json(output, &out)
}

fn run(cli: &Cli) -> Result<(), AppError> {
    match &cli.cmd {
        Command::Tor(args) => run_tor(args),
        Command::DlAction(args) => run_dl_action(args),
        Command::DifferenceClasses(args) => run_difference_classes(args),
        Command::Realizable { ideal, prime, xfamily_infinite, output } => {
            run_realizable(ideal, *prime, *xfamily_infinite, output)
        }
        Command::Conjugate { xi, tau, prime, method, output } => {
            run_conjugate(*xi, *tau, *prime, *method, output)
        }
        Command::Lift { source, target, map, max_degree, output } => {
            run_lift(source, target, map, *max_degree, output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
