//! Command line driver: run verification suites, lift rotations to the spinor
//! representation, classify pair descriptors, and emit plot-ready profiles.
//!
//! Exit codes: 0 all claims pass, 1 a claim failed or a pair was refused,
//! 2 configuration error, 3 internal or numerical error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use diraclab::clifford::{plane_rotation, spin_lift, GammaSet};
use diraclab::fields::{PairData, ZeroModePair};
use diraclab::verify::{
    classify_pair, run_suite, sample_points, suite_names, ClassifyError, ClassifyOptions,
    ReportSet, SuiteConfig, SuiteError,
};

const FAILED_CLAIMS: u8 = 1;
const BAD_CONFIG: u8 = 2;
const INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "diraclab", version, about = "Dirac zero-mode verification laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a JSON report.
    Verify(VerifyArgs),
    /// Lift a plane rotation to the spinor representation.
    Lift(LiftArgs),
    /// Classify a zero-mode pair descriptor up to symmetry.
    Classify(ClassifyArgs),
    /// Sample a named field profile as CSV.
    EmitProfile(ProfileArgs),
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: BAD_CONFIG, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: INTERNAL, message: message.into() }
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Verify(args) => verify(args),
        Command::Lift(args) => lift(args),
        Command::Classify(args) => classify(args),
        Command::EmitProfile(args) => emit_profile(args),
    };
    result.unwrap_or_else(|failure| {
        eprintln!("error: {}", failure.message);
        ExitCode::from(failure.code)
    })
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name; repeat to run several. Defaults to "all".
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
    /// Dimension to cover; repeat for several. Empty uses suite defaults.
    #[arg(short = 'd', long = "dim", value_name = "D")]
    dims: Vec<usize>,
    /// Regularization sweep value; repeat for several, strictly positive.
    #[arg(long = "eps", value_name = "EPS")]
    eps: Vec<f64>,
    /// Radial quadrature order override.
    #[arg(long, value_name = "N")]
    radial_order: Option<usize>,
    /// Angular quadrature order override.
    #[arg(long, value_name = "N")]
    angular_order: Option<usize>,
    /// Sample count for pointwise residual checks.
    #[arg(long, value_name = "N")]
    points: Option<usize>,
    /// Seed shared by every randomized draw.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Key/value file with the same knobs; explicit flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Print per-suite wall time to stderr.
    #[arg(long)]
    timings: bool,
}

/// Knobs accepted in the --config file; one flat table, same names as flags.
#[derive(Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    suite: Option<String>,
    suites: Option<Vec<String>>,
    dims: Option<Vec<usize>>,
    eps: Option<Vec<f64>>,
    radial_order: Option<usize>,
    angular_order: Option<usize>,
    points: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

fn verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    if file.suite.is_some() && file.suites.is_some() {
        return Err(Failure::config("config sets both `suite` and `suites`; choose one"));
    }

    let suites = if !args.suites.is_empty() {
        args.suites.clone()
    } else if let Some(list) = file.suites {
        list
    } else if let Some(one) = file.suite {
        vec![one]
    } else {
        vec!["all".to_string()]
    };
    for name in &suites {
        if !suite_names().contains(&name.as_str()) {
            return Err(Failure::config(format!(
                "unknown suite {name:?}; available: {}",
                suite_names().join(", ")
            )));
        }
    }

    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        dims: if !args.dims.is_empty() { args.dims.clone() } else { file.dims.unwrap_or_default() },
        eps_sweep: if !args.eps.is_empty() { args.eps.clone() } else { file.eps.unwrap_or_default() },
        radial_order: args.radial_order.or(file.radial_order),
        angular_order: args.angular_order.or(file.angular_order),
        points: args.points.or(file.points).unwrap_or(defaults.points),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
    };
    let out = args.out.clone().or(file.out);

    let mut set = ReportSet::new();
    for name in &suites {
        let started = Instant::now();
        let part = run_suite(name, &cfg).map_err(suite_failure)?;
        if args.timings {
            eprintln!(
                "suite {name}: {} reports in {:.2}s",
                part.reports.len(),
                started.elapsed().as_secs_f64()
            );
        }
        set.reports.extend(part.reports);
    }

    let json = set.to_json();
    match &out {
        Some(path) => fs::write(path, json.as_bytes())
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    let failed = set.failed().len();
    eprintln!("{} reports, {failed} failed", set.reports.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(FAILED_CLAIMS) })
}

fn suite_failure(err: SuiteError) -> Failure {
    let code = match err {
        SuiteError::UnknownSuite(..)
        | SuiteError::UnsupportedDimension { .. }
        | SuiteError::BadSweep(..) => BAD_CONFIG,
        _ => INTERNAL,
    };
    Failure { code, message: err.to_string() }
}

#[derive(Args)]
struct LiftArgs {
    /// Ambient dimension.
    #[arg(long, value_name = "D")]
    dim: usize,
    /// Two distinct 1-based axes spanning the rotation plane.
    #[arg(long, num_args = 2, value_names = ["J", "K"])]
    plane: Vec<usize>,
    /// Rotation angle in radians.
    #[arg(long, value_name = "RAD", allow_hyphen_values = true)]
    angle: f64,
}

fn lift(args: LiftArgs) -> Result<ExitCode, Failure> {
    let [j, k] = args.plane[..] else {
        return Err(Failure::config("--plane takes exactly two axes"));
    };
    if j == k || j == 0 || k == 0 || j > args.dim || k > args.dim {
        return Err(Failure::config(format!(
            "plane axes must be distinct and within 1..={}",
            args.dim
        )));
    }
    let g = GammaSet::new(args.dim).map_err(|e| Failure::config(e.to_string()))?;
    let o = plane_rotation(args.dim, j - 1, k - 1, args.angle);
    let lift = spin_lift(&g, &o).map_err(|e| Failure::internal(e.to_string()))?;

    println!("rotation by {} in the ({j},{k}) plane of R^{}", args.angle, args.dim);
    for row in 0..lift.u.nrows() {
        let cells: Vec<String> = (0..lift.u.ncols())
            .map(|col| {
                let z = lift.u[(row, col)];
                format!("{:+.9}{:+.9}i", z.re, z.im)
            })
            .collect();
        println!("U[{row}]  {}", cells.join("  "));
    }
    println!("residual {:.3e}", lift.residual);
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
struct ClassifyArgs {
    /// JSON descriptor of the spinor/potential pair.
    #[arg(value_name = "DESCRIPTOR")]
    descriptor: PathBuf,
    /// Seed for the round-trip probe points.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

fn classify(args: ClassifyArgs) -> Result<ExitCode, Failure> {
    let text = fs::read_to_string(&args.descriptor)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", args.descriptor.display())))?;
    let data: PairData = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", args.descriptor.display())))?;
    let d = data.psi.dim;
    let gammas = Arc::new(GammaSet::new(d).map_err(|e| Failure::config(e.to_string()))?);
    let pair = ZeroModePair::from_descriptor(gammas, &data)
        .map_err(|e| Failure::config(e.to_string()))?;
    let mut opts = ClassifyOptions::new(d).map_err(|e| Failure::config(e.to_string()))?;
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }

    match classify_pair(&pair, &opts) {
        Ok(c) => {
            let rotation: Vec<Vec<f64>> =
                (0..d).map(|i| (0..d).map(|j| c.rotation[(i, j)]).collect()).collect();
            let vacuum: Vec<(f64, f64)> = c.vacuum.iter().map(|z| (z.re, z.im)).collect();
            let body = serde_json::json!({
                "dim": d,
                "center": c.center.iter().copied().collect::<Vec<f64>>(),
                "scale": c.scale,
                "amplitude": c.amplitude,
                "twisted": c.twisted,
                "rotation": rotation,
                "vacuum": vacuum,
                "norm_ratio": c.norm_ratio,
                "residuals": {
                    "fit": c.fit_residual,
                    "data": c.data_residual,
                    "reduction": c.reduction_residual,
                    "vacuum": c.vacuum_residual,
                    "rebuild": c.rebuild_residual,
                },
            });
            println!("{}", serde_json::to_string_pretty(&body).expect("fixed keys"));
            Ok(ExitCode::SUCCESS)
        }
        Err(
            e @ (ClassifyError::NotEquality { .. }
            | ClassifyError::EvenDimension(..)
            | ClassifyError::BadProfile(..)
            | ClassifyError::BadSpinorData(..)),
        ) => {
            eprintln!("refused: {e}");
            Ok(ExitCode::from(FAILED_CLAIMS))
        }
        Err(e) => Err(Failure::internal(e.to_string())),
    }
}

#[derive(Args)]
struct ProfileArgs {
    /// Profile id: potential-axis, spinor-ray, or hopf-tangents.
    #[arg(value_name = "ID")]
    id: String,
    /// Ambient dimension; the canonical pair needs it odd.
    #[arg(long, value_name = "D", default_value_t = 3)]
    dim: usize,
    /// Number of samples.
    #[arg(long, value_name = "N", default_value_t = 201)]
    points: usize,
    /// Axis samples run over [-span, span], ray samples over [0, span].
    #[arg(long, value_name = "T", default_value_t = 5.0)]
    span: f64,
    /// Seed for the tangent cloud positions.
    #[arg(long, value_name = "SEED", default_value_t = 2026)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn emit_profile(args: ProfileArgs) -> Result<ExitCode, Failure> {
    if args.points < 2 {
        return Err(Failure::config("need at least two samples"));
    }
    if !(args.span > 0.0) {
        return Err(Failure::config("span must be positive"));
    }
    let d = args.dim;
    let gammas = Arc::new(GammaSet::new(d).map_err(|e| Failure::config(e.to_string()))?);
    let pair = ZeroModePair::extremal(gammas).map_err(|e| Failure::config(e.to_string()))?;

    let mut csv = String::new();
    match args.id.as_str() {
        "potential-axis" => {
            csv.push('t');
            for j in 1..=d {
                csv.push_str(&format!(",a_{j}"));
            }
            csv.push_str(",a_norm\n");
            for i in 0..args.points {
                let t = -args.span + 2.0 * args.span * i as f64 / (args.points - 1) as f64;
                let mut x = vec![0.0; d];
                x[0] = t;
                let a = pair.a_value(&x);
                csv.push_str(&format!("{t}"));
                for j in 0..d {
                    csv.push_str(&format!(",{}", a[j]));
                }
                csv.push_str(&format!(",{}\n", a.norm()));
            }
        }
        "spinor-ray" => {
            csv.push_str("t,psi_norm\n");
            for i in 0..args.points {
                let t = args.span * i as f64 / (args.points - 1) as f64;
                let mut x = vec![0.0; d];
                x[0] = t;
                csv.push_str(&format!("{t},{}\n", pair.psi_value(&x).norm()));
            }
        }
        "hopf-tangents" => {
            if d != 3 {
                return Err(Failure::config("hopf-tangents is a d=3 profile"));
            }
            csv.push_str("x_1,x_2,x_3,a_1,a_2,a_3,t_1,t_2,t_3\n");
            for x in sample_points(3, args.points, args.seed) {
                let a = pair.a_value(&x);
                // |A| = d b / (b^2 + r^2) never vanishes, so the tangent exists.
                let tangent = &a / a.norm();
                csv.push_str(&format!("{},{},{}", x[0], x[1], x[2]));
                for j in 0..3 {
                    csv.push_str(&format!(",{}", a[j]));
                }
                for j in 0..3 {
                    csv.push_str(&format!(",{}", tangent[j]));
                }
                csv.push('\n');
            }
        }
        other => {
            return Err(Failure::config(format!(
                "unknown profile id {other:?}; known: potential-axis, spinor-ray, hopf-tangents"
            )));
        }
    }

    match &args.out {
        Some(path) => fs::write(path, csv.as_bytes())
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
