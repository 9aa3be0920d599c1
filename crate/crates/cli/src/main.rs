//! Reproducible experiment runner.
//!
//! Every subcommand reads an optional TOML configuration (flags override the
//! file), derives all randomness from one master seed, writes its artifacts
//! into the output directory, and finishes with a manifest recording the
//! effective configuration and a content hash per artifact. Re-running with
//! the same inputs reproduces every byte.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nonreg::equivalence::{forward_transform, thin_ppp, BlockPartition, PipelineOptions};
use nonreg::estimators::{pilot_estimate, PilotData};
use nonreg::metrics::{
    block_extreme_hellinger, counterexample_power, extreme_law_check,
    hellinger_boundary_closed_form, hellinger_ppp_pair, lower_bound_pair, rate_study,
    RateExperiment, RateStudyConfig, RateTarget,
};
use nonreg::model::{
    DesignSpec, ErrorDensity, ExperimentSpec, Kernel, ParamFamily, ParameterFunction,
};
use nonreg::samplers::{
    ppp_from_csv, ppp_to_csv, regression_from_csv, regression_to_csv, sample_ppp,
    sample_ppp_blockwise, sample_ppp_sequential, sample_regression, Domain, IntensityFunction,
    Side,
};
use nonreg::Error;

#[derive(Parser)]
#[command(
    name = "nonreg",
    about = "Non-regular regression / boundary point process toolkit",
    version
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: env NONREG_OUTPUT_DIR, then "./out").
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample size n.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a regression sample and write it as CSV.
    SampleRegression,
    /// Draw a boundary point process realization and write it as CSV.
    SamplePpp(SamplePppArgs),
    /// Run the forward equivalence pipeline on a sample file (no θ input).
    Transform(TransformArgs),
    /// Pilot-estimate θ and θ′ on the block centers from a sample file.
    Estimate(EstimateArgs),
    /// Hellinger distance between two boundary experiments.
    Hellinger(HellingerArgs),
    /// Extreme-law identity check on the block-constant experiment.
    ExtremeCheck(ExtremeCheckArgs),
    /// Exact-vs-exponential block extreme Hellinger distances.
    BlockHellinger(BlockHellingerArgs),
    /// Monte Carlo risk slopes of the pilot estimator.
    RateStudy(RateStudyArgs),
    /// Two-point lower-bound construction.
    LowerBound(LowerBoundArgs),
    /// Power of the support test in the regularity-one counterexample.
    Counterexample(CounterexampleArgs),
    /// Thin a point process file into two independent halves.
    Thin(ThinArgs),
    /// Re-run the invocation recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Serialize, Deserialize)]
struct ReplayArgs {
    /// manifest.json written by a previous run.
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct SamplePppArgs {
    /// Which boundary process: lower (X₁) or upper (X₂).
    #[arg(long, default_value = "lower")]
    side: String,
    /// Use the sequential exponential-spacings construction.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Serialize, Deserialize)]
struct TransformArgs {
    /// Regression sample CSV (as written by sample-regression).
    #[arg(long)]
    sample: PathBuf,
    /// Override the number of bins m.
    #[arg(long)]
    m: Option<usize>,
    /// Pilot bandwidth constant.
    #[arg(long, default_value_t = 1.0)]
    h_const: f64,
}

#[derive(Args, Serialize, Deserialize)]
struct EstimateArgs {
    /// Regression sample CSV; alternatively give --x1 and --x2.
    #[arg(long, conflicts_with_all = ["x1", "x2"])]
    sample: Option<PathBuf>,
    /// Lower process CSV (point process experiment).
    #[arg(long, requires = "x2")]
    x1: Option<PathBuf>,
    /// Upper process CSV.
    #[arg(long, requires = "x1")]
    x2: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    h_const: f64,
}

#[derive(Args, Serialize, Deserialize)]
struct HellingerArgs {
    /// Vertical shift defining θ₂ = θ + shift.
    #[arg(long, default_value_t = 0.01)]
    shift: f64,
    /// Optional TOML file holding a [theta] table for θ₂.
    #[arg(long)]
    theta2: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct ExtremeCheckArgs {
    /// Number of blocks.
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Realizations per side.
    #[arg(long, default_value_t = 250)]
    reps: u64,
}

#[derive(Args, Serialize, Deserialize)]
struct BlockHellingerArgs {
    /// Block sizes l (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [50usize, 200, 800])]
    l: Vec<usize>,
    /// Shift Δ₀ of the W-density support.
    #[arg(long, default_value_t = 0.0)]
    delta0: f64,
}

#[derive(Args, Serialize, Deserialize)]
struct RateStudyArgs {
    /// regression | ppp
    #[arg(long, default_value = "regression")]
    experiment: String,
    /// value | derivative
    #[arg(long, default_value = "value")]
    target: String,
    #[arg(long, value_delimiter = ',', default_values_t = [500usize, 2000, 8000])]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 0.5)]
    x0: f64,
    #[arg(long, default_value_t = 1.0)]
    h_const: f64,
}

#[derive(Args, Serialize, Deserialize)]
struct LowerBoundArgs {
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    #[arg(long, default_value_t = 1.0)]
    l_norm: f64,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    #[arg(long, default_value_t = 0.5)]
    x0: f64,
}

#[derive(Args, Serialize, Deserialize)]
struct CounterexampleArgs {
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
}

#[derive(Args, Serialize, Deserialize)]
struct ThinArgs {
    /// Point process CSV (as written by sample-ppp or transform).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// File-level configuration; every field has a default so the CLI runs
/// without a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FileConfig {
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    output_dir: Option<String>,
    #[serde(default = "default_experiment")]
    experiment: ExperimentSpec,
    #[serde(default)]
    theta: Option<ParameterFunction>,
}

fn default_seed() -> u64 {
    7
}

fn default_experiment() -> ExperimentSpec {
    ExperimentSpec::new(
        100,
        1.0,
        1.0,
        DesignSpec::uniform(),
        ErrorDensity::uniform(),
    )
    .unwrap()
}

impl Default for FileConfig {
    fn default() -> Self {
        FileConfig {
            seed: default_seed(),
            output_dir: None,
            experiment: default_experiment(),
            theta: None,
        }
    }
}

/// Effective run configuration echoed into the manifest.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    subcommand: String,
    seed: u64,
    output_dir: String,
    experiment: ExperimentSpec,
    theta: ParameterFunction,
    extra: serde_json::Value,
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    config: RunConfig,
    artifacts: Vec<ManifestEntry>,
}

struct Runner {
    out_dir: PathBuf,
    artifacts: Vec<ManifestEntry>,
}

impl Runner {
    fn new(out_dir: &Path) -> Result<Self, Error> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Runner {
            out_dir: out_dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Error> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        self.artifacts.push(ManifestEntry {
            file: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    fn finish(mut self, config: RunConfig) -> Result<(), Error> {
        self.artifacts.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = Manifest {
            config,
            artifacts: self.artifacts,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(self.out_dir.join("manifest.json"), text)?;
        Ok(())
    }
}

fn parse_side(s: &str) -> Result<Side, Error> {
    match s {
        "lower" => Ok(Side::Lower),
        "upper" => Ok(Side::Upper),
        _ => Err(Error::Validation(format!(
            "side must be lower or upper, got {s:?}"
        ))),
    }
}

fn json_pretty<T: Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))
}

/// Rebuilds the command recorded in a manifest from its name and argument
/// echo.
fn command_from_manifest(name: &str, extra: serde_json::Value) -> Result<Command, Error> {
    let args = |v: serde_json::Value| v;
    let bad = |e: serde_json::Error| Error::Validation(format!("manifest args: {e}"));
    Ok(match name {
        "sample-regression" => Command::SampleRegression,
        "sample-ppp" => Command::SamplePpp(serde_json::from_value(args(extra)).map_err(bad)?),
        "transform" => Command::Transform(serde_json::from_value(args(extra)).map_err(bad)?),
        "estimate" => Command::Estimate(serde_json::from_value(args(extra)).map_err(bad)?),
        "hellinger" => Command::Hellinger(serde_json::from_value(args(extra)).map_err(bad)?),
        "extreme-check" => Command::ExtremeCheck(serde_json::from_value(args(extra)).map_err(bad)?),
        "block-hellinger" => {
            Command::BlockHellinger(serde_json::from_value(args(extra)).map_err(bad)?)
        }
        "rate-study" => Command::RateStudy(serde_json::from_value(args(extra)).map_err(bad)?),
        "lower-bound" => Command::LowerBound(serde_json::from_value(args(extra)).map_err(bad)?),
        "counterexample" => {
            Command::Counterexample(serde_json::from_value(args(extra)).map_err(bad)?)
        }
        "thin" => Command::Thin(serde_json::from_value(args(extra)).map_err(bad)?),
        other => {
            return Err(Error::Validation(format!(
                "manifest names unknown subcommand {other:?}"
            )))
        }
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut file_cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| Error::Validation(format!("config: {e}")))?
        }
        None => FileConfig::default(),
    };
    if let Some(seed) = cli.seed {
        file_cfg.seed = seed;
    }
    if let Some(n) = cli.n {
        file_cfg.experiment.n = n;
    }
    let out_dir = cli
        .output_dir
        .clone()
        .or_else(|| file_cfg.output_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("NONREG_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    // a replay swaps in the recorded configuration and command wholesale
    let command;
    if let Command::Replay(replay) = &cli.command {
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&replay.manifest)?)
                .map_err(|e| Error::Validation(format!("manifest: {e}")))?;
        let config = &manifest["config"];
        file_cfg.seed = config["seed"]
            .as_u64()
            .ok_or_else(|| Error::Validation("manifest misses seed".into()))?;
        file_cfg.experiment = serde_json::from_value(config["experiment"].clone())
            .map_err(|e| Error::Validation(format!("manifest experiment: {e}")))?;
        file_cfg.theta = Some(
            serde_json::from_value(config["theta"].clone())
                .map_err(|e| Error::Validation(format!("manifest theta: {e}")))?,
        );
        let name = config["subcommand"]
            .as_str()
            .ok_or_else(|| Error::Validation("manifest misses subcommand".into()))?;
        command = command_from_manifest(name, config["extra"].clone())?;
    } else {
        command = match cli.command {
            Command::Replay(_) => unreachable!(),
            other => other,
        };
    }

    // re-validate after overrides
    let spec = ExperimentSpec::new(
        file_cfg.experiment.n,
        file_cfg.experiment.c_theta,
        file_cfg.experiment.alpha,
        file_cfg.experiment.design,
        file_cfg.experiment.error.clone(),
    )?;
    let theta = match &file_cfg.theta {
        Some(t) => t.clone(),
        None => ParameterFunction::zero(spec.c_theta, spec.alpha),
    };
    let seed = file_cfg.seed;
    let mut runner = Runner::new(&out_dir)?;
    let extra;

    let name = match &command {
        Command::SampleRegression => {
            let s = sample_regression(&theta, &spec, seed)?;
            runner.write("regression.csv", &regression_to_csv(&s))?;
            extra = serde_json::json!({});
            "sample-regression"
        }
        Command::SamplePpp(args) => {
            let side = parse_side(&args.side)?;
            let p = if args.sequential {
                sample_ppp_sequential(&theta, &spec, side, seed)?
            } else {
                let dom = Domain::for_spec(&spec);
                let lam = match side {
                    Side::Lower => IntensityFunction::boundary_lower(
                        theta.clone(),
                        spec.design,
                        spec.n as f64 * spec.error.jump_right(),
                        dom,
                    ),
                    Side::Upper => IntensityFunction::boundary_upper(
                        theta.clone(),
                        spec.design,
                        spec.n as f64 * spec.error.jump_left(),
                        dom,
                    ),
                };
                sample_ppp(&lam, seed)?
            };
            runner.write("ppp.csv", &ppp_to_csv(&p, spec.spec_hash(), false))?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "sample-ppp"
        }
        Command::Transform(args) => {
            // parameter-free by interface: only the sample file and the spec
            let sample = regression_from_csv(&std::fs::read_to_string(&args.sample)?)?;
            if sample.n != spec.n {
                return Err(Error::Validation(format!(
                    "sample file has n = {}, config says {}",
                    sample.n, spec.n
                )));
            }
            let opts = PipelineOptions {
                m_override: args.m,
                bandwidth_const: args.h_const,
                ..Default::default()
            };
            let out = forward_transform(&sample, &spec, &opts, seed)?;
            runner.write("x1.csv", &ppp_to_csv(&out.x1, spec.spec_hash(), true))?;
            runner.write("x2.csv", &ppp_to_csv(&out.x2, spec.spec_hash(), true))?;
            runner.write("transform.json", &json_pretty(&out.sidecar)?)?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "transform"
        }
        Command::Estimate(args) => {
            let m = args
                .m
                .unwrap_or_else(|| nonreg::equivalence::default_m(spec.n, spec.alpha));
            let part = BlockPartition::intervals_only(m)?;
            let pilot = match (&args.sample, &args.x1, &args.x2) {
                (Some(sample_path), None, None) => {
                    let sample = regression_from_csv(&std::fs::read_to_string(sample_path)?)?;
                    if sample.n != spec.n {
                        return Err(Error::Validation(format!(
                            "sample file has n = {}, config says {}",
                            sample.n, spec.n
                        )));
                    }
                    pilot_estimate(
                        &PilotData::Regression(&sample),
                        spec.c_theta,
                        spec.alpha,
                        sample.n,
                        args.h_const,
                        &part.centers(),
                    )?
                }
                (None, Some(p1), Some(p2)) => {
                    let x1 = ppp_from_csv(&std::fs::read_to_string(p1)?)?;
                    let x2 = ppp_from_csv(&std::fs::read_to_string(p2)?)?;
                    pilot_estimate(
                        &PilotData::Ppp(&x1, &x2),
                        spec.c_theta,
                        spec.alpha,
                        spec.n,
                        args.h_const,
                        &part.centers(),
                    )?
                }
                _ => {
                    return Err(Error::Validation(
                        "estimate needs either --sample or both --x1 and --x2".into(),
                    ))
                }
            };
            runner.write("pilot.csv", &pilot.csv())?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "estimate"
        }
        Command::Hellinger(args) => {
            let theta2 = match &args.theta2 {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let cfg: FileConfig = toml::from_str(&text)
                        .map_err(|e| Error::Validation(format!("theta2: {e}")))?;
                    cfg.theta
                        .ok_or_else(|| Error::Validation("theta2 file has no [theta]".into()))?
                }
                None => {
                    let mut t2 = theta.clone();
                    if let ParamFamily::Polynomial { coeffs } = &mut t2.family {
                        if coeffs.is_empty() {
                            coeffs.push(0.0);
                        }
                        coeffs[0] += args.shift;
                        t2
                    } else {
                        ParameterFunction::new(
                            ParamFamily::CustomGrid {
                                xs: (0..=2000).map(|i| i as f64 / 2000.0).collect(),
                                values: (0..=2000)
                                    .map(|i| theta.eval(i as f64 / 2000.0) + args.shift)
                                    .collect(),
                            },
                            theta.c_theta,
                            theta.alpha,
                        )?
                    }
                }
            };
            let j = spec.error.total_jump();
            let closed =
                hellinger_boundary_closed_form(&theta, &theta2, spec.n as f64, j, &spec.design)?;
            let dom = Domain::for_spec(&spec);
            let mk = |t: &ParameterFunction, lower: bool| {
                if lower {
                    IntensityFunction::boundary_lower(
                        t.clone(),
                        spec.design,
                        spec.n as f64 * spec.error.jump_right(),
                        dom,
                    )
                } else {
                    IntensityFunction::boundary_upper(
                        t.clone(),
                        spec.design,
                        spec.n as f64 * spec.error.jump_left(),
                        dom,
                    )
                }
            };
            let quad = hellinger_ppp_pair(
                (&mk(&theta, true), &mk(&theta, false)),
                (&mk(&theta2, true), &mk(&theta2, false)),
            )?;
            let report = serde_json::json!({ "closed_form": closed, "quadrature": quad });
            runner.write("hellinger.json", &json_pretty(&report)?)?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "hellinger"
        }
        Command::ExtremeCheck(args) => {
            // step-function mode: the block-constant experiment with levels θ(ξ_k)
            let part = BlockPartition::intervals_only(args.m)?;
            let values: Vec<f64> = part.centers().iter().map(|&x| theta.eval(x)).collect();
            let step =
                ParameterFunction::new(ParamFamily::Step { values }, spec.c_theta, spec.alpha)?;
            let mut reals = Vec::new();
            for i in 0..args.reps {
                for side in [Side::Lower, Side::Upper] {
                    reals.push(sample_ppp_blockwise(
                        &step,
                        args.m,
                        &spec,
                        side,
                        spec.n as f64 / 2.0,
                        nonreg::rng::derive_seed(
                            seed,
                            "extreme-check",
                            2 * i + u64::from(side == Side::Upper),
                        ),
                    )?);
                }
            }
            let report = extreme_law_check(&reals, &step, &part, &spec)?;
            runner.write("extreme-check.json", &json_pretty(&report)?)?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "extreme-check"
        }
        Command::BlockHellinger(args) => {
            let mut rows = Vec::new();
            for &l in &args.l {
                rows.push(serde_json::json!({
                    "l": l,
                    "h_sq": block_extreme_hellinger(l, &spec.error, args.delta0)?,
                }));
            }
            runner.write("block-hellinger.json", &json_pretty(&rows)?)?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "block-hellinger"
        }
        Command::RateStudy(args) => {
            let experiment = match args.experiment.as_str() {
                "regression" => RateExperiment::Regression,
                "ppp" => RateExperiment::PointProcess,
                other => return Err(Error::Validation(format!("unknown experiment {other:?}"))),
            };
            let (target, theory) = match args.target.as_str() {
                "value" => (
                    RateTarget::Value,
                    -2.0 * (2.0 + spec.alpha) / (3.0 + spec.alpha),
                ),
                "derivative" => (
                    RateTarget::Derivative,
                    -2.0 * (1.0 + spec.alpha) / (3.0 + spec.alpha),
                ),
                other => return Err(Error::Validation(format!("unknown target {other:?}"))),
            };
            let cfg = RateStudyConfig {
                experiment,
                target,
                x0: args.x0,
                bandwidth_const: args.h_const,
                theory_slope: theory,
            };
            let result = rate_study(&cfg, &theta, &spec, &args.ns, args.reps, seed)?;
            runner.write("rate-study.csv", &result.csv())?;
            runner.write("rate-study.json", &json_pretty(&result)?)?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "rate-study"
        }
        Command::LowerBound(args) => {
            let kernel = if args.k == 1 {
                Kernel::tilted_in_class(args.s)
            } else {
                Kernel::bump_in_class(args.s)
            };
            let pair = lower_bound_pair(
                args.s,
                args.l_norm,
                args.k,
                spec.n as f64,
                args.j,
                &spec.design,
                args.x0,
                &kernel,
            )?;
            let report = serde_json::json!({
                "h": pair.h,
                "separation": pair.separation,
                "hellinger_sq": pair.hellinger_sq,
                "hellinger": pair.hellinger_sq.sqrt(),
                "theta2": pair.theta2,
            });
            runner.write("lower-bound.json", &json_pretty(&report)?)?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "lower-bound"
        }
        Command::Counterexample(args) => {
            let power = counterexample_power(args.c, spec.n, args.reps, seed)?;
            runner.write("counterexample.json", &json_pretty(&power)?)?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "counterexample"
        }
        Command::Replay(_) => unreachable!("replay resolves before dispatch"),
        Command::Thin(args) => {
            let input = ppp_from_csv(&std::fs::read_to_string(&args.input)?)?;
            let (a, b) = thin_ppp(&input, args.p, seed)?;
            runner.write("thin-a.csv", &ppp_to_csv(&a, spec.spec_hash(), false))?;
            runner.write("thin-b.csv", &ppp_to_csv(&b, spec.spec_hash(), false))?;
            extra = serde_json::to_value(args).map_err(|e| Error::Io(e.to_string()))?;
            "thin"
        }
    };

    runner.finish(RunConfig {
        subcommand: name.to_string(),
        seed,
        output_dir: out_dir.display().to_string(),
        experiment: spec,
        theta,
        extra,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Validation(_) | Error::Infeasible(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
