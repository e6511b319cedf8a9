//! `radon-gap`: compute RKHS norms and second-order Radon-domain total
//! variation of Mahalanobis-Gaussian kernel machines.
//!
//! Every subcommand is a thin adapter over the library; no numeric logic
//! lives here. Exit codes: 0 success, 1 domain error (invalid mathematics,
//! e.g. even dimension or a non-PD metric), 2 usage error (bad flags,
//! unreadable or malformed input files).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use radon_gap::bounds::{certify_preconditions, rtv2_lower_bound, DivergenceBoundInputs};
use radon_gap::experiments::{
    emit_csv, parse_normalization, run_gap_experiment, GapExperimentConfig,
};
use radon_gap::geometry::{collinear_centers, is_beta_delta_separated, is_eta_separated, ConeSpec};
use radon_gap::hermite;
use radon_gap::kernel::{
    harmonic_number, CoefficientSequence, KernelMachine, MachineSpec, MahalanobisMetric,
};
use radon_gap::radon::sphere::SphereRule;
use radon_gap::radon::{rtv2, Normalization};

#[derive(Parser)]
#[command(
    name = "radon-gap",
    version,
    about = "RKHS norms and second-order Radon-domain total variation of Gaussian kernel machines"
)]
struct Cli {
    /// Worker threads for the node-parallel sphere loop
    /// (falls back to RADON_GAP_THREADS, then to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hermite polynomial evaluations and the derived constants.
    Hermite(HermiteArgs),
    /// RKHS norm report for a machine spec (JSON).
    Rkhs(RkhsArgs),
    /// RTV² of a machine spec via sphere quadrature.
    Rtv2(Rtv2Args),
    /// Run the bounded-RKHS / diverging-RTV² gap experiment, writing CSV.
    Gap(GapArgs),
    /// Separation report for a center set (JSON in, JSON out).
    CheckSet(CheckSetArgs),
    /// Certified RTV² divergence lower bound.
    Bound(BoundArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct HermiteSelect {
    /// Evaluate He_n(y): --eval N Y.
    #[arg(long, num_args = 2, value_names = ["N", "Y"])]
    eval: Option<Vec<f64>>,
    /// Roots of He_n.
    #[arg(long, value_name = "N")]
    roots: Option<usize>,
    /// C_d = ∫|He_{d+1}(u) e^{-u²/2}| du (odd d).
    #[arg(long, value_name = "D")]
    cd: Option<usize>,
    /// ρ(d, ε) = ∫_{[-ε,ε]} |He_{d+1}(y) e^{-y²/2}| dy: --rho D EPS.
    #[arg(long, num_args = 2, value_names = ["D", "EPS"])]
    rho: Option<Vec<f64>>,
    /// Peak radius δ'(d) (largest root of He_{d+2}).
    #[arg(long, value_name = "D")]
    delta_peak: Option<usize>,
    /// Minimal δ₀ with tail(δ₀) < ρ/4: --delta-zero D RHO.
    #[arg(long, num_args = 2, value_names = ["D", "RHO"])]
    delta_zero: Option<Vec<f64>>,
}

#[derive(Args)]
struct HermiteArgs {
    #[command(flatten)]
    select: HermiteSelect,
}

#[derive(Args)]
struct RkhsArgs {
    /// Machine spec JSON path (omit when using --harmonic).
    machine: Option<PathBuf>,
    /// Build a collinear harmonic machine with this many centers instead.
    #[arg(long, value_name = "N", conflicts_with = "machine")]
    harmonic: Option<usize>,
    /// Center spacing for --harmonic.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Dimension for --harmonic.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Kernel scale for --harmonic.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Print only rkhs_norm_sq.
    #[arg(long)]
    plain: bool,
}

#[derive(Args)]
struct Rtv2Args {
    /// Machine spec JSON path.
    machine: PathBuf,
    /// Inner-integral tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Sphere rule resolution (product nodes for d = 3, samples for d ≥ 5).
    #[arg(long, default_value_t = 24)]
    resolution: usize,
    /// Monte Carlo seed (d ≥ 5 only).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output scaling: `standard` or `unit-amplitude`.
    #[arg(long, default_value = "standard", value_parser = parse_normalization_arg)]
    normalization: Normalization,
    /// Print only the value.
    #[arg(long)]
    plain: bool,
}

#[derive(Args)]
struct GapArgs {
    /// Experiment config JSON (mirrors the library config fields).
    config: Option<PathBuf>,
    /// Built-in configuration (`d1` or `d3`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Output CSV path.
    #[arg(long, required = true)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckSetArgs {
    /// JSON with fields: centers (array of arrays), beta (array),
    /// delta (number), eta (number, optional).
    set: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    /// Odd dimension.
    #[arg(long)]
    d: usize,
    /// Safe-constant half-width in (0, 1/2].
    #[arg(long)]
    eps: f64,
    /// Cone aperture, at least √3/2.
    #[arg(long)]
    eta: f64,
    /// Machine size (harmonic coefficients 1, 1/2, …, 1/n).
    #[arg(long)]
    n: usize,
    /// Isotropic metric scale m (M_eff = m·I).
    #[arg(long, default_value_t = 1.0)]
    m_scale: f64,
    /// Print only the lower bound.
    #[arg(long)]
    plain: bool,
}

fn parse_normalization_arg(raw: &str) -> Result<Normalization, String> {
    parse_normalization(raw)
}

/// Failures split by exit code.
enum CliError {
    /// Exit 1: mathematically invalid request.
    Domain(String),
    /// Exit 2: malformed invocation or input file.
    Usage(String),
}

impl From<radon_gap::Error> for CliError {
    fn from(e: radon_gap::Error) -> Self {
        match e {
            radon_gap::Error::Spec(_) | radon_gap::Error::Config(_) => Self::Usage(e.to_string()),
            other => Self::Domain(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads.or_else(|| {
        std::env::var("RADON_GAP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    }) {
        // A failure here only means a pool already exists; harmless.
        let _ = rayon_pool(threads);
    }

    let result = match cli.command {
        Command::Hermite(args) => cmd_hermite(args),
        Command::Rkhs(args) => cmd_rkhs(args),
        Command::Rtv2(args) => cmd_rtv2(args),
        Command::Gap(args) => cmd_gap(args),
        Command::CheckSet(args) => cmd_check_set(args),
        Command::Bound(args) => cmd_bound(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn rayon_pool(threads: usize) -> Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn cmd_hermite(args: HermiteArgs) -> Result<(), CliError> {
    let s = args.select;
    if let Some(pair) = s.eval {
        let n = pair[0] as usize;
        println!("{}", hermite::hermite_eval(n, pair[1]));
    } else if let Some(n) = s.roots {
        let roots = hermite::hermite_roots(n).map_err(CliError::from)?;
        let parts: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
        println!("{}", parts.join(", "));
    } else if let Some(d) = s.cd {
        println!("{}", hermite::cd_constant(d).map_err(CliError::from)?.value);
    } else if let Some(pair) = s.rho {
        println!(
            "{}",
            hermite::rho_constant(pair[0] as usize, pair[1]).map_err(CliError::from)?
        );
    } else if let Some(d) = s.delta_peak {
        println!("{}", hermite::delta_peak(d).map_err(CliError::from)?);
    } else if let Some(pair) = s.delta_zero {
        println!(
            "{}",
            hermite::delta_zero(pair[0] as usize, pair[1])
                .map_err(CliError::from)?
                .value
        );
    }
    Ok(())
}

fn load_machine(args: &RkhsArgs) -> Result<KernelMachine, CliError> {
    if let Some(n) = args.harmonic {
        if n == 0 {
            return Err(CliError::Usage("--harmonic needs n >= 1".into()));
        }
        let mut beta = DVector::zeros(args.dim);
        beta[0] = 1.0;
        let centers =
            collinear_centers(&beta, args.delta, 1.0, n).map_err(CliError::from)?;
        let metric =
            MahalanobisMetric::identity(args.dim, args.sigma).map_err(CliError::from)?;
        let coeffs = CoefficientSequence::Harmonic { n }.values();
        KernelMachine::new(metric, centers, coeffs).map_err(CliError::from)
    } else if let Some(path) = &args.machine {
        let spec: MachineSpec = read_json(path)?;
        spec.to_machine().map_err(CliError::from)
    } else {
        Err(CliError::Usage(
            "provide a machine spec path or --harmonic N".into(),
        ))
    }
}

fn cmd_rkhs(args: RkhsArgs) -> Result<(), CliError> {
    let machine = load_machine(&args)?;
    let gram = machine.gram_matrix();
    let min_eig = gram.symmetric_eigen().eigenvalues.min();
    let norm_sq = machine.rkhs_norm_sq();
    if args.plain {
        println!("{norm_sq}");
    } else {
        println!(
            "{}",
            serde_json::json!({
                "rkhs_norm_sq": norm_sq,
                "l1_norm": machine.l1_norm(),
                "gram_min_eig": min_eig,
            })
        );
    }
    Ok(())
}

fn cmd_rtv2(args: Rtv2Args) -> Result<(), CliError> {
    let spec: MachineSpec = read_json(&args.machine)?;
    let machine = spec.to_machine().map_err(CliError::from)?;
    let rule = SphereRule::new(machine.dim(), args.resolution, args.seed)
        .map_err(CliError::from)?;
    let est = rtv2(&machine, &rule, args.tol, args.normalization).map_err(CliError::from)?;
    if args.plain {
        println!("{}", est.value);
    } else {
        println!(
            "{}",
            serde_json::json!({
                "value": est.value,
                "error": est.quadrature_error,
                "n_nodes": est.n_nodes,
            })
        );
    }
    Ok(())
}

fn cmd_gap(args: GapArgs) -> Result<(), CliError> {
    let config = if let Some(name) = &args.preset {
        GapExperimentConfig::preset(name).map_err(CliError::from)?
    } else if let Some(path) = &args.config {
        read_json(path)?
    } else {
        GapExperimentConfig::preset_d1()
    };
    let rows = run_gap_experiment(&config).map_err(CliError::from)?;
    emit_csv(&rows, &args.out).map_err(CliError::from)?;
    let last = rows.last().expect("config validation rejects empty n_list");
    println!(
        "wrote {} rows to {} (d={}, n up to {}, rtv2 {} .. {})",
        rows.len(),
        args.out.display(),
        config.d,
        last.n,
        rows[0].rtv2_value,
        last.rtv2_value
    );
    Ok(())
}

fn cmd_check_set(args: CheckSetArgs) -> Result<(), CliError> {
    #[derive(serde::Deserialize)]
    struct SetSpec {
        centers: Vec<Vec<f64>>,
        beta: Vec<f64>,
        delta: f64,
        #[serde(default)]
        eta: Option<f64>,
    }

    let spec: SetSpec = read_json(&args.set)?;
    let centers: Vec<DVector<f64>> = spec
        .centers
        .iter()
        .map(|c| DVector::from_column_slice(c))
        .collect();
    let beta = DVector::from_column_slice(&spec.beta);
    for (i, c) in centers.iter().enumerate() {
        if c.len() != beta.len() {
            return Err(CliError::Usage(format!(
                "centers[{i}] has {} coordinates, beta has {}",
                c.len(),
                beta.len()
            )));
        }
    }

    let report = match spec.eta {
        Some(eta) => {
            let cone = ConeSpec::new(beta, eta).map_err(CliError::from)?;
            is_eta_separated(&centers, &cone, spec.delta).map_err(CliError::from)?
        }
        None => {
            is_beta_delta_separated(&centers, &beta, spec.delta).map_err(CliError::from)?
        }
    };
    println!(
        "{}",
        serde_json::json!({
            "n": report.n,
            "min_axis_margin": report.min_axis_margin,
            "min_cone_margin": report.min_cone_margin,
            "passes_beta_delta": report.passes_beta_delta,
            "passes_beta_delta_eta": report.passes_beta_delta_eta,
        })
    );
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let params = certify_preconditions(args.d, args.eps, args.eta).map_err(CliError::from)?;
    let metric = MahalanobisMetric::from_matrix(
        nalgebra::DMatrix::identity(args.d, args.d) * args.m_scale,
        1.0,
    )
    .map_err(CliError::from)?;
    let inputs = DivergenceBoundInputs {
        metric,
        d: args.d,
        eta: args.eta,
        rho: params.rho,
        delta: params.delta,
        coeffs: CoefficientSequence::Harmonic { n: args.n },
    };
    let warnings = inputs.validate().map_err(CliError::from)?;
    let bound = rtv2_lower_bound(&inputs, args.n).map_err(CliError::from)?;
    if args.plain {
        println!("{bound}");
    } else {
        println!(
            "{}",
            serde_json::json!({
                "rho": params.rho,
                "delta_prime": params.delta_prime,
                "delta_zero": params.delta_zero,
                "delta": params.delta,
                "l1_norm": harmonic_number(args.n),
                "lower_bound": bound,
                "warnings": warnings,
            })
        );
    }
    Ok(())
}
