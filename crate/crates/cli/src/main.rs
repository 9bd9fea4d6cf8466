use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use pfc_core::gradient_structure::{
    bdf6_counterexample, bk_lambda_min, structure, verify_identity,
};
use pfc_core::harness::io::snapshot_file_name;
use pfc_core::harness::{
    convergence_study, crystal_growth, verify_all, write_csv, write_snapshot, ConfigFile,
    ConvergenceRow, ConvergenceSetup, Fault, GrowthSetup, NucleationSpec, SplitMix64,
    VerifyOptions,
};
use pfc_core::kernels::{bdf_kernels, doc_kernels};
use pfc_core::matrix_analysis::{eig_report, m1};
use pfc_core::{EigReport, Grid2D, StartupStrategy};

#[derive(Parser)]
#[command(
    name = "pfc",
    version,
    about = "BDF-k phase field crystal solver and verification tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print BDF kernels as fractions and, optionally, DOC kernels.
    Kernels {
        #[arg(long)]
        k: usize,
        /// Number of DOC kernels to print.
        #[arg(long)]
        doc: Option<usize>,
    },
    /// Run invariant checks.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// Manufactured-solution convergence study.
    Converge(ConvergeArgs),
    /// Crystal growth from seeded nucleation patches.
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Gradient-structure identity on random sequences and the λ_min bounds.
    Gradient {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 120)]
        len: usize,
        /// Matrix order for the λ_min comparison.
        #[arg(long, default_value_t = 500)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Smallest order at which the BDF-6 quadratic form is indefinite.
    Bdf6 {
        #[arg(long, default_value_t = 200)]
        max_n: usize,
    },
    /// Eigenvalue report for B_k and the DOC matrix.
    Eigs {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 300)]
        m: usize,
    },
    /// Every suite; exits nonzero if any check fails.
    All {
        /// Multiplies every tolerance; 0 exposes rounding-level residuals.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Perturb one DOC kernel to exercise failure reporting.
        #[arg(long)]
        corrupt_doc: bool,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
    },
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, num_args = 1.., default_values_t = [3, 4, 5])]
    k: Vec<usize>,
    /// Step counts.
    #[arg(long = "N", num_args = 1.., default_values_t = [10, 20, 40, 80, 160])]
    steps: Vec<usize>,
    /// Grid points per direction.
    #[arg(long, default_value_t = 128)]
    grid: usize,
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long)]
    dealias: bool,
    /// Writes convergence.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct SimulateArgs {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,
    #[arg(long, num_args = 2, value_names = ["LX", "LY"])]
    domain: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    dealias: bool,
    /// `exact` is rejected here: the growth problem has no closed form.
    #[arg(long)]
    startup: Option<StartupStrategy>,
    #[arg(long, num_args = 1..)]
    snapshots: Option<Vec<f64>>,
    /// 256² on (0,256)², T = 1000 instead of the 128² desk preset.
    #[arg(long)]
    full_scale: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Kernels { k, doc } => kernels(k, doc)?,
        Command::Verify { what } => return verify(what),
        Command::Converge(args) => converge(&args)?,
        Command::Simulate(args) => simulate(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn kernels(k: usize, doc: Option<usize>) -> Result<()> {
    let b = bdf_kernels(k)?;
    for (i, c) in b.coefficients().iter().enumerate() {
        println!("b{i} = {c}");
    }
    if let Some(m) = doc {
        for (j, t) in doc_kernels(k, m)?.values().iter().enumerate() {
            println!("theta{j} = {t:.16e}");
        }
    }
    Ok(())
}

fn verify(what: VerifyCommand) -> Result<ExitCode> {
    match what {
        VerifyCommand::Gradient {
            k,
            trials,
            len,
            m,
            seed,
        } => {
            let mut rng = SplitMix64::new(seed);
            let mut worst = 0.0f64;
            for _ in 0..trials {
                let v: Vec<f64> = (0..len).map(|_| rng.standard_normal()).collect();
                worst = worst.max(verify_identity(k, &v, len - 1)?);
            }
            let sigma = structure(k)?.sigma_f64();
            let m1k = m1(k)?;
            let lmin = bk_lambda_min(k, m)?;
            println!("max relative identity residual over {trials} sequences of length {len}: {worst:.3e}");
            println!("lambda_min(B_{k}) at order {m} = {lmin:.12}");
            println!("  sigma = {sigma:.12}  margin {:+.3e}", lmin - sigma);
            println!("  m1    = {m1k:.12}  margin {:+.3e}", lmin - m1k);
            let ok = worst <= 1e-10 && lmin >= sigma - 1e-8 && lmin >= m1k - 1e-6;
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        VerifyCommand::Bdf6 { max_n } => {
            let (size, l) = bdf6_counterexample(max_n)?;
            println!("B_6 is indefinite from order {size}: lambda_min = {l:.12e}");
        }
        VerifyCommand::Eigs { k, m } => {
            let r = eig_report(k, m)?;
            println!("{r}");
            println!("{}", EigReport::CSV_HEADER);
            println!("{}", r.csv_row());
        }
        VerifyCommand::All {
            tolerance_scale,
            corrupt_doc,
            seed,
        } => {
            let opts = VerifyOptions {
                tolerance_scale,
                fault: corrupt_doc.then_some(Fault::CorruptDocKernel),
                seed,
            };
            let report = verify_all(&opts);
            println!("{report}");
            return Ok(if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn converge(args: &ConvergeArgs) -> Result<()> {
    let setup = ConvergenceSetup {
        grid_points: args.grid,
        epsilon: args.eps,
        t_end: args.t_end,
        dealias: args.dealias,
        ..ConvergenceSetup::default()
    };
    let rows = convergence_study(&setup, &args.k, &args.steps)?;
    for r in &rows {
        println!("{r}");
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("convergence.csv");
        let mut text = format!("{}\n", ConvergenceRow::CSV_HEADER);
        for r in &rows {
            text.push_str(&r.csv_row());
            text.push('\n');
        }
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

/// Everything `simulate` needs after presets, the config file and flags
/// have been merged.
#[derive(Debug)]
struct SimulateSettings {
    setup: GrowthSetup,
    spec: NucleationSpec,
    out: PathBuf,
}

const CONFIG_KEYS: &[&str] = &[
    "k",
    "eps",
    "tau",
    "T",
    "grid",
    "domain",
    "seed",
    "out",
    "strict",
    "dealias",
    "startup",
    "snapshots",
    "full_scale",
];

fn pair<T: Copy>(v: &[T], what: &str) -> Result<(T, T)> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => bail!("{what} needs two values, got {}", v.len()),
    }
}

fn resolve(args: &SimulateArgs) -> Result<SimulateSettings> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    file.reject_unknown(CONFIG_KEYS)?;

    let full = args.full_scale || file.get::<bool>("full_scale")?.unwrap_or(false);
    let k = match args.k {
        Some(k) => k,
        None => file.get("k")?.unwrap_or(3),
    };
    let mut setup = if full {
        GrowthSetup::full(k)?
    } else {
        GrowthSetup::desk(k)?
    };

    if let Some(eps) = args.eps.or(file.get("eps")?) {
        setup.config.epsilon = eps;
    }
    if let Some(tau) = args.tau.or(file.get("tau")?) {
        setup.config.tau = tau;
    }
    if let Some(t) = args.t_end.or(file.get("T")?) {
        setup.t_end = t;
    }
    let grid = match &args.grid {
        Some(g) => Some(g.clone()),
        None => file.get_list::<usize>("grid")?,
    };
    let domain = match &args.domain {
        Some(d) => Some(d.clone()),
        None => file.get_list::<f64>("domain")?,
    };
    if grid.is_some() || domain.is_some() {
        let (nx, ny) = grid.map_or(Ok((setup.grid.nx, setup.grid.ny)), |g| pair(&g, "grid"))?;
        let (lx, ly) = domain.map_or(Ok((setup.grid.lx, setup.grid.ly)), |d| pair(&d, "domain"))?;
        setup.grid = Grid2D::new(nx, ny, lx, ly)?;
    }
    setup.config.strict = args.strict || file.get::<bool>("strict")?.unwrap_or(false);
    setup.config.dealias = args.dealias || file.get::<bool>("dealias")?.unwrap_or(false);
    if let Some(s) = args.startup.or(file.get("startup")?) {
        if s == StartupStrategy::Exact {
            bail!(
                "exact start-up needs a closed-form solution; use `bootstrap` for crystal growth"
            );
        }
        setup.config.startup = s;
    }
    if let Some(times) = args.snapshots.clone().or(file.get_list("snapshots")?) {
        setup.snapshot_times = times;
    }
    setup.snapshot_times.retain(|&t| t <= setup.t_end);

    let seed = match args.seed {
        Some(s) => s,
        None => file.get("seed")?.unwrap_or(1),
    };
    let mut spec = NucleationSpec::full_scale(seed);
    // Patch centers follow the domain; the full-scale layout sits on (0,256)².
    for p in &mut spec.patches {
        p.center = (
            p.center.0 * setup.grid.lx / 256.0,
            p.center.1 * setup.grid.ly / 256.0,
        );
    }
    spec.validate(&setup.grid)?;
    setup.config.validate()?;

    let out = match &args.out {
        Some(o) => o.clone(),
        None => file
            .get::<PathBuf>("out")?
            .unwrap_or_else(|| PathBuf::from("pfc_out")),
    };
    Ok(SimulateSettings { setup, spec, out })
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let s = resolve(args)?;
    let dir: &Path = &s.out;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    info!(
        "BDF-{} on {}x{} over ({}, {}), eps = {}, tau = {}, T = {}",
        s.setup.config.k,
        s.setup.grid.nx,
        s.setup.grid.ny,
        s.setup.grid.lx,
        s.setup.grid.ly,
        s.setup.config.epsilon,
        s.setup.config.tau,
        s.setup.t_end
    );
    let out = crystal_growth(&s.spec, &s.setup, |t, phi| {
        let path = dir.join(snapshot_file_name(t));
        info!("t = {t}: {}", path.display());
        write_snapshot(&path, phi, t)
    })?;
    let csv = dir.join("series.csv");
    write_csv(&csv, &out.records)?;
    let last = out.records.last().expect("at least the initial record");
    println!("steps            {}", last.step);
    println!("final energy     {:.12e}", last.energy);
    println!("volume drift     {:.3e}", out.max_volume_drift);
    println!("snapshots        {}", out.snapshots.len());
    println!("series           {}", csv.display());
    if out.linf_exceeded {
        log::warn!("max |phi| exceeded ten times its initial value");
    }
    Ok(())
}
