//! Command-line front end: configuration parsing, experiment dispatch,
//! deterministic CSV emission.
//!
//! Configuration precedence: flags override config-file values, the config
//! file overrides the `REQCSIM_SEED` environment default for seeds, and
//! built-in defaults fill the rest. Output CSVs are byte-identical for
//! identical configuration and seed, independent of `--jobs`.

use clap::{Args, Parser, Subcommand};

use reqsim::experiments::CpsVariant;
use reqsim_cli::commands::{self, RunError, RunResult};
use reqsim_cli::config::{
    parse_f64_list, parse_usize_list, resolve, seed_from_env, CatParityConfig, ConfigFile,
    SweepConfig, UsageError, UsageResult, YieldConfig,
};

#[derive(Parser)]
#[command(
    name = "reqsim",
    version,
    about = "Pulse-level simulator for rare-earth-ion quantum computing registers",
    propagate_version = true
)]
struct Cli {
    /// Flat `key = value` configuration file; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,

    /// Worker threads for experiment evaluation [default: all cores].
    /// Results are identical for any value.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep worst-case controlled-phase-shift fidelity over a
    /// (detuning, Rabi-ratio) grid; writes `delta,omega,fidelity` CSV.
    FidelitySweep(SweepArgs),
    /// Run the gate reference-equivalence and truth-table suites.
    GateCheck(GateCheckArgs),
    /// Cat-state parity oscillation with ensemble averaging; writes
    /// `phi,mean_excited,parity` CSV.
    CatParity(CatParityArgs),
    /// Monte Carlo instance-yield scaling; writes `n,seed,instance_count`
    /// CSV and prints the fitted slope.
    Yield(YieldArgs),
    /// Run the numerical invariant self-tests.
    Selftest(SelftestArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    /// Gate variant: simple | symmetrized | symmetrized_bb1
    /// [default: symmetrized_bb1].
    #[arg(long)]
    variant: Option<String>,
    /// Dipole coupling g in units of the Rabi frequency [default: 100].
    /// Config key: `coupling`.
    #[arg(long)]
    g: Option<f64>,
    /// Smallest detuning [default: -0.05].
    #[arg(long)]
    delta_min: Option<f64>,
    /// Largest detuning [default: 0.05].
    #[arg(long)]
    delta_max: Option<f64>,
    /// Detuning grid step [default: 0.0025].
    #[arg(long)]
    delta_step: Option<f64>,
    /// Smallest Rabi ratio [default: 0.85 composite, 0.97 simple].
    #[arg(long)]
    omega_min: Option<f64>,
    /// Largest Rabi ratio [default: 1.15 composite, 1.03 simple].
    #[arg(long)]
    omega_max: Option<f64>,
    /// Rabi-ratio grid step [default: 0.005].
    #[arg(long)]
    omega_step: Option<f64>,
    /// CSV output path (required).
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GateCheckArgs {
    /// Dipole coupling used by the checks [default: 100].
    #[arg(long)]
    g: Option<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CatParityArgs {
    /// Number of qubits in the star register [default: 4].
    #[arg(long)]
    n: Option<usize>,
    /// Rotation angles: `start:stop:step` or a comma list
    /// [default: 0:3.2:0.1].
    #[arg(long)]
    phis: Option<String>,
    /// Half-width of the uniform detuning distribution [default: 0].
    #[arg(long)]
    delta_width: Option<f64>,
    /// Relative half-width of the uniform Rabi-ratio distribution
    /// [default: 0].
    #[arg(long)]
    omega_width: Option<f64>,
    /// Smallest coupling of the log-uniform range [default: 100].
    #[arg(long)]
    g_min: Option<f64>,
    /// Largest coupling of the log-uniform range [default: 100].
    #[arg(long)]
    g_max: Option<f64>,
    /// Number of sampled instances [default: 1].
    #[arg(long)]
    instances: Option<usize>,
    /// Master seed [default: env REQCSIM_SEED, else 0].
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path (required).
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct YieldArgs {
    /// Number of dopant ions in the box [default: 20000].
    #[arg(long)]
    ion_count: Option<usize>,
    /// Side length of the cubic box [default: 1].
    #[arg(long)]
    box_side: Option<f64>,
    /// Dipole constant C in g = C / r^3 [default: 1].
    #[arg(long)]
    dipole_constant: Option<f64>,
    /// Probability that an ion belongs to one given channel [default: 0.05].
    #[arg(long)]
    channel_probability: Option<f64>,
    /// Coupling threshold g_t [default: 4e4].
    #[arg(long)]
    threshold: Option<f64>,
    /// Include the dipolar angular factor (1 - 3 cos^2 theta) in couplings
    /// [default: false].
    #[arg(long)]
    angular_factor: Option<bool>,
    /// Register sizes, comma separated [default: 2,3,4].
    #[arg(long)]
    n_values: Option<String>,
    /// Number of seeds per register size [default: 10].
    #[arg(long)]
    n_seeds: Option<usize>,
    /// Master seed; run k uses seed + k [default: env REQCSIM_SEED, else 0].
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path (required).
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SelftestArgs {
    /// Seed for the randomized suites [default: env REQCSIM_SEED, else 0].
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config_file(path: &Option<String>) -> UsageResult<ConfigFile> {
    match path {
        None => Ok(ConfigFile::empty()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| UsageError(format!("config file {p}: {e}")))?;
            ConfigFile::parse(&text)
        }
    }
}

fn require_output(flag: Option<String>, file: &ConfigFile) -> UsageResult<String> {
    flag.or_else(|| file.get("output").map(str::to_string))
        .ok_or_else(|| UsageError("missing required `output` path".into()))
}

fn resolve_sweep(args: SweepArgs, file: &ConfigFile) -> UsageResult<SweepConfig> {
    file.check_keys(SweepConfig::FILE_KEYS)?;
    let variant_raw = args
        .variant
        .or_else(|| file.get("variant").map(str::to_string))
        .unwrap_or_else(|| "symmetrized_bb1".to_string());
    let variant = CpsVariant::parse(&variant_raw)
        .ok_or_else(|| UsageError(format!("variant: unknown value `{variant_raw}`")))?;
    // `coupling` is the canonical file key; `g` is accepted as an alias.
    let coupling_file = match file.parse_value::<f64>("coupling")? {
        Some(v) => Some(v),
        None => file.parse_value::<f64>("g")?,
    };
    let (omega_min_default, omega_max_default) = match variant {
        CpsVariant::Simple => (0.97, 1.03),
        _ => (0.85, 1.15),
    };
    Ok(SweepConfig {
        variant,
        coupling: args.g.or(coupling_file).unwrap_or(100.0),
        delta_min: resolve(args.delta_min, file.parse_value("delta_min"), -0.05)?,
        delta_max: resolve(args.delta_max, file.parse_value("delta_max"), 0.05)?,
        delta_step: resolve(args.delta_step, file.parse_value("delta_step"), 0.0025)?,
        omega_min: resolve(
            args.omega_min,
            file.parse_value("omega_min"),
            omega_min_default,
        )?,
        omega_max: resolve(
            args.omega_max,
            file.parse_value("omega_max"),
            omega_max_default,
        )?,
        omega_step: resolve(args.omega_step, file.parse_value("omega_step"), 0.005)?,
        output: require_output(args.output, file)?,
    })
}

fn resolve_cat(args: CatParityArgs, file: &ConfigFile) -> UsageResult<CatParityConfig> {
    file.check_keys(CatParityConfig::FILE_KEYS)?;
    let phis_raw = args
        .phis
        .or_else(|| file.get("phis").map(str::to_string))
        .unwrap_or_else(|| "0:3.2:0.1".to_string());
    let mut phis = parse_f64_list("phis", &phis_raw)?;
    // Rows are emitted in ascending phi order.
    phis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    phis.dedup();
    Ok(CatParityConfig {
        n: resolve(args.n, file.parse_value("n"), 4)?,
        phis,
        delta_width: resolve(args.delta_width, file.parse_value("delta_width"), 0.0)?,
        omega_width: resolve(args.omega_width, file.parse_value("omega_width"), 0.0)?,
        g_min: resolve(args.g_min, file.parse_value("g_min"), 100.0)?,
        g_max: resolve(args.g_max, file.parse_value("g_max"), 100.0)?,
        instances: resolve(args.instances, file.parse_value("instances"), 1)?,
        seed: resolve(
            args.seed,
            file.parse_value("seed"),
            seed_from_env().unwrap_or(0),
        )?,
        output: require_output(args.output, file)?,
    })
}

fn resolve_yield(args: YieldArgs, file: &ConfigFile) -> UsageResult<YieldConfig> {
    file.check_keys(YieldConfig::FILE_KEYS)?;
    let n_values_raw = args
        .n_values
        .or_else(|| file.get("n_values").map(str::to_string))
        .unwrap_or_else(|| "2,3,4".to_string());
    // Rows are emitted in ascending register-size order.
    let mut n_values = parse_usize_list("n_values", &n_values_raw)?;
    n_values.sort_unstable();
    n_values.dedup();
    Ok(YieldConfig {
        ion_count: resolve(args.ion_count, file.parse_value("ion_count"), 20_000)?,
        box_side: resolve(args.box_side, file.parse_value("box_side"), 1.0)?,
        dipole_constant: resolve(
            args.dipole_constant,
            file.parse_value("dipole_constant"),
            1.0,
        )?,
        channel_probability: resolve(
            args.channel_probability,
            file.parse_value("channel_probability"),
            0.05,
        )?,
        threshold: resolve(args.threshold, file.parse_value("threshold"), 4.0e4)?,
        angular_factor: resolve(
            args.angular_factor,
            file.parse_value("angular_factor"),
            false,
        )?,
        n_values,
        n_seeds: resolve(args.n_seeds, file.parse_value("n_seeds"), 10)?,
        seed: resolve(
            args.seed,
            file.parse_value("seed"),
            seed_from_env().unwrap_or(0),
        )?,
        output: require_output(args.output, file)?,
    })
}

fn dispatch(cli: Cli) -> Result<RunResult, UsageError> {
    let file = load_config_file(&cli.config)?;
    match cli.command {
        Command::FidelitySweep(args) => {
            let cfg = resolve_sweep(args, &file)?;
            Ok(commands::run_fidelity_sweep(&cfg))
        }
        Command::GateCheck(args) => {
            file.check_keys(&["g", "coupling"])?;
            let coupling_file = match file.parse_value::<f64>("coupling")? {
                Some(v) => Some(v),
                None => file.parse_value::<f64>("g")?,
            };
            let g = args.g.or(coupling_file).unwrap_or(100.0);
            Ok(commands::run_gate_check(g))
        }
        Command::CatParity(args) => {
            let cfg = resolve_cat(args, &file)?;
            Ok(commands::run_cat_parity(&cfg))
        }
        Command::Yield(args) => {
            let cfg = resolve_yield(args, &file)?;
            Ok(commands::run_yield(&cfg))
        }
        Command::Selftest(args) => {
            file.check_keys(&["seed"])?;
            let seed = resolve(
                args.seed,
                file.parse_value("seed"),
                seed_from_env().unwrap_or(0),
            )?;
            Ok(commands::run_selftest(seed))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("reqsim: thread pool: {e}");
            std::process::exit(2);
        }
    };

    let code = match pool.install(|| dispatch(cli)) {
        Err(usage) => {
            eprintln!("reqsim: {usage}");
            2
        }
        Ok(Ok(())) => 0,
        Ok(Err(RunError::Io(msg))) => {
            eprintln!("reqsim: I/O error: {msg}");
            2
        }
        Ok(Err(RunError::Physics(msg))) => {
            eprintln!("reqsim: {msg}");
            3
        }
    };
    std::process::exit(code);
}
