use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use narrow_escape_cli::commands::{
    execute, load_manifest, replay_out, with_threads, Command, FluxParams, Method, MfptParams, Numerics, StartPoint,
    SweepParams,
};
use narrow_escape_cli::manifest::RunManifest;
use narrow_escape_cli::validate::{run_suite, McSettings, Suite, DEFAULT_EPS};
use narrow_escape_cli::{exit, CliError};

#[derive(Parser)]
#[command(name = "narrow-escape", version, about = "Mean first passage times through a small window in a disk")]
struct Cli {
    /// Worker threads (defaults to RAYON_NUM_THREADS, then the core count).
    #[arg(long, global = true, env = "RAYON_NUM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One MFPT as a JSON record.
    Mfpt {
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Method::Asymptotic)]
        method: Method,
        /// center | uniform | max | point
        #[arg(long, default_value = "center")]
        start: String,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        diffusivity: f64,
        #[command(flatten)]
        numerics: NumericArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// MFPT table over several windows, methods and starts, as CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Asymptotic, Method::Series])]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',', default_value = "center")]
        starts: Vec<String>,
        #[command(flatten)]
        numerics: NumericArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flux profile across the window, as CSV.
    Flux {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = narrow_escape::DEFAULT_FLUX_TERMS)]
        terms: usize,
        #[arg(long, default_value_t = narrow_escape::DEFAULT_SERIES_TERMS)]
        series_terms: usize,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-method acceptance suite.
    Validate {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPS)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = McSettings::default().paths)]
        paths: usize,
        #[arg(long, default_value_t = McSettings::default().dt)]
        dt: f64,
        #[arg(long, default_value_t = McSettings::default().seed)]
        seed: u64,
    },
    /// Re-runs the command recorded in a manifest or record.
    Replay {
        manifest: PathBuf,
        /// Output path for CSV commands (defaults to the sidecar's target).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct NumericArgs {
    /// Series truncation.
    #[arg(long, default_value_t = Numerics::default().terms)]
    terms: usize,
    /// Monte Carlo paths.
    #[arg(long, default_value_t = Numerics::default().paths)]
    paths: usize,
    /// Monte Carlo base time step.
    #[arg(long, default_value_t = Numerics::default().dt)]
    dt: f64,
    #[arg(long, default_value_t = Numerics::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = Numerics::default().n_r)]
    n_r: usize,
    #[arg(long, default_value_t = Numerics::default().n_theta)]
    n_theta: usize,
}

impl From<NumericArgs> for Numerics {
    fn from(a: NumericArgs) -> Self {
        Numerics { terms: a.terms, paths: a.paths, dt: a.dt, seed: a.seed, n_r: a.n_r, n_theta: a.n_theta }
    }
}

fn run(cmd: Cmd) -> Result<String, CliError> {
    let (command, out) = match cmd {
        Cmd::Mfpt { eps, method, start, r, theta, radius, diffusivity, numerics, out } => {
            let start = StartPoint::parse(&start, r, theta)?;
            let p = MfptParams { eps, method, start, radius, diffusivity, numerics: numerics.into() };
            (Command::Mfpt(p), out)
        }
        Cmd::Sweep { eps, methods, starts, numerics, out } => {
            let starts = starts.iter().map(|s| StartPoint::parse(s, None, None)).collect::<Result<_, _>>()?;
            (Command::Sweep(SweepParams { eps, methods, starts, numerics: numerics.into() }), Some(out))
        }
        Cmd::Flux { eps, terms, series_terms, samples, out } => {
            (Command::Flux(FluxParams { eps, terms, series_terms, samples }), Some(out))
        }
        Cmd::Validate { eps, paths, dt, seed } => {
            let suite = Suite { eps, mc: McSettings { paths, dt, seed } };
            let outcomes = run_suite(&suite, |o| println!("{o}"));
            let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
            return if failed.is_empty() {
                Ok(format!("all {} criteria passed\n", outcomes.len()))
            } else {
                Err(CliError::Validation(format!("criteria {} failed", failed.join(", "))))
            };
        }
        Cmd::Replay { manifest, out } => {
            let m = load_manifest(&manifest)?;
            let out = out.or_else(|| replay_out(&manifest));
            return execute(&m, out.as_deref());
        }
    };
    let seed = command.seed();
    execute(&RunManifest::new(command, seed), out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be ≥ 1".into())),
        Some(n) => with_threads(n, || run(cli.command)).and_then(|r| r),
        None => run(cli.command),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::from(exit::SUCCESS as u8)
        }
        Err(e) => {
            eprintln!("narrow-escape: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
