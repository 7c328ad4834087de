use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fractunnel::cli::{self, Command, Protocol, RunConfig};

#[derive(Parser)]
#[command(version, about = "Static-field tunneling in 1D space-fractional quantum mechanics")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Field-free ground states at fixed (Z, a).
    GroundState,
    /// Tune the softening so that Ip matches --ip-target.
    Calibrate,
    /// Propagate every (alpha, F0) pair and fit decay rates.
    Propagate,
    /// alpha = 2 field sweep compared with the ADK exponent.
    Benchmark,
    /// Field sweep over several alphas with slope analysis.
    Sweep {
        #[arg(long, default_value = "A")]
        protocol: Protocol,
    },
    /// Analytic -ln Gamma against 1/F0 lines.
    FadkCurves,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    f0: Option<Vec<f64>>,
    /// Box half-width L.
    #[arg(long, global = true)]
    half_width: Option<f64>,
    /// Grid points N.
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    charge: Option<f64>,
    #[arg(long, global = true)]
    softening: Option<f64>,
    #[arg(long, global = true)]
    ip_target: Option<f64>,
    #[arg(long, global = true)]
    f_ref: Option<f64>,
    #[arg(long, global = true)]
    allow_over_barrier: bool,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    total_time: Option<f64>,
    #[arg(long, global = true)]
    observer_stride: Option<usize>,
    #[arg(long, global = true)]
    mask_onset: Option<f64>,
    #[arg(long, global = true)]
    mask_strength: Option<f64>,
    #[arg(long, global = true)]
    mask_exponent: Option<f64>,
    #[arg(long, global = true)]
    bound_radius: Option<f64>,
    #[arg(long, global = true)]
    plateau_tolerance: Option<f64>,
    #[arg(long, global = true)]
    min_window: Option<f64>,
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        fn set<T>(slot: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if self.alpha.is_some() {
            cfg.system.alphas = self.alpha;
        }
        set(&mut cfg.field.f0, self.f0);
        set(&mut cfg.grid.half_width, self.half_width);
        set(&mut cfg.grid.points, self.points);
        set(&mut cfg.system.charge, self.charge);
        set(&mut cfg.system.softening, self.softening);
        if self.ip_target.is_some() {
            cfg.system.ip_target = self.ip_target;
        }
        set(&mut cfg.field.f_ref, self.f_ref);
        cfg.field.allow_over_barrier |= self.allow_over_barrier;
        set(&mut cfg.propagation.dt, self.dt);
        if self.total_time.is_some() {
            cfg.propagation.total_time = self.total_time;
        }
        set(&mut cfg.propagation.observer_stride, self.observer_stride);
        if self.mask_onset.is_some() {
            cfg.mask.onset = self.mask_onset;
        }
        set(&mut cfg.mask.strength, self.mask_strength);
        set(&mut cfg.mask.exponent, self.mask_exponent);
        if self.bound_radius.is_some() {
            cfg.rates.bound_radius = self.bound_radius;
        }
        set(&mut cfg.rates.plateau_tolerance, self.plateau_tolerance);
        set(&mut cfg.rates.min_window, self.min_window);
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Cli::parse();
    let mut cfg = match &args.config {
        Some(path) => match RunConfig::from_json_file(path) {
            Ok(c) => c,
            Err(e) => {
                log::error!("{e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    args.overrides.apply(&mut cfg);
    if args.out.is_some() {
        cfg.output = args.out;
    }
    let command = match args.command {
        Sub::GroundState => Command::GroundState,
        Sub::Calibrate => Command::Calibrate,
        Sub::Propagate => Command::Propagate,
        Sub::Benchmark => Command::Benchmark,
        Sub::Sweep { protocol } => {
            cfg.protocol = protocol;
            Command::Sweep(protocol)
        }
        Sub::FadkCurves => Command::FadkCurves,
    };
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    match cli::run(&cfg, command, &out) {
        Ok(report) => {
            for w in &report.warnings {
                log::warn!("{w}");
            }
            for f in &report.failures {
                log::error!("{f}");
            }
            log::info!("{} files written to {} (config {})", report.files.len(), out.display(), report.config_hash);
            if report.succeeded() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}
