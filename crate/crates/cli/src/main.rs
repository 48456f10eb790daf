use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use embodykit::config::load_config;
use embodykit::experiments::delay::{write_delay_demo, DelayDemoConfig};
use embodykit::experiments::growth::{write_grow, write_growth_curves, GrowConfig, GrowthCurvesConfig};
use embodykit::experiments::reach::{write_reach_demo, ReachConfig};
use embodykit::experiments::scene::write_scene;
use embodykit::experiments::strength::{write_strength_test, Behavior, StrengthConfig};
use embodykit::experiments::vision::{write_vision_demo, Order, VisionConfig};
use embodykit::CliResult;
use embodykit_core::scenegen::SceneConfig;

/// Developmental embodiment experiments.
#[derive(Parser)]
#[command(name = "embodykit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "EMBODYKIT_SEED")]
    seed: Option<u64>,
    /// Output directory (for `scene`, a path ending in .json is the file).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Body spec at one age.
    Grow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        age: Option<f64>,
    },
    /// Height, head circumference and mass over age.
    GrowthCurves {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        ages: Option<Vec<f64>>,
    },
    /// Full-strength head and leg lifts at several ages.
    StrengthTest {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        ages: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        behavior: Option<Vec<BehaviorArg>>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Hand reaching with gaze alignment for several gain sets.
    ReachDemo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        age: Option<f64>,
        #[arg(long)]
        targets: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// The reach task under sensory delays.
    DelayDemo {
        #[command(flatten)]
        common: Common,
        /// Sensory delays in 5 ms steps.
        #[arg(long, value_delimiter = ',')]
        delays: Option<Vec<usize>>,
        #[arg(long)]
        targets: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Acuity filtering and foveation of an image.
    VisionDemo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        ages: Option<Vec<f64>>,
        #[arg(long)]
        fov: Option<f64>,
        #[arg(long)]
        warp: Option<f64>,
        #[arg(long)]
        order: Option<OrderArg>,
    },
    /// Seeded room with toys.
    Scene {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BehaviorArg {
    HeadLift,
    LegLift,
}

impl From<BehaviorArg> for Behavior {
    fn from(b: BehaviorArg) -> Self {
        match b {
            BehaviorArg::HeadLift => Behavior::HeadLift,
            BehaviorArg::LegLift => Behavior::LegLift,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    AcuityFirst,
    FoveationFirst,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn config<T: serde::de::DeserializeOwned + Default>(common: &Common) -> CliResult<T> {
    load_config(common.config.as_deref())
}

fn run(command: Command) -> CliResult<Vec<PathBuf>> {
    match command {
        Command::Grow { common, age } => {
            let mut cfg: GrowConfig = config(&common)?;
            set(&mut cfg.age, age);
            write_grow(&cfg, &common.out)
        }
        Command::GrowthCurves { common, ages } => {
            let mut cfg: GrowthCurvesConfig = config(&common)?;
            set(&mut cfg.ages, ages);
            write_growth_curves(&cfg, &common.out)
        }
        Command::StrengthTest {
            common,
            ages,
            behavior,
            steps,
        } => {
            let mut cfg: StrengthConfig = config(&common)?;
            set(&mut cfg.ages, ages);
            set(
                &mut cfg.behaviors,
                behavior.map(|b| b.into_iter().map(Behavior::from).collect()),
            );
            set(&mut cfg.steps, steps);
            write_strength_test(&cfg, &common.out)
        }
        Command::ReachDemo {
            common,
            age,
            targets,
            steps,
        } => {
            let mut cfg: ReachConfig = config(&common)?;
            set(&mut cfg.seed, common.seed);
            set(&mut cfg.age, age);
            set(&mut cfg.targets, targets);
            set(&mut cfg.steps, steps);
            write_reach_demo(&cfg, &common.out)
        }
        Command::DelayDemo {
            common,
            delays,
            targets,
            steps,
        } => {
            let mut cfg: DelayDemoConfig = config(&common)?;
            set(&mut cfg.reach.seed, common.seed);
            set(&mut cfg.sensory_delays, delays);
            set(&mut cfg.reach.targets, targets);
            set(&mut cfg.reach.steps, steps);
            write_delay_demo(&cfg, &common.out)
        }
        Command::VisionDemo {
            common,
            image,
            ages,
            fov,
            warp,
            order,
        } => {
            let mut cfg: VisionConfig = config(&common)?;
            if image.is_some() {
                cfg.image = image;
            }
            set(&mut cfg.ages, ages);
            set(&mut cfg.fov_deg, fov);
            set(&mut cfg.warp, warp);
            set(
                &mut cfg.order,
                order.map(|o| match o {
                    OrderArg::AcuityFirst => Order::AcuityThenFoveation,
                    OrderArg::FoveationFirst => Order::FoveationThenAcuity,
                }),
            );
            write_vision_demo(&cfg, &common.out)
        }
        Command::Scene { common } => {
            let cfg: SceneConfig = config(&common)?;
            write_scene(common.seed.unwrap_or(0), &cfg, Path::new(&common.out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(paths) => {
            // The artifacts are already written; a closed stdout is not an error.
            let mut out = std::io::stdout().lock();
            for p in paths {
                if writeln!(out, "{}", p.display()).is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("embodykit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
