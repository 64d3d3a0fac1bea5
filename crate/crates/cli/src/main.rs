mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use screwdyn::bench::{compare, scaling_sweep, SWEEP_SIZES};
use screwdyn::bodyfixed::inverse_dynamics_bodyfixed_1;
use screwdyn::dynamics::{inverse_dynamics_2, sea_motor_quantities, AppliedLoads2, GravityMode};
use screwdyn::kinematics::forward_kinematics_4;
use screwdyn::model::{builtin_panda, load_model, uniform_chain, RobotModel};
use screwdyn::verify::{run_suite, TrajectoryConfig};
use screwdyn::Error;

#[derive(Parser)]
#[command(name = "screwdyn", version, about = "Higher-order inverse dynamics of serial manipulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Representation {
    Spatial,
    Bodyfixed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Gravity {
    Trick,
    Explicit,
    None,
}

impl From<Gravity> for GravityMode {
    fn from(g: Gravity) -> Self {
        match g {
            Gravity::Trick => GravityMode::Trick,
            Gravity::Explicit => GravityMode::Explicit,
            Gravity::None => GravityMode::None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate joint forces and their derivatives along a trajectory and write CSV.
    #[command(group(ArgGroup::new("trajectory").required(true).args(["traj", "sine"])))]
    Run {
        /// Model file (JSON); the built-in Panda geometry if omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Sampled trajectory CSV with positions through jounce.
        #[arg(long)]
        traj: Option<PathBuf>,
        /// Sinusoidal joints `a,w,phi[;a,w,phi...]`, one group for all joints or one per joint.
        #[arg(long, allow_hyphen_values = true, requires_all = ["dt", "duration"])]
        sine: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, value_enum, default_value = "spatial")]
        rep: Representation,
        #[arg(long, value_enum, default_value = "trick")]
        gravity: Gravity,
        /// JSON file with applied spatial wrenches per sample and body.
        #[arg(long)]
        loads: Option<PathBuf>,
        /// Series elastic actuators `km,mm[;km,mm...]`.
        #[arg(long)]
        sea: Option<String>,
        /// Output CSV; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite and report residuals.
    Verify {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Trajectory samples per check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Time the spatial and body-fixed recursions.
    Bench {
        /// Length of a uniform chain; the model (or built-in Panda) if omitted.
        #[arg(long, conflicts_with = "model")]
        n: Option<usize>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        repeats: usize,
        /// Skip the sweep over chain lengths.
        #[arg(long)]
        no_sweep: bool,
    },
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn model_from(path: &Option<PathBuf>) -> Result<RobotModel, Failure> {
    match path {
        Some(p) => load_model(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => Ok(builtin_panda()),
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            model,
            traj,
            sine,
            dt,
            duration,
            rep,
            gravity,
            loads,
            sea,
            out,
        } => {
            if rep == Representation::Bodyfixed && sea.is_some() {
                return Err(Failure::Usage(
                    "--sea needs second derivatives of the joint forces, which --rep bodyfixed does not provide".into(),
                ));
            }
            let model = model_from(&model)?;
            let n = model.dof();
            let samples = match (&traj, &sine) {
                (Some(path), _) => io::read_trajectory_csv(path, n)?,
                (None, Some(spec)) => io::sine_samples(spec, n, dt.unwrap_or(0.0), duration.unwrap_or(0.0))?,
                (None, None) => unreachable!("clap enforces a trajectory source"),
            };
            let loads = match &loads {
                Some(p) => io::read_loads(p, n, samples.times.len())?,
                None => vec![AppliedLoads2::zeros(n); samples.times.len()],
            };
            let sea = sea.as_deref().map(|s| io::parse_sea(s, n)).transpose()?;
            let mode = GravityMode::from(gravity);

            let mut rows = Vec::with_capacity(samples.times.len());
            for ((t, js), l) in samples.times.iter().zip(&samples.states).zip(&loads) {
                let row = match rep {
                    Representation::Spatial => {
                        let bk = forward_kinematics_4(&model, js, mode.needs_trick())?;
                        let dr = inverse_dynamics_2(&model, &bk, l, mode)?;
                        let sea = match &sea {
                            Some(p) => {
                                let m = sea_motor_quantities(js, &dr, p)?;
                                Some((m.theta, m.tau))
                            }
                            None => None,
                        };
                        io::OutputRow {
                            t: *t,
                            q: dr.q,
                            qd: dr.qd,
                            qdd: Some(dr.qdd),
                            sea,
                        }
                    }
                    Representation::Bodyfixed => {
                        let r = inverse_dynamics_bodyfixed_1(&model, js, l, mode != GravityMode::None)?;
                        io::OutputRow {
                            t: *t,
                            q: r.q,
                            qd: r.qd,
                            qdd: None,
                            sea: None,
                        }
                    }
                };
                rows.push(row);
            }
            match out {
                Some(p) => io::write_output(std::fs::File::create(&p).map_err(Error::from)?, n, sea.is_some(), &rows)?,
                None => io::write_output(std::io::stdout().lock(), n, sea.is_some(), &rows)?,
            }
            Ok(())
        }
        Command::Verify { model, samples, seed } => {
            let model = model_from(&model)?;
            if model.has_placeholder_inertia() {
                eprintln!("note: model uses placeholder inertial data");
            }
            let cfg = TrajectoryConfig {
                seed,
                samples: samples.max(1),
                ..Default::default()
            };
            let report = run_suite(&model, &cfg)?;
            println!("{report}");
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
        Command::Bench {
            n,
            model,
            repeats,
            no_sweep,
        } => {
            if repeats == 0 {
                return Err(Failure::Usage("--repeats must be at least 1".into()));
            }
            let model = match n {
                Some(0) => return Err(Failure::Usage("--n must be at least 1".into())),
                Some(n) => uniform_chain(n, 0.3),
                None => model_from(&model)?,
            };
            println!("{}", compare(&model, repeats)?);
            if !no_sweep {
                println!();
                println!("{}", scaling_sweep(&SWEEP_SIZES, repeats * 8)?);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
