//! projbound command-line driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use projbound::commands::{self, CommandError, Options};
use projbound::fixtures;
use projbound::geometry::Scene;
use projbound::report::{Format, Report, EXIT_INPUT};
use projbound::sample::{DEFAULT_SAMPLES, DEFAULT_TOL};

#[derive(Debug, Parser)]
#[command(name = "projbound", version)]
#[command(about = "Boundary rigidity and Cartan gauge checks for projective structures")]
struct Cli {
    /// Seed for sample points and random cross-checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Number of sample points.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,

    /// Absolute tolerance for sampled zero tests.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SceneArgs {
    /// Scene file (JSON).
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    scene: Option<PathBuf>,

    /// Built-in fixture instead of a scene file.
    #[arg(long)]
    fixture: Option<String>,

    /// Chart to work in. Defaults to the first boundary chart with a connection.
    #[arg(long)]
    chart: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the boundary obstruction and decide rigidity
    Rigidity {
        #[command(flatten)]
        scene: SceneArgs,
    },
    /// Check whether a map of the scene is a projective transformation
    VerifyMap {
        #[command(flatten)]
        scene: SceneArgs,
        /// Name of the map in the scene.
        #[arg(long)]
        map: String,
    },
    /// Integrate a geodesic from --point with velocity --velocity
    Geodesic {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, value_parser = parse_vector)]
        point: Vector,
        #[arg(long, value_parser = parse_vector)]
        velocity: Vector,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Normal Cartan gauge, its curvature and its boundary reduction
    Cartan {
        #[command(flatten)]
        scene: SceneArgs,
    },
    /// Solve the 2-jet system of boundary-fixing projective maps at a boundary point
    Jets {
        #[command(flatten)]
        scene: SceneArgs,
        /// Boundary point "0,y1,...". Defaults to the centre of the boundary face.
        #[arg(long, value_parser = parse_vector)]
        point: Option<Vector>,
    },
    /// Built-in fixtures
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Debug, Subcommand)]
enum FixtureAction {
    /// List fixture names
    List,
    /// Write fixture scenes; to stdout for a single name without --out
    Export {
        /// Fixture name; all fixtures when omitted.
        name: Option<String>,
        /// Directory to write <name>.json files into.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Comma-separated coordinates such as "0,0.25".
#[derive(Debug, Clone)]
struct Vector(Vec<f64>);

fn parse_vector(s: &str) -> Result<Vector, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Vector)
}

fn load(args: &SceneArgs) -> Result<Scene, CommandError> {
    match (&args.scene, &args.fixture) {
        (Some(path), _) => commands::load_scene(path),
        (None, Some(name)) => fixtures::by_name(name)
            .map(|f| f.scene)
            .ok_or_else(|| CommandError::Input(format!("unknown fixture {name:?}; try `projbound fixtures list`"))),
        (None, None) => Err(CommandError::Input("--scene or --fixture is required".into())),
    }
}

fn run(cli: &Cli) -> Result<Option<Report>, CommandError> {
    let opts = Options { seed: cli.seed, samples: cli.samples, tol: cli.tol };
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(CommandError::Input(format!("--tol must be positive, got {}", opts.tol)));
    }
    if opts.samples == 0 {
        return Err(CommandError::Input("--samples must be at least 1".into()));
    }
    let report = match &cli.command {
        Command::Rigidity { scene } => commands::cmd_rigidity(&load(scene)?, scene.chart.as_deref(), &opts)?,
        Command::VerifyMap { scene, map } => commands::cmd_verify_map(&load(scene)?, map, &opts)?,
        Command::Geodesic { scene, point, velocity, step, steps } => {
            commands::cmd_geodesic(&load(scene)?, scene.chart.as_deref(), &point.0, &velocity.0, *step, *steps, &opts)?
        }
        Command::Cartan { scene } => commands::cmd_cartan(&load(scene)?, scene.chart.as_deref(), &opts)?,
        Command::Jets { scene, point } => {
            commands::cmd_jets(&load(scene)?, scene.chart.as_deref(), point.as_ref().map(|p| p.0.as_slice()), &opts)?
        }
        Command::Fixtures { action } => {
            fixture_action(action)?;
            return Ok(None);
        }
    };
    Ok(Some(report))
}

fn fixture_action(action: &FixtureAction) -> Result<(), CommandError> {
    match action {
        FixtureAction::List => {
            for f in fixtures::all() {
                println!("{:<20} {}", f.name, f.notes);
            }
        }
        FixtureAction::Export { name, out } => {
            let chosen = match name {
                Some(n) => vec![fixtures::by_name(n).ok_or_else(|| CommandError::Input(format!("unknown fixture {n:?}")))?],
                None => fixtures::all(),
            };
            match out {
                None if chosen.len() == 1 => println!("{}", chosen[0].scene.to_json_pretty()),
                None => return Err(CommandError::Input("exporting every fixture needs --out DIR".into())),
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
                    for f in chosen {
                        let path = dir.join(format!("{}.json", f.name));
                        std::fs::write(&path, f.scene.to_json_pretty() + "\n").map_err(|e| io_error(&path, e))?;
                        println!("{}", path.display());
                    }
                }
            }
        }
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> CommandError {
    CommandError::Input(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Some(report)) => {
            let format = match cli.format {
                OutputFormat::Text => Format::Text,
                OutputFormat::Json => Format::Json,
            };
            print!("{}", report.render(format));
            ExitCode::from(report.exit_code() as u8)
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
