use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::value::RawValue;

use opmetric::chk::{self, ClosedOperator};
use opmetric::convexity::{self, FiniteConfiguration};
use opmetric::dynamics::{self, FixedPointOptions, IsometryGroup};
use opmetric::io;
use opmetric::suite::{self, Suite};
use opmetric::Error;

/// Invariant distance, geodesics, centers and fixed points for complex matrices
/// viewed as operators H -> K.
#[derive(Parser)]
#[command(name = "opmetric", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two operators.
    Dist { a: PathBuf, b: PathBuf },
    /// Geodesic midpoint.
    Midpoint {
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Point at fraction t along the geodesic from A to B.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long = "t")]
        t: f64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Pairwise-midpoint barycenter.
    Barycenter {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Approximate Chebyshev center.
    Center {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = convexity::DEFAULT_CENTER_TOL)]
        tol: f64,
        #[arg(long, default_value_t = convexity::DEFAULT_CENTER_MAX_ITER)]
        max_iter: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Common fixed point of a group given by generator files.
    FixedPoint {
        #[arg(long = "gen", required = true, num_args = 1..)]
        generators: Vec<PathBuf>,
        #[arg(long)]
        start: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Word length of the orbit sample used as the seed.
        #[arg(long, default_value_t = 4)]
        seed_depth: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Orbit diameters by word length.
    Orbit {
        #[arg(long = "gen", required = true, num_args = 1..)]
        generators: Vec<PathBuf>,
        #[arg(long)]
        start: PathBuf,
        #[arg(long, default_value_t = dynamics::DEFAULT_ORBIT_DEPTH)]
        depth: usize,
        /// Plateau tolerance; defaults to 1e-3 (1 + diameter).
        #[arg(long)]
        growth_tol: Option<f64>,
    },
    /// Seeded property checks.
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

enum Failure {
    Input(Error),
    Numerical(Error),
    NoConvergence(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Input(e)
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn num(x: f64) -> Box<RawValue> {
    RawValue::from_string(io::format_17(x)).expect("number literal")
}

fn nums(xs: &[f64]) -> Vec<Box<RawValue>> {
    xs.iter().map(|&x| num(x)).collect()
}

fn emit<T: Serialize>(doc: &T) {
    println!("{}", serde_json::to_string_pretty(doc).expect("serializable"));
}

#[derive(Serialize)]
struct OperatorDoc {
    command: &'static str,
    value: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    operator: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter: Option<Box<RawValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit_bounded: Option<bool>,
}

/// Writes `op` to `output`, or inlines it in the document when no path is given.
fn operator_doc(command: &'static str, value: f64, op: &ClosedOperator, output: Option<&Path>) -> Result<OperatorDoc, Error> {
    let (output, operator) = match output {
        Some(path) => {
            io::write_operator_file(path, op)?;
            (Some(path.display().to_string()), None)
        }
        None => (None, Some(serde_json::from_str(&io::operator_to_string(op)).expect("valid JSON"))),
    };
    Ok(OperatorDoc {
        command,
        value: num(value),
        output,
        operator,
        diameter: None,
        iterations: None,
        converged: None,
        orbit_bounded: None,
    })
}

fn read_all(files: &[PathBuf]) -> Result<Vec<ClosedOperator>, Error> {
    files.iter().map(io::read_operator).collect()
}

fn read_group(files: &[PathBuf]) -> Result<IsometryGroup, Error> {
    IsometryGroup::new(files.iter().map(io::read_generator).collect::<Result<_, _>>()?)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Dist { a, b } => {
            let (a, b) = (io::read_operator(a)?, io::read_operator(b)?);
            #[derive(Serialize)]
            struct Doc {
                command: &'static str,
                value: Box<RawValue>,
            }
            emit(&Doc { command: "dist", value: num(chk::distance(&a, &b)?) });
        }
        Command::Midpoint { a, b, output } => {
            let (a, b) = (io::read_operator(a)?, io::read_operator(b)?);
            let q = chk::midpoint(&a, &b)?;
            emit(&operator_doc("midpoint", chk::distance(&a, &q)?, &q, output.as_deref())?);
        }
        Command::Geodesic { a, b, t, output } => {
            let (a, b) = (io::read_operator(a)?, io::read_operator(b)?);
            let q = chk::geodesic_point(&a, &b, t)?;
            emit(&operator_doc("geodesic", chk::distance(&a, &q)?, &q, output.as_deref())?);
        }
        Command::Barycenter { files, output } => {
            let config = FiniteConfiguration::new(read_all(&files)?)?;
            let q = chk::barycenter(config.points())?;
            emit(&operator_doc("barycenter", convexity::radius_at(&q, &config)?, &q, output.as_deref())?);
        }
        Command::Center { files, tol, max_iter, output } => {
            let config = FiniteConfiguration::new(read_all(&files)?)?;
            let cc = convexity::chebyshev_center(&config, tol, max_iter)?;
            emit(&OperatorDoc {
                diameter: Some(num(convexity::diameter(&config)?)),
                iterations: Some(cc.iterations),
                converged: Some(cc.converged),
                ..operator_doc("center", cc.radius, &cc.center, output.as_deref())?
            });
            if !cc.converged {
                return Err(Failure::NoConvergence(format!("no convergence after {} iterations", cc.iterations)));
            }
        }
        Command::FixedPoint { generators, start, tol, max_iter, seed_depth, output } => {
            let group = read_group(&generators)?;
            let start = io::read_operator(start)?;
            let options = FixedPointOptions { seed_depth, ..FixedPointOptions::default() };
            let fp = dynamics::find_fixed_point(&group, &start, tol, max_iter, &options)?;
            emit(&OperatorDoc {
                iterations: Some(fp.iterations),
                converged: Some(fp.converged),
                orbit_bounded: Some(fp.orbit_bounded),
                ..operator_doc("fixed-point", fp.residual, &fp.point, output.as_deref())?
            });
            if !fp.orbit_bounded {
                eprintln!("warning: orbit diameter did not plateau; the orbit may be unbounded");
            }
            if !fp.converged {
                return Err(Failure::NoConvergence(format!(
                    "residual {:e} above tolerance {tol:e} after {} iterations",
                    fp.residual, fp.iterations
                )));
            }
        }
        Command::Orbit { generators, start, depth, growth_tol } => {
            let group = read_group(&generators)?;
            let start = io::read_operator(start)?;
            let orbit = dynamics::orbit(&group, &start, depth)?;
            #[derive(Serialize)]
            struct Doc {
                command: &'static str,
                value: Box<RawValue>,
                points: usize,
                diameter_by_depth: Vec<Box<RawValue>>,
                radius_by_depth: Vec<Box<RawValue>>,
                #[serde(skip_serializing_if = "Option::is_none")]
                bounded: Option<bool>,
                truncated: bool,
            }
            let bounded = (depth >= 4).then(|| dynamics::plateaus(&orbit, growth_tol));
            emit(&Doc {
                command: "orbit",
                value: num(*orbit.diameter_by_depth.last().expect("depth >= 1")),
                points: orbit.points.len(),
                diameter_by_depth: nums(&orbit.diameter_by_depth),
                radius_by_depth: nums(&orbit.radius_by_depth),
                bounded,
                truncated: orbit.truncated,
            });
        }
        Command::Check { suite, samples, seed } => {
            let which: Suite = suite.parse()?;
            let outcomes = suite::run(which, samples, seed);
            #[derive(Serialize)]
            struct Property {
                suite: &'static str,
                name: &'static str,
                samples: usize,
                value: Box<RawValue>,
                tolerance: Box<RawValue>,
                passed: bool,
                #[serde(skip_serializing_if = "Option::is_none")]
                error: Option<String>,
            }
            #[derive(Serialize)]
            struct Doc {
                command: &'static str,
                suite: &'static str,
                seed: u64,
                samples: usize,
                value: Box<RawValue>,
                passed: bool,
                properties: Vec<Property>,
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            for o in outcomes.iter().filter(|o| !o.passed) {
                eprintln!("FAILED {}/{}: worst {:e} > {:e}", o.suite, o.name, o.worst, o.tolerance);
            }
            emit(&Doc {
                command: "check",
                suite: which.name(),
                seed,
                samples,
                value: num(failed as f64),
                passed: failed == 0,
                properties: outcomes
                    .into_iter()
                    .map(|o| Property {
                        suite: o.suite,
                        name: o.name,
                        samples: o.samples,
                        value: num(o.worst),
                        tolerance: num(o.tolerance),
                        passed: o.passed,
                        error: o.error,
                    })
                    .collect(),
            });
            if failed > 0 {
                return Err(Failure::Input(Error::InvalidArgument(format!("{failed} properties failed"))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(2)
        }
        Err(Failure::NoConvergence(msg)) => {
            eprintln!("no convergence: {msg}");
            ExitCode::from(3)
        }
    }
}
