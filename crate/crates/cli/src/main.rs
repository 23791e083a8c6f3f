//! `cmc`: mesh generation, subdivision, discretization, solves and figures.
//!
//! Exit codes: 0 on success, 1 on validation or runtime failure, 2 on usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cmc", version, about = "Transport solvers on quasi-cubical cell complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a mesh before subdivision, with vertex coordinates.
    Gen(GenArgs),
    /// Forman-subdivide a mesh file.
    Forman(FormanArgs),
    /// Check a mesh file for structural and orientation errors.
    Validate(ValidateArgs),
    /// Discretize a catalog problem into problem and mesh files.
    Discretize(DiscretizeArgs),
    /// Solve a problem file.
    Solve(SolveArgs),
    /// Render a result as SVG (2D) or legacy VTK (3D).
    Render(RenderArgs),
    /// Solve the four catalog problems and print their error table.
    Repro(ReproArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MeshKind {
    Cube,
    Rect,
    Disk,
    Hemisphere,
    Voronoi,
    Tess,
}

#[derive(Args, Debug)]
struct GenArgs {
    kind: MeshKind,
    /// Cells per axis of the unit cube.
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    nz: Option<usize>,
    /// Radial rings of the disk.
    #[arg(long, default_value_t = 3)]
    nr: usize,
    /// Angular sectors of the disk or hemisphere.
    #[arg(long, default_value_t = 4)]
    nphi: usize,
    /// Polar rings of the hemisphere.
    #[arg(long, default_value_t = 6)]
    ntheta: usize,
    #[arg(long, default_value_t = 20.0)]
    width: f64,
    #[arg(long, default_value_t = 15.0)]
    height: f64,
    /// Voronoi cell count.
    #[arg(long, default_value_t = 10)]
    cells: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `.tess` file for `tess`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the subdivided mesh with measures instead of the parent mesh.
    #[arg(long)]
    subdivided: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct FormanArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    input: PathBuf,
}

#[derive(Args, Debug)]
struct DiscretizeArgs {
    /// cube-quadratic, disk-quadratic, hemisphere-linear or rectangle-linear.
    problem: String,
    /// Mesh resolution, e.g. `--resolution 3` or `--resolution 3,4`.
    #[arg(long, value_delimiter = ',')]
    resolution: Option<Vec<usize>>,
    /// Voronoi seed for rectangle-linear.
    #[arg(long)]
    seed: Option<u64>,
    /// `.tess` tessellation for rectangle-linear.
    #[arg(long)]
    tess: Option<PathBuf>,
    /// Adds transient data starting from `g_D` (zero elsewhere).
    #[arg(long, requires = "steps")]
    dt: Option<f64>,
    #[arg(long, requires = "dt")]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Problem file; the mesh goes next to it as `<stem>.mesh.json` unless `--mesh` is given.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    mesh: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FormulationArg {
    Primal,
    Mixed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RegimeArg {
    Steady,
    Transient,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MethodArg {
    Eliminate,
    Saddle,
}

#[derive(Args, Debug)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, value_enum, default_value_t = FormulationArg::Primal)]
    formulation: FormulationArg,
    #[arg(long, value_enum, default_value_t = RegimeArg::Steady)]
    regime: RegimeArg,
    /// Mixed steady solution path.
    #[arg(long, value_enum, default_value_t = MethodArg::Eliminate)]
    method: MethodArg,
    /// Overrides the problem file's time step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct RenderArgs {
    result: PathBuf,
    /// Problem file whose mesh the result lives on.
    #[arg(long, conflicts_with = "mesh", required_unless_present = "mesh")]
    problem: Option<PathBuf>,
    /// Mesh file with node coordinates.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// `.svg` for 2D meshes, `.vtk` for 3D meshes.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 800)]
    height: u32,
    /// Fixed potential range `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    u_range: Option<Vec<f64>>,
    /// Fixed flux magnitude range `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    q_range: Option<Vec<f64>>,
    #[arg(long)]
    no_arrows: bool,
    /// Arrow length in model units.
    #[arg(long)]
    arrow_length: Option<f64>,
    /// Render every time level as a numbered frame.
    #[arg(long)]
    frames: bool,
}

#[derive(Args, Debug)]
struct ReproArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Eliminate)]
    method: MethodArg,
}

/// An error in the combination of arguments, reported with exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Forman(a) => commands::forman(a),
        Command::Validate(a) => commands::validate(a),
        Command::Discretize(a) => commands::discretize(a),
        Command::Solve(a) => commands::solve(a),
        Command::Render(a) => commands::render(a),
        Command::Repro(a) => commands::repro(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<Usage>().is_some() { 2 } else { 1 })
        }
    }
}
