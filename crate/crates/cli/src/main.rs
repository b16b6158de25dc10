//! `bbdg`: operator reports, invariant suites, wave runs and convergence
//! sweeps, written as CSV under an output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bbdg_core::checks::{run_suite, CheckConfig, Suite};
use bbdg_core::lab::{
    complexity_csv, complexity_sweep, loglog_slope, operator_report, reports_csv, KernelKind, OperatorFamily,
};
use bbdg_core::mesh::build_cube_mesh;
use bbdg_core::nodal::{build_nodes, NodeKind};
use bbdg_core::solver::{
    run_wave, time_series_csv, write_checkpoint, Basis, Execution, LiftMode, RunConfig, RunSummary,
    DEFAULT_CFL,
};
use bbdg_core::Precision;

#[derive(Parser)]
#[command(
    name = "bbdg",
    version,
    about = "Nodal and Bernstein-Bezier DG experiments on tetrahedra"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condition numbers, entry extrema and sparsity of the reference operators.
    Ops(OpsArgs),
    /// Counted multiply-adds per element for each kernel.
    Complexity(ComplexityArgs),
    /// Oracle and invariant suites.
    Check(CheckArgs),
    /// One standing-wave run with error and energy time series.
    Solve(SolveArgs),
    /// Error at a fixed time over several meshes and the observed order.
    Convergence(ConvergenceArgs),
    /// Writes the cube mesh in ASCII form and prints its statistics.
    Mesh(MeshArgs),
    /// Writes a reference node set as CSV.
    Nodes(NodesArgs),
}

/// Degrees as `a..b` (inclusive), `a..=b`, `a,b,c` or a single value.
#[derive(Clone, Debug)]
struct Degrees(Vec<usize>);

fn parse_degrees(s: &str) -> std::result::Result<Degrees, String> {
    let bad = || format!("invalid degree list '{s}'");
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (usize, usize) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<std::result::Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(format!("empty degree range '{s}'"));
    }
    if let Some(n) = out
        .iter()
        .find(|&&n| !(bbdg_core::MIN_DEGREE..=bbdg_core::MAX_DEGREE).contains(&n))
    {
        return Err(format!(
            "degree {n} outside {}..={}",
            bbdg_core::MIN_DEGREE,
            bbdg_core::MAX_DEGREE
        ));
    }
    Ok(Degrees(out))
}

/// Mesh resolutions as a comma-separated list.
#[derive(Clone, Debug)]
struct Cells(Vec<usize>);

fn parse_cells(s: &str) -> std::result::Result<Cells, String> {
    let cells: Vec<usize> = s
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| format!("invalid mesh list '{s}'")))
        .collect::<std::result::Result<_, _>>()?;
    if cells.contains(&0) {
        return Err("mesh resolution must be at least 1".into());
    }
    Ok(Cells(cells))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    Bernstein,
    Nodal,
    Both,
}

impl BasisArg {
    fn bases(self) -> Vec<Basis> {
        match self {
            BasisArg::Bernstein => vec![Basis::Bernstein],
            BasisArg::Nodal => vec![Basis::Nodal],
            BasisArg::Both => vec![Basis::Bernstein, Basis::Nodal],
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LiftArg {
    Dense,
    Factorized,
    Optimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Single,
    Double,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NodesArg {
    WarpBlend,
    Equispaced,
}

#[derive(Args)]
struct OpsArgs {
    /// Degrees, e.g. `1..9` or `4`.
    #[arg(long = "n", value_parser = parse_degrees, default_value = "1..9")]
    degrees: Degrees,
    #[arg(long, value_enum, default_value = "both")]
    basis: BasisArg,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long = "n", value_parser = parse_degrees, default_value = "3..9")]
    degrees: Degrees,
}

#[derive(Args)]
struct CheckArgs {
    /// Run a single suite.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long = "n", value_parser = parse_degrees, default_value = "1..9")]
    degrees: Degrees,
    #[arg(long, default_value_t = 2016)]
    seed: u64,
    /// Adds this value to one entry of D^0 before the derivative suite runs.
    #[arg(long, hide = true)]
    perturb_d0: Option<f64>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "bernstein")]
    basis: BasisArg,
    /// Lift strategy; defaults to optimal for Bernstein and dense for nodal.
    #[arg(long, value_enum)]
    lift: Option<LiftArg>,
    #[arg(long, value_enum, default_value = "double")]
    precision: PrecisionArg,
    #[arg(long, default_value_t = DEFAULT_CFL)]
    cfl: f64,
    /// Final time.
    #[arg(long, default_value_t = 1.0)]
    tmax: f64,
    /// Evaluate every element sequentially.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "n", default_value_t = 3)]
    degree: usize,
    /// Cubes per axis; the mesh has 6 n^3 tetrahedra.
    #[arg(long, default_value_t = 4)]
    mesh: usize,
    /// Record every this many steps (0: first and last only).
    #[arg(long, default_value_t = 10)]
    every: usize,
    /// Also write the final state as a checkpoint.
    #[arg(long)]
    checkpoint: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long = "n", default_value_t = 2)]
    degree: usize,
    /// Mesh resolutions, e.g. `2,4,8`.
    #[arg(long, value_parser = parse_cells, default_value = "2,4")]
    meshes: Cells,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, default_value_t = 4)]
    mesh: usize,
}

#[derive(Args)]
struct NodesArgs {
    #[arg(long = "n")]
    degree: usize,
    #[arg(long, value_enum, default_value = "warp-blend")]
    kind: NodesArg,
}

/// A run that finished but violated a numerical requirement.
#[derive(Debug)]
struct NumericalFailure(String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ops(a) => cmd_ops(&cli.out, a),
        Command::Complexity(a) => cmd_complexity(&cli.out, a),
        Command::Check(a) => cmd_check(&cli.out, a),
        Command::Solve(a) => cmd_solve(&cli.out, a),
        Command::Convergence(a) => cmd_convergence(&cli.out, a),
        Command::Mesh(a) => cmd_mesh(&cli.out, a),
        Command::Nodes(a) => cmd_nodes(&cli.out, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Invalid arguments detected after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn cmd_ops(out: &Path, a: OpsArgs) -> Result<()> {
    let families: Vec<OperatorFamily> = OperatorFamily::ALL
        .into_iter()
        .filter(|f| match a.basis {
            BasisArg::Both => true,
            BasisArg::Nodal => f.is_nodal(),
            BasisArg::Bernstein => !f.is_nodal(),
        })
        .collect();
    let dir = out.join("ops");
    let mut all = Vec::new();
    println!(
        "{:<18} {:>2} {:>14} {:>14} {:>14} {:>7}",
        "operator", "N", "cond", "min", "max", "nnz_max"
    );
    for f in families {
        let reports = a
            .degrees
            .0
            .iter()
            .map(|&n| operator_report(f, n))
            .collect::<bbdg_core::Result<Vec<_>>>()?;
        for r in &reports {
            println!(
                "{:<18} {:>2} {:>14.6} {:>14.6} {:>14.6} {:>7}",
                f.name(),
                r.degree,
                r.cond,
                r.extrema.min,
                r.extrema.max,
                r.nnz_max
            );
        }
        write_file(&dir, &format!("{}.csv", f.name()), reports_csv(&reports))?;
        all.extend(reports);
    }
    let path = write_file(&dir, "operators.csv", reports_csv(&all))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_complexity(out: &Path, a: ComplexityArgs) -> Result<()> {
    let sweeps = KernelKind::ALL
        .into_iter()
        .map(|k| complexity_sweep(k, &a.degrees.0))
        .collect::<bbdg_core::Result<Vec<_>>>()?;
    for s in &sweeps {
        println!(
            "{:<18} slope {:.4}  madds {:?}",
            s.kernel.name(),
            s.slope,
            s.madds
        );
    }
    let path = write_file(out, "complexity.csv", complexity_csv(&sweeps))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_check(out: &Path, a: CheckArgs) -> Result<()> {
    let suites = match &a.suite {
        Some(s) => vec![s.parse::<Suite>().map_err(Usage)?],
        None => Suite::ALL.to_vec(),
    };
    let cfg = CheckConfig {
        degrees: a.degrees.0,
        seed: a.seed,
        perturb_d0: a.perturb_d0,
    };
    let mut csv = String::from("suite,check,N,error,tol,passed\n");
    let mut failed = 0;
    for suite in suites {
        let r = run_suite(suite, &cfg)?;
        let bad = r.outcomes.iter().filter(|o| !o.passed).count();
        failed += bad;
        let worst = r
            .outcomes
            .iter()
            .map(|o| o.error / o.tol.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        println!(
            "{:<10} {} {:>4} checks, {} failed, worst error/tol {:.2e}{}",
            suite.name(),
            if bad == 0 { "PASS" } else { "FAIL" },
            r.outcomes.len(),
            bad,
            worst,
            if r.skipped.is_empty() {
                String::new()
            } else {
                format!(" (degrees {:?} outside this suite's range)", r.skipped)
            }
        );
        for o in &r.outcomes {
            let n = o.degree.map(|n| n.to_string()).unwrap_or_default();
            writeln!(
                csv,
                "{},{},{},{:.16e},{:.16e},{}",
                suite.name(),
                o.name,
                n,
                o.error,
                o.tol,
                o.passed
            )?;
            if !o.passed {
                println!("    {} N={n}: error {:.3e} > tol {:.1e}", o.name, o.error, o.tol);
            }
        }
    }
    write_file(out, "check.csv", csv)?;
    if failed > 0 {
        bail!(NumericalFailure(format!("{failed} checks failed")));
    }
    Ok(())
}

fn run_config(degree: usize, cells: usize, basis: Basis, r: &RunArgs, every: usize) -> Result<RunConfig> {
    let lift_mode = match (r.lift, basis) {
        (Some(LiftArg::Dense), _) | (None, Basis::Nodal) => LiftMode::Dense,
        (Some(LiftArg::Factorized), _) => LiftMode::Factorized,
        (Some(LiftArg::Optimal), _) | (None, Basis::Bernstein) => LiftMode::Optimal,
    };
    if basis == Basis::Nodal && lift_mode != LiftMode::Dense {
        bail!(Usage(format!(
            "the nodal basis supports only the dense lift, not {}",
            lift_mode.name()
        )));
    }
    if !(bbdg_core::MIN_DEGREE..=bbdg_core::MAX_DEGREE).contains(&degree) {
        bail!(Usage(format!(
            "degree {degree} outside {}..={}",
            bbdg_core::MIN_DEGREE,
            bbdg_core::MAX_DEGREE
        )));
    }
    if !(r.cfl > 0.0 && r.cfl <= 1.0) {
        bail!(Usage(format!("cfl must lie in (0, 1], got {}", r.cfl)));
    }
    if !(r.tmax >= 0.0) {
        bail!(Usage(format!("tmax must be non-negative, got {}", r.tmax)));
    }
    if cells == 0 {
        bail!(Usage("mesh resolution must be at least 1".into()));
    }
    Ok(RunConfig {
        degree,
        mesh_cells: cells,
        basis,
        lift_mode,
        cfl: r.cfl,
        t_final: r.tmax,
        output_every: every,
        execution: if r.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    })
}

fn precision(p: PrecisionArg) -> Precision {
    match p {
        PrecisionArg::Single => Precision::Single,
        PrecisionArg::Double => Precision::Double,
    }
}

fn solve_one(cfg: &RunConfig, p: Precision, print: bool) -> Result<(RunSummary, Vec<u8>)> {
    let log = |r: &bbdg_core::solver::Record| {
        if print {
            println!(
                "{:>7} {:>12.6} {:>14.6e} {:>14.6e}",
                r.step, r.time, r.l2_error, r.energy
            );
        }
    };
    let result = match p {
        Precision::Single => run_wave::<f32>(cfg, log).map(|(s, st)| (s, write_checkpoint(&st))),
        Precision::Double => run_wave::<f64>(cfg, log).map(|(s, st)| (s, write_checkpoint(&st))),
    };
    match result {
        Ok(r) => Ok(r),
        Err(e @ bbdg_core::Error::Unstable { .. }) => Err(NumericalFailure(e.to_string()).into()),
        Err(e) => Err(e.into()),
    }
}

fn cmd_solve(out: &Path, a: SolveArgs) -> Result<()> {
    let prec = precision(a.run.precision);
    let dir = out.join("solve");
    for basis in a.run.basis.bases() {
        let cfg = run_config(a.degree, a.mesh, basis, &a.run, a.every)?;
        let tag = format!("{}_N{}_n{}_{}", basis.name(), a.degree, a.mesh, prec.name());
        println!(
            "# {tag}: lift {}, cfl {}, tmax {}",
            cfg.lift_mode.name(),
            cfg.cfl,
            cfg.t_final
        );
        println!(
            "{:>7} {:>12} {:>14} {:>14}",
            "step", "tau", "l2_error_p", "energy"
        );
        let (s, checkpoint) = solve_one(&cfg, prec, true)?;
        write_file(&dir, &format!("{tag}.csv"), time_series_csv(&s.records))?;
        let summary = format!(
            "basis {}\ndegree {}\nmesh_cells {}\nelements {}\nprecision {}\nlift {}\ncfl {}\ndt {:.16e}\nsteps {}\ninitial_energy {:.16e}\nfinal_error {:.16e}\nmax_energy_increase {:.16e}\n",
            basis.name(),
            a.degree,
            a.mesh,
            6 * a.mesh.pow(3),
            prec.name(),
            cfg.lift_mode.name(),
            cfg.cfl,
            s.dt,
            s.steps,
            s.initial_energy,
            s.final_error,
            s.max_energy_increase
        );
        write_file(&dir, &format!("{tag}.summary.txt"), &summary)?;
        if a.checkpoint {
            write_file(&dir, &format!("{tag}.checkpoint"), checkpoint)?;
        }
        println!(
            "# final error {:.6e} after {} steps (dt {:.4e})",
            s.final_error, s.steps, s.dt
        );
    }
    Ok(())
}

fn cmd_convergence(out: &Path, a: ConvergenceArgs) -> Result<()> {
    let meshes = a.meshes.0;
    if meshes.len() < 2 {
        bail!(Usage("convergence needs at least two mesh resolutions".into()));
    }
    let prec = precision(a.run.precision);
    let mut csv = String::from("basis,N,mesh,elements,h,l2_error_p,order\n");
    for basis in a.run.basis.bases() {
        let mut errors = Vec::new();
        for &cells in &meshes {
            let cfg = run_config(a.degree, cells, basis, &a.run, 0)?;
            errors.push(solve_one(&cfg, prec, false)?.0.final_error);
        }
        let h: Vec<f64> = meshes.iter().map(|&n| 1.0 / n as f64).collect();
        let fitted = loglog_slope(&h, &errors);
        println!("{} N={} fitted order {:.2}", basis.name(), a.degree, fitted);
        for (i, (&cells, &err)) in meshes.iter().zip(&errors).enumerate() {
            let order = if i == 0 {
                String::new()
            } else {
                format!("{:.16e}", (errors[i - 1] / err).ln() / (h[i - 1] / h[i]).ln())
            };
            println!("  n={cells:<3} error {err:.6e} {order}");
            writeln!(
                csv,
                "{},{},{},{},{:.16e},{:.16e},{}",
                basis.name(),
                a.degree,
                cells,
                6 * cells.pow(3),
                h[i],
                err,
                order
            )?;
        }
    }
    let name = format!("N{}_{}.csv", a.degree, prec.name());
    let path = write_file(&out.join("convergence"), &name, csv)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_mesh(out: &Path, a: MeshArgs) -> Result<()> {
    if a.mesh == 0 {
        bail!(Usage("mesh resolution must be at least 1".into()));
    }
    let mesh = build_cube_mesh(a.mesh, [-0.5; 3], [0.5; 3])?;
    let s = mesh.stats();
    println!(
        "elements {}\nvertices {}\nh_min {:.16e}\nh_max {:.16e}\nvolume {:.16e}",
        s.elements, s.vertices, s.h_min, s.h_max, s.volume
    );
    let path = write_file(
        &out.join("mesh"),
        &format!("cube_n{}.txt", a.mesh),
        mesh.to_ascii(),
    )?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_nodes(out: &Path, a: NodesArgs) -> Result<()> {
    let kind = match a.kind {
        NodesArg::WarpBlend => NodeKind::WarpBlend,
        NodesArg::Equispaced => NodeKind::Equispaced,
    };
    let nodes = build_nodes(a.degree, kind).map_err(|e| Usage(e.to_string()))?;
    let name = format!(
        "{}_N{}.csv",
        a.kind.to_possible_value().expect("value").get_name(),
        a.degree
    );
    let path = write_file(&out.join("nodes"), &name, nodes.to_csv())?;
    println!("{} nodes", nodes.len());
    eprintln!("wrote {}", path.display());
    Ok(())
}
