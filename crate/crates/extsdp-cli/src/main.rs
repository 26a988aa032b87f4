use std::error::Error as StdError;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use extsdp::resources::{Grid, SweepKind, SweepSpec};
use extsdp::sdp::sdpa::{export_sdpa, external_to_internal, parse_external_objective};
use extsdp::sdp::{embed_real, presolve};
use extsdp::solver::{solve_lmi, SolverConfig};
use extsdp_cli::plot::render_svg;
use extsdp_cli::record::{to_csv_string, RunRecord};
use extsdp_cli::sweep::{workers_from_env, Method, Plan, WORKERS_ENV};

type Res<T> = Result<T, Box<dyn StdError>>;

#[derive(Parser)]
#[command(name = "extsdp", version, about = "Two-PPT-extendibility lower bounds on teleportation and error-correction error")]
#[command(after_help = format!("Sweeps run on ${WORKERS_ENV} threads (default: all cores); output keeps grid order."))]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Relative duality-gap tolerance of the interior-point solver.
    #[arg(long, global = true, default_value_t = 1e-8)]
    gap_tol: f64,
    #[arg(long, global = true, default_value_t = 200)]
    max_iters: usize,
    /// Suppress per-point progress on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bound the error of simulating the identity channel by teleportation over a resource state.
    Teleport {
        #[command(flatten)]
        args: TeleportArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bound the error of simulating the identity channel from a qutrit amplitude-damping channel.
    Qec {
        #[command(flatten)]
        args: QecArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Write the presolved SDP of every instance as an SDPA sparse file.
    Export {
        /// Directory receiving `<index>-<kind>.dat-s` files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Output of an external solver run on the (single) exported file;
        /// its objective is reported next to the internal one.
        #[arg(long, value_name = "RESULT_FILE")]
        solve_external: Option<PathBuf>,
        #[command(subcommand)]
        what: ExportWhat,
    },
    /// Render a sweep CSV as an SVG line plot.
    Plot {
        csv: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExportWhat {
    Teleport(TeleportArgs),
    Qec(QecArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    /// `p Φ + (1 − p) σ ⊗ σ'` with seeded random local states.
    Mixed,
    /// Two-mode squeezed vacuum truncated to qutrits.
    Tmsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TeleportMethod {
    #[value(name = "2pe-reduced")]
    TwoPeReduced,
    #[value(name = "2pe-general")]
    TwoPeGeneral,
    Cpptp,
}

#[derive(Clone, Copy, ValueEnum)]
enum QecMethod {
    Reduced,
    General,
}

#[derive(Args)]
struct TeleportArgs {
    #[arg(long, value_enum)]
    state: StateKind,
    /// Weight of Φ in the mixed resource: `x` or `start:stop:count`.
    #[arg(long, value_parser = parse_grid, required_if_eq("state", "mixed"))]
    p: Option<Grid>,
    /// TMSV squeezing in [0, 1): `x` or `start:stop:count`.
    #[arg(long, value_parser = parse_grid, required_if_eq("state", "tmsv"))]
    lambda: Option<Grid>,
    /// Target dimension.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Seed of the local states σ (seed) and σ' (seed + 1).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Local dimension of mixed resources; defaults to `d`.
    #[arg(long)]
    local_dim: Option<usize>,
    #[arg(long, value_enum, default_value = "2pe-reduced", conflicts_with = "compare")]
    method: TeleportMethod,
    /// Evaluate 2pe-reduced and cpptp at every point.
    #[arg(long)]
    compare: bool,
}

#[derive(Args)]
struct QecArgs {
    /// Decay rates `γ10,γ21,γ20`, each `x` or `start:stop:count`.
    #[arg(long, value_parser = parse_gamma)]
    gamma: GammaGrids,
    /// Target dimension.
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, value_enum, default_value = "reduced")]
    method: QecMethod,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the CSV as an SVG plot to this file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone)]
struct GammaGrids([Grid; 3]);

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: extsdp::Error| e.to_string())
}

fn parse_gamma(s: &str) -> Result<GammaGrids, String> {
    let grids: Vec<Grid> = s.split(',').map(parse_grid).collect::<Result<_, _>>()?;
    let grids: [Grid; 3] = grids.try_into().map_err(|g: Vec<Grid>| format!("expected 3 comma-separated grids, got {}", g.len()))?;
    Ok(GammaGrids(grids))
}

impl TeleportArgs {
    fn plan(&self) -> Res<Plan> {
        let (kind, grid) = match self.state {
            StateKind::Mixed => (SweepKind::MixedState, self.p.clone()),
            StateKind::Tmsv => (SweepKind::Tmsv, self.lambda.clone()),
        };
        let grid = grid.ok_or("missing parameter grid")?;
        let methods = if self.compare {
            vec![Method::TwoPeReduced, Method::Cpptp]
        } else {
            vec![match self.method {
                TeleportMethod::TwoPeReduced => Method::TwoPeReduced,
                TeleportMethod::TwoPeGeneral => Method::TwoPeGeneral,
                TeleportMethod::Cpptp => Method::Cpptp,
            }]
        };
        let spec = SweepSpec::new(kind, vec![grid], self.d, self.seed)?;
        Ok(Plan::new(spec, methods, self.local_dim.unwrap_or(self.d))?)
    }
}

impl QecArgs {
    fn plan(&self) -> Res<Plan> {
        let method = match self.method {
            QecMethod::Reduced => Method::QecReduced,
            QecMethod::General => Method::QecGeneral,
        };
        let spec = SweepSpec::new(SweepKind::AmpDamp, self.gamma.0.to_vec(), self.d, 0)?;
        Ok(Plan::new(spec, vec![method], 3)?)
    }
}

fn emit(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_sweep(plan: Plan, out: &OutputArgs, cfg: &SolverConfig, quiet: bool) -> Res<()> {
    let total = plan.jobs()?.len();
    let progress = |r: &RunRecord| {
        if quiet {
            return;
        }
        let params: Vec<String> = r.params.iter().map(|p| format!("{}={}", p.name, p.value)).collect();
        let value = r.value.map_or_else(|| r.error.clone().unwrap_or_default(), |v| format!("{v:.6e}"));
        eprintln!("[{}/{total}] {} {} {} {value} ({:.2}s)", r.index + 1, r.kind, params.join(" "), r.status.as_str(), r.seconds);
    };
    let records = plan.run(cfg, workers_from_env()?, progress)?;
    let csv = to_csv_string(&records);
    let text = match out.format {
        Format::Csv => csv.clone(),
        Format::Json => serde_json::to_string_pretty(&records)? + "\n",
    };
    emit(out.out.as_deref(), &text)?;
    if let Some(svg) = &out.svg {
        fs::write(svg, render_svg(&csv)?)?;
    }
    Ok(())
}

fn export(plan: Plan, out_dir: &Path, external: Option<&Path>, cfg: &SolverConfig) -> Res<()> {
    let jobs = plan.jobs()?;
    if external.is_some() && jobs.len() != 1 {
        return Err(format!("--solve-external needs exactly one instance, the grid has {}", jobs.len()).into());
    }
    fs::create_dir_all(out_dir)?;
    for job in &jobs {
        let problem = plan.build(job)?;
        let lmi = presolve(&embed_real(&problem)?)?.lmi;
        let path = out_dir.join(format!("{:03}-{}.dat-s", job.index, job.method.label()));
        export_sdpa(&lmi, &path)?;
        println!("{}", path.display());
        if let Some(result) = external {
            let ext = external_to_internal(&lmi, parse_external_objective(&fs::read_to_string(result)?)?);
            let internal = solve_lmi(&lmi, cfg)?.lower;
            println!("internal {internal:.12e}");
            println!("external {ext:.12e}");
            println!("difference {:.3e}", (internal - ext).abs());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    let cfg = SolverConfig { gap_tol: cli.gap_tol, max_iters: cli.max_iters, ..SolverConfig::default() };
    match cli.cmd {
        Cmd::Teleport { args, out } => run_sweep(args.plan()?, &out, &cfg, cli.quiet),
        Cmd::Qec { args, out } => run_sweep(args.plan()?, &out, &cfg, cli.quiet),
        Cmd::Export { out_dir, solve_external, what } => {
            let plan = match what {
                ExportWhat::Teleport(a) => a.plan()?,
                ExportWhat::Qec(a) => a.plan()?,
            };
            export(plan, &out_dir, solve_external.as_deref(), &cfg)
        }
        Cmd::Plot { csv, out } => emit(out.as_deref(), &render_svg(&fs::read_to_string(csv)?)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
