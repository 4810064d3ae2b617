//! Subcommands `generate`, `solve`, `check`, `yield` and `scale`.
//!
//! Exit codes: 0 success or zero collisions, 1 usage or IO error, 2 no
//! collision-free layout found, 3 collisions found.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use freqalloc_core::{
    build_lattice, evaluate, instantiate_constraints, scale_yield, solve, Architecture, DeviceGraph,
    DispersionModel, Fallback, FrequencyAssignment, LatticeKind, LatticeSpec, SolveConfig, ThresholdTable,
    YieldEngine,
};

use crate::config::RunConfig;
use crate::io;
use crate::parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_COLLISIONS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "freqalloc", version, about = "Collision-free frequency allocation for transmon lattices")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads for `yield`.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a lattice graph as JSON.
    Generate(GenerateArgs),
    /// Solve the three-step allocation and write the layout.
    Solve(SolveArgs),
    /// Evaluate a layout and write per-instance margins.
    Check(CheckArgs),
    /// Monte-Carlo yield sweep over dispersions.
    Yield(YieldArgs),
    /// Apply the scaling law y_m^(N/n_m).
    Scale(ScaleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArchArg {
    CrQubit,
    CrQutrit,
    CzQubit,
}

impl From<ArchArg> for Architecture {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::CrQubit => Architecture::CrQubit,
            ArchArg::CrQutrit => Architecture::CrQutrit,
            ArchArg::CzQubit => Architecture::CzQubit,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FallbackArg {
    None,
    Anneal,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// chain, square, hexagon or heavy-hexagon.
    #[arg(long)]
    pub kind: Option<String>,
    /// Number of sites.
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub periodic: bool,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph JSON file.
    #[arg(long, conflicts_with = "kind")]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub lattice: LatticeArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Output file (default `<output>/graph.json`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum)]
    pub arch: Option<ArchArg>,
    /// Threshold table JSON.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Allocation band in MHz.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub band: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Seconds per step.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    #[arg(long, value_enum)]
    pub fallback: Option<FallbackArg>,
    #[arg(long)]
    pub step3_floor_fraction: Option<f64>,
    /// Output file (default `<output>/layout.json`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub layout: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum)]
    pub arch: Option<ArchArg>,
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Output file (default `<output>/collisions.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct YieldArgs {
    #[arg(long)]
    pub layout: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum)]
    pub arch: Option<ArchArg>,
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Dispersions in MHz, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Adds a column scaling each yield to this many sites.
    #[arg(long = "scale-n", alias = "scale-N")]
    pub scale_n: Option<u64>,
    /// Output file (default `<output>/yield.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Unit-cell yield.
    #[arg(long)]
    pub ym: f64,
    /// Unit-cell size.
    #[arg(long)]
    pub nm: u64,
    /// Device size.
    #[arg(long)]
    pub n: u64,
}

struct Session {
    config: RunConfig,
    seed: Option<u64>,
    output: PathBuf,
    quiet: bool,
    threads: usize,
}

impl Session {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn out_path(&self, explicit: &Option<PathBuf>, default: &str) -> Result<PathBuf> {
        let p = match explicit {
            Some(p) => p.clone(),
            None => self.output.join(default),
        };
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(p)
    }

    fn lattice(&self, args: &LatticeArgs) -> Result<Option<LatticeSpec>> {
        match (&args.kind, args.cells) {
            (Some(kind), cells) => {
                let kind: LatticeKind = kind.parse().map_err(|e| anyhow::anyhow!("{e}"))?;
                let cells = match cells.or(kind.standard_cell_size()) {
                    Some(c) => c,
                    None => bail!("--cells is required for lattice kind {kind}"),
                };
                Ok(Some(LatticeSpec::new(kind, cells, args.periodic)))
            }
            (None, Some(_)) => bail!("--cells needs --kind"),
            (None, None) => Ok(self.config.lattice.as_ref().map(|l| l.spec())),
        }
    }

    fn graph(&self, args: &GraphArgs) -> Result<DeviceGraph> {
        if let Some(path) = &args.graph {
            return Ok(io::read_graph(path)?);
        }
        if let Some(spec) = self.lattice(&args.lattice)? {
            return Ok(build_lattice(&spec)?);
        }
        if let Some(path) = &self.config.graph {
            return Ok(io::read_graph(path)?);
        }
        bail!("no graph given: use --graph, --kind/--cells, or a config file")
    }

    fn table(
        &self,
        file: &Option<PathBuf>,
        arch: Option<ArchArg>,
        layout_arch: Option<Architecture>,
    ) -> Result<ThresholdTable> {
        let mut table = match file {
            Some(p) => io::read_thresholds(p)?,
            None => {
                let mut t = ThresholdTable::default();
                self.config.thresholds.apply(&mut t);
                if let Some(a) = layout_arch.or(self.config.architecture) {
                    t.architecture = a;
                }
                t
            }
        };
        if let Some(a) = arch {
            table.architecture = a.into();
        }
        table.validate()?;
        Ok(table)
    }
}

fn load_context(cli: &Cli) -> Result<Session> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let output = cli
        .output
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(Session {
        seed: cli.seed,
        output,
        quiet: cli.quiet,
        threads: cli.threads.unwrap_or_else(parallel::default_threads),
        config,
    })
}

/// Runs one command and returns its exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let ctx = load_context(cli)?;
    match &cli.command {
        Command::Generate(a) => cmd_generate(&ctx, a),
        Command::Solve(a) => cmd_solve(&ctx, a),
        Command::Check(a) => cmd_check(&ctx, a),
        Command::Yield(a) => cmd_yield(&ctx, a),
        Command::Scale(a) => cmd_scale(&ctx, a),
    }
}

fn cmd_generate(ctx: &Session, args: &GenerateArgs) -> Result<i32> {
    let Some(spec) = ctx.lattice(&args.lattice)? else {
        bail!("generate needs --kind (or a lattice section in the config)");
    };
    let graph = build_lattice(&spec)?;
    let path = ctx.out_path(&args.out, "graph.json")?;
    io::write_graph(&path, &graph)?;
    ctx.say(format!(
        "{} nodes, {} edges -> {}",
        graph.node_count(),
        graph.directed_edges().len(),
        path.display()
    ));
    Ok(EXIT_OK)
}

fn solve_config(ctx: &Session, args: &SolveArgs) -> SolveConfig {
    let mut c = ctx.config.solver.clone();
    if let Some(b) = &args.band {
        c.band = (b[0], b[1]);
    }
    if let Some(a) = args.alpha {
        c.alpha = a;
    }
    if let Some(t) = args.time_limit {
        c.time_limit = t;
    }
    if let Some(n) = args.node_limit {
        c.node_limit = n;
    }
    if let Some(f) = args.fallback {
        c.fallback = match f {
            FallbackArg::None => Fallback::None,
            FallbackArg::Anneal => Fallback::Anneal,
        };
    }
    if let Some(f) = args.step3_floor_fraction {
        c.step3_floor_fraction = f;
    }
    if let Some(s) = ctx.seed {
        c.seed = s;
    }
    c
}

fn cmd_solve(ctx: &Session, args: &SolveArgs) -> Result<i32> {
    let graph = ctx.graph(&args.graph)?;
    let table = ctx.table(&args.thresholds, args.arch, None)?;
    let config = solve_config(ctx, args);
    let result = solve(&graph, &table, &config)?;
    let path = ctx.out_path(&args.out, "layout.json")?;
    let file = io::LayoutFile {
        architecture: table.architecture,
        result,
    };
    io::write_layout(&path, &file)?;
    let r = &file.result;
    ctx.say(format!("status: {}", r.status));
    ctx.say(format!("R: {} MHz", r.radius));
    for (t, v) in &r.type_radii {
        ctx.say(format!("  R[{t}]: {v} MHz"));
    }
    if let Some(m) = r.min_margin {
        ctx.say(format!("min margin: {m} MHz"));
    }
    for n in &r.notes {
        ctx.say(format!("note: {n}"));
    }
    ctx.say(format!(
        "nodes {} / pivots {} / {:.2} s -> {}",
        r.stats.nodes,
        r.stats.lp_pivots,
        r.stats.wall_time_s,
        path.display()
    ));
    if r.is_zero_collision() {
        Ok(EXIT_OK)
    } else {
        eprintln!("no collision-free layout found in band [{}, {}] MHz", config.band.0, config.band.1);
        Ok(EXIT_INFEASIBLE)
    }
}

fn load_layout(path: &Path, graph: &DeviceGraph) -> Result<(FrequencyAssignment, Option<Architecture>)> {
    let (a, arch) = io::read_layout(path)?;
    if a.freqs.len() != graph.node_count() {
        bail!(
            "{}: layout has {} frequencies, graph has {} nodes",
            path.display(),
            a.freqs.len(),
            graph.node_count()
        );
    }
    Ok((a, arch))
}

fn cmd_check(ctx: &Session, args: &CheckArgs) -> Result<i32> {
    let graph = ctx.graph(&args.graph)?;
    let (layout, layout_arch) = load_layout(&args.layout, &graph)?;
    let table = ctx.table(&args.thresholds, args.arch, layout_arch)?;
    let instances = instantiate_constraints(&graph, &table);
    let report = evaluate(&layout, &instances)?;
    let path = ctx.out_path(&args.out, "collisions.csv")?;
    io::write_csv_file(&path, |f| io::write_collision_csv(f, &instances, &report))?;
    for (t, n) in &report.counts {
        ctx.say(format!("{t}: {n} violated"));
    }
    ctx.say(format!(
        "min margin: {} MHz ({} instances) -> {}",
        report.min_margin,
        instances.len(),
        path.display()
    ));
    Ok(if report.is_zero_collision() {
        EXIT_OK
    } else {
        EXIT_COLLISIONS
    })
}

fn cmd_yield(ctx: &Session, args: &YieldArgs) -> Result<i32> {
    let graph = ctx.graph(&args.graph)?;
    let (layout, layout_arch) = load_layout(&args.layout, &graph)?;
    let table = ctx.table(&args.thresholds, args.arch, layout_arch)?;
    let engine = YieldEngine::new(&layout, &graph, &table)?;
    let sigmas = args.sigmas.clone().unwrap_or_else(|| ctx.config.dispersion.sigmas.clone());
    let trials = args.trials.unwrap_or(ctx.config.dispersion.trials);
    let seed = ctx.seed.unwrap_or(ctx.config.dispersion.seed);
    let mut rows = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        let y = parallel::estimate(&engine, &DispersionModel { sigma, trials, seed }, ctx.threads)?;
        let scaled = match args.scale_n {
            Some(n) => Some(scale_yield(y.yield_fraction, graph.node_count() as u64, n)?),
            None => None,
        };
        ctx.say(format!("sigma {sigma}: yield {} ± {}", y.yield_fraction, y.stderr));
        rows.push((y, scaled));
    }
    let path = ctx.out_path(&args.out, "yield.csv")?;
    io::write_csv_file(&path, |f| io::write_yield_csv(f, engine.types(), &rows))?;
    ctx.say(format!("-> {}", path.display()));
    Ok(EXIT_OK)
}

fn cmd_scale(_ctx: &Session, args: &ScaleArgs) -> Result<i32> {
    let y = scale_yield(args.ym, args.nm, args.n)?;
    println!("{y}");
    Ok(EXIT_OK)
}
