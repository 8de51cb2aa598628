//! Command-line front end: search | refine | pipeline | validate | render.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checkpoint::{write_text, Checkpoint, RngDescriptor, FORMAT_VERSION};
use crate::diverse::DiverseSet;
use crate::document;
use crate::error::{CaseError, CatalogError, CheckpointError, LayoutError, RefineError};
use crate::model::TrussLayout;
use crate::refine::{refine_rng, run_refinement, EnvConfig, RefineParams};
use crate::render::{render_svg, Palette, RenderStyle};
use crate::report::{RunFlags, RunManifest, ValidationReport};
use crate::search::{run_search, SearchParams};
use crate::testbeds::{resolve_case, CaseConfig};

pub const SEARCH_CHECKPOINT: &str = "search.json";
pub const SEARCH_MANIFEST: &str = "search-manifest.json";
pub const REFINED_CHECKPOINT: &str = "refined.json";
pub const REFINE_MANIFEST: &str = "refine-manifest.json";
pub const TRAINING_LOG: &str = "training-log.jsonl";

#[derive(Debug, Parser)]
#[command(name = "trussforge", version, about = "Truss layout search and refinement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tree search for valid layouts; writes a checkpoint of the diverse set.
    Search(SearchArgs),
    /// Reinforcement-learning refinement of a search checkpoint.
    Refine(RefineArgs),
    /// Search followed by refinement.
    Pipeline(PipelineArgs),
    /// Check a layout against a case; exits 1 when it is invalid.
    Validate(ValidateArgs),
    /// Draw a layout, or the best layout of a checkpoint, as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Bundled case name or path to a case file.
    #[arg(long, default_value = "ten-bar-load1")]
    pub case: String,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    /// Search iterations.
    #[arg(long, default_value_t = 50_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Reward scale; defaults to ten times the squared reference mass.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Independent search trees run in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetSize {
    /// Small network and sparse updates.
    Desk,
    /// Full-size network, batch 256, one update per step.
    Full,
}

#[derive(Debug, Args)]
pub struct RefineOptions {
    #[arg(long, default_value_t = 20_000)]
    pub rl_steps: u64,
    /// Start episodes only from the globally lightest layouts.
    #[arg(long)]
    pub no_diverse: bool,
    /// Invalid proposals tolerated per episode.
    #[arg(long, default_value_t = 5)]
    pub max_invalid: usize,
    #[arg(long, default_value_t = 20)]
    pub episode_len: usize,
    #[arg(long, value_enum, default_value_t = NetSize::Desk)]
    pub net: NetSize,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    /// Search checkpoint to refine.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory; defaults to the checkpoint's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub options: RefineOptions,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub refine: RefineOptions,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Layout document.
    pub layout: PathBuf,
    #[arg(long)]
    pub case: String,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Layout document or checkpoint.
    pub input: PathBuf,
    /// Case for a bare layout; a checkpoint names its own.
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    /// SVG file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PaletteArg::Stress)]
    pub palette: PaletteArg,
    /// Canvas width, px.
    #[arg(long, default_value_t = 800.0)]
    pub width: f64,
    #[arg(long)]
    pub no_labels: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PaletteArg {
    Stress,
    Mono,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<CaseError> for CliError {
    fn from(e: CaseError) -> Self {
        match e {
            CaseError::Io { .. } | CaseError::Catalog(CatalogError::Io { .. }) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<RefineError> for CliError {
    fn from(e: RefineError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Successful outcome: the process exit code.
pub type Outcome = Result<u8, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Search(args) => cmd_search(&args).map(|_| 0),
        Command::Refine(args) => cmd_refine(&args),
        Command::Pipeline(args) => cmd_pipeline(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Render(args) => cmd_render(&args),
    }
}

fn load(case: &str, max_nodes: Option<usize>) -> Result<CaseConfig, CliError> {
    Ok(resolve_case(case, max_nodes)?)
}

fn flags(jobs: usize, env: &EnvConfig) -> RunFlags {
    RunFlags {
        jobs,
        no_diverse: env.no_diverse,
        max_invalid: env.max_invalid,
        episode_len: env.episode_len,
    }
}

/// Runs the search and writes its checkpoint and manifest into `args.out`.
pub fn cmd_search(args: &SearchArgs) -> Result<Checkpoint, CliError> {
    if args.budget == 0 {
        return Err(CliError::Usage("--budget must be at least 1".into()));
    }
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if args.kappa.is_some_and(|k| !(k.is_finite() && k > 0.0)) {
        return Err(CliError::Usage("--kappa must be positive".into()));
    }
    let case = load(&args.case, args.max_nodes)?;
    let clock = Instant::now();
    let params = SearchParams {
        kappa: args.kappa,
        ..SearchParams::default()
    };
    let out = run_search(&case, params, args.budget, args.seed, args.jobs);
    let cp = Checkpoint {
        format: FORMAT_VERSION,
        case: args.case.clone(),
        max_nodes: case.max_nodes,
        seed: args.seed,
        jobs: args.jobs,
        kappa: out.kappa,
        search_iterations: out.iterations,
        rl_steps: 0,
        rng: RngDescriptor::chacha8(args.seed, out.rng_words),
        diverse: out.diverse.to_document(),
        agent: None,
        replay: None,
    };
    cp.write(&args.out.join(SEARCH_CHECKPOINT))?;
    let manifest = RunManifest {
        command: "search".into(),
        case: args.case.clone(),
        max_nodes: case.max_nodes,
        seed: args.seed,
        search_iterations: args.budget,
        rl_steps: 0,
        kappa: out.kappa,
        flags: flags(args.jobs, &EnvConfig::default()),
        out_dir: args.out.clone(),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        iterations_done: out.iterations,
        rl_steps_done: 0,
        episodes: 0,
        best_mass: out.diverse.best_mass(),
        topology_count: out.diverse.topology_count(),
    };
    write_text(&args.out.join(SEARCH_MANIFEST), &(manifest.to_json() + "\n"))?;
    match out.diverse.best_mass() {
        Some(m) => println!(
            "search: {} iterations, {} topologies, best mass {m:.3} kg",
            out.iterations,
            out.diverse.topology_count()
        ),
        None => println!("search: {} iterations, no valid layout found", out.iterations),
    }
    Ok(cp)
}

fn refine_params(opts: &RefineOptions) -> Result<RefineParams, CliError> {
    if opts.episode_len == 0 {
        return Err(CliError::Usage("--episode-len must be at least 1".into()));
    }
    let base = match opts.net {
        NetSize::Desk => RefineParams::desk(),
        NetSize::Full => RefineParams::full(),
    };
    Ok(RefineParams {
        rl_steps: opts.rl_steps,
        env: EnvConfig {
            episode_len: opts.episode_len,
            max_invalid: opts.max_invalid,
            no_diverse: opts.no_diverse,
        },
        ..base
    })
}

fn refine_checkpoint(cp: &Checkpoint, seed: u64, opts: &RefineOptions, out: &Path) -> Outcome {
    let params = refine_params(opts)?;
    let case = load(&cp.case, Some(cp.max_nodes))?;
    let start = cp.diverse_set()?;
    if start.is_empty() {
        return Err(RefineError::NothingToRefine.into());
    }
    let clock = Instant::now();
    let mut rng = refine_rng(seed);
    let mut log = String::new();
    let outcome = run_refinement(&case, &start, cp.kappa, &params, &mut rng, |r| {
        log.push_str(&serde_json::to_string(r).expect("log records serialize"));
        log.push('\n');
    })?;
    let refined = Checkpoint {
        rl_steps: outcome.steps,
        rng: RngDescriptor::chacha8(seed, [rng.get_word_pos()]),
        diverse: outcome.refined.to_document(),
        agent: outcome.agent.as_ref().map(|a| a.weights()),
        replay: Some(outcome.replay),
        ..cp.clone()
    };
    refined.write(&out.join(REFINED_CHECKPOINT))?;
    write_text(&out.join(TRAINING_LOG), &log)?;
    let best = outcome.refined.best();
    let manifest = RunManifest {
        command: "refine".into(),
        case: cp.case.clone(),
        max_nodes: cp.max_nodes,
        seed,
        search_iterations: cp.search_iterations,
        rl_steps: opts.rl_steps,
        kappa: cp.kappa,
        flags: flags(cp.jobs, &params.env),
        out_dir: out.to_path_buf(),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        iterations_done: cp.search_iterations,
        rl_steps_done: outcome.steps,
        episodes: outcome.episodes,
        best_mass: best.map(|e| e.mass),
        topology_count: outcome.refined.topology_count(),
    };
    write_text(&out.join(REFINE_MANIFEST), &(manifest.to_json() + "\n"))?;
    let before = start.best_mass().expect("start set is non-empty");
    let best = best.expect("refined set is never empty");
    println!(
        "refine: {} steps, {} episodes, best mass {before:.3} -> {:.3} kg",
        outcome.steps, outcome.episodes, best.mass
    );
    println!(
        "best layout: {:.3} kg, {} nodes, {} bars",
        best.mass,
        best.layout.node_count(),
        best.layout.bar_count()
    );
    Ok(0)
}

pub fn cmd_refine(args: &RefineArgs) -> Outcome {
    let cp = Checkpoint::read(&args.checkpoint)?;
    let out = match &args.out {
        Some(dir) => dir.clone(),
        None => args.checkpoint.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    refine_checkpoint(&cp, args.seed, &args.options, &out)
}

pub fn cmd_pipeline(args: &PipelineArgs) -> Outcome {
    refine_params(&args.refine)?;
    let cp = cmd_search(&args.search)?;
    refine_checkpoint(&cp, args.search.seed, &args.refine, &args.search.out)
}

fn read_layout(path: &Path) -> Result<TrussLayout, CliError> {
    match document::read_layout(path) {
        Ok(Ok(layout)) => Ok(layout),
        Ok(Err(e)) => Err(CliError::Io(format!("{}: {e}", path.display()))),
        Err(e) => Err(CliError::Io(format!("cannot read {}: {e}", path.display()))),
    }
}

pub fn cmd_validate(args: &ValidateArgs) -> Outcome {
    let case = load(&args.case, args.max_nodes)?;
    let layout = read_layout(&args.layout)?;
    if layout.dim() != case.dim {
        return Err(CliError::Usage(format!(
            "layout is {}D but case {} is {}D",
            layout.dim().count(),
            case.name,
            case.dim.count()
        )));
    }
    let report = ValidationReport::new(&layout, &case);
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.is_valid() { 0 } else { 1 })
}

/// A bare layout, or the best layout of a checkpoint together with the case it names.
fn render_input(args: &RenderArgs) -> Result<(TrussLayout, CaseConfig), CliError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.input.display())))?;
    if let Ok(cp) = Checkpoint::from_json(&text) {
        let case = load(args.case.as_deref().unwrap_or(&cp.case), args.max_nodes.or(Some(cp.max_nodes)))?;
        let set: DiverseSet = cp.diverse_set()?;
        let best = set
            .best()
            .ok_or_else(|| CliError::Usage("checkpoint holds no layout to render".into()))?;
        return Ok((best.layout.clone(), case));
    }
    let layout = document::deserialize(&text)
        .map_err(|e: LayoutError| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let name = args
        .case
        .as_deref()
        .ok_or_else(|| CliError::Usage("--case is required to render a bare layout".into()))?;
    Ok((layout, load(name, args.max_nodes)?))
}

pub fn cmd_render(args: &RenderArgs) -> Outcome {
    if !(args.width.is_finite() && args.width > 200.0) {
        return Err(CliError::Usage("--width must exceed 200".into()));
    }
    let (layout, case) = render_input(args)?;
    let style = RenderStyle {
        width: args.width,
        palette: match args.palette {
            PaletteArg::Stress => Palette::Stress,
            PaletteArg::Mono => Palette::Mono,
        },
        labels: !args.no_labels,
        ..RenderStyle::default()
    };
    write_text(&args.out, &render_svg(&layout, &case, &style))?;
    println!("wrote {} ({:.3} kg)", args.out.display(), case.mass(&layout));
    Ok(0)
}

