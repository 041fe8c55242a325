use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mrcg::network::Cost;
use mrcg::output;
use mrcg::sim::{self, AgentMode, SimConfig, Simulation};
use mrcg::sweep::{self, PresetKind, SweepSpec, FAST_REPLICATIONS};

/// Minority route-choice game on ring-and-hub networks.
#[derive(Parser, Debug)]
#[command(name = "mrcg", version, about)]
struct Cli {
    /// Worker threads for replications (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and print its measures.
    Run {
        #[command(flatten)]
        sim: SimArgs,
        /// Write the per-step trace (t, n_in, h, total_cost) as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the Nash-equilibrium baseline for one configuration and seed.
    Ne {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run a parameter sweep from a spec file or a named preset.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct SimArgs {
    /// TOML file with a simulation config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Network size N.
    #[arg(long)]
    nodes: Option<usize>,
    /// Number of hub links λ.
    #[arg(long)]
    hub_links: Option<usize>,
    /// Hub capacity L.
    #[arg(long)]
    capacity: Option<usize>,
    /// Memory length M.
    #[arg(long)]
    memory: Option<u32>,
    /// Strategies per agent S.
    #[arg(long)]
    strategies: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<AgentMode>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    /// Free-hub coefficient, e.g. 1/2.
    #[arg(long)]
    alpha: Option<Cost>,
    /// Congested-hub coefficient, e.g. 3/2.
    #[arg(long)]
    beta: Option<Cost>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// TOML sweep spec.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: baseline, heterogeneous, multi-scale, optimal-lambda.
    #[arg(long)]
    preset: Option<String>,
    /// Master seed; run i of every point uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per point.
    #[arg(long, conflicts_with = "fast")]
    reps: Option<usize>,
    /// Smoke-test setting: 50 replications per point.
    #[arg(long)]
    fast: bool,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

fn parse_mode(s: &str) -> std::result::Result<AgentMode, String> {
    s.parse()
}

impl SimArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_toml::<SimConfig>(path)?,
            None => SimConfig::baseline(4, 2),
        };
        let net = &mut cfg.network;
        macro_rules! apply {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        apply!(
            nodes => net.nodes,
            hub_links => net.hub_links,
            capacity => net.capacity,
            alpha => net.alpha,
            beta => net.beta,
        );
        apply!(
            seed => cfg.seed,
            memory => cfg.memory,
            strategies => cfg.strategies,
            mode => cfg.mode,
            steps => cfg.steps,
            warmup => cfg.warmup,
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cost(c: Cost) -> String {
    format!("{} ({:.4})", c, *c.numer() as f64 / *c.denom() as f64)
}

fn cmd_run(args: &SimArgs, trace_path: Option<&Path>) -> Result<()> {
    let cfg = args.resolve()?;
    let out = sim::run(&cfg, trace_path.is_some())?;
    let m = out.metrics;
    println!("avg_cost = {}", m.avg_cost);
    println!("congestion_ratio = {}", m.congestion_ratio);
    println!("avg_hub_users = {}", m.avg_hub_users);
    println!("std_hub_users = {}", m.std_hub_users);
    println!("n_p = {}", m.potential);
    println!("ne_best = {}", cost(out.equilibrium.best));
    println!("ne_worst = {}", cost(out.equilibrium.worst));
    if let (Some(path), Some(trace)) = (trace_path, out.trace.as_deref()) {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        sim::write_trace_csv(trace, std::io::BufWriter::new(file))?;
        eprintln!("trace written to {}", path.display());
    }
    Ok(())
}

fn cmd_ne(args: &SimArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let sim = Simulation::new(&cfg)?;
    let ne = sim.equilibrium();
    println!("n_p = {}", ne.potential);
    println!("capacity = {}", cfg.network.capacity);
    println!("ne_best = {}", cost(ne.best));
    println!("ne_worst = {}", cost(ne.worst));
    Ok(())
}

fn emit(rows: &[sweep::SweepRow], dir: &Path, stem: &str, x_label: &str, format: Format) -> Result<()> {
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{stem}.csv"));
        output::write_csv_file(rows, &path)?;
        eprintln!("wrote {}", path.display());
    }
    if matches!(format, Format::Svg | Format::Both) {
        for path in output::write_svg_files(rows, dir, stem, x_label)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let replications = if args.fast { Some(FAST_REPLICATIONS) } else { args.reps };
    let (kind, mut specs) = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let p = sweep::preset(
                name,
                args.seed.unwrap_or(0),
                replications.unwrap_or(sweep::DEFAULT_REPLICATIONS),
            )?;
            (p.kind, p.specs)
        }
        (None, Some(path)) => {
            let spec: SweepSpec = read_toml(path)?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sweep".into());
            let kind = if spec.sweep_variable == sweep::SweepVariable::CapacityRatio && !spec.lambda_grid.is_empty() {
                PresetKind::OptimalLambda
            } else {
                PresetKind::Sweep
            };
            (kind, vec![(stem, spec)])
        }
        (None, None) => bail!("either --config or --preset is required"),
    };
    for (_, spec) in &mut specs {
        if let Some(seed) = args.seed {
            spec.base.seed = seed;
        }
        if let Some(r) = replications {
            spec.replications = r;
        }
    }

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    for (stem, spec) in &specs {
        eprintln!(
            "{stem}: {} values x {} modes x {} runs",
            spec.values.len(),
            spec.modes().len(),
            spec.replications
        );
        match kind {
            PresetKind::Sweep => {
                let rows = sweep::run_sweep(spec)?;
                emit(&rows, &args.out_dir, stem, spec.sweep_variable.label(), args.format)?;
            }
            PresetKind::OptimalLambda => {
                let table = sweep::optimal_lambda(spec)?;
                for t in &table {
                    println!(
                        "L/N = {:<4} L = {:<3} optimal lambda = {:<3} avg_cost = {:.4}",
                        t.capacity_ratio, t.capacity, t.lambda, t.avg_cost
                    );
                    let curve_stem = format!("{stem}_ratio{:.2}", t.capacity_ratio);
                    emit(&t.curve, &args.out_dir, &curve_stem, "hub links", args.format)?;
                }
                let path = args.out_dir.join(format!("{stem}.csv"));
                let mut buf = Vec::new();
                output::write_optimal_lambda_csv(&table, &mut buf)?;
                fs::write(&path, buf)?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon_threads(jobs)?;
    }
    match &cli.command {
        Command::Run { sim, trace } => cmd_run(sim, trace.as_deref()),
        Command::Ne { sim } => cmd_ne(sim),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn rayon_threads(jobs: usize) -> Result<()> {
    if jobs == 0 {
        bail!("--jobs must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    Ok(())
}
