use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use rb2::config::RunSettings;
use rb2::dataset::{load_dataset, load_schedule, save_dataset};
use rb2::experiment::{run_experiment, run_label, Algorithm, RunResult};
use rb2::model::{parse_model, write_model};
use rb2::report::{group_series, render_summary, render_svg, summarize};
use rb2::roundlog::read_round_log;
use rb2_core::data::{generate_synthetic, SyntheticParams, SyntheticRule};
use rb2_core::distill::{distill, fidelity, prune, DEFAULT_DELTA};
use rb2_core::tilde::TreeParams;

#[derive(Parser)]
#[command(name = "rb2", version, about = "Relational boosted bandits experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run algorithms over seeds and write round logs, models and a summary.
    Run(RunArgs),
    /// Compress a boosted model into one tree and report its fidelity.
    Distill(DistillArgs),
    /// Plot cumulative regret from round-log CSVs as SVG.
    Plot(PlotArgs),
    /// Write the synthetic movie domain as a dataset directory.
    Generate(GenerateArgs),
}

const ALGOS: [&str; 5] = ["rb2-informed", "rb2-greedy", "epsilon-greedy", "batch-noexplore", "linucb"];

#[derive(Args)]
struct RunArgs {
    /// Flat key=value configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory holding facts.pl, examples.pl and modes.txt.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = clap::builder::PossibleValuesParser::new(ALGOS))]
    algo: Option<Vec<String>>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    trees_per_batch: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// informed, greedy or random; overrides the algorithm's sampler.
    #[arg(long)]
    sampler: Option<String>,
    /// Comma-separated LinUCB exploration weights.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Share of the examples logged by the cold-start policy.
    #[arg(long)]
    coldstart_frac: Option<f64>,
    /// Fact additions revealed during the run (`t: add pred(a,b).`).
    #[arg(long)]
    delta_schedule: Option<PathBuf>,
    /// Buffer entries sampled per batch (default: half the batch size).
    #[arg(long)]
    sample_size: Option<usize>,
    /// Comma-separated arm names the cold-start policy may play.
    #[arg(long)]
    coldstart_arms: Option<String>,
    /// Also write the model after every batch.
    #[arg(long)]
    checkpoints: bool,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    linucb_max_dim: Option<usize>,
    /// Keep buffer entries across batches.
    #[arg(long)]
    accumulate_buffer: bool,
    /// Fit one model per arm.
    #[arg(long)]
    per_arm_models: bool,
}

#[derive(Args)]
struct DistillArgs {
    /// Model file written by `rb2 run`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Sibling leaves closer than this are merged.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(required = true)]
    csv: Vec<PathBuf>,
    #[arg(long, default_value = "regret.svg")]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    users: usize,
    #[arg(long, default_value_t = 10)]
    movies: usize,
    #[arg(long, default_value_t = 0)]
    facts: usize,
    /// relational or propositional.
    #[arg(long, default_value = "relational")]
    rule: String,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Configuration problems exit with 2, everything else with 1.
struct UsageError(String);

fn settings(args: &RunArgs) -> Result<RunSettings, UsageError> {
    let mut s = RunSettings::default();
    let usage = |e: rb2::Error| UsageError(e.to_string());
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        s.apply_file(&text, &path.display().to_string()).map_err(usage)?;
    }
    let flags: [(&str, Option<String>); 19] = [
        ("dataset", args.dataset.as_ref().map(|p| p.display().to_string())),
        ("algo", args.algo.as_ref().map(|a| a.join(","))),
        ("seeds", args.seeds.clone()),
        ("batch-size", args.batch_size.map(|v| v.to_string())),
        ("batches", args.batches.map(|v| v.to_string())),
        ("trees-per-batch", args.trees_per_batch.map(|v| v.to_string())),
        ("tau", args.tau.map(|v| v.to_string())),
        ("epsilon", args.epsilon.map(|v| v.to_string())),
        ("eta", args.eta.map(|v| v.to_string())),
        ("sampler", args.sampler.clone()),
        ("alpha", args.alpha.clone()),
        ("out-dir", args.out_dir.as_ref().map(|p| p.display().to_string())),
        ("coldstart-frac", args.coldstart_frac.map(|v| v.to_string())),
        ("delta-schedule", args.delta_schedule.as_ref().map(|p| p.display().to_string())),
        ("sample-size", args.sample_size.map(|v| v.to_string())),
        ("coldstart-arms", args.coldstart_arms.clone()),
        ("max-depth", args.max_depth.map(|v| v.to_string())),
        ("linucb-max-dim", args.linucb_max_dim.map(|v| v.to_string())),
        ("checkpoints", args.checkpoints.then(|| "true".to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            s.set(k, &v).map_err(usage)?;
        }
    }
    if args.accumulate_buffer {
        s.set("accumulate-buffer", "true").map_err(usage)?;
    }
    if args.per_arm_models {
        s.set("per-arm-models", "true").map_err(usage)?;
    }
    s.validate().map_err(usage)?;
    Ok(s)
}

fn write(path: &Path, body: &str) -> anyhow::Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(s: &RunSettings) -> anyhow::Result<()> {
    let dir = s.dataset.as_ref().expect("validated");
    let mut dataset = load_dataset(dir)?;
    let deltas = match &s.delta_schedule {
        Some(p) => load_schedule(p, &mut dataset)?,
        None => Vec::new(),
    };
    let mut tasks = Vec::new();
    for &algo in &s.algos {
        let alphas = if algo == Algorithm::LinUcb { s.alphas.clone() } else { vec![s.experiment.alpha] };
        for alpha in alphas {
            let cfg = rb2::experiment::ExperimentConfig { alpha, ..s.experiment.clone() };
            for &seed in &s.seeds {
                tasks.push((algo, cfg.clone(), seed));
            }
        }
    }
    let width = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut results: Vec<RunResult> = Vec::with_capacity(tasks.len());
    for chunk in tasks.chunks(width) {
        let done: Vec<rb2::Result<RunResult>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(algo, cfg, seed)| {
                    let (ds, deltas) = (&dataset, &deltas);
                    scope.spawn(move || run_experiment(ds, deltas, *algo, *seed, cfg, s.checkpoints))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
        });
        for (r, (algo, cfg, seed)) in done.into_iter().zip(chunk) {
            results.push(r.with_context(|| format!("{} seed {seed}", run_label(*algo, cfg)))?);
        }
    }

    fs::create_dir_all(&s.out_dir).with_context(|| format!("creating {}", s.out_dir.display()))?;
    for r in &results {
        let stem = format!("{}-seed{}", r.label, r.seed);
        write(&s.out_dir.join(format!("{stem}.csv")), &r.csv()?)?;
        let schema = r.env.store().schema();
        if let Some(model) = &r.model {
            for (arm, m) in model.parts(&r.env) {
                write(&s.out_dir.join(format!("{stem}{arm}.model")), &write_model(m, schema))?;
            }
        }
        if let Some(v) = &r.vocabulary {
            write(&s.out_dir.join(format!("{stem}.vocab")), v)?;
        }
        if !r.checkpoints.is_empty() {
            let cdir = s.out_dir.join("checkpoints");
            fs::create_dir_all(&cdir)?;
            for (b, model) in &r.checkpoints {
                for (arm, m) in model.parts(&r.env) {
                    write(&cdir.join(format!("{stem}{arm}-batch{b}.model")), &write_model(m, schema))?;
                }
            }
        }
        if r.truncated {
            log::warn!("{stem}: ran out of rounds after {}", r.rounds.len());
        }
    }
    let finals: Vec<(String, u64)> = results.iter().map(|r| (r.label.clone(), r.final_regret())).collect();
    let summary = render_summary(&summarize(&finals));
    write(&s.out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_distill(a: &DistillArgs) -> anyhow::Result<()> {
    let ds = load_dataset(&a.dataset)?;
    let text = fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let model = parse_model(&text, &a.model.display().to_string(), ds.store.schema())?;
    if model.target() != ds.target() {
        bail!("model target does not match the dataset");
    }
    let queries: Vec<_> =
        ds.examples.iter().flat_map(|e| ds.arms().into_iter().map(|arm| ds.query(&e.context, arm))).collect();
    let params = TreeParams { max_depth: a.max_depth, ..TreeParams::default() };
    let tree = prune(&distill(&model, &queries, &ds.store, &ds.language, &params)?, a.delta);
    let fid = fidelity(&tree, &model, &queries, &ds.store)?;
    print!("{}", tree.display(ds.store.schema()));
    println!("fidelity {fid:.4} over {} queries", queries.len());
    Ok(())
}

fn cmd_plot(a: &PlotArgs) -> anyhow::Result<()> {
    let mut curves = Vec::new();
    for path in &a.csv {
        let log = read_round_log(path)?;
        let label = log
            .meta("label")
            .map(str::to_string)
            .unwrap_or_else(|| path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()));
        curves.push((label, log.regret()));
    }
    write(&a.out, &render_svg(&group_series(curves)))
}

fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<()> {
    let rule = match a.rule.as_str() {
        "relational" => SyntheticRule::Relational,
        "propositional" => SyntheticRule::Propositional,
        r => bail!("unknown rule `{r}` (expected relational or propositional)"),
    };
    let params = SyntheticParams {
        n_users: a.users,
        n_movies: a.movies,
        target_facts: a.facts,
        rule,
        noise: a.noise,
        seed: a.seed,
        ..SyntheticParams::default()
    };
    let dom = generate_synthetic(&params)?;
    save_dataset(&dom.dataset, &a.out)?;
    write(&a.out.join("rule.txt"), &format!("{}\n", dom.rule_text))?;
    println!("{}: {} facts, {} examples", a.out.display(), dom.dataset.store.len(), dom.dataset.examples.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => match settings(args) {
            Ok(s) => cmd_run(&s),
            Err(UsageError(msg)) => {
                eprintln!("error: {msg}\n\nFor more information, try 'rb2 run --help'.");
                return ExitCode::from(2);
            }
        },
        Command::Distill(a) => cmd_distill(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
