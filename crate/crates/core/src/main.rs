use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use semshift::analysis::{
    frequency_stability_correlation, neighbor_trajectory, shift_ranking, stability_distribution, StabilityDistribution,
};
use semshift::clustering::{
    kmeans, pca_2d, select_hashtag_vectors, sweep_k, top_hashtags_per_cluster, write_pca_csv, write_silhouette_csv,
    write_top_hashtags_csv, SweepResult, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS,
};
use semshift::config::RunConfig;
use semshift::embedding::{label_from_path, load_frequencies, load_with_frequencies, save_with_frequencies};
use semshift::sgns::train;
use semshift::stability::{averaged_stability_table, load_stability_csv, save_stability_csv, stability_table};
use semshift::{apply_rotation, fit_pair, ComparedPair, EmbeddingSpace, Error, Result, RotationPair, StabilityRecord};

#[derive(Parser)]
#[command(
    name = "semshift",
    version,
    about = "Semantic shift detection with rotated embedding spaces"
)]
struct Cli {
    /// INI configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set train.dim=100`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads; 1 runs the deterministic single-threaded mode.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    config_dump: bool,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize raw line-delimited text into a token file plus stats JSON.
    Preprocess(PreprocessArgs),
    /// Train a skip-gram space on a token file.
    Train(TrainArgs),
    /// Fit rotations between two spaces in both directions.
    Align(AlignArgs),
    /// Two-way stability per word for a sequence of aligned spaces.
    Stability(StabilityArgs),
    /// Cluster hashtag vectors of one space.
    Cluster(ClusterArgs),
    /// Frequency correlations, shift ranking and neighbor trajectories.
    Report(ReportArgs),
    /// Run every stage over `[paths] corpora` into `[paths] output_dir`.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Defaults to the output path with a `.stats.json` extension.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    min_tokens: Option<usize>,
    #[arg(long)]
    drop_hashtags: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// word2vec text output; counts go to a `.vocab` file next to it.
    #[arg(long)]
    output: PathBuf,
    /// Start shared words from this space.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    lr_start: Option<f64>,
    #[arg(long)]
    lr_end: Option<f64>,
    #[arg(long)]
    subsample_threshold: Option<f64>,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Anchor words per direction.
    #[arg(long)]
    anchors: Option<usize>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct StabilityArgs {
    /// Spaces in order; give at least two.
    #[arg(long = "space", required = true)]
    spaces: Vec<PathBuf>,
    /// Rotation files for consecutive spaces.
    #[arg(long = "rotations", required = true)]
    rotations: Vec<PathBuf>,
    #[arg(long)]
    scope: Option<String>,
    #[arg(long)]
    output: PathBuf,
    /// Histogram JSON; defaults to the output path with `.histogram.json`.
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    min_frequency: Option<u64>,
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    stability: PathBuf,
    /// `<token> <count>` files; each gets its own correlation CSV.
    #[arg(long = "frequencies")]
    frequencies: Vec<PathBuf>,
    #[arg(long)]
    output_dir: PathBuf,
    /// Word whose neighborhood is traced through the spaces.
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated neighbor words.
    #[arg(long, value_delimiter = ',')]
    neighbors: Vec<String>,
    /// Spaces for the trajectory, mapped into the first one's frame.
    #[arg(long = "space")]
    spaces: Vec<PathBuf>,
    /// Rotation files for consecutive trajectory spaces.
    #[arg(long = "rotations")]
    rotations: Vec<PathBuf>,
    #[arg(long)]
    top_n: Option<usize>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Raw corpora in period order; overrides `[paths] corpora`.
    #[arg(long = "corpus")]
    corpora: Vec<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}

fn set_opt<T: ToString>(config: &mut RunConfig, section: &str, key: &str, value: &Option<T>) -> Result<()> {
    match value {
        Some(v) => config.set(section, key, &v.to_string()),
        None => Ok(()),
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        config.set_override(o)?;
    }
    set_opt(&mut config, "", "threads", &cli.threads)?;
    set_opt(&mut config, "", "seed", &cli.seed)?;
    let c = &mut config;
    match &cli.command {
        Some(Command::Preprocess(a)) => {
            set_opt(c, "preprocess", "stopwords", &a.stopwords.as_ref().map(|p| p.display()))?;
            set_opt(c, "preprocess", "min_tokens", &a.min_tokens)?;
            if a.drop_hashtags {
                c.set("preprocess", "keep_hashtags", "false")?;
            }
        }
        Some(Command::Train(a)) => {
            set_opt(c, "train", "dim", &a.dim)?;
            set_opt(c, "train", "window", &a.window)?;
            set_opt(c, "train", "min_count", &a.min_count)?;
            set_opt(c, "train", "epochs", &a.epochs)?;
            set_opt(c, "train", "negatives", &a.negatives)?;
            set_opt(c, "train", "lr_start", &a.lr_start)?;
            set_opt(c, "train", "lr_end", &a.lr_end)?;
            set_opt(c, "train", "subsample_threshold", &a.subsample_threshold)?;
        }
        Some(Command::Align(a)) => set_opt(c, "align", "anchors", &a.anchors)?,
        Some(Command::Stability(a)) => {
            set_opt(c, "stability", "scope", &a.scope)?;
            set_opt(c, "analysis", "bins", &a.bins)?;
        }
        Some(Command::Cluster(a)) => {
            set_opt(c, "cluster", "k_min", &a.k_min)?;
            set_opt(c, "cluster", "k_max", &a.k_max)?;
            set_opt(c, "cluster", "min_frequency", &a.min_frequency)?;
        }
        Some(Command::Report(a)) => set_opt(c, "analysis", "top_n", &a.top_n)?,
        Some(Command::Pipeline(a)) => {
            if !a.corpora.is_empty() {
                c.paths.corpora = a.corpora.clone();
            }
            if let Some(dir) = &a.output_dir {
                c.paths.output_dir = dir.clone();
            }
        }
        None => {}
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = effective_config(&cli)?;
    if cli.config_dump {
        print!("{}", config.dump());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Error::InvalidArgument("no subcommand given; see --help".into()));
    };
    match command {
        Command::Preprocess(a) => {
            let stats = a.stats.unwrap_or_else(|| a.output.with_extension("stats.json"));
            cmd_preprocess(&config, &a.input, &a.output, &stats)
        }
        Command::Train(a) => cmd_train(&config, 0, &a.corpus, a.init.as_deref(), &a.output).map(drop),
        Command::Align(a) => cmd_align(&config, &a.base, &a.target, &a.output),
        Command::Stability(a) => {
            let histogram = a.histogram.unwrap_or_else(|| a.output.with_extension("histogram.json"));
            cmd_stability(&config, &a.spaces, &a.rotations, &a.output, &histogram).map(drop)
        }
        Command::Cluster(a) => cmd_cluster(&config, &a.space, &a.output_dir),
        Command::Report(a) => {
            if let Some(target) = &a.target {
                let mut c = config.clone();
                c.analysis.trajectory_target = Some(target.clone());
                c.analysis.trajectory_neighbors = a.neighbors.clone();
                cmd_report(&c, &a.stability, &a.frequencies, &a.spaces, &a.rotations, &a.output_dir)
            } else {
                cmd_report(
                    &config,
                    &a.stability,
                    &a.frequencies,
                    &a.spaces,
                    &a.rotations,
                    &a.output_dir,
                )
            }
        }
        Command::Pipeline(_) => cmd_pipeline(&config),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn cmd_preprocess(config: &RunConfig, input: &Path, output: &Path, stats_path: &Path) -> Result<()> {
    let pipeline = config.pipeline_config()?;
    let stats = semshift::text::run_corpus(input, &pipeline, output)?;
    stats.save_json(stats_path)?;
    log::info!(
        "{}: kept {} documents, dropped {}",
        input.display(),
        stats.documents_kept,
        stats.documents_dropped
    );
    Ok(())
}

fn cmd_train(
    config: &RunConfig,
    period: usize,
    corpus: &Path,
    init: Option<&Path>,
    output: &Path,
) -> Result<EmbeddingSpace> {
    let init = init.map(load_with_frequencies).transpose()?;
    let mut space = train(corpus, &config.train_config(period), init.as_ref())?;
    space.set_label(label_from_path(output));
    save_with_frequencies(&space, output)?;
    Ok(space)
}

fn cmd_align(config: &RunConfig, base: &Path, target: &Path, output: &Path) -> Result<()> {
    let base = load_with_frequencies(base)?;
    let target = load_with_frequencies(target)?;
    let pair = fit_pair(&base, &target, config.anchors)?;
    log::info!(
        "{} -> {}: residual {:.4e}; back: residual {:.4e}",
        base.label(),
        target.label(),
        pair.forward.residual,
        pair.backward.residual
    );
    pair.save_json(output)
}

fn load_pairs(spaces: &[PathBuf], rotations: &[PathBuf]) -> Result<(Vec<EmbeddingSpace>, Vec<RotationPair>)> {
    if spaces.len() < 2 || rotations.len() + 1 != spaces.len() {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 spaces and n - 1 rotation files, got {} and {}",
            spaces.len(),
            rotations.len()
        )));
    }
    let spaces = spaces.iter().map(load_with_frequencies).collect::<Result<Vec<_>>>()?;
    let maps = rotations
        .iter()
        .map(RotationPair::load_json)
        .collect::<Result<Vec<_>>>()?;
    Ok((spaces, maps))
}

fn cmd_stability(
    config: &RunConfig,
    spaces: &[PathBuf],
    rotations: &[PathBuf],
    output: &Path,
    histogram: &Path,
) -> Result<Vec<StabilityRecord>> {
    let (spaces, maps) = load_pairs(spaces, rotations)?;
    let pairs = spaces
        .windows(2)
        .zip(maps)
        .map(|(w, m)| ComparedPair::new(&w[0], &w[1], m))
        .collect::<Result<Vec<_>>>()?;
    let records = match pairs.as_slice() {
        [single] => stability_table(single, config.scope)?,
        many => averaged_stability_table(many, config.scope)?,
    };
    save_stability_csv(&records, output)?;
    let dist = stability_distribution(&records, config.analysis.bins)?;
    write_text(histogram, &dist.to_json()?)?;
    log::info!(
        "{} words, {} sentinel; mean stability {:.4}",
        records.len(),
        dist.sentinels,
        dist.mean
    );
    Ok(records)
}

fn cmd_cluster(config: &RunConfig, space_path: &Path, output_dir: &Path) -> Result<()> {
    let space = load_with_frequencies(space_path)?;
    let (tokens, data) = select_hashtag_vectors(&space, config.cluster.min_frequency)?;
    let k_max = config.cluster.k_max.min(tokens.len().saturating_sub(1));
    if k_max < config.cluster.k_min {
        return Err(Error::InvalidArgument(format!(
            "{} hashtags are too few for k >= {}",
            tokens.len(),
            config.cluster.k_min
        )));
    }
    let sweep = sweep_k(&data, config.cluster.k_min..=k_max, config.seed)?;
    let result = kmeans(&data, sweep.best_k, config.seed, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS)?;
    let points = pca_2d(&data)?;
    let freqs = space.frequency_table().expect("frequencies attached on load");
    let tops = top_hashtags_per_cluster(&result, &tokens, &freqs, config.cluster.top_hashtags);

    #[derive(Serialize)]
    struct ClusterFile<'a> {
        space: &'a str,
        tokens: &'a [String],
        sweep: &'a SweepResult,
        result: &'a semshift::clustering::ClusterResult,
    }
    create_dir(output_dir)?;
    let label = space.label();
    let file = ClusterFile {
        space: label,
        tokens: &tokens,
        sweep: &sweep,
        result: &result,
    };
    let json = serde_json::to_string_pretty(&file)?;
    write_text(&output_dir.join(format!("{label}.clusters.json")), &json)?;
    write_silhouette_csv(
        &tokens,
        &result,
        create(&output_dir.join(format!("{label}.silhouette.csv")))?,
    )?;
    write_pca_csv(
        &tokens,
        &points,
        &result.assignments,
        create(&output_dir.join(format!("{label}.pca.csv")))?,
    )?;
    write_top_hashtags_csv(&tops, create(&output_dir.join(format!("{label}.top_hashtags.csv")))?)?;
    log::info!("{label}: {} hashtags, best k = {}", tokens.len(), sweep.best_k);
    Ok(())
}

#[derive(Serialize)]
struct Correlation {
    source: String,
    coefficient: f64,
    sample_size: usize,
}

#[derive(Serialize)]
struct Report {
    correlations: Vec<Correlation>,
    distribution: StabilityDistribution,
    least_stable: Vec<(String, f64)>,
}

fn cmd_report(
    config: &RunConfig,
    stability: &Path,
    frequencies: &[PathBuf],
    spaces: &[PathBuf],
    rotations: &[PathBuf],
    output_dir: &Path,
) -> Result<()> {
    let records = load_stability_csv(stability)?;
    create_dir(output_dir)?;
    let mut correlations = Vec::new();
    for path in frequencies {
        let source = label_from_path(path);
        let table = load_frequencies(path)?;
        let report = frequency_stability_correlation(&records, &table, &source)?;
        report.write_csv(create(&output_dir.join(format!("correlation_{source}.csv")))?)?;
        log::info!("Spearman(stab, {source} frequency) = {:.4}", report.coefficient);
        correlations.push(Correlation {
            source,
            coefficient: report.coefficient,
            sample_size: report.sample_size,
        });
    }
    let report = Report {
        correlations,
        distribution: stability_distribution(&records, config.analysis.bins)?,
        least_stable: shift_ranking(&records, config.analysis.top_n),
    };
    write_text(&output_dir.join("report.json"), &serde_json::to_string_pretty(&report)?)?;

    if let Some(target) = &config.analysis.trajectory_target {
        let (spaces, maps) = load_pairs(spaces, rotations)?;
        let mut framed = vec![spaces[0].clone()];
        for t in 1..spaces.len() {
            let mut s = spaces[t].clone();
            for m in maps[..t].iter().rev() {
                s = apply_rotation(&s, &m.backward)?;
            }
            framed.push(s);
        }
        let refs: Vec<&EmbeddingSpace> = framed.iter().collect();
        let trajectory = neighbor_trajectory(target, &refs, &config.analysis.trajectory_neighbors)?;
        write_text(&output_dir.join("trajectory.json"), &trajectory.to_json()?)?;
    }
    Ok(())
}

fn cmd_pipeline(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let corpora = &config.paths.corpora;
    if corpora.len() < 2 {
        return Err(Error::Config("[paths] corpora needs at least two files".into()));
    }
    let out = &config.paths.output_dir;
    create_dir(out)?;
    write_text(&out.join("config.ini"), &config.dump())?;

    let labels: Vec<String> = corpora.iter().map(|p| label_from_path(p)).collect();
    let mut space_paths: Vec<PathBuf> = Vec::new();
    for (period, (raw, label)) in corpora.iter().zip(&labels).enumerate() {
        let tokens = out.join(format!("{label}.tokens"));
        cmd_preprocess(config, raw, &tokens, &out.join(format!("{label}.stats.json")))?;
        let emb = out.join(format!("{label}.vec"));
        let init = (config.warm_start && period > 0).then(|| space_paths[period - 1].clone());
        cmd_train(config, period, &tokens, init.as_deref(), &emb)?;
        space_paths.push(emb);
    }

    let mut rotation_paths = Vec::new();
    for (w, l) in space_paths.windows(2).zip(labels.windows(2)) {
        let path = out.join(format!("{}__{}.rotation.json", l[0], l[1]));
        cmd_align(config, &w[0], &w[1], &path)?;
        rotation_paths.push(path);
    }

    let stab_name = format!("{}__{}", labels[0], labels[labels.len() - 1]);
    let stab_csv = out.join(format!("{stab_name}.stability.csv"));
    cmd_stability(
        config,
        &space_paths,
        &rotation_paths,
        &stab_csv,
        &out.join(format!("{stab_name}.histogram.json")),
    )?;

    let last = space_paths.last().expect("at least two periods");
    match cmd_cluster(config, last, &out.join("clusters")) {
        Err(e @ (Error::NoHashtags(_) | Error::InvalidArgument(_))) => log::warn!("skipping clustering: {e}"),
        other => other?,
    }

    let freq_files: Vec<PathBuf> = space_paths.iter().map(|p| p.with_extension("vocab")).collect();
    cmd_report(
        config,
        &stab_csv,
        &freq_files,
        &space_paths,
        &rotation_paths,
        &out.join("report"),
    )
}
