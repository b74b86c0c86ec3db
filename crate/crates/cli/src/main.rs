use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use asdal::config::ExperimentConfig;
use asdal::dataset::{load_dataset, save_dataset};
use asdal::error::{CliError, Result};
use asdal::results::{load_rows, save_rows, summary_json};
use asdal::run_experiment;
use asdal_core::engine::initial_threshold;
use asdal_core::metrics::{auc, pauc};
use asdal_core::scoring::{augmented_score, ScorerConfig};
use asdal_core::strategies::StrategyKind;
use asdal_core::synth::{generate, SynthConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "asdal", version, about = "Streaming active learning for embedding-based anomaly detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic train/test datasets.
    Synth {
        /// TOML file with synthetic-data parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Run the trial grid and write results.csv and summary.json.
    Run(RunArgs),
    /// Aggregate a persisted results CSV into a JSON summary.
    Report {
        results: PathBuf,
        /// Write summary.json here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Offline scoring of a test file against the initial model of a training file.
    Score {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write per-sample scores (CSV) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Test stream dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    train: Option<PathBuf>,
    /// Strategy name; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<String>,
    #[arg(long, conflicts_with = "budgets")]
    budget: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    budgets: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    path.map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load)
}

fn apply_flags(cfg: &mut ExperimentConfig, args: RunArgs) -> Result<()> {
    if let Some(p) = args.dataset {
        cfg.test = p;
    }
    if let Some(p) = args.train {
        cfg.train = p;
    }
    if !args.strategy.is_empty() {
        cfg.strategies = args
            .strategy
            .iter()
            .map(|s| s.parse::<StrategyKind>().map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<_>>()?;
    }
    if let Some(b) = args.budget {
        cfg.budgets = vec![b];
    }
    if !args.budgets.is_empty() {
        cfg.budgets = args.budgets;
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = args.$field { cfg.$field = v; } )* };
    }
    set!(trials, seed, gamma, alpha, window, out);
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn synth(config: Option<PathBuf>, seed: Option<u64>, out: PathBuf) -> Result<()> {
    let mut cfg = match &config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config {
                path: path.clone(),
                message: e.to_string(),
            })?;
            toml::from_str::<SynthConfig>(&text).map_err(|e| CliError::Config {
                path: path.clone(),
                message: e.to_string(),
            })?
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let data = generate(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    create_dir(&out)?;
    save_dataset(out.join("train.csv"), &data.train)?;
    save_dataset(out.join("test.csv"), &data.test)?;
    println!(
        "wrote {} train and {} test samples to {}",
        data.train.len(),
        data.test.len(),
        out.display()
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    apply_flags(&mut cfg, args)?;
    cfg.validate()?;
    let train = load_dataset(&cfg.train)?;
    let test = load_dataset(&cfg.test)?;
    let rows = run_experiment(&cfg, &train, &test)?;
    create_dir(&cfg.out)?;
    save_rows(&cfg.out.join("results.csv"), &rows)?;
    write_file(&cfg.out.join("summary.json"), &summary_json(&rows))?;
    println!("wrote {} rows to {}", rows.len(), cfg.out.display());
    Ok(())
}

fn report(results: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let rows = load_rows(&results)?;
    let json = summary_json(&rows);
    match out {
        Some(dir) => {
            create_dir(&dir)?;
            write_file(&dir.join("summary.json"), &json)
        }
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn score(
    train: PathBuf,
    dataset: PathBuf,
    gamma: Option<f64>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = load_config(config.as_deref())?;
    cfg.train = train;
    cfg.test = dataset;
    if let Some(g) = gamma {
        cfg.gamma = g;
    }
    cfg.validate()?;
    let scorer = ScorerConfig { gamma: cfg.gamma };
    let train = load_dataset(&cfg.train)?;
    let test = load_dataset(&cfg.test)?;
    let machines = asdal::runner::prepare(&cfg, &train, &test)?;

    let mut lines = String::from("id,machine,domain,label,score\n");
    println!("machine,auc,pauc,threshold");
    for m in &machines {
        let (mut anomalies, mut normals) = (Vec::new(), Vec::new());
        for s in &m.stream {
            let v = augmented_score(&s.embedding, &m.refs, &scorer).map_err(|e| CliError::data(&cfg.test, e))?;
            lines.push_str(&format!("{},{},{},{},{}\n", s.id, s.machine, s.domain.as_str(), s.label.code(), v));
            if s.label.is_anomalous() {
                anomalies.push(v);
            } else {
                normals.push(v);
            }
        }
        let fmt = |r: asdal_core::Result<f64>| r.map_or_else(|_| String::new(), |v| v.to_string());
        let h = initial_threshold(&m.score_pool, cfg.initial_quantile)
            .map_err(|e| CliError::data(&cfg.train, e))?;
        println!(
            "{},{},{},{}",
            m.name,
            fmt(auc(&anomalies, &normals)),
            fmt(pauc(&anomalies, &normals, cfg.max_fpr)),
            h
        );
    }
    if let Some(path) = out {
        write_file(&path, &lines)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Synth { config, seed, out } => synth(config, seed, out),
        Command::Run(args) => run(args),
        Command::Report { results, out } => report(results, out),
        Command::Score {
            train,
            dataset,
            gamma,
            config,
            out,
        } => score(train, dataset, gamma, config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
