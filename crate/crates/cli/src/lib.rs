//! `assignforest` command line: data generation, corruption, training,
//! prediction, imputation and the simulation studies.
//!
//! Column numbers on the command line are 1-based. Every file path is
//! explicit; nothing is read from stdin or the environment.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use assignforest::data::{self, Mechanism, MechanismSpec, Target};
use assignforest::{Dataset, Forest, ForestParams, ImputationMethod, SearchMode, SplitRule};
use assignforest_bench as bench;
use clap::{Args, CommandFactory, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "assignforest", version, about = "Random forests with native missing-value assignation")]
pub struct Cli {
    /// Master seed (defaults to 0, or to the seed in a config file)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (defaults to the machine's parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a friedman1 dataset
    Gen {
        /// Number of rows
        #[arg(long)]
        n: usize,
        /// Standard deviation of the Gaussian noise on y
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        /// Output CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Mask cells of a dataset with a missing-data mechanism
    Corrupt(CorruptArgs),
    /// Train a forest and save it in the text format
    Train(TrainArgs),
    /// Predict every row of a dataset with a saved forest
    Predict {
        /// Forest file written by `train`
        #[arg(long)]
        forest: PathBuf,
        /// Input CSV; NA cells use the stochastic descent
        #[arg(long = "in")]
        input: PathBuf,
        /// Output CSV with a `prediction` column
        #[arg(long)]
        out: PathBuf,
    },
    /// Complete a dataset with an imputation method
    Impute(ImputeArgs),
    /// Every method under every mechanism at fixed rates
    StudyMechanisms(StudyArgs),
    /// Sweep the missing rate of x4
    StudyRates(StudyArgs),
    /// Sweep the missing rate of x4 in the test set
    StudyTestMissing(StudyArgs),
    /// Count criterion evaluations of both search modes against n
    ProbeComplexity {
        /// Comma-separated ascending row counts
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 400, 800])]
        n_grid: Vec<usize>,
        /// MCAR fraction applied to every column
        #[arg(long, default_value_t = 0.4)]
        missing: f64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Input CSV
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Mechanism config file (TOML); replaces the flags below
    #[arg(long, conflicts_with_all = ["mechanism", "col", "rate", "determining"])]
    pub config: Option<PathBuf>,
    /// MCAR, MAR1, MAR2, MAR3, MAR4, DEPY, LOG or COMP
    #[arg(long, required_unless_present = "config")]
    pub mechanism: Option<String>,
    /// Target column (1-based); repeat for several columns
    #[arg(long)]
    pub col: Vec<usize>,
    /// Missing fraction per target column, in the same order
    #[arg(long)]
    pub rate: Vec<f64>,
    /// Determining column per target column (1-based), for MAR1 to MAR4
    #[arg(long)]
    pub determining: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training CSV
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output forest file
    #[arg(long)]
    pub out: PathBuf,
    /// Split rule: assignation, mia or classic
    #[arg(long, default_value = "assignation")]
    pub rule: String,
    /// Assignation search: dichotomy or exhaustive
    #[arg(long, default_value = "dichotomy")]
    pub search: String,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    /// Number of trees
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Candidate features per node (default max(1, p/3))
    #[arg(long)]
    pub mtry: Option<usize>,
    /// Rows drawn per tree (default ceil(0.632 n))
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Cells with at most this many rows are not split
    #[arg(long)]
    pub nodesize: Option<usize>,
    /// Draw rows with replacement
    #[arg(long)]
    pub replacement: bool,
}

impl ForestArgs {
    fn params(&self, n: usize, p: usize, seed: u64) -> ForestParams {
        let d = ForestParams::defaults(n, p);
        let subsample = self.subsample.unwrap_or(d.subsample);
        ForestParams {
            n_trees: self.trees,
            mtry: self.mtry.unwrap_or(d.mtry),
            subsample,
            nodesize: self.nodesize.unwrap_or(d.nodesize.min(subsample)),
            replacement: self.replacement,
            ..d
        }
        .with_seed(seed)
    }
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    /// Input CSV with NA cells
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV with every cell filled
    #[arg(long)]
    pub out: PathBuf,
    /// median, breiman, ishioka or missforest
    #[arg(long)]
    pub method: String,
    /// Refinement rounds of the iterative methods
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    /// Neighbours for ishioka
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// CSV of every imputed value per iteration (iteration,row,column,value)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Experiment config file (TOML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Override the number of replicates
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Use 100 replicates
    #[arg(long, conflicts_with = "replicates")]
    pub full: bool,
    /// Also write variable importance on the complete training sets
    #[arg(long)]
    pub importance: bool,
}

/// The clap command tree, for help-text checks.
pub fn command() -> clap::Command {
    Cli::command()
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Dataset<f64>> {
    data::load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring threads")?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Gen { n, noise_sd, out } => {
            let d = data::gen_friedman1::<f64>(n, noise_sd, seed.unwrap_or(0))?;
            data::save_csv(&d, &out).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Corrupt(args) => corrupt(args, seed)?,
        Command::Train(args) => {
            let d = load(&args.input)?;
            let rule: SplitRule = args.rule.parse()?;
            let search: SearchMode = args.search.parse()?;
            let params = ForestParams {
                split_rule: rule,
                search_mode: search,
                ..args.forest.params(d.n_rows(), d.n_cols(), seed.unwrap_or(0))
            };
            let forest = assignforest::train_forest(&d, &params)?;
            forest.save(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
        }
        Command::Predict { forest, input, out } => {
            let f: Forest<f64> = Forest::load(&forest).with_context(|| format!("reading {}", forest.display()))?;
            let d = load(&input)?;
            let predictions = f.predict_dataset(&d, seed.unwrap_or(0))?;
            let mut w = csv::Writer::from_path(&out).with_context(|| format!("writing {}", out.display()))?;
            w.write_record(["prediction"])?;
            for p in predictions {
                w.write_record([p.to_string()])?;
            }
            w.flush()?;
        }
        Command::Impute(args) => {
            let d = load(&args.input)?;
            let mut method: ImputationMethod = args.method.parse()?;
            if let ImputationMethod::Ishioka { k_neighbors } = &mut method {
                *k_neighbors = args.k;
            }
            let params = args.forest.params(d.n_rows(), d.n_cols(), seed.unwrap_or(0));
            let out = method.run(&d, &params, args.iterations)?;
            data::save_csv(out.completed(), &args.out).with_context(|| format!("writing {}", args.out.display()))?;
            if let Some(trace) = args.trace {
                let mut w = csv::Writer::from_path(&trace).with_context(|| format!("writing {}", trace.display()))?;
                w.write_record(["iteration", "row", "column", "value"])?;
                for t in out.trace() {
                    w.write_record([t.iteration.to_string(), (t.row + 1).to_string(), (t.col + 1).to_string(), t.value.to_string()])?;
                }
                w.flush()?;
            }
        }
        Command::StudyMechanisms(args) => return study(args, seed, bench::run_mechanism_study),
        Command::StudyRates(args) => return study(args, seed, bench::run_rate_sweep),
        Command::StudyTestMissing(args) => return study(args, seed, bench::run_test_missing_sweep),
        Command::ProbeComplexity { n_grid, missing, out } => {
            let rows = bench::complexity_probe(&n_grid, missing, seed.unwrap_or(0))?;
            bench::emit_probe(&rows, &out)?;
            for mode in [SearchMode::Exhaustive, SearchMode::Dichotomy] {
                if let Some(s) = bench::log_log_slope(&rows, mode) {
                    eprintln!("{mode}: log-log slope {s:.3}");
                }
            }
        }
    }
    Ok(0)
}

fn corrupt(args: CorruptArgs, seed: Option<u64>) -> anyhow::Result<()> {
    let d = load(&args.input)?;
    let (spec, config_seed) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            MechanismSpec::from_config_str(&text)?
        }
        None => {
            let mechanism: Mechanism = args.mechanism.as_deref().unwrap_or_default().parse()?;
            if args.col.len() != args.rate.len() {
                bail!("give one --rate per --col");
            }
            if !args.determining.is_empty() && args.determining.len() != args.col.len() {
                bail!("give one --determining per --col");
            }
            if args.col.iter().chain(&args.determining).any(|&c| c == 0) {
                bail!("columns are numbered from 1");
            }
            let targets = args.col.iter().zip(&args.rate).map(|(&c, &r)| Target { column: c - 1, fraction: r }).collect();
            let determining: BTreeMap<usize, usize> =
                args.col.iter().zip(&args.determining).map(|(&c, &h)| (c - 1, h - 1)).collect();
            (MechanismSpec::new(mechanism, targets, determining)?, None)
        }
    };
    let out = data::apply_mechanism(&d, &spec, seed.or(config_seed).unwrap_or(0))?;
    data::save_csv(&out, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn study(
    args: StudyArgs,
    seed: Option<u64>,
    runner: fn(&bench::ExperimentConfig) -> bench::Result<Vec<bench::ExperimentResult>>,
) -> anyhow::Result<i32> {
    let mut config = match &args.config {
        Some(path) => bench::ExperimentConfig::load(path)?,
        None => bench::ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        config.master_seed = s;
    }
    if args.full {
        config.replicates = bench::FULL_REPLICATES;
    }
    if let Some(r) = args.replicates {
        config.replicates = r;
    }
    config.validate()?;
    let results = runner(&config)?;
    for r in &results {
        let status = match &r.outcome {
            Ok(m) => format!("mse {:.4} bias {:.4}", m.mse, m.bias),
            Err(e) => format!("FAILED {e}"),
        };
        eprintln!("{} {} rate {} rep {}: {status}", r.method, r.mechanism, r.rate_point, r.replicate);
    }
    bench::emit_results(&results, &args.out)?;
    if args.importance {
        let records = bench::run_importance_study(&config)?;
        bench::emit_importance(&records, &args.out)?;
    }
    let failed = results.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        eprintln!("{failed} cell(s) failed");
        return Ok(1);
    }
    Ok(0)
}
