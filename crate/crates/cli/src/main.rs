use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use repro_cli::{analyze, load, pvalue, render_text, run_coverage, ExperimentConfig, GridArg, ModelId};

#[derive(Parser)]
#[command(name = "repro", version, about = "Repro-samples confidence sets: coverage studies, analysis and p-values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate from the truth and record coverage and set size per replication.
    Coverage {
        #[command(flatten)]
        opts: Overrides,
    },
    /// Confidence set, diagnostics and member levels for a data file.
    Analyze {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long)]
        data: PathBuf,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// p-value of a null hypothesis for a data file.
    Pvalue {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated null values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        null: Vec<f64>,
    },
}

#[derive(Args)]
struct Overrides {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelId>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    v_size: Option<usize>,
    #[arg(long)]
    vc_size: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tau_max: Option<usize>,
    /// lo:hi:step
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridArg>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for reps.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated true parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    truth: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    coefficient: Option<usize>,
    /// Record per-replication wall-clock time.
    #[arg(long)]
    timing: bool,
}

impl Overrides {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(model, alpha, reps, seed, v_size, vc_size, lambda, tau_max, grid_points, truth, trials, zeta);
        if self.grid.is_some() {
            c.grid = self.grid;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        if self.n.is_some() {
            c.n = self.n;
        }
        if self.coefficient.is_some() {
            c.coefficient = self.coefficient;
        }
        c.timing |= self.timing;
        Ok(c)
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(f),
        None => f(),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Coverage { opts } => {
            let cfg = opts.resolve()?;
            let run = run_coverage(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&run.summary)?);
        }
        Command::Analyze { opts, data, json } => {
            let cfg = opts.resolve()?;
            let obs = load(cfg.model, &data)?;
            let report = in_pool(cfg.threads, || analyze(&cfg, &obs))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", render_text(&report));
            }
            if let Some(out) = &cfg.out {
                std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
                let path = out.join("analysis.json");
                std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Pvalue { opts, data, null } => {
            let cfg = opts.resolve()?;
            let obs = load(cfg.model, &data)?;
            let report = in_pool(cfg.threads, || pvalue(&cfg, &obs, &null))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
