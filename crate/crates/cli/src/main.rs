use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conflict_min::{ConflictMeasure, Execution, Method};
use conflict_min_cli::report::{append_csv, write_csv};
use conflict_min_cli::{run, sweep, CliError, Distribution, ExperimentConfig, Normalization, OpinionSource, RunReport};

#[derive(Parser)]
#[command(name = "conflict-min", version, about = "Select nodes whose zeroed opinions most reduce conflict")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one selection method for a single budget.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(short = 'k')]
        k: usize,
        /// Report Γ against this reference drop.
        #[arg(long)]
        reference_delta: Option<f64>,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append a CSV row to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Every budget from 1 to K for several methods, as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_max: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Greedy, MethodArg::GreedyAc, MethodArg::Random, MethodArg::Pagerank])]
        methods: Vec<MethodArg>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Whitespace-separated edge list.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    measure: MeasureArg,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Distribution::Uniform)]
    opinions: Distribution,
    /// Exponential rate or power-law exponent.
    #[arg(long)]
    dist_param: Option<f64>,
    #[arg(long, value_enum, default_value_t = Normalization::Max)]
    normalization: Normalization,
    /// `id value` lines; overrides --opinions.
    #[arg(long)]
    opinion_file: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Seed for the opinion draw; defaults to --seed.
    #[arg(long)]
    opinion_seed: Option<u64>,
    #[arg(long, default_value_t = 1e-8)]
    solver_tol: f64,
    #[arg(long)]
    sketch_dim: Option<usize>,
    /// Sketch rows are this factor times ln n (at least 8).
    #[arg(long, default_value_t = 4.0)]
    sketch_factor: f64,
    #[arg(long)]
    theoretical_tolerances: bool,
    #[arg(long, default_value_t = conflict_min::greedy::DEFAULT_DAMPING)]
    damping: f64,
    /// Disable multithreading.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Resistance,
    Controversy,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Greedy,
    GreedyAc,
    Random,
    Pagerank,
    BruteForce,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Greedy => Method::Greedy,
            MethodArg::GreedyAc => Method::GreedyAc,
            MethodArg::Random => Method::Random,
            MethodArg::Pagerank => Method::PageRank,
            MethodArg::BruteForce => Method::BruteForce,
        }
    }
}

impl Common {
    fn config(&self, method: Method, k: usize) -> ExperimentConfig {
        let measure = match self.measure {
            MeasureArg::Resistance => ConflictMeasure::Resistance,
            MeasureArg::Controversy => ConflictMeasure::Controversy,
        };
        let mut c = ExperimentConfig::new(&self.graph, measure, method, k);
        c.epsilon = self.epsilon;
        c.opinions = match &self.opinion_file {
            Some(path) => OpinionSource::File { path: path.clone() },
            None => OpinionSource::Distribution {
                distribution: self.opinions,
                param: self.dist_param,
                normalization: self.normalization,
            },
        };
        c.seed = self.seed;
        c.opinion_seed = self.opinion_seed.unwrap_or(self.seed);
        c.solver_tolerance = self.solver_tol;
        c.sketch_dimension = self.sketch_dim;
        c.sketch_factor = self.sketch_factor;
        c.theoretical_tolerances = self.theoretical_tolerances;
        c.damping = self.damping;
        if self.sequential {
            c.execution = Execution::Sequential;
        }
        c
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            common,
            method,
            k,
            reference_delta,
            out,
            csv,
        } => {
            let mut config = common.config(method.into(), k);
            config.reference_delta = reference_delta;
            let report = run(&config)?;
            println!("{}", RunReport::table_header());
            println!("{}", report.table_row());
            if let Some(path) = out {
                report.write_json(&path)?;
            }
            if let Some(path) = csv {
                append_csv(&path, &[report.sweep_row()])?;
            }
        }
        Command::Sweep {
            common,
            k_max,
            methods,
            out,
        } => {
            let methods: Vec<Method> = methods.into_iter().map(Method::from).collect();
            let config = common.config(methods.first().copied().unwrap_or(Method::Greedy), k_max);
            let rows = sweep(&config, &methods, k_max)?;
            write_csv(&out, &rows)?;
            println!("{} rows written to {}", rows.len(), out.display());
        }
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
