use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use segorder::induce::SpectralMethod;
use segorder::SyntheticKind;

#[derive(Debug, Parser)]
#[command(name = "segorder", version, about = "Score, induce and test linear orders of binary attributes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset file: dense 0/1 rows, or transactions with --sparse.
    #[arg(long)]
    pub data: PathBuf,

    /// Read the dataset as transactions (1-based attribute indices per line)
    /// over this many attributes.
    #[arg(long, value_name = "N_COLS")]
    pub sparse: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score an order by its BIC-optimal segment cover.
    Score {
        #[command(flatten)]
        data: DataArgs,
        /// Order file (one line of 1-based attribute indices); identity if omitted.
        #[arg(long)]
        order: Option<PathBuf>,
        /// Longest segment considered; defaults to the data-dependent safe bound.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Induce an order with a spectral or greedy method.
    Induce {
        #[command(flatten)]
        data: DataArgs,
        /// mi, m2, co, cs, greedy or greedy+<spectral method>.
        #[arg(long)]
        method: Method,
        #[arg(long)]
        seed: Seed,
        /// Fraction of rows used for induction.
        #[arg(long, default_value_t = 1.0)]
        train_fraction: f64,
        /// Starting order for plain greedy; identity if omitted.
        #[arg(long)]
        start: Option<PathBuf>,
        /// Also write the order line to this file.
        #[arg(long)]
        order_out: Option<PathBuf>,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Compare candidate orders with random orders on held-out rows.
    Signif {
        #[command(flatten)]
        data: DataArgs,
        /// Candidate order file; repeat for a set of orders.
        #[arg(long = "order", conflicts_with = "method")]
        orders: Vec<PathBuf>,
        /// Induce the candidates on the training rows with this method.
        #[arg(long, required_unless_present = "orders")]
        method: Option<Method>,
        /// Number of random orders.
        #[arg(long, default_value_t = segorder::significance::DEFAULT_RANDOM_ORDERS)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        #[arg(long)]
        seed: Seed,
        /// Cap on spectral candidate orders when ties allow many.
        #[arg(long, default_value_t = 1000)]
        max_candidates: usize,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Generate a synthetic dataset.
    Synth {
        /// ind, clust, path or npath.
        #[arg(long)]
        kind: SyntheticKind,
        #[arg(long, default_value_t = 20)]
        cols: usize,
        #[arg(long, default_value_t = 2000)]
        rows: usize,
        /// Density for ind/clust, flip probability for path/npath.
        #[arg(long)]
        param: Option<f64>,
        #[arg(long)]
        seed: Seed,
        /// Dense dataset output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlate p_emp of random orders with their chain df on path data.
    Asymptotic {
        #[arg(long, value_delimiter = ',', default_values_t = [1_000usize, 10_000, 100_000])]
        rows_list: Vec<usize>,
        /// Random orders per dataset size.
        #[arg(long, default_value_t = 1000)]
        orders: usize,
        #[arg(long, default_value_t = 0.25)]
        noise: f64,
        #[arg(long, default_value_t = 10)]
        items: usize,
        #[arg(long)]
        seed: Seed,
        /// Put the generating order first in the sample.
        #[arg(long)]
        include_identity: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Score { .. } => "score",
            Command::Induce { .. } => "induce",
            Command::Signif { .. } => "signif",
            Command::Synth { .. } => "synth",
            Command::Asymptotic { .. } => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral(SpectralMethod),
    /// Greedy descent, optionally started from a spectral order.
    Greedy(Option<SpectralMethod>),
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "greedy" {
            return Ok(Method::Greedy(None));
        }
        if let Some(start) = s.strip_prefix("greedy+") {
            return start
                .parse()
                .map(|m| Method::Greedy(Some(m)))
                .map_err(|e: segorder::Error| e.to_string());
        }
        s.parse()
            .map(Method::Spectral)
            .map_err(|e: segorder::Error| e.to_string())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Spectral(m) => f.write_str(m.name()),
            Method::Greedy(None) => f.write_str("greedy"),
            Method::Greedy(Some(m)) => write!(f, "greedy+{}", m.name()),
        }
    }
}

/// `--seed <u64>` or `--seed auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Fixed(u64),
    Auto,
}

impl FromStr for Seed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Seed::Auto);
        }
        s.parse()
            .map(Seed::Fixed)
            .map_err(|_| format!("expected a non-negative integer or \"auto\", got {s:?}"))
    }
}

impl Seed {
    /// The concrete seed; an automatic one is announced on stderr.
    pub fn resolve(self) -> u64 {
        match self {
            Seed::Fixed(s) => s,
            Seed::Auto => {
                let s: u64 = rand::random();
                eprintln!("seed: {s}");
                s
            }
        }
    }
}
