mod args;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use segorder::dataset::{gen_synthetic, load_dense, load_sparse, split};
use segorder::experiment::{asymptotic, derive_seed, AsymptoticConfig};
use segorder::induce::{greedy_order, spectral_orders};
use segorder::segmodel::{effective_max_len, score_order};
use segorder::significance::{evaluate_order_set, SignificanceReport};
use segorder::{BinaryDataset, Error, Order, SyntheticKind};

use args::{Cli, Command, DataArgs, Format, Method};
use report::{render, tsv_table, with_meta, Meta};

const STAGE_SPLIT: u64 = 2;
const STAGE_RANDOM: u64 = 3;
const STAGE_CANDIDATES: u64 = 4;

/// A failed run, split by exit code.
#[derive(Debug)]
enum Failure {
    /// Bad flags, unreadable or malformed input: exit 2.
    Usage(String),
    /// The computation itself failed: exit 1.
    Compute(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Compute(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

type Run<T> = Result<T, Failure>;

fn load(data: &DataArgs) -> Run<BinaryDataset> {
    let ds = match data.sparse {
        Some(k) => load_sparse(&data.data, k)?,
        None => load_dense(&data.data)?,
    };
    Ok(ds)
}

fn read_order(path: &Path, n_cols: usize) -> Run<Order> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let order: Order = line
        .parse()
        .map_err(|e: Error| Failure::Usage(format!("{}: {e}", path.display())))?;
    if order.len() != n_cols {
        return Err(Error::DimensionMismatch {
            expected: n_cols,
            found: order.len(),
        }
        .into());
    }
    Ok(order)
}

fn train_split(ds: &BinaryDataset, fraction: f64, seed: u64) -> Run<BinaryDataset> {
    if fraction == 1.0 {
        return Ok(ds.clone());
    }
    Ok(split(ds, fraction, derive_seed(seed, STAGE_SPLIT))?.0)
}

/// Candidate orders for `method` on `train`.
fn induce(
    train: &BinaryDataset,
    method: Method,
    seed: u64,
    start: Option<Order>,
    max_candidates: usize,
    max_len: usize,
) -> Run<Vec<Order>> {
    let seed = derive_seed(seed, STAGE_CANDIDATES);
    let orders = match method {
        Method::Spectral(m) => spectral_orders(train, m)?.candidates(max_candidates, seed),
        Method::Greedy(from) => {
            let start = match (from, start) {
                (Some(m), _) => spectral_orders(train, m)?.sample(seed),
                (None, Some(o)) => o,
                (None, None) => Order::identity(train.n_cols()),
            };
            vec![greedy_order(train, &start, max_len)?.order]
        }
    };
    Ok(orders)
}

#[derive(Serialize)]
struct ScoreReport {
    n_rows: usize,
    n_cols: usize,
    order: String,
    score: f64,
    log_likelihood: f64,
    df: u64,
    penalty: f64,
    cover: Vec<[usize; 2]>,
    #[serde(rename = "L_max")]
    l_max: usize,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct InduceReport {
    method: String,
    order: String,
    train_rows: usize,
    /// Score of the order on the rows it was induced from.
    train_score: f64,
}

#[derive(Serialize)]
struct SignifReport {
    candidates: String,
    train_rows: usize,
    test_rows: usize,
    #[serde(flatten)]
    report: SignificanceReport,
}

#[derive(Serialize)]
struct SynthReport {
    kind: &'static str,
    rows: usize,
    cols: usize,
    /// `None` for clust, which has fixed densities.
    param: Option<f64>,
    out: PathBuf,
}

#[derive(Serialize)]
struct AsymptoticTsvRow<'a> {
    n_rows: usize,
    rho: Option<f64>,
    df: u64,
    p_emp: f64,
    score: f64,
    order: &'a str,
}

fn run(cli: &Cli) -> Run<String> {
    let name = cli.command.name();
    let (meta, body): (Meta, Value) = match &cli.command {
        Command::Score {
            data,
            order,
            max_len,
        } => {
            let ds = load(data)?;
            let k = ds.n_cols();
            let order = match order {
                Some(p) => read_order(p, k)?,
                None => Order::identity(k),
            };
            let l_max = max_len
                .unwrap_or_else(|| effective_max_len(ds.n_rows(), k))
                .clamp(1, k);
            let t = Instant::now();
            let (cover, score) = score_order(&ds, &order, Some(l_max))?;
            let wall_time_ms = t.elapsed().as_secs_f64() * 1000.0;
            let body = ScoreReport {
                n_rows: ds.n_rows(),
                n_cols: k,
                order: order.to_string(),
                score: score.total,
                log_likelihood: score.log_likelihood,
                df: score.df,
                penalty: score.penalty,
                cover: cover.to_one_based(),
                l_max,
                wall_time_ms,
            };
            (Meta::new(name, None), to_value(&body))
        }
        Command::Induce {
            data,
            method,
            seed,
            train_fraction,
            start,
            order_out,
            max_len,
        } => {
            let seed = seed.resolve();
            let ds = load(data)?;
            let start = start.as_deref().map(|p| read_order(p, ds.n_cols())).transpose()?;
            let train = train_split(&ds, *train_fraction, seed)?;
            let l_max = max_len.unwrap_or_else(|| effective_max_len(train.n_rows(), train.n_cols()));
            let order = induce(&train, *method, seed, start, 1, l_max)?.remove(0);
            let (_, score) = score_order(&train, &order, Some(l_max))?;
            if let Some(p) = order_out {
                fs::write(p, format!("{order}\n")).map_err(|e| io_failure(p, e))?;
            }
            let body = InduceReport {
                method: method.to_string(),
                order: order.to_string(),
                train_rows: train.n_rows(),
                train_score: score.total,
            };
            (Meta::new(name, Some(seed)), to_value(&body))
        }
        Command::Signif {
            data,
            orders,
            method,
            samples,
            train_fraction,
            seed,
            max_candidates,
            max_len,
        } => {
            let seed = seed.resolve();
            let ds = load(data)?;
            let (train, test) = split(&ds, *train_fraction, derive_seed(seed, STAGE_SPLIT))?;
            let (label, candidates) = match method {
                Some(m) => {
                    let l = max_len.unwrap_or_else(|| effective_max_len(train.n_rows(), train.n_cols()));
                    (m.to_string(), induce(&train, *m, seed, None, *max_candidates, l)?)
                }
                None => {
                    let list = orders
                        .iter()
                        .map(|p| read_order(p, ds.n_cols()))
                        .collect::<Run<Vec<_>>>()?;
                    ("orders".to_string(), list)
                }
            };
            let report = evaluate_order_set(
                &train,
                &test,
                &candidates,
                *samples,
                derive_seed(seed, STAGE_RANDOM),
                *max_len,
            )?;
            let body = SignifReport {
                candidates: label,
                train_rows: train.n_rows(),
                test_rows: test.n_rows(),
                report,
            };
            (Meta::new(name, Some(seed)), to_value(&body))
        }
        Command::Synth {
            kind,
            cols,
            rows,
            param,
            seed,
            out,
        } => {
            let seed = seed.resolve();
            let param = param.unwrap_or(kind.default_param());
            let ds = gen_synthetic(*kind, *cols, *rows, param, seed)?;
            fs::write(out, ds.to_dense_string()).map_err(|e| io_failure(out, e))?;
            let body = SynthReport {
                kind: kind.name(),
                rows: *rows,
                cols: *cols,
                param: (*kind != SyntheticKind::Clust).then_some(param),
                out: out.clone(),
            };
            (Meta::new(name, Some(seed)), to_value(&body))
        }
        Command::Asymptotic {
            rows_list,
            orders,
            noise,
            items,
            seed,
            include_identity,
        } => {
            let seed = seed.resolve();
            let result = asymptotic(&AsymptoticConfig {
                rows_list: rows_list.clone(),
                n_orders: *orders,
                noise: *noise,
                items: *items,
                seed,
                include_identity: *include_identity,
            })?;
            if cli.format == Format::Tsv {
                let rows: Vec<AsymptoticTsvRow> = result
                    .records
                    .iter()
                    .map(|r| AsymptoticTsvRow {
                        n_rows: r.n_rows,
                        rho: result.rows.iter().find(|x| x.n_rows == r.n_rows).and_then(|x| x.rho),
                        df: r.df,
                        p_emp: r.p_emp,
                        score: r.score,
                        order: &r.order,
                    })
                    .collect();
                return tsv_table(&rows).map_err(|e| Failure::Compute(e.to_string()));
            }
            (Meta::new(name, Some(seed)), to_value(&result))
        }
    };
    let report = with_meta(&meta, &body).map_err(|e| Failure::Compute(e.to_string()))?;
    Ok(render(&report, cli.format))
}

fn to_value(body: &impl Serialize) -> Value {
    serde_json::to_value(body).expect("report types serialize to JSON")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let written = run(&cli).and_then(|text| match &cli.output {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
