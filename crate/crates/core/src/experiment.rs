//! Reproducible experiment pipelines built from the library parts: the
//! synthetic spectral benchmark and the asymptotic df-versus-`p_emp` study.

use serde::Serialize;

use crate::dataset::{gen_synthetic, split, BinaryDataset, SyntheticKind};
use crate::error::{Error, Result};
use crate::induce::{spectral_orders, SpectralMethod};
use crate::order::Order;
use crate::segmodel::{
    effective_max_len, independence_score, min_df_for_chain, path_edges,
    MAX_ENUMERATED_POSITIONS, SCORE_TOLERANCE,
};
use crate::significance::{sample_random_orders, score_orders, SignificanceReport};

/// Derives an independent seed for one stage of a pipeline (splitmix64 mixing).
pub fn derive_seed(seed: u64, stage: u64) -> u64 {
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STAGE_DATA: u64 = 1;
const STAGE_SPLIT: u64 = 2;
const STAGE_RANDOM: u64 = 3;
const STAGE_CANDIDATES: u64 = 4;

/// Candidate orders for a spectral method: every Fiedler order when there
/// are at most `limit`, otherwise `limit` samples.
pub fn spectral_candidates(
    train: &BinaryDataset,
    method: SpectralMethod,
    limit: usize,
    seed: u64,
) -> Result<Vec<Order>> {
    Ok(spectral_orders(train, method)?.candidates(limit, seed))
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub kind: SyntheticKind,
    pub param: f64,
    pub n_cols: usize,
    pub n_rows: usize,
    pub train_fraction: f64,
    pub n_random: usize,
    pub max_candidates: usize,
    pub seed: u64,
}

impl BenchmarkConfig {
    /// 20 attributes, 2000 rows split in half, 1000 random orders.
    pub fn reference(kind: SyntheticKind, seed: u64) -> Self {
        BenchmarkConfig {
            kind,
            param: kind.default_param(),
            n_cols: 20,
            n_rows: 2000,
            train_fraction: 0.5,
            n_random: 1000,
            max_candidates: 1000,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodReport {
    pub method: String,
    #[serde(flatten)]
    pub report: SignificanceReport,
}

/// Generates a synthetic dataset, induces spectral orders on one half and
/// measures them on the other against shared random orders.
pub fn spectral_benchmark(
    cfg: &BenchmarkConfig,
    methods: &[SpectralMethod],
) -> Result<Vec<MethodReport>> {
    let ds = gen_synthetic(
        cfg.kind,
        cfg.n_cols,
        cfg.n_rows,
        cfg.param,
        derive_seed(cfg.seed, STAGE_DATA),
    )?;
    let (train, test) = split(&ds, cfg.train_fraction, derive_seed(cfg.seed, STAGE_SPLIT))?;
    compare_methods(&train, &test, methods, cfg.n_random, cfg.max_candidates, cfg.seed)
}

/// Measures spectral orders induced on `train` against random orders on `test`.
pub fn compare_methods(
    train: &BinaryDataset,
    test: &BinaryDataset,
    methods: &[SpectralMethod],
    n_random: usize,
    max_candidates: usize,
    seed: u64,
) -> Result<Vec<MethodReport>> {
    let k = test.n_cols();
    if train.n_cols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: train.n_cols(),
        });
    }
    let max_len = effective_max_len(test.n_rows(), k);
    let random = sample_random_orders(k, n_random, derive_seed(seed, STAGE_RANDOM));
    let scores_random = score_orders(test, &random, max_len)?;
    let indep = independence_score(test)?.total;
    methods
        .iter()
        .map(|&method| {
            let candidates = spectral_candidates(
                train,
                method,
                max_candidates,
                derive_seed(seed, STAGE_CANDIDATES),
            )?;
            let scores = score_orders(test, &candidates, max_len)?;
            Ok(MethodReport {
                method: method.name().to_string(),
                report: SignificanceReport::from_scores(scores, scores_random.clone(), indep)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AsymptoticConfig {
    pub rows_list: Vec<usize>,
    pub n_orders: usize,
    pub noise: f64,
    pub items: usize,
    pub seed: u64,
    /// Replace the first sampled order with the generating order.
    pub include_identity: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticRow {
    pub n_rows: usize,
    /// Pearson correlation of `p_emp` and df; `None` when undefined.
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderRecord {
    pub n_rows: usize,
    pub order: String,
    pub df: u64,
    pub score: f64,
    pub p_emp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticResult {
    pub rows: Vec<AsymptoticRow>,
    pub records: Vec<OrderRecord>,
}

/// Leave-one-out `p_emp` of each score against the rest of the pool.
pub fn leave_one_out_p_emp(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    if n < 2 {
        return vec![0.5; n];
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    scores
        .iter()
        .map(|&s| {
            let below = sorted.partition_point(|&u| u < s - SCORE_TOLERANCE);
            let not_above = sorted.partition_point(|&u| u <= s + SCORE_TOLERANCE);
            // drop the self-tie (worth one half)
            let wins = below as f64 + (not_above - below) as f64 / 2.0 - 0.5;
            wins / (n - 1) as f64
        })
        .collect()
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// For each dataset size, scores random orders of a path-generated dataset
/// and correlates each order's `p_emp` with the df of the smallest model
/// under that order containing the generating chain.
pub fn asymptotic(cfg: &AsymptoticConfig) -> Result<AsymptoticResult> {
    if cfg.items < 2 || cfg.items > MAX_ENUMERATED_POSITIONS {
        return Err(Error::InvalidArgument(format!(
            "items must be in 2..={MAX_ENUMERATED_POSITIONS}, got {}",
            cfg.items
        )));
    }
    if cfg.n_orders == 0 {
        return Err(Error::InvalidArgument("n_orders must be at least 1".into()));
    }
    let mut orders = sample_random_orders(cfg.items, cfg.n_orders, derive_seed(cfg.seed, STAGE_RANDOM));
    if cfg.include_identity {
        orders[0] = Order::identity(cfg.items);
    }
    let edges = path_edges(cfg.items);
    let dfs: Vec<u64> = orders
        .iter()
        .map(|o| min_df_for_chain(o, &edges))
        .collect::<Result<_>>()?;
    let df_f: Vec<f64> = dfs.iter().map(|&d| d as f64).collect();

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &n_rows in &cfg.rows_list {
        let ds = gen_synthetic(
            SyntheticKind::Path,
            cfg.items,
            n_rows,
            cfg.noise,
            derive_seed(cfg.seed ^ n_rows as u64, STAGE_DATA),
        )?;
        let scores = score_orders(&ds, &orders, effective_max_len(n_rows, cfg.items))?;
        let p = leave_one_out_p_emp(&scores);
        rows.push(AsymptoticRow {
            n_rows,
            rho: pearson(&p, &df_f),
        });
        for (i, o) in orders.iter().enumerate() {
            records.push(OrderRecord {
                n_rows,
                order: o.to_string(),
                df: dfs[i],
                score: scores[i],
                p_emp: p[i],
            });
        }
    }
    Ok(AsymptoticResult { rows, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, STAGE_DATA), derive_seed(1, STAGE_SPLIT));
        assert_ne!(derive_seed(1, STAGE_DATA), derive_seed(2, STAGE_DATA));
        assert_eq!(derive_seed(9, 3), derive_seed(9, 3));
    }

    #[test]
    fn loo_p_emp() {
        assert_eq!(leave_one_out_p_emp(&[1.0, 2.0, 3.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(leave_one_out_p_emp(&[2.0, 2.0]), vec![0.5, 0.5]);
        assert_eq!(leave_one_out_p_emp(&[2.0]), vec![0.5]);
    }

    #[test]
    fn pearson_cases() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn asymptotic_rejects_bad_items_and_handles_one_order() {
        let mut cfg = AsymptoticConfig {
            rows_list: vec![500],
            n_orders: 1,
            noise: 0.25,
            items: 13,
            seed: 0,
            include_identity: false,
        };
        assert!(asymptotic(&cfg).is_err());
        cfg.items = 6;
        let out = asymptotic(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.rows[0].rho.is_none());
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn identity_has_minimal_df_and_p_emp_with_much_data() {
        let cfg = AsymptoticConfig {
            rows_list: vec![100_000],
            n_orders: 40,
            noise: 0.25,
            items: 8,
            seed: 5,
            include_identity: true,
        };
        let out = asymptotic(&cfg).unwrap();
        let id = &out.records[0];
        assert_eq!(id.order, Order::identity(8).to_string());
        // 7 pairs at 3 each, minus 6 single-attribute overlaps
        assert_eq!(id.df, 3 * 7 - 6);
        assert!(out.records.iter().all(|r| r.df >= id.df));
        assert!(out.records.iter().all(|r| r.p_emp >= id.p_emp));
    }

    #[test]
    fn benchmark_shapes() {
        let mut cfg = BenchmarkConfig::reference(SyntheticKind::Path, 3);
        cfg.n_cols = 8;
        cfg.n_rows = 400;
        cfg.n_random = 30;
        let reports = spectral_benchmark(&cfg, &SpectralMethod::ALL).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert_eq!(r.report.n_random, 30);
            assert!(r.report.n_candidates >= 1);
        }
    }
}
