//! Experiment orchestration: paired-design benchmark runs over a grid of
//! problem sizes, the consistency-contrast experiment, and report files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    cross_validate, fit_lad, fit_ls, CvConfig, Lambda, Loss, Penalty, PenaltySpec,
};
use crate::error::{Error, Result};
use crate::gibbs::run_chain;
use crate::model::{l2_error, Dataset, GibbsConfig};
use crate::rng::{splitmix64, RngStream};
use crate::sim::{generate_dataset, SimDesign};

/// The estimators the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// The Gibbs-sampler posterior mean, run once per entry of
    /// `gibbs_iterations`.
    Bayes,
    Ls,
    Lad,
    LassoLs,
    LassoLad,
    RidgeLs,
    RidgeLad,
}

impl EstimatorKind {
    fn penalized_spec(self) -> Option<PenaltySpec> {
        let (loss, penalty) = match self {
            EstimatorKind::LassoLs => (Loss::Squared, Penalty::L1),
            EstimatorKind::LassoLad => (Loss::Absolute, Penalty::L1),
            EstimatorKind::RidgeLs => (Loss::Squared, Penalty::L2),
            EstimatorKind::RidgeLad => (Loss::Absolute, Penalty::L2),
            _ => return None,
        };
        Some(PenaltySpec {
            loss,
            penalty,
            lambda: Lambda::CrossValidate,
        })
    }

    fn stream_tag(self) -> u64 {
        match self {
            EstimatorKind::Bayes => 1,
            EstimatorKind::Ls => 2,
            EstimatorKind::Lad => 3,
            EstimatorKind::LassoLs => 4,
            EstimatorKind::LassoLad => 5,
            EstimatorKind::RidgeLs => 6,
            EstimatorKind::RidgeLad => 7,
        }
    }
}

/// Column label in the report tables.
pub fn estimator_label(kind: EstimatorKind, gibbs_iterations: Option<usize>) -> String {
    match kind {
        EstimatorKind::Bayes => format!("Bayes_{}", gibbs_iterations.unwrap_or(0)),
        EstimatorKind::Ls => "LS".to_string(),
        EstimatorKind::Lad => "LAD".to_string(),
        EstimatorKind::LassoLs => "LAS_LS".to_string(),
        EstimatorKind::LassoLad => "LAS_LAD".to_string(),
        EstimatorKind::RidgeLs => "RID_LS".to_string(),
        EstimatorKind::RidgeLad => "RID_LAD".to_string(),
    }
}

fn default_gibbs_iterations() -> Vec<usize> {
    vec![500, 1000]
}

fn default_burn_in_fraction() -> f64 {
    0.5
}

/// A full benchmark plan; mirrors the JSON plan document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n_values: Vec<usize>,
    pub kappa_values: Vec<f64>,
    pub replications: usize,
    pub estimators: Vec<EstimatorKind>,
    pub master_seed: u64,
    #[serde(default = "default_gibbs_iterations")]
    pub gibbs_iterations: Vec<usize>,
    #[serde(default = "default_burn_in_fraction")]
    pub burn_in_fraction: f64,
    #[serde(default)]
    pub cv: CvConfig,
    /// 0 means "let the thread pool decide".
    #[serde(default)]
    pub workers: usize,
    /// Freeze the simulated error-rate parameter across replications
    /// (variance reduction; used by the consistency contrast).
    #[serde(default)]
    pub frozen_theta: Option<f64>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("estimator set is empty".into()));
        }
        if self.n_values.is_empty() || self.kappa_values.is_empty() {
            return Err(Error::Config("n and kappa lists must be non-empty".into()));
        }
        for k in &self.kappa_values {
            if !(*k > 0.0 && *k < 1.0) {
                return Err(Error::Config(format!("kappa must lie in (0,1), got {k}")));
            }
        }
        if self.estimators.contains(&EstimatorKind::Bayes) && self.gibbs_iterations.is_empty() {
            return Err(Error::Config(
                "bayes estimator requested but gibbs_iterations is empty".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::Config(format!(
                "burn_in_fraction must lie in [0,1), got {}",
                self.burn_in_fraction
            )));
        }
        Ok(())
    }

    /// The estimator instances a cell runs, in report column order.
    fn instances(&self) -> Vec<(EstimatorKind, Option<usize>)> {
        let mut out = Vec::new();
        if self.estimators.contains(&EstimatorKind::Bayes) {
            let mut iters = self.gibbs_iterations.clone();
            iters.sort_unstable();
            iters.dedup();
            for it in iters {
                out.push((EstimatorKind::Bayes, Some(it)));
            }
        }
        for kind in [
            EstimatorKind::LassoLs,
            EstimatorKind::LassoLad,
            EstimatorKind::RidgeLs,
            EstimatorKind::RidgeLad,
            EstimatorKind::Ls,
            EstimatorKind::Lad,
        ] {
            if self.estimators.contains(&kind) {
                out.push((kind, None));
            }
        }
        out
    }
}

/// One (cell, replication, estimator) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub n: usize,
    pub kappa: f64,
    pub estimator: String,
    pub replication: usize,
    pub l2_sq_error: Option<f64>,
    pub wall_time_secs: f64,
    pub success: bool,
    pub error_message: Option<String>,
    pub dataset_hash: u64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResults {
    pub plan: ExperimentPlan,
    pub records: Vec<BenchmarkRecord>,
}

const TAG_DATA: u64 = 0x44415441;
const TAG_FIT: u64 = 0x46495400;

/// Stream derivation is a pure function of `(master seed, purpose, n,
/// kappa, replication)`, so results do not depend on worker count or on
/// which other cells a plan contains.
fn cell_stream(master_seed: u64, tag: u64, n: usize, kappa: f64, rep: usize) -> RngStream {
    let mut s = splitmix64(tag);
    s = splitmix64(s ^ n as u64);
    s = splitmix64(s ^ kappa.to_bits());
    s = splitmix64(s ^ rep as u64);
    RngStream::new(master_seed, s)
}

/// The stream that generated (or would generate) the dataset of one
/// benchmark replication; lets a cell's data be reproduced outside the
/// harness.
pub fn replication_data_stream(master_seed: u64, n: usize, kappa: f64, rep: usize) -> RngStream {
    cell_stream(master_seed, TAG_DATA, n, kappa, rep)
}

/// Run every (n, kappa, replication, estimator) combination of the plan.
///
/// All estimators within one replication consume the identical dataset
/// (paired design); failures are recorded per estimator and excluded from
/// medians. Wall times cover the fit only, not data generation.
pub fn run_benchmark(plan: &ExperimentPlan) -> Result<BenchmarkResults> {
    plan.validate()?;
    let mut tasks = Vec::new();
    for &n in &plan.n_values {
        for &kappa in &plan.kappa_values {
            // fail fast on invalid cells before spawning work
            SimDesign::new(n, kappa, RngStream::new(0, 0))?;
            for rep in 0..plan.replications {
                tasks.push((n, kappa, rep));
            }
        }
    }

    let run = || -> Vec<BenchmarkRecord> {
        tasks
            .par_iter()
            .map(|&(n, kappa, rep)| run_cell_replication(plan, n, kappa, rep))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let records = if plan.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(plan.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    };

    Ok(BenchmarkResults {
        plan: plan.clone(),
        records,
    })
}

fn run_cell_replication(
    plan: &ExperimentPlan,
    n: usize,
    kappa: f64,
    rep: usize,
) -> Vec<BenchmarkRecord> {
    let data_stream = cell_stream(plan.master_seed, TAG_DATA, n, kappa, rep);
    let dataset = SimDesign::new(n, kappa, data_stream).and_then(|mut d| {
        d.frozen_theta = plan.frozen_theta;
        generate_dataset(&d)
    });
    let mut out = Vec::new();
    match dataset {
        Ok(dataset) => {
            let hash = dataset.content_hash();
            let truth = DVector::from_column_slice(&dataset.truth().unwrap().beta);
            for (kind, iters) in plan.instances() {
                let label = estimator_label(kind, iters);
                let start = Instant::now();
                let fit = fit_instance(plan, kind, iters, &dataset, n, kappa, rep);
                let wall = start.elapsed().as_secs_f64();
                let record = match fit.and_then(|beta| l2_error(&beta, &truth)) {
                    Ok(err) => BenchmarkRecord {
                        n,
                        kappa,
                        estimator: label,
                        replication: rep,
                        l2_sq_error: Some(err),
                        wall_time_secs: wall,
                        success: true,
                        error_message: None,
                        dataset_hash: hash,
                    },
                    Err(e) => BenchmarkRecord {
                        n,
                        kappa,
                        estimator: label,
                        replication: rep,
                        l2_sq_error: None,
                        wall_time_secs: wall,
                        success: false,
                        error_message: Some(e.to_string()),
                        dataset_hash: hash,
                    },
                };
                out.push(record);
            }
        }
        Err(e) => {
            for (kind, iters) in plan.instances() {
                out.push(BenchmarkRecord {
                    n,
                    kappa,
                    estimator: estimator_label(kind, iters),
                    replication: rep,
                    l2_sq_error: None,
                    wall_time_secs: 0.0,
                    success: false,
                    error_message: Some(e.to_string()),
                    dataset_hash: 0,
                });
            }
        }
    }
    out
}

fn fit_instance(
    plan: &ExperimentPlan,
    kind: EstimatorKind,
    iters: Option<usize>,
    dataset: &Dataset,
    n: usize,
    kappa: f64,
    rep: usize,
) -> Result<DVector<f64>> {
    let fit_stream = cell_stream(plan.master_seed, TAG_FIT ^ kind.stream_tag(), n, kappa, rep);
    match kind {
        EstimatorKind::Bayes => {
            let iterations = iters.expect("bayes instance carries an iteration count");
            let burn_in = ((iterations as f64) * plan.burn_in_fraction) as usize;
            let config = GibbsConfig::with_schedule(
                iterations,
                burn_in.min(iterations - 1),
                1,
                fit_stream.substream(iterations as u64),
            )?;
            let draws = run_chain(dataset, &SimDesign::new(n, kappa, fit_stream)?.hyper, &config)?;
            Ok(draws.beta_estimate())
        }
        EstimatorKind::Ls => fit_ls(dataset),
        EstimatorKind::Lad => fit_lad(dataset),
        _ => {
            let spec = kind.penalized_spec().expect("penalized estimator");
            let mut rng = fit_stream.rng();
            let (_, beta) = cross_validate(dataset, &spec, &plan.cv, &mut rng)?;
            Ok(beta)
        }
    }
}

/// Median summary of one (n, kappa, estimator) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianCell {
    pub n: usize,
    pub kappa: f64,
    pub estimator: String,
    pub successes: usize,
    pub failures: usize,
    pub median_l2_sq_error: Option<f64>,
    pub median_wall_time_secs: Option<f64>,
}

fn median_of(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = values.len();
    Some(if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    })
}

/// Reduce records to per-cell medians. Failed replications are excluded
/// from the medians and counted. Ordering of the input is irrelevant.
pub fn median_table(records: &[BenchmarkRecord]) -> Vec<MedianCell> {
    let mut groups: BTreeMap<(usize, u64, String), Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.n, r.kappa.to_bits(), r.estimator.clone()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((n, kappa_bits, estimator), rs)| {
            let errors: Vec<f64> = rs.iter().filter_map(|r| r.l2_sq_error).collect();
            let times: Vec<f64> = rs
                .iter()
                .filter(|r| r.success)
                .map(|r| r.wall_time_secs)
                .collect();
            let successes = errors.len();
            MedianCell {
                n,
                kappa: f64::from_bits(kappa_bits),
                estimator,
                successes,
                failures: rs.len() - successes,
                median_l2_sq_error: median_of(errors),
                median_wall_time_secs: median_of(times),
            }
        })
        .collect()
}

/// Look up one median cell.
pub fn find_cell<'a>(
    cells: &'a [MedianCell],
    n: usize,
    kappa: f64,
    estimator: &str,
) -> Option<&'a MedianCell> {
    cells
        .iter()
        .find(|c| c.n == n && c.kappa == kappa && c.estimator == estimator)
}

/// Consistency-contrast experiment: one kappa, increasing n, the Bayes
/// estimator against plain least squares.
///
/// The simulated error-rate parameter is frozen at the prior median
/// (`sqrt(ln 2)`) across replications so that the n-to-n comparison is not
/// swamped by the heavy-tailed noise-scale draw.
#[derive(Debug, Clone)]
pub struct ContrastReport {
    pub kappa: f64,
    pub n_values: Vec<usize>,
    pub medians: Vec<MedianCell>,
    pub records: Vec<BenchmarkRecord>,
}

pub fn consistency_contrast(
    kappa: f64,
    n_values: &[usize],
    replications: usize,
    estimators: &[EstimatorKind],
    gibbs_iterations: usize,
    master_seed: u64,
    workers: usize,
) -> Result<ContrastReport> {
    if n_values.len() < 2 {
        return Err(Error::Config(
            "consistency contrast needs at least two n values".into(),
        ));
    }
    if !n_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config("n values must be strictly increasing".into()));
    }
    let plan = ExperimentPlan {
        n_values: n_values.to_vec(),
        kappa_values: vec![kappa],
        replications,
        estimators: estimators.to_vec(),
        master_seed,
        gibbs_iterations: vec![gibbs_iterations],
        burn_in_fraction: 0.5,
        cv: CvConfig::default(),
        workers,
        frozen_theta: Some(2f64.ln().sqrt()),
    };
    let results = run_benchmark(&plan)?;
    Ok(ContrastReport {
        kappa,
        n_values: n_values.to_vec(),
        medians: median_table(&results.records),
        records: results.records,
    })
}

/// Metadata block written next to the report tables.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportMeta {
    pub plan: ExperimentPlan,
    pub version: String,
    pub total_records: usize,
    pub failure_counts: BTreeMap<String, usize>,
}

/// Write the report files: raw records, median tables as CSV and aligned
/// text (rows = kappa, columns = estimators, one block per n), and the
/// metadata JSON. Returns the paths written.
pub fn emit_report(results: &BenchmarkResults, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if results.records.is_empty() {
        return Err(Error::Config("no records to report".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let cells = median_table(&results.records);

    let mut labels: Vec<String> = Vec::new();
    for (kind, iters) in results.plan.instances() {
        labels.push(estimator_label(kind, iters));
    }

    let mut written = Vec::new();

    let records_path = out_dir.join("records.csv");
    write_records_csv(&records_path, &results.records)?;
    written.push(records_path);

    for (value_name, pick) in [
        ("error", 0usize),
        ("time", 1usize),
    ] {
        let csv_path = out_dir.join(format!("medians_{value_name}.csv"));
        let txt_path = out_dir.join(format!("table_{value_name}.txt"));
        write_median_table(&csv_path, &txt_path, &results.plan, &cells, &labels, pick)?;
        written.push(csv_path);
        written.push(txt_path);
    }

    let mut failure_counts = BTreeMap::new();
    for r in &results.records {
        if !r.success {
            *failure_counts.entry(r.estimator.clone()).or_insert(0) += 1;
        }
    }
    let meta = ReportMeta {
        plan: results.plan.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        total_records: results.records.len(),
        failure_counts,
    };
    let meta_path = out_dir.join("meta.json");
    let f = std::fs::File::create(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(f), &meta)
        .map_err(|e| Error::parse(&meta_path, e.to_string()))?;
    written.push(meta_path);

    Ok(written)
}

fn write_records_csv(path: &Path, records: &[BenchmarkRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    w.write_record([
        "n",
        "kappa",
        "estimator",
        "replication",
        "l2_sq_error",
        "wall_time_secs",
        "success",
        "dataset_hash",
        "error_message",
    ])
    .map_err(|e| Error::parse(path, e.to_string()))?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.kappa.to_string(),
            r.estimator.clone(),
            r.replication.to_string(),
            r.l2_sq_error.map(|v| v.to_string()).unwrap_or_default(),
            r.wall_time_secs.to_string(),
            r.success.to_string(),
            format!("{:016x}", r.dataset_hash),
            r.error_message.clone().unwrap_or_default(),
        ])
        .map_err(|e| Error::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn write_median_table(
    csv_path: &Path,
    txt_path: &Path,
    plan: &ExperimentPlan,
    cells: &[MedianCell],
    labels: &[String],
    pick: usize,
) -> Result<()> {
    let value_of = |cell: &MedianCell| -> Option<f64> {
        if pick == 0 {
            cell.median_l2_sq_error
        } else {
            cell.median_wall_time_secs
        }
    };

    let mut w = csv::Writer::from_path(csv_path)
        .map_err(|e| Error::parse(csv_path, e.to_string()))?;
    let mut header = vec!["n".to_string(), "kappa".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)
        .map_err(|e| Error::parse(csv_path, e.to_string()))?;

    let mut text = String::new();
    for &n in &plan.n_values {
        text.push_str(&format!("n = {n}\n"));
        text.push_str(&format!("{:>8}", "kappa"));
        for label in labels {
            text.push_str(&format!("{label:>12}"));
        }
        text.push('\n');
        for &kappa in &plan.kappa_values {
            let mut row = vec![n.to_string(), kappa.to_string()];
            text.push_str(&format!("{kappa:>8}"));
            for label in labels {
                let v = find_cell(cells, n, kappa, label).and_then(value_of);
                match v {
                    Some(v) => {
                        row.push(v.to_string());
                        text.push_str(&format!("{v:>12.3}"));
                    }
                    None => {
                        row.push(String::new());
                        text.push_str(&format!("{:>12}", "-"));
                    }
                }
            }
            text.push('\n');
            w.write_record(&row)
                .map_err(|e| Error::parse(csv_path, e.to_string()))?;
        }
        text.push('\n');
    }
    w.flush().map_err(|e| Error::io(csv_path, e))?;
    std::fs::write(txt_path, text).map_err(|e| Error::io(txt_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_plan() -> ExperimentPlan {
        ExperimentPlan {
            n_values: vec![40],
            kappa_values: vec![0.2],
            replications: 3,
            estimators: vec![EstimatorKind::Ls, EstimatorKind::Bayes],
            master_seed: 99,
            gibbs_iterations: vec![40],
            burn_in_fraction: 0.5,
            cv: CvConfig::default(),
            workers: 0,
            frozen_theta: None,
        }
    }

    #[test]
    fn plan_validation() {
        let mut plan = tiny_plan();
        plan.replications = 0;
        assert!(plan.validate().is_err());
        let mut plan = tiny_plan();
        plan.estimators.clear();
        assert!(plan.validate().is_err());
        let mut plan = tiny_plan();
        plan.kappa_values = vec![1.0];
        assert!(plan.validate().is_err());
        let mut plan = tiny_plan();
        plan.gibbs_iterations.clear();
        assert!(plan.validate().is_err());
    }

    #[test]
    fn paired_design_shares_datasets_and_medians_ignore_order() {
        let plan = tiny_plan();
        let results = run_benchmark(&plan).unwrap();
        assert_eq!(results.records.len(), 3 * 2);
        for rep in 0..3 {
            let hashes: Vec<u64> = results
                .records
                .iter()
                .filter(|r| r.replication == rep)
                .map(|r| r.dataset_hash)
                .collect();
            assert!(hashes.windows(2).all(|w| w[0] == w[1]));
        }
        let direct = median_table(&results.records);
        let mut reversed = results.records.clone();
        reversed.reverse();
        assert_eq!(median_table(&reversed), direct);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let mut plan = tiny_plan();
        plan.workers = 1;
        let a = run_benchmark(&plan).unwrap();
        plan.workers = 4;
        let b = run_benchmark(&plan).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.estimator, rb.estimator);
            assert_eq!(ra.replication, rb.replication);
            assert_eq!(ra.dataset_hash, rb.dataset_hash);
            match (ra.l2_sq_error, rb.l2_sq_error) {
                (Some(x), Some(y)) => assert_eq!(x.to_bits(), y.to_bits()),
                (a, b) => assert_eq!(a.is_none(), b.is_none()),
            }
        }
    }

    #[test]
    fn contrast_preconditions() {
        assert!(consistency_contrast(0.3, &[200], 2, &[EstimatorKind::Ls], 10, 1, 0).is_err());
        assert!(
            consistency_contrast(0.3, &[200, 100], 2, &[EstimatorKind::Ls], 10, 1, 0).is_err()
        );
    }

    #[test]
    fn report_needs_records() {
        let results = BenchmarkResults {
            plan: tiny_plan(),
            records: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_report(&results, dir.path()).is_err());
    }

    #[test]
    fn report_files_have_table_shape() {
        let mut plan = tiny_plan();
        plan.estimators = vec![EstimatorKind::Ls];
        let results = run_benchmark(&plan).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&results, dir.path()).unwrap();
        assert_eq!(files.len(), 6);
        let medians = std::fs::read_to_string(dir.path().join("medians_error.csv")).unwrap();
        let mut lines = medians.lines();
        assert_eq!(lines.next().unwrap(), "n,kappa,LS");
        assert_eq!(lines.count(), 1); // one (n, kappa) row
        let meta: ReportMeta =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap())
                .unwrap();
        assert_eq!(meta.total_records, 3);
    }

    #[test]
    fn plan_json_round_trip() {
        let plan = tiny_plan();
        let json = serde_json::to_string(&plan).unwrap();
        let back: ExperimentPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
        // defaults fill in when fields are omitted
        let minimal = r#"{
            "n_values": [100],
            "kappa_values": [0.3],
            "replications": 2,
            "estimators": ["ls", "lasso-lad"],
            "master_seed": 7
        }"#;
        let parsed: ExperimentPlan = serde_json::from_str(minimal).unwrap();
        assert_eq!(parsed.gibbs_iterations, vec![500, 1000]);
        assert_eq!(parsed.burn_in_fraction, 0.5);
        assert_eq!(parsed.estimators[1], EstimatorKind::LassoLad);
    }
}
