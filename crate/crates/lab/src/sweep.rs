//! The scaling experiment: random SVM instances solved in exact and
//! tomography mode, one CSV row per instance.

use std::io::{Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Result};
use qipm_core::ipm::{self, IpmConfig, MeasureMode, NoiseMode};
use qipm_core::svm::{self, MarginRule};
use serde::{Deserialize, Serialize};

/// One instance of `SVM(n, 2n, p)`. Accuracies and measurements are `NaN`
/// when the corresponding solve failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub kappa_max: f64,
    pub zeta_max: f64,
    pub delta_min: f64,
    pub cost_metric: f64,
    #[serde(rename = "acc_train_exact")]
    pub train_accuracy_exact: f64,
    #[serde(rename = "acc_train_noisy")]
    pub train_accuracy_noisy: f64,
    #[serde(rename = "acc_test_exact")]
    pub test_accuracy_exact: f64,
    #[serde(rename = "acc_test_noisy")]
    pub test_accuracy_noisy: f64,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub per_cell: usize,
    pub p_grid: Vec<f64>,
    pub epsilon: f64,
    pub c: f64,
    pub seed: u64,
    pub margin: MarginRule,
    /// Defaults to `QIPM_WORKERS`, then to the available parallelism.
    pub workers: Option<usize>,
    /// When false `wall_time` is written as 0 so output is byte-reproducible.
    pub timing: bool,
    /// Print one line per finished run to stderr.
    pub progress: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: doubling_range(4, 128),
            per_cell: 10,
            p_grid: default_p_grid(),
            epsilon: 0.1,
            c: 1.0,
            seed: 0,
            margin: MarginRule::default(),
            workers: None,
            timing: true,
            progress: false,
        }
    }
}

/// `{0, 0.1, …, 1}`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// `lo, 2lo, 4lo, …` up to `hi`.
pub fn doubling_range(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = lo.max(1);
    while n <= hi {
        out.push(n);
        n *= 2;
    }
    out
}

/// SplitMix64 finalizer; decorrelates seeds derived from adjacent inputs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Instance seed for cell `(n, p_index)` and replicate `k`.
pub fn run_seed(master: u64, n: usize, p_index: usize, k: usize) -> u64 {
    mix(mix(mix(master ^ n as u64) ^ p_index as u64) ^ k as u64)
}

pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var("QIPM_WORKERS").ok()?.parse().ok())
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1)
}

fn validate(cfg: &SweepConfig) -> Result<()> {
    if cfg.n_values.is_empty() || cfg.n_values.iter().any(|&n| n < 2) {
        bail!("sweep needs feature counts >= 2, got {:?}", cfg.n_values);
    }
    if cfg.per_cell == 0 || cfg.p_grid.is_empty() {
        bail!("sweep needs at least one instance per cell and one p value");
    }
    if cfg.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        bail!("flip probabilities must lie in [0, 1], got {:?}", cfg.p_grid);
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        bail!("epsilon must be positive, got {}", cfg.epsilon);
    }
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        bail!("C must be positive, got {}", cfg.c);
    }
    Ok(())
}

/// Solves one instance in both modes. Failures become `converged = false`.
pub fn run_one(n: usize, p: f64, seed: u64, cfg: &SweepConfig) -> RunRecord {
    let (epsilon, c) = (cfg.epsilon, cfg.c);
    let start = Instant::now();
    let m = 2 * n;
    let mut rec = RunRecord {
        n,
        m,
        p,
        seed,
        converged: false,
        iterations: 0,
        kappa_max: f64::NAN,
        zeta_max: f64::NAN,
        delta_min: f64::NAN,
        cost_metric: f64::NAN,
        train_accuracy_exact: f64::NAN,
        train_accuracy_noisy: f64::NAN,
        test_accuracy_exact: f64::NAN,
        test_accuracy_noisy: f64::NAN,
        wall_time: 0.0,
    };
    let Ok(svm::Generated { train, test, .. }) =
        svm::generate_planted_with(n, m, p, seed, cfg.margin)
    else {
        return rec;
    };
    let Ok(inst) = svm::to_socp(&train, c) else {
        return rec;
    };
    let base = IpmConfig {
        epsilon,
        seed,
        ..IpmConfig::default()
    };
    let noisy_cfg = IpmConfig {
        noise_mode: NoiseMode::Tomography,
        measure: MeasureMode::Estimate,
        ..base.clone()
    };
    let exact_cfg = IpmConfig {
        noise_mode: NoiseMode::Exact,
        measure: MeasureMode::Off,
        ..base
    };
    let accuracies = |trace: &ipm::SolveTrace| -> Option<(f64, f64)> {
        let clf = svm::extract_classifier(&inst, &trace.final_iterate).ok()?;
        Some((svm::accuracy(&clf, &train).ok()?, svm::accuracy(&clf, &test).ok()?))
    };
    let mut ok = true;
    match ipm::run(&inst, &noisy_cfg) {
        Ok(trace) => {
            rec.iterations = trace.iterations();
            rec.kappa_max = trace.kappa_max().unwrap_or(f64::NAN);
            rec.zeta_max = trace.zeta_max().unwrap_or(f64::NAN);
            rec.delta_min = trace.delta_min().unwrap_or(f64::NAN);
            rec.cost_metric = trace.cost_metric.unwrap_or(f64::NAN);
            ok &= trace.converged;
            if let Some((tr, te)) = accuracies(&trace) {
                rec.train_accuracy_noisy = tr;
                rec.test_accuracy_noisy = te;
            }
        }
        Err(_) => ok = false,
    }
    match ipm::run(&inst, &exact_cfg) {
        Ok(trace) => {
            ok &= trace.converged;
            if let Some((tr, te)) = accuracies(&trace) {
                rec.train_accuracy_exact = tr;
                rec.test_accuracy_exact = te;
            }
        }
        Err(_) => ok = false,
    }
    rec.converged = ok && rec.cost_metric.is_finite() && rec.cost_metric > 0.0;
    if cfg.timing {
        rec.wall_time = start.elapsed().as_secs_f64();
    }
    rec
}

/// Runs every `(n, p, replicate)` job and returns records ordered by
/// `(n, p, seed)` regardless of completion order.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<RunRecord>> {
    validate(cfg)?;
    let mut jobs = Vec::new();
    for &n in &cfg.n_values {
        for (pi, &p) in cfg.p_grid.iter().enumerate() {
            for k in 0..cfg.per_cell {
                jobs.push((n, p, run_seed(cfg.seed, n, pi, k)));
            }
        }
    }
    // largest instances first so the tail of the schedule is short
    jobs.sort_by_key(|j| std::cmp::Reverse(j.0));
    let workers = worker_count(cfg.workers).min(jobs.len());
    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let out = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, p, seed)) = jobs.get(i) else { break };
                let rec = run_one(n, p, seed, cfg);
                if cfg.progress {
                    let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                    eprintln!(
                        "[{k}/{}] n={n} p={p} converged={} iterations={}",
                        jobs.len(),
                        rec.converged,
                        rec.iterations
                    );
                }
                out.lock().expect("worker panicked").push(rec);
            });
        }
    });
    let mut records = out.into_inner().expect("worker panicked");
    records.sort_by(|a, b| a.n.cmp(&b.n).then(a.p.total_cmp(&b.p)).then(a.seed.cmp(&b.seed)));
    Ok(records)
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        bail!("unexpected CSV header: {:?}", headers);
    }
    rd.deserialize().map(|r| r.map_err(Into::into)).collect()
}

pub const CSV_HEADER: [&str; 15] = [
    "n",
    "m",
    "p",
    "seed",
    "converged",
    "iterations",
    "kappa_max",
    "zeta_max",
    "delta_min",
    "cost_metric",
    "acc_train_exact",
    "acc_train_noisy",
    "acc_test_exact",
    "acc_test_noisy",
    "wall_time_s",
];
