//! Empirical distribution of accuracy differences between noisy and exact
//! training.

use crate::sweep::RunRecord;

/// Grid spacing of the CDF table.
pub const STEP: f64 = 0.01;

/// Absolute slack when comparing a difference against a grid threshold;
/// differences are multiples of `1/m` and the grid is not exactly
/// representable.
const GRID_SLACK: f64 = 1e-9;

/// `P(noisy − exact ≤ t)` on the grid `t ∈ {−1, −0.99, …, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyCdf {
    pub thresholds: Vec<f64>,
    pub train: Vec<f64>,
    pub test: Vec<f64>,
    /// Records with both differences defined.
    pub n_records: usize,
}

/// `(train, test)` differences `noisy − exact` of records where all four
/// accuracies are finite.
pub fn differences(records: &[RunRecord]) -> Vec<(f64, f64)> {
    records
        .iter()
        .map(|r| {
            (
                r.train_accuracy_noisy - r.train_accuracy_exact,
                r.test_accuracy_noisy - r.test_accuracy_exact,
            )
        })
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .collect()
}

pub fn accuracy_cdf(records: &[RunRecord]) -> AccuracyCdf {
    let diffs = differences(records);
    let thresholds: Vec<f64> = (-100..=100).map(|i| i as f64 * STEP).collect();
    let frac = |pick: fn(&(f64, f64)) -> f64, t: f64| {
        if diffs.is_empty() {
            return 0.0;
        }
        let k = diffs.iter().filter(|d| pick(d) <= t + GRID_SLACK).count();
        k as f64 / diffs.len() as f64
    };
    let train = thresholds.iter().map(|&t| frac(|d| d.0, t)).collect();
    let test = thresholds.iter().map(|&t| frac(|d| d.1, t)).collect();
    AccuracyCdf {
        thresholds,
        train,
        test,
        n_records: diffs.len(),
    }
}

/// Fractions of records with `|noisy − exact| ≤ tol` on train and test.
pub fn fraction_within(records: &[RunRecord], tol: f64) -> Option<(f64, f64)> {
    let diffs = differences(records);
    if diffs.is_empty() {
        return None;
    }
    let k = diffs.len() as f64;
    let train = diffs.iter().filter(|d| d.0.abs() <= tol + GRID_SLACK).count() as f64 / k;
    let test = diffs.iter().filter(|d| d.1.abs() <= tol + GRID_SLACK).count() as f64 / k;
    Some((train, test))
}
