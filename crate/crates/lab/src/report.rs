//! Plain-text summary of a sweep.

use std::fmt::Write;

use crate::cdf::{accuracy_cdf, fraction_within};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::sweep::RunRecord;

/// Published full-scale exponents, quoted for context only.
pub const REFERENCE_EXPONENTS: [(&str, f64, f64, f64); 3] = [
    ("inexact IPM cost metric", 2.591, 2.564, 2.619),
    ("ECOS", 3.314, 3.297, 3.330),
    ("LIBSVM", 3.112, 2.799, 3.425),
];

/// Columns fitted against `n`.
pub const FITTED: [&str; 4] = ["cost_metric", "kappa_max", "zeta_max", "iterations"];

/// `(n, column)` pairs from converged records; `None` for unknown columns.
pub fn column_points(records: &[RunRecord], column: &str) -> Option<Vec<(f64, f64)>> {
    let get: fn(&RunRecord) -> f64 = match column {
        "cost_metric" => |r| r.cost_metric,
        "kappa_max" => |r| r.kappa_max,
        "zeta_max" => |r| r.zeta_max,
        "delta_min" => |r| r.delta_min,
        "iterations" => |r| r.iterations as f64,
        "wall_time_s" => |r| r.wall_time,
        _ => return None,
    };
    Some(
        records
            .iter()
            .filter(|r| r.converged)
            .map(|r| (r.n as f64, get(r)))
            .collect(),
    )
}

/// Fit of `cost_metric` against `n` over converged records.
pub fn cost_fit(records: &[RunRecord]) -> anyhow::Result<PowerLawFit> {
    fit_power_law(&column_points(records, "cost_metric").expect("known column"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.retain(|x| x.is_finite());
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Deterministic in `records`.
pub fn render(records: &[RunRecord]) -> String {
    let mut out = String::new();
    let converged = records.iter().filter(|r| r.converged).count();
    let _ = writeln!(out, "# Sweep report");
    let _ = writeln!(out);
    let _ = writeln!(out, "runs: {} converged: {}", records.len(), converged);

    let _ = writeln!(out);
    let _ = writeln!(out, "## Power-law fits against n");
    for column in FITTED {
        let points = column_points(records, column).expect("known column");
        match fit_power_law(&points) {
            Ok(fit) => {
                let _ = writeln!(out, "{column}: {fit} a={:.6e}", fit.a);
            }
            Err(_) if points.is_empty() => {
                let _ = writeln!(out, "{column}: no data");
            }
            Err(e) => {
                let _ = writeln!(out, "{column}: no fit ({e})");
            }
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "reference exponents at full scale (context only):");
    for (name, b, lo, hi) in REFERENCE_EXPONENTS {
        let _ = writeln!(out, "  {name}: b={b:.3} ci95=[{lo:.3},{hi:.3}]");
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "## Per-n medians");
    if records.is_empty() {
        let _ = writeln!(out, "no data");
    } else {
        let _ = writeln!(
            out,
            "{:>6} {:>5} {:>9} {:>10} {:>12} {:>8} {:>12} {:>12}",
            "n", "runs", "converged", "iterations", "kappa_max", "zeta_max", "delta_min", "cost_metric"
        );
        let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        for n in ns {
            let cell: Vec<&RunRecord> = records.iter().filter(|r| r.n == n).collect();
            let ok: Vec<&&RunRecord> = cell.iter().filter(|r| r.converged).collect();
            let med = |f: fn(&RunRecord) -> f64| median(ok.iter().map(|r| f(r)).collect());
            let _ = writeln!(
                out,
                "{:>6} {:>5} {:>9} {:>10.1} {:>12.4e} {:>8.4} {:>12.4e} {:>12.4e}",
                n,
                cell.len(),
                ok.len(),
                med(|r| r.iterations as f64),
                med(|r| r.kappa_max),
                med(|r| r.zeta_max),
                med(|r| r.delta_min),
                med(|r| r.cost_metric),
            );
        }
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "## Accuracy difference (noisy - exact)");
    let cdf = accuracy_cdf(records);
    if cdf.n_records == 0 {
        let _ = writeln!(out, "no data");
    } else {
        if let Some((train, test)) = fraction_within(records, 0.05) {
            let _ = writeln!(
                out,
                "fraction with |difference| <= 0.05: train={train:.4} test={test:.4} (records={})",
                cdf.n_records
            );
        }
        let _ = writeln!(out, "{:>9} {:>8} {:>8}", "threshold", "train", "test");
        for ((t, a), b) in cdf.thresholds.iter().zip(&cdf.train).zip(&cdf.test) {
            let _ = writeln!(out, "{:>9.2} {:>8.4} {:>8.4}", t, a, b);
        }
    }
    out
}
