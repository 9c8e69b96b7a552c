//! The short-step primal-dual loop with optional simulated tomography noise.
//!
//! Each iteration solves the Newton system with `σ = 1 − χ/√r`, optionally
//! perturbs the solution by a seeded noise vector of norm `0.9 δᵢ` with
//! `δᵢ = ξ/4 · min(λmin(x), λmin(s))`, and takes the full step unless it leaves
//! the cone interior. The analysis guarantees, for an undamped step from inside
//! the `η`-neighborhood of an (approximately) feasible iterate:
//!
//! * `μ₊ ≤ (1 − 0.005/√r) μ`;
//! * `d(x₊, s₊, μ₊) ≤ η μ₊`;
//! * `x₊, s₊ ∈ int L`, and `λmin ≥ 0.8` in scaled coordinates;
//! * `‖Δx̂‖_F ≤ Θ/√2`, `‖Δŝ‖_F ≤ Θ√2` for the exact scaled step.
//!
//! These are checked on every such step and recorded; in
//! [`CheckMode::Verification`] a failed check aborts the run.

use alloc::{format, string::String, vec::Vec};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jordan::{BlockDiag, BlockVector};
use crate::math;
use crate::newton::{assemble_with, ConditionEstimator, Measure, SolveReport};
use crate::socp::{
    central_path_distance, in_neighborhood, linear_residuals, Iterate, InstanceLayout,
    SocpInstance,
};

/// Per-step gap contraction constant `α` of the analysis.
pub const ALPHA: f64 = 0.005;

const MAX_HALVINGS: u32 = 30;
const CHECK_SLACK: f64 = 1e-9;
const SCALED_LAMBDA_FLOOR: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    Exact,
    Tomography,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Violations are recorded.
    Production,
    /// Violations abort the run.
    Verification,
}

/// How `κᵢ` and `ζᵢ` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    Off,
    Estimate,
    Dense,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IpmConfig {
    pub eta: f64,
    pub chi: f64,
    pub xi: f64,
    /// Target duality gap.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub noise_mode: NoiseMode,
    pub seed: u64,
    pub check_mode: CheckMode,
    pub measure: MeasureMode,
}

impl Default for IpmConfig {
    fn default() -> Self {
        Self {
            eta: 0.01,
            chi: 0.01,
            xi: 0.001,
            epsilon: 0.1,
            max_iterations: 200_000,
            noise_mode: NoiseMode::Exact,
            seed: 0,
            check_mode: CheckMode::Production,
            measure: MeasureMode::Estimate,
        }
    }
}

impl IpmConfig {
    /// `σ = 1 − χ/√r`.
    pub fn sigma(&self, r: usize) -> f64 {
        1.0 - self.chi / math::sqrt(r as f64)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.eta > 0.0
            && self.eta < 1.0 / 3.0
            && self.chi > 0.0
            && self.xi > 0.0
            && self.epsilon > 0.0
            && self.epsilon.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid solver constants: eta={} chi={} xi={} epsilon={}",
                self.eta, self.chi, self.xi, self.epsilon
            )))
        }
    }
}

/// Everything measured during one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub index: usize,
    pub mu_before: f64,
    pub mu_after: f64,
    pub d_before: f64,
    pub d_after: f64,
    pub lambda_min_x: f64,
    pub lambda_min_s: f64,
    pub lambda_min_x_next: f64,
    pub lambda_min_s_next: f64,
    /// `ξ/4 · min(λmin(x), λmin(s))`.
    pub delta_i: f64,
    /// `ℓ₂` norm of the noise added to the step.
    pub injected_error: f64,
    pub kappa_i: Option<f64>,
    pub zeta_i: Option<f64>,
    /// `(‖Δx‖_F, ‖Δs‖_F)` of the step that was applied, before damping.
    pub step_norms: (f64, f64),
    /// `(‖Δx̂‖_F, ‖Δŝ‖_F)` of the exact step in scaled coordinates.
    pub scaled_step_norms: (f64, f64),
    /// `(‖Δx̂ − Δx̂̃‖_F, ‖Δŝ − Δŝ̃‖_F)`.
    pub scaled_errors: (f64, f64),
    /// `(λmin(e + Δx̂̃), λmin(ŝ + Δŝ̃))`.
    pub scaled_lambda_min: (f64, f64),
    pub residuals_before: (f64, f64),
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub theta_bound: f64,
    pub step_length: f64,
    pub damped: bool,
    /// Inside the neighborhood, residuals within the noise bounds, undamped.
    pub premises_held: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    pub initial_mu: f64,
    pub final_iterate: Iterate,
    pub converged: bool,
    /// `⌈(√r/α) ln(μ₀/ε)⌉`.
    pub iteration_bound: usize,
    pub cost_metric: Option<f64>,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn kappa_max(&self) -> Option<f64> {
        fold_opt(self.records.iter().map(|r| r.kappa_i), f64::max)
    }

    pub fn zeta_max(&self) -> Option<f64> {
        fold_opt(self.records.iter().map(|r| r.zeta_i), f64::max)
    }

    pub fn delta_min(&self) -> Option<f64> {
        self.records.iter().map(|r| r.delta_i).reduce(f64::min)
    }

    pub fn violations(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.records
            .iter()
            .flat_map(|r| r.violations.iter().map(move |v| (r.index, v.as_str())))
    }
}

fn fold_opt(mut it: impl Iterator<Item = Option<f64>>, f: fn(f64, f64) -> f64) -> Option<f64> {
    let first = it.next()??;
    it.try_fold(first, |acc, v| v.map(|v| f(acc, v)))
}

/// `Θ = 2√(η²/2 + (1−σ)²r)/(1 − 3η)`, which with `σ = 1 − χ/√r` is
/// `√(2η² + 4χ²)/(1 − 3η)` for every `r`.
pub fn theta_bound(cfg: &IpmConfig, r: usize) -> Result<f64> {
    if !(cfg.eta < 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must be below 1/3, got {}",
            cfg.eta
        )));
    }
    let one_minus_sigma = 1.0 - cfg.sigma(r);
    Ok(2.0 * math::sqrt(cfg.eta * cfg.eta / 2.0 + one_minus_sigma * one_minus_sigma * r as f64)
        / (1.0 - 3.0 * cfg.eta))
}

/// `⌈(√r/α) ln(μ₀/ε)⌉`, zero when `ε ≥ μ₀`.
pub fn iteration_bound(mu0: f64, epsilon: f64, r: usize) -> usize {
    if epsilon >= mu0 {
        return 0;
    }
    math::ceil(math::sqrt(r as f64) / ALPHA * math::ln(mu0 / epsilon)) as usize
}

/// `δᵢ = ξ/4 · min(λmin(x), λmin(s))`.
pub fn tomography_precision(iter: &Iterate, xi: f64) -> Result<f64> {
    let lambda_min = iter.x().lambda_min().min(iter.s().lambda_min());
    if !(lambda_min > 0.0) {
        return Err(Error::NotInterior { lambda_min });
    }
    Ok(xi / 4.0 * lambda_min)
}

/// Dual start scale `θ = 2(1 + ‖c‖₂)`.
fn dual_scale(inst: &SocpInstance) -> f64 {
    2.0 * (1.0 + inst.c().spectral_norm())
}

/// A strictly feasible primal start with `y = 0` and `s = θe`.
///
/// SVM reductions use the constructive start `w = 0, t = 1`; other instances
/// need `hint`, a strictly feasible primal point.
pub fn initial_point(inst: &SocpInstance, hint: Option<&BlockVector>) -> Result<Iterate> {
    let cones = inst.cones();
    let x = match (hint, inst.layout()) {
        (Some(x), _) => {
            if x.structure() != cones {
                return Err(Error::StructureMismatch {
                    left: cones.dim(),
                    right: x.dim(),
                });
            }
            let lambda_min = x.lambda_min();
            if !(lambda_min > 0.0) {
                return Err(Error::NotInterior { lambda_min });
            }
            let res = (inst.mul_a(x.values()) - inst.b()).norm();
            if res > 1e-8 * (1.0 + inst.b().norm()) {
                return Err(Error::InvalidParameter(format!(
                    "starting point violates Ax = b by {res:e}"
                )));
            }
            x.clone()
        }
        (None, InstanceLayout::Svm { features, points, folded }) => {
            svm_start(inst, features, points, folded)?
        }
        (None, InstanceLayout::General) => return Err(Error::NoStartingPoint),
    };
    let s = BlockVector::identity(cones).scale(dual_scale(inst));
    Iterate::new(x, DVector::zeros(inst.m()), s)
}

fn svm_start(inst: &SocpInstance, n: usize, m: usize, folded: bool) -> Result<BlockVector> {
    let cones = inst.cones();
    let head = if folded { n + 3 } else { n + 2 };
    let expected = head + m + usize::from(!folded);
    if cones.dim() != expected || cones.sizes()[0] != head {
        return Err(Error::Dimension {
            what: "SVM layout",
            expected,
            found: cones.dim(),
        });
    }
    let mut x = BlockVector::zeros(cones);
    let v = x.values_mut();
    v[0] = 2.0;
    v[1] = 1.0;
    if folded {
        for i in 0..m {
            v[head + i] = 1.0;
        }
    } else {
        // b = 1/2 and ξᵢ = 1 − yᵢ/2 solve b + yᵢξᵢ = yᵢ
        v[head] = 0.5;
        for i in 0..m {
            v[head + 1 + i] = 1.0 - 0.5 * inst.b()[i];
        }
    }
    Ok(x)
}

/// Per-run state threaded through [`step_with`].
#[derive(Clone, Debug, Default)]
pub struct StepContext {
    pub index: usize,
    /// `δ` of the previous iteration (0 before the first step or in exact mode).
    pub last_delta: f64,
    pub estimator: ConditionEstimator,
}

fn iteration_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One iteration from a fresh context.
pub fn step(inst: &SocpInstance, iter: &Iterate, cfg: &IpmConfig) -> Result<(Iterate, IterationRecord)> {
    step_with(inst, iter, cfg, &mut StepContext::default())
}

pub fn step_with(
    inst: &SocpInstance,
    iter: &Iterate,
    cfg: &IpmConfig,
    ctx: &mut StepContext,
) -> Result<(Iterate, IterationRecord)> {
    cfg.validate()?;
    let r = inst.rank();
    let sigma = cfg.sigma(r);
    let theta = theta_bound(cfg, r)?;
    let (x, s, mu) = (iter.x(), iter.s(), iter.mu());
    let lambda_min_x = x.lambda_min();
    let lambda_min_s = s.lambda_min();
    let delta_i = tomography_precision(iter, cfg.xi)?;
    let residuals_before = linear_residuals(inst, iter);

    let measure = match cfg.measure {
        MeasureMode::Off => Measure::Skip,
        MeasureMode::Dense => Measure::Dense,
        MeasureMode::Estimate => Measure::Estimate(&mut ctx.estimator),
    };
    let sys = assemble_with(inst, iter, sigma, measure)?;
    let exact = sys.solve_exact()?;
    let applied: SolveReport = match cfg.noise_mode {
        NoiseMode::Exact => exact.clone(),
        NoiseMode::Tomography => sys.perturb(&exact, delta_i, iteration_seed(cfg.seed, ctx.index))?,
    };

    // scaled diagnostics: Δx̂ = T_x⁻¹Δx, Δŝ = μ⁻¹T_xΔs
    let inv_mu = 1.0 / mu;
    let dx_hat = x.t_inv_apply(&exact.dx)?;
    let ds_hat = x.t_apply(&exact.ds)?.scale(inv_mu);
    let dx_hat_noisy = x.t_inv_apply(&applied.dx)?;
    let ds_hat_noisy = x.t_apply(&applied.ds)?.scale(inv_mu);
    let s_hat = x.t_apply(s)?.scale(inv_mu);
    let e = BlockVector::identity(inst.cones());
    let scaled_lambda_min = (
        e.add(&dx_hat_noisy)?.lambda_min(),
        s_hat.add(&ds_hat_noisy)?.lambda_min(),
    );
    let scaled_step_norms = (dx_hat.frobenius_norm(), ds_hat.frobenius_norm());
    let scaled_errors = (
        dx_hat.sub(&dx_hat_noisy)?.frobenius_norm(),
        ds_hat.sub(&ds_hat_noisy)?.frobenius_norm(),
    );

    // damping: halve until both sides stay interior
    let mut alpha = 1.0;
    let mut halvings = 0;
    let (x_next, s_next) = loop {
        let mut xn = x.clone();
        xn.axpy(alpha, &applied.dx)?;
        let mut sn = s.clone();
        sn.axpy(alpha, &applied.ds)?;
        if xn.lambda_min() > 0.0 && sn.lambda_min() > 0.0 {
            break (xn, sn);
        }
        if halvings == MAX_HALVINGS {
            return Err(Error::DampingExhausted { halvings });
        }
        alpha *= 0.5;
        halvings += 1;
    };
    let y_next = iter.y() + &applied.dy * alpha;
    let next = Iterate::new(x_next, y_next, s_next)?;
    let (primal_residual, dual_residual) = linear_residuals(inst, &next);
    let d_after = if next.mu() > 0.0 {
        central_path_distance(next.x(), next.s(), next.mu()).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };

    let damped = halvings > 0;
    let slack = CHECK_SLACK * (1.0 + inst.a_norm() * x.norm());
    let a_norm = inst.a_norm();
    let residuals_ok = residuals_before.0 <= a_norm * ctx.last_delta + slack
        && residuals_before.1 <= (a_norm + 1.0) * ctx.last_delta + slack;
    let premises_held = !damped && in_neighborhood(iter, cfg.eta) && residuals_ok;

    let mut violations = Vec::new();
    if premises_held {
        let ratio_bound = 1.0 - ALPHA / math::sqrt(r as f64) + CHECK_SLACK;
        if next.mu() / mu > ratio_bound {
            violations.push(format!(
                "gap contraction: mu ratio {} exceeds {}",
                next.mu() / mu,
                ratio_bound
            ));
        }
        if !(d_after <= cfg.eta * next.mu()) {
            violations.push(format!(
                "neighborhood: d {} exceeds eta*mu {}",
                d_after,
                cfg.eta * next.mu()
            ));
        }
        if !next.is_strictly_feasible() {
            violations.push("strict feasibility lost".into());
        }
        if scaled_lambda_min.0 < SCALED_LAMBDA_FLOOR || scaled_lambda_min.1 < SCALED_LAMBDA_FLOOR {
            violations.push(format!(
                "scaled lambda_min ({}, {}) below {}",
                scaled_lambda_min.0, scaled_lambda_min.1, SCALED_LAMBDA_FLOOR
            ));
        }
        let sqrt2 = core::f64::consts::SQRT_2;
        if scaled_step_norms.0 > theta / sqrt2 + CHECK_SLACK
            || scaled_step_norms.1 > theta * sqrt2 + CHECK_SLACK
        {
            violations.push(format!(
                "scaled step norms ({}, {}) exceed ({}, {})",
                scaled_step_norms.0,
                scaled_step_norms.1,
                theta / sqrt2,
                theta * sqrt2
            ));
        }
        if scaled_errors.0 > cfg.xi || scaled_errors.1 > cfg.xi {
            violations.push(format!(
                "scaled errors ({}, {}) exceed xi {}",
                scaled_errors.0, scaled_errors.1, cfg.xi
            ));
        }
    }
    if cfg.check_mode == CheckMode::Verification {
        if let Some(what) = violations.first() {
            return Err(Error::InvariantViolated {
                iteration: ctx.index,
                what: what.clone(),
            });
        }
    }

    let record = IterationRecord {
        index: ctx.index,
        mu_before: mu,
        mu_after: next.mu(),
        d_before: iter.d(),
        d_after,
        lambda_min_x,
        lambda_min_s,
        lambda_min_x_next: next.x().lambda_min(),
        lambda_min_s_next: next.s().lambda_min(),
        delta_i,
        injected_error: applied.injected_error,
        kappa_i: sys.kappa(),
        zeta_i: sys.zeta(),
        step_norms: (applied.dx.frobenius_norm(), applied.ds.frobenius_norm()),
        scaled_step_norms,
        scaled_errors,
        scaled_lambda_min,
        residuals_before,
        primal_residual,
        dual_residual,
        theta_bound: theta,
        step_length: alpha,
        damped,
        premises_held,
        violations,
    };
    ctx.index += 1;
    ctx.last_delta = match cfg.noise_mode {
        NoiseMode::Exact => 0.0,
        NoiseMode::Tomography => delta_i,
    };
    Ok((next, record))
}

/// Runs from the instance's constructive start.
pub fn run(inst: &SocpInstance, cfg: &IpmConfig) -> Result<SolveTrace> {
    run_from(inst, initial_point(inst, None)?, cfg)
}

/// Iterates until `μ ≤ ε` or `max_iterations`. A run whose best gap has not
/// improved for `⌈10√r⌉` iterations is reported as stalled.
pub fn run_from(inst: &SocpInstance, start: Iterate, cfg: &IpmConfig) -> Result<SolveTrace> {
    cfg.validate()?;
    let r = inst.rank();
    let initial_mu = start.mu();
    let window = math::ceil(10.0 * math::sqrt(r as f64)) as usize;
    let mut ctx = StepContext::default();
    let mut iter = start;
    let mut records = Vec::new();
    let mut best = (initial_mu, 0usize);
    while iter.mu() > cfg.epsilon && records.len() < cfg.max_iterations {
        let (next, record) = step_with(inst, &iter, cfg, &mut ctx)?;
        records.push(record);
        iter = next;
        if iter.mu() < best.0 {
            best = (iter.mu(), records.len());
        } else if records.len() - best.1 > window {
            return Err(Error::Stalled {
                iteration: records.len(),
                window,
                mu: iter.mu(),
            });
        }
    }
    let converged = iter.mu() <= cfg.epsilon;
    let mut trace = SolveTrace {
        records,
        initial_mu,
        final_iterate: iter,
        converged,
        iteration_bound: iteration_bound(initial_mu, cfg.epsilon, r),
        cost_metric: None,
    };
    trace.cost_metric = cost_metric(&trace, inst).ok();
    Ok(trace)
}

/// `size^{1.5} κ ζ / δ²` with `κ = maxᵢ κᵢ`, `ζ = maxᵢ ζᵢ`, `δ = minᵢ δᵢ`.
///
/// `size` is the feature count for SVM reductions and the cone dimension
/// otherwise.
pub fn cost_metric(trace: &SolveTrace, inst: &SocpInstance) -> Result<f64> {
    if trace.records.is_empty() {
        return Err(Error::Empty("trace has no iterations"));
    }
    let kappa = trace.kappa_max().ok_or(Error::Empty("kappa was not measured"))?;
    let zeta = trace.zeta_max().ok_or(Error::Empty("zeta was not measured"))?;
    let delta = trace.delta_min().ok_or(Error::Empty("trace has no iterations"))?;
    let size = match inst.layout() {
        InstanceLayout::Svm { features, .. } => features,
        InstanceLayout::General => inst.n(),
    };
    Ok(cost_formula(size, kappa, zeta, delta))
}

/// `size^{1.5} κ ζ / δ²`.
pub fn cost_formula(size: usize, kappa: f64, zeta: f64, delta: f64) -> f64 {
    math::powf(size as f64, 1.5) * kappa * zeta / (delta * delta)
}

/// Blocks of `R_xs = T_x Arw(x)⁻¹ Arw(s) T_x`.
pub fn rxs_blocks(iter: &Iterate) -> Result<BlockDiag> {
    let (x, s) = (iter.x(), iter.s());
    let t = x.t_rep()?;
    let ax = x.arw();
    let as_ = s.arw();
    let blocks = t
        .blocks()
        .iter()
        .zip(ax.blocks())
        .zip(as_.blocks())
        .map(|((tb, xb), sb)| {
            let inv = xb.clone().try_inverse().ok_or(Error::SingularArrow)?;
            Ok(tb * inv * sb * tb)
        })
        .collect::<Result<Vec<DMatrix<f64>>>>()?;
    BlockDiag::new(x.structure(), blocks)
}

/// Dense `R_xs`, for diagnostics.
pub fn rxs_matrix(iter: &Iterate) -> Result<DMatrix<f64>> {
    Ok(rxs_blocks(iter)?.to_dense())
}
