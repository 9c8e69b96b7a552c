//! Short-step IPM runs on small SVM reductions: convergence, feasibility
//! bookkeeping and the per-step guarantees of the analysis.

use nalgebra::DMatrix;
use qipm_core::ipm::{
    self, initial_point, rxs_matrix, step_with, theta_bound, CheckMode, IpmConfig, MeasureMode,
    NoiseMode, StepContext, ALPHA,
};
use qipm_core::newton::assemble;
use qipm_core::socp::{in_neighborhood, linear_residuals, Iterate, SocpInstance};
use qipm_core::svm;
use qipm_core::Error;

fn instance(n: usize, p: f64, seed: u64) -> SocpInstance {
    let (train, _) = svm::generate(n, 2 * n, p, seed).unwrap();
    svm::to_socp(&train, 1.0).unwrap()
}

fn exact() -> IpmConfig {
    IpmConfig {
        measure: MeasureMode::Off,
        ..IpmConfig::default()
    }
}

#[test]
fn toy_exact_run_converges_with_zero_residuals() {
    let inst = instance(4, 0.0, 1);
    let cfg = IpmConfig {
        check_mode: CheckMode::Verification,
        ..exact()
    };
    let trace = ipm::run(&inst, &cfg).unwrap();
    assert!(trace.converged);
    assert!(trace.final_iterate.mu() <= 0.1);
    assert!(trace.iterations() <= trace.iteration_bound);
    assert!(trace.cost_metric.is_none(), "nothing measured");
    for r in &trace.records {
        assert!(r.primal_residual <= 1e-8, "iteration {}: {}", r.index, r.primal_residual);
        assert!(r.lambda_min_x_next > 0.0 && r.lambda_min_s_next > 0.0);
        assert_eq!(r.injected_error, 0.0);
    }
    assert_eq!(trace.violations().count(), 0);
}

#[test]
fn target_above_initial_gap_takes_no_steps() {
    let inst = instance(4, 0.2, 2);
    let mu0 = initial_point(&inst, None).unwrap().mu();
    let trace = ipm::run(&inst, &IpmConfig { epsilon: 2.0 * mu0, ..exact() }).unwrap();
    assert!(trace.converged);
    assert_eq!(trace.iterations(), 0);
    assert_eq!(trace.iteration_bound, 0);
    assert!(trace.cost_metric.is_none());
}

#[test]
fn undamped_neighborhood_steps_contract() {
    for (n, p, seed) in [(4, 0.0, 3), (8, 0.3, 4), (4, 0.5, 5)] {
        let inst = instance(n, p, seed);
        let trace = ipm::run(&inst, &exact()).unwrap();
        let r = inst.rank() as f64;
        let mut checked = 0;
        for rec in &trace.records {
            if rec.damped || rec.d_before > 0.01 * rec.mu_before {
                continue;
            }
            checked += 1;
            assert!(rec.mu_after / rec.mu_before <= 1.0 - ALPHA / r.sqrt() + 1e-9);
            assert!(rec.d_after <= 0.01 * rec.mu_after);
        }
        assert!(checked > trace.iterations() / 2, "{checked} of {}", trace.iterations());
    }
}

#[test]
fn tomography_run_meets_final_infeasibility_bounds() {
    for (n, p, seed) in [(4, 0.0, 6), (8, 0.5, 7)] {
        let inst = instance(n, p, seed);
        let cfg = IpmConfig {
            noise_mode: NoiseMode::Tomography,
            seed,
            ..IpmConfig::default()
        };
        let trace = ipm::run(&inst, &cfg).unwrap();
        assert!(trace.converged);
        for rec in &trace.records {
            assert!(rec.lambda_min_x_next > 0.0 && rec.lambda_min_s_next > 0.0);
            assert!((rec.injected_error - 0.9 * rec.delta_i).abs() <= 1e-12 * rec.delta_i.max(1e-300));
        }
        let last = trace.records.last().unwrap();
        let delta = last.delta_i;
        let a = inst.a_norm();
        let (primal, dual) = linear_residuals(&inst, &trace.final_iterate);
        assert!(primal <= delta * a, "{primal} > {}", delta * a);
        assert!(dual <= delta * (a + 1.0), "{dual} > {}", delta * (a + 1.0));
        let cost = trace.cost_metric.unwrap();
        assert!(cost.is_finite() && cost > 0.0);
    }
}

#[test]
fn same_seed_same_trace() {
    let inst = instance(4, 0.3, 8);
    let cfg = IpmConfig {
        noise_mode: NoiseMode::Tomography,
        seed: 99,
        ..IpmConfig::default()
    };
    let a = ipm::run(&inst, &cfg).unwrap();
    let b = ipm::run(&inst, &cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_iterate, b.final_iterate);
    let c = ipm::run(&inst, &IpmConfig { seed: 100, ..cfg }).unwrap();
    assert_ne!(a.final_iterate, c.final_iterate);
}

#[test]
fn rejects_invalid_constants() {
    let inst = instance(4, 0.0, 9);
    for cfg in [
        IpmConfig { eta: 0.4, ..exact() },
        IpmConfig { epsilon: 0.0, ..exact() },
        IpmConfig { xi: -1.0, ..exact() },
    ] {
        assert!(matches!(ipm::run(&inst, &cfg), Err(Error::InvalidParameter(_))));
    }
}

/// Walks an exact run and checks the scaled-step bounds, the `R_xs` bound
/// and the scaled Newton identity on neighborhood iterates.
#[test]
fn scaled_step_bounds_and_identity() {
    let inst = instance(4, 0.3, 10);
    let cfg = exact();
    let r = inst.rank();
    let sigma = cfg.sigma(r);
    let theta = theta_bound(&cfg, r).unwrap();
    let mut ctx = StepContext::default();
    let mut it: Iterate = initial_point(&inst, None).unwrap();
    let mut checked = 0;
    while it.mu() > cfg.epsilon {
        if in_neighborhood(&it, cfg.eta) && ctx.index % 7 == 0 {
            check_scaled(&inst, &it, sigma, theta, cfg.eta);
            checked += 1;
        }
        it = step_with(&inst, &it, &cfg, &mut ctx).unwrap().0;
    }
    assert!(checked > 10);
}

fn check_scaled(inst: &SocpInstance, it: &Iterate, sigma: f64, theta: f64, eta: f64) {
    let (x, s, mu) = (it.x(), it.s(), it.mu());
    let n = inst.n();
    let rxs = rxs_matrix(it).unwrap();
    let dev = (&rxs - DMatrix::identity(n, n) * mu).svd(false, false).singular_values.max();
    assert!(dev <= 3.0 * eta * mu, "{dev} > {}", 3.0 * eta * mu);

    let step = assemble(inst, it, sigma).unwrap().solve_exact().unwrap();
    let dx_hat = x.t_inv_apply(&step.dx).unwrap();
    let ds_hat = x.t_apply(&step.ds).unwrap().scale(1.0 / mu);
    assert!(dx_hat.frobenius_norm() <= theta / 2f64.sqrt());
    assert!(ds_hat.frobenius_norm() <= theta * 2f64.sqrt());

    // Δŝ = σe − ŝ − μ⁻¹R_xsΔx̂
    let s_hat = x.t_apply(s).unwrap().scale(1.0 / mu);
    let e = qipm_core::jordan::BlockVector::identity(inst.cones());
    let predicted = e.scale(sigma).values() - s_hat.values() - (&rxs * dx_hat.values()) / mu;
    let err = (&predicted - ds_hat.values()).norm();
    assert!(err <= 1e-8 * (1.0 + ds_hat.norm()), "identity off by {err:e}");
}
