//! The Newton system against dense oracles: an orthogonal-factorization
//! solve, a full SVD for `κ` and `ζ`, and the statistics of injected noise.

use nalgebra::{DMatrix, DVector};
use qipm_core::jordan::{BlockVector, ConeStructure};
use qipm_core::newton::{
    self, assemble, assemble_with, measure_kappa, measure_zeta, noise_vector, ConditionEstimator,
    Measure, NOISE_FRACTION,
};
use qipm_core::socp::{Iterate, SocpInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn interior(rng: &mut ChaCha8Rng, cones: &ConeStructure) -> BlockVector {
    let mut v = BlockVector::zeros(cones);
    for range in cones.blocks() {
        let mut tail = 0.0;
        for j in range.start + 1..range.end {
            let t = rng.gen_range(-2.0..2.0);
            v.values_mut()[j] = t;
            tail += t * t;
        }
        v.values_mut()[range.start] = f64::sqrt(tail) + rng.gen_range(0.05..2.0);
    }
    v
}

/// A random instance with `r ≤ 4` blocks of size ≤ 5 and a random interior,
/// generally infeasible, iterate.
fn toy(seed: u64) -> (SocpInstance, Iterate, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = rng.gen_range(1..=4);
    let sizes: Vec<usize> = (0..r).map(|_| rng.gen_range(1..=5)).collect();
    let cones = ConeStructure::new(sizes).unwrap();
    let n = cones.dim();
    let m = rng.gen_range(1..=n.max(2) - 1).max(1).min(n);
    let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    let b = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    let c = BlockVector::new(&cones, DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).unwrap();
    let inst = SocpInstance::new(a, b, c).unwrap();
    let x = interior(&mut rng, &cones);
    let s = interior(&mut rng, &cones);
    let y = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    let sigma = rng.gen_range(0.05..0.99);
    (inst, Iterate::new(x, y, s).unwrap(), sigma)
}

#[test]
fn direct_solve_matches_orthogonal_oracle() {
    for seed in 0..20 {
        let (inst, it, sigma) = toy(seed);
        let sys = assemble(&inst, &it, sigma).unwrap();
        let m = sys.matrix();
        let oracle = m.clone().qr().solve(sys.rhs()).expect("nonsingular");
        for report in [sys.solve_exact().unwrap(), sys.solve_dense().unwrap()] {
            let sol = report.stacked();
            let rel = (&sol - &oracle).norm() / oracle.norm().max(1e-300);
            assert!(rel <= 1e-8, "seed {seed}: relative difference {rel:e}");
            let bound = newton::RESIDUAL_REL_TOL * (sys.frobenius_norm() * sol.norm() + sys.rhs().norm());
            assert!(report.residual_norm <= bound);
            assert_eq!(report.injected_error, 0.0);
        }
    }
}

#[test]
fn feasible_iterate_has_zero_residual_blocks() {
    let (inst, it, sigma) = toy(3);
    let (x, y, s) = it.into_parts();
    let b = inst.mul_a(x.values());
    let c = BlockVector::new(inst.cones(), inst.mul_at(&y) + s.values()).unwrap();
    let feasible = SocpInstance::new(inst.a().clone(), b, c).unwrap();
    let it = Iterate::new(x, y, s).unwrap();
    let sys = assemble(&feasible, &it, sigma).unwrap();
    let (m, n) = (feasible.m(), feasible.n());
    assert!(sys.rhs().rows(0, m + n).iter().all(|v| v.abs() < 1e-12));
    assert!(sys.rhs().rows(m + n, n).norm() > 0.0);
}

#[test]
fn nonsingular_on_random_neighborhood_iterates() {
    for seed in 100..160 {
        let (inst, it, _) = toy(seed);
        // move s onto the central path of x: s = μ x⁻¹
        let (x, y, _) = it.into_parts();
        let s = x.inverse().unwrap().scale(0.7);
        let it = Iterate::new(x, y, s).unwrap();
        let sys = assemble(&inst, &it, 0.9).unwrap();
        assert!(sys.solve_exact().is_ok(), "seed {seed}");
        assert!(sys.kappa().unwrap().is_finite());
    }
}

#[test]
fn zeta_is_bounded_by_root_dimension() {
    for seed in 200..260 {
        let (inst, it, sigma) = toy(seed);
        let sys = assemble(&inst, &it, sigma).unwrap();
        let zeta = sys.zeta().unwrap();
        let sym_dim = 2 * sys.dim();
        assert!(zeta >= 1.0 - 1e-12 || zeta <= (sym_dim as f64).sqrt());
        assert!(zeta <= (sym_dim as f64).sqrt() * (1.0 + 1e-12), "seed {seed}: {zeta}");
    }
}

#[test]
fn kappa_and_zeta_reference_values() {
    assert_eq!(measure_kappa(&DMatrix::identity(5, 5)), 1.0);
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(&[10.0, 1.0]));
    assert!((measure_kappa(&d) - 10.0).abs() < 1e-12);
    assert!(measure_kappa(&DMatrix::zeros(3, 3)).is_infinite());
    assert!((measure_zeta(&DMatrix::identity(6, 6)).unwrap() - 1.0).abs() < 1e-12);
    let mut u = DMatrix::zeros(4, 4);
    u[(0, 0)] = 1.0;
    assert!((measure_zeta(&u).unwrap() - 1.0).abs() < 1e-12);
    assert!(measure_zeta(&DMatrix::zeros(2, 2)).is_err());
}

#[test]
fn estimator_tracks_dense_svd() {
    for seed in 300..320 {
        let (inst, it, sigma) = toy(seed);
        let dense = assemble(&inst, &it, sigma).unwrap();
        let mut est = ConditionEstimator::new();
        let cheap = assemble_with(&inst, &it, sigma, Measure::Estimate(&mut est)).unwrap();
        let (k_dense, k_est) = (dense.kappa().unwrap(), cheap.kappa().unwrap());
        assert!(k_est <= k_dense * (1.0 + 1e-6), "seed {seed}: {k_est} > {k_dense}");
        assert!(k_est >= 0.9 * k_dense, "seed {seed}: {k_est} vs {k_dense}");
        let (z_dense, z_est) = (dense.zeta().unwrap(), cheap.zeta().unwrap());
        assert!(z_est >= z_dense * (1.0 - 1e-6), "seed {seed}: {z_est} vs {z_dense}");
        assert!(z_est <= z_dense / 0.9, "seed {seed}: {z_est} vs {z_dense}");
    }
}

#[test]
fn noise_norm_is_exact_and_direction_is_unbiased() {
    let target = 3e-4;
    let len = 8;
    let draws = 1000;
    let mut sum = DVector::zeros(len);
    let mut sum_sq = DVector::zeros(len);
    for seed in 0..draws {
        let v = noise_vector(len, NOISE_FRACTION * target, seed);
        assert!((v.norm() - NOISE_FRACTION * target).abs() <= 1e-12 * target);
        let u = &v / v.norm();
        sum += &u;
        sum_sq += u.component_mul(&u);
    }
    let k = draws as f64;
    for j in 0..len {
        let mean = sum[j] / k;
        let var = sum_sq[j] / k - mean * mean;
        let se = (var / k).sqrt();
        assert!(mean.abs() <= 3.0 * se, "coordinate {j}: mean {mean} se {se}");
    }
}

#[test]
fn inexact_solve_injects_exact_error() {
    let (inst, it, sigma) = toy(7);
    let sys = assemble(&inst, &it, sigma).unwrap();
    let exact = sys.solve_exact().unwrap();
    assert_eq!(sys.solve_inexact(0.0, 1).unwrap().stacked(), exact.stacked());
    for target in [1e-6, 1e-3, 0.5] {
        let noisy = sys.solve_inexact(target, 11).unwrap();
        let err = (noisy.stacked() - exact.stacked()).norm();
        assert!((err - NOISE_FRACTION * target).abs() <= 1e-12 * (1.0 + target));
        assert!((noisy.injected_error - NOISE_FRACTION * target).abs() <= 1e-15);
        assert!(!noisy.exact);
        assert_eq!(sys.solve_inexact(target, 11).unwrap().stacked(), noisy.stacked());
    }
}
