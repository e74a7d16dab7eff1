//! Cross-module invariants that go beyond the per-module unit tests:
//! operator-norm boundedness, positive semidefiniteness of covariance
//! matrices, kernel continuity in the Hurst parameter, the discrete
//! restriction identity of the adjoint, and agreement of the two path
//! constructions under grid refinement.

use volterra_core::fracops::{estimate_holder_exponent, frac_integral, Side};
use volterra_core::grid::{SampledFunction, UniformGrid};
use volterra_core::kernels::{
    apply_k, apply_k_adjoint_steps, apply_k_factorized, covariance_fbm_closed,
    covariance_with_panels, KernelModel,
};
use volterra_core::linalg::symmetric_eigen;
use volterra_core::paths::{map_streams, sample_brownian, synthesize_volterra, RngSeed};
use volterra_core::verify::check_covariance;

/// Deterministic xorshift-style generator for test vectors.
fn test_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.max(1);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

#[test]
fn fractional_integral_operator_norm_stays_bounded() {
    // Discrete sup-norm ratio ‖I^γ v‖/‖v‖ on random vectors must not blow up
    // between n and 2n.
    for &gamma in &[0.25f64, 0.5, 0.75] {
        let mut previous: Option<f64> = None;
        for &n in &[128usize, 256, 512, 1024] {
            let grid = UniformGrid::new(n, 1.0).unwrap();
            let mut worst = 0.0f64;
            for trial in 0..5u64 {
                let mut vals = test_vector(n + 1, 1000 * trial + n as u64);
                // Keep values bounded away from pathological scales.
                for v in vals.iter_mut() {
                    *v *= 2.0;
                }
                let f = SampledFunction::new(grid, vals).unwrap();
                let sup_in = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let out = frac_integral(&f, gamma, Side::Left).unwrap();
                let sup_out = out.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                worst = worst.max(sup_out / sup_in);
            }
            if let Some(prev) = previous {
                assert!(
                    worst <= 2.0 * prev,
                    "γ={gamma}: norm ratio jumped {prev} -> {worst} at n={n}"
                );
            }
            previous = Some(worst);
        }
    }
}

#[test]
fn covariance_matrices_are_positive_semidefinite() {
    // Every m×m covariance matrix on distinct nodes must have eigenvalues
    // bounded below by -1e-10 · trace, quadrature error included.
    let cases: [(KernelModel, usize); 3] = [
        (KernelModel::stationary(0.3).unwrap(), 16),
        (KernelModel::stationary(0.7).unwrap(), 16),
        (KernelModel::levy(0.75).unwrap(), 32),
    ];
    for (model, m) in cases {
        let mut mat = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let t = (i + 1) as f64 / m as f64;
                let s = (j + 1) as f64 / m as f64;
                let r = covariance_with_panels(&model, t, s, 512).unwrap();
                mat[i * m + j] = r;
                mat[j * m + i] = r;
            }
        }
        let trace: f64 = (0..m).map(|i| mat[i * m + i]).sum();
        let (eig, _) = symmetric_eigen(&mat, m);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            min >= -1e-10 * trace,
            "{}: min eigenvalue {min} vs trace {trace}",
            model.family().name()
        );
    }
}

#[test]
fn kernel_is_lipschitz_in_hurst_with_stable_constant() {
    // ‖K_{H1}f − K_{H2}f‖_∞ ≤ C·|H1−H2|·‖f‖ with the fitted C stable
    // (within a factor 2) as the separation shrinks from 0.1 to 0.01.
    let grid = UniformGrid::new(256, 1.0).unwrap();
    let f = SampledFunction::from_fn(grid, |t| (3.0 * t).sin() + 0.5).unwrap();
    let norm = f
        .values()
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        * grid.step().sqrt();
    let fitted_c = |h1: f64, h2: f64| {
        let k1 = apply_k(&KernelModel::stationary(h1).unwrap(), &f).unwrap();
        let k2 = apply_k(&KernelModel::stationary(h2).unwrap(), &f).unwrap();
        let sup = k1
            .values()
            .iter()
            .zip(k2.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        sup / ((h1 - h2).abs() * norm)
    };
    let c_wide = fitted_c(0.75, 0.65);
    let c_narrow = fitted_c(0.705, 0.695);
    let ratio = c_wide.max(c_narrow) / c_wide.min(c_narrow);
    assert!(
        ratio < 2.0,
        "fitted constants {c_wide} vs {c_narrow} (ratio {ratio})"
    );
}

#[test]
fn hypergeometric_kernel_agrees_with_fractional_factorization() {
    // Two independent constructions of K_H: the hypergeometric kernel under
    // quadrature versus the weighted-fractional-integral factorization,
    // which never evaluates ₂F₁.
    let grid = UniformGrid::new(512, 1.0).unwrap();
    let f = SampledFunction::from_fn(grid, |t| t).unwrap();
    for &h in &[0.3f64, 0.7] {
        let model = KernelModel::stationary(h).unwrap();
        let direct = apply_k(&model, &f).unwrap();
        let fact = apply_k_factorized(h, &f).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=512 {
            if grid.node(i) >= 0.05 {
                worst = worst.max((direct.value(i) - fact.value(i)).abs());
            }
        }
        assert!(worst < 1e-5, "H = {h}: sup gap {worst}");
    }
    // Guard rails of the cross-check route.
    assert!(apply_k_factorized(0.5, &f).is_err());
    let shifted = SampledFunction::from_fn(grid, |t| t + 1.0).unwrap();
    assert!(apply_k_factorized(0.7, &shifted).is_err());
}

#[test]
fn adjoint_restriction_identity_is_exact() {
    // p_T 𝒦*_1 (p_T u) ≡ 𝒦*_T(u): zero-padding the step data to the full
    // horizon, applying the adjoint there and truncating reproduces the
    // [0, T] adjoint entry for entry.
    let grid = UniformGrid::new(64, 1.0).unwrap();
    for model in [
        KernelModel::stationary(0.7).unwrap(),
        KernelModel::stationary(0.3).unwrap(),
        KernelModel::levy(0.6).unwrap(),
    ] {
        let m = 40usize;
        let t_upper = grid.node(m);
        let cells: Vec<f64> = (0..m).map(|j| 0.3 + (j as f64 * 0.37).sin()).collect();
        let mut padded = cells.clone();
        padded.resize(64, 0.0);
        let full = apply_k_adjoint_steps(&model, grid, &padded, 1.0).unwrap();
        let restricted = apply_k_adjoint_steps(&model, grid, &cells, t_upper).unwrap();
        for i in 0..=m {
            assert_eq!(
                full.value(i),
                restricted.value(i),
                "{} node {i}",
                model.family().name()
            );
        }
    }
}

#[test]
fn synthesis_covariance_converges_to_kernel_covariance() {
    // Empirical covariance of synthesized paths approaches the quadrature
    // covariance as the grid refines: the max entrywise gap over an 8×8
    // node subset shrinks (within Monte Carlo noise) for n ∈ {64, 256, 1024}.
    let model = KernelModel::stationary(0.7).unwrap();
    let m_paths = 10_000u64;
    let picks: Vec<f64> = (1..=8).map(|k| k as f64 / 8.0).collect();
    let reference: Vec<f64> = picks
        .iter()
        .flat_map(|&t| {
            picks
                .iter()
                .map(|&s| covariance_fbm_closed(0.7, t, s).unwrap())
                .collect::<Vec<_>>()
        })
        .collect();
    let mut gaps = Vec::new();
    for &n in &[64usize, 256, 1024] {
        let grid = UniformGrid::new(n, 1.0).unwrap();
        let idx: Vec<usize> = picks.iter().map(|&t| grid.index_of(t).unwrap()).collect();
        let rows = map_streams(606_060, m_paths, 4, |seed| {
            let b = sample_brownian(grid, seed);
            let x = synthesize_volterra(&model, &b).unwrap();
            idx.iter().map(|&i| x.value(i)).collect::<Vec<f64>>()
        });
        let mut worst = 0.0f64;
        for a in 0..8 {
            for b in 0..8 {
                let emp: f64 =
                    rows.iter().map(|r| r[a] * r[b]).sum::<f64>() / m_paths as f64;
                worst = worst.max((emp - reference[a * 8 + b]).abs());
            }
        }
        gaps.push(worst);
    }
    // Allow an MC noise floor of ~4 standard errors on the finest level.
    let noise = 4.0 * covariance_fbm_closed(0.7, 1.0, 1.0).unwrap() / (m_paths as f64).sqrt();
    assert!(
        gaps[1] < gaps[0] + noise && gaps[2] < gaps[1] + noise,
        "gaps {gaps:?} (noise {noise})"
    );
    assert!(gaps[2] < 0.05, "finest gap {gaps:?}");
}

#[test]
fn brownian_holder_exponent_is_half() {
    let grid = UniformGrid::new(512, 1.0).unwrap();
    let paths: Vec<SampledFunction> =
        map_streams(123_321, 150, 4, |seed| sample_brownian(grid, seed));
    let est = estimate_holder_exponent(&paths, &[1, 2, 4, 8, 16]).unwrap();
    assert!((est - 0.5).abs() < 0.05, "estimate {est}");
}

#[test]
fn covariance_check_passes_for_both_families() {
    // H ∈ {0.3, 0.55, 0.7}, stationary and Lévy, with a Monte Carlo leg.
    let nodes: Vec<f64> = (1..=8).map(|k| k as f64 / 8.0).collect();
    for &h in &[0.3f64, 0.55, 0.7] {
        for model in [KernelModel::stationary(h).unwrap(), KernelModel::levy(h).unwrap()] {
            let report =
                check_covariance(&model, &nodes, 20_000, RngSeed::new(777_000, 0)).unwrap();
            assert!(
                report.passed,
                "H={h} {}: {report:?}",
                model.family().name()
            );
        }
    }
}
