//! Verification harness tying the kernel, path and integral modules to the
//! identities they must satisfy: covariance agreement, the chain-rule
//! residual of the symmetric integral, the Girsanov shift, and the
//! restriction identity of the endpoint-corrected scheme.
//!
//! Pass thresholds separate three error regimes so a failure localizes its
//! cause: exact grid-level algebra at 1e-10 absolute, quadrature vs closed
//! form at 1e-3 relative, Monte Carlo at 4 standardized deviations.

use crate::error::{Result, VolterraError};
use crate::grid::{SampledFunction, UniformGrid};
use crate::integrals::{r_pi_sum, stratonovich_estimate, Integrand};
use crate::kernels::{
    apply_k_adjoint, covariance_fbm_closed, covariance_levy_closed, covariance_with_panels,
    KernelFamily, KernelModel,
};
use crate::paths::{
    covariance_matrix, map_streams, sample_brownian, sample_gaussian_with_cov, simulate_bundle,
    RngSeed,
};
use crate::specfun::v_h;
use serde::Serialize;
use std::collections::BTreeMap;

/// Absolute threshold for identities that are exact discrete algebra.
pub const EXACT_IDENTITY_TOL: f64 = 1e-10;
/// Relative threshold for quadrature against closed forms.
pub const QUADRATURE_REL_TOL: f64 = 1e-3;
/// Standardized-deviation gate for Monte Carlo comparisons.
pub const MC_SIGMA_GATE: f64 = 4.0;
/// t-statistic gate for the chain-rule residual.
pub const ITO_TSTAT_GATE: f64 = 3.0;

/// Outcome of one identity check. Serializes with the schema
/// `{name, passed, metric, threshold, details}`.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    #[serde(rename = "name")]
    pub check_name: String,
    pub passed: bool,
    pub metric: f64,
    pub threshold: f64,
    pub details: BTreeMap<String, String>,
}

impl VerificationReport {
    fn new(name: &str, metric: f64, threshold: f64, details: BTreeMap<String, String>) -> Self {
        Self {
            check_name: name.to_string(),
            passed: metric <= threshold,
            metric,
            threshold,
            details,
        }
    }

    /// Human-readable one-liner for table output.
    pub fn summary_line(&self) -> String {
        format!(
            "{:<24} {}  metric {:.3e}  threshold {:.3e}",
            self.check_name,
            if self.passed { "PASS" } else { "FAIL" },
            self.metric,
            self.threshold
        )
    }
}

fn detail_seed(details: &mut BTreeMap<String, String>, seed: RngSeed) {
    details.insert("seed_master".into(), seed.master.to_string());
    details.insert("seed_stream".into(), seed.stream.to_string());
}

/// Closed-form covariance for the constant-Hurst families, if one exists.
fn closed_covariance(model: &KernelModel, t: f64, s: f64) -> Option<Result<f64>> {
    match model.family() {
        KernelFamily::StationaryFbm => Some(covariance_fbm_closed(model.hurst(), t, s)),
        KernelFamily::LevyFbm => Some(covariance_levy_closed(model.hurst(), t, s)),
        KernelFamily::Multifractional => None,
    }
}

/// Smallest power-of-two uniform grid whose nodes contain every entry of
/// `nodes` (up to the horizon = max node).
fn embedding_grid(nodes: &[f64]) -> Result<(UniformGrid, Vec<usize>)> {
    let horizon = nodes.iter().cloned().fold(0.0f64, f64::max);
    if !(horizon > 0.0) {
        return Err(VolterraError::Domain("nodes must include a positive time".into()));
    }
    let mut n = 4usize;
    while n <= 512 {
        let grid = UniformGrid::new(n, horizon)?;
        let idx: Option<Vec<usize>> = nodes.iter().map(|&t| grid.index_of(t)).collect();
        if let Some(idx) = idx {
            if idx.iter().all(|&i| i > 0) {
                return Ok((grid, idx));
            }
        }
        n *= 2;
    }
    Err(VolterraError::Domain(
        "nodes do not embed in a power-of-two grid of at most 512 intervals".into(),
    ))
}

/// Three-way covariance check: quadrature vs closed form (when a closed form
/// exists) and vs the empirical covariance of exact-sampler paths.
///
/// The combined metric is the worst leg normalized by its own gate, so the
/// report passes iff every leg passes.
pub fn check_covariance(
    model: &KernelModel,
    nodes: &[f64],
    mc_paths: u64,
    seed: RngSeed,
) -> Result<VerificationReport> {
    if nodes.len() < 2 {
        return Err(VolterraError::Domain("need at least 2 nodes".into()));
    }
    let mut details = BTreeMap::new();
    detail_seed(&mut details, seed);
    details.insert("nodes".into(), format!("{nodes:?}"));

    // Deterministic leg: quadrature vs closed form.
    let scale = match model.family() {
        KernelFamily::StationaryFbm => v_h(model.hurst())?,
        _ => 1.0,
    };
    let det_gate = QUADRATURE_REL_TOL * scale;
    let mut det_err: Option<f64> = None;
    if closed_covariance(model, nodes[0], nodes[0]).is_some() {
        let mut worst = 0.0f64;
        for (a, &t) in nodes.iter().enumerate() {
            for &s in nodes.iter().take(a + 1) {
                let quad = covariance_with_panels(model, t, s, 2048)?;
                let closed = closed_covariance(model, t, s).unwrap()?;
                worst = worst.max((quad - closed).abs());
            }
        }
        det_err = Some(worst);
        details.insert("quad_vs_closed_max_abs".into(), format!("{worst:.6e}"));
        details.insert("quad_vs_closed_gate".into(), format!("{det_gate:.6e}"));
    }

    // Monte Carlo leg: exact sampler empirical covariance.
    let mut mc_dev: Option<f64> = None;
    if mc_paths > 0 {
        let (grid, idx) = embedding_grid(nodes)?;
        details.insert("mc_grid_n".into(), grid.intervals().to_string());
        details.insert("mc_paths".into(), mc_paths.to_string());
        let cov = covariance_matrix(model, grid)?;
        let k = nodes.len();
        let rows = map_streams(seed.master, mc_paths, 1, |s| {
            let path = sample_gaussian_with_cov(
                &cov,
                grid,
                RngSeed::new(s.master, s.stream + seed.stream),
            )
            .expect("factorization succeeded for the shared matrix");
            idx.iter().map(|&i| path.value(i)).collect::<Vec<f64>>()
        });
        let n_grid = grid.intervals();
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in 0..=a {
                let emp: f64 =
                    rows.iter().map(|r| r[a] * r[b]).sum::<f64>() / mc_paths as f64;
                let raa = cov[(idx[a] - 1) * n_grid + (idx[a] - 1)];
                let rbb = cov[(idx[b] - 1) * n_grid + (idx[b] - 1)];
                let rab = cov[(idx[a] - 1) * n_grid + (idx[b] - 1)];
                let se = ((raa * rbb + rab * rab) / mc_paths as f64).sqrt();
                worst = worst.max((emp - rab).abs() / se);
            }
        }
        mc_dev = Some(worst);
        details.insert("mc_max_std_dev".into(), format!("{worst:.4}"));
        details.insert("mc_gate".into(), MC_SIGMA_GATE.to_string());
    }

    let mut metric = 0.0f64;
    match (det_err, mc_dev) {
        (None, None) => {
            return Err(VolterraError::Domain(
                "no closed form and no MC paths: nothing to check".into(),
            ))
        }
        (d, m) => {
            if let Some(d) = d {
                metric = metric.max(d / det_gate);
            }
            if let Some(m) = m {
                metric = metric.max(m / MC_SIGMA_GATE);
            }
        }
    }
    Ok(VerificationReport::new("covariance", metric, 1.0, details))
}

/// Test functions for the chain-rule (Itô) residual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    Square,
    Cube,
    Cos,
}

impl TestFunction {
    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Square => "square",
            TestFunction::Cube => "cube",
            TestFunction::Cos => "cos",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "square" => Some(TestFunction::Square),
            "cube" => Some(TestFunction::Cube),
            "cos" => Some(TestFunction::Cos),
            _ => None,
        }
    }

    fn f(&self, x: f64) -> f64 {
        match self {
            TestFunction::Square => x * x,
            TestFunction::Cube => x * x * x,
            TestFunction::Cos => x.cos(),
        }
    }

    fn df(&self, x: f64) -> f64 {
        match self {
            TestFunction::Square => 2.0 * x,
            TestFunction::Cube => 3.0 * x * x,
            TestFunction::Cos => -x.sin(),
        }
    }

    fn d2f(&self, x: f64) -> f64 {
        match self {
            TestFunction::Square => 2.0,
            TestFunction::Cube => 6.0 * x,
            TestFunction::Cos => -x.cos(),
        }
    }
}

/// Pointwise values of ½·d/ds R(s,s) − ∂₁R(s,s) on the grid nodes: the net
/// weight of the two second-order terms of the chain rule for u ≡ 1.
///
/// Both terms equal H V_H s^{2H−1} up to the factor 2 for the constant-Hurst
/// families, so the net weight vanishes identically there; for the
/// multifractional family it is measured numerically (energy derivative and
/// a symmetric difference of the covariance).
fn ito_correction_weights(model: &KernelModel, grid: UniformGrid) -> Result<Vec<f64>> {
    let n = grid.intervals();
    match model.family() {
        KernelFamily::StationaryFbm | KernelFamily::LevyFbm => {
            let h = model.hurst();
            let coef = match model.family() {
                KernelFamily::StationaryFbm => h * v_h(h)?,
                _ => 0.5 / (crate::specfun::gamma_fn(h + 0.5)?.powi(2)),
            };
            Ok((0..=n)
                .map(|i| {
                    let s = grid.node(i);
                    let base = coef * s.powf(2.0 * h - 1.0);
                    // ½·(2·base) − base: identically zero, kept in the shape
                    // the formula dictates.
                    0.5 * (2.0 * base) - base
                })
                .collect())
        }
        KernelFamily::Multifractional => {
            let one = SampledFunction::constant(grid, 1.0)?;
            let h = grid.step();
            let eps = (h * 0.25).min(1e-3);
            let mut out = vec![0.0; n + 1];
            for (i, slot) in out.iter_mut().enumerate().skip(1) {
                let s = grid.node(i);
                let s = s.min(grid.horizon() - eps);
                let ddiag =
                    crate::integrals::energy_derivative(&one, model, s, eps)?;
                let d1 = (covariance_with_panels(model, s + eps, s, 512)?
                    - covariance_with_panels(model, s - eps, s, 512)?)
                    / (2.0 * eps);
                *slot = 0.5 * ddiag - d1;
            }
            Ok(out)
        }
    }
}

/// Chain-rule residual of the symmetric integral for Z = X, u ≡ 1:
/// f(X_T) − f(0) − ∫₀^T f′(X) ∘ dX − ∫₀^T f″(X_s)(½·d/ds R(s,s) − ∂₁R(s,s)) ds
/// should be centered over paths. Metric: |mean| / stderr.
///
/// Only valid for kernels with α > 1/2; lower regularity is refused (the
/// diagonal derivative ∂₁R(s,s) diverges there).
pub fn check_ito_residual(
    model: &KernelModel,
    f: TestFunction,
    t_upper: f64,
    n: usize,
    mc_paths: u64,
    seed: RngSeed,
) -> Result<VerificationReport> {
    // Gate on the Hölder scale of the process (H for the constant families,
    // inf H(t) for the multifractional one, where the A1 regularity α is
    // always below 1/2 even though the process itself is smoother than
    // Brownian motion): below 1/2 the diagonal derivative of the covariance
    // diverges and the formula's last term is meaningless.
    if model.hurst() < 0.5 {
        return Err(VolterraError::UnsupportedRegime(format!(
            "chain-rule check requires Hurst regularity >= 1/2, model has {}",
            model.hurst()
        )));
    }
    if n % 4 != 0 || n < 64 {
        return Err(VolterraError::Domain(format!(
            "n must be a multiple of 4 and at least 64, got {n}"
        )));
    }
    let levels = [n / 4, n / 2, n];
    let grid = UniformGrid::new(n, t_upper)?;
    let corrections = ito_correction_weights(model, grid)?;
    let h = grid.step();

    let residuals = map_streams(seed.master, mc_paths, 1, |s| -> Result<f64> {
        let stream_seed = RngSeed::new(s.master, s.stream + seed.stream);
        let u = Integrand::composite(move |x| f.df(x), move |x| f.d2f(x))?;
        let est = stratonovich_estimate(&u, model, stream_seed, t_upper, &levels)?;
        let b = sample_brownian(grid, stream_seed);
        let x = crate::paths::synthesize_volterra(model, &b)?;
        // Trapezoid of f''(X_s) against the correction weights.
        let mut corr = 0.0;
        for i in 0..n {
            corr += 0.5
                * (f.d2f(x.value(i)) * corrections[i]
                    + f.d2f(x.value(i + 1)) * corrections[i + 1])
                * h;
        }
        Ok(f.f(x.value(n)) - f.f(0.0) - est.extrapolated - corr)
    });
    let residuals: Vec<f64> = residuals.into_iter().collect::<Result<_>>()?;
    let m = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / m;
    let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (m - 1.0);
    let stderr = (var / m).sqrt();
    let metric = mean.abs() / stderr;

    let mut details = BTreeMap::new();
    detail_seed(&mut details, seed);
    details.insert("function".into(), f.name().into());
    details.insert("n".into(), n.to_string());
    details.insert("levels".into(), format!("{levels:?}"));
    details.insert("mc_paths".into(), mc_paths.to_string());
    details.insert("mean_residual".into(), format!("{mean:.6e}"));
    details.insert("stderr".into(), format!("{stderr:.6e}"));
    Ok(VerificationReport::new(
        "ito-residual",
        metric,
        ITO_TSTAT_GATE,
        details,
    ))
}

/// Girsanov shift at deterministic u, v: shifting the driver by the
/// cumulative integral of v translates the discrete Wiener functional
/// Σ (𝒦*u)(s_i) ΔB_i by exactly Σ (𝒦*u)(s_i) v(s_i) h, an algebraic
/// identity at the grid level, checked pathwise.
pub fn check_girsanov_shift(
    model: &KernelModel,
    u: &SampledFunction,
    v: &SampledFunction,
    seed: RngSeed,
) -> Result<VerificationReport> {
    if u.grid() != v.grid() {
        return Err(VolterraError::Domain("u and v must share a grid".into()));
    }
    let grid = u.grid();
    let n = grid.intervals();
    let h = grid.step();
    let w = apply_k_adjoint(model, u, grid.horizon())?;
    let b = sample_brownian(grid, seed);

    // Shifted driver: B̃ = B + Σ_{k<i} v(t_k) h (left rule, matching the
    // correction sum node for node).
    let mut shifted = vec![0.0; n + 1];
    let mut acc = 0.0;
    for i in 0..n {
        shifted[i] = b.value(i) + acc;
        acc += v.value(i) * h;
    }
    shifted[n] = b.value(n) + acc;

    let mut div = 0.0;
    let mut div_shifted = 0.0;
    let mut correction = 0.0;
    for i in 0..n {
        let wi = w.value(i);
        div += wi * (b.value(i + 1) - b.value(i));
        div_shifted += wi * (shifted[i + 1] - shifted[i]);
        correction += wi * v.value(i) * h;
    }
    let metric = (div_shifted - (div + correction)).abs();

    let mut details = BTreeMap::new();
    detail_seed(&mut details, seed);
    details.insert("n".into(), n.to_string());
    details.insert("divergence".into(), format!("{div:.12e}"));
    details.insert("divergence_shifted".into(), format!("{div_shifted:.12e}"));
    details.insert("shift_correction".into(), format!("{correction:.12e}"));
    Ok(VerificationReport::new(
        "girsanov-shift",
        metric,
        EXACT_IDENTITY_TOL,
        details,
    ))
}

/// Restriction identity: the discrete estimate of
/// ∫₀^T (u − u(S)) 1_{[0,S]} ∘ dX coincides term by term with
/// R^π_S(u − u(S)) on the same path; the ∫₀^S estimate is that sum plus
/// u(S)·X^π(S).
pub fn check_restriction(
    model: &KernelModel,
    u: &SampledFunction,
    s_time: f64,
    t_time: f64,
    seed: RngSeed,
) -> Result<VerificationReport> {
    let grid = u.grid();
    let ms = grid
        .index_of(s_time)
        .ok_or_else(|| VolterraError::Domain(format!("S = {s_time} is not a grid node")))?;
    let mt = grid
        .index_of(t_time)
        .ok_or_else(|| VolterraError::Domain(format!("T = {t_time} is not a grid node")))?;
    if ms > mt {
        return Err(VolterraError::Domain(format!(
            "need S <= T, got S = {s_time}, T = {t_time}"
        )));
    }
    let bundle = simulate_bundle(model, grid, seed)?;
    let u_s = u.value(ms);

    // Left leg: w = (u − u(S))·1_{[0,S]} integrated over [0, T].
    let w_vals: Vec<f64> = (0..=grid.intervals())
        .map(|k| if k <= ms { u.value(k) - u_s } else { 0.0 })
        .collect();
    let w = Integrand::deterministic(SampledFunction::new(grid, w_vals)?);
    let left = r_pi_sum(&w, &bundle, t_time)?;

    // Right leg: R^π_S(u − u(S)).
    let shifted: Vec<f64> = u.values().iter().map(|x| x - u_s).collect();
    let us_int = Integrand::deterministic(SampledFunction::new(grid, shifted)?);
    let right = r_pi_sum(&us_int, &bundle, s_time)?;

    let metric = (left - right).abs();
    let mut details = BTreeMap::new();
    detail_seed(&mut details, seed);
    details.insert("S".into(), s_time.to_string());
    details.insert("T".into(), t_time.to_string());
    details.insert("n".into(), grid.intervals().to_string());
    details.insert("left_leg".into(), format!("{left:.12e}"));
    details.insert("right_leg".into(), format!("{right:.12e}"));
    details.insert(
        "restricted_integral_estimate".into(),
        format!("{:.12e}", right + u_s * bundle.volterra.value(ms)),
    );
    Ok(VerificationReport::new(
        "restriction",
        metric,
        EXACT_IDENTITY_TOL,
        details,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_check_brownian_quick() {
        let model = KernelModel::stationary(0.5).unwrap();
        let report =
            check_covariance(&model, &[0.25, 0.5, 1.0], 0, RngSeed::new(1, 0)).unwrap();
        assert!(report.passed, "{report:?}");
        // Quadrature vs min(s,t) is far below the gate.
        let err: f64 = report.details["quad_vs_closed_max_abs"].parse().unwrap();
        assert!(err < 1e-6);
    }

    #[test]
    fn covariance_check_with_mc_leg() {
        let model = KernelModel::stationary(0.7).unwrap();
        let nodes: Vec<f64> = (1..=8).map(|k| k as f64 / 8.0).collect();
        let report = check_covariance(&model, &nodes, 5_000, RngSeed::new(99, 0)).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.details.contains_key("mc_max_std_dev"));
    }

    #[test]
    fn covariance_check_rejects_degenerate_input() {
        let model = KernelModel::stationary(0.7).unwrap();
        assert!(check_covariance(&model, &[0.5], 100, RngSeed::new(1, 0)).is_err());
    }

    #[test]
    fn ito_check_refuses_low_regularity() {
        let model = KernelModel::stationary(0.3).unwrap();
        let e = check_ito_residual(
            &model,
            TestFunction::Square,
            1.0,
            256,
            100,
            RngSeed::new(4, 0),
        );
        assert!(matches!(e, Err(VolterraError::UnsupportedRegime(_))));
    }

    #[test]
    fn ito_check_multifractional_smoke() {
        // The multifractional family takes the numerical correction route
        // (energy derivative plus a symmetric covariance difference); small
        // sizes keep the quadratures affordable.
        let grid = UniformGrid::new(64, 1.0).unwrap();
        let hfn = SampledFunction::from_fn(grid, |t| 0.65 + 0.1 * t).unwrap();
        let model = KernelModel::multifractional(hfn, 0.1).unwrap();
        let report = check_ito_residual(
            &model,
            TestFunction::Square,
            1.0,
            64,
            120,
            RngSeed::new(12, 0),
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn ito_check_brownian_square() {
        // Classical case: f(B_T²) chain rule; modest path count keeps the
        // unit test quick, the acceptance suite runs the full gate.
        let model = KernelModel::stationary(0.5).unwrap();
        let report = check_ito_residual(
            &model,
            TestFunction::Square,
            1.0,
            256,
            400,
            RngSeed::new(7, 0),
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn ito_check_fbm_square() {
        let model = KernelModel::stationary(0.7).unwrap();
        let report = check_ito_residual(
            &model,
            TestFunction::Square,
            1.0,
            256,
            400,
            RngSeed::new(8, 0),
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn girsanov_zero_shift_is_exact_zero() {
        let model = KernelModel::stationary(0.7).unwrap();
        let grid = UniformGrid::new(128, 1.0).unwrap();
        let u = SampledFunction::from_fn(grid, |t| 1.0 + t).unwrap();
        let v = SampledFunction::constant(grid, 0.0).unwrap();
        let report = check_girsanov_shift(&model, &u, &v, RngSeed::new(3, 0)).unwrap();
        assert_eq!(report.metric, 0.0);
        assert!(report.passed);
    }

    #[test]
    fn girsanov_unit_shift_brownian() {
        // u ≡ 1, v ≡ 1, H = 1/2: the correction is Σ K(T, s_i)·h → 1.
        let model = KernelModel::stationary(0.5).unwrap();
        let grid = UniformGrid::new(512, 1.0).unwrap();
        let u = SampledFunction::constant(grid, 1.0).unwrap();
        let v = SampledFunction::constant(grid, 1.0).unwrap();
        let report = check_girsanov_shift(&model, &u, &v, RngSeed::new(5, 0)).unwrap();
        assert!(report.passed, "{report:?}");
        let corr: f64 = report.details["shift_correction"].parse().unwrap();
        assert!((corr - 1.0).abs() < 1e-2, "correction {corr}");
    }

    #[test]
    fn girsanov_polynomial_pairs() {
        let model = KernelModel::stationary(0.7).unwrap();
        let grid = UniformGrid::new(256, 1.0).unwrap();
        for k in 0..5u32 {
            let a = 0.3 + 0.2 * k as f64;
            let u = SampledFunction::from_fn(grid, |t| 1.0 + a * t * t).unwrap();
            let v = SampledFunction::from_fn(grid, |t| a - t).unwrap();
            let report =
                check_girsanov_shift(&model, &u, &v, RngSeed::new(10 + k as u64, 0)).unwrap();
            assert!(report.passed, "pair {k}: {report:?}");
        }
    }

    #[test]
    fn restriction_identity_exact() {
        for model in [
            KernelModel::stationary(0.7).unwrap(),
            KernelModel::stationary(0.3).unwrap(),
            KernelModel::levy(0.75).unwrap(),
        ] {
            let grid = UniformGrid::new(128, 1.0).unwrap();
            let u = SampledFunction::from_fn(grid, |t| 2.0 - 3.0 * t).unwrap();
            let report =
                check_restriction(&model, &u, 0.5, 1.0, RngSeed::new(17, 0)).unwrap();
            assert!(
                report.passed,
                "{}: {report:?}",
                model.family().name()
            );
        }
    }

    #[test]
    fn restriction_constant_and_equal_endpoints() {
        let model = KernelModel::stationary(0.7).unwrap();
        let grid = UniformGrid::new(64, 1.0).unwrap();
        let c = SampledFunction::constant(grid, 2.0).unwrap();
        let report = check_restriction(&model, &c, 0.5, 1.0, RngSeed::new(23, 0)).unwrap();
        assert!(report.passed && report.metric < 1e-12, "{report:?}");
        let u = SampledFunction::from_fn(grid, |t| t + 0.1).unwrap();
        let report = check_restriction(&model, &u, 1.0, 1.0, RngSeed::new(23, 1)).unwrap();
        assert_eq!(report.metric, 0.0);
    }
}
