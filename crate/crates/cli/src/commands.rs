//! Subcommand implementations. Every command writes a `manifest.json`
//! recording the effective configuration and seeds, so outputs are
//! self-describing, and nothing time-dependent is emitted: identical
//! invocations produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use volterra_core::fracops::{estimate_holder_exponent, frac_integral, Side};
use volterra_core::grid::{SampledFunction, UniformGrid};
use volterra_core::integrals::{
    r_pi_endpoint_corrected, r_pi_sum, stratonovich_estimate, Integrand,
};
use volterra_core::kernels::{
    covariance_fbm_closed, covariance_levy_closed, covariance_with_panels, kernel_eval,
    KernelFamily, KernelModel,
};
use volterra_core::paths::{
    covariance_matrix, map_streams, sample_gaussian_with_cov, simulate_bundle, RngSeed,
};
use volterra_core::specfun::{gamma_fn, hyp2f1, v_h, HypergeometricArgs};
use volterra_core::verify::{
    check_covariance, check_girsanov_shift, check_ito_residual, check_restriction,
    TestFunction, VerificationReport,
};

use crate::config::{ConfigError, ConfigResult, RunConfig};

fn lift(e: volterra_core::VolterraError) -> ConfigError {
    ConfigError(e.to_string())
}

fn io_err(e: std::io::Error, what: &str) -> ConfigError {
    ConfigError(format!("{what}: {e}"))
}

fn write_text(path: &Path, text: &str) -> ConfigResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(e, "creating output directory"))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(e, "writing output"))
}

fn write_json(path: &Path, value: &Value) -> ConfigResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| ConfigError(format!("serializing JSON: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

fn manifest(cfg: &RunConfig, command: &str, files: &[String]) -> Value {
    json!({
        "command": command,
        "config": cfg.describe(),
        "seed": { "master": cfg.seed },
        "files": files,
    })
}

fn report_json(r: &VerificationReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

/// `simulate`: draw Brownian/Volterra path bundles and write them as CSV.
pub fn simulate(cfg: &RunConfig) -> ConfigResult<i32> {
    let model = cfg.model()?;
    let grid = UniformGrid::new(cfg.n, cfg.horizon).map_err(lift)?;
    let bundles = map_streams(cfg.seed, cfg.paths, cfg.workers, |seed| {
        simulate_bundle(&model, grid, seed)
    });
    let mut files = Vec::new();
    if cfg.format == "long" {
        let mut csv = String::from("path_id,t,B,X\n");
        for (id, b) in bundles.iter().enumerate() {
            let b = b.as_ref().map_err(|e| ConfigError(e.to_string()))?;
            for i in 0..grid.node_count() {
                let _ = writeln!(
                    csv,
                    "{id},{:.17e},{:.17e},{:.17e}",
                    grid.node(i),
                    b.brownian.value(i),
                    b.volterra.value(i)
                );
            }
        }
        let name = "paths.csv".to_string();
        write_text(&cfg.out.join(&name), &csv)?;
        files.push(name);
    } else {
        for (id, b) in bundles.iter().enumerate() {
            let b = b.as_ref().map_err(|e| ConfigError(e.to_string()))?;
            let mut csv = String::from("t,B,X\n");
            for i in 0..grid.node_count() {
                let _ = writeln!(
                    csv,
                    "{:.17e},{:.17e},{:.17e}",
                    grid.node(i),
                    b.brownian.value(i),
                    b.volterra.value(i)
                );
            }
            let name = format!("path_{id:04}.csv");
            write_text(&cfg.out.join(&name), &csv)?;
            files.push(name);
        }
    }
    write_json(&cfg.out.join("manifest.json"), &manifest(cfg, "simulate", &files))?;
    Ok(0)
}

/// `covariance`: tabulate quadrature vs closed form vs Monte Carlo on a
/// node grid, emit the CSV table plus a verification report.
pub fn covariance(cfg: &RunConfig) -> ConfigResult<i32> {
    let model = cfg.model()?;
    let k = cfg.grid_points;
    let nodes: Vec<f64> = (1..=k).map(|i| cfg.horizon * i as f64 / k as f64).collect();

    // Monte Carlo second moments on the node set; the covariance matrix is
    // factorized once and shared across streams.
    let mut mc: Option<(Vec<f64>, Vec<f64>)> = None;
    if cfg.mc_paths > 0 {
        let grid = UniformGrid::new(k.max(4), cfg.horizon).map_err(lift)?;
        let cov = covariance_matrix(&model, grid).map_err(lift)?;
        let rows = map_streams(cfg.seed, cfg.mc_paths, cfg.workers, |seed| {
            let x = sample_gaussian_with_cov(&cov, grid, seed)?;
            Ok::<Vec<f64>, volterra_core::VolterraError>(
                (1..=k).map(|i| x.value(i * grid.intervals() / k)).collect(),
            )
        });
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .collect::<Result<_, _>>()
            .map_err(|e| ConfigError(e.to_string()))?;
        let m = cfg.mc_paths as f64;
        let mut means = vec![0.0; k * k];
        let mut sqs = vec![0.0; k * k];
        for r in &rows {
            for i in 0..k {
                for j in 0..k {
                    let p = r[i] * r[j];
                    means[i * k + j] += p;
                    sqs[i * k + j] += p * p;
                }
            }
        }
        for v in means.iter_mut() {
            *v /= m;
        }
        let stderrs: Vec<f64> = (0..k * k)
            .map(|e| ((sqs[e] / m - means[e] * means[e]).max(0.0) / m).sqrt())
            .collect();
        mc = Some((means, stderrs));
    }

    let mut csv = String::from("t,s,quadrature,closed_form,mc,mc_stderr\n");
    for (i, &t) in nodes.iter().enumerate() {
        for (j, &s) in nodes.iter().enumerate() {
            let quad = covariance_with_panels(&model, t, s, cfg.quad_panels).map_err(lift)?;
            let closed = match model.family() {
                KernelFamily::StationaryFbm => {
                    format!("{:.17e}", covariance_fbm_closed(model.hurst(), t, s).map_err(lift)?)
                }
                KernelFamily::LevyFbm => {
                    format!("{:.17e}", covariance_levy_closed(model.hurst(), t, s).map_err(lift)?)
                }
                KernelFamily::Multifractional => String::new(),
            };
            let (mc_v, mc_se) = match &mc {
                Some((means, ses)) => (
                    format!("{:.17e}", means[i * k + j]),
                    format!("{:.17e}", ses[i * k + j]),
                ),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(csv, "{t:.17e},{s:.17e},{quad:.17e},{closed},{mc_v},{mc_se}");
        }
    }
    write_text(&cfg.out.join("covariance.csv"), &csv)?;

    let report = check_covariance(&model, &nodes, cfg.mc_paths, RngSeed::new(cfg.seed, 0))
        .map_err(lift)?;
    println!("{}", report.summary_line());
    write_json(&cfg.out.join("covariance_report.json"), &report_json(&report))?;
    write_json(
        &cfg.out.join("manifest.json"),
        &manifest(
            cfg,
            "covariance",
            &["covariance.csv".into(), "covariance_report.json".into()],
        ),
    )?;
    Ok(if report.passed { 0 } else { 1 })
}

fn build_integrand(cfg: &RunConfig, grid: UniformGrid) -> ConfigResult<Integrand> {
    match cfg.integrand.as_str() {
        "one" => Ok(Integrand::deterministic(
            SampledFunction::constant(grid, 1.0).map_err(lift)?,
        )),
        "linear" => Ok(Integrand::deterministic(
            SampledFunction::from_fn(grid, |t| t).map_err(lift)?,
        )),
        "id" => Integrand::composite(|x| x, |_| 1.0).map_err(lift),
        "square" => Integrand::composite(|x| x * x, |x| 2.0 * x).map_err(lift),
        "cos" => Integrand::composite(|x| x.cos(), |x| -x.sin()).map_err(lift),
        other => Err(ConfigError(format!(
            "g must be one, linear, id, square or cos, got `{other}`"
        ))),
    }
}

/// `integrate`: coupled-level Stratonovich estimate, written as JSON.
pub fn integrate(cfg: &RunConfig) -> ConfigResult<i32> {
    let model = cfg.model()?;
    let levels = cfg
        .levels
        .clone()
        .unwrap_or_else(|| vec![cfg.n / 8, cfg.n / 4, cfg.n / 2, cfg.n]);
    if levels.len() < 3 || levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(ConfigError(format!(
            "levels must be at least 3 dyadically doubling entries, got {levels:?}"
        )));
    }
    let n_max = *levels.last().unwrap();
    let t_upper = cfg.upto.unwrap_or(cfg.horizon);
    let grid = UniformGrid::new(n_max, cfg.horizon).map_err(lift)?;
    let u = build_integrand(cfg, grid)?;
    let est = stratonovich_estimate(&u, &model, RngSeed::new(cfg.seed, 0), t_upper, &levels)
        .map_err(lift)?;
    let value = serde_json::to_value(&est).expect("estimate serializes");
    println!(
        "stratonovich estimate: {:.8} (order {})",
        est.extrapolated,
        est.order.map_or("n/a".into(), |o| format!("{o:.2}")),
    );
    write_json(&cfg.out.join("estimate.json"), &value)?;
    write_json(
        &cfg.out.join("manifest.json"),
        &manifest(cfg, "integrate", &["estimate.json".into()]),
    )?;
    Ok(0)
}

/// `ito-check`: chain-rule residual of the symmetric integral.
pub fn ito_check(cfg: &RunConfig) -> ConfigResult<i32> {
    let model = cfg.model()?;
    let f = TestFunction::from_name(&cfg.test_function).ok_or_else(|| {
        ConfigError(format!(
            "f must be square, cube or cos, got `{}`",
            cfg.test_function
        ))
    })?;
    let report = check_ito_residual(
        &model,
        f,
        cfg.upto.unwrap_or(cfg.horizon),
        cfg.n,
        cfg.mc_paths,
        RngSeed::new(cfg.seed, 0),
    )
    .map_err(lift)?;
    println!("{}", report.summary_line());
    write_json(&cfg.out.join("ito_report.json"), &report_json(&report))?;
    write_json(
        &cfg.out.join("manifest.json"),
        &manifest(cfg, "ito-check", &["ito_report.json".into()]),
    )?;
    Ok(if report.passed { 0 } else { 1 })
}

/// `girsanov-check`: the shift identity over seeded random polynomial pairs.
pub fn girsanov_check(cfg: &RunConfig) -> ConfigResult<i32> {
    let model = cfg.model()?;
    let grid = UniformGrid::new(cfg.n, cfg.horizon).map_err(lift)?;
    let pairs = cfg.paths.max(1);
    let mut state = cfg.seed ^ 0xa5a5_5a5a_1234_9876;
    let mut unit = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut reports = Vec::new();
    let mut all_pass = true;
    for k in 0..pairs {
        let (a0, a1, a2, a3) = (unit() - 0.5, unit(), unit() - 0.5, unit());
        let (b0, b1, b2) = (unit(), unit() - 0.5, unit());
        let u = SampledFunction::from_fn(grid, |t| a0 + a1 * t + a2 * t * t + a3 * t * t * t)
            .map_err(lift)?;
        let v = SampledFunction::from_fn(grid, |t| b0 + b1 * t + b2 * t * t).map_err(lift)?;
        let rep =
            check_girsanov_shift(&model, &u, &v, RngSeed::new(cfg.seed, k)).map_err(lift)?;
        all_pass &= rep.passed;
        println!("pair {k:02}: {}", rep.summary_line());
        reports.push(report_json(&rep));
    }
    write_json(&cfg.out.join("girsanov_report.json"), &Value::Array(reports))?;
    write_json(
        &cfg.out.join("manifest.json"),
        &manifest(cfg, "girsanov-check", &["girsanov_report.json".into()]),
    )?;
    Ok(if all_pass { 0 } else { 1 })
}

/// `holder`: Hölder-exponent regression over exact-sampler paths.
pub fn holder(cfg: &RunConfig) -> ConfigResult<i32> {
    let model = cfg.model()?;
    let grid = UniformGrid::new(cfg.n, cfg.horizon).map_err(lift)?;
    let count = cfg.mc_paths.max(100);
    let cov = covariance_matrix(&model, grid).map_err(lift)?;
    let paths = map_streams(cfg.seed, count, cfg.workers, |seed| {
        sample_gaussian_with_cov(&cov, grid, seed)
    });
    let paths: Vec<SampledFunction> = paths
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| ConfigError(e.to_string()))?;
    let estimate = estimate_holder_exponent(&paths, &cfg.lags).map_err(lift)?;
    println!("holder exponent estimate: {estimate:.4}");
    let value = json!({
        "estimate": estimate,
        "lags": cfg.lags,
        "paths": count,
        "n": cfg.n,
        "family": cfg.family,
        "hurst": cfg.hurst,
    });
    write_json(&cfg.out.join("holder.json"), &value)?;
    write_json(
        &cfg.out.join("manifest.json"),
        &manifest(cfg, "holder", &["holder.json".into()]),
    )?;
    Ok(0)
}

struct SelfTest {
    lines: Vec<(String, bool, String)>,
}

impl SelfTest {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        println!(
            "{:<36} {}  {detail}",
            name,
            if pass { "PASS" } else { "FAIL" }
        );
        self.lines.push((name.to_string(), pass, detail));
    }

    fn check(&mut self, name: &str, metric: f64, tol: f64) {
        self.record(
            name,
            metric <= tol,
            format!("metric {metric:.3e} (tol {tol:.1e})"),
        );
    }

    fn report(&mut self, rep: &VerificationReport) {
        self.record(
            &rep.check_name.clone(),
            rep.passed,
            format!("metric {:.3e} (tol {:.1e})", rep.metric, rep.threshold),
        );
    }
}

/// `selftest`: the deterministic identity battery (plus small Monte Carlo
/// checks unless `quick` is set). Exit 0 iff everything passes.
pub fn selftest(cfg: &RunConfig) -> ConfigResult<i32> {
    let mut t = SelfTest { lines: Vec::new() };
    let seed = RngSeed::new(cfg.seed, 0);

    // Special functions.
    let g_rec = {
        let mut worst = 0.0f64;
        for k in 1..40 {
            let x = 0.1 + k as f64 * 0.5;
            let lhs = gamma_fn(x + 1.0).map_err(lift)?;
            let rhs = x * gamma_fn(x).map_err(lift)?;
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
        worst
    };
    t.check("gamma recurrence", g_rec, 1e-12);
    let f_log = hyp2f1(HypergeometricArgs::new(1.0, 1.0, 2.0, 0.5).map_err(lift)?)
        .map_err(lift)?;
    t.check(
        "2F1 log identity",
        (f_log - 2.0 * std::f64::consts::LN_2).abs(),
        1e-10,
    );
    let vcont = (v_h(0.5 + 1e-6).map_err(lift)? - 1.0)
        .abs()
        .max((v_h(0.5 - 1e-6).map_err(lift)? - 1.0).abs());
    t.check("V_H continuity at 1/2", vcont, 1e-4);

    // Fractional calculus.
    let grid = UniformGrid::new(1024, 1.0).map_err(lift)?;
    let lin = SampledFunction::from_fn(grid, |x| x).map_err(lift)?;
    let half = frac_integral(&lin, 0.5, Side::Left).map_err(lift)?;
    let c = gamma_fn(2.0).map_err(lift)? / gamma_fn(2.5).map_err(lift)?;
    let monomial = (0..=1024).fold(0.0f64, |m, i| {
        let x = grid.node(i);
        m.max((half.value(i) - c * x.powf(1.5)).abs())
    });
    t.check("monomial rule I^{1/2} x", monomial, 1e-5);
    let f2 = SampledFunction::from_fn(grid, |x| x * x).map_err(lift)?;
    let two = frac_integral(&frac_integral(&f2, 0.4, Side::Left).map_err(lift)?, 0.3, Side::Left)
        .map_err(lift)?;
    let one = frac_integral(&f2, 0.7, Side::Left).map_err(lift)?;
    let semi = one
        .values()
        .iter()
        .zip(two.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / one.values().iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    t.check("semigroup I^{0.3}I^{0.4}=I^{0.7}", semi, 1e-3);

    // Kernel degeneracies.
    let bm = KernelModel::stationary(0.5).map_err(lift)?;
    t.check(
        "Brownian kernel K = 1",
        (kernel_eval(&bm, 0.8, 0.3).map_err(lift)? - 1.0).abs(),
        1e-12,
    );
    t.check(
        "Brownian covariance = min",
        (covariance_with_panels(&bm, 0.9, 0.4, 128).map_err(lift)? - 0.4).abs(),
        1e-8,
    );
    let st = KernelModel::stationary(0.7).map_err(lift)?;
    let quad = covariance_with_panels(&st, 1.0, 0.5, 512).map_err(lift)?;
    let closed = covariance_fbm_closed(0.7, 1.0, 0.5).map_err(lift)?;
    t.check(
        "fBm covariance vs closed form",
        (quad - closed).abs(),
        1e-3 * v_h(0.7).map_err(lift)?,
    );

    // Discrete integral identities.
    let igrid = UniformGrid::new(256, 1.0).map_err(lift)?;
    let bundle = simulate_bundle(&st, igrid, seed).map_err(lift)?;
    let one_i = Integrand::deterministic(SampledFunction::constant(igrid, 1.0).map_err(lift)?);
    t.check(
        "R^pi telescoping u = 1",
        (r_pi_sum(&one_i, &bundle, 1.0).map_err(lift)? - bundle.volterra.value(256)).abs(),
        1e-12,
    );
    let low = KernelModel::stationary(0.3).map_err(lift)?;
    let bundle_low = simulate_bundle(&low, igrid, seed).map_err(lift)?;
    let det = Integrand::deterministic(
        SampledFunction::from_fn(igrid, |x| 1.0 + x - x * x).map_err(lift)?,
    );
    t.check(
        "endpoint-correction identity",
        (r_pi_sum(&det, &bundle_low, 1.0).map_err(lift)?
            - r_pi_endpoint_corrected(&det, &bundle_low, 1.0).map_err(lift)?)
        .abs(),
        1e-10,
    );
    let u = SampledFunction::from_fn(igrid, |x| 2.0 - 3.0 * x).map_err(lift)?;
    t.report(&check_restriction(&st, &u, 0.5, 1.0, seed).map_err(lift)?);
    let v = SampledFunction::from_fn(igrid, |x| 0.3 + x).map_err(lift)?;
    t.report(&check_girsanov_shift(&st, &u, &v, seed).map_err(lift)?);

    if !cfg.quick {
        // Small Monte Carlo legs.
        let nodes: Vec<f64> = (1..=4).map(|k| k as f64 / 4.0).collect();
        t.report(&check_covariance(&st, &nodes, 4000, seed).map_err(lift)?);
        t.report(
            &check_ito_residual(&st, TestFunction::Square, 1.0, 256, 500, seed).map_err(lift)?,
        );
    }

    let all_pass = t.lines.iter().all(|l| l.1);
    let entries: Vec<Value> = t
        .lines
        .iter()
        .map(|(name, pass, detail)| json!({ "check": name, "passed": pass, "detail": detail }))
        .collect();
    let value = json!({
        "quick": cfg.quick,
        "passed": all_pass,
        "checks": entries,
        "seed": { "master": cfg.seed },
    });
    write_json(&cfg.out.join("selftest.json"), &value)?;
    write_json(
        &cfg.out.join("manifest.json"),
        &manifest(cfg, "selftest", &["selftest.json".into()]),
    )?;
    Ok(if all_pass { 0 } else { 1 })
}

/// Convenience used by the manifest: sorted copies of detail maps.
#[allow(dead_code)]
fn sorted(details: &BTreeMap<String, String>) -> Value {
    json!(details)
}
