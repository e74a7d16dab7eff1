//! Discrete stochastic-integral schemes for Volterra paths and their
//! correction terms.
//!
//! For a partition π of [0, T] with step δ, driver increments ΔB_i and a
//! path X = X^π, the schemes are
//!
//! * `riemann_sum`   — RS_π(u) = Σ u(t_i) ΔX_i,
//! * `ss_sum`        — SS_π(u) = Σ (1/δ)(∫ cell u) ΔX_i,
//! * `r_pi_sum`      — R^π_T(u) = Σ (1/δ)(∫ cell (𝒦*_T u)(s) ds) ΔB_i,
//!   the symmetric scheme whose limit in probability defines the
//!   Stratonovich integral ∫ u ∘ dX.
//!
//! With the left-open midpoint step discretization of 𝒦*_T, the R^π sum is
//! computable pathwise for deterministic integrands (a plain Wiener sum) and
//! for cylindrical integrands u_s = g(X_s), where it decomposes as a discrete
//! Skorohod divergence plus the Malliavin trace
//!
//! ```text
//! Σ_i (1/δ) ∬_{cell_i²} 𝒦*_T(∇_r u)(t) dt dr,   ∇_r u(t) = g′(X_t) K(t,r),
//! ```
//!
//! which factorizes over the band tables into per-cell weights
//! w_j = Σ_i (1/δ)·P(i, τ_j)·[P(i, t_{j+1}) − P(i, t_j)] so that
//! trace = Σ_j g′(X(τ_j)) w_j. The divergence part is the plug-in sum minus
//! this trace; their sum — the full R^π — is the plug-in sum itself.
//!
//! For kernels with regularity α < 1/2 the integrand must vanish at T, so the
//! estimate switches to R^π_T(u − u(T)) + u(T)·X^π(T); for deterministic u
//! the two forms coincide exactly at the discrete level.

use crate::error::{Result, VolterraError};
use crate::grid::{SampledFunction, UniformGrid};
use crate::kernels::{band_table, covariance_with_panels, mid_table, KernelModel};
use crate::paths::{sample_brownian, PathBundle, RngSeed};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;

/// A cylindrical integrand u_s = g(X_s) with its derivative g′ (the Malliavin
/// kernel of u is ∇_r u_s = g′(X_s) K(s, r)).
#[derive(Clone)]
pub struct CylindricalIntegrand {
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    g_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for CylindricalIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CylindricalIntegrand")
    }
}

impl CylindricalIntegrand {
    /// Bundle g with its derivative. A centered finite-difference probe on
    /// [-3, 3] guards against mismatched handles.
    pub fn new(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let eps = 1e-5;
        for k in -6..=6 {
            let x = k as f64 * 0.5;
            let fd = (g(x + eps) - g(x - eps)) / (2.0 * eps);
            let gp = g_prime(x);
            if (fd - gp).abs() > 1e-4 * (1.0 + gp.abs()) {
                return Err(VolterraError::Domain(format!(
                    "g_prime inconsistent with g at x = {x}: fd {fd} vs {gp}"
                )));
            }
        }
        Ok(Self {
            g: Arc::new(g),
            g_prime: Arc::new(g_prime),
        })
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        (self.g_prime)(x)
    }
}

/// Integrand of the R^π scheme: a deterministic sampled function, or the
/// cylindrical composite u_s = g(X_s).
#[derive(Debug, Clone)]
pub enum Integrand {
    Deterministic(SampledFunction),
    Composite(CylindricalIntegrand),
}

impl Integrand {
    pub fn deterministic(f: SampledFunction) -> Self {
        Integrand::Deterministic(f)
    }

    pub fn composite(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Ok(Integrand::Composite(CylindricalIntegrand::new(g, g_prime)?))
    }

    /// Left-open step values u(τ_j) on the cells of [0, t_m].
    fn cells(&self, bundle: &PathBundle, m: usize) -> Result<Vec<f64>> {
        match self {
            Integrand::Deterministic(f) => {
                if f.grid() != bundle.grid {
                    return Err(VolterraError::Domain(
                        "integrand and path live on different grids".into(),
                    ));
                }
                Ok((0..m).map(|j| f.midpoint_value(j)).collect())
            }
            Integrand::Composite(c) => Ok((0..m)
                .map(|j| c.g(bundle.volterra.midpoint_value(j)))
                .collect()),
        }
    }

    /// Value of the integrand at T (node index m).
    fn at_node(&self, bundle: &PathBundle, m: usize) -> f64 {
        match self {
            Integrand::Deterministic(f) => f.value(m),
            Integrand::Composite(c) => c.g(bundle.volterra.value(m)),
        }
    }
}

/// Riemann sum Σ u(t_i)·(X(t_{i+1}) − X(t_i)).
pub fn riemann_sum(u: &SampledFunction, x: &SampledFunction) -> Result<f64> {
    if u.grid() != x.grid() {
        return Err(VolterraError::Domain("u and x must share a grid".into()));
    }
    let n = u.grid().intervals();
    let mut acc = 0.0;
    for i in 0..n {
        acc += u.value(i) * (x.value(i + 1) - x.value(i));
    }
    Ok(acc)
}

/// Skorohod–Stratonovich style sum Σ (1/δ)(∫ cell u ds)·ΔX_i, interval
/// averages by the trapezoid rule.
pub fn ss_sum(u: &SampledFunction, x: &SampledFunction) -> Result<f64> {
    if u.grid() != x.grid() {
        return Err(VolterraError::Domain("u and x must share a grid".into()));
    }
    let n = u.grid().intervals();
    let mut acc = 0.0;
    for i in 0..n {
        acc += u.midpoint_value(i) * (x.value(i + 1) - x.value(i));
    }
    Ok(acc)
}

/// The plug-in Wiener sum Σ_i (ΔB_i/δ)·Σ_{j≥i} c_j·M[i][j] over cells of
/// [0, t_m], with c the step values of the integrand.
fn plugin_sum(
    table: &crate::kernels::BandTable,
    cells: &[f64],
    brownian: &[f64],
    m: usize,
    step: f64,
) -> f64 {
    let mut total = 0.0;
    for i in 0..m {
        let wi = (brownian[i + 1] - brownian[i]) / step;
        let mut acc = 0.0;
        for (j, &c) in cells.iter().enumerate().take(m).skip(i) {
            acc += c * table.m_entry(i, j);
        }
        total += wi * acc;
    }
    total
}

/// Per-cell Malliavin trace weights w_j = Σ_{i≤j} (1/δ)·P(i,τ_j)·M[i][j].
fn trace_weights(
    table: &crate::kernels::BandTable,
    mids: &crate::kernels::MidTable,
    m: usize,
    step: f64,
) -> Vec<f64> {
    let mut w = vec![0.0; m];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..=j {
            acc += mids.p_mid(i, j) * table.m_entry(i, j);
        }
        *wj = acc / step;
    }
    w
}

fn upper_index(bundle: &PathBundle, t_upper: f64) -> Result<usize> {
    bundle.grid.index_of(t_upper).ok_or_else(|| {
        VolterraError::Domain(format!("T = {t_upper} is not a node of the path grid"))
    })
}

/// The full Skorohod–Stratonovich sum R^π_T(u).
///
/// Deterministic u: an exact Wiener sum. Composite u: the plug-in sum, equal
/// to the discrete divergence plus the trace summand (see [`r_pi_terms`]).
pub fn r_pi_sum(u: &Integrand, bundle: &PathBundle, t_upper: f64) -> Result<f64> {
    let m = upper_index(bundle, t_upper)?;
    let table = band_table(&bundle.model, bundle.grid)?;
    let cells = u.cells(bundle, m)?;
    Ok(plugin_sum(
        &table,
        &cells,
        bundle.brownian.values(),
        m,
        bundle.grid.step(),
    ))
}

/// The two summands of R^π_T(u): (discrete divergence, trace term).
///
/// They sum to [`r_pi_sum`]; for deterministic u the trace vanishes.
pub fn r_pi_terms(u: &Integrand, bundle: &PathBundle, t_upper: f64) -> Result<(f64, f64)> {
    let total = r_pi_sum(u, bundle, t_upper)?;
    match u {
        Integrand::Deterministic(_) => Ok((total, 0.0)),
        Integrand::Composite(_) => {
            let trace = trace_term(u, bundle, t_upper)?;
            Ok((total - trace, trace))
        }
    }
}

/// Malliavin trace summand Σ_i (1/δ) ∬_{cell_i²} 𝒦*_T(∇_r u)(t) dt dr for a
/// cylindrical integrand, via the factorized band-table weights.
pub fn trace_term(u: &Integrand, bundle: &PathBundle, t_upper: f64) -> Result<f64> {
    let c = match u {
        Integrand::Composite(c) => c,
        Integrand::Deterministic(_) => {
            return Err(VolterraError::Domain(
                "trace term requires a composite integrand with g'".into(),
            ))
        }
    };
    let m = upper_index(bundle, t_upper)?;
    let table = band_table(&bundle.model, bundle.grid)?;
    let mids = mid_table(&bundle.model, bundle.grid)?;
    let w = trace_weights(&table, &mids, m, bundle.grid.step());
    let mut acc = 0.0;
    for (j, wj) in w.iter().enumerate() {
        acc += c.g_prime(bundle.volterra.midpoint_value(j)) * wj;
    }
    if !acc.is_finite() {
        return Err(VolterraError::Numerical(
            "trace term produced a non-finite value".into(),
        ));
    }
    Ok(acc)
}

/// One partition level of an [`IntegralEstimate`].
#[derive(Debug, Clone, Serialize)]
pub struct LevelValue {
    pub n: usize,
    pub value: f64,
}

/// A stochastic-integral approximation across refining partitions, with
/// Richardson extrapolation and an empirical convergence order.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralEstimate {
    pub levels: Vec<LevelValue>,
    pub extrapolated: f64,
    pub order: Option<f64>,
    pub stderr: Option<f64>,
    pub warnings: Vec<String>,
}

impl IntegralEstimate {
    /// Assemble from per-level values (levels strictly increasing). The
    /// empirical order is the median of log2 ratios of successive
    /// differences; it is only reported with at least 3 levels.
    pub fn from_levels(levels: Vec<LevelValue>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(VolterraError::Domain(
                "an estimate needs at least two levels".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(VolterraError::Domain(
                "levels must be strictly increasing".into(),
            ));
        }
        let values: Vec<f64> = levels.iter().map(|l| l.value).collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let scale = values.iter().fold(1e-30f64, |m, v| m.max(v.abs()));
        let mut warnings = Vec::new();

        for k in 1..diffs.len() {
            if diffs[k].abs() > diffs[k - 1].abs() * 1.05 && diffs[k].abs() > 1e-12 * scale {
                warnings.push(format!(
                    "successive differences grew between levels {} and {}",
                    levels[k].n, levels[k + 1].n
                ));
            }
        }

        let mut pair_orders = Vec::new();
        for k in 1..diffs.len() {
            if diffs[k - 1].abs() > 1e-13 * scale && diffs[k].abs() > 1e-13 * scale {
                pair_orders.push((diffs[k - 1].abs() / diffs[k].abs()).log2());
            }
        }
        let order = if levels.len() >= 3 && !pair_orders.is_empty() {
            pair_orders.sort_by(f64::total_cmp);
            Some(pair_orders[pair_orders.len() / 2])
        } else {
            None
        };

        let last = *values.last().unwrap();
        let last_diff = *diffs.last().unwrap();
        let extrapolated = match order {
            Some(p) if last_diff.abs() > 1e-13 * scale => {
                let p = p.clamp(0.05, 4.0);
                last + last_diff / (2f64.powf(p) - 1.0)
            }
            _ => last,
        };
        Ok(Self {
            levels,
            extrapolated,
            order,
            stderr: None,
            warnings,
        })
    }
}

fn validate_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 3 {
        return Err(VolterraError::Domain(
            "need at least 3 dyadic levels".into(),
        ));
    }
    for w in levels.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(VolterraError::Domain(format!(
                "levels must double: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Stratonovich estimate of ∫₀^T u ∘ dX over coupled dyadic partition levels.
///
/// The finest Brownian path is generated once from the seed and coarser
/// levels subsample it, so the levels approximate the same trajectory and
/// their Cauchy differences are observable pathwise. For models with
/// α < 1/2 the endpoint-corrected form R^π_T(u − u(T)) + u(T)·X^π(T) is used
/// automatically.
pub fn stratonovich_estimate(
    u: &Integrand,
    model: &KernelModel,
    seed: RngSeed,
    t_upper: f64,
    levels: &[usize],
) -> Result<IntegralEstimate> {
    validate_levels(levels)?;
    let n_max = *levels.last().unwrap();
    let horizon = match u {
        Integrand::Deterministic(f) => {
            let g = f.grid();
            if g.intervals() != n_max {
                return Err(VolterraError::Domain(format!(
                    "deterministic integrand must be sampled on the finest level ({} intervals), got {}",
                    n_max,
                    g.intervals()
                )));
            }
            g.horizon()
        }
        Integrand::Composite(_) => t_upper,
    };
    let grid_fine = UniformGrid::new(n_max, horizon)?;
    if grid_fine.coarsen(n_max / levels[0])?.index_of(t_upper).is_none() {
        return Err(VolterraError::Domain(format!(
            "T = {t_upper} must be a node of the coarsest level"
        )));
    }
    let b_fine = sample_brownian(grid_fine, seed);

    let mut out = Vec::with_capacity(levels.len());
    for &n in levels {
        let factor = n_max / n;
        let b = b_fine.subsample(factor)?;
        let x = crate::paths::synthesize_volterra(model, &b)?;
        let bundle = PathBundle {
            grid: b.grid(),
            brownian: b.clone(),
            volterra: x,
            model: model.clone(),
            seed,
        };
        let u_level = match u {
            Integrand::Deterministic(f) => Integrand::Deterministic(f.subsample(factor)?),
            Integrand::Composite(c) => Integrand::Composite(c.clone()),
        };
        out.push(LevelValue {
            n,
            value: level_value(&u_level, &bundle, t_upper, model.alpha())?,
        });
    }
    IntegralEstimate::from_levels(out)
}

/// Per-level value with the α-dependent endpoint correction.
fn level_value(u: &Integrand, bundle: &PathBundle, t_upper: f64, alpha: f64) -> Result<f64> {
    if alpha >= 0.5 {
        return r_pi_sum(u, bundle, t_upper);
    }
    let m = upper_index(bundle, t_upper)?;
    let u_t = u.at_node(bundle, m);
    let table = band_table(&bundle.model, bundle.grid)?;
    let mut cells = u.cells(bundle, m)?;
    for c in cells.iter_mut() {
        *c -= u_t;
    }
    let shifted = plugin_sum(
        &table,
        &cells,
        bundle.brownian.values(),
        m,
        bundle.grid.step(),
    );
    Ok(shifted + u_t * bundle.volterra.value(m))
}

/// Endpoint-corrected R^π value at a fixed partition (exposed for the
/// identity checks): R^π_T(u − u(T)) + u(T)·X^π(T).
pub fn r_pi_endpoint_corrected(
    u: &Integrand,
    bundle: &PathBundle,
    t_upper: f64,
) -> Result<f64> {
    level_value(u, bundle, t_upper, 0.0)
}

/// Derivative of the quadratic energy e(t) = ∫₀^hor (𝒦*₁ p_t u)(s)² ds by the
/// central difference (e(t+dt) − e(t−dt)) / (2 dt), for deterministic u.
///
/// The square integral expands exactly over covariance rectangle increments:
/// e(t) = Σ_{j,k} c_j c_k [R(e_{j+1}, e_{k+1}) − R(e_{j+1}, e_k) −
/// R(e_j, e_{k+1}) + R(e_j, e_k)] over the cell edges e of [0, t], the last
/// edge cut at t. For constant u this telescopes to u²·R(t, t).
pub fn energy_derivative(
    u: &SampledFunction,
    model: &KernelModel,
    t: f64,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(VolterraError::Domain(format!("dt must be positive, got {dt}")));
    }
    if t - dt < 0.0 || t + dt > u.grid().horizon() {
        return Err(VolterraError::Domain(format!(
            "[t-dt, t+dt] = [{}, {}] leaves the horizon",
            t - dt,
            t + dt
        )));
    }
    let mut cache: HashMap<(u64, u64), f64> = HashMap::new();
    let hi = energy_at(u, model, t + dt, &mut cache)?;
    let lo = energy_at(u, model, t - dt, &mut cache)?;
    Ok((hi - lo) / (2.0 * dt))
}

fn energy_at(
    u: &SampledFunction,
    model: &KernelModel,
    t: f64,
    cache: &mut HashMap<(u64, u64), f64>,
) -> Result<f64> {
    let grid = u.grid();
    let n = grid.intervals();
    let h = grid.step();
    // Cell edges of [0, t] with the last cell cut at t.
    let full = ((t / h).floor() as usize).min(n);
    let mut edges: Vec<f64> = (0..=full).map(|i| grid.node(i)).collect();
    if t > *edges.last().unwrap() + 1e-14 {
        edges.push(t);
    }
    let cell_count = edges.len() - 1;
    if cell_count == 0 {
        return Ok(0.0);
    }
    let cells: Vec<f64> = (0..cell_count)
        .map(|j| u.interpolate(0.5 * (edges[j] + edges[j + 1])))
        .collect();

    // Constant integrand telescopes: 𝒦*₁ p_t u = u·K(t, ·).
    let constant = cells.iter().all(|&c| (c - cells[0]).abs() < 1e-15);
    let mut r = |a: f64, b: f64| -> Result<f64> {
        if a == 0.0 || b == 0.0 {
            return Ok(0.0);
        }
        let key = if a <= b {
            (a.to_bits(), b.to_bits())
        } else {
            (b.to_bits(), a.to_bits())
        };
        if let Some(v) = cache.get(&key) {
            return Ok(*v);
        }
        let v = covariance_with_panels(model, a, b, 1024)?;
        cache.insert(key, v);
        Ok(v)
    };
    if constant {
        return Ok(cells[0] * cells[0] * r(t, t)?);
    }
    let mut acc = 0.0;
    for j in 0..cell_count {
        for k in 0..cell_count {
            let rect = r(edges[j + 1], edges[k + 1])? - r(edges[j + 1], edges[k])?
                - r(edges[j], edges[k + 1])?
                + r(edges[j], edges[k])?;
            acc += cells[j] * cells[k] * rect;
        }
    }
    Ok(acc)
}
