//! Volterra kernel families, their operator actions and covariance.
//!
//! Three triangular kernels K(t,s) (zero for s ≥ t) are implemented:
//!
//! * `levy_fbm`      — K(t,s) = (t−s)^{H−1/2} / Γ(H+1/2); as an operator this
//!   is the left Riemann–Liouville integral of order H+1/2.
//! * `stationary_fbm`— the hypergeometric kernel of fractional Brownian
//!   motion with stationary increments,
//!   K_H(t,s) = (t−s)^{H−1/2}/Γ(H+1/2) · F(1/2−H, H−1/2; H+1/2; 1−t/s).
//! * `multifractional` — K_{H(t)}(t,s) with a time-varying Hurst function,
//!   sampled on a master grid and interpolated linearly.
//!
//! The covariance R(t,s) = ∫₀^{t∧s} K(t,r)K(s,r) dr is computed by graded
//! quadrature; for the stationary family it must reproduce the closed form
//! R_H(t,s) = (V_H/2)(s^{2H} + t^{2H} − |t−s|^{2H}).
//!
//! Quadrature nodes are interior, so the kernel is never evaluated on the
//! diagonal s = t. Stationary evaluations with s below 1e-8·t are clamped to
//! that floor (the kernel is integrable there and the clamp stays below
//! quadrature error); every clamp is counted in a per-model diagnostic.

use crate::error::{Result, VolterraError};
use crate::grid::{SampledFunction, UniformGrid};
use crate::quad::{integrate_graded, rule8};
use crate::specfun::{gamma_fn, gamma_unchecked, hyp2f1, v_h, HypergeometricArgs};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

/// Relative floor below which stationary-kernel evaluations clamp `s`.
const CLAMP_REL: f64 = 1e-8;
/// Geometric refinement depth for graded panels.
const GRADE_DEPTH: usize = 44;
/// Base panel count for the covariance quadrature when none is given.
pub const DEFAULT_COVARIANCE_PANELS: usize = 2048;

/// Which Volterra kernel family a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    LevyFbm,
    StationaryFbm,
    Multifractional,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::LevyFbm => "levy-fbm",
            KernelFamily::StationaryFbm => "stationary-fbm",
            KernelFamily::Multifractional => "multifractional",
        }
    }
}

/// Precomputed hypergeometric data for one Hurst value: the ₂F₁ parameters of
/// the stationary kernel plus the Γ-coefficients of the z → 1/z connection
/// formula, so kernel evaluation costs one short series.
#[derive(Debug, Clone)]
struct SliceParams {
    hurst: f64,
    gamma_h_half: f64, // Γ(H + 1/2)
    a: f64,            // 1/2 − H
    b: f64,            // H − 1/2
    c: f64,            // H + 1/2
    inv_ok: bool,      // |a − b| far enough from integers for the 1/z formula
    coef_a: f64,       // Γ(c)Γ(b−a)/(Γ(b)Γ(c−a))
    coef_b: f64,       // Γ(c)Γ(a−b)/(Γ(a)Γ(c−b))
}

impl SliceParams {
    fn new(h: f64) -> Self {
        let (a, b, c) = (0.5 - h, h - 0.5, h + 0.5);
        let gamma_h_half = gamma_unchecked(c);
        // The 1/z connection formula loses ~log10(1/|a-b-round|) digits to
        // cancellation; beyond 1e-3 of an integer that is cheaper than the
        // Pfaff series, which crawls for the huge |z| the kernel produces
        // near s = 0.
        let inv_ok = ((a - b) - (a - b).round()).abs() >= 1e-3;
        let (coef_a, coef_b) = if inv_ok {
            let gc = gamma_unchecked(c);
            (
                gc * gamma_unchecked(b - a) / (gamma_unchecked(b) * gamma_unchecked(c - a)),
                gc * gamma_unchecked(a - b) / (gamma_unchecked(a) * gamma_unchecked(c - b)),
            )
        } else {
            (0.0, 0.0)
        };
        Self {
            hurst: h,
            gamma_h_half,
            a,
            b,
            c,
            inv_ok,
            coef_a,
            coef_b,
        }
    }

    /// F(1/2−H, H−1/2; H+1/2; z) for z ≤ 0, short-series fast paths.
    fn hyp(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Ok(1.0);
        }
        if z >= -2.0 || !self.inv_ok {
            // Pfaff transformation into w ∈ (0, 1).
            let w = z / (z - 1.0);
            return Ok((1.0 - z).powf(-self.a) * raw_series(self.a, self.c - self.b, self.c, w)?);
        }
        let iz = 1.0 / z;
        let ta = self.coef_a
            * (-z).powf(-self.a)
            * raw_series(self.a, self.a - self.c + 1.0, self.a - self.b + 1.0, iz)?;
        let tb = self.coef_b
            * (-z).powf(-self.b)
            * raw_series(self.b, self.b - self.c + 1.0, self.b - self.a + 1.0, iz)?;
        Ok(ta + tb)
    }
}

fn raw_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..10_000usize {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() || term.abs() < 1e-300 {
            return Ok(sum);
        }
    }
    Err(VolterraError::Evaluation(format!(
        "kernel hypergeometric series stalled (a={a}, b={b}, c={c}, z={z})"
    )))
}

#[derive(Debug)]
struct ModelShared {
    clamp_events: AtomicU64,
    band_tables: Mutex<HashMap<TableKey, Arc<BandTable>>>,
    mid_tables: Mutex<HashMap<TableKey, Arc<MidTable>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct TableKey {
    n: usize,
    horizon_bits: u64,
}

impl TableKey {
    fn for_grid(grid: UniformGrid) -> Self {
        Self {
            n: grid.intervals(),
            horizon_bits: grid.horizon().to_bits(),
        }
    }
}

/// A Volterra kernel model: family, Hurst data and the regularity parameter α.
///
/// Immutable after construction; weight tables are memoized behind a shared
/// cache keyed by grid, so clones are cheap and concurrent use is safe.
#[derive(Debug, Clone)]
pub struct KernelModel {
    family: KernelFamily,
    hurst: f64,
    hurst_fn: Option<SampledFunction>,
    alpha: f64,
    params: Option<SliceParams>,
    shared: Arc<ModelShared>,
}

impl PartialEq for KernelModel {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && self.hurst == other.hurst
            && self.hurst_fn == other.hurst_fn
            && self.alpha == other.alpha
    }
}

fn check_hurst(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0 && h < 1.0) {
        return Err(VolterraError::Domain(format!(
            "Hurst index must lie in (0,1), got {h}"
        )));
    }
    Ok(())
}

impl KernelModel {
    fn shared() -> Arc<ModelShared> {
        Arc::new(ModelShared {
            clamp_events: AtomicU64::new(0),
            band_tables: Mutex::new(HashMap::new()),
            mid_tables: Mutex::new(HashMap::new()),
        })
    }

    /// Lévy fractional Brownian motion kernel, α = H.
    pub fn levy(hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        Ok(Self {
            family: KernelFamily::LevyFbm,
            hurst,
            hurst_fn: None,
            alpha: hurst,
            params: None,
            shared: Self::shared(),
        })
    }

    /// Stationary-increment fractional Brownian motion kernel, α = H.
    pub fn stationary(hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        Ok(Self {
            family: KernelFamily::StationaryFbm,
            hurst,
            hurst_fn: None,
            alpha: hurst,
            params: Some(SliceParams::new(hurst)),
            shared: Self::shared(),
        })
    }

    /// Multifractional kernel K_{H(t)}(t,s). Requires inf H(t) > 1/2 and
    /// 0 < α < inf H(t) − 1/2.
    pub fn multifractional(hurst_fn: SampledFunction, alpha: f64) -> Result<Self> {
        let inf = hurst_fn
            .values()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let sup = hurst_fn
            .values()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if !(inf > 0.5 && sup < 1.0) {
            return Err(VolterraError::Domain(format!(
                "multifractional Hurst function must take values in (1/2, 1), range [{inf}, {sup}]"
            )));
        }
        if !(alpha > 0.0 && alpha < inf - 0.5) {
            return Err(VolterraError::Domain(format!(
                "alpha must lie in (0, inf H - 1/2) = (0, {}), got {alpha}",
                inf - 0.5
            )));
        }
        Ok(Self {
            family: KernelFamily::Multifractional,
            hurst: inf,
            hurst_fn: Some(hurst_fn),
            alpha,
            params: None,
            shared: Self::shared(),
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Constant Hurst index (levy/stationary); inf H(t) for multifractional.
    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Regularity parameter α of the kernel.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hurst_fn(&self) -> Option<&SampledFunction> {
        self.hurst_fn.as_ref()
    }

    /// Hurst value governing the kernel slice K(t, ·).
    pub fn hurst_at(&self, t: f64) -> f64 {
        match &self.hurst_fn {
            Some(hf) => hf.interpolate(t),
            None => self.hurst,
        }
    }

    /// Number of times a stationary evaluation clamped s to its floor.
    pub fn clamp_events(&self) -> u64 {
        self.shared.clamp_events.load(Ordering::Relaxed)
    }

    fn slice_params(&self, t: f64) -> SliceParams {
        match (&self.params, self.family) {
            (Some(p), _) => p.clone(),
            (None, KernelFamily::Multifractional) => SliceParams::new(self.hurst_at(t)),
            (None, _) => SliceParams::new(self.hurst),
        }
    }
}

/// Pointwise kernel value K(t, s).
///
/// Returns 0 for s ≥ t (triangularity). For the hypergeometric families the
/// limit s ↓ 0 is singular: s ≤ 0 is an error and s below 1e-8·t is clamped
/// with a recorded diagnostic.
pub fn kernel_eval(model: &KernelModel, t: f64, s: f64) -> Result<f64> {
    if !t.is_finite() || !s.is_finite() {
        return Err(VolterraError::Domain(format!(
            "kernel arguments must be finite, got t={t}, s={s}"
        )));
    }
    if s < 0.0 {
        return Err(VolterraError::Domain(format!(
            "kernel second argument must be nonnegative, got s={s}"
        )));
    }
    if s >= t {
        return Ok(0.0);
    }
    match model.family {
        KernelFamily::LevyFbm => {
            let h = model.hurst;
            Ok((t - s).powf(h - 0.5) / gamma_fn(h + 0.5)?)
        }
        KernelFamily::StationaryFbm | KernelFamily::Multifractional => {
            if s == 0.0 {
                return Err(VolterraError::Singularity(format!(
                    "hypergeometric kernel argument 1 - t/s undefined at s = 0 (t = {t})"
                )));
            }
            stationary_value(&model.slice_params(t), t, s, &model.shared)
        }
    }
}

fn stationary_value(p: &SliceParams, t: f64, s: f64, shared: &ModelShared) -> Result<f64> {
    if p.hurst == 0.5 {
        return Ok(1.0);
    }
    let floor = CLAMP_REL * t;
    let s = if s < floor {
        shared.clamp_events.fetch_add(1, Ordering::Relaxed);
        floor
    } else {
        s
    };
    let z = 1.0 - t / s;
    Ok((t - s).powf(p.b) / p.gamma_h_half * p.hyp(z)?)
}

/// Internal evaluation used by quadratures: assumes 0 < s < t, clamps tiny s.
fn kernel_value(model: &KernelModel, p: &SliceParams, t: f64, s: f64) -> Result<f64> {
    match model.family {
        KernelFamily::LevyFbm => Ok((t - s).powf(p.b) / p.gamma_h_half),
        _ => stationary_value(p, t, s, &model.shared),
    }
}

/// Run a graded quadrature over a closure that may fail, surfacing the first
/// error instead of poisoning the sum.
fn integrate_checked<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    base: usize,
    grade_left: bool,
    grade_right: bool,
) -> Result<f64> {
    let failure: RefCell<Option<VolterraError>> = RefCell::new(None);
    let value = integrate_graded(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        base,
        grade_left,
        grade_right,
        GRADE_DEPTH,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Band primitive ∫_a^{b∧t} K(t, s) ds.
///
/// Lévy is closed-form; the hypergeometric families use Gauss panels with the
/// interval split and graded towards the endpoint singularities (s = t when
/// the band touches it, s = 0 when it starts there).
pub fn kernel_band_primitive(model: &KernelModel, a: f64, b: f64, t: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && t.is_finite()) || a < 0.0 || b < a {
        return Err(VolterraError::Domain(format!(
            "band must satisfy 0 <= a <= b, got a={a}, b={b}"
        )));
    }
    band_primitive_inner(model, a, b, t)
}

fn band_primitive_inner(model: &KernelModel, a: f64, b: f64, t: f64) -> Result<f64> {
    let c = b.min(t);
    if !(c > a) || t <= 0.0 {
        return Ok(0.0);
    }
    let p = model.slice_params(t);
    if model.family == KernelFamily::LevyFbm {
        // ∫_a^c (t-s)^{H-1/2} ds, exactly.
        let e = p.c; // H + 1/2
        return Ok(((t - a).powf(e) - (t - c).powf(e)) / (e * p.gamma_h_half));
    }
    if p.hurst == 0.5 {
        return Ok(c - a);
    }
    let width = c - a;
    let grade_right = t - c < width; // singular (or steep) at s = t
    let grade_left = a < 0.05 * t || a < width; // s ↓ 0 singularity of the F factor
    let base = if width > 0.2 * t { 8 } else { 2 };
    integrate_checked(
        |s| kernel_value(model, &p, t, s),
        a,
        c,
        base,
        grade_left,
        grade_right,
    )
}

/// Volterra action (K f)(t_i) = ∫₀^{t_i} K(t_i, s) f(s) ds at every node,
/// with f piecewise linear between nodes.
pub fn apply_k(model: &KernelModel, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = f.grid();
    let n = grid.intervals();
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        let t = grid.node(i);
        let p = model.slice_params(t);
        let mut acc = 0.0;
        for j in 0..i {
            let (sa, sb) = (grid.node(j), grid.node(j + 1));
            let (fa, fb) = (f.value(j), f.value(j + 1));
            let lin = |s: f64| fa + (fb - fa) * (s - sa) / (sb - sa);
            let grade_right = j + 1 == i;
            let grade_left = j == 0 && model.family != KernelFamily::LevyFbm;
            acc += if grade_left || grade_right {
                integrate_checked(
                    |s| Ok(kernel_value(model, &p, t, s)? * lin(s)),
                    sa,
                    sb,
                    1,
                    grade_left,
                    grade_right,
                )?
            } else {
                // Smooth cell: one Gauss panel.
                let fail: RefCell<Option<VolterraError>> = RefCell::new(None);
                let v = rule8().integrate(sa, sb, |s| {
                    match kernel_value(model, &p, t, s) {
                        Ok(k) => k * lin(s),
                        Err(e) => {
                            fail.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                });
                if let Some(e) = fail.into_inner() {
                    return Err(e);
                }
                v
            };
        }
        out[i] = acc;
    }
    SampledFunction::new(grid, out)
}

/// Adjoint action 𝒦*_T on explicit step data: `cells[j]` is the value of the
/// left-open step function on (t_j, t_{j+1}], for j < index(T).
///
/// (𝒦*_T u)(s_i) = Σ_{j ≥ i} cells[j] · [K(t_{j+1}, s_i) − K(t_j, s_i)],
/// the unique linear extension of 𝒦*(1_{[0,t]}) = K(t, ·), which it
/// reproduces exactly on grid-aligned indicators.
pub fn apply_k_adjoint_steps(
    model: &KernelModel,
    grid: UniformGrid,
    cells: &[f64],
    t_upper: f64,
) -> Result<SampledFunction> {
    let m = grid.index_of(t_upper).ok_or_else(|| {
        VolterraError::Domain(format!("T = {t_upper} is not a node of the grid"))
    })?;
    if m < 2 {
        return Err(VolterraError::Domain("T must cover at least 2 cells".into()));
    }
    if cells.len() != m {
        return Err(VolterraError::Domain(format!(
            "expected {m} step values, got {}",
            cells.len()
        )));
    }
    // K(t_j, s_i) for all node pairs; row j gives the kernel slice at t_j.
    // The node s_0 = 0 is evaluated at the clamp floor for the hypergeometric
    // families (the adjoint may diverge there; the clamp keeps it finite).
    let mut out = vec![0.0; m + 1];
    for i in 0..=m {
        let s = if i == 0 { f64::MIN_POSITIVE } else { grid.node(i) };
        let mut acc = 0.0;
        for (j, &c) in cells.iter().enumerate().skip(i.saturating_sub(1)) {
            if c == 0.0 {
                continue;
            }
            let hi = eval_clamped(model, grid.node(j + 1), s)?;
            let lo = eval_clamped(model, grid.node(j), s)?;
            acc += c * (hi - lo);
        }
        out[i] = acc;
    }
    let sub = UniformGrid::new(m, grid.node(m))?;
    SampledFunction::new(sub, out)
}

fn eval_clamped(model: &KernelModel, t: f64, s: f64) -> Result<f64> {
    if s >= t {
        return Ok(0.0);
    }
    let p = model.slice_params(t);
    kernel_value(model, &p, t, s)
}

/// Adjoint action 𝒦*_T on a node-sampled u: u is read as the left-open step
/// function with midpoint values, cells[j] = (u_j + u_{j+1})/2.
pub fn apply_k_adjoint(
    model: &KernelModel,
    u: &SampledFunction,
    t_upper: f64,
) -> Result<SampledFunction> {
    let grid = u.grid();
    let m = grid.index_of(t_upper).ok_or_else(|| {
        VolterraError::Domain(format!("T = {t_upper} is not a node of the grid"))
    })?;
    let cells: Vec<f64> = (0..m).map(|j| u.midpoint_value(j)).collect();
    apply_k_adjoint_steps(model, grid, &cells, t_upper)
}

/// Covariance R(t,s) = ∫₀^{t∧s} K(t,r) K(s,r) dr by graded quadrature with
/// `panels` base panels.
pub fn covariance_with_panels(
    model: &KernelModel,
    t: f64,
    s: f64,
    panels: usize,
) -> Result<f64> {
    if !(t.is_finite() && s.is_finite()) || t < 0.0 || s < 0.0 {
        return Err(VolterraError::Domain(format!(
            "covariance arguments must be nonnegative, got ({t}, {s})"
        )));
    }
    let m = t.min(s);
    if m <= 0.0 {
        return Ok(0.0);
    }
    let pt = model.slice_params(t);
    let ps = model.slice_params(s);
    integrate_checked(
        |r| Ok(kernel_value(model, &pt, t, r)? * kernel_value(model, &ps, s, r)?),
        0.0,
        m,
        panels,
        true,
        true,
    )
}

/// Covariance at the default quadrature resolution.
pub fn covariance(model: &KernelModel, t: f64, s: f64) -> Result<f64> {
    covariance_with_panels(model, t, s, DEFAULT_COVARIANCE_PANELS)
}

/// Closed-form fBm covariance (V_H/2)(s^{2H} + t^{2H} − |t−s|^{2H}), the
/// oracle for the stationary family's quadrature path.
pub fn covariance_fbm_closed(h: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(h)?;
    let v = v_h(h)?;
    Ok(0.5 * v * (s.abs().powf(2.0 * h) + t.abs().powf(2.0 * h) - (t - s).abs().powf(2.0 * h)))
}

/// Cross-check route for the stationary kernel operator via weighted
/// fractional integrals:
///
/// ```text
/// K_H f = I^{2H}_{0+} x^{1/2−H} I^{1/2−H}_{0+} x^{H−1/2} f   (H < 1/2)
/// K_H f = I^{1}_{0+}  x^{H−1/2} I^{H−1/2}_{0+} x^{1/2−H} f   (H > 1/2)
/// ```
///
/// This path never touches the hypergeometric series, so agreement with
/// [`apply_k`] checks two independent constructions of the same operator.
/// The weighted integrands x^{±(H−1/2)}·f require f(0) = 0 so their node-0
/// limit stays finite.
pub fn apply_k_factorized(h: f64, f: &SampledFunction) -> Result<SampledFunction> {
    check_hurst(h)?;
    if h == 0.5 {
        return Err(VolterraError::Domain(
            "H = 1/2 has no fractional factorization (K is the identity kernel)".into(),
        ));
    }
    if f.value(0) != 0.0 {
        return Err(VolterraError::Domain(
            "factorized route requires f(0) = 0 (weighted integrand must stay finite)".into(),
        ));
    }
    let grid = f.grid();
    let weight = |exp: f64, g: &SampledFunction| -> Result<SampledFunction> {
        let vals = (0..grid.node_count())
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    grid.node(i).powf(exp) * g.value(i)
                }
            })
            .collect();
        SampledFunction::new(grid, vals)
    };
    use crate::fracops::{frac_integral, Side};
    if h < 0.5 {
        let inner = weight(h - 0.5, f)?;
        let mid = frac_integral(&inner, 0.5 - h, Side::Left)?;
        let outer = weight(0.5 - h, &mid)?;
        frac_integral(&outer, 2.0 * h, Side::Left)
    } else {
        let inner = weight(0.5 - h, f)?;
        let mid = frac_integral(&inner, h - 0.5, Side::Left)?;
        let outer = weight(h - 0.5, &mid)?;
        frac_integral(&outer, 1.0, Side::Left)
    }
}

/// Closed-form Lévy-fBm covariance via the Gauss hypergeometric function:
/// for 0 < s ≤ t, R(t,s) = s^{H+1/2} t^{H−1/2} F(1/2−H, 1; H+3/2; s/t)
/// / ((H+1/2) Γ(H+1/2)²).
pub fn covariance_levy_closed(h: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(h)?;
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    if lo <= 0.0 {
        return Ok(0.0);
    }
    let a = h - 0.5;
    let g = gamma_fn(h + 0.5)?;
    if lo == hi {
        return Ok(lo.powf(2.0 * h) / (2.0 * h * g * g));
    }
    let f = hyp2f1(HypergeometricArgs::new(-a, 1.0, a + 2.0, lo / hi)?)?;
    Ok(lo.powf(a + 1.0) * hi.powf(a) * f / ((a + 1.0) * g * g))
}

/// Per-grid table of band primitives P(i, t_k) = ∫_{t_i}^{t_{i+1}} K(t_k, s) ds
/// over all cells i and node arguments t_k. Shared by path synthesis and the
/// discrete integral schemes; built once per (model, grid) and cached.
#[derive(Debug)]
pub struct BandTable {
    n: usize,
    /// Row-major n × (n+1): entry [i][k].
    p: Vec<f64>,
}

impl BandTable {
    /// P(i, t_k): band integral of the kernel slice at node k over cell i.
    pub fn p_node(&self, i: usize, k: usize) -> f64 {
        self.p[i * (self.n + 1) + k]
    }

    /// M[i][j] = P(i, t_{j+1}) − P(i, t_j), the step-adjoint cell weights.
    pub fn m_entry(&self, i: usize, j: usize) -> f64 {
        self.p_node(i, j + 1) - self.p_node(i, j)
    }

    pub fn intervals(&self) -> usize {
        self.n
    }
}

/// Companion table of P(i, τ_j) at interval midpoints, needed by the
/// Malliavin trace weights. Cached separately because only the composite
/// integrand path requires it.
#[derive(Debug)]
pub struct MidTable {
    n: usize,
    /// Row-major n × n: entry [i][j] = P(i, τ_j).
    p: Vec<f64>,
}

impl MidTable {
    pub fn p_mid(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }
}

/// Fetch (building and caching on first use) the node band table for a grid.
pub fn band_table(model: &KernelModel, grid: UniformGrid) -> Result<Arc<BandTable>> {
    let key = TableKey::for_grid(grid);
    if let Some(t) = model.shared.band_tables.lock().unwrap().get(&key) {
        return Ok(Arc::clone(t));
    }
    let n = grid.intervals();
    let mut p = vec![0.0; n * (n + 1)];
    for k in 1..=n {
        let tk = grid.node(k);
        for i in 0..k {
            p[i * (n + 1) + k] = band_primitive_inner(model, grid.node(i), grid.node(i + 1), tk)?;
        }
    }
    let table = Arc::new(BandTable { n, p });
    model
        .shared
        .band_tables
        .lock()
        .unwrap()
        .insert(key, Arc::clone(&table));
    Ok(table)
}

/// Fetch (building and caching on first use) the midpoint band table.
pub fn mid_table(model: &KernelModel, grid: UniformGrid) -> Result<Arc<MidTable>> {
    let key = TableKey::for_grid(grid);
    if let Some(t) = model.shared.mid_tables.lock().unwrap().get(&key) {
        return Ok(Arc::clone(t));
    }
    let n = grid.intervals();
    let mut p = vec![0.0; n * n];
    for j in 0..n {
        let tau = grid.midpoint(j);
        for i in 0..=j {
            p[i * n + j] = band_primitive_inner(model, grid.node(i), grid.node(i + 1), tau)?;
        }
    }
    let table = Arc::new(MidTable { n, p });
    model
        .shared
        .mid_tables
        .lock()
        .unwrap()
        .insert(key, Arc::clone(&table));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{frac_integral, Side};

    #[test]
    fn triangularity_all_families() {
        let grid = UniformGrid::new(8, 1.0).unwrap();
        let hfn = SampledFunction::from_fn(grid, |t| 0.6 + 0.2 * t).unwrap();
        let models = [
            KernelModel::levy(0.3).unwrap(),
            KernelModel::stationary(0.7).unwrap(),
            KernelModel::multifractional(hfn, 0.05).unwrap(),
        ];
        for m in &models {
            assert_eq!(kernel_eval(m, 0.5, 0.5).unwrap(), 0.0);
            assert_eq!(kernel_eval(m, 0.5, 0.7).unwrap(), 0.0);
        }
    }

    #[test]
    fn stationary_h_half_is_brownian() {
        let m = KernelModel::stationary(0.5).unwrap();
        for &(t, s) in &[(1.0, 0.5), (0.9, 0.1), (0.2, 0.19)] {
            assert_eq!(kernel_eval(&m, t, s).unwrap(), 1.0);
        }
        assert!((kernel_band_primitive(&m, 0.2, 0.6, 1.0).unwrap() - 0.4).abs() < 1e-15);
        assert!((kernel_band_primitive(&m, 0.2, 0.6, 0.4).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn levy_pointwise_value() {
        // K(1, 0.5) = 0.5^{0.25} / Γ(1.25) for H = 0.75.
        let m = KernelModel::levy(0.75).unwrap();
        let want = 0.5f64.powf(0.25) / gamma_fn(1.25).unwrap();
        assert!((want - 0.9277).abs() < 1e-4);
        assert!((kernel_eval(&m, 1.0, 0.5).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn stationary_rejects_s_nonpositive() {
        let m = KernelModel::stationary(0.7).unwrap();
        assert!(matches!(
            kernel_eval(&m, 1.0, 0.0),
            Err(VolterraError::Singularity(_))
        ));
        assert!(kernel_eval(&m, 1.0, -0.1).is_err());
        // Tiny positive s clamps and counts a diagnostic.
        let before = m.clamp_events();
        let v = kernel_eval(&m, 1.0, 1e-12).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(m.clamp_events(), before + 1);
    }

    #[test]
    fn band_primitive_levy_closed_form() {
        let m = KernelModel::levy(0.3).unwrap();
        let h = 0.3f64;
        // [a,b] = [0,t]: t^{H+1/2} / ((H+1/2) Γ(H+1/2)).
        let t = 0.8f64;
        let want = t.powf(h + 0.5) / ((h + 0.5) * gamma_fn(h + 0.5).unwrap());
        assert!((kernel_band_primitive(&m, 0.0, t, t).unwrap() - want).abs() < 1e-14);
        // t <= a: empty band.
        assert_eq!(kernel_band_primitive(&m, 0.5, 0.7, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn band_primitive_matches_fine_quadrature_stationary() {
        // Graded band integral vs a brute-force very fine midpoint sum.
        let m = KernelModel::stationary(0.7).unwrap();
        let (a, b, t) = (0.0, 0.5, 0.5);
        let got = kernel_band_primitive(&m, a, b, t).unwrap();
        let n = 400_000;
        let mut brute = 0.0;
        let w = (b - a) / n as f64;
        for i in 0..n {
            let s = a + w * (i as f64 + 0.5);
            brute += kernel_eval(&m, t, s).unwrap() * w;
        }
        assert!(
            ((got - brute) / brute).abs() < 5e-4,
            "graded {got} vs brute {brute}"
        );
    }

    #[test]
    fn apply_k_linearity_and_brownian_identity() {
        let grid = UniformGrid::new(64, 1.0).unwrap();
        let m = KernelModel::stationary(0.5).unwrap();
        let zero = SampledFunction::constant(grid, 0.0).unwrap();
        let kz = apply_k(&m, &zero).unwrap();
        assert!(kz.values().iter().all(|&v| v == 0.0));
        let one = SampledFunction::constant(grid, 1.0).unwrap();
        let k1 = apply_k(&m, &one).unwrap();
        for i in 0..=64 {
            assert!((k1.value(i) - grid.node(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn levy_apply_k_is_left_fractional_integral() {
        // K = I^{H+1/2}_{0+} for the Lévy kernel.
        let grid = UniformGrid::new(2048, 1.0).unwrap();
        let m = KernelModel::levy(0.75).unwrap();
        let f = SampledFunction::from_fn(grid, |t| (3.0 * t).cos()).unwrap();
        let lhs = apply_k(&m, &f).unwrap();
        let rhs = frac_integral(&f, 1.25, Side::Left).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=2048 {
            worst = worst.max((lhs.value(i) - rhs.value(i)).abs());
        }
        assert!(worst < 1e-6, "sup gap {worst}");
    }

    #[test]
    fn adjoint_indicator_reproduces_kernel_slice() {
        // 𝒦*(1_{[0,t_k]}) = K(t_k, ·) exactly at the discrete level when the
        // indicator is represented in the left-open step convention.
        let grid = UniformGrid::new(32, 1.0).unwrap();
        let m = KernelModel::stationary(0.7).unwrap();
        let k = 20usize;
        let cells: Vec<f64> = (0..32).map(|j| if j < k { 1.0 } else { 0.0 }).collect();
        let out = apply_k_adjoint_steps(&m, grid, &cells, 1.0).unwrap();
        for i in 1..=31 {
            let want = kernel_eval(&m, grid.node(k), grid.node(i)).unwrap();
            assert!(
                (out.value(i) - want).abs() < 1e-12,
                "node {i}: {} vs {want}",
                out.value(i)
            );
        }
    }

    #[test]
    fn adjoint_brownian_case_is_projection() {
        let grid = UniformGrid::new(64, 1.0).unwrap();
        let m = KernelModel::stationary(0.5).unwrap();
        let u = SampledFunction::from_fn(grid, |t| t * t + 0.3).unwrap();
        let out = apply_k_adjoint(&m, &u, 1.0).unwrap();
        for i in 0..64 {
            assert!(
                (out.value(i) - u.midpoint_value(i)).abs() < 1e-12,
                "node {i}"
            );
        }
    }

    #[test]
    fn adjoint_levy_matches_right_fractional_integral() {
        // 𝒦*_T = I^{H−1/2}_{T−} for the Lévy kernel; compare away from the
        // endpoints where the step discretization is crudest.
        let grid = UniformGrid::new(512, 1.0).unwrap();
        let m = KernelModel::levy(0.75).unwrap();
        let u = SampledFunction::from_fn(grid, |t| t).unwrap();
        let lhs = apply_k_adjoint(&m, &u, 1.0).unwrap();
        let rhs = frac_integral(&u, 0.25, Side::Right).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=512 {
            let t = grid.node(i);
            if (0.05..=0.95).contains(&t) {
                worst = worst.max((lhs.value(i) - rhs.value(i)).abs());
            }
        }
        assert!(worst < 1e-3, "sup gap {worst}");
    }

    #[test]
    fn covariance_trivial_and_brownian() {
        let m = KernelModel::stationary(0.5).unwrap();
        assert_eq!(covariance_with_panels(&m, 0.0, 0.7, 64).unwrap(), 0.0);
        assert_eq!(covariance_with_panels(&m, 0.7, 0.0, 64).unwrap(), 0.0);
        let r = covariance_with_panels(&m, 1.0, 0.5, 64).unwrap();
        assert!((r - 0.5).abs() < 1e-10);
    }

    #[test]
    fn covariance_matches_closed_form_stationary() {
        for &h in &[0.3f64, 0.55, 0.7] {
            let m = KernelModel::stationary(h).unwrap();
            let tol = 1e-3 * v_h(h).unwrap();
            for &(t, s) in &[(1.0, 0.5), (0.75, 0.75), (0.25, 1.0), (0.9, 0.85)] {
                let quad = covariance_with_panels(&m, t, s, 512).unwrap();
                let closed = covariance_fbm_closed(h, t, s).unwrap();
                assert!(
                    (quad - closed).abs() <= tol,
                    "H={h}, (t,s)=({t},{s}): quad {quad} vs closed {closed}"
                );
            }
        }
    }

    #[test]
    fn covariance_closed_form_values() {
        // H = 0.5 degenerates to min(s,t).
        assert!((covariance_fbm_closed(0.5, 0.3, 0.8).unwrap() - 0.3).abs() < 1e-14);
        // Diagonal: V_H t^{2H}.
        let h = 0.7;
        let v = v_h(h).unwrap();
        let t = 0.6f64;
        assert!(
            (covariance_fbm_closed(h, t, t).unwrap() - v * t.powf(1.4)).abs() < 1e-14
        );
        // (t,s) = (1, 0.5): (V_H/2)(0.5^{1.4} + 1 − 0.5^{1.4}) = V_H/2.
        assert!((covariance_fbm_closed(h, 1.0, 0.5).unwrap() - v / 2.0).abs() < 1e-14);
        assert!((v / 2.0 - 0.4975).abs() < 1e-3);
    }

    #[test]
    fn covariance_levy_closed_matches_quadrature() {
        for &h in &[0.3f64, 0.75] {
            let m = KernelModel::levy(h).unwrap();
            for &(t, s) in &[(1.0, 0.5), (0.8, 0.8), (0.6, 0.9)] {
                let quad = covariance_with_panels(&m, t, s, 512).unwrap();
                let closed = covariance_levy_closed(h, t, s).unwrap();
                assert!(
                    ((quad - closed) / closed).abs() < 1e-5,
                    "H={h} ({t},{s}): {quad} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn multifractional_reduces_to_stationary_for_constant_h() {
        let grid = UniformGrid::new(16, 1.0).unwrap();
        let hfn = SampledFunction::constant(grid, 0.7).unwrap();
        let mf = KernelModel::multifractional(hfn, 0.1).unwrap();
        let st = KernelModel::stationary(0.7).unwrap();
        for &(t, s) in &[(0.9, 0.3), (0.5, 0.49), (1.0, 0.7)] {
            let a = kernel_eval(&mf, t, s).unwrap();
            let b = kernel_eval(&st, t, s).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn multifractional_validation() {
        let grid = UniformGrid::new(8, 1.0).unwrap();
        let bad = SampledFunction::from_fn(grid, |t| 0.4 + 0.3 * t).unwrap();
        assert!(KernelModel::multifractional(bad, 0.05).is_err());
        let ok = SampledFunction::from_fn(grid, |t| 0.6 + 0.2 * t).unwrap();
        assert!(KernelModel::multifractional(ok.clone(), 0.2).is_err()); // alpha too big
        assert!(KernelModel::multifractional(ok, 0.05).is_ok());
    }

    #[test]
    fn band_table_consistency() {
        let grid = UniformGrid::new(16, 1.0).unwrap();
        let m = KernelModel::stationary(0.7).unwrap();
        let table = band_table(&m, grid).unwrap();
        // Entries agree with direct band primitives.
        for k in [4usize, 9, 16] {
            for i in 0..k {
                let direct =
                    kernel_band_primitive(&m, grid.node(i), grid.node(i + 1), grid.node(k))
                        .unwrap();
                assert!((table.p_node(i, k) - direct).abs() < 1e-12);
            }
        }
        // Cached: second fetch is the same allocation.
        let again = band_table(&m, grid).unwrap();
        assert!(Arc::ptr_eq(&table, &again));
    }
}
