//! Gauss–Legendre quadrature and graded-panel composite rules.
//!
//! The kernel integrands carry weak power singularities at `s = 0` and at the
//! diagonal `s = t`. Plain Gauss–Legendre handles the smooth interior; the
//! composite driver refines panels geometrically towards flagged endpoints so
//! the singular mass is resolved without ever evaluating the endpoint itself
//! (Gauss nodes are interior).

use std::sync::OnceLock;

/// A fixed-order Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Compute an `n`-point rule via Newton iteration on the Legendre
    /// polynomial recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-based initial guess for the i-th positive root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P'_n(x).
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    ///
    /// Gauss nodes are interior, so `f` is never evaluated at `a` or `b`
    /// unless rounding collapses a node onto an endpoint; such nodes are
    /// skipped (they carry vanishing width anyway).
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let p = mid + half * x;
            if p <= a || p >= b {
                continue;
            }
            sum += w * f(p);
        }
        sum * half
    }
}

/// Shared 8-point rule (enough for smooth panels at the accuracies used here).
pub fn rule8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

/// Shared 16-point rule for wider smooth panels.
pub fn rule16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// An `n`-point Gauss–Jacobi rule for ∫₋₁¹ (1−x)^α (1+x)^β f(x) dx,
/// `α, β > −1`, built by Golub–Welsch from the monic Jacobi recurrence.
///
/// The power weights are absorbed exactly, which is what makes this the
/// reference rule for Euler-type integrals with endpoint singularities.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobi {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Self {
        assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
        // Monic recurrence coefficients a_k (diagonal) and b_k (sub-diagonal²).
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n]; // sub[k] = sqrt(b_k), k >= 1
        let ab = alpha + beta;
        diag[0] = (beta - alpha) / (ab + 2.0);
        for k in 1..n {
            let kf = k as f64;
            let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
            diag[k] = (beta * beta - alpha * alpha) / denom;
            let num = 4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab);
            let den = (2.0 * kf + ab).powi(2) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0);
            sub[k] = (num / den).sqrt();
        }
        // Total mass μ₀ = 2^{α+β+1} B(α+1, β+1).
        let mu0 = 2f64.powf(ab + 1.0)
            * crate::specfun::gamma_unchecked(alpha + 1.0)
            * crate::specfun::gamma_unchecked(beta + 1.0)
            / crate::specfun::gamma_unchecked(ab + 2.0);
        // Symmetric tridiagonal Jacobi matrix, densified for the eigensolver.
        let mut jm = vec![0.0; n * n];
        for k in 0..n {
            jm[k * n + k] = diag[k];
            if k > 0 {
                jm[k * n + k - 1] = sub[k];
                jm[(k - 1) * n + k] = sub[k];
            }
        }
        let (eig, vecs) = crate::linalg::symmetric_eigen(&jm, n);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| (eig[k], mu0 * vecs[k] * vecs[k]))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// ∫₀¹ u^β (1−u)^α f(u) du via the affine map u = (1+x)/2.
    pub fn integrate_unit<F: Fn(f64) -> f64>(&self, alpha: f64, beta: f64, f: F) -> f64 {
        let scale = 2f64.powf(-(alpha + beta + 1.0));
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(0.5 * (1.0 + x));
        }
        scale * sum
    }
}

/// Composite quadrature of `f` over `[a, b]` with `base` uniform panels.
///
/// When `grade_left`/`grade_right` is set the corresponding outer panel is
/// subdivided geometrically (ratio 1/2, `depth` levels) towards the endpoint,
/// which resolves integrable power singularities `|x - end|^p`, `p > -1`.
pub fn integrate_graded<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    base: usize,
    grade_left: bool,
    grade_right: bool,
    depth: usize,
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let base = base.max(1);
    let gl = rule8();
    let w = (b - a) / base as f64;
    let mut total = 0.0;
    for p in 0..base {
        let pa = a + w * p as f64;
        let pb = if p + 1 == base { b } else { a + w * (p + 1) as f64 };
        let refine_l = grade_left && p == 0;
        let refine_r = grade_right && p + 1 == base;
        if !refine_l && !refine_r {
            total += gl.integrate(pa, pb, &f);
        } else if refine_l && refine_r {
            // Split at the midpoint and grade each half towards its endpoint.
            let mid = 0.5 * (pa + pb);
            total += graded_half(&f, pa, mid, true, depth, gl);
            total += graded_half(&f, mid, pb, false, depth, gl);
        } else {
            total += graded_half(&f, pa, pb, refine_l, depth, gl);
        }
    }
    total
}

/// Geometric refinement of `[a, b]` towards `a` (`towards_left`) or `b`.
fn graded_half<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    towards_left: bool,
    depth: usize,
    _gl: &GaussLegendre,
) -> f64 {
    // 16 points per dyadic panel: the convergence radius towards the
    // singularity makes the per panel relative error ~1e-15.
    let gl = rule16();
    let len = b - a;
    // Refining past the ulp scale of the endpoint only collapses panels onto
    // the singularity by rounding.
    let width_floor = 16.0 * f64::EPSILON * (a.abs().max(b.abs()) + len);
    let mut total = 0.0;
    let mut frac = 1.0f64;
    for _ in 0..depth {
        let next = frac * 0.5;
        if len * next < width_floor {
            break;
        }
        let (lo, hi) = if towards_left {
            (a + len * next, a + len * frac)
        } else {
            (b - len * frac, b - len * next)
        };
        total += gl.integrate(lo, hi, f);
        frac = next;
    }
    // Final sliver, still by interior-node Gauss; its unresolved mass is
    // O(frac^(1+p)) of the panel for integrands ~ |x-end|^p.
    let (lo, hi) = if towards_left {
        (a, a + len * frac)
    } else {
        (b - len * frac, b)
    };
    total + gl.integrate(lo, hi, f)
}
