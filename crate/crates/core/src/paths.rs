//! Seeded Brownian paths and two Volterra path constructions: the
//! linearized-driver synthesis X^π and exact Gaussian sampling from the
//! covariance matrix.
//!
//! Randomness comes from a counter-based stream cipher keyed by
//! (master seed, stream index, block counter), so distinct streams are
//! independent, any path is a pure function of (model, grid, seed), and
//! parallel Monte Carlo reproduces bit-for-bit regardless of worker count:
//! per-path results are collected by stream index and reduced in that fixed
//! order.

use crate::error::{Result, VolterraError};
use crate::grid::{SampledFunction, UniformGrid};
use crate::kernels::{
    band_table, covariance_fbm_closed, covariance_with_panels, KernelFamily, KernelModel,
};
use crate::linalg::cholesky_lower;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Seed of one random stream: a master key plus a stream (path) index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed {
    pub master: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// Derive the stream's generator. The master key is expanded to the
    /// cipher key by a splitmix chain; the stream index selects the nonce.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        let mut x = self.master;
        for chunk in key.chunks_mut(8) {
            x = splitmix64(x);
            chunk.copy_from_slice(&x.to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A Brownian path together with its synthesized Volterra path.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub grid: UniformGrid,
    pub brownian: SampledFunction,
    pub volterra: SampledFunction,
    pub model: KernelModel,
    pub seed: RngSeed,
}

/// Standard Brownian path on the grid: B(0) = 0, i.i.d. N(0, h) increments,
/// bit-reproducible from the seed.
pub fn sample_brownian(grid: UniformGrid, seed: RngSeed) -> SampledFunction {
    let mut rng = seed.rng();
    let sqrt_h = grid.step().sqrt();
    let mut values = Vec::with_capacity(grid.node_count());
    values.push(0.0);
    let mut acc = 0.0;
    for _ in 0..grid.intervals() {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += sqrt_h * z;
        values.push(acc);
    }
    SampledFunction::new(grid, values).expect("Gaussian increments are finite")
}

/// Linearized-driver synthesis: X^π(t_k) = Σ_i (1/δ_i)·(∫_{t_i}^{t_{i+1}∧t_k}
/// K(t_k, s) ds)·ΔB_i, evaluated at every node through the band table.
pub fn synthesize_volterra(
    model: &KernelModel,
    brownian: &SampledFunction,
) -> Result<SampledFunction> {
    let grid = brownian.grid();
    let n = grid.intervals();
    let table = band_table(model, grid)?;
    let inv_h = 1.0 / grid.step();
    let b = brownian.values();
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        let mut acc = 0.0;
        for i in 0..k {
            acc += table.p_node(i, k) * (b[i + 1] - b[i]);
        }
        out[k] = acc * inv_h;
    }
    SampledFunction::new(grid, out)
}

/// Brownian path plus its synthesized Volterra path in one bundle.
pub fn simulate_bundle(
    model: &KernelModel,
    grid: UniformGrid,
    seed: RngSeed,
) -> Result<PathBundle> {
    let brownian = sample_brownian(grid, seed);
    let volterra = synthesize_volterra(model, &brownian)?;
    Ok(PathBundle {
        grid,
        brownian,
        volterra,
        model: model.clone(),
        seed,
    })
}

/// Covariance matrix R(t_i, t_j) on the interior nodes t_1..t_n.
///
/// The stationary family uses the closed form; the others integrate the
/// kernel product at a reduced panel count, where factorization error
/// dominates quadrature error anyway.
pub fn covariance_matrix(model: &KernelModel, grid: UniformGrid) -> Result<Vec<f64>> {
    let n = grid.intervals();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (t, s) = (grid.node(i + 1), grid.node(j + 1));
            let r = match model.family() {
                KernelFamily::StationaryFbm => covariance_fbm_closed(model.hurst(), t, s)?,
                _ => covariance_with_panels(model, t, s, 256)?,
            };
            m[i * n + j] = r;
            m[j * n + i] = r;
        }
    }
    Ok(m)
}

/// One exact draw of (X(t_1), …, X(t_n)) from the model covariance, with
/// X(t_0) = 0 prepended.
///
/// The factorization escalates a diagonal jitter (1e-12·trace/n, ×10 per
/// retry, up to 1e-6·trace/n): the covariance is positive semidefinite in
/// exact arithmetic but quadrature error can push small eigenvalues negative.
pub fn sample_volterra_exact(
    model: &KernelModel,
    grid: UniformGrid,
    seed: RngSeed,
) -> Result<SampledFunction> {
    let cov = covariance_matrix(model, grid)?;
    sample_gaussian_with_cov(&cov, grid, seed)
}

/// Draw from a given covariance matrix on the interior nodes of `grid`.
pub fn sample_gaussian_with_cov(
    cov: &[f64],
    grid: UniformGrid,
    seed: RngSeed,
) -> Result<SampledFunction> {
    let n = grid.intervals();
    let chol = cholesky_with_jitter(cov, n)?;
    let mut rng = seed.rng();
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut values = vec![0.0; n + 1];
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..=i {
            acc += chol[i * n + k] * z[k];
        }
        values[i + 1] = acc;
    }
    SampledFunction::new(grid, values)
}

/// Cholesky factor with the escalating-jitter ladder.
pub fn cholesky_with_jitter(cov: &[f64], n: usize) -> Result<Vec<f64>> {
    let trace: f64 = (0..n).map(|i| cov[i * n + i]).sum();
    let base = trace / n as f64;
    if let Some(l) = cholesky_lower(cov, n) {
        return Ok(l);
    }
    let mut jitter = 1e-12 * base;
    let cap = 1e-6 * base;
    while jitter <= cap * (1.0 + 1e-12) {
        let mut m = cov.to_vec();
        for i in 0..n {
            m[i * n + i] += jitter;
        }
        if let Some(l) = cholesky_lower(&m, n) {
            return Ok(l);
        }
        jitter *= 10.0;
    }
    Err(VolterraError::Sampling(format!(
        "covariance factorization failed after maximal jitter {cap:.3e}"
    )))
}

/// Run `f` over the streams `0..count` under `master`, with up to `workers`
/// threads. Results are returned indexed by stream, so any reduction done in
/// that order is identical for every worker count.
pub fn map_streams<T, F>(master: u64, count: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RngSeed) -> T + Sync,
{
    let workers = workers.max(1);
    if workers == 1 || count <= 1 {
        return (0..count).map(|s| f(RngSeed::new(master, s))).collect();
    }
    let mut out: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let chunk = count.div_ceil(workers as u64);
    std::thread::scope(|scope| {
        for (w, slot) in out.chunks_mut(chunk as usize).enumerate() {
            let f = &f;
            let start = w as u64 * chunk;
            scope.spawn(move || {
                for (off, cell) in slot.iter_mut().enumerate() {
                    *cell = Some(f(RngSeed::new(master, start + off as u64)));
                }
            });
        }
    });
    out.into_iter().map(|x| x.expect("worker filled slot")).collect()
}
