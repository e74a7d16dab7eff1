//! Uniform time grids and grid-sampled scalar functions.
//!
//! Every sampled object in the crate (Brownian paths, Volterra paths,
//! integrands, kernel slices) lives on a [`UniformGrid`]: a partition
//! `0 = t_0 < t_1 < … < t_n = T` with constant step `h = T/n`.

use crate::error::{Result, VolterraError};

/// A uniform partition of `[0, T]` into `n` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    n: usize,
    horizon: f64,
}

impl UniformGrid {
    /// Build a grid with `n >= 2` intervals over `[0, horizon]`, `horizon > 0`.
    pub fn new(n: usize, horizon: f64) -> Result<Self> {
        if n < 2 {
            return Err(VolterraError::Domain(format!(
                "grid needs at least 2 intervals, got {n}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(VolterraError::Domain(format!(
                "grid horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(Self { n, horizon })
    }

    /// Number of intervals `n`.
    pub fn intervals(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n + 1`.
    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    /// Terminal time `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Step `h = T/n`.
    pub fn step(&self) -> f64 {
        self.horizon / self.n as f64
    }

    /// Node `t_i = i·T/n`; `node(n)` is exactly `horizon`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        self.horizon * (i as f64 / self.n as f64)
    }

    /// Midpoint `τ_i` of the interval `[t_i, t_{i+1}]`.
    pub fn midpoint(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.horizon * ((i as f64 + 0.5) / self.n as f64)
    }

    /// All nodes as a vector.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the node equal to `t` (within a relative tolerance), if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.step();
        let i = x.round();
        if i < 0.0 || i > self.n as f64 {
            return None;
        }
        if (x - i).abs() <= 1e-9 * (self.n as f64).max(1.0) {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Coarsen by an integer factor that divides `n`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n % factor != 0 {
            return Err(VolterraError::Domain(format!(
                "coarsening factor {factor} does not divide n = {}",
                self.n
            )));
        }
        UniformGrid::new(self.n / factor, self.horizon)
    }
}

/// A scalar function sampled at the nodes of a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl SampledFunction {
    /// Wrap node values; the length must equal `grid.node_count()` and all
    /// entries must be finite.
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(VolterraError::Domain(format!(
                "expected {} node values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VolterraError::Numerical(
                "sampled values must be finite".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Sample a closure at every node.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: UniformGrid, f: F) -> Result<Self> {
        let values = (0..grid.node_count()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    /// The constant function.
    pub fn constant(grid: UniformGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.node_count()])
    }

    pub fn grid(&self) -> UniformGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Value of the piecewise-linear interpolant at the interval midpoint τ_i.
    pub fn midpoint_value(&self, i: usize) -> f64 {
        0.5 * (self.values[i] + self.values[i + 1])
    }

    /// Piecewise-linear interpolation at an arbitrary `t ∈ [0, T]`.
    pub fn interpolate(&self, t: f64) -> f64 {
        let h = self.grid.step();
        let x = (t / h).clamp(0.0, self.grid.intervals() as f64);
        let i = (x.floor() as usize).min(self.grid.intervals() - 1);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Restrict to the first `m` intervals (nodes `0..=m`).
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m < 2 || m > self.grid.intervals() {
            return Err(VolterraError::Domain(format!(
                "cannot truncate to {m} intervals"
            )));
        }
        let grid = UniformGrid::new(m, self.grid.node(m))?;
        SampledFunction::new(grid, self.values[..=m].to_vec())
    }

    /// Keep every `factor`-th node, producing a coarser sampled function.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let values = (0..=grid.intervals())
            .map(|i| self.values[i * factor])
            .collect();
        SampledFunction::new(grid, values)
    }
}
