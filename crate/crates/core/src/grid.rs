//! Uniform wavenumber axes and values sampled on them.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least two points, got {0}")]
    TooShort(usize),
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid is not uniform at index {index}: step {found} vs {expected}")]
    NotUniform { index: usize, found: f64, expected: f64 },
}

/// Uniform wavenumber axis `start + i * step`, `i in 0..len`, in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl WavenumberGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self, GridError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(GridError::BadStep(step));
        }
        if len < 2 {
            return Err(GridError::TooShort(len));
        }
        Ok(Self { start, step, len })
    }

    /// Grid from `start` to `stop` inclusive (rounded to the nearest whole step).
    pub fn span(start: f64, stop: f64, step: f64) -> Result<Self, GridError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(GridError::BadStep(step));
        }
        let n = ((stop - start) / step).round();
        if !(n >= 1.0) {
            return Err(GridError::TooShort(n.max(0.0) as usize + 1));
        }
        Self::new(start, step, n as usize + 1)
    }

    /// Recover a grid from explicit sample points, e.g. a column read from a file.
    ///
    /// Points must be strictly increasing with a constant step (relative tolerance 1e-6).
    pub fn from_points(points: &[f64]) -> Result<Self, GridError> {
        if points.len() < 2 {
            return Err(GridError::TooShort(points.len()));
        }
        let n = points.len();
        let step = (points[n - 1] - points[0]) / (n - 1) as f64;
        if !(step > 0.0) {
            return Err(GridError::BadStep(step));
        }
        for (i, w) in points.windows(2).enumerate() {
            let d = w[1] - w[0];
            if (d - step).abs() > 1e-6 * step {
                return Err(GridError::NotUniform { index: i + 1, found: d, expected: step });
            }
        }
        Self::new(points[0], step, n)
    }

    #[inline]
    pub fn start(&self) -> f64 {
        self.start
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn stop(&self) -> f64 {
        self.at(self.len - 1)
    }

    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.at(i))
    }

    /// Index range `[lo, hi)` of points lying in the closed interval `[a, b]`.
    pub fn index_range(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = ((a - self.start) / self.step).ceil().max(0.0) as usize;
        let hi = (((b - self.start) / self.step).floor() + 1.0).max(0.0) as usize;
        lo.min(self.len)..hi.min(self.len).max(lo.min(self.len))
    }

    /// Same axis, compared with a small tolerance on start and step.
    pub fn matches(&self, other: &Self) -> bool {
        self.len == other.len
            && (self.start - other.start).abs() <= 1e-9 * self.step.max(1e-300) * self.len as f64
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Values on a uniform wavenumber grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: WavenumberGrid,
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: WavenumberGrid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "spectrum length must match its grid");
        Self { grid, values }
    }

    pub fn zeros(grid: WavenumberGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Rectangle-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.step()
    }

    pub fn peak(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    }
}
