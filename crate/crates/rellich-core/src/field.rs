//! Uniform periodic grids and real scalar fields sampled on them.
//!
//! Every axis covers one period `[0, 2*pi)` with an even number of nodes,
//! `x_j = 2*pi*j/M`. Fields are stored flat in row-major order (last axis
//! fastest).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Uniform sample grid on the d-torus, d in {1, 2}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicGrid {
    sizes: Vec<usize>,
}

impl PeriodicGrid {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > 2 {
            return Err(CoreError::InvalidParameter(format!(
                "grid dimension must be 1 or 2, got {}",
                sizes.len()
            )));
        }
        for &m in sizes {
            if m < 8 || m % 2 != 0 {
                return Err(CoreError::InvalidParameter(format!(
                    "axis size must be even and >= 8, got {m}"
                )));
            }
        }
        Ok(Self {
            sizes: sizes.to_vec(),
        })
    }

    pub fn line(m: usize) -> Result<Self> {
        Self::new(&[m])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, axis: usize) -> usize {
        self.sizes[axis]
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        TWO_PI / self.sizes[axis] as f64
    }

    /// Quadrature weight of a single node, `(2*pi)^d / N`.
    pub fn cell_measure(&self) -> f64 {
        TWO_PI.powi(self.dim() as i32) / self.len() as f64
    }

    /// Node coordinates along one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let m = self.sizes[axis];
        (0..m).map(|j| TWO_PI * j as f64 / m as f64).collect()
    }

    /// Coordinates of the node with flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.sizes.len() {
            1 => vec![TWO_PI * idx as f64 / self.sizes[0] as f64],
            2 => {
                let m2 = self.sizes[1];
                let (i, j) = (idx / m2, idx % m2);
                vec![
                    TWO_PI * i as f64 / self.sizes[0] as f64,
                    TWO_PI * j as f64 / m2 as f64,
                ]
            }
            _ => unreachable!(),
        }
    }

    /// Signed integer wavenumber for FFT bin `k` on `axis`.
    ///
    /// Bins `0..=M/2` map to `0..=M/2` (bin M/2 is the Nyquist mode), the
    /// rest to negative wavenumbers.
    pub fn wavenumber(&self, axis: usize, bin: usize) -> i64 {
        let m = self.sizes[axis];
        if bin <= m / 2 {
            bin as i64
        } else {
            bin as i64 - m as i64
        }
    }
}

/// Real scalar field sampled on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Result<Self> {
        let values = vec![value; grid.len()];
        Self::new(grid, values)
    }

    /// Sample a closure at the grid nodes. The closure receives the node
    /// coordinates (length d).
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|idx| f(&grid.point(idx))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Pointwise map; the output is revalidated for finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::new(self.grid.clone(), values)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid.sizes(),
                other.grid.sizes()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_dim(&self, expected: usize) -> Result<()> {
        if self.grid.dim() != expected {
            return Err(CoreError::DimensionMismatch {
                expected,
                got: self.grid.dim(),
            });
        }
        Ok(())
    }
}

/// Complex Fourier coefficients of a real field, analysis convention
/// `c(n) = (1/N) * sum_j f_j exp(-i n x_j)`, so `f = sum_n c(n) exp(i n x)`
/// over the resolved band and Parseval reads
/// `integral(f^2) = (2*pi)^d * sum |c(n)|^2`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub(crate) fn from_parts(grid: PeriodicGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), coeffs.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of wavenumber `n` (d = 1).
    pub fn coeff_1d(&self, n: i64) -> Complex64 {
        let m = self.grid.size(0) as i64;
        let bin = n.rem_euclid(m) as usize;
        self.coeffs[bin]
    }

    /// Largest deviation from conjugate symmetry, `max |c(-n) - conj(c(n))|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        match self.grid.dim() {
            1 => {
                let m = self.grid.size(0);
                for k in 0..m {
                    let neg = (m - k) % m;
                    worst = worst.max((self.coeffs[neg] - self.coeffs[k].conj()).norm());
                }
            }
            2 => {
                let (m1, m2) = (self.grid.size(0), self.grid.size(1));
                for k1 in 0..m1 {
                    for k2 in 0..m2 {
                        let n1 = (m1 - k1) % m1;
                        let n2 = (m2 - k2) % m2;
                        let a = self.coeffs[n1 * m2 + n2];
                        let b = self.coeffs[k1 * m2 + k2].conj();
                        worst = worst.max((a - b).norm());
                    }
                }
            }
            _ => unreachable!(),
        }
        worst
    }
}

/// A real trigonometric polynomial given by per-mode coefficients:
/// each entry contributes `cos_coeff * cos(k . x) + sin_coeff * sin(k . x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpec {
    pub modes: Vec<FourierMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    /// Integer wavevector, one entry per grid axis.
    #[serde(deserialize_with = "de_wavevector")]
    pub k: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

fn de_wavevector<'de, D>(de: D) -> std::result::Result<Vec<i64>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wavevector {
        Scalar(i64),
        Vector(Vec<i64>),
    }
    Ok(match Wavevector::deserialize(de)? {
        Wavevector::Scalar(n) => vec![n],
        Wavevector::Vector(v) => v,
    })
}

impl FourierSpec {
    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    /// Convenience constructor for d = 1 specs from `(k, cos, sin)` triples.
    pub fn line(modes: &[(i64, f64, f64)]) -> Self {
        Self {
            modes: modes
                .iter()
                .map(|&(k, cos, sin)| FourierMode {
                    k: vec![k],
                    cos,
                    sin,
                })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Evaluate the polynomial at a point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let phase: f64 = m.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                m.cos * phase.cos() + m.sin * phase.sin()
            })
            .sum()
    }

    /// Sample the polynomial on a grid.
    pub fn sample(&self, grid: &PeriodicGrid) -> Result<SampledField> {
        for m in &self.modes {
            if m.k.len() != grid.dim() {
                return Err(CoreError::DimensionMismatch {
                    expected: grid.dim(),
                    got: m.k.len(),
                });
            }
        }
        SampledField::from_fn(grid.clone(), |x| self.eval(x))
    }

    /// Largest mode magnitude along each axis, for resolution checks.
    pub fn max_wavenumber(&self) -> i64 {
        self.modes
            .iter()
            .flat_map(|m| m.k.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }
}
