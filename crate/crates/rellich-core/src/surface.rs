//! Geometry of the boundary graph: the profile h, its spectral gradient,
//! inclination angle, curvature and the surface-measure weight.

use crate::error::{CoreError, Result};
use crate::field::{FourierSpec, PeriodicGrid, SampledField};
use crate::spectral;

/// Immutable geometry derived from a graph profile `h`.
///
/// `omega = sqrt(1 + |grad h|^2)` is the surface-measure density
/// (`dsigma = omega dx`); the unit normal and tangent are
/// `N = (-grad h, 1)/omega` and, for d = 1, `T = (1, h_x)/omega`.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    grid: PeriodicGrid,
    h: SampledField,
    grad_h: Vec<SampledField>,
    omega: SampledField,
    theta: Option<SampledField>,
    kappa: Option<SampledField>,
}

impl SurfaceGeometry {
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn h(&self) -> &SampledField {
        &self.h
    }

    /// Per-axis spectral derivatives of h.
    pub fn grad_h(&self) -> &[SampledField] {
        &self.grad_h
    }

    /// Slope h_x (d = 1).
    pub fn h_x(&self) -> &SampledField {
        &self.grad_h[0]
    }

    /// Surface-measure density `sqrt(1 + |grad h|^2)`, >= 1 everywhere.
    pub fn omega(&self) -> &SampledField {
        &self.omega
    }

    /// Inclination angle `arctan(h_x)` (d = 1 only).
    pub fn theta(&self) -> Option<&SampledField> {
        self.theta.as_ref()
    }

    /// Signed curvature of the graph (d = 1 only).
    pub fn kappa(&self) -> Option<&SampledField> {
        self.kappa.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `|grad h|^2` as a field.
    pub fn grad_sq(&self) -> SampledField {
        let mut acc = vec![0.0; self.grid.len()];
        for g in &self.grad_h {
            for (a, &v) in acc.iter_mut().zip(g.values()) {
                *a += v * v;
            }
        }
        SampledField::new(self.grid.clone(), acc).expect("finite")
    }

    /// Largest slope magnitude `max |grad h|`.
    pub fn max_slope(&self) -> f64 {
        self.grad_sq()
            .values()
            .iter()
            .fold(0.0f64, |a, &v| a.max(v))
            .sqrt()
    }

    /// `theta_x = h_xx / (1 + h_x^2)` computed from the closed form (d = 1).
    pub fn theta_x(&self) -> Result<SampledField> {
        if self.dim() != 1 {
            return Err(CoreError::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            });
        }
        let h_xx = spectral::derivative(self.h_x(), 0)?;
        h_xx.zip(self.h_x(), |hxx, hx| hxx / (1.0 + hx * hx))
    }
}

/// Build the derived geometry from a sampled profile. Fails on non-finite
/// input; logs a warning when the trailing third of the spectrum carries
/// a non-negligible share of the energy (under-resolved profile).
pub fn build_surface(h: SampledField) -> Result<SurfaceGeometry> {
    let grid = h.grid().clone();

    check_resolution(&h);

    let grad_h: Vec<SampledField> = (0..grid.dim())
        .map(|axis| spectral::derivative(&h, axis))
        .collect::<Result<_>>()?;

    let mut omega_vals = vec![1.0f64; grid.len()];
    for g in &grad_h {
        for (w, &v) in omega_vals.iter_mut().zip(g.values()) {
            *w += v * v;
        }
    }
    for w in &mut omega_vals {
        *w = w.sqrt();
    }
    let omega = SampledField::new(grid.clone(), omega_vals)?;

    let (theta, kappa) = if grid.dim() == 1 {
        let theta = grad_h[0].map(|hx| hx.atan())?;
        let kappa = curvature_from_slope(&grad_h[0], &omega)?;
        (Some(theta), Some(kappa))
    } else {
        (None, None)
    };

    Ok(SurfaceGeometry {
        grid,
        h,
        grad_h,
        omega,
        theta,
        kappa,
    })
}

/// Build from a trigonometric-polynomial description.
pub fn build_surface_from_spec(spec: &FourierSpec, grid: &PeriodicGrid) -> Result<SurfaceGeometry> {
    build_surface(spec.sample(grid)?)
}

/// Flat surface h = 0.
pub fn flat_surface(grid: &PeriodicGrid) -> SurfaceGeometry {
    build_surface(SampledField::zeros(grid.clone())).expect("flat surface is well formed")
}

/// Curvature in divergence form, `kappa = d/dx (h_x / sqrt(1 + h_x^2))`.
///
/// The non-divergence form `h_xx / (1 + h_x^2)^(3/2)` is algebraically
/// identical and is used as a cross-check in the tests.
pub fn curvature(s: &SurfaceGeometry) -> Result<SampledField> {
    if s.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: s.dim(),
        });
    }
    curvature_from_slope(s.h_x(), s.omega())
}

fn curvature_from_slope(h_x: &SampledField, omega: &SampledField) -> Result<SampledField> {
    let flux = h_x.zip(omega, |hx, w| hx / w)?;
    spectral::derivative(&flux, 0)
}

fn check_resolution(h: &SampledField) {
    let spec = spectral::analyze(h);
    let total: f64 = spec.coeffs().iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return;
    }
    let mut tail = 0.0;
    match h.grid().dim() {
        1 => {
            let m = h.grid().size(0);
            for (bin, c) in spec.coeffs().iter().enumerate() {
                let n = h.grid().wavenumber(0, bin).unsigned_abs() as usize;
                if 3 * n >= m {
                    tail += c.norm_sqr();
                }
            }
        }
        2 => {
            let (m1, m2) = (h.grid().size(0), h.grid().size(1));
            for (idx, c) in spec.coeffs().iter().enumerate() {
                let n1 = h.grid().wavenumber(0, idx / m2).unsigned_abs() as usize;
                let n2 = h.grid().wavenumber(1, idx % m2).unsigned_abs() as usize;
                if 3 * n1 >= m1 || 3 * n2 >= m2 {
                    tail += c.norm_sqr();
                }
            }
        }
        _ => unreachable!(),
    }
    if tail > 1e-6 * total {
        log::warn!(
            "surface profile is marginally resolved: trailing third of the spectrum holds {:.2e} of the energy",
            tail / total
        );
    }
}
