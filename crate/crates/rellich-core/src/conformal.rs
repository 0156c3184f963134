//! Boundary trace of the periodic Riemann map from the lower half-plane
//! onto the region below the graph (d = 1 only).
//!
//! The boundary correspondence is `Z(alpha) = alpha + u(alpha) + i v(alpha)`
//! where the periodic correction `u + iv` extends holomorphically to the
//! lower half-plane. On the boundary this forces `u = H(v - mean v)`, and
//! the graph condition `v = h(alpha + u)` closes the system; the solver
//! iterates this conjugate-function relation with under-relaxation.

use crate::error::{CoreError, Result};
use crate::field::{PeriodicGrid, SampledField};
use crate::spectral;
use crate::surface::SurfaceGeometry;

/// Parameters of the fixed-point solve.
#[derive(Debug, Clone, Copy)]
pub struct TheodorsenParams {
    pub tol: f64,
    pub max_iter: usize,
    /// Under-relaxation factor in (0, 1].
    pub relax: f64,
}

impl Default for TheodorsenParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 400,
            relax: 0.5,
        }
    }
}

/// Converged boundary correspondence and its derived quantities.
///
/// All fields live on the uniform alpha-grid. `jac = |Z_alpha|` and
/// `g = Im log Z_alpha = atan2(v_alpha, x_alpha)`.
#[derive(Debug, Clone)]
pub struct ConformalBoundary {
    alpha_grid: PeriodicGrid,
    u: SampledField,
    v: SampledField,
    x_alpha: SampledField,
    v_alpha: SampledField,
    jac: SampledField,
    g: SampledField,
    /// alpha(x_j) on the uniform x-grid, for pushing alpha-side fields back.
    alpha_of_x: SampledField,
    residual: f64,
    iterations: usize,
}

impl ConformalBoundary {
    pub fn alpha_grid(&self) -> &PeriodicGrid {
        &self.alpha_grid
    }

    /// Periodic part of Re Z, so that `x(alpha) = alpha + u(alpha)`.
    pub fn u(&self) -> &SampledField {
        &self.u
    }

    /// Im Z = y(alpha) on the boundary.
    pub fn v(&self) -> &SampledField {
        &self.v
    }

    pub fn x_alpha(&self) -> &SampledField {
        &self.x_alpha
    }

    pub fn v_alpha(&self) -> &SampledField {
        &self.v_alpha
    }

    /// |Z_alpha|.
    pub fn jac(&self) -> &SampledField {
        &self.jac
    }

    /// Angle of Z_alpha, in (-pi/2, pi/2) for a graph boundary.
    pub fn g(&self) -> &SampledField {
        &self.g
    }

    pub fn alpha_of_x(&self) -> &SampledField {
        &self.alpha_of_x
    }

    /// Final sup-norm fixed-point defect.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// x(alpha_j) at the grid nodes.
    pub fn x_of_alpha(&self) -> SampledField {
        let m = self.alpha_grid.size(0);
        let values = self
            .u
            .values()
            .iter()
            .enumerate()
            .map(|(j, &u)| crate::field::TWO_PI * j as f64 / m as f64 + u)
            .collect();
        SampledField::new(self.alpha_grid.clone(), values).expect("finite")
    }

    /// Range [min, max] of |Z_alpha| (diagnostic bounds c1, c2).
    pub fn jac_bounds(&self) -> (f64, f64) {
        self.jac
            .values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Solve the boundary correspondence for the surface `s` by the
/// conjugate-function fixed point `u <- (1-relax) u + relax H(h(id+u) - mean)`.
///
/// Fails if the iteration does not reach `tol` within `max_iter` steps or if
/// any iterate loses monotonicity (`x_alpha <= 0` somewhere).
pub fn theodorsen_solve(s: &SurfaceGeometry, params: TheodorsenParams) -> Result<ConformalBoundary> {
    if s.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: s.dim(),
        });
    }
    if !(params.tol > 0.0) {
        return Err(CoreError::InvalidParameter("tol must be positive".into()));
    }
    if !(params.relax > 0.0 && params.relax <= 1.0) {
        return Err(CoreError::InvalidParameter(
            "relax must lie in (0, 1]".into(),
        ));
    }

    let grid = s.grid().clone();
    let m = grid.size(0);
    let nodes = grid.coords(0);
    let h_spec = spectral::analyze(s.h());

    let mut u = vec![0.0f64; m];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for iter in 0..params.max_iter {
        iterations = iter + 1;

        let x_pts: Vec<f64> = nodes.iter().zip(&u).map(|(&a, &uu)| a + uu).collect();
        let v_vals = spectral::eval_trig_spectrum(&h_spec, &x_pts);
        let v = SampledField::new(grid.clone(), v_vals)?;
        let v_mean = v.mean();
        let target = spectral::hilbert(&v.map(|y| y - v_mean)?)?;

        residual = u
            .iter()
            .zip(target.values())
            .fold(0.0f64, |acc, (&a, &b)| acc.max((a - b).abs()));

        let relax = params.relax;
        for (ui, &ti) in u.iter_mut().zip(target.values()) {
            *ui = (1.0 - relax) * *ui + relax * ti;
        }

        // Monotonicity of alpha -> alpha + u(alpha) at this iterate.
        let u_field = SampledField::new(grid.clone(), u.clone())?;
        let du = spectral::derivative(&u_field, 0)?;
        let min_slope = du.values().iter().fold(f64::INFINITY, |a, &v| a.min(1.0 + v));
        if min_slope <= 0.0 {
            return Err(CoreError::NonMonotone { min_slope });
        }

        if residual <= params.tol {
            break;
        }
    }

    if residual > params.tol {
        return Err(CoreError::NoConvergence {
            residual,
            iterations,
        });
    }

    let u = SampledField::new(grid.clone(), u)?;
    let x_pts: Vec<f64> = nodes.iter().zip(u.values()).map(|(&a, &uu)| a + uu).collect();
    let v = SampledField::new(grid.clone(), spectral::eval_trig_spectrum(&h_spec, &x_pts))?;

    let u_alpha = spectral::derivative(&u, 0)?;
    let x_alpha = u_alpha.map(|du| 1.0 + du)?;
    let v_alpha = spectral::derivative(&v, 0)?;
    let jac = x_alpha.zip(&v_alpha, |xa, va| (xa * xa + va * va).sqrt())?;
    let g = v_alpha.zip(&x_alpha, |va, xa| va.atan2(xa))?;

    let x_of_alpha = SampledField::new(grid.clone(), x_pts)?;
    let alpha_of_x = spectral::invert_monotone_circle_map(&x_of_alpha)?;

    Ok(ConformalBoundary {
        alpha_grid: grid,
        u,
        v,
        x_alpha,
        v_alpha,
        jac,
        g,
        alpha_of_x,
        residual,
        iterations,
    })
}

/// Resample a field given on the x-grid to the alpha-grid:
/// `(pullback f)(alpha) = f(x(alpha))` via trigonometric interpolation.
pub fn pullback(cb: &ConformalBoundary, f_on_x: &SampledField) -> Result<SampledField> {
    f_on_x.require_dim(1)?;
    if f_on_x.grid() != cb.alpha_grid() {
        return Err(CoreError::GridMismatch(
            "pullback input must live on the solver grid".into(),
        ));
    }
    let x = cb.x_of_alpha();
    let vals = spectral::eval_trig(f_on_x, x.values())?;
    SampledField::new(cb.alpha_grid().clone(), vals)
}

/// Inverse resampling: a field on the alpha-grid evaluated at alpha(x_j).
pub fn pushforward(cb: &ConformalBoundary, f_on_alpha: &SampledField) -> Result<SampledField> {
    f_on_alpha.require_dim(1)?;
    if f_on_alpha.grid() != cb.alpha_grid() {
        return Err(CoreError::GridMismatch(
            "pushforward input must live on the solver grid".into(),
        ));
    }
    let vals = spectral::eval_trig(f_on_alpha, cb.alpha_of_x().values())?;
    SampledField::new(cb.alpha_grid().clone(), vals)
}
