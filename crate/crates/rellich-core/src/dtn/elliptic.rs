//! Terrain-following finite-difference backend.
//!
//! The change of variables `s = y - h(x)` maps the region below the graph
//! to the strip `-depth < s < 0` and turns the Laplace equation into the
//! divergence-form problem
//!
//! ```text
//! div(A grad psi) = 0,   A = [ I        -grad h          ]
//!                            [ -grad h^T  1 + |grad h|^2 ]
//! ```
//!
//! discretized with second-order centered differences, periodic in x,
//! Dirichlet data on s = 0 and the configured condition at s = -depth.
//! The truncation commits an O(e^{-depth}) error on top of the O(dx^2)
//! discretization error. The system is solved by BiCGStab preconditioned
//! with the constant-coefficient operator, which is inverted exactly by
//! FFT in x and tridiagonal solves in s.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::SampledField;
use crate::par;
use crate::spectral;
use crate::surface::SurfaceGeometry;

use super::{BackendTag, BoundaryTraces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BottomCondition {
    ZeroDirichlet,
    ZeroNeumann,
}

/// Configuration of the strip truncation and vertical resolution.
#[derive(Debug, Clone, Copy)]
pub struct EllipticConfig {
    /// Truncation depth; >= 2*pi recommended so the neglected tail decays
    /// below e^{-2*pi}.
    pub depth: f64,
    /// Number of vertical intervals.
    pub ny: usize,
    pub bottom: BottomCondition,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self {
            depth: crate::field::TWO_PI,
            ny: 128,
            bottom: BottomCondition::ZeroNeumann,
        }
    }
}

impl EllipticConfig {
    fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0) {
            return Err(CoreError::InvalidParameter("depth must be positive".into()));
        }
        if self.ny < 4 {
            return Err(CoreError::InvalidParameter("ny must be at least 4".into()));
        }
        Ok(())
    }
}

/// Boundary traces by the finite-difference backend (d in {1, 2}).
///
/// `B = psi_s` on the surface is extracted with a second-order one-sided
/// difference; `V = grad zeta - B grad h` then follows from the chain rule
/// (psi on the surface row is the Dirichlet data itself).
pub fn dtn_elliptic(
    s: &SurfaceGeometry,
    zeta: &SampledField,
    cfg: &EllipticConfig,
) -> Result<BoundaryTraces> {
    cfg.validate()?;
    if zeta.grid() != s.grid() {
        return Err(CoreError::GridMismatch(
            "zeta does not live on the surface grid".into(),
        ));
    }

    let problem = StripProblem::new(s, cfg)?;
    let psi = problem.solve(zeta)?;

    // One-sided second-order derivative at the top row (j = ny):
    // psi_s = (3 psi_ny - 4 psi_{ny-1} + psi_{ny-2}) / (2 ds).
    let nh = problem.nh;
    let ny = problem.ny;
    let ds = problem.ds;
    let mut b_vals = vec![0.0f64; nh];
    for i in 0..nh {
        let top = zeta.values()[i];
        let below = psi[(ny - 1) * nh + i];
        let below2 = psi[(ny - 2) * nh + i];
        b_vals[i] = (3.0 * top - 4.0 * below + below2) / (2.0 * ds);
    }
    let b = SampledField::new(s.grid().clone(), b_vals)?;

    // g = B - grad h . V with V = grad zeta - B grad h, i.e.
    // g = (1 + |grad h|^2) B - grad h . grad zeta.
    let mut g_vals = vec![0.0f64; nh];
    let grad_zeta: Vec<SampledField> = (0..s.dim())
        .map(|axis| spectral::derivative(zeta, axis))
        .collect::<Result<_>>()?;
    for i in 0..nh {
        let mut grad_sq = 0.0;
        let mut dot = 0.0;
        for (gh, gz) in s.grad_h().iter().zip(&grad_zeta) {
            grad_sq += gh.values()[i] * gh.values()[i];
            dot += gh.values()[i] * gz.values()[i];
        }
        g_vals[i] = (1.0 + grad_sq) * b.values()[i] - dot;
    }
    let g_zeta = SampledField::new(s.grid().clone(), g_vals)?;

    BoundaryTraces::assemble(s.clone(), zeta.clone(), g_zeta, BackendTag::Fd)
}

/// Discrete strip problem with precomputed coefficients.
///
/// Unknowns are the rows j = j0..ny-1 where j0 = 0 for a Neumann bottom
/// (mirror ghost) and j = 1 for a Dirichlet bottom; the row j = ny is the
/// Dirichlet surface row, eliminated into the right-hand side.
struct StripProblem {
    nh: usize,
    ny: usize,
    j0: usize,
    ds: f64,
    dx: Vec<f64>,
    sizes: Vec<usize>,
    /// 1 + |grad h|^2 per horizontal node.
    a_coef: Vec<f64>,
    /// -dh/dx_axis per horizontal node, per axis.
    b_coef: Vec<Vec<f64>>,
    bottom: BottomCondition,
    precond: SpectralPreconditioner,
}

impl StripProblem {
    fn new(s: &SurfaceGeometry, cfg: &EllipticConfig) -> Result<Self> {
        let grid = s.grid();
        let nh = grid.len();
        let ny = cfg.ny;
        let ds = cfg.depth / ny as f64;
        let dx: Vec<f64> = (0..grid.dim()).map(|axis| grid.spacing(axis)).collect();
        let sizes = grid.sizes().to_vec();

        let mut a_coef = vec![1.0f64; nh];
        for gh in s.grad_h() {
            for (a, &v) in a_coef.iter_mut().zip(gh.values()) {
                *a += v * v;
            }
        }
        let b_coef: Vec<Vec<f64>> = s
            .grad_h()
            .iter()
            .map(|gh| gh.values().iter().map(|&v| -v).collect())
            .collect();

        let j0 = match cfg.bottom {
            BottomCondition::ZeroNeumann => 0,
            BottomCondition::ZeroDirichlet => 1,
        };

        let a_mean = a_coef.iter().sum::<f64>() / nh as f64;
        let precond =
            SpectralPreconditioner::new(&sizes, &dx, ny, j0, ds, a_mean, cfg.bottom);

        Ok(Self {
            nh,
            ny,
            j0,
            ds,
            dx,
            sizes,
            a_coef,
            b_coef,
            bottom: cfg.bottom,
            precond,
        })
    }

    fn rows(&self) -> usize {
        self.ny - self.j0
    }

    fn unknowns(&self) -> usize {
        self.rows() * self.nh
    }

    /// Solve for psi on rows j0..ny-1 given the surface Dirichlet data;
    /// returns the full field including the bottom ghost handling, laid out
    /// as psi[j * nh + i] for j = 0..ny (row ny = data).
    fn solve(&self, zeta: &SampledField) -> Result<Vec<f64>> {
        let n = self.unknowns();

        // Right-hand side: move the known surface row across the interface.
        let mut rhs = vec![0.0f64; n];
        {
            let j = self.ny - 1; // unknown row adjacent to the surface
            let row = (j - self.j0) * self.nh;
            for i in 0..self.nh {
                // Vertical flux through s = 0 from the Dirichlet value.
                rhs[row + i] -= self.a_coef[i] * zeta.values()[i] / (self.ds * self.ds);
            }
            // Cross-derivative contributions that touch the surface row.
            for (axis, b) in self.b_coef.iter().enumerate() {
                let scale = 1.0 / (4.0 * self.dx[axis] * self.ds);
                for i in 0..self.nh {
                    let (ip, im) = self.horizontal_neighbors(i, axis);
                    // term D_x(b psi_s): b(x +- dx) psi(x +- dx, s + ds)
                    rhs[row + i] -= scale * (b[ip] * zeta.values()[ip] - b[im] * zeta.values()[im]);
                    // term D_s(b psi_x): b(x) [psi_x at s + ds]
                    rhs[row + i] -=
                        scale * (b[i] * (zeta.values()[ip] - zeta.values()[im]));
                }
            }
        }

        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rhs_norm == 0.0 {
            let mut full = vec![0.0f64; (self.ny + 1) * self.nh];
            full[self.ny * self.nh..].copy_from_slice(zeta.values());
            return Ok(full);
        }

        let x = bicgstab(
            |v, out| self.apply(v, out),
            |v, out| self.precond.apply_inv(v, out),
            &rhs,
            1e-11,
            20_000,
        )?;

        let mut full = vec![0.0f64; (self.ny + 1) * self.nh];
        full[self.j0 * self.nh..self.ny * self.nh].copy_from_slice(&x);
        full[self.ny * self.nh..].copy_from_slice(zeta.values());
        if self.j0 == 1 {
            // Dirichlet bottom row is identically zero; already in place.
        }
        Ok(full)
    }

    #[inline]
    fn horizontal_neighbors(&self, i: usize, axis: usize) -> (usize, usize) {
        match self.sizes.len() {
            1 => {
                let m = self.sizes[0];
                ((i + 1) % m, (i + m - 1) % m)
            }
            2 => {
                let (m1, m2) = (self.sizes[0], self.sizes[1]);
                let (r, c) = (i / m2, i % m2);
                if axis == 0 {
                    (((r + 1) % m1) * m2 + c, ((r + m1 - 1) % m1) * m2 + c)
                } else {
                    (r * m2 + (c + 1) % m2, r * m2 + (c + m2 - 1) % m2)
                }
            }
            _ => unreachable!(),
        }
    }

    /// Matrix-vector product of the discrete operator on the unknown rows.
    /// Each output entry is computed independently, so the parallel and
    /// sequential paths agree bitwise.
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let nh = self.nh;
        let rows = self.rows();
        let results = par::map_indexed(rows * nh, |idx| {
            let jr = idx / nh; // row index within unknowns
            let i = idx % nh;
            let j = jr + self.j0; // physical vertical index
            let ds2 = self.ds * self.ds;

            let at = |jj: isize, ii: usize| -> f64 {
                // psi at physical row jj (0..ny-1 unknown, ny Dirichlet=0 here,
                // -1 ghost for Neumann bottom, 0 Dirichlet bottom = 0).
                if jj == self.ny as isize {
                    0.0 // surface contribution already on the RHS
                } else if jj < self.j0 as isize {
                    match self.bottom {
                        BottomCondition::ZeroDirichlet => 0.0,
                        BottomCondition::ZeroNeumann => {
                            // mirror ghost: psi(-1) = psi(1)
                            let mirrored = -jj; // jj = -1 -> 1
                            v[(mirrored as usize - self.j0) * nh + ii]
                        }
                    }
                } else {
                    v[(jj as usize - self.j0) * nh + ii]
                }
            };

            let center = v[idx];
            let mut acc = 0.0;

            // Horizontal Laplacian (coefficient 1 per axis).
            for (axis, &dxa) in self.dx.iter().enumerate() {
                let (ip, im) = self.horizontal_neighbors(i, axis);
                acc += (at(j as isize, ip) - 2.0 * center + at(j as isize, im)) / (dxa * dxa);
            }

            // Vertical term with coefficient a(x) = 1 + |grad h|^2.
            acc += self.a_coef[i]
                * (at(j as isize + 1, i) - 2.0 * center + at(j as isize - 1, i))
                / ds2;

            // Cross terms D_x(b psi_s) + D_s(b psi_x), centered.
            for (axis, b) in self.b_coef.iter().enumerate() {
                let scale = 1.0 / (4.0 * self.dx[axis] * self.ds);
                let (ip, im) = self.horizontal_neighbors(i, axis);
                let js = j as isize;
                // D_x(b psi_s)
                acc += scale
                    * (b[ip] * (at(js + 1, ip) - at(js - 1, ip))
                        - b[im] * (at(js + 1, im) - at(js - 1, im)));
                // D_s(b psi_x) = b D_s D_x psi (b depends on x only)
                acc += scale
                    * b[i]
                    * (at(js + 1, ip) - at(js + 1, im) - at(js - 1, ip) + at(js - 1, im));
            }

            acc
        });
        out.copy_from_slice(&results);
    }
}

/// Exact inverse of the constant-coefficient part
/// `Lap_x + a_mean d_ss` with the same boundary rows, used as a
/// preconditioner: FFT along the horizontal axes, then a real tridiagonal
/// solve per horizontal mode.
struct SpectralPreconditioner {
    sizes: Vec<usize>,
    nh: usize,
    rows: usize,
    /// Symbol of the horizontal Laplacian per horizontal node (negative).
    lambda: Vec<f64>,
    /// Vertical stencil scale a_mean / ds^2.
    vert: f64,
    bottom: BottomCondition,
}

impl SpectralPreconditioner {
    fn new(
        sizes: &[usize],
        dx: &[f64],
        ny: usize,
        j0: usize,
        ds: f64,
        a_mean: f64,
        bottom: BottomCondition,
    ) -> Self {
        let nh: usize = sizes.iter().product();
        // Discrete symbol of the centered second difference:
        // -4 sin^2(pi k / M) / dx^2 along each axis.
        let mut lambda = vec![0.0f64; nh];
        match sizes.len() {
            1 => {
                let m = sizes[0];
                for (k, l) in lambda.iter_mut().enumerate() {
                    let s = (std::f64::consts::PI * k as f64 / m as f64).sin();
                    *l = -4.0 * s * s / (dx[0] * dx[0]);
                }
            }
            2 => {
                let (m1, m2) = (sizes[0], sizes[1]);
                for k1 in 0..m1 {
                    let s1 = (std::f64::consts::PI * k1 as f64 / m1 as f64).sin();
                    for k2 in 0..m2 {
                        let s2 = (std::f64::consts::PI * k2 as f64 / m2 as f64).sin();
                        lambda[k1 * m2 + k2] =
                            -4.0 * s1 * s1 / (dx[0] * dx[0]) - 4.0 * s2 * s2 / (dx[1] * dx[1]);
                    }
                }
            }
            _ => unreachable!(),
        }
        Self {
            sizes: sizes.to_vec(),
            nh,
            rows: ny - j0,
            lambda,
            vert: a_mean / (ds * ds),
            bottom,
        }
    }

    fn apply_inv(&self, v: &[f64], out: &mut [f64]) {
        let nh = self.nh;
        let rows = self.rows;

        // Forward FFT of every row (horizontal slice).
        let mut hat: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for r in 0..rows {
            let slice = &mut hat[r * nh..(r + 1) * nh];
            fft_all_axes(slice, &self.sizes, true);
        }

        // Per-mode tridiagonal solve along the vertical direction:
        // vert * (psi_{j+1} - 2 psi_j + psi_{j-1}) + lambda_k psi_j = rhs_j
        // with the same boundary closure as the full operator.
        let solved = par::map_indexed(nh, |k| {
            let lam = self.lambda[k];
            let mut diag = vec![lam - 2.0 * self.vert; rows];
            let mut lower = vec![self.vert; rows]; // lower[j] multiplies psi_{j-1}
            let mut upper = vec![self.vert; rows]; // upper[j] multiplies psi_{j+1}
            match self.bottom {
                BottomCondition::ZeroNeumann => {
                    // mirror ghost doubles the coupling upward at the bottom row
                    upper[0] = 2.0 * self.vert;
                }
                BottomCondition::ZeroDirichlet => {}
            }
            lower[0] = 0.0;
            upper[rows - 1] = 0.0; // surface row handled via the RHS

            let mut rhs: Vec<Complex64> = (0..rows).map(|r| hat[r * nh + k]).collect();

            // Thomas algorithm with complex RHS, real matrix.
            for j in 1..rows {
                let w = lower[j] / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                let prev = rhs[j - 1];
                rhs[j] -= prev * w;
            }
            rhs[rows - 1] /= diag[rows - 1];
            for j in (0..rows - 1).rev() {
                let next = rhs[j + 1];
                rhs[j] = (rhs[j] - next * upper[j]) / diag[j];
            }
            rhs
        });
        for (k, col) in solved.iter().enumerate() {
            for (r, &val) in col.iter().enumerate() {
                hat[r * nh + k] = val;
            }
        }

        for r in 0..rows {
            let slice = &mut hat[r * nh..(r + 1) * nh];
            fft_all_axes(slice, &self.sizes, false);
        }
        let scale = 1.0 / nh as f64;
        for (o, c) in out.iter_mut().zip(&hat) {
            *o = c.re * scale;
        }
    }
}

fn fft_all_axes(buf: &mut [Complex64], sizes: &[usize], forward: bool) {
    // Reuses the plan cache in `spectral` through a small shim.
    spectral::fft_axes_raw(buf, sizes, forward);
}

/// Unpreconditioned residual BiCGStab with a right preconditioner supplied
/// as a closure. Deterministic: all reductions are sequential.
fn bicgstab(
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = rhs.len();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let norm = |a: &[f64]| -> f64 { dot(a, a).sqrt() };

    let rhs_norm = norm(rhs);
    let target = rel_tol * rhs_norm;

    let mut x = vec![0.0f64; n];
    let mut r = rhs.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0f64; n];
    let mut p = vec![0.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut z = vec![0.0f64; n];
    let mut s = vec![0.0f64; n];
    let mut t = vec![0.0f64; n];

    let mut res_norm = rhs_norm;
    for iter in 0..max_iter {
        if res_norm <= target {
            return Ok(x);
        }
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut y);
        apply(&y, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= target {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok(x);
        }
        precond(&s, &mut z);
        apply(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res_norm = norm(&r);
        if omega.abs() < 1e-300 {
            break;
        }
        let _ = iter;
    }

    if res_norm <= target {
        Ok(x)
    } else {
        Err(CoreError::SolverStalled {
            residual: res_norm / rhs_norm.max(f64::MIN_POSITIVE),
            iterations: max_iter,
        })
    }
}
