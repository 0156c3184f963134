//! Spectral operators on periodic fields: derivatives, the periodic Hilbert
//! transform, |D|, quadrature, norms and trigonometric interpolation.
//!
//! All Fourier-multiplier operators act exactly on the resolved band. For
//! even grids the Nyquist mode of every odd-symbol operator (derivative,
//! Hilbert, |D|) is set to zero so that real fields map to real fields.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{CoreError, Result};
use crate::field::{SampledField, Spectrum, TWO_PI};
#[cfg(test)]
use crate::field::PeriodicGrid;

// Plans are cheap to build but reusable; the cache is keyed by
// (length, direction) and shared across threads.
static FFT_CACHE: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = FFT_CACHE.lock().unwrap();
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let direction = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(len, direction)
        })
        .clone()
}

fn fft_axis(buf: &mut [Complex64], sizes: &[usize], axis: usize, forward: bool) {
    match sizes.len() {
        1 => plan(sizes[0], forward).process(buf),
        2 => {
            let (m1, m2) = (sizes[0], sizes[1]);
            if axis == 1 {
                let fft = plan(m2, forward);
                for row in buf.chunks_exact_mut(m2) {
                    fft.process(row);
                }
            } else {
                let fft = plan(m1, forward);
                let mut col = vec![Complex64::default(); m1];
                for j in 0..m2 {
                    for i in 0..m1 {
                        col[i] = buf[i * m2 + j];
                    }
                    fft.process(&mut col);
                    for i in 0..m1 {
                        buf[i * m2 + j] = col[i];
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Crate-internal access to the cached FFT plans: transform `buf` (laid out
/// row-major with the given axis sizes) along every axis, unscaled.
pub(crate) fn fft_axes_raw(buf: &mut [Complex64], sizes: &[usize], forward: bool) {
    for axis in 0..sizes.len() {
        fft_axis(buf, sizes, axis, forward);
    }
}

/// Forward transform to analysis-convention coefficients (`1/N` scaling).
pub fn analyze(f: &SampledField) -> Spectrum {
    let grid = f.grid().clone();
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for axis in 0..grid.dim() {
        fft_axis(&mut buf, grid.sizes(), axis, true);
    }
    let scale = 1.0 / grid.len() as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Spectrum::from_parts(grid, buf)
}

/// Inverse of [`analyze`]; imaginary round-off is discarded.
pub fn synthesize(s: &Spectrum) -> SampledField {
    let grid = s.grid().clone();
    let mut buf = s.coeffs().to_vec();
    for axis in 0..grid.dim() {
        fft_axis(&mut buf, grid.sizes(), axis, false);
    }
    let values = buf.iter().map(|c| c.re).collect();
    SampledField::new(grid, values).expect("synthesized field is finite")
}

/// Apply a Fourier multiplier `sym(n)` (indexed by signed wavenumbers per
/// axis) and synthesize back to a real field.
fn apply_multiplier(f: &SampledField, sym: impl Fn(&[i64]) -> Complex64) -> SampledField {
    let mut spec = analyze(f);
    let grid = spec.grid().clone();
    match grid.dim() {
        1 => {
            let m = grid.size(0);
            for (bin, c) in spec.coeffs_mut().iter_mut().enumerate() {
                *c *= sym(&[grid_wavenumber(m, bin)]);
            }
        }
        2 => {
            let (m1, m2) = (grid.size(0), grid.size(1));
            for (idx, c) in spec.coeffs_mut().iter_mut().enumerate() {
                let n = [grid_wavenumber(m1, idx / m2), grid_wavenumber(m2, idx % m2)];
                *c *= sym(&n);
            }
        }
        _ => unreachable!(),
    }
    synthesize(&spec)
}

fn grid_wavenumber(m: usize, bin: usize) -> i64 {
    if bin <= m / 2 {
        bin as i64
    } else {
        bin as i64 - m as i64
    }
}

/// Spectral partial derivative along `axis`. Exact on the resolved band;
/// the Nyquist mode of the derivative is zeroed.
pub fn derivative(f: &SampledField, axis: usize) -> Result<SampledField> {
    let dim = f.grid().dim();
    if axis >= dim {
        return Err(CoreError::AxisOutOfRange { axis, dim });
    }
    let nyquist = f.grid().size(axis) as i64 / 2;
    Ok(apply_multiplier(f, |n| {
        if n[axis].abs() == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, n[axis] as f64)
        }
    }))
}

/// Periodic Hilbert transform, multiplier `-i*sgn(n)` with `sgn(0) = 0`
/// (Nyquist zeroed as for every odd symbol).
pub fn hilbert(f: &SampledField) -> Result<SampledField> {
    f.require_dim(1)?;
    let nyquist = f.grid().size(0) as i64 / 2;
    Ok(apply_multiplier(f, |n| {
        if n[0] == 0 || n[0].abs() == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -n[0].signum() as f64)
        }
    }))
}

/// |D| = sqrt(-Laplacian), multiplier `|n|`; matches `hilbert(derivative(f))`
/// mode for mode, including the zeroed Nyquist.
pub fn abs_d(f: &SampledField) -> Result<SampledField> {
    f.require_dim(1)?;
    let nyquist = f.grid().size(0) as i64 / 2;
    Ok(apply_multiplier(f, |n| {
        if n[0].abs() == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(n[0].abs() as f64, 0.0)
        }
    }))
}

/// Trapezoid quadrature, `(2*pi)^d * mean(values)`; spectrally exact for
/// resolved bands.
pub fn integrate(f: &SampledField) -> f64 {
    f.mean() * TWO_PI.powi(f.grid().dim() as i32)
}

/// Weighted L^p norm `(integral |f|^p w dx)^(1/p)`; `w` defaults to 1.
pub fn lp_norm(f: &SampledField, p: f64, w: Option<&SampledField>) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let cell = f.grid().cell_measure();
    let sum = match w {
        None => f.values().iter().map(|&v| v.abs().powf(p)).sum::<f64>(),
        Some(w) => {
            f.check_same_grid(w)?;
            if let Some(idx) = w.values().iter().position(|&v| v < 0.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "weight is negative at flat index {idx}"
                )));
            }
            f.values()
                .iter()
                .zip(w.values())
                .map(|(&v, &wv)| v.abs().powf(p) * wv)
                .sum::<f64>()
        }
    };
    Ok((sum * cell).powf(1.0 / p))
}

/// Unweighted L^2 norm.
pub fn l2_norm(f: &SampledField) -> f64 {
    let cell = f.grid().cell_measure();
    (f.values().iter().map(|&v| v * v).sum::<f64>() * cell).sqrt()
}

/// Dual norm of the homogeneous H^1 seminorm on mean-zero functions:
/// `(2*pi * sum_{n != 0} |c(n)|^2 / n^2)^(1/2)` in the analysis convention,
/// calibrated so that `h_minus1_norm(derivative(g)) = ||g - mean g||_L2`.
pub fn h_minus1_norm(f: &SampledField) -> Result<f64> {
    f.require_dim(1)?;
    let l2 = l2_norm(f);
    let mean = f.mean();
    let limit = 1e-10 * l2;
    if mean.abs() > limit.max(f64::MIN_POSITIVE) {
        return Err(CoreError::NonZeroMean {
            mean,
            limit,
        });
    }
    let spec = analyze(f);
    let m = f.grid().size(0);
    let mut sum = 0.0;
    for (bin, c) in spec.coeffs().iter().enumerate() {
        let n = grid_wavenumber(m, bin);
        if n != 0 {
            sum += c.norm_sqr() / (n * n) as f64;
        }
    }
    Ok((TWO_PI * sum).sqrt())
}

/// Evaluate the band-limited trigonometric interpolant of `f` at arbitrary
/// points (d = 1). Exact at grid nodes; the Nyquist mode contributes as
/// `c * cos(M x / 2)`.
pub fn eval_trig(f: &SampledField, points: &[f64]) -> Result<Vec<f64>> {
    f.require_dim(1)?;
    let spec = analyze(f);
    Ok(eval_trig_spectrum(&spec, points))
}

/// Same as [`eval_trig`] but on a precomputed spectrum, for callers that
/// evaluate the same field repeatedly.
pub fn eval_trig_spectrum(spec: &Spectrum, points: &[f64]) -> Vec<f64> {
    let m = spec.grid().size(0);
    let half = m / 2;
    let coeffs = spec.coeffs();
    points
        .iter()
        .map(|&x| {
            // Accumulate c(0) + sum_{0<n<M/2} 2*Re(c(n) e^{inx}) + Nyquist.
            let rot = Complex64::from_polar(1.0, x);
            let mut z = Complex64::new(1.0, 0.0);
            let mut acc = coeffs[0].re;
            for n in 1..half {
                z *= rot;
                acc += 2.0 * (coeffs[n] * z).re;
            }
            z *= rot;
            acc += coeffs[half].re * z.re;
            acc
        })
        .collect()
}

/// Invert the lifted circle map `x(alpha) = alpha + u(alpha)` given samples
/// of `x` on the uniform alpha-grid. Returns `alpha(x_j)` on the uniform
/// x-grid such that `x(alpha(x_j)) = x_j` to 1e-12, by safeguarded Newton
/// on the trigonometric interpolant.
pub fn invert_monotone_circle_map(x_of_alpha: &SampledField) -> Result<SampledField> {
    x_of_alpha.require_dim(1)?;
    let grid = x_of_alpha.grid().clone();
    let m = grid.size(0);

    // Periodic part u(alpha) = x(alpha) - alpha and its derivative.
    let u = SampledField::new(
        grid.clone(),
        x_of_alpha
            .values()
            .iter()
            .enumerate()
            .map(|(j, &x)| x - TWO_PI * j as f64 / m as f64)
            .collect(),
    )?;
    let u_spec = analyze(&u);
    let du = derivative(&u, 0)?;
    let du_spec = analyze(&du);

    // Monotonicity check on a 4x refined grid.
    let fine: Vec<f64> = (0..4 * m).map(|j| TWO_PI * j as f64 / (4 * m) as f64).collect();
    let du_fine = eval_trig_spectrum(&du_spec, &fine);
    let min_slope = du_fine.iter().fold(f64::INFINITY, |a, &v| a.min(1.0 + v));
    if min_slope <= 0.0 {
        return Err(CoreError::NonMonotone { min_slope });
    }

    // Rigorous sup bound for the interpolant: |u(alpha)| <= sum |c_n|.
    // The nodal max can undershoot the continuous extremum between nodes.
    let u_sup: f64 = u_spec.coeffs().iter().map(|c| c.norm()).sum();
    let tol = 1e-12;
    let mut alpha_vals = Vec::with_capacity(m);
    for j in 0..m {
        let target = TWO_PI * j as f64 / m as f64;
        // alpha + u(alpha) = target restricts alpha to [target - sup, target + sup].
        let mut lo = target - u_sup - 1e-12;
        let mut hi = target + u_sup + 1e-12;
        let mut alpha = target;
        let mut resid = f64::INFINITY;
        for _ in 0..200 {
            let uv = eval_trig_spectrum(&u_spec, &[alpha])[0];
            resid = alpha + uv - target;
            if resid.abs() <= tol {
                break;
            }
            if resid > 0.0 {
                hi = hi.min(alpha);
            } else {
                lo = lo.max(alpha);
            }
            let slope = 1.0 + eval_trig_spectrum(&du_spec, &[alpha])[0];
            let step = resid / slope;
            let mut next = alpha - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            alpha = next;
        }
        if resid.abs() > tol {
            return Err(CoreError::SolverStalled {
                residual: resid.abs(),
                iterations: 200,
            });
        }
        alpha_vals.push(alpha);
    }
    SampledField::new(grid, alpha_vals)
}
