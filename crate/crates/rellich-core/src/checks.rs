//! Identity residuals and inequality reports on computed boundary traces.
//!
//! Inequalities are normalized to the uniform convention
//! `ratio = lhs / (constant * rhs)` with `0/0 -> 0`, so `pass` always means
//! `ratio <= 1 + tol_rel`. Identity residuals are normalized by the
//! absolute mass of the integrand, since an absolute threshold would be
//! meaningless across scales.

use crate::conformal::ConformalBoundary;
use crate::dtn::{solve_traces, BackendSpec, BoundaryTraces};
use crate::error::{CoreError, Result};
use crate::field::{PeriodicGrid, SampledField};
use crate::spectral;
use crate::surface::SurfaceGeometry;

/// One inequality instance.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub name: &'static str,
    pub p: f64,
    pub lhs: f64,
    pub rhs_times_constant: f64,
    pub constant: f64,
    pub ratio: f64,
    pub pass: bool,
    pub tol_rel: f64,
}

impl InequalityReport {
    fn new(name: &'static str, p: f64, lhs: f64, rhs: f64, constant: f64, tol_rel: f64) -> Self {
        let rhs_times_constant = constant * rhs;
        let ratio = if lhs == 0.0 && rhs_times_constant == 0.0 {
            0.0
        } else {
            lhs / rhs_times_constant
        };
        let pass = ratio <= 1.0 + tol_rel;
        Self {
            name,
            p,
            lhs,
            rhs_times_constant,
            constant,
            ratio,
            pass,
            tol_rel,
        }
    }
}

/// One exact-identity instance; `normalized = |value| / max(scale, eps)`.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub name: &'static str,
    pub value: f64,
    pub scale: f64,
    pub normalized: f64,
    pub pass: bool,
    pub tol: f64,
}

impl IdentityReport {
    fn new(name: &'static str, value: f64, scale: f64, tol: f64) -> Self {
        let normalized = value.abs() / scale.max(f64::EPSILON);
        Self {
            name,
            value,
            scale,
            normalized,
            pass: normalized <= tol,
            tol,
        }
    }
}

/// Inequalities this laboratory can evaluate, named by what they bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// Normal-derivative trace in L2 against the weighted data gradient
    /// (constant 40).
    NormalL2,
    /// Full gradient trace in L2 (constant 41).
    GradientL2,
    /// Slope-weighted Dirichlet-to-Neumann image in L2 (constant 40).
    DtnWeightedL2,
    /// Plain L2 of the Dirichlet-to-Neumann image, slope-dependent constant
    /// `40 (1 + max|grad h|^2)^3`.
    DtnPlainL2,
    /// d = 1: weighted G(h) from the data slope (constant 4).
    DtnFromSlope,
    /// d = 1: weighted data slope from G(h) (constant 4).
    SlopeFromDtn,
    /// d = 1: G(h) of the curvature in the dual norm against the angle
    /// derivative (constant 2).
    CurvatureDual,
    /// d = 1, 1 < p <= 2: normal from tangential trace in weighted L^p;
    /// empirical constant (reported ratio).
    NormalLp,
    /// The mirrored L^p bound.
    TangentialLp,
}

impl Inequality {
    pub const ALL: [Inequality; 9] = [
        Inequality::NormalL2,
        Inequality::GradientL2,
        Inequality::DtnWeightedL2,
        Inequality::DtnPlainL2,
        Inequality::DtnFromSlope,
        Inequality::SlopeFromDtn,
        Inequality::CurvatureDual,
        Inequality::NormalLp,
        Inequality::TangentialLp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::NormalL2 => "normal_l2",
            Inequality::GradientL2 => "gradient_l2",
            Inequality::DtnWeightedL2 => "dtn_weighted_l2",
            Inequality::DtnPlainL2 => "dtn_plain_l2",
            Inequality::DtnFromSlope => "dtn_from_slope",
            Inequality::SlopeFromDtn => "slope_from_dtn",
            Inequality::CurvatureDual => "curvature_dual",
            Inequality::NormalLp => "normal_lp",
            Inequality::TangentialLp => "tangential_lp",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.name() == name)
            .ok_or_else(|| CoreError::UnknownInequality(name.to_string()))
    }

    /// True for inequalities backed by an explicit constant: their ratio can
    /// never legitimately exceed 1.
    pub fn has_proven_bound(self) -> bool {
        !matches!(self, Inequality::NormalLp | Inequality::TangentialLp)
    }

    /// Whether the inequality is defined only on the line.
    pub fn requires_1d(self) -> bool {
        matches!(
            self,
            Inequality::DtnFromSlope
                | Inequality::SlopeFromDtn
                | Inequality::CurvatureDual
                | Inequality::NormalLp
                | Inequality::TangentialLp
        )
    }
}

fn weighted_integral(fields: &[&SampledField], f: impl Fn(&[f64]) -> f64) -> f64 {
    let n = fields[0].len();
    let cell = fields[0].grid().cell_measure();
    let mut acc = 0.0;
    let mut row = vec![0.0f64; fields.len()];
    for i in 0..n {
        for (r, field) in row.iter_mut().zip(fields) {
            *r = field.values()[i];
        }
        acc += f(&row);
    }
    acc * cell
}

/// Flux balance of the divergence-free field built from the extension:
/// `R = integral(B^2 - |V|^2 - 2 B grad h . V) dx`, zero for exact traces.
pub fn flux_residual(t: &BoundaryTraces, tol: f64) -> IdentityReport {
    let n = t.zeta().len();
    let cell = t.zeta().grid().cell_measure();
    let mut value = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        let b = t.b().values()[i];
        let mut v_sq = 0.0;
        let mut cross = 0.0;
        for (axis, v) in t.v().iter().enumerate() {
            let vv = v.values()[i];
            v_sq += vv * vv;
            cross += t.surface().grad_h()[axis].values()[i] * vv;
        }
        value += b * b - v_sq - 2.0 * b * cross;
        scale += b * b + v_sq + (2.0 * b * cross).abs();
    }
    IdentityReport::new("flux_balance", value * cell, scale * cell, tol)
}

/// The one-dimensional trace identity
/// `integral((G^2 - zeta_x^2 + 2 h_x zeta_x G) / (1 + h_x^2)) dx = 0`.
pub fn rellich_identity_1d(t: &BoundaryTraces, tol: f64) -> Result<IdentityReport> {
    if t.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: t.dim(),
        });
    }
    let zeta_x = spectral::derivative(t.zeta(), 0)?;
    let n = t.zeta().len();
    let cell = t.zeta().grid().cell_measure();
    let mut value = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        let g = t.g_zeta().values()[i];
        let zx = zeta_x.values()[i];
        let hx = t.surface().h_x().values()[i];
        let denom = 1.0 + hx * hx;
        value += (-zx * zx + g * g + 2.0 * hx * zx * g) / denom;
        scale += (zx * zx + g * g + (2.0 * hx * zx * g).abs()) / denom;
    }
    Ok(IdentityReport::new(
        "trace_balance_1d",
        value * cell,
        scale * cell,
        tol,
    ))
}

/// The four L2 gradient-trace bounds with constants 40/41/40 and the
/// slope-dependent plain form.
pub fn check_gradient_trace_bounds(
    t: &BoundaryTraces,
    tol_rel: f64,
) -> Result<Vec<InequalityReport>> {
    let s = t.surface();
    let grad_sq = s.grad_sq();

    let grad_zeta: Vec<SampledField> = (0..s.dim())
        .map(|axis| spectral::derivative(t.zeta(), axis))
        .collect::<Result<_>>()?;
    let mut grad_zeta_sq = vec![0.0f64; t.zeta().len()];
    for gz in &grad_zeta {
        for (acc, &v) in grad_zeta_sq.iter_mut().zip(gz.values()) {
            *acc += v * v;
        }
    }
    let grad_zeta_sq = SampledField::new(s.grid().clone(), grad_zeta_sq)?;

    // Shared right-hand side: integral((1 + |grad h|^2)^2 |grad zeta|^2) dx.
    let rhs_weighted = weighted_integral(&[&grad_sq, &grad_zeta_sq], |r| {
        (1.0 + r[0]).powi(2) * r[1]
    });
    let rhs_plain = spectral::integrate(&grad_zeta_sq);

    let lhs_normal = weighted_integral(&[t.dn_phi()], |r| r[0] * r[0]);
    let lhs_gradient = spectral::integrate(&crate::dtn::gradient_trace_sq(t));
    let lhs_weighted = weighted_integral(&[t.g_zeta(), &grad_sq], |r| r[0] * r[0] / (1.0 + r[1]));
    let lhs_plain = weighted_integral(&[t.g_zeta()], |r| r[0] * r[0]);

    let slope_sq = s.max_slope().powi(2);
    let plain_constant = 40.0 * (1.0 + slope_sq).powi(3);

    Ok(vec![
        InequalityReport::new("normal_l2", 2.0, lhs_normal, rhs_weighted, 40.0, tol_rel),
        InequalityReport::new("gradient_l2", 2.0, lhs_gradient, rhs_weighted, 41.0, tol_rel),
        InequalityReport::new(
            "dtn_weighted_l2",
            2.0,
            lhs_weighted,
            rhs_weighted,
            40.0,
            tol_rel,
        ),
        InequalityReport::new(
            "dtn_plain_l2",
            2.0,
            lhs_plain,
            rhs_plain,
            plain_constant,
            tol_rel,
        ),
    ])
}

/// The two constant-4 slope bounds on the line.
pub fn check_slope_bounds(
    t: &BoundaryTraces,
    tol_rel: f64,
) -> Result<(InequalityReport, InequalityReport)> {
    if t.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: t.dim(),
        });
    }
    let zeta_x = spectral::derivative(t.zeta(), 0)?;
    let weight = |hx: f64| 1.0 + hx * hx;

    let g_weighted = weighted_integral(&[t.g_zeta(), t.surface().h_x()], |r| {
        r[0] * r[0] / weight(r[1])
    });
    let zx_plain = weighted_integral(&[&zeta_x], |r| r[0] * r[0]);
    let zx_weighted = weighted_integral(&[&zeta_x, t.surface().h_x()], |r| {
        r[0] * r[0] / weight(r[1])
    });
    let g_plain = weighted_integral(&[t.g_zeta()], |r| r[0] * r[0]);

    Ok((
        InequalityReport::new("dtn_from_slope", 2.0, g_weighted, zx_plain, 4.0, tol_rel),
        InequalityReport::new("slope_from_dtn", 2.0, zx_weighted, g_plain, 4.0, tol_rel),
    ))
}

/// Curvature estimate: the dual norm of `G(h) kappa` against twice the L2
/// norm of the angle derivative.
///
/// `G(h) kappa` has zero mean in exact arithmetic; the numerical mean is
/// discretization noise and is removed before taking the dual norm.
pub fn check_curvature_dual(
    s: &SurfaceGeometry,
    backend: &BackendSpec,
    tol_rel: f64,
) -> Result<InequalityReport> {
    if s.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: s.dim(),
        });
    }
    let kappa = s.kappa().expect("d = 1 surface has curvature").clone();
    let traces = solve_traces(backend, s, &kappa)?;
    let mean = traces.g_zeta().mean();
    let g_kappa = traces.g_zeta().map(|v| v - mean)?;
    let lhs = spectral::h_minus1_norm(&g_kappa)?;
    let rhs = spectral::l2_norm(&s.theta_x()?);
    Ok(InequalityReport::new(
        "curvature_dual",
        2.0,
        lhs,
        rhs,
        2.0,
        tol_rel,
    ))
}

/// The weighted L^p trace bounds for 1 < p <= 2.
///
/// The arc-length measure is folded into the x-integrals. The reference
/// constant is not explicit for p < 2, so the report carries constant 1 and
/// its ratio IS the empirical constant; `pass` only asserts finiteness.
/// At p = 2 the first bound coincides with `dtn_from_slope` (constant 4)
/// after the measure rewrite.
pub fn check_lp_bounds(
    t: &BoundaryTraces,
    p: f64,
) -> Result<(InequalityReport, InequalityReport)> {
    if t.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: t.dim(),
        });
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(CoreError::InvalidParameter(format!(
            "p must lie in (1, 2], got {p}"
        )));
    }
    let dn = t.dn_phi();
    let dt = t.dt_phi().expect("d = 1 traces carry dt_phi");
    let hx = t.surface().h_x();

    // dsigma = (1+h_x^2)^{1/2} dx merged with the weights
    // (1+h_x^2)^{-+(p-1)/2}.
    let low = (2.0 - p) / 2.0;
    let high = p / 2.0;
    let lhs_normal = weighted_integral(&[dn, hx], |r| {
        r[0].abs().powf(p) * (1.0 + r[1] * r[1]).powf(low)
    });
    let rhs_tangential = weighted_integral(&[dt, hx], |r| {
        r[0].abs().powf(p) * (1.0 + r[1] * r[1]).powf(high)
    });
    let lhs_tangential = weighted_integral(&[dt, hx], |r| {
        r[0].abs().powf(p) * (1.0 + r[1] * r[1]).powf(low)
    });
    let rhs_normal = weighted_integral(&[dn, hx], |r| {
        r[0].abs().powf(p) * (1.0 + r[1] * r[1]).powf(high)
    });

    Ok((
        InequalityReport::new("normal_lp", p, lhs_normal, rhs_tangential, 1.0, f64::MAX),
        InequalityReport::new("tangential_lp", p, lhs_tangential, rhs_normal, 1.0, f64::MAX),
    ))
}

/// The positive weights transported from the half-plane picture:
/// `u_w = cos(g)/|Z_alpha|`, `v_w = 1/(cos(g) |Z_alpha|)`, with
/// `u_w * v_w = 1/|Z_alpha|^2`.
pub fn conformal_weights(cb: &ConformalBoundary) -> (SampledField, SampledField) {
    let u_w = cb.g().zip(cb.jac(), |g, j| g.cos() / j).expect("same grid");
    let v_w = cb
        .g()
        .zip(cb.jac(), |g, j| 1.0 / (g.cos() * j))
        .expect("same grid");
    (u_w, v_w)
}

/// Evaluate one named inequality for `(s, zeta)` with the given backend,
/// solving for the traces internally.
pub fn evaluate_inequality(
    ineq: Inequality,
    s: &SurfaceGeometry,
    zeta: &SampledField,
    backend: &BackendSpec,
    p: f64,
    tol_rel: f64,
) -> Result<InequalityReport> {
    if ineq.requires_1d() && s.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: s.dim(),
        });
    }
    match ineq {
        Inequality::CurvatureDual => check_curvature_dual(s, backend, tol_rel),
        _ => {
            let t = solve_traces(backend, s, zeta)?;
            match ineq {
                Inequality::NormalL2 => Ok(check_gradient_trace_bounds(&t, tol_rel)?.remove(0)),
                Inequality::GradientL2 => Ok(check_gradient_trace_bounds(&t, tol_rel)?.remove(1)),
                Inequality::DtnWeightedL2 => {
                    Ok(check_gradient_trace_bounds(&t, tol_rel)?.remove(2))
                }
                Inequality::DtnPlainL2 => Ok(check_gradient_trace_bounds(&t, tol_rel)?.remove(3)),
                Inequality::DtnFromSlope => Ok(check_slope_bounds(&t, tol_rel)?.0),
                Inequality::SlopeFromDtn => Ok(check_slope_bounds(&t, tol_rel)?.1),
                Inequality::NormalLp => Ok(check_lp_bounds(&t, p)?.0),
                Inequality::TangentialLp => Ok(check_lp_bounds(&t, p)?.1),
                Inequality::CurvatureDual => unreachable!(),
            }
        }
    }
}

/// Hilbert-transform L1 growth demo: the Fejer kernel of order N is
/// positive and L1-normalized, while its conjugate function's L1 norm grows
/// like log N, so the table of `(N, ||H k_N||_1 / ||k_N||_1)` increases
/// without bound.
pub fn l1_failure_demo(n_list: &[usize], m: usize) -> Result<Vec<(usize, f64)>> {
    let grid = PeriodicGrid::line(m)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n < 2 {
            return Err(CoreError::InvalidParameter(format!(
                "kernel order must be >= 2, got {n}"
            )));
        }
        if m < 8 * n {
            return Err(CoreError::InvalidParameter(format!(
                "kernel order {n} under-resolved on grid {m} (need m >= {})",
                8 * n
            )));
        }
        let kernel = fejer_kernel(&grid, n)?;
        let transformed = spectral::hilbert(&kernel)?;
        let ratio =
            spectral::lp_norm(&transformed, 1.0, None)? / spectral::lp_norm(&kernel, 1.0, None)?;
        rows.push((n, ratio));
    }
    Ok(rows)
}

/// Fejer kernel of order N: `sum_{|n| <= N} (1 - |n|/(N+1)) e^{inx}`;
/// nonnegative with mean 1, so its integral over the period is 2*pi.
pub fn fejer_kernel(grid: &PeriodicGrid, n: usize) -> Result<SampledField> {
    SampledField::from_fn(grid.clone(), |x| {
        let mut acc = 1.0;
        for k in 1..=n {
            acc += 2.0 * (1.0 - k as f64 / (n as f64 + 1.0)) * (k as f64 * x[0]).cos();
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{theodorsen_solve, TheodorsenParams};
    use crate::dtn::{dtn_conformal, harmonic_oracle, OraclePhase};
    use crate::field::FourierSpec;
    use crate::surface::{build_surface_from_spec, flat_surface};
    use approx::assert_abs_diff_eq;

    fn flat_cos_traces(m: usize) -> BoundaryTraces {
        let grid = PeriodicGrid::line(m).unwrap();
        let s = flat_surface(&grid);
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let zeta = SampledField::from_fn(grid, |x| x[0].cos()).unwrap();
        dtn_conformal(&cb, &s, &zeta).unwrap()
    }

    #[test]
    fn flux_residual_oracle_and_flat() {
        let grid = PeriodicGrid::line(256).unwrap();
        let s = build_surface_from_spec(&FourierSpec::line(&[(1, 0.3, 0.0)]), &grid).unwrap();
        let (_, t) = harmonic_oracle(&s, &[2], OraclePhase::Cos).unwrap();
        let report = flux_residual(&t, 1e-8);
        assert!(report.pass, "oracle flux residual {}", report.normalized);

        let t = flat_cos_traces(128);
        let report = flux_residual(&t, 1e-8);
        assert!(report.pass, "flat flux residual {}", report.normalized);
    }

    #[test]
    fn flux_residual_detects_corruption() {
        let grid = PeriodicGrid::line(256).unwrap();
        let s = build_surface_from_spec(&FourierSpec::line(&[(1, 0.3, 0.0)]), &grid).unwrap();
        let (zeta, t) = harmonic_oracle(&s, &[2], OraclePhase::Cos).unwrap();
        // Scale the normal trace by 1.1: the identity must break visibly.
        let bad_g = t.g_zeta().map(|v| 1.1 * v).unwrap();
        let corrupted = crate::dtn::BoundaryTraces::assemble(
            s.clone(),
            zeta,
            bad_g,
            crate::dtn::BackendTag::Oracle,
        )
        .unwrap();
        let report = flux_residual(&corrupted, 1e-8);
        assert!(report.normalized > 1e-2, "corruption went unnoticed");
    }

    #[test]
    fn trace_identity_1d() {
        // Flat: integral(-zeta_x^2 + (|D|zeta)^2) = 0 by Parseval.
        let t = flat_cos_traces(128);
        let r = rellich_identity_1d(&t, 1e-10).unwrap();
        assert!(r.pass, "flat identity {}", r.normalized);

        let grid = PeriodicGrid::line(256).unwrap();
        let s = build_surface_from_spec(&FourierSpec::line(&[(1, 0.3, 0.0)]), &grid).unwrap();
        let (_, t) = harmonic_oracle(&s, &[1], OraclePhase::Cos).unwrap();
        let r = rellich_identity_1d(&t, 1e-8).unwrap();
        assert!(r.pass, "oracle identity {}", r.normalized);

        // Constant data: all terms vanish.
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let t = dtn_conformal(&cb, &s, &SampledField::constant(grid, 2.0).unwrap()).unwrap();
        let r = rellich_identity_1d(&t, 1e-8).unwrap();
        assert!(r.value.abs() <= 1e-12);
    }

    #[test]
    fn gradient_trace_bounds_flat_ratio() {
        let t = flat_cos_traces(128);
        let reports = check_gradient_trace_bounds(&t, 1e-6).unwrap();
        // Flat case, zeta = cos x: lhs = pi, rhs*40 = 40 pi, ratio 0.025.
        assert_abs_diff_eq!(reports[0].ratio, 0.025, epsilon = 1e-10);
        assert!(reports.iter().all(|r| r.pass));
        assert_eq!(reports[3].constant, 40.0);
    }

    #[test]
    fn gradient_trace_bounds_zero_data() {
        let grid = PeriodicGrid::line(64).unwrap();
        let s = flat_surface(&grid);
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let t = dtn_conformal(&cb, &s, &SampledField::zeros(grid)).unwrap();
        let reports = check_gradient_trace_bounds(&t, 1e-6).unwrap();
        for r in reports {
            assert_eq!(r.ratio, 0.0);
            assert!(r.pass);
        }
    }

    #[test]
    fn slope_bounds_flat_quarter() {
        let t = flat_cos_traces(128);
        let (a, b) = check_slope_bounds(&t, 1e-6).unwrap();
        assert_abs_diff_eq!(a.ratio, 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(b.ratio, 0.25, epsilon = 1e-10);
        assert!(a.pass && b.pass);
    }

    #[test]
    fn curvature_dual_examples() {
        let grid = PeriodicGrid::line(256).unwrap();
        // Flat surface: kappa = 0, both sides vanish, ratio 0.
        let s = flat_surface(&grid);
        let r = check_curvature_dual(&s, &BackendSpec::conformal_default(), 1e-6).unwrap();
        assert!(r.pass);
        assert!(r.lhs <= 1e-12);

        for spec in [
            FourierSpec::line(&[(1, 0.3, 0.0)]),
            FourierSpec::line(&[(1, 0.2, 0.0), (3, 0.1, 0.0)]),
        ] {
            let s = build_surface_from_spec(&spec, &grid).unwrap();
            let r = check_curvature_dual(&s, &BackendSpec::conformal_default(), 1e-6).unwrap();
            assert!(r.pass, "{:?}: ratio {}", spec, r.ratio);
            assert!(r.ratio < 1.0);
        }
    }

    #[test]
    fn lp_bounds_p2_flat_is_balanced() {
        let t = flat_cos_traces(128);
        let (w1, _) = check_lp_bounds(&t, 2.0).unwrap();
        // Both sides equal pi for zeta = cos x on a flat surface.
        assert_abs_diff_eq!(w1.ratio, 1.0, epsilon = 1e-10);
        assert!(w1.pass);
    }

    #[test]
    fn lp_bounds_p2_matches_slope_bound() {
        let grid = PeriodicGrid::line(256).unwrap();
        let s = build_surface_from_spec(
            &FourierSpec::line(&[(1, 0.3, 0.0), (2, 0.0, 0.1)]),
            &grid,
        )
        .unwrap();
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let zeta =
            SampledField::from_fn(grid, |x| x[0].cos() + 0.5 * (2.0 * x[0]).sin()).unwrap();
        let t = dtn_conformal(&cb, &s, &zeta).unwrap();
        let (w1, _) = check_lp_bounds(&t, 2.0).unwrap();
        let (slope, _) = check_slope_bounds(&t, 1e-6).unwrap();
        // After the measure rewrite the two formulations coincide.
        let rel = (w1.lhs - slope.lhs).abs() / slope.lhs.abs();
        assert!(rel <= 1e-10, "lhs mismatch {rel}");
        let rel = (4.0 * w1.rhs_times_constant - slope.rhs_times_constant).abs()
            / slope.rhs_times_constant;
        assert!(rel <= 1e-10, "rhs mismatch {rel}");
    }

    #[test]
    fn lp_bounds_flat_fractional_p() {
        // h = 0: both ratios reduce to ||H zeta_x||_p^p / ||zeta_x||_p^p.
        let grid = PeriodicGrid::line(256).unwrap();
        let s = flat_surface(&grid);
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let zeta =
            SampledField::from_fn(grid.clone(), |x| x[0].cos() + 0.3 * (3.0 * x[0]).sin())
                .unwrap();
        let t = dtn_conformal(&cb, &s, &zeta).unwrap();
        let (w1, w2) = check_lp_bounds(&t, 1.5).unwrap();

        let zeta_x = spectral::derivative(&zeta, 0).unwrap();
        let h_zeta_x = spectral::hilbert(&zeta_x).unwrap();
        let num = spectral::lp_norm(&h_zeta_x, 1.5, None).unwrap().powf(1.5);
        let den = spectral::lp_norm(&zeta_x, 1.5, None).unwrap().powf(1.5);
        assert_abs_diff_eq!(w1.ratio, num / den, epsilon = 1e-8);
        assert_abs_diff_eq!(w2.ratio, den / num, epsilon = 1e-8);
        assert!(w1.pass && w2.pass);
    }

    #[test]
    fn lp_bounds_rejects_bad_p() {
        let t = flat_cos_traces(64);
        assert!(check_lp_bounds(&t, 1.0).is_err());
        assert!(check_lp_bounds(&t, 2.5).is_err());
    }

    #[test]
    fn conformal_weights_flat_and_product() {
        let grid = PeriodicGrid::line(128).unwrap();
        let s = flat_surface(&grid);
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let (u_w, v_w) = conformal_weights(&cb);
        assert!(u_w.values().iter().all(|&v| (v - 1.0).abs() <= 1e-12));
        assert!(v_w.values().iter().all(|&v| (v - 1.0).abs() <= 1e-12));

        let s = build_surface_from_spec(&FourierSpec::line(&[(1, 0.3, 0.0)]), &grid).unwrap();
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let (u_w, v_w) = conformal_weights(&cb);
        assert!(u_w.values().iter().all(|&v| v > 0.0));
        assert!(v_w.values().iter().all(|&v| v > 0.0));
        for ((&a, &b), &j) in u_w
            .values()
            .iter()
            .zip(v_w.values())
            .zip(cb.jac().values())
        {
            assert!((a * b - 1.0 / (j * j)).abs() <= 1e-12);
        }
    }

    #[test]
    fn l1_demo_grows_and_validates() {
        let rows = l1_failure_demo(&[2, 4, 8, 16], 256).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[1].1 > rows[0].1, "N=2 vs N=4 monotone");
        assert!(rows.windows(2).all(|w| w[1].1 > w[0].1));

        assert!(l1_failure_demo(&[1], 256).is_err());
        assert!(l1_failure_demo(&[64], 256).is_err());
    }

    #[test]
    fn inequality_names_round_trip() {
        for ineq in Inequality::ALL {
            assert_eq!(Inequality::parse(ineq.name()).unwrap(), ineq);
        }
        assert!(Inequality::parse("nope").is_err());
    }

    #[test]
    fn report_degenerate_zero_over_zero() {
        let r = InequalityReport::new("normal_l2", 2.0, 0.0, 0.0, 40.0, 1e-6);
        assert_eq!(r.ratio, 0.0);
        assert!(r.pass);
        let r = InequalityReport::new("normal_l2", 2.0, 1.0, 0.0, 40.0, 1e-6);
        assert!(!r.pass);
    }
}
