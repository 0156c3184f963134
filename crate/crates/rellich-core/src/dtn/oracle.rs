//! Exact reference traces from explicit harmonic functions.
//!
//! `phi(x, y) = exp(|k| y) trig(k . x)` is harmonic on the whole lower
//! region and its gradient decays as `y -> -inf`, so every trace follows
//! from the chain rule in closed form:
//! `zeta = e^{|k|h} trig(k.x)`, `B = |k| zeta`,
//! `V_i = e^{|k|h} d_i trig(k.x)`, `G(h)zeta = B - grad h . V`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::SampledField;
use crate::surface::SurfaceGeometry;

use super::{BackendTag, BoundaryTraces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OraclePhase {
    Cos,
    Sin,
}

impl OraclePhase {
    fn trig(self, phase: f64) -> f64 {
        match self {
            OraclePhase::Cos => phase.cos(),
            OraclePhase::Sin => phase.sin(),
        }
    }

    fn trig_prime(self, phase: f64) -> f64 {
        match self {
            OraclePhase::Cos => -phase.sin(),
            OraclePhase::Sin => phase.cos(),
        }
    }
}

/// Dirichlet data and exact traces of the mode-`k` harmonic function on the
/// surface `s`. Fails for `k = 0` (the trivial constant).
pub fn harmonic_oracle(
    s: &SurfaceGeometry,
    k: &[i64],
    phase: OraclePhase,
) -> Result<(SampledField, BoundaryTraces)> {
    if k.len() != s.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: s.dim(),
            got: k.len(),
        });
    }
    let k_norm_sq: i64 = k.iter().map(|&ki| ki * ki).sum();
    if k_norm_sq == 0 {
        return Err(CoreError::InvalidParameter(
            "oracle wavevector must be non-zero".into(),
        ));
    }
    let k_norm = (k_norm_sq as f64).sqrt();

    let grid = s.grid().clone();
    let n = grid.len();
    let mut zeta = vec![0.0f64; n];
    let mut b = vec![0.0f64; n];
    let mut v: Vec<Vec<f64>> = vec![vec![0.0f64; n]; s.dim()];
    let mut g = vec![0.0f64; n];
    let mut dn = vec![0.0f64; n];
    let mut dt = vec![0.0f64; n];

    for i in 0..n {
        let x = grid.point(i);
        let phase_arg: f64 = k.iter().zip(&x).map(|(&ki, &xi)| ki as f64 * xi).sum();
        let amp = (k_norm * s.h().values()[i]).exp();
        let trig = phase.trig(phase_arg);
        let trig_p = phase.trig_prime(phase_arg);

        zeta[i] = amp * trig;
        b[i] = k_norm * amp * trig;
        let mut grad_dot = 0.0;
        for (axis, &ki) in k.iter().enumerate() {
            v[axis][i] = amp * ki as f64 * trig_p;
            grad_dot += s.grad_h()[axis].values()[i] * v[axis][i];
        }
        g[i] = b[i] - grad_dot;
        let omega = s.omega().values()[i];
        dn[i] = g[i] / omega;
        if s.dim() == 1 {
            // zeta_x = V + h_x B via the chain rule.
            dt[i] = (v[0][i] + s.h_x().values()[i] * b[i]) / omega;
        }
    }

    let zeta = SampledField::new(grid.clone(), zeta)?;
    let g_zeta = SampledField::new(grid.clone(), g)?;
    let b = SampledField::new(grid.clone(), b)?;
    let v = v
        .into_iter()
        .map(|vals| SampledField::new(grid.clone(), vals))
        .collect::<Result<Vec<_>>>()?;
    let dn_phi = SampledField::new(grid.clone(), dn)?;
    let dt_phi = if s.dim() == 1 {
        Some(SampledField::new(grid.clone(), dt)?)
    } else {
        None
    };

    let traces = BoundaryTraces::from_parts(
        s.clone(),
        zeta.clone(),
        g_zeta,
        b,
        v,
        dn_phi,
        dt_phi,
        BackendTag::Oracle,
    );
    Ok((zeta, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FourierSpec, PeriodicGrid};
    use crate::surface::{build_surface_from_spec, flat_surface};
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_oracle_is_plain_mode() {
        let grid = PeriodicGrid::line(64).unwrap();
        let s = flat_surface(&grid);
        let (zeta, t) = harmonic_oracle(&s, &[3], OraclePhase::Cos).unwrap();
        for (j, (&z, &g)) in zeta.values().iter().zip(t.g_zeta().values()).enumerate() {
            let x = crate::field::TWO_PI * j as f64 / 64.0;
            assert_abs_diff_eq!(z, (3.0 * x).cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(g, 3.0 * (3.0 * x).cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn cosine_surface_closed_form() {
        // h = 0.3 cos x, k = 2: G zeta = 2 e^{2h} (cos 2x + h_x sin 2x),
        // hand-checkable at x = 0 where it equals 2 e^{0.6}.
        let grid = PeriodicGrid::line(128).unwrap();
        let s =
            build_surface_from_spec(&FourierSpec::line(&[(1, 0.3, 0.0)]), &grid).unwrap();
        let (_, t) = harmonic_oracle(&s, &[2], OraclePhase::Cos).unwrap();
        assert_abs_diff_eq!(
            t.g_zeta().values()[0],
            2.0 * (0.6f64).exp(),
            epsilon = 1e-10
        );
        for (i, &g) in t.g_zeta().values().iter().enumerate() {
            let x = grid.point(i)[0];
            let h = 0.3 * x.cos();
            let hx = -0.3 * x.sin();
            let expected = 2.0 * (2.0 * h).exp() * ((2.0 * x).cos() + hx * (2.0 * x).sin());
            assert_abs_diff_eq!(g, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn oracle_satisfies_trace_identity() {
        // G(h)zeta = B - grad h . V holds to round-off by construction.
        let grid = PeriodicGrid::new(&[32, 32]).unwrap();
        let spec = FourierSpec {
            modes: vec![
                crate::field::FourierMode {
                    k: vec![1, 0],
                    cos: 0.2,
                    sin: 0.0,
                },
                crate::field::FourierMode {
                    k: vec![0, 1],
                    cos: 0.0,
                    sin: 0.1,
                },
            ],
        };
        let s = build_surface_from_spec(&spec, &grid).unwrap();
        let (_, t) = harmonic_oracle(&s, &[1, 1], OraclePhase::Sin).unwrap();
        for i in 0..grid.len() {
            let mut dot = 0.0;
            for (axis, v) in t.v().iter().enumerate() {
                dot += s.grad_h()[axis].values()[i] * v.values()[i];
            }
            let defect = t.g_zeta().values()[i] - (t.b().values()[i] - dot);
            assert!(defect.abs() <= 1e-12);
        }
    }

    #[test]
    fn reconstruction_reproduces_closed_forms() {
        let grid = PeriodicGrid::line(128).unwrap();
        let s =
            build_surface_from_spec(&FourierSpec::line(&[(1, 0.3, 0.0)]), &grid).unwrap();
        let (zeta, t) = harmonic_oracle(&s, &[2], OraclePhase::Cos).unwrap();
        let (b, v) = crate::dtn::traces_from_g(&s, &zeta, t.g_zeta()).unwrap();
        for i in 0..grid.len() {
            assert!((b.values()[i] - t.b().values()[i]).abs() <= 1e-12);
            assert!((v[0].values()[i] - t.v()[0].values()[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_wavevector_rejected() {
        let grid = PeriodicGrid::line(32).unwrap();
        let s = flat_surface(&grid);
        assert!(harmonic_oracle(&s, &[0], OraclePhase::Cos).is_err());
    }
}
