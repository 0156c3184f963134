//! Boundary traces of the harmonic extension: the Dirichlet-to-Neumann
//! operator `G(h)` and the derivative traces `B = d_y phi`, `V = grad phi`,
//! `d_N phi`, `d_T phi` on `y = h(x)`.
//!
//! Two independent backends are provided. The conformal backend (d = 1)
//! is spectral: it maps the problem to the lower half-plane where the
//! normal derivative is `|D|` and resamples through the boundary
//! correspondence. The finite-difference backend (d in {1, 2}) flattens
//! the domain to a strip and solves the transformed divergence-form
//! equation; it is low order but covers d = 2 and steep slopes. An exact
//! symbolic oracle built from explicit harmonic functions calibrates both.

mod elliptic;
mod oracle;

pub use elliptic::{dtn_elliptic, BottomCondition, EllipticConfig};
pub use oracle::{harmonic_oracle, OraclePhase};

use crate::conformal::{self, ConformalBoundary, TheodorsenParams};
use crate::error::{CoreError, Result};
use crate::field::SampledField;
use crate::spectral;
use crate::surface::SurfaceGeometry;

/// Which solver produced a set of traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendTag {
    Conformal,
    Fd,
    Oracle,
}

/// All boundary traces of one harmonic extension, on the x-grid.
#[derive(Debug, Clone)]
pub struct BoundaryTraces {
    surface: SurfaceGeometry,
    zeta: SampledField,
    g_zeta: SampledField,
    b: SampledField,
    v: Vec<SampledField>,
    dn_phi: SampledField,
    dt_phi: Option<SampledField>,
    backend: BackendTag,
}

impl BoundaryTraces {
    /// Construct from explicit closed-form traces (oracle path).
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        surface: SurfaceGeometry,
        zeta: SampledField,
        g_zeta: SampledField,
        b: SampledField,
        v: Vec<SampledField>,
        dn_phi: SampledField,
        dt_phi: Option<SampledField>,
        backend: BackendTag,
    ) -> Self {
        Self {
            surface,
            zeta,
            g_zeta,
            b,
            v,
            dn_phi,
            dt_phi,
            backend,
        }
    }

    pub(crate) fn assemble(
        surface: SurfaceGeometry,
        zeta: SampledField,
        g_zeta: SampledField,
        backend: BackendTag,
    ) -> Result<Self> {
        let (b, v) = traces_from_g(&surface, &zeta, &g_zeta)?;
        let dn_phi = g_zeta.zip(surface.omega(), |g, w| g / w)?;
        let dt_phi = if surface.dim() == 1 {
            // d_T phi = (V + h_x B)/omega = zeta_x / omega by the chain rule.
            let zeta_x = spectral::derivative(&zeta, 0)?;
            Some(zeta_x.zip(surface.omega(), |zx, w| zx / w)?)
        } else {
            None
        };
        Ok(Self {
            surface,
            zeta,
            g_zeta,
            b,
            v,
            dn_phi,
            dt_phi,
            backend,
        })
    }

    pub fn surface(&self) -> &SurfaceGeometry {
        &self.surface
    }

    pub fn zeta(&self) -> &SampledField {
        &self.zeta
    }

    /// G(h) zeta on the x-grid.
    pub fn g_zeta(&self) -> &SampledField {
        &self.g_zeta
    }

    /// B = (d_y phi)|_{y=h}.
    pub fn b(&self) -> &SampledField {
        &self.b
    }

    /// V = (grad_x phi)|_{y=h}, one field per axis.
    pub fn v(&self) -> &[SampledField] {
        &self.v
    }

    pub fn dn_phi(&self) -> &SampledField {
        &self.dn_phi
    }

    /// d_T phi (d = 1 only).
    pub fn dt_phi(&self) -> Option<&SampledField> {
        self.dt_phi.as_ref()
    }

    pub fn backend(&self) -> BackendTag {
        self.backend
    }

    pub fn dim(&self) -> usize {
        self.surface.dim()
    }
}

/// Recover `B` and `V` from the Dirichlet data and `G(h) zeta`:
/// `B = (G(h) zeta + grad zeta . grad h) / (1 + |grad h|^2)`,
/// `V = grad zeta - B grad h`. Both reconstruction identities are
/// algebraic and hold exactly.
pub fn traces_from_g(
    s: &SurfaceGeometry,
    zeta: &SampledField,
    g_zeta: &SampledField,
) -> Result<(SampledField, Vec<SampledField>)> {
    zeta.check_same_grid(g_zeta)?;
    if zeta.grid() != s.grid() {
        return Err(CoreError::GridMismatch(
            "zeta does not live on the surface grid".into(),
        ));
    }
    let grad_zeta: Vec<SampledField> = (0..s.dim())
        .map(|axis| spectral::derivative(zeta, axis))
        .collect::<Result<_>>()?;

    let n = zeta.len();
    let mut b_vals = vec![0.0f64; n];
    for i in 0..n {
        let mut dot = 0.0;
        let mut grad_sq = 0.0;
        for (gz, gh) in grad_zeta.iter().zip(s.grad_h()) {
            dot += gz.values()[i] * gh.values()[i];
            grad_sq += gh.values()[i] * gh.values()[i];
        }
        b_vals[i] = (g_zeta.values()[i] + dot) / (1.0 + grad_sq);
    }
    let b = SampledField::new(zeta.grid().clone(), b_vals)?;

    let v = grad_zeta
        .iter()
        .zip(s.grad_h())
        .map(|(gz, gh)| {
            let vals = gz
                .values()
                .iter()
                .zip(gh.values())
                .zip(b.values())
                .map(|((&z, &h), &bb)| z - bb * h)
                .collect();
            SampledField::new(zeta.grid().clone(), vals)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((b, v))
}

/// Squared length of the full gradient trace, `B^2 + |V|^2`.
///
/// Algebraically this equals
/// `(G(h)zeta)^2/(1+|grad h|^2) + |grad zeta|^2 - (grad h . grad zeta)^2/(1+|grad h|^2)`.
pub fn gradient_trace_sq(t: &BoundaryTraces) -> SampledField {
    let n = t.zeta.len();
    let mut vals = vec![0.0f64; n];
    for i in 0..n {
        let mut acc = t.b.values()[i] * t.b.values()[i];
        for v in &t.v {
            acc += v.values()[i] * v.values()[i];
        }
        vals[i] = acc;
    }
    SampledField::new(t.zeta.grid().clone(), vals).expect("finite")
}

/// Spectral Dirichlet-to-Neumann traces through the conformal boundary
/// correspondence (d = 1).
///
/// On the half-plane side the tangential and normal derivatives at the
/// boundary are `d_alpha pull(zeta) / |Z_alpha|` and `|D| pull(zeta) / |Z_alpha|`;
/// with `|Z_alpha| = x_alpha sqrt(1 + h_x^2)` this gives
/// `G(h)zeta (x(alpha)) = |D| pull(zeta) / x_alpha`.
pub fn dtn_conformal(
    cb: &ConformalBoundary,
    s: &SurfaceGeometry,
    zeta: &SampledField,
) -> Result<BoundaryTraces> {
    if s.dim() != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: s.dim(),
        });
    }
    if cb.alpha_grid() != s.grid() || zeta.grid() != s.grid() {
        return Err(CoreError::GridMismatch(
            "conformal boundary, surface and data must share one grid".into(),
        ));
    }

    let zeta_alpha = conformal::pullback(cb, zeta)?;
    let abs_d_zeta = spectral::abs_d(&zeta_alpha)?;
    let g_on_alpha = abs_d_zeta.zip(cb.x_alpha(), |a, xa| a / xa)?;
    let g_zeta = conformal::pushforward(cb, &g_on_alpha)?;

    BoundaryTraces::assemble(s.clone(), zeta.clone(), g_zeta, BackendTag::Conformal)
}

/// Backend selector carried by configuration and the explorer.
#[derive(Debug, Clone)]
pub enum BackendSpec {
    Conformal(TheodorsenParams),
    Fd(EllipticConfig),
}

impl BackendSpec {
    pub fn conformal_default() -> Self {
        BackendSpec::Conformal(TheodorsenParams::default())
    }

    pub fn fd_default() -> Self {
        BackendSpec::Fd(EllipticConfig::default())
    }

    pub fn tag(&self) -> BackendTag {
        match self {
            BackendSpec::Conformal(_) => BackendTag::Conformal,
            BackendSpec::Fd(_) => BackendTag::Fd,
        }
    }

    /// Residual tolerance appropriate for identity checks on traces from
    /// this backend.
    pub fn identity_tol(&self) -> f64 {
        match self {
            BackendSpec::Conformal(_) => 1e-8,
            BackendSpec::Fd(_) => 1e-4,
        }
    }
}

/// Compute traces with the selected backend, solving the boundary
/// correspondence internally when the conformal one is chosen.
pub fn solve_traces(
    backend: &BackendSpec,
    s: &SurfaceGeometry,
    zeta: &SampledField,
) -> Result<BoundaryTraces> {
    match backend {
        BackendSpec::Conformal(params) => {
            let cb = conformal::theodorsen_solve(s, *params)?;
            dtn_conformal(&cb, s, zeta)
        }
        BackendSpec::Fd(cfg) => dtn_elliptic(s, zeta, cfg),
    }
}
