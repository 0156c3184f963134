//! Run configuration: JSON schema, validation and assembly of the solver
//! inputs.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use rellich_core::conformal::TheodorsenParams;
use rellich_core::dtn::{harmonic_oracle, BackendSpec, BottomCondition, EllipticConfig, OraclePhase};
use rellich_core::field::{FourierSpec, PeriodicGrid, SampledField};
use rellich_core::surface::{build_surface, SurfaceGeometry};

pub const DEFAULT_P_LIST: [f64; 4] = [1.25, 1.5, 1.75, 2.0];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub zeta: ZetaSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub backend: BackendKind,
    #[serde(default)]
    pub fd: FdSettings,
    #[serde(default)]
    pub conformal: ConformalSettings,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    /// Pass tolerance for inequality ratios; defaults to the backend's
    /// error budget (1e-6 conformal, 1e-3 finite differences).
    #[serde(default)]
    pub tol_rel: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_p_list() -> Vec<f64> {
    DEFAULT_P_LIST.to_vec()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            surface: SurfaceSpec::default(),
            zeta: ZetaSpec::default(),
            grid: GridSpec::default(),
            backend: BackendKind::Conformal,
            fd: FdSettings::default(),
            conformal: ConformalSettings::default(),
            p_list: default_p_list(),
            tol_rel: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceSpec {
    Named(String),
    Modes(FourierSpec),
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        SurfaceSpec::Named("flat".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaSpec {
    Oracle { oracle: OracleData },
    Modes(FourierSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleData {
    pub k: Vec<i64>,
    #[serde(default = "default_phase")]
    pub phase: OraclePhase,
}

fn default_phase() -> OraclePhase {
    OraclePhase::Cos
}

impl Default for ZetaSpec {
    fn default() -> Self {
        ZetaSpec::Modes(FourierSpec::line(&[(1, 1.0, 0.0)]))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { m: 256, m2: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Conformal,
    Fd,
}

impl Default for BackendKind {
    fn default() -> Self {
        BackendKind::Conformal
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSettings {
    pub depth: f64,
    pub ny: usize,
    pub bottom: BottomCondition,
}

impl Default for FdSettings {
    fn default() -> Self {
        let cfg = EllipticConfig::default();
        Self {
            depth: cfg.depth,
            ny: cfg.ny,
            bottom: cfg.bottom,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub relax: f64,
}

impl Default for ConformalSettings {
    fn default() -> Self {
        let p = TheodorsenParams::default();
        Self {
            tol: p.tol,
            max_iter: p.max_iter,
            relax: p.relax,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("config {} is not schema-valid", path.display()))?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if let SurfaceSpec::Named(name) = &self.surface {
            if name != "flat" {
                bail!("unknown named surface `{name}` (only \"flat\" is recognized)");
            }
        }
        for &p in &self.p_list {
            if !(p > 1.0 && p <= 2.0) {
                bail!("p values must lie in (1, 2], got {p}");
            }
        }
        if self.backend == BackendKind::Conformal && self.grid.m2.is_some() {
            bail!("the conformal backend requires d = 1 (drop grid.m2 or use backend \"fd\")");
        }
        if !(self.conformal.relax > 0.0 && self.conformal.relax <= 1.0) {
            bail!("conformal.relax must lie in (0, 1]");
        }
        if !(self.fd.depth > 0.0) {
            bail!("fd.depth must be positive");
        }
        // Grid constraints are enforced by the core type; surface this as a
        // config error.
        self.build_grid()
            .map_err(|e| anyhow::anyhow!("invalid grid: {e}"))?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        if self.grid.m2.is_some() {
            2
        } else {
            1
        }
    }

    pub fn build_grid(&self) -> rellich_core::Result<PeriodicGrid> {
        match self.grid.m2 {
            None => PeriodicGrid::new(&[self.grid.m]),
            Some(m2) => PeriodicGrid::new(&[self.grid.m, m2]),
        }
    }

    pub fn build_surface(&self) -> anyhow::Result<SurfaceGeometry> {
        let grid = self.build_grid()?;
        let s = match &self.surface {
            SurfaceSpec::Named(_) => build_surface(SampledField::zeros(grid))?,
            SurfaceSpec::Modes(spec) => build_surface(spec.sample(&grid)?)?,
        };
        Ok(s)
    }

    /// Dirichlet data for the configured surface.
    pub fn build_zeta(&self, s: &SurfaceGeometry) -> anyhow::Result<SampledField> {
        match &self.zeta {
            ZetaSpec::Modes(spec) => Ok(spec.sample(s.grid())?),
            ZetaSpec::Oracle { oracle } => {
                let (zeta, _) = harmonic_oracle(s, &oracle.k, oracle.phase)?;
                Ok(zeta)
            }
        }
    }

    pub fn backend_spec(&self) -> BackendSpec {
        match self.backend {
            BackendKind::Conformal => BackendSpec::Conformal(TheodorsenParams {
                tol: self.conformal.tol,
                max_iter: self.conformal.max_iter,
                relax: self.conformal.relax,
            }),
            BackendKind::Fd => BackendSpec::Fd(EllipticConfig {
                depth: self.fd.depth,
                ny: self.fd.ny,
                bottom: self.fd.bottom,
            }),
        }
    }

    /// Inequality pass tolerance: explicit override or the backend budget.
    pub fn effective_tol_rel(&self) -> f64 {
        self.tol_rel.unwrap_or(match self.backend {
            BackendKind::Conformal => 1e-6,
            BackendKind::Fd => 1e-3,
        })
    }

    /// Identity residual tolerance for the chosen backend.
    pub fn identity_tol(&self) -> f64 {
        self.backend_spec().identity_tol()
    }
}
