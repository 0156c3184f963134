//! Randomized verification suites and their (optionally parallel) batch
//! evaluation.
//!
//! Case generation is deterministic in the seed; evaluation order is the
//! case order in both the parallel and the sequential path, so suite
//! results are reproducible bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{FourierMode, FourierSpec};
use crate::par;

/// One random verification instance.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub surface: FourierSpec,
    pub zeta: FourierSpec,
}

/// Parameters of the randomized suite.
#[derive(Debug, Clone, Copy)]
pub struct SuiteParams {
    pub count: usize,
    /// Largest surface mode per axis.
    pub max_mode_h: i64,
    /// Largest data mode per axis.
    pub max_mode_zeta: i64,
    /// Surfaces are rescaled onto a slope in `[0.2, 1] * slope_cap`.
    pub slope_cap: f64,
    pub seed: u64,
    pub dim: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            count: 10,
            max_mode_h: 4,
            max_mode_zeta: 4,
            slope_cap: 0.75,
            seed: 0,
            dim: 1,
        }
    }
}

/// Integer wavevectors covering one representative of every +-k pair.
fn mode_lattice(dim: usize, max_mode: i64) -> Vec<Vec<i64>> {
    match dim {
        1 => (1..=max_mode).map(|k| vec![k]).collect(),
        2 => {
            let mut out = Vec::new();
            for k1 in 0..=max_mode {
                for k2 in -max_mode..=max_mode {
                    if k1 > 0 || k2 > 0 {
                        out.push(vec![k1, k2]);
                    }
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

/// Sup norm of |grad of spec| probed on a dense lattice.
pub(crate) fn max_slope_of_spec(spec: &FourierSpec, dim: usize, probe: usize) -> f64 {
    let mut worst = 0.0f64;
    let step = crate::field::TWO_PI / probe as f64;
    let mut point = vec![0.0f64; dim];
    let total = probe.pow(dim as u32);
    for idx in 0..total {
        match dim {
            1 => point[0] = idx as f64 * step,
            2 => {
                point[0] = (idx / probe) as f64 * step;
                point[1] = (idx % probe) as f64 * step;
            }
            _ => unreachable!(),
        }
        let mut grad_sq = 0.0;
        for axis in 0..dim {
            let mut d = 0.0;
            for m in &spec.modes {
                let phase: f64 = m.k.iter().zip(&point).map(|(&k, &x)| k as f64 * x).sum();
                d += m.k[axis] as f64 * (m.sin * phase.cos() - m.cos * phase.sin());
            }
            grad_sq += d * d;
        }
        worst = worst.max(grad_sq);
    }
    worst.sqrt()
}

/// Deterministic random suite. Surface coefficients are drawn in
/// `[-0.5, 0.5]` and rescaled to a slope below the cap; data coefficients
/// are drawn in `[-1, 1]` with a cosine fallback when the draw is
/// degenerate.
pub fn random_cases(params: &SuiteParams) -> Vec<SuiteCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let h_modes = mode_lattice(params.dim, params.max_mode_h);
    let z_modes = mode_lattice(params.dim, params.max_mode_zeta);
    let probe = if params.dim == 1 { 256 } else { 64 };

    (0..params.count)
        .map(|_| {
            let mut surface = FourierSpec {
                modes: h_modes
                    .iter()
                    .map(|k| FourierMode {
                        k: k.clone(),
                        cos: rng.gen_range(-0.5..0.5),
                        sin: rng.gen_range(-0.5..0.5),
                    })
                    .collect(),
            };
            let target_slope = params.slope_cap * rng.gen_range(0.2..1.0);
            let slope = max_slope_of_spec(&surface, params.dim, probe);
            if slope > 1e-12 {
                let scale = target_slope / slope;
                for m in &mut surface.modes {
                    m.cos *= scale;
                    m.sin *= scale;
                }
            }

            let mut zeta = FourierSpec {
                modes: z_modes
                    .iter()
                    .map(|k| FourierMode {
                        k: k.clone(),
                        cos: rng.gen_range(-1.0..1.0),
                        sin: rng.gen_range(-1.0..1.0),
                    })
                    .collect(),
            };
            let mass: f64 = zeta
                .modes
                .iter()
                .map(|m| m.cos * m.cos + m.sin * m.sin)
                .sum();
            if mass < 1e-6 {
                zeta.modes[0].cos = 1.0;
            }

            SuiteCase { surface, zeta }
        })
        .collect()
}

/// Evaluate `f` on every case, in parallel when the `parallel` feature is
/// active. Output order always matches input order.
pub fn evaluate_cases<R: Send>(
    cases: &[SuiteCase],
    f: impl Fn(&SuiteCase) -> R + Sync + Send,
) -> Vec<R> {
    par::map_slice(cases, f)
}

/// Sequential twin of [`evaluate_cases`], available in every build; the
/// benchmark suite compares the two paths.
pub fn evaluate_cases_seq<R>(cases: &[SuiteCase], f: impl Fn(&SuiteCase) -> R) -> Vec<R> {
    cases.iter().map(f).collect()
}
