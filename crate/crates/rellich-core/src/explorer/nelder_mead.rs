//! Standard Nelder-Mead simplex minimization with an evaluation budget.
//!
//! Coefficients alpha = 1, gamma = 2, rho = 0.5, sigma = 0.5. The routine
//! is fully deterministic for a deterministic objective.

pub struct Options {
    pub max_evals: usize,
    /// Stop when the simplex function spread falls below this.
    pub f_tol: f64,
    /// Initial step added to each coordinate of the start point.
    pub init_step: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_evals: 200,
            f_tol: 1e-10,
            init_step: 0.1,
        }
    }
}

pub struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
}

/// Minimize `f` starting from `x0`. The objective is `FnMut` so callers can
/// record every evaluation.
pub fn minimize(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &Options) -> Outcome {
    let dim = x0.len();
    assert!(dim >= 1, "objective must have at least one coordinate");

    let mut evals = 0usize;
    let budget = opts.max_evals.max(dim + 2);
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    // Initial simplex: x0 plus a step along each coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut xi = x0.to_vec();
        xi[i] += opts.init_step;
        let fi = eval(&xi, &mut evals);
        simplex.push((xi, fi));
    }

    while evals < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() <= opts.f_tol {
            break;
        }

        // Centroid of all but the worst.
        let mut centroid = vec![0.0f64; dim];
        for (x, _) in simplex.iter().take(dim) {
            for (c, &v) in centroid.iter_mut().zip(x) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let worst = simplex[dim].clone();
        let lerp = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let reflected = lerp(1.0);
        let f_r = eval(&reflected, &mut evals);

        if f_r < simplex[0].1 {
            // Try expanding.
            if evals < budget {
                let expanded = lerp(2.0);
                let f_e = eval(&expanded, &mut evals);
                simplex[dim] = if f_e < f_r {
                    (expanded, f_e)
                } else {
                    (reflected, f_r)
                };
            } else {
                simplex[dim] = (reflected, f_r);
            }
        } else if f_r < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_r);
        } else {
            // Contract (outside if the reflection helped at all).
            let contracted = if f_r < worst.1 { lerp(0.5) } else { lerp(-0.5) };
            let f_c = if evals < budget {
                eval(&contracted, &mut evals)
            } else {
                break;
            };
            if f_c < worst.1.min(f_r) {
                simplex[dim] = (contracted, f_c);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (xi, &bi) in entry.0.iter_mut().zip(&best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    if evals >= budget {
                        break;
                    }
                    entry.1 = eval(&entry.0, &mut evals);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Outcome {
        x: simplex[0].0.clone(),
        f: simplex[0].1,
        evaluations: evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let out = minimize(
            |x| (x[0] - 1.5).powi(2) + 2.0 * (x[1] + 0.5).powi(2),
            &[0.0, 0.0],
            &Options {
                max_evals: 400,
                ..Options::default()
            },
        );
        assert!((out.x[0] - 1.5).abs() < 1e-4, "{:?}", out.x);
        assert!((out.x[1] + 0.5).abs() < 1e-4, "{:?}", out.x);
    }

    #[test]
    fn respects_budget() {
        let mut count = 0usize;
        let out = minimize(
            |x| {
                count += 1;
                x[0] * x[0]
            },
            &[3.0],
            &Options {
                max_evals: 25,
                ..Options::default()
            },
        );
        assert!(count <= 27, "evaluation overshoot: {count}");
        assert_eq!(count, out.evaluations);
    }

    #[test]
    fn handles_rosenbrock_reasonably() {
        let out = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.0, 1.0],
            &Options {
                max_evals: 2000,
                f_tol: 1e-14,
                ..Options::default()
            },
        );
        assert!(out.f < 1e-3, "rosenbrock f = {}", out.f);
    }
}
