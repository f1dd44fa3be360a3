use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::simplex::{minimize, SimplexOptions};
use super::{chsh_combination, correlators, evaluate, ChshResult, FreeParam, ParamId, Scenario};
use crate::error::{Error, Result};

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub seed: u64,
    pub simplex: SimplexOptions,
    /// Extra start tried before the quasi-random ones.
    pub initial: Option<Vec<(ParamId, f64)>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 2011,
            simplex: SimplexOptions::default(),
            initial: None,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Same settings, plus a start at the free parameters of `result`.
    pub fn warm_started(&self, result: &ChshResult) -> Self {
        Self {
            initial: Some(result.params()),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace {
    pub starts: usize,
    /// Best S reached from each start, in start order.
    pub best_per_start: Vec<f64>,
    pub converged: usize,
    pub evaluations: usize,
}

/// Map between the optimizer's unconstrained coordinates and parameter values.
/// Full-period angles wrap; everything else goes through `lo + w(1 + sin u)/2`.
struct Coordinates<'a> {
    free: &'a [FreeParam],
}

impl Coordinates<'_> {
    fn value(&self, i: usize, u: f64) -> f64 {
        let p = &self.free[i];
        let width = p.upper - p.lower;
        if p.wraps() {
            p.lower + (u - p.lower).rem_euclid(width)
        } else {
            (p.lower + width * 0.5 * (1.0 + u.sin())).clamp(p.lower, p.upper)
        }
    }

    fn internal(&self, i: usize, v: f64) -> f64 {
        let p = &self.free[i];
        if p.wraps() {
            v
        } else {
            let t = 2.0 * (v - p.lower) / (p.upper - p.lower) - 1.0;
            t.clamp(-1.0, 1.0).asin()
        }
    }

    fn apply(&self, template: &Scenario, u: &[f64]) -> Result<Scenario> {
        let mut sc = template.clone();
        for (i, (p, &ui)) in self.free.iter().zip(u).enumerate() {
            sc.set(p.id, self.value(i, ui))?;
        }
        Ok(sc)
    }

    fn values(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(i, &ui)| self.value(i, ui)).collect()
    }
}

fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base as u64) as f64 * inv;
        k /= base as u64;
        inv /= b;
    }
    out
}

/// Randomly shifted Halton points in `[0, 1)^dim`.
fn start_points(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..count as u64)
        .map(|k| {
            (0..dim)
                .map(|j| {
                    let h = if j < PRIMES.len() {
                        radical_inverse(k, PRIMES[j])
                    } else {
                        rng.random::<f64>()
                    };
                    (h + shift[j]).fract()
                })
                .collect()
        })
        .collect()
}

struct StartResult {
    s_value: f64,
    values: Vec<f64>,
    evals: usize,
    converged: bool,
}

/// Maximizes S over the scenario's free parameters from `cfg.starts`
/// quasi-random starts, each refined by Nelder–Mead. Starts run in parallel;
/// the winner is the largest S with ties broken by the lexicographically
/// smallest parameter vector, so the result depends only on the seed.
pub fn optimize(sc: &Scenario, cfg: &OptimizerConfig) -> Result<ChshResult> {
    sc.validate()?;
    if sc.free.is_empty() {
        return Err(Error::InvalidScenario("no free parameters to optimize".into()));
    }
    if cfg.starts == 0 && cfg.initial.is_none() {
        return Err(Error::InvalidScenario("optimizer needs at least one start".into()));
    }
    let free = sc.free.clone();
    let coords = Coordinates { free: &free };
    let template = Scenario {
        free: Vec::new(),
        ..sc.clone()
    };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.starts + 1);
    if let Some(initial) = &cfg.initial {
        let mut u = Vec::with_capacity(free.len());
        for (i, p) in free.iter().enumerate() {
            let v = initial
                .iter()
                .find(|(id, _)| *id == p.id)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::InvalidScenario(format!("initial point lacks {}", p.id)))?;
            u.push(coords.internal(i, v));
        }
        starts.push(u);
    }
    for unit in start_points(cfg.starts, free.len(), cfg.seed) {
        let u = unit
            .iter()
            .zip(&free)
            .enumerate()
            .map(|(i, (&t, p))| coords.internal(i, p.lower + t * (p.upper - p.lower)))
            .collect();
        starts.push(u);
    }

    let objective = |u: &[f64]| -> f64 {
        coords
            .apply(&template, u)
            .and_then(|s| correlators(&s))
            .map(|e| -chsh_combination(&e))
            .unwrap_or(f64::INFINITY)
    };

    let results: Vec<StartResult> = starts
        .par_iter()
        .map(|u0| {
            let m = minimize(objective, u0, &cfg.simplex);
            StartResult {
                s_value: -m.value,
                values: coords.values(&m.x),
                evals: m.evals,
                converged: m.converged,
            }
        })
        .collect();

    let best = results
        .iter()
        .filter(|r| r.s_value.is_finite())
        .reduce(|a, b| {
            let better = b.s_value > a.s_value
                || (b.s_value == a.s_value && b.values.partial_cmp(&a.values) == Some(std::cmp::Ordering::Less));
            if better {
                b
            } else {
                a
            }
        });
    let converged = results.iter().filter(|r| r.converged).count();
    let best = match best {
        Some(b) if converged > 0 => b,
        other => {
            return Err(Error::OptimizerNonConvergence {
                starts: results.len(),
                best: other.map_or(f64::NAN, |b| b.s_value),
            })
        }
    };

    let mut winner = template.clone();
    for (p, &v) in free.iter().zip(&best.values) {
        winner.set(p.id, v)?;
    }
    winner.free = free.clone();
    let mut result = evaluate(&winner)?;
    result.trace = Some(OptimizerTrace {
        starts: results.len(),
        best_per_start: results.iter().map(|r| r.s_value).collect(),
        converged,
        evaluations: results.iter().map(|r| r.evals).sum(),
    });
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn halton_points_cover_the_cube() {
        let pts = start_points(64, 3, 7);
        assert_eq!(pts.len(), 64);
        for p in &pts {
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        // Every eighth of the first axis gets exactly eight points.
        let mut bins = [0; 8];
        for p in &pts {
            bins[(p[0] * 8.0) as usize] += 1;
        }
        assert!(bins.iter().all(|&b| b == 8), "{bins:?}");
        assert_eq!(pts, start_points(64, 3, 7));
        assert_ne!(pts, start_points(64, 3, 8));
    }

    #[test]
    fn coordinates_round_trip() {
        let free = vec![
            FreeParam::with_default_bounds(ParamId::Theta),
            FreeParam::with_default_bounds(ParamId::Alpha1),
            FreeParam::new(ParamId::EtaT, 0.2, 0.9).unwrap(),
        ];
        let c = Coordinates { free: &free };
        for (i, v) in [(0, 0.3), (1, -2.0), (2, 0.55)] {
            assert_abs_diff_eq!(c.value(i, c.internal(i, v)), v, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(c.value(1, 3.0 * PI), PI - 2.0 * PI, epsilon = 1e-12);
        assert!((0.2..=0.9).contains(&c.value(2, 123.4)));
    }

    #[test]
    fn rejects_scenario_without_free_parameters() {
        let r = optimize(&Scenario::counting_homodyne(), &OptimizerConfig::default());
        assert!(matches!(r, Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn single_parameter_recovers_optimal_alpha() {
        let sc = Scenario::counting_homodyne().with_free(vec![FreeParam::with_default_bounds(ParamId::Alpha1)]);
        let cfg = OptimizerConfig {
            starts: 8,
            ..OptimizerConfig::default()
        };
        let r = optimize(&sc, &cfg).unwrap();
        assert_abs_diff_eq!(r.s_value, 2.0 * (1.0 + 2.0 / PI).sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(
            r.scenario.get(ParamId::Alpha1).unwrap(),
            super::super::optimal_counting_alpha(),
            epsilon = 1e-4
        );
        let trace = r.trace.unwrap();
        assert_eq!(trace.starts, 8);
        assert_eq!(trace.best_per_start.len(), 8);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let sc = Scenario::counting_homodyne().with_all_settings_free();
        let cfg = OptimizerConfig {
            starts: 3,
            simplex: SimplexOptions {
                max_evals: 20,
                ..SimplexOptions::default()
            },
            ..OptimizerConfig::default()
        };
        assert!(matches!(optimize(&sc, &cfg), Err(Error::OptimizerNonConvergence { starts: 3, .. })));
    }
}
