//! Nelder–Mead downhill simplex minimization.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Stop once every vertex lies within `xtol` of the best one (max norm)...
    pub xtol: f64,
    /// ...and every vertex value lies within `ftol` of the best value.
    pub ftol: f64,
    pub max_evals: usize,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Fresh simplices rebuilt around the converged point; stops early once
    /// a restart no longer improves by more than `ftol`.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-8,
            ftol: 1e-10,
            max_evals: 20_000,
            initial_step: 0.5,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Minimum {
    let mut best = run(&mut f, x0, opts, opts.max_evals);
    let mut evals = best.evals;
    for _ in 0..opts.restarts {
        if evals >= opts.max_evals {
            break;
        }
        let next = run(&mut f, &best.x, opts, opts.max_evals - evals);
        evals += next.evals;
        let improved = next.value < best.value - opts.ftol;
        if next.value <= best.value {
            best = Minimum { evals, ..next };
        }
        if !improved {
            break;
        }
    }
    best.evals = evals;
    best
}

fn run<F: FnMut(&[f64]) -> f64>(f: &mut F, x0: &[f64], opts: &SimplexOptions, budget: usize) -> Minimum {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut converged = false;

    while evals < budget {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (lo, hi) = (order[0], order[n]);
        let spread_x = pts
            .iter()
            .flat_map(|p| p.iter().zip(&pts[lo]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread_f = vals.iter().map(|v| (v - vals[lo]).abs()).fold(0.0, f64::max);
        if spread_x <= opts.xtol && spread_f <= opts.ftol {
            converged = true;
            break;
        }

        let second = order[n - 1];
        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[k]) {
                *c += x / n as f64;
            }
        }
        let toward = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&pts[hi]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = toward(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < vals[lo] {
            let xe = toward(REFLECT * EXPAND);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[hi] = xe;
                vals[hi] = fe;
            } else {
                pts[hi] = xr;
                vals[hi] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[hi] = xr;
            vals[hi] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[hi] {
            let xc = toward(REFLECT * CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = toward(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < vals[hi].min(fr) {
            pts[hi] = xc;
            vals[hi] = fc;
            continue;
        }
        let anchor = pts[lo].clone();
        for &k in &order[1..] {
            for (x, a) in pts[k].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            vals[k] = eval(&pts[k], &mut evals);
        }
    }

    let lo = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty simplex");
    Minimum {
        x: pts[lo].clone(),
        value: vals[lo],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_bowl() {
        let m = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5,
            &[5.0, 5.0],
            &SimplexOptions::default(),
        );
        assert!(m.converged);
        assert_abs_diff_eq!(m.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.x[1], -2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.value, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn rosenbrock() {
        let opts = SimplexOptions {
            xtol: 1e-10,
            ftol: 1e-14,
            ..SimplexOptions::default()
        };
        let m = minimize(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        assert_abs_diff_eq!(m.x[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(m.x[1], 1.0, epsilon = 1e-5);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let opts = SimplexOptions {
            max_evals: 10,
            ..SimplexOptions::default()
        };
        let m = minimize(|x| x.iter().map(|v| v * v).sum(), &[3.0; 5], &opts);
        assert!(!m.converged);
        // A budget check happens once per iteration; a shrink can overshoot by n + 2.
        assert!(m.evals <= 10 + 5 + 2);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let m = minimize(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.3).powi(2) + x[1] * x[1] },
            &[1.0, 1.0],
            &SimplexOptions::default(),
        );
        assert_abs_diff_eq!(m.x[0], 0.3, epsilon = 1e-6);
    }
}
