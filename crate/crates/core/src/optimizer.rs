//! Derivative-free bound-constrained maximization: a Nelder-Mead simplex
//! with reflection/expansion/contraction/shrink and projection onto the
//! box. Components whose lower and upper bounds coincide are frozen.
//!
//! The objective may return −∞ to flag a failed evaluation (e.g. a
//! non-positive-definite covariance); such points simply rank worst and
//! the simplex retreats from them.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub start: Vec<f64>,
    /// Stop when the relative spread of the simplex falls below this.
    pub xtol_rel: f64,
    pub max_evals: usize,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if self.upper.len() != d || self.start.len() != d {
            return Err(Error::InvalidParameter("bounds/start dimension mismatch".into()));
        }
        for i in 0..d {
            if !(self.lower[i] <= self.upper[i]) {
                return Err(Error::InvalidParameter(format!(
                    "lower[{i}]={} exceeds upper[{i}]={}",
                    self.lower[i], self.upper[i]
                )));
            }
            if self.start[i] < self.lower[i] || self.start[i] > self.upper[i] {
                return Err(Error::InvalidParameter(format!("start[{i}] outside bounds")));
            }
        }
        if !(self.xtol_rel > 0.0) {
            return Err(Error::InvalidParameter("xtol_rel must be > 0".into()));
        }
        if self.max_evals < 1 {
            return Err(Error::InvalidParameter("max_evals must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub x: Vec<f64>,
    /// Maximized objective value.
    pub fval: f64,
    pub evaluations: usize,
    /// Every evaluation in order: (point, objective).
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Maximize `f` over the box. Returns `FitFailed` if no evaluation ever
/// produced a finite value.
pub fn maximize<F>(mut f: F, cfg: &OptimizerConfig) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let free: Vec<usize> = (0..cfg.lower.len())
        .filter(|&i| cfg.lower[i] < cfg.upper[i])
        .collect();

    let mut trace: Vec<(Vec<f64>, f64)> = Vec::new();
    // minimize the negated objective
    let mut eval = |x: &[f64], trace: &mut Vec<(Vec<f64>, f64)>| -> f64 {
        let v = f(x);
        trace.push((x.to_vec(), v));
        -v
    };

    let full = cfg.start.clone();
    if free.is_empty() || cfg.max_evals == 1 {
        let v = eval(&full, &mut trace);
        return finish(trace, v, full);
    }

    let clamp = |x: &mut Vec<f64>| {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = xi.clamp(cfg.lower[i], cfg.upper[i]);
        }
    };

    // initial simplex: start plus one perturbed vertex per free dimension
    let mut simplex: Vec<Vec<f64>> = vec![full.clone()];
    for &d in &free {
        let mut v = full.clone();
        let step = 0.1 * (cfg.upper[d] - cfg.lower[d]);
        v[d] = if v[d] + step <= cfg.upper[d] { v[d] + step } else { v[d] - step };
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = Vec::new();
    for v in &simplex {
        if trace.len() >= cfg.max_evals {
            break;
        }
        fvals.push(eval(v, &mut trace));
    }
    // budget exhausted while seeding the simplex: fall through to best-of-trace
    simplex.truncate(fvals.len());

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while simplex.len() > free.len() && trace.len() < cfg.max_evals {
        // sort ascending by negated objective (best first)
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).expect("no NaN objective"));
        let reorder = |v: &Vec<Vec<f64>>| order.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        simplex = reorder(&simplex);
        fvals = order.iter().map(|&i| fvals[i]).collect();

        if converged(&simplex, &free, cfg.xtol_rel) {
            break;
        }

        let worst = simplex.len() - 1;
        // centroid of all but the worst, free dims only
        let mut centroid = simplex[0].clone();
        for &d in &free {
            centroid[d] = simplex[..worst].iter().map(|v| v[d]).sum::<f64>() / worst as f64;
        }

        let blend = |a: &Vec<f64>, b: &Vec<f64>, t: f64| {
            let mut out = a.clone();
            for &d in &free {
                out[d] = a[d] + t * (b[d] - a[d]);
            }
            out
        };

        let mut reflected = blend(&centroid, &simplex[worst], -alpha);
        clamp(&mut reflected);
        let fr = eval(&reflected, &mut trace);

        if fr < fvals[0] {
            if trace.len() < cfg.max_evals {
                let mut expanded = blend(&centroid, &simplex[worst], -gamma);
                clamp(&mut expanded);
                let fe = eval(&expanded, &mut trace);
                if fe < fr {
                    simplex[worst] = expanded;
                    fvals[worst] = fe;
                    continue;
                }
            }
            simplex[worst] = reflected;
            fvals[worst] = fr;
        } else if fr < fvals[worst - 1] {
            simplex[worst] = reflected;
            fvals[worst] = fr;
        } else {
            if trace.len() >= cfg.max_evals {
                break;
            }
            let mut contracted = blend(&centroid, &simplex[worst], rho);
            clamp(&mut contracted);
            let fc = eval(&contracted, &mut trace);
            if fc < fvals[worst] {
                simplex[worst] = contracted;
                fvals[worst] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..simplex.len() {
                    if trace.len() >= cfg.max_evals {
                        break;
                    }
                    simplex[i] = blend(&simplex[0], &simplex[i], sigma);
                    clamp(&mut simplex[i]);
                    fvals[i] = eval(&simplex[i], &mut trace);
                }
            }
        }
    }

    let best = trace
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).expect("no NaN objective"))
        .map(|(i, _)| i)
        .expect("at least one evaluation");
    let x = trace[best].0.clone();
    let v = -trace[best].1;
    finish(trace, v, x)
}

fn finish(trace: Vec<(Vec<f64>, f64)>, neg_best: f64, x: Vec<f64>) -> Result<OptResult> {
    let fval = -neg_best;
    if !fval.is_finite() {
        return Err(Error::FitFailed);
    }
    Ok(OptResult { x, fval, evaluations: trace.len(), trace })
}

fn converged(simplex: &[Vec<f64>], free: &[usize], xtol_rel: f64) -> bool {
    free.iter().all(|&d| {
        let lo = simplex.iter().map(|v| v[d]).fold(f64::INFINITY, f64::min);
        let hi = simplex.iter().map(|v| v[d]).fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) <= xtol_rel * hi.abs().max(lo.abs()).max(1e-12)
    })
}
