//! Exact (and independent-blocks) Gaussian log-likelihood and its
//! derivative-free maximization.
//!
//! ℓ(θ) = −(n/2)·log 2π − (1/2)·log|Σ(θ)| − (1/2)·Zᵀ Σ(θ)⁻¹ Z, evaluated
//! with one Cholesky and one forward triangular solve: the quadratic form
//! is ‖L⁻¹Z‖².

use crate::covariance::{gen_cov_matrix, gen_cov_matrix_ind, MaternParams};
use crate::error::{Error, Result};
use crate::geometry::{distance_matrix, DistanceMatrix, LocationSet};
use crate::optimizer::{self, OptimizerConfig};
use crate::tile::TileVector;
use crate::tilealg::{log_det_from_factor, tile_cholesky, tile_trsm};
use serde::Serialize;
use std::time::{Duration, Instant};

pub const LN_2PI: f64 = 1.837877066409345483560659472811;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Approximation {
    Exact,
    /// Independent-blocks approximation with the given super-tile edge
    /// (in tiles).
    Ind { super_tile: usize },
}

/// A measurement vector bound to its locations, with the distance matrix
/// precomputed once so repeated likelihood evaluations only pay for the
/// covariance generation and factorization.
pub struct LikelihoodProblem {
    locations: LocationSet,
    z: Vec<f64>,
    nb: usize,
    approx: Approximation,
    workers: usize,
    /// Nugget applied to every candidate θ during fitting.
    nugget: f64,
    distances: DistanceMatrix,
}

impl LikelihoodProblem {
    pub fn new(
        locations: LocationSet,
        z: Vec<f64>,
        nb: usize,
        approx: Approximation,
        workers: usize,
    ) -> Result<Self> {
        Self::with_nugget(locations, z, nb, approx, workers, 0.0)
    }

    pub fn with_nugget(
        locations: LocationSet,
        z: Vec<f64>,
        nb: usize,
        approx: Approximation,
        workers: usize,
        nugget: f64,
    ) -> Result<Self> {
        if z.len() != locations.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} measurements for {} locations",
                z.len(),
                locations.n()
            )));
        }
        if nb < 1 {
            return Err(Error::InvalidParameter("tile size must be >= 1".into()));
        }
        if let Approximation::Ind { super_tile } = approx {
            if super_tile < 1 {
                return Err(Error::InvalidParameter("super tile edge must be >= 1".into()));
            }
        }
        let distances = distance_matrix(&locations, &locations)?;
        Ok(LikelihoodProblem { locations, z, nb, approx, workers, nugget, distances })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn locations(&self) -> &LocationSet {
        &self.locations
    }

    pub fn measurements(&self) -> &[f64] {
        &self.z
    }

    pub fn approx(&self) -> Approximation {
        self.approx
    }

    /// Largest pairwise distance, used to scale default optimizer bounds.
    pub fn domain_diameter(&self) -> f64 {
        self.distances.max()
    }
}

/// One exact (or IND-masked) log-likelihood evaluation.
pub fn log_likelihood(p: &LikelihoodProblem, theta: &MaternParams) -> Result<f64> {
    let sigma = match p.approx {
        Approximation::Exact => gen_cov_matrix(&p.distances, theta, p.nb, p.workers)?,
        Approximation::Ind { super_tile } => {
            gen_cov_matrix_ind(&p.distances, theta, p.nb, super_tile, p.workers)?
        }
    };
    tile_cholesky(&sigma, p.workers)?;
    let zt = TileVector::from_slice(&p.z, p.nb);
    tile_trsm(&sigma, &zt, p.workers)?;
    let quad = zt.dot(&zt);
    let logdet = log_det_from_factor(&sigma)?;
    Ok(-0.5 * quad - 0.5 * logdet - 0.5 * p.n() as f64 * LN_2PI)
}

/// Default fitting configuration: θ1 ∈ [0.01, 5], θ2 ∈ [0.01, 5·diameter],
/// θ3 ∈ [0.1, 2], start at the geometric midpoint of each interval,
/// xtol_rel 1e-5, at most 500 evaluations.
pub fn default_config(p: &LikelihoodProblem) -> OptimizerConfig {
    let lower = vec![0.01, 0.01, 0.1];
    let upper = vec![5.0, 5.0 * p.domain_diameter(), 2.0];
    let start = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| (l * u).sqrt())
        .collect();
    OptimizerConfig { lower, upper, start, xtol_rel: 1e-5, max_evals: 500 }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub theta: MaternParams,
    pub loglik: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub theta_hat: MaternParams,
    pub loglik: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
    /// Wall time of each likelihood evaluation, seconds.
    pub eval_seconds: Vec<f64>,
    pub wall_time: Duration,
}

/// Maximize ℓ(θ) over the box. Evaluations that hit a non-positive-definite
/// covariance count as −∞ and the optimizer retreats from them.
pub fn mle_fit(p: &LikelihoodProblem, cfg: &OptimizerConfig) -> Result<FitResult> {
    let t_start = Instant::now();
    let mut eval_seconds = Vec::new();
    let objective = |x: &[f64]| -> f64 {
        let t0 = Instant::now();
        let value = match MaternParams::new(x[0], x[1], x[2], p.nugget) {
            Ok(theta) => log_likelihood(p, &theta).unwrap_or(f64::NEG_INFINITY),
            Err(_) => f64::NEG_INFINITY,
        };
        eval_seconds.push(t0.elapsed().as_secs_f64());
        value
    };
    let r = optimizer::maximize(objective, cfg)?;
    let theta_hat = MaternParams::new(r.x[0], r.x[1], r.x[2], p.nugget)
        .expect("optimizer stays within positive bounds");
    Ok(FitResult {
        theta_hat,
        loglik: r.fval,
        evaluations: r.evaluations,
        trace: r
            .trace
            .into_iter()
            .map(|(x, v)| TraceEntry {
                theta: MaternParams { theta1: x[0], theta2: x[1], theta3: x[2], nugget: p.nugget },
                loglik: v,
            })
            .collect(),
        eval_seconds,
        wall_time: t_start.elapsed(),
    })
}
