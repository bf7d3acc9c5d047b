//! Matérn covariance evaluation and covariance-matrix generation.
//!
//! C(r; θ) = θ1 / (2^{θ3−1} Γ(θ3)) · (r/θ2)^{θ3} · K_{θ3}(r/θ2), with the
//! analytic limit C(0) = θ1 (plus the optional nugget on the diagonal).
//! θ3 = 1/2 reduces to the exponential model θ1·exp(−r/θ2), θ3 = 1 to the
//! Whittle model θ1·(r/θ2)·K₁(r/θ2).

mod bessel;

pub use bessel::bessel_k;
pub(crate) use bessel::bessel_k_unchecked;

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::scheduler::{run_stream, TaskStream};
use crate::tile::{TileMatrix, TileVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Matérn parameters: θ1 variance, θ2 range, θ3 smoothness, plus an
/// optional nugget guarding positive definiteness (0 by default).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaternParams {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    #[serde(default)]
    pub nugget: f64,
}

impl MaternParams {
    pub fn new(theta1: f64, theta2: f64, theta3: f64, nugget: f64) -> Result<Self> {
        for (name, v) in [("theta1", theta1), ("theta2", theta2), ("theta3", theta3)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(nugget >= 0.0) || !nugget.is_finite() {
            return Err(Error::InvalidParameter(format!("nugget must be finite and >= 0, got {nugget}")));
        }
        Ok(MaternParams { theta1, theta2, theta3, nugget })
    }

    /// Marginal variance at distance zero.
    pub fn sill(&self) -> f64 {
        self.theta1 + self.nugget
    }
}

/// Matérn evaluator with the θ-dependent prefactor precomputed, so matrix
/// generation pays one pow + one Bessel per entry.
#[derive(Clone, Copy, Debug)]
pub struct Matern {
    params: MaternParams,
    // θ1 · exp(−(θ3−1)·ln 2 − ln Γ(θ3))
    coef: f64,
}

impl Matern {
    pub fn new(params: MaternParams) -> Self {
        let nu = params.theta3;
        let coef = params.theta1 * (-(nu - 1.0) * std::f64::consts::LN_2 - ln_gamma(nu)).exp();
        Matern { params, coef }
    }

    /// Covariance at lag r, nugget excluded (the diagonal owns the nugget).
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            return self.params.theta1;
        }
        let x = r / self.params.theta2;
        self.coef * x.powf(self.params.theta3) * bessel_k_unchecked(self.params.theta3, x)
    }
}

/// Matérn covariance at lag `r` per the operation contract: the r = 0 limit
/// is θ1 plus the nugget.
pub fn matern(r: f64, p: &MaternParams) -> f64 {
    if r == 0.0 {
        return p.sill();
    }
    Matern::new(*p).eval(r)
}

enum Mask {
    Dense,
    /// Keep tile (i, j) iff ⌊i/s⌋ == ⌊j/s⌋.
    Banded { super_tile: usize },
}

/// Covariance matrix of one location set against itself: symmetric-lower
/// tile storage with the nugget on the diagonal. The distance matrix must
/// be square.
pub fn gen_cov_matrix(d: &DistanceMatrix, p: &MaternParams, nb: usize, workers: usize) -> Result<TileMatrix> {
    if d.rows() != d.cols() {
        return Err(Error::ShapeMismatch(
            "symmetric covariance needs a square distance matrix".into(),
        ));
    }
    gen_cov(d, p, nb, Mask::Dense, workers, true)
}

/// Cross-covariance between two location sets: general storage, no nugget
/// (the nugget models measurement noise, which only reaches the diagonal of
/// an observation set's own covariance).
pub fn gen_cov_cross(d: &DistanceMatrix, p: &MaternParams, nb: usize, workers: usize) -> Result<TileMatrix> {
    gen_cov(d, p, nb, Mask::Dense, workers, false)
}

/// Independent-blocks covariance: tiles outside the s×s diagonal super
/// tiles are structural zeros and are never allocated or filled.
pub fn gen_cov_matrix_ind(
    d: &DistanceMatrix,
    p: &MaternParams,
    nb: usize,
    super_tile: usize,
    workers: usize,
) -> Result<TileMatrix> {
    if d.rows() != d.cols() {
        return Err(Error::ShapeMismatch("IND masking needs a square distance matrix".into()));
    }
    if super_tile < 1 {
        return Err(Error::InvalidParameter("super tile edge must be >= 1".into()));
    }
    gen_cov(d, p, nb, Mask::Banded { super_tile }, workers, true)
}

fn gen_cov(
    d: &DistanceMatrix,
    p: &MaternParams,
    nb: usize,
    mask: Mask,
    workers: usize,
    symmetric: bool,
) -> Result<TileMatrix> {
    let matern = Matern::new(*p);
    let nugget = p.nugget;
    let sigma = match (symmetric, &mask) {
        (true, Mask::Dense) => TileMatrix::new_symmetric_lower(d.rows(), nb),
        (true, Mask::Banded { super_tile }) => {
            TileMatrix::new_symmetric_lower_banded(d.rows(), nb, *super_tile)
        }
        (false, Mask::Dense) => TileMatrix::new_general(d.rows(), d.cols(), nb),
        (false, Mask::Banded { .. }) => unreachable!("cross covariance is never masked"),
    };
    let mut stream = TaskStream::new();
    for ti in 0..sigma.tile_rows() {
        for tj in 0..sigma.tile_cols() {
            let Some(h) = sigma.tile(ti, tj) else { continue };
            let h = h.clone();
            let (row0, col0) = (ti * nb, tj * nb);
            stream.push("covgen", vec![], vec![h.id()], move || {
                let mut t = h.write();
                for i in 0..t.rows {
                    for j in 0..t.cols {
                        let (gi, gj) = (row0 + i, col0 + j);
                        let v = if symmetric && gi == gj {
                            matern.params.theta1 + nugget
                        } else {
                            matern.eval(d.get(gi, gj))
                        };
                        *t.at_mut(i, j) = v;
                    }
                }
                Ok(())
            });
        }
    }
    run_stream(stream, workers)?;
    Ok(sigma)
}

/// Covariance vector between one target location and a set (used by the
/// conditional-variance path). Kept on the tile layout for conformality.
pub fn gen_cov_vector(dists: &[f64], p: &MaternParams, nb: usize) -> TileVector {
    let matern = Matern::new(*p);
    let vals: Vec<f64> = dists.iter().map(|&r| matern.eval(r)).collect();
    TileVector::from_slice(&vals, nb)
}
