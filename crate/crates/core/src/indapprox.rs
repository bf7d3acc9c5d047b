//! Independent-blocks (IND) approximation.
//!
//! Off-diagonal tiles outside the s×s diagonal super tiles are treated as
//! structural zeros: under the approximated model the super blocks are
//! independent, so the Cholesky factorization (and hence the likelihood)
//! decomposes into one small problem per block. Zero tiles are never
//! allocated, so no kernel is ever scheduled on them.

use crate::covariance::MaternParams;
use crate::error::{Error, Result};
use crate::likelihood::{log_likelihood, Approximation, LikelihoodProblem};
use crate::tile::{Symmetry, TileMatrix};
use crate::tilealg::{cholesky_stream, tile_cholesky};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuperTileConfig {
    /// Super-tile edge length, in tiles.
    pub s: usize,
}

impl SuperTileConfig {
    pub fn new(s: usize) -> Result<Self> {
        if s < 1 {
            return Err(Error::InvalidParameter("super tile edge must be >= 1".into()));
        }
        Ok(SuperTileConfig { s })
    }
}

/// Masked copy of a symmetric-lower tile matrix: tile (i, j) survives iff
/// ⌊i/s⌋ == ⌊j/s⌋, everything else becomes a structural zero. Idempotent;
/// s ≥ p leaves the matrix unchanged.
pub fn ind_mask(a: &TileMatrix, cfg: SuperTileConfig) -> Result<TileMatrix> {
    if !a.is_square() || a.symmetry() != Symmetry::SymmetricLowerPd {
        return Err(Error::ShapeMismatch(
            "IND mask needs square symmetric-lower storage".into(),
        ));
    }
    let masked = TileMatrix::new_symmetric_lower_banded(a.order(), a.nb(), cfg.s);
    for i in 0..a.tile_rows() {
        for j in 0..=i {
            let Some(dst) = masked.tile(i, j) else { continue };
            let src = a
                .tile(i, j)
                .ok_or_else(|| Error::ShapeMismatch(format!("missing source tile ({i},{j})")))?;
            dst.write().data.copy_from_slice(&src.read().data);
        }
    }
    Ok(masked)
}

/// Factor a masked block-diagonal matrix in place. This is just the tile
/// Cholesky: its stream skips structural zeros, so only the per-block
/// kernels are scheduled and the blocks factor independently.
pub fn ind_cholesky(a_masked: &TileMatrix, workers: usize) -> Result<()> {
    tile_cholesky(a_masked, workers)
}

/// Number of kernels the Cholesky stream would schedule on this matrix —
/// the accounting hook used to verify zero tiles never reach the scheduler.
pub fn cholesky_task_count(a: &TileMatrix) -> Result<usize> {
    Ok(cholesky_stream(a)?.len())
}

/// Log-likelihood under the IND model; the problem must carry an
/// [`Approximation::Ind`] mode.
pub fn ind_log_likelihood(p: &LikelihoodProblem, theta: &MaternParams) -> Result<f64> {
    match p.approx() {
        Approximation::Ind { .. } => log_likelihood(p, theta),
        Approximation::Exact => Err(Error::InvalidParameter(
            "problem is configured for the exact path, not IND".into(),
        )),
    }
}
