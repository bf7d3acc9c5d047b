//! Kriging prediction and k-fold cross-validation.
//!
//! For a zero-mean field the best linear unbiased predictor of the unknown
//! vector Z₁ given observations Z₂ is Z₁ = Σ₁₂ Σ₂₂⁻¹ Z₂; the conditional
//! variance of target i is C(0) − c_iᵀ Σ₂₂⁻¹ c_i with c_i the cross
//! covariance column. Everything runs on the tile layer: one posv for the
//! solve, one gemv for the prediction, one forward solve per target for the
//! variances.

use crate::covariance::{gen_cov_cross, gen_cov_matrix, gen_cov_matrix_ind, MaternParams};
use crate::error::{Error, Result};
use crate::geometry::{distance_matrix, LocationSet};
use crate::likelihood::Approximation;
use crate::tile::TileVector;
use crate::tilealg::{tile_gemv, tile_posv, tile_trsm};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct KrigingConfig {
    pub params: MaternParams,
    pub nb: usize,
    pub workers: usize,
    /// Approximation applied to the observation covariance Σ₂₂; the cross
    /// covariance Σ₁₂ always stays dense.
    pub approx: Approximation,
}

/// Predict the field at `targets` from observations `z` at `sources`.
pub fn krige(
    sources: &LocationSet,
    z: &[f64],
    targets: &LocationSet,
    cfg: &KrigingConfig,
) -> Result<Vec<f64>> {
    let (pred, _) = krige_impl(sources, z, targets, cfg, false)?;
    Ok(pred)
}

/// As [`krige`], additionally returning the conditional (kriging) variance
/// at each target.
pub fn krige_with_variance(
    sources: &LocationSet,
    z: &[f64],
    targets: &LocationSet,
    cfg: &KrigingConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (pred, var) = krige_impl(sources, z, targets, cfg, true)?;
    Ok((pred, var.expect("variance requested")))
}

fn krige_impl(
    sources: &LocationSet,
    z: &[f64],
    targets: &LocationSet,
    cfg: &KrigingConfig,
    want_variance: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = sources.n();
    if z.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} observations for {} source locations",
            z.len(),
            n
        )));
    }
    if targets.n() == 0 {
        return Ok((Vec::new(), want_variance.then(Vec::new)));
    }

    let d22 = distance_matrix(sources, sources)?;
    let d12 = distance_matrix(targets, sources)?;
    let sigma22 = match cfg.approx {
        Approximation::Exact => gen_cov_matrix(&d22, &cfg.params, cfg.nb, cfg.workers)?,
        Approximation::Ind { super_tile } => {
            gen_cov_matrix_ind(&d22, &cfg.params, cfg.nb, super_tile, cfg.workers)?
        }
    };
    let sigma12 = gen_cov_cross(&d12, &cfg.params, cfg.nb, cfg.workers)?;

    // x = Σ₂₂⁻¹ Z₂; on return sigma22 holds the Cholesky factor L
    let x = TileVector::from_slice(z, cfg.nb);
    tile_posv(&sigma22, &x, cfg.workers)?;
    let pred = tile_gemv(&sigma12, &x, cfg.workers)?.to_vec();

    if !want_variance {
        return Ok((pred, None));
    }
    // var_i = C(0) − ‖L⁻¹ c_i‖²
    let sill = cfg.params.sill();
    let dense12 = sigma12.to_dense();
    let mut var = Vec::with_capacity(targets.n());
    for i in 0..targets.n() {
        let ci = TileVector::from_slice(&dense12[i * n..(i + 1) * n], cfg.nb);
        tile_trsm(&sigma22, &ci, cfg.workers)?;
        var.push((sill - ci.dot(&ci)).max(0.0));
    }
    Ok((pred, Some(var)))
}

/// Deterministic k-fold partition: indices are shuffled under sub-stream 2
/// of the seed and dealt into k nearly equal folds.
pub fn fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "fold count {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(2);
    idx.shuffle(&mut rng);
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    Ok(folds)
}

#[derive(Clone, Debug, Serialize)]
pub struct CvResult {
    /// Mean squared prediction error per fold, in fold order.
    pub fold_mse: Vec<f64>,
    /// Pooled mean squared error over all held-out points.
    pub mse: f64,
    pub k: usize,
    pub seed: u64,
}

/// k-fold cross-validated prediction error under fixed parameters: each
/// fold is predicted from the remaining folds by kriging.
pub fn k_fold_cv(
    locations: &LocationSet,
    z: &[f64],
    k: usize,
    seed: u64,
    cfg: &KrigingConfig,
) -> Result<CvResult> {
    let n = locations.n();
    if z.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} observations for {} locations",
            z.len(),
            n
        )));
    }
    let folds = fold_partition(n, k, seed)?;
    let mut fold_mse = Vec::with_capacity(k);
    let mut sse = 0.0;
    for (f, held) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..n).filter(|i| !held.contains(i)).collect();
        let run = || -> Result<f64> {
            let sources = locations.subset(&train);
            let targets = locations.subset(held);
            let zt: Vec<f64> = train.iter().map(|&i| z[i]).collect();
            let pred = krige(&sources, &zt, &targets, cfg)?;
            Ok(held
                .iter()
                .zip(&pred)
                .map(|(&i, p)| (z[i] - p) * (z[i] - p))
                .sum())
        };
        let fold_sse = run().map_err(|e| Error::FoldFailed { fold: f, source: Box::new(e) })?;
        fold_mse.push(fold_sse / held.len() as f64);
        sse += fold_sse;
    }
    Ok(CvResult { fold_mse, mse: sse / n as f64, k, seed })
}
