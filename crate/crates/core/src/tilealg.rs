//! Tile-level compositions: Cholesky, triangular solve/multiply, matrix
//! multiply, solve-with-factorization and the log-determinant.
//!
//! Each composition builds a task stream over tile handles and hands it to
//! the scheduler; structural zero tiles (`None` in the grid) are skipped at
//! stream-construction time, so a block-diagonal matrix is factored without
//! ever scheduling a kernel on a zero block.

use crate::error::{Error, Result};
use crate::kernels;
use crate::scheduler::{build_dag, run_stream, TaskStream, TraceEvent};
use crate::tile::{Symmetry, TileMatrix, TileVector};

/// Right-looking tile Cholesky task stream: potrf on the diagonal, panel
/// trsm down the column, syrk/gemm trailing update.
pub fn cholesky_stream(a: &TileMatrix) -> Result<TaskStream<'_>> {
    if !a.is_square() || a.symmetry() != Symmetry::SymmetricLowerPd {
        return Err(Error::ShapeMismatch(
            "tile Cholesky needs square symmetric-lower storage".into(),
        ));
    }
    let p = a.tile_rows();
    let nb = a.nb();
    let mut stream = TaskStream::new();
    for k in 0..p {
        let diag = a.tile(k, k).expect("diagonal tiles are always stored").clone();
        let pivot_base = k * nb;
        stream.push("potrf", vec![], vec![diag.id()], move || {
            kernels::potrf(&mut diag.write()).map_err(|e| match e {
                Error::NotPositiveDefinite { pivot } => {
                    Error::NotPositiveDefinite { pivot: pivot_base + pivot }
                }
                other => other,
            })
        });
        for i in (k + 1)..p {
            let Some(panel) = a.tile(i, k) else { continue };
            let panel = panel.clone();
            let lkk = a.tile(k, k).unwrap().clone();
            stream.push("trsm", vec![lkk.id()], vec![panel.id()], move || {
                kernels::trsm_right_lower_trans(&lkk.read(), &mut panel.write())
            });
        }
        for i in (k + 1)..p {
            let Some(aik) = a.tile(i, k) else { continue };
            let aik = aik.clone();
            let aii = a.tile(i, i).unwrap().clone();
            stream.push("syrk", vec![aik.id()], vec![aii.id()], move || {
                kernels::syrk_lower(&aik.read(), &mut aii.write())
            });
            for j in (k + 1)..i {
                let Some(ajk) = a.tile(j, k) else { continue };
                let Some(aij) = a.tile(i, j) else { continue };
                let (aik, ajk, aij) = (a.tile(i, k).unwrap().clone(), ajk.clone(), aij.clone());
                stream.push("gemm", vec![aik.id(), ajk.id()], vec![aij.id()], move || {
                    kernels::gemm_nt(&aik.read(), &ajk.read(), &mut aij.write())
                });
            }
        }
    }
    Ok(stream)
}

/// In-place tile Cholesky: on return the lower tiles of `a` hold L.
pub fn tile_cholesky(a: &TileMatrix, workers: usize) -> Result<()> {
    run_stream(cholesky_stream(a)?, workers)
}

/// Traced variant for occupancy analysis.
pub fn tile_cholesky_traced(a: &TileMatrix, workers: usize) -> (Result<()>, Vec<TraceEvent>) {
    match cholesky_stream(a) {
        Ok(s) => build_dag(s).execute_traced(workers),
        Err(e) => (Err(e), Vec::new()),
    }
}

fn check_conformal(l: &TileMatrix, x: &TileVector, what: &str) -> Result<()> {
    if !l.is_square() || l.order() != x.len() || l.nb() != x.nb() {
        return Err(Error::ShapeMismatch(format!(
            "{what}: matrix {}x{} nb={} vs vector len={} nb={}",
            l.nrows(),
            l.ncols(),
            l.nb(),
            x.len(),
            x.nb()
        )));
    }
    Ok(())
}

/// Forward-solve stream: x ← L⁻¹ x over block rows.
pub fn trsm_stream<'a>(l: &'a TileMatrix, x: &'a TileVector) -> Result<TaskStream<'a>> {
    check_conformal(l, x, "tile_trsm")?;
    let p = l.tile_rows();
    let mut stream = TaskStream::new();
    for i in 0..p {
        let xi = x.block(i).clone();
        for j in 0..i {
            let Some(lij) = l.tile(i, j) else { continue };
            let (lij, xj, xi) = (lij.clone(), x.block(j).clone(), xi.clone());
            stream.push("gemv", vec![lij.id(), xj.id()], vec![xi.id()], move || {
                kernels::gemv_sub(&lij.read(), &xj.read(), &mut xi.write())
            });
        }
        let lii = l.tile(i, i).expect("diagonal tile").clone();
        stream.push("trsv", vec![lii.id()], vec![xi.id()], move || {
            kernels::trsv_lower(&lii.read(), &mut xi.write())
        });
    }
    Ok(stream)
}

/// x ← L⁻¹ x (forward substitution across the tile grid).
pub fn tile_trsm(l: &TileMatrix, x: &TileVector, workers: usize) -> Result<()> {
    run_stream(trsm_stream(l, x)?, workers)
}

/// x ← L⁻ᵀ x (backward substitution across the tile grid).
pub fn tile_trsm_trans(l: &TileMatrix, x: &TileVector, workers: usize) -> Result<()> {
    check_conformal(l, x, "tile_trsm_trans")?;
    let p = l.tile_rows();
    let mut stream = TaskStream::new();
    for i in (0..p).rev() {
        let xi = x.block(i).clone();
        for j in (i + 1)..p {
            let Some(lji) = l.tile(j, i) else { continue };
            let (lji, xj, xi) = (lji.clone(), x.block(j).clone(), xi.clone());
            stream.push("gemv_t", vec![lji.id(), xj.id()], vec![xi.id()], move || {
                kernels::gemv_trans_sub(&lji.read(), &xj.read(), &mut xi.write())
            });
        }
        let lii = l.tile(i, i).expect("diagonal tile").clone();
        stream.push("trsv_t", vec![lii.id()], vec![xi.id()], move || {
            kernels::trsv_lower_trans(&lii.read(), &mut xi.write())
        });
    }
    run_stream(stream, workers)
}

/// x ← L x with L a lower-triangular tile matrix.
///
/// Block rows are processed bottom-up so every gemv still sees the original
/// lower blocks of x; the scheduler's write-after-read edges enforce this
/// without any explicit barrier.
pub fn tile_trmm(l: &TileMatrix, x: &TileVector, workers: usize) -> Result<()> {
    check_conformal(l, x, "tile_trmm")?;
    let p = l.tile_rows();
    let mut stream = TaskStream::new();
    for i in (0..p).rev() {
        let xi = x.block(i).clone();
        let lii = l.tile(i, i).expect("diagonal tile").clone();
        {
            let xi = xi.clone();
            stream.push("trmv", vec![lii.id()], vec![xi.id()], move || {
                kernels::trmv_lower(&lii.read(), &mut xi.write())
            });
        }
        for j in 0..i {
            let Some(lij) = l.tile(i, j) else { continue };
            let (lij, xj, xi) = (lij.clone(), x.block(j).clone(), xi.clone());
            stream.push("gemv", vec![lij.id(), xj.id()], vec![xi.id()], move || {
                kernels::gemv_add(&lij.read(), &xj.read(), &mut xi.write())
            });
        }
    }
    run_stream(stream, workers)
}

/// C = A·B for general tile matrices.
pub fn tile_gemm(a: &TileMatrix, b: &TileMatrix, workers: usize) -> Result<TileMatrix> {
    if a.ncols() != b.nrows() || a.nb() != b.nb() {
        return Err(Error::ShapeMismatch(format!(
            "tile_gemm: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let c = TileMatrix::new_general(a.nrows(), b.ncols(), a.nb());
    let mut stream = TaskStream::new();
    for i in 0..c.tile_rows() {
        for j in 0..c.tile_cols() {
            let cij = c.tile(i, j).unwrap().clone();
            for k in 0..a.tile_cols() {
                let (Some(aik), Some(bkj)) = (a.tile(i, k), b.tile(k, j)) else { continue };
                let (aik, bkj, cij) = (aik.clone(), bkj.clone(), cij.clone());
                stream.push("gemm_nn", vec![aik.id(), bkj.id()], vec![cij.id()], move || {
                    kernels::gemm_nn_add(&aik.read(), &bkj.read(), &mut cij.write())
                });
            }
        }
    }
    run_stream(stream, workers)?;
    Ok(c)
}

/// y = A·x for a general tile matrix.
pub fn tile_gemv(a: &TileMatrix, x: &TileVector, workers: usize) -> Result<TileVector> {
    if a.ncols() != x.len() || a.nb() != x.nb() {
        return Err(Error::ShapeMismatch(format!(
            "tile_gemv: {}x{} times len {}",
            a.nrows(),
            a.ncols(),
            x.len()
        )));
    }
    let y = TileVector::zeros(a.nrows(), a.nb());
    let mut stream = TaskStream::new();
    for i in 0..a.tile_rows() {
        let yi = y.block(i).clone();
        for j in 0..a.tile_cols() {
            let Some(aij) = a.tile(i, j) else { continue };
            let (aij, xj, yi) = (aij.clone(), x.block(j).clone(), yi.clone());
            stream.push("gemv", vec![aij.id(), xj.id()], vec![yi.id()], move || {
                kernels::gemv_add(&aij.read(), &xj.read(), &mut yi.write())
            });
        }
    }
    run_stream(stream, workers)?;
    Ok(y)
}

/// Solve A x = b for SPD A: Cholesky then the two triangular sweeps, all in
/// one task graph. On return `a` holds L and `b` holds the solution.
pub fn tile_posv(a: &TileMatrix, b: &TileVector, workers: usize) -> Result<()> {
    check_conformal(a, b, "tile_posv")?;
    let mut stream = cholesky_stream(a)?;
    stream.extend(trsm_stream(a, b)?);
    // backward sweep, dependencies inferred against the forward tasks
    let p = a.tile_rows();
    for i in (0..p).rev() {
        let xi = b.block(i).clone();
        for j in (i + 1)..p {
            let Some(lji) = a.tile(j, i) else { continue };
            let (lji, xj, xi) = (lji.clone(), b.block(j).clone(), xi.clone());
            stream.push("gemv_t", vec![lji.id(), xj.id()], vec![xi.id()], move || {
                kernels::gemv_trans_sub(&lji.read(), &xj.read(), &mut xi.write())
            });
        }
        let lii = a.tile(i, i).expect("diagonal tile").clone();
        stream.push("trsv_t", vec![lii.id()], vec![xi.id()], move || {
            kernels::trsv_lower_trans(&lii.read(), &mut xi.write())
        });
    }
    run_stream(stream, workers)
}

/// log|Σ| = 2·Σ log L_ii from the diagonal of the Cholesky factor.
pub fn log_det_from_factor(l: &TileMatrix) -> Result<f64> {
    if !l.is_square() {
        return Err(Error::ShapeMismatch("log-determinant needs a square factor".into()));
    }
    let mut acc = 0.0;
    for k in 0..l.tile_rows() {
        let tile = l
            .tile(k, k)
            .ok_or_else(|| Error::ShapeMismatch("missing diagonal tile".into()))?
            .read();
        for i in 0..tile.rows {
            let d = tile.at(i, i);
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::Domain(format!(
                    "nonpositive factor diagonal {d} at index {}",
                    k * l.nb() + i
                )));
            }
            acc += d.ln();
        }
    }
    Ok(2.0 * acc)
}
