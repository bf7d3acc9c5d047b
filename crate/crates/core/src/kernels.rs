//! Per-tile dense kernels. Each one is a pure function of its block
//! arguments; compositions in `tilealg` wire them into task streams.
//!
//! Sign conventions follow the right-looking Cholesky trailing update:
//! syrk and gemm *subtract* their product from the accumulator.

use crate::error::{Error, Result};
use crate::tile::Tile;

/// Dot product with four independent accumulators. The summation order is
/// fixed, so results are deterministic; the split just breaks the serial
/// add dependency so the loop pipelines.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let (pa, pb) = (&a[4 * i..4 * i + 4], &b[4 * i..4 * i + 4]);
        s0 += pa[0] * pb[0];
        s1 += pa[1] * pb[1];
        s2 += pa[2] * pb[2];
        s3 += pa[3] * pb[3];
    }
    let mut acc = (s0 + s1) + (s2 + s3);
    for i in 4 * chunks..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

fn shape_err(what: &str) -> Error {
    Error::ShapeMismatch(what.to_string())
}

/// In-place lower Cholesky of a symmetric PD tile. The strict upper
/// triangle is zeroed so the tile holds exactly L afterwards.
pub fn potrf(a: &mut Tile) -> Result<()> {
    if a.rows != a.cols {
        return Err(shape_err("potrf needs a square tile"));
    }
    let n = a.rows;
    for j in 0..n {
        let s = {
            let row_j = a.row(j);
            a.at(j, j) - dot(&row_j[..j], &row_j[..j])
        };
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let d = s.sqrt();
        *a.at_mut(j, j) = d;
        for i in (j + 1)..n {
            let v = {
                let (top, bottom) = a.data.split_at(i * n);
                let row_j = &top[j * n..j * n + j];
                let row_i = &bottom[..j];
                (bottom[j] - dot(row_i, row_j)) / d
            };
            *a.at_mut(i, j) = v;
        }
        for k in (j + 1)..n {
            *a.at_mut(j, k) = 0.0;
        }
    }
    Ok(())
}

/// B ← B · L⁻ᵀ with L lower-triangular (the Cholesky panel solve).
pub fn trsm_right_lower_trans(l: &Tile, b: &mut Tile) -> Result<()> {
    if l.rows != l.cols || b.cols != l.rows {
        return Err(shape_err("trsm operand shapes"));
    }
    let n = l.rows;
    for i in 0..b.rows {
        for j in 0..n {
            let v = {
                let row_b = b.row(i);
                (row_b[j] - dot(&row_b[..j], &l.row(j)[..j])) / l.at(j, j)
            };
            *b.at_mut(i, j) = v;
        }
    }
    Ok(())
}

/// C ← C − A·Aᵀ, lower triangle only (diagonal trailing update).
pub fn syrk_lower(a: &Tile, c: &mut Tile) -> Result<()> {
    if c.rows != c.cols || a.rows != c.rows {
        return Err(shape_err("syrk operand shapes"));
    }
    for i in 0..c.rows {
        for j in 0..=i {
            *c.at_mut(i, j) -= dot(a.row(i), a.row(j));
        }
    }
    Ok(())
}

/// C ← C − A·Bᵀ (off-diagonal trailing update).
pub fn gemm_nt(a: &Tile, b: &Tile, c: &mut Tile) -> Result<()> {
    if a.rows != c.rows || b.rows != c.cols || a.cols != b.cols {
        return Err(shape_err("gemm_nt operand shapes"));
    }
    for i in 0..c.rows {
        for j in 0..c.cols {
            *c.at_mut(i, j) -= dot(a.row(i), b.row(j));
        }
    }
    Ok(())
}

/// C ← C + A·B.
pub fn gemm_nn_add(a: &Tile, b: &Tile, c: &mut Tile) -> Result<()> {
    if a.rows != c.rows || b.cols != c.cols || a.cols != b.rows {
        return Err(shape_err("gemm_nn operand shapes"));
    }
    for i in 0..c.rows {
        for k in 0..a.cols {
            let aik = a.at(i, k);
            let row_b = b.row(k);
            let row_c = &mut c.data[i * b.cols..(i + 1) * b.cols];
            for (cv, bv) in row_c.iter_mut().zip(row_b) {
                *cv += aik * bv;
            }
        }
    }
    Ok(())
}

/// x ← L⁻¹ x (forward substitution within one diagonal block).
pub fn trsv_lower(l: &Tile, x: &mut Tile) -> Result<()> {
    if l.rows != l.cols || x.rows != l.rows || x.cols != 1 {
        return Err(shape_err("trsv operand shapes"));
    }
    for i in 0..l.rows {
        x.data[i] = (x.data[i] - dot(&l.row(i)[..i], &x.data[..i])) / l.at(i, i);
    }
    Ok(())
}

/// x ← L⁻ᵀ x (backward substitution within one diagonal block).
pub fn trsv_lower_trans(l: &Tile, x: &mut Tile) -> Result<()> {
    if l.rows != l.cols || x.rows != l.rows || x.cols != 1 {
        return Err(shape_err("trsv operand shapes"));
    }
    let n = l.rows;
    for i in (0..n).rev() {
        let mut s = x.data[i];
        for j in (i + 1)..n {
            s -= l.at(j, i) * x.data[j];
        }
        x.data[i] = s / l.at(i, i);
    }
    Ok(())
}

/// x ← L x with L lower-triangular.
pub fn trmv_lower(l: &Tile, x: &mut Tile) -> Result<()> {
    if l.rows != l.cols || x.rows != l.rows || x.cols != 1 {
        return Err(shape_err("trmv operand shapes"));
    }
    for i in (0..l.rows).rev() {
        x.data[i] = dot(&l.row(i)[..=i], &x.data[..=i]);
    }
    Ok(())
}

/// y ← y − A x.
pub fn gemv_sub(a: &Tile, x: &Tile, y: &mut Tile) -> Result<()> {
    if a.cols != x.rows || a.rows != y.rows || x.cols != 1 || y.cols != 1 {
        return Err(shape_err("gemv operand shapes"));
    }
    for i in 0..a.rows {
        y.data[i] -= dot(a.row(i), &x.data);
    }
    Ok(())
}

/// y ← y + A x.
pub fn gemv_add(a: &Tile, x: &Tile, y: &mut Tile) -> Result<()> {
    if a.cols != x.rows || a.rows != y.rows || x.cols != 1 || y.cols != 1 {
        return Err(shape_err("gemv operand shapes"));
    }
    for i in 0..a.rows {
        y.data[i] += dot(a.row(i), &x.data);
    }
    Ok(())
}

/// y ← y − Aᵀ x.
pub fn gemv_trans_sub(a: &Tile, x: &Tile, y: &mut Tile) -> Result<()> {
    if a.rows != x.rows || a.cols != y.rows || x.cols != 1 || y.cols != 1 {
        return Err(shape_err("gemv_trans operand shapes"));
    }
    for i in 0..a.rows {
        let xi = x.data[i];
        for (yv, av) in y.data.iter_mut().zip(a.row(i)) {
            *yv -= av * xi;
        }
    }
    Ok(())
}
