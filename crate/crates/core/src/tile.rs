//! Tile-format matrix and vector storage.
//!
//! A matrix of order `n` is split into an ⌈n/nb⌉ × ⌈n/nb⌉ grid of dense
//! nb×nb blocks (edge tiles ragged, never padded). Each tile carries a
//! process-unique id used by the scheduler for dependency inference, and
//! lives behind its own lock so independent tiles can be touched
//! concurrently.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

/// Opaque identity of a schedulable piece of data.
pub type DataId = u64;

static NEXT_DATA_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> DataId {
    NEXT_DATA_ID.fetch_add(1, Ordering::Relaxed)
}

/// One dense block, row-major.
#[derive(Clone, Debug)]
pub struct Tile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tile {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tile { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Shared, lockable handle to a tile.
#[derive(Clone, Debug)]
pub struct TileHandle {
    id: DataId,
    cell: Arc<RwLock<Tile>>,
}

impl TileHandle {
    pub fn new(tile: Tile) -> Self {
        TileHandle { id: fresh_id(), cell: Arc::new(RwLock::new(tile)) }
    }

    pub fn id(&self) -> DataId {
        self.id
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Tile> {
        self.cell.read().expect("tile lock poisoned")
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Tile> {
        self.cell.write().expect("tile lock poisoned")
    }

    /// Deep copy with a fresh id.
    pub fn duplicate(&self) -> Self {
        TileHandle::new(self.read().clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    /// Square symmetric positive definite; only the lower-triangular tiles
    /// (including the diagonal) are stored, the upper part is never read.
    SymmetricLowerPd,
}

/// Matrix stored as a grid of tiles. `None` entries are structural zeros
/// (the upper triangle of a symmetric matrix, or tiles annihilated by the
/// independent-blocks mask) and are never allocated.
#[derive(Clone, Debug)]
pub struct TileMatrix {
    nrows: usize,
    ncols: usize,
    nb: usize,
    symmetry: Symmetry,
    tile_rows: usize,
    tile_cols: usize,
    tiles: Vec<Option<TileHandle>>,
}

impl TileMatrix {
    pub fn new_general(nrows: usize, ncols: usize, nb: usize) -> Self {
        Self::with_predicate(nrows, ncols, nb, Symmetry::General, |_, _| true)
    }

    pub fn new_symmetric_lower(n: usize, nb: usize) -> Self {
        Self::with_predicate(n, n, nb, Symmetry::SymmetricLowerPd, |i, j| j <= i)
    }

    /// Symmetric-lower storage keeping only tiles whose row and column fall
    /// in the same s×s diagonal super tile.
    pub fn new_symmetric_lower_banded(n: usize, nb: usize, super_tile: usize) -> Self {
        assert!(super_tile >= 1, "super tile edge must be >= 1");
        Self::with_predicate(n, n, nb, Symmetry::SymmetricLowerPd, |i, j| {
            j <= i && i / super_tile == j / super_tile
        })
    }

    fn with_predicate(
        nrows: usize,
        ncols: usize,
        nb: usize,
        symmetry: Symmetry,
        keep: impl Fn(usize, usize) -> bool,
    ) -> Self {
        assert!(nrows >= 1 && ncols >= 1, "matrix dimensions must be positive");
        assert!(nb >= 1, "tile size must be positive");
        if symmetry == Symmetry::SymmetricLowerPd {
            assert_eq!(nrows, ncols, "symmetric storage requires a square matrix");
        }
        let tile_rows = nrows.div_ceil(nb);
        let tile_cols = ncols.div_ceil(nb);
        let mut tiles = Vec::with_capacity(tile_rows * tile_cols);
        for i in 0..tile_rows {
            for j in 0..tile_cols {
                if keep(i, j) {
                    let r = nb.min(nrows - i * nb);
                    let c = nb.min(ncols - j * nb);
                    tiles.push(Some(TileHandle::new(Tile::zeros(r, c))));
                } else {
                    tiles.push(None);
                }
            }
        }
        TileMatrix { nrows, ncols, nb, symmetry, tile_rows, tile_cols, tiles }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Order of a square matrix.
    pub fn order(&self) -> usize {
        debug_assert_eq!(self.nrows, self.ncols);
        self.nrows
    }

    pub fn nb(&self) -> usize {
        self.nb
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn tile_rows(&self) -> usize {
        self.tile_rows
    }

    pub fn tile_cols(&self) -> usize {
        self.tile_cols
    }

    pub fn tile(&self, i: usize, j: usize) -> Option<&TileHandle> {
        self.tiles[i * self.tile_cols + j].as_ref()
    }

    /// Row/column extent of tile (i, j), accounting for ragged edges.
    pub fn tile_dims(&self, i: usize, j: usize) -> (usize, usize) {
        (
            self.nb.min(self.nrows - i * self.nb),
            self.nb.min(self.ncols - j * self.nb),
        )
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Deep copy: fresh tiles with fresh ids, same structure and values.
    pub fn deep_clone(&self) -> Self {
        TileMatrix {
            tiles: self.tiles.iter().map(|t| t.as_ref().map(TileHandle::duplicate)).collect(),
            ..self.clone()
        }
    }

    /// Dense row-major copy. Symmetric storage mirrors the lower triangle.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows * self.ncols];
        for ti in 0..self.tile_rows {
            for tj in 0..self.tile_cols {
                if let Some(h) = self.tile(ti, tj) {
                    let t = h.read();
                    for i in 0..t.rows {
                        for j in 0..t.cols {
                            out[(ti * self.nb + i) * self.ncols + tj * self.nb + j] = t.at(i, j);
                        }
                    }
                }
            }
        }
        if self.symmetry == Symmetry::SymmetricLowerPd {
            for i in 0..self.nrows {
                for j in (i + 1)..self.ncols {
                    out[i * self.ncols + j] = out[j * self.ncols + i];
                }
            }
        }
        out
    }

    /// Dense row-major copy of the lower triangle only (upper kept zero).
    /// This is the natural export of a Cholesky factor held in symmetric
    /// storage.
    pub fn to_dense_lower(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows * self.ncols];
        for ti in 0..self.tile_rows {
            for tj in 0..self.tile_cols {
                if let Some(h) = self.tile(ti, tj) {
                    let t = h.read();
                    for i in 0..t.rows {
                        for j in 0..t.cols {
                            let (gi, gj) = (ti * self.nb + i, tj * self.nb + j);
                            if gj <= gi {
                                out[gi * self.ncols + gj] = t.at(i, j);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Build from a dense row-major buffer (used by tests and oracles).
    pub fn from_dense(data: &[f64], nrows: usize, ncols: usize, nb: usize, symmetry: Symmetry) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        let m = match symmetry {
            Symmetry::General => Self::new_general(nrows, ncols, nb),
            Symmetry::SymmetricLowerPd => Self::new_symmetric_lower(nrows, nb),
        };
        for ti in 0..m.tile_rows {
            for tj in 0..m.tile_cols {
                if let Some(h) = m.tile(ti, tj) {
                    let mut t = h.write();
                    for i in 0..t.rows {
                        for j in 0..t.cols {
                            *t.at_mut(i, j) = data[(ti * nb + i) * ncols + tj * nb + j];
                        }
                    }
                }
            }
        }
        m
    }

    /// Element access by global index (locks the owning tile; for tests and
    /// small sequential reductions, not for kernels).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (ti, tj) = (i / self.nb, j / self.nb);
        match self.tile(ti, tj) {
            Some(h) => h.read().at(i % self.nb, j % self.nb),
            None => 0.0,
        }
    }
}

/// Vector stored as blocks conformal with a partner [`TileMatrix`].
#[derive(Clone, Debug)]
pub struct TileVector {
    len: usize,
    nb: usize,
    blocks: Vec<TileHandle>,
}

impl TileVector {
    pub fn zeros(len: usize, nb: usize) -> Self {
        assert!(len >= 1 && nb >= 1);
        let nblocks = len.div_ceil(nb);
        let blocks = (0..nblocks)
            .map(|i| TileHandle::new(Tile::zeros(nb.min(len - i * nb), 1)))
            .collect();
        TileVector { len, nb, blocks }
    }

    pub fn from_slice(v: &[f64], nb: usize) -> Self {
        let out = Self::zeros(v.len(), nb);
        for (bi, h) in out.blocks.iter().enumerate() {
            let mut t = h.write();
            let off = bi * nb;
            let rows = t.rows;
            t.data.copy_from_slice(&v[off..off + rows]);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn nb(&self) -> usize {
        self.nb
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &TileHandle {
        &self.blocks[i]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        for h in &self.blocks {
            out.extend_from_slice(&h.read().data);
        }
        out
    }

    /// Sequential dot product, block order fixed for reproducibility.
    pub fn dot(&self, other: &TileVector) -> f64 {
        assert_eq!(self.len, other.len, "dot length mismatch");
        assert_eq!(self.nb, other.nb, "dot blocking mismatch");
        let mut acc = 0.0;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let (a, b) = (a.read(), b.read());
            for (x, y) in a.data.iter().zip(&b.data) {
                acc += x * y;
            }
        }
        acc
    }

    pub fn deep_clone(&self) -> Self {
        TileVector {
            len: self.len,
            nb: self.nb,
            blocks: self.blocks.iter().map(TileHandle::duplicate).collect(),
        }
    }
}
