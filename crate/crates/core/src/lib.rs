//! Geostatistics on tiles: exact Matérn maximum-likelihood estimation,
//! synthetic Gaussian-field simulation and kriging prediction, with every
//! dense linear-algebra step expressed as tile kernels over a
//! dependency-inferring task scheduler.
//!
//! The layering, bottom up:
//!
//! * [`tile`] / [`scheduler`] — tile storage and the sequential-task-flow
//!   runtime that turns kernel streams into a dependency DAG;
//! * [`kernels`] / [`tilealg`] — scalar block kernels and the tile
//!   compositions (Cholesky, triangular solves, gemm);
//! * [`geometry`] / [`covariance`] — locations, distances and the Matérn
//!   model (with its modified Bessel function);
//! * [`simulate`] / [`likelihood`] / [`predict`] — field generation, the
//!   Gaussian log-likelihood plus its maximizer, kriging and k-fold CV;
//! * [`indapprox`] — the independent-blocks approximation that skips
//!   structurally zero tiles end to end.
//!
//! Everything is deterministic for a fixed seed: results are bitwise
//! independent of the worker count.

pub mod covariance;
pub mod error;
pub mod geometry;
pub mod indapprox;
pub mod io;
pub mod kernels;
pub mod likelihood;
pub mod optimizer;
pub mod predict;
pub mod scheduler;
pub mod simulate;
pub mod tile;
pub mod tilealg;

pub use covariance::{bessel_k, gen_cov_cross, gen_cov_matrix, gen_cov_matrix_ind, matern, MaternParams};
pub use error::{Error, Result};
pub use geometry::{
    distance_matrix, generate_locations, DistanceMatrix, Location, LocationSet, Metric,
    EARTH_RADIUS_KM,
};
pub use indapprox::{ind_cholesky, ind_log_likelihood, ind_mask, SuperTileConfig};
pub use likelihood::{log_likelihood, mle_fit, Approximation, FitResult, LikelihoodProblem};
pub use optimizer::OptimizerConfig;
pub use predict::{k_fold_cv, krige, krige_with_variance, CvResult, KrigingConfig};
pub use simulate::{simulate_field, SimulationSpec};
pub use tile::{Symmetry, TileMatrix, TileVector};
pub use tilealg::{tile_cholesky, tile_posv, tile_trsm};
