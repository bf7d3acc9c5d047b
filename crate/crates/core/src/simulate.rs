//! Synthetic Gaussian-field generation: Σ = L·Lᵀ, Z = L·e with e ~ N(0, I).
//!
//! One seed drives everything, split into independent sub-streams:
//! sub-stream 0 feeds the location jitter (see `geometry`), sub-stream 1
//! the standard-normal vector. Same seed + same build ⇒ same output.

use crate::covariance::{gen_cov_matrix, MaternParams};
use crate::error::{Error, Result};
use crate::geometry::{distance_matrix, generate_locations, LocationSet, Metric};
use crate::tile::TileVector;
use crate::tilealg::{tile_cholesky, tile_trmm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Debug)]
pub struct SimulationSpec {
    pub n: usize,
    pub params: MaternParams,
    pub seed: u64,
    /// Metric under which the generated unit-square coordinates are read.
    pub metric: Metric,
    pub nb: usize,
    pub workers: usize,
}

/// Draw one realization of the field: locations, then Z = L·e.
pub fn simulate_field(spec: &SimulationSpec) -> Result<(LocationSet, Vec<f64>)> {
    if spec.n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let unit_square = generate_locations(spec.n, spec.seed);
    let locations = match spec.metric {
        Metric::Euclidean => unit_square,
        gc @ Metric::GreatCircle { .. } => LocationSet::new(gc, unit_square.points().to_vec())?,
    };
    let d = distance_matrix(&locations, &locations)?;
    let sigma = gen_cov_matrix(&d, &spec.params, spec.nb, spec.workers)?;
    tile_cholesky(&sigma, spec.workers)?;
    let e = standard_normals(spec.seed, spec.n);
    let z = TileVector::from_slice(&e, spec.nb);
    tile_trmm(&sigma, &z, spec.workers)?;
    Ok((locations, z.to_vec()))
}

/// Deterministic standard normals from sub-stream 1 of the seed
/// (Box-Muller; any exact-distribution method satisfies the contract).
pub fn standard_normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        out.push(r * t.cos());
        out.push(r * t.sin());
    }
    out.truncate(n);
    out
}
