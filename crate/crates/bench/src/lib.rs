//! Shared set-up for the criterion benches: deterministic SPD covariance
//! matrices of a given order.

use geostat_core::{
    distance_matrix, gen_cov_matrix, generate_locations, MaternParams, TileMatrix,
};

pub fn spd_covariance(n: usize, nb: usize) -> TileMatrix {
    let params = MaternParams::new(1.0, 0.1, 0.5, 1e-6).unwrap();
    let locations = generate_locations(n, 42);
    let d = distance_matrix(&locations, &locations).unwrap();
    gen_cov_matrix(&d, &params, nb, 1).unwrap()
}
