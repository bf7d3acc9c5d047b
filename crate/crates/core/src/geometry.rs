//! Locations, distance metrics, distance matrices and the irregular
//! synthetic location generator.
//!
//! Points live either in the Euclidean plane or on a sphere addressed by
//! lon/lat degrees; the metric is always chosen explicitly, never inferred
//! from the data.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Default sphere radius for great-circle distances, in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Two points closer than this (in native coordinate units) are rejected as
/// duplicates: the covariance matrix would be singular.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// A 2-D point: `(x, y)` in the plane or `(longitude, latitude)` in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub c1: f64,
    pub c2: f64,
}

impl Location {
    pub fn new(c1: f64, c2: f64) -> Self {
        Location { c1, c2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    /// Great-circle distance on a sphere of the given radius. The radius
    /// fixes the length unit of every distance (and hence of the range
    /// parameter θ2).
    GreatCircle { radius: f64 },
}

/// An ordered set of distinct locations sharing one metric.
#[derive(Clone, Debug)]
pub struct LocationSet {
    metric: Metric,
    points: Vec<Location>,
}

impl LocationSet {
    pub fn new(metric: Metric, points: Vec<Location>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("location set must be non-empty".into()));
        }
        if let Metric::GreatCircle { radius } = metric {
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter(format!("sphere radius must be > 0, got {radius}")));
            }
        }
        for p in &points {
            if !p.c1.is_finite() || !p.c2.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite coordinate ({}, {})", p.c1, p.c2)));
            }
            if matches!(metric, Metric::GreatCircle { .. }) {
                check_lonlat(p)?;
            }
        }
        // pairwise duplicate scan in native coordinate units
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if euclidean_distance(points[i], points[j]) < DUPLICATE_TOL {
                    return Err(Error::DuplicateLocation(i, j));
                }
            }
        }
        Ok(LocationSet { metric, points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn points(&self) -> &[Location] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Location {
        self.points[i]
    }

    /// Subset by index, keeping the metric. Indices must be distinct and in
    /// range; validation is skipped because the parent set already passed it.
    pub fn subset(&self, idx: &[usize]) -> LocationSet {
        LocationSet {
            metric: self.metric,
            points: idx.iter().map(|&i| self.points[i]).collect(),
        }
    }

    /// Distance between points `i` and `j` under the set's metric.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        metric_distance(self.metric, self.points[i], self.points[j])
    }
}

fn check_lonlat(p: &Location) -> Result<()> {
    if p.c1 < -180.0 || p.c1 > 180.0 || p.c2 < -90.0 || p.c2 > 90.0 {
        return Err(Error::CoordinateOutOfRange(p.c1, p.c2));
    }
    Ok(())
}

pub fn euclidean_distance(a: Location, b: Location) -> f64 {
    let dx = a.c1 - b.c1;
    let dy = a.c2 - b.c2;
    (dx * dx + dy * dy).sqrt()
}

/// Great-circle distance via the haversine formula, for lon/lat in degrees.
///
/// `hav(d/r) = hav(φ2−φ1) + cos φ1 cos φ2 hav(λ2−λ1)` with
/// `hav(θ) = sin²(θ/2)`.
pub fn haversine_gcd(a: Location, b: Location, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("sphere radius must be > 0, got {radius}")));
    }
    check_lonlat(&a)?;
    check_lonlat(&b)?;
    let (lam1, phi1) = (a.c1.to_radians(), a.c2.to_radians());
    let (lam2, phi2) = (b.c1.to_radians(), b.c2.to_radians());
    let hav = |t: f64| (t / 2.0).sin().powi(2);
    let h = hav(phi2 - phi1) + phi1.cos() * phi2.cos() * hav(lam2 - lam1);
    // clamp against rounding at antipodes
    Ok(2.0 * radius * h.sqrt().min(1.0).asin())
}

fn metric_distance(metric: Metric, a: Location, b: Location) -> f64 {
    match metric {
        Metric::Euclidean => euclidean_distance(a, b),
        Metric::GreatCircle { radius } => {
            // coordinates were validated at set construction
            haversine_gcd(a, b, radius).expect("validated lon/lat")
        }
    }
}

/// Dense rectangular matrix of pairwise distances, row-major.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(0.0, f64::max)
    }
}

/// Pairwise distances between two location sets: entry (i, j) is the
/// distance from `a.points[i]` to `b.points[j]`.
pub fn distance_matrix(a: &LocationSet, b: &LocationSet) -> Result<DistanceMatrix> {
    if a.metric() != b.metric() {
        return Err(Error::MetricMismatch);
    }
    let (m, n) = (a.n(), b.n());
    let mut data = vec![0.0; m * n];
    for i in 0..m {
        let pi = a.point(i);
        for j in 0..n {
            data[i * n + j] = metric_distance(a.metric, pi, b.point(j));
        }
    }
    Ok(DistanceMatrix { rows: m, cols: n, data })
}

/// Irregular locations on a jittered ⌈√n⌉×⌈√n⌉ grid over the unit square.
///
/// Grid cell (r, l) contributes the point ((r − 0.5 + X)/g, (l − 0.5 + Y)/g)
/// with X, Y ~ Uniform(−0.4, 0.4), so no two points ever get closer than
/// 0.2/g. The grid is then shuffled and truncated to `n` points, all driven
/// by sub-stream 0 of the seed (sub-stream 1 is reserved for measurement
/// noise, see `simulate`).
pub fn generate_locations(n: usize, seed: u64) -> LocationSet {
    assert!(n >= 1, "need at least one location");
    let g = (n as f64).sqrt().ceil() as usize;
    let mut rng = location_rng(seed);
    let gf = g as f64;
    let mut points = Vec::with_capacity(g * g);
    for r in 1..=g {
        for l in 1..=g {
            let x: f64 = rng.gen_range(-0.4..0.4);
            let y: f64 = rng.gen_range(-0.4..0.4);
            points.push(Location::new((r as f64 - 0.5 + x) / gf, (l as f64 - 0.5 + y) / gf));
        }
    }
    points.shuffle(&mut rng);
    points.truncate(n);
    LocationSet { metric: Metric::Euclidean, points }
}

pub(crate) fn location_rng(seed: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}
