//! Flag parsing helpers shared by the subcommands: θ triples, metric
//! selection, the approximation mode and the worker-count default chain
//! (--workers flag > GEOSTAT_WORKERS > host core count).

use anyhow::{anyhow, bail, Context, Result};
use geostat_core::{Approximation, MaternParams, Metric, EARTH_RADIUS_KM};
use serde::Serialize;
use std::path::Path;
use std::str::FromStr;

/// `t1,t2,t3` on the command line.
#[derive(Clone, Copy, Debug)]
pub struct ThetaArg(pub [f64; 3]);

impl FromStr for ThetaArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            bail!("expected theta1,theta2,theta3, got {s:?}");
        }
        let mut v = [0.0; 3];
        for (i, p) in parts.iter().enumerate() {
            v[i] = p.trim().parse().map_err(|_| anyhow!("theta component {:?} is not a number", p))?;
        }
        Ok(ThetaArg(v))
    }
}

impl ThetaArg {
    pub fn into_params(self, nugget: f64) -> Result<MaternParams> {
        Ok(MaternParams::new(self.0[0], self.0[1], self.0[2], nugget)?)
    }
}

/// `exact` or `ind:<s>`.
#[derive(Clone, Copy, Debug)]
pub struct ApproxArg(pub Approximation);

impl FromStr for ApproxArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(ApproxArg(Approximation::Exact));
        }
        if let Some(rest) = s.strip_prefix("ind:") {
            let super_tile: usize = rest.parse().map_err(|_| anyhow!("bad super-tile count {rest:?}"))?;
            if super_tile < 1 {
                bail!("super-tile count must be >= 1");
            }
            return Ok(ApproxArg(Approximation::Ind { super_tile }));
        }
        bail!("expected 'exact' or 'ind:<s>', got {s:?}")
    }
}

/// `euclidean` or `greatcircle` (optionally `greatcircle:<radius-km>`).
#[derive(Clone, Copy, Debug)]
pub struct MetricArg(pub Metric);

impl FromStr for MetricArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(MetricArg(Metric::Euclidean)),
            "greatcircle" => Ok(MetricArg(Metric::GreatCircle { radius: EARTH_RADIUS_KM })),
            other => {
                if let Some(r) = other.strip_prefix("greatcircle:") {
                    let radius: f64 = r.parse().map_err(|_| anyhow!("bad sphere radius {r:?}"))?;
                    if !(radius > 0.0) {
                        bail!("sphere radius must be > 0");
                    }
                    return Ok(MetricArg(Metric::GreatCircle { radius }));
                }
                bail!("expected 'euclidean', 'greatcircle' or 'greatcircle:<radius>', got {other:?}")
            }
        }
    }
}

/// Resolve the worker count: explicit flag, then GEOSTAT_WORKERS, then the
/// host parallelism.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    let w = match flag {
        Some(w) => w,
        None => match std::env::var("GEOSTAT_WORKERS") {
            Ok(v) => v
                .parse()
                .with_context(|| format!("GEOSTAT_WORKERS={v:?} is not a worker count"))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if w < 1 {
        bail!("worker count must be >= 1");
    }
    Ok(w)
}

/// Chosen seed: the flag if given, otherwise fresh entropy. The value is
/// always echoed so any run can be reproduced.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    let seed = flag.unwrap_or_else(rand::random);
    println!("seed: {seed}");
    seed
}

pub fn validate_nb(nb: usize) -> Result<usize> {
    if nb < 8 {
        bail!("tile size --nb must be >= 8");
    }
    Ok(nb)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
