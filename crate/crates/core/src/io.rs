//! CSV ingestion and emission.
//!
//! Locations travel as `x,y[,z]` CSV (UTF-8, LF, decimal point); floats are
//! written with 17 significant digits so a write → read → write cycle is
//! byte-identical. Parse failures carry the path and 1-based line number.

use crate::error::{Error, Result};
use crate::geometry::{Location, LocationSet, Metric};
use crate::scheduler::TraceEvent;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// 17 significant digits: enough to reproduce any f64 bit pattern exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows read from a locations CSV: coordinates plus the optional
/// measurement column.
#[derive(Debug)]
pub struct LocationsFile {
    pub points: Vec<Location>,
    pub z: Option<Vec<f64>>,
}

impl LocationsFile {
    pub fn into_set(self, metric: Metric) -> Result<(LocationSet, Option<Vec<f64>>)> {
        Ok((LocationSet::new(metric, self.points)?, self.z))
    }
}

pub fn read_locations_csv(path: &Path) -> Result<LocationsFile> {
    let display = path.display().to_string();
    let err = |line: usize, msg: String| Error::Csv { path: display.clone(), line, msg };
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file, expected header x,y or x,y,z".into()))?;
    let header = header?;
    let with_z = match header.trim_end() {
        "x,y" => false,
        "x,y,z" => true,
        other => return Err(err(1, format!("bad header {other:?}, expected x,y or x,y,z"))),
    };
    let want = if with_z { 3 } else { 2 };

    let mut points = Vec::new();
    let mut z = with_z.then(Vec::new);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != want {
            return Err(err(lineno, format!("expected {want} columns, found {}", fields.len())));
        }
        let mut nums = [0.0; 3];
        for (c, f) in fields.iter().enumerate() {
            nums[c] = f.trim().parse::<f64>().map_err(|_| {
                err(lineno, format!("column {} is not a number: {f:?}", c + 1))
            })?;
        }
        points.push(Location::new(nums[0], nums[1]));
        if let Some(z) = z.as_mut() {
            z.push(nums[2]);
        }
    }
    if points.is_empty() {
        return Err(err(2, "no data rows".into()));
    }
    Ok(LocationsFile { points, z })
}

pub fn write_locations_csv(path: &Path, set: &LocationSet, z: Option<&[f64]>) -> Result<()> {
    if let Some(z) = z {
        if z.len() != set.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} measurements for {} locations",
                z.len(),
                set.n()
            )));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", if z.is_some() { "x,y,z" } else { "x,y" })?;
    for (i, p) in set.points().iter().enumerate() {
        match z {
            Some(z) => writeln!(w, "{},{},{}", fmt_f64(p.c1), fmt_f64(p.c2), fmt_f64(z[i]))?,
            None => writeln!(w, "{},{}", fmt_f64(p.c1), fmt_f64(p.c2))?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Scheduler trace for occupancy analysis, one row per executed kernel.
pub fn write_trace_csv(path: &Path, events: &[TraceEvent]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "task_id,kernel,begin_ns,end_ns,worker")?;
    for e in events {
        writeln!(w, "{},{},{},{},{}", e.task, e.name, e.begin_ns, e.end_ns, e.worker)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_locations;
    use std::fs;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("geostat-io-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let set = generate_locations(25, 7);
        let z: Vec<f64> = (0..25).map(|i| (i as f64).sin() * 1e-3).collect();
        let p1 = tmp("rt1.csv");
        write_locations_csv(&p1, &set, Some(&z)).unwrap();
        let file = read_locations_csv(&p1).unwrap();
        let (set2, z2) = file.into_set(Metric::Euclidean).unwrap();
        assert_eq!(set.points(), set2.points());
        assert_eq!(Some(&z), z2.as_ref());
        let p2 = tmp("rt2.csv");
        write_locations_csv(&p2, &set2, z2.as_deref()).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn coordinates_only_round_trip() {
        let set = generate_locations(10, 1);
        let p = tmp("xy.csv");
        write_locations_csv(&p, &set, None).unwrap();
        let file = read_locations_csv(&p).unwrap();
        assert!(file.z.is_none());
        assert_eq!(file.points, set.points());
    }

    #[test]
    fn malformed_inputs_carry_line_numbers() {
        let p = tmp("bad-header.csv");
        fs::write(&p, "lon,lat\n1,2\n").unwrap();
        match read_locations_csv(&p) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 1usize),
            other => panic!("{other:?}"),
        }

        let p = tmp("bad-cols.csv");
        fs::write(&p, "x,y\n0.1,0.2\n0.3\n").unwrap();
        match read_locations_csv(&p) {
            Err(Error::Csv { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("2 columns"));
            }
            other => panic!("{other:?}"),
        }

        let p = tmp("bad-num.csv");
        fs::write(&p, "x,y,z\n0.1,0.2,0.3\n0.4,oops,0.6\n").unwrap();
        match read_locations_csv(&p) {
            Err(Error::Csv { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("column 2"));
            }
            other => panic!("{other:?}"),
        }

        let p = tmp("empty.csv");
        fs::write(&p, "").unwrap();
        assert!(matches!(read_locations_csv(&p), Err(Error::Csv { line: 1, .. })));

        let p = tmp("header-only.csv");
        fs::write(&p, "x,y\n").unwrap();
        assert!(matches!(read_locations_csv(&p), Err(Error::Csv { line: 2, .. })));
    }

    #[test]
    fn trace_csv_shape() {
        let p = tmp("trace.csv");
        let events = vec![TraceEvent { task: 0, name: "potrf", begin_ns: 10, end_ns: 20, worker: 1 }];
        write_trace_csv(&p, &events).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "task_id,kernel,begin_ns,end_ns,worker");
        assert_eq!(lines.next().unwrap(), "0,potrf,10,20,1");
    }
}
