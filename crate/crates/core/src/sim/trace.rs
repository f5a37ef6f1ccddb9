use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Column header of trace CSV files.
pub const CSV_HEADER: [&str; 8] = ["t", "z0", "z1", "y", "ydot", "e1", "e2", "kappa"];

/// One sample of a run. `e1 = z0 - y`, `e2 = z1 - y'`; `kappa` is the
/// time-varying gain in effect (0 when the law uses none).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRecord {
    pub t: f64,
    pub z0: f64,
    pub z1: f64,
    pub y: f64,
    pub ydot: f64,
    pub e1: f64,
    pub e2: f64,
    pub kappa: f64,
}

/// Time series produced by a simulation, write-once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    /// First time the predefined law ran on its stationary branch.
    pub switched_at: Option<f64>,
    /// First time a configured gain cap was active.
    pub cap_engaged_at: Option<f64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> Option<&TraceRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Sample spacing of the first two records, if any.
    pub fn spacing(&self) -> Option<f64> {
        match self.records.as_slice() {
            [a, b, ..] => Some(b.t - a.t),
            _ => None,
        }
    }

    /// Sample closest to `t`.
    pub fn at(&self, t: f64) -> Option<&TraceRecord> {
        let i = self.records.partition_point(|r| r.t < t);
        let cands = [i.checked_sub(1), Some(i)];
        cands
            .into_iter()
            .flatten()
            .filter_map(|j| self.records.get(j))
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// `max |e1|` and `max |e2|` over samples with `from <= t <= to`.
    pub fn max_errors(&self, from: f64, to: f64) -> (f64, f64) {
        self.records
            .iter()
            .filter(|r| r.t >= from && r.t <= to)
            .fold((0.0f64, 0.0f64), |(a, b), r| (a.max(r.e1.abs()), b.max(r.e2.abs())))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_HEADER)?;
        for r in &self.records {
            wr.write_record(
                [r.t, r.z0, r.z1, r.y, r.ydot, r.e1, r.e2, r.kappa]
                    .iter()
                    .map(|v| format!("{v:.16e}")),
            )?;
        }
        wr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Trace> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Parse {
                location: "trace header".into(),
                detail: format!("expected {}", CSV_HEADER.join(",")),
            });
        }
        let mut records = Vec::new();
        for (i, row) in rd.records().enumerate() {
            let row = row?;
            let mut v = [0.0; 8];
            for (j, field) in row.iter().enumerate().take(8) {
                v[j] = field.trim().parse().map_err(|_| Error::Parse {
                    location: format!("trace row {}", i + 1),
                    detail: format!("bad number '{field}'"),
                })?;
            }
            records.push(TraceRecord {
                t: v[0],
                z0: v[1],
                z1: v[2],
                y: v[3],
                ydot: v[4],
                e1: v[5],
                e2: v[6],
                kappa: v[7],
            });
        }
        Ok(Trace {
            records,
            ..Default::default()
        })
    }

    pub fn load_csv(path: &Path) -> Result<Trace> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
