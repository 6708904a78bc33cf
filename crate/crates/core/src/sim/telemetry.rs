//! Telemetry records, flight logs and their CSV form.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::FlightMode;

pub const TELEMETRY_CSV_HEADER: &str = "t_s,x_m,y_m,z_m,roll_rad,pitch_rad,yaw_rad,p_rads,q_rads,r_rads,\
thr1_n,thr2_n,thr3_n,thr4_n,vbatt_v,ibatt_a,remaining_ah,armed,mode";

const COLUMNS: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub t_s: f64,
    pub position: [f64; 3],
    /// Roll, pitch, yaw, rad.
    pub attitude: [f64; 3],
    /// Roll, pitch, yaw rates, rad/s.
    pub rates: [f64; 3],
    /// Motor thrusts, N.
    pub thrust: [f64; 4],
    pub vbatt_v: f64,
    pub ibatt_a: f64,
    pub remaining_ah: f64,
    pub armed: bool,
    pub mode: FlightMode,
}

impl TelemetryRecord {
    fn numbers(&self) -> [f64; 17] {
        let mut out = [0.0; 17];
        out[0] = self.t_s;
        out[1..4].copy_from_slice(&self.position);
        out[4..7].copy_from_slice(&self.attitude);
        out[7..10].copy_from_slice(&self.rates);
        out[10..14].copy_from_slice(&self.thrust);
        out[14] = self.vbatt_v;
        out[15] = self.ibatt_a;
        out[16] = self.remaining_ah;
        out
    }

    pub fn is_finite(&self) -> bool {
        self.numbers().iter().all(|v| v.is_finite())
    }

    /// Horizontal distance from `other`, m.
    pub fn horizontal_distance(&self, other: &TelemetryRecord) -> f64 {
        (self.position[0] - other.position[0]).hypot(self.position[1] - other.position[1])
    }
}

/// Decimated telemetry of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightLog {
    pub records: Vec<TelemetryRecord>,
    /// Hex SHA-256 of the scenario inputs.
    pub digest: String,
}

impl FlightLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with `t0 ≤ t ≤ t1`.
    pub fn window(&self, t0: f64, t1: f64) -> &[TelemetryRecord] {
        let start = self.records.partition_point(|r| r.t_s < t0);
        let end = self.records.partition_point(|r| r.t_s <= t1);
        &self.records[start..end.max(start)]
    }
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected telemetry header `{0}`")]
    Header(String),
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
}

/// Writes the log as CSV. Floats use the shortest representation that
/// parses back to the same bits. Returns bytes written.
pub fn csv_export<W: Write>(records: &[TelemetryRecord], out: W) -> Result<usize, CsvError> {
    let mut out = CountingWriter { inner: out, count: 0 };
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        w.write_record(TELEMETRY_CSV_HEADER.split(','))?;
        let mut row: Vec<String> = Vec::with_capacity(COLUMNS);
        for r in records {
            row.clear();
            row.extend(r.numbers().iter().map(|v| v.to_string()));
            row.push(if r.armed { "1" } else { "0" }.to_string());
            row.push(r.mode.label().to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(out.count)
}

pub fn csv_export_path(records: &[TelemetryRecord], path: &Path) -> Result<usize, CsvError> {
    csv_export(records, BufWriter::new(File::create(path)?))
}

pub fn csv_import<R: Read>(input: R) -> Result<Vec<TelemetryRecord>, CsvError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != TELEMETRY_CSV_HEADER {
        return Err(CsvError::Header(header));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |msg: String| CsvError::Row { row, msg };
        if rec.len() != COLUMNS {
            return Err(bad(format!("expected {COLUMNS} fields, got {}", rec.len())));
        }
        let mut n = [0.0; 17];
        for (k, v) in n.iter_mut().enumerate() {
            *v = rec[k].parse().map_err(|e| bad(format!("column {}: {e}", k + 1)))?;
        }
        let armed = match &rec[17] {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("armed must be 0 or 1, got `{other}`"))),
        };
        let mode = rec[18].parse::<FlightMode>().map_err(bad)?;
        out.push(TelemetryRecord {
            t_s: n[0],
            position: [n[1], n[2], n[3]],
            attitude: [n[4], n[5], n[6]],
            rates: [n[7], n[8], n[9]],
            thrust: [n[10], n[11], n[12], n[13]],
            vbatt_v: n[14],
            ibatt_a: n[15],
            remaining_ah: n[16],
            armed,
            mode,
        });
    }
    Ok(out)
}

struct CountingWriter<W> {
    inner: W,
    count: usize,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.count += n;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(t: f64, x: f64) -> TelemetryRecord {
        TelemetryRecord {
            t_s: t,
            position: [x, -x / 3.0, 0.1],
            attitude: [1e-17, -0.25, std::f64::consts::PI],
            rates: [0.0, -0.0, 1e300],
            thrust: [3.6787, 3.6787, 3.7, 0.0],
            vbatt_v: 12.6,
            ibatt_a: 22.2,
            remaining_ah: 3.7,
            armed: x > 0.0,
            mode: FlightMode::SelfLevel,
        }
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut buf = Vec::new();
        let n = csv_export(&[], &mut buf).unwrap();
        assert_eq!(buf, format!("{TELEMETRY_CSV_HEADER}\n").into_bytes());
        assert_eq!(n, buf.len());
        assert!(csv_import(&buf[..]).unwrap().is_empty());
    }

    #[test]
    fn header_has_nineteen_columns() {
        assert_eq!(TELEMETRY_CSV_HEADER.split(',').count(), COLUMNS);
        assert!(TELEMETRY_CSV_HEADER.starts_with("t_s,x_m"));
        assert!(TELEMETRY_CSV_HEADER.ends_with("remaining_ah,armed,mode"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(csv_import("a,b\n1,2\n".as_bytes()), Err(CsvError::Header(_))));
        let text = format!("{TELEMETRY_CSV_HEADER}\n0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,2,safe\n");
        assert!(matches!(csv_import(text.as_bytes()), Err(CsvError::Row { row: 1, .. })));
    }

    #[test]
    fn window_selection() {
        let log = FlightLog { records: (0..10).map(|i| record(f64::from(i) * 0.02, 1.0)).collect(), digest: String::new() };
        assert_eq!(log.window(0.04, 0.08).len(), 3);
        assert!(log.window(5.0, 6.0).is_empty());
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..40)) {
            let recs: Vec<_> = xs.iter().enumerate().map(|(i, &x)| record(i as f64 * 0.02, x)).collect();
            let mut buf = Vec::new();
            let n = csv_export(&recs, &mut buf).unwrap();
            prop_assert_eq!(n, buf.len());
            prop_assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), recs.len() + 1);
            let back = csv_import(&buf[..]).unwrap();
            prop_assert_eq!(back.len(), recs.len());
            for (a, b) in back.iter().zip(&recs) {
                for (u, v) in a.numbers().iter().zip(b.numbers().iter()) {
                    prop_assert_eq!(u.to_bits(), v.to_bits());
                }
                prop_assert_eq!(a.armed, b.armed);
                prop_assert_eq!(a.mode, b.mode);
            }
        }
    }
}
