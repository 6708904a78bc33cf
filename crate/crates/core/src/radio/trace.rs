//! Scripted stick inputs: `t_s,throttle,roll,pitch,yaw,aux1` CSV files.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChannelSet, RadioError};

pub const TRACE_CSV_HEADER: &str = "t_s,throttle,roll,pitch,yaw,aux1";

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Row {
    t_s: f64,
    throttle: f64,
    roll: f64,
    pitch: f64,
    yaw: f64,
    aux1: f64,
}

/// Time-stamped stick positions, linearly interpolated between rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    rows: Vec<(f64, ChannelSet)>,
}

impl ChannelTrace {
    pub fn new(rows: Vec<(f64, ChannelSet)>) -> Result<Self, RadioError> {
        if rows.is_empty() {
            return Err(RadioError::Trace("trace has no rows".into()));
        }
        for (i, (t, ch)) in rows.iter().enumerate() {
            if !t.is_finite() || !ch.is_finite() {
                return Err(RadioError::Trace(format!("row {}: non-finite value", i + 1)));
            }
            if i > 0 && *t < rows[i - 1].0 {
                return Err(RadioError::Trace(format!("row {}: t_s goes backwards", i + 1)));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[(f64, ChannelSet)] {
        &self.rows
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, RadioError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| RadioError::Trace(e.to_string()))?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if header != TRACE_CSV_HEADER {
            return Err(RadioError::Trace(format!(
                "expected header `{TRACE_CSV_HEADER}`, found `{header}`"
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<Row>().enumerate() {
            let r = rec.map_err(|e| RadioError::Trace(format!("row {}: {e}", i + 1)))?;
            let ch = ChannelSet {
                aux1: r.aux1 > 0.0,
                ..ChannelSet::sticks(r.throttle, r.roll, r.pitch, r.yaw)
            };
            rows.push((r.t_s, ch));
        }
        Self::new(rows)
    }

    pub fn from_path(path: &Path) -> Result<Self, RadioError> {
        let file = std::fs::File::open(path)
            .map_err(|e| RadioError::Trace(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), RadioError> {
        let mut wtr = csv::Writer::from_writer(w);
        for (t, ch) in &self.rows {
            wtr.serialize(Row {
                t_s: *t,
                throttle: ch.throttle,
                roll: ch.roll,
                pitch: ch.pitch,
                yaw: ch.yaw,
                aux1: if ch.aux1 { 100.0 } else { 0.0 },
            })
            .map_err(|e| RadioError::Trace(e.to_string()))?;
        }
        wtr.flush().map_err(|e| RadioError::Trace(e.to_string()))
    }

    /// Sticks at time `t`. Analogue channels are interpolated; the switch
    /// holds the value of the latest row at or before `t`. Outside the trace
    /// the nearest end row is held.
    pub fn sample(&self, t: f64) -> ChannelSet {
        let idx = self.rows.partition_point(|(rt, _)| *rt <= t);
        if idx == 0 {
            return self.rows[0].1;
        }
        if idx == self.rows.len() {
            return self.rows[idx - 1].1;
        }
        let (t0, a) = self.rows[idx - 1];
        let (t1, b) = self.rows[idx];
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        let lerp = |x: f64, y: f64| x + (y - x) * w;
        ChannelSet {
            throttle: lerp(a.throttle, b.throttle),
            roll: lerp(a.roll, b.roll),
            pitch: lerp(a.pitch, b.pitch),
            yaw: lerp(a.yaw, b.yaw),
            aux1: a.aux1,
            extra: a.extra,
        }
    }

    pub fn end_time(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "t_s,throttle,roll,pitch,yaw,aux1\n0,0,0,0,0,0\n1,0,0,0,100,0\n3,50,20,-10,0,1\n";

    #[test]
    fn parse_and_interpolate() {
        let tr = ChannelTrace::from_reader(SAMPLE.as_bytes()).unwrap();
        assert_eq!(tr.rows().len(), 3);
        let mid = tr.sample(0.5);
        assert_eq!(mid.yaw, 50.0);
        let later = tr.sample(2.0);
        assert_eq!(later.throttle, 25.0);
        assert_eq!(later.roll, 10.0);
        assert!(!later.aux1);
        assert!(tr.sample(3.0).aux1);
        assert_eq!(tr.sample(-1.0), tr.rows()[0].1);
        assert_eq!(tr.sample(10.0), tr.rows()[2].1);
    }

    #[test]
    fn rejects_bad_header_and_order() {
        assert!(ChannelTrace::from_reader("t,thr\n0,0\n".as_bytes()).is_err());
        let backwards = "t_s,throttle,roll,pitch,yaw,aux1\n1,0,0,0,0,0\n0.5,0,0,0,0,0\n";
        assert!(ChannelTrace::from_reader(backwards.as_bytes()).is_err());
        assert!(ChannelTrace::from_reader(TRACE_CSV_HEADER.as_bytes()).is_err());
    }

    #[test]
    fn write_then_read() {
        let tr = ChannelTrace::from_reader(SAMPLE.as_bytes()).unwrap();
        let mut buf = Vec::new();
        tr.write(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(TRACE_CSV_HEADER));
        assert_eq!(ChannelTrace::from_reader(buf.as_slice()).unwrap(), tr);
    }
}
