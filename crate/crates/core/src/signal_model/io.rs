//! Two-column `re,im` CSV interchange for frames.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::SignalFrame;
use crate::error::{Result, SenseError};

/// Writes `frame` as CSV with a `re,im` header. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_frame_csv<W: Write>(frame: &SignalFrame, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["re", "im"])?;
    for s in frame.samples() {
        w.write_record([s.re.to_string(), s.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_frame_csv<R: Read>(reader: R) -> Result<SignalFrame> {
    let mut r = csv::Reader::from_reader(reader);
    let mut samples = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(SenseError::Usage(format!(
                "row {} has {} columns, expected 2",
                row + 1,
                record.len()
            )));
        }
        let parse = |field: &str| {
            field.trim().parse::<f64>().map_err(|e| {
                SenseError::Usage(format!("row {}: cannot parse {field:?}: {e}", row + 1))
            })
        };
        samples.push(Complex64::new(parse(&record[0])?, parse(&record[1])?));
    }
    SignalFrame::new(samples)
}
