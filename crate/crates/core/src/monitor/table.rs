//! Plot-ready CSV tables of boundaries and operating characteristics.

use std::io::Write;

use serde::Serialize;

use super::characteristic::{operating_characteristic, OperatingCharacteristic};
use super::spec::SequentialSpec;
use super::state::sprt_boundaries;
use crate::error::Result;
use crate::report::sig6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub m: usize,
    pub lower_h1: f64,
    pub upper_h0: f64,
}

pub fn boundary_table(spec: &SequentialSpec, max_m: usize) -> Result<Vec<BoundaryRow>> {
    (1..=max_m)
        .map(|m| {
            let b = sprt_boundaries(spec, m)?;
            Ok(BoundaryRow {
                m,
                lower_h1: b.lower_h1,
                upper_h0: b.upper_h0,
            })
        })
        .collect()
}

/// Operating characteristics on `points` equally spaced values of `p`
/// strictly inside `(0, 1)`.
pub fn characteristic_table(
    spec: &SequentialSpec,
    points: usize,
) -> Result<Vec<OperatingCharacteristic>> {
    (1..=points)
        .map(|i| operating_characteristic(i as f64 / (points + 1) as f64, spec))
        .collect()
}

pub fn write_boundary_csv<W: Write>(out: W, rows: &[BoundaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "lower_H1", "upper_H0"])?;
    for r in rows {
        w.write_record([r.m.to_string(), sig6(r.lower_h1), sig6(r.upper_h0)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_characteristic_csv<W: Write>(out: W, rows: &[OperatingCharacteristic]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "k", "L_p", "E_m"])?;
    for r in rows {
        w.write_record([sig6(r.p), sig6(r.k), sig6(r.power), sig6(r.expected_m)])?;
    }
    w.flush()?;
    Ok(())
}
