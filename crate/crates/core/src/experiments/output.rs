use std::io::{Read, Write};

use super::ExperimentError;

pub const CSV_HEADER: [&str; 7] = [
    "delta1_over_2pi_MHz",
    "g12_ratio",
    "fidelity",
    "trace_drift",
    "min_eig",
    "cutoff_occupancy",
    "wall_ms",
];

/// One sweep grid point. A failed point carries a NaN fidelity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub delta1_over_2pi_mhz: f64,
    pub g12_ratio: f64,
    pub fidelity: f64,
    pub trace_drift: f64,
    pub min_eig: f64,
    pub cutoff_occupancy: f64,
    pub wall_ms: f64,
}

impl SweepRow {
    fn fields(&self) -> [f64; 7] {
        [
            self.delta1_over_2pi_mhz,
            self.g12_ratio,
            self.fidelity,
            self.trace_drift,
            self.min_eig,
            self.cutoff_occupancy,
            self.wall_ms,
        ]
    }

    fn from_fields(f: [f64; 7]) -> Self {
        Self {
            delta1_over_2pi_mhz: f[0],
            g12_ratio: f[1],
            fidelity: f[2],
            trace_drift: f[3],
            min_eig: f[4],
            cutoff_occupancy: f[5],
            wall_ms: f[6],
        }
    }

    pub fn failed(&self) -> bool {
        self.fidelity.is_nan()
    }

    /// Field-wise bit equality, so NaN rows compare equal to themselves.
    pub fn same_bits(&self, other: &Self) -> bool {
        self.fields()
            .iter()
            .zip(other.fields())
            .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// 17 significant digits, which round-trips every finite `f64`.
fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

fn io_err(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(e.to_string())
}

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for row in rows {
        w.write_record(row.fields().map(format_f64))
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers().map_err(io_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(ExperimentError::Io(format!(
            "unexpected CSV header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        let mut fields = [0.0; 7];
        for (slot, text) in fields.iter_mut().zip(rec.iter()) {
            *slot = text
                .parse()
                .map_err(|e| ExperimentError::Io(format!("bad number {text:?}: {e}")))?;
        }
        if rec.len() != fields.len() {
            return Err(ExperimentError::Io(format!(
                "row has {} fields, expected 7",
                rec.len()
            )));
        }
        rows.push(SweepRow::from_fields(fields));
    }
    Ok(rows)
}
