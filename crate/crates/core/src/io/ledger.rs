//! CSV energy ledger.
//!
//! The header is [`LedgerRow::header`]: `t, kinetic, f_bi`, then `E_s, D_s`
//! for each configured `s`, the six dissipation channels, `curl_v_inf`,
//! `grad_f_sq_inf`, `blowup_integral`, `orthonormality_drift`, `div_v_l2`.
//! Values are written in shortest round-trip form, so reading a ledger back
//! recovers the exact `f64`s.

use std::fs::File;
use std::path::Path;

use crate::diagnostics::{LedgerRow, LedgerSink};
use crate::error::{Error, Result};

pub struct LedgerWriter {
    inner: csv::Writer<File>,
    path: String,
}

fn csv_err(path: &str, e: csv::Error) -> Error {
    Error::Ledger(format!("{path}: {e}"))
}

impl LedgerWriter {
    pub fn create(path: &Path, s_values: &[u32]) -> Result<Self> {
        let p = path.display().to_string();
        let file = File::create(path).map_err(|e| Error::io(format!("creating ledger {p}"), e))?;
        let mut inner = csv::Writer::from_writer(file);
        inner.write_record(LedgerRow::header(s_values)).map_err(|e| csv_err(&p, e))?;
        inner.flush().map_err(|e| Error::io(format!("writing ledger {p}"), e))?;
        Ok(Self { inner, path: p })
    }
}

impl LedgerSink for LedgerWriter {
    fn write_row(&mut self, row: &LedgerRow) -> Result<()> {
        self.inner
            .write_record(row.values().iter().map(|x| x.to_string()))
            .map_err(|e| csv_err(&self.path, e))?;
        // flushed per row so a halted run leaves a usable partial ledger
        self.inner
            .flush()
            .map_err(|e| Error::io(format!("writing ledger {}", self.path), e))
    }
}

/// Reads a ledger, recovering the `s` list from its header.
pub fn read_ledger(path: &Path) -> Result<(Vec<u32>, Vec<LedgerRow>)> {
    let p = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(&p, e))?;
    let header: Vec<String> = r.headers().map_err(|e| csv_err(&p, e))?.iter().map(String::from).collect();
    let s_values: Vec<u32> = header
        .iter()
        .filter_map(|h| h.strip_prefix("E_"))
        .map(|s| s.parse().map_err(|_| Error::Ledger(format!("{p}: bad column 'E_{s}'"))))
        .collect::<Result<_>>()?;
    if header != LedgerRow::header(&s_values) {
        return Err(Error::Ledger(format!("{p}: unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(&p, e))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|x| x.parse().map_err(|_| Error::Ledger(format!("{p}: bad number '{x}'"))))
            .collect::<Result<_>>()?;
        rows.push(LedgerRow::from_values(&s_values, &vals)?);
    }
    Ok((s_values, rows))
}
