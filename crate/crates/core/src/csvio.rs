//! CSV artifacts and content fingerprints.
//!
//! Every file starts with a header record followed by one `#` line carrying
//! provenance; numbers are written in scientific notation with 17
//! significant digits.

use std::fs;
use std::path::Path;

use faer::c64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Operator;
use crate::moments::MomentSequence;

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn fingerprint_operators(ops: &[&Operator]) -> String {
    let mut h = Sha256::new();
    for op in ops {
        h.update((op.dim() as u64).to_le_bytes());
        let m = op.mat();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                h.update(m[(i, j)].re.to_le_bytes());
                h.update(m[(i, j)].im.to_le_bytes());
            }
        }
    }
    hex::encode(h.finalize())
}

pub fn fingerprint_values(values: &[c64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.re.to_le_bytes());
        h.update(v.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub stage: String,
    pub source: String,
}

impl Provenance {
    pub fn new(config_hash: &str, stage: &str, source: &str) -> Self {
        Provenance {
            config_hash: config_hash.into(),
            stage: stage.into(),
            source: source.into(),
        }
    }

    fn line(&self) -> String {
        format!(
            "# config={} stage={} source={}\n",
            self.config_hash, self.stage, self.source
        )
    }
}

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a numeric table; every row must have one value per header column.
pub fn render_table(header: &[&str], prov: &Provenance, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| format_number(x)).collect())
        .collect();
    render_rows(header, prov, &cells)
}

/// Like [`render_table`] with preformatted cells.
pub fn render_rows(header: &[&str], prov: &Provenance, rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut head = csv::Writer::from_writer(Vec::new());
    head.write_record(header).map_err(csv_err)?;
    let mut buf = head
        .into_inner()
        .map_err(|e| csv_err(e.into_error().into()))?;
    buf.extend_from_slice(prov.line().as_bytes());
    let mut w = csv::Writer::from_writer(buf);
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                found: row.len(),
            });
        }
        w.write_record(row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| csv_err(e.into_error().into()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// `t, re_<name>, im_<name>` plus optional reference columns and their absolute error.
pub fn render_series(
    name: &str,
    times: &[f64],
    values: &[c64],
    reference: Option<&[c64]>,
    prov: &Provenance,
) -> Result<Vec<u8>> {
    let re = format!("re_{name}");
    let im = format!("im_{name}");
    let (re_ref, im_ref) = (format!("re_{name}_oracle"), format!("im_{name}_oracle"));
    let mut header = vec!["t", re.as_str(), im.as_str()];
    if reference.is_some() {
        header.extend([re_ref.as_str(), im_ref.as_str(), "abs_err"]);
    }
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(values)
        .enumerate()
        .map(|(k, (&t, v))| {
            let mut row = vec![t, v.re, v.im];
            if let Some(r) = reference {
                let r = r.get(k).copied().unwrap_or(c64::new(f64::NAN, f64::NAN));
                row.extend([r.re, r.im, (v - r).norm()]);
            }
            row
        })
        .collect();
    render_table(&header, prov, &rows)
}

pub fn render_moments(m: &MomentSequence, prov: &Provenance) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = m
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            vec![
                (k + 1).to_string(),
                format_number(v.re),
                format_number(v.im),
            ]
        })
        .collect();
    render_rows(&["n", "re_omega", "im_omega"], prov, &rows)
}

#[derive(serde::Deserialize)]
struct MomentRow {
    n: f64,
    re_omega: f64,
    im_omega: f64,
}

/// Reads `n, re_omega, im_omega` with `n = 1, 2, …` in order.
pub fn read_moments(path: &Path) -> Result<MomentSequence> {
    let bytes = fs::read(path)?;
    let parse = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut values = Vec::new();
    for (k, rec) in rdr.deserialize::<MomentRow>().enumerate() {
        let row = rec.map_err(|e| parse(e.to_string()))?;
        if row.n != (k + 1) as f64 {
            return Err(parse(format!(
                "row {} has n = {}, expected {}",
                k + 1,
                row.n,
                k + 1
            )));
        }
        values.push(c64::new(row.re_omega, row.im_omega));
    }
    if values.len() < 2 {
        return Err(parse("need at least two moments".into()));
    }
    MomentSequence::from_values(values, hash_bytes(&bytes)).map_err(|e| parse(e.to_string()))
}
