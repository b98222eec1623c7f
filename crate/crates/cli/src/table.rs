//! Survival-data CSV in and out.
//!
//! Input layout: a header row naming `time`, `status` and covariates
//! `x1..xp` (any order, no gaps), plus an optional `id` column that is
//! ignored. Every field must be present.

use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lmfrail::{SurvivalDataset, SurvivalRecord};

/// Full-precision decimal: 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Empty field for a missing value.
pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

struct Layout {
    time: usize,
    status: usize,
    covariates: Vec<usize>,
}

fn layout(headers: &csv::StringRecord) -> Result<Layout> {
    let (mut time, mut status) = (None, None);
    let mut xs: Vec<(usize, usize)> = Vec::new();
    for (col, name) in headers.iter().enumerate() {
        let name = name.trim();
        match name {
            "time" => time = Some(col),
            "status" => status = Some(col),
            "id" => {}
            _ => {
                let k = name
                    .strip_prefix('x')
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k > 0)
                    .ok_or_else(|| anyhow!("unknown column '{name}' (expected time, status, x1..xp, id)"))?;
                xs.push((k, col));
            }
        }
    }
    let time = time.ok_or_else(|| anyhow!("missing column 'time'"))?;
    let status = status.ok_or_else(|| anyhow!("missing column 'status'"))?;
    xs.sort_unstable();
    for (expected, &(k, _)) in (1..).zip(&xs) {
        if k != expected {
            bail!("covariate columns must be x1..x{} without gaps or repeats", xs.len());
        }
    }
    Ok(Layout { time, status, covariates: xs.into_iter().map(|(_, c)| c).collect() })
}

fn field<'a>(rec: &'a csv::StringRecord, col: usize, row: usize, name: &str) -> Result<&'a str> {
    let v = rec.get(col).map(str::trim).unwrap_or("");
    if v.is_empty() {
        bail!("row {row}, column {name}: missing value");
    }
    Ok(v)
}

fn parse_f64(v: &str, row: usize, name: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| anyhow!("row {row}, column {name}: '{v}' is not a number"))?;
    if !x.is_finite() {
        bail!("row {row}, column {name}: '{v}' is not finite");
    }
    Ok(x)
}

/// Reads a dataset. Rows are numbered from 1, not counting the header.
pub fn read_dataset(path: &Path) -> Result<SurvivalDataset> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = rdr.headers().with_context(|| format!("cannot read header of {}", path.display()))?.clone();
    if headers.is_empty() {
        bail!("no records");
    }
    let layout = layout(&headers)?;
    let mut records = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| anyhow!("row {row}: {e}"))?;
        let time = parse_f64(field(&rec, layout.time, row, "time")?, row, "time")?;
        if time <= 0.0 {
            bail!("row {row}, column time: must be positive, got {time}");
        }
        let status = match field(&rec, layout.status, row, "status")? {
            "0" => false,
            "1" => true,
            v => bail!("row {row}, column status: '{v}' is not 0 or 1"),
        };
        let covariates = layout
            .covariates
            .iter()
            .enumerate()
            .map(|(j, &col)| {
                let name = format!("x{}", j + 1);
                parse_f64(field(&rec, col, row, &name)?, row, &name)
            })
            .collect::<Result<Vec<f64>>>()?;
        records.push(SurvivalRecord::new(time, status, covariates));
    }
    if records.is_empty() {
        bail!("no records");
    }
    Ok(SurvivalDataset::new(records)?)
}

/// Writes a dataset in the input layout with an `id` column.
pub fn write_dataset(path: &Path, data: &SurvivalDataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut header = vec!["id".to_string(), "time".into(), "status".into()];
    header.extend((1..=data.p()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for (i, r) in data.records().iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), num(r.time), u8::from(r.status).to_string()];
        row.extend(r.covariates.iter().map(|&x| num(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e10] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt_num(None), "");
    }
}
