use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observation: covariates `x` and response `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Sample { x, y }
    }
}

/// Immutable table of samples sharing a covariate dimension `p >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    rows: Vec<Sample>,
    p: usize,
}

impl Dataset {
    pub fn new(rows: Vec<Sample>) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::invalid("dataset must have at least one row"))?;
        let p = first.x.len();
        if p == 0 {
            return Err(Error::invalid("covariate dimension must be at least 1"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.x.len() != p {
                return Err(Error::invalid(format!(
                    "row {i} has {} covariates, expected {p}",
                    row.x.len()
                )));
            }
            if !row.y.is_finite() || row.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} contains a non-finite value")));
            }
        }
        Ok(Dataset { rows, p })
    }

    /// Scalar responses with a single placeholder covariate fixed at zero.
    pub fn from_responses(ys: &[f64]) -> Result<Self> {
        Self::new(ys.iter().map(|&y| Sample::new(vec![0.0], y)).collect())
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Sample {
        &self.rows[i]
    }

    pub fn responses(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.y)
    }

    /// Reads a CSV with a header `x1,...,xp,y` (the response must be the last column).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::invalid("csv needs at least one covariate column and a y column"));
        }
        if headers.get(headers.len() - 1) != Some("y") {
            return Err(Error::invalid("last csv column must be named `y`"));
        }
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let mut vals = Vec::with_capacity(record.len());
            for field in record.iter() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::invalid(format!("data row {}: cannot parse `{field}`", line + 1)))?;
                vals.push(v);
            }
            let y = vals.pop().expect("record has at least two fields");
            rows.push(Sample::new(vals, y));
        }
        Dataset::new(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.p).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        wtr.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.x.iter().map(|v| v.to_string()).collect();
            rec.push(row.y.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_non_finite_rows() {
        let ragged = vec![Sample::new(vec![1.0], 1.0), Sample::new(vec![1.0, 2.0], 1.0)];
        assert!(Dataset::new(ragged).is_err());
        assert!(Dataset::new(vec![Sample::new(vec![f64::NAN], 1.0)]).is_err());
        assert!(Dataset::new(vec![]).is_err());
        assert!(Dataset::new(vec![Sample::new(vec![], 1.0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "x1,x2,y\n1,2,3\n4.5,-1,0.25\n";
        let ds = Dataset::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.p(), 2);
        assert_eq!(ds.row(1), &Sample::new(vec![4.5, -1.0], 0.25));
        let mut out = Vec::new();
        ds.write_csv(&mut out).unwrap();
        let again = Dataset::from_csv_reader(out.as_slice()).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn csv_requires_y_last() {
        assert!(Dataset::from_csv_reader("y,x1\n1,2\n".as_bytes()).is_err());
    }
}
