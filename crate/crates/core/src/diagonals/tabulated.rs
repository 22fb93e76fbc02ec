//! Piecewise-linear diagonals given by knots (t, Δ(t)).

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Knots with strictly increasing abscissae from 0 to 1 and nondecreasing values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Knots<T> {
    ts: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> Knots<T> {
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::param("knots", "need at least two knots"));
        }
        let (ts, values): (Vec<T>, Vec<T>) = points.into_iter().unzip();
        if ts[0] != T::zero() || ts[ts.len() - 1] != T::one() {
            return Err(Error::param("knots", "abscissae must start at 0 and end at 1"));
        }
        if let Some(w) = ts.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::param(
                "knots",
                format!("abscissae must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::param("knots", format!("values must lie in [0, 1], got {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] < w[0]) {
            return Err(Error::param(
                "knots",
                format!("values must be nondecreasing ({} then {})", w[0], w[1]),
            ));
        }
        Ok(Self { ts, values })
    }

    /// Reads `t,value` rows. A header line is accepted when its first field is not numeric.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::Usage(format!("cannot read knots from {}: {e}", path.display())))?;
        Self::from_csv_reader(reader)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        Self::from_csv_reader(reader)
    }

    fn from_csv_reader<R: std::io::Read>(mut reader: csv::Reader<R>) -> Result<Self> {
        let mut points = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Usage(format!("knot CSV: {e}")))?;
            if record.len() != 2 {
                return Err(Error::Usage(format!(
                    "knot CSV row {} has {} fields, expected 2",
                    line + 1,
                    record.len()
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) => points.push((lit(v[0]), lit(v[1]))),
                Err(_) if line == 0 && points.is_empty() => continue,
                Err(e) => {
                    return Err(Error::Usage(format!("knot CSV row {}: {e}", line + 1)));
                }
            }
        }
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.ts.iter().copied().zip(self.values.iter().copied())
    }

    pub fn eval(&self, t: T) -> T {
        let j = self.ts.partition_point(|&s| s <= t);
        if j == 0 {
            return self.values[0];
        }
        if j == self.ts.len() {
            return self.values[j - 1];
        }
        let (t0, t1) = (self.ts[j - 1], self.ts[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// inf{s : Δ(s) ≥ t}; flat stretches resolve to their left end.
    pub fn inverse(&self, t: T) -> T {
        let j = self.values.partition_point(|&v| v < t);
        if j == 0 {
            return self.ts[0];
        }
        if j == self.values.len() {
            return self.ts[j - 1];
        }
        let (t0, t1) = (self.ts[j - 1], self.ts[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        (t0 + (t - v0) / (v1 - v0) * (t1 - t0)).min(t1)
    }
}
