//! Tabular time series shared by the dynamics, analytics and estimation code.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{DensityMatrix, C64};

/// Diagnostics collected while producing a series from a master-equation run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Health {
    /// False once any bosonic slot's top-level population crossed the threshold.
    pub truncation_ok: bool,
    /// Largest population seen in the top two Fock levels, per slot (0 for non-bosonic slots).
    pub max_top_population: Vec<f64>,
    pub max_trace_error: f64,
    /// Smallest eigenvalue of the final state, when positivity was checked.
    pub min_eigenvalue: Option<f64>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

/// Named complex columns sampled on a strictly increasing time grid (us).
#[derive(Clone, Debug, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[k][i]` is observable `k` at `times[i]`.
    pub values: Vec<Vec<C64>>,
    pub health: Health,
    pub final_state: Option<DensityMatrix>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        let values = vec![Vec::new(); names.len()];
        TimeSeries {
            times: Vec::new(),
            names,
            values,
            health: Health {
                truncation_ok: true,
                ..Health::default()
            },
            final_state: None,
        }
    }

    /// Builds a single real-valued column.
    pub fn from_real(name: &str, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mut ts = TimeSeries::new(vec![name.to_string()]);
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        for (t, v) in times.into_iter().zip(values) {
            ts.push(t, &[C64::new(v, 0.0)])?;
        }
        Ok(ts)
    }

    pub fn push(&mut self, t: f64, row: &[C64]) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                found: row.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Domain(format!("time {t} not after {last}")));
            }
        }
        self.times.push(t);
        for (col, v) in self.values.iter_mut().zip(row) {
            col.push(*v);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Domain(format!("no observable named {name:?}")))
    }

    pub fn column(&self, name: &str) -> Result<&[C64]> {
        Ok(&self.values[self.index_of(name)?])
    }

    pub fn real(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.column(name)?.iter().map(|z| z.re).collect())
    }

    /// CSV with a `t` column followed by `<name>_re,<name>_im` pairs.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for n in &self.names {
            header.push(format!("{n}_re"));
            header.push(format!("{n}_im"));
        }
        wr.write_record(&header)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut rec = vec![format!("{t:.16e}")];
            for col in &self.values {
                rec.push(format!("{:.16e}", col[i].re));
                rec.push(format!("{:.16e}", col[i].im));
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_times() {
        let mut ts = TimeSeries::new(vec!["x".into()]);
        ts.push(0.0, &[C64::new(1.0, 0.0)]).unwrap();
        assert!(ts.push(0.0, &[C64::new(1.0, 0.0)]).is_err());
        assert!(ts.push(1.0, &[]).is_err());
    }

    #[test]
    fn csv_layout() {
        let ts = TimeSeries::from_real("sz", vec![0.0, 0.5], vec![1.0, 0.25]).unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,sz_re,sz_im");
        assert_eq!(
            lines.next().unwrap(),
            "0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0"
        );
        assert_eq!(ts.real("sz").unwrap(), vec![1.0, 0.25]);
    }
}
