//! Functions of one variable used as boundary data.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    Affine {
        intercept: f64,
        slope: f64,
    },
    Sine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// CSV with header `t,value` (optionally `,imag`), linearly interpolated.
    Tabulated {
        path: PathBuf,
    },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Constant { value: 0.0 }
    }
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    /// Values at the given abscissae.
    pub fn sample(&self, ts: &[f64]) -> Result<Vec<f64>> {
        Ok(self.sample_complex(ts)?.into_iter().map(|(re, _)| re).collect())
    }

    /// Real and imaginary parts at the given abscissae; closed forms are real.
    pub fn sample_complex(&self, ts: &[f64]) -> Result<Vec<(f64, f64)>> {
        let closed = |f: &dyn Fn(f64) -> f64| ts.iter().map(|t| (f(*t), 0.0)).collect();
        Ok(match self {
            Profile::Constant { value } => closed(&|_| *value),
            Profile::Affine { intercept, slope } => closed(&|t| intercept + slope * t),
            Profile::Sine {
                offset,
                amplitude,
                frequency,
                phase,
            } => closed(&|t| offset + amplitude * (frequency * t + phase).sin()),
            Profile::Tabulated { path } => {
                let table = read_table(path)?;
                ts.iter()
                    .map(|t| interpolate(&table, *t).ok_or_else(|| out_of_range(path, *t)))
                    .collect::<Result<_>>()?
            }
        })
    }
}

fn out_of_range(path: &Path, t: f64) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        msg: format!("abscissa {t} outside the tabulated range"),
    }
}

/// Rows `(t, re, im)` sorted by `t`.
fn read_table(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let perr = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => perr(format!("{other:?}")),
    })?;
    let header = rdr.headers().map_err(|e| perr(e.to_string()))?.clone();
    if header.len() < 2 || &header[0] != "t" || &header[1] != "value" {
        return Err(perr("header must be t,value[,imag]".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k).map_or(Ok(0.0), |s| {
                s.trim().parse().map_err(|e| perr(format!("{e} in row {rec:?}")))
            })
        };
        rows.push((num(0)?, num(1)?, num(2)?));
    }
    if rows.len() < 2 {
        return Err(perr("need at least two rows".into()));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows)
}

fn interpolate(rows: &[(f64, f64, f64)], t: f64) -> Option<(f64, f64)> {
    let span = rows[rows.len() - 1].0 - rows[0].0;
    let slack = 1e-12 * span.max(1.0);
    if t < rows[0].0 - slack || t > rows[rows.len() - 1].0 + slack {
        return None;
    }
    let k = rows.partition_point(|r| r.0 <= t).clamp(1, rows.len() - 1);
    let (a, b) = (rows[k - 1], rows[k]);
    let w = if b.0 > a.0 { (t - a.0) / (b.0 - a.0) } else { 0.0 };
    Some((a.1 + w * (b.1 - a.1), a.2 + w * (b.2 - a.2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let ts = [0.0, 0.5, 1.0];
        assert_eq!(Profile::constant(2.0).sample(&ts).unwrap(), vec![2.0; 3]);
        let a = Profile::Affine {
            intercept: 1.0,
            slope: -2.0,
        };
        assert_eq!(a.sample(&ts).unwrap(), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn tabulated_interpolates_and_rejects_extrapolation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeta.csv");
        std::fs::write(&path, "t,value,imag\n0,1,0\n1,3,2\n").unwrap();
        let p = Profile::Tabulated { path: path.clone() };
        assert_eq!(p.sample_complex(&[0.25]).unwrap(), vec![(1.5, 0.5)]);
        assert!(p.sample(&[1.5]).is_err());
        let back: Profile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
