//! Input-output technical coefficients.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoTableError {
    #[error("infeasible input-output table: column {sector} sums to {column_sum}")]
    InfeasibleIO { sector: usize, column_sum: f64 },
    #[error("io table: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoTable {
    /// `coefficients[i][j]`: units of sector-i input per unit of sector-j output.
    pub coefficients: Vec<Vec<f64>>,
    /// Workers per unit of output.
    pub labor_coefficients: Vec<f64>,
    /// tCO2 per unit of output.
    pub emission_intensity: Vec<f64>,
}

impl IoTable {
    pub fn new(
        coefficients: Vec<Vec<f64>>,
        labor_coefficients: Vec<f64>,
        emission_intensity: Vec<f64>,
    ) -> Result<Self, IoTableError> {
        let t = Self {
            coefficients,
            labor_coefficients,
            emission_intensity,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn n_sectors(&self) -> usize {
        self.labor_coefficients.len()
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        self.coefficients.iter().map(|row| row[j]).sum()
    }

    /// Shape, sign and Leontief productivity checks.
    pub fn validate(&self) -> Result<(), IoTableError> {
        let s = self.labor_coefficients.len();
        if s == 0 {
            return Err(IoTableError::Malformed("no sectors".into()));
        }
        if self.coefficients.len() != s || self.coefficients.iter().any(|r| r.len() != s) {
            return Err(IoTableError::Malformed(format!(
                "coefficient matrix is not {s}x{s}"
            )));
        }
        if self.emission_intensity.len() != s {
            return Err(IoTableError::Malformed(
                "emission_intensity length mismatch".into(),
            ));
        }
        let all = self
            .coefficients
            .iter()
            .flatten()
            .chain(&self.labor_coefficients)
            .chain(&self.emission_intensity);
        for v in all {
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(IoTableError::Malformed(format!(
                    "negative or non-finite entry {v}"
                )));
            }
        }
        if self.labor_coefficients.iter().any(|l| *l <= 0.0) {
            return Err(IoTableError::Malformed(
                "labor coefficients must be positive".into(),
            ));
        }
        self.check_feasible()
    }

    pub fn check_feasible(&self) -> Result<(), IoTableError> {
        for j in 0..self.n_sectors() {
            let column_sum = self.column_sum(j);
            if column_sum >= 1.0 {
                return Err(IoTableError::InfeasibleIO {
                    sector: j,
                    column_sum,
                });
            }
        }
        Ok(())
    }

    /// Solves `x = A x + f` by fixed-point iteration (converges because every
    /// column sum is below one).
    pub fn leontief_output(&self, final_demand: &[f64]) -> Vec<f64> {
        let s = self.n_sectors();
        let mut x = final_demand.to_vec();
        for _ in 0..10_000 {
            let next: Vec<f64> = (0..s)
                .map(|i| {
                    final_demand[i] + (0..s).map(|j| self.coefficients[i][j] * x[j]).sum::<f64>()
                })
                .collect();
            let delta = next
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            x = next;
            if delta <= 1e-12 * x.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
                break;
            }
        }
        x
    }

    /// Prices satisfying `p_j = (1 + markup) (wage_cost_j + Σ_i a_ij p_i)`.
    pub fn markup_prices(&self, wage_cost: &[f64], markup: f64) -> Vec<f64> {
        let s = self.n_sectors();
        let m = 1.0 + markup;
        let mut p: Vec<f64> = wage_cost.iter().map(|w| m * w).collect();
        for _ in 0..10_000 {
            let next: Vec<f64> = (0..s)
                .map(|j| {
                    m * (wage_cost[j] + (0..s).map(|i| self.coefficients[i][j] * p[i]).sum::<f64>())
                })
                .collect();
            let delta = next
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            p = next;
            if delta <= 1e-12 * p.iter().fold(1.0f64, |mx, v| mx.max(v.abs())) {
                break;
            }
        }
        p
    }

    /// Reads S rows of S coefficients, a row of labor coefficients and a row
    /// of emission intensities. Lines starting with `#` are ignored.
    pub fn from_csv(path: &Path) -> Result<Self, IoTableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| {
                    v.parse::<f64>().map_err(|_| {
                        IoTableError::Malformed(format!("row {}: cannot parse `{v}`", i + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        if rows.len() < 3 {
            return Err(IoTableError::Malformed("need at least 3 rows".into()));
        }
        let s = rows.len() - 2;
        let emission_intensity = rows.pop().expect("checked length");
        let labor_coefficients = rows.pop().expect("checked length");
        if labor_coefficients.len() != s {
            return Err(IoTableError::Malformed(format!(
                "{s} coefficient rows but labor row has {} entries",
                labor_coefficients.len()
            )));
        }
        Self::new(rows, labor_coefficients, emission_intensity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn infeasible_column() {
        let err = IoTable::new(
            vec![vec![0.5, 0.1], vec![0.52, 0.2]],
            vec![0.1, 0.1],
            vec![0.0, 0.0],
        )
        .unwrap_err();
        match err {
            IoTableError::InfeasibleIO { sector, column_sum } => {
                assert_eq!(sector, 0);
                assert!((column_sum - 1.02).abs() < 1e-12);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn leontief_two_sector() {
        let t = IoTable::new(
            vec![vec![0.0, 0.5], vec![0.0, 0.0]],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let x = t.leontief_output(&[1.0, 2.0]);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn markup_prices_single_sector() {
        let t = IoTable::new(vec![vec![0.2]], vec![1.0], vec![0.0]).unwrap();
        // p = 1.1 (10 + 0.2 p)  =>  p = 11 / 0.78
        let p = t.markup_prices(&[10.0], 0.1);
        assert!((p[0] - 11.0 / 0.78).abs() < 1e-9);
    }

    #[test]
    fn reads_csv() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# two sectors\n0.1,0.2\n0.3,0.1\n0.01,0.02\n0.5,0.0").unwrap();
        let t = IoTable::from_csv(f.path()).unwrap();
        assert_eq!(t.n_sectors(), 2);
        assert_eq!(t.coefficients[1][0], 0.3);
        assert_eq!(t.labor_coefficients, vec![0.01, 0.02]);
        assert_eq!(t.emission_intensity, vec![0.5, 0.0]);
    }
}
