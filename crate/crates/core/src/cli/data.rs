//! CSV ingestion with line-numbered errors.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use crate::error::{Error, Result};
use crate::linmod::DesignMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Rad,
    Deg,
}

impl Units {
    pub fn to_radians(self, v: f64) -> f64 {
        match self {
            Units::Rad => v,
            Units::Deg => v.to_radians(),
        }
    }

    pub fn from_radians(self, v: f64) -> f64 {
        match self {
            Units::Rad => v,
            Units::Deg => v.to_degrees(),
        }
    }
}

/// Column names tried, in order, when no angle column is given.
pub const ANGLE_CANDIDATES: [&str; 6] = ["angle", "theta", "direction", "direction_deg", "direction_rad", "dir"];

#[derive(Debug, Clone)]
pub struct Table {
    headers: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<Vec<String>>,
    /// Source line of each row.
    lines: Vec<usize>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Table::from_reader(file)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| data_error(&e, "cannot read header row"))?
            .iter()
            .map(String::from)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(Error::Data {
                line: 1,
                msg: "missing header row".into(),
            });
        }
        let mut index = HashMap::new();
        for (j, h) in headers.iter().enumerate() {
            if index.insert(h.clone(), j).is_some() {
                return Err(Error::Data {
                    line: 1,
                    msg: format!("duplicate column '{h}'"),
                });
            }
        }
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| data_error(&e, "malformed record"))?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            rows.push(rec.iter().map(String::from).collect());
            lines.push(line);
        }
        Ok(Table {
            headers,
            index,
            rows,
            lines,
        })
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        let j = *self.index.get(name).ok_or_else(|| {
            Error::Usage(format!(
                "unknown column '{name}'; available: {}",
                self.headers.join(", ")
            ))
        })?;
        self.rows
            .iter()
            .zip(&self.lines)
            .map(|(row, &line)| {
                let cell = &row[j];
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Data {
                        line,
                        msg: format!("column '{name}': '{cell}' is not a finite number"),
                    }),
                }
            })
            .collect()
    }

    /// Resolve the angle column, falling back to [`ANGLE_CANDIDATES`].
    pub fn angle_column(&self, requested: Option<&str>) -> Result<String> {
        if let Some(name) = requested {
            if self.has_column(name) {
                return Ok(name.to_string());
            }
            return Err(Error::Usage(format!("angle column '{name}' not found")));
        }
        ANGLE_CANDIDATES
            .iter()
            .find(|c| self.has_column(c))
            .map(|c| c.to_string())
            .ok_or_else(|| Error::Usage("no angle column found; pass --angle-col".into()))
    }

    /// Angles in radians reduced to `[0, 2π)`.
    pub fn angles(&self, column: &str, units: Units) -> Result<Vec<f64>> {
        Ok(self
            .numeric(column)?
            .into_iter()
            .map(|v| units.to_radians(v).rem_euclid(TAU))
            .collect())
    }

    /// Evaluate a formula into a design matrix; unknown columns are usage
    /// errors.
    pub fn design(&self, formula: &Formula) -> Result<DesignMatrix> {
        let mut values = HashMap::new();
        for col in formula.columns() {
            if !self.has_column(&col) {
                return Err(Error::Formula(format!(
                    "unknown column '{col}'; available: {}",
                    self.headers.join(", ")
                )));
            }
            values.insert(col.clone(), self.numeric(&col)?);
        }
        let columns: Vec<Vec<f64>> = formula
            .terms
            .iter()
            .map(|t| {
                (0..self.len())
                    .map(|i| t.expr.eval(&|c: &str| values[c][i]))
                    .collect::<Vec<f64>>()
            })
            .collect();
        for (t, col) in formula.terms.iter().zip(&columns) {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data {
                    line: self.lines[i],
                    msg: format!("term '{}' evaluates to {}", t.name, col[i]),
                });
            }
        }
        DesignMatrix::from_columns(&columns, formula.names())
    }
}

fn data_error(e: &csv::Error, what: &str) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Data {
        line,
        msg: format!("{what}: {e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "id,distance,direction_deg\n1,107,67\n2,46,66\n# note\n3,33,74\n";

    #[test]
    fn reads_angles_and_design() {
        let t = Table::from_reader(CSV.as_bytes()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.angle_column(None).unwrap(), "direction_deg");
        let a = t.angles("direction_deg", Units::Deg).unwrap();
        assert!((a[0] - 67f64.to_radians()).abs() < 1e-15);
        let f = Formula::parse("I(distance<=50)*(distance-50) + distance").unwrap();
        let x = t.design(&f).unwrap();
        assert_eq!(x.column(0), vec![0.0, -4.0, -17.0]);
        assert_eq!(x.column(1), vec![107.0, 46.0, 33.0]);
        assert_eq!(x.names()[1], "distance");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let t = Table::from_reader("x,angle\n1,0.5\n2,oops\n".as_bytes()).unwrap();
        match t.angles("angle", Units::Rad).unwrap_err() {
            Error::Data { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        let err = t.design(&Formula::parse("y").unwrap()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert_eq!(t.angle_column(Some("nope")).unwrap_err().exit_code(), 1);
        let ragged = Table::from_reader("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(ragged, Error::Data { line: 3, .. }), "{ragged}");
        let dup = Table::from_reader("a,a\n1,2\n".as_bytes()).unwrap_err();
        assert_eq!(dup.exit_code(), 2);
    }
}
