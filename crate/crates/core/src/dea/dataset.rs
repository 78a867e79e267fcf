use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Role a file column plays in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Id,
    Name,
    Input,
    Intermediate,
    Output,
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Id => "id",
            Self::Name => "name",
            Self::Input => "input",
            Self::Intermediate => "intermediate",
            Self::Output => "output",
        })
    }
}

/// Position of a cell in the delimited layout: `line` is 1-based with the
/// header on line 1, `column` is 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLocation {
    pub line: usize,
    pub column: usize,
    pub label: String,
    pub role: ColumnRole,
}

impl fmt::Display for CellLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {} ({}, {})",
            self.line,
            self.column + 1,
            self.label,
            self.role
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("parse error at {location}: {value:?} is not a number")]
    Parse { location: CellLocation, value: String },
    #[error("validation error at {location}: value {value} must be strictly positive and finite")]
    NonPositive { location: CellLocation, value: f64 },
    #[error("schema error: no {0} column")]
    MissingRole(ColumnRole),
    #[error("schema error: more than one {0} column")]
    DuplicateRole(ColumnRole),
    #[error("schema error at line {line}: duplicate DMU id {id:?} (first seen on line {first_line})")]
    DuplicateId { id: String, line: usize, first_line: usize },
    #[error("schema error: at least 2 DMUs are required, found {0}")]
    TooFewDmus(usize),
    #[error("schema error at line {line}: expected {expected} fields, found {found}")]
    RowLength { line: usize, expected: usize, found: usize },
    #[error("schema error: column {column} ({label:?}) has no recognizable role")]
    UnknownColumn { column: usize, label: String },
    #[error("schema error: {0}")]
    Malformed(String),
}

impl DatasetError {
    /// Cell coordinates, for errors that point at one cell.
    pub fn location(&self) -> Option<&CellLocation> {
        match self {
            Self::Parse { location, .. } | Self::NonPositive { location, .. } => Some(location),
            _ => None,
        }
    }
}

/// A set of DMUs observed on a two-stage process.
///
/// Rows are DMUs. `inputs` is `n × m`, `intermediates` is `n × p`, and
/// `outputs` is `n × s`. All values are strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dmu_ids: Vec<String>,
    pub dmu_names: Vec<String>,
    pub input_labels: Vec<String>,
    pub intermediate_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub intermediates: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

fn default_labels(prefix: char, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

impl Dataset {
    /// Builds a dataset with default column labels (`x1.., z1.., y1..`).
    /// Names default to the ids.
    pub fn new(
        dmu_ids: Vec<String>,
        inputs: Vec<Vec<f64>>,
        intermediates: Vec<Vec<f64>>,
        outputs: Vec<Vec<f64>>,
    ) -> Result<Self, DatasetError> {
        let width = |rows: &[Vec<f64>]| rows.first().map_or(0, Vec::len);
        let dataset = Self {
            dmu_names: dmu_ids.clone(),
            input_labels: default_labels('x', width(&inputs)),
            intermediate_labels: default_labels('z', width(&intermediates)),
            output_labels: default_labels('y', width(&outputs)),
            dmu_ids,
            inputs,
            intermediates,
            outputs,
        };
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, DatasetError> {
        self.dmu_names = names;
        self.validate()?;
        Ok(self)
    }

    pub fn num_dmus(&self) -> usize {
        self.dmu_ids.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.input_labels.len()
    }

    pub fn num_intermediates(&self) -> usize {
        self.intermediate_labels.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_labels.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.dmu_ids.iter().position(|d| d == id)
    }

    fn blocks(&self) -> [(&[Vec<f64>], &[String], ColumnRole); 3] {
        [
            (&self.inputs, &self.input_labels, ColumnRole::Input),
            (&self.intermediates, &self.intermediate_labels, ColumnRole::Intermediate),
            (&self.outputs, &self.output_labels, ColumnRole::Output),
        ]
    }

    /// Checks every dataset invariant. Cell locations refer to the
    /// canonical layout produced by `io::render_dataset`.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let n = self.dmu_ids.len();
        if n < 2 {
            return Err(DatasetError::TooFewDmus(n));
        }
        if self.dmu_names.len() != n {
            return Err(DatasetError::Malformed(format!(
                "{} names for {n} DMUs",
                self.dmu_names.len()
            )));
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (j, id) in self.dmu_ids.iter().enumerate() {
            if let Some(first) = seen.insert(id.as_str(), j) {
                return Err(DatasetError::DuplicateId {
                    id: id.clone(),
                    line: j + 2,
                    first_line: first + 2,
                });
            }
        }

        let mut column = 2;
        for (rows, labels, role) in self.blocks() {
            if labels.is_empty() {
                return Err(DatasetError::MissingRole(role));
            }
            if rows.len() != n {
                return Err(DatasetError::Malformed(format!(
                    "{role} matrix has {} rows for {n} DMUs",
                    rows.len()
                )));
            }
            for (j, row) in rows.iter().enumerate() {
                if row.len() != labels.len() {
                    return Err(DatasetError::RowLength {
                        line: j + 2,
                        expected: labels.len(),
                        found: row.len(),
                    });
                }
                for (c, &value) in row.iter().enumerate() {
                    if !(value.is_finite() && value > 0.0) {
                        return Err(DatasetError::NonPositive {
                            location: CellLocation {
                                line: j + 2,
                                column: column + c,
                                label: labels[c].clone(),
                                role,
                            },
                            value,
                        });
                    }
                }
            }
            column += labels.len();
        }
        Ok(())
    }

    /// Copy with every column divided by its maximum.
    pub fn normalized(&self) -> Dataset {
        fn scale(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
            let width = rows.first().map_or(0, Vec::len);
            let maxima: Vec<f64> = (0..width)
                .map(|c| rows.iter().map(|r| r[c]).fold(f64::MIN, f64::max))
                .collect();
            rows.iter()
                .map(|r| r.iter().zip(&maxima).map(|(v, m)| v / m).collect())
                .collect()
        }
        Dataset {
            inputs: scale(&self.inputs),
            intermediates: scale(&self.intermediates),
            outputs: scale(&self.outputs),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("D{i}")).collect()
    }

    #[test]
    fn rejects_zero_cell_with_location() {
        let err = Dataset::new(
            ids(2),
            vec![vec![1.0], vec![2.0]],
            vec![vec![1.0], vec![0.0]],
            vec![vec![1.0], vec![1.0]],
        )
        .unwrap_err();
        let loc = err.location().unwrap();
        assert_eq!(loc.line, 3);
        assert_eq!(loc.column, 3);
        assert_eq!(loc.label, "z1");
        assert_eq!(loc.role, ColumnRole::Intermediate);
    }

    #[test]
    fn rejects_duplicate_ids_and_single_dmu() {
        let err = Dataset::new(
            vec!["A".into(), "A".into()],
            vec![vec![1.0]; 2],
            vec![vec![1.0]; 2],
            vec![vec![1.0]; 2],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            DatasetError::DuplicateId {
                line: 3,
                first_line: 2,
                ..
            }
        ));

        let err = Dataset::new(ids(1), vec![vec![1.0]], vec![vec![1.0]], vec![vec![1.0]]).unwrap_err();
        assert_eq!(err, DatasetError::TooFewDmus(1));
    }

    #[test]
    fn rejects_missing_block() {
        let err = Dataset::new(ids(2), vec![vec![1.0]; 2], vec![vec![]; 2], vec![vec![1.0]; 2]).unwrap_err();
        assert_eq!(err, DatasetError::MissingRole(ColumnRole::Intermediate));
    }

    #[test]
    fn normalization_scales_columns_to_unit_max() {
        let d = Dataset::new(
            ids(2),
            vec![vec![2.0, 10.0], vec![4.0, 5.0]],
            vec![vec![3.0], vec![3.0]],
            vec![vec![1.0], vec![8.0]],
        )
        .unwrap()
        .normalized();
        assert_eq!(d.inputs, vec![vec![0.5, 1.0], vec![1.0, 0.5]]);
        assert_eq!(d.intermediates, vec![vec![1.0], vec![1.0]]);
        assert_eq!(d.outputs, vec![vec![0.125], vec![1.0]]);
    }
}
