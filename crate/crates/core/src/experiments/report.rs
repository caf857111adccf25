use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Named numeric columns of equal length, optionally with a text label per
/// row (written as a leading `label` column).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Empty, or one entry per row.
    pub labels: Vec<String>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Appends a labelled row. A table holds either only labelled or only
    /// unlabelled rows.
    pub fn push_labeled(&mut self, label: &str, row: Vec<f64>) -> Result<()> {
        if self.labels.len() != self.rows.len() {
            return Err(invalid!("table {} mixes labelled and unlabelled rows", self.name));
        }
        self.push_row(row)?;
        self.labels.push(label.to_string());
        Ok(())
    }

    /// Appends a row; its length must match the column count.
    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if !self.labels.is_empty() {
            return Err(invalid!("table {} needs a label for every row", self.name));
        }
        self.push_row(row)
    }

    fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(invalid!(
                "table {} has {} columns, row has {}",
                self.name,
                self.columns.len(),
                row.len()
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metric {
    pub name: String,
    pub unit: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentReport {
    pub name: String,
    /// Flattened key/value parameters.
    pub parameters: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub scalar_metrics: Vec<Metric>,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn new(name: &str, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            parameters: Vec::new(),
            tables: Vec::new(),
            scalar_metrics: Vec::new(),
            seed,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.push((key.to_string(), value.to_string()));
    }

    pub fn metric(&mut self, name: &str, unit: &str, value: f64) {
        self.scalar_metrics.push(Metric {
            name: name.to_string(),
            unit: unit.to_string(),
            value,
        });
    }

    pub fn get_metric(&self, name: &str) -> Option<f64> {
        self.scalar_metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}
