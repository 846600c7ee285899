//! Coordinate charts: a fixed list of named coordinates on an open set of R^n.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq, Hash)]
struct ChartData {
    names: Vec<String>,
}

/// An n-dimensional coordinate chart. Cheap to clone, immutable.
///
/// Every polynomial, form and connection carries the chart it lives on;
/// operations across distinct charts are rejected.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart(Arc<ChartData>);

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Chart> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::BadChart(
                "chart needs at least one coordinate".into(),
            ));
        }
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(Error::BadChart(format!("bad coordinate name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::BadChart(format!("duplicate coordinate `{n}`")));
            }
        }
        Ok(Chart(Arc::new(ChartData { names })))
    }

    pub fn dim(&self) -> usize {
        self.0.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }

    /// Error unless `other` is the same chart.
    pub fn expect_same(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch(self.to_string(), other.to_string()))
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.names.join(" "))
    }
}
