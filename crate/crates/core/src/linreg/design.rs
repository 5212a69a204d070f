use nalgebra::DMatrix;

use crate::error::RegressionError;

/// Named regressor columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    nobs: usize,
}

impl DesignMatrix {
    pub fn new(nobs: usize) -> Self {
        DesignMatrix {
            names: Vec::new(),
            columns: Vec::new(),
            nobs,
        }
    }

    /// Build from `(name, column)` pairs. The first column fixes the length.
    pub fn from_columns<S: Into<String>>(
        columns: impl IntoIterator<Item = (S, Vec<f64>)>,
    ) -> Result<Self, RegressionError> {
        let mut iter = columns.into_iter().peekable();
        let nobs = iter.peek().map_or(0, |(_, c)| c.len());
        let mut x = DesignMatrix::new(nobs);
        for (name, col) in iter {
            x.push(name, col)?;
        }
        Ok(x)
    }

    pub fn push(&mut self, name: impl Into<String>, column: Vec<f64>) -> Result<(), RegressionError> {
        let name = name.into();
        if column.len() != self.nobs {
            return Err(RegressionError::ColumnLength {
                name,
                expected: self.nobs,
                found: column.len(),
            });
        }
        if self.names.contains(&name) {
            return Err(RegressionError::DuplicateName(name));
        }
        self.names.push(name);
        self.columns.push(column);
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, column: Vec<f64>) -> Result<Self, RegressionError> {
        self.push(name, column)?;
        Ok(self)
    }

    pub fn nobs(&self) -> usize {
        self.nobs
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.index_of(name).map(|i| self.columns[i].as_slice())
    }

    pub fn column_at(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Keep only rows `range` of every column.
    pub fn rows(&self, range: std::ops::Range<usize>) -> DesignMatrix {
        DesignMatrix {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[range.clone()].to_vec()).collect(),
            nobs: range.len(),
        }
    }

    /// Column-major n x k matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(
            self.nobs,
            self.ncols(),
            self.columns.iter().flat_map(|c| c.iter().copied()),
        )
    }
}
