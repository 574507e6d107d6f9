//! The regression dataset: a dense design matrix plus a response vector.

use crate::error::{Error, Result};

/// An immutable `n × d` design matrix with responses, stored row-major.
///
/// Construction validates shapes and finiteness; afterwards a `Dataset` is a
/// plain value that is safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    d: usize,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: usize) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if d == 0 {
            return Err(Error::InvalidConfig("dataset needs d >= 1".into()));
        }
        if x.len() != n * d {
            return Err(Error::DimensionMismatch(format!(
                "x has {} entries, expected n*d = {}",
                x.len(),
                n * d
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix entry".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response entry".into()));
        }
        Ok(Dataset {
            x,
            y,
            n,
            d,
            feature_names: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for d = {}",
                names.len(),
                self.d
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Display label for feature `j`: the column name when known, otherwise
    /// the 1-based index in the `X1`, `X2`, ... convention.
    pub fn feature_label(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => names[j].clone(),
            None => format!("X{}", j + 1),
        }
    }

    pub fn mean_y(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.n as f64
    }

    /// New dataset keeping only the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        for &c in columns {
            if c >= self.d {
                return Err(Error::DimensionMismatch(format!(
                    "column {} out of range for d = {}",
                    c, self.d
                )));
            }
        }
        if columns.is_empty() {
            return Err(Error::InvalidConfig("column selection is empty".into()));
        }
        let mut x = Vec::with_capacity(self.n * columns.len());
        for i in 0..self.n {
            let row = self.row(i);
            x.extend(columns.iter().map(|&c| row[c]));
        }
        let mut out = Dataset::new(x, self.y.clone(), columns.len())?;
        if let Some(names) = &self.feature_names {
            out = out.with_names(columns.iter().map(|&c| names[c].clone()).collect())?;
        }
        Ok(out)
    }

    /// New dataset with rows reordered so that equal inputs produce
    /// bit-identical downstream sums regardless of the incoming row order.
    /// Rows are sorted lexicographically by (x row, y) under the IEEE total
    /// order.
    pub fn canonical_row_order(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|&a, &b| {
            let ra = self.row(a);
            let rb = self.row(b);
            for (va, vb) in ra.iter().zip(rb) {
                match va.total_cmp(vb) {
                    std::cmp::Ordering::Equal => continue,
                    other => return other,
                }
            }
            self.y[a].total_cmp(&self.y[b])
        });
        let mut x = Vec::with_capacity(self.n * self.d);
        let mut y = Vec::with_capacity(self.n);
        for &i in &idx {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Dataset {
            x,
            y,
            n: self.n,
            d: self.d,
            feature_names: self.feature_names.clone(),
        }
    }
}
