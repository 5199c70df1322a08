//! Datasets with a missingness mask, the friedman1 generator, missing-data
//! mechanisms and CSV persistence.

mod csv_io;
mod friedman;
mod mechanism;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv, MISSING_TOKEN, RESPONSE_COLUMN};
pub use friedman::{eval_friedman1, gen_friedman1, FRIEDMAN1_DIM};
pub use mechanism::{apply_mechanism, masked_count, mechanism_weights, Mechanism, MechanismSpec, Target};

use crate::error::{invalid, Result};
use crate::Scalar;

/// Feature matrix with a parallel missingness mask and a fully observed response.
///
/// Masked cells keep a placeholder number in storage, but every read goes
/// through [`Dataset::get`], which hides it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    n_rows: usize,
    n_cols: usize,
    features: Vec<T>,
    mask: Vec<bool>,
    response: Vec<T>,
    column_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    /// Build from row-major features. `mask[i * p + h]` is true when cell (i, h) is missing.
    pub fn new(
        n_cols: usize,
        features: Vec<T>,
        mask: Vec<bool>,
        response: Vec<T>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let n_rows = response.len();
        if features.len() != n_rows * n_cols {
            return Err(invalid(format!(
                "feature buffer has {} cells, expected {} x {}",
                features.len(),
                n_rows,
                n_cols
            )));
        }
        if mask.len() != features.len() {
            return Err(invalid("mask and features differ in size"));
        }
        if column_names.len() != n_cols {
            return Err(invalid(format!(
                "{} column names for {} columns",
                column_names.len(),
                n_cols
            )));
        }
        if let Some(i) = response.iter().position(|y| !y.is_finite()) {
            return Err(invalid(format!("response of row {i} is not finite")));
        }
        for (idx, (&v, &m)) in features.iter().zip(&mask).enumerate() {
            if !m && !v.is_finite() {
                return Err(invalid(format!(
                    "observed cell ({}, {}) is not finite",
                    idx / n_cols.max(1),
                    idx % n_cols.max(1)
                )));
            }
        }
        Ok(Self { n_rows, n_cols, features, mask, response, column_names })
    }

    /// Complete dataset with default column names `x1..xp`.
    pub fn complete(rows: Vec<Vec<T>>, response: Vec<T>) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(invalid("ragged feature rows"));
        }
        if rows.len() != response.len() {
            return Err(invalid("row count and response length differ"));
        }
        let features: Vec<T> = rows.into_iter().flatten().collect();
        let mask = vec![false; features.len()];
        Self::new(p, features, mask, response, default_names(p))
    }

    /// Dataset from optional cells; `None` becomes a masked cell with a zero placeholder.
    pub fn from_options(rows: Vec<Vec<Option<T>>>, response: Vec<T>) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(invalid("ragged feature rows"));
        }
        if rows.len() != response.len() {
            return Err(invalid("row count and response length differ"));
        }
        let mut features = Vec::with_capacity(rows.len() * p);
        let mut mask = Vec::with_capacity(rows.len() * p);
        for cell in rows.into_iter().flatten() {
            features.push(cell.unwrap_or_else(T::zero));
            mask.push(cell.is_none());
        }
        Self::new(p, features, mask, response, default_names(p))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn response(&self) -> &[T] {
        &self.response
    }

    pub fn y(&self, row: usize) -> T {
        self.response[row]
    }

    /// Observed value of cell (row, col), or `None` when masked.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<T> {
        let idx = row * self.n_cols + col;
        if self.mask[idx] {
            None
        } else {
            Some(self.features[idx])
        }
    }

    #[inline]
    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> Vec<Option<T>> {
        (0..self.n_cols).map(|h| self.get(row, h)).collect()
    }

    /// Row values when fully observed.
    pub fn complete_row(&self, row: usize) -> Option<Vec<T>> {
        (0..self.n_cols).map(|h| self.get(row, h)).collect()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_cells(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn missing_in_column(&self, col: usize) -> usize {
        (0..self.n_rows).filter(|&i| self.is_missing(i, col)).count()
    }

    pub fn row_has_missing(&self, row: usize) -> bool {
        self.mask[row * self.n_cols..(row + 1) * self.n_cols].iter().any(|&m| m)
    }

    pub fn has_missing(&self) -> bool {
        self.mask.iter().any(|&m| m)
    }

    /// Observed values of one column, in row order.
    pub fn observed_column(&self, col: usize) -> Vec<T> {
        (0..self.n_rows).filter_map(|i| self.get(i, col)).collect()
    }

    /// Copy with cell (row, col) masked.
    pub fn with_masked(&self, cells: &[(usize, usize)]) -> Self {
        let mut out = self.clone();
        for &(i, h) in cells {
            out.mask[i * self.n_cols + h] = true;
        }
        out
    }

    /// Copy with every mask bit cleared and masked cells replaced by `fill(row, col)`.
    pub fn filled_with(&self, mut fill: impl FnMut(usize, usize) -> T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for h in 0..self.n_cols {
                let idx = i * self.n_cols + h;
                if out.mask[idx] {
                    out.features[idx] = fill(i, h);
                    out.mask[idx] = false;
                }
            }
        }
        out
    }

    /// Copy restricted to `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let p = self.n_cols;
        let mut features = Vec::with_capacity(rows.len() * p);
        let mut mask = Vec::with_capacity(rows.len() * p);
        for &i in rows {
            features.extend_from_slice(&self.features[i * p..(i + 1) * p]);
            mask.extend_from_slice(&self.mask[i * p..(i + 1) * p]);
        }
        Self {
            n_rows: rows.len(),
            n_cols: p,
            features,
            mask,
            response: rows.iter().map(|&i| self.response[i]).collect(),
            column_names: self.column_names.clone(),
        }
    }

    /// Replace the stored value of every masked cell by `scramble(row, col)`.
    ///
    /// The mask is unchanged, so no observable output may depend on the result.
    pub fn scramble_masked(&self, mut scramble: impl FnMut(usize, usize) -> T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for h in 0..self.n_cols {
                let idx = i * self.n_cols + h;
                if out.mask[idx] {
                    out.features[idx] = scramble(i, h);
                }
            }
        }
        out
    }

    /// Same cells, new response vector.
    pub fn with_response(&self, response: Vec<T>) -> Result<Self> {
        if response.len() != self.n_rows {
            return Err(invalid("response length differs from row count"));
        }
        Self::new(
            self.n_cols,
            self.features.clone(),
            self.mask.clone(),
            response,
            self.column_names.clone(),
        )
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_cols {
            return Err(invalid("column name count differs from column count"));
        }
        self.column_names = names;
        Ok(self)
    }

    /// Convert the scalar type; masked placeholders are zeroed.
    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            features: self
                .features
                .iter()
                .zip(&self.mask)
                .map(|(&v, &m)| if m { U::zero() } else { U::from_f64_lossy(v.as_f64()) })
                .collect(),
            mask: self.mask.clone(),
            response: self.response.iter().map(|&y| U::from_f64_lossy(y.as_f64())).collect(),
            column_names: self.column_names.clone(),
        }
    }
}

pub(crate) fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|h| format!("x{h}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dataset<f64> {
        Dataset::from_options(
            vec![vec![Some(1.0), None], vec![Some(2.0), Some(3.0)], vec![None, Some(4.0)]],
            vec![0.0, 1.0, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn masked_cells_read_as_none() {
        let d = small();
        assert_eq!(d.get(0, 1), None);
        assert_eq!(d.get(1, 1), Some(3.0));
        assert_eq!(d.masked_cells(), 2);
        assert_eq!(d.missing_in_column(0), 1);
        assert!(d.row_has_missing(2));
        assert!(!d.row_has_missing(1));
    }

    #[test]
    fn rejects_mismatched_shapes() {
        assert!(Dataset::<f64>::new(2, vec![0.0; 3], vec![false; 3], vec![0.0], default_names(2)).is_err());
        assert!(Dataset::complete(vec![vec![1.0], vec![1.0, 2.0]], vec![0.0, 1.0]).is_err());
        assert!(Dataset::complete(vec![vec![1.0]], vec![f64::NAN]).is_err());
    }

    #[test]
    fn select_rows_keeps_order_and_mask() {
        let d = small().select_rows(&[2, 0]);
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.get(0, 0), None);
        assert_eq!(d.get(1, 0), Some(1.0));
        assert_eq!(d.response(), &[2.0, 0.0]);
    }

    #[test]
    fn scramble_preserves_observed_view() {
        let d = small();
        let s = d.scramble_masked(|i, h| (i * 31 + h) as f64 * 1e6);
        for i in 0..d.n_rows() {
            assert_eq!(d.row(i), s.row(i));
        }
    }
}
