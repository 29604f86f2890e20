//! Dense kernel matrices, cosine normalization and CSV serialization.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    /// `n x n` matrix over the fit collection.
    FitSquare,
    /// `m x n` matrix of query graphs against the fit collection.
    Cross,
}

impl MatrixRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixRole::FitSquare => "fit_square",
            MatrixRole::Cross => "cross",
        }
    }
}

/// Row-major dense kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    role: MatrixRole,
}

impl KernelMatrix {
    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>, role: MatrixRole) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::shape(
                format!("{} values for {rows}x{cols}", rows * cols),
                format!("{} values", values.len()),
            ));
        }
        if role == MatrixRole::FitSquare && rows != cols {
            return Err(Error::shape("square matrix", format!("{rows}x{cols}")));
        }
        Ok(KernelMatrix {
            rows,
            cols,
            values,
            role,
        })
    }

    pub fn zeros(rows: usize, cols: usize, role: MatrixRole) -> Self {
        KernelMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            role,
        }
    }

    /// Fills a symmetric matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn symmetric_from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n, n, MatrixRole::FitSquare);
        for i in 0..n {
            for j in i..n {
                let x = f(i, j);
                m.values[i * n + j] = x;
                m.values[j * n + i] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.values[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.values)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>, role: MatrixRole) -> Result<Self> {
        let values = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
            .collect();
        Self::from_vec(m.nrows(), m.ncols(), values, role)
    }

    /// Rows `rows` and columns `cols` of this matrix.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize], role: MatrixRole) -> Result<Self> {
        let values = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| self.get(i, j)))
            .collect();
        Self::from_vec(rows.len(), cols.len(), values, role)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &KernelMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Extreme eigenvalues `(min, max)` of the symmetric part.
    pub fn eigen_range(&self) -> Result<(f64, f64)> {
        if self.rows != self.cols {
            return Err(Error::shape(
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        if self.rows == 0 {
            return Ok((0.0, 0.0));
        }
        let m = self.to_dmatrix();
        let sym = (&m + m.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        Ok((eig.min(), eig.max()))
    }

    /// Symmetric within `1e-9` and `lambda_min >= -1e-8 * max(1, lambda_max)`.
    pub fn check_psd(&self) -> Result<()> {
        let asym = self.max_asymmetry();
        if asym >= 1e-9 {
            return Err(Error::Numerical(format!(
                "kernel matrix is not symmetric (max |K - K^T| = {asym:e})"
            )));
        }
        let (lo, hi) = self.eigen_range()?;
        if lo < -1e-8 * hi.max(1.0) {
            return Err(Error::Numerical(format!(
                "kernel matrix is not positive semidefinite (min eigenvalue {lo:e}, max {hi:e})"
            )));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &KernelMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// One line per row, comma separated, 17 significant digits, no header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                write!(line, "{x:.16e}").expect("writing to a String");
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R, role: MatrixRole, source: &Path) -> Result<Self> {
        let mut values = Vec::new();
        let mut rows = 0;
        let mut cols = None;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| Error::Parse {
                        file: source.to_path_buf(),
                        line: i + 1,
                        reason: format!("not a number: {t:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Parse {
                        file: source.to_path_buf(),
                        line: i + 1,
                        reason: format!("row has {} values, expected {c}", row.len()),
                    })
                }
                _ => {}
            }
            values.extend(row);
            rows += 1;
        }
        Self::from_vec(rows, cols.unwrap_or(0), values, role)
    }

    pub fn load_csv(path: &Path, role: MatrixRole) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file), role, path)
    }
}

/// Cosine normalization `K(i,j) / sqrt(dq(i) * df(j))`. Entries whose
/// denominator involves a zero self-kernel are set to 0.
pub fn normalize_matrix(
    k: &KernelMatrix,
    fit_diag: &[f64],
    query_diag: &[f64],
) -> Result<KernelMatrix> {
    if query_diag.len() != k.rows() || fit_diag.len() != k.cols() {
        return Err(Error::shape(
            format!("diagonals of length {} and {}", k.rows(), k.cols()),
            format!("{} and {}", query_diag.len(), fit_diag.len()),
        ));
    }
    if let Some(x) = fit_diag
        .iter()
        .chain(query_diag)
        .find(|&&x| x < 0.0 || x.is_nan())
    {
        return Err(Error::Numerical(format!(
            "negative self-kernel {x} cannot be normalized"
        )));
    }
    let mut out = KernelMatrix::zeros(k.rows(), k.cols(), k.role());
    for i in 0..k.rows() {
        for j in 0..k.cols() {
            let denom = query_diag[i] * fit_diag[j];
            if denom > 0.0 {
                out.set(i, j, k.get(i, j) / denom.sqrt());
            }
        }
    }
    Ok(out)
}

/// Metadata sidecar: one `key=value` per line.
pub fn write_metadata<W: Write>(mut out: W, entries: &[(String, String)]) -> Result<()> {
    for (k, v) in entries {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}
