//! Dense matrices over GF(p^m), acting on column vectors.

use serde::{Deserialize, Serialize};

use super::field::Field;
use super::LinAlgError;

#[derive(Clone)]
pub struct Matrix {
    pub field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.field == other.field
            && self.data == other.data
    }
}
impl Eq for Matrix {}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        Ok(())
    }
}

/// Serialized form: row-major packed coefficients.
#[derive(Serialize, Deserialize)]
pub struct MatrixRepr {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl Matrix {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: Field, rows: &[Vec<u32>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { field, rows: r, cols: c, data }
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut m = Matrix::zero(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn repr(&self) -> MatrixRepr {
        MatrixRepr { rows: self.rows, cols: self.cols, data: self.data.clone() }
    }

    pub fn from_repr(field: Field, r: &MatrixRepr) -> Result<Self, LinAlgError> {
        if r.data.len() != r.rows * r.cols {
            return Err(LinAlgError::DimensionMismatch("matrix data length".into()));
        }
        let q = field.order();
        if r.data.iter().any(|&x| x as u64 >= q) {
            return Err(LinAlgError::DimensionMismatch("entry out of field range".into()));
        }
        Ok(Matrix { field, rows: r.rows, cols: r.cols, data: r.data.clone() })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.field.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dims");
        let f = &self.field;
        let mut out = Matrix::zero(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b == 0 {
                        continue;
                    }
                    let cur = out.get(i, j);
                    out.set(i, j, f.add(cur, f.mul(a, b)));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = &self.field;
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *o = f.add(*o, b);
        }
        out
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let f = &self.field;
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o = f.mul(*o, c);
        }
        out
    }

    pub fn neg(&self) -> Matrix {
        let f = &self.field;
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o = f.neg(*o);
        }
        out
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols, "matvec dims");
        let f = &self.field;
        let mut out = vec![0u32; self.rows];
        for i in 0..self.rows {
            let mut acc = 0u32;
            let base = i * self.cols;
            for j in 0..self.cols {
                let a = self.data[base + j];
                if a != 0 && v[j] != 0 {
                    acc = f.add(acc, f.mul(a, v[j]));
                }
            }
            out[i] = acc;
        }
        out
    }

    /// Entrywise x -> x^(p^s).
    pub fn frobenius(&self, s: i64) -> Matrix {
        let f = &self.field;
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o = f.frob_pow(*o, s);
        }
        out
    }

    /// In-place reduced row echelon form; returns pivot column indices.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // find pivot
            let mut piv = None;
            for i in r..self.rows {
                if self.get(i, c) != 0 {
                    piv = Some(i);
                    break;
                }
            }
            let Some(pi) = piv else { continue };
            if pi != r {
                for j in 0..self.cols {
                    let a = self.get(r, j);
                    let b = self.get(pi, j);
                    self.set(r, j, b);
                    self.set(pi, j, a);
                }
            }
            let inv = f.inv(self.get(r, c));
            for j in c..self.cols {
                let v = f.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let v = f.sub(self.get(i, j), f.mul(factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_in_place().len()
    }

    /// Right null space: matrix whose rows span {v : A v = 0}.
    pub fn null_space(&self) -> Matrix {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let f = &self.field;
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = Some(r);
            }
            v
        };
        let free_cols: Vec<usize> = (0..self.cols).filter(|c| pivot_set[*c].is_none()).collect();
        let mut basis = Vec::with_capacity(free_cols.len());
        for &fc in &free_cols {
            let mut v = vec![0u32; self.cols];
            v[fc] = 1;
            for c in 0..self.cols {
                if let Some(r) = pivot_set[c] {
                    v[c] = f.neg(m.get(r, fc));
                }
            }
            basis.push(v);
        }
        Matrix::from_rows(self.field.clone(), &basis)
    }

    /// Solves A x = b; None when inconsistent.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zero(self.field.clone(), self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let pivots = aug.rref_in_place();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols);
        }
        Some(x)
    }

    /// Stacks rows of `other` under `self`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Determinant by fraction-free-ish Gaussian elimination over the field.
    pub fn det(&self) -> u32 {
        assert_eq!(self.rows, self.cols);
        let f = self.field.clone();
        let mut m = self.clone();
        let mut det = 1u32;
        for c in 0..m.cols {
            let mut piv = None;
            for i in c..m.rows {
                if m.get(i, c) != 0 {
                    piv = Some(i);
                    break;
                }
            }
            let Some(pi) = piv else { return 0 };
            if pi != c {
                for j in 0..m.cols {
                    let a = m.get(c, j);
                    let b = m.get(pi, j);
                    m.set(c, j, b);
                    m.set(pi, j, a);
                }
                det = f.neg(det);
            }
            let d = m.get(c, c);
            det = f.mul(det, d);
            let inv = f.inv(d);
            for i in c + 1..m.rows {
                let factor = f.mul(m.get(i, c), inv);
                if factor == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// Inverse; None when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::zero(self.field.clone(), n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let pivots = aug.rref_in_place();
        if pivots.len() != n || pivots.iter().enumerate().any(|(k, &c)| k != c) {
            return None;
        }
        let mut out = Matrix::zero(self.field.clone(), n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.get(i, n + j));
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffalg::make_field;

    #[test]
    fn rref_and_nullspace() {
        let f = make_field(2, 1).unwrap();
        // nilpotent [[0,1],[0,0]] has kernel span{(1,0)}
        let m = Matrix::from_rows(f, &[vec![0, 1], vec![0, 0]]);
        let ker = m.null_space();
        assert_eq!(ker.rows(), 1);
        assert_eq!(ker.row(0), &[1, 0]);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = make_field(5, 1).unwrap();
        let m = Matrix::from_rows(f.clone(), &[vec![1, 2, 0], vec![0, 1, 3], vec![4, 0, 2]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(f, 3));
    }

    #[test]
    fn det_multiplicative() {
        let f = make_field(7, 1).unwrap();
        let a = Matrix::from_rows(f.clone(), &[vec![1, 2], vec![3, 4]]);
        let b = Matrix::from_rows(f.clone(), &[vec![5, 1], vec![2, 6]]);
        assert_eq!(a.mul(&b).det(), f.mul(a.det(), b.det()));
    }
}
