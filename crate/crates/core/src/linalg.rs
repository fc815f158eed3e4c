//! Dense exact linear algebra over the rationals: reduced row echelon form,
//! rank, kernels, solving, and column-span utilities. Sizes in this engine
//! stay small (hundreds), so dense fraction-free-ish elimination with big
//! rationals is the right tool.

use crate::scalar::Q;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> QMat {
        QMat {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> QMat {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> QMat {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        QMat { rows: r, cols: c, data }
    }

    pub fn from_cols(cols: Vec<Vec<Q>>) -> QMat {
        let c = cols.len();
        let r = cols.first().map(|x| x.len()).unwrap_or(0);
        let mut m = QMat::zero(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> QMat {
        let mut m = QMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows);
        let mut m = QMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = m.get(i, j).clone();
                    m.set(i, j, cur + a.clone() * b.clone());
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        s += a.clone() * v[j].clone();
                    }
                }
                s
            })
            .collect()
    }

    pub fn hstack(&self, other: &QMat) -> QMat {
        assert_eq!(self.rows, other.rows);
        let mut m = QMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    /// In-place Gauss-Jordan elimination. Returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            // find pivot
            let mut piv = None;
            for r in row..self.rows {
                if !self.get(r, col).is_zero() {
                    piv = Some(r);
                    break;
                }
            }
            let piv = match piv {
                None => continue,
                Some(p) => p,
            };
            // swap
            if piv != row {
                for j in 0..self.cols {
                    let a = self.get(row, j).clone();
                    let b = self.get(piv, j).clone();
                    self.set(row, j, b);
                    self.set(piv, j, a);
                }
            }
            // normalize
            let inv = Q::one() / self.get(row, col).clone();
            for j in col..self.cols {
                let v = self.get(row, j).clone() * inv.clone();
                self.set(row, j, v);
            }
            // eliminate
            for r in 0..self.rows {
                if r == row || self.get(r, col).is_zero() {
                    continue;
                }
                let f = self.get(r, col).clone();
                for j in col..self.cols {
                    let v = self.get(r, j).clone() - f.clone() * self.get(row, j).clone();
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the null space (as column vectors).
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m.get(r, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of `self * x = b`, if any.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = self.hstack(&QMat::from_cols(vec![b.to_vec()]));
        let pivots = aug.rref();
        // inconsistent iff a pivot lands in the last column
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    /// Indices of a maximal independent subset of the columns.
    pub fn independent_cols(&self) -> Vec<usize> {
        let mut m = self.clone();
        m.rref()
    }
}

/// Span of a list of vectors: returns a matrix whose columns are a basis.
pub fn col_basis(vectors: &[Vec<Q>], dim: usize) -> QMat {
    if vectors.is_empty() {
        return QMat::zero(dim, 0);
    }
    let m = QMat::from_cols(vectors.to_vec());
    let keep = m.independent_cols();
    if keep.is_empty() {
        return QMat::zero(dim, 0);
    }
    QMat::from_cols(keep.iter().map(|&j| m.col(j)).collect())
}

/// Dimension of the sum of two column-spans.
pub fn span_sum_dim(a: &QMat, b: &QMat) -> usize {
    if a.cols == 0 {
        return b.rank();
    }
    if b.cols == 0 {
        return a.rank();
    }
    a.hstack(b).rank()
}

/// Do the columns of `sub` span a subspace of the column span of `ambient`?
pub fn span_contains(ambient: &QMat, sub: &QMat) -> bool {
    span_sum_dim(ambient, sub) == ambient.rank()
}

/// Coordinates of `v` in the column span of `basis`, if representable.
pub fn in_span(basis: &QMat, v: &[Q]) -> Option<Vec<Q>> {
    basis.solve(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn rref_rank_kernel() {
        let m = QMat::from_rows(vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(1), q(0), q(1)],
        ]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        // check Ax = 0
        for v in &k {
            assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solving() {
        let m = QMat::from_rows(vec![vec![q(1), q(1)], vec![q(1), q(-1)]]);
        let x = m.solve(&[q(3), q(1)]).unwrap();
        assert_eq!(x, vec![q(2), q(1)]);
        let singular = QMat::from_rows(vec![vec![q(1), q(1)], vec![q(2), q(2)]]);
        assert!(singular.solve(&[q(1), q(3)]).is_none());
        assert!(singular.solve(&[q(1), q(2)]).is_some());
    }

    #[test]
    fn spans() {
        let a = QMat::from_cols(vec![vec![q(1), q(0)], vec![q(0), q(1)]]);
        let b = QMat::from_cols(vec![vec![q(1), q(1)]]);
        assert!(span_contains(&a, &b));
        assert!(!span_contains(&b, &a));
        assert_eq!(span_sum_dim(&a, &b), 2);
    }
}
