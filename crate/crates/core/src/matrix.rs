//! Dense matrices over a [`Field`], with the exact rank/kernel routines the
//! eigenspace and stable-rank computations are built on.

use crate::field::Field;

#[derive(Debug, PartialEq)]
pub struct Matrix<F: Field> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<F::El>,
}

impl<F: Field> Clone for Matrix<F> {
    fn clone(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.clone() }
    }
}

impl<F: Field> Matrix<F> {
    pub fn zero(f: &F, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![f.zero(); rows * cols] }
    }

    pub fn identity(f: &F, n: usize) -> Self {
        let mut m = Self::zero(f, n, n);
        for i in 0..n {
            m[(i, i)] = f.one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut g: impl FnMut(usize, usize) -> F::El) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(g(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn map(&self, g: impl Fn(&F::El) -> F::El) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(g).collect() }
    }

    pub fn mul(&self, f: &F, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Self::zero(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = f.mul(a, &rhs[(k, j)]);
                    out[(i, j)] = f.add(&out[(i, j)], &t);
                }
            }
        }
        out
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows);
        Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn rank(&self, f: &F) -> usize {
        let mut m = self.clone();
        m.row_echelon(f)
    }

    /// In-place row echelon; returns the rank.
    fn row_echelon(&mut self, f: &F) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(piv) = (rank..self.rows).find(|&r| !f.is_zero(&self[(r, col)])) else {
                continue;
            };
            self.swap_rows(rank, piv);
            let pinv = f.inv(&self[(rank, col)]).expect("pivot nonzero");
            for j in col..self.cols {
                self[(rank, j)] = f.mul(&self[(rank, j)], &pinv);
            }
            for r in 0..self.rows {
                if r != rank && !f.is_zero(&self[(r, col)]) {
                    let s = self[(r, col)].clone();
                    for j in col..self.cols {
                        let t = f.mul(&s, &self[(rank, j)]);
                        self[(r, j)] = f.sub(&self[(r, j)], &t);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of the right kernel, returned as the columns of a matrix.
    pub fn kernel_basis(&self, f: &F) -> Matrix<F> {
        let mut m = self.clone();
        let _ = m.row_echelon(f);
        // locate pivot columns
        let mut pivot_of_row = vec![None; m.rows];
        let mut is_pivot = vec![false; m.cols];
        let mut r = 0;
        for c in 0..m.cols {
            if r < m.rows && !f.is_zero(&m[(r, c)]) {
                pivot_of_row[r] = Some(c);
                is_pivot[c] = true;
                r += 1;
            }
        }
        let free: Vec<usize> = (0..m.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = Matrix::zero(f, m.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis[(fc, k)] = f.one();
            for row in 0..m.rows {
                if let Some(pc) = pivot_of_row[row] {
                    // x_pc = -m[row, fc]
                    basis[(pc, k)] = f.neg(&m[(row, fc)]);
                }
            }
        }
        basis
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<F: Field> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F::El;
    fn index(&self, (i, j): (usize, usize)) -> &F::El {
        &self.data[i * self.cols + j]
    }
}

impl<F: Field> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F::El {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    #[test]
    fn rank_and_kernel() {
        let f = PrimeField::new(5).unwrap();
        // rows are dependent: r2 = 2*r1
        let m = Matrix::from_fn(2, 3, |i, j| if i == 0 { (j + 1) as u64 } else { (2 * (j + 1) % 5) as u64 });
        assert_eq!(m.rank(&f), 1);
        let k = m.kernel_basis(&f);
        assert_eq!(k.cols, 2);
        // check m * k = 0
        let prod = m.mul(&f, &k);
        for i in 0..prod.rows {
            for j in 0..prod.cols {
                assert_eq!(prod[(i, j)], 0);
            }
        }
    }

    #[test]
    fn identity_rank() {
        let f = PrimeField::new(3).unwrap();
        let id = Matrix::identity(&f, 4);
        assert_eq!(id.rank(&f), 4);
        assert_eq!(id.kernel_basis(&f).cols, 0);
    }
}
