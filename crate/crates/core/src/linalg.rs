//! Dense linear algebra over the rationals and over jets.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ratjet::{Jet, Rational};

/// Square or rectangular rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data = rows.into_iter().flatten().collect::<Vec<_>>();
        assert_eq!(data.len(), r * c, "ragged rows");
        RatMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == RatMatrix::identity(self.rows)
    }

    pub fn scaled_identity(n: usize, c: &Rational) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    /// Leading principal minors, computed by fraction-free elimination order.
    pub fn leading_minors(&self) -> Vec<Rational> {
        (1..=self.rows.min(self.cols))
            .map(|k| {
                let mut sub = RatMatrix::zeros(k, k);
                for i in 0..k {
                    for j in 0..k {
                        sub[(i, j)] = self[(i, j)].clone();
                    }
                }
                sub.determinant()
            })
            .collect()
    }

    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det *= &p;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &p;
                for c in col..n {
                    let v = &f * &a[(col, c)];
                    a[(r, c)] -= v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            let p = a[(col, col)].clone();
            for c in 0..n {
                a[(col, c)] /= &p;
                inv[(col, c)] /= &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..n {
                    let va = &f * &a[(col, c)];
                    a[(r, c)] -= va;
                    let vi = &f * &inv[(col, c)];
                    inv[(r, c)] -= vi;
                }
            }
        }
        Some(inv)
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Outcome of solving `A x = b` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Rational>),
    /// Consistent, with the listed unknowns left free.
    Underdetermined { particular: Vec<Rational>, free: Vec<usize> },
    Inconsistent,
}

/// Solves an overdetermined or square system by exact row reduction.
pub fn solve(rows: &[Vec<Rational>], rhs: &[Rational], unknowns: usize) -> Solution {
    let mut aug: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..unknowns {
        let Some(p) = (row..aug.len()).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, p);
        let lead = aug[row][col].clone();
        for v in aug[row].iter_mut() {
            *v /= &lead;
        }
        let pivot_row = aug[row].clone();
        for (r, target) in aug.iter_mut().enumerate() {
            if r == row || target[col].is_zero() {
                continue;
            }
            let f = target[col].clone();
            for (t, p) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                *t -= &f * p;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if aug[row..].iter().any(|r| !r[unknowns].is_zero()) {
        return Solution::Inconsistent;
    }
    let mut x = vec![Rational::zero(); unknowns];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][unknowns].clone();
    }
    let free: Vec<usize> = (0..unknowns).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        Solution::Unique(x)
    } else {
        Solution::Underdetermined { particular: x, free }
    }
}

/// Square matrix of jets sharing one jet space.
#[derive(Clone, Debug, PartialEq)]
pub struct JetMatrix {
    n: usize,
    entries: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn<F>(n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<Jet>,
    {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j)?);
            }
        }
        Ok(JetMatrix { n, entries })
    }

    pub fn from_constant(m: &RatMatrix, dim: usize, order: u32) -> Result<Self> {
        JetMatrix::from_fn(m.rows(), |i, j| Jet::constant(dim, order, m[(i, j)].clone()))
    }

    pub fn identity(n: usize, dim: usize, order: u32) -> Result<Self> {
        JetMatrix::from_constant(&RatMatrix::identity(n), dim, order)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.n + j]
    }

    pub fn valid_degree(&self) -> i32 {
        self.entries.iter().map(Jet::valid_degree).min().unwrap_or(i32::MAX)
    }

    /// Constant terms.
    pub fn at_origin(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.get(i, j).constant_term();
            }
        }
        m
    }

    pub fn map<F>(&self, f: F) -> Result<JetMatrix>
    where
        F: Fn(&Jet) -> Result<Jet>,
    {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(JetMatrix { n: self.n, entries })
    }

    pub fn transpose(&self) -> JetMatrix {
        let n = self.n;
        let entries = (0..n * n).map(|idx| self.get(idx % n, idx / n).clone()).collect();
        JetMatrix { n, entries }
    }

    pub fn add(&self, other: &JetMatrix) -> Result<JetMatrix> {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetMatrix { n: self.n, entries })
    }

    pub fn sub(&self, other: &JetMatrix) -> Result<JetMatrix> {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetMatrix { n: self.n, entries })
    }

    pub fn scale_by(&self, c: &Jet) -> Result<JetMatrix> {
        self.map(|e| c.mul(e))
    }

    pub fn mul(&self, other: &JetMatrix) -> Result<JetMatrix> {
        let n = self.n;
        JetMatrix::from_fn(n, |i, j| {
            let mut acc = self.get(i, 0).mul(other.get(0, j))?;
            for k in 1..n {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
            }
            Ok(acc)
        })
    }

    fn mul_raw(&self, other: &JetMatrix, limit: i32) -> Result<JetMatrix> {
        let n = self.n;
        JetMatrix::from_fn(n, |i, j| {
            let mut acc = self.get(i, 0).mul_raw(other.get(0, j), limit)?;
            for k in 1..n {
                acc = acc.add(&self.get(i, k).mul_raw(other.get(k, j), limit)?)?;
            }
            Ok(acc.with_valid(limit))
        })
    }

    /// Series inverse by the degree-doubling iteration `X <- X (2I - A X)`,
    /// started from the exact inverse of the constant-term matrix.
    pub fn inverse(&self) -> Result<JetMatrix> {
        let first = &self.entries[0];
        let (dim, order) = (first.dim(), first.order());
        let target = self.valid_degree();
        if target < 0 {
            return Err(Error::InsufficientOrder { needed: order + 1 });
        }
        let a0_inv = self.at_origin().inverse().ok_or(Error::DegenerateMetric)?;
        let two_i = JetMatrix::from_constant(&RatMatrix::scaled_identity(self.n, &Rational::from_integer(2.into())), dim, order)?;
        let mut x = JetMatrix::from_constant(&a0_inv, dim, order)?.map(|e| Ok(e.clone().with_valid(0)))?;
        let mut valid = 0i32;
        while valid < target {
            let next = (2 * valid + 1).min(target);
            let ax = self.mul_raw(&x, next)?;
            let correction = two_i.sub(&ax)?.map(|e| Ok(e.clone().with_valid(next)))?;
            x = x.mul_raw(&correction, next)?;
            valid = next;
        }
        Ok(x)
    }

    /// Determinant by fraction-free (Bareiss) elimination; exact divisions
    /// are carried out as multiplication by a series inverse.
    pub fn determinant(&self) -> Result<Jet> {
        let n = self.n;
        let mut a: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let first = &self.entries[0];
        let mut prev = Jet::one(first.dim(), first.order())?;
        let mut sign = Rational::one();
        for k in 0..n {
            if a[k][k].constant_term().is_zero() {
                let swap = (k + 1..n)
                    .find(|&r| !a[r][k].constant_term().is_zero())
                    .ok_or(Error::DegenerateMetric)?;
                a.swap(k, swap);
                sign = -sign;
            }
            if k + 1 == n {
                break;
            }
            let prev_inv = prev.inv1()?;
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[k][k].mul(&a[i][j])?.sub(&a[i][k].mul(&a[k][j])?)?;
                    a[i][j] = num.mul(&prev_inv)?;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(a[n - 1][n - 1].scale(&sign))
    }
}
