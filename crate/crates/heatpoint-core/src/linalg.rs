//! Dense multiprecision linear algebra: cyclic Jacobi for symmetric
//! eigenproblems, full-pivot LU, and the exact inverse of integer Cauchy
//! matrices used as a condition estimator.

use rug::ops::Pow;
use rug::{Float, Rational};
use std::ops::{Index, IndexMut};

use crate::mp;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    bits: u32,
    data: Vec<Float>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Self {
        Matrix { rows, cols, bits, data: vec![Float::new(bits); rows * cols] }
    }

    pub fn identity(n: usize, bits: u32) -> Self {
        let mut m = Self::zeros(n, n, bits);
        for i in 0..n {
            m[(i, i)] = Float::with_val(bits, 1);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, bits: u32, mut f: impl FnMut(usize, usize) -> Float) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(Float::with_val(bits, f(i, j)));
            }
        }
        Matrix { rows, cols, bits, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let bits = self.bits.max(other.bits);
        Matrix::from_fn(self.rows, other.cols, bits, |i, j| {
            let terms: Vec<Float> =
                (0..self.cols).map(|k| Float::with_val(bits, &self[(i, k)] * &other[(k, j)])).collect();
            mp::pairwise_sum(&terms, bits)
        })
    }

    pub fn mul_vec(&self, v: &[Float]) -> Vec<Float> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row: Vec<Float> = (0..self.cols).map(|k| self[(i, k)].clone()).collect();
                mp::dot(&row, v, self.bits)
            })
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, self.bits, |i, j| self[(j, i)].clone())
    }

    pub fn column(&self, j: usize) -> Vec<Float> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.bits);
        for x in &self.data {
            let a = Float::with_val(self.bits, x.abs_ref());
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Quadratic form vᵀ A v.
    pub fn quadratic_form(&self, v: &[Float]) -> Float {
        let av = self.mul_vec(v);
        mp::dot(v, &av, self.bits)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64()).collect()).collect()
    }

    pub fn with_precision(&self, bits: u32) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, bits, |i, j| self[(i, j)].clone())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Float;
    fn index(&self, (i, j): (usize, usize)) -> &Float {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Float {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<Float>,
    /// Unit eigenvectors stored as columns, in the order of `values`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiNoConvergence {
    pub sweeps: usize,
}

/// Cyclic Jacobi with the relative off-diagonal test
/// |a_pq| > tol·sqrt(|a_pp a_qq|), tol = 10^(-bits/4).
///
/// The relative test keeps small eigenvalues of strongly graded matrices
/// accurate, which an absolute threshold would not.
pub fn jacobi_eigen(a: &Matrix, max_sweeps: usize) -> Result<SymEigen, JacobiNoConvergence> {
    assert_eq!(a.rows, a.cols, "square matrix required");
    let n = a.rows;
    let bits = a.bits;
    let mut m = a.clone();
    let mut v = Matrix::identity(n, bits);
    let tol = Float::with_val(bits, 10).pow(-(bits as i32) / 4);

    let mut t = Float::new(bits);
    let mut c = Float::new(bits);
    let mut s = Float::new(bits);
    let mut theta = Float::new(bits);
    let mut x = Float::new(bits);
    let mut y = Float::new(bits);

    let mut sweeps = 0;
    loop {
        if sweeps == max_sweeps {
            return Err(JacobiNoConvergence { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].is_zero() {
                    continue;
                }
                x.assign_mul(&m[(p, p)], &m[(q, q)]);
                x.abs_mut();
                x.sqrt_mut();
                x *= &tol;
                y.assign_abs(&m[(p, q)]);
                if y <= x {
                    continue;
                }
                rotated = true;
                // theta = (a_qq - a_pp) / (2 a_pq)
                theta.assign_sub(&m[(q, q)], &m[(p, p)]);
                y.assign_mul2(&m[(p, q)]);
                theta /= &y;
                // t = sign(theta) / (|theta| + sqrt(theta² + 1))
                x.assign_square(&theta);
                x += 1u32;
                x.sqrt_mut();
                y.assign_abs(&theta);
                x += &y;
                t.assign_recip(&x);
                if theta.is_sign_negative() {
                    t = -t;
                }
                x.assign_square(&t);
                x += 1u32;
                x.sqrt_mut();
                c.assign_recip(&x);
                s.assign_mul(&t, &c);

                y.assign_mul(&t, &m[(p, q)]);
                m[(p, p)] -= &y;
                m[(q, q)] += &y;
                m[(p, q)] = Float::new(bits);
                m[(q, p)] = Float::new(bits);
                for r in 0..n {
                    if r != p && r != q {
                        rotate(&mut m, (r, p), (r, q), &c, &s, &mut x, &mut y);
                        let a_rp = m[(r, p)].clone();
                        let a_rq = m[(r, q)].clone();
                        m[(p, r)] = a_rp;
                        m[(q, r)] = a_rq;
                    }
                    rotate(&mut v, (r, p), (r, q), &c, &s, &mut x, &mut y);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| m[(i, i)].clone()).collect();
    let vectors = Matrix::from_fn(n, n, bits, |r, k| v[(r, order[k])].clone());
    Ok(SymEigen { values, vectors, sweeps })
}

// (a, b) <- (c a - s b, s a + c b)
fn rotate(m: &mut Matrix, i: (usize, usize), j: (usize, usize), c: &Float, s: &Float, x: &mut Float, y: &mut Float) {
    x.assign_mul(c, &m[i]);
    y.assign_mul(s, &m[j]);
    *x -= &*y;
    y.assign_mul(s, &m[i]);
    let mut z = Float::with_val(x.prec(), c * &m[j]);
    z += &*y;
    m[i].assign_ref(x);
    m[j] = z;
}

trait AssignOps {
    fn assign_mul(&mut self, a: &Float, b: &Float);
    fn assign_sub(&mut self, a: &Float, b: &Float);
    fn assign_mul2(&mut self, a: &Float);
    fn assign_abs(&mut self, a: &Float);
    fn assign_square(&mut self, a: &Float);
    fn assign_recip(&mut self, a: &Float);
    fn assign_ref(&mut self, a: &Float);
}

impl AssignOps for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        rug::Assign::assign(self, a * b);
    }
    fn assign_sub(&mut self, a: &Float, b: &Float) {
        rug::Assign::assign(self, a - b);
    }
    fn assign_mul2(&mut self, a: &Float) {
        rug::Assign::assign(self, a * 2u32);
    }
    fn assign_abs(&mut self, a: &Float) {
        rug::Assign::assign(self, a.abs_ref());
    }
    fn assign_square(&mut self, a: &Float) {
        rug::Assign::assign(self, a.square_ref());
    }
    fn assign_recip(&mut self, a: &Float) {
        rug::Assign::assign(self, a.recip_ref());
    }
    fn assign_ref(&mut self, a: &Float) {
        rug::Assign::assign(self, a);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Singular {
    /// Elimination step at which no acceptable pivot remained.
    pub step: usize,
}

/// LU factorization with complete pivoting: P A Q = L U.
#[derive(Clone, Debug)]
pub struct FullPivotLu {
    lu: Matrix,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    /// Smallest pivot magnitude relative to the largest entry of A.
    pub min_rel_pivot: Float,
}

impl FullPivotLu {
    /// Factor `a`. A pivot below `2^-(bits-16)` times max|a| counts as zero.
    pub fn factor(a: &Matrix) -> Result<Self, Singular> {
        assert_eq!(a.rows, a.cols, "square matrix required");
        let n = a.rows;
        let bits = a.bits;
        let mut lu = a.clone();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        if scale.is_zero() {
            return Err(Singular { step: 0 });
        }
        let floor = Float::with_val(bits, &scale * Float::with_val(bits, Float::i_exp(1, -(bits as i32 - 16))));
        let mut min_rel_pivot = Float::with_val(bits, f64::INFINITY);

        for k in 0..n {
            let (mut pi, mut pj) = (k, k);
            let mut best = Float::new(bits);
            for i in k..n {
                for j in k..n {
                    let a = Float::with_val(bits, lu[(i, j)].abs_ref());
                    if a > best {
                        best = a;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if best <= floor {
                return Err(Singular { step: k });
            }
            let rel = Float::with_val(bits, &best / &scale);
            if rel < min_rel_pivot {
                min_rel_pivot = rel;
            }
            if pi != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, pi * n + j);
                }
                row_perm.swap(k, pi);
            }
            if pj != k {
                for i in 0..n {
                    lu.data.swap(i * n + k, i * n + pj);
                }
                col_perm.swap(k, pj);
            }
            let pivot = lu[(k, k)].clone();
            for i in (k + 1)..n {
                let f = Float::with_val(bits, &lu[(i, k)] / &pivot);
                for j in (k + 1)..n {
                    let d = Float::with_val(bits, &f * &lu[(k, j)]);
                    lu[(i, j)] -= d;
                }
                lu[(i, k)] = f;
            }
        }
        Ok(FullPivotLu { lu, row_perm, col_perm, min_rel_pivot })
    }

    pub fn solve(&self, b: &[Float]) -> Vec<Float> {
        let n = self.lu.rows;
        let bits = self.lu.bits;
        assert_eq!(b.len(), n);
        let mut y: Vec<Float> = self.row_perm.iter().map(|&i| Float::with_val(bits, &b[i])).collect();
        for i in 0..n {
            for j in 0..i {
                let d = Float::with_val(bits, &self.lu[(i, j)] * &y[j]);
                y[i] -= d;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let d = Float::with_val(bits, &self.lu[(i, j)] * &y[j]);
                y[i] -= d;
            }
            y[i] /= &self.lu[(i, i)];
        }
        let mut x = vec![Float::new(bits); n];
        for (k, &j) in self.col_perm.iter().enumerate() {
            x[j] = y[k].clone();
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lu.rows;
        let bits = self.lu.bits;
        let mut inv = Matrix::zeros(n, n, bits);
        for j in 0..n {
            let mut e = vec![Float::new(bits); n];
            e[j] = Float::with_val(bits, 1);
            for (i, x) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = x;
            }
        }
        inv
    }
}

/// Exact inverse of the Cauchy matrix C_jk = 1/(x_j - y_k) with rational
/// nodes, from the classical product formula.
pub fn cauchy_inverse(x: &[Rational], y: &[Rational]) -> Vec<Vec<Rational>> {
    let n = x.len();
    assert_eq!(n, y.len());
    // A(t) = Π (t - x_k), B(t) = Π (t - y_k)
    let a_at = |t: &Rational| x.iter().fold(Rational::from(1), |acc, xk| acc * Rational::from(t - xk));
    let b_at = |t: &Rational| y.iter().fold(Rational::from(1), |acc, yk| acc * Rational::from(t - yk));
    let a_prime = |j: usize| {
        x.iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .fold(Rational::from(1), |acc, (_, xk)| acc * Rational::from(&x[j] - xk))
    };
    let b_prime = |i: usize| {
        y.iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .fold(Rational::from(1), |acc, (_, yk)| acc * Rational::from(&y[i] - yk))
    };
    let ay: Vec<Rational> = y.iter().map(a_at).collect();
    let bx: Vec<Rational> = x.iter().map(b_at).collect();
    let ap: Vec<Rational> = (0..n).map(a_prime).collect();
    let bp: Vec<Rational> = (0..n).map(b_prime).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let num = Rational::from(&ay[i] * &bx[j]);
                    let den = Rational::from(&x[j] - &y[i]) * &ap[j] * &bp[i];
                    -(num / den)
                })
                .collect()
        })
        .collect()
}

/// Infinity-norm condition number of C_jk = 1/(j² + k²), j,k = 1..n,
/// computed exactly. The exponential Gram matrix tends to C/π² as T grows.
pub fn cauchy_condition_estimate(n: usize) -> f64 {
    let x: Vec<Rational> = (1..=n as u64).map(|j| Rational::from(j * j)).collect();
    let y: Vec<Rational> = (1..=n as u64).map(|k| -Rational::from(k * k)).collect();
    let inv = cauchy_inverse(&x, &y);
    let row_sum = |row: &[Rational]| row.iter().fold(Rational::new(), |acc, r| acc + Rational::from(r.abs_ref()));
    let c_norm = (1..=n as u64)
        .map(|j| (1..=n as u64).fold(Rational::new(), |acc, k| acc + Rational::from((1, j * j + k * k))))
        .max()
        .unwrap_or_default();
    let inv_norm = inv.iter().map(|r| row_sum(r)).max().unwrap_or_default();
    (c_norm * inv_norm).to_f64()
}
