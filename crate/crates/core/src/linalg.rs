//! Dense vectors and matrices, norms, and the proximal helpers the solvers share.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Vector norm selector for error metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Inf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Inf];
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "l1" => Ok(Norm::L1),
            "2" | "l2" => Ok(Norm::L2),
            "inf" | "linf" => Ok(Norm::Inf),
            other => Err(Error::InvalidArgument(format!("unknown norm {other:?}"))),
        }
    }
}

pub fn norm<T: Real>(v: &[T], p: Norm) -> T {
    match p {
        Norm::L1 => v.iter().map(|x| x.abs()).sum(),
        Norm::L2 => dot(v, v).sqrt(),
        Norm::Inf => v.iter().fold(T::zero(), |m, x| m.max(x.abs())),
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail += *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y += alpha * x`
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub fn all_finite<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Proximal operator of `t * ||.||_1`: `sign(v) * max(|v| - t, 0)` elementwise.
pub fn soft_threshold<T: Real>(v: &[T], t: T) -> Result<Vec<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "soft threshold level must be nonnegative, got {t}"
        )));
    }
    let mut out = v.to_vec();
    soft_threshold_in_place(&mut out, t);
    Ok(out)
}

pub(crate) fn soft_threshold_in_place<T: Real>(v: &mut [T], t: T) {
    for x in v.iter_mut() {
        let mag = x.abs() - t;
        *x = if mag > T::zero() { x.signum() * mag } else { T::zero() };
    }
}

pub fn clip_to_box<T: Real>(v: &[T], lo: T, hi: T) -> Result<Vec<T>> {
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "clip bounds out of order: lo={lo} > hi={hi}"
        )));
    }
    Ok(v.iter().map(|x| x.max(lo).min(hi)).collect())
}

/// Sign with `sign(0) = 0`; the subgradient of |x| the solvers use.
pub(crate) fn sign0<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad lengths and non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim(rows * cols, data.len(), "matrix entries")?;
        if !all_finite(&data) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len(), "ragged rows")?;
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&mut self, s: T) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// Submatrix made of the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// `A x`
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.cols, x.len(), "matrix-vector product")?;
        let mut y = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn matvec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// `A^T x`
    pub fn tr_matvec(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.rows, x.len(), "transposed matrix-vector product")?;
        let mut y = vec![T::zero(); self.cols];
        self.tr_matvec_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn tr_matvec_into(&self, x: &[T], y: &mut [T]) {
        y.iter_mut().for_each(|v| *v = T::zero());
        for (i, xi) in x.iter().enumerate() {
            if *xi != T::zero() {
                axpy(*xi, self.row(i), y);
            }
        }
    }

    /// `A B`
    pub fn matmul(&self, b: &Self) -> Result<Self> {
        check_dim(self.cols, b.rows, "matrix product")?;
        let mut c = Self::zeros(self.rows, b.cols);
        gemm(T::one(), self, false, b, false, T::zero(), &mut c);
        Ok(c)
    }

    /// `A^T A`
    pub fn gram(&self) -> Self {
        let mut c = Self::zeros(self.cols, self.cols);
        gemm(T::one(), self, true, self, false, T::zero(), &mut c);
        c
    }

    /// Kronecker product `A ⊗ B`.
    pub fn kron(&self, b: &Self) -> Self {
        Self::from_fn(self.rows * b.rows, self.cols * b.cols, |i, j| {
            self.get(i / b.rows, j / b.cols) * b.get(i % b.rows, j % b.cols)
        })
    }
}

/// `c <- alpha * op(a) * op(b) + beta * c` where `op` optionally transposes.
pub fn gemm<T: Real>(
    alpha: T,
    a: &DenseMatrix<T>,
    trans_a: bool,
    b: &DenseMatrix<T>,
    trans_b: bool,
    beta: T,
    c: &mut DenseMatrix<T>,
) {
    let (m, k, rsa, csa) = if trans_a {
        (a.cols, a.rows, 1, a.cols as isize)
    } else {
        (a.rows, a.cols, a.cols as isize, 1)
    };
    let (kb, n, rsb, csb) = if trans_b {
        (b.cols, b.rows, 1, b.cols as isize)
    } else {
        (b.rows, b.cols, b.cols as isize, 1)
    };
    assert_eq!(k, kb, "gemm inner dimensions");
    assert_eq!((c.rows, c.cols), (m, n), "gemm output shape");
    if m == 0 || n == 0 {
        return;
    }
    let ccols = c.cols as isize;
    T::gemm(
        m,
        k,
        n,
        alpha,
        &a.data,
        rsa,
        csa,
        &b.data,
        rsb,
        csb,
        beta,
        &mut c.data,
        ccols,
        1,
    );
}

/// Largest singular value of `a` by power iteration on `A^T A`.
///
/// Starts from a seeded random vector and stops after `iterations` or once the
/// relative change of the estimate falls below `tol`.
pub fn top_singular_value<T: Real>(a: &DenseMatrix<T>, iterations: usize, tol: T) -> T {
    if a.rows == 0 || a.cols == 0 {
        return T::zero();
    }
    let mut rng = SeededRng::with_stream(0x5e_ed0f_9017, 0);
    let mut v: Vec<T> = (0..a.cols).map(|_| T::of(rng.normal())).collect();
    let nv = norm(&v, Norm::L2);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![T::zero(); a.rows];
    let mut w = vec![T::zero(); a.cols];
    let mut sigma = T::zero();
    for _ in 0..iterations.max(1) {
        a.matvec_into(&v, &mut av);
        a.tr_matvec_into(&av, &mut w);
        let nw = norm(&w, Norm::L2);
        if nw == T::zero() {
            return T::zero();
        }
        let next = nw.sqrt();
        w.iter().zip(v.iter_mut()).for_each(|(wi, vi)| *vi = *wi / nw);
        let done = (next - sigma).abs() <= tol * next;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// the columns of the second matrix.
pub fn symmetric_eigen<T: Real>(s: &DenseMatrix<T>) -> Result<(Vec<T>, DenseMatrix<T>)> {
    check_dim(s.rows, s.cols, "symmetric eigenproblem needs a square matrix")?;
    let n = s.rows;
    let mut a = s.clone();
    let mut v = DenseMatrix::identity(n);
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let x = a.get(i, j) * a.get(i, j);
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let two = T::of(2.0);
                let theta = (a.get(q, q) - a.get(p, p)) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((values, vectors))
}

/// Extreme singular values `(min, max)` of a tall or square matrix.
pub fn singular_value_range<T: Real>(a: &DenseMatrix<T>) -> Result<(T, T)> {
    let (vals, _) = symmetric_eigen(&a.gram())?;
    let lo = vals.first().copied().unwrap_or(T::zero()).max(T::zero()).sqrt();
    let hi = vals.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt();
    Ok((lo, hi))
}

/// Least-squares solution of `a x ≈ b` by Householder QR. Requires full column rank.
pub fn least_squares<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    check_dim(a.rows, b.len(), "least squares right-hand side")?;
    let (m, n) = a.shape();
    if n > m {
        return Err(Error::RankDeficient);
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let scale = a.as_slice().iter().fold(T::zero(), |s, x| s.max(x.abs()));
    for k in 0..n {
        let col_norm = (k..m).map(|i| r.get(i, k) * r.get(i, k)).sum::<T>().sqrt();
        if col_norm <= T::of(1e-12) * scale.max(T::min_positive_value()) {
            return Err(Error::RankDeficient);
        }
        let alpha = if r.get(k, k) > T::zero() { -col_norm } else { col_norm };
        let mut u: Vec<T> = (k..m).map(|i| r.get(i, k)).collect();
        u[0] -= alpha;
        let un = dot(&u, &u);
        if un == T::zero() {
            continue;
        }
        let two = T::of(2.0);
        for j in k..n {
            let s = (k..m).map(|i| u[i - k] * r.get(i, j)).sum::<T>() * two / un;
            for i in k..m {
                let v = r.get(i, j) - s * u[i - k];
                r.set(i, j, v);
            }
        }
        let s = (k..m).map(|i| u[i - k] * rhs[i]).sum::<T>() * two / un;
        for i in k..m {
            rhs[i] -= s * u[i - k];
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let s: T = ((k + 1)..n).map(|j| r.get(k, j) * x[j]).sum();
        x[k] = (rhs[k] - s) / r.get(k, k);
    }
    Ok(x)
}
