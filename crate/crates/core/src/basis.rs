//! Orthonormal change-of-basis matrices in which deviations are sparse.
//!
//! A basis `B` is stored as an `n x n` matrix whose rows are the basis
//! functions, so `B v` gives the coefficients of `v` and `B^T c` synthesizes
//! a signal from coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, DenseMatrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Identity,
    Dct,
    Haar,
    Custom,
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "dct" => Ok(Self::Dct),
            "haar" => Ok(Self::Haar),
            other => Err(Error::InvalidArgument(format!(
                "unknown basis {other:?} (identity, dct, haar)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis<T> {
    matrix: DenseMatrix<T>,
    kind: BasisKind,
}

impl<T: Real> OrthonormalBasis<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DenseMatrix::identity(n),
            kind: BasisKind::Identity,
        }
    }

    /// Orthonormal DCT-II: row 0 is `1/sqrt(n)`, row `j` is `sqrt(2/n) cos(pi (2i+1) j / 2n)`.
    pub fn dct(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("DCT size must be positive".into()));
        }
        let nf = n as f64;
        let matrix = DenseMatrix::from_fn(n, n, |j, i| {
            let c = if j == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            T::of(c * (std::f64::consts::PI * (2 * i + 1) as f64 * j as f64 / (2.0 * nf)).cos())
        });
        Ok(Self {
            matrix,
            kind: BasisKind::Dct,
        })
    }

    /// Full-depth orthonormal Haar matrix, ordered coarse to fine.
    pub fn haar(n: usize) -> Result<Self> {
        Ok(Self {
            matrix: haar_matrix(n)?,
            kind: BasisKind::Haar,
        })
    }

    /// Separable 2-D DCT on row-major `side x side` images: `D ⊗ D`.
    pub fn dct_2d(side: usize) -> Result<Self> {
        let d = Self::dct(side)?;
        Ok(Self {
            matrix: d.matrix.kron(&d.matrix),
            kind: BasisKind::Dct,
        })
    }

    /// Separable 2-D Haar on row-major `side x side` images.
    ///
    /// Power-of-two sides use `H ⊗ H` directly. Other sides are zero-padded
    /// symmetrically to the next power of two, the padded 2-D Haar functions
    /// are restricted to the original pixels, and the restrictions are
    /// re-orthonormalized coarse-to-fine with Gram-Schmidt.
    pub fn haar_2d(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidArgument("Haar size must be positive".into()));
        }
        if side.is_power_of_two() {
            let h = haar_matrix::<T>(side)?;
            return Ok(Self {
                matrix: h.kron(&h),
                kind: BasisKind::Haar,
            });
        }
        let padded = side.next_power_of_two();
        let offset = (padded - side) / 2;
        let h = haar_matrix::<f64>(padded)?;
        let mut order: Vec<(usize, usize)> = (0..padded)
            .flat_map(|a| (0..padded).map(move |b| (a, b)))
            .collect();
        order.sort_by_key(|&(a, b)| {
            let (la, lb) = (haar_level(a), haar_level(b));
            (la.max(lb), la + lb, a, b)
        });
        let n = side * side;
        let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(n);
        for (a, b) in order {
            if accepted.len() == n {
                break;
            }
            let mut v: Vec<f64> = (0..n)
                .map(|p| h.get(a, p / side + offset) * h.get(b, p % side + offset))
                .collect();
            let original = dot(&v, &v).sqrt();
            if original == 0.0 {
                continue;
            }
            // Two passes of modified Gram-Schmidt keep orthogonality near machine precision.
            for _ in 0..2 {
                for q in &accepted {
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
                }
            }
            let r = dot(&v, &v).sqrt();
            if r > 1e-8 * original {
                v.iter_mut().for_each(|x| *x /= r);
                accepted.push(v);
            }
        }
        if accepted.len() != n {
            return Err(Error::RankDeficient);
        }
        let data = accepted.into_iter().flatten().map(T::of).collect();
        Ok(Self {
            matrix: DenseMatrix::from_vec(n, n, data)?,
            kind: BasisKind::Haar,
        })
    }

    /// Basis of the given kind for length-`n` signals; square `n` is treated as a
    /// row-major image and gets the separable 2-D transform.
    pub fn for_signal(kind: BasisKind, n: usize) -> Result<Self> {
        let side = (n as f64).sqrt().round() as usize;
        let square = side * side == n && side > 1;
        match (kind, square) {
            (BasisKind::Identity, _) => Ok(Self::identity(n)),
            (BasisKind::Dct, true) => Self::dct_2d(side),
            (BasisKind::Dct, false) => Self::dct(n),
            (BasisKind::Haar, true) => Self::haar_2d(side),
            (BasisKind::Haar, false) => Self::haar(n),
            (BasisKind::Custom, _) => Err(Error::InvalidArgument(
                "custom bases are built with from_matrix".into(),
            )),
        }
    }

    /// Wraps an arbitrary square matrix, verifying `B^T B = I` to 1e-10.
    pub fn from_matrix(matrix: DenseMatrix<T>) -> Result<Self> {
        check_dim(matrix.rows(), matrix.cols(), "basis must be square")?;
        let dev = matrix.gram().max_abs_diff(&DenseMatrix::identity(matrix.rows()));
        if dev > T::of(1e-10) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthonormal (max |B^T B - I| = {dev})"
            )));
        }
        Ok(Self {
            matrix,
            kind: BasisKind::Custom,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    /// `B v`
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), v.len(), "basis application")?;
        if self.kind == BasisKind::Identity {
            return Ok(v.to_vec());
        }
        self.matrix.matvec(v)
    }

    /// `B^T v`
    pub fn apply_inverse(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), v.len(), "inverse basis application")?;
        if self.kind == BasisKind::Identity {
            return Ok(v.to_vec());
        }
        self.matrix.tr_matvec(v)
    }

    /// Largest entry of `|B^T B - I|`.
    pub fn orthonormality_error(&self) -> T {
        self.matrix
            .gram()
            .max_abs_diff(&DenseMatrix::identity(self.dim()))
    }

    pub(crate) fn is_identity(&self) -> bool {
        self.kind == BasisKind::Identity
    }
}

fn haar_level(row: usize) -> u32 {
    if row == 0 {
        0
    } else {
        usize::BITS - row.leading_zeros()
    }
}

fn haar_matrix<T: Real>(n: usize) -> Result<DenseMatrix<T>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "Haar basis needs a power-of-two size, got {n}"
        )));
    }
    let mut m = DenseMatrix::zeros(n, n);
    let scale = T::of(1.0 / (n as f64).sqrt());
    m.row_mut(0).iter_mut().for_each(|x| *x = scale);
    // Row 2^j + k is the level-j wavelet at position k, support n / 2^j.
    let mut row = 1;
    let mut blocks = 1;
    while blocks < n {
        let support = n / blocks;
        let amp = T::of(1.0 / (support as f64).sqrt());
        for k in 0..blocks {
            let r = m.row_mut(row);
            let start = k * support;
            for x in &mut r[start..start + support / 2] {
                *x = amp;
            }
            for x in &mut r[start + support / 2..start + support] {
                *x = -amp;
            }
            row += 1;
        }
        blocks *= 2;
    }
    Ok(m)
}
