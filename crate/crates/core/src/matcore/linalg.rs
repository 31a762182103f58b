//! Dense complex matrices of dimension 2 or 4 and a cyclic Jacobi
//! eigensolver for the Hermitian case.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Maximum |M - M^H| entry accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as rounding noise.
pub const PSD_CLAMP: f64 = 1e-10;
/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Builds a complex scalar, rejecting NaN and infinities.
pub fn complex(re: f64, im: f64) -> Result<ComplexScalar> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(Error::NonFinite("complex scalar"))
    }
}

/// Row-major square complex matrix, `dim` is 2 or 4.
#[derive(Clone, Copy, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: [Complex64; 16],
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::BadDimension(dim));
        }
        Ok(Self {
            dim,
            data: [Complex64::new(0.0, 0.0); 16],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries; the length fixes the dimension.
    pub fn from_entries(entries: &[Complex64]) -> Result<Self> {
        let dim = match entries.len() {
            4 => 2,
            16 => 4,
            n => return Err(Error::BadDimension(n)),
        };
        let mut m = Self::zeros(dim)?;
        for (slot, z) in m.data.iter_mut().zip(entries) {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite("matrix entry"));
            }
            *slot = *z;
        }
        Ok(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite("diagonal entry"));
            }
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = *self;
        for z in out.data.iter_mut() {
            *z = z.conj();
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for z in out.data.iter_mut() {
            *z *= k;
        }
        out
    }

    /// Largest |M_ij - conj(M_ji)|.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Kronecker product of two 2x2 matrices.
    pub fn kron(a: &Self, b: &Self) -> Result<Self> {
        if a.dim != 2 || b.dim != 2 {
            return Err(Error::BadDimension(a.dim.max(b.dim)));
        }
        let mut out = Self::zeros(4)?;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = *self;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        out
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        out
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, " ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// V diag(f(lambda)) V^H.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let n = v.dim();
        let mut out = *v;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &lam) in self.eigenvalues.iter().enumerate() {
                    acc += v[(i, k)] * f(lam) * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// `tol` bounds the off-diagonal Frobenius norm, relative to the matrix norm
/// when that exceeds one.
pub fn hermitian_eigen(m: &CMatrix, tol: f64) -> Result<EigenDecomposition> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.dim();
    let mut a = m.data;
    let mut v = CMatrix::identity(n)?.data;
    jacobi_in_place(n, &mut a[..n * n], Some(&mut v[..n * n]), tol)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));

    let mut vectors = CMatrix::zeros(n)?;
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        eigenvalues.push(a[k * n + k].re);
        for row in 0..n {
            vectors[(row, col)] = v[row * n + k];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Eigenvalues only, descending. Accepts any square size; used internally for
/// the 8x8 real embedding in the concurrence routine.
pub(crate) fn hermitian_eigenvalues_n(
    n: usize,
    entries: &[Complex64],
    tol: f64,
) -> Result<Vec<f64>> {
    debug_assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    jacobi_in_place(n, &mut a, None, tol)?;
    let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    Ok(vals)
}

fn off_diagonal_norm(n: usize, a: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn jacobi_in_place(
    n: usize,
    a: &mut [Complex64],
    mut v: Option<&mut [Complex64]>,
    tol: f64,
) -> Result<()> {
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = tol * frob.max(1.0);
    for i in 0..n {
        a[i * n + i].im = 0.0;
    }

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(n, a) < threshold {
            return Ok(());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[p * n + q];
                let mag = g.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = g / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on the (p, q) plane.
                let pc = phase.conj();

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * pc * s;
                    a[k * n + q] = akp * s + akq * pc * c;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * phase * s;
                    a[q * n + k] = apk * s + aqk * phase * c;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * c - vkq * pc * s;
                        v[k * n + q] = vkp * s + vkq * pc * c;
                    }
                }
            }
        }
    }

    let off = off_diagonal_norm(n, a);
    if off < threshold {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            off_norm: off,
            sweeps: MAX_SWEEPS,
        })
    }
}

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn matrix_sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eigen(m, JACOBI_TOL)?;
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -PSD_CLAMP {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let root = eig.reconstruct_with(|x| x.max(0.0).sqrt());
    // Symmetrize away rounding so the result is exactly Hermitian.
    let mut out = root;
    for i in 0..root.dim() {
        out[(i, i)] = Complex64::new(root[(i, i)].re, 0.0);
        for j in (i + 1)..root.dim() {
            let z = (root[(i, j)] + root[(j, i)].conj()) * 0.5;
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    Ok(out)
}
