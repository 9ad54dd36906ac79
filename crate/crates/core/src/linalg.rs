//! Dense complex matrices and the handful of factorizations the rest of the
//! crate needs. Storage is row-major; heavy lifting (SVD, Hermitian eigen,
//! QR) is delegated to nalgebra.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Stream;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance used when certifying a result.
pub const CERT_TOL: f64 = 1e-10;
/// Tolerance used for checks made while constructing objects.
pub const BUILD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(alloc::format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, re: &[f64]) -> Result<Self> {
        Self::new(rows, cols, re.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m.data[i * d.len() + i] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [C64] {
        let c = self.cols;
        &mut self.data[r * c..(r + 1) * c]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let orow = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { rows: n, cols: p, data: out }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self[(r / r2, c / c2)] * other[(r % r2, c % c2)]
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `‖M M† − I‖_∞` taken entrywise.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let s: C64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b.conj()).sum();
                let t = if i == j { s - ONE } else { s };
                worst = worst.max(t.norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() < tol
    }

    /// Errors with [`Error::Unitarity`] unless unitary within `tol`.
    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual < tol {
            Ok(())
        } else {
            Err(Error::Unitarity { residual })
        }
    }

    /// Multiply row `r` by `phases[r]`.
    pub fn left_diag_mul(&self, phases: &[C64]) -> Self {
        assert_eq!(phases.len(), self.rows);
        Self::from_fn(self.rows, self.cols, |r, c| phases[r] * self[(r, c)])
    }

    /// Multiply column `c` by `phases[c]`.
    pub fn right_diag_mul(&self, phases: &[C64]) -> Self {
        assert_eq!(phases.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * phases[c])
    }

    /// True when every entry is exactly 0 or 1 and each row and column holds a single 1.
    pub fn is_permutation(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut col_hits = vec![0usize; n];
        for r in 0..n {
            let mut hits = 0;
            for c in 0..n {
                let z = self[(r, c)];
                if z == ONE {
                    hits += 1;
                    col_hits[c] += 1;
                } else if z != ZERO {
                    return false;
                }
            }
            if hits != 1 {
                return false;
            }
        }
        col_hits.iter().all(|&h| h == 1)
    }

    pub(crate) fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_na(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.to_na().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
        s
    }

    /// Eigenvalues of a Hermitian matrix in ascending order. Only the lower
    /// triangle is read.
    pub fn eigvalsh(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.to_na().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        e
    }

    /// Hermitian eigendecomposition: eigenvalues and the matrix whose columns
    /// are the matching eigenvectors.
    pub fn eigh(&self) -> (Vec<f64>, Self) {
        let e = self.to_na().symmetric_eigen();
        (e.eigenvalues.iter().copied().collect(), Self::from_na(&e.eigenvectors))
    }

    /// `exp(i t H)` for Hermitian `H`.
    pub fn expi_hermitian(&self, t: f64) -> Self {
        let (vals, vecs) = self.eigh();
        let phases: Vec<C64> = vals.iter().map(|&l| C64::from_polar(1.0, t * l)).collect();
        vecs.right_diag_mul(&phases).matmul(&vecs.adjoint())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Nearest unitary in Frobenius norm, `P Q†` for the SVD `M = P Σ Q†`.
pub fn polar_factor(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension(alloc::format!("polar factor of a {}x{} matrix", m.rows, m.cols)));
    }
    let svd = m.to_na().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = svd.singular_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(smin > 1e-14 * smax) {
        return Err(Error::Singular { sigma_min: smin });
    }
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    Ok(ComplexMatrix::from_na(&(u * vt)))
}

/// `(F_d)_{jk} = exp(2πi jk/d)/√d`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        let phase = 2.0 * core::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
        C64::from_polar(norm, phase)
    })
}

/// The swap `S = Σ |ij⟩⟨ji|` on `C^d ⊗ C^d`.
pub fn swap(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = ONE;
        }
    }
    s
}

/// `S^κ` through the spectral split `S = Π_sym − Π_anti`.
pub fn swap_power(d: usize, kappa: f64) -> ComplexMatrix {
    // S^κ = Π_sym + e^{iπκ} Π_anti, Π_sym = (I+S)/2, Π_anti = (I−S)/2
    let s = swap(d);
    let id = ComplexMatrix::identity(d * d);
    let sym = (&id + &s).scale(C64::new(0.5, 0.0));
    let anti = (&id - &s).scale(C64::new(0.5, 0.0));
    let phase = C64::from_polar(1.0, core::f64::consts::PI * kappa);
    &sym + &anti.scale(phase)
}

fn ginibre(d: usize, rng: &mut Stream) -> ComplexMatrix {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * h, im * h)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` pushed back into `Q`.
pub fn haar_unitary(d: usize, rng: &mut Stream) -> ComplexMatrix {
    let qr = ginibre(d, rng).to_na().qr();
    let (q, r) = (qr.q(), qr.r());
    let q = ComplexMatrix::from_na(&q);
    let phases: Vec<C64> = (0..d)
        .map(|i| {
            let x = r[(i, i)];
            if x.norm() > 0.0 { x / x.norm() } else { ONE }
        })
        .collect();
    q.right_diag_mul(&phases)
}

/// Uniformly random unit vector in `C^d`.
pub fn haar_state(d: usize, rng: &mut Stream) -> Vec<C64> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut v: Vec<C64> = (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * h, im * h)
        })
        .collect();
    normalize(&mut v);
    v
}

/// Random Hermitian matrix scaled to unit spectral norm.
pub fn random_hermitian_unit(d: usize, rng: &mut Stream) -> ComplexMatrix {
    let g = ginibre(d, rng);
    let h = (&g + &g.adjoint()).scale(C64::new(0.5, 0.0));
    let top = h.eigvalsh().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top > 0.0 { h.scale(C64::new(1.0 / top, 0.0)) } else { h }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [C64]) {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// `⟨a|b⟩`, antilinear in the first slot.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// `|v⟩⟨v|`.
pub fn outer(v: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
}
