//! Index gymnastics on `C^d ⊗ C^d` operators and multipartite pure states.
//!
//! Flattening is row-major throughout: the pair `(k, i)` maps to `k·d + i`.
//! A bipartite matrix entry `U[(k,i),(l,j)]` therefore sits at
//! `U[k·d+i, l·d+j]`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// `d` with `d·d = n`, if any.
pub fn local_dim(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n).then_some(d)
}

fn bipartite_dim(u: &ComplexMatrix) -> Result<usize> {
    if !u.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", u.rows(), u.cols())));
    }
    local_dim(u.rows()).ok_or_else(|| Error::Dimension(format!("{} is not a perfect square", u.rows())))
}

/// Flat-index permutation for `(U^R)_{ki,lj} = U_{kl,ij}`: returns the flat
/// position in `U` feeding position `(k·d+i, l·d+j)` of the result.
pub fn reshuffle_source(d: usize, k: usize, i: usize, l: usize, j: usize) -> (usize, usize) {
    (k * d + l, i * d + j)
}

/// Flat-index permutation for `(U^Γ)_{ki,lj} = U_{li,kj}`.
pub fn partial_transpose_source(d: usize, k: usize, i: usize, l: usize, j: usize) -> (usize, usize) {
    (l * d + i, k * d + j)
}

fn remap(u: &ComplexMatrix, src: fn(usize, usize, usize, usize, usize) -> (usize, usize)) -> Result<ComplexMatrix> {
    let d = bipartite_dim(u)?;
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for i in 0..d {
            for l in 0..d {
                for j in 0..d {
                    out[(k * d + i, l * d + j)] = u[src(d, k, i, l, j)];
                }
            }
        }
    }
    Ok(out)
}

/// Reshuffle (realignment) `(U^R)_{ki,lj} = U_{kl,ij}`.
pub fn reshuffle(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    remap(u, reshuffle_source)
}

/// Partial transpose on the first factor, `(U^Γ)_{ki,lj} = U_{li,kj}`.
pub fn partial_transpose(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    remap(u, partial_transpose_source)
}

/// Mixed-radix digits of `x`, most significant first.
pub fn digits(mut x: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &dim) in out.iter_mut().zip(dims).rev() {
        *slot = x % dim;
        x /= dim;
    }
    out
}

pub fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (&x, &dim)| acc * dim + x)
}

fn check_subset(keep: &[usize], parties: usize) -> Result<()> {
    for (n, &p) in keep.iter().enumerate() {
        if p >= parties {
            return Err(Error::Label(format!("party {p} of {parties}")));
        }
        if keep[..n].contains(&p) {
            return Err(Error::Label(format!("party {p} listed twice")));
        }
    }
    Ok(())
}

/// Trace out every party not in `keep`. Kept parties retain their original
/// relative order.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows() != total {
        return Err(Error::Dimension(format!("{}x{} state for dims {:?}", rho.rows(), rho.cols(), dims)));
    }
    check_subset(keep, dims.len())?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !kept.contains(p)).collect();
    let kd: Vec<usize> = kept.iter().map(|&p| dims[p]).collect();
    let td: Vec<usize> = traced.iter().map(|&p| dims[p]).collect();
    let (nk, nt): (usize, usize) = (kd.iter().product(), td.iter().product());

    let flat = |a: &[usize], b: &[usize]| {
        let mut full = vec![0; dims.len()];
        for (&p, &x) in kept.iter().zip(a) {
            full[p] = x;
        }
        for (&p, &x) in traced.iter().zip(b) {
            full[p] = x;
        }
        undigits(&full, dims)
    };
    let mut out = ComplexMatrix::zeros(nk, nk);
    for r in 0..nk {
        let rd = digits(r, &kd);
        for c in 0..nk {
            let cd = digits(c, &kd);
            let mut s = ZERO;
            for t in 0..nt {
                let tdg = digits(t, &td);
                s += rho[(flat(&rd, &tdg), flat(&cd, &tdg))];
            }
            out[(r, c)] = s;
        }
    }
    Ok(out)
}

/// Arrange the amplitudes of a pure state as a matrix whose rows run over
/// the parties in `subset` and columns over the rest.
pub fn split_amplitudes(amps: &[C64], dims: &[usize], subset: &[usize]) -> Result<ComplexMatrix> {
    check_subset(subset, dims.len())?;
    let mut a: Vec<usize> = subset.to_vec();
    a.sort_unstable();
    let b: Vec<usize> = (0..dims.len()).filter(|p| !a.contains(p)).collect();
    let ad: Vec<usize> = a.iter().map(|&p| dims[p]).collect();
    let bd: Vec<usize> = b.iter().map(|&p| dims[p]).collect();
    let (na, nb): (usize, usize) = (ad.iter().product(), bd.iter().product());
    let mut m = ComplexMatrix::zeros(na, nb);
    for (x, &amp) in amps.iter().enumerate() {
        let ds = digits(x, dims);
        let r = a.iter().fold(0, |acc, &p| acc * dims[p] + ds[p]);
        let c = b.iter().fold(0, |acc, &p| acc * dims[p] + ds[p]);
        m[(r, c)] = amp;
    }
    Ok(m)
}

/// `Tr ρ_S²` of the reduced state on `subset` for a pure state.
pub fn subsystem_purity(amps: &[C64], dims: &[usize], subset: &[usize]) -> Result<f64> {
    let m = split_amplitudes(amps, dims, subset)?;
    let g = if m.rows() <= m.cols() { m.matmul(&m.adjoint()) } else { m.adjoint().matmul(&m) };
    Ok(g.data().iter().map(|z| z.norm_sqr()).sum())
}

/// Choi state `|U⟩ = (U ⊗ I)|Ψ₊⟩` of an operator on `n` qudits. Parties are
/// the `n` outputs followed by the `n` inputs; for `n = 2` they carry the
/// labels `A, B, A', B'`, otherwise `1..n, 1'..n'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    d: usize,
    labels: Vec<String>,
    amplitudes: Vec<C64>,
}

impl ChoiState {
    pub fn from_unitary(u: &ComplexMatrix, d: usize) -> Result<Self> {
        if !u.is_square() || d < 2 {
            return Err(Error::Dimension(format!("{}x{} operator with d = {d}", u.rows(), u.cols())));
        }
        let mut n = 0;
        let mut size = 1;
        while size < u.rows() {
            size *= d;
            n += 1;
        }
        if size != u.rows() {
            return Err(Error::Dimension(format!("{} is not a power of {d}", u.rows())));
        }
        let labels: Vec<String> = if n == 2 {
            ["A", "B", "A'", "B'"].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|p| format!("{p}")).chain((1..=n).map(|p| format!("{p}'"))).collect()
        };
        let norm = 1.0 / (size as f64).sqrt();
        let amplitudes = u.data().iter().map(|z| z * norm).collect();
        Ok(Self { d, labels, amplitudes })
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.d; self.labels.len()]
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.labels.iter().position(|x| x == l).ok_or_else(|| Error::Label((*l).to_string()))
            })
            .collect()
    }

    pub fn reduced_state(&self, labels: &[&str]) -> Result<ComplexMatrix> {
        let pos = self.positions(labels)?;
        let m = split_amplitudes(&self.amplitudes, &self.dims(), &pos)?;
        Ok(m.matmul(&m.adjoint()))
    }

    pub fn purity(&self, labels: &[&str]) -> Result<f64> {
        let pos = self.positions(labels)?;
        subsystem_purity(&self.amplitudes, &self.dims(), &pos)
    }

    pub fn purity_of_positions(&self, positions: &[usize]) -> Result<f64> {
        subsystem_purity(&self.amplitudes, &self.dims(), positions)
    }
}
