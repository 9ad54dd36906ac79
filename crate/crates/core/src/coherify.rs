//! Coherifications of permutation tensors.
//!
//! A basis family `{a_{k,l}}` turns an arity-3 permutation tensor `A` into
//! the bipartite unitary `U_{ki,lj} = A_{klj} (a_{k,l})_i`; the channel
//! `ρ₁ ⊗ ρ₂ ↦ Tr₂[U(ρ₁⊗ρ₂)U†]` has a dynamical matrix whose diagonal is `A`.
//! The arity-`m` generalisation uses `d^{m−2}`-dimensional vectors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bipartite::partial_trace;
use crate::error::{Error, Result};
use crate::latin::{LatinHypercube, LatinSquare, PermutationTensor};
use crate::linalg::{haar_state, haar_unitary, inner, outer, ComplexMatrix, BUILD_TOL, C64, ZERO};
use crate::rng::{self, Stream};

/// Density-matrix validation tolerance for channel inputs.
pub const INPUT_TOL: f64 = 1e-8;

/// `d` orthonormal bases stored as matrices `V_k` whose rows are `a_{k,l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamily {
    d: usize,
    v: Vec<ComplexMatrix>,
}

impl BasisFamily {
    pub fn new(v: Vec<ComplexMatrix>) -> Result<Self> {
        let d = v.len();
        if d == 0 {
            return Err(Error::Basis("empty family".into()));
        }
        for (k, m) in v.iter().enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(Error::Basis(format!("V_{k} is {}x{}, expected {d}x{d}", m.rows(), m.cols())));
            }
            let r = m.unitarity_residual();
            if r >= BUILD_TOL {
                return Err(Error::Basis(format!("rows of V_{k} are not orthonormal (residual {r:e})")));
            }
        }
        Ok(Self { d, v })
    }

    /// No orthonormality check; for intermediate search states.
    pub(crate) fn from_raw(v: Vec<ComplexMatrix>) -> Self {
        Self { d: v.len(), v }
    }

    /// `a_{k,l} = |l⟩` for every `k`.
    pub fn computational(d: usize) -> Self {
        Self { d, v: vec![ComplexMatrix::identity(d); d] }
    }

    /// Independent Haar-random bases.
    pub fn random(d: usize, rng: &mut Stream) -> Self {
        Self { d, v: (0..d).map(|_| haar_unitary(d, rng)).collect() }
    }

    /// `a_{k,l} = |M_{l,j} − 1⟩` where `j` solves `L_{l,j} = k`. Together with
    /// `tensor_from_square(L)` this reproduces `perm_2unitary_from_mols(L, M)`.
    pub fn from_mols(l: &LatinSquare, m: &LatinSquare) -> Result<Self> {
        if l.order() != m.order() {
            return Err(Error::Dimension(format!("orders {} and {}", l.order(), m.order())));
        }
        let d = l.order();
        let mut v = vec![ComplexMatrix::zeros(d, d); d];
        for row in 0..d {
            for j in 0..d {
                let k = l.get(row, j) - 1;
                v[k][(row, m.get(row, j) - 1)] = C64::new(1.0, 0.0);
            }
        }
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.v
    }

    pub fn into_matrices(self) -> Vec<ComplexMatrix> {
        self.v
    }

    pub fn matrix(&self, k: usize) -> &ComplexMatrix {
        &self.v[k]
    }

    /// The vector `a_{k,l}`.
    pub fn vector(&self, k: usize, l: usize) -> &[C64] {
        self.v[k].row(l)
    }
}

/// For each `i₁`, a `d^{m−2} × d^{m−2}` matrix whose rows are
/// `a_{(i₁; i₂…i_{m−1})}`, rows indexed by `(i₂,…,i_{m−1})` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiBasisFamily {
    d: usize,
    arity: usize,
    v: Vec<ComplexMatrix>,
}

impl MultiBasisFamily {
    pub fn new(d: usize, arity: usize, v: Vec<ComplexMatrix>) -> Result<Self> {
        if arity < 3 {
            return Err(Error::Basis(format!("arity {arity} below 3")));
        }
        let n = d.pow((arity - 2) as u32);
        if v.len() != d {
            return Err(Error::Basis(format!("{} blocks, expected {d}", v.len())));
        }
        for (k, m) in v.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Basis(format!("block {k} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
            }
            let r = m.unitarity_residual();
            if r >= BUILD_TOL {
                return Err(Error::Basis(format!("block {k} is not orthonormal (residual {r:e})")));
            }
        }
        Ok(Self { d, arity, v })
    }

    pub fn random(d: usize, arity: usize, rng: &mut Stream) -> Result<Self> {
        let n = d.pow((arity.max(3) - 2) as u32);
        Self::new(d, arity, (0..d).map(|_| haar_unitary(n, rng)).collect())
    }

    /// The family realising `multipartite_unitary_from_hypercubes(cubes)`
    /// as a coherification of `tensor_from_hypercube(&cubes[0])`.
    pub fn from_hypercubes(cubes: &[LatinHypercube]) -> Result<Self> {
        let first = cubes.first().ok_or_else(|| Error::Dimension("empty hypercube list".into()))?;
        let (d, r) = (first.order(), first.arity());
        if cubes.len() != r || r < 2 {
            return Err(Error::Dimension(format!("{} hypercubes of arity {r}", cubes.len())));
        }
        let n = d.pow((r - 1) as u32);
        let mut v = vec![ComplexMatrix::zeros(n, n); d];
        for x in 0..d.pow(r as u32) {
            let i1 = cubes[0].cells()[x] - 1;
            let row = x / d;
            let col = cubes[1..].iter().fold(0, |acc, c| acc * d + c.cells()[x] - 1);
            v[i1][(row, col)] = C64::new(1.0, 0.0);
        }
        Self::new(d, r + 1, v).map_err(|_| Error::Orthogonality("hypercubes are not mutually orthogonal".into()))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.v
    }
}

fn require_arity3(a: &PermutationTensor, d: usize) -> Result<()> {
    if a.arity() != 3 {
        return Err(Error::Dimension(format!("tensor arity {} (expected 3)", a.arity())));
    }
    if a.order() != d {
        return Err(Error::Dimension(format!("tensor order {} vs basis dimension {d}", a.order())));
    }
    Ok(())
}

/// For an arity-3 tensor, the unique `j` with `A_{klj} = 1`.
pub fn third_index(a: &PermutationTensor, k: usize, l: usize) -> usize {
    (0..a.order()).find(|&j| a.get3(k, l, j) == 1).expect("permutation tensor")
}

/// `U_{ki,lj} = A_{klj} (a_{k,l})_i` with rows `k·d+i`, columns `l·d+j`.
pub fn build_unitary(a: &PermutationTensor, bases: &BasisFamily) -> Result<ComplexMatrix> {
    let d = bases.dim();
    require_arity3(a, d)?;
    for (k, m) in bases.matrices().iter().enumerate() {
        let r = m.unitarity_residual();
        if r >= BUILD_TOL {
            return Err(Error::Basis(format!("rows of V_{k} are not orthonormal (residual {r:e})")));
        }
    }
    let mut u = ComplexMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            let j = third_index(a, k, l);
            for (i, &x) in bases.vector(k, l).iter().enumerate() {
                u[(k * d + i, l * d + j)] = x;
            }
        }
    }
    Ok(u)
}

/// Reads the basis family back out of a coherification of `A`.
pub fn extract_bases(u: &ComplexMatrix, a: &PermutationTensor) -> Result<BasisFamily> {
    let d = a.order();
    require_arity3(a, d)?;
    if u.rows() != d * d || u.cols() != d * d {
        return Err(Error::Dimension(format!("{}x{} matrix for d={d}", u.rows(), u.cols())));
    }
    let mut v = vec![ComplexMatrix::zeros(d, d); d];
    for (k, vk) in v.iter_mut().enumerate() {
        for l in 0..d {
            let j = third_index(a, k, l);
            for i in 0..d {
                vk[(l, i)] = u[(k * d + i, l * d + j)];
            }
        }
    }
    Ok(BasisFamily::from_raw(v))
}

/// `U_{(i₁,j),(i₂…i_m)} = A_{i₁…i_m} (a_{(i₁; i₂…i_{m−1})})_j`.
pub fn multistoch_build(a: &PermutationTensor, bases: &MultiBasisFamily) -> Result<ComplexMatrix> {
    let (d, m) = (bases.dim(), bases.arity());
    if a.order() != d || a.arity() != m {
        return Err(Error::Dimension(format!(
            "tensor ({}, arity {}) vs bases ({d}, arity {m})",
            a.order(),
            a.arity()
        )));
    }
    let n = d.pow((m - 2) as u32);
    let cols = n * d;
    let mut u = ComplexMatrix::zeros(cols, cols);
    for i1 in 0..d {
        for c in 0..cols {
            if a.entries()[i1 * cols + c] == 1 {
                let vec = bases.matrices()[i1].row(c / d);
                for (j, &x) in vec.iter().enumerate() {
                    u[(i1 * n + j, c)] = x;
                }
            }
        }
    }
    Ok(u)
}

/// Choi representation of the channel induced by a coherification.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    d: usize,
    arity: usize,
    m: ComplexMatrix,
}

/// Deviations of a dynamical matrix from its defining properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalReport {
    pub min_eigenvalue: f64,
    pub partial_trace_residual: f64,
    pub diagonal_residual: f64,
}

impl DynamicalMatrix {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `d^m × d^m`, rows `(i₁, i₂…i_m)`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m.rows()).map(|x| self.m[(x, x)].re).collect()
    }

    /// `Tr₁ D`, a `d^{m−1}` square matrix.
    pub fn trace_first(&self) -> ComplexMatrix {
        let n = self.m.rows() / self.d;
        ComplexMatrix::from_fn(n, n, |r, c| (0..self.d).map(|i| self.m[(i * n + r, i * n + c)]).sum())
    }

    pub fn report(&self, a: &PermutationTensor) -> DynamicalReport {
        let min_eigenvalue = self.m.eigvalsh().first().copied().unwrap_or(0.0);
        let n = self.m.rows() / self.d;
        let partial_trace_residual = self.trace_first().max_abs_diff(&ComplexMatrix::identity(n));
        let diagonal_residual = self
            .diagonal()
            .iter()
            .zip(a.entries())
            .map(|(x, &e)| (x - e as f64).abs())
            .fold(0.0, f64::max);
        DynamicalReport { min_eigenvalue, partial_trace_residual, diagonal_residual }
    }
}

/// `D_{(i₁,c),(i₁′,c′)} = Σ_j U_{(i₁,j),c} Ū_{(i₁′,j),c′}` for `U` of size
/// `d^{m−1}`, where `m` is the arity of `A`.
pub fn dynamical_matrix(u: &ComplexMatrix, a: &PermutationTensor) -> Result<DynamicalMatrix> {
    let (d, m) = (a.order(), a.arity());
    let cols = d.pow((m - 1) as u32);
    let n = cols / d;
    if u.rows() != cols || u.cols() != cols {
        return Err(Error::Dimension(format!("{}x{} matrix for d={d}, arity {m}", u.rows(), u.cols())));
    }
    let scale = u.max_abs().max(1.0);
    for i1 in 0..d {
        for j in 0..n {
            for c in 0..cols {
                if a.entries()[i1 * cols + c] == 0 && u[(i1 * n + j, c)].norm() > BUILD_TOL * scale {
                    return Err(Error::Structure(format!("U has support at row {}, column {c} outside A", i1 * n + j)));
                }
            }
        }
    }
    let dim = d * cols;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i1 in 0..d {
        for i1p in 0..d {
            for c in 0..cols {
                for cp in 0..cols {
                    let mut s = ZERO;
                    for j in 0..n {
                        s += u[(i1 * n + j, c)] * u[(i1p * n + j, cp)].conj();
                    }
                    out[(i1 * cols + c, i1p * cols + cp)] = s;
                }
            }
        }
    }
    Ok(DynamicalMatrix { d, arity: m, m: out })
}

/// Off-diagonal weight `(Σ|D|² − Σ|D_diag|²)/d^{2(m−1)}`.
pub fn c2_coherence(dm: &DynamicalMatrix) -> f64 {
    let total: f64 = dm.m.data().iter().map(|x| x.norm_sqr()).sum();
    let diag: f64 = (0..dm.m.rows()).map(|x| dm.m[(x, x)].norm_sqr()).sum();
    let norm = (dm.d as f64).powi(2 * (dm.arity as i32 - 1));
    ((total - diag) / norm).max(0.0)
}

fn validate_density(rho: &ComplexMatrix, d: usize, slot: usize) -> Result<()> {
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::Input(format!("input {slot} is {}x{}, expected {d}x{d}", rho.rows(), rho.cols())));
    }
    let herm = rho.max_abs_diff(&rho.adjoint());
    if herm > INPUT_TOL {
        return Err(Error::Input(format!("input {slot} is not Hermitian ({herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > INPUT_TOL || tr.im.abs() > INPUT_TOL {
        return Err(Error::Input(format!("input {slot} has trace {tr}")));
    }
    let min = rho.eigvalsh().first().copied().unwrap_or(0.0);
    if min < -INPUT_TOL {
        return Err(Error::Input(format!("input {slot} has eigenvalue {min:e}")));
    }
    Ok(())
}

/// `Tr_{2…n}[U(ρ₁⊗…⊗ρ_n)U†]`.
pub fn apply_channel(u: &ComplexMatrix, inputs: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = inputs.first().ok_or_else(|| Error::Input("no input states".into()))?;
    let d = first.rows();
    let n = inputs.len();
    if u.rows() != d.pow(n as u32) || !u.is_square() {
        return Err(Error::Dimension(format!("{}x{} gate for {n} inputs of dimension {d}", u.rows(), u.cols())));
    }
    for (s, rho) in inputs.iter().enumerate() {
        validate_density(rho, d, s)?;
    }
    let rho = inputs[1..].iter().fold(first.clone(), |acc, r| acc.kron(r));
    let out = u.matmul(&rho).matmul(&u.adjoint());
    partial_trace(&out, &vec![d; n], &[0])
}

/// Overlap sums whose vanishing is equivalent to quantum tristochasticity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TristochasticReport {
    /// `Σ_j Σ_{k≠k′} |⟨a_{k,l(k,j)}|a_{k′,l(k′,j)}⟩|²`.
    pub fixed_j: f64,
    /// `Σ_l Σ_{k≠k′} |⟨a_{k,l}|a_{k′,l}⟩|²`.
    pub fixed_l: f64,
    pub holds: bool,
}

impl TristochasticReport {
    /// `fixed_j + fixed_l`; equals `d²(d²−1)(1 − e_p)`.
    pub fn residual(&self) -> f64 {
        self.fixed_j + self.fixed_l
    }
}

pub fn overlap_sums(a: &PermutationTensor, bases: &BasisFamily) -> (f64, f64) {
    let d = bases.dim();
    let mut fixed_j = 0.0;
    let mut fixed_l = 0.0;
    // l(k, j): the l with A_{klj} = 1
    let mut l_of = vec![0usize; d * d];
    for k in 0..d {
        for l in 0..d {
            l_of[k * d + third_index(a, k, l)] = l;
        }
    }
    for k in 0..d {
        for kp in 0..d {
            if k == kp {
                continue;
            }
            for x in 0..d {
                fixed_j += inner(bases.vector(k, l_of[k * d + x]), bases.vector(kp, l_of[kp * d + x])).norm_sqr();
                fixed_l += inner(bases.vector(k, x), bases.vector(kp, x)).norm_sqr();
            }
        }
    }
    (fixed_j, fixed_l)
}

/// Checks `Φ[ρ⊗I/d] = Φ[I/d⊗ρ] = I/d` through its algebraic form: every
/// cross overlap entering the two complementary unitarity conditions must
/// vanish.
pub fn is_tristochastic_channel(u: &ComplexMatrix, a: &PermutationTensor, tol: f64) -> Result<TristochasticReport> {
    let bases = extract_bases(u, a)?;
    let (fixed_j, fixed_l) = overlap_sums(a, &bases);
    Ok(TristochasticReport { fixed_j, fixed_l, holds: fixed_j + fixed_l < tol })
}

/// Result of the slot-wise maximally mixed insertion test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultistochasticReport {
    pub max_residual: f64,
    pub trials: usize,
    pub holds: bool,
}

/// Number of random completions per input slot.
pub const MULTISTOCHASTIC_TRIALS: usize = 50;

/// Places `I/d` in each input slot in turn, with Haar-random pure states in
/// the others, and measures `‖Φ(…) − I/d‖_∞`.
pub fn is_multistochastic_channel(
    u: &ComplexMatrix,
    a: &PermutationTensor,
    tol: f64,
    seed: u64,
) -> Result<MultistochasticReport> {
    let (d, m) = (a.order(), a.arity());
    let n = m - 1;
    if u.rows() != d.pow(n as u32) || !u.is_square() {
        return Err(Error::Dimension(format!("{}x{} gate for d={d}, arity {m}", u.rows(), u.cols())));
    }
    let mixed = ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
    let mut r = rng::stream(seed, 0);
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for slot in 0..n {
        for _ in 0..MULTISTOCHASTIC_TRIALS {
            let inputs: Vec<ComplexMatrix> =
                (0..n).map(|s| if s == slot { mixed.clone() } else { outer(&haar_state(d, &mut r)) }).collect();
            let out = apply_channel(u, &inputs)?;
            worst = worst.max(out.max_abs_diff(&mixed));
            trials += 1;
        }
    }
    Ok(MultistochasticReport { max_residual: worst, trials, holds: worst < tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::{latin_hypercubes, mols, multipartite_unitary_from_hypercubes, perm_2unitary_from_mols, tensor_from_hypercube, tensor_from_square};
    use crate::linalg::ONE;

    fn cyclic_mub(d: usize) -> BasisFamily {
        // (a_{k,l})_i = ω^{k i² + l i}/√d
        let w = 2.0 * core::f64::consts::PI / d as f64;
        let s = 1.0 / (d as f64).sqrt();
        BasisFamily::new(
            (0..d)
                .map(|k| ComplexMatrix::from_fn(d, d, |l, i| C64::from_polar(s, w * ((k * i * i + l * i) % d) as f64)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn computational_bases_give_permutations() {
        for d in 2..6 {
            let u = build_unitary(&PermutationTensor::cyclic(d), &BasisFamily::computational(d)).unwrap();
            assert!(u.is_permutation());
        }
    }

    #[test]
    fn mols_bases_reproduce_mols_permutation() {
        for d in [3, 4, 5, 7] {
            let s = mols(d).unwrap();
            let b = BasisFamily::from_mols(&s[0], &s[1]).unwrap();
            let u = build_unitary(&tensor_from_square(&s[0]), &b).unwrap();
            assert_eq!(u, perm_2unitary_from_mols(&s[0], &s[1]).unwrap());
        }
    }

    #[test]
    fn sparsity_pattern_follows_tensor() {
        let mut r = rng::stream(1, 0);
        let a = tensor_from_square(&mols(5).unwrap()[1]);
        let u = build_unitary(&a, &BasisFamily::random(5, &mut r)).unwrap();
        assert!(u.is_unitary(BUILD_TOL));
        for k in 0..5 {
            for l in 0..5 {
                for j in 0..5 {
                    if a.get3(k, l, j) == 0 {
                        assert!((0..5).all(|i| u[(k * 5 + i, l * 5 + j)] == ZERO));
                    }
                }
            }
        }
    }

    #[test]
    fn non_orthonormal_bases_rejected() {
        let mut v = vec![ComplexMatrix::identity(3); 3];
        v[1][(0, 1)] = ONE;
        assert!(matches!(BasisFamily::new(v.clone()), Err(Error::Basis(_))));
        assert!(matches!(
            build_unitary(&PermutationTensor::cyclic(3), &BasisFamily::from_raw(v)),
            Err(Error::Basis(_))
        ));
        assert!(matches!(
            build_unitary(&PermutationTensor::cyclic(4), &BasisFamily::computational(3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn dynamical_matrix_properties() {
        let mut r = rng::stream(2, 0);
        for d in [2, 3, 4] {
            let a = PermutationTensor::cyclic(d);
            for _ in 0..5 {
                let u = build_unitary(&a, &BasisFamily::random(d, &mut r)).unwrap();
                let dm = dynamical_matrix(&u, &a).unwrap();
                let rep = dm.report(&a);
                assert!(rep.min_eigenvalue > -1e-10);
                assert!(rep.partial_trace_residual < 1e-10);
                assert!(rep.diagonal_residual < 1e-12);
                let tr: f64 = dm.diagonal().iter().sum();
                assert!((tr - (d * d) as f64).abs() < 1e-10);
                // Kraus rank d
                let big = dm.matrix().eigvalsh().iter().filter(|&&x| x > 1e-9).count();
                assert_eq!(big, d);
            }
        }
    }

    #[test]
    fn permutation_dynamical_diagonal_is_tensor() {
        let a = PermutationTensor::cyclic(3);
        let u = build_unitary(&a, &BasisFamily::computational(3)).unwrap();
        let dm = dynamical_matrix(&u, &a).unwrap();
        let diag: Vec<u8> = dm.diagonal().iter().map(|&x| x.round() as u8).collect();
        assert_eq!(diag, a.entries());
    }

    #[test]
    fn dynamical_matrix_rejects_foreign_support() {
        let a = PermutationTensor::cyclic(3);
        assert!(matches!(dynamical_matrix(&ComplexMatrix::identity(9), &a), Err(Error::Structure(_))));
    }

    #[test]
    fn classical_convolution() {
        let d = 5;
        let a = PermutationTensor::cyclic(d);
        let u = build_unitary(&a, &BasisFamily::computational(d)).unwrap();
        let p = [0.1, 0.2, 0.3, 0.15, 0.25];
        let q = [0.4, 0.05, 0.05, 0.3, 0.2];
        let rp = ComplexMatrix::diagonal(&p.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let rq = ComplexMatrix::diagonal(&q.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let out = apply_channel(&u, &[rp, rq]).unwrap();
        for i in 0..d {
            let conv: f64 = (0..d).map(|j| p[j] * q[(i + d - j) % d]).sum();
            assert!((out[(i, i)].re - conv).abs() < 1e-14);
        }
    }

    #[test]
    fn maximally_mixed_is_preserved() {
        let mut r = rng::stream(3, 0);
        let a = PermutationTensor::cyclic(3);
        let u = build_unitary(&a, &BasisFamily::random(3, &mut r)).unwrap();
        let mixed = ComplexMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
        let out = apply_channel(&u, &[mixed.clone(), mixed.clone()]).unwrap();
        assert!(out.max_abs_diff(&mixed) < 1e-12);
    }

    #[test]
    fn channel_input_validation() {
        let u = ComplexMatrix::identity(4);
        let bad = ComplexMatrix::identity(2);
        let good = ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0));
        assert!(matches!(apply_channel(&u, &[bad, good.clone()]), Err(Error::Input(_))));
        let neg = ComplexMatrix::diagonal(&[C64::new(1.1, 0.0), C64::new(-0.1, 0.0)]);
        assert!(matches!(apply_channel(&u, &[neg, good]), Err(Error::Input(_))));
    }

    #[test]
    fn tristochastic_certificate() {
        let s = mols(3).unwrap();
        let a = tensor_from_square(&s[0]);
        let p9 = perm_2unitary_from_mols(&s[0], &s[1]).unwrap();
        assert!(is_tristochastic_channel(&p9, &a, 1e-10).unwrap().holds);
        let c = PermutationTensor::cyclic(3);
        let mub = build_unitary(&c, &cyclic_mub(3)).unwrap();
        let rep = is_tristochastic_channel(&mub, &c, 1e-10).unwrap();
        assert!(!rep.holds);
        // each of the d(d−1) ordered pairs per slice contributes 1/d
        assert!((rep.fixed_j - 6.0 * 3.0 / 3.0).abs() < 1e-12);
        assert!((rep.fixed_l - 6.0).abs() < 1e-12);
    }

    #[test]
    fn tristochastic_channel_action() {
        // for P₉ the certificate means Φ[ρ⊗I/d] = Φ[I/d⊗ρ] = I/d for all ρ
        let s = mols(3).unwrap();
        let p9 = perm_2unitary_from_mols(&s[0], &s[1]).unwrap();
        let mixed = ComplexMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
        let mut r = rng::stream(4, 0);
        for _ in 0..10 {
            let rho = outer(&haar_state(3, &mut r));
            assert!(apply_channel(&p9, &[rho.clone(), mixed.clone()]).unwrap().max_abs_diff(&mixed) < 1e-12);
            assert!(apply_channel(&p9, &[mixed.clone(), rho]).unwrap().max_abs_diff(&mixed) < 1e-12);
        }
    }

    fn reference_arity4_tensor() -> PermutationTensor {
        let mut e = vec![0u8; 16];
        for x in 0..8usize {
            let parity = (x.count_ones() % 2) as usize;
            e[parity * 8 + x] = 1;
        }
        PermutationTensor::new(2, 4, e).unwrap()
    }

    #[test]
    fn multistoch_reduces_to_bipartite() {
        let mut r = rng::stream(5, 0);
        let a = tensor_from_square(&mols(4).unwrap()[2]);
        let b = BasisFamily::random(4, &mut r);
        let mb = MultiBasisFamily::new(4, 3, b.matrices().to_vec()).unwrap();
        assert_eq!(multistoch_build(&a, &mb).unwrap(), build_unitary(&a, &b).unwrap());
    }

    #[test]
    fn arity4_example_sparsity() {
        let mut r = rng::stream(6, 0);
        let a = reference_arity4_tensor();
        let mb = MultiBasisFamily::random(2, 4, &mut r).unwrap();
        let u = multistoch_build(&a, &mb).unwrap();
        assert!(u.is_unitary(1e-12));
        let support = |row: usize| -> Vec<usize> { (0..8).filter(|&c| u[(row, c)] != ZERO).collect() };
        for row in 0..4 {
            assert_eq!(support(row), vec![0, 3, 5, 6]);
        }
        for row in 4..8 {
            assert_eq!(support(row), vec![1, 2, 4, 7]);
        }
        // column 5 = (i₂,i₃,i₄) = (1,0,1) carries a_{(0; 1,0)}, the third vector
        for j in 0..4 {
            assert_eq!(u[(j, 5)], mb.matrices()[0][(2, j)]);
        }
    }

    #[test]
    fn hypercube_bases_match_permutation() {
        let cubes = latin_hypercubes(4, 3, 3).unwrap();
        let mb = MultiBasisFamily::from_hypercubes(&cubes).unwrap();
        let a = tensor_from_hypercube(&cubes[0]);
        assert_eq!(multistoch_build(&a, &mb).unwrap(), multipartite_unitary_from_hypercubes(&cubes).unwrap());
    }

    #[test]
    fn c2_values() {
        let a = PermutationTensor::cyclic(3);
        let perm = build_unitary(&a, &BasisFamily::computational(3)).unwrap();
        let dm = dynamical_matrix(&perm, &a).unwrap();
        // computational bases still give d-fold coherence across k
        assert!((c2_coherence(&dm) - 2.0 / 9.0).abs() < 1e-12);
        let mut r = rng::stream(7, 0);
        for (d, m) in [(2usize, 3usize), (3, 3), (4, 3), (2, 4), (3, 4)] {
            let mut e = vec![0u8; d.pow(m as u32)];
            let n = d.pow((m - 1) as u32);
            for c in 0..n {
                let s: usize = crate::bipartite::digits(c, &vec![d; m - 1]).iter().sum();
                e[(s % d) * n + c] = 1;
            }
            let a = PermutationTensor::new(d, m, e).unwrap();
            let mb = MultiBasisFamily::random(d, m, &mut r).unwrap();
            let u = multistoch_build(&a, &mb).unwrap();
            let dm = dynamical_matrix(&u, &a).unwrap();
            let want = (d - 1) as f64 / (d as f64).powi(m as i32 - 1);
            assert!((c2_coherence(&dm) - want).abs() < 1e-12, "d={d} m={m}");
        }
    }

    #[test]
    fn multistochastic_checks() {
        let cubes = latin_hypercubes(4, 3, 3).unwrap();
        let u = multipartite_unitary_from_hypercubes(&cubes).unwrap();
        let a = tensor_from_hypercube(&cubes[0]);
        assert!(is_multistochastic_channel(&u, &a, 1e-10, 1).unwrap().holds);
        let mut r = rng::stream(8, 0);
        let at = reference_arity4_tensor();
        let mb = MultiBasisFamily::random(2, 4, &mut r).unwrap();
        let ur = multistoch_build(&at, &mb).unwrap();
        let rep = is_multistochastic_channel(&ur, &at, 1e-10, 2).unwrap();
        assert!(!rep.holds);
        assert!(rep.max_residual > 0.01);
    }

    #[test]
    fn multistochastic_agrees_with_tristochastic() {
        let mut r = rng::stream(9, 0);
        let a = PermutationTensor::cyclic(3);
        for t in 0..20 {
            let u = build_unitary(&a, &BasisFamily::random(3, &mut r)).unwrap();
            let tri = is_tristochastic_channel(&u, &a, 1e-9).unwrap().holds;
            let multi = is_multistochastic_channel(&u, &a, 1e-9, t).unwrap().holds;
            assert_eq!(tri, multi);
        }
        let s = mols(3).unwrap();
        let p9 = perm_2unitary_from_mols(&s[0], &s[1]).unwrap();
        let a9 = tensor_from_square(&s[0]);
        assert!(is_multistochastic_channel(&p9, &a9, 1e-9, 0).unwrap().holds);
    }

    #[test]
    fn extract_round_trip() {
        let mut r = rng::stream(10, 0);
        let a = tensor_from_square(&mols(5).unwrap()[0]);
        let b = BasisFamily::random(5, &mut r);
        let u = build_unitary(&a, &b).unwrap();
        assert_eq!(extract_bases(&u, &a).unwrap(), b);
    }
}
