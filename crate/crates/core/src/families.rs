//! Concrete gate families: `U₈₁`, the orthogonal `d = 6` candidate, `P₁₆`
//! with its CNOT circuit and entangled basis, the `d = 4` three-cube gate,
//! the `d = 7` cyclic ansatz, and AME(4,d) states.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::bipartite::{local_dim, split_amplitudes, ChoiState};
use crate::coherence::{s_alpha_unitary, Alpha};
use crate::coherify::{build_unitary, BasisFamily};
use crate::error::{Error, Result};
use crate::invariants::{local_invariant, parse_cycles, PermQuadruple};
use crate::latin::{
    latin_hypercubes, multipartite_unitary_from_hypercubes, perm_2unitary_from_mols, tensor_from_square, LatinSquare,
    PermutationTensor,
};
use crate::linalg::{fourier_matrix, kron_vec, ComplexMatrix, C64, ONE, ZERO};
use crate::metrics::entangling_power;
use crate::rng::{self, Rng};
use crate::search::{is_permutation_like, search_from_seed, Constraint, SearchConfig, SearchFailure, SearchState};

// ---------------------------------------------------------------- U81

/// `F₃ · diag(1, e^{iα₁}, e^{iα₂}) · F₃†`.
pub fn circulant_unitary(alpha1: f64, alpha2: f64) -> ComplexMatrix {
    let f = fourier_matrix(3);
    let d = ComplexMatrix::diagonal(&[ONE, C64::from_polar(1.0, alpha1), C64::from_polar(1.0, alpha2)]);
    f.matmul(&d).matmul(&f.adjoint())
}

/// First-row data `(a, b, c, φ, θ)` of a circulant: entries
/// `a, b e^{iφ}, c e^{iθ}` after removing the phase of the first entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculantRow {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub phi: f64,
    pub theta: f64,
}

/// Phases of the two circulants `B₂`, `B₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U81Params {
    pub b2: (f64, f64),
    pub b3: (f64, f64),
}

impl U81Params {
    pub fn new(b2: (f64, f64), b3: (f64, f64)) -> Self {
        U81Params { b2, b3 }
    }

    /// `a = b = c = 1/√3`, `φ = θ = 2π/3` for both circulants.
    pub fn symmetric() -> Self {
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let s = 1.0 / 3f64.sqrt();
        let b = ComplexMatrix::from_fn(3, 3, |r, c| if r == c { C64::new(s, 0.0) } else { w * s });
        let f = fourier_matrix(3);
        let diag = f.adjoint().matmul(&b).matmul(&f);
        let p = ((diag[(1, 1)] / diag[(0, 0)]).arg(), (diag[(2, 2)] / diag[(0, 0)]).arg());
        U81Params { b2: p, b3: p }
    }

    /// Both circulants equal to the cyclic shift; `U₈₁` is then a
    /// permutation.
    pub fn permutation_limit() -> Self {
        let p = (2.0 * PI / 3.0, 4.0 * PI / 3.0);
        U81Params { b2: p, b3: p }
    }

    pub fn random(r: &mut rng::Stream) -> Self {
        let mut ph = || r.random::<f64>() * 2.0 * PI;
        U81Params { b2: (ph(), ph()), b3: (ph(), ph()) }
    }

    pub fn circulants(&self) -> [ComplexMatrix; 2] {
        [circulant_unitary(self.b2.0, self.b2.1), circulant_unitary(self.b3.0, self.b3.1)]
    }

    pub fn rows(&self) -> [CirculantRow; 2] {
        self.circulants().map(|b| {
            let r = b.row(0);
            CirculantRow {
                a: r[0].norm(),
                b: r[1].norm(),
                c: r[2].norm(),
                phi: (r[1] / r[0]).arg(),
                theta: (r[2] / r[0]).arg(),
            }
        })
    }

    /// `a₂⁴+b₂⁴+c₂⁴+a₃⁴+b₃⁴+c₃⁴`.
    pub fn sum_a4(&self) -> f64 {
        self.rows().iter().map(|r| r.a.powi(4) + r.b.powi(4) + r.c.powi(4)).sum()
    }
}

/// `(P_π)_{i, π(i)} = 1`.
fn perm_matrix(p: &[usize]) -> ComplexMatrix {
    let n = p.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, &pi) in p.iter().enumerate() {
        m[(i, pi)] = ONE;
    }
    m
}

/// The nine bases of `U₈₁`: `V_0 = I`,
/// `V_k = P_{π_k} (I₃ ⊗ B_k) P_σ` for `k = 1, 2`, and
/// `V_{k+3m} = P_{π_blocks}^m V_k`.
pub fn u81_bases(p: &U81Params) -> Result<BasisFamily> {
    let sigma = parse_cycles("(24)(37)(68)", 9)?;
    let c2 = parse_cycles("(123456789)", 9)?;
    let c3 = parse_cycles("(135792468)", 9)?;
    let blocks = perm_matrix(&parse_cycles("(147)(258)(369)", 9)?);
    let p_sigma = perm_matrix(&sigma);
    let mut v = vec![ComplexMatrix::identity(9); 9];
    for (k, (c, b)) in [(c2, &p.circulants()[0]), (c3, &p.circulants()[1])].into_iter().enumerate() {
        // σ acts after the long cycle
        let pi: Vec<usize> = (0..9).map(|i| sigma[c[i]]).collect();
        v[k + 1] = perm_matrix(&pi).matmul(&ComplexMatrix::identity(3).kron(b)).matmul(&p_sigma);
    }
    for m in 1..3 {
        for k in 0..3 {
            v[k + 3 * m] = blocks.matmul(&v[k + 3 * (m - 1)]);
        }
    }
    BasisFamily::new(v)
}

/// `[U₈₁]_{ki,lj} = A_{klj} (a_{k,l})_i` with `A_{klj} = δ_{k, l⊕j}`.
pub fn build_u81(p: &U81Params) -> Result<ComplexMatrix> {
    build_unitary(&PermutationTensor::cyclic(9), &u81_bases(p)?)
}

// ---------------------------------------------------------------- d = 6

/// The 6×6 Latin square underlying the orthogonal candidate.
pub fn d6_latin_square() -> LatinSquare {
    LatinSquare::from_rows(&[
        &[1, 2, 3, 4, 5, 6],
        &[2, 1, 4, 3, 6, 5],
        &[5, 6, 1, 2, 3, 4],
        &[6, 5, 2, 1, 4, 3],
        &[3, 4, 6, 5, 1, 2],
        &[4, 3, 5, 6, 2, 1],
    ])
    .expect("valid square")
}

/// The six real orthogonal matrices `O_k` (rows are the basis vectors).
pub fn d6_bases() -> BasisFamily {
    let a = FRAC_1_SQRT_2;
    let b = (3f64.sqrt() - 1.0) / (2.0 * 2f64.sqrt());
    let bp = (3f64.sqrt() + 1.0) / (2.0 * 2f64.sqrt());
    let c = 0.5;
    let cp = 3f64.sqrt() / 2.0;
    let sparse = |e: &[((usize, usize), f64)]| {
        let mut m = ComplexMatrix::zeros(6, 6);
        for &((r, col), x) in e {
            m[(r, col)] = C64::new(x, 0.0);
        }
        m
    };
    let v = vec![
        ComplexMatrix::identity(6),
        sparse(&[((0, 3), 1.0), ((1, 2), 1.0), ((2, 4), -a), ((2, 5), -a), ((3, 4), a), ((3, 5), -a), ((4, 0), 1.0), ((5, 1), 1.0)]),
        sparse(&[((0, 1), 1.0), ((1, 0), 1.0), ((2, 3), 1.0), ((3, 2), 1.0), ((4, 4), -b), ((4, 5), -bp), ((5, 4), bp), ((5, 5), -b)]),
        sparse(&[((0, 4), c), ((0, 5), -cp), ((1, 4), cp), ((1, 5), c), ((2, 1), 1.0), ((3, 0), 1.0), ((4, 2), 1.0), ((5, 3), 1.0)]),
        sparse(&[((0, 2), 1.0), ((1, 3), 1.0), ((2, 4), cp), ((2, 5), -c), ((3, 4), c), ((3, 5), cp), ((4, 1), 1.0), ((5, 0), 1.0)]),
        sparse(&[((0, 4), bp), ((0, 5), b), ((1, 4), -b), ((1, 5), bp), ((2, 0), 1.0), ((3, 1), 1.0), ((4, 3), 1.0), ((5, 2), 1.0)]),
    ];
    BasisFamily::new(v).expect("orthogonal data")
}

/// Real orthogonal 36×36 coherification with `e_p = (208+√3)/210`.
pub fn build_d6_candidate() -> ComplexMatrix {
    build_unitary(&tensor_from_square(&d6_latin_square()), &d6_bases()).expect("consistent data")
}

// ---------------------------------------------------------------- P16

/// The orthogonal pair `(L, M)` of order 4.
pub fn p16_squares() -> (LatinSquare, LatinSquare) {
    let l = LatinSquare::from_rows(&[&[1, 2, 3, 4], &[2, 1, 4, 3], &[3, 4, 1, 2], &[4, 3, 2, 1]]).expect("valid");
    let m = LatinSquare::from_rows(&[&[1, 2, 3, 4], &[3, 4, 1, 2], &[4, 3, 2, 1], &[2, 1, 4, 3]]).expect("valid");
    (l, m)
}

pub fn build_p16() -> ComplexMatrix {
    let (l, m) = p16_squares();
    perm_2unitary_from_mols(&l, &m).expect("orthogonal pair")
}

/// CNOT gates `(control, target)` on qubits `1..=4` in layers, applied
/// first layer first. Qubit 1 is the most significant bit and ququart
/// values are `2·q_hi + q_lo`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitGateList {
    pub layers: Vec<Vec<(usize, usize)>>,
}

impl CircuitGateList {
    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn is_nearest_neighbour(&self) -> bool {
        self.layers.iter().flatten().all(|&(c, t)| c.abs_diff(t) == 1)
    }

    /// Drops `left` leading and `right` trailing layers.
    pub fn strip(&self, left: usize, right: usize) -> Self {
        let n = self.layers.len();
        CircuitGateList { layers: self.layers[left.min(n)..n.saturating_sub(right).max(left.min(n))].to_vec() }
    }

    /// Keeps only the layers in `range`.
    pub fn slice(&self, range: core::ops::Range<usize>) -> Self {
        CircuitGateList { layers: self.layers[range].to_vec() }
    }
}

pub fn p16_circuit() -> CircuitGateList {
    CircuitGateList {
        layers: vec![
            vec![(1, 2), (3, 4)],
            vec![(2, 3)],
            vec![(2, 1), (4, 3)],
            vec![(3, 2)],
            vec![(2, 1), (4, 3)],
            vec![(3, 2)],
            vec![(1, 2), (4, 3)],
            vec![(2, 1), (3, 4)],
            vec![(2, 3)],
            vec![(1, 2), (3, 4)],
            vec![(2, 1), (4, 3)],
        ],
    }
}

fn cnot(control: usize, target: usize) -> Vec<usize> {
    (0..16)
        .map(|x| {
            let bit = |q: usize| (x >> (4 - q)) & 1;
            if bit(control) == 1 { x ^ (1 << (4 - target)) } else { x }
        })
        .collect()
}

/// Product of the gates as a 16×16 permutation matrix.
pub fn circuit_to_unitary(c: &CircuitGateList) -> ComplexMatrix {
    let mut img: Vec<usize> = (0..16).collect();
    for &(ctl, tgt) in c.layers.iter().flatten() {
        let g = cnot(ctl, tgt);
        img = img.iter().map(|&y| g[y]).collect();
    }
    perm_matrix_cols(&img)
}

/// `Σ_x |img(x)⟩⟨x|`.
fn perm_matrix_cols(img: &[usize]) -> ComplexMatrix {
    let n = img.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (x, &y) in img.iter().enumerate() {
        m[(y, x)] = ONE;
    }
    m
}

/// True when every gate of the circuit acts inside one ququart.
pub fn is_local(c: &CircuitGateList) -> bool {
    c.layers.iter().flatten().all(|&(a, b)| (a - 1) / 2 == (b - 1) / 2)
}

fn bell(kind: u8, sign: f64) -> [(usize, usize, f64); 2] {
    let s = FRAC_1_SQRT_2;
    match kind {
        // |Ψ±⟩ = (|00⟩ ± |11⟩)/√2
        0 => [(0, 0, s), (1, 1, sign * s)],
        // |Ξ±⟩ = (|01⟩ ± |10⟩)/√2
        _ => [(0, 1, s), (1, 0, sign * s)],
    }
}

/// The 4×4 grid of entangled two-ququart vectors, row-major. The first
/// Bell pair sits on the high qubits of both ququarts, the second on the
/// low qubits.
pub fn magic_basis_16() -> Vec<Vec<C64>> {
    // (first kind, first sign, second kind, second sign, overall sign)
    let grid: [[(u8, f64, u8, f64, f64); 4]; 4] = [
        [(0, 1.0, 0, 1.0, 1.0), (0, 1.0, 0, -1.0, 1.0), (0, -1.0, 0, 1.0, 1.0), (0, -1.0, 0, -1.0, 1.0)],
        [(0, 1.0, 1, 1.0, 1.0), (0, 1.0, 1, -1.0, 1.0), (0, -1.0, 1, 1.0, -1.0), (0, -1.0, 1, -1.0, -1.0)],
        [(1, 1.0, 0, 1.0, 1.0), (1, 1.0, 0, -1.0, -1.0), (1, -1.0, 0, 1.0, -1.0), (1, -1.0, 0, -1.0, 1.0)],
        [(1, 1.0, 1, 1.0, 1.0), (1, 1.0, 1, -1.0, -1.0), (1, -1.0, 1, 1.0, 1.0), (1, -1.0, 1, -1.0, -1.0)],
    ];
    let mut out = Vec::with_capacity(16);
    for row in &grid {
        for &(k1, s1, k2, s2, sg) in row {
            let mut v = vec![ZERO; 16];
            for (x1, x3, a) in bell(k1, s1) {
                for (x2, x4, b) in bell(k2, s2) {
                    v[x1 * 8 + x2 * 4 + x3 * 2 + x4] += C64::new(sg * a * b, 0.0);
                }
            }
            out.push(v);
        }
    }
    out
}

fn gram_residual(vs: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0f64;
    for (a, x) in vs.iter().enumerate() {
        for (b, y) in vs.iter().enumerate() {
            let g: C64 = x.iter().zip(y).map(|(p, q)| p.conj() * q).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// Second Schmidt coefficient of a state of `parties` equal subsystems
/// across the cut `subset | rest`.
fn second_schmidt(v: &[C64], dims: &[usize], subset: &[usize]) -> f64 {
    let m = split_amplitudes(v, dims, subset).expect("valid cut");
    m.singular_values().get(1).copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisMappingReport {
    pub gram_residual: f64,
    /// Largest second Schmidt coefficient of any image across ququarts.
    pub max_second_schmidt: f64,
    /// Largest `1 − |⟨r|⊗⟨h_c| U v_{rc}|` over the grid.
    pub max_target_deviation: f64,
}

impl BasisMappingReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.gram_residual < tol && self.max_second_schmidt < tol && self.max_target_deviation < tol
    }
}

/// The second-ququart targets `(1,±1,±1,±1)/2` of the grid columns.
pub fn column_targets() -> [[f64; 4]; 4] {
    [[0.5, 0.5, 0.5, 0.5], [0.5, 0.5, -0.5, -0.5], [0.5, -0.5, -0.5, 0.5], [0.5, -0.5, 0.5, -0.5]]
}

pub fn verify_basis_mapping(u: &ComplexMatrix) -> Result<BasisMappingReport> {
    if u.rows() != 16 || u.cols() != 16 {
        return Err(Error::Dimension(format!("{}x{} gate, expected 16x16", u.rows(), u.cols())));
    }
    let basis = magic_basis_16();
    let targets = column_targets();
    let mut schmidt = 0.0f64;
    let mut dev = 0.0f64;
    for (idx, v) in basis.iter().enumerate() {
        let (r, c) = (idx / 4, idx % 4);
        let img = u.mul_vec(v);
        schmidt = schmidt.max(second_schmidt(&img, &[4, 4], &[0]));
        let mut e = vec![ZERO; 4];
        e[r] = ONE;
        let h: Vec<C64> = targets[c].iter().map(|&x| C64::new(x, 0.0)).collect();
        let t = kron_vec(&e, &h);
        let ov: C64 = t.iter().zip(&img).map(|(p, q)| p.conj() * q).sum();
        dev = dev.max(1.0 - ov.norm());
    }
    Ok(BasisMappingReport { gram_residual: gram_residual(&basis), max_second_schmidt: schmidt, max_target_deviation: dev })
}

/// Numerical rank with eigenvalue threshold `1e−10`.
pub const RANK_TOL: f64 = 1e-10;

/// For `trials` random superpositions of magic-basis vectors drawn from
/// `m_rows` random rows and `n_cols` random columns of the grid, the
/// largest rank of the first-ququart output of `U`.
pub fn rank_theorem_check(u: &ComplexMatrix, m_rows: usize, n_cols: usize, trials: usize, seed: u64) -> Result<usize> {
    if !(1..=4).contains(&m_rows) || !(1..=4).contains(&n_cols) {
        return Err(Error::Input(format!("rows {m_rows} and columns {n_cols} must lie in 1..=4")));
    }
    if u.rows() != 16 || u.cols() != 16 {
        return Err(Error::Dimension(format!("{}x{} gate, expected 16x16", u.rows(), u.cols())));
    }
    let basis = magic_basis_16();
    let mut r = rng::stream(seed, 0);
    let mut best = 0;
    for _ in 0..trials {
        let rows = choose(&mut r, 4, m_rows);
        let cols = choose(&mut r, 4, n_cols);
        let mut psi = vec![ZERO; 16];
        for &a in &rows {
            for &b in &cols {
                let w = C64::new(gauss(&mut r), gauss(&mut r));
                for (p, x) in psi.iter_mut().zip(&basis[a * 4 + b]) {
                    *p += w * x;
                }
            }
        }
        crate::linalg::normalize(&mut psi);
        let m = split_amplitudes(&u.mul_vec(&psi), &[4, 4], &[0])?;
        let rho = m.matmul(&m.adjoint());
        let rank = rho.eigvalsh().iter().filter(|&&e| e > RANK_TOL).count();
        best = best.max(rank);
    }
    Ok(best)
}

fn gauss(r: &mut rng::Stream) -> f64 {
    r.sample::<f64, _>(rand_distr::StandardNormal)
}

fn choose(r: &mut rng::Stream, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = r.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

// ---------------------------------------------------------------- d = 4, three ququarts

/// `{|GHZ^i_±⟩ ⊗ |GHZ^j_±⟩}`: the first GHZ triple on the high qubits of
/// the three ququarts, the second on the low qubits.
pub fn ghz_basis_64() -> Vec<Vec<C64>> {
    let s = FRAC_1_SQRT_2;
    let mut ghz = Vec::with_capacity(8);
    for i in 0..4usize {
        for sign in [1.0, -1.0] {
            // |0 b₁ b₂⟩ ± |1 b̄₁ b̄₂⟩ with b₁b₂ the binary digits of i
            let x = i;
            let y = 7 - i;
            ghz.push([(x, s), (y, sign * s)]);
        }
    }
    let mut out = Vec::with_capacity(64);
    for hi in &ghz {
        for lo in &ghz {
            let mut v = vec![ZERO; 64];
            for &(x, a) in hi {
                for &(y, b) in lo {
                    let q = |p: usize| 2 * ((x >> (2 - p)) & 1) + ((y >> (2 - p)) & 1);
                    v[q(0) * 16 + q(1) * 4 + q(2)] += C64::new(a * b, 0.0);
                }
            }
            out.push(v);
        }
    }
    out
}

/// `U₆₄` from three mutually orthogonal Latin cubes of order 4.
pub fn build_3unitary_d4() -> Result<ComplexMatrix> {
    multipartite_unitary_from_hypercubes(&latin_hypercubes(4, 3, 3)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzReport {
    pub gram_residual: f64,
    /// Largest deviation of a single-ququart marginal of a basis vector
    /// from `I/4`.
    pub max_marginal_deviation: f64,
    /// Images under the gate that are fully product across the three
    /// ququarts (all single-ququart marginals pure).
    pub product_images: usize,
}

pub fn ghz_report(u: &ComplexMatrix) -> Result<GhzReport> {
    if u.rows() != 64 || u.cols() != 64 {
        return Err(Error::Dimension(format!("{}x{} gate, expected 64x64", u.rows(), u.cols())));
    }
    let basis = ghz_basis_64();
    let dims = [4usize, 4, 4];
    let mut marg = 0.0f64;
    let mut product = 0;
    for v in &basis {
        for p in 0..3 {
            let m = split_amplitudes(v, &dims, &[p])?;
            let rho = m.matmul(&m.adjoint());
            let dev = (&rho - &ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0))).max_abs();
            marg = marg.max(dev);
        }
        let img = u.mul_vec(v);
        let pure = (0..3).all(|p| second_schmidt(&img, &dims, &[p]) < 1e-12);
        if pure {
            product += 1;
        }
    }
    Ok(GhzReport { gram_residual: gram_residual(&basis), max_marginal_deviation: marg, product_images: product })
}

// ---------------------------------------------------------------- AME(4,d)

/// `Σ_{ij} |ij⟩ ⊗ U|ij⟩ / d`, parties ordered (out₁, out₂, in₁, in₂).
pub fn ame_state(u: &ComplexMatrix) -> Result<Vec<C64>> {
    let d = local_dim(u.rows()).ok_or_else(|| Error::Dimension(format!("{} is not a perfect square", u.rows())))?;
    Ok(ChoiState::from_unitary(u, d)?.amplitudes().to_vec())
}

/// Largest entrywise deviation of any of the six two-party marginals of
/// the AME(4,d) state from `I/d²`.
pub fn ame_marginal_residual(u: &ComplexMatrix) -> Result<f64> {
    let d = local_dim(u.rows()).ok_or_else(|| Error::Dimension(format!("{} is not a perfect square", u.rows())))?;
    let psi = ame_state(u)?;
    let dims = [d; 4];
    let mixed = ComplexMatrix::identity(d * d).scale(C64::new(1.0 / (d * d) as f64, 0.0));
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in a + 1..4 {
            let m = split_amplitudes(&psi, &dims, &[a, b])?;
            let rho = m.matmul(&m.adjoint());
            worst = worst.max((&rho - &mixed).max_abs());
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------- d = 7 cyclic ansatz

/// Nonzero amplitudes expected in every non-computational vector.
pub fn u49_amplitude_pattern() -> [f64; 7] {
    let a = (1.0f64 / 7.0).sqrt();
    let b = (2.0f64 / 7.0).sqrt();
    [0.0, 0.0, a, a, a, b, b]
}

#[derive(Debug, Clone, PartialEq)]
pub struct U49Certificate {
    pub residual: f64,
    pub e_p: f64,
    pub invariant: C64,
    pub s2: f64,
    /// Largest deviation of a sorted amplitude multiset of `a_{k,l}`,
    /// `k ≥ 1`, from `{0,0,√(1/7)×3,√(2/7)×2}`.
    pub amplitude_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct U49Solution {
    pub restart: usize,
    pub sweeps: usize,
    pub bases: BasisFamily,
    pub unitary: ComplexMatrix,
    pub certificate: U49Certificate,
}

/// Search settings of the ansatz: cyclic tensor and amplitudes, `V_0 = I`.
pub fn u49_config() -> SearchConfig {
    SearchConfig { constraint: Constraint::Cyclic, ..SearchConfig::default() }
}

/// Restart `index` of the ansatz search under master seed `seed`.
pub fn u49_restart(seed: u64, index: usize, cfg: &SearchConfig) -> core::result::Result<SearchState, SearchFailure> {
    search_from_seed(&PermutationTensor::cyclic(7), cfg, rng::derive_seed(seed, index as u64))
}

/// Certificate of a converged restart; `None` for permutation-like
/// solutions.
pub fn certify_u49(state: &SearchState) -> Result<Option<(BasisFamily, ComplexMatrix, U49Certificate)>> {
    let bases = state.polished_bases()?;
    if is_permutation_like(&bases, 1e-6) {
        return Ok(None);
    }
    let u = build_unitary(state.tensor(), &bases)?;
    let pattern = u49_amplitude_pattern();
    let mut dev = 0.0f64;
    for m in &bases.matrices()[1..] {
        for l in 0..7 {
            let mut amps: Vec<f64> = m.row(l).iter().map(|z| z.norm()).collect();
            amps.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
            for (x, y) in amps.iter().zip(&pattern) {
                dev = dev.max((x - y).abs());
            }
        }
    }
    let cert = U49Certificate {
        residual: state.residuals.max(),
        e_p: entangling_power(&u)?,
        invariant: local_invariant(&u, &PermQuadruple::klein())?,
        s2: s_alpha_unitary(&u, Alpha::Finite(2.0)),
        amplitude_deviation: dev,
    };
    Ok(Some((bases, u, cert)))
}

/// First restart that converges to a non-permutation solution.
pub fn u49_ansatz_search(seed: u64, restarts: usize) -> Result<U49Solution> {
    let cfg = u49_config();
    let mut best = f64::INFINITY;
    for r in 0..restarts {
        match u49_restart(seed, r, &cfg) {
            Ok(state) => {
                if let Some((bases, unitary, certificate)) = certify_u49(&state)? {
                    return Ok(U49Solution { restart: r, sweeps: state.iteration, bases, unitary, certificate });
                }
            }
            Err(f) => best = best.min(f.best.residuals.max()),
        }
    }
    Err(Error::SearchFailed { restarts, best_residual: best })
}
