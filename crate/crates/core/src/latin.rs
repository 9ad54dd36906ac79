//! Latin squares and hypercubes, finite-field constructions of mutually
//! orthogonal families, and the permutation tensors and unitaries they
//! induce.
//!
//! Symbols are stored 1-based (`1..=d`); arithmetic is done on 0-based
//! values and converted at the boundary.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bipartite::{digits, undigits};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE};

/// Arithmetic in GF(p^n). Elements are indices `0..q`; index `Σ c_i p^i`
/// is the polynomial `Σ c_i x^i` reduced modulo a fixed monic irreducible.
#[derive(Debug, Clone)]
pub struct GaloisField {
    q: usize,
    p: usize,
    modulus: Vec<usize>,
    add: Vec<usize>,
    mul: Vec<usize>,
}

fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|f| q.is_multiple_of(*f))?;
    let (mut rest, mut n) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        n += 1;
    }
    (rest == 1).then_some((p, n))
}

impl GaloisField {
    /// The field of order `q`. For `q = p^n` with `n > 1` the modulus is the
    /// smallest monic irreducible of degree `n` when coefficient vectors are
    /// read as base-`p` numbers: `x²+x+1` for 4, `x³+x+1` for 8, `x²+1` for 9.
    pub fn new(q: usize) -> Result<Self> {
        let (p, n) = prime_power(q).ok_or_else(|| Error::NoConstruction(format!("{q} is not a prime power")))?;
        for code in 0..q {
            let low = digits(code, &vec![p; n]).into_iter().rev().collect::<Vec<_>>();
            let mut modulus = low.clone();
            modulus.push(1);
            if let Some(field) = Self::try_build(q, p, n, modulus) {
                return Ok(field);
            }
        }
        Err(Error::NoConstruction(format!("no irreducible polynomial found for {q}")))
    }

    fn try_build(q: usize, p: usize, n: usize, modulus: Vec<usize>) -> Option<Self> {
        let coeffs = |x: usize| -> Vec<usize> { (0..n).map(|i| (x / p.pow(i as u32)) % p).collect() };
        let pack = |c: &[usize]| -> usize { c.iter().enumerate().map(|(i, &v)| v * p.pow(i as u32)).sum() };
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            let ca = coeffs(a);
            for b in 0..q {
                let cb = coeffs(b);
                let s: Vec<usize> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = pack(&s);
                let mut prod = vec![0usize; 2 * n];
                for (i, x) in ca.iter().enumerate() {
                    for (j, y) in cb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                for deg in (n..2 * n).rev() {
                    let c = prod[deg];
                    if c != 0 {
                        for (i, m) in modulus.iter().enumerate() {
                            let t = deg - n + i;
                            prod[t] = (prod[t] + p * p - (c * m) % p) % p;
                        }
                    }
                }
                mul[a * q + b] = pack(&prod[..n]);
            }
        }
        // a field has no zero divisors
        for a in 1..q {
            if (1..q).any(|b| mul[a * q + b] == 0) {
                return None;
            }
        }
        Some(Self { q, p, modulus, add, mul })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    /// Coefficients of the modulus, constant term first.
    pub fn modulus(&self) -> &[usize] {
        &self.modulus
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b]
    }

    pub fn pow(&self, a: usize, e: usize) -> usize {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }
}

/// A `d × d` Latin square with symbols `1..=d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    d: usize,
    cells: Vec<usize>,
}

fn is_line_complete(vals: impl Iterator<Item = usize>, d: usize) -> bool {
    let mut seen = vec![false; d];
    for v in vals {
        if v == 0 || v > d || seen[v - 1] {
            return false;
        }
        seen[v - 1] = true;
    }
    seen.iter().all(|&s| s)
}

impl LatinSquare {
    /// `cells` row-major, 1-based symbols.
    pub fn new(d: usize, cells: Vec<usize>) -> Result<Self> {
        if cells.len() != d * d {
            return Err(Error::Dimension(format!("{} cells for order {d}", cells.len())));
        }
        for r in 0..d {
            if !is_line_complete((0..d).map(|c| cells[r * d + c]), d) {
                return Err(Error::Structure(format!("row {r} is not a permutation of 1..{d}")));
            }
        }
        for c in 0..d {
            if !is_line_complete((0..d).map(|r| cells[r * d + c]), d) {
                return Err(Error::Structure(format!("column {c} is not a permutation of 1..{d}")));
            }
        }
        Ok(Self { d, cells })
    }

    pub fn from_rows(rows: &[&[usize]]) -> Result<Self> {
        Self::new(rows.len(), rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Symbol at row `i`, column `j` (0-based position, 1-based symbol).
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.d + j]
    }

    pub fn to_hypercube(&self) -> LatinHypercube {
        LatinHypercube { d: self.d, arity: 2, cells: self.cells.clone() }
    }
}

/// A Latin hypercube of dimension `arity`: every axis-parallel line holds
/// each symbol of `1..=d` exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinHypercube {
    d: usize,
    arity: usize,
    cells: Vec<usize>,
}

impl LatinHypercube {
    pub fn new(d: usize, arity: usize, cells: Vec<usize>) -> Result<Self> {
        if arity == 0 || cells.len() != d.pow(arity as u32) {
            return Err(Error::Dimension(format!("{} cells for order {d}, arity {arity}", cells.len())));
        }
        let dims = vec![d; arity];
        for axis in 0..arity {
            let stride = d.pow((arity - 1 - axis) as u32);
            for base in 0..cells.len() {
                if digits(base, &dims)[axis] != 0 {
                    continue;
                }
                if !is_line_complete((0..d).map(|t| cells[base + t * stride]), d) {
                    return Err(Error::Structure(format!("line along axis {axis} through {base} is incomplete")));
                }
            }
        }
        Ok(Self { d, arity, cells })
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Symbol at the 0-based coordinate tuple `x`.
    pub fn get(&self, x: &[usize]) -> usize {
        self.cells[undigits(x, &vec![self.d; self.arity])]
    }

    pub fn to_square(&self) -> Result<LatinSquare> {
        if self.arity != 2 {
            return Err(Error::Dimension(format!("arity {} is not a square", self.arity)));
        }
        LatinSquare::new(self.d, self.cells.clone())
    }
}

/// A 0/1 tensor with every single-index line summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationTensor {
    d: usize,
    arity: usize,
    entries: Vec<u8>,
}

impl PermutationTensor {
    pub fn new(d: usize, arity: usize, entries: Vec<u8>) -> Result<Self> {
        if arity < 2 || entries.len() != d.pow(arity as u32) {
            return Err(Error::Dimension(format!("{} entries for order {d}, arity {arity}", entries.len())));
        }
        if entries.iter().any(|&e| e > 1) {
            return Err(Error::Structure("entries must be 0 or 1".into()));
        }
        let dims = vec![d; arity];
        for axis in 0..arity {
            let stride = d.pow((arity - 1 - axis) as u32);
            for base in 0..entries.len() {
                if digits(base, &dims)[axis] != 0 {
                    continue;
                }
                let s: usize = (0..d).map(|t| entries[base + t * stride] as usize).sum();
                if s != 1 {
                    return Err(Error::Structure(format!("line along axis {axis} through {base} sums to {s}")));
                }
            }
        }
        Ok(Self { d, arity, entries })
    }

    /// `A_{klj} = δ_{k, (l+j) mod d}`.
    pub fn cyclic(d: usize) -> Self {
        let mut entries = vec![0u8; d * d * d];
        for l in 0..d {
            for j in 0..d {
                entries[((l + j) % d) * d * d + l * d + j] = 1;
            }
        }
        Self { d, arity: 3, entries }
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn get(&self, idx: &[usize]) -> u8 {
        self.entries[undigits(idx, &vec![self.d; self.arity])]
    }

    /// Three-index access `A_{klj}`.
    pub fn get3(&self, k: usize, l: usize, j: usize) -> u8 {
        self.entries[(k * self.d + l) * self.d + j]
    }

    /// For an arity-3 tensor, the unique `k` with `A_{klj} = 1`.
    pub fn first_index(&self, l: usize, j: usize) -> usize {
        (0..self.d).find(|&k| self.get3(k, l, j) == 1).expect("permutation tensor")
    }
}

/// `L_{ij} = (a·i + b·j mod d) + 1` over the cyclic group ℤ_d. Latin iff `a`, `b` are units mod `d`.
pub fn cyclic_square(d: usize, a: usize, b: usize) -> Result<LatinSquare> {
    LatinSquare::new(d, (0..d * d).map(|x| (a * (x / d) + b * (x % d)) % d + 1).collect())
}

/// `A_{ijk} = δ_{i, L_{jk}}`.
pub fn tensor_from_square(l: &LatinSquare) -> PermutationTensor {
    let d = l.order();
    let mut entries = vec![0u8; d * d * d];
    for j in 0..d {
        for k in 0..d {
            entries[(l.get(j, k) - 1) * d * d + j * d + k] = 1;
        }
    }
    PermutationTensor { d, arity: 3, entries }
}

pub fn square_from_tensor(a: &PermutationTensor) -> Result<LatinSquare> {
    if a.arity() != 3 {
        return Err(Error::Dimension(format!("arity {} tensor", a.arity())));
    }
    let d = a.order();
    let cells = (0..d * d).map(|x| a.first_index(x / d, x % d) + 1).collect();
    LatinSquare::new(d, cells)
}

/// `A_{i₁…i_m} = δ_{i₁, L(i₂,…,i_m)}` for a hypercube of arity `m−1`.
pub fn tensor_from_hypercube(l: &LatinHypercube) -> PermutationTensor {
    let d = l.order();
    let n = l.cells().len();
    let mut entries = vec![0u8; d * n];
    for (x, &s) in l.cells().iter().enumerate() {
        entries[(s - 1) * n + x] = 1;
    }
    PermutationTensor { d, arity: l.arity() + 1, entries }
}

fn square_pair_count(a: &[usize], b: &[usize], d: usize) -> usize {
    let mut seen = vec![false; d * d];
    for (&x, &y) in a.iter().zip(b) {
        seen[(x - 1) * d + (y - 1)] = true;
    }
    seen.iter().filter(|&&s| s).count()
}

pub fn are_orthogonal(l: &LatinSquare, m: &LatinSquare) -> Result<bool> {
    if l.order() != m.order() {
        return Err(Error::Dimension(format!("orders {} and {}", l.order(), m.order())));
    }
    let d = l.order();
    Ok(square_pair_count(l.cells(), m.cells(), d) == d * d)
}

/// `d − 1` pairwise orthogonal squares `L^(α)_{ij} = α·i + j` over GF(d).
pub fn mols(d: usize) -> Result<Vec<LatinSquare>> {
    match d {
        0 | 1 => return Err(Error::NoConstruction(format!("order {d} admits no orthogonal pair"))),
        2 => return Err(Error::NoConstruction("no two orthogonal Latin squares of order 2 exist".into())),
        6 => return Err(Error::NoConstruction("no two orthogonal Latin squares of order 6 exist".into())),
        _ => {}
    }
    if prime_power(d).is_none() {
        return Err(Error::NoConstruction(format!("order {d} is not a prime power")));
    }
    let f = GaloisField::new(d)?;
    Ok((1..d)
        .map(|alpha| {
            let cells = (0..d * d).map(|x| f.add(f.mul(alpha, x / d), x % d) + 1).collect();
            LatinSquare { d, cells }
        })
        .collect())
}

/// The `d² × d²` permutation `Σ |L_{lj}, M_{lj}⟩⟨l, j|`.
pub fn perm_2unitary_from_mols(l: &LatinSquare, m: &LatinSquare) -> Result<ComplexMatrix> {
    if !are_orthogonal(l, m)? {
        return Err(Error::Orthogonality("squares are not orthogonal".into()));
    }
    let d = l.order();
    let mut p = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            p[((l.get(a, b) - 1) * d + (m.get(a, b) - 1), a * d + b)] = ONE;
        }
    }
    Ok(p)
}

/// `how_many` hypercubes of the given arity from the linear forms
/// `L^(α)(x) = α·x₁ + x₂ + α²·x₃ + α³·x₄ + …` over GF(d), `α ≠ 0`.
pub fn latin_hypercubes(d: usize, arity: usize, how_many: usize) -> Result<Vec<LatinHypercube>> {
    if arity < 2 {
        return Err(Error::NoConstruction(format!("arity {arity} below 2")));
    }
    if d < 2 || prime_power(d).is_none() {
        return Err(Error::NoConstruction(format!("order {d} is not a prime power")));
    }
    let bound = (d + 2).saturating_sub(arity).min(d - 1);
    if how_many > bound {
        return Err(Error::NoConstruction(format!(
            "{how_many} orthogonal hypercubes of order {d}, arity {arity} requested, at most {bound} available"
        )));
    }
    let f = GaloisField::new(d)?;
    let dims = vec![d; arity];
    let cubes: Vec<LatinHypercube> = (1..=how_many)
        .map(|alpha| {
            let coeff: Vec<usize> = (0..arity)
                .map(|s| match s {
                    0 => alpha,
                    1 => 1,
                    _ => f.pow(alpha, s),
                })
                .collect();
            let cells = (0..d.pow(arity as u32))
                .map(|x| {
                    let xs = digits(x, &dims);
                    xs.iter().zip(&coeff).fold(0, |acc, (&xi, &c)| f.add(acc, f.mul(c, xi))) + 1
                })
                .collect();
            LatinHypercube { d, arity, cells }
        })
        .collect();
    for (i, a) in cubes.iter().enumerate() {
        for b in &cubes[i + 1..] {
            if !are_orthogonal_hypercubes(a, b)? {
                return Err(Error::NoConstruction(format!(
                    "linear-form family is not orthogonal for order {d}, arity {arity}, {how_many} cubes"
                )));
            }
        }
    }
    Ok(cubes)
}

/// Orthogonality in the subsquare sense: for every pair of axes and every
/// fixing of the remaining coordinates, the two induced squares are
/// orthogonal.
pub fn are_orthogonal_hypercubes(a: &LatinHypercube, b: &LatinHypercube) -> Result<bool> {
    if a.order() != b.order() || a.arity() != b.arity() {
        return Err(Error::Dimension(format!(
            "order/arity ({}, {}) vs ({}, {})",
            a.order(),
            a.arity(),
            b.order(),
            b.arity()
        )));
    }
    let (d, r) = (a.order(), a.arity());
    let dims = vec![d; r];
    for s in 0..r {
        for t in s + 1..r {
            let rest: Vec<usize> = (0..r).filter(|&x| x != s && x != t).collect();
            for fix in 0..d.pow(rest.len() as u32) {
                let fixed = digits(fix, &vec![d; rest.len()]);
                let mut xa = Vec::with_capacity(d * d);
                let mut xb = Vec::with_capacity(d * d);
                for u in 0..d {
                    for v in 0..d {
                        let mut x = vec![0; r];
                        for (&p, &val) in rest.iter().zip(&fixed) {
                            x[p] = val;
                        }
                        x[s] = u;
                        x[t] = v;
                        let flat = undigits(&x, &dims);
                        xa.push(a.cells()[flat]);
                        xb.push(b.cells()[flat]);
                    }
                }
                if square_pair_count(&xa, &xb, d) != d * d {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn check_family(cubes: &[LatinHypercube]) -> Result<(usize, usize)> {
    let first = cubes.first().ok_or_else(|| Error::Dimension("empty hypercube list".into()))?;
    let (d, r) = (first.order(), first.arity());
    if cubes.len() != r {
        return Err(Error::Dimension(format!("{} hypercubes of arity {r}", cubes.len())));
    }
    for (i, a) in cubes.iter().enumerate() {
        for b in &cubes[i + 1..] {
            if !are_orthogonal_hypercubes(a, b)? {
                return Err(Error::Orthogonality("hypercubes are not mutually orthogonal".into()));
            }
        }
    }
    Ok((d, r))
}

/// Images `x ↦ (L^(1)(x), …, L^(r)(x))` as flat 0-based indices.
fn word_map(cubes: &[LatinHypercube], d: usize, r: usize) -> Result<Vec<usize>> {
    let n = d.pow(r as u32);
    let dims = vec![d; r];
    let mut hit = vec![false; n];
    let mut img = Vec::with_capacity(n);
    for x in 0..n {
        let word: Vec<usize> = cubes.iter().map(|c| c.cells()[x] - 1).collect();
        let y = undigits(&word, &dims);
        if hit[y] {
            return Err(Error::Orthogonality("hypercube family does not define a permutation".into()));
        }
        hit[y] = true;
        img.push(y);
    }
    Ok(img)
}

/// `U = Σ_x |L^(1)(x) … L^(r)(x)⟩⟨x|` for `r` hypercubes of arity `r`.
pub fn multipartite_unitary_from_hypercubes(cubes: &[LatinHypercube]) -> Result<ComplexMatrix> {
    let (d, r) = check_family(cubes)?;
    let img = word_map(cubes, d, r)?;
    let n = img.len();
    let mut u = ComplexMatrix::zeros(n, n);
    for (x, &y) in img.iter().enumerate() {
        u[(y, x)] = ONE;
    }
    Ok(u)
}

/// Swap the coordinate and symbol halves of the orthogonal array
/// `{(x, L(x))}`: returns `M^(k)` with `M^(k)(L(x)) = x_k`, so the unitary
/// rebuilt from the outputs is the transpose of the original.
pub fn oa_transform(cubes: &[LatinHypercube]) -> Result<Vec<LatinHypercube>> {
    let (d, r) = check_family(cubes)?;
    let img = word_map(cubes, d, r)?;
    let dims = vec![d; r];
    let mut out = vec![vec![0usize; img.len()]; r];
    for (x, &y) in img.iter().enumerate() {
        for (k, xk) in digits(x, &dims).into_iter().enumerate() {
            out[k][y] = xk + 1;
        }
    }
    out.into_iter()
        .map(|cells| {
            LatinHypercube::new(d, r, cells).map_err(|_| Error::Orthogonality("transformed array is not Latin".into()))
        })
        .collect()
}

/// Rows `(x, L(x))` of the orthogonal array behind a hypercube family,
/// 0-based.
pub fn orthogonal_array(cubes: &[LatinHypercube]) -> Result<Vec<Vec<usize>>> {
    let (d, r) = check_family(cubes)?;
    let dims = vec![d; r];
    Ok((0..d.pow(r as u32))
        .map(|x| {
            let mut w = digits(x, &dims);
            w.extend(cubes.iter().map(|c| c.cells()[x] - 1));
            w
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(rows: &[&[usize]]) -> LatinSquare {
        LatinSquare::from_rows(rows).unwrap()
    }

    #[test]
    fn field_moduli_and_axioms() {
        assert_eq!(GaloisField::new(4).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(GaloisField::new(8).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(GaloisField::new(9).unwrap().modulus(), &[1, 0, 1]);
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = GaloisField::new(q).unwrap();
            for a in 0..q {
                assert!((0..q).any(|b| f.add(a, b) == 0));
                if a != 0 {
                    assert!((0..q).any(|b| f.mul(a, b) == 1));
                }
                for b in 0..q {
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
        assert!(GaloisField::new(6).is_err());
    }

    #[test]
    fn mols_pairs_are_orthogonal() {
        for d in [3, 4, 5, 7, 8, 9] {
            let s = mols(d).unwrap();
            assert_eq!(s.len(), d - 1);
            for i in 0..s.len() {
                assert!(!are_orthogonal(&s[i], &s[i]).unwrap());
                for j in i + 1..s.len() {
                    assert!(are_orthogonal(&s[i], &s[j]).unwrap(), "d={d} pair {i},{j}");
                }
            }
        }
    }

    #[test]
    fn mols_errors() {
        for d in [1, 2, 6, 10, 12] {
            assert!(matches!(mols(d), Err(Error::NoConstruction(_))), "d={d}");
        }
    }

    #[test]
    fn order_three_pair_matches_the_reference_squares() {
        let l = sq(&[&[1, 2, 3], &[3, 1, 2], &[2, 3, 1]]);
        let m = sq(&[&[1, 2, 3], &[2, 3, 1], &[3, 1, 2]]);
        assert!(are_orthogonal(&l, &m).unwrap());
        let ours = mols(3).unwrap();
        assert_eq!(ours[0], m);
        assert_eq!(ours[1], l);
    }

    #[test]
    fn order_four_pair_matches_gf4_cell_for_cell() {
        let l = sq(&[&[1, 2, 3, 4], &[2, 1, 4, 3], &[3, 4, 1, 2], &[4, 3, 2, 1]]);
        let m = sq(&[&[1, 2, 3, 4], &[3, 4, 1, 2], &[4, 3, 2, 1], &[2, 1, 4, 3]]);
        assert!(are_orthogonal(&l, &m).unwrap());
        let ours = mols(4).unwrap();
        assert_eq!(ours[0], l);
        assert_eq!(ours[1], m);
    }

    #[test]
    fn square_tensor_round_trip() {
        for d in [3, 4, 5] {
            for s in mols(d).unwrap() {
                let t = tensor_from_square(&s);
                assert_eq!(square_from_tensor(&t).unwrap(), s);
                assert!(PermutationTensor::new(d, 3, t.entries().to_vec()).is_ok());
            }
            let shift = LatinSquare::new(d, (0..d * d).map(|x| (x / d + x % d) % d + 1).collect()).unwrap();
            assert_eq!(tensor_from_square(&shift), PermutationTensor::cyclic(d));
        }
    }

    #[test]
    fn reference_tensor_layers_for_order_three() {
        let l = sq(&[&[1, 2, 3], &[3, 1, 2], &[2, 3, 1]]);
        let a = tensor_from_square(&l);
        // layer i lists the (j, k) positions where L_{jk} = i
        let layer0: Vec<u8> = (0..9).map(|x| a.get3(0, x / 3, x % 3)).collect();
        assert_eq!(layer0, vec![1, 0, 0, 0, 1, 0, 0, 0, 1]);
    }

    #[test]
    fn invalid_squares_rejected() {
        assert!(LatinSquare::new(2, vec![1, 1, 2, 2]).is_err());
        assert!(LatinSquare::new(2, vec![1, 2, 2]).is_err());
        let a = mols(3).unwrap();
        assert!(are_orthogonal(&a[0], &mols(4).unwrap()[0]).is_err());
        assert!(matches!(perm_2unitary_from_mols(&a[0], &a[0]), Err(Error::Orthogonality(_))));
    }

    #[test]
    fn mols_permutation_shape() {
        for d in [3, 4, 5, 7] {
            let s = mols(d).unwrap();
            let p = perm_2unitary_from_mols(&s[0], &s[1]).unwrap();
            assert!(p.is_permutation());
        }
    }

    #[test]
    fn hypercube_families() {
        let cubes = latin_hypercubes(4, 3, 3).unwrap();
        assert_eq!(cubes.len(), 3);
        for c in &cubes {
            assert!(LatinHypercube::new(4, 3, c.cells().to_vec()).is_ok());
            assert!(!are_orthogonal_hypercubes(c, c).unwrap());
        }
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(are_orthogonal_hypercubes(&cubes[i], &cubes[j]).unwrap());
            }
        }
        assert!(matches!(latin_hypercubes(3, 3, 3), Err(Error::NoConstruction(_))));
        let u = multipartite_unitary_from_hypercubes(&cubes).unwrap();
        assert_eq!(u.rows(), 64);
        assert!(u.is_permutation());
    }

    #[test]
    fn relabeled_cube_is_not_orthogonal_to_itself() {
        let c = &latin_hypercubes(4, 3, 1).unwrap()[0];
        let relabeled: Vec<usize> = c.cells().iter().map(|&s| s % 4 + 1).collect();
        let r = LatinHypercube::new(4, 3, relabeled).unwrap();
        assert!(!are_orthogonal_hypercubes(c, &r).unwrap());
    }

    #[test]
    fn squares_reduce_to_mols_unitary() {
        let s = mols(5).unwrap();
        let pair = [s[0].to_hypercube(), s[1].to_hypercube()];
        assert_eq!(
            multipartite_unitary_from_hypercubes(&pair).unwrap(),
            perm_2unitary_from_mols(&s[0], &s[1]).unwrap()
        );
    }

    fn min_distance(rows: &[Vec<usize>]) -> usize {
        let mut best = usize::MAX;
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                best = best.min(rows[i].iter().zip(&rows[j]).filter(|(a, b)| a != b).count());
            }
        }
        best
    }

    #[test]
    fn oa_transform_properties() {
        let s = mols(3).unwrap();
        let pair = vec![s[1].to_hypercube(), s[0].to_hypercube()];
        let t = oa_transform(&pair).unwrap();
        assert!(are_orthogonal_hypercubes(&t[0], &t[1]).unwrap());
        let u = multipartite_unitary_from_hypercubes(&pair).unwrap();
        assert_eq!(multipartite_unitary_from_hypercubes(&t).unwrap(), u.transpose());
        let mut a = orthogonal_array(&pair).unwrap();
        let mut b: Vec<Vec<usize>> = orthogonal_array(&t)
            .unwrap()
            .into_iter()
            .map(|w| {
                let (x, y) = w.split_at(2);
                let mut v = y.to_vec();
                v.extend_from_slice(x);
                v
            })
            .collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);

        for (d, r) in [(3, 2), (4, 2), (4, 3)] {
            let cubes = latin_hypercubes(d, r, r).unwrap();
            let t = oa_transform(&cubes).unwrap();
            for i in 0..r {
                for j in i + 1..r {
                    assert!(are_orthogonal_hypercubes(&t[i], &t[j]).unwrap());
                }
            }
            assert_eq!(min_distance(&orthogonal_array(&cubes).unwrap()), r + 1);
            assert_eq!(min_distance(&orthogonal_array(&t).unwrap()), r + 1);
        }
    }
}
