//! Local-unitary invariants
//! `I_{σ,τ,ρ,λ}(U) = Π_a U^{i_a j_a}_{k_a l_a} · Ū^{i_{σ(a)} j_{τ(a)}}_{k_{ρ(a)} l_{λ(a)}}`,
//! summed over all indices, with `U^{ij}_{kl} = ⟨ij|U|kl⟩`.
//!
//! The sum is evaluated as a tensor network: `2n` four-leg tensors are
//! contracted pairwise in a greedy order (smallest intermediate first).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

#[allow(unused_imports)]
use num_traits::Float;

use crate::bipartite::local_dim;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// Largest intermediate tensor (in entries) the contractor will allocate.
pub const DEFAULT_BUDGET: usize = 1 << 24;

/// Four permutations of `{0,…,n−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermQuadruple {
    n: usize,
    perms: [Vec<usize>; 4],
}

fn is_bijection(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !core::mem::replace(&mut seen[x], true))
}

/// Parses one permutation in 1-based cycle notation, e.g. `(12)(34)`,
/// `(1 3)(2 4)` or `id`.
pub fn parse_cycles(s: &str, n: usize) -> Result<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let t = s.trim();
    if t.is_empty() || t == "id" || t == "e" || t == "()" {
        return Ok(p);
    }
    let mut rest = t;
    while !rest.is_empty() {
        let body_start = rest.find('(').ok_or_else(|| Error::Parse(format!("expected '(' in {s:?}")))?;
        if !rest[..body_start].trim().is_empty() {
            return Err(Error::Parse(format!("unexpected text in {s:?}")));
        }
        let close = rest.find(')').ok_or_else(|| Error::Parse(format!("unclosed cycle in {s:?}")))?;
        let body = &rest[body_start + 1..close];
        let elems: Vec<usize> = if body.contains(|c: char| c.is_whitespace() || c == ',') {
            body.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<usize>().map_err(|_| Error::Parse(format!("bad element {x:?}"))))
                .collect::<Result<_>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(10).map(|v| v as usize).ok_or_else(|| Error::Parse(format!("bad element {c:?}"))))
                .collect::<Result<_>>()?
        };
        for &e in &elems {
            if e == 0 || e > n {
                return Err(Error::Parse(format!("element {e} outside 1..{n}")));
            }
        }
        let mut seen = vec![false; n];
        for &e in &elems {
            if core::mem::replace(&mut seen[e - 1], true) {
                return Err(Error::Parse(format!("repeated element {e} in cycle")));
            }
        }
        // cycles compose right to left; a single cycle maps each element to its successor
        let mut cyc: Vec<usize> = (0..n).collect();
        for w in 0..elems.len() {
            cyc[elems[w] - 1] = elems[(w + 1) % elems.len()] - 1;
        }
        p = p.iter().map(|&x| cyc[x]).collect();
        rest = rest[close + 1..].trim_start();
    }
    Ok(p)
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl PermQuadruple {
    pub fn new(perms: [Vec<usize>; 4]) -> Result<Self> {
        let n = perms[0].len();
        if perms.iter().any(|p| p.len() != n || !is_bijection(p)) {
            return Err(Error::Structure("quadruple components must be bijections of one set".into()));
        }
        Ok(Self { n, perms })
    }

    pub fn identity(n: usize) -> Self {
        let id: Vec<usize> = (0..n).collect();
        Self { n, perms: [id.clone(), id.clone(), id.clone(), id] }
    }

    /// `(id, (12)(34), (13)(24), (14)(23))`.
    pub fn klein() -> Self {
        Self::parse("id,(12)(34),(13)(24),(14)(23)", Some(4)).expect("static quadruple")
    }

    /// Four comma-separated permutations in cycle notation. Without `n` the
    /// order is the largest element mentioned (at least 1).
    pub fn parse(s: &str, n: Option<usize>) -> Result<Self> {
        let parts = split_top_level(s);
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected 4 permutations, found {}", parts.len())));
        }
        let n = match n {
            Some(n) => n,
            None => s.chars().filter_map(|c| c.to_digit(10)).map(|v| v as usize).max().unwrap_or(1).max(1),
        };
        let p: Vec<Vec<usize>> = parts.iter().map(|x| parse_cycles(x, n)).collect::<Result<_>>()?;
        Self::new([p[0].clone(), p[1].clone(), p[2].clone(), p[3].clone()])
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn perms(&self) -> &[Vec<usize>; 4] {
        &self.perms
    }

    /// Cycle notation, 1-based.
    pub fn to_cycle_string(&self) -> String {
        let mut out = String::new();
        for (w, p) in self.perms.iter().enumerate() {
            if w > 0 {
                out.push(',');
            }
            let mut seen = vec![false; self.n];
            let mut any = false;
            for s in 0..self.n {
                if seen[s] || p[s] == s {
                    continue;
                }
                any = true;
                out.push('(');
                let mut x = s;
                let mut first = true;
                while !seen[x] {
                    seen[x] = true;
                    if !first && self.n > 9 {
                        out.push(' ');
                    }
                    out.push_str(&format!("{}", x + 1));
                    first = false;
                    x = p[x];
                }
                out.push(')');
            }
            if !any {
                out.push_str("id");
            }
        }
        out
    }
}

/// Scalar ring for the contractor.
pub trait Scalar: Copy + Add<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn conjugate(self) -> Self;
}

impl Scalar for C64 {
    fn zero() -> Self {
        ZERO
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn conjugate(self) -> Self {
        self
    }
}

/// A dense tensor whose legs carry integer labels; row-major in leg order.
#[derive(Debug, Clone)]
pub struct LabeledTensor<T> {
    labels: Vec<usize>,
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> LabeledTensor<T> {
    pub fn new(labels: Vec<usize>, dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if labels.len() != dims.len() || dims.iter().product::<usize>() != data.len() {
            return Err(Error::Dimension("tensor shape does not match data".into()));
        }
        Ok(Self { labels, dims, data })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Scalar value of a tensor with no legs.
    pub fn scalar(&self) -> Option<T> {
        (self.labels.is_empty()).then(|| self.data[0])
    }

    fn permuted(&self, order: &[usize]) -> Vec<T> {
        let r = self.dims.len();
        let mut strides = vec![1usize; r];
        for a in (0..r.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.dims[a + 1];
        }
        let new_dims: Vec<usize> = order.iter().map(|&a| self.dims[a]).collect();
        let new_strides: Vec<usize> = order.iter().map(|&a| strides[a]).collect();
        let mut out = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; r];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            out.push(self.data[src]);
            for a in (0..r).rev() {
                idx[a] += 1;
                src += new_strides[a];
                if idx[a] < new_dims[a] {
                    break;
                }
                src -= new_strides[a] * new_dims[a];
                idx[a] = 0;
            }
        }
        out
    }
}

fn shared_and_result<T>(a: &LabeledTensor<T>, b: &LabeledTensor<T>) -> (Vec<usize>, usize, usize) {
    let shared: Vec<usize> = a.labels.iter().copied().filter(|l| b.labels.contains(l)).collect();
    let sdim: usize = shared.iter().map(|l| a.dims[a.labels.iter().position(|x| x == l).unwrap()]).product();
    let out = a.data.len() / sdim * (b.data.len() / sdim);
    (shared, sdim, out)
}

/// Sums over every label the two tensors share.
pub fn contract_pair<T: Scalar>(a: &LabeledTensor<T>, b: &LabeledTensor<T>) -> LabeledTensor<T> {
    let (shared, s, _) = shared_and_result(a, b);
    let a_free: Vec<usize> = (0..a.labels.len()).filter(|&x| !shared.contains(&a.labels[x])).collect();
    let b_free: Vec<usize> = (0..b.labels.len()).filter(|&x| !shared.contains(&b.labels[x])).collect();
    let a_sh: Vec<usize> = shared.iter().map(|l| a.labels.iter().position(|x| x == l).unwrap()).collect();
    let b_sh: Vec<usize> = shared.iter().map(|l| b.labels.iter().position(|x| x == l).unwrap()).collect();
    let am: Vec<usize> = a_free.iter().chain(&a_sh).copied().collect();
    let bm: Vec<usize> = b_sh.iter().chain(&b_free).copied().collect();
    let ad = a.permuted(&am);
    let bd = b.permuted(&bm);
    let m = a.data.len() / s;
    let n = b.data.len() / s;
    let mut out = vec![T::zero(); m * n];
    for r in 0..m {
        let arow = &ad[r * s..(r + 1) * s];
        let orow = &mut out[r * n..(r + 1) * n];
        for (t, &x) in arow.iter().enumerate() {
            let brow = &bd[t * n..(t + 1) * n];
            for (o, &y) in orow.iter_mut().zip(brow) {
                *o = *o + x * y;
            }
        }
    }
    let labels = a_free.iter().map(|&x| a.labels[x]).chain(b_free.iter().map(|&x| b.labels[x])).collect();
    let dims = a_free.iter().map(|&x| a.dims[x]).chain(b_free.iter().map(|&x| b.dims[x])).collect();
    LabeledTensor { labels, dims, data: out }
}

/// Contracts a closed network (every label on exactly two legs) to a
/// scalar, greedily choosing the pair with the smallest result.
pub fn contract_network<T: Scalar>(mut tensors: Vec<LabeledTensor<T>>, budget: usize) -> Result<T> {
    if tensors.is_empty() {
        return Err(Error::Dimension("empty network".into()));
    }
    while tensors.len() > 1 {
        let mut best: Option<(bool, usize, usize, usize, usize)> = None;
        for x in 0..tensors.len() {
            for y in x + 1..tensors.len() {
                let (shared, sdim, out) = shared_and_result(&tensors[x], &tensors[y]);
                let cost = out * sdim;
                let key = (shared.is_empty(), out, cost, x, y);
                if best.is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                    best = Some(key);
                }
            }
        }
        let (_, out, _, x, y) = best.expect("at least two tensors");
        if out > budget {
            return Err(Error::Budget { needed: out, budget });
        }
        let b = tensors.swap_remove(y);
        let a = tensors.swap_remove(x);
        tensors.push(contract_pair(&a, &b));
    }
    let last = tensors.pop().unwrap();
    last.scalar().ok_or_else(|| Error::Structure("network has open legs".into()))
}

fn network<T: Scalar>(entries: &[T], d: usize, q: &PermQuadruple) -> Vec<LabeledTensor<T>> {
    let n = q.order();
    let [s, t, r, l] = q.perms();
    let conj: Vec<T> = entries.iter().map(|x| x.conjugate()).collect();
    let dims = vec![d; 4];
    let mut out = Vec::with_capacity(2 * n);
    for a in 0..n {
        out.push(LabeledTensor { labels: vec![a, n + a, 2 * n + a, 3 * n + a], dims: dims.clone(), data: entries.to_vec() });
        out.push(LabeledTensor {
            labels: vec![s[a], n + t[a], 2 * n + r[a], 3 * n + l[a]],
            dims: dims.clone(),
            data: conj.clone(),
        });
    }
    out
}

fn dim_of(u: &ComplexMatrix) -> Result<usize> {
    if !u.is_square() {
        return Err(Error::Dimension(format!("{}x{} gate", u.rows(), u.cols())));
    }
    local_dim(u.rows()).ok_or_else(|| Error::Dimension(format!("{} is not a perfect square", u.rows())))
}

pub fn local_invariant_with_budget(u: &ComplexMatrix, q: &PermQuadruple, budget: usize) -> Result<C64> {
    let d = dim_of(u)?;
    contract_network(network(u.data(), d, q), budget)
}

/// `I_{σ,τ,ρ,λ}(U)` in floating point.
pub fn local_invariant(u: &ComplexMatrix, q: &PermQuadruple) -> Result<C64> {
    local_invariant_with_budget(u, q, DEFAULT_BUDGET)
}

/// Exact value in integer arithmetic when every entry of `U` is an integer
/// (e.g. a permutation); `None` otherwise.
pub fn local_invariant_exact(u: &ComplexMatrix, q: &PermQuadruple) -> Result<Option<i64>> {
    let d = dim_of(u)?;
    let mut ints = Vec::with_capacity(u.data().len());
    for x in u.data() {
        if x.im != 0.0 || x.re.fract() != 0.0 || x.re.abs() > 1e6 {
            return Ok(None);
        }
        ints.push(x.re as i64);
    }
    if let Some(f) = permutation_map(&ints, d * d) {
        return Ok(Some(permutation_count(&f, d, q)));
    }
    contract_network(network(&ints, d, q), DEFAULT_BUDGET).map(Some)
}

/// Column `c` of a 0/1 permutation matrix maps to row `f[c]`.
fn permutation_map(ints: &[i64], n: usize) -> Option<Vec<usize>> {
    let mut f = vec![usize::MAX; n];
    let mut row_hit = vec![false; n];
    for r in 0..n {
        for c in 0..n {
            match ints[r * n + c] {
                0 => {}
                1 if f[c] == usize::MAX && !row_hit[r] => {
                    f[c] = r;
                    row_hit[r] = true;
                }
                _ => return None,
            }
        }
    }
    f.iter().all(|&r| r != usize::MAX).then_some(f)
}

/// For a permutation gate the unconjugated factors pin `(i_a, j_a) = f(k_a, l_a)`,
/// so the invariant counts input tuples `(k_a, l_a)` that satisfy every conjugated
/// factor. Constraints are checked as soon as all their slots are assigned.
fn permutation_count(f: &[usize], d: usize, q: &PermQuadruple) -> i64 {
    let n = q.order();
    let [s, t, r, l] = q.perms();
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n];
    for b in 0..n {
        let last = b.max(s[b]).max(t[b]).max(r[b]).max(l[b]);
        ready[last].push(b);
    }
    let ctx = PermCount { f, d, s, t, r, l, ready: &ready };
    let mut x = vec![0usize; n];
    ctx.recurse(0, &mut x)
}

struct PermCount<'a> {
    f: &'a [usize],
    d: usize,
    s: &'a [usize],
    t: &'a [usize],
    r: &'a [usize],
    l: &'a [usize],
    ready: &'a [Vec<usize>],
}

impl PermCount<'_> {
    fn holds(&self, b: usize, x: &[usize]) -> bool {
        let d = self.d;
        let out_i = self.f[x[self.s[b]]] / d;
        let out_j = self.f[x[self.t[b]]] % d;
        let input = (x[self.r[b]] / d) * d + x[self.l[b]] % d;
        self.f[input] == out_i * d + out_j
    }

    fn recurse(&self, depth: usize, x: &mut [usize]) -> i64 {
        if depth == x.len() {
            return 1;
        }
        let mut total = 0;
        for v in 0..self.d * self.d {
            x[depth] = v;
            if self.ready[depth].iter().all(|&b| self.holds(b, x)) {
                total += self.recurse(depth + 1, x);
            }
        }
        total
    }
}

/// Plain nested summation over all `4n` indices; only usable for tiny `d^{4n}`.
pub fn local_invariant_brute_force(u: &ComplexMatrix, q: &PermQuadruple) -> Result<C64> {
    let d = dim_of(u)?;
    let n = q.order();
    let [s, t, r, l] = q.perms();
    let total = d.pow((4 * n) as u32);
    let idx = |i: usize, j: usize, k: usize, l: usize| (i * d + j) * d * d + k * d + l;
    let mut acc = ZERO;
    let mut v = vec![0usize; 4 * n];
    for flat in 0..total {
        let mut x = flat;
        for slot in v.iter_mut().rev() {
            *slot = x % d;
            x /= d;
        }
        let mut term = C64::new(1.0, 0.0);
        for a in 0..n {
            term *= u.data()[idx(v[a], v[n + a], v[2 * n + a], v[3 * n + a])];
            term *= u.data()[idx(v[s[a]], v[n + t[a]], v[2 * n + r[a]], v[3 * n + l[a]])].conj();
        }
        acc += term;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::{mols, perm_2unitary_from_mols};
    use crate::linalg::haar_unitary;
    use crate::rng;

    #[test]
    fn parsing() {
        let q = PermQuadruple::klein();
        assert_eq!(q.perms()[0], vec![0, 1, 2, 3]);
        assert_eq!(q.perms()[1], vec![1, 0, 3, 2]);
        assert_eq!(q.perms()[2], vec![2, 3, 0, 1]);
        assert_eq!(q.perms()[3], vec![3, 2, 1, 0]);
        assert_eq!(q.to_cycle_string(), "id,(12)(34),(13)(24),(14)(23)");
        assert_eq!(parse_cycles("(1 2 3)", 3).unwrap(), vec![1, 2, 0]);
        assert_eq!(parse_cycles("(123)", 3).unwrap(), vec![1, 2, 0]);
        assert!(PermQuadruple::parse("id,(12)", None).is_err());
        assert!(parse_cycles("(15)", 4).is_err());
        assert!(parse_cycles("(11)", 4).is_err());
        assert!(PermQuadruple::new([vec![0, 0], vec![0, 1], vec![0, 1], vec![0, 1]]).is_err());
    }

    #[test]
    fn permutation_count_matches_contraction() {
        let sq = mols(3).unwrap();
        let p = perm_2unitary_from_mols(&sq[0], &sq[1]).unwrap();
        for s in ["id,(12)(34),(13)(24),(14)(23)", "id,(12),(12),(12)", "(12),(23),(13),id", "id,(1234),(13)(24),(1432)"] {
            let q = PermQuadruple::parse(s, None).unwrap();
            let exact = local_invariant_exact(&p, &q).unwrap().unwrap();
            let float = local_invariant(&p, &q).unwrap();
            assert!((float.re - exact as f64).abs() < 1e-9 && float.im.abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn order_nine_permutations_separate() {
        use crate::latin::cyclic_square;
        let gf = mols(9).unwrap();
        let a = perm_2unitary_from_mols(&gf[0], &gf[1]).unwrap();
        let b = perm_2unitary_from_mols(&cyclic_square(9, 1, 1).unwrap(), &cyclic_square(9, 1, 2).unwrap()).unwrap();
        let q = PermQuadruple::parse("id,(1234),(13)(24),(1432)", None).unwrap();
        assert_eq!(local_invariant_exact(&a, &q).unwrap(), Some(6561));
        assert_eq!(local_invariant_exact(&b, &q).unwrap(), Some(729));
        let k = PermQuadruple::klein();
        assert_eq!(local_invariant_exact(&a, &k).unwrap(), Some(81));
        assert_eq!(local_invariant_exact(&b, &k).unwrap(), Some(81));
    }

    #[test]
    fn identity_quadruple_is_d_to_the_eighth() {
        let mut r = rng::stream(1, 0);
        for d in [2, 3] {
            let u = haar_unitary(d * d, &mut r);
            let v = local_invariant(&u, &PermQuadruple::identity(4)).unwrap();
            assert!((v.re - ((d * d) as f64).powi(4)).abs() < 1e-8);
            assert!(v.im.abs() < 1e-8);
        }
    }

    #[test]
    fn brute_force_agreement_small() {
        let mut r = rng::stream(2, 0);
        let u = haar_unitary(4, &mut r);
        for q in [
            PermQuadruple::klein(),
            PermQuadruple::identity(4),
            PermQuadruple::parse("(12),(23),id,(13)", Some(3)).unwrap(),
            PermQuadruple::parse("(12),id,(12),id", Some(2)).unwrap(),
        ] {
            let a = local_invariant(&u, &q).unwrap();
            let b = local_invariant_brute_force(&u, &q).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn permutation_value_is_exact() {
        let s = mols(3).unwrap();
        let p9 = perm_2unitary_from_mols(&s[0], &s[1]).unwrap();
        let exact = local_invariant_exact(&p9, &PermQuadruple::klein()).unwrap().unwrap();
        let float = local_invariant(&p9, &PermQuadruple::klein()).unwrap();
        assert_eq!(exact as f64, float.re);
        assert_eq!(exact, 9);
        let s7 = mols(7).unwrap();
        let p49 = perm_2unitary_from_mols(&s7[0], &s7[1]).unwrap();
        assert_eq!(local_invariant_exact(&p49, &PermQuadruple::klein()).unwrap(), Some(49));
        let mut r = rng::stream(3, 0);
        assert_eq!(local_invariant_exact(&haar_unitary(9, &mut r), &PermQuadruple::klein()).unwrap(), None);
    }

    #[test]
    fn local_rotation_invariance_and_conjugation() {
        let mut r = rng::stream(4, 0);
        let d = 3;
        let u = haar_unitary(d * d, &mut r);
        let q = PermQuadruple::klein();
        let a = local_invariant(&u, &q).unwrap();
        let pre = haar_unitary(d, &mut r).kron(&haar_unitary(d, &mut r));
        let post = haar_unitary(d, &mut r).kron(&haar_unitary(d, &mut r));
        let b = local_invariant(&pre.matmul(&u).matmul(&post), &q).unwrap();
        assert!((a - b).norm() < 1e-8);
        let c = local_invariant(&u.conj(), &q).unwrap();
        assert!((c - a.conj()).norm() < 1e-8);
    }

    #[test]
    fn budget_is_enforced() {
        let u = ComplexMatrix::identity(16);
        assert!(matches!(
            local_invariant_with_budget(&u, &PermQuadruple::klein(), 10),
            Err(Error::Budget { .. })
        ));
    }
}
