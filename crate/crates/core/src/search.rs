//! Alternating polar-decomposition search for 2-unitary coherifications.
//!
//! For an arity-3 permutation tensor `A` and vectors `a_{k,l}` three
//! families of `d × d` matrices must be unitary at once:
//!
//! * `V_k`: rows `a_{k,l}` over `l`,
//! * `V′_j`: rows `a_{k,l(k,j)}` over `k`, where `A_{k,l(k,j),j} = 1`,
//! * `V″_l`: rows `a_{k(l,j),l}` over `j`.
//!
//! A sweep replaces each family by its polar factors in the order
//! `V → V′ → V″` and writes the rows back.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

#[allow(unused_imports)]
use num_traits::Float;

use crate::coherify::{build_unitary, third_index, BasisFamily};
use crate::error::{Error, Result};
use crate::latin::PermutationTensor;
use crate::linalg::{haar_unitary, polar_factor, ComplexMatrix, C64};
use crate::rng;

/// Default convergence threshold on the largest unitarity residual.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default sweep budget of one run.
pub const DEFAULT_MAX_SWEEPS: usize = 20_000;
/// A run is reseeded when its best residual improves by less than
/// `STALL_EPS` over `STALL_WINDOW` sweeps.
pub const STALL_WINDOW: usize = 50;
pub const STALL_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    None,
    /// `|⟨i|a_{k,l}⟩|² = |⟨i⊕n|a_{k,l⊕n}⟩|²` and `V_0 = I`.
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub constraint: Constraint,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { constraint: Constraint::None, tol: DEFAULT_TOL, max_sweeps: DEFAULT_MAX_SWEEPS }
    }
}

/// Sup-norm deviations from unitarity of the three families.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub v: f64,
    pub v_prime: f64,
    pub v_second: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.v.max(self.v_prime).max(self.v_second)
    }
}

#[derive(Debug, Clone)]
pub struct SearchState {
    a: PermutationTensor,
    v: Vec<ComplexMatrix>,
    /// `l(k,j)` and `k(l,j)` lookups.
    l_of: Vec<usize>,
    k_of: Vec<usize>,
    pub residuals: Residuals,
    pub iteration: usize,
    pub history: Vec<f64>,
    pub reseeds: usize,
}

impl SearchState {
    pub fn new(a: &PermutationTensor, bases: &BasisFamily) -> Result<Self> {
        let d = bases.dim();
        if a.arity() != 3 || a.order() != d {
            return Err(Error::Dimension(format!(
                "tensor of order {} and arity {} with bases of dimension {d}",
                a.order(),
                a.arity()
            )));
        }
        let mut l_of = vec![0; d * d];
        let mut k_of = vec![0; d * d];
        for k in 0..d {
            for l in 0..d {
                let j = third_index(a, k, l);
                l_of[k * d + j] = l;
                k_of[l * d + j] = k;
            }
        }
        let mut s = SearchState {
            a: a.clone(),
            v: bases.matrices().to_vec(),
            l_of,
            k_of,
            residuals: Residuals::default(),
            iteration: 0,
            history: Vec::new(),
            reseeds: 0,
        };
        s.residuals = residuals(&s);
        Ok(s)
    }

    /// Haar-random starting bases.
    pub fn random(a: &PermutationTensor, seed: u64) -> Result<Self> {
        let mut r = rng::stream(seed, 0);
        let v = (0..a.order()).map(|_| haar_unitary(a.order(), &mut r)).collect();
        Self::new(a, &BasisFamily::from_raw(v))
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn tensor(&self) -> &PermutationTensor {
        &self.a
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.v
    }

    /// Current vectors, without any orthonormality check.
    pub fn bases(&self) -> BasisFamily {
        BasisFamily::from_raw(self.v.clone())
    }

    /// Bases after a final `V` polar step, so each `V_k` is unitary to
    /// machine precision.
    pub fn polished_bases(&self) -> Result<BasisFamily> {
        let mut v = Vec::with_capacity(self.v.len());
        for (k, m) in self.v.iter().enumerate() {
            v.push(polar(m, "V", k)?);
        }
        BasisFamily::new(v)
    }

    pub fn unitary(&self) -> Result<ComplexMatrix> {
        build_unitary(&self.a, &self.polished_bases()?)
    }

    fn l_of(&self, k: usize, j: usize) -> usize {
        self.l_of[k * self.dim() + j]
    }

    fn k_of(&self, l: usize, j: usize) -> usize {
        self.k_of[l * self.dim() + j]
    }
}

fn polar(m: &ComplexMatrix, family: &str, index: usize) -> Result<ComplexMatrix> {
    polar_factor(m).map_err(|e| match e {
        Error::Singular { sigma_min } => Error::SingularFamily { family: String::from(family), index, sigma_min },
        other => other,
    })
}

/// `V′_j` for every `j`, rows indexed by `k`.
pub fn assemble_vprime(state: &SearchState) -> Vec<ComplexMatrix> {
    let d = state.dim();
    (0..d)
        .map(|j| ComplexMatrix::from_fn(d, d, |k, i| state.v[k][(state.l_of(k, j), i)]))
        .collect()
}

/// `V″_l` for every `l`, rows indexed by `j`.
pub fn assemble_vsecond(state: &SearchState) -> Vec<ComplexMatrix> {
    let d = state.dim();
    (0..d)
        .map(|l| ComplexMatrix::from_fn(d, d, |j, i| state.v[state.k_of(l, j)][(l, i)]))
        .collect()
}

fn family_residual(ms: &[ComplexMatrix]) -> f64 {
    ms.iter().map(|m| m.unitarity_residual()).fold(0.0, f64::max)
}

pub fn residuals(state: &SearchState) -> Residuals {
    Residuals {
        v: family_residual(&state.v),
        v_prime: family_residual(&assemble_vprime(state)),
        v_second: family_residual(&assemble_vsecond(state)),
    }
}

/// One `V → V′ → V″` sweep. Deterministic.
pub fn sinkhorn_sweep(state: &mut SearchState) -> Result<()> {
    let d = state.dim();
    for k in 0..d {
        state.v[k] = polar(&state.v[k], "V", k)?;
    }
    for (j, m) in assemble_vprime(state).iter().enumerate() {
        let p = polar(m, "V′", j)?;
        for k in 0..d {
            let l = state.l_of(k, j);
            state.v[k].row_mut(l).copy_from_slice(p.row(k));
        }
    }
    for (l, m) in assemble_vsecond(state).iter().enumerate() {
        let p = polar(m, "V″", l)?;
        for j in 0..d {
            let k = state.k_of(l, j);
            state.v[k].row_mut(l).copy_from_slice(p.row(j));
        }
    }
    state.iteration += 1;
    state.residuals = residuals(state);
    Ok(())
}

/// Root-mean-square average of `|⟨i|a_{k,l}⟩|²` over the orbits
/// `{(l⊕n, i⊕n)}`, phases kept, rows renormalised.
pub fn cyclic_project(bases: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let d = bases.len();
    bases
        .iter()
        .map(|m| {
            let mut out = ComplexMatrix::from_fn(d, d, |l, i| {
                let avg: f64 = (0..d).map(|n| m[((l + n) % d, (i + n) % d)].norm_sqr()).sum::<f64>() / d as f64;
                let z = m[(l, i)];
                let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
                phase * avg.sqrt()
            });
            for l in 0..d {
                let row = out.row_mut(l);
                let nrm = row.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if nrm > 0.0 {
                    row.iter_mut().for_each(|x| *x /= nrm);
                }
            }
            out
        })
        .collect()
}

fn constrain(state: &mut SearchState, c: Constraint) {
    if c == Constraint::Cyclic {
        let d = state.dim();
        state.v = cyclic_project(&state.v);
        state.v[0] = ComplexMatrix::identity(d);
        state.residuals = residuals(state);
    }
}

/// A run that did not reach `tol`; carries the best state seen.
#[derive(Debug, Clone)]
pub struct SearchFailure {
    pub best: SearchState,
}

impl SearchFailure {
    pub fn to_error(&self) -> Error {
        Error::SearchFailed { restarts: self.best.reseeds + 1, best_residual: self.best.residuals.max() }
    }
}

/// Runs sweeps from `init` until the largest residual drops below `tol`.
/// A stalled or singular run is restarted from Haar-random bases drawn
/// from `derive_seed(seed, n)`; the sweep count and history are shared.
pub fn search(init: SearchState, cfg: &SearchConfig, seed: u64) -> core::result::Result<SearchState, SearchFailure> {
    let a = init.a.clone();
    let mut state = init;
    constrain(&mut state, cfg.constraint);
    let mut best = state.clone();
    let mut run_best: Vec<f64> = Vec::new();
    let mut sweeps = 0usize;
    let mut history = Vec::new();
    let mut reseeds = 0usize;
    while sweeps < cfg.max_sweeps {
        let stepped = sinkhorn_sweep(&mut state);
        sweeps += 1;
        let mut restart = stepped.is_err();
        if !restart {
            constrain(&mut state, cfg.constraint);
            let r = state.residuals.max();
            history.push(r);
            let prev = run_best.last().copied().unwrap_or(f64::INFINITY);
            run_best.push(prev.min(r));
            if r < best.residuals.max() || !best.residuals.max().is_finite() {
                best = state.clone();
            }
            if r < cfg.tol {
                state.iteration = sweeps;
                state.history = history;
                state.reseeds = reseeds;
                return Ok(state);
            }
            let n = run_best.len();
            if n > STALL_WINDOW && run_best[n - 1 - STALL_WINDOW] - run_best[n - 1] < STALL_EPS {
                restart = true;
            }
        }
        if restart && sweeps < cfg.max_sweeps {
            reseeds += 1;
            run_best.clear();
            state = match SearchState::random(&a, rng::derive_seed(seed, reseeds as u64)) {
                Ok(s) => s,
                Err(_) => break,
            };
            constrain(&mut state, cfg.constraint);
        }
    }
    best.iteration = sweeps;
    best.history = history;
    best.reseeds = reseeds;
    Err(SearchFailure { best })
}

/// Fresh random start from `seed`, pinned and projected if cyclic, then
/// `search`.
pub fn search_from_seed(
    a: &PermutationTensor,
    cfg: &SearchConfig,
    seed: u64,
) -> core::result::Result<SearchState, SearchFailure> {
    let init = SearchState::random(a, seed).map_err(|_| SearchFailure {
        best: SearchState::new(a, &BasisFamily::computational(a.order())).expect("arity-3 tensor"),
    })?;
    search(init, cfg, seed)
}

/// True when every vector has a single nonzero amplitude, i.e. the
/// coherification is a permutation up to phases.
pub fn is_permutation_like(bases: &BasisFamily, tol: f64) -> bool {
    bases.matrices().iter().all(|m| m.data().iter().all(|z| z.norm() < tol || (z.norm() - 1.0).abs() < tol))
}

/// Kernel dimensions of the linearised unitarity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NullityReport {
    pub params: usize,
    /// `dim ker J`.
    pub raw: usize,
    /// Rank of the per-vector phase directions.
    pub phases: usize,
    /// Rank of phases together with the common unitary `V_k ↦ V_k W`.
    pub gauge: usize,
    /// Rank of the local directions: `V_k ↦ V_k W` and the phases
    /// `e^{i(γ_k + α_l + β_j)}` of `a_{k,l}` coming from diagonal local
    /// unitaries on the other three parties.
    pub local: usize,
}

impl NullityReport {
    pub fn modulo_phases(&self) -> usize {
        self.raw.saturating_sub(self.phases)
    }

    pub fn beyond_gauge(&self) -> usize {
        self.raw.saturating_sub(self.gauge)
    }

    pub fn beyond_local(&self) -> usize {
        self.raw.saturating_sub(self.local)
    }
}

fn rank(m: &DMatrix<f64>, threshold: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone().singular_values().iter().filter(|&&s| s > threshold).count()
}

/// Jacobian of `V ↦ (VV† − I)` over all three families at `bases`,
/// real-linearised in the entries of the `a_{k,l}`. Singular values
/// above `threshold` count towards the rank.
pub fn nullity(a: &PermutationTensor, bases: &BasisFamily, threshold: f64) -> Result<NullityReport> {
    let st = SearchState::new(a, bases)?;
    let d = st.dim();
    let fams = [st.v.clone(), assemble_vprime(&st), assemble_vsecond(&st)];
    let per = d * d;
    let n_out = 3 * d * per;
    let n_par = 2 * d * d * d;
    let mut jac = DMatrix::<f64>::zeros(n_out, n_par);
    // output offset of entry (r,s), r ≤ s, of matrix m of family f
    let slot = |f: usize, m: usize, r: usize, s: usize| -> (usize, Option<usize>) {
        let base = (f * d + m) * per;
        if r == s {
            (base + r, None)
        } else {
            let (a, b) = if r < s { (r, s) } else { (s, r) };
            let idx = d + 2 * (a * d - a * (a + 1) / 2 + (b - a - 1));
            (base + idx, Some(base + idx + 1))
        }
    };
    for k in 0..d {
        for l in 0..d {
            let j = third_index(a, k, l);
            // (family, matrix, row) holding a_{k,l}
            let places = [(0, k, l), (1, j, k), (2, l, j)];
            for i in 0..d {
                for (part, delta) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                    let col = 2 * ((k * d + l) * d + i) + part;
                    for &(f, m, r) in &places {
                        let mat = &fams[f][m];
                        for s in 0..d {
                            // dG[r,s] = δ conj(M[s,i]) and dG[s,r] = M[s,i] conj(δ)
                            let mut g = delta * mat[(s, i)].conj();
                            if s == r {
                                g += mat[(s, i)] * delta.conj();
                            }
                            let (re, im) = slot(f, m, r, s);
                            if s == r {
                                jac[(re, col)] += g.re;
                            } else {
                                let g = if r < s { g } else { g.conj() };
                                jac[(re, col)] += g.re;
                                jac[(im.expect("off-diagonal"), col)] += g.im;
                            }
                        }
                    }
                }
            }
        }
    }
    let js = jac.clone().singular_values();
    let raw = n_par - js.iter().filter(|&&s| s > threshold).count();

    let vec_of = |f: &dyn Fn(usize, usize, usize) -> C64| -> Vec<f64> {
        let mut out = vec![0.0; n_par];
        for k in 0..d {
            for l in 0..d {
                for i in 0..d {
                    let z = f(k, l, i);
                    let c = 2 * ((k * d + l) * d + i);
                    out[c] = z.re;
                    out[c + 1] = z.im;
                }
            }
        }
        out
    };
    let iu = C64::new(0.0, 1.0);
    let mut phase_dirs = Vec::new();
    for k0 in 0..d {
        for l0 in 0..d {
            phase_dirs.push(vec_of(&|k, l, i| if (k, l) == (k0, l0) { iu * st.v[k][(l, i)] } else { C64::new(0.0, 0.0) }));
        }
    }
    let mut w_dirs = Vec::new();
    for p in 0..d {
        for q in p..d {
            let gens: Vec<ComplexMatrix> = if p == q {
                vec![ComplexMatrix::from_fn(d, d, |r, c| if r == p && c == p { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })]
            } else {
                vec![
                    ComplexMatrix::from_fn(d, d, |r, c| {
                        if (r, c) == (p, q) || (r, c) == (q, p) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
                    }),
                    ComplexMatrix::from_fn(d, d, |r, c| {
                        if (r, c) == (p, q) {
                            iu
                        } else if (r, c) == (q, p) {
                            -iu
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }),
                ]
            };
            for h in gens {
                let moved: Vec<ComplexMatrix> = st.v.iter().map(|m| m.matmul(&h).scale(iu)).collect();
                w_dirs.push(vec_of(&|k, l, i| moved[k][(l, i)]));
            }
        }
    }
    let mut local_dirs = w_dirs.clone();
    for t in 0..d {
        for which in 0..3 {
            local_dirs.push(vec_of(&|k, l, i| {
                let hit = match which {
                    0 => k == t,
                    1 => l == t,
                    _ => third_index(a, k, l) == t,
                };
                if hit { iu * st.v[k][(l, i)] } else { C64::new(0.0, 0.0) }
            }));
        }
    }
    let mut gauge_dirs = phase_dirs.clone();
    gauge_dirs.extend(w_dirs);
    let to_mat = |dirs: &[Vec<f64>]| DMatrix::from_fn(n_par, dirs.len(), |r, c| dirs[c][r]);
    Ok(NullityReport {
        params: n_par,
        raw,
        phases: rank(&to_mat(&phase_dirs), threshold),
        gauge: rank(&to_mat(&gauge_dirs), threshold),
        local: rank(&to_mat(&local_dirs), threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::{mols, tensor_from_square};
    use crate::metrics::{entangling_power, mub_bases};

    fn p9() -> (PermutationTensor, BasisFamily) {
        let sq = mols(3).unwrap();
        (tensor_from_square(&sq[0]), BasisFamily::from_mols(&sq[0], &sq[1]).unwrap())
    }

    #[test]
    fn two_unitary_input_is_a_fixed_point() {
        let (a, b) = p9();
        let mut s = SearchState::new(&a, &b).unwrap();
        assert_eq!(s.residuals.max(), 0.0);
        let before = s.matrices().to_vec();
        sinkhorn_sweep(&mut s).unwrap();
        for (x, y) in before.iter().zip(s.matrices()) {
            assert!(x.max_abs_diff(y) < 1e-13);
        }
    }

    #[test]
    fn mub_start_has_prime_residual() {
        let b = mub_bases(3).unwrap();
        let s = SearchState::new(&PermutationTensor::cyclic(3), &b).unwrap();
        assert!(s.residuals.v < 1e-12);
        assert!(s.residuals.v_prime.max(s.residuals.v_second) > 0.1);
    }

    #[test]
    fn vprime_rows_are_a_relabeling() {
        let mut r = rng::stream(1, 0);
        let b = BasisFamily::random(4, &mut r);
        let a = PermutationTensor::cyclic(4);
        let s = SearchState::new(&a, &b).unwrap();
        let mut from_v: Vec<(i64, i64)> = Vec::new();
        let mut from_vp: Vec<(i64, i64)> = Vec::new();
        let key = |z: C64| ((z.re * 1e9) as i64, (z.im * 1e9) as i64);
        for m in s.matrices() {
            from_v.extend(m.data().iter().map(|&z| key(z)));
        }
        for m in assemble_vprime(&s) {
            from_vp.extend(m.data().iter().map(|&z| key(z)));
        }
        from_v.sort();
        from_vp.sort();
        assert_eq!(from_v, from_vp);
    }

    #[test]
    fn d3_random_start_converges() {
        let a = PermutationTensor::cyclic(3);
        let cfg = SearchConfig { tol: 1e-10, max_sweeps: 5000, ..Default::default() };
        let mut ok = 0;
        for seed in 0..5 {
            if let Ok(s) = search_from_seed(&a, &cfg, seed) {
                let u = s.unitary().unwrap();
                assert!((entangling_power(&u).unwrap() - 1.0).abs() < 1e-9);
                ok += 1;
            }
        }
        assert!(ok >= 1);
    }

    #[test]
    fn cyclic_projection_properties() {
        let d = 5;
        let comp = BasisFamily::computational(d);
        let p = cyclic_project(comp.matrices());
        for (x, y) in p.iter().zip(comp.matrices()) {
            assert!(x.max_abs_diff(y) < 1e-15);
        }
        let mut r = rng::stream(2, 0);
        let b = BasisFamily::random(d, &mut r);
        let once = cyclic_project(b.matrices());
        for m in &once {
            for l in 0..d {
                let n: f64 = m.row(l).iter().map(|z| z.norm_sqr()).sum();
                assert!((n - 1.0).abs() < 1e-14);
                for i in 0..d {
                    for s in 0..d {
                        let x = m[(l, i)].norm_sqr();
                        let y = m[((l + s) % d, (i + s) % d)].norm_sqr();
                        assert!((x - y).abs() < 1e-14);
                    }
                }
            }
        }
        let twice = cyclic_project(&once);
        for (x, y) in once.iter().zip(&twice) {
            assert!(x.max_abs_diff(y) < 1e-15);
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = PermutationTensor::cyclic(4);
        let mut s1 = SearchState::random(&a, 9).unwrap();
        let mut s2 = s1.clone();
        for _ in 0..5 {
            sinkhorn_sweep(&mut s1).unwrap();
            sinkhorn_sweep(&mut s2).unwrap();
        }
        assert_eq!(s1.matrices(), s2.matrices());
    }

    #[test]
    fn permutation_nullity_contains_gauge() {
        let (a, b) = p9();
        let n = nullity(&a, &b, 1e-6).unwrap();
        assert_eq!(n.phases, 9);
        assert!(n.gauge >= n.phases && n.gauge >= n.local);
        assert!(n.local >= 9);
        assert!(n.raw >= n.gauge);
        assert!(is_permutation_like(&b, 1e-9));
    }
}
