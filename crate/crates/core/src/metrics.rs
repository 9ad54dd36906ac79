//! Entanglement metrics of bipartite and multipartite gates.
//!
//! `E(|U⟩)` is the linear entropy of the Choi state across the
//! (A,A′)|(B,B′) cut, i.e. `1 − Tr[(U^R U^{R†})²]/d⁴`.
//!
//! Gate typicality uses `g_t = [E(U) − E(US) + E(S)] / (2E(S))`, which gives
//! `g_t(I) = 0`, `g_t(S) = 1` and `g_t = 1/2` for MUB coherifications.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bipartite::{local_dim, partial_transpose, reshuffle, subsystem_purity};
use crate::coherify::{overlap_sums, BasisFamily};
use crate::error::{Error, Result};
use crate::latin::PermutationTensor;
use crate::linalg::{haar_state, kron_vec, swap, ComplexMatrix, C64, CERT_TOL};
use crate::rng;

fn gate_dim(u: &ComplexMatrix) -> Result<usize> {
    if !u.is_square() {
        return Err(Error::Dimension(format!("{}x{} gate", u.rows(), u.cols())));
    }
    local_dim(u.rows()).ok_or_else(|| Error::Dimension(format!("{} is not a perfect square", u.rows())))
}

fn checked(u: &ComplexMatrix) -> Result<usize> {
    let d = gate_dim(u)?;
    u.require_unitary(CERT_TOL)?;
    Ok(d)
}

fn purity_of(m: &ComplexMatrix) -> f64 {
    let rho = m.matmul(&m.adjoint());
    rho.data().iter().map(|x| x.norm_sqr()).sum()
}

fn op_ent_unchecked(u: &ComplexMatrix, d: usize) -> f64 {
    let r = reshuffle(u).expect("square gate");
    1.0 - purity_of(&r) / (d as f64).powi(4)
}

/// Linear entropy of `|U⟩` across (A,A′)|(B,B′).
pub fn op_entanglement(u: &ComplexMatrix) -> Result<f64> {
    let d = checked(u)?;
    Ok(op_ent_unchecked(u, d))
}

/// `E(|S⟩) = 1 − 1/d²`.
pub fn swap_entanglement(d: usize) -> f64 {
    1.0 - 1.0 / (d * d) as f64
}

/// All scalar metrics of a bipartite gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateMetrics {
    pub d: usize,
    pub e_p: f64,
    pub g_t: f64,
    pub d_p: f64,
    pub e_u: f64,
    pub e_us: f64,
    pub residual_r: f64,
    pub residual_gamma: f64,
}

fn metrics_from(d: usize, e_u: f64, e_us: f64) -> (f64, f64, f64) {
    let es = swap_entanglement(d);
    let e_p = (e_u + e_us - es) / es;
    let g_t = (e_u - e_us + es) / (2.0 * es);
    (e_p, g_t, e_p / (d as f64 - 1.0))
}

pub fn gate_metrics(u: &ComplexMatrix) -> Result<GateMetrics> {
    let d = checked(u)?;
    let e_u = op_ent_unchecked(u, d);
    let e_us = op_ent_unchecked(&u.matmul(&swap(d)), d);
    let (e_p, g_t, d_p) = metrics_from(d, e_u, e_us);
    Ok(GateMetrics {
        d,
        e_p,
        g_t,
        d_p,
        e_u,
        e_us,
        residual_r: reshuffle(u)?.unitarity_residual(),
        residual_gamma: partial_transpose(u)?.unitarity_residual(),
    })
}

/// `e_p = [E(U) + E(US) − E(S)]/E(S)`.
pub fn entangling_power(u: &ComplexMatrix) -> Result<f64> {
    let d = checked(u)?;
    let e_u = op_ent_unchecked(u, d);
    let e_us = op_ent_unchecked(&u.matmul(&swap(d)), d);
    Ok(metrics_from(d, e_u, e_us).0)
}

pub fn gate_typicality(u: &ComplexMatrix) -> Result<f64> {
    let d = checked(u)?;
    let e_u = op_ent_unchecked(u, d);
    let e_us = op_ent_unchecked(&u.matmul(&swap(d)), d);
    Ok(metrics_from(d, e_u, e_us).1)
}

/// `d_p = e_p/(d−1)`.
pub fn disentangling_power(u: &ComplexMatrix) -> Result<f64> {
    let d = checked(u)?;
    Ok(entangling_power(u)? / (d as f64 - 1.0))
}

/// Unitarity residuals of `U`, `U^R` and `U^Γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoUnitaryReport {
    pub unitary: f64,
    pub reshuffle: f64,
    pub partial_transpose: f64,
    pub holds: bool,
}

impl TwoUnitaryReport {
    pub fn max_residual(&self) -> f64 {
        self.unitary.max(self.reshuffle).max(self.partial_transpose)
    }
}

pub fn is_2unitary(u: &ComplexMatrix, tol: f64) -> Result<TwoUnitaryReport> {
    gate_dim(u)?;
    let unitary = u.unitarity_residual();
    let reshuffle = reshuffle(u)?.unitarity_residual();
    let partial_transpose = partial_transpose(u)?.unitarity_residual();
    let holds = unitary.max(reshuffle).max(partial_transpose) < tol;
    Ok(TwoUnitaryReport { unitary, reshuffle, partial_transpose, holds })
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|f| f * f <= n).all(|f| !n.is_multiple_of(f))
}

/// `(a_{k,l})_i = ω^{k i² + l i}/√d`, `ω = e^{2πi/d}`: `d` pairwise unbiased
/// bases for an odd prime `d`.
pub fn mub_bases(d: usize) -> Result<BasisFamily> {
    if d == 2 || !is_prime(d) {
        return Err(Error::NoConstruction(format!("MUB family requires an odd prime, got {d}")));
    }
    let w = 2.0 * core::f64::consts::PI / d as f64;
    let s = 1.0 / (d as f64).sqrt();
    BasisFamily::new(
        (0..d)
            .map(|k| ComplexMatrix::from_fn(d, d, |l, i| C64::from_polar(s, w * ((k * i * i + l * i) % d) as f64)))
            .collect(),
    )
}

/// Linear entropy of the first party of a pure bipartite state of `d × d`.
pub fn linear_entropy(psi: &[C64], d: usize) -> f64 {
    let m = ComplexMatrix::new(d, d, psi.to_vec()).expect("state of dimension d²");
    1.0 - purity_of(&m)
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { mean, stderr: (var / n as f64).sqrt(), n }
    }
}

/// Output entanglement of `U` on one Haar-random product input.
pub fn product_output_entropy(u: &ComplexMatrix, d: usize, r: &mut rng::Stream) -> f64 {
    let a = haar_state(d, r);
    let b = haar_state(d, r);
    linear_entropy(&u.mul_vec(&kron_vec(&a, &b)), d)
}

/// `(d+1)/(d−1)` times the Haar average of the output linear entropy on
/// product inputs.
pub fn ep_monte_carlo(u: &ComplexMatrix, n_samples: usize, seed: u64) -> Result<Estimate> {
    let d = checked(u)?;
    let mut r = rng::stream(seed, 0);
    let f = (d as f64 + 1.0) / (d as f64 - 1.0);
    let values: Vec<f64> = (0..n_samples).map(|_| f * product_output_entropy(u, d, &mut r)).collect();
    Ok(Estimate::from_values(&values))
}

fn bipartition_value(purity: impl Fn(&[usize]) -> f64, n: usize, p: usize, d: usize) -> f64 {
    let mut s = 0.0;
    for x in 0..(1usize << n) {
        let mut set: Vec<usize> = (0..n).filter(|i| p >> i & 1 == 1).collect();
        set.extend((0..n).filter(|i| x >> i & 1 == 1).map(|i| n + i));
        s += purity(&set);
    }
    2.0 * (1.0 - (d as f64 / (d as f64 + 1.0)).powi(n as i32) * s)
}

/// Multipartite entangling power of an `N`-party gate (`N = m − 1`), the
/// average of `E_{p|q}` over output bipartitions divided by the same average
/// for an absolutely maximally entangled `|U⟩`. Reduces to `e_p` for `N = 2`.
pub fn multipartite_ep(u: &ComplexMatrix, d: usize, m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::Dimension(format!("arity {m} below 3")));
    }
    let n = m - 1;
    let dim = d.pow(n as u32);
    if !u.is_square() || u.rows() != dim {
        return Err(Error::Dimension(format!("{}x{} gate for {n} parties of dimension {d}", u.rows(), u.cols())));
    }
    u.require_unitary(CERT_TOL)?;
    // Choi amplitudes: outputs first, then inputs
    let scale = 1.0 / (dim as f64).sqrt();
    let amps: Vec<C64> = u.data().iter().map(|x| x * scale).collect();
    let dims = vec![d; 2 * n];
    let mut num = 0.0;
    let mut den = 0.0;
    // output subsets containing party 0, proper
    for p in (1..(1usize << n) - 1).filter(|p| p & 1 == 1) {
        num += bipartition_value(|s| subsystem_purity(&amps, &dims, s).expect("valid subset"), n, p, d);
        den += bipartition_value(
            |s| (d as f64).powi(-(s.len().min(2 * n - s.len()) as i32)),
            n,
            p,
            d,
        );
    }
    if n == 1 || den == 0.0 {
        return Err(Error::Dimension("single-party gate has no bipartition".into()));
    }
    Ok(num / den)
}

/// True iff `e_p ∈ [1 − 1/(d+1), 1]` up to `1e−10`.
pub fn ep_bounds_check(u: &ComplexMatrix) -> Result<bool> {
    let m = gate_metrics(u)?;
    let lo = 1.0 - 1.0 / (m.d as f64 + 1.0);
    Ok(m.e_p >= lo - 1e-10 && m.e_p <= 1.0 + 1e-10)
}

/// `[1/2 − 1/(2d+2), 1/2 + 1/(2d+2)]`, the typicality range of coherifications.
pub fn gt_bounds(d: usize) -> (f64, f64) {
    let h = 1.0 / (2.0 * d as f64 + 2.0);
    (0.5 - h, 0.5 + h)
}

/// Operator entanglements of a coherification from basis overlaps alone:
/// `E(U) = E(S) − s_j/d⁴`, `E(US) = E(S) − s_l/d⁴`, where `s_j` and `s_l` are
/// the cross-overlap sums at fixed `j` and fixed `l`.
pub fn coherification_entanglements(a: &PermutationTensor, bases: &BasisFamily) -> (f64, f64) {
    let d = bases.dim();
    let (sj, sl) = overlap_sums(a, bases);
    let es = swap_entanglement(d);
    let d4 = (d as f64).powi(4);
    (es - sj / d4, es - sl / d4)
}

/// `(e_p, g_t)` of a coherification from the closed forms.
pub fn coherification_metrics(a: &PermutationTensor, bases: &BasisFamily) -> (f64, f64) {
    let (e_u, e_us) = coherification_entanglements(a, bases);
    let (e_p, g_t, _) = metrics_from(bases.dim(), e_u, e_us);
    (e_p, g_t)
}

/// `(a_{k,l})_i = A_{kli}`, one of the two extremal coherifications.
pub fn tensor_bases(a: &PermutationTensor) -> BasisFamily {
    let d = a.order();
    BasisFamily::new(
        (0..d).map(|k| ComplexMatrix::from_fn(d, d, |l, i| C64::new(a.get3(k, l, i) as f64, 0.0))).collect(),
    )
    .expect("rows of a permutation tensor slice are orthonormal")
}

/// `1 − 2/(d²+d)`.
pub fn mub_entangling_power(d: usize) -> f64 {
    1.0 - 2.0 / (d * d + d) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherify::build_unitary;
    use crate::latin::{mols, perm_2unitary_from_mols, tensor_from_square};
    use crate::linalg::{haar_unitary, swap_power};
    use proptest::prelude::*;

    fn p(d: usize) -> ComplexMatrix {
        let s = mols(d).unwrap();
        perm_2unitary_from_mols(&s[0], &s[1]).unwrap()
    }

    #[test]
    fn canonical_values() {
        for d in 2..5 {
            let i = ComplexMatrix::identity(d * d);
            let s = swap(d);
            assert!(op_entanglement(&i).unwrap().abs() < 1e-12);
            assert!((op_entanglement(&s).unwrap() - swap_entanglement(d)).abs() < 1e-12);
            assert!(entangling_power(&i).unwrap().abs() < 1e-12);
            assert!(entangling_power(&s).unwrap().abs() < 1e-12);
            assert!(gate_typicality(&i).unwrap().abs() < 1e-12);
            assert!((gate_typicality(&s).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_reduced_state_is_maximally_mixed() {
        use crate::bipartite::ChoiState;
        for d in 2..5 {
            let c = ChoiState::from_unitary(&swap(d), d).unwrap();
            let pur = c.purity(&["A", "A'"]).unwrap();
            assert!((1.0 - pur - swap_entanglement(d)).abs() < 1e-12);
        }
    }

    #[test]
    fn mols_gates_are_2unitary() {
        for d in [3, 4, 5, 7] {
            let u = p(d);
            let m = gate_metrics(&u).unwrap();
            assert!((m.e_p - 1.0).abs() < 1e-12);
            assert!((m.e_u - swap_entanglement(d)).abs() < 1e-12);
            assert!(is_2unitary(&u, 1e-12).unwrap().holds);
            assert!((m.d_p - m.e_p / (d as f64 - 1.0)).abs() < 1e-12);
        }
        assert!((op_entanglement(&p(3)).unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!(!is_2unitary(&swap(3), 1e-9).unwrap().holds);
    }

    #[test]
    fn mub_values() {
        for d in [3, 5, 7] {
            let b = mub_bases(d).unwrap();
            for k in 0..d {
                for kp in 0..d {
                    if k == kp {
                        continue;
                    }
                    for l in 0..d {
                        for lp in 0..d {
                            let o = crate::linalg::inner(b.vector(k, l), b.vector(kp, lp)).norm_sqr();
                            assert!((o - 1.0 / d as f64).abs() < 1e-12);
                        }
                    }
                }
            }
            let u = build_unitary(&PermutationTensor::cyclic(d), &b).unwrap();
            let m = gate_metrics(&u).unwrap();
            assert!((m.e_p - mub_entangling_power(d)).abs() < 1e-10, "d={d}");
            assert!((m.g_t - 0.5).abs() < 1e-10);
            assert!(!is_2unitary(&u, 1e-9).unwrap().holds);
        }
        assert!((mub_entangling_power(3) - 5.0 / 6.0).abs() < 1e-15);
        assert!((mub_entangling_power(5) - 14.0 / 15.0).abs() < 1e-15);
        for d in [1, 2, 4, 6, 9] {
            assert!(matches!(mub_bases(d), Err(Error::NoConstruction(_))));
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let mut m = ComplexMatrix::identity(4);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(entangling_power(&m), Err(Error::Unitarity { .. })));
        assert!(matches!(entangling_power(&ComplexMatrix::identity(5)), Err(Error::Dimension(_))));
    }

    #[test]
    fn closed_forms_match_choi_computation() {
        let mut r = rng::stream(11, 0);
        for d in [3, 4] {
            for t in 0..100 {
                let a = if t % 2 == 0 { PermutationTensor::cyclic(d) } else { tensor_from_square(&mols(d).unwrap()[0]) };
                let b = BasisFamily::random(d, &mut r);
                let u = build_unitary(&a, &b).unwrap();
                let m = gate_metrics(&u).unwrap();
                let (eu, eus) = coherification_entanglements(&a, &b);
                assert!((m.e_u - eu).abs() < 1e-10);
                assert!((m.e_us - eus).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn extremal_coherifications() {
        let mut r = rng::stream(12, 0);
        for d in [3, 4, 5] {
            let a = PermutationTensor::cyclic(d);
            let w = haar_unitary(d, &mut r);
            let same = BasisFamily::new(vec![w; d]).unwrap();
            let m1 = gate_metrics(&build_unitary(&a, &same).unwrap()).unwrap();
            let lo = 1.0 - 1.0 / (d as f64 + 1.0);
            let (glo, ghi) = gt_bounds(d);
            assert!((m1.e_p - lo).abs() < 1e-12);
            // equal bases route input 1 to output 2: swap-like
            assert!((m1.g_t - ghi).abs() < 1e-12);
            let m2 = gate_metrics(&build_unitary(&a, &tensor_bases(&a)).unwrap()).unwrap();
            assert!((m2.e_p - lo).abs() < 1e-12);
            // output 2 copies input 2: identity-like
            assert!((m2.g_t - glo).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_agrees() {
        let u = p(3);
        let est = ep_monte_carlo(&u, 10_000, 1).unwrap();
        assert!((est.mean - 1.0).abs() < 3.0 * est.stderr);
        let id = ep_monte_carlo(&ComplexMatrix::identity(9), 1000, 1).unwrap();
        assert!(id.mean.abs() < 1e-12);
    }

    #[test]
    fn multipartite_reduces_to_bipartite() {
        let mut r = rng::stream(13, 0);
        for _ in 0..20 {
            let u = haar_unitary(9, &mut r);
            let a = multipartite_ep(&u, 3, 3).unwrap();
            let b = entangling_power(&u).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
        for d in [2, 3] {
            let u = haar_unitary(d * d, &mut r);
            assert!((multipartite_ep(&u, d, 3).unwrap() - entangling_power(&u).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn multipartite_identity_and_hypercubes() {
        assert!(multipartite_ep(&ComplexMatrix::identity(8), 2, 4).unwrap().abs() < 1e-12);
        let cubes = crate::latin::latin_hypercubes(4, 3, 3).unwrap();
        let u = crate::latin::multipartite_unitary_from_hypercubes(&cubes).unwrap();
        assert!((multipartite_ep(&u, 4, 4).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn swap_power_path() {
        for d in [2, 3] {
            let half = swap_power(d, 0.5);
            let m = gate_metrics(&half).unwrap();
            assert!(m.e_p > 0.0 && m.e_p <= 1.0 + 1e-10);
            assert!((0.0..=1.0).contains(&m.g_t));
        }
    }

    fn local(d: usize, r: &mut rng::Stream) -> ComplexMatrix {
        haar_unitary(d, r).kron(&haar_unitary(d, r))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn local_invariance(seed in any::<u64>(), d in 2usize..5) {
            let mut r = rng::stream(seed, 0);
            let u = haar_unitary(d * d, &mut r);
            let v = local(d, &mut r).matmul(&u).matmul(&local(d, &mut r));
            let a = gate_metrics(&u).unwrap();
            let b = gate_metrics(&v).unwrap();
            prop_assert!((a.e_p - b.e_p).abs() < 1e-10);
            prop_assert!((a.g_t - b.g_t).abs() < 1e-10);
            prop_assert!((a.d_p - b.d_p).abs() < 1e-10);
        }

        #[test]
        fn coherification_bounds(seed in any::<u64>(), d in 3usize..6) {
            let mut r = rng::stream(seed, 0);
            let u = build_unitary(&PermutationTensor::cyclic(d), &BasisFamily::random(d, &mut r)).unwrap();
            prop_assert!(ep_bounds_check(&u).unwrap());
            let (lo, hi) = gt_bounds(d);
            let g = gate_typicality(&u).unwrap();
            prop_assert!(g >= lo - 1e-10 && g <= hi + 1e-10);
        }

        #[test]
        fn metric_ranges(seed in any::<u64>(), d in 2usize..5) {
            let mut r = rng::stream(seed, 0);
            let m = gate_metrics(&haar_unitary(d * d, &mut r)).unwrap();
            prop_assert!(m.e_u >= -1e-12 && m.e_u <= swap_entanglement(d) + 1e-12);
            prop_assert!(m.e_p >= -1e-10 && m.e_p <= 1.0 + 1e-10);
            prop_assert!(m.residual_r >= 0.0 && m.residual_gamma >= 0.0);
        }
    }
}
