//! Coherence of a unitary with respect to the computational basis.
//!
//! `S_α(|ψ⟩;U) = Σ_i |⟨i|U|ψ⟩|^{2α}` and `H_α = log S_α / (1−α)`.
//! `S_α(U)` averages over the columns of `U`. The range of `S_α` is taken
//! over `VUV′` with `V, V′ ∈ U(d)⊗U(d)`; only inner estimates are produced.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bipartite::local_dim;
use crate::error::{Error, Result};
use crate::linalg::{fourier_matrix, random_hermitian_unit, ComplexMatrix, C64};
use crate::rng::{self, Rng};

/// Relative threshold below which an amplitude counts as zero for `S_0`.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Proposal steps per annealing restart.
pub const STEPS_PER_RESTART: usize = 1000;

const EPS_START: f64 = 0.3;
const EPS_END: f64 = 1e-3;

/// Order parameter of the coherence measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Zero,
    Finite(f64),
    Infinity,
}

impl Alpha {
    /// `0`, `inf` and positive finite values.
    pub fn from_f64(a: f64) -> Result<Self> {
        if a == 0.0 {
            Ok(Alpha::Zero)
        } else if a == f64::INFINITY {
            Ok(Alpha::Infinity)
        } else if a.is_finite() && a > 0.0 {
            Ok(Alpha::Finite(a))
        } else {
            Err(Error::Input(format!("alpha must be 0, positive or infinite, got {a}")))
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Alpha::Infinity),
            t => {
                let a: f64 = t.parse().map_err(|_| Error::Parse(format!("bad alpha {t:?}")))?;
                Alpha::from_f64(a)
            }
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Alpha::Zero => 0.0,
            Alpha::Finite(a) => a,
            Alpha::Infinity => f64::INFINITY,
        }
    }

    /// Analytic range `[lo, hi]` of `S_α` over all unitaries of size `n`.
    pub fn envelope(&self, n: usize) -> (f64, f64) {
        let n = n as f64;
        match *self {
            Alpha::Zero => (1.0, n),
            Alpha::Infinity => (1.0 / n.sqrt(), 1.0),
            Alpha::Finite(a) => {
                let flat = n.powf(1.0 - a);
                if a >= 1.0 {
                    (flat, 1.0)
                } else {
                    (1.0, flat)
                }
            }
        }
    }
}

fn s_of_amplitudes(amps: &[C64], alpha: Alpha) -> f64 {
    match alpha {
        Alpha::Zero => {
            let top = amps.iter().map(|x| x.norm()).fold(0.0, f64::max);
            amps.iter().filter(|x| x.norm() > ZERO_THRESHOLD * top).count() as f64
        }
        Alpha::Infinity => amps.iter().map(|x| x.norm()).fold(0.0, f64::max),
        Alpha::Finite(a) if a == 1.0 => amps.iter().map(|x| x.norm_sqr()).sum(),
        Alpha::Finite(a) if a == 2.0 => amps.iter().map(|x| x.norm_sqr() * x.norm_sqr()).sum(),
        Alpha::Finite(a) => amps
            .iter()
            .map(|x| x.norm_sqr())
            .filter(|&p| p > 0.0)
            .map(|p| p.powf(a))
            .sum(),
    }
}

fn check_state(psi: &[C64], u: &ComplexMatrix) -> Result<()> {
    if !u.is_square() || u.cols() != psi.len() {
        return Err(Error::Dimension(format!("{}x{} matrix against state of length {}", u.rows(), u.cols(), psi.len())));
    }
    Ok(())
}

/// `S_α(|ψ⟩;U)`. For `α = ∞` this is the largest modulus, not its square.
pub fn s_alpha_state(psi: &[C64], u: &ComplexMatrix, alpha: Alpha) -> Result<f64> {
    check_state(psi, u)?;
    Ok(s_of_amplitudes(&u.mul_vec(psi), alpha))
}

/// Rényi entropy `H_α(|ψ⟩;U)`, Shannon at `α = 1`.
pub fn h_alpha(psi: &[C64], u: &ComplexMatrix, alpha: Alpha) -> Result<f64> {
    check_state(psi, u)?;
    let amps = u.mul_vec(psi);
    Ok(match alpha {
        Alpha::Zero => s_of_amplitudes(&amps, alpha).ln(),
        Alpha::Infinity => -2.0 * s_of_amplitudes(&amps, alpha).ln(),
        Alpha::Finite(a) if a == 1.0 => amps
            .iter()
            .map(|x| x.norm_sqr())
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum(),
        Alpha::Finite(a) => s_of_amplitudes(&amps, alpha).ln() / (1.0 - a),
    })
}

/// Column average of `S_α(|j⟩;U)`.
pub fn s_alpha_unitary(u: &ComplexMatrix, alpha: Alpha) -> f64 {
    let n = u.cols();
    let total: f64 = (0..n).map(|j| s_of_amplitudes(&u.column(j), alpha)).sum();
    total / n as f64
}

/// Column average of `H_α(|j⟩;U)`.
pub fn h_alpha_unitary(u: &ComplexMatrix, alpha: Alpha) -> Result<f64> {
    let n = u.cols();
    let mut total = 0.0;
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        total += h_alpha(&e, u, alpha)?;
    }
    Ok(total / n as f64)
}

/// Lower bound on `S_2(VUV′)` that every unitary obeys: `1/D`.
pub fn s2_floor(n: usize) -> f64 {
    1.0 / n as f64
}

/// Inner estimate of the coherence range.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceRange {
    pub alpha: Alpha,
    pub lo: f64,
    pub hi: f64,
    pub probes_used: Vec<String>,
    pub restarts: usize,
}

/// Local frame `(V₁⊗V₂) · U · (W₁⊗W₂)`.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub factors: [ComplexMatrix; 4],
}

impl LocalFrame {
    pub fn identity(d: usize) -> Self {
        let i = ComplexMatrix::identity(d);
        LocalFrame { factors: [i.clone(), i.clone(), i.clone(), i] }
    }

    pub fn apply(&self, u: &ComplexMatrix) -> ComplexMatrix {
        let [v1, v2, w1, w2] = &self.factors;
        v1.kron(v2).matmul(u).matmul(&w1.kron(w2))
    }
}

fn probe_set(d: usize) -> Vec<(String, LocalFrame)> {
    let f = fourier_matrix(d);
    let fd = f.adjoint();
    let i = ComplexMatrix::identity(d);
    let frame = |v1: &ComplexMatrix, v2: &ComplexMatrix, w1: &ComplexMatrix, w2: &ComplexMatrix| LocalFrame {
        factors: [v1.clone(), v2.clone(), w1.clone(), w2.clone()],
    };
    vec![
        (String::from("(I,I)"), frame(&i, &i, &i, &i)),
        (String::from("(F⊗F,I)"), frame(&f, &f, &i, &i)),
        (String::from("(F⊗I,I)"), frame(&f, &i, &i, &i)),
        (String::from("(I⊗F,I)"), frame(&i, &f, &i, &i)),
        (String::from("(I,F⊗F)"), frame(&i, &i, &f, &f)),
        (String::from("(F†⊗F,I)"), frame(&fd, &f, &i, &i)),
    ]
}

/// Values of `S_α` on the fixed probe frames.
pub fn probe_values(u: &ComplexMatrix, alpha: Alpha) -> Result<Vec<(String, f64)>> {
    let d = frame_dim(u)?;
    Ok(probe_set(d).into_iter().map(|(name, fr)| (name, s_alpha_unitary(&fr.apply(u), alpha))).collect())
}

fn frame_dim(u: &ComplexMatrix) -> Result<usize> {
    if !u.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix", u.rows(), u.cols())));
    }
    local_dim(u.rows()).ok_or_else(|| Error::Dimension(format!("{} is not a perfect square", u.rows())))
}

/// One annealing run from `start`, minimising (`sign = 1`) or maximising
/// (`sign = −1`) `S_α`. Returns the best value seen and its frame.
pub fn anneal(
    u: &ComplexMatrix,
    alpha: Alpha,
    start: &LocalFrame,
    steps: usize,
    sign: f64,
    r: &mut rng::Stream,
) -> (f64, LocalFrame) {
    let d = start.factors[0].rows();
    let mut cur = start.clone();
    let mut cur_val = s_alpha_unitary(&cur.apply(u), alpha);
    let mut best = (cur_val, cur.clone());
    let ratio = (EPS_END / EPS_START).powf(1.0 / steps.max(2).saturating_sub(1) as f64);
    let mut eps = EPS_START;
    let t0 = 1e-3 * cur_val.abs().max(1e-6);
    for step in 0..steps {
        let which = r.random_range(0..4);
        let h = random_hermitian_unit(d, r);
        let mut prop = cur.clone();
        prop.factors[which] = h.expi_hermitian(eps).matmul(&prop.factors[which]);
        let val = s_alpha_unitary(&prop.apply(u), alpha);
        let delta = sign * (val - cur_val);
        let temp = t0 * (1.0 - step as f64 / steps as f64);
        let accept = delta <= 0.0 || (temp > 0.0 && r.random::<f64>() < (-delta / temp).exp());
        if accept {
            cur = prop;
            cur_val = val;
            if sign * (cur_val - best.0) < 0.0 {
                best = (cur_val, cur.clone());
            }
        }
        eps *= ratio;
    }
    best
}

/// Combines probe values with annealing restarts `first..first+count` of
/// `seed`. Restarts are independent, so callers may shard them.
pub fn anneal_restarts(
    u: &ComplexMatrix,
    alpha: Alpha,
    seed: u64,
    first: usize,
    count: usize,
) -> Result<(f64, f64)> {
    let d = frame_dim(u)?;
    let probes = probe_set(d);
    let vals: Vec<f64> = probes.iter().map(|(_, fr)| s_alpha_unitary(&fr.apply(u), alpha)).collect();
    let arg = |better: fn(f64, f64) -> bool| {
        let mut k = 0;
        for (i, &v) in vals.iter().enumerate() {
            if better(v, vals[k]) {
                k = i;
            }
        }
        k
    };
    let lo_start = &probes[arg(|a, b| a < b)].1;
    let hi_start = &probes[arg(|a, b| a > b)].1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let half = STEPS_PER_RESTART / 2;
    for k in first..first + count {
        let mut r = rng::stream(rng::derive_seed(seed, k as u64), 0);
        lo = lo.min(anneal(u, alpha, lo_start, half, 1.0, &mut r).0);
        hi = hi.max(anneal(u, alpha, hi_start, half, -1.0, &mut r).0);
    }
    Ok((lo, hi))
}

/// Inner estimate of `range(S_α(U))`: probe frames first, then
/// `budget/1000` annealing restarts that try to widen both ends.
pub fn coherence_range_estimate(u: &ComplexMatrix, alpha: Alpha, budget: usize, seed: u64) -> Result<CoherenceRange> {
    let restarts = budget / STEPS_PER_RESTART;
    let probes = probe_values(u, alpha)?;
    let mut lo = probes.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut hi = probes.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if restarts > 0 {
        let (a, b) = anneal_restarts(u, alpha, seed, 0, restarts)?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    finish_range(u.rows(), alpha, lo, hi, probes.into_iter().map(|p| p.0).collect(), restarts)
}

/// Packages an estimate, enforcing the analytic envelope for `α = 2`.
pub fn finish_range(
    n: usize,
    alpha: Alpha,
    lo: f64,
    hi: f64,
    probes_used: Vec<String>,
    restarts: usize,
) -> Result<CoherenceRange> {
    if alpha == Alpha::Finite(2.0) {
        let (a, b) = alpha.envelope(n);
        assert!(
            lo >= a - 1e-12 && hi <= b + 1e-12 && lo <= hi,
            "S_2 estimate [{lo}, {hi}] leaves the envelope [{a}, {b}]"
        );
    }
    Ok(CoherenceRange { alpha, lo, hi, probes_used, restarts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::{mols, perm_2unitary_from_mols};
    use crate::linalg::haar_unitary;

    fn basis(n: usize, j: usize) -> Vec<C64> {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        e
    }

    #[test]
    fn trivial_values() {
        let n = 9;
        let f = fourier_matrix(n);
        let e = basis(n, 4);
        assert_eq!(s_alpha_state(&e, &ComplexMatrix::identity(n), Alpha::Finite(2.0)).unwrap(), 1.0);
        assert_eq!(s_alpha_state(&e, &f, Alpha::Zero).unwrap(), 9.0);
        assert!((s_alpha_state(&e, &f, Alpha::Infinity).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((s_alpha_unitary(&f, Alpha::Finite(2.0)) - 1.0 / 9.0).abs() < 1e-14);
        let sq = mols(3).unwrap();
        let p = perm_2unitary_from_mols(&sq[0], &sq[1]).unwrap();
        assert_eq!(s_alpha_unitary(&p, Alpha::Finite(2.0)), 1.0);
    }

    #[test]
    fn alpha_one_is_continuous() {
        let mut r = rng::stream(3, 0);
        let u = haar_unitary(9, &mut r);
        let e = basis(9, 2);
        let shannon = h_alpha(&e, &u, Alpha::Finite(1.0)).unwrap();
        for a in [1.0 + 1e-7, 1.0 - 1e-7] {
            let h = h_alpha(&e, &u, Alpha::Finite(a)).unwrap();
            assert!((h - shannon).abs() < 1e-6);
            assert!((h.exp() - shannon.exp()).abs() < 1e-6);
            let s = s_alpha_state(&e, &u, Alpha::Finite(a)).unwrap();
            assert!((s - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn column_sums_bound_s2() {
        let mut r = rng::stream(4, 0);
        let u = haar_unitary(16, &mut r);
        let s2 = s_alpha_unitary(&u, Alpha::Finite(2.0));
        assert!(s2 < 1.0 && s2 >= s2_floor(16));
        assert!((s_alpha_unitary(&u, Alpha::Finite(1.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_range_from_probes() {
        let sq = mols(3).unwrap();
        let p = perm_2unitary_from_mols(&sq[0], &sq[1]).unwrap();
        let r = coherence_range_estimate(&p, Alpha::Finite(2.0), 0, 1).unwrap();
        assert!((r.lo - 1.0 / 9.0).abs() < 1e-14);
        assert!((r.hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn annealing_stays_in_envelope() {
        let mut rr = rng::stream(5, 0);
        let u = haar_unitary(9, &mut rr);
        let base = coherence_range_estimate(&u, Alpha::Finite(2.0), 0, 2).unwrap();
        let r = coherence_range_estimate(&u, Alpha::Finite(2.0), 2000, 2).unwrap();
        assert_eq!(r.restarts, 2);
        assert!(r.lo <= base.lo && r.hi >= base.hi);
        assert!(r.lo >= 1.0 / 9.0 - 1e-12 && r.hi <= 1.0);
        let again = coherence_range_estimate(&u, Alpha::Finite(2.0), 2000, 2).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!(Alpha::parse("inf").unwrap(), Alpha::Infinity);
        assert_eq!(Alpha::parse("0").unwrap(), Alpha::Zero);
        assert_eq!(Alpha::parse("2").unwrap(), Alpha::Finite(2.0));
        assert!(Alpha::parse("-1").is_err());
    }
}
