//! Output-entanglement samples and the two-sample Kolmogorov–Smirnov test.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{LN_10, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::latin::{cyclic_square, mols, perm_2unitary_from_mols};
use crate::bipartite::local_dim;
use crate::linalg::{ComplexMatrix, CERT_TOL};
use crate::metrics::product_output_entropy;
use crate::{rng, Error, Result};

pub const HIST_BINS: usize = 200;
/// Smallest p-value reported as a number.
pub const P_FLOOR: f64 = 1e-300;
/// `c(α)` of the asymptotic Kolmogorov distribution at α = 0.05.
pub const KS_C_05: f64 = 1.358;

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementSample {
    pub gate_id: String,
    pub d: usize,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl EntanglementSample {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn upper(&self) -> f64 {
        1.0 - 1.0 / self.d as f64
    }

    pub fn in_range(&self) -> bool {
        let hi = self.upper() + 1e-12;
        self.values.iter().all(|&v| (-1e-12..=hi).contains(&v))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn gate_dim(u: &ComplexMatrix) -> Result<usize> {
    if !u.is_square() {
        return Err(Error::Dimension(alloc::format!("{}x{} gate", u.rows(), u.cols())));
    }
    let d = local_dim(u.rows()).ok_or_else(|| Error::Dimension(alloc::format!("{} is not a perfect square", u.rows())))?;
    u.require_unitary(CERT_TOL)?;
    Ok(d)
}

/// Draws `range` of the sample stream. Draw `i` always uses stream `i` of
/// `seed`, so shards can be computed anywhere and concatenated.
pub fn sample_range(u: &ComplexMatrix, seed: u64, range: core::ops::Range<usize>) -> Result<Vec<f64>> {
    let d = gate_dim(u)?;
    Ok(range.map(|i| product_output_entropy(u, d, &mut rng::stream(seed, i as u64))).collect())
}

pub fn sample_entanglement(u: &ComplexMatrix, n: usize, seed: u64, gate_id: &str) -> Result<EntanglementSample> {
    let d = gate_dim(u)?;
    let values = sample_range(u, seed, 0..n)?;
    Ok(EntanglementSample { gate_id: gate_id.into(), d, seed, values })
}

/// Empirical CDF evaluated at `t` (right-continuous).
pub fn ecdf(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&x| x <= t) as f64 / sorted.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n: usize,
    pub m: usize,
    /// `√(nm/(n+m)) · D`.
    pub lambda: f64,
    pub p: f64,
    pub log10_p: f64,
}

impl KsResult {
    pub fn underflow(&self) -> bool {
        self.p < P_FLOOR
    }

    /// `"< 1e-300"` below the floor.
    pub fn p_display(&self) -> String {
        if self.underflow() {
            "< 1e-300".into()
        } else {
            alloc::format!("{:e}", self.p)
        }
    }

    pub fn critical_value(&self) -> f64 {
        critical_value(self.n, self.m)
    }
}

pub fn critical_value(n: usize, m: usize) -> f64 {
    KS_C_05 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// `ln Q(λ)` where `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}` is the Kolmogorov tail.
pub fn kolmogorov_ln_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda < 1.0 {
        // P(K ≤ λ) = √(2π)/λ Σ e^{−(2k−1)²π²/(8λ²)}
        let mut cdf = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            cdf += (-j * j * PI * PI / (8.0 * lambda * lambda)).exp();
        }
        cdf *= (2.0 * PI).sqrt() / lambda;
        return (1.0 - cdf).max(0.0).ln();
    }
    // factor out the leading term so the result stays finite past underflow
    let l2 = lambda * lambda;
    let mut rel = 0.0;
    for k in 1..=100i32 {
        let kk = (k * k - 1) as f64;
        let term = (-2.0 * kk * l2).exp();
        if term < 1e-18 {
            break;
        }
        rel += if k % 2 == 1 { term } else { -term };
    }
    2f64.ln() - 2.0 * l2 + rel.ln()
}

/// Sup-distance between empirical CDFs with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Dimension("empty sample".into()));
    }
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let statistic = ks_statistic_sorted(&a, &b);
    let (n, m) = (a.len(), b.len());
    let lambda = (n as f64 * m as f64 / (n + m) as f64).sqrt() * statistic;
    let ln_p = kolmogorov_ln_tail(lambda).min(0.0);
    Ok(KsResult { statistic, n, m, lambda, p: ln_p.exp(), log10_p: ln_p / LN_10 })
}

/// Single merge pass over two sorted samples.
pub fn ks_statistic_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        best = best.max((i as f64 / n - j as f64 / m).abs());
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count_a: usize,
    pub count_b: usize,
}

/// Counts in `bins` uniform bins over `[0, hi]`; out-of-range values are clamped
/// into the edge bins.
pub fn histogram(values: &[f64], hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = alloc::vec![0; bins];
    for &v in values {
        let b = ((v / hi) * bins as f64).floor();
        let b = if b < 0.0 { 0 } else { (b as usize).min(bins - 1) };
        counts[b] += 1;
    }
    counts
}

pub fn histogram_rows(a: &EntanglementSample, b: &EntanglementSample) -> Vec<HistRow> {
    let hi = a.upper().max(b.upper());
    let ca = histogram(&a.values, hi, HIST_BINS);
    let cb = histogram(&b.values, hi, HIST_BINS);
    let w = hi / HIST_BINS as f64;
    (0..HIST_BINS)
        .map(|k| HistRow { bin_lo: k as f64 * w, bin_hi: (k + 1) as f64 * w, count_a: ca[k], count_b: cb[k] })
        .collect()
}

/// Two AME permutation gates of local dimension 9 from orthogonal pairs over
/// different groups: GF(9) and ℤ₉ (`i+j`, `i+2j`). The quadruple
/// `id,(1234),(13)(24),(1432)` takes the values 6561 and 729 on them.
pub fn p81_baselines() -> Result<[(&'static str, ComplexMatrix); 2]> {
    let gf = mols(9)?;
    let a = perm_2unitary_from_mols(&gf[0], &gf[1])?;
    let b = perm_2unitary_from_mols(&cyclic_square(9, 1, 1)?, &cyclic_square(9, 1, 2)?)?;
    Ok([("P81-GF9", a), ("P81-Z9", b)])
}

pub const P81_SEPARATING_QUADRUPLE: &str = "id,(1234),(13)(24),(1432)";
