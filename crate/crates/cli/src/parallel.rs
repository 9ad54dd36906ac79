//! Rayon drivers. Every work item derives its own seed from the master seed,
//! so results do not depend on the thread count.

use rayon::prelude::*;

use qconv_core::families::{certify_u49, u49_config, u49_restart, U49Certificate, U49Solution};
use qconv_core::latin::PermutationTensor;
use qconv_core::rng::derive_seed;
use qconv_core::search::{search_from_seed, SearchConfig, SearchFailure, SearchState};
use qconv_core::stats::{sample_range, EntanglementSample};
use qconv_core::{ComplexMatrix, Error, Result};

pub const THREADS_VAR: &str = "QCONV_THREADS";
const SHARD: usize = 500;

/// Caps the global pool at `QCONV_THREADS` when set. Later calls are no-ops.
pub fn init_threads() {
    let n = std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        b = b.num_threads(n);
    }
    let _ = b.build_global();
}

/// Same values as `stats::sample_entanglement`, computed in shards.
pub fn sample_parallel(u: &ComplexMatrix, n: usize, seed: u64, gate_id: &str) -> Result<EntanglementSample> {
    let d = qconv_core::bipartite::local_dim(u.rows())
        .ok_or_else(|| Error::Dimension(format!("{} is not a perfect square", u.rows())))?;
    let shards: Vec<Vec<f64>> = (0..n.div_ceil(SHARD))
        .into_par_iter()
        .map(|s| sample_range(u, seed, s * SHARD..((s + 1) * SHARD).min(n)))
        .collect::<Result<_>>()?;
    Ok(EntanglementSample { gate_id: gate_id.into(), d, seed, values: shards.concat() })
}

pub fn search_restarts(
    a: &PermutationTensor,
    cfg: &SearchConfig,
    seed: u64,
    restarts: usize,
) -> Vec<core::result::Result<SearchState, SearchFailure>> {
    (0..restarts).into_par_iter().map(|r| search_from_seed(a, cfg, derive_seed(seed, r as u64))).collect()
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub restart: usize,
    pub converged: bool,
    pub permutation_like: bool,
    pub sweeps: usize,
    pub residual: f64,
    pub certificate: Option<U49Certificate>,
}

/// All restarts of the d = 7 cyclic ansatz; the solution is the lowest-index
/// converged restart that is not a permutation.
pub fn u49_parallel(seed: u64, restarts: usize) -> Result<(Vec<RestartOutcome>, Option<U49Solution>)> {
    let cfg = u49_config();
    let runs: Vec<(RestartOutcome, Option<U49Solution>)> = (0..restarts)
        .into_par_iter()
        .map(|r| -> Result<_> {
            match u49_restart(seed, r, &cfg) {
                Ok(state) => {
                    let cert = certify_u49(&state)?;
                    let outcome = RestartOutcome {
                        restart: r,
                        converged: true,
                        permutation_like: cert.is_none(),
                        sweeps: state.iteration,
                        residual: state.residuals.max(),
                        certificate: cert.as_ref().map(|c| c.2.clone()),
                    };
                    let sol = cert.map(|(bases, unitary, certificate)| U49Solution {
                        restart: r,
                        sweeps: state.iteration,
                        bases,
                        unitary,
                        certificate,
                    });
                    Ok((outcome, sol))
                }
                Err(f) => Ok((
                    RestartOutcome {
                        restart: r,
                        converged: false,
                        permutation_like: false,
                        sweeps: f.best.iteration,
                        residual: f.best.residuals.max(),
                        certificate: None,
                    },
                    None,
                )),
            }
        })
        .collect::<Result<_>>()?;
    let mut outcomes = Vec::with_capacity(restarts);
    let mut solution = None;
    for (o, s) in runs {
        outcomes.push(o);
        if solution.is_none() {
            solution = s;
        }
    }
    Ok((outcomes, solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qconv_core::latin::{mols, perm_2unitary_from_mols};
    use qconv_core::stats::sample_entanglement;

    #[test]
    fn sharded_sample_matches_serial() {
        let sq = mols(3).unwrap();
        let u = perm_2unitary_from_mols(&sq[0], &sq[1]).unwrap();
        let a = sample_parallel(&u, 1234, 5, "P9").unwrap();
        let b = sample_entanglement(&u, 1234, 5, "P9").unwrap();
        assert_eq!(a, b);
    }
}
