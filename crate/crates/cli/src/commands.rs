//! Subcommand bodies. Each returns after writing its outputs through the
//! [`Ledger`], which later feeds the manifest.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use qconv_core::coherence::{coherence_range_estimate, Alpha};
use qconv_core::coherify::{build_unitary, is_tristochastic_channel, BasisFamily};
use qconv_core::families::{
    build_3unitary_d4, build_d6_candidate, build_p16, build_u81, circuit_to_unitary, p16_circuit,
    verify_basis_mapping, U81Params,
};
use qconv_core::invariants::{local_invariant, local_invariant_exact, PermQuadruple};
use qconv_core::latin::{latin_hypercubes, mols, perm_2unitary_from_mols, PermutationTensor};
use qconv_core::metrics::{
    coherification_metrics, gate_metrics, gt_bounds, is_prime, mub_bases, mub_entangling_power, tensor_bases,
};
use qconv_core::rng::{self, derive_seed};
use qconv_core::search::{is_permutation_like, Constraint, SearchConfig};
use qconv_core::stats::{histogram_rows, ks_two_sample};
use qconv_core::{ComplexMatrix, Error};

use crate::cli::*;
use crate::error::{CliError, CliResult};
use crate::formats::*;
use crate::io::Ledger;
use crate::number::{full, line, rounded};
use crate::parallel::{sample_parallel, search_restarts, u49_parallel};
use crate::repro;

pub fn dispatch(cmd: Command, ledger: &mut Ledger) -> CliResult<()> {
    match cmd {
        Command::Latin(c) => latin(c, ledger),
        Command::Coherify(c) => coherify(c, ledger),
        Command::Metrics(c) => metrics(c, ledger),
        Command::Invariant(InvariantCmd::Eval { input, quad, out }) => invariant(input, &quad, out, ledger),
        Command::Coherence(CoherenceCmd::Range { input, alpha, budget, seed, out }) => {
            ledger.seeds.push(seed);
            let u = read_matrix(ledger, input.input.as_deref())?;
            let r = coherence_range_estimate(&u, Alpha::parse(&alpha)?, budget, seed)?;
            ledger.write_json(out.out.as_deref(), &CoherenceRangeJson::from(&r))
        }
        Command::Family(c) => family(c, ledger),
        Command::Search(c) => search(c, ledger),
        Command::Stats(c) => stats(c, ledger),
        Command::Repro(args) => repro::run(args, ledger),
    }
}

pub fn read_matrix(ledger: &mut Ledger, path: Option<&Path>) -> CliResult<ComplexMatrix> {
    let j: MatrixJson = ledger.read_json(path, "matrix")?;
    Ok(j.to_matrix()?)
}

fn tensor_arg(ledger: &mut Ledger, s: &str, d: Option<usize>) -> CliResult<PermutationTensor> {
    if s == "cyclic" {
        let d = d.ok_or_else(|| CliError::Usage("`--tensor cyclic` needs a dimension from the other inputs".into()))?;
        return Ok(PermutationTensor::cyclic(d));
    }
    let src: TensorSource = ledger.read_json(Some(Path::new(s)), "tensor")?;
    Ok(src.to_tensor()?)
}

fn is_keyword_bases(s: &str) -> bool {
    matches!(s, "mub" | "computational")
}

fn bases_arg(ledger: &mut Ledger, s: &str, d: usize) -> CliResult<BasisFamily> {
    match s {
        "mub" => Ok(mub_bases(d)?),
        "computational" => Ok(BasisFamily::computational(d)),
        path => {
            let j: BasisJson = ledger.read_json(Some(Path::new(path)), "basis family")?;
            Ok(j.to_family()?)
        }
    }
}

fn parse_pair(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("--pair expects `i,j`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn latin(c: LatinCmd, ledger: &mut Ledger) -> CliResult<()> {
    match c {
        LatinCmd::Mols { d, out } => {
            let sq: Vec<LatinJson> = mols(d)?.iter().map(LatinJson::from).collect();
            ledger.write_json(out.out.as_deref(), &sq)
        }
        LatinCmd::Cubes { d, arity, count, out } => {
            let cubes: Vec<LatinJson> = latin_hypercubes(d, arity, count)?.iter().map(LatinJson::from).collect();
            ledger.write_json(out.out.as_deref(), &cubes)
        }
        LatinCmd::Perm { d, pair, out } => {
            let (i, j) = parse_pair(&pair)?;
            let sq = mols(d)?;
            let pick = |k: usize| {
                sq.get(k).ok_or_else(|| Error::NoConstruction(format!("only {} squares at d = {d}", sq.len())))
            };
            let p = perm_2unitary_from_mols(pick(i)?, pick(j)?)?;
            ledger.write_json(out.out.as_deref(), &MatrixJson::from(&p))
        }
    }
}

fn coherify(c: CoherifyCmd, ledger: &mut Ledger) -> CliResult<()> {
    match c {
        CoherifyCmd::Build { tensor, bases, d, out } => {
            let (a, b) = if is_keyword_bases(&bases) {
                let a = tensor_arg(ledger, &tensor, d)?;
                let b = bases_arg(ledger, &bases, a.order())?;
                (a, b)
            } else {
                let b = bases_arg(ledger, &bases, 0)?;
                (tensor_arg(ledger, &tensor, Some(b.dim()))?, b)
            };
            let u = build_unitary(&a, &b)?;
            ledger.write_json(out.out.as_deref(), &MatrixJson::from(&u))
        }
        CoherifyCmd::Check { input, tensor, tol, out } => {
            let u = read_matrix(ledger, input.input.as_deref())?;
            let d = qconv_core::bipartite::local_dim(u.rows());
            let a = tensor_arg(ledger, &tensor, d)?;
            let r = is_tristochastic_channel(&u, &a, tol)?;
            let j = serde_json::json!({
                "fixed_j": r.fixed_j,
                "fixed_l": r.fixed_l,
                "residual": r.residual(),
                "holds": r.holds,
            });
            ledger.write_json(out.out.as_deref(), &j)
        }
    }
}

/// One row of the (e_p, g_t) scatter.
pub struct ScatterPoint {
    pub kind: &'static str,
    pub e_p: f64,
    pub g_t: f64,
}

/// Haar-random bases on the cyclic tensor, both extremal constructions,
/// MUBs when `d` is prime, and the ensemble average.
pub fn scatter_points(d: usize, n: usize, seed: u64) -> Vec<ScatterPoint> {
    let a = PermutationTensor::cyclic(d);
    let mut pts: Vec<ScatterPoint> = (0..n)
        .into_par_iter()
        .map(|i| {
            let b = BasisFamily::random(d, &mut rng::stream(seed, i as u64));
            let (e_p, g_t) = coherification_metrics(&a, &b);
            ScatterPoint { kind: "random", e_p, g_t }
        })
        .collect();
    let (e_p, g_t) = coherification_metrics(&a, &BasisFamily::computational(d));
    pts.push(ScatterPoint { kind: "extremal_equal", e_p, g_t });
    let (e_p, g_t) = coherification_metrics(&a, &tensor_bases(&a));
    pts.push(ScatterPoint { kind: "extremal_tensor", e_p, g_t });
    if is_prime(d) {
        let (e_p, g_t) = coherification_metrics(&a, &mub_bases(d).expect("prime d"));
        pts.push(ScatterPoint { kind: "mub", e_p, g_t });
    }
    pts.push(ScatterPoint { kind: "average", e_p: mub_entangling_power(d), g_t: 0.5 });
    pts
}

pub fn scatter_csv(pts: &[ScatterPoint]) -> String {
    let mut s = String::from("kind,e_p,g_t,e_p_rounded,g_t_rounded\n");
    for p in pts {
        let _ = writeln!(s, "{},{},{},{},{}", p.kind, full(p.e_p), full(p.g_t), rounded(p.e_p), rounded(p.g_t));
    }
    s
}

/// Whether every point lies in `e_p ∈ [1 − 1/(d+1), 1]`, `g_t` in [`gt_bounds`].
pub fn scatter_in_bounds(d: usize, pts: &[ScatterPoint], tol: f64) -> bool {
    let lo = 1.0 - 1.0 / (d as f64 + 1.0);
    let (glo, ghi) = gt_bounds(d);
    pts.iter().all(|p| p.e_p >= lo - tol && p.e_p <= 1.0 + tol && p.g_t >= glo - tol && p.g_t <= ghi + tol)
}

fn metrics(c: MetricsCmd, ledger: &mut Ledger) -> CliResult<()> {
    match c {
        MetricsCmd::Gate { input, json, out } => {
            let u = read_matrix(ledger, input.input.as_deref())?;
            let m = gate_metrics(&u)?;
            if json {
                return ledger.write_json(out.out.as_deref(), &GateMetricsJson::from(&m));
            }
            let mut s = format!("d\t{}\n", m.d);
            for (name, v) in [
                ("e_p", m.e_p),
                ("g_t", m.g_t),
                ("d_p", m.d_p),
                ("E(U)", m.e_u),
                ("E(US)", m.e_us),
                ("residual_R", m.residual_r),
                ("residual_Gamma", m.residual_gamma),
            ] {
                s.push_str(&line(name, v));
            }
            ledger.write_text(out.out.as_deref(), &s)
        }
        MetricsCmd::Scatter { d, n, seed, out } => {
            ledger.seeds.push(seed);
            let pts = scatter_points(d, n, seed);
            ledger.write_text(out.out.as_deref(), &scatter_csv(&pts))
        }
    }
}

fn invariant(input: InArg, quad: &str, out: OutArg, ledger: &mut Ledger) -> CliResult<()> {
    let u = read_matrix(ledger, input.input.as_deref())?;
    let q = PermQuadruple::parse(quad, None)?;
    let exact = local_invariant_exact(&u, &q)?;
    let (re, im) = match exact {
        Some(v) => (v as f64, 0.0),
        None => {
            let z = local_invariant(&u, &q)?;
            (z.re, z.im)
        }
    };
    ledger.write_json(out.out.as_deref(), &InvariantJson { quadruple: q.to_cycle_string(), re, im, exact })
}

fn family(c: FamilyCmd, ledger: &mut Ledger) -> CliResult<()> {
    match c {
        FamilyCmd::U81 { params, symmetric, limit, seed, emit_params, out } => {
            let p = if let Some(path) = params {
                let j: U81ParamsJson = ledger.read_json(Some(&path), "U81 parameters")?;
                j.to_params()
            } else if symmetric {
                U81Params::symmetric()
            } else if limit {
                U81Params::permutation_limit()
            } else {
                let s = seed.unwrap_or(0);
                ledger.seeds.push(s);
                U81Params::random(&mut rng::stream(s, 0))
            };
            if let Some(path) = emit_params {
                ledger.write_json(Some(&path), &U81ParamsJson::from(&p))?;
            }
            ledger.write_json(out.out.as_deref(), &MatrixJson::from(&build_u81(&p)?))
        }
        FamilyCmd::D6 { out } => ledger.write_json(out.out.as_deref(), &MatrixJson::from(&build_d6_candidate())),
        FamilyCmd::P16 { verify_circuit, out } => {
            let p = build_p16();
            if verify_circuit {
                let c = p16_circuit();
                let diff = circuit_to_unitary(&c).max_abs_diff(&p);
                let map = verify_basis_mapping(&p)?;
                let report = serde_json::json!({
                    "circuit_max_abs_diff": diff,
                    "gates": c.gate_count(),
                    "depth": c.depth(),
                    "nearest_neighbour": c.is_nearest_neighbour(),
                    "magic_gram_residual": map.gram_residual,
                    "max_second_schmidt": map.max_second_schmidt,
                    "max_target_deviation": map.max_target_deviation,
                });
                eprintln!("{report}");
                if diff != 0.0 || !map.holds(1e-12) {
                    return Err(Error::Structure("P16 circuit or magic-basis mapping mismatch".into()).into());
                }
            }
            ledger.write_json(out.out.as_deref(), &MatrixJson::from(&p))
        }
        FamilyCmd::U64 { out } => ledger.write_json(out.out.as_deref(), &MatrixJson::from(&build_3unitary_d4()?)),
        FamilyCmd::U49 { restarts, seed, out } => {
            ledger.seeds.push(seed);
            let (outcomes, sol) = u49_parallel(seed, restarts)?;
            let sol = sol.ok_or_else(|| Error::SearchFailed {
                restarts,
                best_residual: outcomes.iter().map(|o| o.residual).fold(f64::INFINITY, f64::min),
            })?;
            ledger.write_json(out.out.as_deref(), &u49_json(seed, &sol))
        }
    }
}

pub fn u49_json(seed: u64, sol: &qconv_core::families::U49Solution) -> U49Json {
    let c = &sol.certificate;
    U49Json {
        seed,
        restart: sol.restart,
        sweeps: sol.sweeps,
        bases: BasisJson::from(&sol.bases),
        certificate: U49CertificateJson {
            residual: c.residual,
            e_p: c.e_p,
            invariant: [c.invariant.re, c.invariant.im],
            s2: c.s2,
            amplitude_deviation: c.amplitude_deviation,
        },
    }
}

/// `d⁸` contraction entries; the invariant is skipped above this.
const LOG_INVARIANT_MAX_D: usize = 7;

fn search(c: SearchCmd, ledger: &mut Ledger) -> CliResult<()> {
    let SearchCmd::Run { d, tensor, constraint, restarts, seed, tol, max_sweeps, out } = c;
    ledger.seeds.push(seed);
    let a = tensor_arg(ledger, &tensor, Some(d))?;
    if a.order() != d || a.arity() != 3 {
        return Err(CliError::Usage(format!("tensor of order {} arity {} for --d {d}", a.order(), a.arity())));
    }
    let constraint = match constraint.as_str() {
        "none" => Constraint::None,
        "cyclic" => Constraint::Cyclic,
        other => return Err(CliError::Usage(format!("unknown constraint `{other}`"))),
    };
    let cfg = SearchConfig { constraint, tol, max_sweeps };
    let runs = search_restarts(&a, &cfg, seed, restarts);
    let logs: Vec<SearchLogJson> = runs
        .into_par_iter()
        .enumerate()
        .map(|(r, run)| -> CliResult<SearchLogJson> {
            let (state, converged) = match run {
                Ok(s) => (s, true),
                Err(f) => (f.best, false),
            };
            let bases = if converged { state.polished_bases()? } else { state.bases() };
            let (mut e_p, mut inv, mut perm) = (None, None, false);
            if converged {
                let u = build_unitary(&a, &bases)?;
                e_p = Some(qconv_core::metrics::entangling_power(&u)?);
                perm = is_permutation_like(&bases, 1e-6);
                if d <= LOG_INVARIANT_MAX_D {
                    let z = local_invariant(&u, &PermQuadruple::klein())?;
                    inv = Some([z.re, z.im]);
                }
            }
            Ok(SearchLogJson {
                restart: r,
                seed: derive_seed(seed, r as u64),
                converged,
                sweeps: state.iteration,
                reseeds: state.reseeds,
                final_residual: state.residuals.max(),
                residual_trace: state.history.clone(),
                permutation_like: perm,
                e_p,
                invariant: inv,
                bases: BasisJson::from(&bases),
            })
        })
        .collect::<CliResult<_>>()?;
    for log in &logs {
        ledger.write_json(Some(&out.join(format!("restart_{:03}.json", log.restart))), log)?;
    }
    let summary: Vec<_> = logs
        .iter()
        .map(|l| {
            serde_json::json!({
                "restart": l.restart, "converged": l.converged, "sweeps": l.sweeps,
                "final_residual": l.final_residual, "permutation_like": l.permutation_like, "e_p": l.e_p,
            })
        })
        .collect();
    ledger.write_json(Some(&out.join("summary.json")), &summary)
}

fn stats(c: StatsCmd, ledger: &mut Ledger) -> CliResult<()> {
    match c {
        StatsCmd::Sample { input, n, seed, id, out } => {
            ledger.seeds.push(seed);
            let u = read_matrix(ledger, input.input.as_deref())?;
            let s = sample_parallel(&u, n, seed, &id)?;
            ledger.write_json(out.out.as_deref(), &SampleJson::from(&s))
        }
        StatsCmd::Compare { a, b, n, seed, out, hist } => {
            ledger.seeds.push(seed);
            let ua = read_matrix(ledger, Some(&a))?;
            let ub = read_matrix(ledger, Some(&b))?;
            let name = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let sa = sample_parallel(&ua, n, derive_seed(seed, 0), &name(&a))?;
            let sb = sample_parallel(&ub, n, derive_seed(seed, 1), &name(&b))?;
            let ks = ks_two_sample(&sa.values, &sb.values)?;
            if let Some(h) = hist {
                ledger.write_text(Some(&h), &hist_csv(&sa, &sb))?;
            }
            ledger.write_json(out.out.as_deref(), &KsJson::new(&sa.gate_id, &sb.gate_id, seed, &ks))
        }
    }
}

pub fn hist_csv(a: &qconv_core::stats::EntanglementSample, b: &qconv_core::stats::EntanglementSample) -> String {
    let mut s = String::from("bin_lo,bin_hi,count_a,count_b\n");
    for r in histogram_rows(a, b) {
        let _ = writeln!(s, "{},{},{},{}", full(r.bin_lo), full(r.bin_hi), r.count_a, r.count_b);
    }
    s
}
