//! `qconv repro <id>`: figure/table data plus a PASS/FAIL summary.

use std::fmt::Write as _;

use qconv_core::coherence::{probe_values, s_alpha_unitary, Alpha};
use qconv_core::families::{build_u81, U81Params};
use qconv_core::invariants::{local_invariant, PermQuadruple};
use qconv_core::metrics::mub_entangling_power;
use qconv_core::rng::{self, derive_seed};
use qconv_core::stats::{critical_value, ks_two_sample, p81_baselines, EntanglementSample, HIST_BINS};
use qconv_core::Error;

use crate::cli::ReproArgs;
use crate::commands::{scatter_csv, scatter_in_bounds, scatter_points, u49_json};
use crate::error::{CliError, CliResult};
use crate::formats::{BasisJson, KsJson, U49Json, U81ParamsJson};
use crate::io::Ledger;
use crate::number::{full, rounded};
use crate::parallel::{sample_parallel, u49_parallel};

pub const IDS: [&str; 4] = ["fig2", "fig4", "tableA", "inv49"];
pub const INV49_INTERVAL: (f64, f64) = (1347.84, 1403.66);

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.into(), pass, detail }
    }
}

pub fn summary_text(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    s
}

pub fn run(args: ReproArgs, ledger: &mut Ledger) -> CliResult<()> {
    ledger.seeds.push(args.seed);
    let checks = match args.id.as_str() {
        "fig2" => fig2(&args, ledger)?,
        "fig4" => fig4(&args, ledger)?,
        "tableA" => table_a(&args, ledger)?,
        "inv49" => inv49(&args, ledger)?,
        other => return Err(CliError::Usage(format!("unknown repro id `{other}`; expected one of {}", IDS.join(", ")))),
    };
    let text = summary_text(&checks);
    ledger.write_text(Some(&args.out.join("summary.txt")), &text)?;
    ledger.write_text(None, &text)
}

fn fig2(args: &ReproArgs, ledger: &mut Ledger) -> CliResult<Vec<Check>> {
    let d = 3;
    let n = args.n.unwrap_or(1000);
    let pts = scatter_points(d, n, args.seed);
    ledger.write_text(Some(&args.out.join("ep_gt.csv")), &scatter_csv(&pts))?;
    let lo = 1.0 - 1.0 / (d as f64 + 1.0);
    let random: Vec<f64> = pts.iter().filter(|p| p.kind == "random").map(|p| p.e_p).collect();
    let mean = random.iter().sum::<f64>() / random.len() as f64;
    let sd = (random.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (random.len().max(2) - 1) as f64).sqrt();
    let se = sd / (random.len() as f64).sqrt();
    let target = mub_entangling_power(d);
    let extremal_ok = pts
        .iter()
        .filter(|p| p.kind.starts_with("extremal"))
        .all(|p| (p.e_p - lo).abs() < 1e-12);
    Ok(vec![
        Check::new("points within e_p and g_t bounds", scatter_in_bounds(d, &pts, 1e-12), format!("{} points", pts.len())),
        Check::new("extremal constructions attain the e_p lower bound", extremal_ok, format!("bound {}", full(lo))),
        Check::new(
            "ensemble mean e_p equals the MUB value within 3 sigma",
            (mean - target).abs() <= 3.0 * se,
            format!("mean {} target {} stderr {}", full(mean), full(target), rounded(se)),
        ),
    ])
}

fn fig4(args: &ReproArgs, ledger: &mut Ledger) -> CliResult<Vec<Check>> {
    let n = args.n.unwrap_or(10_000);
    let params = U81Params::random(&mut rng::stream(args.seed, 0));
    ledger.write_json(Some(&args.out.join("u81_params.json")), &U81ParamsJson::from(&params))?;
    let mut gates = vec![("U81", build_u81(&params)?)];
    gates.extend(p81_baselines()?);
    let samples: Vec<EntanglementSample> = gates
        .iter()
        .enumerate()
        .map(|(i, (id, u))| sample_parallel(u, n, derive_seed(args.seed, i as u64 + 1), id))
        .collect::<Result<_, Error>>()?;

    let hi = samples[0].upper();
    let counts: Vec<Vec<usize>> =
        samples.iter().map(|s| qconv_core::stats::histogram(&s.values, hi, HIST_BINS)).collect();
    let mut csv = String::from("bin_lo,bin_hi");
    for s in &samples {
        let _ = write!(csv, ",count_{}", s.gate_id);
    }
    csv.push('\n');
    let w = hi / HIST_BINS as f64;
    for k in 0..HIST_BINS {
        let _ = write!(csv, "{},{}", full(k as f64 * w), full((k + 1) as f64 * w));
        for c in &counts {
            let _ = write!(csv, ",{}", c[k]);
        }
        csv.push('\n');
    }
    ledger.write_text(Some(&args.out.join("hist.csv")), &csv)?;

    let mut ks = Vec::new();
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let r = ks_two_sample(&samples[i].values, &samples[j].values)?;
            ks.push(KsJson::new(&samples[i].gate_id, &samples[j].gate_id, args.seed, &r));
        }
    }
    ledger.write_json(Some(&args.out.join("ks.json")), &ks)?;
    let crit = critical_value(n, n);
    let first = &ks[0];
    let min_stat = ks.iter().map(|k| k.statistic).fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::new(
            "KS p-value U81 vs P81 below 1e-6",
            first.log10_p < -6.0,
            format!("{} vs {}: D = {} p = {}", first.a, first.b, rounded(first.statistic), first.p_display),
        ),
        Check::new(
            "pairwise KS statistics exceed 5x the 5% critical value",
            min_stat > 5.0 * crit,
            format!("smallest D = {} threshold {}", rounded(min_stat), rounded(5.0 * crit)),
        ),
    ])
}

fn table_a(args: &ReproArgs, ledger: &mut Ledger) -> CliResult<Vec<Check>> {
    let u = build_u81(&U81Params::symmetric())?;
    let s3 = 3f64.sqrt();
    let fourier = probe_values(&u, Alpha::Finite(2.0))?
        .into_iter()
        .find(|(name, _)| name == "(F⊗F,I)")
        .map(|p| p.1)
        .expect("probe present");
    let rows = [
        ("S_0", s_alpha_unitary(&u, Alpha::Zero), 7.0 / 3.0),
        ("S_2", s_alpha_unitary(&u, Alpha::Finite(2.0)), 5.0 / 9.0),
        ("S_inf", s_alpha_unitary(&u, Alpha::Infinity), (3.0 + 2.0 * s3) / 9.0),
        ("S_2 Fourier probe", fourier, 5.0 / 729.0),
    ];
    let mut csv = String::from("quantity,value,value_rounded,target,pass\n");
    let mut checks = Vec::new();
    for (name, v, t) in rows {
        let pass = (v - t).abs() < 1e-12;
        let _ = writeln!(csv, "{name},{},{},{},{}", full(v), rounded(v), full(t), pass);
        checks.push(Check::new(name, pass, format!("value {} target {}", full(v), full(t))));
    }
    ledger.write_text(Some(&args.out.join("tableA.csv")), &csv)?;
    Ok(checks)
}

fn inv49(args: &ReproArgs, ledger: &mut Ledger) -> CliResult<Vec<Check>> {
    let (bases, stored) = match &args.input {
        Some(p) => {
            let j: U49Json = ledger.read_json(Some(p), "U49 search result")?;
            (j.bases.to_family()?, j)
        }
        None => {
            let (outcomes, sol) = u49_parallel(args.seed, args.restarts)?;
            let sol = sol.ok_or_else(|| Error::SearchFailed {
                restarts: args.restarts,
                best_residual: outcomes.iter().map(|o| o.residual).fold(f64::INFINITY, f64::min),
            })?;
            let j = u49_json(args.seed, &sol);
            ledger.write_json(Some(&args.out.join("u49.json")), &j)?;
            (sol.bases, j)
        }
    };
    let u = qconv_core::coherify::build_unitary(&qconv_core::latin::PermutationTensor::cyclic(7), &bases)?;
    let inv = local_invariant(&u, &PermQuadruple::klein())?;
    let s2 = s_alpha_unitary(&u, Alpha::Finite(2.0));
    let out = serde_json::json!({
        "quadruple": PermQuadruple::klein().to_cycle_string(),
        "invariant": [inv.re, inv.im],
        "s2": s2,
        "restart": stored.restart,
        "bases": BasisJson::from(&bases),
    });
    ledger.write_json(Some(&args.out.join("inv49.json")), &out)?;
    let (lo, hi) = INV49_INTERVAL;
    Ok(vec![
        Check::new(
            "invariant within [1347.84, 1403.66]",
            inv.re >= lo && inv.re <= hi && inv.im.abs() < 1e-6,
            format!("value {} + {}i", full(inv.re), rounded(inv.im)),
        ),
        Check::new("S_2 equals 115/343", (s2 - 115.0 / 343.0).abs() < 1e-6, format!("value {}", full(s2))),
    ])
}
