//! JSON file formats shared by every subcommand.
//!
//! Matrices are `{"rows", "cols", "re", "im"}` row-major, Latin objects
//! `{"d", "arity", "cells"}`, basis families `{"d", "V": [matrix, ...]}`.
//! Floats go through serde_json's shortest round-trip representation, so
//! write → read is the identity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use qconv_core::coherence::CoherenceRange;
use qconv_core::coherify::BasisFamily;
use qconv_core::families::U81Params;
use qconv_core::latin::{tensor_from_hypercube, tensor_from_square, LatinHypercube, LatinSquare, PermutationTensor};
use qconv_core::metrics::GateMetrics;
use qconv_core::stats::{EntanglementSample, KsResult};
use qconv_core::{ComplexMatrix, Error, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            re: m.data().iter().map(|z| z.re).collect(),
            im: m.data().iter().map(|z| z.im).collect(),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix, Error> {
        let n = self.rows * self.cols;
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::Parse(format!(
                "matrix {}x{} with {} real and {} imaginary entries",
                self.rows,
                self.cols,
                self.re.len(),
                self.im.len()
            )));
        }
        ComplexMatrix::new(self.rows, self.cols, self.re.iter().zip(&self.im).map(|(&a, &b)| C64::new(a, b)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatinJson {
    pub d: usize,
    pub arity: usize,
    pub cells: Vec<usize>,
}

impl From<&LatinSquare> for LatinJson {
    fn from(l: &LatinSquare) -> Self {
        LatinJson { d: l.order(), arity: 2, cells: l.cells().to_vec() }
    }
}

impl From<&LatinHypercube> for LatinJson {
    fn from(l: &LatinHypercube) -> Self {
        LatinJson { d: l.order(), arity: l.arity(), cells: l.cells().to_vec() }
    }
}

impl LatinJson {
    pub fn to_hypercube(&self) -> Result<LatinHypercube, Error> {
        LatinHypercube::new(self.d, self.arity, self.cells.clone())
    }

    pub fn to_square(&self) -> Result<LatinSquare, Error> {
        if self.arity != 2 {
            return Err(Error::Parse(format!("expected a square, found arity {}", self.arity)));
        }
        LatinSquare::new(self.d, self.cells.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub d: usize,
    pub arity: usize,
    pub entries: Vec<u8>,
}

impl From<&PermutationTensor> for TensorJson {
    fn from(a: &PermutationTensor) -> Self {
        TensorJson { d: a.order(), arity: a.arity(), entries: a.entries().to_vec() }
    }
}

/// A tensor file holds either the tensor itself or the Latin object it comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorSource {
    Tensor(TensorJson),
    Latin(LatinJson),
}

impl TensorSource {
    pub fn to_tensor(&self) -> Result<PermutationTensor, Error> {
        match self {
            TensorSource::Tensor(t) => PermutationTensor::new(t.d, t.arity, t.entries.clone()),
            TensorSource::Latin(l) if l.arity == 2 => Ok(tensor_from_square(&l.to_square()?)),
            TensorSource::Latin(l) => Ok(tensor_from_hypercube(&l.to_hypercube()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    pub d: usize,
    #[serde(rename = "V")]
    pub v: Vec<MatrixJson>,
}

impl From<&BasisFamily> for BasisJson {
    fn from(b: &BasisFamily) -> Self {
        BasisJson { d: b.dim(), v: b.matrices().iter().map(MatrixJson::from).collect() }
    }
}

impl BasisJson {
    pub fn to_family(&self) -> Result<BasisFamily, Error> {
        let v = self.v.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>, _>>()?;
        if v.len() != self.d {
            return Err(Error::Parse(format!("{} matrices for d = {}", v.len(), self.d)));
        }
        BasisFamily::new(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U81ParamsJson {
    pub b2: [f64; 2],
    pub b3: [f64; 2],
}

impl From<&U81Params> for U81ParamsJson {
    fn from(p: &U81Params) -> Self {
        U81ParamsJson { b2: [p.b2.0, p.b2.1], b3: [p.b3.0, p.b3.1] }
    }
}

impl U81ParamsJson {
    pub fn to_params(&self) -> U81Params {
        U81Params::new((self.b2[0], self.b2[1]), (self.b3[0], self.b3[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateMetricsJson {
    pub d: usize,
    pub e_p: f64,
    pub g_t: f64,
    pub d_p: f64,
    pub e_u: f64,
    pub e_us: f64,
    pub residual_r: f64,
    pub residual_gamma: f64,
}

impl From<&GateMetrics> for GateMetricsJson {
    fn from(m: &GateMetrics) -> Self {
        GateMetricsJson {
            d: m.d,
            e_p: m.e_p,
            g_t: m.g_t,
            d_p: m.d_p,
            e_u: m.e_u,
            e_us: m.e_us,
            residual_r: m.residual_r,
            residual_gamma: m.residual_gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRangeJson {
    pub alpha: String,
    pub lo: f64,
    pub hi: f64,
    pub probes_used: Vec<String>,
    pub restarts: usize,
}

impl From<&CoherenceRange> for CoherenceRangeJson {
    fn from(r: &CoherenceRange) -> Self {
        CoherenceRangeJson {
            alpha: alpha_name(r.alpha.value()),
            lo: r.lo,
            hi: r.hi,
            probes_used: r.probes_used.clone(),
            restarts: r.restarts,
        }
    }
}

pub fn alpha_name(a: f64) -> String {
    if a.is_infinite() {
        "inf".into()
    } else {
        format!("{a}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantJson {
    pub quadruple: String,
    pub re: f64,
    pub im: f64,
    /// Integer value when the gate has integer entries.
    pub exact: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleJson {
    pub gate_id: String,
    pub d: usize,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl From<&EntanglementSample> for SampleJson {
    fn from(s: &EntanglementSample) -> Self {
        SampleJson { gate_id: s.gate_id.clone(), d: s.d, seed: s.seed, values: s.values.clone() }
    }
}

impl SampleJson {
    pub fn to_sample(&self) -> EntanglementSample {
        EntanglementSample { gate_id: self.gate_id.clone(), d: self.d, seed: self.seed, values: self.values.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsJson {
    pub a: String,
    pub b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub seed: u64,
    pub statistic: f64,
    pub lambda: f64,
    /// `null` below 1e-300; see `p_display`.
    pub p: Option<f64>,
    pub p_display: String,
    pub log10_p: f64,
    pub critical_value_05: f64,
}

impl KsJson {
    pub fn new(a: &str, b: &str, seed: u64, r: &KsResult) -> Self {
        KsJson {
            a: a.into(),
            b: b.into(),
            n_a: r.n,
            n_b: r.m,
            seed,
            statistic: r.statistic,
            lambda: r.lambda,
            p: (!r.underflow()).then_some(r.p),
            p_display: r.p_display(),
            log10_p: r.log10_p,
            critical_value_05: r.critical_value(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U49CertificateJson {
    pub residual: f64,
    pub e_p: f64,
    pub invariant: [f64; 2],
    pub s2: f64,
    pub amplitude_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U49Json {
    pub seed: u64,
    pub restart: usize,
    pub sweeps: usize,
    pub bases: BasisJson,
    pub certificate: U49CertificateJson,
}

/// One restart of `search run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchLogJson {
    pub restart: usize,
    pub seed: u64,
    pub converged: bool,
    pub sweeps: usize,
    pub reseeds: usize,
    pub final_residual: f64,
    pub residual_trace: Vec<f64>,
    pub permutation_like: bool,
    pub e_p: Option<f64>,
    pub invariant: Option<[f64; 2]>,
    pub bases: BasisJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    /// Path → SHA-256 of every input file read.
    pub input_hashes: BTreeMap<String, String>,
    pub output_paths: Vec<String>,
    pub wall_time_s: f64,
}
