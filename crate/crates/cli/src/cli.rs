//! Argument grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qconv", version, about = "Coherified permutation tensors, 2-unitary gates and their certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Latin squares, hypercubes and permutation 2-unitaries.
    #[command(subcommand)]
    Latin(LatinCmd),
    /// Build or check coherifications of permutation tensors.
    #[command(subcommand)]
    Coherify(CoherifyCmd),
    /// Entangling power, gate typicality and the (e_p, g_t) scatter.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Local-unitary invariants.
    #[command(subcommand)]
    Invariant(InvariantCmd),
    /// Coherence ranges under local unitaries.
    #[command(subcommand)]
    Coherence(CoherenceCmd),
    /// Named gate families.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Sinkhorn-type alternating projections.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Output-entanglement samples and Kolmogorov–Smirnov comparisons.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Regenerate figure and table data: fig2, fig4, tableA, inv49.
    Repro(ReproArgs),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InArg {
    /// Input matrix file; stdin when omitted.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LatinCmd {
    /// Mutually orthogonal Latin squares over GF(d).
    Mols {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Mutually orthogonal Latin hypercubes.
    Cubes {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        count: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// The permutation 2-unitary of an orthogonal pair from `mols`.
    Perm {
        #[arg(long)]
        d: usize,
        /// Indices of the two squares in the `mols` list.
        #[arg(long, default_value = "0,1")]
        pair: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum CoherifyCmd {
    /// `U_{ki,lj} = A_{klj} (a_{k,l})_i`.
    Build {
        /// `cyclic` or a tensor / Latin JSON file.
        #[arg(long)]
        tensor: String,
        /// Basis family JSON, or `mub` / `computational`.
        #[arg(long)]
        bases: String,
        /// Dimension when both inputs are keywords.
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Quantum tristochasticity of a coherification.
    Check {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        tensor: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum MetricsCmd {
    /// All scalar metrics of one gate.
    Gate {
        #[command(flatten)]
        input: InArg,
        /// Emit JSON instead of `name  value  rounded` lines.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// (e_p, g_t) of random and distinguished coherifications as CSV.
    Scatter {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum InvariantCmd {
    Eval {
        #[command(flatten)]
        input: InArg,
        /// Four permutations in cycle notation.
        #[arg(long, default_value = "id,(12)(34),(13)(24),(14)(23)")]
        quad: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum CoherenceCmd {
    Range {
        #[command(flatten)]
        input: InArg,
        /// Rényi order; `0`, `inf` or a positive number.
        #[arg(long, default_value = "2")]
        alpha: String,
        /// Annealing steps; 1000 per restart.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum FamilyCmd {
    /// The d = 9 two-parameter family.
    U81 {
        /// Parameter file `{"b2": [α1, α2], "b3": [α1, α2]}`.
        #[arg(long, conflicts_with_all = ["symmetric", "limit", "seed"])]
        params: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["limit", "seed"])]
        symmetric: bool,
        /// Parameters at which the gate becomes a permutation.
        #[arg(long, conflicts_with = "seed")]
        limit: bool,
        /// Random parameters from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the parameters used.
        #[arg(long)]
        emit_params: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Real orthogonal d = 6 candidate.
    D6 {
        #[command(flatten)]
        out: OutArg,
    },
    /// Two-ququart permutation gate.
    P16 {
        /// Compare against the nearest-neighbour CNOT circuit and the magic
        /// basis mapping; report on stderr, exit 2 on mismatch.
        #[arg(long)]
        verify_circuit: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Three-ququart 3-unitary from orthogonal Latin cubes.
    U64 {
        #[command(flatten)]
        out: OutArg,
    },
    /// Cyclic-ansatz search at d = 7.
    U49 {
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum SearchCmd {
    Run {
        #[arg(long)]
        d: usize,
        /// `cyclic` or a tensor / Latin JSON file.
        #[arg(long, default_value = "cyclic")]
        tensor: String,
        /// `none` or `cyclic`.
        #[arg(long, default_value = "none")]
        constraint: String,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = qconv_core::search::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = qconv_core::search::DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
        /// Directory for per-restart logs.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum StatsCmd {
    /// Linear entropies of outputs on Haar-random product inputs.
    Sample {
        #[command(flatten)]
        input: InArg,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "gate")]
        id: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Two-sample KS test between the output-entanglement distributions of two gates.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
        /// CSV with columns bin_lo, bin_hi, count_a, count_b.
        #[arg(long)]
        hist: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// fig2, fig4, tableA or inv49.
    pub id: String,
    /// Output directory.
    #[arg(long, default_value = "repro")]
    pub out: PathBuf,
    /// Sample count (fig2: coherifications, fig4: draws per gate).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stored `family u49` result for inv49; searched afresh when omitted.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
}
