use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fjlp", version, about = "Fast l2 -> lp embeddings: plan, embed, verify, bench")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "FJLP_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Required target dimension and/or a transform spec.
    Plan(PlanArgs),
    /// Apply a transform to a file of vectors.
    Embed(EmbedArgs),
    /// Run one verification check.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Time the pipeline stages over a grid of dimensions.
    Bench(BenchArgs),
    /// Hard-family separation, encoding roundtrips and the lower-bound table.
    Lowerbound(LowerboundArgs),
}

/// Shape of a transform given on the command line.
#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enforce k <= d_pad^(1/4) (the default).
    #[arg(long, conflicts_with = "relaxed")]
    pub strict: bool,
    /// Allow k up to sqrt(d_pad) - 1.
    #[arg(long)]
    pub relaxed: bool,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Number of points.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub rho: f64,
    #[arg(long = "C0", alias = "c0", default_value_t = fjlp_core::DEFAULT_C0)]
    pub c0: f64,
    #[command(flatten)]
    pub transform: TransformArgs,
    /// Write the spec here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Auto,
    Csv,
    Binary,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Transform spec JSON; otherwise the transform flags are used.
    #[arg(long, conflicts_with_all = ["d", "k"])]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub transform: TransformArgs,
    /// Output format; `auto` keeps the input's.
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputShape {
    Flat,
    Spike,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Exact quadruple-pattern counts of the sign matrix.
    Fourwise {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = fjlp_core::fourwise::DEFAULT_STRENGTH_BUDGET)]
        budget: u128,
    },
    /// Exact p-th moment error by enumeration of all sign patterns.
    Moment {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long = "C0", alias = "c0", default_value_t = fjlp_core::DEFAULT_C0)]
        c0: f64,
        #[arg(long, value_enum, default_value_t = InputShape::Flat)]
        x: InputShape,
    },
    /// Monte-Carlo tail of the embedded norm around 1.
    Tail {
        #[command(flatten)]
        transform: TransformArgs,
        /// One or more deviations, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long = "C0", alias = "c0", default_value_t = fjlp_core::DEFAULT_C0)]
        c0: f64,
        #[arg(long, value_enum, default_value_t = InputShape::Flat)]
        x: InputShape,
    },
    /// l4 flatness of HDx against its exponential bound.
    Flatness {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = InputShape::Spike)]
        x: InputShape,
    },
    /// Operator-norm bounds on the column-scaled sign matrix.
    Opnorm {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        /// Number of random unit vectors.
        #[arg(long, default_value_t = 100)]
        vectors: usize,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Maximum pairwise distortion on a random or given point set.
    Distortion {
        #[command(flatten)]
        transform: TransformArgs,
        /// Number of random points (ignored with --input).
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        rho: f64,
        /// Compare against the Gaussian baseline over this many seeds.
        #[arg(long)]
        gaussian_seeds: Option<usize>,
        #[arg(long, default_value_t = fjlp_core::verify::DEFAULT_GAUSSIAN_RATIO)]
        ratio: f64,
    },
    /// Kolmogorov-Smirnov distance to the dense Gaussian embedding.
    Gaussian {
        #[command(flatten)]
        transform: TransformArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = fjlp_core::verify::DEFAULT_KS_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = InputShape::Flat)]
        x: InputShape,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Dimensions (powers of four), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "65536,262144,1048576,4194304")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest k*d for which the explicit multiply is timed.
    #[arg(long, default_value_t = fjlp_core::profile::DEFAULT_EXPLICIT_BUDGET)]
    pub explicit_budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Euclidean,
    Max,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub families: usize,
    /// Target dimension of the test maps; defaults to d.
    #[arg(long)]
    pub k: Option<usize>,
    /// Point counts for the table, comma separated; defaults to 2d+1 and powers of ten.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
    pub norm: NormArg,
}
