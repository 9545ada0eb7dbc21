//! `mncf`: counting, sampling, sensitivity and network dynamics of nested
//! canalizing functions over prime fields.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::CliError;

#[derive(Parser)]
#[command(name = "mncf", version, about = "Nested canalizing functions over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    /// Case-ladder parameters drawn uniformly (order, segments, outputs).
    Parameter,
    /// Uniform over distinct functions.
    Function,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountMethodArg {
    Closed,
    Recursive,
    Egf,
    Census,
    /// Closed form, recursion and series; fails unless all agree.
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Mc,
    MeanField,
    Both,
}

#[derive(Args, Clone)]
pub struct Out {
    /// Write to this file (atomically) instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Clone, Copy)]
pub struct Rng {
    /// 64-bit seed; every seeded command is reproducible for fixed flags.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this value.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Clone)]
pub struct NetworkArgs {
    /// Number of nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Constant in-degree.
    #[arg(long, conflicts_with = "indegrees")]
    pub indegree: Option<usize>,
    /// Per-node in-degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub indegrees: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "parameter")]
    pub distribution: DistArg,
    /// Allow a node to read its own state.
    #[arg(long)]
    pub allow_self_inputs: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact number of nested canalizing functions.
    #[command(after_help = "Output: the bare count. With --format json: \
{\"schema\":1,\"p\",\"n\",\"counts\":{method: decimal string}}. \
With --format csv: `p,n,method,count`. Counts are exact integers.")]
    Count {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "closed")]
        method: CountMethodArg,
        #[command(flatten)]
        out: Out,
    },
    /// Exact counts against the asymptotic approximation.
    #[command(after_help = "CSV (default): `n,exact,approx,rel_error`; exact is an integer, approx has 30 \
significant digits, rel_error = |approx-exact|/exact as a float. JSON: {\"schema\":1,\"p\",\"rows\":[...]}.")]
    Approx {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 80)]
        n_max: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Equivalence-class formula, optionally compared with a direct orbit census.
    #[command(after_help = "Output: the bare formula value. With --orbits (or --format csv/json) the orbit \
count of distinct functions under variable permutation is reported beside it. The two are different \
quantities and are not expected to agree. CSV: `p,n,formula,orbits`.")]
    Classes {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        orbits: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Exhaustive enumeration of all tables, stratified by layer structure.
    #[command(after_help = "CSV (default): `layers,single_last,census,formula` plus a `total` row; all \
columns exact integers. JSON adds the functions when --list is given.")]
    Census {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Random nested canalizing functions.
    #[command(after_help = "JSON only: {\"schema\":1,\"rng\",\"seed\",\"distribution\",\"functions\":[{\"canonical\",\"table\"}]}. \
Canonical forms: {\"p\",\"n\",\"layers\":[[[var,\"L:j\"|\"U:j\"],...],...],\"constants\":[B_1..B_{r+1}]}; \
tables: {\"p\",\"n\",\"values\"} indexed with x_0 most significant.")]
    Generate {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "function")]
        distribution: DistArg,
        /// Required layer number.
        #[arg(long)]
        layers: Option<usize>,
        /// Required layer sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        composition: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        rng: Rng,
        #[command(flatten)]
        out: Out,
    },
    /// Random network of nested canalizing functions.
    #[command(after_help = "JSON only: {\"schema\":1,\"p\",\"nodes\":[{\"id\",\"inputs\",\"table\"}]}.")]
    GenNetwork {
        #[arg(long)]
        p: u32,
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        rng: Rng,
        #[command(flatten)]
        out: Out,
    },
    /// Structure of a function given as a table or canonical-form JSON file.
    #[command(after_help = "JSON only: essential variables, canalizing triples, nested-canalizing flag, \
canonical form, layer number, layer sizes, layer outputs and exact sensitivities.")]
    Analyze {
        /// Table ({\"p\",\"n\",\"values\"}) or canonical form JSON.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// c-sensitivities: closed formula, exhaustive oracle and Monte Carlo.
    #[command(after_help = "CSV (default): `c,q_formula,q_mc,stderr,samples`. q_formula is the exact \
ensemble mean as a float; q_mc is the Monte Carlo mean (empty without --samples). With --input the \
function's exact values are written as `c,q_exact,q`. JSON carries rationals as \"num/den\" strings \
beside floats.")]
    Sensitivity {
        #[arg(long, required_unless_present = "input")]
        p: Option<u32>,
        #[arg(long, required_unless_present = "input")]
        n: Option<usize>,
        /// Exact values for one function instead of the ensemble.
        #[arg(long, conflicts_with_all = ["p", "n"])]
        input: Option<PathBuf>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, value_enum, default_value = "parameter")]
        distribution: DistArg,
        /// Also average over every parameter tuple (small p, n only; JSON `q_oracle`).
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        rng: Rng,
        #[command(flatten)]
        out: Out,
    },
    /// One-step Derrida curve: Monte Carlo and mean field.
    #[command(after_help = "CSV (default): `m,D,stderr,samples,estimator` with estimator `monte-carlo` \
or `mean-field`; D is a float, stderr and samples are empty for mean field. With --network the \
network is fixed (quenched); otherwise a new network is drawn per sample (annealed).")]
    Derrida {
        #[arg(long, conflicts_with = "nodes")]
        network: Option<PathBuf>,
        #[arg(long, required_unless_present = "network")]
        p: Option<u32>,
        #[command(flatten)]
        net: NetworkArgs,
        /// Perturbation sizes, comma separated (default 1..=N).
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, value_enum, default_value = "both")]
        estimator: EstimatorArg,
        #[command(flatten)]
        rng: Rng,
        #[command(flatten)]
        out: Out,
    },
    /// Attractor cycles and basin sizes by exhaustive search.
    #[command(after_help = "JSON (default): {\"schema\":1,\"p\",\"nodes\",\"attractors\":[{\"period\",\"basin_size\",\"states\":[[x_0..x_{N-1}],...]}]}, \
cycles start at their smallest state and are sorted by it. CSV: `attractor,period,basin_size,states` \
with states written as digit strings joined by `;`.")]
    Attractors {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = mncf::network::DEFAULT_STATE_CAP)]
        state_cap: u64,
        #[command(flatten)]
        out: Out,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    use commands::*;
    match cli.command {
        Command::Count { p, n, method, out } => count(p, n, method, &out),
        Command::Approx { p, n_max, out } => approx(p, n_max, &out),
        Command::Classes { p, n, orbits, out } => classes(p, n, orbits, &out),
        Command::Census { p, n, list, out } => census(p, n, list, &out),
        Command::Generate { p, n, distribution, layers, composition, count, rng, out } => {
            generate(p, n, distribution, layers, composition, count, rng, &out)
        }
        Command::GenNetwork { p, net, rng, out } => gen_network(p, &net, rng, &out),
        Command::Analyze { input, out } => analyze(&input, &out),
        Command::Sensitivity { p, n, input, samples, distribution, oracle, rng, out } => match input {
            Some(path) => sensitivity_of_function(&path, &out),
            None => sensitivity(p.unwrap(), n.unwrap(), samples, distribution, oracle, rng, &out),
        },
        Command::Derrida { network, p, net, m, samples, estimator, rng, out } => {
            derrida(network.as_deref(), p, &net, m, samples, estimator, rng, &out)
        }
        Command::Attractors { network, state_cap, out } => attractors(&network, state_cap, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mncf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
