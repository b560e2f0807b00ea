use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fermap::ancilla::{self, AncillaPlan};
use fermap::bitmat::BitVec;
use fermap::cost::{cost_components, Aggregator};
use fermap::encodings::{EncodingKind, LinearEncoding};
use fermap::experiment::{self, ExperimentConfig};
use fermap::graphs::{GraphSpec, HamiltonianGraph, ModelPreset, Ordering};
use fermap::pauli::assemble_hamiltonian;
use fermap::qap::{self, SearchParams};

#[derive(Parser)]
#[command(
    name = "fermap",
    version,
    about = "Fermion-to-qubit encodings, label orders and ancilla plans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Hamiltonian graph file.
    GenGraph(GenGraph),
    /// Print the encoding matrices, or encode an occupation bitstring.
    Encode {
        #[arg(short, long)]
        encoding: EncodingKind,
        #[arg(short, long)]
        n: usize,
        /// Occupation bitstring, mode 0 first.
        #[arg(long)]
        state: Option<String>,
    },
    /// Write the cost component matrices as CSV files.
    CostMatrix {
        #[arg(short, long)]
        encoding: EncodingKind,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value = "total")]
        objective: Aggregator,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Search for a low-cost mode order.
    OptimizeOrder {
        #[command(flatten)]
        input: GraphInput,
        #[arg(short, long, default_value = "jw")]
        encoding: EncodingKind,
        #[arg(long, default_value = "total")]
        objective: Aggregator,
        #[command(flatten)]
        search: SearchArgs,
        /// Enumerate every order (small graphs only).
        #[arg(long)]
        brute_force: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Search for an ancilla plan on top of a Jordan-Wigner order.
    OptimizeAncilla {
        #[command(flatten)]
        input: GraphInput,
        /// Order JSON; the identity order when omitted.
        #[arg(long)]
        order: Option<PathBuf>,
        #[arg(short = 'p', long, default_value_t = 1)]
        ancillas: usize,
        #[command(flatten)]
        search: SearchArgs,
        /// Also write `p,total_hopping_weight` for every budget up to `--ancillas`.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the qubit Hamiltonian, one `(re,im) pauli` line per term.
    ExportHamiltonian {
        #[command(flatten)]
        input: GraphInput,
        #[arg(short, long, default_value = "jw")]
        encoding: EncodingKind,
        #[arg(long)]
        order: Option<PathBuf>,
        /// Ancilla plan JSON (Jordan-Wigner only).
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and write its CSV report.
    Report {
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct GenGraph {
    #[command(subcommand)]
    generator: Generator,
    #[arg(long, global = true, default_value = "full")]
    model: ModelPreset,
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Generator {
    Grid {
        rows: usize,
        cols: usize,
        #[arg(long)]
        periodic: bool,
    },
    Hex {
        rows: usize,
        cols: usize,
        #[arg(long)]
        periodic: bool,
    },
    Tri {
        rows: usize,
        cols: usize,
        #[arg(long)]
        periodic: bool,
    },
    RandomRegular {
        degree: usize,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Margulis {
        m: usize,
    },
    ChordalCycle {
        p: usize,
    },
}

impl Generator {
    fn spec(&self) -> GraphSpec {
        match *self {
            Generator::Grid { rows, cols, periodic } => GraphSpec::Grid { rows, cols, periodic },
            Generator::Hex { rows, cols, periodic } => GraphSpec::Hex { rows, cols, periodic },
            Generator::Tri { rows, cols, periodic } => GraphSpec::Tri { rows, cols, periodic },
            Generator::RandomRegular { degree, n, seed } => GraphSpec::RandomRegular { degree, n, seed },
            Generator::Margulis { m } => GraphSpec::Margulis { m },
            Generator::ChordalCycle { p } => GraphSpec::ChordalCycle { p },
        }
    }
}

#[derive(Args)]
struct GraphInput {
    /// Graph JSON file.
    #[arg(short, long)]
    graph: PathBuf,
    /// Replace the file's term flags with a preset.
    #[arg(long)]
    model: Option<ModelPreset>,
}

impl GraphInput {
    fn load(&self) -> Result<HamiltonianGraph> {
        let g = HamiltonianGraph::read(&self.graph)?;
        Ok(match self.model {
            Some(m) => g.with_model(m),
            None => g,
        })
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long)]
    iterations: Option<u64>,
    /// Seconds per restart.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl SearchArgs {
    fn params(&self) -> SearchParams {
        SearchParams {
            seed: self.seed,
            restarts: self.restarts,
            iterations: self.iterations,
            time_limit: self.time_limit,
            ..SearchParams::default()
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_order(path: Option<&Path>, n: usize) -> Result<Ordering> {
    let Some(path) = path else {
        return Ok(Ordering::identity(n));
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let order: Ordering = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if order.len() != n {
        bail!(
            "order in {} has {} entries, graph has {n} vertices",
            path.display(),
            order.len()
        );
    }
    Ok(order)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGraph(args) => {
            let graph = args.generator.spec().build()?.with_model(args.model);
            emit(args.out.as_deref(), &(graph.to_json()? + "\n"))?;
        }
        Command::Encode { encoding, n, state } => {
            let enc = LinearEncoding::build(encoding, n)?;
            match state {
                Some(s) => {
                    let occ = BitVec::parse(&s)?;
                    println!("{}", enc.encode_state(&occ)?.to_bitstring());
                }
                None => println!("{}", serde_json::to_string_pretty(&enc.dump())?),
            }
        }
        Command::CostMatrix {
            encoding,
            n,
            objective,
            out,
        } => {
            let enc = LinearEncoding::build(encoding, n)?;
            cost_components(&enc, objective).write_csv(&out)?;
        }
        Command::OptimizeOrder {
            input,
            encoding,
            objective,
            search,
            brute_force,
            out,
        } => {
            let graph = input.load()?;
            let enc = LinearEncoding::build(encoding, graph.n())?;
            let cc = cost_components(&enc, objective);
            let result = if brute_force {
                qap::brute_force(&cc, &graph)?
            } else {
                qap::optimize_order(&cc, &graph, &search.params())?
            };
            if result.timed_out {
                eprintln!("warning: time limit reached, result may be improvable");
            }
            eprintln!(
                "value {} (optimal: {}) in {:.2?}",
                result.value, result.proven_optimal, result.elapsed
            );
            emit(out.as_deref(), &(serde_json::to_string(&result.order)? + "\n"))?;
        }
        Command::OptimizeAncilla {
            input,
            order,
            ancillas,
            search,
            sweep,
            out,
        } => {
            let graph = input.load()?;
            let order = read_order(order.as_deref(), graph.n())?;
            let results = ancilla::optimize_plan_sweep(&graph, &order, ancillas, &search.params())?;
            if let Some(path) = sweep {
                let mut text = String::from("p,total_hopping_weight\n");
                for (p, r) in results.iter().enumerate() {
                    text += &format!("{p},{}\n", r.hopping_weight());
                }
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            let best = results.last().expect("sweep includes budget zero");
            eprintln!(
                "hopping weight {} -> {} ({:.1}% reduction) with {} ancillas",
                best.base_weight,
                best.hopping_weight(),
                100.0 * best.reduction(),
                best.plan.len()
            );
            emit(out.as_deref(), &(serde_json::to_string_pretty(&best.plan)? + "\n"))?;
        }
        Command::ExportHamiltonian {
            input,
            encoding,
            order,
            plan,
            out,
        } => {
            let graph = input.load()?;
            let order = read_order(order.as_deref(), graph.n())?;
            let enc = LinearEncoding::build(encoding, graph.n())?;
            let mut h = assemble_hamiltonian(&graph, &enc, &order)?;
            if let Some(path) = plan {
                h = ancilla::apply_plan(&h, &AncillaPlan::read(&path)?)?;
            }
            let mut text = h.export_lines().join("\n");
            text.push('\n');
            emit(out.as_deref(), &text)?;
        }
        Command::Report { config, out, seed } => {
            let mut config = ExperimentConfig::read(&config)?;
            if let Some(path) = out {
                config.output = path;
            }
            if let Some(s) = seed {
                config.search.seed = s;
            }
            let rows = experiment::run(&config)?;
            experiment::write_report(&rows, &config.output)?;
            if rows.iter().any(|r| r.timed_out) {
                eprintln!("warning: some searches hit their time limit");
            }
            eprintln!(
                "{}: {} rows written to {}",
                config.name,
                rows.len(),
                config.output.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
