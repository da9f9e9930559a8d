//! `graphon`: sample graphs, build Fourier-Galerkin operators, design filters
//! and run the filter experiments from the command line.
//!
//! Exit codes: 0 on success, 1 when a result is not finite, 2 on usage or
//! validation errors.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use graphon_core::chebyshev::resample_grid;
use graphon_core::experiments::{
    run_consensus, run_filter_convergence, run_lowpass, slug, write_curves_csv, write_records_csv, ExperimentConfig,
    ExperimentOutput,
};
use graphon_core::filter::{design_filter, fg_filter_operator, frequency_response, FilterCoeffs, IdealResponse};
use graphon_core::galerkin::{build_fg_shift, fredholm_solve, resolvent_eigs, DEFAULT_BASIS, DEFAULT_PANELS};
use graphon_core::homomorphism::{hom_density_graph, hom_density_graphon, Motif};
use graphon_core::input::InputFunction;
use graphon_core::kernels::parse_graphon_spec;
use graphon_core::sampling::sample_graph;
use graphon_core::{Graph, Graphon, Seed};

#[derive(Parser)]
#[command(name = "graphon", version, about = "Graph signal processing on graphons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a kernel-based random graph and write its edge list.
    Sample(SampleArgs),
    /// Build the Fourier-Galerkin shift operator and write it as CSV.
    #[command(name = "fg-operator")]
    FgOperator(FgOperatorArgs),
    /// Approximate `g(x) = int W(x, y) f(y) dy` on a uniform grid.
    Solve(SolveArgs),
    /// Least-squares design of a polynomial graphon filter.
    Design(DesignArgs),
    /// Homomorphism density of a motif in a graphon or a graph.
    Homdensity(HomArgs),
    /// Low-pass design study.
    #[command(name = "experiment:lowpass")]
    Lowpass(StudyArgs),
    /// Consensus design study.
    #[command(name = "experiment:consensus")]
    Consensus(StudyArgs),
    /// Graph-to-graphon filter convergence study.
    #[command(name = "experiment:convergence")]
    Convergence(ConvergenceArgs),
}

fn graphon_arg(s: &str) -> Result<Graphon, String> {
    parse_graphon_spec(s).map_err(|e| e.to_string())
}

fn input_arg(s: &str) -> Result<InputFunction, String> {
    s.parse().map_err(|e: graphon_core::Error| e.to_string())
}

fn motif_arg(s: &str) -> Result<Motif, String> {
    s.parse().map_err(|e: graphon_core::Error| e.to_string())
}

fn ideal_arg(s: &str) -> Result<IdealResponse, String> {
    IdealResponse::parse_list(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct SampleArgs {
    /// Graphon spec, e.g. `er:0.5`, `expdist:10` or `file:grid.csv`.
    #[arg(long, value_parser = graphon_arg)]
    graphon: Graphon,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep latent values in draw order instead of sorting them.
    #[arg(long)]
    unsorted: bool,
    /// Edge-list output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV of latent values, one per node.
    #[arg(long)]
    latent: Option<PathBuf>,
}

#[derive(Args)]
struct FgOperatorArgs {
    #[arg(long, value_parser = graphon_arg)]
    graphon: Graphon,
    /// Quadrature panels `p`.
    #[arg(long, default_value_t = DEFAULT_PANELS)]
    panels: usize,
    /// Basis size `n`.
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    basis: usize,
    /// Operator CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print eigenvalue estimates as JSON.
    #[arg(long)]
    eigs: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = graphon_arg)]
    graphon: Graphon,
    #[arg(long, default_value_t = DEFAULT_PANELS)]
    panels: usize,
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    basis: usize,
    /// Input function: `y`, `x_plus_sin` or `const:<v>`.
    #[arg(long, value_parser = input_arg, default_value = "y")]
    input: InputFunction,
    /// Number of uniform output points on `[0, 1]`.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// CSV path with columns `x,g`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, value_parser = graphon_arg)]
    graphon: Graphon,
    /// Filter order `K` (number of taps).
    #[arg(long)]
    order: usize,
    /// Diagonal of the ideal response, comma separated.
    #[arg(long, value_parser = ideal_arg)]
    ideal: IdealResponse,
    #[arg(long, default_value_t = DEFAULT_PANELS)]
    panels: usize,
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    basis: usize,
    /// Relative singular value cutoff of the pseudoinverse.
    #[arg(long = "svd-tol", default_value_t = 1e-8)]
    svd_tol: f64,
    /// Optional CSV of the frequency response `H 1`.
    #[arg(long)]
    response: Option<PathBuf>,
}

#[derive(Args)]
struct HomArgs {
    /// `edge`, `triangle`, `path3` or `custom:0-1,1-2,...`.
    #[arg(long, value_parser = motif_arg)]
    motif: Motif,
    /// Graphon for a Monte-Carlo estimate.
    #[arg(long, value_parser = graphon_arg, required_unless_present = "graph", conflicts_with = "graph")]
    graphon: Option<Graphon>,
    /// Edge-list file for the exact graph density.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CommonStudy {
    /// Node counts, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    node_counts: Option<Vec<usize>>,
    /// Seeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, default_value_t = DEFAULT_PANELS)]
    panels: usize,
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    basis: usize,
    #[arg(long, value_parser = input_arg, default_value = "x_plus_sin")]
    input: InputFunction,
    /// Resample points of the comparison grid.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    unsorted: bool,
    /// Directory receiving the records and curve CSVs.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    /// Graphon specs; repeat the flag for several.
    #[arg(long = "graphon", value_parser = graphon_arg)]
    graphons: Vec<Graphon>,
    /// Largest order of the sweep.
    #[arg(long = "max-order", default_value_t = 8)]
    max_order: usize,
    /// Order whose curves are written.
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Overrides the study's ideal response.
    #[arg(long, value_parser = ideal_arg)]
    ideal: Option<IdealResponse>,
    #[arg(long = "svd-tol", default_value_t = 1e-8)]
    svd_tol: f64,
    #[command(flatten)]
    common: CommonStudy,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long = "graphon", value_parser = graphon_arg)]
    graphons: Vec<Graphon>,
    /// Filter taps `h_0, h_1, ...`.
    #[arg(long, value_delimiter = ',')]
    taps: Option<Vec<f64>>,
    #[command(flatten)]
    common: CommonStudy,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    NonFinite(String),
}

impl From<graphon_core::Error> for Failure {
    fn from(e: graphon_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn ensure_finite<'a>(what: &str, values: impl IntoIterator<Item = &'a f64>) -> Outcome {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure::NonFinite(format!("{what} contains non-finite values")))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string(value).map_err(|e| Failure::NonFinite(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn sample(args: SampleArgs) -> Outcome {
    let g = sample_graph(&args.graphon, args.n, Seed(args.seed), !args.unsorted)?;
    let mut out = create(&args.out)?;
    out.write_all(g.to_edge_list().as_bytes())?;
    out.flush()?;
    if let Some(path) = &args.latent {
        let mut out = create(path)?;
        writeln!(out, "latent")?;
        for mu in g.latent().unwrap_or_default() {
            writeln!(out, "{mu}")?;
        }
        out.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EigsReport<'a> {
    eigenvalues: &'a [f64],
    asymmetry: f64,
    asymmetry_warning: bool,
}

fn fg_operator(args: FgOperatorArgs) -> Outcome {
    let op = build_fg_shift(&args.graphon, args.panels, args.basis)?;
    ensure_finite("operator", op.entries().iter())?;
    let mut out = output(args.out.as_deref())?;
    op.write_csv(&mut out)?;
    out.flush()?;
    drop(out);
    if args.eigs {
        let spec = resolvent_eigs(&op);
        print_json(&EigsReport {
            eigenvalues: &spec.values,
            asymmetry: spec.asymmetry,
            asymmetry_warning: spec.asymmetry_warning(),
        })?;
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Outcome {
    let input = args.input;
    let g = fredholm_solve(&args.graphon, |y| input.eval(y), args.panels, args.basis, args.points)?;
    ensure_finite("solution", &g)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "x,g")?;
    for (u, v) in resample_grid(args.points).iter().zip(&g) {
        writeln!(out, "{},{v}", (u + 1.0) / 2.0)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DesignReport<'a> {
    h: &'a [f64],
    residual: f64,
    rank_used: usize,
}

fn design(args: DesignArgs) -> Outcome {
    let op = build_fg_shift(&args.graphon, args.panels, args.basis)?;
    let d = design_filter(&op, args.order, &args.ideal, args.svd_tol)?;
    ensure_finite("filter taps", d.coeffs.taps().iter().chain([&d.residual]))?;
    if let Some(path) = &args.response {
        let response = frequency_response(&fg_filter_operator(&op, &d.coeffs))?;
        let mut out = create(path)?;
        writeln!(out, "degree,response")?;
        for (k, r) in response.iter().enumerate() {
            writeln!(out, "{k},{r}")?;
        }
        out.flush()?;
    }
    print_json(&DesignReport {
        h: d.coeffs.taps(),
        residual: d.residual,
        rank_used: d.rank_used,
    })
}

#[derive(Serialize)]
struct HomReport {
    motif: String,
    estimate: f64,
    std_error: Option<f64>,
    samples: Option<usize>,
}

fn homdensity(args: HomArgs) -> Outcome {
    let report = match (&args.graphon, &args.graph) {
        (Some(w), _) => {
            let est = hom_density_graphon(&args.motif, w, args.samples, Seed(args.seed))?;
            HomReport {
                motif: args.motif.to_string(),
                estimate: est.estimate,
                std_error: Some(est.std_error),
                samples: Some(est.samples),
            }
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let g = Graph::from_edge_list(&text)?;
            HomReport {
                motif: args.motif.to_string(),
                estimate: hom_density_graph(&args.motif, &g)?,
                std_error: None,
                samples: None,
            }
        }
        (None, None) => return Err(Failure::Usage("one of --graphon or --graph is required".into())),
    };
    ensure_finite("density", [&report.estimate])?;
    print_json(&report)
}

fn apply_common(cfg: &mut ExperimentConfig, graphons: Vec<Graphon>, common: CommonStudy) -> Result<PathBuf, Failure> {
    if !graphons.is_empty() {
        cfg.graphons = graphons;
    }
    if let Some(n) = common.node_counts {
        cfg.node_counts = n;
    }
    if let Some(s) = common.seeds {
        cfg.seeds = s.into_iter().map(Seed).collect();
    }
    cfg.panels = common.panels;
    cfg.basis = common.basis;
    cfg.input = common.input;
    cfg.t_points = common.points;
    cfg.sorted = !common.unsorted;
    fs::create_dir_all(&common.out_dir).map_err(|e| Failure::Usage(format!("{}: {e}", common.out_dir.display())))?;
    Ok(common.out_dir)
}

fn write_study(name: &str, out: &ExperimentOutput, dir: &Path) -> Outcome {
    ensure_finite(
        "experiment records",
        out.records
            .iter()
            .flat_map(|r| [&r.l2_discrepancy].into_iter().chain(r.residual.as_ref())),
    )?;
    write_records_csv(&out.records, create(&dir.join(format!("{name}.csv")))?)?;
    for c in &out.curves {
        let file = format!("{name}_{}_n{}_seed{}_curves.csv", slug(&c.graphon), c.n, c.seed);
        write_curves_csv(c, create(&dir.join(file))?)?;
    }
    Ok(())
}

fn study(args: StudyArgs, consensus: bool) -> Outcome {
    let mut cfg = ExperimentConfig::design_default();
    cfg.max_order = args.max_order;
    cfg.order = args.order;
    cfg.ideal = args.ideal;
    cfg.svd_tol = args.svd_tol;
    let dir = apply_common(&mut cfg, args.graphons, args.common)?;
    let (name, out) = if consensus {
        ("consensus", run_consensus(&cfg)?)
    } else {
        ("lowpass", run_lowpass(&cfg)?)
    };
    write_study(name, &out, &dir)
}

fn convergence(args: ConvergenceArgs) -> Outcome {
    let mut cfg = ExperimentConfig::convergence_default();
    if let Some(h) = args.taps {
        cfg.coeffs = Some(FilterCoeffs::new(h)?);
    }
    let dir = apply_common(&mut cfg, args.graphons, args.common)?;
    let out = run_filter_convergence(&cfg)?;
    write_study("convergence", &out, &dir)?;
    for w in &cfg.graphons {
        for (n, mean) in out.mean_discrepancy(w.label(), cfg.coeffs.as_ref().map_or(1, |h| h.order())) {
            println!("{} n={n} mean_l2_discrepancy={mean}", w.label());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::FgOperator(a) => fg_operator(a),
        Command::Solve(a) => solve(a),
        Command::Design(a) => design(a),
        Command::Homdensity(a) => homdensity(a),
        Command::Lowpass(a) => study(a, false),
        Command::Consensus(a) => study(a, true),
        Command::Convergence(a) => convergence(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NonFinite(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
