//! Command-line front end for the CBC clustering pipeline.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cbc_core::cbc::{self, CbcParams};
use cbc_core::clustering::Clustering;
use cbc_core::fwgen::{self, EdgeBudget, GenParams};
use cbc_core::gn;
use cbc_core::graph::{Graph, LoadStats};
use cbc_core::io::{read_clusters, read_edge_list, read_pajek, write_clusters};
use cbc_core::metrics::{clustering_distance, clustering_quality, quality_report, QualityReport};

#[derive(Parser)]
#[command(
    name = "cbc",
    about = "Community detection on undirected graphs via betweenness-centrality clustering",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a graph and emit the clustering plus a quality summary.
    Cluster(ClusterArgs),
    /// Generate a synthetic graph with a planted ground-truth clustering.
    Generate(GenerateArgs),
    /// Distance between two clusterings of the same graph.
    Compare(CompareArgs),
    /// Quality report for an existing clustering.
    Stats(StatsArgs),
    /// Per-node betweenness centrality.
    Centrality(CentralityArgs),
    /// Girvan-Newman divisive baseline (small graphs).
    Gn(GnArgs),
    /// Timing/quality sweep over generated graphs, emitted as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Two whitespace-separated labels per line.
    EdgeList,
    /// Pajek .net
    Pajek,
}

#[derive(Args)]
struct InputArgs {
    /// Input graph file.
    input: PathBuf,
    /// Input format.
    #[arg(long, value_enum, default_value_t = Format::EdgeList)]
    format: Format,
}

#[derive(Args)]
struct CbcFlags {
    /// Community strictness: a cluster needs external/internal < s.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Maximum cluster size as a fraction of the node count.
    #[arg(long, default_value_t = 0.5)]
    max_cluster_frac: f64,
    /// Minimum cluster size.
    #[arg(long, default_value_t = 5)]
    min_cluster_size: usize,
    /// Adopt orphan nodes into adjacent clusters.
    #[arg(long)]
    minimize_orphans: bool,
    /// Enforce the strict per-node rule (internal links > external links).
    #[arg(long)]
    flake_strict: bool,
}

impl CbcFlags {
    fn to_params(&self) -> CbcParams {
        CbcParams {
            strictness: self.s,
            max_cluster_frac: self.max_cluster_frac,
            min_cluster_size: self.min_cluster_size,
            minimize_orphans: self.minimize_orphans,
            flake_strict: self.flake_strict,
            ..CbcParams::default()
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    flags: CbcFlags,
    /// Worker threads for the centrality phase (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write the cluster file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report per-phase timings.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    nodes: usize,
    /// Exact edge count.
    #[arg(long, conflicts_with = "density")]
    edges: Option<usize>,
    /// Edge budget as a fraction of the complete graph.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    clusters: usize,
    /// Cluster size imbalance (0 = equal sizes).
    #[arg(long, default_value_t = 0.0)]
    skew: f64,
    /// Fraction of edges placed inside clusters, in (0.5, 1.0].
    #[arg(long)]
    assortativity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes PREFIX.edges and PREFIX.truth.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// First cluster file.
    clusters_a: PathBuf,
    /// Second cluster file.
    clusters_b: PathBuf,
    /// Graph both clusterings refer to.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::EdgeList)]
    format: Format,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Cluster file to evaluate.
    clusters: PathBuf,
    /// Also write the per-cluster rows as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CentralityArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct GnArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of components to split into.
    #[arg(long)]
    k: usize,
    /// Write the cluster file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
    sizes: Vec<usize>,
    /// Edges per node (m = factor * n).
    #[arg(long, default_value_t = 15)]
    edges_per_node: usize,
    /// Comma-separated assortativity values.
    #[arg(long, value_delimiter = ',', default_value = "0.85")]
    assortativity: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    skew: f64,
    /// Cluster count; 0 picks 5/10/100 by graph size.
    #[arg(long, default_value_t = 0)]
    clusters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    minimize_orphans: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn process_cpu_time() -> Duration {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "clock_gettime failed");
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

fn configure_threads(threads: usize) {
    if threads > 0 {
        // Ignore the error if a pool already exists (tests call run twice).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn load_graph(input: &InputArgs) -> Result<(Graph, LoadStats), String> {
    let file = File::open(&input.input)
        .map_err(|e| format!("cannot open {}: {e}", input.input.display()))?;
    let reader = BufReader::new(file);
    let result = match input.format {
        Format::EdgeList => read_edge_list(reader),
        Format::Pajek => read_pajek(reader),
    };
    result.map_err(|e| format!("{}: {e}", input.input.display()))
}

fn load_clusters(path: &Path, graph: &Graph) -> Result<Clustering, String> {
    let file = File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    read_clusters(BufReader::new(file), graph).map_err(|e| format!("{}: {e}", path.display()))
}

fn report_drops(stats: &LoadStats) {
    if stats.total_dropped() > 0 {
        eprintln!(
            "dropped {} self-loop(s) and {} duplicate edge(s)",
            stats.self_loops, stats.duplicate_edges
        );
    }
}

fn print_report<W: Write>(out: &mut W, report: &QualityReport) -> io::Result<()> {
    writeln!(
        out,
        "clusters {}  q_c {:.6}  drate {:.6}  orphans {}",
        report.rows.len(),
        report.q_c,
        report.drate,
        report.orphan_count
    )?;
    writeln!(
        out,
        "{:>8} {:>8} {:>8} {:>12}",
        "nodes", "in", "out", "out/in"
    )?;
    for row in &report.rows {
        writeln!(
            out,
            "{:>8} {:>8} {:>8} {:>12.6}",
            row.size, row.internal, row.external, row.ratio
        )?;
    }
    Ok(())
}

fn write_report_csv(path: &Path, report: &QualityReport) -> Result<(), String> {
    let mut out = BufWriter::new(
        File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?,
    );
    let mut emit = || -> io::Result<()> {
        writeln!(out, "cluster,nodes,internal,external,ratio")?;
        for (idx, row) in report.rows.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{:.6}",
                idx, row.size, row.internal, row.external, row.ratio
            )?;
        }
        Ok(())
    };
    emit().map_err(|e| format!("{}: {e}", path.display()))
}

fn emit_clusters(
    out: &Option<PathBuf>,
    graph: &Graph,
    clustering: &Clustering,
) -> Result<bool, String> {
    match out {
        Some(path) => {
            let mut file = BufWriter::new(
                File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?,
            );
            write_clusters(&mut file, graph, clustering)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(true)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_clusters(&mut lock, graph, clustering).map_err(|e| e.to_string())?;
            Ok(false)
        }
    }
}

fn run_cluster(args: &ClusterArgs) -> Result<i32, String> {
    let params = args.flags.to_params();
    params.validate()?;
    configure_threads(args.threads);
    let (graph, stats) = load_graph(&args.input)?;
    report_drops(&stats);
    let result = cbc::cluster(&graph, &params).map_err(|e| e.to_string())?;

    let to_file = emit_clusters(&args.out, &graph, &result.clustering)?;
    let report = quality_report(&graph, &result.clustering).map_err(|e| e.to_string())?;

    // Keep the summary off stdout when the cluster file goes there.
    let mut summary: Box<dyn Write> = if to_file {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    };
    print_report(&mut summary, &report).map_err(|e| e.to_string())?;
    writeln!(
        summary,
        "conforming {}  rounds {}",
        result.conforming, result.rounds
    )
    .map_err(|e| e.to_string())?;
    if args.timing {
        let t = &result.timings;
        writeln!(
            summary,
            "timings: tails {:?}  centrality {:?}  cliques {:?}  merging {:?}  reassignment {:?}",
            t.tail_detection, t.centrality, t.clique_init, t.merging, t.reassignment
        )
        .map_err(|e| e.to_string())?;
    }
    Ok(if result.conforming { 0 } else { 1 })
}

fn run_generate(args: &GenerateArgs) -> Result<i32, String> {
    let edges = match (args.edges, args.density) {
        (Some(m), None) => EdgeBudget::Count(m),
        (None, Some(d)) => EdgeBudget::Density(d),
        (None, None) => return Err("one of --edges or --density is required".into()),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let params = GenParams {
        n_nodes: args.nodes,
        edges,
        n_clusters: args.clusters,
        skew: args.skew,
        assortativity: args.assortativity,
        seed: args.seed,
    };
    let (graph, truth) = fwgen::generate(&params).map_err(|e| e.to_string())?;
    let (edges_path, truth_path) =
        fwgen::write_pair(&graph, &truth, &args.out).map_err(|e| e.to_string())?;
    println!(
        "wrote {} ({} nodes, {} edges) and {} ({} clusters)",
        edges_path.display(),
        graph.node_count(),
        graph.edge_count(),
        truth_path.display(),
        truth.len()
    );
    Ok(0)
}

fn run_compare(args: &CompareArgs) -> Result<i32, String> {
    let (graph, _) = load_graph(&InputArgs {
        input: args.graph.clone(),
        format: args.format,
    })?;
    let a = load_clusters(&args.clusters_a, &graph)?;
    let b = load_clusters(&args.clusters_b, &graph)?;
    let d = clustering_distance(&a, &b).map_err(|e| e.to_string())?;
    println!("{d:.6}");
    Ok(0)
}

fn run_stats(args: &StatsArgs) -> Result<i32, String> {
    let (graph, stats) = load_graph(&args.input)?;
    report_drops(&stats);
    let clustering = load_clusters(&args.clusters, &graph)?;
    let report = quality_report(&graph, &clustering).map_err(|e| e.to_string())?;
    let mut stdout = io::stdout();
    print_report(&mut stdout, &report).map_err(|e| e.to_string())?;
    if let Some(csv) = &args.csv {
        write_report_csv(csv, &report)?;
    }
    Ok(0)
}

fn run_centrality(args: &CentralityArgs) -> Result<i32, String> {
    configure_threads(args.threads);
    let (graph, stats) = load_graph(&args.input)?;
    report_drops(&stats);
    let scores = cbc_core::centrality::betweenness(&graph);
    let mut rows: Vec<(f64, &str)> = graph
        .nodes()
        .map(|v| (scores.score(v), graph.label(v)))
        .collect();
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    for (score, label) in rows {
        writeln!(lock, "{label}\t{score:.6}").map_err(|e| e.to_string())?;
    }
    Ok(0)
}

fn run_gn(args: &GnArgs) -> Result<i32, String> {
    let (graph, stats) = load_graph(&args.input)?;
    report_drops(&stats);
    let clustering = gn::cluster(&graph, args.k).map_err(|e| e.to_string())?;
    let to_file = emit_clusters(&args.out, &graph, &clustering)?;
    let q = clustering_quality(&graph, &clustering).map_err(|e| e.to_string())?;
    let mut summary: Box<dyn Write> = if to_file {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    };
    writeln!(summary, "clusters {}  q_c {:.6}", clustering.len(), q).map_err(|e| e.to_string())?;
    Ok(0)
}

fn bench_cluster_count(n: usize) -> usize {
    if n < 1000 {
        5
    } else if n < 10000 {
        10
    } else {
        100
    }
}

fn run_bench(args: &BenchArgs) -> Result<i32, String> {
    configure_threads(args.threads);
    let mut rows = Vec::new();
    let mut run_index = 0u64;
    for &n in &args.sizes {
        for &assortativity in &args.assortativity {
            let clusters = if args.clusters > 0 {
                args.clusters
            } else {
                bench_cluster_count(n)
            };
            let m = n * args.edges_per_node;
            let params = GenParams {
                n_nodes: n,
                edges: EdgeBudget::Count(m),
                n_clusters: clusters,
                skew: args.skew,
                assortativity,
                seed: args.seed.wrapping_add(run_index),
            };
            run_index += 1;
            let (graph, truth) = fwgen::generate(&params).map_err(|e| e.to_string())?;

            let cbc_params = CbcParams {
                minimize_orphans: args.minimize_orphans,
                ..CbcParams::default()
            };
            let t0 = process_cpu_time();
            let prepared = cbc::prepare(&graph).map_err(|e| e.to_string())?;
            let t1 = process_cpu_time();
            let result = cbc::cluster_prepared(&graph, &prepared, &cbc_params);
            let t2 = process_cpu_time();

            let q_c = clustering_quality(&graph, &result.clustering).map_err(|e| e.to_string())?;
            let distance =
                clustering_distance(&result.clustering, &truth).map_err(|e| e.to_string())?;
            rows.push((
                n,
                m,
                clusters,
                assortativity,
                (t1 - t0).as_secs_f64() * 1e3,
                (t2 - t1).as_secs_f64() * 1e3,
                (t2 - t0).as_secs_f64() * 1e3,
                q_c,
                distance,
            ));
        }
    }

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?,
        )),
        None => Box::new(io::stdout()),
    };
    let emit = move || -> io::Result<()> {
        writeln!(
            out,
            "n,m,clusters,assortativity,t_centrality_ms,t_clustering_ms,t_total_ms,q_c,distance"
        )?;
        for (n, m, clusters, assortativity, tc, tcl, tt, q, d) in rows {
            writeln!(
                out,
                "{n},{m},{clusters},{assortativity},{tc:.3},{tcl:.3},{tt:.3},{q:.6},{d:.6}"
            )?;
        }
        out.flush()
    };
    emit().map_err(|e| e.to_string())?;
    Ok(0)
}

fn main() -> ExitCode {
    // Die quietly when stdout is a pipe that closes early (e.g. `| head`).
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Cluster(args) => run_cluster(args),
        Command::Generate(args) => run_generate(args),
        Command::Compare(args) => run_compare(args),
        Command::Stats(args) => run_stats(args),
        Command::Centrality(args) => run_centrality(args),
        Command::Gn(args) => run_gn(args),
        Command::Bench(args) => run_bench(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
