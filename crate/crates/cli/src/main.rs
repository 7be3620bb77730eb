//! `ising-fisher`: Fisher zeros, SAW-tree checks, region verification and
//! Taylor approximation from the command line.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! bad usage or input.

mod complex;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ising_fisher::approx::{barvinok_from_poly, error_report};
use ising_fisher::graph::random_connected;
use ising_fisher::regions::{
    c0_proxy, check_rect_contraction, default_c0_eps, measure_eta, search_delta, verify_region_closure, SearchGrid,
};
use ising_fisher::zeros::parse_sizes;
use ising_fisher::{
    cut_polynomial, generate_family, load_graph, scan_family, weitz_residual, ExactEngine, Family, MapParams, PinnedGraph,
    Rectangle, ScanSpec,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::complex::parse_complex;

#[derive(Parser, Debug)]
#[command(name = "ising-fisher", version, about = "Fisher zeros and zero-free regions of the Ising partition function")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice; echoed into the output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fisher zeros and zero-free margins over a graph family.
    Zeros(ZerosArgs),
    /// Compares the SAW-tree ratio with exact enumeration on random graphs.
    SawCheck(SawCheckArgs),
    /// Checks closure of the region D, or searches for a working (δ, δ_β).
    VerifyRegion(VerifyRegionArgs),
    /// Checks rectangle contraction of one potential-transformed step.
    Contraction(ContractionArgs),
    /// Truncated Taylor estimate of Z at complex β against the exact value.
    Approx(ApproxArgs),
    /// Writes a generated graph in edge-list format.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct ZerosArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// `a..b`, `a..=b`, `a,b,c` or a single size.
    #[arg(long)]
    sizes: String,
    /// Δ of the interval to measure against (default: each graph's own).
    #[arg(long)]
    delta_cap: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    shrink: f64,
    /// Vertex degree for random regular graphs.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Random regular graphs per size, seeded from `--seed` upward.
    #[arg(long, default_value_t = 1)]
    graphs: u64,
}

#[derive(Args, Debug)]
struct SawCheckArgs {
    #[arg(long, default_value_t = 100)]
    graphs: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    /// β values per graph, uniform on |β − 1| ≤ 0.8.
    #[arg(long, default_value_t = 10)]
    betas: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug)]
struct VerifyRegionArgs {
    #[arg(long, value_parser = parse_real)]
    beta: f64,
    #[arg(long, default_value_t = 3)]
    delta_cap: usize,
    /// Search the default (δ, δ_β) grid instead of checking one β'.
    #[arg(long)]
    search: bool,
    /// Complex β' (default: β).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    beta_prime: Option<Complex64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct ContractionArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    beta: Complex64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    s: i32,
    #[arg(long, default_value_t = 3)]
    delta_cap: usize,
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
    #[arg(long, default_value_t = 1e-3)]
    tau: f64,
    #[arg(long, default_value_t = 1e-3)]
    xi: f64,
    /// Real half-width of the domain (default: the interval around 0 where the step contracts).
    #[arg(long)]
    a: Option<f64>,
    /// Imaginary half-width of the domain.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    /// Comma-separated complex β values.
    #[arg(long, value_parser = parse_complex, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    beta: Vec<Complex64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    eps: Vec<f64>,
    /// Edge-list graph file.
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_family, requires = "size")]
    family: Option<Family>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 3)]
    degree: usize,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 3)]
    degree: usize,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

fn parse_real(s: &str) -> Result<f64, String> {
    let z = parse_complex(s)?;
    if z.im != 0.0 {
        return Err(format!("expected a real number, got `{s}`"));
    }
    Ok(z.re)
}

/// Text to write plus whether every check passed.
struct Output {
    text: String,
    passed: bool,
    summary: String,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn json_only(format: Option<Format>, command: &str) -> Result<()> {
    if format == Some(Format::Csv) {
        bail!("`{command}` has no CSV output");
    }
    Ok(())
}

fn run_zeros(cli: &Cli, args: &ZerosArgs) -> Result<Output> {
    if !(args.shrink >= 0.0 && args.shrink.is_finite()) {
        bail!("--shrink must be a non-negative number");
    }
    let sizes = parse_sizes(&args.sizes)?;
    let spec = if args.family == Family::RandomRegular {
        ScanSpec::random_regular(args.degree, sizes, cli.seed..cli.seed + args.graphs)
    } else {
        ScanSpec::new(args.family, sizes)
    };
    let report = scan_family(&[spec], args.delta_cap, args.shrink, &ExactEngine::default())?;
    let passed = report.all_positive();
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => to_json(&json!({ "command": "zeros", "seed": cli.seed, "report": report }))?,
    };
    let summary = format!("zeros: {} graphs, min margin {}", report.rows.len(), report.min_margin);
    Ok(Output { text, passed, summary })
}

#[derive(Serialize)]
struct SawRow {
    index: usize,
    n: usize,
    edges: usize,
    vertex: usize,
    worst_beta: Complex64,
    max_residual: f64,
}

fn run_saw_check(cli: &Cli, args: &SawCheckArgs) -> Result<Output> {
    use rayon::prelude::*;
    if args.n_max < 2 {
        bail!("--n-max must be at least 2");
    }
    if args.max_degree < 2 {
        bail!("--max-degree must be at least 2");
    }
    let rows = (0..args.graphs)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            rng.set_stream(index as u64);
            let n = rng.gen_range(2..=args.n_max);
            let extra = rng.gen_range(0..=n);
            let g = random_connected(n, args.max_degree, extra, rng.gen())?;
            let vertex = rng.gen_range(0..n);
            let mut row = SawRow {
                index,
                n,
                edges: g.n_edges(),
                vertex,
                worst_beta: Complex64::new(1.0, 0.0),
                max_residual: 0.0,
            };
            for _ in 0..args.betas {
                let r = 0.8 * rng.gen::<f64>().sqrt();
                let beta = Complex64::new(1.0, 0.0) + Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
                let res = weitz_residual(&g, vertex, beta)?;
                if res > row.max_residual || res.is_nan() {
                    row.max_residual = res;
                    row.worst_beta = beta;
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, ising_fisher::Error>>()?;
    let worst = rows.iter().max_by(|a, b| a.max_residual.total_cmp(&b.max_residual));
    let max_residual = worst.map_or(0.0, |w| w.max_residual);
    let passed = max_residual <= args.tol;
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "command": "saw-check",
            "seed": cli.seed,
            "graphs": args.graphs,
            "pairs": args.graphs * args.betas,
            "tolerance": args.tol,
            "max_residual": max_residual,
            "passed": passed,
            "witness": if passed { None } else { worst },
            "rows": rows,
        }))?,
        Format::Csv => {
            let mut s = String::from("index,n,edges,vertex,worst_beta_re,worst_beta_im,max_residual\n");
            for r in &rows {
                writeln!(s, "{},{},{},{},{},{},{}", r.index, r.n, r.edges, r.vertex, r.worst_beta.re, r.worst_beta.im, r.max_residual)?;
            }
            s
        }
    };
    let summary = format!("saw-check: {} graphs, max residual {max_residual:e}", rows.len());
    Ok(Output { text, passed, summary })
}

fn run_verify_region(cli: &Cli, args: &VerifyRegionArgs) -> Result<Output> {
    json_only(cli.format, "verify-region")?;
    if args.samples == 0 {
        bail!("--samples must be positive");
    }
    if args.search {
        if args.beta_prime.is_some() || args.delta.is_some() {
            bail!("--search picks δ and β' itself; drop --delta and --beta-prime");
        }
        let grid = SearchGrid { confirm_samples: args.samples, ..SearchGrid::default() };
        let found = search_delta(args.beta, args.delta_cap, &grid, cli.seed)?;
        let summary = if found.found {
            format!("verify-region: δ = {}, δ_β = {}, margin {}", found.delta, found.delta_beta, found.margin)
        } else {
            "verify-region: no (δ, δ_β) on the grid passed".to_string()
        };
        return Ok(Output { text: to_json(&found)?, passed: found.found, summary });
    }
    let delta = args.delta.context("--delta is required without --search")?;
    let beta_prime = args.beta_prime.unwrap_or(Complex64::new(args.beta, 0.0));
    let report = verify_region_closure(args.beta, beta_prime, delta, args.delta_cap, args.samples, cli.seed)?;
    let summary = format!("verify-region: max violation {:e}", report.max_violation);
    Ok(Output { text: report.to_json() + "\n", passed: report.passed, summary })
}

fn run_contraction(cli: &Cli, args: &ContractionArgs) -> Result<Output> {
    json_only(cli.format, "contraction")?;
    let params = MapParams::new(args.beta, args.k, args.s, args.delta_cap);
    if !params.is_valid_step(true) {
        bail!("need 1 <= k + |s| <= delta-cap");
    }
    if args.samples == 0 {
        bail!("--samples must be positive");
    }
    let domain = match (args.a, args.b) {
        (Some(a), Some(b)) => Rectangle::new(a, b),
        (None, None) => {
            let (beta, d) = (args.beta.re, params.branching().max(1));
            if beta <= 0.0 {
                bail!("give --a and --b when Re β <= 0");
            }
            c0_proxy(beta, d, default_c0_eps(beta, d))
        }
        _ => bail!("give both --a and --b or neither"),
    };
    let mut report = check_rect_contraction(&params, domain, args.chi, args.tau, args.xi, args.samples, cli.seed);
    report.metrics.insert("eta".into(), measure_eta(&params, domain, args.samples, cli.seed)?);
    let summary = format!("contraction: sup ratio {}", report.metrics["sup_ratio"]);
    Ok(Output { text: report.to_json() + "\n", passed: report.passed, summary })
}

#[derive(Serialize)]
struct ApproxRow {
    beta: Complex64,
    eps: f64,
    z_hat: Option<Complex64>,
    exact: Complex64,
    m_used: usize,
    rho: f64,
    rel_error: f64,
    certified: bool,
    ok: bool,
}

fn approx_graph(cli: &Cli, args: &ApproxArgs) -> Result<PinnedGraph> {
    match (&args.input, args.family, args.size) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(load_graph(&text)?)
        }
        (None, Some(family), Some(size)) => Ok(generate_family(family, size, args.degree, cli.seed)?),
        _ => bail!("give --input FILE or --family with --size"),
    }
}

fn run_approx(cli: &Cli, args: &ApproxArgs) -> Result<Output> {
    if args.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        bail!("--eps values must lie in (0, 1)");
    }
    let g = approx_graph(cli, args)?;
    let report = error_report(&g, &args.beta, &args.eps)?;
    let passed = report.rows.iter().all(|r| r.ok);
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let poly = cut_polynomial(&g)?;
            let rows: Vec<ApproxRow> = report
                .rows
                .iter()
                .map(|r| {
                    let beta = Complex64::new(r.beta_re, r.beta_im);
                    let z_hat = barvinok_from_poly(&poly, beta, r.eps, g.delta_cap()).ok().map(|e| e.z_hat);
                    ApproxRow {
                        beta,
                        eps: r.eps,
                        z_hat,
                        exact: poly.eval(beta),
                        m_used: r.m_used,
                        rho: r.rho,
                        rel_error: r.rel_error,
                        certified: r.certified,
                        ok: r.ok,
                    }
                })
                .collect();
            to_json(&json!({
                "command": "approx",
                "seed": cli.seed,
                "n_vertices": g.n_vertices(),
                "n_edges": g.n_edges(),
                "delta_cap": g.delta_cap(),
                "passed": passed,
                "rows": rows,
            }))?
        }
    };
    let failed = report.rows.iter().filter(|r| !r.ok).count();
    let summary = format!("approx: {} rows, {failed} failed", report.rows.len());
    Ok(Output { text, passed, summary })
}

fn run_generate(cli: &Cli, args: &GenerateArgs) -> Result<Output> {
    if cli.format.is_some() {
        bail!("`generate` always writes the edge-list format");
    }
    let g = generate_family(args.family, args.size, args.degree, cli.seed)?;
    let summary = format!("generate: {} vertices, {} edges", g.n_vertices(), g.n_edges());
    Ok(Output { text: g.to_edge_list(), passed: true, summary })
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let out = match &cli.command {
        Command::Zeros(a) => run_zeros(cli, a)?,
        Command::SawCheck(a) => run_saw_check(cli, a)?,
        Command::VerifyRegion(a) => run_verify_region(cli, a)?,
        Command::Contraction(a) => run_contraction(cli, a)?,
        Command::Approx(a) => run_approx(cli, a)?,
        Command::Generate(a) => run_generate(cli, a)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, &out.text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", out.text),
    }
    eprintln!("{} ({})", out.summary, if out.passed { "pass" } else { "FAIL" });
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
