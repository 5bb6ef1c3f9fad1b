use std::fs;

use anyhow::{bail, ensure, Context, Result};
use rand::seq::index::sample;
use walkmeet::csv::sig9;
use walkmeet::meeting::MeetingAnalysis;
use walkmeet::seed::{derive_seed, stream};
use walkmeet::spectral::decompose_with;
use walkmeet::walk_sim::{monte_carlo_random_starts, SimulationReport};
use walkmeet::{
    exact_hitting_time, generate, monte_carlo_meeting, params_for_target_degree, parse_edge_list, principal_component,
    relative_error, relative_error_principal, write_edge_list, ExactOracle, Graph, Kernel, Model, SpectralOptions,
    Stats,
};

use crate::output::{emit, list, Config, Table};
use crate::{AnalyzeArgs, Cli, Command, GenerateArgs, GraphArgs, OracleArgs, SimulateArgs, SweepArgs};

/// Stream index reserved for walker simulations, so they never reuse the
/// generator's randomness.
const SIMULATION_STREAM: u64 = 1;
const PARTNER_STREAM: u64 = 2;

pub fn run(cli: &Cli) -> Result<bool> {
    let ids = Ids { offset: if cli.zero_based { 0 } else { 1 } };
    match &cli.command {
        Command::Generate(args) => generate_cmd(args, cli.seed, ids),
        Command::Analyze(args) => analyze_cmd(args, cli.seed, ids),
        Command::Simulate(args) => simulate_cmd(args, cli.seed, ids),
        Command::Sweep(args) => sweep_cmd(args, cli.seed, ids),
        Command::Oracle(args) => oracle_cmd(args, cli.seed, ids),
    }
}

/// Conversion between CLI node ids and internal 0-based ids.
#[derive(Debug, Clone, Copy)]
struct Ids {
    offset: usize,
}

impl Ids {
    fn internal(self, id: usize, n: usize) -> Result<usize> {
        ensure!(id >= self.offset, "node id {id} is below the first id {}", self.offset);
        let i = id - self.offset;
        ensure!(i < n, "node id {id} out of range for a graph with {n} nodes");
        Ok(i)
    }
}

fn load_graph(args: &GraphArgs, seed: u64, config: &mut Config) -> Result<Graph> {
    if let Some(path) = &args.graph {
        config.set("graph", path.display());
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let mut params = params_for_target_degree(args.model, args.n, args.davg, seed)?;
    params.max_retries = args.max_retries;
    config.set("model", args.model).set("n", args.n).set("davg", args.davg).set("seed", seed);
    match args.model {
        Model::BarabasiAlbert => config.set("m", params.m).set("seed_clique", params.seed_clique),
        Model::ErdosRenyi => config.set("p", params.p).set("max_retries", params.max_retries),
    };
    generate(&params).with_context(|| format!("generating {} graph with n = {}, d_avg = {}", args.model, args.n, args.davg))
}

/// Rejects graphs the spectral formulas do not cover.
fn require_ergodic(g: &Graph) -> Result<()> {
    let report = g.check_assumptions();
    if !report.connected {
        bail!("graph is disconnected; the spectral meeting time needs a connected graph");
    }
    if report.bipartite {
        bail!("graph is bipartite; walkers on opposite sides never meet, so the meeting time is undefined");
    }
    Ok(())
}

/// `count` distinct nodes other than `a`, in increasing order.
fn sample_partners(n: usize, a: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream(seed, PARTNER_STREAM);
    let count = count.min(n - 1);
    let mut picks: Vec<usize> = sample(&mut rng, n - 1, count).into_iter().map(|i| if i >= a { i + 1 } else { i }).collect();
    picks.sort_unstable();
    picks
}

fn generate_cmd(args: &GenerateArgs, seed: u64, _ids: Ids) -> Result<bool> {
    let mut config = Config::new("generate");
    let g = load_graph(&args.graph, seed, &mut config)?;
    let stats = g.stats();
    let mut table = Table::new(&config, Stats::CSV_HEADER);
    table.row(&stats.to_csv_row());
    let edges = format!("{}\n{}", config.comment(), write_edge_list(&g));
    match &args.output {
        Some(path) => {
            emit(Some(path), &edges)?;
            emit(None, &table.into_string())?;
        }
        None => {
            emit(None, &edges)?;
            eprint!("{}", table.into_string());
        }
    }
    Ok(true)
}

fn analyze_cmd(args: &AnalyzeArgs, seed: u64, ids: Ids) -> Result<bool> {
    let mut config = Config::new("analyze");
    let g = load_graph(&args.graph, seed, &mut config)?;
    require_ergodic(&g)?;
    let n = g.node_count();
    let a = ids.internal(args.a, n)?;
    let partners = if args.b.is_empty() {
        sample_partners(n, a, args.sweep_b, seed)
    } else {
        args.b.iter().map(|&b| ids.internal(b, n)).collect::<Result<_>>()?
    };
    config.set("a", args.a).set("b", list(&partners.iter().map(|b| b + ids.offset).collect::<Vec<_>>()));
    let dec = decompose_with(&g, &SpectralOptions { max_nodes: args.max_nodes })?;
    let stats = g.stats();
    let kernel = Kernel::new(&dec, &stats)?;
    let mut table = Table::new(&config, MeetingAnalysis::<f64>::CSV_HEADER);
    for b in partners {
        let analysis = kernel.analyze(a, b).with_context(|| format!("pair ({}, {})", args.a, b + ids.offset))?;
        if !analysis.bound_holds() {
            log::warn!("error bound violated for pair ({}, {})", args.a, b + ids.offset);
        }
        table.row(&analysis.to_csv_row(ids.offset));
    }
    emit(args.output.as_deref(), &table.into_string())?;
    Ok(true)
}

fn simulate_cmd(args: &SimulateArgs, seed: u64, ids: Ids) -> Result<bool> {
    let mut config = Config::new("simulate");
    let g = load_graph(&args.graph, seed, &mut config)?;
    let n = g.node_count();
    let (a, b) = (ids.internal(args.a, n)?, ids.internal(args.b, n)?);
    config.set("a", args.a).set("b", args.b).set("runs", args.runs).set("t_max", args.t_max);
    let report = monte_carlo_meeting(&g, a, b, args.runs, derive_seed(seed, SIMULATION_STREAM), args.t_max)?;
    if report.truncated_runs > 0 {
        log::warn!("{} of {} runs hit t_max = {} without meeting", report.truncated_runs, report.runs, args.t_max);
    }
    let mut table = Table::new(&config, SimulationReport::CSV_HEADER);
    table.row(&report.to_csv_row(ids.offset));
    emit(args.output.as_deref(), &table.into_string())?;
    if let Some(path) = &args.freq_output {
        emit(Some(path), &format!("{}\n{}", config.comment(), report.frequency_csv(ids.offset)))?;
    }
    Ok(true)
}

const SWEEP_HEADER: &str = "n,d_avg,model,eps_avg,eps_max,eps_prime_avg,principal,mu_sim,error";

struct CellResult {
    eps: Option<(f64, f64)>,
    eps_prime: f64,
    principal: f64,
    mu_sim: f64,
}

fn sweep_cmd(args: &SweepArgs, seed: u64, ids: Ids) -> Result<bool> {
    ensure!(args.runs > 0, "--runs must be at least 1");
    let mut config = Config::new("sweep");
    config
        .set("models", list(&args.models))
        .set("ns", list(&args.ns))
        .set("davgs", list(&args.davgs))
        .set("runs", args.runs)
        .set("pairs", args.pairs)
        .set("a", args.a)
        .set("random_pairs", args.random_pairs)
        .set("t_max", args.t_max)
        .set("max_retries", args.max_retries)
        .set("seed", seed);

    let mut cells = Vec::new();
    for &n in &args.ns {
        for &d in &args.davgs {
            for &model in &args.models {
                cells.push((n, d, model));
            }
        }
    }
    cells.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)));
    cells.dedup();

    let mut table = Table::new(&config, SWEEP_HEADER);
    let mut all_ok = true;
    for (n, d, model) in cells {
        let label = format!("{n},{},{model}", sig9(d));
        log::info!("sweep cell n = {n}, d_avg = {d}, model = {model}");
        match sweep_cell(args, n, d, model, cell_seed(seed, n, d, model), ids) {
            Ok(cell) => {
                let (avg, max) = match cell.eps {
                    Some((avg, max)) => (sig9(avg), sig9(max)),
                    None => (String::new(), String::new()),
                };
                table.row(&format!(
                    "{label},{avg},{max},{},{},{},",
                    sig9(cell.eps_prime),
                    sig9(cell.principal),
                    sig9(cell.mu_sim)
                ));
            }
            Err(err) => {
                all_ok = false;
                log::warn!("sweep cell {label} failed: {err:#}");
                table.row(&format!("{label},,,,,,{}", format!("{err:#}").replace(',', ";")));
            }
        }
    }
    emit(args.output.as_deref(), &table.into_string())?;
    Ok(all_ok)
}

/// Seed of one sweep cell; depends only on the cell, not on the grid around it.
fn cell_seed(seed: u64, n: usize, d: f64, model: Model) -> u64 {
    let model_key = match model {
        Model::BarabasiAlbert => 0,
        Model::ErdosRenyi => 1,
    };
    derive_seed(derive_seed(derive_seed(seed, model_key), n as u64), d.to_bits())
}

fn sweep_cell(args: &SweepArgs, n: usize, d: f64, model: Model, seed: u64, ids: Ids) -> Result<CellResult> {
    let mut params = params_for_target_degree(model, n, d, seed)?;
    params.max_retries = args.max_retries;
    let g: Graph = generate(&params)?;
    require_ergodic(&g)?;
    let stats = g.stats();
    let principal = principal_component(&stats);
    let sim_seed = derive_seed(seed, SIMULATION_STREAM);

    if args.random_pairs {
        let report = monte_carlo_random_starts(&g, args.runs, sim_seed, args.t_max)?;
        return Ok(CellResult {
            eps: None,
            eps_prime: relative_error_principal(&stats, &report)?,
            principal,
            mu_sim: report.mean()?,
        });
    }

    let dec = walkmeet::decompose(&g)?;
    let kernel = Kernel::new(&dec, &stats)?;
    let a = ids.internal(args.a, n)?;
    let partners = sample_partners(n, a, args.pairs, seed);
    let (mut eps, mut eps_prime, mut mu_sim) = (Vec::new(), Vec::new(), Vec::new());
    for (index, &b) in partners.iter().enumerate() {
        let report = monte_carlo_meeting(&g, a, b, args.runs, derive_seed(sim_seed, index as u64), args.t_max)?;
        eps.push(relative_error(kernel.first_meeting_time(a, b)?, &report)?);
        eps_prime.push(relative_error_principal(&stats, &report)?);
        mu_sim.push(report.mean()?);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(CellResult {
        eps: Some((mean(&eps), eps.iter().copied().fold(0.0, f64::max))),
        eps_prime: mean(&eps_prime),
        principal,
        mu_sim: mean(&mu_sim),
    })
}

fn oracle_cmd(args: &OracleArgs, seed: u64, ids: Ids) -> Result<bool> {
    let mut config = Config::new("oracle");
    let g = load_graph(&args.graph, seed, &mut config)?;
    let n = g.node_count();
    let a = ids.internal(args.a, n)?;
    let spectral = || -> Option<walkmeet::Decomposition> {
        g.check_assumptions().connected.then(|| walkmeet::decompose(&g).ok()).flatten()
    };

    if let Some(target) = args.target {
        let i = ids.internal(target, n)?;
        config.set("a", args.a).set("target", target);
        let exact = exact_hitting_time(&g, a, i)?;
        let approx = spectral().map(|dec| dec.hitting_time(a, i)).transpose()?;
        let mut table = Table::new(&config, "a,target,hitting_exact,hitting_spectral");
        table.row(&format!("{},{target},{},{}", args.a, sig9(exact), approx.map(sig9).unwrap_or_default()));
        emit(args.output.as_deref(), &table.into_string())?;
        return Ok(true);
    }

    let b = ids.internal(args.b, n)?;
    config.set("a", args.a).set("b", args.b);
    let solution = match ExactOracle::default().meeting(&g, a, b) {
        Err(walkmeet::Error::NeverMeets { .. }) => {
            bail!("walkers starting at {} and {} never meet (bipartite parity or separate components)", args.a, args.b)
        }
        other => other?,
    };
    let spectral_mu = match spectral() {
        Some(dec) if !dec.is_bipartite() => Some(Kernel::new(&dec, &g.stats())?.first_meeting_time(a, b)?),
        _ => None,
    };
    let mut table = Table::new(&config, "a,b,mu_exact,mu_spectral,relative_gap");
    let exact = solution.expected_time;
    table.row(&format!(
        "{},{},{},{},{}",
        args.a,
        args.b,
        sig9(exact),
        spectral_mu.map(sig9).unwrap_or_default(),
        spectral_mu.map(|mu| sig9((mu - exact).abs() / exact)).unwrap_or_default()
    ));
    emit(args.output.as_deref(), &table.into_string())?;
    if let Some(path) = &args.distribution {
        let mut dist = Table::new(&config, "node,probability");
        for (c, p) in solution.node_distribution.iter().enumerate() {
            dist.row(&format!("{},{}", c + ids.offset, sig9(*p)));
        }
        emit(Some(path), &dist.into_string())?;
    }
    Ok(true)
}
