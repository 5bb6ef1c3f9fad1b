//! Barabási–Albert and Erdős–Rényi graph generators.
//!
//! Both models are parameterized so they can share a target average degree:
//! `m = floor(d_avg / 2)` links per new BA node, `p = d_avg / (n - 1)` for ER.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::scalar::Scalar;
use crate::seed;

pub const DEFAULT_MAX_RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    BarabasiAlbert,
    ErdosRenyi,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::BarabasiAlbert => "ba",
            Model::ErdosRenyi => "er",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ba" | "barabasi-albert" => Ok(Model::BarabasiAlbert),
            "er" | "erdos-renyi" => Ok(Model::ErdosRenyi),
            other => Err(Error::InvalidParameter(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub model: Model,
    pub n: usize,
    /// Links added with each new BA node.
    pub m: usize,
    /// Size of the complete graph a BA graph grows from.
    pub seed_clique: usize,
    /// ER edge probability.
    pub p: f64,
    pub seed: u64,
    /// Number of ER draws attempted before giving up on connectivity.
    pub max_retries: usize,
}

/// Parameters giving `model` an average degree close to `d_avg_target`.
///
/// A BA graph with `m = 1` grown from a single node is a tree, hence
/// bipartite, and two walkers need not meet on it. For that case the
/// seed clique is a triangle; every other BA configuration grows from
/// `K_m`.
pub fn params_for_target_degree(model: Model, n: usize, d_avg_target: f64, seed: u64) -> Result<GeneratorParams> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if !d_avg_target.is_finite() || d_avg_target <= 0.0 {
        return Err(Error::InvalidParameter(format!("target degree must be positive, got {d_avg_target}")));
    }
    match model {
        Model::BarabasiAlbert => {
            if d_avg_target < 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "BA needs a target degree of at least 2, got {d_avg_target}"
                )));
            }
            let m = (d_avg_target / 2.0).floor() as usize;
            if m >= n {
                return Err(Error::InvalidParameter(format!("BA needs m < n, got m = {m}, n = {n}")));
            }
            let seed_clique = if m == 1 && n >= 3 { 3 } else { m };
            Ok(GeneratorParams { model, n, m, seed_clique, p: 0.0, seed, max_retries: 0 })
        }
        Model::ErdosRenyi => {
            let p = d_avg_target / (n - 1) as f64;
            if p > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "ER target degree {d_avg_target} exceeds n - 1 = {}",
                    n - 1
                )));
            }
            Ok(GeneratorParams { model, n, m: 0, seed_clique: 0, p, seed, max_retries: DEFAULT_MAX_RETRIES })
        }
    }
}

pub fn generate<T: Scalar>(params: &GeneratorParams) -> Result<WeightedGraph<T>> {
    match params.model {
        Model::BarabasiAlbert => generate_ba_from_clique(params.n, params.m, params.seed_clique, params.seed),
        Model::ErdosRenyi => generate_er(params.n, params.p, params.seed, params.max_retries),
    }
}

/// BA graph grown from the complete graph on `m` nodes.
pub fn generate_ba<T: Scalar>(n: usize, m: usize, seed: u64) -> Result<WeightedGraph<T>> {
    generate_ba_from_clique(n, m, m, seed)
}

/// BA graph grown from the complete graph on `clique` nodes.
///
/// Each new node links to `m` distinct earlier nodes, each drawn with
/// probability proportional to its current degree; a repeated draw is
/// rejected and redrawn. A target's degree counts the links it gained
/// earlier in the same insertion step.
pub fn generate_ba_from_clique<T: Scalar>(n: usize, m: usize, clique: usize, seed: u64) -> Result<WeightedGraph<T>> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!("BA needs 1 <= m < n, got m = {m}, n = {n}")));
    }
    if clique < m || clique > n {
        return Err(Error::InvalidParameter(format!(
            "seed clique size {clique} must lie in [m, n] = [{m}, {n}]"
        )));
    }
    let mut rng = seed::stream(seed, 0);
    let mut pairs = Vec::with_capacity(clique * (clique.saturating_sub(1)) / 2 + m * (n - clique));
    // one entry per link end, so a uniform pick is degree-proportional
    let mut ends: Vec<usize> = Vec::with_capacity(2 * pairs.capacity());
    for i in 0..clique {
        for j in i + 1..clique {
            pairs.push((i, j));
            ends.extend([i, j]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for t in clique..n {
        targets.clear();
        while targets.len() < m {
            let j = if ends.is_empty() { rng.random_range(0..t) } else { ends[rng.random_range(0..ends.len())] };
            if targets.contains(&j) {
                continue;
            }
            targets.push(j);
            ends.push(j);
        }
        for &j in &targets {
            pairs.push((j, t));
            ends.push(t);
        }
    }
    let g = WeightedGraph::unweighted(n, pairs)?;
    debug_assert!(g.check_assumptions().connected);
    Ok(g)
}

/// ER graph conditioned on connectivity.
///
/// Each unordered pair is linked independently with probability `p`. A
/// disconnected draw is discarded and redrawn from the next derived seed,
/// at most `max_retries` draws in total.
pub fn generate_er<T: Scalar>(n: usize, p: f64, seed: u64, max_retries: usize) -> Result<WeightedGraph<T>> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("ER needs 0 < p <= 1, got {p}")));
    }
    for attempt in 0..max_retries {
        let mut rng = seed::stream(seed, attempt as u64);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    pairs.push((i, j));
                }
            }
        }
        let g = WeightedGraph::unweighted(n, pairs)?;
        if g.check_assumptions().connected {
            return Ok(g);
        }
        log::debug!("ER attempt {} disconnected (n = {n}, p = {p})", attempt + 1);
    }
    Err(Error::GenerationFailed { attempts: max_retries })
}
