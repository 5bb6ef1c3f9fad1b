//! Monte Carlo simulation of two synchronous random walkers.
//!
//! Both walkers step at once; they meet when they stand on the same node
//! after a step. Crossing each other along an edge is not a meeting, and
//! the start configuration never counts.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::csv::sig9;
use crate::error::{Error, Result};
use crate::graph::{GraphStats, WeightedGraph};
use crate::meeting::principal_component;
use crate::scalar::Scalar;
use crate::seed;

pub const DEFAULT_T_MAX: u64 = 10_000_000;

/// Step and node of a first meeting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FirstMeetingSample {
    pub time: u64,
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeetingOutcome {
    Met(FirstMeetingSample),
    /// No meeting within `t_max` steps.
    Truncated,
}

/// Per-node neighbor tables for drawing transitions.
#[derive(Debug, Clone)]
pub struct WalkSampler {
    neighbors: Vec<Vec<usize>>,
    /// Cumulative weights; `None` when every link of the node has the same weight.
    cumulative: Vec<Option<Vec<f64>>>,
}

impl WalkSampler {
    pub fn new<T: Scalar>(g: &WeightedGraph<T>) -> Self {
        let mut neighbors = Vec::with_capacity(g.node_count());
        let mut cumulative = Vec::with_capacity(g.node_count());
        for i in 0..g.node_count() {
            let list = g.neighbors(i);
            neighbors.push(list.iter().map(|&(j, _)| j).collect());
            let uniform = list.windows(2).all(|w| w[0].1 == w[1].1);
            cumulative.push((!uniform).then(|| {
                let mut acc = 0.0;
                list.iter()
                    .map(|&(_, w)| {
                        acc += w.as_f64();
                        acc
                    })
                    .collect()
            }));
        }
        Self { neighbors, cumulative }
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Draws the next node of a walker at `i`.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        let list = &self.neighbors[i];
        match &self.cumulative[i] {
            None => list[rng.random_range(0..list.len())],
            Some(cum) => {
                let total = cum[cum.len() - 1];
                let u = rng.random::<f64>() * total;
                let pos = cum.partition_point(|&c| c <= u).min(list.len() - 1);
                list[pos]
            }
        }
    }

    /// Runs one pair of walkers from `a` and `b` until they meet or `t_max`
    /// steps have passed.
    pub fn first_meeting<R: Rng + ?Sized>(&self, a: usize, b: usize, rng: &mut R, t_max: u64) -> MeetingOutcome {
        let (mut x, mut y) = (a, b);
        for t in 1..=t_max {
            x = self.step(x, rng);
            y = self.step(y, rng);
            if x == y {
                return MeetingOutcome::Met(FirstMeetingSample { time: t, node: x });
            }
        }
        MeetingOutcome::Truncated
    }
}

fn check_walk(g_n: usize, isolated: impl Fn(usize) -> bool, a: usize, b: usize, t_max: u64) -> Result<()> {
    for node in [a, b] {
        if node >= g_n {
            return Err(Error::NodeOutOfRange { node, n: g_n });
        }
        if isolated(node) {
            return Err(Error::InvalidParameter(format!("start node {node} has no neighbors")));
        }
    }
    if a == b {
        return Err(Error::SameStart(a));
    }
    if t_max == 0 {
        return Err(Error::InvalidParameter("t_max must be at least 1".into()));
    }
    Ok(())
}

/// One simulated first meeting, with the walkers drawing from `rng`.
pub fn simulate_first_meeting<T: Scalar, R: Rng + ?Sized>(
    g: &WeightedGraph<T>,
    a: usize,
    b: usize,
    rng: &mut R,
    t_max: u64,
) -> Result<MeetingOutcome> {
    check_walk(g.node_count(), |i| g.neighbors(i).is_empty(), a, b, t_max)?;
    Ok(WalkSampler::new(g).first_meeting(a, b, rng, t_max))
}

/// Whether walkers from `a` and `b` can ever share a node: same component,
/// and not on opposite sides of a bipartite component.
pub fn meeting_possible<T: Scalar>(g: &WeightedGraph<T>, a: usize, b: usize) -> bool {
    let report = g.check_assumptions();
    if report.connected {
        return report.may_meet(a, b);
    }
    let mut side = vec![None; g.node_count()];
    let mut bipartite = true;
    let mut queue = VecDeque::from([a]);
    side[a] = Some(0u8);
    while let Some(u) = queue.pop_front() {
        let su = side[u].unwrap_or(0);
        for &(v, _) in g.neighbors(u) {
            match side[v] {
                None => {
                    side[v] = Some(1 - su);
                    queue.push_back(v);
                }
                Some(sv) if sv == su => bipartite = false,
                Some(_) => {}
            }
        }
    }
    match side[b] {
        None => false,
        Some(sb) => !bipartite || sb == 0,
    }
}

/// Aggregate of many simulated first meetings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Fixed start nodes, or `None` when every run drew its own pair.
    pub starts: Option<(usize, usize)>,
    pub runs: u64,
    pub truncated_runs: u64,
    /// Mean meeting time over completed runs; NaN when none completed.
    pub mean_time: f64,
    pub std_dev: f64,
    /// `std_dev / sqrt(completed runs)`.
    pub std_error: f64,
    /// Number of first meetings at each node.
    pub node_frequency: Vec<u64>,
    pub seed: u64,
    pub t_max: u64,
}

impl SimulationReport {
    pub const CSV_HEADER: &'static str = "a,b,runs,mean,std_err,truncated,seed";

    pub fn completed_runs(&self) -> u64 {
        self.runs - self.truncated_runs
    }

    pub fn mean(&self) -> Result<f64> {
        if self.completed_runs() == 0 {
            Err(Error::UndefinedMean)
        } else {
            Ok(self.mean_time)
        }
    }

    /// One CSV row; node ids are shifted by `id_offset`.
    pub fn to_csv_row(&self, id_offset: usize) -> String {
        let (a, b) = match self.starts {
            Some((a, b)) => ((a + id_offset).to_string(), (b + id_offset).to_string()),
            None => ("random".into(), "random".into()),
        };
        format!(
            "{a},{b},{},{},{},{},{}",
            self.runs,
            sig9(self.mean_time),
            sig9(self.std_error),
            self.truncated_runs,
            self.seed
        )
    }

    /// `node,frequency` CSV with a header row.
    pub fn frequency_csv(&self, id_offset: usize) -> String {
        let mut out = String::from("node,frequency\n");
        for (node, count) in self.node_frequency.iter().enumerate() {
            let _ = writeln!(out, "{},{}", node + id_offset, count);
        }
        out
    }

    fn from_outcomes(
        starts: Option<(usize, usize)>,
        n: usize,
        outcomes: &[MeetingOutcome],
        seed: u64,
        t_max: u64,
    ) -> Self {
        let mut node_frequency = vec![0u64; n];
        let (mut count, mut sum, mut sum_sq) = (0u128, 0u128, 0u128);
        for outcome in outcomes {
            if let MeetingOutcome::Met(sample) = outcome {
                let t = u128::from(sample.time);
                count += 1;
                sum += t;
                sum_sq += t * t;
                node_frequency[sample.node] += 1;
            }
        }
        let runs = outcomes.len() as u64;
        let (mean_time, std_dev, std_error) = if count == 0 {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let mean = sum as f64 / count as f64;
            let std_dev = if count > 1 {
                // exact integer numerator, converted once
                let numerator = count * sum_sq - sum * sum;
                (numerator as f64 / (count * (count - 1)) as f64).sqrt()
            } else {
                0.0
            };
            (mean, std_dev, std_dev / (count as f64).sqrt())
        };
        Self {
            starts,
            runs,
            truncated_runs: runs - count as u64,
            mean_time,
            std_dev,
            std_error,
            node_frequency,
            seed,
            t_max,
        }
    }
}

/// Simulates `runs` independent first meetings from `a` and `b`.
///
/// Run `r` draws from its own stream derived from `(master_seed, r)`, so
/// the report does not depend on how runs are scheduled across threads.
/// When the walkers can never meet (opposite sides of a bipartite graph,
/// or different components) every run is reported as truncated without
/// being simulated.
pub fn monte_carlo_meeting<T: Scalar>(
    g: &WeightedGraph<T>,
    a: usize,
    b: usize,
    runs: u64,
    master_seed: u64,
    t_max: u64,
) -> Result<SimulationReport> {
    check_walk(g.node_count(), |i| g.neighbors(i).is_empty(), a, b, t_max)?;
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if !meeting_possible(g, a, b) {
        log::warn!("walkers from {a} and {b} can never meet (parity or components); all runs truncated");
        let outcomes = vec![MeetingOutcome::Truncated; runs as usize];
        return Ok(SimulationReport::from_outcomes(Some((a, b)), g.node_count(), &outcomes, master_seed, t_max));
    }
    let sampler = WalkSampler::new(g);
    let outcomes: Vec<MeetingOutcome> = (0..runs)
        .into_par_iter()
        .map(|r| sampler.first_meeting(a, b, &mut seed::stream(master_seed, r), t_max))
        .collect();
    Ok(SimulationReport::from_outcomes(Some((a, b)), g.node_count(), &outcomes, master_seed, t_max))
}

/// Like [`monte_carlo_meeting`], but each run starts from its own uniformly
/// drawn pair of distinct nodes.
pub fn monte_carlo_random_starts<T: Scalar>(
    g: &WeightedGraph<T>,
    runs: u64,
    master_seed: u64,
    t_max: u64,
) -> Result<SimulationReport> {
    let report = g.check_assumptions();
    if !report.connected {
        return Err(Error::Disconnected);
    }
    if runs == 0 || t_max == 0 {
        return Err(Error::InvalidParameter("runs and t_max must be at least 1".into()));
    }
    let n = g.node_count();
    let sampler = WalkSampler::new(g);
    let outcomes: Vec<MeetingOutcome> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::stream(master_seed, r);
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            if report.may_meet(a, b) {
                sampler.first_meeting(a, b, &mut rng, t_max)
            } else {
                MeetingOutcome::Truncated
            }
        })
        .collect();
    Ok(SimulationReport::from_outcomes(None, n, &outcomes, master_seed, t_max))
}

/// `|μ - μ_sim| / μ_sim`.
pub fn relative_error<T: Scalar>(mu_analytic: T, report: &SimulationReport) -> Result<f64> {
    let sim = report.mean()?;
    Ok((mu_analytic.as_f64() - sim).abs() / sim)
}

/// Relative error of the principal component `s1²/s2` against simulation.
pub fn relative_error_principal<T: Scalar>(stats: &GraphStats<T>, report: &SimulationReport) -> Result<f64> {
    relative_error(principal_component(stats), report)
}

/// Power-law fit of first-meeting frequency against weighted degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyFit {
    /// Fitted exponent of `frequency ~ degree^exponent`.
    pub exponent: f64,
    pub intercept: f64,
    /// Pearson correlation of the log-log points.
    pub correlation: f64,
    pub points: usize,
}

/// Minimum number of completed meetings a frequency fit accepts.
pub const MIN_FIT_MEETINGS: u64 = 1000;

/// Regresses `log(frequency_c)` on `log(d_c)` over the nodes with at least
/// one recorded meeting.
pub fn meeting_frequency_fit<T: Scalar>(report: &SimulationReport, g: &WeightedGraph<T>) -> Result<FrequencyFit> {
    if report.node_frequency.len() != g.node_count() {
        return Err(Error::Fit("report and graph have different node counts".into()));
    }
    if report.completed_runs() < MIN_FIT_MEETINGS {
        return Err(Error::Fit(format!(
            "{} meetings recorded, need at least {MIN_FIT_MEETINGS}",
            report.completed_runs()
        )));
    }
    let points: Vec<(f64, f64)> = report
        .node_frequency
        .iter()
        .zip(g.degrees())
        .filter(|(&count, _)| count > 0)
        .map(|(&count, &d)| (d.as_f64().ln(), (count as f64).ln()))
        .collect();
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 distinct degrees, found {}", distinct.len())));
    }
    let (slope, intercept, correlation) = least_squares(&points);
    Ok(FrequencyFit { exponent: slope, intercept, correlation, points: points.len() })
}

/// Ordinary least squares line through `points`: `(slope, intercept, r)`.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx, sxy / (sxx * syy).sqrt())
}
