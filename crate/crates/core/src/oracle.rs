//! Exact absorbing-chain solves for hitting and first-meeting times.
//!
//! These are brute-force references for small graphs. The meeting chain
//! runs on pairs of walker positions; since both walkers follow the same
//! law, the expected absorption time from `(u, v)` equals that from
//! `(v, u)`, and the solve only needs the `n (n - 1) / 2` unordered pairs.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::scalar::Scalar;

pub const DEFAULT_HITTING_CAP: usize = 200;
pub const DEFAULT_MEETING_CAP: usize = 60;

/// Two walkers moving simultaneously and independently on one graph.
///
/// States are ordered pairs `(u, v)`; the diagonal pairs `(c, c)` absorb.
#[derive(Debug, Clone)]
pub struct ProductChain<'g, T> {
    graph: &'g WeightedGraph<T>,
    /// Per-node `(neighbor, transition probability)` lists.
    moves: Vec<Vec<(usize, T)>>,
}

impl<'g, T: Scalar> ProductChain<'g, T> {
    pub fn new(graph: &'g WeightedGraph<T>) -> Self {
        Self { graph, moves: transition_lists(graph) }
    }

    pub fn graph(&self) -> &WeightedGraph<T> {
        self.graph
    }

    pub fn state_count(&self) -> usize {
        self.graph.node_count() * self.graph.node_count()
    }

    pub fn is_absorbing(&self, (u, v): (usize, usize)) -> bool {
        u == v
    }

    /// Outgoing transitions of the ordered state `(u, v)`.
    pub fn transitions(&self, (u, v): (usize, usize)) -> Result<Vec<((usize, usize), T)>> {
        self.graph.check_node(u)?;
        self.graph.check_node(v)?;
        let mut out = Vec::with_capacity(self.moves[u].len() * self.moves[v].len());
        for &(x, px) in &self.moves[u] {
            for &(y, py) in &self.moves[v] {
                out.push(((x, y), px * py));
            }
        }
        Ok(out)
    }
}

fn transition_lists<T: Scalar>(g: &WeightedGraph<T>) -> Vec<Vec<(usize, T)>> {
    (0..g.node_count())
        .map(|i| {
            let d = g.degrees()[i];
            g.neighbors(i).iter().map(|&(j, w)| (j, w / d)).collect()
        })
        .collect()
}

/// Size limits for the dense solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOracle {
    /// Largest graph accepted by [`ExactOracle::hitting_time`].
    pub hitting_cap: usize,
    /// Largest graph accepted by the meeting solves.
    pub meeting_cap: usize,
}

impl Default for ExactOracle {
    fn default() -> Self {
        Self { hitting_cap: DEFAULT_HITTING_CAP, meeting_cap: DEFAULT_MEETING_CAP }
    }
}

/// Expected first-meeting time together with where the meeting happens.
#[derive(Debug, Clone, PartialEq)]
pub struct MeetingSolution<T> {
    pub expected_time: T,
    /// Probability that the first meeting happens at each node.
    pub node_distribution: Vec<T>,
}

impl ExactOracle {
    /// Expected number of steps for a walker started at `a` to first reach `i`.
    pub fn hitting_time<T: Scalar>(&self, g: &WeightedGraph<T>, a: usize, i: usize) -> Result<T> {
        let n = g.node_count();
        if n > self.hitting_cap {
            return Err(Error::TooLarge { n, limit: self.hitting_cap });
        }
        g.check_node(a)?;
        g.check_node(i)?;
        if a == i {
            return Ok(T::zero());
        }
        // transient states: everything reachable from a without passing through i
        let mut index = vec![usize::MAX; n];
        let mut order = vec![a];
        index[a] = 0;
        let mut hits = false;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.neighbors(u) {
                if v == i {
                    hits = true;
                } else if index[v] == usize::MAX {
                    index[v] = order.len();
                    order.push(v);
                    queue.push_back(v);
                }
            }
        }
        if !hits {
            return Err(Error::NeverHits { a, target: i });
        }
        let moves = transition_lists(g);
        let m = order.len();
        let mut system = DMatrix::<T>::identity(m, m);
        for (row, &u) in order.iter().enumerate() {
            for &(v, p) in &moves[u] {
                if v != i {
                    system[(row, index[v])] -= p;
                }
            }
        }
        let rhs = DMatrix::<T>::from_element(m, 1, T::one());
        let tau = solve(system, rhs)?;
        Ok(tau[(0, 0)])
    }

    /// Expected first-meeting time of walkers started at `a` and `b`.
    pub fn first_meeting_time<T: Scalar>(&self, g: &WeightedGraph<T>, a: usize, b: usize) -> Result<T> {
        Ok(self.solve_meeting(g, a, b, false)?.expected_time)
    }

    /// Probability that the first meeting happens at each node.
    pub fn meeting_node_distribution<T: Scalar>(&self, g: &WeightedGraph<T>, a: usize, b: usize) -> Result<Vec<T>> {
        Ok(self.solve_meeting(g, a, b, true)?.node_distribution)
    }

    /// Both quantities from one factorization.
    pub fn meeting<T: Scalar>(&self, g: &WeightedGraph<T>, a: usize, b: usize) -> Result<MeetingSolution<T>> {
        self.solve_meeting(g, a, b, true)
    }

    fn solve_meeting<T: Scalar>(
        &self,
        g: &WeightedGraph<T>,
        a: usize,
        b: usize,
        with_nodes: bool,
    ) -> Result<MeetingSolution<T>> {
        let n = g.node_count();
        if n > self.meeting_cap {
            return Err(Error::TooLarge { n, limit: self.meeting_cap });
        }
        g.check_node(a)?;
        g.check_node(b)?;
        if a == b {
            return Err(Error::SameStart(a));
        }
        let moves = transition_lists(g);
        let key = |u: usize, v: usize| if u < v { (u, v) } else { (v, u) };

        // forward search over unordered transient pairs reachable from {a, b}
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states = vec![key(a, b)];
        index.insert(key(a, b), 0);
        let mut successors: Vec<Vec<usize>> = Vec::new();
        let mut absorbs_directly: Vec<bool> = Vec::new();
        let mut cursor = 0;
        while cursor < states.len() {
            let (u, v) = states[cursor];
            let mut next = Vec::new();
            let mut absorbs = false;
            for &(x, _) in &moves[u] {
                for &(y, _) in &moves[v] {
                    if x == y {
                        absorbs = true;
                        continue;
                    }
                    let s = key(x, y);
                    let id = *index.entry(s).or_insert_with(|| {
                        states.push(s);
                        states.len() - 1
                    });
                    next.push(id);
                }
            }
            successors.push(next);
            absorbs_directly.push(absorbs);
            cursor += 1;
        }

        // every reachable state must itself be able to reach the diagonal
        let m = states.len();
        let mut predecessors = vec![Vec::new(); m];
        for (s, next) in successors.iter().enumerate() {
            for &t in next {
                predecessors[t].push(s);
            }
        }
        let mut escapes = absorbs_directly.clone();
        let mut queue: VecDeque<usize> = (0..m).filter(|&s| escapes[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &predecessors[t] {
                if !escapes[s] {
                    escapes[s] = true;
                    queue.push_back(s);
                }
            }
        }
        if escapes.iter().any(|&e| !e) {
            return Err(Error::NeverMeets { a, b });
        }

        let columns = if with_nodes { n + 1 } else { 1 };
        let mut system = DMatrix::<T>::identity(m, m);
        let mut rhs = DMatrix::<T>::zeros(m, columns);
        for (row, &(u, v)) in states.iter().enumerate() {
            rhs[(row, 0)] = T::one();
            for &(x, px) in &moves[u] {
                for &(y, py) in &moves[v] {
                    let p = px * py;
                    if x == y {
                        if with_nodes {
                            rhs[(row, 1 + x)] += p;
                        }
                    } else {
                        system[(row, index[&key(x, y)])] -= p;
                    }
                }
            }
        }
        let solution = solve(system, rhs)?;
        let node_distribution = if with_nodes { (0..n).map(|c| solution[(0, 1 + c)]).collect() } else { Vec::new() };
        Ok(MeetingSolution { expected_time: solution[(0, 0)], node_distribution })
    }
}

fn solve<T: Scalar>(system: DMatrix<T>, rhs: DMatrix<T>) -> Result<DMatrix<T>> {
    system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular absorbing-chain system".into()))
}

/// [`ExactOracle::hitting_time`] with the default size limit.
pub fn exact_hitting_time<T: Scalar>(g: &WeightedGraph<T>, a: usize, i: usize) -> Result<T> {
    ExactOracle::default().hitting_time(g, a, i)
}

/// [`ExactOracle::first_meeting_time`] with the default size limit.
pub fn exact_first_meeting_time<T: Scalar>(g: &WeightedGraph<T>, a: usize, b: usize) -> Result<T> {
    ExactOracle::default().first_meeting_time(g, a, b)
}

/// [`ExactOracle::meeting_node_distribution`] with the default size limit.
pub fn exact_meeting_node_distribution<T: Scalar>(g: &WeightedGraph<T>, a: usize, b: usize) -> Result<Vec<T>> {
    ExactOracle::default().meeting_node_distribution(g, a, b)
}
