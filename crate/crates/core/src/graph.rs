//! Weighted undirected simple graphs, degree statistics, and the structural
//! checks (connectivity, bipartiteness) the walk formulas depend on.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::csv::sig9;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An undirected edge stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub weight: T,
}

/// Undirected, positively weighted graph without self-loops or parallel
/// edges. Nodes are `0..n`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    adjacency: Vec<Vec<(usize, T)>>,
    degrees: Vec<T>,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Builds a graph from `(i, j, w)` triples given in any order and orientation.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        let mut canonical = Vec::new();
        for (i, j, weight) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(weight > T::zero()) || !weight.is_finite() {
                return Err(Error::InvalidWeight { i, j, weight: weight.as_f64() });
            }
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            canonical.push(Edge { i, j, weight });
        }
        canonical.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = canonical.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::DuplicateEdge(w[0].i, w[0].j));
        }

        let mut adjacency = vec![Vec::new(); n];
        for e in &canonical {
            adjacency[e.i].push((e.j, e.weight));
            adjacency[e.j].push((e.i, e.weight));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(k, _)| k);
        }
        let degrees = adjacency
            .iter()
            .map(|list| list.iter().fold(T::zero(), |acc, &(_, w)| acc + w))
            .collect();
        Ok(Self { n, edges: canonical, adjacency, degrees })
    }

    /// Builds a graph with every edge weight equal to one.
    pub fn unweighted<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, pairs.into_iter().map(|(i, j)| (i, j, T::one())))
    }

    /// Complete graph K_n.
    pub fn complete(n: usize) -> Result<Self> {
        Self::unweighted(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// Cycle 0-1-...-(n-1)-0.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
        }
        Self::unweighted(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Path 0-1-...-(n-1).
    pub fn path(n: usize) -> Result<Self> {
        Self::unweighted(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Star with hub 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::unweighted(leaves + 1, (1..=leaves).map(|i| (0, i)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical order: `i < j`, sorted by `(i, j)`.
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Neighbors of `i` with their link weights, sorted by neighbor id.
    pub fn neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.adjacency[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<T> {
        let list = self.adjacency.get(i)?;
        list.binary_search_by_key(&j, |&(k, _)| k).ok().map(|pos| list[pos].1)
    }

    /// Weighted degree of `i`: the sum of the weights of its links.
    pub fn weighted_degree(&self, i: usize) -> Result<T> {
        self.check_node(i)?;
        Ok(self.degrees[i])
    }

    /// Weighted degrees of every node.
    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }

    /// Probability that a walker at `i` steps to `j`, `w_ij / d_i`.
    pub fn transition_probability(&self, i: usize, j: usize) -> Result<T> {
        self.check_node(i)?;
        self.check_node(j)?;
        let w = self.weight(i, j).ok_or(Error::NotAdjacent(i, j))?;
        Ok(w / self.degrees[i])
    }

    /// Largest link weight; zero for an edgeless graph.
    pub fn max_weight(&self) -> T {
        self.edges.iter().fold(T::zero(), |m, e| if e.weight > m { e.weight } else { m })
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == T::one())
    }

    pub fn stats(&self) -> GraphStats<T> {
        compute_stats(self)
    }

    pub fn check_assumptions(&self) -> AssumptionReport {
        check_assumptions(self)
    }

    /// Copy of the graph with node `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter("permutation length differs from node count".into()));
        }
        Self::from_edges(self.n, self.edges.iter().map(|e| (perm[e.i], perm[e.j], e.weight)))
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: i, n: self.n })
        }
    }
}

/// Degree statistics of a graph. `d_std` is the population standard
/// deviation, so `s2 = n (d_avg^2 + d_std^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats<T> {
    pub n: usize,
    /// Sum of weighted degrees.
    pub s1: T,
    /// Sum of squared weighted degrees.
    pub s2: T,
    pub d_avg: T,
    pub d_std: T,
    pub d_min: T,
    pub w_max: T,
}

impl<T: Scalar> GraphStats<T> {
    pub const CSV_HEADER: &'static str = "n,s1,s2,d_avg,d_std,d_min,w_max";

    pub fn to_csv_row(&self) -> String {
        let fields = [self.s1, self.s2, self.d_avg, self.d_std, self.d_min, self.w_max];
        let mut row = self.n.to_string();
        for x in fields {
            row.push(',');
            row.push_str(&sig9(x.as_f64()));
        }
        row
    }

    /// Coefficient of variation of the weighted degrees.
    pub fn heterogeneity(&self) -> T {
        self.d_std / self.d_avg
    }
}

pub fn compute_stats<T: Scalar>(g: &WeightedGraph<T>) -> GraphStats<T> {
    let degrees = g.degrees();
    let n = T::count(g.node_count());
    let s1 = degrees.iter().fold(T::zero(), |acc, &d| acc + d);
    let s2 = degrees.iter().fold(T::zero(), |acc, &d| acc + d * d);
    let d_avg = s1 / n;
    let variance = degrees.iter().fold(T::zero(), |acc, &d| acc + (d - d_avg) * (d - d_avg)) / n;
    let d_min = degrees.iter().copied().fold(degrees[0], |m, d| if d < m { d } else { m });
    GraphStats { n: g.node_count(), s1, s2, d_avg, d_std: variance.sqrt(), d_min, w_max: g.max_weight() }
}

/// Structural properties the walk formulas require.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionReport {
    pub connected: bool,
    pub bipartite: bool,
    /// Side (0 or 1) of each node when the graph is bipartite.
    pub coloring: Option<Vec<u8>>,
}

impl AssumptionReport {
    /// Connected and not bipartite: the setting in which two walkers meet
    /// with probability one from any pair of start nodes.
    pub fn is_ergodic(&self) -> bool {
        self.connected && !self.bipartite
    }

    /// Whether two walkers started at `a` and `b` can ever share a node.
    /// False exactly when the graph is bipartite and the starts lie on
    /// opposite sides.
    pub fn may_meet(&self, a: usize, b: usize) -> bool {
        match &self.coloring {
            Some(side) => side[a] == side[b],
            None => true,
        }
    }
}

pub fn check_assumptions<T: Scalar>(g: &WeightedGraph<T>) -> AssumptionReport {
    let n = g.node_count();
    let mut side: Vec<Option<u8>> = vec![None; n];
    let mut components = 0;
    let mut bipartite = true;
    let mut queue = VecDeque::new();
    for root in 0..n {
        if side[root].is_some() {
            continue;
        }
        components += 1;
        side[root] = Some(0);
        queue.push_back(root);
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
    }
    let coloring = bipartite.then(|| side.into_iter().map(|s| s.unwrap_or(0)).collect());
    AssumptionReport { connected: components == 1, bipartite, coloring }
}

/// Parses the whitespace-separated `i j [w]` edge-list format.
///
/// Blank lines and anything after `#` are ignored, except that a
/// `# nodes: N` line fixes the node count (otherwise it is one past the
/// largest id seen).
pub fn parse_edge_list<T: Scalar>(text: &str) -> Result<WeightedGraph<T>> {
    let mut declared_n = None;
    let mut triples = Vec::new();
    let mut lines_of = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(rest) = comment.and_then(|c| c.trim().strip_prefix("nodes:")) {
            let n = rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad node count {:?}", rest.trim()),
            })?;
            declared_n = Some(n);
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(format!("expected `i j [w]`, found {} fields", fields.len())));
        }
        let node = |s: &str| s.parse::<usize>().map_err(|_| parse_err(format!("bad node id {s:?}")));
        let i = node(fields[0])?;
        let j = node(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| parse_err(format!("bad weight {s:?}")))?,
            None => 1.0,
        };
        if i == j {
            return Err(parse_err(format!("self-loop at node {i}")));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(parse_err(format!("weight must be positive, got {w}")));
        }
        triples.push((i.min(j), i.max(j), T::lit(w)));
        lines_of.push(line_no);
    }

    let max_id = triples.iter().map(|&(_, j, _)| j).max();
    let n = match (declared_n, max_id) {
        (Some(n), Some(m)) if m >= n => {
            return Err(Error::Parse { line: 0, message: format!("node id {m} exceeds declared count {n}") })
        }
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };

    let mut order: Vec<usize> = (0..triples.len()).collect();
    order.sort_by_key(|&k| (triples[k].0, triples[k].1, lines_of[k]));
    for w in order.windows(2) {
        let (a, b) = (triples[w[0]], triples[w[1]]);
        if (a.0, a.1) == (b.0, b.1) {
            return Err(Error::Parse {
                line: lines_of[w[1]].max(lines_of[w[0]]),
                message: format!("duplicate edge ({}, {})", a.0, a.1),
            });
        }
    }
    WeightedGraph::from_edges(n, triples)
}

/// Writes the canonical edge list: a `# nodes: N` header, then one
/// `i j w` line per edge with `i < j` in sorted order.
pub fn write_edge_list<T: Scalar>(g: &WeightedGraph<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes: {}", g.node_count());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.i, e.j, e.weight);
    }
    out
}
