//! Eigendecomposition of the symmetric walk operator `W = D^{-1/2} A D^{-1/2}`
//! and the single-walker formulas built on it: occupancy probabilities,
//! the stationary distribution, and expected first hitting times.
//!
//! `W` is similar to the transition matrix `A D^{-1}`, so it shares its
//! spectrum: `1 = λ1 > λ2 >= ... >= λn >= -1`, with `λn = -1` exactly when
//! the graph is bipartite. The top eigenvector is `q1(i) = sqrt(d_i / s1)`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::csv::sig9;
use crate::error::{Error, Result};
use crate::graph::{GraphStats, WeightedGraph};
use crate::scalar::Scalar;

/// Gap below which `1 - λ` (or `1 - λk λk'`) is reported as near-singular.
pub const NEAR_SINGULAR: f64 = 1e-12;

/// Eigenvalues closer than this are treated as one eigenspace when ordering.
const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralOptions {
    /// Largest graph accepted; the dense solver stores `n^2` scalars.
    pub max_nodes: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { max_nodes: 5000 }
    }
}

/// Eigenpairs of `W` sorted by decreasing eigenvalue, with column `k` of
/// [`eigenvectors`](Self::eigenvectors) paired with eigenvalue `k`.
///
/// Each eigenvector is scaled so its largest-magnitude entry is positive,
/// which makes the top eigenvector entrywise positive. Within a numerically
/// repeated eigenvalue the columns are ordered lexicographically.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Scalar> {
    eigenvalues: DVector<T>,
    eigenvectors: DMatrix<T>,
    degrees: Vec<T>,
    sqrt_degrees: Vec<T>,
    s1: T,
    bipartite: bool,
}

pub fn decompose<T: Scalar>(g: &WeightedGraph<T>) -> Result<SpectralDecomposition<T>> {
    decompose_with(g, &SpectralOptions::default())
}

pub fn decompose_with<T: Scalar>(g: &WeightedGraph<T>, options: &SpectralOptions) -> Result<SpectralDecomposition<T>> {
    let n = g.node_count();
    if n > options.max_nodes {
        return Err(Error::TooLarge { n, limit: options.max_nodes });
    }
    let report = g.check_assumptions();
    if !report.connected {
        return Err(Error::Disconnected);
    }

    let degrees = g.degrees().to_vec();
    let sqrt_degrees: Vec<T> = degrees.iter().map(|d| d.sqrt()).collect();
    let mut w = DMatrix::<T>::zeros(n, n);
    for e in g.edges() {
        let v = e.weight / (sqrt_degrees[e.i] * sqrt_degrees[e.j]);
        w[(e.i, e.j)] = v;
        w[(e.j, e.i)] = v;
    }

    let eig = SymmetricEigen::try_new(w.clone(), T::default_epsilon(), 1000 * n.max(10))
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    // cheap guard against a solver returning wrong vectors for clustered eigenvalues
    let mut residual = &w * &eig.eigenvectors;
    for (k, mut col) in residual.column_iter_mut().enumerate() {
        col.axpy(-eig.eigenvalues[k], &eig.eigenvectors.column(k), T::one());
    }
    let residual = residual.amax();
    let limit = T::lit(1e-8_f64.max(100.0 * n as f64 * T::default_epsilon().as_f64()));
    if residual > limit {
        return Err(Error::Numeric(format!("eigenpair residual {residual} exceeds {limit}")));
    }
    let mut vectors = eig.eigenvectors;
    for mut col in vectors.column_iter_mut() {
        let mut pivot = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < T::zero() {
            col.neg_mut();
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap_or(std::cmp::Ordering::Equal));
    let tie = T::lit(TIE_TOLERANCE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.eigenvalues[order[end - 1]] - eig.eigenvalues[order[end]] <= tie {
            end += 1;
        }
        order[start..end].sort_by(|&x, &y| {
            vectors
                .column(x)
                .iter()
                .zip(vectors.column(y).iter())
                .map(|(p, q)| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        start = end;
    }

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]);

    let tolerance = T::lit(1e-9_f64.max(100.0 * n as f64 * T::default_epsilon().as_f64()));
    if (eigenvalues[0] - T::one()).abs() > tolerance {
        return Err(Error::Numeric(format!("leading eigenvalue {} differs from 1", eigenvalues[0])));
    }
    if n > 1 && T::one() - eigenvalues[1] < T::lit(NEAR_SINGULAR) {
        log::warn!("second eigenvalue {} is within {NEAR_SINGULAR:e} of 1; graph is nearly disconnected", eigenvalues[1]);
    }

    let s1 = degrees.iter().fold(T::zero(), |acc, &d| acc + d);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, degrees, sqrt_degrees, s1, bipartite: report.bipartite })
}

impl<T: Scalar> SpectralDecomposition<T> {
    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// Eigenvalues `λ1 >= λ2 >= ... >= λn`.
    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns.
    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.eigenvectors
    }

    /// Second largest eigenvalue.
    pub fn lambda2(&self) -> T {
        self.eigenvalues[1]
    }

    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }

    pub fn sqrt_degrees(&self) -> &[T] {
        &self.sqrt_degrees
    }

    pub fn s1(&self) -> T {
        self.s1
    }

    /// True for bipartite graphs, where `λn = -1` and the meeting formulas
    /// do not apply.
    pub fn is_bipartite(&self) -> bool {
        self.bipartite
    }

    /// Entry `i` of eigenvector `k` (both 0-based).
    #[inline]
    pub fn q(&self, k: usize, i: usize) -> T {
        self.eigenvectors[(i, k)]
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        if i < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: i, n: self.node_count() })
        }
    }

    /// Copy with eigenvector `k` negated wherever `flips[k]` is set. All
    /// formulas in the crate are invariant under such flips.
    pub fn with_flipped_signs(&self, flips: &[bool]) -> Self {
        let mut out = self.clone();
        for (k, &flip) in flips.iter().enumerate().take(self.node_count()) {
            if flip {
                out.eigenvectors.column_mut(k).neg_mut();
            }
        }
        out
    }

    /// Probability that a walker started at `a` sits on `i` after `t` steps,
    /// `x_{a:i}(t) = sqrt(d_i/d_a) Σ_k q_k(a) q_k(i) λk^t`.
    pub fn occupancy_probability(&self, a: usize, i: usize, t: usize) -> Result<T> {
        self.check_node(a)?;
        self.check_node(i)?;
        let sum = (0..self.node_count()).fold(T::zero(), |acc, k| {
            acc + self.q(k, a) * self.q(k, i) * power(self.eigenvalues[k], t)
        });
        Ok(self.sqrt_degrees[i] / self.sqrt_degrees[a] * sum)
    }

    /// The whole occupancy vector `x_a(t)` in `O(n^2)`.
    pub fn occupancy_vector(&self, a: usize, t: usize) -> Result<Vec<T>> {
        self.check_node(a)?;
        let n = self.node_count();
        let coeffs: Vec<T> = (0..n).map(|k| self.q(k, a) * power(self.eigenvalues[k], t)).collect();
        Ok((0..n)
            .map(|i| {
                let sum = (0..n).fold(T::zero(), |acc, k| acc + coeffs[k] * self.q(k, i));
                self.sqrt_degrees[i] / self.sqrt_degrees[a] * sum
            })
            .collect())
    }

    /// Expected number of steps for a walker started at `a` to first reach `i`:
    /// `s1 Σ_{k>=2} (q_k(i)^2/d_i - q_k(a) q_k(i)/sqrt(d_a d_i)) / (1 - λk)`.
    /// Zero when `a == i`.
    pub fn hitting_time(&self, a: usize, i: usize) -> Result<T> {
        self.check_node(a)?;
        self.check_node(i)?;
        if a == i {
            return Ok(T::zero());
        }
        let (d_i, root_ai) = (self.degrees[i], self.sqrt_degrees[a] * self.sqrt_degrees[i]);
        let sum = (1..self.node_count()).fold(T::zero(), |acc, k| {
            let (qa, qi) = (self.q(k, a), self.q(k, i));
            acc + (qi * qi / d_i - qa * qi / root_ai) / (T::one() - self.eigenvalues[k])
        });
        Ok(self.s1 * sum)
    }

    /// The principal component `s1 / d_i` of the hitting time to `i`.
    pub fn hitting_time_approx(&self, i: usize) -> Result<T> {
        self.check_node(i)?;
        Ok(self.s1 / self.degrees[i])
    }

    /// Eigenpairs as CSV: `k,lambda,q_0,...,q_{n-1}` with `k` 1-based.
    pub fn to_csv(&self) -> String {
        let n = self.node_count();
        let mut out = String::from("k,lambda");
        for i in 0..n {
            let _ = write!(out, ",q_{i}");
        }
        out.push('\n');
        for k in 0..n {
            let _ = write!(out, "{},{}", k + 1, sig9(self.eigenvalues[k].as_f64()));
            for i in 0..n {
                let _ = write!(out, ",{}", sig9(self.q(k, i).as_f64()));
            }
            out.push('\n');
        }
        out
    }
}

#[inline]
pub(crate) fn power<T: Scalar>(x: T, t: usize) -> T {
    match i32::try_from(t) {
        Ok(t) => x.powi(t),
        Err(_) => x.powf(T::count(t)),
    }
}

/// Iterates `x(t+1) = A D^{-1} x(t)` from the indicator of `a`, without any
/// eigendecomposition.
pub fn occupancy_evolution<T: Scalar>(g: &WeightedGraph<T>, a: usize, t: usize) -> Result<Vec<T>> {
    g.check_node(a)?;
    let n = g.node_count();
    let degrees = g.degrees();
    let mut x = vec![T::zero(); n];
    x[a] = T::one();
    let mut next = vec![T::zero(); n];
    for _ in 0..t {
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = g.neighbors(i).iter().fold(T::zero(), |acc, &(j, w)| acc + x[j] * w / degrees[j]);
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(x)
}

/// Limit occupancy `d_i / s1`.
pub fn stationary_distribution<T: Scalar>(g: &WeightedGraph<T>) -> Vec<T> {
    let s1 = g.stats().s1;
    g.degrees().iter().map(|&d| d / s1).collect()
}

/// Bound on `|μ_{a:i}/s1 - 1/d_i|`: `(2 w_max / d_min^2) (1/(1 - λ2) + 1)`.
pub fn hitting_time_bound<T: Scalar>(stats: &GraphStats<T>, lambda2: T) -> Result<T> {
    let gap = spectral_gap(lambda2)?;
    let two = T::lit(2.0);
    Ok(two * stats.w_max / (stats.d_min * stats.d_min) * (T::one() / gap + T::one()))
}

pub(crate) fn spectral_gap<T: Scalar>(lambda2: T) -> Result<T> {
    let gap = T::one() - lambda2;
    if !(gap > T::zero()) {
        return Err(Error::Numeric(format!("second eigenvalue {lambda2} is not below 1")));
    }
    if gap < T::lit(NEAR_SINGULAR) {
        log::warn!("spectral gap {gap} is below {NEAR_SINGULAR:e}; bounds are unreliable");
    }
    Ok(gap)
}
