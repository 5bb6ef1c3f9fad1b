//! Expected first meeting time of two independent walkers.
//!
//! With `G_kk' = 1 / (1 - λk λk')` and the degree Gram matrix
//! `M = Qᵀ D Q`, the spectral formula reads
//!
//! ```text
//! μ_{a,b} = (s1² / s2²) [ Σ' G_kk' M_kk'²  -  s2 Σ' G_kk' M_kk' q_k(a) q_k'(b) / sqrt(d_a d_b) ]
//! ```
//!
//! where `Σ'` runs over every eigenpair pair except `(1, 1)`. Expanding the
//! pairs that contain the top eigenvector gives the equivalent node-wise
//! form
//!
//! ```text
//! μ_{a,b} = (1/s2) Σ_c d_c² μ_{a,b:c} - (1/s2²) Σ_c d_c² Σ_c' d_c'² μ_{c',c':c}
//! μ_{a,b:c} = μ_{a:c} + μ_{b:c}
//!           + s1² Σ_{k,k'>=2} G_kk' (q_k(c) q_k'(c) / d_c) (q_k(c) q_k'(c) / d_c - q_k(a) q_k'(b) / sqrt(d_a d_b))
//! ```
//!
//! in which the pairs `(k, 1)` and `(1, k')` are carried by the hitting
//! times, so the double sum skips the top eigenvector entirely.
//!
//! [`MeetingKernel`] precomputes the per-graph matrices once (`O(n³)`, the
//! same order as the eigendecomposition) so that each start pair costs
//! `O(n²)` by either route.

use nalgebra::{DMatrix, DVector};

use crate::csv::sig9;
use crate::error::{Error, Result};
use crate::graph::GraphStats;
use crate::scalar::Scalar;
use crate::spectral::{spectral_gap, SpectralDecomposition, NEAR_SINGULAR};

/// Spectral meeting-time results for one start pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeetingAnalysis<T> {
    pub a: usize,
    pub b: usize,
    /// Closed-form spectral value.
    pub mu_ab: T,
    /// Same quantity through the node-wise decomposition.
    pub mu_ab_decomposed: T,
    /// `s1² / s2`.
    pub principal: T,
    /// Upper bound on `|μ_{a,b}/s1² - 1/s2|`.
    pub error_bound_rhs: T,
    pub lambda2: T,
    pub s1: T,
    pub s2: T,
}

impl<T: Scalar> MeetingAnalysis<T> {
    pub const CSV_HEADER: &'static str = "a,b,mu_spectral,mu_decomposed,principal,error_bound,lambda2";

    /// One CSV row; node ids are shifted by `id_offset` (1 for 1-based output).
    pub fn to_csv_row(&self, id_offset: usize) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.a + id_offset,
            self.b + id_offset,
            sig9(self.mu_ab.as_f64()),
            sig9(self.mu_ab_decomposed.as_f64()),
            sig9(self.principal.as_f64()),
            sig9(self.error_bound_rhs.as_f64()),
            sig9(self.lambda2.as_f64()),
        )
    }

    /// Left-hand side of the principal-component error bound.
    pub fn principal_error(&self) -> T {
        (self.mu_ab / (self.s1 * self.s1) - T::one() / self.s2).abs()
    }

    pub fn bound_holds(&self) -> bool {
        self.principal_error() <= self.error_bound_rhs
    }
}

/// `s1² / s2`, equal to `n / (1 + (d_std/d_avg)²)`.
pub fn principal_component<T: Scalar>(stats: &GraphStats<T>) -> T {
    stats.s1 * stats.s1 / stats.s2
}

/// `(2 w_max² / d_min⁴) (1/(1 - λ2) + 1)`, the bound on `|μ_{a,b}/s1² - 1/s2|`.
pub fn meeting_error_bound<T: Scalar>(stats: &GraphStats<T>, lambda2: T) -> Result<T> {
    let gap = spectral_gap(lambda2)?;
    let d2 = stats.d_min * stats.d_min;
    Ok(T::lit(2.0) * stats.w_max * stats.w_max / (d2 * d2) * (T::one() / gap + T::one()))
}

/// Per-graph precomputation for meeting-time evaluations.
#[derive(Debug, Clone)]
pub struct MeetingKernel<'a, T: Scalar> {
    dec: &'a SpectralDecomposition<T>,
    stats: GraphStats<T>,
    /// `M = Qᵀ D Q`.
    gram: DMatrix<T>,
    /// `G ∘ M` with the `(1, 1)` entry zeroed.
    weighted_gram: DMatrix<T>,
    /// `Σ' G_kk' M_kk'²`, independent of the start pair.
    pair_free: T,
    /// `h_k = Σ_c d_c^{3/2} q_k(c)`.
    h: DVector<T>,
    /// `Σ_{k,k'>=2} G_kk' Σ_c q_k(c)² q_k'(c)²`.
    fourth_moment: T,
    /// `Σ_c d_c² Σ_c' d_c'² μ_{c',c':c}`.
    remeeting: T,
}

#[inline]
fn resolvent<T: Scalar>(lk: T, lk2: T) -> T {
    T::one() / (T::one() - lk * lk2)
}

impl<'a, T: Scalar> MeetingKernel<'a, T> {
    pub fn new(dec: &'a SpectralDecomposition<T>, stats: &GraphStats<T>) -> Result<Self> {
        if dec.is_bipartite() {
            return Err(Error::Bipartite);
        }
        let n = dec.node_count();
        if stats.n != n {
            return Err(Error::InvalidParameter(format!(
                "statistics describe {} nodes, decomposition {n}",
                stats.n
            )));
        }
        let q = dec.eigenvectors();
        let lam = dec.eigenvalues();
        let d = dec.degrees();

        let near = T::lit(NEAR_SINGULAR);
        let mut worst = T::one();
        for k in 0..n {
            for k2 in 0..n {
                if k + k2 > 0 {
                    let gap = T::one() - lam[k] * lam[k2];
                    if gap < worst {
                        worst = gap;
                    }
                }
            }
        }
        if worst < near {
            log::warn!("smallest 1 - λk λk' is {worst}; meeting-time terms are near-singular");
        }

        let mut scaled = q.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= d[i];
        }
        let gram = q.tr_mul(&scaled);
        drop(scaled);
        let mut weighted_gram = DMatrix::from_fn(n, n, |k, k2| gram[(k, k2)] * resolvent(lam[k], lam[k2]));
        weighted_gram[(0, 0)] = T::zero();

        let mut pair_free = T::zero();
        for k2 in 0..n {
            for k in 0..n {
                pair_free += weighted_gram[(k, k2)] * gram[(k, k2)];
            }
        }

        let h = DVector::from_fn(n, |k, _| (0..n).fold(T::zero(), |acc, c| acc + d[c] * dec.sqrt_degrees()[c] * q[(c, k)]));

        let squares = q.map(|x| x * x);
        let overlap = squares.tr_mul(&squares);
        drop(squares);
        let mut fourth_moment = T::zero();
        for k2 in 1..n {
            for k in 1..n {
                fourth_moment += overlap[(k, k2)] * resolvent(lam[k], lam[k2]);
            }
        }
        drop(overlap);

        let mut kernel = Self {
            dec,
            stats: *stats,
            gram,
            weighted_gram,
            pair_free,
            h,
            fourth_moment,
            remeeting: T::zero(),
        };
        kernel.remeeting = kernel.remeeting_sum();
        Ok(kernel)
    }

    pub fn decomposition(&self) -> &SpectralDecomposition<T> {
        self.dec
    }

    pub fn stats(&self) -> &GraphStats<T> {
        &self.stats
    }

    /// The degree Gram matrix `Qᵀ D Q`.
    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.dec.check_node(a)?;
        self.dec.check_node(b)?;
        if a == b {
            return Err(Error::SameStart(a));
        }
        Ok(())
    }

    fn row(&self, i: usize) -> DVector<T> {
        self.dec.eigenvectors().row(i).transpose()
    }

    /// Expected first meeting time of walkers started at `a != b`.
    pub fn first_meeting_time(&self, a: usize, b: usize) -> Result<T> {
        self.check_pair(a, b)?;
        let (s1, s2) = (self.stats.s1, self.stats.s2);
        let d = self.dec.degrees();
        let pair = self.row(a).dot(&(&self.weighted_gram * self.row(b))) / (d[a] * d[b]).sqrt();
        Ok(s1 * s1 / (s2 * s2) * (self.pair_free - s2 * pair))
    }

    /// Node-wise route: `(1/s2) Σ_c d_c² μ_{a,b:c} - (1/s2²) Σ_c d_c² Σ_c' d_c'² μ_{c',c':c}`,
    /// with the sums over `c` carried out in closed form.
    pub fn first_meeting_decomposed(&self, a: usize, b: usize) -> Result<T> {
        self.check_pair(a, b)?;
        let (s1, s2) = (self.stats.s1, self.stats.s2);
        let dec = self.dec;
        let n = dec.node_count();
        let lam = dec.eigenvalues();
        let d = dec.degrees();

        // Σ_c d_c² μ_{x:c} = s1 Σ_{k>=2} (M_kk - q_k(x) h_k / sqrt(d_x)) / (1 - λk)
        let hitting_mass = |x: usize| {
            let root = dec.sqrt_degrees()[x];
            (1..n).fold(T::zero(), |acc, k| {
                acc + (self.gram[(k, k)] - dec.q(k, x) * self.h[k] / root) / (T::one() - lam[k])
            }) * s1
        };
        let mut cross = T::zero();
        for k2 in 1..n {
            let qb = dec.q(k2, b);
            let mut col = T::zero();
            for k in 1..n {
                col += self.weighted_gram[(k, k2)] * dec.q(k, a);
            }
            cross += col * qb;
        }
        let cross = cross / (d[a] * d[b]).sqrt();
        let weighted_meeting = hitting_mass(a) + hitting_mass(b) + s1 * s1 * (self.fourth_moment - cross);
        Ok(weighted_meeting / s2 - self.remeeting / (s2 * s2))
    }

    /// `Σ_c d_c² Σ_c' d_c'² μ_{c',c':c}` in closed form.
    fn remeeting_sum(&self) -> T {
        let dec = self.dec;
        let n = dec.node_count();
        let lam = dec.eigenvalues();
        let (s1, s2) = (self.stats.s1, self.stats.s2);
        // Σ_c d_c² Σ_c' d_c'² μ_{c':c} = s1 Σ_{k>=2} (s2 M_kk - h_k²) / (1 - λk)
        let hitting = (1..n).fold(T::zero(), |acc, k| {
            acc + (s2 * self.gram[(k, k)] - self.h[k] * self.h[k]) / (T::one() - lam[k])
        }) * s1;
        let mut gram_sq = T::zero();
        for k2 in 1..n {
            for k in 1..n {
                gram_sq += self.weighted_gram[(k, k2)] * self.gram[(k, k2)];
            }
        }
        T::lit(2.0) * hitting + s1 * s1 * (s2 * self.fourth_moment - gram_sq)
    }

    /// Expected time until walkers from `a` and `b` first meet at node `c`,
    /// in the node-wise form that feeds the decomposition.
    pub fn first_meeting_time_at_node(&self, a: usize, b: usize, c: usize) -> Result<T> {
        self.check_pair(a, b)?;
        self.dec.check_node(c)?;
        first_meeting_at_node_unchecked(self.dec, a, b, c)
    }

    /// Generating function of the joint occupancy `Σ_c x_{a:c}(t) x_{b:c}(t)`
    /// at `|z| < 1`.
    pub fn joint_gf(&self, a: usize, b: usize, z: T) -> Result<T> {
        self.dec.check_node(a)?;
        self.dec.check_node(b)?;
        if !(z.abs() < T::one()) {
            return Err(Error::InvalidParameter(format!("generating function needs |z| < 1, got {z}")));
        }
        let dec = self.dec;
        let n = dec.node_count();
        let lam = dec.eigenvalues();
        let mut sum = T::zero();
        for k2 in 0..n {
            let qb = dec.q(k2, b);
            for k in 0..n {
                sum += dec.q(k, a) * qb * self.gram[(k, k2)] / (T::one() - lam[k] * lam[k2] * z);
            }
        }
        Ok(sum / (dec.sqrt_degrees()[a] * dec.sqrt_degrees()[b]))
    }

    pub fn analyze(&self, a: usize, b: usize) -> Result<MeetingAnalysis<T>> {
        let lambda2 = self.dec.lambda2();
        Ok(MeetingAnalysis {
            a,
            b,
            mu_ab: self.first_meeting_time(a, b)?,
            mu_ab_decomposed: self.first_meeting_decomposed(a, b)?,
            principal: principal_component(&self.stats),
            error_bound_rhs: meeting_error_bound(&self.stats, lambda2)?,
            lambda2,
            s1: self.stats.s1,
            s2: self.stats.s2,
        })
    }
}

fn require_meetable<T: Scalar>(dec: &SpectralDecomposition<T>, a: usize, b: usize) -> Result<()> {
    dec.check_node(a)?;
    dec.check_node(b)?;
    if a == b {
        return Err(Error::SameStart(a));
    }
    if dec.is_bipartite() {
        return Err(Error::Bipartite);
    }
    Ok(())
}

/// Spectral first meeting time for a single pair. Builds a [`MeetingKernel`]
/// internally; reuse a kernel when evaluating many pairs on one graph.
pub fn first_meeting_time_spectral<T: Scalar>(
    dec: &SpectralDecomposition<T>,
    stats: &GraphStats<T>,
    a: usize,
    b: usize,
) -> Result<T> {
    require_meetable(dec, a, b)?;
    MeetingKernel::new(dec, stats)?.first_meeting_time(a, b)
}

/// Node-wise meeting time at `c` for walkers from `a` and `b`.
pub fn first_meeting_time_at_node<T: Scalar>(dec: &SpectralDecomposition<T>, a: usize, b: usize, c: usize) -> Result<T> {
    require_meetable(dec, a, b)?;
    dec.check_node(c)?;
    first_meeting_at_node_unchecked(dec, a, b, c)
}

/// `μ_{x,y:c}` without the `x != y` check; equal starts appear only inside
/// the re-meeting term of the decomposition.
fn first_meeting_at_node_unchecked<T: Scalar>(dec: &SpectralDecomposition<T>, x: usize, y: usize, c: usize) -> Result<T> {
    let n = dec.node_count();
    let lam = dec.eigenvalues();
    let d = dec.degrees();
    let s1 = dec.s1();
    let root_xy = (d[x] * d[y]).sqrt();
    let mut double = T::zero();
    for k in 1..n {
        let (qkc, qkx) = (dec.q(k, c), dec.q(k, x));
        for k2 in 1..n {
            let qk2c = dec.q(k2, c);
            let local = qkc * qk2c / d[c];
            double += resolvent(lam[k], lam[k2]) * local * (local - qkx * dec.q(k2, y) / root_xy);
        }
    }
    Ok(dec.hitting_time(x, c)? + dec.hitting_time(y, c)? + s1 * s1 * double)
}

/// Node-wise route evaluated term by term: every `μ_{a,b:c}` and every
/// `μ_{c',c':c}` is computed explicitly, `O(n⁴)` in total. Intended as a
/// reference for small graphs.
pub fn first_meeting_decomposed<T: Scalar>(
    dec: &SpectralDecomposition<T>,
    stats: &GraphStats<T>,
    a: usize,
    b: usize,
) -> Result<T> {
    require_meetable(dec, a, b)?;
    let n = dec.node_count();
    let d = dec.degrees();
    let s2 = stats.s2;
    let mut first = T::zero();
    let mut second = T::zero();
    for c in 0..n {
        let w = d[c] * d[c];
        first += w * first_meeting_at_node_unchecked(dec, a, b, c)?;
        let mut inner = T::zero();
        for c2 in 0..n {
            inner += d[c2] * d[c2] * first_meeting_at_node_unchecked(dec, c2, c2, c)?;
        }
        second += w * inner;
    }
    Ok(first / s2 - second / (s2 * s2))
}

/// Direct quadruple-loop evaluation of the spectral meeting time over
/// `(c, c', k, k')`, `O(n⁴)`. Reference for the factorized kernel.
pub fn first_meeting_time_naive<T: Scalar>(
    dec: &SpectralDecomposition<T>,
    stats: &GraphStats<T>,
    a: usize,
    b: usize,
) -> Result<T> {
    require_meetable(dec, a, b)?;
    let n = dec.node_count();
    let lam = dec.eigenvalues();
    let d = dec.degrees();
    let root = dec.sqrt_degrees();
    let (s1, s2) = (stats.s1, stats.s2);
    let two = T::lit(2.0);
    let mut total = T::zero();
    for c in 0..n {
        for c2 in 0..n {
            let mut single = T::zero();
            for k in 1..n {
                let qc = dec.q(k, c) / root[c];
                let bracket = two * qc * dec.q(k, c2) / root[c2] - qc * (dec.q(k, a) / root[a] + dec.q(k, b) / root[b]);
                single += bracket / (T::one() - lam[k]);
            }
            let mut double = T::zero();
            for k in 1..n {
                for k2 in 1..n {
                    let here = dec.q(k, c) * dec.q(k2, c) / d[c];
                    let there = dec.q(k, c2) * dec.q(k2, c2) / d[c2];
                    let start = dec.q(k, a) * dec.q(k2, b) / (root[a] * root[b]);
                    double += here * (there - start) / (T::one() - lam[k] * lam[k2]);
                }
            }
            total += d[c] * d[c] * d[c2] * d[c2] * (s1 * single + s1 * s1 * double);
        }
    }
    Ok(total / (s2 * s2))
}

/// Probability that walkers from `a` and `b` share a node at step `t`,
/// `Σ_c x_{a:c}(t) x_{b:c}(t)`.
pub fn joint_meeting_probability<T: Scalar>(dec: &SpectralDecomposition<T>, a: usize, b: usize, t: usize) -> Result<T> {
    let xa = dec.occupancy_vector(a, t)?;
    let xb = dec.occupancy_vector(b, t)?;
    Ok(xa.iter().zip(&xb).fold(T::zero(), |acc, (&p, &q)| acc + p * q))
}

/// Closed-form generating function of [`joint_meeting_probability`].
pub fn joint_gf<T: Scalar>(dec: &SpectralDecomposition<T>, stats: &GraphStats<T>, a: usize, b: usize, z: T) -> Result<T> {
    if dec.is_bipartite() {
        // the kernel refuses bipartite graphs; the generating function itself is fine for |z| < 1
        return joint_gf_direct(dec, a, b, z);
    }
    MeetingKernel::new(dec, stats)?.joint_gf(a, b, z)
}

fn joint_gf_direct<T: Scalar>(dec: &SpectralDecomposition<T>, a: usize, b: usize, z: T) -> Result<T> {
    dec.check_node(a)?;
    dec.check_node(b)?;
    if !(z.abs() < T::one()) {
        return Err(Error::InvalidParameter(format!("generating function needs |z| < 1, got {z}")));
    }
    let n = dec.node_count();
    let lam = dec.eigenvalues();
    let d = dec.degrees();
    let mut sum = T::zero();
    for k in 0..n {
        for k2 in 0..n {
            let gram = (0..n).fold(T::zero(), |acc, c| acc + d[c] * dec.q(k, c) * dec.q(k2, c));
            sum += dec.q(k, a) * dec.q(k2, b) * gram / (T::one() - lam[k] * lam[k2] * z);
        }
    }
    Ok(sum / (dec.sqrt_degrees()[a] * dec.sqrt_degrees()[b]))
}
