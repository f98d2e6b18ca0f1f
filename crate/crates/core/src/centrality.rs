//! Degree, PageRank and HITS centralities.
//!
//! Both iterative kernels pull over predecessor lists in ascending index
//! order, so every run with the same parameters is bit-identical.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::graph::SocialGraph;

/// The five centralities analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CentralityKind {
    InDegree,
    OutDegree,
    PageRank,
    HitsAuthority,
    HitsHub,
}

impl CentralityKind {
    pub const ALL: [CentralityKind; 5] = [
        CentralityKind::InDegree,
        CentralityKind::OutDegree,
        CentralityKind::PageRank,
        CentralityKind::HitsAuthority,
        CentralityKind::HitsHub,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CentralityKind::InDegree => "in_degree",
            CentralityKind::OutDegree => "out_degree",
            CentralityKind::PageRank => "pagerank",
            CentralityKind::HitsAuthority => "hits_authority",
            CentralityKind::HitsHub => "hits_hub",
        }
    }
}

impl fmt::Display for CentralityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown centrality kind {0:?}")]
pub struct UnknownKind(pub alloc::string::String);

impl FromStr for CentralityKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CentralityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownKind(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

/// Parameters shared by PageRank and HITS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationParams {
    /// PageRank damping factor, in (0, 1).
    pub damping: f64,
    /// PageRank stops when the L1 change drops below this; HITS when the
    /// largest per-node change does.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IterationParams {
    fn default() -> Self {
        IterationParams {
            damping: 0.85,
            tolerance: 1e-9,
            max_iterations: 1000,
        }
    }
}

impl IterationParams {
    pub fn validate(&self) -> Result<(), CentralityError> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(CentralityError::InvalidParams("damping must lie in (0, 1)"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CentralityError::InvalidParams("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(CentralityError::InvalidParams(
                "max_iterations must be positive",
            ));
        }
        Ok(())
    }
}

/// Per-node scores aligned with the graph's index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub kind: CentralityKind,
    pub values: Vec<f64>,
}

/// How an iterative kernel finished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CentralityError {
    #[error("invalid iteration parameters: {0}")]
    InvalidParams(&'static str),
    #[error("{kind} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        kind: CentralityKind,
        iterations: usize,
        residual: f64,
        /// Last iterate. For HITS this is the authority vector.
        last: Vec<f64>,
        /// Last hub iterate for HITS, empty for PageRank.
        last_hub: Vec<f64>,
    },
}

/// Raw follower (`In`) or followee (`Out`) counts.
pub fn degree_scores(g: &SocialGraph, direction: Direction) -> CentralityScores {
    let n = g.node_count();
    let (kind, values) = match direction {
        Direction::In => (
            CentralityKind::InDegree,
            (0..n).map(|u| g.in_degree(u) as f64).collect(),
        ),
        Direction::Out => (
            CentralityKind::OutDegree,
            (0..n).map(|u| g.out_degree(u) as f64).collect(),
        ),
    };
    CentralityScores { kind, values }
}

/// PageRank by power iteration with uniform teleport and uniform
/// redistribution of dangling-node mass, starting from `1/n`.
pub fn pagerank(
    g: &SocialGraph,
    params: &IterationParams,
) -> Result<(CentralityScores, Convergence), CentralityError> {
    params.validate()?;
    let n = g.node_count();
    let nf = n as f64;
    let d = params.damping;
    let inv_out: Vec<f64> = (0..n)
        .map(|u| match g.out_degree(u) {
            0 => 0.0,
            k => 1.0 / k as f64,
        })
        .collect();
    let dangling: Vec<usize> = (0..n).filter(|&u| g.out_degree(u) == 0).collect();

    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=params.max_iterations {
        let dangling_mass: f64 = dangling.iter().map(|&u| x[u]).sum();
        let base = (1.0 - d) / nf + d * dangling_mass / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = g
                .predecessors(v)
                .iter()
                .map(|&u| x[u as usize] * inv_out[u as usize])
                .sum();
            *slot = base + d * inflow;
        }
        residual = l1_distance(&x, &next);
        core::mem::swap(&mut x, &mut next);
        if residual < params.tolerance {
            return Ok((
                CentralityScores {
                    kind: CentralityKind::PageRank,
                    values: x,
                },
                Convergence {
                    iterations: it,
                    residual,
                },
            ));
        }
    }
    Err(CentralityError::NonConvergence {
        kind: CentralityKind::PageRank,
        iterations: params.max_iterations,
        residual,
        last: x,
        last_hub: Vec::new(),
    })
}

/// HITS authority and hub scores.
///
/// Each iteration sets `auth(v) = sum of hub(u) over u -> v`, L1-normalises,
/// then sets `hub(u) = sum of auth(v) over u -> v` from the new authorities
/// and L1-normalises. Both start uniform. A graph without edges returns
/// uniform vectors after zero iterations.
pub fn hits(
    g: &SocialGraph,
    params: &IterationParams,
) -> Result<(CentralityScores, CentralityScores, Convergence), CentralityError> {
    params.validate()?;
    let n = g.node_count();
    let mut auth = vec![1.0 / n as f64; n];
    let mut hub = auth.clone();
    let wrap = |auth, hub, conv| {
        (
            CentralityScores {
                kind: CentralityKind::HitsAuthority,
                values: auth,
            },
            CentralityScores {
                kind: CentralityKind::HitsHub,
                values: hub,
            },
            conv,
        )
    };
    if g.edge_count() == 0 {
        return Ok(wrap(
            auth,
            hub,
            Convergence {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }

    let mut next_auth = vec![0.0; n];
    let mut next_hub = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=params.max_iterations {
        for (v, slot) in next_auth.iter_mut().enumerate() {
            *slot = g.predecessors(v).iter().map(|&u| hub[u as usize]).sum();
        }
        normalize_l1(&mut next_auth);
        for (u, slot) in next_hub.iter_mut().enumerate() {
            *slot = g.successors(u).iter().map(|&v| next_auth[v as usize]).sum();
        }
        normalize_l1(&mut next_hub);

        residual = max_abs_diff(&auth, &next_auth).max(max_abs_diff(&hub, &next_hub));
        core::mem::swap(&mut auth, &mut next_auth);
        core::mem::swap(&mut hub, &mut next_hub);
        if residual < params.tolerance {
            return Ok(wrap(
                auth,
                hub,
                Convergence {
                    iterations: it,
                    residual,
                },
            ));
        }
    }
    Err(CentralityError::NonConvergence {
        kind: CentralityKind::HitsAuthority,
        iterations: params.max_iterations,
        residual,
        last: auth,
        last_hub: hub,
    })
}

/// Computes one kind. HITS kinds run the full HITS iteration and keep the
/// requested vector.
pub fn compute(
    g: &SocialGraph,
    kind: CentralityKind,
    params: &IterationParams,
) -> Result<(CentralityScores, Convergence), CentralityError> {
    let exact = Convergence {
        iterations: 0,
        residual: 0.0,
    };
    match kind {
        CentralityKind::InDegree => Ok((degree_scores(g, Direction::In), exact)),
        CentralityKind::OutDegree => Ok((degree_scores(g, Direction::Out), exact)),
        CentralityKind::PageRank => pagerank(g, params),
        CentralityKind::HitsAuthority => hits(g, params).map(|(a, _, c)| (a, c)),
        CentralityKind::HitsHub => hits(g, params).map(|(_, h, c)| (h, c)),
    }
}

fn normalize_l1(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| libm::fabs(x - y))
        .fold(0.0, f64::max)
}
