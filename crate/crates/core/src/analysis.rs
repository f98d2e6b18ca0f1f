//! Log-binned score distributions and group bias.
//!
//! A distribution over a user set of size `N` is `f(i) = n_i / N`, where
//! `n_i` counts users whose score falls in the half-open interval
//! `[x_i, x_{i+1})`. Exact zeros get their own bin. The bias of a group
//! against the overall population is `log10(b / a)` per bin, with `a` the
//! overall fraction and `b` the group fraction; it is undefined wherever
//! either is zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::centrality::{self, CentralityError, CentralityKind, CentralityScores, IterationParams};
use crate::estimator::{self, EstimateError, EstimationOutcome, GroupPartition};
use crate::geo::HomeLocationTable;
use crate::graph::SocialGraph;
use crate::ids::UserId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("min_positive must be > 0, got {0}")]
    NonPositiveMin(f64),
    #[error("max_value {max} must be finite and >= min_positive {min}")]
    InvalidMax { min: f64, max: f64 },
    #[error("bins_per_decade must be at least 1")]
    InvalidBinsPerDecade,
    #[error("score {score} of user {user} falls outside every bin")]
    ScoreOutOfBins { user: UserId, score: f64 },
    #[error("empty user set")]
    EmptyUserSet,
    #[error("distributions use different bin specs")]
    SpecMismatch,
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("score vector has {got} entries, graph has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
}

/// Bin layout: optional zero bin followed by half-open intervals between
/// consecutive `edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSpec {
    edges: Vec<f64>,
    has_zero_bin: bool,
}

impl BinSpec {
    /// `edges` must be finite, strictly increasing and at least two long.
    pub fn new(edges: Vec<f64>, has_zero_bin: bool) -> Option<Self> {
        let ok = edges.len() >= 2
            && edges.iter().all(|x| x.is_finite())
            && edges.windows(2).all(|w| w[0] < w[1]);
        ok.then_some(BinSpec {
            edges,
            has_zero_bin,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn has_zero_bin(&self) -> bool {
        self.has_zero_bin
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1 + usize::from(self.has_zero_bin)
    }

    /// `(lower, upper)` of bin `i`. The zero bin reports `(0, 0)`.
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        match (self.has_zero_bin, i) {
            (true, 0) => (0.0, 0.0),
            (true, i) => (self.edges[i - 1], self.edges[i]),
            (false, i) => (self.edges[i], self.edges[i + 1]),
        }
    }

    /// Bin index holding `score`, if any.
    pub fn bin_of(&self, score: f64) -> Option<usize> {
        let offset = usize::from(self.has_zero_bin);
        if score == 0.0 && self.has_zero_bin {
            return Some(0);
        }
        let first = self.edges[0];
        let last = *self.edges.last().expect("at least two edges");
        if !(score >= first && score < last) {
            return None;
        }
        // Number of edges <= score, minus one, is the interval index.
        let k = self.edges.partition_point(|&x| x <= score);
        Some(k - 1 + offset)
    }
}

/// Log-spaced bins `min_positive * 10^(j / bins_per_decade)` covering
/// `[min_positive, max_value]`. The last edge is raised just above
/// `max_value` when needed so that `max_value` is inside the final interval.
pub fn make_log_bins(
    min_positive: f64,
    max_value: f64,
    bins_per_decade: u32,
    include_zero_bin: bool,
) -> Result<BinSpec, AnalysisError> {
    if !(min_positive > 0.0 && min_positive.is_finite()) {
        return Err(AnalysisError::NonPositiveMin(min_positive));
    }
    if !(max_value.is_finite() && max_value >= min_positive) {
        return Err(AnalysisError::InvalidMax {
            min: min_positive,
            max: max_value,
        });
    }
    if bins_per_decade == 0 {
        return Err(AnalysisError::InvalidBinsPerDecade);
    }
    let bpd = f64::from(bins_per_decade);
    let span = bpd * libm::log10(max_value / min_positive);
    // The small slack keeps exact decade endpoints from adding an empty bin.
    let bins = (libm::ceil(span - 1e-9) as usize).max(1);
    let mut edges: Vec<f64> = (0..=bins)
        .map(|j| min_positive * libm::pow(10.0, j as f64 / bpd))
        .collect();
    let last = edges.last_mut().expect("bins >= 1");
    if *last <= max_value {
        *last = max_value.next_up();
    }
    Ok(BinSpec::new(edges, include_zero_bin).expect("log edges increase"))
}

/// Bin counts for one user set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution {
    pub spec: BinSpec,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ScoreDistribution {
    /// All-zero distribution over no users. Its fractions are all zero.
    pub fn empty(spec: BinSpec) -> Self {
        let counts = vec![0; spec.bin_count()];
        ScoreDistribution {
            spec,
            counts,
            total: 0,
        }
    }

    pub fn fraction(&self, bin: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[bin] as f64 / self.total as f64
        }
    }

    pub fn fractions(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.fraction(i)).collect()
    }

    /// Cumulative counts, bin by bin.
    pub fn cumulative(&self) -> Vec<u64> {
        self.counts
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }
}

/// Distribution of `scores` over `users`.
pub fn score_distribution(
    scores: &CentralityScores,
    g: &SocialGraph,
    users: &[UserId],
    spec: &BinSpec,
) -> Result<ScoreDistribution, AnalysisError> {
    if users.is_empty() {
        return Err(AnalysisError::EmptyUserSet);
    }
    check_len(scores, g)?;
    let mut dist = ScoreDistribution::empty(spec.clone());
    for &user in users {
        let i = g.index_of(user).ok_or(AnalysisError::UnknownUser(user))?;
        let score = scores.values[i];
        let bin = spec
            .bin_of(score)
            .ok_or(AnalysisError::ScoreOutOfBins { user, score })?;
        dist.counts[bin] += 1;
    }
    dist.total = users.len() as u64;
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasValue {
    Defined(f64),
    Undefined,
}

impl BiasValue {
    pub fn value(self) -> Option<f64> {
        match self {
            BiasValue::Defined(v) => Some(v),
            BiasValue::Undefined => None,
        }
    }
}

/// Per-bin `log10(b / a)` of a group against the overall distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasSeries {
    pub values: Vec<BiasValue>,
}

pub fn bias(
    group: &ScoreDistribution,
    overall: &ScoreDistribution,
) -> Result<BiasSeries, AnalysisError> {
    if group.spec != overall.spec {
        return Err(AnalysisError::SpecMismatch);
    }
    let values = (0..overall.counts.len())
        .map(|i| {
            let (a, b) = (overall.fraction(i), group.fraction(i));
            if a > 0.0 && b > 0.0 {
                BiasValue::Defined(libm::log10(b / a))
            } else {
                BiasValue::Undefined
            }
        })
        .collect();
    Ok(BiasSeries { values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinParams {
    pub bins_per_decade: u32,
    pub include_zero_bin: bool,
}

impl Default for BinParams {
    fn default() -> Self {
        BinParams {
            bins_per_decade: 5,
            include_zero_bin: true,
        }
    }
}

/// One group's distribution and, for easy and hard, its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSeries {
    pub group: EstimationOutcome,
    pub distribution: ScoreDistribution,
    pub bias: Option<BiasSeries>,
}

/// Analysis of a single centrality kind.
#[derive(Debug, Clone, PartialEq)]
pub struct KindReport {
    pub kind: CentralityKind,
    pub spec: BinSpec,
    pub overall: ScoreDistribution,
    /// Easy, hard, unknown, in that order.
    pub groups: Vec<GroupSeries>,
}

/// Bin spec derived from the whole population: smallest positive score to
/// largest score. A population without positive scores gets a single
/// `[1, 10^(1/bpd))` interval next to the zero bin.
pub fn population_bins(
    scores: &CentralityScores,
    params: &BinParams,
) -> Result<BinSpec, AnalysisError> {
    let mut min_pos = f64::INFINITY;
    let mut max = 0.0f64;
    for &s in &scores.values {
        if s > 0.0 {
            min_pos = min_pos.min(s);
        }
        max = max.max(s);
    }
    if min_pos.is_infinite() {
        min_pos = 1.0;
        max = 1.0;
    }
    make_log_bins(
        min_pos,
        max,
        params.bins_per_decade,
        params.include_zero_bin,
    )
}

/// Overall and per-group distributions for one kind, with bias series for
/// the easy and hard groups. Unknown users get a distribution but no bias.
/// An empty group yields an all-zero distribution whose bias is undefined
/// everywhere.
pub fn analyze_scores(
    scores: &CentralityScores,
    g: &SocialGraph,
    partition: &GroupPartition,
    params: &BinParams,
) -> Result<KindReport, AnalysisError> {
    check_len(scores, g)?;
    let spec = population_bins(scores, params)?;
    let overall = score_distribution(scores, g, g.ids(), &spec)?;
    let mut groups = Vec::with_capacity(3);
    for group in [
        EstimationOutcome::Easy,
        EstimationOutcome::Hard,
        EstimationOutcome::Unknown,
    ] {
        let users = partition.group(group);
        let distribution = if users.is_empty() {
            ScoreDistribution::empty(spec.clone())
        } else {
            score_distribution(scores, g, users, &spec)?
        };
        let bias = match group {
            EstimationOutcome::Unknown => None,
            _ => Some(bias(&distribution, &overall)?),
        };
        groups.push(GroupSeries {
            group,
            distribution,
            bias,
        });
    }
    Ok(KindReport {
        kind: scores.kind,
        spec,
        overall,
        groups,
    })
}

/// Classifies users, computes every requested centrality and analyses each.
pub fn run_analysis(
    g: &SocialGraph,
    homes: &HomeLocationTable,
    kinds: &[CentralityKind],
    iteration: &IterationParams,
    bins: &BinParams,
) -> Result<Vec<KindReport>, AnalysisError> {
    let classification = estimator::classify_users(g, homes)?;
    kinds
        .iter()
        .map(|&kind| {
            let (scores, _) = centrality::compute(g, kind, iteration)?;
            analyze_scores(&scores, g, &classification.partition, bins)
        })
        .collect()
}

fn check_len(scores: &CentralityScores, g: &SocialGraph) -> Result<(), AnalysisError> {
    if scores.values.len() != g.node_count() {
        return Err(AnalysisError::LengthMismatch {
            expected: g.node_count(),
            got: scores.values.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decade_bins() {
        let s = make_log_bins(1.0, 100.0, 1, false).unwrap();
        assert_eq!(s.edges().len(), 3);
        assert_eq!(&s.edges()[..2], &[1.0, 10.0]);
        assert!(s.edges()[2] > 100.0 && s.edges()[2] == 100f64.next_up());
        assert_eq!(s.bin_of(100.0), Some(1));
        assert_eq!(s.bin_of(10.0), Some(1));
        assert_eq!(s.bin_of(9.999), Some(0));
    }

    #[test]
    fn half_decade_bins() {
        let s = make_log_bins(1.0, 1000.0, 2, false).unwrap();
        assert_eq!(s.bin_count(), 6);
        for (j, &e) in s.edges()[..6].iter().enumerate() {
            let want = 10f64.powf(j as f64 / 2.0);
            assert!((e - want).abs() <= 1e-12 * want, "edge {j}: {e} vs {want}");
        }
    }

    #[test]
    fn zero_bin_and_bounds() {
        let s = make_log_bins(1.0, 100.0, 1, true).unwrap();
        assert_eq!(s.bin_count(), 3);
        assert_eq!(s.bin_of(0.0), Some(0));
        assert_eq!(s.bin_of(1.0), Some(1));
        assert_eq!(s.bin_of(0.5), None);
        assert_eq!(s.bin_of(-1.0), None);
        assert_eq!(s.bin_of(f64::NAN), None);
        assert_eq!(s.bounds(0), (0.0, 0.0));
        assert_eq!(s.bounds(1), (1.0, 10.0));
    }

    #[test]
    fn degenerate_and_invalid_ranges() {
        let s = make_log_bins(3.0, 3.0, 5, false).unwrap();
        assert_eq!(s.bin_count(), 1);
        assert_eq!(s.bin_of(3.0), Some(0));
        assert!(matches!(
            make_log_bins(0.0, 1.0, 1, false),
            Err(AnalysisError::NonPositiveMin(_))
        ));
        assert!(matches!(
            make_log_bins(-1.0, 1.0, 1, false),
            Err(AnalysisError::NonPositiveMin(_))
        ));
        assert!(matches!(
            make_log_bins(2.0, 1.0, 1, false),
            Err(AnalysisError::InvalidMax { .. })
        ));
        assert_eq!(
            make_log_bins(1.0, 2.0, 0, false).unwrap_err(),
            AnalysisError::InvalidBinsPerDecade
        );
    }

    fn dist(counts: &[u64], spec: &BinSpec) -> ScoreDistribution {
        ScoreDistribution {
            spec: spec.clone(),
            counts: counts.to_vec(),
            total: counts.iter().sum(),
        }
    }

    #[test]
    fn bias_examples() {
        let spec = make_log_bins(1.0, 1000.0, 1, true).unwrap();
        // overall fractions (0.1, 0.5, 0.4, 0), group (0.2, 0.4, 0.4, 0)
        let overall = dist(&[1, 5, 4, 0], &spec);
        let group = dist(&[2, 4, 4, 0], &spec);
        let b = bias(&group, &overall).unwrap();
        assert!((b.values[0].value().unwrap() - core::f64::consts::LOG10_2).abs() < 1e-15);
        assert_eq!(b.values[2], BiasValue::Defined(0.0));
        assert_eq!(b.values[3], BiasValue::Undefined);

        let g2 = dist(&[0, 5, 0, 0], &spec);
        assert_eq!(bias(&g2, &overall).unwrap().values[0], BiasValue::Undefined);

        let other = make_log_bins(1.0, 1000.0, 2, true).unwrap();
        assert_eq!(
            bias(&dist(&[1, 0, 0, 0, 0, 0, 0], &other), &overall).unwrap_err(),
            AnalysisError::SpecMismatch
        );
    }

    #[test]
    fn bias_sign_follows_ratio() {
        let spec = make_log_bins(1.0, 100.0, 1, false).unwrap();
        let overall = dist(&[1, 1], &spec);
        let b = bias(&dist(&[3, 1], &spec), &overall).unwrap();
        assert!(b.values[0].value().unwrap() > 0.0);
        assert!(b.values[1].value().unwrap() < 0.0);
    }
}
