//! Friend-majority location estimation with leave-one-out scoring.
//!
//! A user's friends are their mutual followers. The prediction for a user is
//! the most frequent home city among those friends, ties going to the
//! smallest city id. The user's own home is never part of the vote; it is
//! only compared with the prediction afterwards.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::geo::HomeLocationTable;
use crate::graph::SocialGraph;
use crate::ids::{CityId, UserId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EstimateError {
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("user {0} has no home location")]
    MissingHome(UserId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EstimationOutcome {
    /// Prediction equals the user's home.
    Easy,
    /// Prediction exists but differs.
    Hard,
    /// No friend with a known home.
    Unknown,
}

impl EstimationOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimationOutcome::Easy => "easy",
            EstimationOutcome::Hard => "hard",
            EstimationOutcome::Unknown => "unknown",
        }
    }

    pub fn from_prediction(predicted: Option<&CityId>, truth: &CityId) -> Self {
        match predicted {
            None => EstimationOutcome::Unknown,
            Some(p) if p == truth => EstimationOutcome::Easy,
            Some(_) => EstimationOutcome::Hard,
        }
    }
}

impl fmt::Display for EstimationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimationResult {
    pub user: UserId,
    pub predicted: Option<CityId>,
    pub truth: CityId,
    pub outcome: EstimationOutcome,
}

/// Disjoint easy/hard/unknown user lists, each sorted by id, covering every
/// node of the graph, so `total()` equals the node count.
///
/// Reference sizes from a 471,761-user crawl add up the same way:
///
/// ```
/// use geoloc_core::{GroupPartition, UserId};
///
/// let (easy, hard, unknown) = (121_275u64, 267_809u64, 82_677u64);
/// assert_eq!(easy + hard + unknown, 471_761);
///
/// let p = GroupPartition {
///     easy: vec![UserId(1)],
///     hard: vec![UserId(2), UserId(3)],
///     unknown: vec![],
/// };
/// assert_eq!(p.total(), 3);
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPartition {
    pub easy: Vec<UserId>,
    pub hard: Vec<UserId>,
    pub unknown: Vec<UserId>,
}

impl GroupPartition {
    pub fn total(&self) -> usize {
        self.easy.len() + self.hard.len() + self.unknown.len()
    }

    pub fn group(&self, outcome: EstimationOutcome) -> &[UserId] {
        match outcome {
            EstimationOutcome::Easy => &self.easy,
            EstimationOutcome::Hard => &self.hard,
            EstimationOutcome::Unknown => &self.unknown,
        }
    }
}

/// Output of [`classify_users`]: results are in graph index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub partition: GroupPartition,
    pub results: Vec<EstimationResult>,
}

/// Modal home city among the mutual followers of `user`, or `None` when no
/// friend has a known home. `homes[user]` is never consulted.
pub fn estimate_location(
    g: &SocialGraph,
    homes: &HomeLocationTable,
    user: UserId,
) -> Result<Option<CityId>, EstimateError> {
    let index = g.index_of(user).ok_or(EstimateError::UnknownUser(user))?;
    let mut counts: BTreeMap<&CityId, usize> = BTreeMap::new();
    g.for_each_mutual(index, |v| {
        if let Some(city) = homes.get(g.id(v as usize)) {
            *counts.entry(city).or_default() += 1;
        }
    });
    let mut best: Option<(&CityId, usize)> = None;
    for (city, n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((city, n));
        }
    }
    Ok(best.map(|(c, _)| c.clone()))
}

/// Runs [`estimate_location`] for every node and splits users by outcome.
/// Every node must have a home.
pub fn classify_users(
    g: &SocialGraph,
    homes: &HomeLocationTable,
) -> Result<Classification, EstimateError> {
    let n = g.node_count();
    // Dense city indices in id order so index order is the tie-break order.
    let mut cities: Vec<&CityId> = Vec::with_capacity(n);
    for &u in g.ids() {
        cities.push(homes.get(u).ok_or(EstimateError::MissingHome(u))?);
    }
    let mut palette: Vec<&CityId> = cities.clone();
    palette.sort_unstable();
    palette.dedup();
    let city_index: Vec<usize> = cities
        .iter()
        .map(|c| palette.binary_search(c).expect("city in palette"))
        .collect();

    let mut partition = GroupPartition::default();
    let mut results = Vec::with_capacity(n);
    let mut votes: Vec<usize> = Vec::new();
    for (u, &truth) in cities.iter().enumerate() {
        votes.clear();
        g.for_each_mutual(u, |v| votes.push(city_index[v as usize]));
        votes.sort_unstable();
        let predicted = modal(&votes).map(|c| palette[c]);
        let outcome = EstimationOutcome::from_prediction(predicted, truth);
        let user = g.id(u);
        match outcome {
            EstimationOutcome::Easy => partition.easy.push(user),
            EstimationOutcome::Hard => partition.hard.push(user),
            EstimationOutcome::Unknown => partition.unknown.push(user),
        }
        results.push(EstimationResult {
            user,
            predicted: predicted.cloned(),
            truth: truth.clone(),
            outcome,
        });
    }
    Ok(Classification { partition, results })
}

/// Most frequent value of a sorted slice, smallest value on ties.
fn modal(sorted: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let start = i;
        while i < sorted.len() && sorted[i] == sorted[start] {
            i += 1;
        }
        if best.is_none_or(|(_, n)| i - start > n) {
            best = Some((sorted[start], i - start));
        }
    }
    best.map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn setup(e: &[(u64, u64)], homes: &[(u64, &str)]) -> (SocialGraph, HomeLocationTable) {
        let edges: Vec<_> = e.iter().map(|&(a, b)| (UserId(a), UserId(b))).collect();
        let table: HomeLocationTable = homes
            .iter()
            .map(|&(u, c)| (UserId(u), CityId::from(c)))
            .collect();
        let g = SocialGraph::build(&edges, table.users()).unwrap();
        (g, table)
    }

    fn mutual(pairs: &[(u64, u64)]) -> Vec<(u64, u64)> {
        pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect()
    }

    #[test]
    fn strict_majority() {
        let (g, h) = setup(
            &mutual(&[(1, 2), (1, 3), (1, 4)]),
            &[(1, "Z"), (2, "A"), (3, "A"), (4, "B")],
        );
        assert_eq!(
            estimate_location(&g, &h, UserId(1)).unwrap(),
            Some("A".into())
        );
    }

    #[test]
    fn no_friends_is_none() {
        let (g, h) = setup(&[(1, 2)], &[(1, "A"), (2, "A")]);
        assert_eq!(estimate_location(&g, &h, UserId(1)).unwrap(), None);
        assert_eq!(
            estimate_location(&g, &h, UserId(7)).unwrap_err(),
            EstimateError::UnknownUser(UserId(7))
        );
    }

    #[test]
    fn tie_goes_to_smallest_city() {
        let (g, h) = setup(&mutual(&[(1, 2), (1, 3)]), &[(1, "Z"), (2, "B"), (3, "A")]);
        assert_eq!(
            estimate_location(&g, &h, UserId(1)).unwrap(),
            Some("A".into())
        );
        let c = classify_users(&g, &h).unwrap();
        assert_eq!(c.results[0].predicted, Some("A".into()));
        assert_eq!(c.results[0].outcome, EstimationOutcome::Hard);
    }

    #[test]
    fn own_label_never_votes() {
        // User 1's home is C, both friends are in A: the prediction must be A.
        let (g, h) = setup(&mutual(&[(1, 2), (1, 3)]), &[(1, "C"), (2, "A"), (3, "A")]);
        assert_eq!(
            estimate_location(&g, &h, UserId(1)).unwrap(),
            Some("A".into())
        );
    }

    #[test]
    fn mutual_pair_same_home_both_easy() {
        let (g, h) = setup(&mutual(&[(1, 2)]), &[(1, "A"), (2, "A")]);
        let c = classify_users(&g, &h).unwrap();
        assert_eq!(c.partition.easy, vec![UserId(1), UserId(2)]);
        assert!(c.partition.hard.is_empty() && c.partition.unknown.is_empty());
    }

    #[test]
    fn mutual_pair_different_homes_both_hard() {
        let (g, h) = setup(&mutual(&[(1, 2)]), &[(1, "A"), (2, "B")]);
        let c = classify_users(&g, &h).unwrap();
        assert_eq!(c.partition.hard, vec![UserId(1), UserId(2)]);
        assert_eq!(c.results[0].predicted, Some("B".into()));
        assert_eq!(c.results[1].predicted, Some("A".into()));
    }

    #[test]
    fn isolated_and_one_way_users_unknown() {
        let (g, h) = setup(&[(1, 2)], &[(1, "A"), (2, "A"), (3, "A")]);
        let c = classify_users(&g, &h).unwrap();
        assert_eq!(c.partition.unknown, vec![UserId(1), UserId(2), UserId(3)]);
        assert_eq!(c.partition.total(), 3);
    }

    #[test]
    fn missing_home_is_error() {
        let edges = [(UserId(1), UserId(2))];
        let g = SocialGraph::build(&edges, [UserId(1), UserId(2)]).unwrap();
        let h: HomeLocationTable = [(UserId(1), CityId::from("A"))].into_iter().collect();
        assert_eq!(
            classify_users(&g, &h).unwrap_err(),
            EstimateError::MissingHome(UserId(2))
        );
    }

    #[test]
    fn modal_helper() {
        assert_eq!(modal(&[]), None);
        assert_eq!(modal(&[3]), Some(3));
        assert_eq!(modal(&[1, 2, 2, 3, 3]), Some(2));
        assert_eq!(modal(&[1, 1, 2, 2]), Some(1));
    }
}
