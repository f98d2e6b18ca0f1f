//! Simple directed follow graph in compressed sparse row form.
//!
//! User ids are remapped to a dense `0..n` index in ascending id order. Both
//! the forward (followees) and reverse (followers) adjacency are stored, each
//! list sorted ascending, so every query is order-independent and neighbour
//! membership is a binary search.

use alloc::vec;
use alloc::vec::Vec;

use crate::ids::UserId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("empty node set")]
    EmptyNodeSet,
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("too many nodes: {0} exceeds the u32 index space")]
    TooManyNodes(usize),
    #[error("invalid graph: {0}")]
    Invalid(&'static str),
}

/// Immutable simple directed graph: no self-loops, no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    ids: Vec<UserId>,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
}

/// Summary counts of a [`SocialGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_in_degree: f64,
    pub avg_out_degree: f64,
    /// Mean number of mutual followers per node.
    pub mutual_edge_user_avg: f64,
    /// Nodes with neither incoming nor outgoing edges.
    pub isolated_count: usize,
}

impl SocialGraph {
    /// Builds the graph over exactly `located` users, keeping only `raw_edges`
    /// (follower, followee) whose endpoints are both located. Duplicate edges
    /// and self-loops are dropped. The result does not depend on input order.
    pub fn build<I>(raw_edges: &[(UserId, UserId)], located: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = UserId>,
    {
        let mut ids: Vec<UserId> = located.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(GraphError::EmptyNodeSet);
        }
        if ids.len() > u32::MAX as usize {
            return Err(GraphError::TooManyNodes(ids.len()));
        }
        let index = |u: UserId| ids.binary_search(&u).ok().map(|i| i as u32);
        let edges: Vec<(u32, u32)> = raw_edges
            .iter()
            .filter_map(|&(a, b)| Some((index(a)?, index(b)?)))
            .collect();
        Ok(Self::from_index_edges(ids, edges))
    }

    /// Builds from node ids that are already sorted and unique plus edges in
    /// index space. Self-loops and duplicates are removed.
    pub(crate) fn from_index_edges(ids: Vec<UserId>, mut edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let n = ids.len();
        edges.retain(|&(a, b)| a != b);
        edges.sort_unstable();
        edges.dedup();

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(a, b) in &edges {
            out_offsets[a as usize + 1] += 1;
            in_offsets[b as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets: Vec<u32> = edges.iter().map(|&(_, b)| b).collect();
        // Edges are sorted by source, so filling in that order leaves every
        // predecessor list sorted.
        let mut in_sources = vec![0u32; edges.len()];
        let mut cursor = in_offsets.clone();
        for &(a, b) in &edges {
            let slot = &mut cursor[b as usize];
            in_sources[*slot] = a;
            *slot += 1;
        }
        SocialGraph {
            ids,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        }
    }

    /// Reassembles a graph from CSR forward adjacency, validating every
    /// invariant. Used when loading a persisted graph.
    pub fn from_csr(
        ids: Vec<UserId>,
        out_offsets: Vec<usize>,
        out_targets: Vec<u32>,
    ) -> Result<Self, GraphError> {
        let n = ids.len();
        if n == 0 {
            return Err(GraphError::EmptyNodeSet);
        }
        if n > u32::MAX as usize {
            return Err(GraphError::TooManyNodes(n));
        }
        if !ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(GraphError::Invalid("node ids not strictly increasing"));
        }
        if out_offsets.len() != n + 1
            || out_offsets[0] != 0
            || out_offsets[n] != out_targets.len()
            || !out_offsets.windows(2).all(|w| w[0] <= w[1])
        {
            return Err(GraphError::Invalid("malformed offsets"));
        }
        let mut edges = Vec::with_capacity(out_targets.len());
        for u in 0..n {
            let list = &out_targets[out_offsets[u]..out_offsets[u + 1]];
            if !list.windows(2).all(|w| w[0] < w[1]) {
                return Err(GraphError::Invalid(
                    "adjacency not sorted or has duplicates",
                ));
            }
            for &v in list {
                if v as usize >= n {
                    return Err(GraphError::Invalid("edge endpoint out of range"));
                }
                if v as usize == u {
                    return Err(GraphError::Invalid("self-loop"));
                }
                edges.push((u as u32, v));
            }
        }
        Ok(Self::from_index_edges(ids, edges))
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Node ids in index order (ascending).
    pub fn ids(&self) -> &[UserId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> UserId {
        self.ids[index]
    }

    pub fn index_of(&self, user: UserId) -> Option<usize> {
        self.ids.binary_search(&user).ok()
    }

    pub fn contains(&self, user: UserId) -> bool {
        self.index_of(user).is_some()
    }

    pub fn out_offsets(&self) -> &[usize] {
        &self.out_offsets
    }

    pub fn out_targets(&self) -> &[u32] {
        &self.out_targets
    }

    /// Followees of node `index`, sorted.
    pub fn successors(&self, index: usize) -> &[u32] {
        &self.out_targets[self.out_offsets[index]..self.out_offsets[index + 1]]
    }

    /// Followers of node `index`, sorted.
    pub fn predecessors(&self, index: usize) -> &[u32] {
        &self.in_sources[self.in_offsets[index]..self.in_offsets[index + 1]]
    }

    pub fn out_degree(&self, index: usize) -> usize {
        self.out_offsets[index + 1] - self.out_offsets[index]
    }

    pub fn in_degree(&self, index: usize) -> usize {
        self.in_offsets[index + 1] - self.in_offsets[index]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors(from).binary_search(&(to as u32)).is_ok()
    }

    /// All edges as (follower, followee) ids, sorted by follower index then
    /// followee index.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.successors(u)
                .iter()
                .map(move |&v| (self.ids[u], self.ids[v as usize]))
        })
    }

    /// Indices of mutual followers of node `index`, sorted.
    pub fn mutual_indices(&self, index: usize) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_mutual(index, |v| out.push(v));
        out
    }

    pub(crate) fn for_each_mutual(&self, index: usize, mut f: impl FnMut(u32)) {
        let (a, b) = (self.successors(index), self.predecessors(index));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    f(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
    }

    pub(crate) fn mutual_count(&self, index: usize) -> usize {
        let mut n = 0;
        self.for_each_mutual(index, |_| n += 1);
        n
    }

    /// Users `v` with both `user -> v` and `v -> user`, in ascending id order.
    pub fn mutual_followers(&self, user: UserId) -> Result<Vec<UserId>, GraphError> {
        let index = self.index_of(user).ok_or(GraphError::UnknownUser(user))?;
        Ok(self
            .mutual_indices(index)
            .into_iter()
            .map(|v| self.ids[v as usize])
            .collect())
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.node_count();
        let m = self.edge_count();
        let mutual_total: usize = (0..n).map(|u| self.mutual_count(u)).sum();
        let isolated_count = (0..n)
            .filter(|&u| self.in_degree(u) == 0 && self.out_degree(u) == 0)
            .count();
        let avg = m as f64 / n as f64;
        GraphStats {
            node_count: n,
            edge_count: m,
            avg_in_degree: avg,
            avg_out_degree: avg,
            mutual_edge_user_avg: mutual_total as f64 / n as f64,
            isolated_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uid(v: &[u64]) -> Vec<UserId> {
        v.iter().copied().map(UserId).collect()
    }

    fn edges(e: &[(u64, u64)]) -> Vec<(UserId, UserId)> {
        e.iter().map(|&(a, b)| (UserId(a), UserId(b))).collect()
    }

    #[test]
    fn dedup_and_self_loop_removed() {
        let g = SocialGraph::build(&edges(&[(1, 2), (1, 2), (2, 2)]), uid(&[1, 2])).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), edges(&[(1, 2)]));
    }

    #[test]
    fn unlocated_endpoints_pruned() {
        let g = SocialGraph::build(&edges(&[(1, 2), (2, 3)]), uid(&[1, 2])).unwrap();
        assert_eq!(g.node_count(), 2);
        assert!(!g.contains(UserId(3)));
        assert_eq!(g.edges().collect::<Vec<_>>(), edges(&[(1, 2)]));
    }

    #[test]
    fn empty_node_set_rejected() {
        let err = SocialGraph::build(&edges(&[(1, 2)]), uid(&[])).unwrap_err();
        assert_eq!(err, GraphError::EmptyNodeSet);
        assert_eq!(alloc::format!("{err}"), "empty node set");
    }

    #[test]
    fn mutual_followers_examples() {
        let g = SocialGraph::build(&edges(&[(1, 2)]), uid(&[1, 2])).unwrap();
        assert!(g.mutual_followers(UserId(1)).unwrap().is_empty());

        let g = SocialGraph::build(&edges(&[(1, 2), (2, 1), (1, 3)]), uid(&[1, 2, 3])).unwrap();
        assert_eq!(g.mutual_followers(UserId(1)).unwrap(), uid(&[2]));
        assert_eq!(
            g.mutual_followers(UserId(9)).unwrap_err(),
            GraphError::UnknownUser(UserId(9))
        );
    }

    #[test]
    fn stats_examples() {
        let g = SocialGraph::build(&[], uid(&[1, 2, 3, 4, 5])).unwrap();
        let s = g.stats();
        assert_eq!((s.edge_count, s.isolated_count), (0, 5));
        assert_eq!((s.avg_in_degree, s.avg_out_degree), (0.0, 0.0));

        let g = SocialGraph::build(&edges(&[(1, 2), (2, 1)]), uid(&[1, 2])).unwrap();
        let s = g.stats();
        assert_eq!(s.edge_count, 2);
        assert_eq!(s.avg_in_degree, 1.0);
        assert_eq!(s.avg_out_degree, 1.0);
        assert_eq!(s.mutual_edge_user_avg, 1.0);
        assert_eq!(s.isolated_count, 0);
    }

    #[test]
    fn from_csr_rejects_bad_input() {
        let ids = uid(&[1, 2]);
        assert!(SocialGraph::from_csr(ids.clone(), vec![0, 1, 1], vec![1]).is_ok());
        assert!(SocialGraph::from_csr(ids.clone(), vec![0, 1, 1], vec![0]).is_err());
        assert!(SocialGraph::from_csr(ids.clone(), vec![0, 1, 1], vec![5]).is_err());
        assert!(SocialGraph::from_csr(ids.clone(), vec![0, 2, 2], vec![1, 1]).is_err());
        assert!(SocialGraph::from_csr(uid(&[2, 1]), vec![0, 0, 0], vec![]).is_err());
    }
}
