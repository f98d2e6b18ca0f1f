//! Seeded graph generators with known home locations.
//!
//! # Random stream
//!
//! Every generator draws from [`SeededRng`]: Xoshiro256++ whose 256-bit state
//! is filled by four consecutive SplitMix64 outputs starting from the seed.
//! Two derived draws are used:
//!
//! * `uniform()`: `(next_u64() >> 11) * 2^-53`, a double in `[0, 1)`.
//! * `below(n)`: `(next_u64() as u128 * n) >> 64`, an integer in `[0, n)`.
//!
//! `bernoulli(p)` is `uniform() < p`. The order of draws is part of each
//! generator's contract and is documented on it, so a port that follows it
//! reproduces the same graphs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::geo::HomeLocationTable;
use crate::graph::SocialGraph;
use crate::ids::{CityId, UserId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error("generated graph has no nodes")]
    Empty,
}

pub struct SeededRng(Xoshiro256PlusPlus);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPartitionParams {
    pub communities: usize,
    pub size: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Probability that a drawn edge is made mutual.
    pub reciprocity: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CelebrityGraphParams {
    pub cities: usize,
    pub fans_per_city: usize,
    pub celebrities: usize,
    /// Distinct celebrities each fan follows.
    pub fan_follow_celebs: usize,
    /// Distinct same-city fans each fan befriends mutually.
    pub local_mutual_degree: usize,
    /// Probability a celebrity follows a fan back.
    pub celeb_followback: f64,
    pub seed: u64,
}

fn check_prob(p: f64, what: &'static str) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SynthError::InvalidParam(what))
    }
}

/// `city` followed by the index zero-padded to a common width, so that
/// lexicographic order equals numeric order.
fn city_names(count: usize) -> Vec<CityId> {
    let width = format!("{}", count.saturating_sub(1)).len().max(3);
    (0..count)
        .map(|k| CityId(format!("city{k:0width$}")))
        .collect::<Vec<_>>()
}

fn assemble(
    n: usize,
    edges: Vec<(u32, u32)>,
    city_of: impl Fn(usize) -> usize,
    names: &[CityId],
) -> (SocialGraph, HomeLocationTable) {
    let ids: Vec<UserId> = (0..n as u64).map(UserId).collect();
    let homes = ids
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, names[city_of(i)].clone()))
        .collect();
    (SocialGraph::from_index_edges(ids, edges), homes)
}

/// Communities of equal size, one city each. Users are `0..communities *
/// size`; user `i` lives in community `i / size`.
///
/// For each pair `i < j` in lexicographic order: draw `uniform() < p` with
/// `p = p_in` inside a community and `p_out` across. On success draw
/// `bernoulli(reciprocity)`; if mutual, add both directions, otherwise draw
/// `bernoulli(0.5)` and add `i -> j` when true, `j -> i` when false.
pub fn planted_partition(
    params: &PlantedPartitionParams,
) -> Result<(SocialGraph, HomeLocationTable), SynthError> {
    if params.communities < 2 {
        return Err(SynthError::InvalidParam("communities must be >= 2"));
    }
    if params.size < 2 {
        return Err(SynthError::InvalidParam("size must be >= 2"));
    }
    check_prob(params.p_in, "p_in must lie in [0, 1]")?;
    check_prob(params.p_out, "p_out must lie in [0, 1]")?;
    check_prob(params.reciprocity, "reciprocity must lie in [0, 1]")?;
    if params.p_in < params.p_out {
        return Err(SynthError::InvalidParam("p_in must be >= p_out"));
    }
    let n = params
        .communities
        .checked_mul(params.size)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or(SynthError::InvalidParam("too many nodes"))?;

    let mut rng = SeededRng::new(params.seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if i / params.size == j / params.size {
                params.p_in
            } else {
                params.p_out
            };
            if !rng.bernoulli(p) {
                continue;
            }
            let (a, b) = (i as u32, j as u32);
            if rng.bernoulli(params.reciprocity) {
                edges.push((a, b));
                edges.push((b, a));
            } else if rng.bernoulli(0.5) {
                edges.push((a, b));
            } else {
                edges.push((b, a));
            }
        }
    }
    let names = city_names(params.communities);
    Ok(assemble(n, edges, |i| i / params.size, &names))
}

/// Draws `k` distinct values from `[0, n)` excluding `skip`, in draw order,
/// by rejection.
fn distinct(rng: &mut SeededRng, n: usize, k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let x = rng.below(n);
        if Some(x) != skip && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Fans grouped by city plus celebrities spread round-robin over cities.
///
/// Fans are users `0..cities * fans_per_city` (fan `f` lives in city
/// `f / fans_per_city`); celebrity `k` is user `cities * fans_per_city + k`
/// and lives in city `k % cities`.
///
/// Fans are processed in id order. For each fan: draw
/// `local_mutual_degree` distinct same-city fans (rejection sampling with
/// `below(fans_per_city)`, rejecting itself and repeats) and add a mutual
/// edge to each; then draw `fan_follow_celebs` distinct celebrities the same
/// way with `below(celebrities)`, and for each in draw order add
/// `fan -> celebrity` followed by one `bernoulli(celeb_followback)` deciding
/// the edge back.
pub fn celebrity_graph(
    params: &CelebrityGraphParams,
) -> Result<(SocialGraph, HomeLocationTable), SynthError> {
    check_prob(
        params.celeb_followback,
        "celeb_followback must lie in [0, 1]",
    )?;
    if params.cities == 0 {
        return Err(SynthError::InvalidParam("cities must be >= 1"));
    }
    if params.fan_follow_celebs > params.celebrities {
        return Err(SynthError::InvalidParam(
            "fan_follow_celebs must not exceed celebrities",
        ));
    }
    if params.fans_per_city > 0 && params.local_mutual_degree >= params.fans_per_city {
        return Err(SynthError::InvalidParam(
            "local_mutual_degree must be below fans_per_city",
        ));
    }
    let fans = params
        .cities
        .checked_mul(params.fans_per_city)
        .ok_or(SynthError::InvalidParam("too many nodes"))?;
    let n = fans
        .checked_add(params.celebrities)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or(SynthError::InvalidParam("too many nodes"))?;
    if n == 0 {
        return Err(SynthError::Empty);
    }

    let per_city = params.fans_per_city;
    let mut rng = SeededRng::new(params.seed);
    let mut edges = Vec::new();
    for f in 0..fans {
        let base = f / per_city * per_city;
        for other in distinct(
            &mut rng,
            per_city,
            params.local_mutual_degree,
            Some(f - base),
        ) {
            let o = (base + other) as u32;
            edges.push((f as u32, o));
            edges.push((o, f as u32));
        }
        for k in distinct(&mut rng, params.celebrities, params.fan_follow_celebs, None) {
            let c = (fans + k) as u32;
            edges.push((f as u32, c));
            if rng.bernoulli(params.celeb_followback) {
                edges.push((c, f as u32));
            }
        }
    }
    let names = city_names(params.cities);
    let cities = params.cities;
    Ok(assemble(
        n,
        edges,
        |i| {
            if i < fans {
                i / per_city
            } else {
                (i - fans) % cities
            }
        },
        &names,
    ))
}

/// Celebrity user ids of a graph generated with `params`.
pub fn celebrity_ids(params: &CelebrityGraphParams) -> impl Iterator<Item = UserId> {
    let fans = (params.cities * params.fans_per_city) as u64;
    (fans..fans + params.celebrities as u64).map(UserId)
}

/// Name of the `k`-th city among `count` generated cities.
pub fn city_name(k: usize, count: usize) -> String {
    city_names(count).swap_remove(k).0
}
