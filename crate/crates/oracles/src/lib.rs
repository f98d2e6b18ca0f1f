//! Reference implementations for tests. Nothing here depends on
//! `geoloc-core`; inputs and outputs use plain integers, strings and floats.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed graph on `0..n`: each ordered pair `(a, b)` with `a < b`
/// is linked with probability `p`; a link is mutual with probability
/// `reciprocity`, otherwise it gets a random direction. Self-loops and
/// duplicates are sprinkled in to exercise cleanup.
pub fn random_edges(rng: &mut ChaCha8Rng, n: u64, p: f64, reciprocity: f64) -> Vec<(u64, u64)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() >= p {
                continue;
            }
            if rng.random::<f64>() < reciprocity {
                edges.push((a, b));
                edges.push((b, a));
            } else if rng.random::<bool>() {
                edges.push((a, b));
            } else {
                edges.push((b, a));
            }
        }
    }
    if n > 0 {
        for _ in 0..3 {
            let a = rng.random_range(0..n);
            edges.push((a, a));
        }
        if let Some(&e) = edges.first() {
            edges.push(e);
        }
    }
    edges
}

/// Distinct edges without self-loops, restricted to `nodes`.
pub fn clean_edges(edges: &[(u64, u64)], nodes: &BTreeSet<u64>) -> BTreeSet<(u64, u64)> {
    edges
        .iter()
        .copied()
        .filter(|(a, b)| a != b && nodes.contains(a) && nodes.contains(b))
        .collect()
}

/// `{ v : u -> v and v -> u }` by scanning the edge set.
pub fn brute_mutual(edges: &BTreeSet<(u64, u64)>, u: u64) -> BTreeSet<u64> {
    edges
        .iter()
        .filter(|&&(a, b)| a == u && edges.contains(&(b, a)))
        .map(|&(_, b)| b)
        .collect()
}

/// Per-user (predicted, outcome) by histogramming friends' homes. The
/// prediction is the most frequent friend home, smallest name on ties.
pub fn brute_classify(
    edges: &BTreeSet<(u64, u64)>,
    homes: &BTreeMap<u64, String>,
) -> BTreeMap<u64, (Option<String>, &'static str)> {
    let set: HashSet<(u64, u64)> = edges.iter().copied().collect();
    homes
        .iter()
        .map(|(&u, truth)| {
            let mut hist: HashMap<&String, usize> = HashMap::new();
            for &(a, b) in edges {
                if a == u && set.contains(&(b, a)) {
                    if let Some(c) = homes.get(&b) {
                        *hist.entry(c).or_default() += 1;
                    }
                }
            }
            let top = hist.values().copied().max();
            let predicted = top.and_then(|m| {
                hist.iter()
                    .filter(|(_, &n)| n == m)
                    .map(|(c, _)| (*c).clone())
                    .min()
            });
            let outcome = match &predicted {
                None => "unknown",
                Some(p) if p == truth => "easy",
                Some(_) => "hard",
            };
            (u, (predicted, outcome))
        })
        .collect()
}

/// PageRank by solving `(I - d (P^T + (1/n) 1 z^T)) x = (1 - d)/n 1`, where
/// `P` is the row-stochastic transition matrix (zero rows for dangling nodes)
/// and `z` marks dangling nodes. Nodes are `0..n`.
pub fn dense_pagerank(n: usize, edges: &BTreeSet<(u64, u64)>, damping: f64) -> Vec<f64> {
    let mut out_deg = vec![0usize; n];
    for &(a, _) in edges {
        out_deg[a as usize] += 1;
    }
    let nf = n as f64;
    let mut m = DMatrix::<f64>::identity(n, n);
    for &(a, b) in edges {
        m[(b as usize, a as usize)] -= damping / out_deg[a as usize] as f64;
    }
    for (j, &deg) in out_deg.iter().enumerate() {
        if deg == 0 {
            for i in 0..n {
                m[(i, j)] -= damping / nf;
            }
        }
    }
    let rhs = DVector::from_element(n, (1.0 - damping) / nf);
    let x = m.lu().solve(&rhs).expect("PageRank system is non-singular");
    x.iter().copied().collect()
}

fn adjacency(n: usize, edges: &BTreeSet<(u64, u64)>) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in edges {
        a[(u as usize, v as usize)] = 1.0;
    }
    a
}

/// HITS authority and hub as the limit of the power iteration started from a
/// uniform hub vector: the projection of `A^T 1` onto the dominant
/// eigenspace of `A^T A` (found with a dense symmetric eigensolver),
/// L1-normalised. Hub is `A auth`, L1-normalised.
pub fn dense_hits(n: usize, edges: &BTreeSet<(u64, u64)>) -> (Vec<f64>, Vec<f64>) {
    let a = adjacency(n, edges);
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let start = a.transpose() * DVector::from_element(n, 1.0);
    let mut proj = DVector::<f64>::zeros(n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda >= top * (1.0 - 1e-10) {
            let v = eig.eigenvectors.column(i);
            proj += v * v.dot(&start);
        }
    }
    let auth = l1(proj.iter().map(|x| x.abs().max(0.0)).collect());
    let hub_raw = &a * DVector::from_vec(auth.clone());
    (auth, l1(hub_raw.iter().copied().collect()))
}

/// Ratio of the second to the first distinct eigenvalue of `A^T A`; the HITS
/// error shrinks by this factor every iteration.
pub fn hits_gap_ratio(n: usize, edges: &BTreeSet<(u64, u64)>) -> f64 {
    let a = adjacency(n, edges);
    let mut ev: Vec<f64> = (a.transpose() * &a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let top = ev[0];
    ev.iter()
        .copied()
        .find(|&l| l < top * (1.0 - 1e-10))
        .map_or(0.0, |l| l / top)
}

fn l1(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Winding number of a closed ring (first vertex repeated last) around a
/// point, using signed crossings of the upward/downward edges. Non-zero means
/// inside. Vertices are `(x, y)`.
pub fn winding_number(ring: &[(f64, f64)], p: (f64, f64)) -> i32 {
    let mut wn = 0;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
        if a.1 <= p.1 {
            if b.1 > p.1 && cross > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Distance from `p` to the nearest edge of a closed ring.
pub fn distance_to_ring(ring: &[(f64, f64)], p: (f64, f64)) -> f64 {
    ring.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
            };
            let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
            ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Random simple (star-shaped) polygon around `center`: vertices at sorted
/// random angles and random radii. Returned closed.
pub fn random_star_polygon(
    rng: &mut ChaCha8Rng,
    center: (f64, f64),
    r_min: f64,
    r_max: f64,
    vertices: usize,
) -> Vec<(f64, f64)> {
    let mut angles: Vec<f64> = (0..vertices)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup();
    let mut ring: Vec<(f64, f64)> = angles
        .iter()
        .map(|&t| {
            let r = rng.random_range(r_min..r_max);
            (center.0 + r * t.cos(), center.1 + r * t.sin())
        })
        .collect();
    ring.push(ring[0]);
    ring
}

/// Counts per half-open interval `[edges[i], edges[i+1])` by linear scan,
/// with an optional leading bin for exact zeros. `None` if any score fits
/// nowhere.
pub fn linear_scan_histogram(scores: &[f64], edges: &[f64], zero_bin: bool) -> Option<Vec<u64>> {
    let offset = usize::from(zero_bin);
    let mut counts = vec![0u64; edges.len() - 1 + offset];
    'scores: for &s in scores {
        if zero_bin && s == 0.0 {
            counts[0] += 1;
            continue;
        }
        for i in 0..edges.len() - 1 {
            if edges[i] <= s && s < edges[i + 1] {
                counts[i + offset] += 1;
                continue 'scores;
            }
        }
        return None;
    }
    Some(counts)
}

/// Home assignment by per-user histogram: `posts` are (user, city or None);
/// the modal city (smallest name on ties) wins if its count is at least
/// `min_posts`.
pub fn brute_homes(posts: &[(u64, Option<String>)], min_posts: usize) -> BTreeMap<u64, String> {
    let mut per_user: HashMap<u64, HashMap<String, usize>> = HashMap::new();
    for (u, c) in posts {
        if let Some(c) = c {
            *per_user
                .entry(*u)
                .or_default()
                .entry(c.clone())
                .or_default() += 1;
        }
    }
    per_user
        .into_iter()
        .filter_map(|(u, hist)| {
            let m = *hist.values().max()?;
            let city = hist.iter().filter(|(_, &n)| n == m).map(|(c, _)| c).min()?;
            (m >= min_posts).then(|| (u, city.clone()))
        })
        .collect()
}
