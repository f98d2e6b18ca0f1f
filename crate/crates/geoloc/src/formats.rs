//! Text, JSON and binary file formats.
//!
//! | file          | layout                                                     |
//! |---------------|------------------------------------------------------------|
//! | edge list     | `follower<TAB>followee` per line, `#` comments             |
//! | posts         | `user_id<TAB>lat<TAB>lon` per line                         |
//! | regions       | GeoJSON FeatureCollection of Polygon / MultiPolygon        |
//! |               | features with a string `city_id` property                  |
//! | home table    | `user_id<TAB>city_id` per line                             |
//! | scores        | `user_id<TAB>score` per line + `.json` sidecar             |
//! | results       | `user_id<TAB>truth<TAB>predicted or -<TAB>outcome`         |
//! | partition     | JSON `{easy, hard, unknown, total}`                        |
//! | report series | CSV `bin_lower,bin_upper,count,fraction,bias_or_NA`        |
//!
//! Blank lines and lines starting with `#` are skipped in every text input.
//! Floats are written as the shortest decimal that parses back to the same
//! `f64`.
//!
//! # Graph file
//!
//! Little-endian binary:
//!
//! ```text
//! magic    8 bytes   b"GEOLOCG\0"
//! version  u32       1
//! n        u64       node count
//! m        u64       edge count
//! ids      n x u64   user ids, strictly increasing
//! offsets  (n+1) x u64  CSR row offsets into targets
//! targets  m x u32   followee indices, sorted within each row
//! ```
//!
//! Encoding a decoded graph reproduces the input bytes exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use geoloc_core::analysis::KindReport;
use geoloc_core::estimator::{EstimationResult, GroupPartition};
use geoloc_core::geo::{GeoPost, Region, RegionSet};
use geoloc_core::{BiasValue, CentralityKind, CentralityScores, CityId, HomeLocationTable};
use geoloc_core::{SocialGraph, UserId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const GRAPH_MAGIC: &[u8; 8] = b"GEOLOCG\0";
pub const GRAPH_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&read_bytes(path)?))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Non-comment lines as (1-based line number, fields split on tabs).
fn records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((i + 1, trimmed.split('\t').map(str::to_owned).collect()));
    }
    Ok(out)
}

fn expect_fields(path: &Path, line: usize, fields: &[String], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::parse(
            path,
            line,
            format!("expected {n} tab-separated fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn parse_user(path: &Path, line: usize, s: &str) -> Result<UserId> {
    s.trim()
        .parse::<u64>()
        .map(UserId)
        .map_err(|_| Error::parse(path, line, format!("invalid user id {s:?}")))
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("invalid number {s:?}")))
}

pub fn read_edges(path: &Path) -> Result<Vec<(UserId, UserId)>> {
    records(path)?
        .into_iter()
        .map(|(line, f)| {
            expect_fields(path, line, &f, 2)?;
            Ok((
                parse_user(path, line, &f[0])?,
                parse_user(path, line, &f[1])?,
            ))
        })
        .collect()
}

pub fn write_edges(path: &Path, edges: impl Iterator<Item = (UserId, UserId)>) -> Result<()> {
    let mut s = String::new();
    for (a, b) in edges {
        let _ = writeln!(s, "{a}\t{b}");
    }
    write_bytes(path, s.as_bytes())
}

pub fn read_posts(path: &Path) -> Result<Vec<GeoPost>> {
    records(path)?
        .into_iter()
        .map(|(line, f)| {
            expect_fields(path, line, &f, 3)?;
            let user = parse_user(path, line, &f[0])?;
            let lat = parse_f64(path, line, &f[1])?;
            let lon = parse_f64(path, line, &f[2])?;
            GeoPost::new(user, lat, lon).map_err(|e| Error::parse(path, line, e.to_string()))
        })
        .collect()
}

pub fn read_homes(path: &Path) -> Result<HomeLocationTable> {
    let mut table = HomeLocationTable::new();
    for (line, f) in records(path)? {
        expect_fields(path, line, &f, 2)?;
        let user = parse_user(path, line, &f[0])?;
        let city = f[1].trim();
        if city.is_empty() {
            return Err(Error::parse(path, line, "empty city id"));
        }
        if table.insert(user, CityId::from(city)).is_some() {
            return Err(Error::parse(path, line, format!("duplicate user {user}")));
        }
    }
    Ok(table)
}

pub fn write_homes(path: &Path, homes: &HomeLocationTable) -> Result<()> {
    let mut s = String::new();
    for (u, c) in homes.iter() {
        let _ = writeln!(s, "{u}\t{c}");
    }
    write_bytes(path, s.as_bytes())
}

/// Reads the GeoJSON region subset. GeoJSON positions are `[lon, lat]`.
pub fn read_regions(path: &Path) -> Result<RegionSet> {
    let bytes = read_bytes(path)?;
    let doc: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))?;
    parse_regions(&doc).map_err(|m| Error::format(path, m))
}

fn parse_regions(doc: &serde_json::Value) -> std::result::Result<RegionSet, String> {
    if doc.get("type").and_then(|t| t.as_str()) != Some("FeatureCollection") {
        return Err("top-level object must be a FeatureCollection".into());
    }
    let features = doc
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or("FeatureCollection without a features array")?;
    let mut regions = Vec::with_capacity(features.len());
    for (i, feat) in features.iter().enumerate() {
        let city = feat
            .pointer("/properties/city_id")
            .and_then(|c| c.as_str())
            .ok_or_else(|| format!("feature {i}: missing string property city_id"))?;
        let geom = feat
            .get("geometry")
            .ok_or_else(|| format!("feature {i}: missing geometry"))?;
        let coords = geom
            .get("coordinates")
            .ok_or_else(|| format!("feature {i}: geometry without coordinates"))?;
        let polygons = match geom.get("type").and_then(|t| t.as_str()) {
            Some("Polygon") => vec![coords],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| format!("feature {i}: MultiPolygon coordinates must be an array"))?
                .iter()
                .collect(),
            other => {
                return Err(format!(
                    "feature {i}: unsupported geometry type {other:?}, expected Polygon or MultiPolygon"
                ))
            }
        };
        let mut rings = Vec::new();
        for poly in polygons {
            for ring in poly
                .as_array()
                .ok_or_else(|| format!("feature {i}: polygon must be an array of rings"))?
            {
                rings.push(parse_ring(ring).map_err(|m| format!("feature {i}: {m}"))?);
            }
        }
        regions.push(Region::new(CityId::from(city), rings).map_err(|e| e.to_string())?);
    }
    RegionSet::new(regions).map_err(|e| e.to_string())
}

fn parse_ring(ring: &serde_json::Value) -> std::result::Result<Vec<(f64, f64)>, String> {
    ring.as_array()
        .ok_or("ring must be an array of positions")?
        .iter()
        .map(|pos| {
            let p = pos
                .as_array()
                .filter(|p| p.len() >= 2)
                .ok_or("position must be [lon, lat]")?;
            let lon = p[0].as_f64().ok_or("non-numeric longitude")?;
            let lat = p[1].as_f64().ok_or("non-numeric latitude")?;
            Ok((lat, lon))
        })
        .collect()
}

pub fn encode_graph(g: &SocialGraph) -> Vec<u8> {
    let n = g.node_count();
    let m = g.edge_count();
    let mut out = Vec::with_capacity(28 + 8 * n + 8 * (n + 1) + 4 * m);
    out.extend_from_slice(GRAPH_MAGIC);
    out.extend_from_slice(&GRAPH_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    for id in g.ids() {
        out.extend_from_slice(&id.0.to_le_bytes());
    }
    for &o in g.out_offsets() {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &t in g.out_targets() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or("truncated graph file")?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn count(&mut self) -> std::result::Result<usize, String> {
        let v = self.u64()?;
        // Each counted item needs at least 4 more bytes.
        if v > (self.bytes.len() / 4) as u64 {
            return Err("count exceeds file size".into());
        }
        Ok(v as usize)
    }
}

pub fn decode_graph(bytes: &[u8]) -> std::result::Result<SocialGraph, String> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != GRAPH_MAGIC {
        return Err("not a graph file (bad magic)".into());
    }
    let version = c.u32()?;
    if version != GRAPH_VERSION {
        return Err(format!("unsupported graph file version {version}"));
    }
    let n = c.count()?;
    let m = c.count()?;
    let ids = (0..n)
        .map(|_| c.u64().map(UserId))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let offsets = (0..=n)
        .map(|_| c.u64().map(|o| o as usize))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let targets = (0..m)
        .map(|_| c.u32())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if c.pos != bytes.len() {
        return Err("trailing bytes after graph data".into());
    }
    SocialGraph::from_csr(ids, offsets, targets).map_err(|e| e.to_string())
}

pub fn write_graph(path: &Path, g: &SocialGraph) -> Result<()> {
    write_bytes(path, &encode_graph(g))
}

/// Graph plus the SHA-256 of the file it was read from.
pub fn read_graph(path: &Path) -> Result<(SocialGraph, String)> {
    let bytes = read_bytes(path)?;
    let g = decode_graph(&bytes).map_err(|m| Error::format(path, m))?;
    Ok((g, sha256_hex(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

/// JSON sidecar written next to every scores file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSidecar {
    pub kind: String,
    pub params: ParamsRecord,
    pub iterations: usize,
    pub residual: f64,
    pub node_count: usize,
    pub graph_sha256: String,
}

pub fn sidecar_path(scores: &Path) -> PathBuf {
    scores.with_extension("json")
}

pub fn write_scores(
    path: &Path,
    g: &SocialGraph,
    scores: &CentralityScores,
    sidecar: &ScoreSidecar,
) -> Result<()> {
    let mut s = String::new();
    for (id, &v) in g.ids().iter().zip(&scores.values) {
        let _ = writeln!(s, "{id}\t{}", fmt_f64(v));
    }
    write_bytes(path, s.as_bytes())?;
    write_json(&sidecar_path(path), sidecar)
}

/// Reads a scores file and its sidecar, aligning values with `g`. Every node
/// must appear exactly once.
pub fn read_scores(path: &Path, g: &SocialGraph) -> Result<(CentralityScores, ScoreSidecar)> {
    let side_path = sidecar_path(path);
    let sidecar: ScoreSidecar = serde_json::from_slice(&read_bytes(&side_path)?)
        .map_err(|e| Error::format(&side_path, e.to_string()))?;
    let kind: CentralityKind =
        sidecar
            .kind
            .parse()
            .map_err(|e: geoloc_core::centrality::UnknownKind| {
                Error::format(&side_path, e.to_string())
            })?;
    let mut values = vec![f64::NAN; g.node_count()];
    let mut seen = vec![false; g.node_count()];
    for (line, f) in records(path)? {
        expect_fields(path, line, &f, 2)?;
        let user = parse_user(path, line, &f[0])?;
        let score = parse_f64(path, line, &f[1])?;
        let i = g
            .index_of(user)
            .ok_or_else(|| Error::parse(path, line, format!("user {user} is not in the graph")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::parse(path, line, format!("duplicate user {user}")));
        }
        values[i] = score;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::format(
            path,
            format!("no score for user {}", g.id(i)),
        ));
    }
    Ok((CentralityScores { kind, values }, sidecar))
}

pub fn write_results(path: &Path, results: &[EstimationResult]) -> Result<()> {
    let mut s = String::new();
    for r in results {
        let predicted = r.predicted.as_ref().map_or("-", |c| c.as_str());
        let _ = writeln!(s, "{}\t{}\t{}\t{}", r.user, r.truth, predicted, r.outcome);
    }
    write_bytes(path, s.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub easy: usize,
    pub hard: usize,
    pub unknown: usize,
    pub total: usize,
}

impl From<&GroupPartition> for PartitionSummary {
    fn from(p: &GroupPartition) -> Self {
        PartitionSummary {
            easy: p.easy.len(),
            hard: p.hard.len(),
            unknown: p.unknown.len(),
            total: p.total(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_slice(&read_bytes(path)?).map_err(|e| Error::format(path, e.to_string()))
}

pub const REPORT_HEADER: &str = "bin_lower,bin_upper,count,fraction,bias_or_NA";

/// CSV series for the overall population (`group = None`) or one group.
pub fn report_csv(report: &KindReport, group: Option<usize>) -> String {
    let (dist, bias) = match group {
        None => (&report.overall, None),
        Some(g) => (
            &report.groups[g].distribution,
            report.groups[g].bias.as_ref(),
        ),
    };
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for i in 0..report.spec.bin_count() {
        let (lo, hi) = report.spec.bounds(i);
        let b = match bias.map(|b| b.values[i]) {
            Some(BiasValue::Defined(v)) => fmt_f64(v),
            _ => "NA".to_string(),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(lo),
            fmt_f64(hi),
            dist.counts[i],
            fmt_f64(dist.fraction(i)),
            b
        );
    }
    s
}
