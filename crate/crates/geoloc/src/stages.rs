//! Pipeline stages. Each stage reads only the paths it is given and writes
//! only its declared outputs; the CLI subcommands and `pipeline` both call
//! these functions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geoloc_core::analysis::{analyze_scores, BinParams, KindReport};
use geoloc_core::centrality::{self, CentralityKind, Convergence};
use geoloc_core::estimator::{classify_users, EstimationOutcome};
use geoloc_core::geo::assign_home_locations;
use geoloc_core::synth::{
    celebrity_graph, planted_partition, CelebrityGraphParams, PlantedPartitionParams,
};
use geoloc_core::{CentralityScores, GraphStats, IterationParams, SocialGraph};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{self, ParamsRecord, PartitionSummary, ScoreSidecar};

pub const HOMES_FILE: &str = "homes.tsv";
pub const EDGES_FILE: &str = "edges.tsv";
pub const GRAPH_FILE: &str = "graph.bin";
pub const RESULTS_FILE: &str = "results.tsv";
pub const PARTITION_FILE: &str = "partition.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn scores_file(kind: CentralityKind) -> String {
    format!("{kind}.tsv")
}

pub fn series_file(kind: CentralityKind, series: &str) -> String {
    format!("{kind}_{series}.csv")
}

/// File name without directories, used to keep manifests independent of
/// where a run lives.
pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub file: String,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileRecord {
            file: file_name(path),
            sha256: formats::file_digest(path)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssignSummary {
    pub assigned: usize,
    pub users: usize,
}

pub fn assign_homes(
    posts: &Path,
    regions: &Path,
    min_posts: usize,
    out: &Path,
) -> Result<AssignSummary> {
    let posts = formats::read_posts(posts)?;
    let regions = formats::read_regions(regions)?;
    let homes = assign_home_locations(&posts, &regions, min_posts)?;
    let mut users: Vec<_> = posts.iter().map(|p| p.user).collect();
    users.sort_unstable();
    users.dedup();
    formats::write_homes(out, &homes)?;
    Ok(AssignSummary {
        assigned: homes.len(),
        users: users.len(),
    })
}

pub fn build_graph(edges: &Path, homes: &Path, out: &Path) -> Result<GraphStats> {
    let edges = formats::read_edges(edges)?;
    let homes = formats::read_homes(homes)?;
    let g = SocialGraph::build(&edges, homes.users())?;
    formats::write_graph(out, &g)?;
    Ok(g.stats())
}

fn params_record(p: &IterationParams) -> ParamsRecord {
    ParamsRecord {
        damping: p.damping,
        tolerance: p.tolerance,
        max_iterations: p.max_iterations,
    }
}

/// Writes `<kind>.tsv` and its sidecar for every requested kind. HITS runs
/// once even when both of its vectors are requested.
pub fn centrality(
    graph: &Path,
    kinds: &[CentralityKind],
    params: &IterationParams,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    params.validate()?;
    let (g, digest) = formats::read_graph(graph)?;
    let mut hits_cache: Option<(CentralityScores, CentralityScores, Convergence)> = None;
    let mut written = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let (scores, conv) = match kind {
            CentralityKind::HitsAuthority | CentralityKind::HitsHub => {
                if hits_cache.is_none() {
                    hits_cache = Some(centrality::hits(&g, params)?);
                }
                let (a, h, c) = hits_cache.as_ref().expect("filled above");
                let s = if kind == CentralityKind::HitsAuthority {
                    a
                } else {
                    h
                };
                (s.clone(), *c)
            }
            _ => centrality::compute(&g, kind, params)?,
        };
        let sidecar = ScoreSidecar {
            kind: kind.to_string(),
            params: params_record(params),
            iterations: conv.iterations,
            residual: conv.residual,
            node_count: g.node_count(),
            graph_sha256: digest.clone(),
        };
        let path = out_dir.join(scores_file(kind));
        formats::write_scores(&path, &g, &scores, &sidecar)?;
        written.push(path);
    }
    Ok(written)
}

pub fn estimate(graph: &Path, homes: &Path, out_dir: &Path) -> Result<PartitionSummary> {
    let (g, _) = formats::read_graph(graph)?;
    let homes = formats::read_homes(homes)?;
    let c = classify_users(&g, &homes)?;
    formats::write_results(&out_dir.join(RESULTS_FILE), &c.results)?;
    let summary = PartitionSummary::from(&c.partition);
    formats::write_json(&out_dir.join(PARTITION_FILE), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreInput {
    pub kind: String,
    pub scores: FileRecord,
    pub sidecar: FileRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub kind: String,
    pub series: String,
    pub file: String,
    pub users: u64,
    pub bins: usize,
    pub bias: bool,
}

/// Manifest written by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportManifest {
    pub graph: FileRecord,
    pub homes: FileRecord,
    pub scores: Vec<ScoreInput>,
    pub bins_per_decade: u32,
    pub include_zero_bin: bool,
    pub partition: PartitionSummary,
    pub series: Vec<SeriesRecord>,
}

impl ReportManifest {
    pub fn distribution_count(&self) -> usize {
        self.series.len()
    }

    pub fn bias_count(&self) -> usize {
        self.series.iter().filter(|s| s.bias).count()
    }
}

/// Writes one CSV per (kind, series) plus `manifest.json`. Every scores file
/// must have been computed from this exact graph file.
pub fn analyze(
    graph: &Path,
    homes: &Path,
    scores: &[PathBuf],
    bins: &BinParams,
    out_dir: &Path,
) -> Result<ReportManifest> {
    let (g, digest) = formats::read_graph(graph)?;
    let home_table = formats::read_homes(homes)?;
    let partition = classify_users(&g, &home_table)?.partition;

    let mut inputs = Vec::with_capacity(scores.len());
    let mut reports: BTreeMap<CentralityKind, KindReport> = BTreeMap::new();
    let mut order = Vec::new();
    for path in scores {
        let (values, sidecar) = formats::read_scores(path, &g)?;
        if sidecar.graph_sha256 != digest {
            return Err(Error::DigestMismatch {
                what: path.display().to_string(),
                graph: graph.to_path_buf(),
                expected: sidecar.graph_sha256,
                actual: digest,
            });
        }
        let kind = values.kind;
        if reports.contains_key(&kind) {
            return Err(Error::Usage(format!(
                "scores for {kind} given more than once"
            )));
        }
        reports.insert(kind, analyze_scores(&values, &g, &partition, bins)?);
        order.push(kind);
        inputs.push(ScoreInput {
            kind: kind.to_string(),
            scores: FileRecord::of(path)?,
            sidecar: FileRecord::of(&formats::sidecar_path(path))?,
        });
    }

    let mut series = Vec::new();
    for kind in order {
        let report = &reports[&kind];
        let mut emit = |name: &str, group: Option<usize>| -> Result<()> {
            let file = series_file(kind, name);
            formats::write_bytes(
                &out_dir.join(&file),
                formats::report_csv(report, group).as_bytes(),
            )?;
            let (users, bias) = match group {
                None => (report.overall.total, false),
                Some(i) => (
                    report.groups[i].distribution.total,
                    report.groups[i].bias.is_some(),
                ),
            };
            series.push(SeriesRecord {
                kind: kind.to_string(),
                series: name.to_string(),
                file,
                users,
                bins: report.spec.bin_count(),
                bias,
            });
            Ok(())
        };
        emit("overall", None)?;
        for (i, gs) in report.groups.iter().enumerate() {
            emit(outcome_name(gs.group), Some(i))?;
        }
    }

    let manifest = ReportManifest {
        graph: FileRecord::of(graph)?,
        homes: FileRecord::of(homes)?,
        scores: inputs,
        bins_per_decade: bins.bins_per_decade,
        include_zero_bin: bins.include_zero_bin,
        partition: PartitionSummary::from(&partition),
        series,
    };
    formats::write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn outcome_name(o: EstimationOutcome) -> &'static str {
    o.as_str()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthModel {
    Planted(PlantedPartitionParams),
    Celebrity(CelebrityGraphParams),
}

/// Writes `edges.tsv` and `homes.tsv` for a generated instance.
pub fn synth(model: &SynthModel, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let (g, homes) = match model {
        SynthModel::Planted(p) => planted_partition(p)?,
        SynthModel::Celebrity(p) => celebrity_graph(p)?,
    };
    let edges = out_dir.join(EDGES_FILE);
    let home_path = out_dir.join(HOMES_FILE);
    formats::write_edges(&edges, g.edges())?;
    formats::write_homes(&home_path, &homes)?;
    Ok((edges, home_path))
}
