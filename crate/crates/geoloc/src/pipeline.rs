//! End-to-end run driven by a TOML config.
//!
//! ```toml
//! seed = 42
//! workdir = "run"            # optional; --workdir / GEOLOC_WORKDIR win
//!
//! [input]                    # either real inputs...
//! posts = "posts.tsv"
//! regions = "regions.geojson"
//! edges = "edges.tsv"
//!
//! [synth]                    # ...or a generated instance
//! model = "celebrity"
//! cities = 5
//! # ...
//!
//! [geo]
//! min_posts = 6
//!
//! [centrality]
//! damping = 0.85
//! tolerance = 1e-9
//! max_iterations = 1000
//! kinds = ["pagerank", "hits_authority"]
//!
//! [bins]
//! bins_per_decade = 5
//! ```
//!
//! Relative input paths are resolved against the config file's directory.
//! Outputs land in the workdir under fixed names; `manifest.json` there lists
//! every output with its digest and contains no timestamps, so identical
//! configs give byte-identical workdirs.

use std::path::{Path, PathBuf};

use geoloc_core::analysis::BinParams;
use geoloc_core::synth::{CelebrityGraphParams, PlantedPartitionParams};
use geoloc_core::{CentralityKind, IterationParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{self, PartitionSummary};
use crate::stages::{self, FileRecord, SynthModel};

pub const REPORT_DIR: &str = "report";
pub const SCORES_DIR: &str = "scores";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workdir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
    #[serde(default)]
    pub geo: GeoConfig,
    #[serde(default)]
    pub centrality: CentralityConfig,
    #[serde(default)]
    pub bins: BinsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub posts: PathBuf,
    pub regions: PathBuf,
    pub edges: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthConfig {
    Planted {
        communities: usize,
        size: usize,
        p_in: f64,
        p_out: f64,
        reciprocity: f64,
    },
    Celebrity {
        cities: usize,
        fans_per_city: usize,
        celebrities: usize,
        fan_follow_celebs: usize,
        local_mutual_degree: usize,
        celeb_followback: f64,
    },
}

impl SynthConfig {
    pub fn model(&self, seed: u64) -> SynthModel {
        match *self {
            SynthConfig::Planted {
                communities,
                size,
                p_in,
                p_out,
                reciprocity,
            } => SynthModel::Planted(PlantedPartitionParams {
                communities,
                size,
                p_in,
                p_out,
                reciprocity,
                seed,
            }),
            SynthConfig::Celebrity {
                cities,
                fans_per_city,
                celebrities,
                fan_follow_celebs,
                local_mutual_degree,
                celeb_followback,
            } => SynthModel::Celebrity(CelebrityGraphParams {
                cities,
                fans_per_city,
                celebrities,
                fan_follow_celebs,
                local_mutual_degree,
                celeb_followback,
                seed,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoConfig {
    #[serde(default = "default_min_posts")]
    pub min_posts: usize,
}

fn default_min_posts() -> usize {
    6
}

impl Default for GeoConfig {
    fn default() -> Self {
        GeoConfig {
            min_posts: default_min_posts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CentralityConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub kinds: Vec<String>,
}

impl Default for CentralityConfig {
    fn default() -> Self {
        let p = IterationParams::default();
        CentralityConfig {
            damping: p.damping,
            tolerance: p.tolerance,
            max_iterations: p.max_iterations,
            kinds: CentralityKind::ALL.iter().map(|k| k.to_string()).collect(),
        }
    }
}

impl CentralityConfig {
    pub fn params(&self) -> IterationParams {
        IterationParams {
            damping: self.damping,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }

    pub fn kinds(&self) -> Result<Vec<CentralityKind>> {
        let mut out: Vec<CentralityKind> = Vec::with_capacity(self.kinds.len());
        for k in &self.kinds {
            let kind: CentralityKind = k.parse().map_err(|e| Error::Usage(format!("{e}")))?;
            if out.contains(&kind) {
                return Err(Error::Usage(format!("centrality kind {kind} listed twice")));
            }
            out.push(kind);
        }
        if out.is_empty() {
            return Err(Error::Usage("no centrality kinds requested".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinsConfig {
    #[serde(default = "default_bpd")]
    pub bins_per_decade: u32,
}

fn default_bpd() -> u32 {
    BinParams::default().bins_per_decade
}

impl Default for BinsConfig {
    fn default() -> Self {
        BinsConfig {
            bins_per_decade: default_bpd(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        match (&cfg.input, &cfg.synth) {
            (Some(_), Some(_)) => Err("config has both [input] and [synth]".into()),
            (None, None) => Err("config needs either [input] or [synth]".into()),
            _ => Ok(cfg),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = formats::read_bytes(path)?;
        let text = String::from_utf8(bytes).map_err(|e| Error::format(path, e.to_string()))?;
        let mut cfg = Self::from_toml(&text).map_err(|m| Error::format(path, m))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(input) = cfg.input.as_mut() {
            for p in [&mut input.posts, &mut input.regions, &mut input.edges] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if let Some(w) = cfg.workdir.as_mut().filter(|w| w.is_relative()) {
            *w = base.join(&*w);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub outputs: Vec<FileRecord>,
}

/// `manifest.json` at the top of a pipeline workdir. Paths are relative to
/// the workdir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub inputs: Vec<FileRecord>,
    pub min_posts: usize,
    pub centrality: CentralityConfig,
    pub bins_per_decade: u32,
    pub partition: PartitionSummary,
    pub stages: Vec<StageRecord>,
}

fn record(workdir: &Path, rel: &str) -> Result<FileRecord> {
    Ok(FileRecord {
        file: rel.to_string(),
        sha256: formats::file_digest(&workdir.join(rel))?,
    })
}

fn stage_record(workdir: &Path, stage: &str, files: &[String]) -> Result<StageRecord> {
    Ok(StageRecord {
        stage: stage.to_string(),
        outputs: files
            .iter()
            .map(|f| record(workdir, f))
            .collect::<Result<_>>()?,
    })
}

/// Runs every stage in order inside `workdir`.
pub fn run(cfg: &PipelineConfig, workdir: &Path) -> Result<RunManifest> {
    let kinds = cfg.centrality.kinds()?;
    let params = cfg.centrality.params();
    params.validate()?;
    let bins = BinParams {
        bins_per_decade: cfg.bins.bins_per_decade,
        ..BinParams::default()
    };
    if bins.bins_per_decade == 0 {
        return Err(Error::Usage("bins_per_decade must be positive".into()));
    }

    let mut stages = Vec::new();
    let mut inputs = Vec::new();
    let homes = workdir.join(stages::HOMES_FILE);
    let edges = match (&cfg.input, &cfg.synth) {
        (Some(input), _) => {
            for p in [&input.posts, &input.regions, &input.edges] {
                inputs.push(FileRecord::of(p)?);
            }
            stages::assign_homes(&input.posts, &input.regions, cfg.geo.min_posts, &homes)
                .map_err(|e| e.in_stage("assign-homes"))?;
            stages.push(stage_record(
                workdir,
                "assign-homes",
                &[stages::HOMES_FILE.into()],
            )?);
            input.edges.clone()
        }
        (None, Some(synth)) => {
            let (edges, _) =
                stages::synth(&synth.model(cfg.seed), workdir).map_err(|e| e.in_stage("synth"))?;
            stages.push(stage_record(
                workdir,
                "synth",
                &[stages::EDGES_FILE.into(), stages::HOMES_FILE.into()],
            )?);
            edges
        }
        (None, None) => return Err(Error::Usage("config needs [input] or [synth]".into())),
    };

    let graph = workdir.join(stages::GRAPH_FILE);
    stages::build_graph(&edges, &homes, &graph).map_err(|e| e.in_stage("build-graph"))?;
    stages.push(stage_record(
        workdir,
        "build-graph",
        &[stages::GRAPH_FILE.into()],
    )?);

    let scores_dir = workdir.join(SCORES_DIR);
    let scores = stages::centrality(&graph, &kinds, &params, &scores_dir)
        .map_err(|e| e.in_stage("centrality"))?;
    let mut files = Vec::new();
    for k in &kinds {
        let tsv = format!("{SCORES_DIR}/{}", stages::scores_file(*k));
        let json = formats::sidecar_path(Path::new(&tsv)).display().to_string();
        files.extend([tsv, json]);
    }
    stages.push(stage_record(workdir, "centrality", &files)?);

    let partition =
        stages::estimate(&graph, &homes, workdir).map_err(|e| e.in_stage("estimate"))?;
    stages.push(stage_record(
        workdir,
        "estimate",
        &[stages::RESULTS_FILE.into(), stages::PARTITION_FILE.into()],
    )?);

    let report_dir = workdir.join(REPORT_DIR);
    let report = stages::analyze(&graph, &homes, &scores, &bins, &report_dir)
        .map_err(|e| e.in_stage("analyze"))?;
    let mut files: Vec<String> = report
        .series
        .iter()
        .map(|s| format!("{REPORT_DIR}/{}", s.file))
        .collect();
    files.push(format!("{REPORT_DIR}/{}", stages::MANIFEST_FILE));
    stages.push(stage_record(workdir, "analyze", &files)?);

    let manifest = RunManifest {
        seed: cfg.seed,
        inputs,
        min_posts: cfg.geo.min_posts,
        centrality: CentralityConfig {
            kinds: kinds.iter().map(|k| k.to_string()).collect(),
            ..cfg.centrality.clone()
        },
        bins_per_decade: bins.bins_per_decade,
        partition,
        stages,
    };
    formats::write_json(&workdir.join(stages::MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
