//! Command-line interface. Exit codes: 0 success, 1 usage, 2 data or
//! validation error, 3 numeric non-convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use geoloc_core::analysis::BinParams;
use geoloc_core::synth::{CelebrityGraphParams, PlantedPartitionParams};
use geoloc_core::{CentralityKind, IterationParams};

use crate::error::{Error, Result};
use crate::pipeline::{self, PipelineConfig};
use crate::stages::{self, SynthModel};

#[derive(Debug, Parser)]
#[command(
    name = "geoloc",
    version,
    about = "Friend-based location estimation and centrality analysis"
)]
pub struct Cli {
    /// Directory for default output paths.
    #[arg(long, global = true, env = "GEOLOC_WORKDIR")]
    pub workdir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assign home cities from geotagged posts.
    AssignHomes {
        #[arg(long)]
        posts: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        #[arg(long, default_value_t = 6)]
        min_posts: usize,
        /// Defaults to <workdir>/homes.tsv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the binary graph over users with a home city.
    BuildGraph {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        homes: PathBuf,
        /// Defaults to <workdir>/graph.bin.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute centrality scores.
    Centrality {
        #[arg(long)]
        graph: PathBuf,
        /// Repeatable; defaults to every kind.
        #[arg(long = "kind")]
        kinds: Vec<CentralityKind>,
        #[command(flatten)]
        params: ParamArgs,
        /// Defaults to <workdir>/scores.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Classify users as easy, hard or unknown.
    Estimate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        homes: PathBuf,
        /// Defaults to <workdir>.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Per-group score distributions and bias series.
    Analyze {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        homes: PathBuf,
        /// Scores file written by `centrality`; repeatable.
        #[arg(long, required = true)]
        scores: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        bins_per_decade: u32,
        /// Defaults to <workdir>/report.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate a synthetic edge list and home table.
    Synth {
        #[command(subcommand)]
        model: SynthCommand,
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
        /// Defaults to <workdir>.
        #[arg(long, global = true)]
        out_dir: Option<PathBuf>,
    },
    /// Run every stage from a TOML config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    Planted {
        #[arg(long)]
        communities: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        p_in: f64,
        #[arg(long)]
        p_out: f64,
        #[arg(long, default_value_t = 1.0)]
        reciprocity: f64,
    },
    Celebrity {
        #[arg(long)]
        cities: usize,
        #[arg(long)]
        fans_per_city: usize,
        #[arg(long)]
        celebrities: usize,
        #[arg(long)]
        fan_follow_celebs: usize,
        #[arg(long)]
        local_mutual_degree: usize,
        #[arg(long)]
        celeb_followback: f64,
    },
}

impl SynthCommand {
    fn model(&self, seed: u64) -> SynthModel {
        match *self {
            SynthCommand::Planted {
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
            SynthCommand::Celebrity {
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

fn under(workdir: &Path, given: &Option<PathBuf>, default: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| workdir.join(default))
}

/// Runs a parsed command, writing progress lines to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let workdir = cli.workdir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut say = |line: String| {
        let _ = writeln!(out, "{line}");
    };
    match &cli.command {
        Command::AssignHomes {
            posts,
            regions,
            min_posts,
            out,
        } => {
            let out = under(&workdir, out, stages::HOMES_FILE);
            let s = stages::assign_homes(posts, regions, *min_posts, &out)?;
            say(format!(
                "assigned {} of {} users -> {}",
                s.assigned,
                s.users,
                out.display()
            ));
        }
        Command::BuildGraph { edges, homes, out } => {
            let out = under(&workdir, out, stages::GRAPH_FILE);
            let s = stages::build_graph(edges, homes, &out)?;
            say(format!(
                "nodes {} edges {} avg_in {} avg_out {} avg_mutual {} isolated {} -> {}",
                s.node_count,
                s.edge_count,
                s.avg_in_degree,
                s.avg_out_degree,
                s.mutual_edge_user_avg,
                s.isolated_count,
                out.display()
            ));
        }
        Command::Centrality {
            graph,
            kinds,
            params,
            out_dir,
        } => {
            let out_dir = under(&workdir, out_dir, pipeline::SCORES_DIR);
            let mut kinds = kinds.clone();
            if kinds.is_empty() {
                kinds = CentralityKind::ALL.to_vec();
            }
            let mut seen = Vec::new();
            kinds.retain(|k| {
                let fresh = !seen.contains(k);
                seen.push(*k);
                fresh
            });
            let params = IterationParams {
                damping: params.damping,
                tolerance: params.tolerance,
                max_iterations: params.max_iterations,
            };
            for p in stages::centrality(graph, &kinds, &params, &out_dir)? {
                say(format!("wrote {}", p.display()));
            }
        }
        Command::Estimate {
            graph,
            homes,
            out_dir,
        } => {
            let out_dir = out_dir.clone().unwrap_or(workdir);
            let s = stages::estimate(graph, homes, &out_dir)?;
            say(format!(
                "easy {} hard {} unknown {} total {}",
                s.easy, s.hard, s.unknown, s.total
            ));
        }
        Command::Analyze {
            graph,
            homes,
            scores,
            bins_per_decade,
            out_dir,
        } => {
            if *bins_per_decade == 0 {
                return Err(Error::Usage("--bins-per-decade must be positive".into()));
            }
            let out_dir = under(&workdir, out_dir, pipeline::REPORT_DIR);
            let bins = BinParams {
                bins_per_decade: *bins_per_decade,
                ..BinParams::default()
            };
            let m = stages::analyze(graph, homes, scores, &bins, &out_dir)?;
            say(format!(
                "{} distributions, {} bias series -> {}",
                m.distribution_count(),
                m.bias_count(),
                out_dir.display()
            ));
        }
        Command::Synth {
            model,
            seed,
            out_dir,
        } => {
            let out_dir = out_dir.clone().unwrap_or(workdir);
            let (e, h) = stages::synth(&model.model(*seed), &out_dir)?;
            say(format!("wrote {} and {}", e.display(), h.display()));
        }
        Command::Pipeline { config, seed } => {
            let mut cfg = PipelineConfig::load(config)?;
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let dir = cli
                .workdir
                .clone()
                .or_else(|| cfg.workdir.clone())
                .unwrap_or(workdir);
            let m = pipeline::run(&cfg, &dir)?;
            say(format!(
                "easy {} hard {} unknown {}; {} stages -> {}",
                m.partition.easy,
                m.partition.hard,
                m.partition.unknown,
                m.stages.len(),
                dir.display()
            ));
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
/// Diagnostics go to `err` as a single line.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "geoloc: {e}");
            e.exit_code()
        }
    }
}
