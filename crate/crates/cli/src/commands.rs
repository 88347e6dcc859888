use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use adg::engine::{EpisodeConfig, Mode, Network, StableSubgraph, DEFAULT_CAPACITY};
use adg::experiments::{self, ExperimentConfig, ExperimentKind, ExperimentOutput};
use adg::graph::{generate, GeneratorSpec};
use adg::metrics::representation_quality;
use adg::{Error, NodeId};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::io::{emit, parse_json, read, write_atomic, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "adg", version, about = "Subgraph storage in active directed graphs")]
pub struct Cli {
    /// Worker threads for experiment sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Format of result documents.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory for experiment outputs.
    #[arg(long, global = true, env = "ADG_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Log progress lines to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph and write a fresh network snapshot.
    Generate(GenerateArgs),
    /// Store one sample into a snapshot.
    Store(EpisodeArgs),
    /// Retrieve one sample from a snapshot; the snapshot is not modified.
    Retrieve(EpisodeArgs),
    /// Capacity run: store, retrieve everything, optional capacity search.
    Capacity(ExperimentArgs),
    /// Retrieval from perturbed cues.
    Fault(ExperimentArgs),
    /// Retrieval after node or edge damage with table restoration.
    Robustness(ExperimentArgs),
    /// Structural metrics and capacity of several topologies.
    Structures(ExperimentArgs),
    /// Summarize the tables of a snapshot.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Er,
    ErEdges,
    Global,
    Ring,
    Star,
    Kleinberg,
    Price,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    /// Edge probability (er).
    #[arg(long)]
    pub p: Option<f64>,
    /// Edge count (er-edges).
    #[arg(long)]
    pub m: Option<usize>,
    /// Neighbours per side (ring, kleinberg).
    #[arg(long, default_value_t = 3)]
    pub l: usize,
    /// Long-range out-edges per node (kleinberg).
    #[arg(long, default_value_t = 1)]
    pub long_range: usize,
    /// Out-edges per arriving node (price).
    #[arg(long, default_value_t = 6)]
    pub m_new: usize,
    /// Table bound K.
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    pub capacity: usize,
    /// Write only the graph document instead of a snapshot.
    #[arg(long)]
    pub graph_only: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EpisodeArgs {
    /// Network snapshot.
    #[arg(long)]
    pub net: PathBuf,
    /// JSON file holding the cue: a list of node ids or `{"nodes": [...]}`.
    #[arg(long, conflicts_with = "nodes")]
    pub cue: Option<PathBuf>,
    /// Cue as comma-separated node ids.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Vec<u32>,
    /// Episode configuration (JSON); omitted fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Result document path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Store only: where to write the updated snapshot (default: `--net`).
    #[arg(long)]
    pub snapshot_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment configuration (JSON).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset instead of a config file.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Comma-separated master seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub retrieve_limit: Option<usize>,
    #[arg(long)]
    pub max_samples: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Output file stem inside the output directory (default: the subcommand).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Network snapshot.
    pub net: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    adg::with_threads(threads, move || match &cli.command {
        Command::Generate(a) => generate_cmd(&cli, a),
        Command::Store(a) => episode_cmd(&cli, a, Mode::Store),
        Command::Retrieve(a) => episode_cmd(&cli, a, Mode::Retrieve),
        Command::Capacity(a) => experiment_cmd(&cli, a, ExperimentKind::Capacity),
        Command::Fault(a) => experiment_cmd(&cli, a, ExperimentKind::Fault),
        Command::Robustness(a) => experiment_cmd(&cli, a, ExperimentKind::Robustness),
        Command::Structures(a) => experiment_cmd(&cli, a, ExperimentKind::Structures),
        Command::Inspect(a) => inspect_cmd(&cli, a),
    })
}

fn log(cli: &Cli, msg: impl AsRef<str>) {
    if cli.verbose > 0 {
        eprintln!("adg: {}", msg.as_ref());
    }
}

fn generator_spec(a: &GenerateArgs, seed: u64) -> CliResult<GeneratorSpec> {
    let need = |what: &str| CliError::Usage(format!("--kind {:?} needs --{what}", a.kind));
    Ok(match a.kind {
        Kind::Er => GeneratorSpec::er(a.p.ok_or_else(|| need("p"))?, seed),
        Kind::ErEdges => GeneratorSpec::er_edges(a.m.ok_or_else(|| need("m"))?, seed),
        Kind::Global => GeneratorSpec::global(),
        Kind::Ring => GeneratorSpec::ring(a.l),
        Kind::Star => GeneratorSpec::star(),
        Kind::Kleinberg => GeneratorSpec::kleinberg(a.l, a.long_range, seed),
        Kind::Price => GeneratorSpec::price(a.m_new, seed),
    })
}

fn generate_cmd(cli: &Cli, a: &GenerateArgs) -> CliResult<()> {
    let spec = generator_spec(a, cli.seed.unwrap_or(0))?;
    let g = generate(&spec, a.n)?;
    log(cli, format!("generated {} nodes, {} edges", g.node_count(), g.edge_count()));
    let doc = if a.graph_only { g.to_json() } else { Network::new(g, a.capacity).to_json() };
    emit(a.output.as_deref(), &(doc + "\n"))
}

fn read_cue(a: &EpisodeArgs) -> CliResult<BTreeSet<NodeId>> {
    let ids: Vec<u32> = match &a.cue {
        Some(path) => {
            let value: serde_json::Value = parse_json(path, &read(path)?)?;
            let list = value.get("nodes").cloned().unwrap_or(value);
            serde_json::from_value(list)
                .map_err(|e| Error::Malformed(format!("{}: cue must list node ids: {e}", path.display())))?
        }
        None if !a.nodes.is_empty() => a.nodes.clone(),
        None => return Err(CliError::Usage("give the cue with --cue or --nodes".into())),
    };
    Ok(ids.into_iter().map(NodeId).collect())
}

fn episode_config(cli: &Cli, path: Option<&Path>, mode: Mode) -> CliResult<EpisodeConfig> {
    let mut cfg: EpisodeConfig = match path {
        Some(p) => parse_json(p, &read(p)?)?,
        None => EpisodeConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.mode = mode;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct EpisodeDocument<'a> {
    version: u32,
    config: &'a EpisodeConfig,
    cue: &'a BTreeSet<NodeId>,
    quality: f64,
    subgraph: &'a StableSubgraph,
}

fn episode_cmd(cli: &Cli, a: &EpisodeArgs, mode: Mode) -> CliResult<()> {
    let mut net = Network::from_json(&read(&a.net)?)?;
    let cue = read_cue(a)?;
    let cfg = episode_config(cli, a.config.as_deref(), mode)?;
    let sub = match mode {
        Mode::Store => {
            let sub = net.store_sample(&cue, &cfg)?;
            let target = a.snapshot_out.as_deref().unwrap_or(&a.net);
            write_atomic(target, &(net.to_json() + "\n"))?;
            log(cli, format!("snapshot written to {}", target.display()));
            sub
        }
        Mode::Retrieve => {
            if a.snapshot_out.is_some() {
                return Err(CliError::Usage("--snapshot-out only applies to store".into()));
            }
            net.retrieve_sample(&cue, &cfg)?
        }
    };
    let quality = if cue.is_empty() { 1.0 } else { representation_quality(&sub, cue.len())? };
    let doc = match cli.format {
        Format::Json => {
            let d = EpisodeDocument { version: 1, config: &cfg, cue: &cue, quality, subgraph: &sub };
            serde_json::to_string_pretty(&d).expect("document serializes") + "\n"
        }
        Format::Csv => {
            let mut s = String::from("from,to\n");
            for (u, v) in &sub.edges {
                s.push_str(&format!("{u},{v}\n"));
            }
            s
        }
    };
    emit(a.output.as_deref(), &doc)
}

fn experiment_config(cli: &Cli, a: &ExperimentArgs, kind: ExperimentKind) -> CliResult<ExperimentConfig> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(p), _) => parse_json::<ExperimentConfig>(p, &read(p)?)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => {
            return Err(CliError::Usage(format!(
                "give --config or --preset (one of {})",
                ExperimentConfig::PRESETS.join(", ")
            )))
        }
    };
    cfg.kind = kind;
    if let Some(v) = a.samples {
        cfg.samples = v;
    }
    if let Some(v) = a.sample_size {
        cfg.sample_size = v;
    }
    if !a.seeds.is_empty() {
        cfg.seeds = a.seeds.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if a.retrieve_limit.is_some() {
        cfg.retrieve_limit = a.retrieve_limit;
    }
    if let Some(v) = a.max_samples {
        cfg.search.max_samples = v;
    }
    if let Some(v) = a.stride {
        cfg.search.stride = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment_cmd(cli: &Cli, a: &ExperimentArgs, kind: ExperimentKind) -> CliResult<()> {
    let cfg = experiment_config(cli, a, kind)?;
    log(cli, format!("running {} on {} network(s), {} seed(s)", kind.name(), cfg.networks.len(), cfg.seeds.len()));
    let out: ExperimentOutput = experiments::run(&cfg)?;
    let stem = a.name.clone().unwrap_or_else(|| kind.name().to_string());
    let csv_path = cli.out_dir.join(format!("{stem}.csv"));
    let json_path = cli.out_dir.join(format!("{stem}.json"));
    let csv = out.csv();
    let json = out.json() + "\n";
    write_atomic(&csv_path, &csv)?;
    write_atomic(&json_path, &json)?;
    if let Some(curves) = out.curves_csv() {
        write_atomic(&cli.out_dir.join(format!("{stem}.curves.csv")), &curves)?;
    }
    for t in &out.timings {
        log(cli, format!("{} seed {}: {} ms", t.network, t.seed, t.millis));
    }
    log(cli, format!("wrote {} and {}", csv_path.display(), json_path.display()));
    emit(None, if cli.format == Format::Csv { &csv } else { &json })
}

fn inspect_cmd(cli: &Cli, a: &InspectArgs) -> CliResult<()> {
    let net = Network::from_json(&read(&a.net)?)?;
    let k = net.capacity();
    let occupancy: Vec<usize> = net.tables().iter().map(|t| t.distinct_output_count()).collect();
    let entries: Vec<usize> = net.tables().iter().map(|t| t.len()).collect();
    let doc = match cli.format {
        Format::Json => {
            let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
            for &o in &occupancy {
                *histogram.entry(o).or_default() += 1;
            }
            let summary = json!({
                "n": net.graph().node_count(),
                "m": net.graph().edge_count(),
                "capacity": k,
                "entries": entries.iter().sum::<usize>(),
                "nonempty_tables": occupancy.iter().filter(|&&o| o > 0).count(),
                "max_occupancy": occupancy.iter().copied().max().unwrap_or(0),
                "within_bound": occupancy.iter().all(|&o| o <= k),
                "histogram": histogram,
                "occupancy": occupancy,
            });
            serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"
        }
        Format::Csv => {
            let mut s = String::from("node,entries,distinct_outputs,capacity\n");
            for (v, (e, o)) in entries.iter().zip(&occupancy).enumerate() {
                s.push_str(&format!("{v},{e},{o},{k}\n"));
            }
            s
        }
    };
    emit(a.output.as_deref(), &doc)
}
