use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use linkident::decomposition::{biconnected_components, triconnected_components};
use linkident::dil2m::run_dil2m_with;
use linkident::harness::{
    cli_diff, exhaustive_diff, generate_graph, DiffRecord, Generator, MonitorPolicy, SweepConfig,
    SweepSummary,
};
use linkident::oracle::{identifiable_links_bruteforce, measurement_system, OracleConfig, DEFAULT_PATH_CAP};
use linkident::report::{block_cut_tree_dot, decomposition_dot, decomposition_json, verdict_dot};
use linkident::{Graph, NodeId};

#[derive(Parser)]
#[command(name = "linkident", version, about = "Link identifiability with two monitors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural analysis of one graph; JSON report on stdout.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Also write a DOT rendering of the verdicts.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Brute-force identifiability from the enumerated measurement paths.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Write the measurement matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Seeded random sweep comparing the structural verdicts to the oracle.
    /// Exits with status 1 on any mismatch.
    Diff {
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Try every ordered monitor pair instead of one sampled pair.
        #[arg(long)]
        all_pairs: bool,
        /// Stream one JSON record per instance to this file.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
    /// Print one generated graph as JSON.
    Gen {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Instance index within the seeded stream.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// All connected graphs up to `--nodes` nodes, every monitor pair.
    /// Exits with status 1 on any mismatch.
    Exhaustive {
        #[arg(long, default_value_t = 5)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        min_nodes: usize,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
    /// DOT for verdicts, the block-cut tree, or the triconnected components.
    Dot {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = DotKind::Verdicts)]
        kind: DotKind,
        /// Output file; stdout when absent.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// With `--kind spqr`, also write the decompositions as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Graph JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Monitor pair `u,v`, overriding the file.
    #[arg(long, value_parser = parse_monitors)]
    monitors: Option<(u32, u32)>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
    path_cap: usize,
    /// Let measurement paths pass through a monitor (sensitivity check).
    #[arg(long)]
    allow_monitor_transit: bool,
}

impl OracleArgs {
    fn config(&self) -> OracleConfig {
        OracleConfig {
            path_cap: self.path_cap,
            allow_monitor_transit: self.allow_monitor_transit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    ErdosRenyi,
    RandomBiconnected,
    Barbell,
    Grid,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = GeneratorKind::ErdosRenyi)]
    generator: GeneratorKind,
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Link probability for erdos-renyi.
    #[arg(long, default_value_t = 0.4)]
    p: f64,
    /// Extra links for random-biconnected.
    #[arg(long, default_value_t = 2)]
    chords: usize,
    /// Grid rows; columns fill up `--nodes`.
    #[arg(long, default_value_t = 2)]
    rows: usize,
}

impl SweepArgs {
    fn config(&self, oracle: Option<&OracleArgs>, instances: usize, all_pairs: bool) -> SweepConfig {
        let half = self.nodes / 2;
        let generator = match self.generator {
            GeneratorKind::ErdosRenyi => Generator::ErdosRenyi { p: self.p },
            GeneratorKind::RandomBiconnected => Generator::RandomBiconnected { chords: self.chords },
            GeneratorKind::Barbell => Generator::Barbell {
                left: half,
                right: self.nodes - half,
            },
            GeneratorKind::Grid => Generator::Grid {
                rows: self.rows.max(1),
                cols: (self.nodes / self.rows.max(1)).max(1),
            },
        };
        let mut config = SweepConfig {
            generator,
            nodes: self.nodes,
            instances,
            seed: self.seed,
            monitors: if all_pairs {
                MonitorPolicy::AllPairs
            } else {
                MonitorPolicy::Sampled
            },
            ..Default::default()
        };
        if let Some(o) = oracle {
            config.path_cap = o.path_cap;
            config.allow_monitor_transit = o.allow_monitor_transit;
        }
        config
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DotKind {
    Verdicts,
    Blocks,
    Spqr,
}

fn parse_monitors(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected u,v")?;
    let node = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
    Ok((node(a)?, node(b)?))
}

fn load(input: &InputArgs) -> anyhow::Result<Graph> {
    let text = fs::read_to_string(&input.input).with_context(|| format!("reading {}", input.input.display()))?;
    let g = Graph::from_json(&text).with_context(|| format!("parsing {}", input.input.display()))?;
    Ok(match input.monitors {
        Some((a, b)) => g.with_monitors(NodeId(a), NodeId(b))?,
        None => g,
    })
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Runs a sweep, streaming records to `jsonl` when given.
fn sweep(
    jsonl: Option<&Path>,
    run: impl FnOnce(&mut dyn FnMut(&DiffRecord)) -> linkident::Result<SweepSummary>,
) -> anyhow::Result<SweepSummary> {
    let mut out = match jsonl {
        Some(p) => Some(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let mut failure = None;
    let summary = run(&mut |r| {
        if let Some(w) = out.as_mut() {
            if let Err(e) = serde_json::to_writer(&mut *w, r).map_err(std::io::Error::from).and_then(|_| w.write_all(b"\n")) {
                failure.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = failure {
        bail!("writing records: {e}");
    }
    if let Some(mut w) = out {
        w.flush()?;
    }
    Ok(summary)
}

fn print_summary(summary: &SweepSummary) -> ExitCode {
    // a closed pipe (e.g. `| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(summary).expect("plain data"));
    if summary.mismatched_links > 0 {
        eprintln!("{} mismatched links in {} instances", summary.mismatched_links, summary.mismatched_instances);
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Analyze { input, oracle, dot } => {
            let g = load(&input)?;
            let report = run_dil2m_with(&g, None, &oracle.config())?;
            if let Some(path) = dot {
                write_file(&path, &verdict_dot(&g, &report))?;
            }
            println!("{}", report.to_json());
        }
        Command::Oracle { input, oracle, csv } => {
            let g = load(&input)?;
            let config = oracle.config();
            let r = identifiable_links_bruteforce(&g, &config)?;
            if let Some(path) = csv {
                write_file(&path, &measurement_system(&g, &config)?.to_csv())?;
            }
            let identifiable: Vec<[u32; 2]> = r
                .identifiable
                .iter()
                .filter_map(|&l| g.ends(l))
                .map(|(u, v)| [u.0, v.0])
                .collect();
            let out = serde_json::json!({
                "identifiable": identifiable,
                "path_count": r.path_count,
                "rank": r.rank,
                "links": r.links,
            });
            println!("{out}");
        }
        Command::Diff {
            sweep: args,
            oracle,
            instances,
            all_pairs,
            jsonl,
        } => {
            let config = args.config(Some(&oracle), instances, all_pairs);
            let summary = sweep(jsonl.as_deref(), |sink| cli_diff(&config, sink))?;
            return Ok(print_summary(&summary));
        }
        Command::Gen { sweep: args, index } => {
            let g = generate_graph(&args.config(None, index + 1, false), index)?;
            println!("{}", g.to_json());
        }
        Command::Exhaustive {
            nodes,
            min_nodes,
            oracle,
            jsonl,
        } => {
            let config = oracle.config();
            let summary = sweep(jsonl.as_deref(), |sink| exhaustive_diff(min_nodes, nodes, &config, sink))?;
            return Ok(print_summary(&summary));
        }
        Command::Dot { input, kind, dot, json } => {
            let g = load(&input)?;
            let text = match kind {
                DotKind::Verdicts => verdict_dot(&g, &run_dil2m_with(&g, None, &OracleConfig::default())?),
                DotKind::Blocks => block_cut_tree_dot(&biconnected_components(&g)?),
                DotKind::Spqr => {
                    let bct = biconnected_components(&g)?;
                    let mut text = String::new();
                    let mut dumps = Vec::new();
                    for b in bct.blocks.iter().filter(|b| b.nodes.len() >= 3) {
                        let d = triconnected_components(&g.link_subgraph(&b.links))?;
                        text.push_str(&format!("// block {}\n", b.id));
                        text.push_str(&decomposition_dot(&d));
                        dumps.push(serde_json::json!({"block": b.id, "decomposition": decomposition_json(&d)}));
                    }
                    if let Some(path) = json {
                        write_file(&path, &serde_json::to_string_pretty(&dumps)?)?;
                    }
                    text
                }
            };
            match dot {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
