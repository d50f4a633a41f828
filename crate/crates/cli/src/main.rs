use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tree_shapley::io::{parse_event_log, render_tree_file, TreeFile};
use tree_shapley::shapley::shapley_basic;
use tree_shapley::{IncrementalState, NodeId, RootedTree};
use tree_shapley_cli::commands::{corrupt_allocation, VerifyOptions};
use tree_shapley_cli::config::ConfigOverrides;
use tree_shapley_cli::{cmd_compute, cmd_count, cmd_stream, cmd_verify, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "treeshap", version, about = "Shapley rewards for referral trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Allocate rewards on a tree with one or more mechanisms.
    Compute {
        tree: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Replay a join log, printing each reward delta and the final allocation.
    Stream {
        /// Line-delimited join events; `-` reads stdin.
        events: PathBuf,
        /// Root of the initially empty tree.
        #[arg(long, conflicts_with = "tree")]
        root: Option<u64>,
        /// Start from an existing tree instead of a lone root.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Write the final tree here after the log is consumed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Cross-check the closed form against the oracles, core and convexity.
    Verify {
        tree: PathBuf,
        #[arg(long, hide = true)]
        corrupt: bool,
        #[command(flatten)]
        opts: Opts,
    },
    /// Count trimmed coalitions per node.
    Count { tree: PathBuf },
}

#[derive(Args)]
struct Opts {
    /// TOML file with defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// shapley, refer-a-friend or geometric; repeat for several.
    #[arg(long = "mechanism", short = 'm')]
    mechanisms: Vec<String>,
    #[arg(long)]
    unit: Option<String>,
    #[arg(long)]
    root_adjust: bool,
    #[arg(long)]
    ratio: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    normalize: Option<bool>,
    #[arg(long)]
    referrer_share: Option<String>,
    #[arg(long)]
    exact: bool,
    /// table, records or csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    limit_bruteforce: Option<usize>,
    #[arg(long)]
    limit_core: Option<usize>,
    #[arg(long)]
    limit_convex: Option<usize>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        use tree_shapley_cli::config::RationalField::Text;
        let o = ConfigOverrides {
            mechanisms: (!self.mechanisms.is_empty()).then(|| self.mechanisms.clone()),
            unit: self.unit.clone().map(Text),
            root_adjust: self.root_adjust.then_some(true),
            ratio: self.ratio.clone().map(Text),
            normalize: self.normalize,
            referrer_share: self.referrer_share.clone().map(Text),
            limit_bruteforce: self.limit_bruteforce,
            limit_core: self.limit_core,
            limit_convex: self.limit_convex,
            format: self.format.clone(),
            exact: self.exact.then_some(true),
        };
        cfg.apply(&o)?;
        Ok(cfg)
    }
}

fn read_tree(path: &Path) -> Result<TreeFile, CliError> {
    let doc = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    TreeFile::parse(&doc, true).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<(RootedTree, TreeFile), CliError> {
    let file = read_tree(path)?;
    let tree = file.to_tree().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((tree, file))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Compute { tree, opts } => {
            let cfg = opts.resolve()?;
            let (tree, file) = load_tree(&tree)?;
            out.write_all(cmd_compute(&cfg, &tree, &file.labels)?.as_bytes())?;
        }
        Command::Stream { events, root, tree, checkpoint, opts } => {
            let cfg = opts.resolve()?;
            let state = match (root, tree) {
                (_, Some(path)) => IncrementalState::from_tree(&load_tree(&path)?.0, cfg.root_adjust)?,
                (Some(r), None) => IncrementalState::new(NodeId(r), cfg.root_adjust)?,
                (None, None) => return Err(CliError::Config("stream needs --root or --tree".into())),
            };
            let summary = if events.as_os_str() == "-" {
                cmd_stream(&cfg, state, parse_event_log(io::stdin().lock()), &mut out)
            } else {
                let f = File::open(&events).map_err(|e| CliError::Input(format!("{}: {e}", events.display())))?;
                cmd_stream(&cfg, state, parse_event_log(BufReader::new(f)), &mut out)
            };
            out.flush()?;
            let summary = summary?;
            if let Some(path) = checkpoint {
                std::fs::write(&path, render_tree_file(&summary.state.tree()))?;
            }
        }
        Command::Verify { tree, corrupt, opts } => {
            let cfg = opts.resolve()?;
            let (tree, _) = load_tree(&tree)?;
            let allocation_override = corrupt.then(|| corrupt_allocation(&tree, &shapley_basic(&tree)));
            let report = cmd_verify(&cfg, &tree, &VerifyOptions { allocation_override })?;
            out.write_all(report.render().as_bytes())?;
            if !report.passed() {
                out.flush()?;
                return Err(CliError::Verification("one or more checks failed".into()));
            }
        }
        Command::Count { tree } => {
            let (tree, _) = load_tree(&tree)?;
            out.write_all(cmd_count(&tree)?.as_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("treeshap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
