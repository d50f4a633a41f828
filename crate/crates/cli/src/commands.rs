//! The `compute`, `stream`, `verify` and `count` commands.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;
use tree_shapley::analysis::{
    binary_tree_count, complexity_table, count_trimmed_containing, is_complete_binary, is_convex, is_in_core,
};
use tree_shapley::io::{format_rational, JoinEvent};
use tree_shapley::mechanisms::{compare, MechanismSpec as Spec, RewardReport as Report, TreeSummary};
use tree_shapley::shapley::{shapley_basic, shapley_bruteforce, shapley_general};
use tree_shapley::{Allocation, IncrementalState, NodeId, Rational, RewardReport, RootedTree, TreeGame};

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;
use crate::render::{display_value, json_integer, render_report, render_table};

/// Trimmed coalitions the trimmed-set cross-check may visit before it is skipped.
pub const GENERAL_ROUTE_BUDGET: u64 = 2_000_000;

pub fn compute_report(cfg: &RunConfig, tree: &RootedTree) -> Result<RewardReport, CliError> {
    Ok(compare(tree, &cfg.specs()?)?)
}

pub fn cmd_compute(cfg: &RunConfig, tree: &RootedTree, labels: &BTreeMap<NodeId, String>) -> Result<String, CliError> {
    let report = compute_report(cfg, tree)?;
    Ok(render_report(&report, labels, cfg.format, cfg.exact))
}

#[derive(Serialize)]
struct DeltaRecord<'a> {
    seq: u64,
    node: NodeId,
    parent: NodeId,
    depth: usize,
    share_exact: &'a str,
    share_display: serde_json::Value,
    path: &'a [NodeId],
}

pub struct StreamSummary {
    pub events: u64,
    pub state: IncrementalState,
    /// Final Shapley allocation in units of `unit`, root-adjusted if configured.
    pub allocation: Allocation,
}

/// Applies join events in order, writing one delta line per event and then the
/// final allocation. Deltas already written stay written when a later event fails.
pub fn cmd_stream<I, W>(
    cfg: &RunConfig,
    mut state: IncrementalState,
    events: I,
    out: &mut W,
) -> Result<StreamSummary, CliError>
where
    I: IntoIterator<Item = tree_shapley::Result<JoinEvent>>,
    W: Write,
{
    let mut share_cache: HashMap<usize, (String, serde_json::Value)> = HashMap::new();
    let mut count = 0u64;
    if cfg.format == OutputFormat::Csv {
        writeln!(out, "seq,node,parent,depth,share_exact,share_display,path")?;
    }
    for ev in events {
        let ev = ev.map_err(|e| CliError::Input(e.to_string()))?;
        let delta = state.join(ev.node, ev.parent).map_err(|source| CliError::Event { seq: ev.seq, source })?;
        let (exact, display) = share_cache.entry(delta.depth).or_insert_with(|| {
            let share = delta.share() * cfg.unit.clone();
            (format_rational(&share), json_integer(&display_value(&share)))
        });
        match cfg.format {
            OutputFormat::Table => {
                let shown = if cfg.exact { exact.clone() } else { display.to_string() };
                let mut path = String::new();
                for (k, id) in delta.path.iter().enumerate() {
                    if k > 0 {
                        path.push(' ');
                    }
                    let _ = write!(path, "{id}");
                }
                writeln!(out, "seq {} node {} depth {}: +{} each to {}", ev.seq, ev.node, delta.depth, shown, path)?;
            }
            OutputFormat::Records => {
                let rec = DeltaRecord {
                    seq: ev.seq,
                    node: ev.node,
                    parent: ev.parent,
                    depth: delta.depth,
                    share_exact: exact,
                    share_display: display.clone(),
                    path: &delta.path,
                };
                serde_json::to_writer(&mut *out, &rec).map_err(|e| CliError::Input(e.to_string()))?;
                writeln!(out)?;
            }
            OutputFormat::Csv => {
                let path: Vec<String> = delta.path.iter().map(|id| id.to_string()).collect();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    ev.seq,
                    ev.node,
                    ev.parent,
                    delta.depth,
                    exact,
                    display,
                    path.join(" ")
                )?;
            }
        }
        count += 1;
    }

    let allocation = state.allocation::<Rational>().scaled(&cfg.unit);
    let tree_len = state.len();
    let report: Report<Rational> = Report {
        summary: TreeSummary { nodes: tree_len, height: state.max_depth(), referrals: tree_len - 1 },
        rows: vec![(Spec::shapley(state.root_adjust(), cfg.unit.clone()), allocation.clone())],
    };
    if cfg.format == OutputFormat::Table {
        writeln!(out, "# final allocation after {count} events")?;
    }
    let final_format = if cfg.format == OutputFormat::Csv { OutputFormat::Records } else { cfg.format };
    out.write_all(render_report(&report, &BTreeMap::new(), final_format, cfg.exact).as_bytes())?;
    Ok(StreamSummary { events: count, state, allocation })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| !matches!(c.status, CheckStatus::Fail(_)))
    }

    pub fn status(&self, name: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.status)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = match &c.status {
                CheckStatus::Pass => writeln!(out, "PASS  {}", c.name),
                CheckStatus::Fail(m) => writeln!(out, "FAIL  {}: {m}", c.name),
                CheckStatus::Skipped(m) => writeln!(out, "SKIP  {}: {m}", c.name),
            };
        }
        out
    }

    fn push(&mut self, name: &'static str, status: CheckStatus) {
        self.checks.push(Check { name, status });
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Replaces the closed-form allocation fed to the core check.
    pub allocation_override: Option<Allocation>,
}

/// Moves the root's whole reward onto another node. The root alone is worth
/// one unit, so the result always violates the core when `n >= 2`.
pub fn corrupt_allocation(tree: &RootedTree, a: &Allocation) -> Allocation {
    let root = tree.root();
    let Some(&other) = tree.node_ids().iter().find(|&&id| id != root) else {
        return a.clone();
    };
    let root_value = a.get(root).cloned().unwrap_or_else(Rational::zero);
    let entries = a.iter().map(|(id, x)| {
        let x = if id == root {
            Rational::zero()
        } else if id == other {
            x.clone() + root_value.clone()
        } else {
            x.clone()
        };
        (id, x)
    });
    Allocation::new(entries).expect("ids are unique")
}

fn mismatch(a: &Allocation, b: &Allocation) -> String {
    match a.iter().zip(b.iter()).find(|((_, x), (_, y))| x != y) {
        Some(((id, x), (_, y))) => format!("node {id}: {} vs {}", format_rational(x), format_rational(y)),
        None => "allocations differ in shape".into(),
    }
}

pub fn cmd_verify(cfg: &RunConfig, tree: &RootedTree, opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let n = tree.len();
    let game = TreeGame::basic(tree.clone());
    let closed: Allocation = shapley_basic(tree);
    let mut report = VerifyReport::default();
    let n_value = Rational::from_integer(n.into());

    if n <= cfg.limit_bruteforce {
        let brute = shapley_bruteforce(&game, cfg.limit_bruteforce)?;
        report.push(
            "closed form = brute force",
            if brute == closed { CheckStatus::Pass } else { CheckStatus::Fail(mismatch(&closed, &brute)) },
        );
        report.push(
            "brute force efficiency",
            if *brute.total() == n_value {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail(format!("sum {} != {n}", format_rational(brute.total())))
            },
        );
    } else {
        report.push(
            "closed form = brute force",
            CheckStatus::Skipped(format!("n = {n} exceeds brute-force limit {}", cfg.limit_bruteforce)),
        );
    }

    let work: BigUint =
        tree.node_ids().iter().map(|&id| count_trimmed_containing(tree, id)).sum::<tree_shapley::Result<BigUint>>()?;
    if work <= BigUint::from(GENERAL_ROUTE_BUDGET) {
        let general = shapley_general(&game)?;
        report.push(
            "closed form = trimmed-set sum",
            if general == closed { CheckStatus::Pass } else { CheckStatus::Fail(mismatch(&closed, &general)) },
        );
    } else {
        report.push(
            "closed form = trimmed-set sum",
            CheckStatus::Skipped(format!("{work} trimmed coalitions exceed budget {GENERAL_ROUTE_BUDGET}")),
        );
    }

    report.push(
        "efficiency",
        if *closed.total() == n_value {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail(format!("sum {} != {n}", format_rational(closed.total())))
        },
    );

    let replay = IncrementalState::from_tree(tree, false)?.allocation::<Rational>();
    report.push(
        "incremental = batch",
        if replay == closed { CheckStatus::Pass } else { CheckStatus::Fail(mismatch(&closed, &replay)) },
    );

    if n <= cfg.limit_core {
        let alloc = opts.allocation_override.as_ref().unwrap_or(&closed);
        let check = is_in_core(&game, alloc, cfg.limit_core)?;
        report.push(
            "shapley allocation in core",
            match check.violation {
                None => CheckStatus::Pass,
                Some(v) => {
                    CheckStatus::Fail(format!("coalition {} is short by {}", v.coalition, format_rational(&v.deficit)))
                }
            },
        );
    } else {
        report.push(
            "shapley allocation in core",
            CheckStatus::Skipped(format!("n = {n} exceeds core limit {}", cfg.limit_core)),
        );
    }

    if n <= cfg.limit_convex {
        let check = is_convex(&game, cfg.limit_convex)?;
        report.push(
            "convexity",
            match check.witness {
                None => CheckStatus::Pass,
                Some(w) => CheckStatus::Fail(format!(
                    "agent {}: mc over {} = {} exceeds mc over {} = {}",
                    w.agent,
                    w.smaller,
                    format_rational(&w.mc_smaller),
                    w.larger,
                    format_rational(&w.mc_larger)
                )),
            },
        );
    } else {
        report.push("convexity", CheckStatus::Skipped(format!("n = {n} exceeds convexity limit {}", cfg.limit_convex)));
    }
    Ok(report)
}

pub fn cmd_count(tree: &RootedTree) -> Result<String, CliError> {
    let rows = complexity_table(tree);
    let binary = is_complete_binary(tree);
    let mut table = vec![vec!["node".to_string(), "depth".into(), "cfg".into(), "tree-game".into(), "basic".into()]];
    if binary {
        table[0].push("b(h,d)".into());
    }
    for r in &rows {
        let mut line = vec![
            r.node.to_string(),
            r.depth.to_string(),
            r.cfg_count.to_string(),
            r.tree_game_count.to_string(),
            r.basic_count.to_string(),
        ];
        if binary {
            let b = binary_tree_count(tree.height(), r.depth)?;
            if b != r.tree_game_count {
                return Err(CliError::Verification(format!(
                    "node {}: b({}, {}) = {b} but {} trimmed coalitions were counted",
                    r.node,
                    tree.height(),
                    r.depth,
                    r.tree_game_count
                )));
            }
            line.push(b.to_string());
        }
        table.push(line);
    }
    Ok(render_table(&table))
}
