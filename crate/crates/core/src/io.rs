//! File formats: tree documents, line-delimited join logs and exact rationals.
//!
//! A tree document is JSON:
//!
//! ```json
//! {"root": 1, "edges": [{"child": 3, "parent": 1}], "labels": {"1": "alice"}}
//! ```
//!
//! A join log holds one JSON record per line: `{"seq": 1, "node": 3, "parent": 1}`.

use std::collections::BTreeMap;
use std::io::BufRead;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{NodeId, RootedTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub child: NodeId,
    pub parent: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub root: NodeId,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<NodeId, String>,
}

// Lenient twin of `TreeFile` that ignores unknown fields.
#[derive(Deserialize)]
struct LenientEdge {
    child: NodeId,
    parent: NodeId,
}

#[derive(Deserialize)]
struct LenientTreeFile {
    root: NodeId,
    #[serde(default)]
    edges: Vec<LenientEdge>,
    #[serde(default)]
    labels: BTreeMap<NodeId, String>,
}

impl TreeFile {
    pub fn parse(doc: &str, strict: bool) -> Result<Self> {
        let err =
            |e: serde_json::Error| Error::Parse(format!("tree file line {} column {}: {e}", e.line(), e.column()));
        if strict {
            serde_json::from_str(doc).map_err(err)
        } else {
            let l: LenientTreeFile = serde_json::from_str(doc).map_err(err)?;
            Ok(TreeFile {
                root: l.root,
                edges: l.edges.into_iter().map(|e| EdgeRecord { child: e.child, parent: e.parent }).collect(),
                labels: l.labels,
            })
        }
    }

    pub fn to_tree(&self) -> Result<RootedTree> {
        let edges: Vec<(NodeId, NodeId)> = self.edges.iter().map(|e| (e.child, e.parent)).collect();
        let tree = RootedTree::build(&edges, self.root)?;
        if let Some(id) = self.labels.keys().find(|id| !tree.contains(**id)) {
            return Err(Error::Parse(format!("label for unknown node {id}")));
        }
        Ok(tree)
    }

    pub fn from_tree(tree: &RootedTree) -> Self {
        TreeFile {
            root: tree.root(),
            edges: tree.edges().into_iter().map(|(child, parent)| EdgeRecord { child, parent }).collect(),
            labels: BTreeMap::new(),
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree files always serialize")
    }
}

/// Parses and validates a tree document (strict: unknown fields rejected).
pub fn parse_tree_file(doc: &str) -> Result<RootedTree> {
    TreeFile::parse(doc, true)?.to_tree()
}

pub fn render_tree_file(tree: &RootedTree) -> String {
    TreeFile::from_tree(tree).render()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoinEvent {
    pub seq: u64,
    pub node: NodeId,
    pub parent: NodeId,
}

impl JoinEvent {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }
}

/// Streaming reader over a join log. Blank lines are skipped; sequence
/// numbers must strictly increase.
pub struct EventLog<R> {
    reader: R,
    line_no: usize,
    last_seq: Option<u64>,
    buf: String,
    failed: bool,
}

impl<R: BufRead> EventLog<R> {
    pub fn new(reader: R) -> Self {
        EventLog { reader, line_no: 0, last_seq: None, buf: String::new(), failed: false }
    }
}

impl<R: BufRead> Iterator for EventLog<R> {
    type Item = Result<JoinEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            self.line_no += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::Parse(format!("event log line {}: {e}", self.line_no))));
                }
            }
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<JoinEvent>(line)
                .map_err(|e| Error::Parse(format!("event log line {}: {e}", self.line_no)))
                .and_then(|ev| match self.last_seq {
                    Some(prev) if ev.seq <= prev => Err(Error::Parse(format!(
                        "event log line {}: seq {} does not follow {}",
                        self.line_no, ev.seq, prev
                    ))),
                    _ => Ok(ev),
                });
            match &parsed {
                Ok(ev) => self.last_seq = Some(ev.seq),
                Err(_) => self.failed = true,
            }
            return Some(parsed);
        }
    }
}

pub fn parse_event_log<R: BufRead>(reader: R) -> EventLog<R> {
    EventLog::new(reader)
}

/// Parses `p/q`, an integer, or a decimal with a finite expansion.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Ok(if negative { -r } else { r })
}

/// `p/q`, or just `p` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_example_tree() {
        let doc = r#"{"root":1,"edges":[{"child":3,"parent":1},{"child":6,"parent":3},{"child":7,"parent":3}]}"#;
        let t = parse_tree_file(doc).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.height(), 2);
        let t = parse_tree_file(r#"{"root":1,"edges":[]}"#).unwrap();
        assert_eq!(t.len(), 1);
        let t = parse_tree_file(r#"{"root":1}"#).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn tree_file_errors() {
        assert_eq!(
            parse_tree_file(r#"{"root":1,"edges":[{"child":1,"parent":3}]}"#),
            Err(Error::RootHasParent(NodeId(1)))
        );
        let e = parse_tree_file("{\"root\":1,\n\"edges\":[{\"child\":2}]}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_tree_file(r#"{"root":1,"extra":true}"#).is_err());
        assert!(TreeFile::parse(r#"{"root":1,"extra":true}"#, false).is_ok());
        assert!(parse_tree_file(r#"{"root":1,"labels":{"2":"bob"}}"#).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let doc = r#"{"root":1,"edges":[{"child":2,"parent":1}],"labels":{"1":"alice","2":"bob"}}"#;
        let f = TreeFile::parse(doc, true).unwrap();
        assert_eq!(f.labels[&NodeId(2)], "bob");
        assert_eq!(TreeFile::parse(&f.render(), true).unwrap(), f);
    }

    #[test]
    fn event_log_parsing() {
        let log = "{\"seq\":1,\"node\":3,\"parent\":1}\n\n{\"seq\":2,\"node\":6,\"parent\":3}\n{\"seq\":3,\"node\":7,\"parent\":3}\n";
        let evs: Vec<JoinEvent> = parse_event_log(log.as_bytes()).collect::<Result<_>>().unwrap();
        assert_eq!(evs.len(), 3);
        assert_eq!(evs[2], JoinEvent { seq: 3, node: NodeId(7), parent: NodeId(3) });
        assert_eq!(parse_event_log("".as_bytes()).count(), 0);

        let bad = "{\"seq\":2,\"node\":3,\"parent\":1}\n{\"seq\":1,\"node\":6,\"parent\":3}\n";
        let out: Vec<_> = parse_event_log(bad.as_bytes()).collect();
        assert!(out[0].is_ok());
        let e = out[1].as_ref().unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-3/6").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("1000").unwrap(), q(1000, 1));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-.5").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("2.").unwrap(), q(2, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational(".").is_err());
        assert_eq!(format_rational(&q(3500, 3)), "3500/3");
        assert_eq!(format_rational(&q(4, 2)), "2");
    }
}
