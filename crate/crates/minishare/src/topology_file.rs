//! Line-oriented topology files and topology source strings.
//!
//! ```text
//! # comment
//! nodes 5
//! initiator 1        # optional, defaults to 1
//! p 0.95             # optional default link success probability
//! edge 1 2
//! edge 2 3 p 0.8     # per-link override
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use minishare_core::ctsim::{Edge, Topology, TopologyError};
use minishare_core::NodeId;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::HarnessError;

fn parse_err(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::TopologyParse {
        line,
        message: message.into(),
    }
}

pub fn parse_topology(text: &str) -> Result<Topology, HarnessError> {
    let mut n: Option<usize> = None;
    let mut initiator = NodeId(1);
    let mut default_p = 1.0;
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |w: &str| -> Result<u32, HarnessError> {
            w.parse()
                .map_err(|_| parse_err(line_no, format!("expected a node id, got `{w}`")))
        };
        let prob = |w: &str| -> Result<f64, HarnessError> {
            match w.parse::<f64>() {
                Ok(p) if p > 0.0 && p <= 1.0 => Ok(p),
                _ => Err(parse_err(
                    line_no,
                    format!("probability `{w}` outside (0, 1]"),
                )),
            }
        };
        match words.as_slice() {
            ["nodes", count] => {
                if n.is_some() {
                    return Err(parse_err(line_no, "duplicate `nodes` header"));
                }
                n = Some(num(count)? as usize);
            }
            ["initiator", id] => initiator = NodeId(num(id)?),
            ["p", p] => default_p = prob(p)?,
            ["edge", a, b, rest @ ..] => {
                let nodes = n.ok_or_else(|| parse_err(line_no, "`edge` before `nodes` header"))?;
                let (a, b) = (num(a)?, num(b)?);
                if a == b {
                    return Err(parse_err(line_no, format!("self-loop on node {a}")));
                }
                for id in [a, b] {
                    if id == 0 || id as usize > nodes {
                        return Err(parse_err(line_no, format!("node {id} outside 1..={nodes}")));
                    }
                }
                if !seen.insert((a.min(b), a.max(b))) {
                    return Err(parse_err(line_no, format!("edge {a}-{b} listed twice")));
                }
                let success = match rest {
                    [] => None,
                    ["p", p] => Some(prob(p)?),
                    _ => return Err(parse_err(line_no, "expected `edge <i> <j> [p <prob>]`")),
                };
                edges.push(Edge {
                    a: NodeId(a),
                    b: NodeId(b),
                    success,
                });
            }
            _ => return Err(parse_err(line_no, format!("unrecognised line `{line}`"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(0, "missing `nodes <n>` header"))?;
    Ok(Topology::new(n, edges, default_p, initiator)?)
}

pub fn format_topology(t: &Topology) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {}", t.node_count()).unwrap();
    if t.initiator() != NodeId(1) {
        writeln!(out, "initiator {}", t.initiator()).unwrap();
    }
    if t.default_success() < 1.0 {
        writeln!(out, "p {}", t.default_success()).unwrap();
    }
    for e in t.edges() {
        match e.success {
            Some(p) => writeln!(out, "edge {} {} p {}", e.a, e.b, p).unwrap(),
            None => writeln!(out, "edge {} {}", e.a, e.b).unwrap(),
        }
    }
    out
}

/// Where a topology comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySource {
    Preset(String),
    /// `rgg:n=<nodes>,radius=<r>,seed=<s>`
    Geometric {
        n: usize,
        radius: f64,
        seed: u64,
    },
    /// `line:<n>`, `star:<n>`, `complete:<n>`
    Line(usize),
    Star(usize),
    Complete(usize),
    File(String),
}

impl TopologySource {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let bad = |why: &str| HarnessError::Config(format!("topology `{text}`: {why}"));
        if Topology::preset_names().any(|p| p == text) {
            return Ok(TopologySource::Preset(text.to_string()));
        }
        if let Some(params) = text.strip_prefix("rgg:") {
            let (mut n, mut radius, mut seed) = (None, None, 0u64);
            for kv in params.split(',') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| bad("expected key=value"))?;
                match k.trim() {
                    "n" => n = Some(v.trim().parse().map_err(|_| bad("bad n"))?),
                    "radius" => radius = Some(v.trim().parse().map_err(|_| bad("bad radius"))?),
                    "seed" => seed = v.trim().parse().map_err(|_| bad("bad seed"))?,
                    other => return Err(bad(&format!("unknown parameter `{other}`"))),
                }
            }
            return Ok(TopologySource::Geometric {
                n: n.ok_or_else(|| bad("missing n"))?,
                radius: radius.ok_or_else(|| bad("missing radius"))?,
                seed,
            });
        }
        for (prefix, make) in [
            ("line:", TopologySource::Line as fn(usize) -> TopologySource),
            ("star:", TopologySource::Star),
            ("complete:", TopologySource::Complete),
        ] {
            if let Some(count) = text.strip_prefix(prefix) {
                let n = count.parse().map_err(|_| bad("bad node count"))?;
                return Ok(make(n));
            }
        }
        Ok(TopologySource::File(text.to_string()))
    }

    /// Resolves relative file paths against `base` when given.
    pub fn load(&self, base: Option<&Path>) -> Result<Topology, HarnessError> {
        let shaped = |n: usize, f: fn(usize) -> Topology| {
            if n == 0 {
                Err(HarnessError::Topology(TopologyError::NoNodes))
            } else {
                Ok(f(n))
            }
        };
        match self {
            TopologySource::Preset(name) => Ok(Topology::preset(name)?),
            TopologySource::Geometric { n, radius, seed } => Ok(Topology::random_geometric(
                *n,
                *radius,
                &mut ChaCha8Rng::seed_from_u64(*seed),
            )?),
            TopologySource::Line(n) => shaped(*n, Topology::line),
            TopologySource::Star(n) => shaped(*n, Topology::star),
            TopologySource::Complete(n) => shaped(*n, Topology::complete),
            TopologySource::File(path) => {
                let path = match base {
                    Some(dir) if Path::new(path).is_relative() => dir.join(path),
                    _ => Path::new(path).to_path_buf(),
                };
                let text = std::fs::read_to_string(&path).map_err(|source| HarnessError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                parse_topology(&text)
            }
        }
    }
}
