//! Per-period burst graphs rebuilt from `S`, their communities, and
//! GraphML / DOT / JSON export.
//!
//! JSON layout (one file per period, `trendnets_<period>.json`):
//!
//! ```json
//! {
//!   "period": 3,
//!   "modularity": 0.41,
//!   "nodes": [{"id": 12, "label": "networks", "community": 0}],
//!   "edges": [{"source": 12, "target": 40, "weight": 0.0123}],
//!   "declines": [{"source": 7, "target": 9, "weight": -0.004}]
//! }
//! ```
//!
//! `edges` holds the strictly positive entries of column `t` of `S`;
//! `declines` holds the negative ones, which are not part of the graph.

pub mod louvain;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::corpus::{VocabularyIndex, WordId};
use crate::coword::PairSeries;
use crate::decomp::DecompositionResult;
use crate::error::{Error, Result};

pub use louvain::{louvain as louvain_partition, LouvainOutcome, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: WordId,
    pub label: String,
    pub community: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: WordId,
    pub target: WordId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstGraph {
    pub period: usize,
    pub modularity: f64,
    /// Sorted by id; every node has at least one edge.
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub declines: Vec<Edge>,
}

impl BurstGraph {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn node_ids(&self) -> BTreeSet<WordId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    fn to_weighted(&self) -> WeightedGraph {
        let index: BTreeMap<WordId, usize> = self.nodes.iter().enumerate().map(|(k, n)| (n.id, k)).collect();
        WeightedGraph::from_edges(
            self.nodes.len(),
            self.edges.iter().map(|e| (index[&e.source], index[&e.target], e.weight)),
        )
    }

    /// Runs Louvain and stores the communities and modularity.
    pub fn cluster(&mut self, seed: Option<u64>) -> LouvainOutcome {
        let out = louvain(self, seed);
        for (node, &c) in self.nodes.iter_mut().zip(&out.assignment) {
            node.community = c;
        }
        self.modularity = out.modularity;
        out
    }

    pub fn set_labels(&mut self, labels: &BTreeMap<WordId, String>) {
        for n in &mut self.nodes {
            if let Some(l) = labels.get(&n.id) {
                n.label = l.clone();
            }
        }
    }
}

/// Builds the graph of period `t` (1-based) from the positive entries of
/// column `t` of `S`. Labels come from `vocab`; communities start as
/// singletons until [`BurstGraph::cluster`] runs.
pub fn extract_graph(
    w: &PairSeries,
    result: &DecompositionResult,
    t: usize,
    vocab: &VocabularyIndex,
) -> Result<BurstGraph> {
    if t == 0 || t > result.periods() {
        return Err(Error::Config(format!(
            "period {t} outside 1..={}",
            result.periods()
        )));
    }
    if result.rows() != w.rows() {
        return Err(Error::Shape {
            expected: format!("{} rows", w.rows()),
            found: result.rows().to_string(),
        });
    }
    let mut edges = Vec::new();
    let mut declines = Vec::new();
    for (r, pair) in w.pairs().iter().enumerate() {
        let v = result.row(r)[t - 1];
        let e = Edge {
            source: pair.i,
            target: pair.j,
            weight: v,
        };
        if v > 0.0 {
            edges.push(e);
        } else if v < 0.0 {
            declines.push(e);
        }
    }
    let ids: BTreeSet<WordId> = edges.iter().flat_map(|e| [e.source, e.target]).collect();
    let nodes = ids
        .into_iter()
        .enumerate()
        .map(|(k, id)| Node {
            id,
            label: vocab.label(id).map_or_else(|| id.to_string(), str::to_string),
            community: k,
        })
        .collect::<Vec<_>>();
    let mut g = BurstGraph {
        period: t,
        modularity: 0.0,
        nodes,
        edges,
        declines,
    };
    let singletons: Vec<usize> = (0..g.nodes.len()).collect();
    g.modularity = g.to_weighted().modularity(&singletons);
    Ok(g)
}

/// Louvain on a burst graph. Assignment is indexed like `graph.nodes`.
pub fn louvain(graph: &BurstGraph, seed: Option<u64>) -> LouvainOutcome {
    louvain_partition(&graph.to_weighted(), seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
    Json,
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Dot => "dot",
            ExportFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// `trendnets_<period>.<ext>`
pub fn export_file_name(period: usize, format: ExportFormat) -> String {
    format!("trendnets_{period}.{}", format.extension())
}

pub fn render(graph: &BurstGraph, format: ExportFormat) -> Result<String> {
    Ok(match format {
        ExportFormat::GraphMl => to_graphml(graph),
        ExportFormat::Dot => to_dot(graph),
        ExportFormat::Json => serde_json::to_string_pretty(graph)? + "\n",
    })
}

/// Writes the graph into `dir` under its standard file name.
pub fn export(graph: &BurstGraph, format: ExportFormat, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let path = dir.as_ref().join(export_file_name(graph.period, format));
    let text = render(graph, format)?;
    let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn to_graphml(g: &BurstGraph) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    s.push_str("  <key id=\"period\" for=\"graph\" attr.name=\"period\" attr.type=\"int\"/>\n");
    s.push_str("  <key id=\"modularity\" for=\"graph\" attr.name=\"modularity\" attr.type=\"double\"/>\n");
    let _ = writeln!(s, "  <graph id=\"trendnets_{}\" edgedefault=\"undirected\">", g.period);
    let _ = writeln!(s, "    <data key=\"period\">{}</data>", g.period);
    let _ = writeln!(s, "    <data key=\"modularity\">{}</data>", g.modularity);
    for n in &g.nodes {
        let _ = writeln!(s, "    <node id=\"n{}\">", n.id);
        let _ = writeln!(s, "      <data key=\"label\">{}</data>", xml_escape(&n.label));
        let _ = writeln!(s, "      <data key=\"community\">{}</data>", n.community);
        s.push_str("    </node>\n");
    }
    for e in &g.edges {
        let _ = writeln!(s, "    <edge source=\"n{}\" target=\"n{}\">", e.source, e.target);
        let _ = writeln!(s, "      <data key=\"weight\">{}</data>", e.weight);
        s.push_str("    </edge>\n");
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn to_dot(g: &BurstGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "graph trendnets_{} {{", g.period);
    let _ = writeln!(s, "  graph [period={}, modularity={}];", g.period, g.modularity);
    for n in &g.nodes {
        let _ = writeln!(
            s,
            "  n{} [label=\"{}\", community={}];",
            n.id,
            dot_escape(&n.label),
            n.community
        );
    }
    for e in &g.edges {
        let _ = writeln!(s, "  n{} -- n{} [weight={}];", e.source, e.target, e.weight);
    }
    s.push_str("}\n");
    s
}

pub fn from_json(text: &str) -> Result<BurstGraph> {
    Ok(serde_json::from_str(text)?)
}

/// Reads back the GraphML written by this module. Declines are not part of
/// the GraphML form and come back empty.
pub fn from_graphml(text: &str) -> Result<BurstGraph> {
    let bad = |m: &str| Error::parse("graphml", 0, m);
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut graph = BurstGraph {
        period: 0,
        modularity: 0.0,
        nodes: Vec::new(),
        edges: Vec::new(),
        declines: Vec::new(),
    };
    let parse_node = |v: &str| -> Result<WordId> {
        v.strip_prefix('n')
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| bad("bad node id"))
    };
    let mut current_key: Option<String> = None;
    // (kind, node or edge under construction)
    let mut node: Option<Node> = None;
    let mut edge: Option<Edge> = None;
    loop {
        match reader.read_event().map_err(|e| bad(&e.to_string()))? {
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"node" => {
                let id = attr(&e, b"id").ok_or_else(|| bad("node without id"))?;
                node = Some(Node {
                    id: parse_node(&id)?,
                    label: String::new(),
                    community: 0,
                });
            }
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"edge" => {
                let src = attr(&e, b"source").ok_or_else(|| bad("edge without source"))?;
                let dst = attr(&e, b"target").ok_or_else(|| bad("edge without target"))?;
                edge = Some(Edge {
                    source: parse_node(&src)?,
                    target: parse_node(&dst)?,
                    weight: 0.0,
                });
            }
            Event::Start(e) if e.name().as_ref() == b"data" => {
                current_key = attr(&e, b"key");
            }
            Event::Text(t) => {
                let value = t.unescape().map_err(|e| bad(&e.to_string()))?.into_owned();
                let num = |v: &str| v.parse::<f64>().map_err(|_| bad("bad number"));
                match (current_key.as_deref(), node.as_mut(), edge.as_mut()) {
                    (Some("label"), Some(n), _) => n.label = value,
                    (Some("community"), Some(n), _) => {
                        n.community = value.parse().map_err(|_| bad("bad community"))?
                    }
                    (Some("weight"), _, Some(e)) => e.weight = num(&value)?,
                    (Some("period"), None, None) => {
                        graph.period = value.parse().map_err(|_| bad("bad period"))?
                    }
                    (Some("modularity"), None, None) => graph.modularity = num(&value)?,
                    _ => {}
                }
            }
            Event::End(e) => match e.name().as_ref() {
                b"data" => current_key = None,
                b"node" => graph.nodes.extend(node.take()),
                b"edge" => graph.edges.extend(edge.take()),
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(graph)
}

fn attr(e: &quick_xml::events::BytesStart<'_>, name: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.as_ref() == name)
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coword::PairKey;
    use crate::decomp::DecompositionResult;

    fn setup(s_col: &[f64]) -> (PairSeries, DecompositionResult, VocabularyIndex) {
        let pairs = vec![PairKey { i: 0, j: 1 }, PairKey { i: 0, j: 2 }, PairKey { i: 1, j: 2 }];
        let w = PairSeries::from_rows(pairs, vec![0.5; 6], 2, 3, vec![10, 10]).unwrap();
        let burst: Vec<f64> = s_col.iter().flat_map(|&v| [0.0, v]).collect();
        let r = DecompositionResult::from_burst(&w, burst, 0.1).unwrap();
        let v = VocabularyIndex::from_counts(
            ["adversari", "learn", "network"].iter().map(|w| (w.to_string(), 1)),
        );
        (w, r, v)
    }

    #[test]
    fn positive_entries_only() {
        let (w, r, v) = setup(&[0.2, -0.1, 0.0]);
        let g = extract_graph(&w, &r, 2, &v).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.declines.len(), 1);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.nodes[0].label, "adversari");
        let empty = extract_graph(&w, &r, 1, &v).unwrap();
        assert!(empty.is_empty() && empty.nodes.is_empty());
        assert!(extract_graph(&w, &r, 3, &v).is_err());
    }

    #[test]
    fn graphml_for_one_edge() {
        let (w, r, v) = setup(&[0.2, 0.0, 0.0]);
        let mut g = extract_graph(&w, &r, 2, &v).unwrap();
        g.cluster(None);
        let xml = render(&g, ExportFormat::GraphMl).unwrap();
        assert_eq!(xml.matches("<node ").count(), 2);
        assert_eq!(xml.matches("key=\"community\"").count(), 2);
        let back = from_graphml(&xml).unwrap();
        assert_eq!(back, BurstGraph { declines: vec![], ..g });
    }

    #[test]
    fn json_round_trip() {
        let (w, r, v) = setup(&[0.2, -0.3, 0.05]);
        let mut g = extract_graph(&w, &r, 2, &v).unwrap();
        g.cluster(Some(1));
        let text = render(&g, ExportFormat::Json).unwrap();
        assert_eq!(from_json(&text).unwrap(), g);
    }

    #[test]
    fn dot_has_attributes() {
        let (w, r, v) = setup(&[0.2, 0.1, 0.0]);
        let mut g = extract_graph(&w, &r, 2, &v).unwrap();
        g.set_labels(&BTreeMap::from([(0, "say \"hi\"".to_string())]));
        g.cluster(None);
        let dot = render(&g, ExportFormat::Dot).unwrap();
        assert!(dot.starts_with("graph trendnets_2 {"));
        assert!(dot.contains("label=\"say \\\"hi\\\"\""));
        assert_eq!(dot.matches("community=").count(), 3);
        assert_eq!(dot.matches(" -- ").count(), 2);
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("svg".parse::<ExportFormat>(), Err(Error::UnknownFormat(_))));
        assert_eq!(export_file_name(4, ExportFormat::Dot), "trendnets_4.dot");
    }
}
