//! Field-of-study taxonomy: a multi-parent DAG whose nodes carry search keywords.
//!
//! Taxonomies are read from a plain-text block format:
//!
//! ```text
//! # comments start with '#'
//! [field]
//! id = machine-translation
//! name = Machine Translation
//! parents = multilinguality, text-generation
//! keywords = machine translation, neural machine translation
//! description = Translating text between natural languages.
//! ```
//!
//! `parents` is a comma-separated id list (empty or absent for roots) and
//! `keywords` a comma-separated phrase list. Keywords are stored lowercase.
//! `description` is optional. Blocks may appear in any order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::Read;

use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

const DEFAULT_TAXONOMY: &str = include_str!("../data/nlp_taxonomy.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldOfStudy {
    pub id: String,
    pub display_name: String,
    pub keywords: Vec<String>,
    pub description: Option<String>,
}

impl FieldOfStudy {
    /// Keywords are trimmed and lowercased.
    pub fn new<I, S>(id: impl Into<String>, display_name: impl Into<String>, keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        FieldOfStudy {
            id: id.into(),
            display_name: display_name.into(),
            keywords: keywords
                .into_iter()
                .map(|k| k.as_ref().trim().to_lowercase())
                .collect(),
            description: None,
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }
}

/// A problem found by [`Taxonomy::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyId,
    DuplicateId(String),
    UnknownNode {
        parent: String,
        child: String,
        missing: String,
    },
    Cycle(Vec<String>),
    LeafWithoutKeywords(String),
    EmptyKeyword(String),
    Unreachable(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => write!(f, "node with empty id"),
            Violation::DuplicateId(id) => write!(f, "duplicate node id {id}"),
            Violation::UnknownNode {
                parent,
                child,
                missing,
            } => write!(f, "unknown node {missing} in edge {parent} -> {child}"),
            Violation::Cycle(ids) => write!(f, "cycle through {}", ids.join(", ")),
            Violation::LeafWithoutKeywords(id) => write!(f, "leaf without keywords: {id}"),
            Violation::EmptyKeyword(id) => write!(f, "empty keyword in node {id}"),
            Violation::Unreachable(id) => write!(f, "node {id} is not reachable from any root"),
        }
    }
}

/// Immutable field-of-study DAG.
///
/// Nodes are kept sorted by id so that every query and serialization is
/// independent of the order in which the source declared them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    nodes: Vec<FieldOfStudy>,
    index: BTreeMap<String, usize>,
    edges: BTreeSet<(String, String)>,
    parents: BTreeMap<String, BTreeSet<String>>,
    children: BTreeMap<String, BTreeSet<String>>,
}

impl Taxonomy {
    /// Builds a taxonomy without checking invariants; see [`Taxonomy::validate`].
    ///
    /// Edges are `(parent, child)` pairs.
    pub fn new(
        mut nodes: Vec<FieldOfStudy>,
        edges: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            index.entry(n.id.clone()).or_insert(i);
        }
        let edges: BTreeSet<(String, String)> = edges.into_iter().collect();
        let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut children: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (p, c) in &edges {
            if index.contains_key(p) && index.contains_key(c) {
                parents.entry(c.clone()).or_default().insert(p.clone());
                children.entry(p.clone()).or_default().insert(c.clone());
            }
        }
        Taxonomy {
            nodes,
            index,
            edges,
            parents,
            children,
        }
    }

    /// Parses and validates a taxonomy file.
    pub fn parse(src: &str) -> Result<Self> {
        let (nodes, edges) = parse_blocks(src)?;
        let t = Taxonomy::new(nodes, edges);
        let violations = t.validate();
        if violations.is_empty() {
            Ok(t)
        } else {
            Err(Error::Validation(violations))
        }
    }

    pub fn load<R: Read>(mut reader: R) -> Result<Self> {
        let mut buf = Vec::new();
        reader.read_to_end(&mut buf)?;
        let src = std::str::from_utf8(&buf).map_err(|e| Error::Encoding {
            offset: e.valid_up_to(),
        })?;
        Self::parse(src)
    }

    /// The bundled transcription of the NLP field-of-study taxonomy.
    pub fn default_nlp() -> Self {
        Self::parse(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }

    pub fn default_nlp_source() -> &'static str {
        DEFAULT_TAXONOMY
    }

    pub fn nodes(&self) -> &[FieldOfStudy] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&FieldOfStudy> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn parents_of(&self, id: &str) -> impl Iterator<Item = &str> {
        self.parents
            .get(id)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn children_of(&self, id: &str) -> impl Iterator<Item = &str> {
        self.children
            .get(id)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn roots(&self) -> BTreeSet<&str> {
        self.ids()
            .filter(|id| !self.parents.contains_key(*id))
            .collect()
    }

    pub fn leaves(&self) -> BTreeSet<&str> {
        self.ids()
            .filter(|id| !self.children.contains_key(*id))
            .collect()
    }

    /// Transitive closure over parent edges, excluding `id` itself.
    pub fn ancestors(&self, id: &str) -> Result<BTreeSet<&str>> {
        if !self.contains(id) {
            return Err(Error::UnknownField(id.to_string()));
        }
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&str> = self.parents_of(id).collect();
        while let Some(p) = queue.pop_front() {
            if seen.insert(p) {
                queue.extend(self.parents_of(p));
            }
        }
        seen.remove(id);
        Ok(seen)
    }

    /// Returns every invariant violation; empty iff the taxonomy is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if n.id.trim().is_empty() {
                out.push(Violation::EmptyId);
            } else if !seen.insert(n.id.as_str()) {
                out.push(Violation::DuplicateId(n.id.clone()));
            }
        }

        for (p, c) in &self.edges {
            for end in [p, c] {
                if !self.contains(end) {
                    out.push(Violation::UnknownNode {
                        parent: p.clone(),
                        child: c.clone(),
                        missing: end.clone(),
                    });
                }
            }
        }

        let mut graph = DiGraph::<&str, ()>::new();
        let handles: BTreeMap<&str, _> = self.ids().map(|id| (id, graph.add_node(id))).collect();
        for (p, children) in &self.children {
            for c in children {
                graph.add_edge(handles[p.as_str()], handles[c.as_str()], ());
            }
        }
        let mut cycles: Vec<Vec<String>> = petgraph::algo::tarjan_scc(&graph)
            .into_iter()
            .filter(|scc| scc.len() > 1 || graph.contains_edge(scc[0], scc[0]))
            .map(|scc| {
                let mut ids: Vec<String> = scc.iter().map(|&h| graph[h].to_string()).collect();
                ids.sort();
                ids
            })
            .collect();
        cycles.sort();
        out.extend(cycles.into_iter().map(Violation::Cycle));

        for n in &self.nodes {
            if n.keywords.iter().any(|k| k.trim().is_empty()) {
                out.push(Violation::EmptyKeyword(n.id.clone()));
            }
        }
        let leaves = self.leaves();
        for n in &self.nodes {
            if leaves.contains(n.id.as_str()) && n.keywords.is_empty() && !n.id.is_empty() {
                out.push(Violation::LeafWithoutKeywords(n.id.clone()));
            }
        }

        let mut reached: BTreeSet<&str> = BTreeSet::new();
        let mut queue: VecDeque<&str> = self.roots().into_iter().collect();
        while let Some(id) = queue.pop_front() {
            if reached.insert(id) {
                queue.extend(self.children_of(id));
            }
        }
        for id in self.ids() {
            if !reached.contains(id) {
                out.push(Violation::Unreachable(id.to_string()));
            }
        }
        out
    }

    /// Canonical text form: blocks sorted by id, parents sorted, fixed key order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let parents: Vec<&str> = self.parents_of(&n.id).collect();
            s.push_str("[field]\n");
            s.push_str(&format!("id = {}\n", n.id));
            s.push_str(&format!("name = {}\n", n.display_name));
            s.push_str(&format!("parents = {}\n", parents.join(", ")));
            s.push_str(&format!("keywords = {}\n", n.keywords.join(", ")));
            if let Some(d) = &n.description {
                s.push_str(&format!("description = {d}\n"));
            }
        }
        s
    }
}

type Blocks = (Vec<FieldOfStudy>, Vec<(String, String)>);

#[derive(Default)]
struct Block {
    line: usize,
    id: Option<String>,
    name: Option<String>,
    parents: Vec<String>,
    keywords: Vec<String>,
    description: Option<String>,
    seen: BTreeSet<String>,
}

fn parse_blocks(src: &str) -> Result<Blocks> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut current: Option<Block> = None;

    let err = |line: usize, column: usize, message: String| Error::Parse {
        line,
        column,
        message,
    };

    let mut finish = |b: Block, nodes: &mut Vec<FieldOfStudy>| -> Result<()> {
        let id = b
            .id
            .ok_or_else(|| err(b.line, 1, "field block without `id`".into()))?;
        let name = b
            .name
            .ok_or_else(|| err(b.line, 1, format!("field block `{id}` without `name`")))?;
        for p in b.parents {
            edges.push((p, id.clone()));
        }
        let mut f = FieldOfStudy::new(id, name, b.keywords);
        f.description = b.description;
        nodes.push(f);
        Ok(())
    };

    for (i, raw) in src.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if line != "[field]" {
                return Err(err(lineno, 1, format!("unknown block header `{line}`")));
            }
            if let Some(b) = current.take() {
                finish(b, &mut nodes)?;
            }
            current = Some(Block {
                line: lineno,
                ..Block::default()
            });
            continue;
        }
        let Some(block) = current.as_mut() else {
            return Err(err(lineno, 1, "key outside of a [field] block".into()));
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(lineno, 1, "expected `key = value`".into()));
        };
        let key = key.trim();
        let value = value.trim();
        if !block.seen.insert(key.to_string()) {
            return Err(err(lineno, 1, format!("duplicate key `{key}`")));
        }
        let list = |v: &str| -> Vec<String> {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        };
        match key {
            "id" => block.id = Some(value.to_string()),
            "name" => block.name = Some(value.to_string()),
            "parents" => block.parents = list(value),
            "keywords" => block.keywords = list(value),
            "description" => block.description = Some(value.to_string()),
            other => {
                let column = raw.find(other).unwrap_or(0) + 1;
                return Err(err(lineno, column, format!("unknown key `{other}`")));
            }
        }
    }
    if let Some(b) = current.take() {
        finish(b, &mut nodes)?;
    }
    Ok((nodes, edges))
}
