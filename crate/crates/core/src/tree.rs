//! Trees with a distinguished set of leaves, and their doubled quivers.
//!
//! A tree is given on the vertex labels `1..=n`. Input comes either in a
//! line-based text form
//!
//! ```text
//! # path 1 - 2 - 3 with the leaf 3 marked
//! vertices 3
//! edge 1 2
//! edge 2 3
//! special 3
//! ```
//!
//! or as a JSON object `{"n": 3, "edges": [[1, 2], [2, 3]], "S": [3]}`.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Where in the input a problem was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    JsonEdge(usize),
    JsonSpecial(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(l) => write!(f, "line {l}"),
            Location::JsonEdge(i) => write!(f, "edges[{i}]"),
            Location::JsonSpecial(i) => write!(f, "S[{i}]"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{at}: duplicate edge {{{a}, {b}}}")]
    DuplicateEdge { at: Location, a: usize, b: usize },
    #[error("{at}: vertex label {label} is outside 1..={n}")]
    LabelOutOfRange { at: Location, label: usize, n: usize },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("vertex label {label} is outside 1..={n}")]
    LabelOutOfRange { label: usize, n: usize },
    #[error("a tree needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("special vertex {0} is not a leaf")]
    SpecialNotLeaf(usize),
    #[error("n = 2 with no special leaf gives an infinite-dimensional algebra")]
    InfiniteDimensional,
}

/// Unvalidated description of a tree `T` on `1..=n` together with the set `S`.
///
/// Edges are stored as normalized pairs `(min, max)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeInstance {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    special: BTreeSet<usize>,
}

impl TreeInstance {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        special: impl IntoIterator<Item = usize>,
    ) -> Self {
        TreeInstance {
            n,
            edges: edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect(),
            special: special.into_iter().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn special(&self) -> &BTreeSet<usize> {
        &self.special
    }

    /// Canonical text form; [`parse_tree_spec`] inverts it.
    pub fn emit(&self) -> String {
        let mut out = format!("vertices {}\n", self.n);
        for (a, b) in &self.edges {
            out.push_str(&format!("edge {a} {b}\n"));
        }
        if !self.special.is_empty() {
            let labels: Vec<String> = self.special.iter().map(|s| s.to_string()).collect();
            out.push_str(&format!("special {}\n", labels.join(" ")));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TreeJson {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            special: self.special.iter().copied().collect(),
        })
        .expect("tree json is always serializable")
    }

    fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(rename = "S", default)]
    special: Vec<usize>,
}

/// Parses the text grammar or, if the first non-blank character is `{`, the
/// JSON mirror. Only syntax, label ranges and duplicates are checked here.
pub fn parse_tree_spec(text: &str) -> Result<TreeInstance, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

fn parse_json(text: &str) -> Result<TreeInstance, ParseError> {
    let raw: TreeJson = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let n = raw.n;
    let mut edges = BTreeSet::new();
    for (idx, [a, b]) in raw.edges.iter().copied().enumerate() {
        let at = Location::JsonEdge(idx);
        for label in [a, b] {
            if label < 1 || label > n {
                return Err(ParseError::LabelOutOfRange { at, label, n });
            }
        }
        if !edges.insert((a.min(b), a.max(b))) {
            return Err(ParseError::DuplicateEdge { at, a, b });
        }
    }
    let mut special = BTreeSet::new();
    for (idx, s) in raw.special.iter().copied().enumerate() {
        let at = Location::JsonSpecial(idx);
        if s < 1 || s > n {
            return Err(ParseError::LabelOutOfRange { at, label: s, n });
        }
        if !special.insert(s) {
            return Err(ParseError::Syntax {
                line: 1,
                column: 1,
                message: format!("duplicate special vertex {s}"),
            });
        }
    }
    Ok(TreeInstance { n, edges, special })
}

/// Whitespace-separated tokens of a line with their 1-based start columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_text(text: &str) -> Result<TreeInstance, ParseError> {
    let mut n: Option<usize> = None;
    let mut edges = BTreeSet::new();
    let mut special: Option<BTreeSet<usize>> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(&(col, directive)) = toks.first() else {
            continue;
        };
        let syntax = |column: usize, message: String| ParseError::Syntax {
            line: line_no,
            column,
            message,
        };
        let number = |(column, tok): (usize, &str)| {
            tok.parse::<usize>()
                .map_err(|_| syntax(column, format!("expected a non-negative integer, found `{tok}`")))
        };
        let label = |(column, tok): (usize, &str), n: usize| {
            let v = number((column, tok))?;
            if v < 1 || v > n {
                Err(ParseError::LabelOutOfRange {
                    at: Location::Line(line_no),
                    label: v,
                    n,
                })
            } else {
                Ok(v)
            }
        };

        match directive {
            "vertices" => {
                if n.is_some() {
                    return Err(syntax(col, "`vertices` given twice".into()));
                }
                if toks.len() != 2 {
                    return Err(syntax(col, "expected `vertices <n>`".into()));
                }
                n = Some(number(toks[1])?);
            }
            "edge" => {
                let Some(n) = n else {
                    return Err(syntax(col, "`vertices` must come before `edge`".into()));
                };
                if toks.len() != 3 {
                    return Err(syntax(col, "expected `edge <i> <j>`".into()));
                }
                let a = label(toks[1], n)?;
                let b = label(toks[2], n)?;
                if !edges.insert((a.min(b), a.max(b))) {
                    return Err(ParseError::DuplicateEdge {
                        at: Location::Line(line_no),
                        a,
                        b,
                    });
                }
            }
            "special" => {
                let Some(n) = n else {
                    return Err(syntax(col, "`vertices` must come before `special`".into()));
                };
                if special.is_some() {
                    return Err(syntax(col, "`special` given twice".into()));
                }
                if toks.len() < 2 {
                    return Err(syntax(col, "expected `special <i> [<j> ...]`".into()));
                }
                let mut set = BTreeSet::new();
                for &tok in &toks[1..] {
                    let v = label(tok, n)?;
                    if !set.insert(v) {
                        return Err(syntax(tok.0, format!("duplicate special vertex {v}")));
                    }
                }
                special = Some(set);
            }
            other => return Err(syntax(col, format!("unknown directive `{other}`"))),
        }
    }

    let Some(n) = n else {
        return Err(ParseError::Syntax {
            line: text.lines().count().max(1),
            column: 1,
            message: "missing `vertices <n>` directive".into(),
        });
    };
    Ok(TreeInstance {
        n,
        edges,
        special: special.unwrap_or_default(),
    })
}

/// A tree instance that satisfies every structural invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidatedInstance {
    inner: TreeInstance,
    adjacency: Vec<Vec<usize>>,
}

pub fn validate(inst: TreeInstance) -> Result<ValidatedInstance, ValidationError> {
    let n = inst.n;
    for &(a, b) in &inst.edges {
        for label in [a, b] {
            if label < 1 || label > n {
                return Err(ValidationError::LabelOutOfRange { label, n });
            }
        }
    }
    if let Some(&s) = inst.special.iter().find(|&&s| s < 1 || s > n) {
        return Err(ValidationError::LabelOutOfRange { label: s, n });
    }
    if n < 2 {
        return Err(ValidationError::TooFewVertices(n));
    }
    if let Some(&(a, _)) = inst.edges.iter().find(|&&(a, b)| a == b) {
        return Err(ValidationError::NotATree(format!("loop at vertex {a}")));
    }
    if inst.edges.len() != n - 1 {
        return Err(ValidationError::NotATree(format!(
            "expected {} edges, found {}",
            n - 1,
            inst.edges.len()
        )));
    }

    let mut adjacency = vec![Vec::new(); n + 1];
    for &(a, b) in &inst.edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    // n - 1 edges and connected means acyclic.
    let mut seen = vec![false; n + 1];
    let mut stack = vec![1];
    seen[1] = true;
    while let Some(v) = stack.pop() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if let Some(v) = (1..=n).find(|&v| !seen[v]) {
        return Err(ValidationError::NotATree(format!(
            "vertex {v} is not connected to vertex 1"
        )));
    }

    if let Some(&s) = inst.special.iter().find(|&&s| inst.degree(s) != 1) {
        return Err(ValidationError::SpecialNotLeaf(s));
    }
    if n == 2 && inst.special.is_empty() {
        return Err(ValidationError::InfiniteDimensional);
    }
    Ok(ValidatedInstance { inner: inst, adjacency })
}

impl ValidatedInstance {
    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn instance(&self) -> &TreeInstance {
        &self.inner
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.inner.edges
    }

    pub fn special(&self) -> &BTreeSet<usize> {
        &self.inner.special
    }

    pub fn is_special(&self, v: usize) -> bool {
        self.inner.special.contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn leaves(&self) -> BTreeSet<usize> {
        (1..=self.n()).filter(|&v| self.adjacency[v].len() == 1).collect()
    }

    /// `true` when `S` is empty or all of `V`.
    pub fn special_is_trivial(&self) -> bool {
        self.inner.special.is_empty() || self.inner.special.len() == self.n()
    }

    /// Short human-readable name, e.g. `n=3 edges=[1-2,2-3] S={3}`.
    pub fn label(&self) -> String {
        let edges: Vec<String> = self.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let special: Vec<String> = self.special().iter().map(|s| s.to_string()).collect();
        format!("n={} edges=[{}] S={{{}}}", self.n(), edges.join(","), special.join(","))
    }
}

/// An arrow `source -> target` of the doubled quiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    pub vertices: usize,
    /// Sorted by `(source, target)`.
    pub arrows: Vec<Arrow>,
}

pub fn doubled_quiver(inst: &ValidatedInstance) -> Quiver {
    let mut arrows: Vec<Arrow> = inst
        .edges()
        .iter()
        .flat_map(|&(a, b)| [Arrow { source: a, target: b }, Arrow { source: b, target: a }])
        .collect();
    arrows.sort();
    Quiver {
        vertices: inst.n(),
        arrows,
    }
}

/// Uniformly shaped random tree on `n` vertices (random attachment, then a
/// random relabelling) with a random subset of leaves marked special.
/// Resamples `S` in the excluded case `n = 2, S = ∅`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ValidatedInstance {
    assert!(n >= 2, "random trees need n >= 2");
    let mut labels: Vec<usize> = (1..=n).collect();
    labels.shuffle(rng);
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (labels[rng.gen_range(0..v)], labels[v])).collect();
    let mut degree = vec![0usize; n + 1];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    loop {
        let special: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1 && rng.gen_bool(0.5)).collect();
        if n == 2 && special.is_empty() {
            continue;
        }
        return validate(TreeInstance::new(n, edges.iter().copied(), special)).expect("generated tree is valid");
    }
}
