//! Graphs, plane trees, Halin and k-cycle tree inputs, generators and JSON I/O.
//!
//! Vertices are dense indices `0..n` in declaration order; labels are opaque
//! strings. Edges are stored as normalized `(lo, hi)` index pairs.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Undirected edge as a normalized index pair (smaller index first).
pub type Edge = (usize, usize);
pub type EdgeSet = BTreeSet<Edge>;

/// Normalize an unordered vertex pair.
pub fn norm(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("loop edge at `{0}`")]
    Loop(String),
    #[error("parallel edge `{0}`-`{1}`")]
    ParallelEdge(String, String),
    #[error("edge endpoint `{0}` is not a declared vertex")]
    DanglingEndpoint(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Build from labels and index pairs. Edges end up canonically sorted.
    pub fn new(
        labels: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Graph, GraphError> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        let n = labels.len();
        let mut set = EdgeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::DanglingEndpoint(format!("#{}", u.max(v))));
            }
            if u == v {
                return Err(GraphError::Loop(labels[u].clone()));
            }
            if !set.insert(norm(u, v)) {
                return Err(GraphError::ParallelEdge(labels[u].clone(), labels[v].clone()));
            }
        }
        let edges: Vec<Edge> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        Ok(Graph { labels, index, edges, adj })
    }

    /// Build from string labels.
    pub fn from_labels(vertices: &[&str], edges: &[(&str, &str)]) -> Result<Graph, GraphError> {
        let labels: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
        let mut pos = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if pos.insert(l.as_str(), i).is_some() {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        let mut idx = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let u = *pos.get(a).ok_or_else(|| GraphError::DanglingEndpoint(a.to_string()))?;
            let v = *pos.get(b).ok_or_else(|| GraphError::DanglingEndpoint(b.to_string()))?;
            idx.push((u, v));
        }
        Graph::new(labels, idx)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges.iter().copied().collect()
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&norm(u, v)).ok()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edge_id(u, v).is_some()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Render an edge with labels, e.g. `v-a`.
    pub fn edge_name(&self, e: Edge) -> String {
        format!("{}-{}", self.labels[e.0], self.labels[e.1])
    }

    /// Same vertices plus extra edges (duplicates of existing edges ignored).
    pub fn with_edges(&self, extra: &EdgeSet) -> Result<Graph, GraphError> {
        let mut all = self.edge_set();
        all.extend(extra.iter().copied());
        Graph::new(self.labels.clone(), all)
    }

    /// Append new vertices and add edges over the enlarged index range.
    pub fn with_vertices(&self, new_labels: &[String], extra: &EdgeSet) -> Result<Graph, GraphError> {
        let mut labels = self.labels.clone();
        labels.extend(new_labels.iter().cloned());
        let mut all = self.edge_set();
        all.extend(extra.iter().copied());
        Graph::new(labels, all)
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        q.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Canonical JSON document.
    pub fn to_json(&self) -> serde_json::Value {
        GraphDoc::from_graph(self).to_value()
    }
}

/// Adjacency lists restricted to an edge set.
pub fn adjacency(n: usize, edges: &EdgeSet) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    adj
}

/// JSON graph document; optional fields carry Halin and k-cycle annotations.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_edges: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_edges: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_levels: Option<Vec<Vec<[String; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_roots: Option<Vec<String>>,
}

impl GraphDoc {
    pub fn from_graph(g: &Graph) -> GraphDoc {
        GraphDoc {
            vertices: g.labels.clone(),
            edges: pairs(g, g.edges.iter().copied()),
            ..GraphDoc::default()
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graph document serializes")
    }

    /// Resolve a labelled pair list against `g`.
    pub fn resolve(g: &Graph, list: &[[String; 2]]) -> Result<Vec<(usize, usize)>, GraphError> {
        list.iter()
            .map(|[a, b]| {
                let u = g.vertex(a).ok_or_else(|| GraphError::DanglingEndpoint(a.clone()))?;
                let v = g.vertex(b).ok_or_else(|| GraphError::DanglingEndpoint(b.clone()))?;
                Ok((u, v))
            })
            .collect()
    }
}

fn pairs(g: &Graph, it: impl Iterator<Item = (usize, usize)>) -> Vec<[String; 2]> {
    it.map(|(u, v)| [g.labels[u].clone(), g.labels[v].clone()]).collect()
}

/// Parse a graph document, returning the document as well so callers can read
/// the optional annotations.
pub fn parse_graph_doc(text: &str) -> Result<(Graph, GraphDoc), GraphError> {
    let doc: GraphDoc =
        serde_json::from_str(text).map_err(|e| GraphError::MalformedJson(e.to_string()))?;
    let g = graph_from_doc(&doc)?;
    Ok((g, doc))
}

/// Check and build the plain graph of an already deserialized document.
pub fn graph_from_doc(doc: &GraphDoc) -> Result<Graph, GraphError> {
    let mut seen = HashMap::new();
    for (i, l) in doc.vertices.iter().enumerate() {
        if seen.insert(l.as_str(), i).is_some() {
            return Err(GraphError::DuplicateVertex(l.clone()));
        }
    }
    let mut idx = Vec::with_capacity(doc.edges.len());
    let mut set = EdgeSet::new();
    for [a, b] in &doc.edges {
        let u = *seen.get(a.as_str()).ok_or_else(|| GraphError::DanglingEndpoint(a.clone()))?;
        let v = *seen.get(b.as_str()).ok_or_else(|| GraphError::DanglingEndpoint(b.clone()))?;
        if u == v {
            return Err(GraphError::Loop(a.clone()));
        }
        if !set.insert(norm(u, v)) {
            return Err(GraphError::ParallelEdge(a.clone(), b.clone()));
        }
        idx.push((u, v));
    }
    Graph::new(doc.vertices.clone(), idx)
}

/// Parse and validate a graph JSON document.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    parse_graph_doc(text).map(|(g, _)| g)
}

/// Canonical serialization.
pub fn serialize_graph(g: &Graph) -> String {
    serde_json::to_string(&g.to_json()).expect("serializable")
}

// ---------------------------------------------------------------------------
// Plane trees and Halin inputs

/// Rooted tree with an ordered child list per vertex (the rotation).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneTree {
    pub labels: Vec<String>,
    pub root: usize,
    pub children: Vec<Vec<usize>>,
}

impl PlaneTree {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Check that child lists partition the non-root vertices and reach all.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.n();
        if self.children.len() != n || self.root >= n {
            return Err(GraphError::Invalid("child table does not match vertex count".into()));
        }
        let mut has_parent = vec![false; n];
        for ch in &self.children {
            for &c in ch {
                if c >= n || c == self.root || has_parent[c] {
                    return Err(GraphError::Invalid("child lists do not partition non-root vertices".into()));
                }
                has_parent[c] = true;
            }
        }
        if self.preorder().len() != n {
            return Err(GraphError::Invalid("tree is not connected from its root".into()));
        }
        Ok(())
    }

    /// Depth-first preorder following the rotation.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        let mut stack = vec![self.root];
        let mut seen = vec![false; self.n()];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            out.push(v);
            for &c in self.children[v].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Leaves in rotation order.
    pub fn leaves(&self) -> Vec<usize> {
        self.preorder().into_iter().filter(|&v| self.children[v].is_empty()).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in self.preorder() {
            for &c in &self.children[v] {
                out.push((v, c));
            }
        }
        out
    }
}

/// A Halin graph with its tree/cycle partition and a root leaf.
///
/// `cycle` lists the leaves in cycle direction starting at `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalinInput {
    pub graph: Graph,
    pub tree_edges: EdgeSet,
    pub cycle_edges: EdgeSet,
    pub root: usize,
    pub cycle: Vec<usize>,
}

impl HalinInput {
    /// Assemble from an annotated graph. Cycle direction goes from the root to
    /// `first_step` when given, else to its lower-indexed cycle neighbour.
    pub fn new(
        graph: Graph,
        tree_edges: EdgeSet,
        cycle_edges: EdgeSet,
        root: usize,
        first_step: Option<usize>,
    ) -> Result<HalinInput, GraphError> {
        let cycle = trace_cycle(graph.n(), &cycle_edges, root, first_step)?;
        let h = HalinInput { graph, tree_edges, cycle_edges, root, cycle };
        h.validate()?;
        Ok(h)
    }

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<(), GraphError> {
        let g = &self.graph;
        let n = g.n();
        let all = g.edge_set();
        if !self.tree_edges.is_disjoint(&self.cycle_edges)
            || self.tree_edges.union(&self.cycle_edges).copied().collect::<EdgeSet>() != all
        {
            return Err(GraphError::Invalid("tree and cycle edges must partition the edge set".into()));
        }
        if !is_spanning_tree(n, &self.tree_edges) {
            return Err(GraphError::Invalid("tree edges do not form a spanning tree".into()));
        }
        let tadj = adjacency(n, &self.tree_edges);
        if let Some(v) = (0..n).find(|&v| tadj[v].len() == 2) {
            return Err(GraphError::Invalid(format!("tree vertex `{}` has degree two", g.label(v))));
        }
        let leaves: BTreeSet<usize> = (0..n).filter(|&v| tadj[v].len() == 1).collect();
        let on_cycle: BTreeSet<usize> = self.cycle.iter().copied().collect();
        if leaves != on_cycle || self.cycle.len() != self.cycle_edges.len() || leaves.len() < 3 {
            return Err(GraphError::Invalid("cycle must pass through exactly the tree leaves".into()));
        }
        if self.cycle.first() != Some(&self.root) || !leaves.contains(&self.root) {
            return Err(GraphError::Invalid("root must be a tree leaf".into()));
        }
        Ok(())
    }

    /// Canonical annotated document; cycle edges listed in cycle direction.
    pub fn to_doc(&self) -> GraphDoc {
        let g = &self.graph;
        let mut doc = GraphDoc::from_graph(g);
        doc.tree_edges = Some(pairs(g, self.tree_edges.iter().copied()));
        doc.cycle_edges = Some(pairs(g, cycle_pairs(&self.cycle).into_iter()));
        doc.root = Some(g.label(self.root).to_string());
        doc
    }

    /// Read from an annotated document; the first listed cycle edge fixes the
    /// direction when it starts at the root.
    pub fn from_doc(g: Graph, doc: &GraphDoc) -> Result<HalinInput, GraphError> {
        let missing = |f: &str| GraphError::Invalid(format!("Halin input needs `{f}`"));
        let tree = GraphDoc::resolve(&g, doc.tree_edges.as_ref().ok_or_else(|| missing("tree_edges"))?)?;
        let cyc = GraphDoc::resolve(&g, doc.cycle_edges.as_ref().ok_or_else(|| missing("cycle_edges"))?)?;
        let root_label = doc.root.as_ref().ok_or_else(|| missing("root"))?;
        let root = g.vertex(root_label).ok_or_else(|| GraphError::DanglingEndpoint(root_label.clone()))?;
        let first_step = cyc.first().and_then(|&(a, b)| (a == root).then_some(b));
        let tree_edges = tree.into_iter().map(|(u, v)| norm(u, v)).collect();
        let cycle_edges = cyc.into_iter().map(|(u, v)| norm(u, v)).collect();
        HalinInput::new(g, tree_edges, cycle_edges, root, first_step)
    }
}

/// Consecutive pairs of a cyclic sequence, closing last to first.
pub fn cycle_pairs(seq: &[usize]) -> Vec<(usize, usize)> {
    (0..seq.len()).map(|i| (seq[i], seq[(i + 1) % seq.len()])).collect()
}

fn trace_cycle(
    n: usize,
    cycle_edges: &EdgeSet,
    start: usize,
    first_step: Option<usize>,
) -> Result<Vec<usize>, GraphError> {
    let adj = adjacency(n, cycle_edges);
    let bad = || GraphError::Invalid("cycle edges do not form a single cycle through the root".into());
    if start >= n || adj[start].len() != 2 {
        return Err(bad());
    }
    let next = match first_step {
        Some(w) if adj[start].contains(&w) => w,
        Some(_) => return Err(bad()),
        None => adj[start][0],
    };
    let mut seq = vec![start];
    let (mut prev, mut cur) = (start, next);
    while cur != start {
        if adj[cur].len() != 2 || seq.len() > cycle_edges.len() {
            return Err(bad());
        }
        seq.push(cur);
        let nxt = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        prev = cur;
        cur = nxt;
    }
    if seq.len() != cycle_edges.len() || seq.len() < 3 {
        return Err(bad());
    }
    Ok(seq)
}

/// True when `edges` is a spanning tree on `n` vertices.
pub fn is_spanning_tree(n: usize, edges: &EdgeSet) -> bool {
    if n == 0 {
        return edges.is_empty();
    }
    edges.len() + 1 == n && is_forest(n, edges) && {
        let adj = adjacency(n, edges);
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut cnt = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    cnt += 1;
                    stack.push(w);
                }
            }
        }
        cnt == n
    }
}

/// True when `edges` is acyclic.
pub fn is_forest(n: usize, edges: &EdgeSet) -> bool {
    let mut dsu = Dsu::new(n);
    edges.iter().all(|&(u, v)| dsu.union(u, v))
}

/// Small union-find.
#[derive(Clone, Debug)]
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Dsu {
        Dsu { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let nx = self.parent[c];
            self.parent[c] = r;
            c = nx;
        }
        r
    }

    /// Merge; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Close a plane tree's leaves into a cycle in rotation order.
pub fn halin_from_plane_tree(t: &PlaneTree) -> Result<HalinInput, GraphError> {
    t.validate()?;
    let leaves = t.leaves();
    if leaves.len() < 3 {
        return Err(GraphError::Invalid(format!("a Halin tree needs at least 3 leaves, found {}", leaves.len())));
    }
    for v in 0..t.n() {
        let deg = t.children[v].len() + usize::from(v != t.root);
        if deg == 2 {
            return Err(GraphError::Invalid(format!("tree vertex `{}` has degree two", t.labels[v])));
        }
    }
    let tree_edges: EdgeSet = t.edges().into_iter().map(|(u, v)| norm(u, v)).collect();
    let cycle_edges: EdgeSet = cycle_pairs(&leaves).into_iter().map(|(u, v)| norm(u, v)).collect();
    let all: Vec<(usize, usize)> = tree_edges.iter().chain(cycle_edges.iter()).copied().collect();
    let graph = Graph::new(t.labels.clone(), all)?;
    HalinInput::new(graph, tree_edges, cycle_edges, leaves[0], Some(leaves[1]))
}

fn relabel_preorder(children: &[Vec<usize>], root: usize, name: impl Fn(usize) -> String) -> PlaneTree {
    // Vertices unreachable from the root (pruned subtrees) are dropped.
    let raw = PlaneTree { labels: vec![String::new(); children.len()], root, children: children.to_vec() };
    let order = raw.preorder();
    let mut pos = vec![usize::MAX; children.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut new_children = vec![Vec::new(); order.len()];
    for &v in &order {
        new_children[pos[v]] = children[v].iter().map(|&c| pos[c]).collect();
    }
    PlaneTree { labels: (0..order.len()).map(name).collect(), root: 0, children: new_children }
}

/// Random plane tree for Halin graphs with `internal_count` internal vertices.
///
/// The root gets 3 or 4 children, every other internal vertex 2 or 3, so no
/// vertex has tree degree two. Vertices are labelled `v0, v1, …` in preorder.
pub fn random_halin(internal_count: usize, seed: u64) -> PlaneTree {
    let target = internal_count.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut leaves = Vec::new();
    let root_deg = if target == 1 { 3 } else { rng.gen_range(3..=4) };
    for _ in 0..root_deg {
        children.push(Vec::new());
        let id = children.len() - 1;
        children[0].push(id);
        leaves.push(id);
    }
    for _ in 1..target {
        let pick = rng.gen_range(0..leaves.len());
        let v = leaves.swap_remove(pick);
        for _ in 0..rng.gen_range(2..=3) {
            children.push(Vec::new());
            let id = children.len() - 1;
            children[v].push(id);
            leaves.push(id);
        }
    }
    relabel_preorder(&children, 0, |i| format!("v{i}"))
}

// ---------------------------------------------------------------------------
// k-cycle trees

/// A k-cycle tree: a plane tree around a center whose depth-d vertices form
/// the cycle `levels[d-1]`.
///
/// Each `levels[i]` is a cyclic vertex sequence starting at its level root;
/// `level_roots[i]` is that first vertex, and the last level root is the
/// tree root on the outermost cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KCycleInput {
    pub graph: Graph,
    pub center: usize,
    pub tree_edges: EdgeSet,
    pub levels: Vec<Vec<usize>>,
    pub level_roots: Vec<usize>,
}

impl KCycleInput {
    pub fn new(
        graph: Graph,
        center: usize,
        tree_edges: EdgeSet,
        level_edges: Vec<EdgeSet>,
        level_roots: Vec<usize>,
        first_steps: Vec<Option<usize>>,
    ) -> Result<KCycleInput, GraphError> {
        if level_roots.len() != level_edges.len() || level_edges.is_empty() {
            return Err(GraphError::Invalid("need one level root per cycle and k >= 1".into()));
        }
        let mut levels = Vec::new();
        for (i, es) in level_edges.iter().enumerate() {
            let step = first_steps.get(i).copied().flatten();
            levels.push(trace_cycle(graph.n(), es, level_roots[i], step)?);
        }
        let kc = KCycleInput { graph, center, tree_edges, levels, level_roots };
        kc.validate()?;
        Ok(kc)
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Tree root on the outermost cycle.
    pub fn root(&self) -> usize {
        *self.level_roots.last().expect("k >= 1")
    }

    /// Edge set of cycle `C_{i+1}` (0-based level index).
    pub fn level_edges(&self, i: usize) -> EdgeSet {
        cycle_pairs(&self.levels[i]).into_iter().map(|(u, v)| norm(u, v)).collect()
    }

    /// Tree depth of every vertex measured from the center.
    pub fn depths(&self) -> Vec<Option<usize>> {
        let adj = adjacency(self.graph.n(), &self.tree_edges);
        let mut depth = vec![None; self.graph.n()];
        depth[self.center] = Some(0);
        let mut q = VecDeque::from([self.center]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if depth[w].is_none() {
                    depth[w] = Some(depth[u].unwrap() + 1);
                    q.push_back(w);
                }
            }
        }
        depth
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let g = &self.graph;
        let n = g.n();
        if self.center >= n {
            return Err(GraphError::Invalid("center out of range".into()));
        }
        if !is_spanning_tree(n, &self.tree_edges) {
            return Err(GraphError::Invalid("tree edges do not form a spanning tree".into()));
        }
        let mut union = self.tree_edges.clone();
        for i in 0..self.k() {
            let le = self.level_edges(i);
            if !union.is_disjoint(&le) {
                return Err(GraphError::Invalid("tree and level cycles must be edge-disjoint".into()));
            }
            union.extend(le);
        }
        if union != g.edge_set() {
            return Err(GraphError::Invalid("tree and level cycles must cover exactly the edges".into()));
        }
        let depth = self.depths();
        let mut count = vec![0usize; n];
        for (i, lv) in self.levels.iter().enumerate() {
            for &v in lv {
                count[v] += 1;
                if depth[v] != Some(i + 1) {
                    return Err(GraphError::Invalid(format!(
                        "vertex `{}` on cycle {} is not at tree distance {} from the center",
                        g.label(v),
                        i + 1,
                        i + 1
                    )));
                }
            }
        }
        for v in 0..n {
            let want = usize::from(v != self.center);
            if count[v] != want {
                return Err(GraphError::Invalid(format!("vertex `{}` must lie on exactly one cycle", g.label(v))));
            }
        }
        let k = self.k();
        let root = self.root();
        for (i, &ri) in self.level_roots.iter().enumerate() {
            let lvl = i + 1;
            if depth[ri] != Some(lvl) {
                return Err(GraphError::Invalid("level root on the wrong cycle".into()));
            }
            if tree_distance(n, &self.tree_edges, root, ri) != Some(k - lvl) {
                return Err(GraphError::Invalid(format!("level root of cycle {lvl} must be at distance {} from the root", k - lvl)));
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> GraphDoc {
        let g = &self.graph;
        let mut doc = GraphDoc::from_graph(g);
        doc.tree_edges = Some(pairs(g, self.tree_edges.iter().copied()));
        doc.center = Some(g.label(self.center).to_string());
        doc.cycle_levels = Some(self.levels.iter().map(|lv| pairs(g, cycle_pairs(lv).into_iter())).collect());
        doc.level_roots = Some(self.level_roots.iter().map(|&v| g.label(v).to_string()).collect());
        doc.root = Some(g.label(self.root()).to_string());
        doc
    }

    pub fn from_doc(g: Graph, doc: &GraphDoc) -> Result<KCycleInput, GraphError> {
        let missing = |f: &str| GraphError::Invalid(format!("k-cycle input needs `{f}`"));
        let tree = GraphDoc::resolve(&g, doc.tree_edges.as_ref().ok_or_else(|| missing("tree_edges"))?)?;
        let center_label = doc.center.as_ref().ok_or_else(|| missing("center"))?;
        let center = g.vertex(center_label).ok_or_else(|| GraphError::DanglingEndpoint(center_label.clone()))?;
        let roots: Vec<usize> = doc
            .level_roots
            .as_ref()
            .ok_or_else(|| missing("level_roots"))?
            .iter()
            .map(|l| g.vertex(l).ok_or_else(|| GraphError::DanglingEndpoint(l.clone())))
            .collect::<Result<_, _>>()?;
        let mut level_edges = Vec::new();
        let mut steps = Vec::new();
        for (i, lv) in doc.cycle_levels.as_ref().ok_or_else(|| missing("cycle_levels"))?.iter().enumerate() {
            let es = GraphDoc::resolve(&g, lv)?;
            let r = roots.get(i).copied();
            steps.push(es.first().and_then(|&(a, b)| (Some(a) == r).then_some(b)));
            level_edges.push(es.into_iter().map(|(u, v)| norm(u, v)).collect());
        }
        let tree_edges = tree.into_iter().map(|(u, v)| norm(u, v)).collect();
        KCycleInput::new(g, center, tree_edges, level_edges, roots, steps)
    }
}

/// Length of the tree path between two vertices.
pub fn tree_distance(n: usize, tree: &EdgeSet, a: usize, b: usize) -> Option<usize> {
    let adj = adjacency(n, tree);
    let mut dist = vec![usize::MAX; n];
    dist[a] = 0;
    let mut q = VecDeque::from([a]);
    while let Some(u) = q.pop_front() {
        if u == b {
            return Some(dist[u]);
        }
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
        }
    }
    None
}

/// Random k-cycle tree.
///
/// The center gets `max(3, branching)` children; every vertex above depth `k`
/// gets between 1 and `branching` children. Children of vertices on depth
/// `k - 1` are then pruned at random, except along the leftmost path and
/// never below three vertices on the outer cycle. Labels: `c`, then `u1, u2, …`
/// in preorder.
pub fn random_kcycle(k: usize, branching: usize, seed: u64) -> KCycleInput {
    let k = k.max(1);
    let b = branching.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    for depth in 0..k {
        let mut next = Vec::new();
        for &v in &frontier {
            let cnt = if depth == 0 { b.max(3) } else { rng.gen_range(1..=b) };
            for _ in 0..cnt {
                children.push(Vec::new());
                let id = children.len() - 1;
                children[v].push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    if k >= 2 {
        // Leftmost path vertex at depth k-1 keeps its children.
        let mut keep = 0;
        for _ in 0..k - 1 {
            keep = children[keep][0];
        }
        let mut outer = frontier.len();
        let mut parents: Vec<usize> = (0..children.len())
            .filter(|&v| v != keep && children[v].iter().any(|c| frontier.contains(c)))
            .collect();
        parents.shuffle(&mut rng);
        for p in parents {
            let cnt = children[p].len();
            if outer - cnt >= 3 && rng.gen_bool(0.3) {
                outer -= cnt;
                children[p].clear();
            }
        }
    }
    let t = relabel_preorder(&children, 0, |i| if i == 0 { "c".to_string() } else { format!("u{i}") });
    kcycle_from_plane_tree(&t, k).expect("generator output is a valid k-cycle tree")
}

/// Close each depth level of a centered plane tree into a cycle in rotation
/// order. Level roots follow the leftmost path down from the center.
pub fn kcycle_from_plane_tree(t: &PlaneTree, k: usize) -> Result<KCycleInput, GraphError> {
    t.validate()?;
    let n = t.n();
    let mut depth = vec![0usize; n];
    for v in t.preorder() {
        for &c in &t.children[v] {
            depth[c] = depth[v] + 1;
        }
    }
    let order = t.preorder();
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &v in &order {
        if depth[v] > k {
            return Err(GraphError::Invalid("tree deeper than k".into()));
        }
        if depth[v] >= 1 {
            levels[depth[v] - 1].push(v);
        }
    }
    if levels.iter().any(|l| l.len() < 3) {
        return Err(GraphError::Invalid("every level needs at least 3 vertices".into()));
    }
    let mut path = Vec::new();
    let mut cur = t.root;
    for _ in 0..k {
        cur = *t.children[cur]
            .first()
            .ok_or_else(|| GraphError::Invalid("leftmost path must reach the outer cycle".into()))?;
        path.push(cur);
    }
    let tree_edges: EdgeSet = t.edges().into_iter().map(|(u, v)| norm(u, v)).collect();
    let level_edges: Vec<EdgeSet> =
        levels.iter().map(|l| cycle_pairs(l).into_iter().map(|(u, v)| norm(u, v)).collect()).collect();
    let mut all: Vec<(usize, usize)> = tree_edges.iter().copied().collect();
    for le in &level_edges {
        all.extend(le.iter().copied());
    }
    let graph = Graph::new(t.labels.clone(), all)?;
    let steps = levels.iter().map(|l| Some(l[1])).collect();
    KCycleInput::new(graph, t.root, tree_edges, level_edges, path, steps)
}

/// The K4 fixture in its Halin presentation: star `v -> (a, b, c)`.
pub fn halin4() -> HalinInput {
    let t = PlaneTree {
        labels: vec!["a".into(), "b".into(), "c".into(), "v".into()],
        root: 3,
        children: vec![vec![], vec![], vec![], vec![0, 1, 2]],
    };
    halin_from_plane_tree(&t).expect("K4 is Halin")
}
