//! Rooted, optionally ordered tree decompositions with typed, anchored bags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_core::{norm, Edge, Graph, GraphError};
use crate::orientation::Coloring;
use crate::terminal_algebra::TerminalGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TdError {
    #[error("decomposition has no bags")]
    Empty,
    #[error("parent map does not form a tree rooted at bag {0}")]
    NotATree(usize),
    #[error("decomposition is unordered")]
    Unordered,
    #[error("bag {0} is not a child of bag {1}")]
    NotAChild(usize, usize),
    #[error("bag {0} does not exist")]
    NoSuchBag(usize),
    #[error("bad decomposition document: {0}")]
    Document(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Bag type labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BagType {
    R1,
    R2,
    R3,
    L1,
    L2,
    L3,
    LR,
    /// Generic vertex-anchored type with index.
    VertexType(usize),
    /// Generic edge-anchored type with index.
    EdgeType(usize),
    LeafPad,
}

impl BagType {
    pub const COMPONENT: [BagType; 7] =
        [BagType::R1, BagType::R2, BagType::R3, BagType::L1, BagType::L2, BagType::L3, BagType::LR];
}

impl fmt::Display for BagType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BagType::R1 => write!(f, "R1"),
            BagType::R2 => write!(f, "R2"),
            BagType::R3 => write!(f, "R3"),
            BagType::L1 => write!(f, "L1"),
            BagType::L2 => write!(f, "L2"),
            BagType::L3 => write!(f, "L3"),
            BagType::LR => write!(f, "LR"),
            BagType::VertexType(i) => write!(f, "V{i}"),
            BagType::EdgeType(i) => write!(f, "E{i}"),
            BagType::LeafPad => write!(f, "LeafPad"),
        }
    }
}

impl FromStr for BagType {
    type Err = TdError;

    fn from_str(s: &str) -> Result<BagType, TdError> {
        let t = match s {
            "R1" => BagType::R1,
            "R2" => BagType::R2,
            "R3" => BagType::R3,
            "L1" => BagType::L1,
            "L2" => BagType::L2,
            "L3" => BagType::L3,
            "LR" => BagType::LR,
            "LeafPad" => BagType::LeafPad,
            _ => {
                let num = |rest: &str| rest.parse::<usize>().map_err(|_| TdError::Document(format!("unknown bag type `{s}`")));
                match s.split_at(1) {
                    ("V", rest) => BagType::VertexType(num(rest)?),
                    ("E", rest) => BagType::EdgeType(num(rest)?),
                    _ => return Err(TdError::Document(format!("unknown bag type `{s}`"))),
                }
            }
        };
        Ok(t)
    }
}

/// Graph element a bag is associated with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Vertex(usize),
    Edge(Edge),
}

impl Anchor {
    pub fn endpoints(&self) -> Vec<usize> {
        match *self {
            Anchor::Vertex(v) => vec![v],
            Anchor::Edge((u, v)) => vec![u, v],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bag {
    /// Sorted by declaration index.
    pub vertices: Vec<usize>,
    pub kind: BagType,
    pub anchor: Anchor,
}

impl Bag {
    pub fn new(vertices: impl IntoIterator<Item = usize>, kind: BagType, anchor: Anchor) -> Bag {
        let set: BTreeSet<usize> = vertices.into_iter().collect();
        Bag { vertices: set.into_iter().collect(), kind, anchor }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Node classification by child count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Intermediate,
    Branch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Bag>,
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    /// Child lists; their order is meaningful only when `ordered` is set.
    pub children: Vec<Vec<usize>>,
    pub ordered: bool,
}

impl TreeDecomposition {
    /// Build from a parent map. Child order comes from `order` when given, else
    /// from ascending bag id.
    pub fn new(
        bags: Vec<Bag>,
        root: usize,
        parent: Vec<Option<usize>>,
        order: Option<Vec<Vec<usize>>>,
    ) -> Result<TreeDecomposition, TdError> {
        if bags.is_empty() {
            return Err(TdError::Empty);
        }
        let n = bags.len();
        if parent.len() != n || root >= n || parent[root].is_some() {
            return Err(TdError::NotATree(root));
        }
        let mut children = vec![Vec::new(); n];
        for (c, p) in parent.iter().enumerate() {
            match p {
                Some(p) if *p < n && *p != c => children[*p].push(c),
                None if c == root => {}
                _ => return Err(TdError::NotATree(root)),
            }
        }
        let ordered = order.is_some();
        if let Some(order) = order {
            if order.len() != n {
                return Err(TdError::NotATree(root));
            }
            for (p, list) in order.into_iter().enumerate() {
                let mut a = list.clone();
                a.sort_unstable();
                if a != children[p] {
                    return Err(TdError::NotATree(root));
                }
                children[p] = list;
            }
        }
        let td = TreeDecomposition { bags, root, parent, children, ordered };
        if td.preorder().len() != n {
            return Err(TdError::NotATree(root));
        }
        Ok(td)
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.bags.len());
        let mut seen = vec![false; self.bags.len()];
        let mut stack = vec![self.root];
        while let Some(b) = stack.pop() {
            if std::mem::replace(&mut seen[b], true) {
                continue;
            }
            out.push(b);
            for &c in self.children[b].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<usize> {
        let mut p = self.preorder();
        p.reverse();
        p
    }

    pub fn width(&self) -> Result<usize, TdError> {
        self.bags.iter().map(|b| b.vertices.len()).max().map(|m| m.saturating_sub(1)).ok_or(TdError::Empty)
    }

    pub fn classify(&self, bag: usize) -> NodeKind {
        match self.children[bag].len() {
            0 => NodeKind::Leaf,
            1 => NodeKind::Intermediate,
            _ => NodeKind::Branch,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 2)
    }

    pub fn max_children(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.bags.len()).filter(|&b| self.children[b].is_empty()).collect()
    }

    /// Bag ids of `bag` and all its descendants.
    pub fn subtree(&self, bag: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![bag];
        while let Some(b) = stack.pop() {
            out.push(b);
            stack.extend(self.children[b].iter().copied());
        }
        out
    }

    /// Single bag holding every vertex.
    pub fn trivial(g: &Graph) -> TreeDecomposition {
        let anchor = Anchor::Vertex(0);
        TreeDecomposition::new(vec![Bag::new(0..g.n(), BagType::VertexType(0), anchor)], 0, vec![None], None)
            .expect("single bag is a tree")
    }

    /// Copy without bag `victim`; its children move to its parent.
    pub fn without_bag(&self, victim: usize) -> Result<TreeDecomposition, TdError> {
        if victim >= self.bags.len() {
            return Err(TdError::NoSuchBag(victim));
        }
        if self.bags.len() == 1 {
            return Err(TdError::Empty);
        }
        let new_root = if victim == self.root {
            *self.children[victim].first().ok_or(TdError::Empty)?
        } else {
            self.root
        };
        let id = |b: usize| if b > victim { b - 1 } else { b };
        let lift = |b: usize| -> Option<usize> {
            let mut p = self.parent[b];
            if p == Some(victim) {
                p = if victim == self.root { (b != new_root).then_some(new_root) } else { self.parent[victim] };
            }
            p
        };
        let mut bags = Vec::new();
        let mut parent = Vec::new();
        for b in 0..self.bags.len() {
            if b == victim {
                continue;
            }
            bags.push(self.bags[b].clone());
            parent.push(if b == new_root { None } else { lift(b).map(id) });
        }
        TreeDecomposition::new(bags, id(new_root), parent, None)
    }

    pub fn to_doc(&self, g: &Graph) -> DecompositionDoc {
        let bags = self
            .bags
            .iter()
            .enumerate()
            .map(|(i, b)| BagDoc {
                id: i,
                vertices: b.vertices.iter().map(|&v| g.label(v).to_string()).collect(),
                kind: b.kind.to_string(),
                anchor: match b.anchor {
                    Anchor::Vertex(v) => AnchorDoc::Vertex { vertex: g.label(v).to_string() },
                    Anchor::Edge((u, v)) => AnchorDoc::Edge { edge: [g.label(u).to_string(), g.label(v).to_string()] },
                },
            })
            .collect();
        let parent = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (c.to_string(), p)))
            .collect();
        let order = self.ordered.then(|| {
            self.children
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_empty())
                .map(|(p, c)| (p.to_string(), c.clone()))
                .collect()
        });
        DecompositionDoc { bags, root: self.root, parent, order }
    }

    pub fn from_doc(g: &Graph, doc: &DecompositionDoc) -> Result<TreeDecomposition, TdError> {
        let n = doc.bags.len();
        let mut bags = vec![None; n];
        let lookup = |l: &str| g.vertex(l).ok_or_else(|| TdError::Graph(GraphError::DanglingEndpoint(l.to_string())));
        for b in &doc.bags {
            if b.id >= n || bags[b.id].is_some() {
                return Err(TdError::Document(format!("bag ids must be 0..{n} without repeats")));
            }
            let verts = b.vertices.iter().map(|l| lookup(l)).collect::<Result<Vec<_>, _>>()?;
            let anchor = match &b.anchor {
                AnchorDoc::Vertex { vertex } => Anchor::Vertex(lookup(vertex)?),
                AnchorDoc::Edge { edge: [a, c] } => Anchor::Edge(norm(lookup(a)?, lookup(c)?)),
            };
            bags[b.id] = Some(Bag::new(verts, b.kind.parse()?, anchor));
        }
        let bags: Vec<Bag> = bags.into_iter().map(|b| b.expect("all ids filled")).collect();
        let mut parent = vec![None; n];
        for (c, &p) in &doc.parent {
            let c: usize = c.parse().map_err(|_| TdError::Document(format!("bad bag id `{c}`")))?;
            if c >= n {
                return Err(TdError::NoSuchBag(c));
            }
            parent[c] = Some(p);
        }
        let order = match &doc.order {
            None => None,
            Some(map) => {
                let mut lists = vec![Vec::new(); n];
                for (p, list) in map {
                    let p: usize = p.parse().map_err(|_| TdError::Document(format!("bad bag id `{p}`")))?;
                    if p >= n {
                        return Err(TdError::NoSuchBag(p));
                    }
                    lists[p] = list.clone();
                }
                Some(lists)
            }
        };
        TreeDecomposition::new(bags, doc.root, parent, order)
    }

    /// Graphviz rendering.
    pub fn to_dot(&self, g: &Graph) -> String {
        let mut s = String::from("digraph td {\n  node [shape=box];\n");
        for (i, b) in self.bags.iter().enumerate() {
            let names: Vec<&str> = b.vertices.iter().map(|&v| g.label(v)).collect();
            s.push_str(&format!("  b{i} [label=\"{i} {}: {{{}}}\"];\n", b.kind, names.join(",")));
        }
        for (c, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                s.push_str(&format!("  b{p} -> b{c};\n"));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// JSON decomposition schema.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecompositionDoc {
    pub bags: Vec<BagDoc>,
    pub root: usize,
    pub parent: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<BTreeMap<String, Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BagDoc {
    pub id: usize,
    pub vertices: Vec<String>,
    #[serde(rename = "type")]
    pub kind: String,
    pub anchor: AnchorDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AnchorDoc {
    Vertex { vertex: String },
    Edge { edge: [String; 2] },
}

/// One violated axiom with its witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownVertex { bag: usize, vertex: usize },
    UncoveredVertex(usize),
    UncoveredEdge(Edge),
    /// Two bags containing the vertex whose connecting tree path leaves it.
    Disconnected { vertex: usize, bags: (usize, usize) },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the three decomposition axioms, reporting every violation.
pub fn validate(g: &Graph, td: &TreeDecomposition) -> ValidationReport {
    let mut violations = Vec::new();
    let n = g.n();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, b) in td.bags.iter().enumerate() {
        for &v in &b.vertices {
            if v >= n {
                violations.push(Violation::UnknownVertex { bag: i, vertex: v });
            } else {
                holders[v].push(i);
            }
        }
    }
    for v in 0..n {
        if holders[v].is_empty() {
            violations.push(Violation::UncoveredVertex(v));
        }
    }
    for &(u, v) in g.edges() {
        if !td.bags.iter().any(|b| b.contains(u) && b.contains(v)) {
            violations.push(Violation::UncoveredEdge((u, v)));
        }
    }
    for v in 0..n {
        // Bags holding v whose parent does not: more than one means the holder set is split.
        let tops: Vec<usize> = holders[v]
            .iter()
            .copied()
            .filter(|&b| td.parent[b].is_none_or(|p| !td.bags[p].contains(v)))
            .collect();
        if tops.len() > 1 {
            violations.push(Violation::Disconnected { vertex: v, bags: (tops[0], tops[1]) });
        }
    }
    ValidationReport { violations }
}

/// Merge every child into its parent when their vertex sets are equal.
///
/// The parent survives with its type and anchor; the child's children take
/// its place in the parent's child order.
pub fn contract_equal_bags(td: &TreeDecomposition) -> TreeDecomposition {
    let n = td.bags.len();
    let mut surv: Vec<usize> = (0..n).collect();
    for b in td.preorder() {
        if let Some(p) = td.parent[b] {
            if td.bags[p].vertices == td.bags[b].vertices {
                surv[b] = surv[p];
            }
        }
    }
    fn expand(td: &TreeDecomposition, surv: &[usize], s: usize, node: usize, out: &mut Vec<usize>) {
        for &c in &td.children[node] {
            if surv[c] == s {
                expand(td, surv, s, c, out);
            } else {
                out.push(c);
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&b| surv[b] == b).collect();
    let mut new_id = vec![usize::MAX; n];
    for (i, &b) in keep.iter().enumerate() {
        new_id[b] = i;
    }
    let mut bags = Vec::with_capacity(keep.len());
    let mut parent = vec![None; keep.len()];
    let mut order = vec![Vec::new(); keep.len()];
    for &b in &keep {
        bags.push(td.bags[b].clone());
        let mut kids = Vec::new();
        expand(td, &surv, b, b, &mut kids);
        for &c in &kids {
            parent[new_id[c]] = Some(new_id[b]);
        }
        order[new_id[b]] = kids.iter().map(|&c| new_id[c]).collect();
    }
    TreeDecomposition::new(bags, new_id[td.root], parent, Some(order)).map(|mut t| {
        t.ordered = td.ordered;
        t
    })
    .expect("contraction keeps a tree")
}

/// Give every non-singleton leaf a child holding only its lowest-colored vertex.
pub fn pad_leaves(td: &TreeDecomposition, col: &Coloring) -> TreeDecomposition {
    let mut bags = td.bags.clone();
    let mut parent = td.parent.clone();
    let mut children = td.children.clone();
    for leaf in td.leaves() {
        let b = &td.bags[leaf];
        if b.vertices.len() <= 1 {
            continue;
        }
        let low = *b.vertices.iter().min_by_key(|&&v| (col.color(v), v)).expect("nonempty bag");
        bags.push(Bag::new([low], BagType::LeafPad, b.anchor));
        parent.push(Some(leaf));
        children.push(Vec::new());
        children[leaf].push(bags.len() - 1);
    }
    let mut out = TreeDecomposition::new(bags, td.root, parent, Some(children)).expect("padding keeps a tree");
    out.ordered = td.ordered;
    out
}

/// Induced subgraph on the bag and all descendants; terminals are the bag.
pub fn terminal_subgraph(g: &Graph, td: &TreeDecomposition, bag: usize) -> TerminalGraph {
    let mut verts = BTreeSet::new();
    for b in td.subtree(bag) {
        verts.extend(td.bags[b].vertices.iter().copied());
    }
    TerminalGraph::induced(g, &verts, &td.bags[bag].vertices)
}

/// Induced subgraph on the bag plus the subtrees of the children strictly
/// left of `child`; terminals are the bag.
pub fn partial_terminal_subgraph(
    g: &Graph,
    td: &TreeDecomposition,
    bag: usize,
    child: usize,
) -> Result<TerminalGraph, TdError> {
    if !td.ordered {
        return Err(TdError::Unordered);
    }
    let pos = td.children[bag].iter().position(|&c| c == child).ok_or(TdError::NotAChild(child, bag))?;
    let mut verts: BTreeSet<usize> = td.bags[bag].vertices.iter().copied().collect();
    for &left in &td.children[bag][..pos] {
        for b in td.subtree(left) {
            verts.extend(td.bags[b].vertices.iter().copied());
        }
    }
    Ok(TerminalGraph::induced(g, &verts, &td.bags[bag].vertices))
}

/// Exact treewidth by dynamic programming over vertex subsets.
///
/// Only meant as an oracle for graphs with at most 16 vertices.
pub fn exact_treewidth(g: &Graph) -> usize {
    let n = g.n();
    assert!(n <= 16, "exact treewidth oracle is limited to 16 vertices");
    if n == 0 {
        return 0;
    }
    let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
    // q(s, v): vertices outside s ∪ {v} reachable from v through s.
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut frontier = 1u32 << v;
        let mut out = 0u32;
        while frontier != 0 {
            let u = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let nb = adj[u] & !seen;
            seen |= nb;
            out |= nb & !s;
            frontier |= nb & s;
        }
        out
    };
    let full = (1u64 << n) as usize;
    let mut tw = vec![usize::MAX; full];
    tw[0] = 0;
    for s in 1..full {
        let s32 = s as u32;
        let mut best = usize::MAX;
        let mut bits = s32;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s32 & !(1 << v);
            let cand = tw[rest as usize].max(q(rest, v).count_ones() as usize);
            best = best.min(cand);
        }
        tw[s] = best;
    }
    tw[full - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::halin4;

    fn k(n: usize) -> Graph {
        let labels = (0..n).map(|i| format!("k{i}")).collect();
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(labels, edges).unwrap()
    }

    fn path_td() -> (Graph, TreeDecomposition) {
        // a-b-c with bags {a,b} <- root {b,c}
        let g = Graph::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let bags = vec![
            Bag::new([1, 2], BagType::EdgeType(0), Anchor::Edge((1, 2))),
            Bag::new([0, 1], BagType::EdgeType(0), Anchor::Edge((0, 1))),
        ];
        (g, TreeDecomposition::new(bags, 0, vec![None, Some(0)], None).unwrap())
    }

    #[test]
    fn trivial_decomposition_valid() {
        let g = halin4().graph;
        let td = TreeDecomposition::trivial(&g);
        assert!(validate(&g, &td).is_valid());
        assert_eq!(td.width().unwrap(), 3);
        assert_eq!(TreeDecomposition::trivial(&k(6)).width().unwrap(), 5);
    }

    #[test]
    fn dropping_edge_bag_is_caught() {
        let (g, td) = path_td();
        assert!(validate(&g, &td).is_valid());
        let cut = td.without_bag(1).unwrap();
        let rep = validate(&g, &cut);
        assert!(rep.violations.contains(&Violation::UncoveredEdge((0, 1))));
        assert!(rep.violations.contains(&Violation::UncoveredVertex(0)));
    }

    #[test]
    fn disconnected_holder_witness() {
        let g = Graph::from_labels(&["a", "b", "c"], &[("a", "b")]).unwrap();
        let bags = vec![
            Bag::new([0, 1], BagType::VertexType(0), Anchor::Vertex(0)),
            Bag::new([2], BagType::VertexType(0), Anchor::Vertex(2)),
            Bag::new([0], BagType::VertexType(0), Anchor::Vertex(0)),
        ];
        // chain 0 <- 1 <- 2: vertex a sits in bags 0 and 2 but not 1
        let td = TreeDecomposition::new(bags, 0, vec![None, Some(0), Some(1)], None).unwrap();
        let rep = validate(&g, &td);
        assert_eq!(rep.violations, vec![Violation::Disconnected { vertex: 0, bags: (0, 2) }]);
    }

    #[test]
    fn classify_nodes() {
        let g = k(3);
        let bag = |v: Vec<usize>| Bag::new(v, BagType::VertexType(0), Anchor::Vertex(0));
        let td = TreeDecomposition::new(
            vec![bag(vec![0, 1, 2]), bag(vec![0, 1]), bag(vec![1, 2]), bag(vec![1])],
            0,
            vec![None, Some(0), Some(0), Some(2)],
            None,
        )
        .unwrap();
        assert!(validate(&g, &td).is_valid());
        assert_eq!(td.classify(0), NodeKind::Branch);
        assert_eq!(td.classify(2), NodeKind::Intermediate);
        assert_eq!(td.classify(3), NodeKind::Leaf);
    }

    #[test]
    fn contraction_merges_and_is_idempotent() {
        let g = Graph::from_labels(&["v", "c"], &[("v", "c")]).unwrap();
        let bags = vec![
            Bag::new([0, 1], BagType::R3, Anchor::Edge((0, 1))),
            Bag::new([0, 1], BagType::R2, Anchor::Edge((0, 1))),
            Bag::new([1], BagType::R1, Anchor::Edge((0, 1))),
        ];
        let td = TreeDecomposition::new(bags, 0, vec![None, Some(0), Some(1)], None).unwrap();
        let c = contract_equal_bags(&td);
        assert_eq!(c.len(), 2);
        assert_eq!(c.bags[0].kind, BagType::R3);
        assert_eq!(c.children[0], vec![1]);
        assert_eq!(contract_equal_bags(&c), c);
        assert_eq!(c.width(), td.width());
        assert!(validate(&g, &c).is_valid());
    }

    #[test]
    fn padding_adds_lowest_colored_vertex() {
        let (g, td) = path_td();
        let col = Coloring(vec![1, 0, 1]);
        let padded = pad_leaves(&td, &col);
        assert_eq!(padded.len(), 3);
        let pad = &padded.bags[2];
        assert_eq!((pad.vertices.clone(), pad.kind), (vec![1], BagType::LeafPad));
        assert_eq!(padded.parent[2], Some(1));
        assert!(validate(&g, &padded).is_valid());
        assert_eq!(padded.width(), td.width());
        assert_eq!(pad_leaves(&padded, &col), padded);
    }

    #[test]
    fn terminal_subgraphs() {
        let (g, td) = path_td();
        let leaf = terminal_subgraph(&g, &td, 1);
        assert_eq!(leaf.graph.n(), 2);
        let root = terminal_subgraph(&g, &td, 0);
        assert_eq!((root.graph.n(), root.graph.m(), root.terminals.len()), (3, 2, 2));
        assert_eq!(partial_terminal_subgraph(&g, &td, 0, 1), Err(TdError::Unordered));
        let mut ordered = td.clone();
        ordered.ordered = true;
        let p = partial_terminal_subgraph(&g, &ordered, 0, 1).unwrap();
        assert_eq!((p.graph.n(), p.graph.m()), (2, 1));
    }

    #[test]
    fn doc_round_trip() {
        let (g, td) = path_td();
        let doc = td.to_doc(&g);
        let text = serde_json::to_string(&doc).unwrap();
        let back: DecompositionDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(TreeDecomposition::from_doc(&g, &back).unwrap(), td);
        assert!(td.to_dot(&g).contains("b0 -> b1"));
    }

    #[test]
    fn exact_treewidth_small() {
        assert_eq!(exact_treewidth(&k(4)), 3);
        assert_eq!(exact_treewidth(&k(5)), 4);
        let cycle = Graph::new((0..6).map(|i| i.to_string()).collect(), (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        assert_eq!(exact_treewidth(&cycle), 2);
        let (path, _) = path_td();
        assert_eq!(exact_treewidth(&path), 1);
    }
}
