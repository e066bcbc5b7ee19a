//! Widening an anchored decomposition so it absorbs extra edges or extra
//! vertices whose biconnected blocks have small feedback sets.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cycle_structure::{blocks_of, Block, RootedForest};
use crate::graph_core::{norm, Edge, EdgeSet, Graph, GraphError};
use crate::orientation::Coloring;
use crate::tree_decomposition::{Anchor, Bag, BagType, TdError, TreeDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeedbackError {
    #[error("block on vertices {block:?} needs a feedback set of size {needed}, bound is {bound}")]
    BoundExceeded { block: Vec<usize>, needed: usize, bound: usize },
    #[error("extra edge {0:?} is not between vertices of the graph, or is already present")]
    BadEdge(Edge),
    #[error("tree is not a spanning tree of the graph")]
    NotSpanning,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decomposition(#[from] TdError),
}

/// Minimum feedback edge set size of a block: its cyclomatic number.
fn block_feedback_edges(b: &Block) -> usize {
    b.edges.len() + 1 - b.vertices.len()
}

/// Feedback vertex set the construction uses for a block: the new vertices
/// in it. Removing them leaves a subforest of the tree.
fn block_new_vertices(b: &Block, n: usize) -> usize {
    b.vertices.iter().filter(|&&v| v >= n).count()
}

fn anchor_inside(anchor: &Anchor, vertices: &BTreeSet<usize>, edges: &BTreeSet<Edge>) -> bool {
    match *anchor {
        Anchor::Vertex(u) => vertices.contains(&u),
        Anchor::Edge(e) => edges.contains(&e),
    }
}

/// Add `v` to the bags in `marked`, then to every bag on the tree paths
/// between them so its bags stay connected.
fn add_connected(td: &mut TreeDecomposition, v: usize, marked: &BTreeSet<usize>) {
    let mut holders: BTreeSet<usize> = (0..td.len()).filter(|&b| td.bags[b].contains(v)).collect();
    holders.extend(marked.iter().copied());
    if holders.is_empty() {
        return;
    }
    let depth = {
        let mut d = vec![0usize; td.len()];
        for b in td.preorder() {
            if let Some(p) = td.parent[b] {
                d[b] = d[p] + 1;
            }
        }
        d
    };
    let lca = |mut a: usize, mut b: usize| {
        while depth[a] > depth[b] {
            a = td.parent[a].expect("deeper node has a parent");
        }
        while depth[b] > depth[a] {
            b = td.parent[b].expect("deeper node has a parent");
        }
        while a != b {
            a = td.parent[a].expect("non-root");
            b = td.parent[b].expect("non-root");
        }
        a
    };
    let top = holders.iter().copied().reduce(lca).expect("nonempty");
    let mut touched = BTreeSet::new();
    for &h in &holders {
        let mut cur = h;
        loop {
            touched.insert(cur);
            if cur == top {
                break;
            }
            cur = td.parent[cur].expect("top is an ancestor");
        }
    }
    for b in touched {
        if !td.bags[b].contains(v) {
            let bag = &td.bags[b];
            td.bags[b] = Bag::new(bag.vertices.iter().copied().chain([v]), bag.kind, bag.anchor);
        }
    }
}

/// Make sure some bag holds both `v` and `w`, extending `v` toward a bag of `w`.
fn cover_edge(td: &mut TreeDecomposition, v: usize, w: usize) {
    if td.bags.iter().any(|b| b.contains(v) && b.contains(w)) {
        return;
    }
    if let Some(b) = (0..td.len()).find(|&b| td.bags[b].contains(w)) {
        add_connected(td, v, &BTreeSet::from([b]));
    }
}

/// Absorb non-tree edges `extra`. For each `{v, w}` with `v` the lower-colored
/// endpoint, `v` joins every bag anchored on the edge's fundamental cycle.
pub fn augment_edges(
    g: &Graph,
    td: &TreeDecomposition,
    tree: &EdgeSet,
    extra: &EdgeSet,
    col: &Coloring,
    l: usize,
) -> Result<TreeDecomposition, FeedbackError> {
    let n = g.n();
    if !crate::graph_core::is_spanning_tree(n, tree) {
        return Err(FeedbackError::NotSpanning);
    }
    for &e in extra {
        if e.0 >= n || e.1 >= n || e.0 == e.1 || tree.contains(&e) {
            return Err(FeedbackError::BadEdge(e));
        }
    }
    let mut both = tree.clone();
    both.extend(extra.iter().copied());
    for b in blocks_of(n, &both) {
        let needed = block_feedback_edges(&b);
        if needed > l {
            return Err(FeedbackError::BoundExceeded { block: b.vertices, needed, bound: l });
        }
    }
    let forest = RootedForest::new(n, tree, 0);
    let mut out = td.clone();
    for &(a, b) in extra {
        let (v, w) = if (col.color(a), a) < (col.color(b), b) { (a, b) } else { (b, a) };
        let path = forest.path(a, b).ok_or(FeedbackError::NotSpanning)?;
        let vertices: BTreeSet<usize> = path.iter().copied().collect();
        let edges: BTreeSet<Edge> = path.windows(2).map(|p| norm(p[0], p[1])).collect();
        let marked: BTreeSet<usize> =
            (0..out.len()).filter(|&i| anchor_inside(&out.bags[i].anchor, &vertices, &edges)).collect();
        add_connected(&mut out, v, &marked);
        cover_edge(&mut out, v, w);
    }
    Ok(out)
}

/// Absorb new vertices (appended after the existing ones) and their edges.
/// Each new vertex joins every bag anchored inside its biconnected block of
/// `(V ∪ V', tree ∪ new_edges)`. Returns the extended graph with the result.
pub fn augment_vertices(
    g: &Graph,
    td: &TreeDecomposition,
    tree: &EdgeSet,
    new_labels: &[String],
    new_edges: &EdgeSet,
    l: usize,
) -> Result<(Graph, TreeDecomposition), FeedbackError> {
    let n = g.n();
    if !crate::graph_core::is_spanning_tree(n, tree) {
        return Err(FeedbackError::NotSpanning);
    }
    let total = n + new_labels.len();
    for &e in new_edges {
        if e.1 >= total || e.1 < n || e.0 == e.1 {
            return Err(FeedbackError::BadEdge(e));
        }
    }
    let extended = g.with_vertices(new_labels, new_edges)?;
    let mut both = tree.clone();
    both.extend(new_edges.iter().copied());
    let blocks = blocks_of(total, &both);
    for b in &blocks {
        let needed = block_new_vertices(b, n);
        if needed > l {
            return Err(FeedbackError::BoundExceeded { block: b.vertices.clone(), needed, bound: l });
        }
    }
    let mut out = td.clone();
    for v in n..total {
        for b in blocks.iter().filter(|b| b.vertices.binary_search(&v).is_ok()) {
            let vertices: BTreeSet<usize> = b.vertices.iter().copied().filter(|&u| u < n).collect();
            let edges: BTreeSet<Edge> = b.edges.iter().copied().collect();
            let marked: BTreeSet<usize> =
                (0..out.len()).filter(|&i| anchor_inside(&out.bags[i].anchor, &vertices, &edges)).collect();
            if marked.is_empty() && b.edges.len() == 1 {
                // A pendant edge: give it a bag of its own.
                let (u, _) = b.edges[0];
                attach_pendant(&mut out, u, v);
            } else {
                add_connected(&mut out, v, &marked);
            }
        }
    }
    for &(u, v) in new_edges {
        if !out.bags.iter().any(|b| b.contains(u) && b.contains(v)) {
            if (0..out.len()).any(|b| out.bags[b].contains(v)) {
                cover_edge(&mut out, v, u);
            } else {
                attach_pendant(&mut out, u, v);
            }
        }
    }
    Ok((extended, out))
}

/// New bag `{u, v}` hung below a bag containing `u`.
fn attach_pendant(td: &mut TreeDecomposition, u: usize, v: usize) {
    let host = (0..td.len()).find(|&b| td.bags[b].contains(u)).unwrap_or(td.root);
    td.bags.push(Bag::new([u, v], BagType::VertexType(0), Anchor::Edge(norm(u, v))));
    td.parent.push(Some(host));
    td.children.push(Vec::new());
    let id = td.bags.len() - 1;
    td.children[host].push(id);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{halin_from_plane_tree, random_halin};
    use crate::halin_builder::build_halin_td;
    use crate::orientation::proper_coloring;
    use crate::remember_builder::build_remember_td;
    use crate::tree_decomposition::validate;

    fn path(n: usize) -> Graph {
        Graph::new((0..n).map(|i| format!("p{i}")).collect(), (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn empty_extra_is_identity() {
        let g = path(5);
        let col = proper_coloring(&g, 1, None).unwrap();
        let td = build_remember_td(&g, &g.edge_set(), &col).unwrap();
        assert_eq!(augment_edges(&g, &td, &g.edge_set(), &EdgeSet::new(), &col, 1).unwrap(), td);
        let (g2, td2) = augment_vertices(&g, &td, &g.edge_set(), &[], &EdgeSet::new(), 1).unwrap();
        assert_eq!((g2, td2), (g.clone(), td));
    }

    #[test]
    fn path_plus_chord() {
        let g = path(6);
        let col = proper_coloring(&g, 1, None).unwrap();
        let td = build_remember_td(&g, &g.edge_set(), &col).unwrap();
        let extra = EdgeSet::from([(1, 4)]);
        let out = augment_edges(&g, &td, &g.edge_set(), &extra, &col, 1).unwrap();
        let g2 = g.with_edges(&extra).unwrap();
        assert!(validate(&g2, &out).is_valid());
        assert!(out.width().unwrap() <= td.width().unwrap() + 1);
        let two = EdgeSet::from([(0, 2), (3, 5)]);
        assert!(augment_edges(&g, &td, &g.edge_set(), &two, &col, 1).is_ok());
        let nested = EdgeSet::from([(0, 3), (1, 4)]);
        assert!(matches!(
            augment_edges(&g, &td, &g.edge_set(), &nested, &col, 1),
            Err(FeedbackError::BoundExceeded { needed: 2, .. })
        ));
    }

    #[test]
    fn halin_plus_two_chords() {
        let h = halin_from_plane_tree(&random_halin(5, 1)).unwrap();
        let g = &h.graph;
        let td = build_halin_td(&h).unwrap();
        let col = proper_coloring(g, 3, Some(&td)).unwrap();
        // Two chords between leaves that are not yet adjacent.
        let leaves = &h.cycle;
        let extra: EdgeSet = [norm(leaves[0], leaves[2]), norm(leaves[1], leaves[3])].into();
        let out = augment_edges(g, &td, &h.tree_edges, &extra, &col, 2).unwrap();
        assert!(validate(&g.with_edges(&extra).unwrap(), &out).is_valid());
        assert!(out.width().unwrap() <= 3 + 2);
    }

    #[test]
    fn apex_vertices() {
        let g = path(5);
        let col = proper_coloring(&g, 1, None).unwrap();
        let td = build_remember_td(&g, &g.edge_set(), &col).unwrap();
        let apex = vec!["z".to_string()];
        let (g2, out) = augment_vertices(&g, &td, &g.edge_set(), &apex, &[(0, 5), (4, 5)].into(), 1).unwrap();
        assert!(validate(&g2, &out).is_valid());
        assert_eq!(out.width().unwrap(), td.width().unwrap() + 1);

        // Two apexes over disjoint stretches of a longer path.
        let g = path(9);
        let td = build_remember_td(&g, &g.edge_set(), &proper_coloring(&g, 1, None).unwrap()).unwrap();
        let apexes = vec!["y".to_string(), "z".to_string()];
        let edges: EdgeSet = [(0, 9), (3, 9), (5, 10), (8, 10)].into();
        let (g2, out) = augment_vertices(&g, &td, &g.edge_set(), &apexes, &edges, 1).unwrap();
        assert!(validate(&g2, &out).is_valid());
        assert_eq!(out.width().unwrap(), td.width().unwrap() + 1);
    }

    #[test]
    fn apexes_sharing_a_block_count_separately() {
        // Vertex 3 alone breaks every cycle, but both apexes join the block's bags.
        let g = path(5);
        let td = build_remember_td(&g, &g.edge_set(), &proper_coloring(&g, 1, None).unwrap()).unwrap();
        let apexes = vec!["y".to_string(), "z".to_string()];
        let edges: EdgeSet = [(0, 5), (3, 5), (1, 6), (4, 6)].into();
        assert!(matches!(
            augment_vertices(&g, &td, &g.edge_set(), &apexes, &edges, 1),
            Err(FeedbackError::BoundExceeded { needed: 2, .. })
        ));
        let (g2, out) = augment_vertices(&g, &td, &g.edge_set(), &apexes, &edges, 2).unwrap();
        assert!(validate(&g2, &out).is_valid());
        assert_eq!(out.width().unwrap(), td.width().unwrap() + 2);
    }

    #[test]
    fn pendant_vertex_gets_own_bag() {
        let h = halin_from_plane_tree(&random_halin(2, 0)).unwrap();
        let td = build_halin_td(&h).unwrap();
        let n = h.graph.n();
        let (g2, out) = augment_vertices(&h.graph, &td, &h.tree_edges, &["q".into()], &[(h.root, n)].into(), 1).unwrap();
        assert!(validate(&g2, &out).is_valid());
        assert_eq!(out.width(), td.width());
    }
}

#[cfg(test)]
mod random_cases {
    use super::*;
    use crate::graph_core::{halin_from_plane_tree, random_halin};
    use crate::halin_builder::build_halin_td;
    use crate::orientation::proper_coloring;
    use crate::tree_decomposition::validate;
    use rand::{Rng, SeedableRng};

    #[test]
    fn halin_chords_in_one_block() {
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let h = halin_from_plane_tree(&random_halin(3 + seed as usize % 8, seed)).unwrap();
            let g = &h.graph;
            let td = build_halin_td(&h).unwrap();
            let col = proper_coloring(g, 3, Some(&td)).unwrap();
            let forest = RootedForest::new(g.n(), &h.tree_edges, h.root);
            let (a, b) = (rng.gen_range(0..g.n()), rng.gen_range(0..g.n()));
            if a == b || g.has_edge(a, b) {
                continue;
            }
            // Further chords between vertices of the first chord's tree path
            // stay inside its block.
            let path = forest.path(a, b).unwrap();
            let mut extra = EdgeSet::from([norm(a, b)]);
            for _ in 0..rng.gen_range(0..3) {
                let (u, v) = (path[rng.gen_range(0..path.len())], path[rng.gen_range(0..path.len())]);
                if u != v && !g.has_edge(u, v) {
                    extra.insert(norm(u, v));
                }
            }
            let l = extra.len();
            let out = augment_edges(g, &td, &h.tree_edges, &extra, &col, l).unwrap();
            assert!(validate(&g.with_edges(&extra).unwrap(), &out).is_valid(), "seed {seed}");
            assert!(out.width().unwrap() <= 3 + l, "seed {seed}");
        }
    }

    #[test]
    fn chords_on_remember_decompositions() {
        use crate::remember_builder::{build_remember_td, random_graph_with_tree};
        for seed in 0..200u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (g, tree) = random_graph_with_tree(6 + seed as usize % 10, rng.gen_range(0..3), seed);
            let col = proper_coloring(&g, g.max_degree(), None).unwrap();
            let td = build_remember_td(&g, &tree, &col).unwrap();
            let mut extra = EdgeSet::new();
            for _ in 0..rng.gen_range(1..4) {
                let a = rng.gen_range(0..g.n());
                let b = rng.gen_range(0..g.n());
                if a != b && !g.has_edge(a, b) {
                    extra.insert(norm(a, b));
                }
            }
            let mut both = tree.clone();
            both.extend(extra.iter().copied());
            let l = blocks_of(g.n(), &both).iter().map(block_feedback_edges).max().unwrap_or(0);
            let out = augment_edges(&g, &td, &tree, &extra, &col, l).unwrap();
            let g2 = g.with_edges(&extra).unwrap();
            assert!(validate(&g2, &out).is_valid(), "seed {seed}");
            assert!(out.width().unwrap() <= td.width().unwrap() + l, "seed {seed}");
        }
    }
}
