//! Decompositions from a spanning tree whose width is governed by the vertex
//! and edge remember numbers, plus a spanning-tree search under remember
//! bounds and a generator of bounded-degree k-outerplanar instances.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cycle_structure::{fundamental_cycles, remember_numbers, ChildOrder, CycleError, RootedForest};
use crate::graph_core::{adjacency, is_forest, norm, Edge, EdgeSet, Graph, GraphError};
use crate::orientation::Coloring;
use crate::tree_decomposition::{Anchor, Bag, BagType, TdError, TreeDecomposition};

/// Largest edge count searched exhaustively.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 18;
const RESTARTS: u64 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RememberError {
    #[error("edge set is not a maximal spanning forest of the graph")]
    NotSpanning,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("coloring does not cover the graph")]
    Coloring,
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Decomposition(#[from] TdError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn is_maximal_forest(g: &Graph, tree: &EdgeSet) -> bool {
    tree.iter().all(|&(u, v)| g.has_edge(u, v))
        && is_forest(g.n(), tree)
        && tree.len() + g.components().len() == g.n()
}

/// Decomposition over vertex nodes and tree-edge nodes. Each fundamental
/// cycle contributes the lower-colored endpoint of its non-tree edge to every
/// node on the cycle.
pub fn build_remember_td(g: &Graph, tree: &EdgeSet, col: &Coloring) -> Result<TreeDecomposition, RememberError> {
    build(g, tree, col, None)
}

/// As [`build_remember_td`], with sibling order on vertex nodes following `order`
/// (a child order of the tree rooted at vertex 0).
pub fn build_remember_td_ordered(
    g: &Graph,
    tree: &EdgeSet,
    col: &Coloring,
    order: &ChildOrder,
) -> Result<TreeDecomposition, RememberError> {
    build(g, tree, col, Some(order))
}

fn build(g: &Graph, tree: &EdgeSet, col: &Coloring, order: Option<&ChildOrder>) -> Result<TreeDecomposition, RememberError> {
    if !is_maximal_forest(g, tree) {
        return Err(RememberError::NotSpanning);
    }
    if col.0.len() != g.n() {
        return Err(RememberError::Coloring);
    }
    let n = g.n();
    if n == 0 {
        return Err(RememberError::Decomposition(TdError::Empty));
    }
    let forest = RootedForest::new(n, tree, 0);
    let mut vertex_extra: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut edge_extra: std::collections::BTreeMap<Edge, BTreeSet<usize>> = tree.iter().map(|&e| (e, BTreeSet::new())).collect();
    for fc in fundamental_cycles(g, tree)? {
        let (a, b) = fc.non_tree_edge;
        let low = if (col.color(a), a) < (col.color(b), b) { a } else { b };
        for v in fc.vertices() {
            vertex_extra[v].insert(low);
        }
        for e in fc.tree_edges() {
            edge_extra.get_mut(e).expect("tree edge").insert(low);
        }
    }
    // Vertex node of v is bag v; the node of tree edge (p, c) follows.
    let mut bags: Vec<Bag> = (0..n)
        .map(|v| Bag::new(std::iter::once(v).chain(vertex_extra[v].iter().copied()), BagType::VertexType(0), Anchor::Vertex(v)))
        .collect();
    let mut parent = vec![None; n];
    let mut edge_node = std::collections::BTreeMap::new();
    for (&e, extra) in &edge_extra {
        bags.push(Bag::new([e.0, e.1].into_iter().chain(extra.iter().copied()), BagType::EdgeType(0), Anchor::Edge(e)));
        let id = bags.len() - 1;
        edge_node.insert(e, id);
        let (p, c) = if forest.parent[e.1] == Some(e.0) { (e.0, e.1) } else { (e.1, e.0) };
        parent.push(Some(p));
        parent[c] = Some(id);
    }
    // Roots of further components hang below vertex 0.
    for v in 1..n {
        if forest.parent[v].is_none() {
            parent[v] = Some(0);
        }
    }
    let lists = order.map(|order| {
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); bags.len()];
        for v in 0..n {
            kids[v] = order.children[v].iter().map(|&c| edge_node[&norm(v, c)]).collect();
        }
        for (&e, &id) in &edge_node {
            let c = if forest.parent[e.1] == Some(e.0) { e.1 } else { e.0 };
            kids[id] = vec![c];
        }
        kids[0].extend((1..n).filter(|&v| forest.parent[v].is_none()));
        kids
    });
    Ok(TreeDecomposition::new(bags, 0, parent, lists)?)
}

/// Outcome of a spanning-tree search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSearch {
    pub tree: Option<EdgeSet>,
    /// Whether every spanning tree was examined, so absence is a proof.
    pub exhaustive: bool,
    /// Remember numbers of the best tree seen.
    pub best: (usize, usize),
}

fn objective(vr: usize, er: usize, kappa: usize, lambda: usize) -> (usize, usize) {
    (vr.saturating_sub(kappa) + er.saturating_sub(lambda), vr.max(er + 1))
}

/// Spanning tree with `vr <= kappa` and `er <= lambda`.
pub fn find_spanning_tree(g: &Graph, kappa: usize, lambda: usize) -> Result<TreeSearch, RememberError> {
    find_spanning_tree_seeded(g, kappa, lambda, 0)
}

pub fn find_spanning_tree_seeded(g: &Graph, kappa: usize, lambda: usize, seed: u64) -> Result<TreeSearch, RememberError> {
    if !g.is_connected() {
        return Err(RememberError::Disconnected);
    }
    if g.m() <= EXHAUSTIVE_EDGE_LIMIT {
        exhaustive(g, kappa, lambda)
    } else {
        local_search(g, kappa, lambda, seed)
    }
}

fn exhaustive(g: &Graph, kappa: usize, lambda: usize) -> Result<TreeSearch, RememberError> {
    let edges = g.edges();
    let need = g.n().saturating_sub(1);
    let mut best: Option<((usize, usize), (usize, usize), EdgeSet)> = None;
    let mut pick = Vec::with_capacity(need);
    fn rec(
        g: &Graph,
        edges: &[Edge],
        start: usize,
        need: usize,
        pick: &mut Vec<Edge>,
        kappa: usize,
        lambda: usize,
        best: &mut Option<((usize, usize), (usize, usize), EdgeSet)>,
    ) -> Result<(), RememberError> {
        if pick.len() == need {
            let set: EdgeSet = pick.iter().copied().collect();
            if is_forest(g.n(), &set) {
                let (vr, er) = remember_numbers(g, &set)?;
                let obj = objective(vr, er, kappa, lambda);
                if best.as_ref().is_none_or(|b| obj < b.0) {
                    *best = Some((obj, (vr, er), set));
                }
            }
            return Ok(());
        }
        if edges.len() - start < need - pick.len() {
            return Ok(());
        }
        for i in start..edges.len() {
            pick.push(edges[i]);
            if is_forest(g.n(), &pick.iter().copied().collect()) {
                rec(g, edges, i + 1, need, pick, kappa, lambda, best)?;
            }
            pick.pop();
            if best.as_ref().is_some_and(|b| b.0 .0 == 0 && b.0 .1 <= 1) {
                break;
            }
        }
        Ok(())
    }
    rec(g, edges, 0, need, &mut pick, kappa, lambda, &mut best)?;
    let (obj, rem, set) = best.expect("connected graphs have spanning trees");
    Ok(TreeSearch { tree: (obj.0 == 0).then_some(set), exhaustive: true, best: rem })
}

fn bfs_tree(g: &Graph, root: usize, rng: &mut ChaCha8Rng) -> EdgeSet {
    let mut seen = vec![false; g.n()];
    seen[root] = true;
    let mut tree = EdgeSet::new();
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        let mut nb = g.neighbors(u).to_vec();
        nb.shuffle(rng);
        for w in nb {
            if !seen[w] {
                seen[w] = true;
                tree.insert(norm(u, w));
                q.push_back(w);
            }
        }
    }
    tree
}

/// Edge-swap local search from BFS trees; `RESTARTS` restarts of `10 |E|` steps.
fn local_search(g: &Graph, kappa: usize, lambda: usize, seed: u64) -> Result<TreeSearch, RememberError> {
    let mut best: Option<((usize, usize), (usize, usize), EdgeSet)> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(restart));
        let root = rng.gen_range(0..g.n());
        let mut tree = bfs_tree(g, root, &mut rng);
        let (vr, er) = remember_numbers(g, &tree)?;
        let mut cur = (objective(vr, er, kappa, lambda), (vr, er));
        for _ in 0..10 * g.m() {
            if cur.0 .0 == 0 {
                break;
            }
            let non_tree: Vec<Edge> = g.edges().iter().copied().filter(|e| !tree.contains(e)).collect();
            let Some(&f) = non_tree.choose(&mut rng) else { break };
            let forest = RootedForest::new(g.n(), &tree, 0);
            let path = forest.path(f.0, f.1).expect("spanning tree");
            let out = path.windows(2).map(|w| norm(w[0], w[1])).collect::<Vec<_>>();
            let &drop = out.choose(&mut rng).expect("path has an edge");
            let mut next = tree.clone();
            next.remove(&drop);
            next.insert(f);
            let (vr, er) = remember_numbers(g, &next)?;
            let obj = objective(vr, er, kappa, lambda);
            if obj <= cur.0 {
                tree = next;
                cur = (obj, (vr, er));
            }
        }
        if best.as_ref().is_none_or(|b| cur.0 < b.0) {
            best = Some((cur.0, cur.1, tree));
        }
        if best.as_ref().is_some_and(|b| b.0 .0 == 0) {
            break;
        }
    }
    let (obj, rem, set) = best.expect("at least one restart");
    Ok(TreeSearch { tree: (obj.0 == 0).then_some(set), exhaustive: false, best: rem })
}

/// A generated k-outerplanar graph with its layers, outermost first.
#[derive(Clone, Debug)]
pub struct OuterplanarInstance {
    pub graph: Graph,
    pub layers: Vec<Vec<usize>>,
    pub max_degree: usize,
}

/// `k` nested cycles joined by non-crossing chords between adjacent layers.
///
/// Inner vertex `j` of a layer pair is joined to the outer vertex at the same
/// relative position, and sometimes to its successor too; chords are skipped
/// when an endpoint would exceed `max_degree` (at least 3). Layer sizes split
/// `n` with larger outer layers; every layer has at least 3 vertices.
pub fn random_outerplanar(k: usize, max_degree: usize, n: usize, seed: u64) -> OuterplanarInstance {
    let k = k.max(1);
    let cap = max_degree.max(3);
    let n = n.max(3 * k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Weights k, k-1, ..., 1 from the outside in.
    let total: usize = (1..=k).sum();
    let mut sizes: Vec<usize> = (0..k).map(|i| (n * (k - i) / total).max(3)).collect();
    let used: usize = sizes.iter().sum();
    if used < n {
        sizes[0] += n - used;
    }
    let mut layers = Vec::new();
    let mut next = 0;
    for &s in &sizes {
        layers.push((next..next + s).collect::<Vec<usize>>());
        next += s;
    }
    let mut edges = EdgeSet::new();
    let mut deg = vec![0usize; next];
    let add = |u: usize, v: usize, edges: &mut EdgeSet, deg: &mut Vec<usize>| {
        if edges.insert(norm(u, v)) {
            deg[u] += 1;
            deg[v] += 1;
        }
    };
    for layer in &layers {
        for i in 0..layer.len() {
            add(layer[i], layer[(i + 1) % layer.len()], &mut edges, &mut deg);
        }
    }
    for w in layers.windows(2) {
        let (outer, inner) = (&w[0], &w[1]);
        let f = |j: usize| j * outer.len() / inner.len();
        let mut linked = false;
        for j in 0..inner.len() {
            let (a, b) = (inner[j], outer[f(j)]);
            let fits = |d: &[usize]| d[a] < cap && d[b] < cap;
            if fits(&deg) && (!linked || rng.gen_bool(0.8)) {
                add(a, b, &mut edges, &mut deg);
                linked = true;
            }
            let succ = f(j) + 1;
            if j + 1 < inner.len() && succ <= f(j + 1) && succ < outer.len() {
                let c = outer[succ];
                if deg[a] < cap && deg[c] < cap && rng.gen_bool(0.5) {
                    add(a, c, &mut edges, &mut deg);
                    linked = true;
                }
            }
        }
    }
    let labels = (0..next).map(|i| format!("p{i}")).collect();
    let graph = Graph::new(labels, edges).expect("generator emits a simple graph");
    OuterplanarInstance { max_degree: graph.max_degree(), graph, layers }
}

/// Random connected graph with a random spanning tree, for width checks.
pub fn random_graph_with_tree(n: usize, extra: usize, seed: u64) -> (Graph, EdgeSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.max(2);
    let mut tree = EdgeSet::new();
    for v in 1..n {
        tree.insert(norm(v, rng.gen_range(0..v)));
    }
    let mut edges = tree.clone();
    let mut tries = 0;
    while edges.len() < tree.len() + extra && tries < 50 * (extra + 1) {
        tries += 1;
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.insert(norm(u, v));
        }
    }
    let labels = (0..n).map(|i| format!("x{i}")).collect();
    (Graph::new(labels, edges).expect("simple"), tree)
}

/// Adjacency restricted to the tree, used to read vertex-node child counts.
pub fn tree_degrees(n: usize, tree: &EdgeSet) -> Vec<usize> {
    adjacency(n, tree).iter().map(Vec::len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::halin4;
    use crate::orientation::proper_coloring;
    use crate::tree_decomposition::validate;

    #[test]
    fn k4_star_bags() {
        let h = halin4();
        let g = &h.graph;
        let (a, b, v) = (g.vertex("a").unwrap(), g.vertex("b").unwrap(), g.vertex("v").unwrap());
        // colors a < b < c < v
        let col = Coloring(vec![0, 1, 2, 3]);
        let td = build_remember_td(g, &h.tree_edges, &col).unwrap();
        assert!(validate(g, &td).is_valid());
        assert_eq!(td.bags[v].vertices, vec![a, b, v]);
        let va = td.bags.iter().find(|x| x.anchor == Anchor::Edge(norm(a, v))).unwrap();
        assert_eq!(va.vertices, vec![a, v]);
    }

    #[test]
    fn tree_graph_has_width_one() {
        let g = Graph::from_labels(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("b", "d")]).unwrap();
        let col = proper_coloring(&g, 1, None).unwrap();
        let td = build_remember_td(&g, &g.edge_set(), &col).unwrap();
        assert_eq!(td.width().unwrap(), 1);
        assert!(validate(&g, &td).is_valid());
    }

    #[test]
    fn width_bound_random() {
        for seed in 0..25 {
            let (g, tree) = random_graph_with_tree(8 + seed as usize % 10, seed as usize % 7, seed);
            let col = proper_coloring(&g, g.max_degree(), None).unwrap();
            let td = build_remember_td(&g, &tree, &col).unwrap();
            assert!(validate(&g, &td).is_valid(), "seed {seed}");
            let (vr, er) = remember_numbers(&g, &tree).unwrap();
            assert!(td.width().unwrap() <= vr.max(er + 1), "seed {seed}");
            // Vertex nodes have one child per tree edge leaving them downward.
            let tdeg = tree_degrees(g.n(), &tree);
            for v in 0..g.n() {
                let up = usize::from(v != 0);
                assert_eq!(td.children[v].len(), tdeg[v] - up);
            }
        }
    }

    #[test]
    fn rejects_non_spanning() {
        let h = halin4();
        let col = Coloring(vec![0, 1, 2, 3]);
        let mut t = h.tree_edges.clone();
        t.pop_first();
        assert_eq!(build_remember_td(&h.graph, &t, &col), Err(RememberError::NotSpanning));
    }

    #[test]
    fn search_examples() {
        let path = Graph::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let r = find_spanning_tree(&path, 0, 0).unwrap();
        assert_eq!(r.tree, Some(path.edge_set()));
        let k4 = halin4().graph;
        let r = find_spanning_tree(&k4, 3, 2).unwrap();
        assert!(r.tree.is_some());
        let r = find_spanning_tree(&k4, 0, 0).unwrap();
        assert!(r.tree.is_none() && r.exhaustive);
        let c6 = Graph::new((0..6).map(|i| i.to_string()).collect(), (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let r = find_spanning_tree(&c6, 1, 2).unwrap();
        assert!(r.tree.is_some());
        let two = Graph::from_labels(&["a", "b"], &[]).unwrap();
        assert_eq!(find_spanning_tree(&two, 1, 1), Err(RememberError::Disconnected));
    }

    #[test]
    fn outerplanar_instances_meet_bounds() {
        for seed in 0..5 {
            let inst = random_outerplanar(2, 4, 40, seed);
            assert!(inst.graph.is_connected());
            assert!(inst.max_degree <= 4);
            let (k, d) = (2, inst.max_degree);
            let r = find_spanning_tree(&inst.graph, d * k - 1, 2 * k).unwrap();
            assert!(r.tree.is_some(), "seed {seed}: best {:?}", r.best);
        }
    }
}
