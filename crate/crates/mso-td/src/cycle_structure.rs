//! Spanning-tree combinatorics: fundamental cycles, remember numbers,
//! biconnected blocks, sibling orders and boundary vertices.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph_core::{adjacency, norm, Edge, EdgeSet, Graph, HalinInput, KCycleInput};
use crate::orientation::Orientation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycleError {
    #[error("edge {0:?} is a tree edge")]
    TreeEdge(Edge),
    #[error("endpoints of {0:?} are in different tree components")]
    Disconnected(Edge),
    #[error("arcs {0:?} and {1:?} are not siblings")]
    NotSiblings((usize, usize), (usize, usize)),
    #[error("orientation does not match the input structure")]
    Orientation,
}

/// Tree path between the endpoints of a non-tree edge, plus the edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalCycle {
    pub non_tree_edge: Edge,
    /// Tree path from the lower to the higher endpoint, then the non-tree edge.
    pub cycle_edges: Vec<Edge>,
}

impl FundamentalCycle {
    pub fn vertices(&self) -> BTreeSet<usize> {
        self.cycle_edges.iter().flat_map(|&(u, v)| [u, v]).collect()
    }

    pub fn tree_edges(&self) -> &[Edge] {
        &self.cycle_edges[..self.cycle_edges.len() - 1]
    }
}

/// Parent pointers and depths of a forest, each component rooted at its
/// smallest vertex unless `root` lies in it.
#[derive(Clone, Debug)]
pub struct RootedForest {
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    pub component: Vec<usize>,
}

impl RootedForest {
    pub fn new(n: usize, tree: &EdgeSet, root: usize) -> RootedForest {
        let adj = adjacency(n, tree);
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut component = vec![usize::MAX; n];
        let starts = std::iter::once(root).filter(|&r| r < n).chain(0..n);
        for s in starts {
            if component[s] != usize::MAX {
                continue;
            }
            component[s] = s;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &w in &adj[u] {
                    if component[w] == usize::MAX {
                        component[w] = s;
                        parent[w] = Some(u);
                        depth[w] = depth[u] + 1;
                        q.push_back(w);
                    }
                }
            }
        }
        RootedForest { parent, depth, component }
    }

    /// Tree path from `a` to `b` as a vertex sequence.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if self.component[a] != self.component[b] {
            return None;
        }
        let (mut x, mut y) = (a, b);
        let mut front = vec![x];
        let mut back = vec![y];
        while self.depth[x] > self.depth[y] {
            x = self.parent[x]?;
            front.push(x);
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y]?;
            back.push(y);
        }
        while x != y {
            x = self.parent[x]?;
            y = self.parent[y]?;
            front.push(x);
            back.push(y);
        }
        back.pop();
        front.extend(back.into_iter().rev());
        Some(front)
    }
}

fn path_edges(path: &[usize]) -> Vec<Edge> {
    path.windows(2).map(|w| norm(w[0], w[1])).collect()
}

pub fn fundamental_cycle(g: &Graph, tree: &EdgeSet, e: Edge) -> Result<FundamentalCycle, CycleError> {
    fundamental_cycle_in(&RootedForest::new(g.n(), tree, 0), tree, e)
}

fn fundamental_cycle_in(f: &RootedForest, tree: &EdgeSet, e: Edge) -> Result<FundamentalCycle, CycleError> {
    let e = norm(e.0, e.1);
    if tree.contains(&e) {
        return Err(CycleError::TreeEdge(e));
    }
    let path = f.path(e.0, e.1).ok_or(CycleError::Disconnected(e))?;
    let mut cycle_edges = path_edges(&path);
    cycle_edges.push(e);
    Ok(FundamentalCycle { non_tree_edge: e, cycle_edges })
}

/// Fundamental cycles of every non-tree edge, in edge order.
pub fn fundamental_cycles(g: &Graph, tree: &EdgeSet) -> Result<Vec<FundamentalCycle>, CycleError> {
    let f = RootedForest::new(g.n(), tree, 0);
    g.edges().iter().filter(|e| !tree.contains(e)).map(|&e| fundamental_cycle_in(&f, tree, e)).collect()
}

/// Per-vertex and per-tree-edge counts of fundamental cycles through them.
#[derive(Clone, Debug)]
pub struct RememberCounts {
    pub per_vertex: Vec<usize>,
    pub per_tree_edge: Vec<(Edge, usize)>,
}

pub fn remember_counts(g: &Graph, tree: &EdgeSet) -> Result<RememberCounts, CycleError> {
    let mut per_vertex = vec![0; g.n()];
    let mut per_edge: std::collections::BTreeMap<Edge, usize> = tree.iter().map(|&e| (e, 0)).collect();
    for fc in fundamental_cycles(g, tree)? {
        for v in fc.vertices() {
            per_vertex[v] += 1;
        }
        for e in fc.tree_edges() {
            *per_edge.get_mut(e).expect("path uses tree edges") += 1;
        }
    }
    Ok(RememberCounts { per_vertex, per_tree_edge: per_edge.into_iter().collect() })
}

/// `(vr, er)`: the most fundamental cycles through one vertex, resp. one tree edge.
pub fn remember_numbers(g: &Graph, tree: &EdgeSet) -> Result<(usize, usize), CycleError> {
    let c = remember_counts(g, tree)?;
    let vr = c.per_vertex.iter().copied().max().unwrap_or(0);
    let er = c.per_tree_edge.iter().map(|&(_, k)| k).max().unwrap_or(0);
    Ok((vr, er))
}

/// Ordered child lists of a rooted tree; `children[v]` holds the heads of the
/// arcs leaving `v`, leftmost first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChildOrder {
    pub children: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl ChildOrder {
    pub fn leftmost(&self, v: usize) -> Option<usize> {
        self.children[v].first().copied()
    }

    pub fn rightmost(&self, v: usize) -> Option<usize> {
        self.children[v].last().copied()
    }

    fn position(&self, arc: (usize, usize)) -> Option<usize> {
        self.children.get(arc.0)?.iter().position(|&x| x == arc.1)
    }

    /// Whether sibling arc `e` comes before `f`.
    pub fn precedes(&self, e: (usize, usize), f: (usize, usize)) -> Result<bool, CycleError> {
        match (e.0 == f.0, self.position(e), self.position(f)) {
            (true, Some(a), Some(b)) => Ok(a < b),
            _ => Err(CycleError::NotSiblings(e, f)),
        }
    }

    /// Sibling immediately to the left of `x` under `y`.
    pub fn left_sibling(&self, y: usize, x: usize) -> Option<usize> {
        let p = self.position((y, x))?;
        p.checked_sub(1).map(|q| self.children[y][q])
    }

    pub fn right_sibling(&self, y: usize, x: usize) -> Option<usize> {
        let p = self.position((y, x))?;
        self.children[y].get(p + 1).copied()
    }
}

/// Arcs of a tree directed away from its root, as `children` lists in vertex order.
fn arcs_by_tail(n: usize, o: &Orientation, tree: &EdgeSet) -> Result<Vec<Vec<usize>>, CycleError> {
    let mut children = vec![Vec::new(); n];
    for e in tree {
        let &(from, to) = o.get(e).ok_or(CycleError::Orientation)?;
        children[from].push(to);
    }
    Ok(children)
}

/// Sibling order of a Halin tree.
///
/// Each tree arc is keyed by the closest cycle vertex, measured along the
/// directed cycle from the root, that is the target of a cycle arc whose
/// fundamental cycle uses the tree arc. The root itself is skipped. Siblings
/// with the larger key come first.
pub fn child_order_halin(h: &HalinInput, o: &Orientation) -> Result<ChildOrder, CycleError> {
    let n = h.graph.n();
    let mut children = arcs_by_tail(n, o, &h.tree_edges)?;
    let forest = RootedForest::new(n, &h.tree_edges, h.root);
    let mut dist = vec![usize::MAX; n];
    for (i, &v) in h.cycle.iter().enumerate() {
        dist[v] = i;
    }
    let mut key = vec![usize::MAX; n];
    for w in h.cycle.windows(2).map(|w| (w[0], w[1])).chain([(h.cycle[h.cycle.len() - 1], h.cycle[0])]) {
        let (from, to) = w;
        let &arc = o.get(&norm(from, to)).ok_or(CycleError::Orientation)?;
        if arc != (from, to) {
            return Err(CycleError::Orientation);
        }
        if to == h.root {
            continue;
        }
        let path = forest.path(from, to).ok_or(CycleError::Orientation)?;
        for pair in path.windows(2) {
            // Key sits on the deeper endpoint of each tree edge.
            let child = if forest.parent[pair[0]] == Some(pair[1]) { pair[0] } else { pair[1] };
            key[child] = key[child].min(dist[to]);
        }
    }
    for list in children.iter_mut() {
        list.sort_by(|a, b| key[*b].cmp(&key[*a]));
    }
    Ok(ChildOrder { children })
}

/// Sibling order of a k-cycle tree rooted at its center: children ordered by
/// descending position on their level cycle, counted from that level's root.
pub fn kcycle_child_order(kc: &KCycleInput) -> ChildOrder {
    let n = kc.graph.n();
    let forest = RootedForest::new(n, &kc.tree_edges, kc.center);
    let mut pos = vec![0usize; n];
    for (level, cycle) in kc.levels.iter().enumerate() {
        let start = cycle.iter().position(|&v| v == kc.level_roots[level]).unwrap_or(0);
        for (i, &v) in cycle.iter().enumerate() {
            pos[v] = (i + cycle.len() - start) % cycle.len();
        }
    }
    let mut children = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = forest.parent[v] {
            children[p].push(v);
        }
    }
    for list in children.iter_mut() {
        list.sort_by(|a, b| pos[*b].cmp(&pos[*a]));
    }
    ChildOrder { children }
}

/// Follow leftmost (or rightmost) children from `v` down to a leaf.
pub fn boundary(order: &ChildOrder, v: usize, side: Side) -> usize {
    let mut cur = v;
    loop {
        let next = match side {
            Side::Left => order.leftmost(cur),
            Side::Right => order.rightmost(cur),
        };
        match next {
            Some(x) => cur = x,
            None => return cur,
        }
    }
}

/// Extreme-side descendant of `v` at tree depth `level`, reachable through
/// `restricted` when given. `depth` holds depths from the center.
pub fn ith_boundary(
    order: &ChildOrder,
    depth: &[usize],
    v: usize,
    level: usize,
    side: Side,
    restricted: Option<&EdgeSet>,
) -> Option<usize> {
    if depth[v] == level {
        return Some(v);
    }
    if depth[v] > level {
        return None;
    }
    let allowed = |x: usize, y: usize| restricted.is_none_or(|r| r.contains(&norm(x, y)));
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        if depth[u] == level {
            return Some(u);
        }
        let kids: Vec<usize> = order.children[u].iter().copied().filter(|&x| allowed(u, x)).collect();
        match side {
            Side::Left => stack.extend(kids.into_iter().rev()),
            Side::Right => stack.extend(kids),
        }
    }
    None
}

/// `e` together with every sibling arc to its right.
pub fn right_neighbor_closure(order: &ChildOrder, e: (usize, usize)) -> EdgeSet {
    let (y, x) = e;
    let mut out = EdgeSet::new();
    if let Some(p) = order.children[y].iter().position(|&c| c == x) {
        out.extend(order.children[y][p..].iter().map(|&c| norm(y, c)));
    }
    out
}

/// A biconnected block: its edges and the vertices they touch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub edges: Vec<Edge>,
    pub vertices: Vec<usize>,
}

pub fn biconnected_components(g: &Graph) -> Vec<Block> {
    blocks_of(g.n(), &g.edge_set())
}

/// Biconnected blocks of `(0..n, edges)`; isolated vertices belong to no block.
pub fn blocks_of(n: usize, edges: &EdgeSet) -> Vec<Block> {
    let adj = adjacency(n, edges);
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    let mut stack: Vec<Edge> = Vec::new();
    let mut out = Vec::new();
    for s in 0..n {
        if disc[s] != usize::MAX {
            continue;
        }
        disc[s] = timer;
        low[s] = timer;
        timer += 1;
        // Frames: (vertex, parent, next neighbor index).
        let mut frames: Vec<(usize, Option<usize>, usize)> = vec![(s, None, 0)];
        while let Some(&mut (u, p, ref mut i)) = frames.last_mut() {
            if *i < adj[u].len() {
                let w = adj[u][*i];
                *i += 1;
                if Some(w) == p {
                    continue;
                }
                if disc[w] == usize::MAX {
                    stack.push(norm(u, w));
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    frames.push((w, Some(u), 0));
                } else if disc[w] < disc[u] {
                    stack.push(norm(u, w));
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                frames.pop();
                if let Some(p) = p {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(e) = stack.pop() {
                            block.push(e);
                            if e == norm(p, u) {
                                break;
                            }
                        }
                        block.sort_unstable();
                        let vertices: BTreeSet<usize> = block.iter().flat_map(|&(a, b)| [a, b]).collect();
                        out.push(Block { edges: block, vertices: vertices.into_iter().collect() });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.edges[0].cmp(&b.edges[0]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{halin4, halin_from_plane_tree, random_halin, random_kcycle};
    use crate::orientation::{halin_orientation, kcycle_orientation};

    fn idx(g: &Graph, a: &str, b: &str) -> Edge {
        norm(g.vertex(a).unwrap(), g.vertex(b).unwrap())
    }

    #[test]
    fn halin4_fundamental_cycles() {
        let h = halin4();
        let g = &h.graph;
        let fc = fundamental_cycle(g, &h.tree_edges, idx(g, "a", "b")).unwrap();
        let set: BTreeSet<Edge> = fc.cycle_edges.iter().copied().collect();
        assert_eq!(set, BTreeSet::from([idx(g, "a", "v"), idx(g, "v", "b"), idx(g, "a", "b")]));
        let fc = fundamental_cycle(g, &h.tree_edges, idx(g, "b", "c")).unwrap();
        let set: BTreeSet<Edge> = fc.cycle_edges.iter().copied().collect();
        assert_eq!(set, BTreeSet::from([idx(g, "v", "b"), idx(g, "v", "c"), idx(g, "b", "c")]));
        assert_eq!(fundamental_cycle(g, &h.tree_edges, idx(g, "v", "a")), Err(CycleError::TreeEdge(idx(g, "a", "v"))));
    }

    #[test]
    fn remember_number_examples() {
        let h = halin4();
        assert_eq!(remember_numbers(&h.graph, &h.tree_edges).unwrap(), (3, 2));
        let path = Graph::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(remember_numbers(&path, &path.edge_set()).unwrap(), (0, 0));
        let c4 = Graph::from_labels(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]).unwrap();
        let tree: EdgeSet = [idx(&c4, "a", "b"), idx(&c4, "b", "c"), idx(&c4, "c", "d")].into();
        assert_eq!(remember_numbers(&c4, &tree).unwrap(), (1, 1));
        let counts = remember_counts(&c4, &tree).unwrap();
        assert_eq!(counts.per_tree_edge.iter().filter(|(_, k)| *k == 1).count(), 3);
    }

    #[test]
    fn halin4_child_order_and_boundaries() {
        let h = halin4();
        let g = &h.graph;
        let o = halin_orientation(&h);
        let order = child_order_halin(&h, &o).unwrap();
        let (v, b, c) = (g.vertex("v").unwrap(), g.vertex("b").unwrap(), g.vertex("c").unwrap());
        assert_eq!(order.children[v], vec![c, b]);
        assert!(order.children[b].is_empty());
        assert_eq!(boundary(&order, b, Side::Left), b);
        assert_eq!(boundary(&order, v, Side::Left), c);
        assert_eq!(boundary(&order, v, Side::Right), b);
        assert_eq!(right_neighbor_closure(&order, (v, c)), EdgeSet::from([norm(v, c), norm(v, b)]));
        assert_eq!(right_neighbor_closure(&order, (v, b)), EdgeSet::from([norm(v, b)]));
        assert!(order.precedes((v, c), (v, b)).unwrap());
        assert!(order.precedes((v, c), (b, c)).is_err());
    }

    #[test]
    fn halin_edge_cycle_counts() {
        for seed in 0..20 {
            let h = halin_from_plane_tree(&random_halin(1 + seed as usize % 9, seed)).unwrap();
            let tree = &h.tree_edges;
            let f = RootedForest::new(h.graph.n(), tree, h.root);
            let mut count: std::collections::BTreeMap<Edge, usize> = tree.iter().map(|&e| (e, 0)).collect();
            for &e in &h.cycle_edges {
                let fc = fundamental_cycle_in(&f, tree, e).unwrap();
                for t in fc.tree_edges() {
                    *count.get_mut(t).unwrap() += 1;
                }
            }
            assert!(count.values().all(|&k| k == 2), "seed {seed}");
        }
    }

    #[test]
    fn halin_child_order_is_reverse_cycle_order_of_leaves() {
        for seed in 0..30 {
            let h = halin_from_plane_tree(&random_halin(2 + seed as usize % 7, seed)).unwrap();
            let o = halin_orientation(&h);
            let order = child_order_halin(&h, &o).unwrap();
            let mut pos = vec![usize::MAX; h.graph.n()];
            for (i, &v) in h.cycle.iter().enumerate() {
                pos[v] = i;
            }
            // Leftmost boundary of a left sibling comes later on the cycle.
            for list in &order.children {
                for w in list.windows(2) {
                    let a = boundary(&order, w[0], Side::Right);
                    let b = boundary(&order, w[1], Side::Left);
                    assert!(pos[a] > pos[b], "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn ith_boundaries() {
        let kc = random_kcycle(2, 2, 4);
        let order = kcycle_child_order(&kc);
        let depth: Vec<usize> = kc.depths().into_iter().map(|d| d.unwrap()).collect();
        let left = ith_boundary(&order, &depth, kc.center, 2, Side::Left, None).unwrap();
        assert_eq!(depth[left], 2);
        let mut x = kc.center;
        while depth[x] < 2 {
            x = order.leftmost(x).unwrap();
        }
        assert_eq!(left, x);
        let some = (0..kc.graph.n()).find(|&v| depth[v] == 1).unwrap();
        assert_eq!(ith_boundary(&order, &depth, some, 1, Side::Right, None), Some(some));
        assert_eq!(ith_boundary(&order, &depth, kc.center, 2, Side::Left, Some(&EdgeSet::new())), None);
        let _ = kcycle_orientation(&kc);
    }

    #[test]
    fn blocks() {
        let k4 = halin4().graph;
        assert_eq!(biconnected_components(&k4).len(), 1);
        let bowtie = Graph::from_labels(
            &["a", "b", "c", "d", "e"],
            &[("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "e"), ("e", "c")],
        )
        .unwrap();
        let bl = biconnected_components(&bowtie);
        assert_eq!(bl.len(), 2);
        assert!(bl.iter().all(|b| b.edges.len() == 3));
        let path = Graph::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(biconnected_components(&path).len(), 2);
    }
}
