//! Proper colorings and the coloring + flag-set encoding of edge orientations.
//!
//! With a proper coloring fixed, a set `F` of edges encodes any orientation:
//! `{v, w}` points `v -> w` exactly when `col(v) < col(w)` and the edge is in
//! `F`, or `col(v) > col(w)` and it is not.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::graph_core::{adjacency, norm, Edge, EdgeSet, Graph, HalinInput, KCycleInput};
use crate::tree_decomposition::TreeDecomposition;

/// Vertex exhaustive-search limit for colorings without a decomposition.
pub const EXACT_COLORING_LIMIT: usize = 20;
const SEARCH_NODE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientationError {
    #[error("graph is not colorable with {0} colors")]
    NotColorable(usize),
    #[error("coloring search budget exceeded")]
    SearchBudgetExceeded,
    #[error("coloring is not proper at edge {0:?}")]
    ImproperColoring(Edge),
    #[error("orientation misses edge {0:?}")]
    IncompleteOrientation(Edge),
}

/// Color index per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring(pub Vec<usize>);

impl Coloring {
    pub fn color(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn num_colors(&self) -> usize {
        self.0.iter().max().map_or(0, |&c| c + 1)
    }

    pub fn is_proper(&self, g: &Graph) -> bool {
        self.0.len() == g.n() && g.edges().iter().all(|&(u, v)| self.0[u] != self.0[v])
    }

    fn check(&self, g: &Graph) -> Result<(), OrientationError> {
        match g.edges().iter().find(|&&(u, v)| self.0[u] == self.0[v]) {
            Some(&e) => Err(OrientationError::ImproperColoring(e)),
            None => Ok(()),
        }
    }
}

/// Edge -> `(from, to)`.
pub type Orientation = BTreeMap<Edge, (usize, usize)>;

/// A coloring plus the flag set that encodes an orientation against it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationWitness {
    pub coloring: Coloring,
    pub flag_set: EdgeSet,
}

/// Proper coloring with at most `k + 1` colors.
///
/// With a decomposition of width at most `k`, vertices are colored greedily in
/// top-down order of their highest bag. Otherwise exact backtracking is used up
/// to [`EXACT_COLORING_LIMIT`] vertices and a smallest-last greedy order above.
pub fn proper_coloring(
    g: &Graph,
    k: usize,
    td: Option<&TreeDecomposition>,
) -> Result<Coloring, OrientationError> {
    let palette = k + 1;
    if let Some(td) = td {
        if let Some(col) = coloring_from_decomposition(g, td, palette) {
            return Ok(col);
        }
    }
    if g.n() <= EXACT_COLORING_LIMIT {
        return exact_coloring(g, palette);
    }
    let col = greedy_smallest_last(g);
    if col.num_colors() <= palette {
        Ok(col)
    } else {
        Err(OrientationError::SearchBudgetExceeded)
    }
}

fn coloring_from_decomposition(g: &Graph, td: &TreeDecomposition, palette: usize) -> Option<Coloring> {
    let mut col: Vec<Option<usize>> = vec![None; g.n()];
    for b in td.preorder() {
        let bag = &td.bags[b].vertices;
        for &v in bag {
            if col[v].is_some() {
                continue;
            }
            let c = (0..palette).find(|&c| {
                g.neighbors(v).iter().all(|&w| col[w] != Some(c))
                    && bag.iter().all(|&w| w == v || col[w] != Some(c))
            })?;
            col[v] = Some(c);
        }
    }
    col.into_iter().collect::<Option<Vec<_>>>().map(Coloring)
}

fn exact_coloring(g: &Graph, palette: usize) -> Result<Coloring, OrientationError> {
    let n = g.n();
    // Order: decreasing degree, ties by index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut col = vec![usize::MAX; n];
    let mut nodes = 0u64;
    fn go(
        g: &Graph,
        order: &[usize],
        i: usize,
        palette: usize,
        col: &mut [usize],
        nodes: &mut u64,
    ) -> Result<bool, OrientationError> {
        if i == order.len() {
            return Ok(true);
        }
        *nodes += 1;
        if *nodes > SEARCH_NODE_BUDGET {
            return Err(OrientationError::SearchBudgetExceeded);
        }
        let v = order[i];
        // Symmetry break: never open more than one new color at a time.
        let used = order[..i].iter().map(|&u| col[u] + 1).max().unwrap_or(0);
        for c in 0..palette.min(used + 1) {
            if g.neighbors(v).iter().all(|&w| col[w] != c) {
                col[v] = c;
                if go(g, order, i + 1, palette, col, nodes)? {
                    return Ok(true);
                }
                col[v] = usize::MAX;
            }
        }
        Ok(false)
    }
    if go(g, &order, 0, palette, &mut col, &mut nodes)? {
        Ok(Coloring(col))
    } else {
        Err(OrientationError::NotColorable(palette))
    }
}

fn greedy_smallest_last(g: &Graph) -> Coloring {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut stack = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n).filter(|&v| !removed[v]).min_by_key(|&v| (deg[v], v)).expect("vertex left");
        removed[v] = true;
        stack.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                deg[w] -= 1;
            }
        }
    }
    let mut col = vec![usize::MAX; n];
    for &v in stack.iter().rev() {
        col[v] = (0..).find(|&c| g.neighbors(v).iter().all(|&w| col[w] != c)).expect("some color");
    }
    Coloring(col)
}

/// Flag set `F` such that decoding against `col` gives back `target`.
pub fn encode_orientation(
    g: &Graph,
    col: &Coloring,
    target: &Orientation,
) -> Result<EdgeSet, OrientationError> {
    col.check(g)?;
    let mut f = EdgeSet::new();
    for &e in g.edges() {
        let &(from, to) = target.get(&e).ok_or(OrientationError::IncompleteOrientation(e))?;
        if col.color(from) < col.color(to) {
            f.insert(e);
        }
    }
    Ok(f)
}

/// Orientation encoded by a witness.
pub fn decode_orientation(g: &Graph, w: &OrientationWitness) -> Result<Orientation, OrientationError> {
    w.coloring.check(g)?;
    let mut out = Orientation::new();
    for &e in g.edges() {
        let (lo_col, hi_col) = if w.coloring.color(e.0) < w.coloring.color(e.1) { (e.0, e.1) } else { (e.1, e.0) };
        let arc = if w.flag_set.contains(&e) { (lo_col, hi_col) } else { (hi_col, lo_col) };
        out.insert(e, arc);
    }
    Ok(out)
}

/// Tree edges directed away from `root`.
pub fn orient_tree_from(n: usize, tree: &EdgeSet, root: usize) -> Orientation {
    let adj = adjacency(n, tree);
    let mut out = Orientation::new();
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                out.insert(norm(u, w), (u, w));
                q.push_back(w);
            }
        }
    }
    out
}

fn orient_cycle(out: &mut Orientation, seq: &[usize]) {
    for i in 0..seq.len() {
        let (a, b) = (seq[i], seq[(i + 1) % seq.len()]);
        out.insert(norm(a, b), (a, b));
    }
}

/// Tree directed away from the root leaf, cycle following the leaf rotation.
pub fn halin_orientation(h: &HalinInput) -> Orientation {
    let mut out = orient_tree_from(h.graph.n(), &h.tree_edges, h.root);
    orient_cycle(&mut out, &h.cycle);
    out
}

/// Tree directed away from the outer root, each level cycle along its sequence.
pub fn kcycle_orientation(kc: &KCycleInput) -> Orientation {
    let mut out = orient_tree_from(kc.graph.n(), &kc.tree_edges, kc.root());
    for lv in &kc.levels {
        orient_cycle(&mut out, lv);
    }
    out
}

/// In-degree and out-degree of `v` among the arcs of `edges`.
pub fn degrees_in(o: &Orientation, edges: &EdgeSet, v: usize) -> (usize, usize) {
    let mut din = 0;
    let mut dout = 0;
    for e in edges {
        if let Some(&(a, b)) = o.get(e) {
            if b == v {
                din += 1;
            }
            if a == v {
                dout += 1;
            }
        }
    }
    (din, dout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{halin4, halin_from_plane_tree, random_halin};
    use proptest::prelude::*;

    fn k4() -> Graph {
        halin4().graph
    }

    #[test]
    fn k4_needs_four_colors() {
        let col = proper_coloring(&k4(), 3, None).unwrap();
        assert!(col.is_proper(&k4()));
        assert_eq!(col.num_colors(), 4);
        assert_eq!(proper_coloring(&k4(), 2, None), Err(OrientationError::NotColorable(3)));
    }

    #[test]
    fn single_edge_two_colors() {
        let g = Graph::from_labels(&["a", "b"], &[("a", "b")]).unwrap();
        let col = proper_coloring(&g, 1, None).unwrap();
        assert_eq!(col.num_colors(), 2);
    }

    #[test]
    fn large_halin_four_colors() {
        let h = halin_from_plane_tree(&random_halin(12, 5)).unwrap();
        assert!(h.graph.n() >= 30);
        let col = proper_coloring(&h.graph, 3, None).unwrap();
        assert!(col.is_proper(&h.graph) && col.num_colors() <= 4);
    }

    #[test]
    fn flag_rule_examples() {
        let g = Graph::from_labels(&["a", "b"], &[("a", "b")]).unwrap();
        let col = Coloring(vec![0, 1]);
        let e = (0, 1);
        let forward: Orientation = [(e, (0, 1))].into_iter().collect();
        let backward: Orientation = [(e, (1, 0))].into_iter().collect();
        assert!(encode_orientation(&g, &col, &forward).unwrap().contains(&e));
        assert!(encode_orientation(&g, &col, &backward).unwrap().is_empty());
        let w = |f: EdgeSet| OrientationWitness { coloring: col.clone(), flag_set: f };
        assert_eq!(decode_orientation(&g, &w([e].into_iter().collect())).unwrap()[&e], (0, 1));
        assert_eq!(decode_orientation(&g, &w(EdgeSet::new())).unwrap()[&e], (1, 0));
    }

    #[test]
    fn halin4_orientation_shape() {
        let h = halin4();
        let g = &h.graph;
        let v = |s: &str| g.vertex(s).unwrap();
        let o = halin_orientation(&h);
        for (a, b) in [("a", "v"), ("v", "b"), ("v", "c"), ("a", "b"), ("b", "c"), ("c", "a")] {
            assert_eq!(o[&norm(v(a), v(b))], (v(a), v(b)));
        }
        for &x in &h.cycle {
            assert_eq!(degrees_in(&o, &h.cycle_edges, x), (1, 1));
        }
        assert_eq!(degrees_in(&o, &h.tree_edges, h.root).0, 0);
        let col = proper_coloring(g, 3, None).unwrap();
        let f = encode_orientation(g, &col, &o).unwrap();
        let back = decode_orientation(g, &OrientationWitness { coloring: col, flag_set: f }).unwrap();
        assert_eq!(back, o);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn encode_decode_round_trip(n in 2usize..9, seed in any::<u64>(), flips in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
            let mut edges = Vec::new();
            for u in 0..n { for v in u + 1..n { if rng.gen_bool(0.5) { edges.push((u, v)); } } }
            let g = Graph::new(labels, edges).unwrap();
            let col = proper_coloring(&g, n, None).unwrap();
            let target: Orientation = g.edges().iter().enumerate()
                .map(|(i, &e)| (e, if flips >> (i % 64) & 1 == 1 { (e.0, e.1) } else { (e.1, e.0) }))
                .collect();
            let f = encode_orientation(&g, &col, &target).unwrap();
            let back = decode_orientation(&g, &OrientationWitness { coloring: col, flag_set: f }).unwrap();
            prop_assert_eq!(back, target);
        }
    }
}
