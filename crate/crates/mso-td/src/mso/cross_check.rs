//! Agreement between the predicate library and the algorithmic modules on
//! small instances.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Evaluator, Library, LibraryParams, MsoError, Structure, Value};
use crate::cycle_structure::{child_order_halin, fundamental_cycle, kcycle_child_order, CycleError};
use crate::graph_core::{cycle_pairs, norm, Edge, GraphError, HalinInput, KCycleInput};
use crate::halin_builder::{build_halin_td_uncontracted, halin_parent_relation, BuildError, ParentRule};
use crate::orientation::{
    encode_orientation, halin_orientation, orient_tree_from, proper_coloring, Orientation, OrientationError,
    OrientationWitness,
};
use crate::tree_decomposition::{Anchor, BagType};

/// Largest instance the sweeps accept.
pub const CROSS_CHECK_LIMIT: usize = 12;
/// Largest candidate bag size in the subset sweep.
pub const SWEEP_SIZE: usize = 4;

#[derive(Debug, Error)]
pub enum CrossCheckError {
    #[error("instance has {0} vertices; cross-checks accept at most {CROSS_CHECK_LIMIT}")]
    TooLarge(usize),
    #[error(transparent)]
    Mso(#[from] MsoError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Orientation(#[from] OrientationError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Counts of comparisons per predicate and every disagreement found.
#[derive(Clone, Debug, Default)]
pub struct CrossCheckReport {
    pub checked: BTreeMap<String, usize>,
    pub disagreements: Vec<String>,
}

impl CrossCheckReport {
    fn record(&mut self, check: &str, ok: bool, detail: impl FnOnce() -> String) {
        *self.checked.entry(check.to_string()).or_default() += 1;
        if !ok {
            self.disagreements.push(format!("{check}: {}", detail()));
        }
    }

    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty()
    }

    pub fn total(&self) -> usize {
        self.checked.values().sum()
    }

    pub fn merge(&mut self, other: CrossCheckReport) {
        for (k, v) in other.checked {
            *self.checked.entry(k).or_default() += v;
        }
        self.disagreements.extend(other.disagreements);
    }
}

/// Library sized for the structures built here.
pub fn default_library() -> Library {
    Library::standard(LibraryParams::default())
}

/// Color classes and flag set for `target`, padded to the library's colors.
pub fn attach_orientation(s: &mut Structure, target: &Orientation) -> Result<(), CrossCheckError> {
    let g = &s.graph;
    let coloring = proper_coloring(g, LibraryParams::default().colors - 1, None)?;
    let flag_set = encode_orientation(g, &coloring, target)?;
    s.set_orientation(&OrientationWitness { coloring, flag_set })?;
    for c in s.color_count()..LibraryParams::default().colors {
        s.set_vertices(&format!("X{c}"), []);
    }
    Ok(())
}

/// Halin structure: `E_T`, `E_C`, root leaf `r`, and the orientation of
/// the tree away from `r` with the cycle along the leaf order.
pub fn halin_structure(h: &HalinInput) -> Result<Structure, CrossCheckError> {
    let mut s = Structure::new(h.graph.clone())?;
    attach_orientation(&mut s, &halin_orientation(h))?;
    s.set_edges("E_T", &h.tree_edges)?;
    s.set_edges("E_C", &h.cycle_edges)?;
    s.set_vertex("r", h.root);
    Ok(s)
}

/// Tree directed away from the center, level cycles along their sequences.
pub fn kcycle_center_orientation(kc: &KCycleInput) -> Orientation {
    let mut out = orient_tree_from(kc.graph.n(), &kc.tree_edges, kc.center);
    for lv in &kc.levels {
        for (a, b) in cycle_pairs(lv) {
            out.insert(norm(a, b), (a, b));
        }
    }
    out
}

/// k-cycle structure: `c`, `E_T`, `E_C1..`, `r1..`, outer root `r`.
pub fn kcycle_structure(kc: &KCycleInput) -> Result<Structure, CrossCheckError> {
    let mut s = Structure::new(kc.graph.clone())?;
    attach_orientation(&mut s, &kcycle_center_orientation(kc))?;
    s.set_edges("E_T", &kc.tree_edges)?;
    s.set_vertex("c", kc.center);
    s.set_vertex("r", kc.root());
    for i in 0..kc.k() {
        s.set_edges(&format!("E_C{}", i + 1), &kc.level_edges(i))?;
        s.set_vertex(&format!("r{}", i + 1), kc.level_roots[i]);
    }
    Ok(s)
}

/// A one-level cycle tree read as a Halin graph rooted at its level root.
pub fn halin_from_kcycle1(kc: &KCycleInput) -> Result<HalinInput, CrossCheckError> {
    let level = &kc.levels[0];
    let h = HalinInput::new(kc.graph.clone(), kc.tree_edges.clone(), kc.level_edges(0), kc.level_roots[0], level.get(1).copied())?;
    Ok(h)
}

fn edge_value(s: &Structure, e: Edge) -> Result<Value, CrossCheckError> {
    s.edge_id(e).map(Value::Edge).ok_or_else(|| CrossCheckError::Mso(MsoError::BadConstant(format!("{e:?}"))))
}

fn mask(vs: impl IntoIterator<Item = usize>) -> u64 {
    Structure::vertex_mask(vs)
}

fn names(s: &Structure, m: u64) -> String {
    s.describe(Value::VertexSet(m))
}

/// Fundamental cycles, tree and cycle orientation, shared by both structure
/// kinds. `cycles` lists each cycle edge set constant.
fn check_basics(
    ev: &mut Evaluator,
    tree: &BTreeSet<Edge>,
    cycles: &[&str],
    rep: &mut CrossCheckReport,
) -> Result<(), CrossCheckError> {
    let s = ev.structure;
    let g = &s.graph;
    for &f in g.edges().iter().filter(|e| !tree.contains(e)) {
        let fc = fundamental_cycle(g, tree, f)?;
        for &e in g.edges() {
            let want = fc.cycle_edges.contains(&e);
            for (a, b) in [(e, f), (f, e)] {
                let got = ev.call("fund_cyc", &[edge_value(s, a)?, edge_value(s, b)?])?;
                rep.record("fund_cyc", got == want, || format!("({}, {}) gave {got}", g.edge_name(a), g.edge_name(b)));
            }
        }
    }
    let all = Value::VertexSet(mask(0..s.n()));
    let got = ev.call("dir_tree", &[all, s.constants["E_T"]])?;
    rep.record("dir_tree", got, || "tree is not a directed tree".into());
    for c in cycles {
        let Value::EdgeSet(m) = s.constants[*c] else { continue };
        let on: u64 = (0..s.m()).filter(|&i| m >> i & 1 == 1).fold(0, |acc, i| {
            let (u, v) = s.endpoints(i);
            acc | 1 << u | 1 << v
        });
        let got = ev.call("dir_cycle", &[Value::VertexSet(on), Value::EdgeSet(m)])?;
        rep.record("dir_cycle", got, || format!("{c} is not a directed cycle"));
    }
    Ok(())
}

/// Every sweep on a Halin instance: fundamental cycles, orientation, sibling
/// order, typed bags over all vertex sets of size at most four, and parent
/// links between bag sets.
pub fn cross_check_halin(h: &HalinInput) -> Result<CrossCheckReport, CrossCheckError> {
    let n = h.graph.n();
    if n > CROSS_CHECK_LIMIT {
        return Err(CrossCheckError::TooLarge(n));
    }
    let s = halin_structure(h)?;
    let lib = default_library();
    let mut ev = Evaluator::new(&s, &lib);
    let mut rep = CrossCheckReport::default();
    check_basics(&mut ev, &h.tree_edges, &["E_C"], &mut rep)?;

    let order = child_order_halin(h, &halin_orientation(h))?;
    let arcs: Vec<(usize, usize)> =
        order.children.iter().enumerate().flat_map(|(y, xs)| xs.iter().map(move |&x| (y, x))).collect();
    let label = |a: (usize, usize)| format!("{}->{}", h.graph.label(a.0), h.graph.label(a.1));
    for &a in &arcs {
        for &b in &arcs {
            let want = a.0 == b.0 && a != b && order.precedes(a, b)?;
            let got = ev.call("ori_nb", &[edge_value(&s, norm(a.0, a.1))?, edge_value(&s, norm(b.0, b.1))?])?;
            rep.record("ori_nb", got == want, || format!("({}, {}) gave {got}", label(a), label(b)));
        }
    }

    let td = build_halin_td_uncontracted(h)?;
    let mut built: BTreeSet<((usize, usize), BagType, u64)> = BTreeSet::new();
    let arc_of = |anchor: Anchor| match anchor {
        Anchor::Edge((u, v)) if order.children[u].contains(&v) => (u, v),
        Anchor::Edge((u, v)) => (v, u),
        Anchor::Vertex(v) => (v, v),
    };
    for b in &td.bags {
        built.insert((arc_of(b.anchor), b.kind, mask(b.vertices.iter().copied())));
    }
    let candidates: Vec<u64> = (0u64..1 << n).filter(|m| m.count_ones() as usize <= SWEEP_SIZE).collect();
    for &a in &arcs {
        let e = edge_value(&s, norm(a.0, a.1))?;
        for t in BagType::COMPONENT {
            let name = format!("halin_bag_{}", t.to_string().to_lowercase());
            for &x in &candidates {
                let want = built.contains(&(a, t, x));
                let got = ev.call(&name, &[e, Value::VertexSet(x)])?;
                rep.record("bag", got == want, || format!("{t} on {} with {} gave {got}", label(a), names(&s, x)));
            }
        }
    }

    // Parent links compared as pairs of distinct bag sets.
    let set_of = |b: usize| mask(td.bags[b].vertices.iter().copied());
    let mut links: BTreeMap<ParentRule, BTreeSet<(u64, u64)>> = BTreeMap::new();
    for (p, c, rule) in halin_parent_relation(h, &td)? {
        if set_of(p) != set_of(c) {
            links.entry(rule).or_default().insert((set_of(p), set_of(c)));
        }
    }
    let all_links: BTreeSet<(u64, u64)> = links.values().flatten().copied().collect();
    let sets: BTreeSet<u64> = (0..td.len()).map(set_of).collect();
    let rules = [("parent_i", ParentRule::Internal), ("parent_nb", ParentRule::Neighbor), ("parent_p", ParentRule::ParentArc)];
    for &p in &sets {
        for &c in &sets {
            if p == c {
                continue;
            }
            let args = [Value::VertexSet(p), Value::VertexSet(c)];
            let got = ev.call("parent", &args)?;
            let want = all_links.contains(&(p, c));
            rep.record("parent", got == want, || format!("({}, {}) gave {got}", names(&s, p), names(&s, c)));
            for (pred, rule) in rules {
                let got = ev.call(pred, &args)?;
                let want = links.get(&rule).is_some_and(|l| l.contains(&(p, c)));
                rep.record(pred, got == want, || format!("({}, {}) gave {got}", names(&s, p), names(&s, c)));
            }
        }
    }
    Ok(rep)
}

/// Sweeps on a cycle tree rooted at its center: fundamental cycles, tree and
/// level-cycle orientation, the orientation sentence, and the sibling order
/// of each level.
///
/// Arcs into a level root are not measured, so the level root and its cycle
/// successor have equal keys; that one pair is expected to be incomparable.
pub fn cross_check_kcycle(kc: &KCycleInput) -> Result<CrossCheckReport, CrossCheckError> {
    let n = kc.graph.n();
    if n > CROSS_CHECK_LIMIT {
        return Err(CrossCheckError::TooLarge(n));
    }
    let k = kc.k();
    let s = kcycle_structure(kc)?;
    let lib = Library::standard(LibraryParams { levels: k, ..LibraryParams::default() });
    let mut ev = Evaluator::new(&s, &lib);
    let mut rep = CrossCheckReport::default();
    let cycle_names: Vec<String> = (1..=k).map(|i| format!("E_C{i}")).collect();
    let refs: Vec<&str> = cycle_names.iter().map(String::as_str).collect();
    check_basics(&mut ev, &kc.tree_edges, &refs, &mut rep)?;
    for (i, c) in cycle_names.iter().enumerate() {
        let got = ev.call(&format!("cycle_level_{}", i + 1), &[s.constants[c]])?;
        rep.record("cycle_level", got, || format!("{c} is not at distance {} from the center", i + 1));
    }
    let got = ev.call("kcycle_orientation", &[])?;
    rep.record("kcycle_orientation", got, || "orientation sentence is false".into());

    let order = kcycle_child_order(kc);
    let depth = kc.depths();
    let label = |a: (usize, usize)| format!("{}->{}", kc.graph.label(a.0), kc.graph.label(a.1));
    for (level, cycle) in kc.levels.iter().enumerate() {
        let root = kc.level_roots[level];
        let pos = cycle.iter().position(|&v| v == root).unwrap_or(0);
        let tie = [root, cycle[(pos + 1) % cycle.len()]];
        let pred = format!("ori_nb_{}", level + 1);
        let arcs: Vec<(usize, usize)> = order
            .children
            .iter()
            .enumerate()
            .flat_map(|(y, xs)| xs.iter().map(move |&x| (y, x)))
            .filter(|&(_, x)| depth[x] == Some(level + 1))
            .collect();
        for &a in &arcs {
            for &b in &arcs {
                if a.0 != b.0 || a == b {
                    continue;
                }
                let want = order.precedes(a, b)?;
                let got = ev.call(&pred, &[edge_value(&s, norm(a.0, a.1))?, edge_value(&s, norm(b.0, b.1))?])?;
                let tied = tie.contains(&a.1) && tie.contains(&b.1);
                let ok = if tied { !got } else { got == want };
                rep.record("ori_nb_level", ok, || format!("({}, {}) gave {got}", label(a), label(b)));
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{halin4, halin_from_plane_tree, random_halin, random_kcycle};

    #[test]
    fn halin4_agrees() {
        let rep = cross_check_halin(&halin4()).unwrap();
        assert!(rep.is_clean(), "{:?}", rep.disagreements);
        assert!(rep.checked["bag"] > 0 && rep.checked["parent"] > 0);
    }

    #[test]
    fn halin4_root_arc_r2_only_full_set() {
        let h = halin4();
        let s = halin_structure(&h).unwrap();
        let lib = default_library();
        let mut ev = Evaluator::new(&s, &lib);
        let g = &h.graph;
        let (a, v) = (g.vertex("a").unwrap(), g.vertex("v").unwrap());
        let e = edge_value(&s, norm(a, v)).unwrap();
        let hits: Vec<u64> = (0u64..16).filter(|&x| ev.call("halin_bag_r2", &[e, Value::VertexSet(x)]).unwrap()).collect();
        assert_eq!(hits, vec![0b1111]);
    }

    #[test]
    fn halin4_parent_arc_link() {
        let h = halin4();
        let s = halin_structure(&h).unwrap();
        let lib = default_library();
        let mut ev = Evaluator::new(&s, &lib);
        let v = |l: &str| h.graph.vertex(l).unwrap();
        // R1 of the root arc and LR of the rightmost child arc are both {v, b, c}.
        let r1 = Value::VertexSet(mask([v("v"), v("b"), v("c")]));
        let arc_vb = edge_value(&s, norm(v("v"), v("b"))).unwrap();
        assert!(ev.call("halin_bag_lr", &[arc_vb, r1]).unwrap());
        assert!(ev.call("parent_p", &[r1, r1]).unwrap());
        assert!(!ev.call("parent", &[r1, r1]).unwrap());
    }

    #[test]
    fn small_random_halin_agree() {
        let mut ran = 0;
        for seed in 0..3 {
            let h = halin_from_plane_tree(&random_halin(2, seed)).unwrap();
            if h.graph.n() > 9 {
                continue;
            }
            let rep = cross_check_halin(&h).unwrap();
            assert!(rep.is_clean(), "seed {seed}: {:?}", rep.disagreements);
            assert!(rep.checked["parent_nb"] > 0);
            ran += 1;
        }
        assert!(ran > 0);
    }

    #[test]
    fn wheel_agrees_both_ways() {
        let kc = random_kcycle(1, 4, 0);
        assert!(kc.graph.n() <= CROSS_CHECK_LIMIT);
        let rep = cross_check_kcycle(&kc).unwrap();
        assert!(rep.is_clean(), "{:?}", rep.disagreements);
        let rep = cross_check_halin(&halin_from_kcycle1(&kc).unwrap()).unwrap();
        assert!(rep.is_clean(), "{:?}", rep.disagreements);
    }
}
