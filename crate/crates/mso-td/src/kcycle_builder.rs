//! Width-4k decompositions of k-cycle trees.
//!
//! The tree is rooted at the center. Each arc `y -> x` gets the same component
//! shape as in the Halin construction, minus R3, except that boundaries are
//! taken on every deeper level cycle at once.

use std::collections::BTreeMap;

use crate::cycle_structure::{ith_boundary, kcycle_child_order, ChildOrder, Side};
use crate::graph_core::{norm, EdgeSet, GraphError, KCycleInput};
use crate::halin_builder::{wire, BuildError, Component};
use crate::tree_decomposition::{contract_equal_bags, Anchor, Bag, BagType, TreeDecomposition};

/// Depth of every vertex from the center.
fn depths(kc: &KCycleInput) -> Result<Vec<usize>, BuildError> {
    kc.depths()
        .into_iter()
        .map(|d| d.ok_or_else(|| BuildError::Input(GraphError::Invalid("tree does not span".into()))))
        .collect()
}

/// Check that each level cycle visits its vertices in the tree's rotation order.
fn check_rotation(kc: &KCycleInput, order: &ChildOrder, depth: &[usize]) -> Result<(), BuildError> {
    let mut seen: Vec<Vec<usize>> = vec![Vec::new(); kc.k()];
    let mut stack = vec![kc.center];
    while let Some(v) = stack.pop() {
        if depth[v] >= 1 {
            seen[depth[v] - 1].push(v);
        }
        // Order lists the latest cycle position first, so pushing in order
        // pops the earliest first.
        stack.extend(order.children[v].iter().copied());
    }
    for (i, level) in seen.iter().enumerate() {
        if *level != kc.levels[i] {
            return Err(BuildError::Input(GraphError::Invalid(format!(
                "cycle {} does not follow the tree's rotation from its level root",
                i + 1
            ))));
        }
    }
    Ok(())
}

/// The decomposition before equal bags are merged.
pub fn build_kcycle_td_uncontracted(kc: &KCycleInput) -> Result<TreeDecomposition, BuildError> {
    kc.validate()?;
    let k = kc.k();
    let depth = depths(kc)?;
    let order = kcycle_child_order(kc);
    check_rotation(kc, &order, &depth)?;
    let n = kc.graph.n();
    let mut parent_of = vec![None; n];
    for (y, list) in order.children.iter().enumerate() {
        for &x in list {
            parent_of[x] = Some(y);
        }
    }
    let level_edges: Vec<EdgeSet> = (0..k).map(|i| kc.level_edges(i)).collect();
    let bd = |v: usize, j: usize, side: Side| ith_boundary(&order, &depth, v, j, side, None);

    let mut bags = Vec::new();
    let mut comps: BTreeMap<(usize, usize), Component> = BTreeMap::new();
    let mut stack = vec![kc.center];
    while let Some(y) = stack.pop() {
        stack.extend(order.children[y].iter().rev().copied());
        let i = depth[y];
        for (pos, &x) in order.children[y].iter().enumerate() {
            let anchor = Anchor::Edge(norm(y, x));
            let levels = i + 1..=k;
            let lx: Vec<Option<usize>> = levels.clone().map(|j| bd(x, j, Side::Left)).collect();
            let rx: Vec<Option<usize>> = levels.clone().map(|j| bd(x, j, Side::Right)).collect();
            let ly: Vec<Option<usize>> = levels.clone().map(|j| bd(y, j, Side::Left)).collect();
            // Rightmost boundary among the left siblings' subtrees.
            let carried: Vec<Option<usize>> = levels
                .clone()
                .map(|j| order.children[y][..pos].iter().rev().find_map(|&s| bd(s, j, Side::Right)))
                .collect();
            let flat = |v: &[Option<usize>]| v.iter().flatten().copied().collect::<Vec<_>>();

            let mut comp = Component::default();
            let mut emit = |t: BagType, vs: Vec<usize>, bags: &mut Vec<Bag>| {
                bags.push(Bag::new(vs, t, anchor));
                comp.ids.insert(t, bags.len() - 1);
            };
            let r1 = [vec![x], flat(&lx), flat(&rx)].concat();
            let r2 = [r1.clone(), vec![y]].concat();
            emit(BagType::R1, r1, &mut bags);
            emit(BagType::R2, r2.clone(), &mut bags);
            if pos > 0 {
                let l1 = [vec![y], flat(&ly), flat(&carried)].concat();
                emit(BagType::L1, l1.clone(), &mut bags);
                emit(BagType::L2, [l1, flat(&lx)].concat(), &mut bags);
                // A carried right boundary stays only while nothing on its level
                // in the subtree of x is joined to it.
                let kept: Vec<usize> = (0..carried.len())
                    .filter_map(|t| {
                        let z = carried[t]?;
                        let matched = lx[t].is_some_and(|w| level_edges[i + t].contains(&norm(z, w)));
                        (!matched).then_some(z)
                    })
                    .collect();
                let l3 = [vec![y], flat(&ly), flat(&lx), kept].concat();
                emit(BagType::L3, l3.clone(), &mut bags);
                emit(BagType::LR, [l3, r2].concat(), &mut bags);
            }
            comps.insert((y, x), comp);
        }
    }
    let last = order.rightmost(kc.center).expect("center has children");
    let root = comps[&(kc.center, last)].top();
    let (parent, kids) = wire(bags.len(), &comps, &order, &|y| parent_of[y].map(|p| (p, y)));
    let mut td = TreeDecomposition::new(bags, root, parent, Some(kids))?;
    td.ordered = true;
    Ok(td)
}

/// Binary decomposition of width at most `4k`.
pub fn build_kcycle_td(kc: &KCycleInput) -> Result<TreeDecomposition, BuildError> {
    Ok(contract_equal_bags(&build_kcycle_td_uncontracted(kc)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::random_kcycle;
    use crate::tree_decomposition::validate;

    #[test]
    fn wheel_width() {
        let kc = random_kcycle(1, 3, 0);
        let td = build_kcycle_td(&kc).unwrap();
        assert!(validate(&kc.graph, &td).is_valid());
        assert!(td.width().unwrap() <= 4);
    }

    #[test]
    fn random_instances_valid() {
        for k in 1..=4 {
            for seed in 0..15 {
                let kc = random_kcycle(k, 2 + seed as usize % 3, seed);
                let td = build_kcycle_td(&kc).unwrap();
                let rep = validate(&kc.graph, &td);
                assert!(rep.is_valid(), "k={k} seed={seed}: {:?}", rep.violations);
                assert!(td.width().unwrap() <= 4 * k, "k={k} seed={seed}");
                assert!(td.is_binary());
            }
        }
    }

    #[test]
    fn lr_bags_bounded() {
        for seed in 0..10 {
            let kc = random_kcycle(2, 3, seed);
            let td = build_kcycle_td_uncontracted(&kc).unwrap();
            assert!(td.bags.iter().filter(|b| b.kind == BagType::LR).all(|b| b.vertices.len() <= 9));
        }
    }

    #[test]
    fn deterministic() {
        let kc = random_kcycle(3, 3, 9);
        assert_eq!(build_kcycle_td(&kc).unwrap(), build_kcycle_td(&kc).unwrap());
    }

    #[test]
    fn rotation_mismatch_rejected() {
        let kc = random_kcycle(2, 2, 2);
        let depth = depths(&kc).unwrap();
        let parent = |v: usize| (0..kc.graph.n()).find(|&p| depth[p] + 1 == depth[v] && kc.tree_edges.contains(&norm(p, v)));
        let outer = &kc.levels[1];
        let j = (2..outer.len()).find(|&j| parent(outer[j]) != parent(outer[1])).unwrap();
        let mut bad = kc.clone();
        bad.levels[1].swap(1, j);
        let mut edges: Vec<(usize, usize)> = bad.tree_edges.iter().copied().collect();
        for l in &bad.levels {
            edges.extend(crate::graph_core::cycle_pairs(l));
        }
        bad.graph = crate::graph_core::Graph::new(kc.graph.labels().to_vec(), edges).unwrap();
        assert!(build_kcycle_td(&bad).is_err());
    }
}
