//! Width-3 decompositions of Halin graphs.
//!
//! Every tree arc `y -> x` contributes a small component of typed bags. The
//! right branch R1, R2, R3 walks from `x` and its boundary vertices up to `y`;
//! the left branch L1, L2, L3 carries the cycle edge between the left
//! neighbour's subtree and the subtree of `x`. Both meet in LR. Components are
//! chained through left neighbours and hung below the parent arc's R1.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cycle_structure::{boundary, child_order_halin, ChildOrder, CycleError, Side};
use crate::graph_core::{norm, GraphError, HalinInput};
use crate::orientation::halin_orientation;
use crate::tree_decomposition::{contract_equal_bags, Anchor, Bag, BagType, TdError, TreeDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Input(#[from] GraphError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Decomposition(#[from] TdError),
}

/// How a bag came to be below its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParentRule {
    /// Inside one arc's component.
    Internal,
    /// Component hung below the right neighbour's L1.
    Neighbor,
    /// Rightmost child's component hung below the parent arc's R1.
    ParentArc,
}

/// Bag ids of one arc's component; absent types are `None`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Component {
    pub ids: BTreeMap<BagType, usize>,
}

impl Component {
    pub fn get(&self, t: BagType) -> Option<usize> {
        self.ids.get(&t).copied()
    }

    /// Bag that links to whatever lies above the component.
    pub fn top(&self) -> usize {
        [BagType::LR, BagType::R3, BagType::R2]
            .iter()
            .find_map(|&t| self.get(t))
            .expect("every component has an R2")
    }
}

/// Link components: internal chains, neighbour links and parent-arc links.
/// Returns the parent map and per-bag ordered child lists (left branch first).
pub(crate) fn wire(
    n_bags: usize,
    comps: &BTreeMap<(usize, usize), Component>,
    order: &ChildOrder,
    parent_arc: &dyn Fn(usize) -> Option<(usize, usize)>,
) -> (Vec<Option<usize>>, Vec<Vec<usize>>) {
    let mut parent = vec![None; n_bags];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n_bags];
    let mut link = |p: usize, c: usize, parent: &mut Vec<Option<usize>>| {
        parent[c] = Some(p);
        kids[p].push(c);
    };
    for (&(y, x), comp) in comps {
        // Left branch first so LR lists L3 before R3.
        let chains: [&[BagType]; 2] = [
            &[BagType::L1, BagType::L2, BagType::L3, BagType::LR],
            &[BagType::R1, BagType::R2, BagType::R3, BagType::LR],
        ];
        for chain in chains {
            let present: Vec<usize> = chain.iter().filter_map(|&t| comp.get(t)).collect();
            for w in present.windows(2) {
                link(w[1], w[0], &mut parent);
            }
        }
        if let Some(right) = order.right_sibling(y, x) {
            let l1 = comps[&(y, right)].get(BagType::L1).expect("non-leftmost arcs have L1");
            link(l1, comp.top(), &mut parent);
        } else if let Some(pa) = parent_arc(y) {
            let r1 = comps[&pa].get(BagType::R1).expect("every arc has R1");
            link(r1, comp.top(), &mut parent);
        }
    }
    (parent, kids)
}

/// Child order of the Halin tree rooted at `h.root`.
pub fn halin_child_order(h: &HalinInput) -> Result<ChildOrder, BuildError> {
    Ok(child_order_halin(h, &halin_orientation(h))?)
}

/// The decomposition before equal bags are merged.
pub fn build_halin_td_uncontracted(h: &HalinInput) -> Result<TreeDecomposition, BuildError> {
    h.validate()?;
    let order = halin_child_order(h)?;
    let n = h.graph.n();
    let mut parent_of = vec![None; n];
    for (y, list) in order.children.iter().enumerate() {
        for &x in list {
            parent_of[x] = Some(y);
        }
    }
    let bd_l = |v: usize| boundary(&order, v, Side::Left);
    let bd_r = |v: usize| boundary(&order, v, Side::Right);

    let mut bags = Vec::new();
    let mut comps: BTreeMap<(usize, usize), Component> = BTreeMap::new();
    let mut root_bag = None;
    // Arcs in preorder from the root.
    let mut stack = vec![h.root];
    while let Some(y) = stack.pop() {
        for &x in order.children[y].iter().rev() {
            stack.push(x);
        }
        for &x in &order.children[y] {
            let anchor = Anchor::Edge(norm(y, x));
            let mut comp = Component::default();
            let mut emit = |t: BagType, vs: Vec<usize>, bags: &mut Vec<Bag>| {
                bags.push(Bag::new(vs, t, anchor));
                comp.ids.insert(t, bags.len() - 1);
            };
            let r1 = vec![x, bd_l(x), bd_r(x)];
            emit(BagType::R1, r1.clone(), &mut bags);
            emit(BagType::R2, [r1, vec![y]].concat(), &mut bags);
            if y == h.root {
                root_bag = comp.get(BagType::R2);
            } else {
                emit(BagType::R3, vec![y, bd_l(x), bd_r(x)], &mut bags);
                if let Some(left) = order.left_sibling(y, x) {
                    let l1 = vec![y, bd_l(y), bd_r(left)];
                    emit(BagType::L1, l1.clone(), &mut bags);
                    emit(BagType::L2, [l1, vec![bd_l(x)]].concat(), &mut bags);
                    let l3 = vec![y, bd_l(y), bd_l(x)];
                    emit(BagType::L3, l3.clone(), &mut bags);
                    emit(BagType::LR, [l3, vec![bd_r(x)]].concat(), &mut bags);
                }
            }
            comps.insert((y, x), comp);
        }
    }
    let root = root_bag.expect("root leaf has one child");
    let (parent, kids) = wire(bags.len(), &comps, &order, &|y| parent_of[y].map(|p| (p, y)));
    let mut td = TreeDecomposition::new(bags, root, parent, Some(kids))?;
    td.ordered = true;
    Ok(td)
}

/// Width-3 binary decomposition with singleton leaves.
pub fn build_halin_td(h: &HalinInput) -> Result<TreeDecomposition, BuildError> {
    Ok(contract_equal_bags(&build_halin_td_uncontracted(h)?))
}

/// Parent links of an uncontracted decomposition, tagged by the rule that
/// produced them.
pub fn halin_parent_relation(h: &HalinInput, td: &TreeDecomposition) -> Result<Vec<(usize, usize, ParentRule)>, BuildError> {
    let order = halin_child_order(h)?;
    let arc = |b: usize| match td.bags[b].anchor {
        Anchor::Edge((u, v)) => {
            if order.children[u].contains(&v) {
                (u, v)
            } else {
                (v, u)
            }
        }
        Anchor::Vertex(v) => (v, v),
    };
    let mut out = Vec::new();
    for (c, p) in td.parent.iter().enumerate() {
        let Some(p) = *p else { continue };
        let (pa, ca) = (arc(p), arc(c));
        let rule = if pa == ca {
            ParentRule::Internal
        } else if pa.0 == ca.0 {
            ParentRule::Neighbor
        } else {
            ParentRule::ParentArc
        };
        out.push((p, c, rule));
    }
    Ok(out)
}
