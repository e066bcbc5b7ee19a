//! Signature automata: finite-state summaries of terminal graphs and a
//! bottom-up runner over tree decompositions.
//!
//! A signature describes a terminal graph through what it exposes at its
//! terminals. Transitions between consecutive bags are compositions of four
//! primitives (introduce vertex, introduce edge, forget vertex, join), keyed by
//! vertex ids, and memoized over interned signature indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph_core::{norm, Graph};
use crate::terminal_algebra::{brute_equiv, random_terminal_graph, AlgebraError, TerminalGraph};
use crate::tree_decomposition::TreeDecomposition;

/// Child count above which an unordered decomposition is refused.
pub const UNORDERED_DEGREE_LIMIT: usize = 32;
/// Largest bag the Hamiltonian signature accepts.
pub const HAMILTONIAN_ARITY_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("decomposition is unordered and bag {bag} has {children} children (limit {UNORDERED_DEGREE_LIMIT})")]
    UnorderedUnbounded { bag: usize, children: usize },
    #[error("bag {bag} has {size} vertices; property `{property}` supports at most {limit}")]
    ArityLimit { property: String, bag: usize, size: usize, limit: usize },
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A graph property with a brute-force decision procedure and compositional
/// signatures.
pub trait PropertySpec {
    type Sig: Clone + Ord + Hash + Debug;

    fn name(&self) -> String;
    fn brute_eval(&self, g: &Graph) -> bool;
    /// Signature of the empty terminal graph.
    fn empty(&self) -> Self::Sig;
    fn introduce_vertex(&self, s: &Self::Sig, v: usize) -> Self::Sig;
    /// Both endpoints must be terminals of `s`; otherwise a no-op.
    fn introduce_edge(&self, s: &Self::Sig, u: usize, v: usize) -> Self::Sig;
    fn forget_vertex(&self, s: &Self::Sig, v: usize) -> Self::Sig;
    /// Union over the shared terminals.
    fn join(&self, a: &Self::Sig, b: &Self::Sig) -> Self::Sig;
    fn accept(&self, s: &Self::Sig) -> bool;
    fn arity_limit(&self) -> Option<usize> {
        None
    }
}

/// Signature of a terminal graph with terminal `i` keyed as `i`.
pub fn signature_of<P: PropertySpec + ?Sized>(p: &P, tg: &TerminalGraph) -> P::Sig {
    let n = tg.graph.n();
    let mut key = vec![usize::MAX; n];
    for (i, &t) in tg.terminals.iter().enumerate() {
        key[t] = i;
    }
    let mut next = tg.arity();
    for k in key.iter_mut().filter(|k| **k == usize::MAX) {
        *k = next;
        next += 1;
    }
    let mut s = p.empty();
    for v in 0..n {
        s = p.introduce_vertex(&s, key[v]);
    }
    for &(u, v) in tg.graph.edges() {
        s = p.introduce_edge(&s, key[u], key[v]);
    }
    for v in 0..n {
        if key[v] >= tg.arity() {
            s = p.forget_vertex(&s, key[v]);
        }
    }
    s
}

fn insert_sorted(terms: &mut Vec<usize>, v: usize) -> Option<usize> {
    match terms.binary_search(&v) {
        Ok(_) => None,
        Err(i) => {
            terms.insert(i, v);
            Some(i)
        }
    }
}

fn union_terms(a: &[usize], b: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = a.iter().chain(b).copied().collect();
    set.into_iter().collect()
}

// ---------------------------------------------------------------- parity

/// `|V| ≡ 0 (mod m)`.
#[derive(Clone, Copy, Debug)]
pub struct Parity {
    pub modulus: usize,
}

impl Parity {
    pub fn new(modulus: usize) -> Parity {
        Parity { modulus: modulus.max(1) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParitySig {
    pub terms: Vec<usize>,
    pub residue: usize,
}

impl PropertySpec for Parity {
    type Sig = ParitySig;

    fn name(&self) -> String {
        format!("parity({})", self.modulus)
    }

    fn brute_eval(&self, g: &Graph) -> bool {
        g.n().is_multiple_of(self.modulus)
    }

    fn empty(&self) -> ParitySig {
        ParitySig { terms: Vec::new(), residue: 0 }
    }

    fn introduce_vertex(&self, s: &ParitySig, v: usize) -> ParitySig {
        let mut out = s.clone();
        if insert_sorted(&mut out.terms, v).is_some() {
            out.residue = (out.residue + 1) % self.modulus;
        }
        out
    }

    fn introduce_edge(&self, s: &ParitySig, _: usize, _: usize) -> ParitySig {
        s.clone()
    }

    fn forget_vertex(&self, s: &ParitySig, v: usize) -> ParitySig {
        let mut out = s.clone();
        out.terms.retain(|&t| t != v);
        out
    }

    fn join(&self, a: &ParitySig, b: &ParitySig) -> ParitySig {
        let shared = a.terms.iter().filter(|t| b.terms.binary_search(t).is_ok()).count();
        let m = self.modulus;
        ParitySig { terms: union_terms(&a.terms, &b.terms), residue: (a.residue + b.residue + m * shared - shared) % m }
    }

    fn accept(&self, s: &ParitySig) -> bool {
        s.residue == 0
    }
}

// ---------------------------------------------------------------- bipartite

/// Two-colorability.
#[derive(Clone, Copy, Debug)]
pub struct Bipartite;

/// Proper terminal colorings that extend to the whole piece; empty means dead.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BipartiteSig {
    pub terms: Vec<usize>,
    pub colorings: BTreeSet<Vec<bool>>,
}

impl PropertySpec for Bipartite {
    type Sig = BipartiteSig;

    fn name(&self) -> String {
        "bipartite".into()
    }

    fn brute_eval(&self, g: &Graph) -> bool {
        let mut side: Vec<Option<bool>> = vec![None; g.n()];
        for s in 0..g.n() {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                let su = side[u].expect("colored before push");
                for &w in g.neighbors(u) {
                    match side[w] {
                        None => {
                            side[w] = Some(!su);
                            stack.push(w);
                        }
                        Some(sw) if sw == su => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    fn empty(&self) -> BipartiteSig {
        BipartiteSig { terms: Vec::new(), colorings: BTreeSet::from([Vec::new()]) }
    }

    fn introduce_vertex(&self, s: &BipartiteSig, v: usize) -> BipartiteSig {
        let mut terms = s.terms.clone();
        let Some(i) = insert_sorted(&mut terms, v) else { return s.clone() };
        let mut colorings = BTreeSet::new();
        for c in &s.colorings {
            for side in [false, true] {
                let mut d = c.clone();
                d.insert(i, side);
                colorings.insert(d);
            }
        }
        BipartiteSig { terms, colorings }
    }

    fn introduce_edge(&self, s: &BipartiteSig, u: usize, v: usize) -> BipartiteSig {
        let (Ok(i), Ok(j)) = (s.terms.binary_search(&u), s.terms.binary_search(&v)) else { return s.clone() };
        let colorings = s.colorings.iter().filter(|c| c[i] != c[j]).cloned().collect();
        BipartiteSig { terms: s.terms.clone(), colorings }
    }

    fn forget_vertex(&self, s: &BipartiteSig, v: usize) -> BipartiteSig {
        let Ok(i) = s.terms.binary_search(&v) else { return s.clone() };
        let mut terms = s.terms.clone();
        terms.remove(i);
        let colorings = s
            .colorings
            .iter()
            .map(|c| {
                let mut d = c.clone();
                d.remove(i);
                d
            })
            .collect();
        BipartiteSig { terms, colorings }
    }

    fn join(&self, a: &BipartiteSig, b: &BipartiteSig) -> BipartiteSig {
        let terms = union_terms(&a.terms, &b.terms);
        let pa: Vec<Option<usize>> = terms.iter().map(|t| a.terms.binary_search(t).ok()).collect();
        let pb: Vec<Option<usize>> = terms.iter().map(|t| b.terms.binary_search(t).ok()).collect();
        let mut colorings = BTreeSet::new();
        for ca in &a.colorings {
            'pair: for cb in &b.colorings {
                let mut c = Vec::with_capacity(terms.len());
                for k in 0..terms.len() {
                    let x = pa[k].map(|i| ca[i]);
                    let y = pb[k].map(|i| cb[i]);
                    match (x, y) {
                        (Some(x), Some(y)) if x != y => continue 'pair,
                        (Some(x), _) | (None, Some(x)) => c.push(x),
                        (None, None) => unreachable!("term comes from one side"),
                    }
                }
                colorings.insert(c);
            }
        }
        BipartiteSig { terms, colorings }
    }

    fn accept(&self, s: &BipartiteSig) -> bool {
        !s.colorings.is_empty()
    }
}

// ---------------------------------------------------------------- connected

/// At most one connected component (the empty graph counts as connected).
#[derive(Clone, Copy, Debug)]
pub struct Connected;

/// Partition of the terminals by component plus the number of components
/// without terminals, capped at 2. Hopeless states are normalized to
/// `stranded = 2` with a single block.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectedSig {
    pub terms: Vec<usize>,
    /// Block label per terminal in first-occurrence order.
    pub blocks: Vec<usize>,
    pub stranded: u8,
}

impl ConnectedSig {
    fn normalized(terms: Vec<usize>, raw: &[usize], stranded: u8) -> ConnectedSig {
        if stranded >= 2 || (stranded == 1 && !terms.is_empty()) {
            let blocks = vec![0; terms.len()];
            return ConnectedSig { terms, blocks, stranded: 2 };
        }
        let mut relabel = BTreeMap::new();
        let blocks = raw
            .iter()
            .map(|b| {
                let next = relabel.len();
                *relabel.entry(*b).or_insert(next)
            })
            .collect();
        ConnectedSig { terms, blocks, stranded }
    }
}

impl PropertySpec for Connected {
    type Sig = ConnectedSig;

    fn name(&self) -> String {
        "connected".into()
    }

    fn brute_eval(&self, g: &Graph) -> bool {
        g.is_connected()
    }

    fn empty(&self) -> ConnectedSig {
        ConnectedSig { terms: Vec::new(), blocks: Vec::new(), stranded: 0 }
    }

    fn introduce_vertex(&self, s: &ConnectedSig, v: usize) -> ConnectedSig {
        let mut terms = s.terms.clone();
        let Some(i) = insert_sorted(&mut terms, v) else { return s.clone() };
        let mut raw = s.blocks.clone();
        raw.insert(i, usize::MAX);
        ConnectedSig::normalized(terms, &raw, s.stranded)
    }

    fn introduce_edge(&self, s: &ConnectedSig, u: usize, v: usize) -> ConnectedSig {
        let (Ok(i), Ok(j)) = (s.terms.binary_search(&u), s.terms.binary_search(&v)) else { return s.clone() };
        let (from, to) = (s.blocks[j], s.blocks[i]);
        let raw: Vec<usize> = s.blocks.iter().map(|&b| if b == from { to } else { b }).collect();
        ConnectedSig::normalized(s.terms.clone(), &raw, s.stranded)
    }

    fn forget_vertex(&self, s: &ConnectedSig, v: usize) -> ConnectedSig {
        let Ok(i) = s.terms.binary_search(&v) else { return s.clone() };
        let alone = s.blocks.iter().filter(|&&b| b == s.blocks[i]).count() == 1;
        let mut terms = s.terms.clone();
        let mut raw = s.blocks.clone();
        terms.remove(i);
        raw.remove(i);
        let stranded = (s.stranded + u8::from(alone)).min(2);
        ConnectedSig::normalized(terms, &raw, stranded)
    }

    fn join(&self, a: &ConnectedSig, b: &ConnectedSig) -> ConnectedSig {
        let terms = union_terms(&a.terms, &b.terms);
        // Union-find over terminal positions.
        let mut parent: Vec<usize> = (0..terms.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for side in [a, b] {
            let mut first: BTreeMap<usize, usize> = BTreeMap::new();
            for (i, t) in side.terms.iter().enumerate() {
                let k = terms.binary_search(t).expect("term in union");
                if let Some(&f) = first.get(&side.blocks[i]) {
                    let (x, y) = (find(&mut parent, f), find(&mut parent, k));
                    parent[x] = y;
                } else {
                    first.insert(side.blocks[i], k);
                }
            }
        }
        let raw: Vec<usize> = (0..terms.len()).map(|k| find(&mut parent, k)).collect();
        ConnectedSig::normalized(terms, &raw, (a.stranded + b.stranded).min(2))
    }

    fn accept(&self, s: &ConnectedSig) -> bool {
        let blocks = s.blocks.iter().collect::<BTreeSet<_>>().len();
        blocks + s.stranded as usize <= 1
    }
}

// ---------------------------------------------------------------- hamiltonian

/// Has a cycle through every vertex (needs at least three vertices).
#[derive(Clone, Copy, Debug)]
pub struct Hamiltonian;

/// Partial solution as seen from the terminals: degree in the chosen edges,
/// the other end of the path for degree-1 terminals, and whether the cycle
/// has already closed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HamState {
    pub deg: Vec<u8>,
    /// Key of the path's other end, for degree-1 terminals.
    pub mate: Vec<Option<usize>>,
    pub closed: bool,
}

/// Edges between terminals are kept pending until one endpoint is forgotten,
/// which is when they are chosen or dropped. No states means dead.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HamiltonianSig {
    pub terms: Vec<usize>,
    pub pending: BTreeSet<(usize, usize)>,
    pub states: BTreeSet<HamState>,
}

impl HamiltonianSig {
    fn normalized(mut self) -> HamiltonianSig {
        if self.states.is_empty() {
            self.pending.clear();
        }
        self
    }
}

impl Hamiltonian {
    /// Add a path segment between terminal positions `i` and `j`.
    fn link(terms: &[usize], st: &HamState, i: usize, j: usize) -> Option<HamState> {
        if st.closed || st.deg[i] >= 2 || st.deg[j] >= 2 {
            return None;
        }
        let pos = |key: usize| terms.binary_search(&key).expect("mate is a terminal");
        let mut out = st.clone();
        if st.deg[i] == 1 && st.mate[i] == Some(terms[j]) {
            out.deg[i] = 2;
            out.deg[j] = 2;
            out.mate[i] = None;
            out.mate[j] = None;
            out.closed = true;
            return out.deg.iter().all(|&d| d == 2).then_some(out);
        }
        let end_i = if st.deg[i] == 0 { i } else { pos(st.mate[i].expect("degree-1 terminal has a mate")) };
        let end_j = if st.deg[j] == 0 { j } else { pos(st.mate[j].expect("degree-1 terminal has a mate")) };
        out.deg[i] += 1;
        out.deg[j] += 1;
        if out.deg[i] == 2 {
            out.mate[i] = None;
        }
        if out.deg[j] == 2 {
            out.mate[j] = None;
        }
        out.mate[end_i] = Some(terms[end_j]);
        out.mate[end_j] = Some(terms[end_i]);
        Some(out)
    }

    fn has_cycle(g: &Graph) -> bool {
        let n = g.n();
        if n < 3 {
            return false;
        }
        if n <= 20 {
            // Held-Karp over paths starting at vertex 0.
            let full = 1usize << n;
            let mut reach = vec![0u32; full];
            reach[1] = 1;
            for mask in 1..full {
                if mask & 1 == 0 {
                    continue;
                }
                let ends = reach[mask];
                if ends == 0 {
                    continue;
                }
                for v in 0..n {
                    if ends >> v & 1 == 0 {
                        continue;
                    }
                    for &w in g.neighbors(v) {
                        if mask >> w & 1 == 0 {
                            reach[mask | 1 << w] |= 1 << w;
                        }
                    }
                }
            }
            let ends = reach[full - 1];
            return g.neighbors(0).iter().any(|&w| ends >> w & 1 == 1);
        }
        fn extend(g: &Graph, path: &mut Vec<usize>, used: &mut [bool]) -> bool {
            let last = *path.last().expect("nonempty path");
            if path.len() == g.n() {
                return g.has_edge(last, path[0]);
            }
            for &w in g.neighbors(last) {
                if !used[w] {
                    used[w] = true;
                    path.push(w);
                    if extend(g, path, used) {
                        return true;
                    }
                    path.pop();
                    used[w] = false;
                }
            }
            false
        }
        let mut used = vec![false; n];
        used[0] = true;
        extend(g, &mut vec![0], &mut used)
    }
}

impl PropertySpec for Hamiltonian {
    type Sig = HamiltonianSig;

    fn name(&self) -> String {
        "hamiltonian".into()
    }

    fn brute_eval(&self, g: &Graph) -> bool {
        Hamiltonian::has_cycle(g)
    }

    fn empty(&self) -> HamiltonianSig {
        let start = HamState { deg: Vec::new(), mate: Vec::new(), closed: false };
        HamiltonianSig { terms: Vec::new(), pending: BTreeSet::new(), states: BTreeSet::from([start]) }
    }

    fn introduce_vertex(&self, s: &HamiltonianSig, v: usize) -> HamiltonianSig {
        let mut terms = s.terms.clone();
        let Some(i) = insert_sorted(&mut terms, v) else { return s.clone() };
        let states = s
            .states
            .iter()
            .filter(|st| !st.closed)
            .map(|st| {
                let mut st = st.clone();
                st.deg.insert(i, 0);
                st.mate.insert(i, None);
                st
            })
            .collect();
        HamiltonianSig { terms, pending: s.pending.clone(), states }.normalized()
    }

    fn introduce_edge(&self, s: &HamiltonianSig, u: usize, v: usize) -> HamiltonianSig {
        if s.states.is_empty() || s.terms.binary_search(&u).is_err() || s.terms.binary_search(&v).is_err() {
            return s.clone();
        }
        let mut out = s.clone();
        out.pending.insert(norm(u, v));
        out
    }

    fn forget_vertex(&self, s: &HamiltonianSig, v: usize) -> HamiltonianSig {
        let Ok(i) = s.terms.binary_search(&v) else { return s.clone() };
        let incident: Vec<usize> = s
            .pending
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .map(|&(a, b)| if a == v { b } else { a })
            .collect();
        let pending: BTreeSet<(usize, usize)> = s.pending.iter().copied().filter(|&(a, b)| a != v && b != v).collect();
        let mut terms = s.terms.clone();
        terms.remove(i);
        let mut states = BTreeSet::new();
        for st in &s.states {
            let need = 2usize.saturating_sub(st.deg[i] as usize);
            let mut choices: Vec<Vec<usize>> = Vec::new();
            match need {
                0 => choices.push(Vec::new()),
                1 => choices.extend(incident.iter().map(|&w| vec![w])),
                _ => {
                    for a in 0..incident.len() {
                        for b in a + 1..incident.len() {
                            choices.push(vec![incident[a], incident[b]]);
                        }
                    }
                }
            }
            for choice in choices {
                let mut cur = Some(st.clone());
                for w in choice {
                    let j = s.terms.binary_search(&w).expect("pending edges join terminals");
                    cur = cur.and_then(|c| Hamiltonian::link(&s.terms, &c, i, j));
                }
                if let Some(mut c) = cur {
                    debug_assert_eq!(c.deg[i], 2);
                    c.deg.remove(i);
                    c.mate.remove(i);
                    states.insert(c);
                }
            }
        }
        HamiltonianSig { terms, pending, states }.normalized()
    }

    fn join(&self, a: &HamiltonianSig, b: &HamiltonianSig) -> HamiltonianSig {
        let terms = union_terms(&a.terms, &b.terms);
        let mut pending = a.pending.clone();
        pending.extend(b.pending.iter().copied());
        let widen = |side: &HamiltonianSig, st: &HamState| -> HamState {
            let mut deg = vec![0u8; terms.len()];
            let mut mate = vec![None; terms.len()];
            for (k, t) in side.terms.iter().enumerate() {
                let p = terms.binary_search(t).expect("term in union");
                deg[p] = st.deg[k];
                mate[p] = st.mate[k];
            }
            HamState { deg, mate, closed: st.closed }
        };
        let mut states = BTreeSet::new();
        for sa in &a.states {
            let base = widen(a, sa);
            'pair: for sb in &b.states {
                let other = widen(b, sb);
                if base.closed && other.closed {
                    continue;
                }
                let mut cur = base.clone();
                if other.closed {
                    if cur.deg.iter().any(|&d| d > 0) {
                        continue;
                    }
                    states.insert(other);
                    continue;
                }
                // Interior terminals of b's paths.
                for p in 0..terms.len() {
                    if other.deg[p] == 2 {
                        if cur.deg[p] > 0 || cur.closed {
                            continue 'pair;
                        }
                        cur.deg[p] = 2;
                    }
                }
                for p in 0..terms.len() {
                    if let Some(m) = other.mate[p] {
                        let q = terms.binary_search(&m).expect("mate is a terminal");
                        if p < q {
                            match Hamiltonian::link(&terms, &cur, p, q) {
                                Some(next) => cur = next,
                                None => continue 'pair,
                            }
                        }
                    }
                }
                states.insert(cur);
            }
        }
        HamiltonianSig { terms, pending, states }.normalized()
    }

    fn accept(&self, s: &HamiltonianSig) -> bool {
        let mut cur = s.clone();
        for &t in &s.terms {
            cur = self.forget_vertex(&cur, t);
        }
        cur.states.iter().any(|st| st.closed)
    }

    fn arity_limit(&self) -> Option<usize> {
        Some(HAMILTONIAN_ARITY_LIMIT)
    }
}

// ---------------------------------------------------------------- runner

/// Interned signatures with memoized bag-to-bag transitions and joins.
#[derive(Debug)]
pub struct TransitionTables<S> {
    pub classes: Vec<S>,
    index: HashMap<S, usize>,
    /// (child class, child bag, parent bag) -> class.
    pub lift: HashMap<(usize, Vec<usize>, Vec<usize>), usize>,
    pub join: HashMap<(usize, usize), usize>,
    /// Bag-local classes keyed by bag contents.
    pub local: HashMap<Vec<usize>, usize>,
}

impl<S: Clone + Ord + Hash + Debug> Default for TransitionTables<S> {
    fn default() -> Self {
        TransitionTables { classes: Vec::new(), index: HashMap::new(), lift: HashMap::new(), join: HashMap::new(), local: HashMap::new() }
    }
}

impl<S: Clone + Ord + Hash + Debug> TransitionTables<S> {
    fn intern(&mut self, s: S) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        self.classes.push(s.clone());
        self.index.insert(s, self.classes.len() - 1);
        self.classes.len() - 1
    }
}

/// Signature of `(X, E[X], X)`.
pub fn bag_local<P: PropertySpec + ?Sized>(p: &P, g: &Graph, bag: &[usize]) -> P::Sig {
    let mut s = p.empty();
    for &v in bag {
        s = p.introduce_vertex(&s, v);
    }
    introduce_bag_edges(p, g, bag, s)
}

fn introduce_bag_edges<P: PropertySpec + ?Sized>(p: &P, g: &Graph, bag: &[usize], mut s: P::Sig) -> P::Sig {
    for (a, &u) in bag.iter().enumerate() {
        for &v in &bag[a + 1..] {
            if g.has_edge(u, v) {
                s = p.introduce_edge(&s, u, v);
            }
        }
    }
    s
}

/// Move a child signature to the parent bag: forget, then introduce, then add edges.
pub fn lift<P: PropertySpec + ?Sized>(p: &P, g: &Graph, s: &P::Sig, child: &[usize], parent: &[usize]) -> P::Sig {
    let mut s = s.clone();
    for v in child.iter().filter(|v| parent.binary_search(v).is_err()) {
        s = p.forget_vertex(&s, *v);
    }
    for v in parent.iter().filter(|v| child.binary_search(v).is_err()) {
        s = p.introduce_vertex(&s, *v);
    }
    introduce_bag_edges(p, g, parent, s)
}

/// Fold order for unordered decompositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldOrder {
    /// Children sorted by signature.
    Canonical,
    /// Children reversed from the canonical order, for order-independence checks.
    Reversed,
}

/// Root signature of a bottom-up run, with the transition tables used.
pub fn run_signature<P: PropertySpec + ?Sized>(
    g: &Graph,
    td: &TreeDecomposition,
    p: &P,
    order: FoldOrder,
) -> Result<(P::Sig, TransitionTables<P::Sig>), AutomatonError> {
    if let Some(limit) = p.arity_limit() {
        if let Some((bag, b)) = td.bags.iter().enumerate().find(|(_, b)| b.vertices.len() > limit) {
            return Err(AutomatonError::ArityLimit { property: p.name(), bag, size: b.vertices.len(), limit });
        }
    }
    if !td.ordered {
        if let Some(bag) = (0..td.len()).find(|&b| td.children[b].len() > UNORDERED_DEGREE_LIMIT) {
            return Err(AutomatonError::UnorderedUnbounded { bag, children: td.children[bag].len() });
        }
    }
    let mut tables = TransitionTables::default();
    let mut class = vec![usize::MAX; td.len()];
    for b in td.postorder() {
        let x = &td.bags[b].vertices;
        let local = match tables.local.get(x) {
            Some(&c) => c,
            None => {
                let c = tables.intern(bag_local(p, g, x));
                tables.local.insert(x.clone(), c);
                c
            }
        };
        let mut lifted = Vec::with_capacity(td.children[b].len());
        for &c in &td.children[b] {
            let key = (class[c], td.bags[c].vertices.clone(), x.clone());
            let id = match tables.lift.get(&key) {
                Some(&id) => id,
                None => {
                    let s = lift(p, g, &tables.classes[class[c]], &td.bags[c].vertices, x);
                    let id = tables.intern(s);
                    tables.lift.insert(key, id);
                    id
                }
            };
            lifted.push(id);
        }
        if !td.ordered {
            lifted.sort_by(|&a, &b| tables.classes[a].cmp(&tables.classes[b]));
            if order == FoldOrder::Reversed {
                lifted.reverse();
            }
        }
        let mut acc = local;
        for id in lifted {
            acc = match tables.join.get(&(acc, id)) {
                Some(&j) => j,
                None => {
                    let s = p.join(&tables.classes[acc], &tables.classes[id]);
                    let j = tables.intern(s);
                    tables.join.insert((acc, id), j);
                    j
                }
            };
        }
        class[b] = acc;
    }
    let root = tables.classes[class[td.root]].clone();
    Ok((root, tables))
}

/// Decide `p` on `g` by a bottom-up run over `td`.
pub fn run_automaton<P: PropertySpec + ?Sized>(g: &Graph, td: &TreeDecomposition, p: &P) -> Result<bool, AutomatonError> {
    let (root, _) = run_signature(g, td, p, FoldOrder::Canonical)?;
    Ok(p.accept(&root))
}

/// The four built-in properties, selectable by name.
#[derive(Clone, Copy, Debug)]
pub enum NamedProperty {
    Parity(Parity),
    Bipartite,
    Connected,
    Hamiltonian,
}

impl NamedProperty {
    /// `parity` (uses `modulus`), `bipartite`, `connected`, `hamiltonian`.
    pub fn parse(name: &str, modulus: usize) -> Result<NamedProperty, AutomatonError> {
        match name {
            "parity" => Ok(NamedProperty::Parity(Parity::new(modulus))),
            "bipartite" => Ok(NamedProperty::Bipartite),
            "connected" => Ok(NamedProperty::Connected),
            "hamiltonian" | "hamiltonian_cycle" => Ok(NamedProperty::Hamiltonian),
            other => Err(AutomatonError::UnknownProperty(other.to_string())),
        }
    }

    pub fn all() -> Vec<NamedProperty> {
        vec![
            NamedProperty::Parity(Parity::new(2)),
            NamedProperty::Parity(Parity::new(3)),
            NamedProperty::Bipartite,
            NamedProperty::Connected,
            NamedProperty::Hamiltonian,
        ]
    }

    pub fn name(&self) -> String {
        match self {
            NamedProperty::Parity(p) => p.name(),
            NamedProperty::Bipartite => Bipartite.name(),
            NamedProperty::Connected => Connected.name(),
            NamedProperty::Hamiltonian => Hamiltonian.name(),
        }
    }

    pub fn run(&self, g: &Graph, td: &TreeDecomposition) -> Result<bool, AutomatonError> {
        match self {
            NamedProperty::Parity(p) => run_automaton(g, td, p),
            NamedProperty::Bipartite => run_automaton(g, td, &Bipartite),
            NamedProperty::Connected => run_automaton(g, td, &Connected),
            NamedProperty::Hamiltonian => run_automaton(g, td, &Hamiltonian),
        }
    }

    pub fn brute(&self, g: &Graph) -> bool {
        match self {
            NamedProperty::Parity(p) => p.brute_eval(g),
            NamedProperty::Bipartite => Bipartite.brute_eval(g),
            NamedProperty::Connected => Connected.brute_eval(g),
            NamedProperty::Hamiltonian => Hamiltonian.brute_eval(g),
        }
    }

    pub fn audit(&self, samples: usize, seed: u64) -> Result<AuditReport, AutomatonError> {
        match self {
            NamedProperty::Parity(p) => refinement_audit(p, samples, seed),
            NamedProperty::Bipartite => refinement_audit(&Bipartite, samples, seed),
            NamedProperty::Connected => refinement_audit(&Connected, samples, seed),
            NamedProperty::Hamiltonian => refinement_audit(&Hamiltonian, samples, seed),
        }
    }
}

// ---------------------------------------------------------------- audit

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub pairs: usize,
    pub equal_signature_pairs: usize,
    /// Equal signatures but a distinguishing completion was found.
    pub equal_signature_violations: usize,
    pub distinguished_pairs: usize,
    /// Distinguished by a completion yet given equal signatures.
    pub distinguished_violations: usize,
    pub distinct_signatures: usize,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.equal_signature_violations == 0 && self.distinguished_violations == 0
    }
}

const AUDIT_BOUND: usize = 4;

/// Compare signature equality with bounded brute-force equivalence on sampled
/// pairs of small terminal graphs of arity at most 2.
pub fn refinement_audit<P: PropertySpec + ?Sized>(p: &P, samples: usize, seed: u64) -> Result<AuditReport, AutomatonError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport::default();
    let mut seen = BTreeSet::new();
    let terminal_sets: [Vec<String>; 3] = [vec![], vec!["a".into()], vec!["a".into(), "b".into()]];
    // Pools bucketed by signature so that about half the pairs share one.
    let mut pools: Vec<BTreeMap<P::Sig, Vec<TerminalGraph>>> = Vec::new();
    for x in &terminal_sets {
        let mut pool: BTreeMap<P::Sig, Vec<TerminalGraph>> = BTreeMap::new();
        for _ in 0..80 {
            let density = rng.gen_range(0.15..0.85);
            let tg = random_terminal_graph(&mut rng, x, "n", 4, density);
            pool.entry(signature_of(p, &tg)).or_default().push(tg);
        }
        pools.push(pool);
    }
    for i in 0..samples {
        let pool = &pools[i % pools.len()];
        let groups: Vec<&Vec<TerminalGraph>> = pool.values().collect();
        let (g, h) = if rng.gen_bool(0.5) {
            let grp = groups.choose(&mut rng).expect("nonempty pool");
            (grp.choose(&mut rng).expect("nonempty"), grp.choose(&mut rng).expect("nonempty"))
        } else {
            (
                groups.choose(&mut rng).and_then(|g| g.choose(&mut rng)).expect("nonempty"),
                groups.choose(&mut rng).and_then(|g| g.choose(&mut rng)).expect("nonempty"),
            )
        };
        let (sg, sh) = (signature_of(p, g), signature_of(p, h));
        seen.insert(sg.clone());
        seen.insert(sh.clone());
        let equiv = brute_equiv(g, h, p, AUDIT_BOUND)?;
        report.pairs += 1;
        if sg == sh {
            report.equal_signature_pairs += 1;
            if !equiv {
                report.equal_signature_violations += 1;
            }
        }
        if !equiv {
            report.distinguished_pairs += 1;
            if sg == sh {
                report.distinguished_violations += 1;
            }
        }
    }
    report.distinct_signatures = seen.len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{halin4, random_halin, halin_from_plane_tree};
    use crate::tree_decomposition::{Anchor, Bag, BagType};

    fn k4() -> Graph {
        halin4().graph
    }

    #[test]
    fn signature_examples() {
        let empty = TerminalGraph::from_labels(&[], &[], &[]).unwrap();
        assert_eq!(signature_of(&Parity::new(2), &empty).residue, 0);
        let edge = TerminalGraph::from_labels(&["a", "b"], &[("a", "b")], &["a", "b"]).unwrap();
        let bip = signature_of(&Bipartite, &edge);
        assert_eq!(bip.colorings, BTreeSet::from([vec![false, true], vec![true, false]]));
        let two = TerminalGraph::from_labels(&["a", "b"], &[], &["a", "b"]).unwrap();
        let con = signature_of(&Connected, &two);
        assert_eq!((con.blocks, con.stranded), (vec![0, 1], 0));
    }

    #[test]
    fn accept_matches_brute_on_closed_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let arity = rng.gen_range(0..=3);
            let x: Vec<String> = (0..arity).map(|i| format!("t{i}")).collect();
            let tg = random_terminal_graph(&mut rng, &x, "n", 5, 0.5);
            for p in NamedProperty::all() {
                let verdict = match p {
                    NamedProperty::Parity(q) => q.accept(&signature_of(&q, &tg)),
                    NamedProperty::Bipartite => Bipartite.accept(&signature_of(&Bipartite, &tg)),
                    NamedProperty::Connected => Connected.accept(&signature_of(&Connected, &tg)),
                    NamedProperty::Hamiltonian => Hamiltonian.accept(&signature_of(&Hamiltonian, &tg)),
                };
                assert_eq!(verdict, p.brute(&tg.graph), "{} on {:?}", p.name(), tg);
            }
        }
    }

    #[test]
    fn k4_verdicts_on_trivial_decomposition() {
        let g = k4();
        let td = TreeDecomposition::trivial(&g);
        assert!(run_automaton(&g, &td, &Parity::new(2)).unwrap());
        assert!(!run_automaton(&g, &td, &Bipartite).unwrap());
        assert!(run_automaton(&g, &td, &Hamiltonian).unwrap());
        assert!(run_automaton(&g, &td, &Connected).unwrap());
    }

    #[test]
    fn cycle_on_path_decomposition() {
        // C5 with a path decomposition {0,1,4} {1,2,4} {2,3,4}.
        let g = Graph::new((0..5).map(|i| format!("v{i}")).collect(), (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        let bag = |v: [usize; 3]| Bag::new(v, BagType::VertexType(0), Anchor::Vertex(v[0]));
        let td = TreeDecomposition::new(
            vec![bag([0, 1, 4]), bag([1, 2, 4]), bag([2, 3, 4])],
            0,
            vec![None, Some(0), Some(1)],
            None,
        )
        .unwrap();
        for p in NamedProperty::all() {
            assert_eq!(p.run(&g, &td).unwrap(), p.brute(&g), "{}", p.name());
        }
    }

    #[test]
    fn fold_order_does_not_matter() {
        let h = halin_from_plane_tree(&random_halin(4, 2)).unwrap();
        let g = &h.graph;
        // Star decomposition: bag {0, v} for each v, all children of bag {0}.
        let mut bags = vec![Bag::new(0..g.n(), BagType::VertexType(0), Anchor::Vertex(0))];
        let mut parent = vec![None];
        for v in 0..g.n() {
            bags.push(Bag::new([v], BagType::VertexType(1), Anchor::Vertex(v)));
            parent.push(Some(0));
        }
        let td = TreeDecomposition::new(bags, 0, parent, None).unwrap();
        let (a, _) = run_signature(g, &td, &Connected, FoldOrder::Canonical).unwrap();
        let (b, _) = run_signature(g, &td, &Connected, FoldOrder::Reversed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn memo_replay_matches_recomputation() {
        let g = k4();
        let td = TreeDecomposition::trivial(&g);
        let (_, tables) = run_signature(&g, &td, &Bipartite, FoldOrder::Canonical).unwrap();
        for ((a, b), j) in &tables.join {
            assert_eq!(Bipartite.join(&tables.classes[*a], &tables.classes[*b]), tables.classes[*j]);
        }
        for (bag, c) in &tables.local {
            assert_eq!(bag_local(&Bipartite, &g, bag), tables.classes[*c]);
        }
    }

    #[test]
    fn hamiltonian_arity_gate() {
        let g = Graph::new((0..11).map(|i| i.to_string()).collect(), (0..11).map(|i| (i, (i + 1) % 11))).unwrap();
        let td = TreeDecomposition::trivial(&g);
        assert!(matches!(run_automaton(&g, &td, &Hamiltonian), Err(AutomatonError::ArityLimit { .. })));
    }

    #[test]
    fn small_audits_pass() {
        for p in NamedProperty::all() {
            let r = p.audit(30, 1).unwrap();
            assert!(r.passed(), "{}: {:?}", p.name(), r);
        }
    }
}
