//! Terminal graphs, the three gluing operators, and brute-force equivalence
//! oracles for tiny instances.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph_core::{norm, Graph, GraphError};
use crate::property_automata::PropertySpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("terminal arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("terminal `{0}` is not a vertex of the graph")]
    BadTerminal(String),
    #[error("terminal `{0}` listed twice")]
    RepeatedTerminal(String),
    #[error("oracle bounds exceeded: arity {arity} (max 3), completion size {bound} (max 5)")]
    Bounds { arity: usize, bound: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Graph with an ordered list of terminal vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminalGraph {
    pub graph: Graph,
    pub terminals: Vec<usize>,
}

impl TerminalGraph {
    pub fn new(graph: Graph, terminals: Vec<usize>) -> Result<TerminalGraph, AlgebraError> {
        let mut seen = BTreeSet::new();
        for &t in &terminals {
            if t >= graph.n() {
                return Err(AlgebraError::BadTerminal(format!("#{t}")));
            }
            if !seen.insert(t) {
                return Err(AlgebraError::RepeatedTerminal(graph.label(t).to_string()));
            }
        }
        Ok(TerminalGraph { graph, terminals })
    }

    pub fn from_labels(vertices: &[&str], edges: &[(&str, &str)], terminals: &[&str]) -> Result<TerminalGraph, AlgebraError> {
        let graph = Graph::from_labels(vertices, edges)?;
        let terms = terminals
            .iter()
            .map(|t| graph.vertex(t).ok_or_else(|| AlgebraError::BadTerminal(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        TerminalGraph::new(graph, terms)
    }

    /// `(X, ∅, X)` for the given labels.
    pub fn edgeless(labels: &[String]) -> TerminalGraph {
        let graph = Graph::new(labels.to_vec(), []).expect("distinct labels");
        TerminalGraph { graph, terminals: (0..labels.len()).collect() }
    }

    /// Induced subgraph of `g` on `verts` (kept in declaration order), with
    /// terminals given as vertex indices of `g`.
    pub fn induced(g: &Graph, verts: &BTreeSet<usize>, terminals: &[usize]) -> TerminalGraph {
        let pos: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let labels = verts.iter().map(|&v| g.label(v).to_string()).collect();
        let edges = g
            .edges()
            .iter()
            .filter_map(|&(u, v)| Some((*pos.get(&u)?, *pos.get(&v)?)));
        let graph = Graph::new(labels, edges).expect("subgraph of a simple graph");
        let terminals = terminals.iter().map(|t| pos[t]).collect();
        TerminalGraph { graph, terminals }
    }

    pub fn arity(&self) -> usize {
        self.terminals.len()
    }

    pub fn terminal_labels(&self) -> Vec<String> {
        self.terminals.iter().map(|&t| self.graph.label(t).to_string()).collect()
    }

    fn is_terminal(&self, v: usize) -> bool {
        self.terminals.contains(&v)
    }
}

/// `G ⊕ H`: disjoint union with the i-th terminals identified. Parallel edges
/// collapse. Non-terminals of `H` get a `'` suffix, repeated until unused.
pub fn glue(g: &TerminalGraph, h: &TerminalGraph) -> Result<Graph, AlgebraError> {
    if g.arity() != h.arity() {
        return Err(AlgebraError::ArityMismatch(g.arity(), h.arity()));
    }
    let mut labels: Vec<String> = g.graph.labels().to_vec();
    let mut used: BTreeSet<String> = labels.iter().cloned().collect();
    used.extend(h.graph.labels().iter().cloned());
    let mut map = vec![usize::MAX; h.graph.n()];
    for (i, &t) in h.terminals.iter().enumerate() {
        map[t] = g.terminals[i];
    }
    for v in 0..h.graph.n() {
        if map[v] != usize::MAX {
            continue;
        }
        let mut name = format!("{}'", h.graph.label(v));
        while used.contains(&name) {
            name.push('\'');
        }
        used.insert(name.clone());
        map[v] = labels.len();
        labels.push(name);
    }
    let mut edges: BTreeSet<(usize, usize)> = g.graph.edges().iter().copied().collect();
    edges.extend(h.graph.edges().iter().map(|&(u, v)| norm(map[u], map[v])));
    Ok(Graph::new(labels, edges)?)
}

/// `G ⊕_T X`: add any missing labels of `x` as isolated vertices and make `x`
/// the terminal list.
pub fn reterminalize(g: &TerminalGraph, x: &[String]) -> Result<TerminalGraph, AlgebraError> {
    let mut labels = g.graph.labels().to_vec();
    let mut terms = Vec::with_capacity(x.len());
    for l in x {
        let v = match g.graph.vertex(l) {
            Some(v) => v,
            None => match labels.iter().position(|m| m == l) {
                Some(v) => v,
                None => {
                    labels.push(l.clone());
                    labels.len() - 1
                }
            },
        };
        terms.push(v);
    }
    let graph = Graph::new(labels, g.graph.edges().iter().copied())?;
    TerminalGraph::new(graph, terms)
}

/// `G ⊕_▷ H`: union of vertex and edge sets by label, terminals of `G`.
pub fn glue_child(g: &TerminalGraph, h: &TerminalGraph) -> TerminalGraph {
    let mut labels = g.graph.labels().to_vec();
    let mut map = Vec::with_capacity(h.graph.n());
    for l in h.graph.labels() {
        match g.graph.vertex(l) {
            Some(v) => map.push(v),
            None => {
                map.push(labels.len());
                labels.push(l.clone());
            }
        }
    }
    let mut edges: BTreeSet<(usize, usize)> = g.graph.edges().iter().copied().collect();
    edges.extend(h.graph.edges().iter().map(|&(u, v)| norm(map[u], map[v])));
    let graph = Graph::new(labels, edges).expect("union of simple graphs over one label set");
    TerminalGraph { graph, terminals: g.terminals.clone() }
}

/// Right-hand side of the rewrite `G ⊕_▷ H = (G ⊕ (H ⊕_T X_G)) ⊕_T X_G`.
pub fn glue_child_by_rewrite(g: &TerminalGraph, h: &TerminalGraph) -> Result<TerminalGraph, AlgebraError> {
    let x = g.terminal_labels();
    let glued = glue(g, &reterminalize(h, &x)?)?;
    let carrier = TerminalGraph { graph: glued, terminals: Vec::new() };
    reterminalize(&carrier, &x)
}

/// Isomorphism that maps the i-th terminal to the i-th terminal.
pub fn isomorphic_fixed(g: &TerminalGraph, h: &TerminalGraph) -> bool {
    let n = g.graph.n();
    if n != h.graph.n() || g.graph.m() != h.graph.m() || g.arity() != h.arity() {
        return false;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (&a, &b) in g.terminals.iter().zip(&h.terminals) {
        if g.graph.degree(a) != h.graph.degree(b) {
            return false;
        }
        map[a] = b;
        used[b] = true;
    }
    let consistent = |map: &[usize], v: usize| {
        g.graph.neighbors(v).iter().all(|&w| map[w] == usize::MAX || h.graph.has_edge(map[v], map[w]))
            && (0..n).all(|w| {
                map[w] == usize::MAX || w == v || g.graph.has_edge(v, w) == h.graph.has_edge(map[v], map[w])
            })
    };
    if !g.terminals.iter().all(|&t| consistent(&map, t)) {
        return false;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| map[v] == usize::MAX).collect();
    fn go(
        g: &TerminalGraph,
        h: &TerminalGraph,
        rest: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(&[usize], usize) -> bool,
    ) -> bool {
        let Some((&v, tail)) = rest.split_first() else { return true };
        for cand in 0..h.graph.n() {
            if used[cand] || g.graph.degree(v) != h.graph.degree(cand) {
                continue;
            }
            map[v] = cand;
            if ok(map, v) {
                used[cand] = true;
                if go(g, h, tail, map, used, ok) {
                    return true;
                }
                used[cand] = false;
            }
            map[v] = usize::MAX;
        }
        false
    }
    go(g, h, &rest, &mut map, &mut used, &consistent)
}

/// Canonical key up to permutations of non-terminals. Exponential; tiny graphs only.
pub fn canonical_key(g: &TerminalGraph) -> (usize, Vec<bool>) {
    let n = g.graph.n();
    let rest: Vec<usize> = (0..n).filter(|&v| !g.is_terminal(v)).collect();
    let mut best: Option<Vec<bool>> = None;
    let mut perm = rest.clone();
    permute(&mut perm, 0, &mut |p| {
        let order: Vec<usize> = g.terminals.iter().copied().chain(p.iter().copied()).collect();
        let mut key = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 0..n {
            for j in i + 1..n {
                key.push(g.graph.has_edge(order[i], order[j]));
            }
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    });
    (n, best.unwrap_or_default())
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// All completions `K` with `arity` terminals and at most `bound` vertices,
/// one per isomorphism class fixing terminals.
pub fn completions(arity: usize, bound: usize) -> Vec<TerminalGraph> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for n in arity..=bound.max(arity) {
        let labels: Vec<String> = (0..n).map(|i| if i < arity { format!("t{i}") } else { format!("k{i}") }).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0u64..(1u64 << pairs.len()) {
            let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e);
            let graph = Graph::new(labels.clone(), edges).expect("simple by construction");
            let tg = TerminalGraph { graph, terminals: (0..arity).collect() };
            if seen.insert(canonical_key(&tg)) {
                out.push(tg);
            }
        }
    }
    out
}

fn check_bounds(arity: usize, bound: usize) -> Result<(), AlgebraError> {
    if arity > 3 || bound > 5 {
        return Err(AlgebraError::Bounds { arity, bound });
    }
    Ok(())
}

/// Verdicts of `P(G ⊕ K)` over `completions(arity, bound)`.
pub fn fingerprint<P: PropertySpec + ?Sized>(g: &TerminalGraph, p: &P, bound: usize) -> Result<Vec<bool>, AlgebraError> {
    check_bounds(g.arity(), bound)?;
    completions(g.arity(), bound).iter().map(|k| Ok(p.brute_eval(&glue(g, k)?))).collect()
}

/// Same verdict for every completion of size at most `bound`. Finding a
/// difference proves inequivalence; agreement only means "equivalent at this bound".
pub fn brute_equiv<P: PropertySpec + ?Sized>(
    g: &TerminalGraph,
    h: &TerminalGraph,
    p: &P,
    bound: usize,
) -> Result<bool, AlgebraError> {
    if g.arity() != h.arity() {
        return Err(AlgebraError::ArityMismatch(g.arity(), h.arity()));
    }
    check_bounds(g.arity(), bound)?;
    for k in completions(g.arity(), bound) {
        if p.brute_eval(&glue(g, &k)?) != p.brute_eval(&glue(h, &k)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Random terminal graph: terminals carry the given labels, the other vertices
/// are named `{prefix}{i}`.
pub fn random_terminal_graph(
    rng: &mut impl Rng,
    terminals: &[String],
    prefix: &str,
    max_extra: usize,
    density: f64,
) -> TerminalGraph {
    let extra = rng.gen_range(0..=max_extra);
    let mut labels = terminals.to_vec();
    labels.extend((0..extra).map(|i| format!("{prefix}{i}")));
    let n = labels.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::new(labels, edges).expect("distinct labels");
    TerminalGraph { graph, terminals: (0..terminals.len()).collect() }
}

/// Counterexample found by `congruence_check`.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub law: &'static str,
    pub operands: Vec<TerminalGraph>,
}

#[derive(Clone, Debug, Default)]
pub struct CongruenceReport {
    pub child_glue_checked: usize,
    pub reterminalize_checked: usize,
    pub commutativity_checked: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl CongruenceReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

const CHECK_BOUND: usize = 4;

/// Pool of random terminal graphs bucketed by fingerprint.
struct Pool {
    buckets: Vec<Vec<TerminalGraph>>,
}

impl Pool {
    fn build<P: PropertySpec + ?Sized>(
        rng: &mut ChaCha8Rng,
        p: &P,
        terminals: &[String],
        prefix: &str,
        size: usize,
    ) -> Result<Pool, AlgebraError> {
        let mut map: BTreeMap<Vec<bool>, Vec<TerminalGraph>> = BTreeMap::new();
        for _ in 0..size {
            let density = rng.gen_range(0.2..0.8);
            let tg = random_terminal_graph(rng, terminals, prefix, 6 - terminals.len().min(6), density);
            map.entry(fingerprint(&tg, p, CHECK_BOUND)?).or_default().push(tg);
        }
        Ok(Pool { buckets: map.into_values().collect() })
    }

    /// Two members of one bucket, possibly the same graph.
    fn pair(&self, rng: &mut ChaCha8Rng) -> (TerminalGraph, TerminalGraph) {
        let b = self.buckets.choose(rng).expect("nonempty pool");
        (b.choose(rng).expect("nonempty").clone(), b.choose(rng).expect("nonempty").clone())
    }
}

/// Sample equivalent operand pairs and check that `⊕_▷` and `⊕_T` preserve
/// equivalence, and that `⊕_▷` of constant children commutes.
pub fn congruence_check<P: PropertySpec + ?Sized>(p: &P, trials: usize, seed: u64) -> Result<CongruenceReport, AlgebraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CongruenceReport::default();
    let labels = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    // Parent terminals X and child terminals Y overlapping like adjacent bags.
    let shapes: [(Vec<String>, Vec<String>); 3] = [
        (labels(&["x0", "x1"]), labels(&["x0", "y"])),
        (labels(&["x0", "x1"]), labels(&["x1", "x0"])),
        (labels(&["x0"]), labels(&["x0", "y"])),
    ];
    let mut pools = Vec::new();
    for (x, y) in &shapes {
        pools.push((
            Pool::build(&mut rng, p, x, "g", 60)?,
            Pool::build(&mut rng, p, y, "h", 60)?,
            x.clone(),
            y.clone(),
        ));
    }
    for t in 0..trials {
        let (gp, hp, x, y) = &pools[t % pools.len()];
        let (g, g2) = gp.pair(&mut rng);
        let (h, h2) = hp.pair(&mut rng);

        report.child_glue_checked += 1;
        let left = glue_child(&g, &h);
        let right = glue_child(&g2, &h2);
        if fingerprint(&left, p, CHECK_BOUND)? != fingerprint(&right, p, CHECK_BOUND)? {
            report.counterexamples.push(Counterexample { law: "child-glue", operands: vec![g, g2, h, h2] });
            continue;
        }

        report.reterminalize_checked += 1;
        let mut target: Vec<String> = y.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
        if rng.gen_bool(0.3) {
            target.push("z".to_string());
        }
        target.shuffle(&mut rng);
        let a = reterminalize(&h, &target)?;
        let b = reterminalize(&h2, &target)?;
        if fingerprint(&a, p, CHECK_BOUND)? != fingerprint(&b, p, CHECK_BOUND)? {
            report.counterexamples.push(Counterexample { law: "reterminalize", operands: vec![h, h2] });
            continue;
        }

        report.commutativity_checked += 1;
        let (k1, _) = hp.pair(&mut rng);
        let k2 = rename_non_terminals(&h, "j");
        let c1 = reterminalize(&k1, x)?;
        let c2 = reterminalize(&k2, x)?;
        let ab = glue_child(&c1, &c2);
        let ba = glue_child(&c2, &c1);
        if !isomorphic_fixed(&ab, &ba) || fingerprint(&ab, p, CHECK_BOUND)? != fingerprint(&ba, p, CHECK_BOUND)? {
            report.counterexamples.push(Counterexample { law: "commutativity", operands: vec![c1, c2] });
        }
    }
    Ok(report)
}

/// Copy with every non-terminal label prefixed, keeping terminals.
pub fn rename_non_terminals(g: &TerminalGraph, prefix: &str) -> TerminalGraph {
    let labels = (0..g.graph.n())
        .map(|v| {
            let l = g.graph.label(v);
            if g.is_terminal(v) { l.to_string() } else { format!("{prefix}{l}") }
        })
        .collect();
    let graph = Graph::new(labels, g.graph.edges().iter().copied()).expect("prefixing keeps labels distinct");
    TerminalGraph { graph, terminals: g.terminals.clone() }
}
