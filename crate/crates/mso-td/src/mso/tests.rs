use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::build::*;
use super::cross_check::{halin_structure, kcycle_structure};
use super::*;
use crate::graph_core::{halin4, random_kcycle, Graph};

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::new((0..n).map(|i| format!("v{i}")).collect(), edges.iter().map(|&(a, b)| norm(a, b))).unwrap()
}

fn closed(s: &Structure, f: &Formula) -> Result<bool, MsoError> {
    eval(s, &Library::empty(), f, &Env::new())
}

#[test]
fn some_vertex_exists() {
    let f = parse_formula("(exists (v vertex) (= v v))").unwrap();
    assert!(closed(&Structure::new(graph(3, &[(0, 1)])).unwrap(), &f).unwrap());
    assert!(!closed(&Structure::new(graph(0, &[])).unwrap(), &f).unwrap());
}

#[test]
fn graphs_are_simple() {
    let s = Structure::new(halin4().graph).unwrap();
    let lib = Library::standard(LibraryParams::default());
    let f = parse_formula("(forall (e edge) (forall (v vertex) (forall (w vertex) (-> (edge e v w) (not (= v w))))))").unwrap();
    assert!(eval(&s, &lib, &f, &Env::new()).unwrap());
}

#[test]
fn two_class_partitions_of_three_vertices() {
    let s = Structure::new(graph(3, &[(0, 1), (1, 2)])).unwrap();
    let lib = Library::standard(LibraryParams::default());
    let mut ev = Evaluator::new(&s, &lib);
    let mut count = 0;
    for a in 0u64..8 {
        for b in 0u64..8 {
            if ev.call("part_v_2", &[Value::VertexSet(a), Value::VertexSet(b)]).unwrap() {
                count += 1;
            }
        }
    }
    assert_eq!(count, 1 << 3);
}

#[test]
fn budget_and_scope_errors() {
    let big = graph(30, &[]);
    let s = Structure::new(big).unwrap();
    let f = ex("X", Sort::VertexSet, Formula::Const(true));
    assert!(matches!(closed(&s, &f), Err(MsoError::Budget(_))));
    let small = Structure::new(graph(2, &[(0, 1)])).unwrap();
    assert!(matches!(closed(&small, &mem(n("x"), Term::AllVertices)), Err(MsoError::Unbound(_))));
    let lib = Library::standard(LibraryParams::default());
    assert!(matches!(Evaluator::new(&small, &lib).call("edge", &[Value::Vertex(0)]), Err(MsoError::Arity { .. })));
    assert!(matches!(Evaluator::new(&small, &lib).call("nope", &[]), Err(MsoError::UnknownPredicate(_))));
    let runaway = all("X", Sort::VertexSet, all("Y", Sort::VertexSet, Formula::Const(true)));
    let mut ev = Evaluator::new(&small, &lib).with_step_limit(3);
    assert!(matches!(ev.eval(&runaway, &Env::new()), Err(MsoError::Budget(_))));
}

#[test]
fn names_resolve_loosely() {
    let lib = Library::standard(LibraryParams::default());
    assert_eq!(lib.get("fundcyc").unwrap().name, "fund_cyc");
    assert_eq!(lib.get("oriNB").unwrap().name, "ori_nb");
    assert!(lib.get("no_such_thing").is_none());
}

#[test]
fn halin4_sibling_order_and_tree() {
    let h = halin4();
    let s = halin_structure(&h).unwrap();
    let lib = Library::standard(LibraryParams::default());
    let mut ev = Evaluator::new(&s, &lib);
    let e = |t: &str| s.resolve_element(t).unwrap();
    assert!(ev.call("ori_nb", &[e("vc"), e("vb")]).unwrap());
    assert!(!ev.call("ori_nb", &[e("vb"), e("vc")]).unwrap());
    assert!(ev.call("fund_cyc", &[e("va"), e("ab")]).unwrap());
    assert!(!ev.call("fund_cyc", &[e("vc"), e("ab")]).unwrap());
    let all = Value::VertexSet(0b1111);
    assert!(ev.call("dir_tree", &[all, s.constants["E_T"]]).unwrap());
}

/// Fills every constant any library entry reads.
fn saturate(s: &mut Structure, cycle: &str, root: Value, center: usize) {
    let c = s.constants[cycle];
    s.constants.entry("E_C".into()).or_insert(c);
    s.constants.entry("E_C1".into()).or_insert(c);
    s.constants.entry("r".into()).or_insert(root);
    s.constants.entry("r1".into()).or_insert(root);
    s.constants.entry("c".into()).or_insert(Value::Vertex(center));
    s.constants.insert("E_X".into(), c);
    s.set_vertices("V0", 0..s.n());
}

fn first_args(d: &Definition) -> Vec<Value> {
    d.params
        .iter()
        .map(|(_, sort)| match sort {
            Sort::Vertex => Value::Vertex(0),
            Sort::Edge => Value::Edge(0),
            Sort::VertexSet => Value::VertexSet(1),
            Sort::EdgeSet => Value::EdgeSet(1),
        })
        .collect()
}

#[test]
fn every_definition_runs_on_fixtures() {
    let lib = Library::standard(LibraryParams::default());
    let h = halin4();
    let mut halin = halin_structure(&h).unwrap();
    saturate(&mut halin, "E_C", Value::Vertex(h.root), h.graph.vertex("v").unwrap());
    let kc = random_kcycle(1, 5, 0);
    let mut wheel = kcycle_structure(&kc).unwrap();
    saturate(&mut wheel, "E_C1", Value::Vertex(kc.level_roots[0]), kc.center);
    for s in [&halin, &wheel] {
        let mut ev = Evaluator::new(s, &lib);
        for d in lib.definitions() {
            let r = ev.call(&d.name, &first_args(d));
            assert!(r.is_ok(), "{} failed: {:?}", d.name, r);
        }
    }
}

// Naive reference semantics over explicit sets, for differential testing.

#[derive(Clone, Debug, PartialEq, Eq)]
enum Naive {
    V(usize),
    E(Edge),
    Vs(BTreeSet<usize>),
    Es(BTreeSet<Edge>),
}

fn powerset<T: Clone + Ord>(items: &[T]) -> Vec<BTreeSet<T>> {
    (0u32..1 << items.len())
        .map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| x.clone()).collect())
        .collect()
}

fn naive_term(g: &Graph, t: &Term, env: &[(String, Naive)]) -> Naive {
    match t {
        Term::Name(n) => env.iter().rev().find(|(k, _)| k == n).expect("bound").1.clone(),
        Term::AllVertices => Naive::Vs((0..g.n()).collect()),
        Term::AllEdges => Naive::Es(g.edges().iter().copied().collect()),
        Term::NoVertices => Naive::Vs(BTreeSet::new()),
        Term::NoEdges => Naive::Es(BTreeSet::new()),
        Term::Union(a, b) | Term::Inter(a, b) | Term::Diff(a, b) => {
            let (x, y) = (naive_term(g, a, env), naive_term(g, b, env));
            macro_rules! op {
                ($p:expr, $q:expr, $w:path) => {
                    $w(match t {
                        Term::Union(..) => $p.union(&$q).cloned().collect(),
                        Term::Inter(..) => $p.intersection(&$q).cloned().collect(),
                        _ => $p.difference(&$q).cloned().collect(),
                    })
                };
            }
            match (x, y) {
                (Naive::Vs(p), Naive::Vs(q)) => op!(p, q, Naive::Vs),
                (Naive::Es(p), Naive::Es(q)) => op!(p, q, Naive::Es),
                _ => panic!("sorts"),
            }
        }
        Term::IncV(a) => match naive_term(g, a, env) {
            Naive::Es(es) => Naive::Vs(es.iter().flat_map(|&(u, v)| [u, v]).collect()),
            _ => panic!("sorts"),
        },
        Term::IncE(a) => match naive_term(g, a, env) {
            Naive::Vs(vs) => Naive::Es(g.edges().iter().filter(|e| vs.contains(&e.0) || vs.contains(&e.1)).copied().collect()),
            _ => panic!("sorts"),
        },
        Term::Single(a) => match naive_term(g, a, env) {
            Naive::V(v) => Naive::Vs([v].into()),
            Naive::E(e) => Naive::Es([e].into()),
            _ => panic!("sorts"),
        },
    }
}

fn naive(g: &Graph, f: &Formula, env: &mut Vec<(String, Naive)>) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Eq(a, b) => naive_term(g, a, env) == naive_term(g, b, env),
        Formula::Inc(a, b) => match (naive_term(g, a, env), naive_term(g, b, env)) {
            (Naive::E(e), Naive::V(v)) => e.0 == v || e.1 == v,
            _ => panic!("sorts"),
        },
        Formula::Mem(a, b) => match (naive_term(g, a, env), naive_term(g, b, env)) {
            (Naive::V(v), Naive::Vs(s)) => s.contains(&v),
            (Naive::E(e), Naive::Es(s)) => s.contains(&e),
            _ => panic!("sorts"),
        },
        Formula::Subset(a, b) => match (naive_term(g, a, env), naive_term(g, b, env)) {
            (Naive::Vs(x), Naive::Vs(y)) => x.is_subset(&y),
            (Naive::Es(x), Naive::Es(y)) => x.is_subset(&y),
            _ => panic!("sorts"),
        },
        Formula::Not(a) => !naive(g, a, env),
        Formula::And(fs) => fs.iter().all(|h| naive(g, h, env)),
        Formula::Or(fs) => fs.iter().any(|h| naive(g, h, env)),
        Formula::Implies(a, b) => !naive(g, a, env) || naive(g, b, env),
        Formula::Iff(a, b) => naive(g, a, env) == naive(g, b, env),
        Formula::Exists(b, body) | Formula::Forall(b, body) => {
            let verts: Vec<usize> = match &b.within {
                Some(t) => match naive_term(g, t, env) {
                    Naive::Vs(s) => s.into_iter().collect(),
                    _ => Vec::new(),
                },
                None => (0..g.n()).collect(),
            };
            let edges: Vec<Edge> = match &b.within {
                Some(t) => match naive_term(g, t, env) {
                    Naive::Es(s) => s.into_iter().collect(),
                    _ => Vec::new(),
                },
                None => g.edges().to_vec(),
            };
            let dom: Vec<Naive> = match b.sort {
                Sort::Vertex => verts.into_iter().map(Naive::V).collect(),
                Sort::Edge => edges.into_iter().map(Naive::E).collect(),
                Sort::VertexSet => powerset(&verts).into_iter().map(Naive::Vs).collect(),
                Sort::EdgeSet => powerset(&edges).into_iter().map(Naive::Es).collect(),
            };
            let want = matches!(f, Formula::Exists(..));
            let mut out = !want;
            for v in dom {
                env.push((b.var.clone(), v));
                let r = naive(g, body, env);
                env.pop();
                if r == want {
                    out = want;
                    break;
                }
            }
            out
        }
        Formula::Call(..) => panic!("no library in the reference"),
    }
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    scope: Vec<(String, Sort)>,
    fresh: usize,
}

impl Gen<'_> {
    fn pick(&mut self, sort: Sort) -> Option<Term> {
        let c: Vec<&String> = self.scope.iter().filter(|(_, s)| *s == sort).map(|(n, _)| n).collect();
        if c.is_empty() {
            None
        } else {
            Some(n(c[self.rng.gen_range(0..c.len())]))
        }
    }

    fn set_term(&mut self, sort: Sort, depth: usize) -> Term {
        let vertexy = sort == Sort::VertexSet;
        let choice = self.rng.gen_range(0..if depth == 0 { 3 } else { 7 });
        match choice {
            0 => self.pick(sort).unwrap_or(if vertexy { Term::AllVertices } else { Term::AllEdges }),
            1 => {
                if vertexy {
                    Term::NoVertices
                } else {
                    Term::AllEdges
                }
            }
            2 => {
                let elem = if vertexy { Sort::Vertex } else { Sort::Edge };
                self.pick(elem).map(Term::single).unwrap_or(if vertexy { Term::AllVertices } else { Term::NoEdges })
            }
            3 => Term::union(self.set_term(sort, depth - 1), self.set_term(sort, depth - 1)),
            4 => Term::inter(self.set_term(sort, depth - 1), self.set_term(sort, depth - 1)),
            5 => Term::diff(self.set_term(sort, depth - 1), self.set_term(sort, depth - 1)),
            _ => {
                if vertexy {
                    Term::inc_v(self.set_term(Sort::EdgeSet, depth - 1))
                } else {
                    Term::inc_e(self.set_term(Sort::VertexSet, depth - 1))
                }
            }
        }
    }

    fn atom(&mut self) -> Formula {
        let sorts = [Sort::Vertex, Sort::Edge, Sort::VertexSet, Sort::EdgeSet];
        for _ in 0..8 {
            match self.rng.gen_range(0..5) {
                0 => {
                    let s = sorts[self.rng.gen_range(0..4)];
                    if s.is_set() {
                        return eq(self.set_term(s, 2), self.set_term(s, 2));
                    }
                    if let (Some(a), Some(b)) = (self.pick(s), self.pick(s)) {
                        return eq(a, b);
                    }
                }
                1 => {
                    if let (Some(e), Some(v)) = (self.pick(Sort::Edge), self.pick(Sort::Vertex)) {
                        return inc(e, v);
                    }
                }
                2 | 3 => {
                    let (elem, set) = if self.rng.gen_bool(0.5) { (Sort::Vertex, Sort::VertexSet) } else { (Sort::Edge, Sort::EdgeSet) };
                    if let Some(x) = self.pick(elem) {
                        return mem(x, self.set_term(set, 2));
                    }
                }
                _ => {
                    let s = if self.rng.gen_bool(0.5) { Sort::VertexSet } else { Sort::EdgeSet };
                    return sub(self.set_term(s, 2), self.set_term(s, 2));
                }
            }
        }
        Formula::Const(self.rng.gen_bool(0.5))
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return self.atom();
        }
        match self.rng.gen_range(0..8) {
            0 => not(self.formula(depth - 1)),
            1 => and(vec![self.formula(depth - 1), self.formula(depth - 1)]),
            2 => or(vec![self.formula(depth - 1), self.formula(depth - 1)]),
            3 => imp(self.formula(depth - 1), self.formula(depth - 1)),
            4 => iff(self.formula(depth - 1), self.formula(depth - 1)),
            _ => {
                let sort = [Sort::Vertex, Sort::Edge, Sort::VertexSet, Sort::EdgeSet][self.rng.gen_range(0..4)];
                let var = format!("x{}", self.fresh);
                self.fresh += 1;
                let within = if self.rng.gen_bool(0.3) {
                    let range = if matches!(sort, Sort::Vertex | Sort::VertexSet) { Sort::VertexSet } else { Sort::EdgeSet };
                    Some(self.set_term(range, 1))
                } else {
                    None
                };
                self.scope.push((var.clone(), sort));
                let body = self.formula(depth - 1);
                self.scope.pop();
                let b = Binder { var, sort, within };
                if self.rng.gen_bool(0.5) {
                    Formula::Exists(b, Box::new(body))
                } else {
                    Formula::Forall(b, Box::new(body))
                }
            }
        }
    }
}

#[test]
fn matches_naive_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut trues = 0;
    for round in 0..100 {
        let nv = rng.gen_range(1..=5);
        let edges: Vec<(usize, usize)> =
            (0..nv).flat_map(|a| (a + 1..nv).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.5)).collect();
        let g = graph(nv, &edges);
        let f = Gen { rng: &mut rng, scope: Vec::new(), fresh: 0 }.formula(4);
        let s = Structure::new(g.clone()).unwrap();
        let fast = closed(&s, &f).unwrap();
        let slow = naive(&g, &f, &mut Vec::new());
        assert_eq!(fast, slow, "round {round}: {f}");
        // Printing and re-parsing must not change the meaning.
        assert_eq!(closed(&s, &parse_formula(&f.to_string()).unwrap()).unwrap(), fast);
        trues += fast as usize;
    }
    assert!(trues > 10 && trues < 90, "generator is degenerate: {trues} true of 100");
}
