//! Monadic second-order formulas over finite graphs and an exhaustive
//! evaluator.
//!
//! Elements are vertices or edges; sets are bitmasks over vertex or edge
//! indices, so structures are limited to 64 vertices and 64 edges. Named
//! definitions are called by name and memoized per argument tuple.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::graph_core::{norm, Edge, EdgeSet, Graph};
use crate::orientation::OrientationWitness;

pub mod cross_check;
pub mod library;
pub mod parse;
pub mod templates;

pub use library::{Library, LibraryParams};
pub use parse::{parse_formula, ParseError};

/// Largest allowed `set quantifier count * 2^domain` for one evaluation.
pub const SET_BUDGET: u64 = 1 << 26;
/// Cap on enumerated quantifier assignments during one evaluation.
pub const STEP_LIMIT: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Vertex,
    Edge,
    VertexSet,
    EdgeSet,
}

impl Sort {
    pub fn is_set(self) -> bool {
        matches!(self, Sort::VertexSet | Sort::EdgeSet)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Vertex => "vertex",
            Sort::Edge => "edge",
            Sort::VertexSet => "vset",
            Sort::EdgeSet => "eset",
        }
    }
}

/// Element and set expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// A bound variable or a structure constant.
    Name(String),
    AllVertices,
    AllEdges,
    NoVertices,
    NoEdges,
    Union(Box<Term>, Box<Term>),
    Inter(Box<Term>, Box<Term>),
    Diff(Box<Term>, Box<Term>),
    /// Vertices incident to an edge set.
    IncV(Box<Term>),
    /// Edges incident to a vertex set.
    IncE(Box<Term>),
    /// Singleton set of an element.
    Single(Box<Term>),
}

impl Term {
    pub fn name(s: &str) -> Term {
        Term::Name(s.to_string())
    }
    pub fn union(a: Term, b: Term) -> Term {
        Term::Union(Box::new(a), Box::new(b))
    }
    pub fn inter(a: Term, b: Term) -> Term {
        Term::Inter(Box::new(a), Box::new(b))
    }
    pub fn diff(a: Term, b: Term) -> Term {
        Term::Diff(Box::new(a), Box::new(b))
    }
    pub fn inc_v(a: Term) -> Term {
        Term::IncV(Box::new(a))
    }
    pub fn inc_e(a: Term) -> Term {
        Term::IncE(Box::new(a))
    }
    pub fn single(a: Term) -> Term {
        Term::Single(Box::new(a))
    }
}

/// Variable binding of a quantifier. Element variables range over `within`
/// (default: all vertices or edges); set variables over its subsets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binder {
    pub var: String,
    pub sort: Sort,
    pub within: Option<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    /// Equality of two elements or two sets of the same sort.
    Eq(Term, Term),
    /// `Inc(e, v)`: edge `e` is incident to vertex `v`.
    Inc(Term, Term),
    /// Element membership.
    Mem(Term, Term),
    Subset(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Binder, Box<Formula>),
    Forall(Binder, Box<Formula>),
    /// Named library definition applied to arguments.
    Call(String, Vec<Term>),
}

/// Shorthand constructors used by the library.
pub mod build {
    use super::{Binder, Formula, Sort, Term};

    pub fn n(s: &str) -> Term {
        Term::name(s)
    }
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }
    pub fn inc(e: Term, v: Term) -> Formula {
        Formula::Inc(e, v)
    }
    pub fn mem(x: Term, s: Term) -> Formula {
        Formula::Mem(x, s)
    }
    pub fn sub(a: Term, b: Term) -> Formula {
        Formula::Subset(a, b)
    }
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }
    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn call(name: &str, args: Vec<Term>) -> Formula {
        Formula::Call(name.to_string(), args)
    }
    fn binder(var: &str, sort: Sort, within: Option<Term>) -> Binder {
        Binder { var: var.to_string(), sort, within }
    }
    pub fn ex(var: &str, sort: Sort, f: Formula) -> Formula {
        Formula::Exists(binder(var, sort, None), Box::new(f))
    }
    pub fn ex_in(var: &str, sort: Sort, within: Term, f: Formula) -> Formula {
        Formula::Exists(binder(var, sort, Some(within)), Box::new(f))
    }
    pub fn all(var: &str, sort: Sort, f: Formula) -> Formula {
        Formula::Forall(binder(var, sort, None), Box::new(f))
    }
    pub fn all_in(var: &str, sort: Sort, within: Term, f: Formula) -> Formula {
        Formula::Forall(binder(var, sort, Some(within)), Box::new(f))
    }
    /// Strict inclusion `a ⊂ b`.
    pub fn strict_sub(a: Term, b: Term) -> Formula {
        and(vec![sub(a.clone(), b.clone()), not(sub(b, a))])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Vertex(usize),
    Edge(usize),
    VertexSet(u64),
    EdgeSet(u64),
}

impl Value {
    pub fn sort(self) -> Sort {
        match self {
            Value::Vertex(_) => Sort::Vertex,
            Value::Edge(_) => Sort::Edge,
            Value::VertexSet(_) => Sort::VertexSet,
            Value::EdgeSet(_) => Sort::EdgeSet,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MsoError {
    #[error("evaluation budget exceeded: {0}")]
    Budget(String),
    #[error("unbound name {0}")]
    Unbound(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("predicate {name} takes {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("sort mismatch: {0}")]
    Sort(String),
    #[error("structure too large: {0} (at most 64 vertices and 64 edges)")]
    TooLarge(String),
    #[error("constant {0} does not resolve in the graph")]
    BadConstant(String),
}

/// A graph with named element and set constants.
#[derive(Clone, Debug)]
pub struct Structure {
    pub graph: Graph,
    pub constants: BTreeMap<String, Value>,
    edge_index: HashMap<Edge, usize>,
    incidence: Vec<(usize, usize)>,
    vertex_edges: Vec<u64>,
}

fn full(k: usize) -> u64 {
    if k == 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

impl Structure {
    pub fn new(graph: Graph) -> Result<Structure, MsoError> {
        if graph.n() > 64 || graph.m() > 64 {
            return Err(MsoError::TooLarge(format!("{} vertices, {} edges", graph.n(), graph.m())));
        }
        let incidence: Vec<(usize, usize)> = graph.edges().to_vec();
        let edge_index = incidence.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut vertex_edges = vec![0u64; graph.n()];
        for (i, &(u, v)) in incidence.iter().enumerate() {
            vertex_edges[u] |= 1 << i;
            vertex_edges[v] |= 1 << i;
        }
        Ok(Structure { graph, constants: BTreeMap::new(), edge_index, incidence, vertex_edges })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.incidence.len()
    }

    pub fn edge_id(&self, e: Edge) -> Option<usize> {
        self.edge_index.get(&norm(e.0, e.1)).copied()
    }

    pub fn endpoints(&self, id: usize) -> (usize, usize) {
        self.incidence[id]
    }

    pub fn edge_mask(&self, edges: &EdgeSet) -> Result<u64, MsoError> {
        edges.iter().try_fold(0u64, |acc, &e| {
            let id = self.edge_id(e).ok_or_else(|| MsoError::BadConstant(format!("{e:?}")))?;
            Ok(acc | 1 << id)
        })
    }

    pub fn vertex_mask(vs: impl IntoIterator<Item = usize>) -> u64 {
        vs.into_iter().fold(0u64, |acc, v| acc | 1 << v)
    }

    pub fn set_vertex(&mut self, name: &str, v: usize) {
        self.constants.insert(name.to_string(), Value::Vertex(v));
    }

    pub fn set_edges(&mut self, name: &str, edges: &EdgeSet) -> Result<(), MsoError> {
        let mask = self.edge_mask(edges)?;
        self.constants.insert(name.to_string(), Value::EdgeSet(mask));
        Ok(())
    }

    pub fn set_vertices(&mut self, name: &str, vs: impl IntoIterator<Item = usize>) {
        self.constants.insert(name.to_string(), Value::VertexSet(Self::vertex_mask(vs)));
    }

    /// Color classes `X0, X1, ...` and the flag set `F` of an orientation witness.
    pub fn set_orientation(&mut self, w: &OrientationWitness) -> Result<(), MsoError> {
        let colors = w.coloring.num_colors();
        for c in 0..colors {
            let class = (0..self.n()).filter(|&v| w.coloring.color(v) == c);
            self.set_vertices(&format!("X{c}"), class);
        }
        self.set_edges("F", &w.flag_set)
    }

    /// Number of `X*` color-class constants.
    pub fn color_count(&self) -> usize {
        (0..).take_while(|c| self.constants.contains_key(&format!("X{c}"))).count()
    }

    /// Resolve a command-line element: a vertex label, or an edge written as
    /// two concatenated labels (`va`) or `v-a`.
    pub fn resolve_element(&self, text: &str) -> Option<Value> {
        let g = &self.graph;
        if let Some(v) = g.vertex(text) {
            return Some(Value::Vertex(v));
        }
        let splits: Vec<(&str, &str)> = match text.split_once('-') {
            Some(p) => vec![p],
            None => (1..text.len()).filter(|&i| text.is_char_boundary(i)).map(|i| text.split_at(i)).collect(),
        };
        splits.into_iter().find_map(|(a, b)| {
            let (u, v) = (g.vertex(a)?, g.vertex(b)?);
            self.edge_id((u, v)).map(Value::Edge)
        })
    }

    pub fn describe(&self, v: Value) -> String {
        let g = &self.graph;
        let edge = |i: usize| {
            let (a, b) = self.incidence[i];
            format!("{}{}", g.label(a), g.label(b))
        };
        match v {
            Value::Vertex(x) => g.label(x).to_string(),
            Value::Edge(i) => edge(i),
            Value::VertexSet(m) => {
                let items: Vec<String> = (0..self.n()).filter(|&x| m >> x & 1 == 1).map(|x| g.label(x).to_string()).collect();
                format!("{{{}}}", items.join(","))
            }
            Value::EdgeSet(m) => {
                let items: Vec<String> = (0..self.m()).filter(|&i| m >> i & 1 == 1).map(edge).collect();
                format!("{{{}}}", items.join(","))
            }
        }
    }
}

/// Named formula with typed parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub body: Formula,
}

pub type Env = BTreeMap<String, Value>;

/// Evaluator bound to one structure and library; memo tables persist across
/// calls so repeated queries share work.
pub struct Evaluator<'a> {
    pub structure: &'a Structure,
    pub library: &'a Library,
    memo: HashMap<(String, Vec<Value>), bool>,
    steps: u64,
    step_limit: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(structure: &'a Structure, library: &'a Library) -> Evaluator<'a> {
        Evaluator { structure, library, memo: HashMap::new(), steps: 0, step_limit: STEP_LIMIT }
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Evaluate `f` under `env` after the static size guard.
    pub fn eval(&mut self, f: &Formula, env: &Env) -> Result<bool, MsoError> {
        check_budget(self.structure, self.library, f)?;
        self.holds(f, env)
    }

    /// Evaluate a library predicate on concrete arguments.
    pub fn call(&mut self, name: &str, args: &[Value]) -> Result<bool, MsoError> {
        let def = self.library.get(name).ok_or_else(|| MsoError::UnknownPredicate(name.into()))?;
        check_budget(self.structure, self.library, &def.body)?;
        self.apply(name, args.to_vec())
    }

    fn apply(&mut self, name: &str, args: Vec<Value>) -> Result<bool, MsoError> {
        let key = (name.to_string(), args);
        if let Some(&b) = self.memo.get(&key) {
            return Ok(b);
        }
        let lib = self.library;
        let def = lib.get(name).ok_or_else(|| MsoError::UnknownPredicate(name.into()))?;
        if def.params.len() != key.1.len() {
            return Err(MsoError::Arity { name: name.into(), expected: def.params.len(), got: key.1.len() });
        }
        let mut env = Env::new();
        for ((p, sort), v) in def.params.iter().zip(&key.1) {
            if v.sort() != *sort {
                return Err(MsoError::Sort(format!("{name}: parameter {p} expects {}", sort.keyword())));
            }
            env.insert(p.clone(), *v);
        }
        let out = self.holds(&def.body, &env)?;
        self.memo.insert(key, out);
        Ok(out)
    }

    fn lookup(&self, name: &str, env: &Env) -> Result<Value, MsoError> {
        env.get(name)
            .or_else(|| self.structure.constants.get(name))
            .copied()
            .ok_or_else(|| MsoError::Unbound(name.into()))
    }

    pub fn term(&self, t: &Term, env: &Env) -> Result<Value, MsoError> {
        let s = self.structure;
        let set_pair = |a: &Term, b: &Term| -> Result<(Value, Value), MsoError> { Ok((self.term(a, env)?, self.term(b, env)?)) };
        Ok(match t {
            Term::Name(n) => self.lookup(n, env)?,
            Term::AllVertices => Value::VertexSet(full(s.n())),
            Term::AllEdges => Value::EdgeSet(full(s.m())),
            Term::NoVertices => Value::VertexSet(0),
            Term::NoEdges => Value::EdgeSet(0),
            Term::Union(a, b) | Term::Inter(a, b) | Term::Diff(a, b) => {
                let op = |x: u64, y: u64| match t {
                    Term::Union(..) => x | y,
                    Term::Inter(..) => x & y,
                    _ => x & !y,
                };
                match set_pair(a, b)? {
                    (Value::VertexSet(x), Value::VertexSet(y)) => Value::VertexSet(op(x, y)),
                    (Value::EdgeSet(x), Value::EdgeSet(y)) => Value::EdgeSet(op(x, y)),
                    _ => return Err(MsoError::Sort("set operation on mismatched sorts".into())),
                }
            }
            Term::IncV(a) => match self.term(a, env)? {
                Value::EdgeSet(m) => Value::VertexSet(
                    (0..s.m()).filter(|&i| m >> i & 1 == 1).fold(0, |acc, i| {
                        let (u, v) = s.incidence[i];
                        acc | 1 << u | 1 << v
                    }),
                ),
                _ => return Err(MsoError::Sort("IncV expects an edge set".into())),
            },
            Term::IncE(a) => match self.term(a, env)? {
                Value::VertexSet(m) => {
                    Value::EdgeSet((0..s.n()).filter(|&v| m >> v & 1 == 1).fold(0, |acc, v| acc | s.vertex_edges[v]))
                }
                _ => return Err(MsoError::Sort("IncE expects a vertex set".into())),
            },
            Term::Single(a) => match self.term(a, env)? {
                Value::Vertex(v) => Value::VertexSet(1 << v),
                Value::Edge(e) => Value::EdgeSet(1 << e),
                _ => return Err(MsoError::Sort("singleton of a set".into())),
            },
        })
    }

    fn tick(&mut self) -> Result<(), MsoError> {
        self.steps += 1;
        if self.steps > self.step_limit {
            return Err(MsoError::Budget(format!("more than {} quantifier steps", self.step_limit)));
        }
        Ok(())
    }

    fn domain(&self, b: &Binder, env: &Env) -> Result<Vec<Value>, MsoError> {
        let s = self.structure;
        let within = match &b.within {
            Some(t) => Some(self.term(t, env)?),
            None => None,
        };
        let mask = match (b.sort, within) {
            (Sort::Vertex | Sort::VertexSet, None) => full(s.n()),
            (Sort::Edge | Sort::EdgeSet, None) => full(s.m()),
            (Sort::Vertex | Sort::VertexSet, Some(Value::VertexSet(m))) => m,
            (Sort::Edge | Sort::EdgeSet, Some(Value::EdgeSet(m))) => m,
            _ => return Err(MsoError::Sort(format!("binder {} ranges over the wrong sort", b.var))),
        };
        Ok(match b.sort {
            Sort::Vertex => bits(mask).map(Value::Vertex).collect(),
            Sort::Edge => bits(mask).map(Value::Edge).collect(),
            Sort::VertexSet => subsets(mask).map(Value::VertexSet).collect(),
            Sort::EdgeSet => subsets(mask).map(Value::EdgeSet).collect(),
        })
    }

    fn holds(&mut self, f: &Formula, env: &Env) -> Result<bool, MsoError> {
        Ok(match f {
            Formula::Const(b) => *b,
            Formula::Eq(a, b) => {
                let (x, y) = (self.term(a, env)?, self.term(b, env)?);
                if x.sort() != y.sort() {
                    return Err(MsoError::Sort("equality between different sorts".into()));
                }
                x == y
            }
            Formula::Inc(e, v) => match (self.term(e, env)?, self.term(v, env)?) {
                (Value::Edge(i), Value::Vertex(x)) => {
                    let (a, b) = self.structure.incidence[i];
                    a == x || b == x
                }
                _ => return Err(MsoError::Sort("Inc expects an edge and a vertex".into())),
            },
            Formula::Mem(x, s) => match (self.term(x, env)?, self.term(s, env)?) {
                (Value::Vertex(v), Value::VertexSet(m)) | (Value::Edge(v), Value::EdgeSet(m)) => m >> v & 1 == 1,
                _ => return Err(MsoError::Sort("membership between mismatched sorts".into())),
            },
            Formula::Subset(a, b) => match (self.term(a, env)?, self.term(b, env)?) {
                (Value::VertexSet(x), Value::VertexSet(y)) | (Value::EdgeSet(x), Value::EdgeSet(y)) => x & !y == 0,
                _ => return Err(MsoError::Sort("inclusion between mismatched sorts".into())),
            },
            Formula::Not(g) => !self.holds(g, env)?,
            Formula::And(gs) => {
                for g in gs {
                    if !self.holds(g, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(gs) => {
                for g in gs {
                    if self.holds(g, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !self.holds(a, env)? || self.holds(b, env)?,
            Formula::Iff(a, b) => self.holds(a, env)? == self.holds(b, env)?,
            Formula::Exists(b, g) | Formula::Forall(b, g) => {
                let want = matches!(f, Formula::Exists(..));
                let mut inner = env.clone();
                for v in self.domain(b, env)? {
                    self.tick()?;
                    inner.insert(b.var.clone(), v);
                    if self.holds(g, &inner)? == want {
                        return Ok(want);
                    }
                }
                !want
            }
            Formula::Call(name, args) => {
                let vals = args.iter().map(|t| self.term(t, env)).collect::<Result<Vec<_>, _>>()?;
                self.apply(name, vals)?
            }
        })
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| mask >> i & 1 == 1)
}

/// All submasks of `mask`, starting from the empty set.
fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask { None } else { Some((cur.wrapping_sub(mask)) & mask) };
        Some(cur)
    })
}

/// One-shot evaluation of a closed formula.
pub fn eval(s: &Structure, lib: &Library, f: &Formula, env: &Env) -> Result<bool, MsoError> {
    Evaluator::new(s, lib).eval(f, env)
}

/// Static guard: number of set quantifiers reachable from `f` (each definition
/// counted once) times `2^d`, `d` the largest quantified domain.
pub fn check_budget(s: &Structure, lib: &Library, f: &Formula) -> Result<(), MsoError> {
    let mut seen = BTreeSet::new();
    let (mut count, mut widest) = (0u64, 0usize);
    let mut todo = vec![f.clone()];
    while let Some(g) = todo.pop() {
        walk(&g, &mut |node| match node {
            Formula::Exists(b, _) | Formula::Forall(b, _) if b.sort.is_set() => {
                count += 1;
                let d = match (&b.within, b.sort) {
                    (Some(Term::Name(c)), _) => match s.constants.get(c) {
                        Some(Value::VertexSet(m) | Value::EdgeSet(m)) => m.count_ones() as usize,
                        _ => domain_size(s, b.sort),
                    },
                    (_, sort) => domain_size(s, sort),
                };
                widest = widest.max(d);
            }
            Formula::Call(name, _)
                if seen.insert(name.clone()) => {
                    if let Some(def) = lib.get(name) {
                        todo.push(def.body.clone());
                    }
                }
            _ => {}
        });
    }
    let cost = if widest >= 40 { u64::MAX } else { count.saturating_mul(1u64 << widest) };
    if cost > SET_BUDGET {
        return Err(MsoError::Budget(format!("{count} set quantifiers over domains up to {widest} elements")));
    }
    Ok(())
}

fn domain_size(s: &Structure, sort: Sort) -> usize {
    match sort {
        Sort::Vertex | Sort::VertexSet => s.n(),
        Sort::Edge | Sort::EdgeSet => s.m(),
    }
}

/// Visit every subformula.
pub fn walk(f: &Formula, visit: &mut dyn FnMut(&Formula)) {
    visit(f);
    match f {
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => walk(g, visit),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| walk(g, visit)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            walk(a, visit);
            walk(b, visit);
        }
        _ => {}
    }
}

fn term_names(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Name(n) => {
            out.insert(n.clone());
        }
        Term::Union(a, b) | Term::Inter(a, b) | Term::Diff(a, b) => {
            term_names(a, out);
            term_names(b, out);
        }
        Term::IncV(a) | Term::IncE(a) | Term::Single(a) => term_names(a, out),
        _ => {}
    }
}

/// Names used in `f` that no quantifier binds.
pub fn free_names(f: &Formula) -> BTreeSet<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut terms = BTreeSet::new();
        match f {
            Formula::Eq(a, b) | Formula::Inc(a, b) | Formula::Mem(a, b) | Formula::Subset(a, b) => {
                term_names(a, &mut terms);
                term_names(b, &mut terms);
            }
            Formula::Call(_, args) => args.iter().for_each(|a| term_names(a, &mut terms)),
            Formula::Not(g) => go(g, bound, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, bound, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Exists(b, g) | Formula::Forall(b, g) => {
                if let Some(t) = &b.within {
                    term_names(t, &mut terms);
                }
                bound.push(b.var.clone());
                go(g, bound, out);
                bound.pop();
            }
            Formula::Const(_) => {}
        }
        out.extend(terms.into_iter().filter(|n| !bound.contains(n)));
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(n) => write!(f, "{n}"),
            Term::AllVertices => write!(f, "V"),
            Term::AllEdges => write!(f, "E"),
            Term::NoVertices => write!(f, "(empty-v)"),
            Term::NoEdges => write!(f, "(empty-e)"),
            Term::Union(a, b) => write!(f, "(union {a} {b})"),
            Term::Inter(a, b) => write!(f, "(inter {a} {b})"),
            Term::Diff(a, b) => write!(f, "(diff {a} {b})"),
            Term::IncV(a) => write!(f, "(incv {a})"),
            Term::IncE(a) => write!(f, "(ince {a})"),
            Term::Single(a) => write!(f, "(set {a})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, gs: &[Formula]| {
            write!(f, "({head}")?;
            for g in gs {
                write!(f, " {g}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::Const(true) => write!(f, "true"),
            Formula::Const(false) => write!(f, "false"),
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Inc(a, b) => write!(f, "(inc {a} {b})"),
            Formula::Mem(a, b) => write!(f, "(in {a} {b})"),
            Formula::Subset(a, b) => write!(f, "(sub {a} {b})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) => list(f, "and", gs),
            Formula::Or(gs) => list(f, "or", gs),
            Formula::Implies(a, b) => write!(f, "(-> {a} {b})"),
            Formula::Iff(a, b) => write!(f, "(<-> {a} {b})"),
            Formula::Exists(b, g) | Formula::Forall(b, g) => {
                let q = if matches!(self, Formula::Exists(..)) { "exists" } else { "forall" };
                match &b.within {
                    Some(t) => write!(f, "({q} ({} {} {t}) {g})", b.var, b.sort),
                    None => write!(f, "({q} ({} {}) {g})", b.var, b.sort),
                }
            }
            Formula::Call(name, args) => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests;
