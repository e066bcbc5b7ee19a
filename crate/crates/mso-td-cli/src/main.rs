//! `mso-td`: generators, decomposition builders, validators, property
//! automata and the MSO evaluator behind one command.
//!
//! Results go to stdout as JSON. Exit codes: 0 success, 1 property false or
//! decomposition invalid (see the `kind` field), 2 usage or input error,
//! 3 evaluation budget exceeded.

mod io;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use mso_td::feedback_aug::{augment_edges, augment_vertices, FeedbackError};
use mso_td::graph_core::{
    halin_from_plane_tree, norm, random_halin, random_kcycle, EdgeSet, Graph, GraphDoc, HalinInput, KCycleInput,
};
use mso_td::halin_builder::{build_halin_td, build_halin_td_uncontracted};
use mso_td::kcycle_builder::{build_kcycle_td, build_kcycle_td_uncontracted};
use mso_td::mso::cross_check::{attach_orientation, halin_structure, kcycle_structure};
use mso_td::mso::{free_names, parse_formula, Env, Evaluator, Library, LibraryParams, MsoError, Sort, Structure, Value};
use mso_td::orientation::{orient_tree_from, proper_coloring};
use mso_td::property_automata::{AutomatonError, NamedProperty};
use mso_td::remember_builder::{build_remember_td, find_spanning_tree, random_outerplanar};
use mso_td::tree_decomposition::{validate, TreeDecomposition, Violation};

use io::{inline_or_file, parse_pairs, read_bundle, read_graph_doc, read_input, read_text, Bundle, Failure, Input};

#[derive(Parser)]
#[command(name = "mso-td", version, about = "Definable tree decompositions and property automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Halin,
    Kcycle,
    Remember,
}

#[derive(Subcommand)]
enum Command {
    /// Random Halin graph with its tree, cycle and root leaf.
    GenHalin {
        #[arg(long, default_value_t = 3)]
        internal: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random k-cycle tree with its center, level cycles and level roots.
    GenKcycle {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        branching: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random bounded-degree k-outerplanar graph.
    GenOuterplanar {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a decomposition of the graph read from `--input` or stdin.
    Decompose {
        #[arg(long, value_enum)]
        method: Method,
        /// Keep bags that the final pass would merge.
        #[arg(long)]
        uncontracted: bool,
        /// Vertex remember bound for the spanning-tree search.
        #[arg(long)]
        kappa: Option<usize>,
        /// Edge remember bound for the spanning-tree search.
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Extend a decomposition by extra edges or by new vertices.
    Augment {
        /// JSON list of label pairs (or `@file`).
        #[arg(long, conflicts_with = "vertices", required_unless_present = "vertices")]
        edges: Option<String>,
        /// JSON `{"vertices": [...], "edges": [[..], ..]}` (or `@file`).
        #[arg(long)]
        vertices: Option<String>,
        /// Per-block feedback bound.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Check a decomposition bundle.
    VerifyTd {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Decide a property by running its automaton over a decomposition.
    Decide {
        #[arg(long)]
        property: String,
        /// Modulus for `parity`.
        #[arg(long, default_value_t = 2)]
        modulus: usize,
        /// Decomposition to build when the input is a plain graph.
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Evaluate a library predicate or a formula file.
    MsoEval {
        #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
        predicate: Option<String>,
        /// `name=value` pairs; sets are written `{a,b}`.
        #[arg(long, default_value = "")]
        args: String,
        #[arg(long)]
        formula: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Graphviz rendering of a graph or a decomposition bundle.
    ExportDot {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Successful output with an exit code; 1 carries a `kind`.
struct Outcome {
    body: Output,
    code: u8,
}

enum Output {
    Json(Json),
    Text(String),
}

fn ok(v: Json) -> Outcome {
    Outcome { body: Output::Json(v), code: 0 }
}

fn verdict(mut v: Json, holds: bool, kind: &str) -> Outcome {
    if !holds {
        v["kind"] = json!(kind);
    }
    Outcome { body: Output::Json(v), code: u8::from(!holds) }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code == 0 {
                return ExitCode::SUCCESS;
            }
            println!("{}", Failure::usage(e.kind().to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(Outcome { body, code }) => {
            match body {
                Output::Json(v) => println!("{v}"),
                Output::Text(t) => print!("{t}"),
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("mso-td: {}", f.message);
            println!("{}", f.to_json());
            ExitCode::from(f.code as u8)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::GenHalin { internal, seed } => {
            let h = halin_from_plane_tree(&random_halin(internal, seed))?;
            Ok(ok(h.to_doc().to_value()))
        }
        Command::GenKcycle { k, branching, seed } => Ok(ok(random_kcycle(k, branching, seed).to_doc().to_value())),
        Command::GenOuterplanar { k, max_degree, n, seed } => {
            Ok(ok(GraphDoc::from_graph(&random_outerplanar(k, max_degree, n, seed).graph).to_value()))
        }
        Command::Decompose { method, uncontracted, kappa, lambda, input } => {
            let (g, doc) = read_graph_doc(input.as_deref())?;
            let (td, doc) = decompose(&g, doc, method, uncontracted, kappa, lambda)?;
            Ok(ok(bundle_json(&g, doc, &td, method_name(method))))
        }
        Command::Augment { edges, vertices, bound, input } => augment(edges, vertices, bound, input),
        Command::VerifyTd { input } => {
            let (g, td, _) = read_bundle(input.as_deref())?;
            let report = validate(&g, &td);
            let width = td.width().map_err(|e| Failure::input(e.to_string()))?;
            if report.is_valid() {
                return Ok(ok(json!({ "valid": true, "width": width })));
            }
            let violations: Vec<String> = report.violations.iter().map(|v| describe(&g, v)).collect();
            Ok(verdict(json!({ "valid": false, "width": width, "violations": violations }), false, "invalid_decomposition"))
        }
        Command::Decide { property, modulus, method, input } => {
            let p = NamedProperty::parse(&property, modulus).map_err(|e| Failure::usage(e.to_string()))?;
            let (g, td, used) = match read_input(input.as_deref())? {
                Input::Bundle(b) => {
                    let g = mso_td::graph_core::graph_from_doc(&b.graph)?;
                    let td = TreeDecomposition::from_doc(&g, &b.decomposition).map_err(|e| Failure::input(e.to_string()))?;
                    (g, td, b.method.unwrap_or_else(|| "given".into()))
                }
                Input::Graph(doc) => {
                    let g = mso_td::graph_core::graph_from_doc(&doc)?;
                    let m = method.unwrap_or_else(|| default_method(&doc));
                    let (td, _) = decompose(&g, doc, m, false, None, None)?;
                    (g, td, method_name(m).to_string())
                }
            };
            let result = p.run(&g, &td).map_err(automaton_failure)?;
            Ok(verdict(json!({ "property": p.name(), "result": result, "method": used }), result, "property_false"))
        }
        Command::MsoEval { predicate, args, formula, input } => mso_eval(predicate, &args, formula, input),
        Command::ExportDot { input } => match read_input(input.as_deref())? {
            Input::Bundle(b) => {
                let g = mso_td::graph_core::graph_from_doc(&b.graph)?;
                let td = TreeDecomposition::from_doc(&g, &b.decomposition).map_err(|e| Failure::input(e.to_string()))?;
                Ok(Outcome { body: Output::Text(td.to_dot(&g)), code: 0 })
            }
            Input::Graph(doc) => {
                let g = mso_td::graph_core::graph_from_doc(&doc)?;
                Ok(Outcome { body: Output::Text(graph_dot(&g)), code: 0 })
            }
        },
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Halin => "halin",
        Method::Kcycle => "kcycle",
        Method::Remember => "remember",
    }
}

fn default_method(doc: &GraphDoc) -> Method {
    if doc.center.is_some() {
        Method::Kcycle
    } else if doc.cycle_edges.is_some() && doc.root.is_some() {
        Method::Halin
    } else {
        Method::Remember
    }
}

fn tree_of(g: &Graph, doc: &GraphDoc) -> Result<Option<EdgeSet>, Failure> {
    let Some(list) = &doc.tree_edges else { return Ok(None) };
    let pairs = GraphDoc::resolve(g, list)?;
    Ok(Some(pairs.into_iter().map(|(u, v)| norm(u, v)).collect()))
}

fn labelled(g: &Graph, edges: &EdgeSet) -> Vec<[String; 2]> {
    edges.iter().map(|&(u, v)| [g.label(u).to_string(), g.label(v).to_string()]).collect()
}

/// Build with `method`; the returned document records the tree used.
fn decompose(
    g: &Graph,
    mut doc: GraphDoc,
    method: Method,
    uncontracted: bool,
    kappa: Option<usize>,
    lambda: Option<usize>,
) -> Result<(TreeDecomposition, GraphDoc), Failure> {
    let build = |e: mso_td::halin_builder::BuildError| Failure::input(e.to_string());
    let td = match method {
        Method::Halin => {
            let h = HalinInput::from_doc(g.clone(), &doc)?;
            if uncontracted { build_halin_td_uncontracted(&h) } else { build_halin_td(&h) }.map_err(build)?
        }
        Method::Kcycle => {
            let kc = KCycleInput::from_doc(g.clone(), &doc)?;
            if uncontracted { build_kcycle_td_uncontracted(&kc) } else { build_kcycle_td(&kc) }.map_err(build)?
        }
        Method::Remember => {
            let tree = match tree_of(g, &doc)? {
                Some(t) => t,
                None => {
                    let n = g.n();
                    let search = find_spanning_tree(g, kappa.unwrap_or(n), lambda.unwrap_or(n))
                        .map_err(|e| Failure::input(e.to_string()))?;
                    search.tree.ok_or_else(|| {
                        let (vr, er) = search.best;
                        Failure {
                            code: 1,
                            kind: "no_tree",
                            message: format!("no spanning tree within the remember bounds (best vr={vr}, er={er})"),
                        }
                    })?
                }
            };
            let col = proper_coloring(g, g.max_degree(), None).map_err(|e| Failure::input(e.to_string()))?;
            doc.tree_edges = Some(labelled(g, &tree));
            build_remember_td(g, &tree, &col).map_err(|e| Failure::input(e.to_string()))?
        }
    };
    Ok((td, doc))
}

fn bundle_json(g: &Graph, doc: GraphDoc, td: &TreeDecomposition, method: &str) -> Json {
    let b = Bundle { graph: doc, decomposition: td.to_doc(g), method: Some(method.to_string()), width: td.width().ok() };
    serde_json::to_value(b).expect("bundle serializes")
}

fn feedback_failure(e: FeedbackError) -> Failure {
    match e {
        FeedbackError::BoundExceeded { .. } => Failure { code: 1, kind: "bound_exceeded", message: e.to_string() },
        other => Failure::input(other.to_string()),
    }
}

fn augment(edges: Option<String>, vertices: Option<String>, bound: Option<usize>, input: Option<PathBuf>) -> Result<Outcome, Failure> {
    let (g, td, b) = read_bundle(input.as_deref())?;
    let tree = tree_of(&g, &b.graph)?.ok_or_else(|| Failure::input("the bundle's graph needs `tree_edges`"))?;
    let bound = bound.unwrap_or(usize::MAX);
    let (graph, out) = if let Some(text) = edges {
        let pairs = GraphDoc::resolve(&g, &parse_pairs(&inline_or_file(&text)?)?)?;
        let extra: EdgeSet = pairs.into_iter().map(|(u, v)| norm(u, v)).collect();
        let ext = g.with_edges(&extra)?;
        let col = proper_coloring(&ext, ext.max_degree(), None).map_err(|e| Failure::input(e.to_string()))?;
        let out = augment_edges(&g, &td, &tree, &extra, &col, bound).map_err(feedback_failure)?;
        (ext, out)
    } else {
        let text = inline_or_file(vertices.as_deref().unwrap_or("{}"))?;
        let spec: serde_json::Map<String, Json> =
            serde_json::from_str(&text).map_err(|e| Failure::input(format!("bad vertex extension: {e}")))?;
        let labels: Vec<String> = serde_json::from_value(spec.get("vertices").cloned().unwrap_or(json!([])))
            .map_err(|e| Failure::input(format!("`vertices`: {e}")))?;
        let pairs: Vec<[String; 2]> = serde_json::from_value(spec.get("edges").cloned().unwrap_or(json!([])))
            .map_err(|e| Failure::input(format!("`edges`: {e}")))?;
        // Resolve against the graph with the new labels appended.
        let mut all_labels = g.labels().to_vec();
        all_labels.extend(labels.iter().cloned());
        let scratch = Graph::new(all_labels, std::iter::empty())?;
        let new_edges: EdgeSet = GraphDoc::resolve(&scratch, &pairs)?.into_iter().map(|(u, v)| norm(u, v)).collect();
        augment_vertices(&g, &td, &tree, &labels, &new_edges, bound).map_err(feedback_failure)?
    };
    let mut doc = GraphDoc::from_graph(&graph);
    doc.tree_edges = b.graph.tree_edges.clone();
    Ok(ok(bundle_json(&graph, doc, &out, "augment")))
}

fn automaton_failure(e: AutomatonError) -> Failure {
    match e {
        AutomatonError::ArityLimit { .. } | AutomatonError::UnorderedUnbounded { .. } => Failure::budget(e.to_string()),
        AutomatonError::UnknownProperty(_) => Failure::usage(e.to_string()),
        other => Failure::input(other.to_string()),
    }
}

fn mso_failure(e: MsoError) -> Failure {
    match e {
        MsoError::Budget(_) | MsoError::TooLarge(_) => Failure::budget(e.to_string()),
        MsoError::UnknownPredicate(_) | MsoError::Arity { .. } => Failure::usage(e.to_string()),
        other => Failure::input(other.to_string()),
    }
}

/// Structure with every constant the annotations allow, and a library sized
/// for it.
fn structure_for(g: &Graph, doc: &GraphDoc) -> Result<(Structure, Library), Failure> {
    let cross = |e: mso_td::mso::cross_check::CrossCheckError| Failure::input(e.to_string());
    if doc.center.is_some() {
        let kc = KCycleInput::from_doc(g.clone(), doc)?;
        let lib = Library::standard(LibraryParams { levels: kc.k(), ..LibraryParams::default() });
        return Ok((kcycle_structure(&kc).map_err(cross)?, lib));
    }
    let lib = Library::standard(LibraryParams::default());
    if doc.cycle_edges.is_some() && doc.root.is_some() {
        let h = HalinInput::from_doc(g.clone(), doc)?;
        return Ok((halin_structure(&h).map_err(cross)?, lib));
    }
    let mut s = Structure::new(g.clone()).map_err(mso_failure)?;
    let tree = match tree_of(g, doc)? {
        Some(t) => Some(t),
        None => find_spanning_tree(g, g.n(), g.n()).ok().and_then(|r| r.tree),
    };
    if let Some(tree) = tree {
        // Tree away from the first vertex, other edges from lower to higher index.
        let mut o = orient_tree_from(g.n(), &tree, 0);
        for &(u, v) in g.edges() {
            o.entry((u, v)).or_insert((u, v));
        }
        attach_orientation(&mut s, &o).map_err(cross)?;
        s.set_edges("E_T", &tree).map_err(mso_failure)?;
    }
    Ok((s, lib))
}

/// Split on commas outside braces.
fn split_args(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let (mut cur, mut depth) = (String::new(), 0usize);
    for ch in text.chars() {
        match ch {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn parse_value(s: &Structure, sort: Sort, text: &str) -> Result<Value, Failure> {
    let bad = || Failure::usage(format!("cannot read `{text}` at sort {}", sort.keyword()));
    if let Some(v @ Value::VertexSet(_) | v @ Value::EdgeSet(_)) = s.constants.get(text).copied() {
        return if v.sort() == sort { Ok(v) } else { Err(bad()) };
    }
    match sort {
        Sort::Vertex | Sort::Edge => match s.resolve_element(text) {
            Some(v) if v.sort() == sort => Ok(v),
            _ => Err(bad()),
        },
        Sort::VertexSet | Sort::EdgeSet => {
            let inner = text.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(bad)?;
            let elem = if sort == Sort::VertexSet { Sort::Vertex } else { Sort::Edge };
            let mut mask = 0u64;
            for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                match parse_value(s, elem, part)? {
                    Value::Vertex(i) | Value::Edge(i) => mask |= 1 << i,
                    _ => return Err(bad()),
                }
            }
            Ok(if sort == Sort::VertexSet { Value::VertexSet(mask) } else { Value::EdgeSet(mask) })
        }
    }
}

fn mso_eval(predicate: Option<String>, args: &str, formula: Option<PathBuf>, input: Option<PathBuf>) -> Result<Outcome, Failure> {
    let (g, doc) = read_graph_doc(input.as_deref())?;
    let (s, lib) = structure_for(&g, &doc)?;
    let mut ev = Evaluator::new(&s, &lib);
    let (label, result) = if let Some(name) = predicate {
        let def = lib.get(&name).ok_or_else(|| Failure::usage(format!("unknown predicate `{name}`")))?;
        let given = split_args(args);
        if given.len() != def.params.len() {
            return Err(Failure::usage(format!("`{}` takes {} arguments, got {}", def.name, def.params.len(), given.len())));
        }
        let mut values = Vec::new();
        for (i, (param, sort)) in def.params.iter().enumerate() {
            let text = given
                .iter()
                .find_map(|a| a.split_once('=').filter(|(k, _)| k.trim() == param).map(|(_, v)| v.trim()))
                .or_else(|| given.get(i).filter(|a| !a.contains('=')).map(String::as_str))
                .ok_or_else(|| Failure::usage(format!("missing argument `{param}`")))?;
            values.push(parse_value(&s, *sort, text)?);
        }
        let name = def.name.clone();
        (name.clone(), ev.call(&name, &values).map_err(mso_failure)?)
    } else {
        let path = formula.expect("clap requires one of predicate or formula");
        let text = read_text(Some(&path))?;
        let f = parse_formula(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let unknown: BTreeSet<String> = free_names(&f).into_iter().filter(|n| !s.constants.contains_key(n)).collect();
        if !unknown.is_empty() {
            return Err(Failure::input(format!("free names without a constant: {unknown:?}")));
        }
        (path.display().to_string(), ev.eval(&f, &Env::new()).map_err(mso_failure)?)
    };
    Ok(verdict(json!({ "predicate": label, "result": result, "steps": ev.steps() }), result, "property_false"))
}

fn describe(g: &Graph, v: &Violation) -> String {
    match v {
        Violation::UnknownVertex { bag, vertex } => format!("bag {bag} holds unknown vertex #{vertex}"),
        Violation::UncoveredVertex(x) => format!("vertex {} is in no bag", g.label(*x)),
        Violation::UncoveredEdge((a, b)) => format!("edge {}-{} is in no bag", g.label(*a), g.label(*b)),
        Violation::Disconnected { vertex, bags } => {
            format!("bags holding {} are disconnected (bags {} and {})", g.label(*vertex), bags.0, bags.1)
        }
    }
}

fn graph_dot(g: &Graph) -> String {
    let mut s = String::from("graph g {\n");
    for v in 0..g.n() {
        s.push_str(&format!("  \"{}\";\n", g.label(v)));
    }
    for &(u, v) in g.edges() {
        s.push_str(&format!("  \"{}\" -- \"{}\";\n", g.label(u), g.label(v)));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::split_args;

    #[test]
    fn args_split_outside_braces() {
        assert_eq!(split_args("e=va, X={a,b},f=ab"), vec!["e=va", "X={a,b}", "f=ab"]);
        assert!(split_args(" ").is_empty());
    }
}
